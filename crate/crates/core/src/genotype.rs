//! Mixed real–binary genotype `(β, b(a))` and the fitness-ordered population.
//!
//! Each direction variable `a_i` occupies `bits_per_var` bits, most significant
//! bit first, in plain (non-Gray) binary. A code `k` maps affinely onto the
//! region's bounds for that variable and the resulting box point is projected
//! onto the unit sphere.

use std::collections::HashSet;

use serde::{Serialize, Serializer};

use crate::error::{HmgaError, Result};
use crate::problem::norm;
use crate::repair::RepairOutcome;
use crate::zoom::SearchRegion;

pub const MIN_BITS_PER_VAR: u32 = 3;
pub const MAX_BITS_PER_VAR: u32 = 16;

const ZERO_NORM: f64 = 1e-12;

/// Largest code representable with `bits_per_var` bits.
pub fn max_code(bits_per_var: u32) -> u32 {
    (1u32 << bits_per_var) - 1
}

/// Integer code of every variable block.
pub fn variable_codes(bits: &[bool], bits_per_var: u32) -> Vec<u32> {
    bits.chunks(bits_per_var as usize)
        .map(|block| block.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
        .collect()
}

fn push_code(bits: &mut Vec<bool>, code: u32, bits_per_var: u32) {
    for shift in (0..bits_per_var).rev() {
        bits.push((code >> shift) & 1 == 1);
    }
}

/// Box coordinates before projection onto the unit sphere.
pub fn decode_raw(bits: &[bool], bits_per_var: u32, region: &SearchRegion) -> Vec<f64> {
    let denom = max_code(bits_per_var) as f64;
    variable_codes(bits, bits_per_var)
        .into_iter()
        .enumerate()
        .map(|(i, code)| {
            let (lo, hi) = (region.a_min[i], region.a_max[i]);
            lo + code as f64 * (hi - lo) / denom
        })
        .collect()
}

/// Decodes a bit string into a unit direction.
pub fn decode(bits: &[bool], bits_per_var: u32, region: &SearchRegion) -> Result<Vec<f64>> {
    let n = region.dimension();
    if bits.len() != n * bits_per_var as usize {
        return Err(HmgaError::Dimension {
            expected: n * bits_per_var as usize,
            got: bits.len(),
        });
    }
    let raw = decode_raw(bits, bits_per_var, region);
    let len = norm(&raw);
    if len < ZERO_NORM {
        return Err(HmgaError::ZeroDirection);
    }
    Ok(raw.into_iter().map(|v| v / len).collect())
}

/// Result of [`encode`]: the bit string and how many components were clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub bits: Vec<bool>,
    pub clamped: usize,
}

/// Quantizes each component to the nearest code (ties round up), clamping
/// components outside the region's bounds.
pub fn encode(a: &[f64], bits_per_var: u32, region: &SearchRegion) -> Encoded {
    let top = max_code(bits_per_var);
    let mut bits = Vec::with_capacity(a.len() * bits_per_var as usize);
    let mut clamped = 0;
    for (i, &ai) in a.iter().enumerate() {
        let (lo, hi) = (region.a_min[i], region.a_max[i]);
        let v = if ai < lo {
            clamped += 1;
            lo
        } else if ai > hi {
            clamped += 1;
            hi
        } else {
            ai
        };
        let code = if hi > lo {
            let scaled = (v - lo) / (hi - lo) * top as f64;
            ((scaled + 0.5).floor() as u32).min(top)
        } else {
            0
        };
        push_code(&mut bits, code, bits_per_var);
    }
    Encoded { bits, clamped }
}

fn serialize_bits<S: Serializer>(bits: &[bool], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&bit_string(bits))
}

/// Bits rendered as `'0'`/`'1'` text.
pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// A solution `(β, b(a))` together with its cached phenotype and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedGenotype {
    pub beta: f64,
    #[serde(serialize_with = "serialize_bits")]
    pub bits: Vec<bool>,
    pub direction: Vec<f64>,
    pub fitness: f64,
    #[serde(skip)]
    pub repair: Option<RepairOutcome>,
}

impl MixedGenotype {
    /// Builds a genotype by decoding `bits` in `region`; fitness is unset.
    pub fn from_bits(
        beta: f64,
        bits: Vec<bool>,
        bits_per_var: u32,
        region: &SearchRegion,
    ) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(HmgaError::Contract(format!(
                "beta must be nonnegative, got {beta}"
            )));
        }
        let direction = decode(&bits, bits_per_var, region)?;
        Ok(MixedGenotype {
            beta,
            bits,
            direction,
            fitness: f64::NEG_INFINITY,
            repair: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.direction.len()
    }

    pub fn bits_per_var(&self) -> u32 {
        (self.bits.len() / self.direction.len().max(1)) as u32
    }

    pub fn codes(&self) -> Vec<u32> {
        variable_codes(&self.bits, self.bits_per_var())
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness > f64::NEG_INFINITY
    }

    /// Point `β a` in standard space.
    pub fn point(&self) -> Vec<f64> {
        self.direction.iter().map(|a| self.beta * a).collect()
    }
}

/// Stable descending sort by fitness; equal fitnesses keep insertion order.
pub fn rank(members: &mut [MixedGenotype]) {
    members.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
}

/// Fitness-ordered list of genotypes whose first `elite_size` members form
/// the elite.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<MixedGenotype>,
    pub elite_size: usize,
}

impl Population {
    pub fn new(members: Vec<MixedGenotype>, elite_size: usize) -> Self {
        Population {
            members,
            elite_size,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn rank(&mut self) {
        rank(&mut self.members);
    }

    pub fn elite(&self) -> &[MixedGenotype] {
        &self.members[..self.elite_size.min(self.members.len())]
    }

    pub fn non_elite(&self) -> &[MixedGenotype] {
        &self.members[self.elite_size.min(self.members.len())..]
    }

    pub fn best(&self) -> Option<&MixedGenotype> {
        self.members
            .iter()
            .reduce(|best, m| if m.fitness > best.fitness { m } else { best })
    }

    pub fn best_fitness(&self) -> f64 {
        self.best().map_or(f64::NEG_INFINITY, |m| m.fitness)
    }

    /// Fraction of members with distinct bit strings.
    pub fn distinct_fraction(&self) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        let distinct: HashSet<&[bool]> = self.members.iter().map(|m| m.bits.as_slice()).collect();
        distinct.len() as f64 / self.members.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box(n: usize) -> SearchRegion {
        SearchRegion::initial(0.0, 8.0, n).unwrap()
    }

    #[test]
    fn decode_corners() {
        let r = unit_box(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = decode(&[false; 10], 5, &r).unwrap();
        assert!((a[0] + h).abs() < 1e-15 && (a[1] + h).abs() < 1e-15);
        let a = decode(&[true; 10], 5, &r).unwrap();
        assert!((a[0] - h).abs() < 1e-15 && (a[1] - h).abs() < 1e-15);
    }

    #[test]
    fn decode_raw_dequantization() {
        let r = unit_box(1);
        let raw = decode_raw(&[true, false, false, false], 4, &r);
        // independent integer arithmetic: (2*8 - 15) / 15
        assert!((raw[0] - 1.0 / 15.0).abs() < 1e-15);
        assert!((raw[0] - 0.0667).abs() < 1e-4);
    }

    #[test]
    fn decode_zero_norm_is_an_error() {
        let r = SearchRegion {
            a_min: vec![-1.0, -1.0],
            a_max: vec![1.0, 1.0],
            beta_min: 0.0,
            beta_max: 8.0,
            generation_created: 0,
        };
        // with 1 bit the codes are -1 and 1, but a degenerate box [0, 0] yields zero
        let flat = SearchRegion {
            a_min: vec![0.0, 0.0],
            a_max: vec![0.0, 0.0],
            ..r
        };
        assert_eq!(decode(&[false; 6], 3, &flat), Err(HmgaError::ZeroDirection));
    }

    #[test]
    fn encode_bounds_and_midpoint() {
        let r = unit_box(1);
        assert_eq!(variable_codes(&encode(&[-1.0], 4, &r).bits, 4), vec![0]);
        assert_eq!(variable_codes(&encode(&[1.0], 4, &r).bits, 4), vec![15]);
        // 7.5 rounds half up
        assert_eq!(variable_codes(&encode(&[0.0], 4, &r).bits, 4), vec![8]);
    }

    #[test]
    fn encode_clamps_out_of_bounds() {
        let r = SearchRegion {
            a_min: vec![0.5, -1.0],
            a_max: vec![0.6, 1.0],
            beta_min: 0.0,
            beta_max: 8.0,
            generation_created: 0,
        };
        let e = encode(&[0.8, 0.6], 5, &r);
        assert_eq!(e.clamped, 1);
        assert_eq!(variable_codes(&e.bits, 5)[0], 31);
    }

    #[test]
    fn rank_is_stable_descending() {
        let r = unit_box(1);
        let mk = |f: f64, code: bool| {
            let mut g = MixedGenotype::from_bits(0.0, vec![code, true, true], 3, &r).unwrap();
            g.fitness = f;
            g
        };
        let mut m = vec![mk(1.0, false), mk(5.0, false), mk(3.0, false)];
        rank(&mut m);
        let f: Vec<f64> = m.iter().map(|g| g.fitness).collect();
        assert_eq!(f, vec![5.0, 3.0, 1.0]);

        let mut m = vec![mk(2.0, false), mk(2.0, true)];
        rank(&mut m);
        assert!(!m[0].bits[0] && m[1].bits[0]);
    }

    #[test]
    fn genotype_serializes_bit_string() {
        let r = unit_box(1);
        let g = MixedGenotype::from_bits(1.5, vec![true, false, true], 3, &r).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["bits"], "101");
        assert_eq!(v["beta"], 1.5);
    }

    #[test]
    fn distinct_fraction_counts_bitstrings() {
        let r = unit_box(1);
        let g1 = MixedGenotype::from_bits(0.0, vec![true, false, true], 3, &r).unwrap();
        let g2 = MixedGenotype::from_bits(0.0, vec![true, true, true], 3, &r).unwrap();
        let p = Population::new(vec![g1.clone(), g1, g2.clone(), g2], 1);
        assert_eq!(p.distinct_fraction(), 0.5);
    }

    fn unit_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, n)
            .prop_filter("nonzero", |v| norm(v) > 1e-3)
            .prop_map(|v| {
                let l = norm(&v);
                v.into_iter().map(|x| x / l).collect()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn quantization_round_trip(a in unit_vector(4), bits in 3u32..=12) {
            let r = unit_box(4);
            let e = encode(&a, bits, &r);
            prop_assert_eq!(e.clamped, 0);
            let raw = decode_raw(&e.bits, bits, &r);
            let step = 2.0 / max_code(bits) as f64;
            for (x, y) in raw.iter().zip(&a) {
                prop_assert!((x - y).abs() <= step * 0.5 + 1e-12);
            }
            let d = decode(&e.bits, bits, &r).unwrap();
            prop_assert!((norm(&d) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn ranking_is_permutation(fs in prop::collection::vec(-10.0f64..10.0, 1..20)) {
            let r = unit_box(1);
            let mut members: Vec<MixedGenotype> = fs.iter().map(|&f| {
                let mut g = MixedGenotype::from_bits(0.0, vec![true, false, true], 3, &r).unwrap();
                g.fitness = f;
                g
            }).collect();
            rank(&mut members);
            let mut before = fs.clone();
            before.sort_by(|a, b| b.total_cmp(a));
            let after: Vec<f64> = members.iter().map(|g| g.fitness).collect();
            prop_assert_eq!(before, after);
        }
    }
}
