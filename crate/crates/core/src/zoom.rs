//! Region zooming: staged reduction, recoding and translation of the box
//! that bounds the direction variables.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HmgaError, Result};
use crate::evolution::random_genotype;
use crate::genotype::{encode, Population};
use crate::MixedGenotype;

/// Direction box `[a_min, a_max]` plus the `β` annulus `[β_min, β_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub a_min: Vec<f64>,
    pub a_max: Vec<f64>,
    pub beta_min: f64,
    pub beta_max: f64,
    pub generation_created: usize,
}

impl SearchRegion {
    /// `Z⁰`: every direction variable in `[−1, 1]`.
    pub fn initial(beta_min: f64, beta_max: f64, n: usize) -> Result<Self> {
        initial_region(beta_min, beta_max, n)
    }

    pub fn dimension(&self) -> usize {
        self.a_min.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.a_min
            .iter()
            .zip(&self.a_max)
            .map(|(lo, hi)| hi - lo)
            .collect()
    }

    /// Euclidean diameter of the direction box.
    pub fn diameter(&self) -> f64 {
        self.widths().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Whether every component of `a` lies inside the box (with `tol` slack).
    pub fn contains_point(&self, a: &[f64], tol: f64) -> bool {
        a.iter()
            .zip(self.a_min.iter().zip(&self.a_max))
            .all(|(&x, (&lo, &hi))| x >= lo - tol && x <= hi + tol)
    }

    /// Whether the unit direction `d` can still be decoded from this box,
    /// i.e. some `c·d` with `c > 0` lies inside it. Decoding normalizes the
    /// raw vector, so this is the set of directions the search can reach.
    pub fn contains_direction(&self, d: &[f64], tol: f64) -> bool {
        let (mut lo_c, mut hi_c) = (0.0_f64, f64::INFINITY);
        for (&x, (&lo, &hi)) in d.iter().zip(self.a_min.iter().zip(&self.a_max)) {
            let (lo, hi) = (lo - tol, hi + tol);
            if x.abs() < 1e-15 {
                if lo > 0.0 || hi < 0.0 {
                    return false;
                }
                continue;
            }
            let (p, q) = if x > 0.0 {
                (lo / x, hi / x)
            } else {
                (hi / x, lo / x)
            };
            lo_c = lo_c.max(p);
            hi_c = hi_c.min(q);
        }
        hi_c > 0.0 && lo_c <= hi_c
    }
}

pub fn initial_region(beta_min: f64, beta_max: f64, n: usize) -> Result<SearchRegion> {
    if !(beta_min >= 0.0) {
        return Err(HmgaError::config("beta_min", "must be nonnegative"));
    }
    if !(beta_max > beta_min) {
        return Err(HmgaError::config("beta_max", "must exceed beta_min"));
    }
    if n == 0 {
        return Err(HmgaError::config("dimension", "must be at least 1"));
    }
    Ok(SearchRegion {
        a_min: vec![-1.0; n],
        a_max: vec![1.0; n],
        beta_min,
        beta_max,
        generation_created: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZoomConfig {
    /// Minimum interval width `Δa`.
    pub delta_a: f64,
    /// Generations between reductions.
    pub t_z: usize,
    /// Refinement budget counted from the first reduction.
    pub delta_t: usize,
    pub diversity_floor: f64,
}

impl Default for ZoomConfig {
    fn default() -> Self {
        ZoomConfig {
            delta_a: 0.2,
            t_z: 5,
            delta_t: 40,
            diversity_floor: 0.5,
        }
    }
}

impl ZoomConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_a > 0.0 && self.delta_a <= 2.0) {
            return Err(HmgaError::config("zoom.delta_a", "must lie in (0, 2]"));
        }
        if self.t_z == 0 {
            return Err(HmgaError::config("zoom.t_z", "must be at least 1"));
        }
        if self.delta_t == 0 {
            return Err(HmgaError::config("zoom.delta_t", "must be at least 1"));
        }
        if !(self.diversity_floor > 0.0 && self.diversity_floor < 1.0) {
            return Err(HmgaError::config(
                "zoom.diversity_floor",
                "must lie in (0, 1)",
            ));
        }
        Ok(())
    }
}

/// Repaired onto the surface with `β` inside the annulus.
pub fn high_content(genotype: &MixedGenotype, region: &SearchRegion, eta: f64) -> Result<bool> {
    let outcome = genotype
        .repair
        .as_ref()
        .ok_or_else(|| HmgaError::Contract("genotype has not been repaired".into()))?;
    Ok(outcome.final_g.abs() <= eta
        && genotype.beta >= region.beta_min
        && genotype.beta <= region.beta_max)
}

/// Every elite member is of high failure content.
pub fn stage1_complete(elite: &[MixedGenotype], region: &SearchRegion, eta: f64) -> Result<bool> {
    if elite.is_empty() {
        return Err(HmgaError::Contract("elite is empty".into()));
    }
    for g in elite {
        if !high_content(g, region, eta)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Shifts `[lo, hi]` inside `[−1, 1]` keeping its width.
fn shift_into_box(lo: f64, hi: f64) -> (f64, f64) {
    if hi > 1.0 {
        (lo - (hi - 1.0), 1.0)
    } else if lo < -1.0 {
        (-1.0, hi + (-1.0 - lo))
    } else {
        (lo, hi)
    }
}

/// Reduced region spanned by the elite directions.
///
/// Per variable the interval is the elite min/max. An interval narrower than
/// `Δa` is recentred at its midpoint with width `Δa`; one wider than the
/// current interval is narrowed to the current width about its midpoint, so
/// box widths never grow. Intervals leaving `[−1, 1]` are shifted back in.
pub fn reduce(
    elite: &[MixedGenotype],
    current: &SearchRegion,
    config: &ZoomConfig,
    generation: usize,
) -> Result<SearchRegion> {
    if elite.is_empty() {
        return Err(HmgaError::Contract("elite is empty".into()));
    }
    let n = current.dimension();
    let mut a_min = Vec::with_capacity(n);
    let mut a_max = Vec::with_capacity(n);
    for i in 0..n {
        let (mut lo, mut hi) = elite
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
                (lo.min(g.direction[i]), hi.max(g.direction[i]))
            });
        let cap = current.a_max[i] - current.a_min[i];
        let width = hi - lo;
        let target = if width < config.delta_a {
            config.delta_a
        } else if width > cap {
            cap
        } else {
            width
        };
        if target != width {
            let mid = 0.5 * (hi + lo);
            lo = mid - 0.5 * target;
            hi = mid + 0.5 * target;
        }
        let (lo, hi) = shift_into_box(lo, hi);
        a_min.push(lo);
        a_max.push(hi);
    }
    Ok(SearchRegion {
        a_min,
        a_max,
        beta_min: current.beta_min,
        beta_max: current.beta_max,
        generation_created: generation,
    })
}

/// Re-expresses the elite in `new_region` and restarts everyone else at
/// random. Elite members keep their evaluated phenotype (`β`, direction,
/// fitness); only their bit strings change. Returns the number of clamped
/// direction components.
pub fn recode_population<R: Rng + ?Sized>(
    population: &mut Population,
    new_region: &SearchRegion,
    bits_per_var: u32,
    rng: &mut R,
) -> usize {
    let n_elite = population.elite_size.min(population.len());
    let mut clamped = 0;
    for g in &mut population.members[..n_elite] {
        let e = encode(&g.direction, bits_per_var, new_region);
        if e.clamped > 0 {
            log::debug!(
                "recode clamped {} component(s) of an elite genotype",
                e.clamped
            );
        }
        clamped += e.clamped;
        g.bits = e.bits;
    }
    for g in &mut population.members[n_elite..] {
        *g = random_genotype(new_region, bits_per_var, rng);
    }
    clamped
}

/// Largest spread of any direction component across `genotypes`.
pub fn max_spread(genotypes: &[MixedGenotype]) -> f64 {
    let Some(first) = genotypes.first() else {
        return 0.0;
    };
    (0..first.dimension())
        .map(|i| {
            let (lo, hi) = genotypes
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
                    (lo.min(g.direction[i]), hi.max(g.direction[i]))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Zooming continues while enough bit strings are distinct and the elite
/// still spreads beyond `Δa` on some variable.
pub fn diversity_ok(population: &Population, config: &ZoomConfig) -> bool {
    population.distinct_fraction() >= config.diversity_floor
        && max_spread(population.elite()) > config.delta_a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genotype::decode;
    use crate::repair::{ConvergenceMode, RepairOutcome, RepairStatus};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn with_direction(direction: Vec<f64>, beta: f64, g: f64) -> MixedGenotype {
        let n = direction.len();
        MixedGenotype {
            beta,
            bits: vec![false; n * 5],
            direction,
            fitness: 0.0,
            repair: Some(RepairOutcome {
                final_beta: beta,
                final_g: g,
                status: if g.abs() <= 1e-3 {
                    RepairStatus::Total
                } else {
                    RepairStatus::Partial
                },
                mode: ConvergenceMode::Undetermined,
                iterations: 0,
                evaluations: 1,
                trace: vec![],
            }),
        }
    }

    #[test]
    fn initial_region_examples() {
        let r = initial_region(0.0, 8.0, 2).unwrap();
        assert_eq!(r.a_min, vec![-1.0, -1.0]);
        assert_eq!(r.a_max, vec![1.0, 1.0]);
        let r = initial_region(0.0, 8.0, 5).unwrap();
        assert_eq!(r.widths(), vec![2.0; 5]);
        assert!(initial_region(3.0, 3.0, 2).is_err());
        assert!(initial_region(4.0, 3.0, 2).is_err());
    }

    #[test]
    fn high_content_examples() {
        let r = initial_region(0.0, 8.0, 2).unwrap();
        assert!(high_content(&with_direction(vec![1.0, 0.0], 3.0, 0.0), &r, 1e-3).unwrap());
        assert!(!high_content(&with_direction(vec![1.0, 0.0], 9.0, 0.0), &r, 1e-3).unwrap());
        assert!(!high_content(&with_direction(vec![1.0, 0.0], 3.0, 0.5), &r, 1e-3).unwrap());
        let mut bare = with_direction(vec![1.0, 0.0], 3.0, 0.0);
        bare.repair = None;
        assert!(high_content(&bare, &r, 1e-3).is_err());
    }

    #[test]
    fn stage1_examples() {
        let r = initial_region(0.0, 8.0, 2).unwrap();
        let good = with_direction(vec![1.0, 0.0], 3.0, 0.0);
        let bad = with_direction(vec![1.0, 0.0], 3.0, 1.0);
        assert!(stage1_complete(&[good.clone(), good.clone(), good.clone()], &r, 1e-3).unwrap());
        assert!(!stage1_complete(&[good.clone(), good, bad], &r, 1e-3).unwrap());
        assert!(stage1_complete(&[], &r, 1e-3).is_err());
    }

    #[test]
    fn reduce_examples() {
        let r = initial_region(0.0, 8.0, 2).unwrap();
        let cfg = ZoomConfig::default();
        let elite = [
            with_direction(vec![0.6, 0.8], 3.0, 0.0),
            with_direction(vec![0.8, 0.6], 3.0, 0.0),
        ];
        let z = reduce(&elite, &r, &cfg, 7).unwrap();
        assert_eq!(z.a_min, vec![0.6, 0.6]);
        assert_eq!(z.a_max, vec![0.8, 0.8]);
        assert_eq!(z.generation_created, 7);

        let cfg = ZoomConfig {
            delta_a: 0.1,
            ..Default::default()
        };
        let same = [
            with_direction(vec![0.6, 0.8], 3.0, 0.0),
            with_direction(vec![0.6, 0.8], 3.0, 0.0),
        ];
        let z = reduce(&same, &r, &cfg, 1).unwrap();
        assert!((z.a_min[0] - 0.55).abs() < 1e-12 && (z.a_max[0] - 0.65).abs() < 1e-12);
        assert!((z.a_min[1] - 0.75).abs() < 1e-12 && (z.a_max[1] - 0.85).abs() < 1e-12);

        let edge = [with_direction(vec![1.0, 0.0], 3.0, 0.0)];
        let z = reduce(&edge, &r, &cfg, 1).unwrap();
        assert!((z.a_min[0] - 0.9).abs() < 1e-12 && z.a_max[0] == 1.0);
        assert!(z.widths()[0] >= 0.1 - 1e-12);
        assert_eq!(z.beta_max, 8.0);
    }

    #[test]
    fn reduce_never_widens() {
        let cfg = ZoomConfig::default();
        let narrow = SearchRegion {
            a_min: vec![0.5, 0.5],
            a_max: vec![0.7, 0.7],
            beta_min: 0.0,
            beta_max: 8.0,
            generation_created: 0,
        };
        let elite = [
            with_direction(vec![0.2, 0.98], 3.0, 0.0),
            with_direction(vec![0.98, 0.2], 3.0, 0.0),
        ];
        let z = reduce(&elite, &narrow, &cfg, 1).unwrap();
        for (w_new, w_old) in z.widths().iter().zip(narrow.widths()) {
            assert!(*w_new <= w_old + 1e-12);
        }
    }

    #[test]
    fn recode_keeps_elite_and_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r0 = initial_region(0.0, 8.0, 2).unwrap();
        let mut members: Vec<MixedGenotype> =
            (0..6).map(|_| random_genotype(&r0, 5, &mut rng)).collect();
        members[0] = with_direction(vec![0.6, 0.8], 3.0, 0.0);
        members[1] = with_direction(vec![0.1, (1.0f64 - 0.01).sqrt()], 3.0, 0.0);
        let mut pop = Population::new(members, 2);
        let new_region = SearchRegion {
            a_min: vec![0.5, 0.7],
            a_max: vec![0.7, 0.9],
            beta_min: 0.0,
            beta_max: 8.0,
            generation_created: 4,
        };
        let clamped = recode_population(&mut pop, &new_region, 5, &mut rng);
        assert_eq!(pop.len(), 6);
        assert_eq!(clamped, 2);
        // interior elite: recoded bits decode within one quantization step
        let raw = crate::genotype::decode_raw(&pop.members[0].bits, 5, &new_region);
        let step = 0.2 / 31.0;
        assert!((raw[0] - 0.6).abs() <= step && (raw[1] - 0.8).abs() <= step);
        assert!(decode(&pop.members[0].bits, 5, &new_region).is_ok());
        assert_eq!(pop.members[0].direction, vec![0.6, 0.8]);
        for g in &pop.members[2..] {
            assert!(g.repair.is_none());
            assert_eq!(g.beta, 0.0);
        }
    }

    #[test]
    fn diversity_examples() {
        let cfg = ZoomConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r0 = initial_region(0.0, 8.0, 2).unwrap();
        let mut members: Vec<MixedGenotype> = Vec::new();
        while members.len() < 10 {
            let g = random_genotype(&r0, 5, &mut rng);
            if members.iter().all(|m: &MixedGenotype| m.bits != g.bits) {
                members.push(g);
            }
        }
        members[0].direction = vec![0.6, 0.8];
        members[1].direction = vec![0.9, 0.43589];
        let pop = Population::new(members.clone(), 2);
        assert!(diversity_ok(&pop, &cfg));

        let mut same = members.clone();
        same[1] = same[0].clone();
        let pop = Population::new(same, 2);
        assert!(!diversity_ok(&pop, &cfg));

        // 4 distinct out of 10
        let mut clones = members.clone();
        for g in clones.iter_mut().skip(4) {
            *g = members[3].clone();
        }
        clones[0].direction = vec![0.6, 0.8];
        clones[1].direction = vec![0.9, 0.43589];
        let pop = Population::new(clones, 2);
        assert!(!diversity_ok(&pop, &cfg));
    }
}
