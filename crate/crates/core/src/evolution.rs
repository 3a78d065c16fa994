//! Basis evolutionary operators: random initialization, elitist parent
//! selection, biased uniform crossover and survivor selection (similarity
//! control, truncation, implicit mutation).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HmgaError, Result};
use crate::genotype::{decode, rank, variable_codes, MixedGenotype, Population};
use crate::zoom::SearchRegion;

const REDRAW_ATTEMPTS: usize = 100;
const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub n_p: usize,
    pub n_e: usize,
    pub n_b: usize,
    /// Probability of inheriting a gene from the elite parent.
    pub r_uc: f64,
    /// Similarity threshold; `None` means `N − 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_sc: Option<usize>,
    pub n_bot: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            n_p: 30,
            n_e: 10,
            n_b: 15,
            r_uc: 0.7,
            epsilon_sc: None,
            n_bot: 4,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self, dimension: usize) -> Result<()> {
        if self.n_e == 0 {
            return Err(HmgaError::config("evolution.n_e", "must be at least 1"));
        }
        if self.n_e >= self.n_p {
            return Err(HmgaError::config(
                "evolution.n_e",
                "must be smaller than n_p",
            ));
        }
        if self.n_b == 0 {
            return Err(HmgaError::config("evolution.n_b", "must be at least 1"));
        }
        if self.n_bot == 0 || self.n_bot >= self.n_p {
            return Err(HmgaError::config("evolution.n_bot", "must lie in [1, n_p)"));
        }
        if self.n_bot > self.n_p - self.n_e {
            return Err(HmgaError::config(
                "evolution.n_bot",
                "must not reach into the elite",
            ));
        }
        if !(self.r_uc > 0.0 && self.r_uc < 1.0) {
            return Err(HmgaError::config("evolution.r_uc", "must lie in (0, 1)"));
        }
        if let Some(eps) = self.epsilon_sc {
            if eps > dimension {
                return Err(HmgaError::config(
                    "evolution.epsilon_sc",
                    "must not exceed N",
                ));
            }
        }
        Ok(())
    }

    pub fn epsilon_for(&self, dimension: usize) -> usize {
        self.epsilon_sc.unwrap_or(dimension.saturating_sub(1))
    }
}

fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<bool> {
    (0..len).map(|_| rng.random::<bool>()).collect()
}

/// Flips single bits of `bits` in order until the string decodes.
fn nudge_until_decodable(
    mut bits: Vec<bool>,
    bits_per_var: u32,
    region: &SearchRegion,
) -> (Vec<bool>, Vec<f64>) {
    for i in 0..bits.len() {
        bits[i] = !bits[i];
        if let Ok(d) = decode(&bits, bits_per_var, region) {
            return (bits, d);
        }
        bits[i] = !bits[i];
    }
    panic!("no single-bit neighbour decodes; region is degenerate");
}

/// `(β_min, b(a))` with uniformly random bits.
pub fn random_genotype<R: Rng + ?Sized>(
    region: &SearchRegion,
    bits_per_var: u32,
    rng: &mut R,
) -> MixedGenotype {
    let len = region.dimension() * bits_per_var as usize;
    let mut bits = random_bits(len, rng);
    let mut direction = decode(&bits, bits_per_var, region);
    let mut attempts = 1;
    while direction.is_err() && attempts < REDRAW_ATTEMPTS {
        bits = random_bits(len, rng);
        direction = decode(&bits, bits_per_var, region);
        attempts += 1;
    }
    let direction = match direction {
        Ok(d) => d,
        Err(_) => {
            let (b, d) = nudge_until_decodable(bits, bits_per_var, region);
            bits = b;
            d
        }
    };
    MixedGenotype {
        beta: region.beta_min,
        bits,
        direction,
        fitness: f64::NEG_INFINITY,
        repair: None,
    }
}

/// Fitness-proportional weights, shifted so every weight is positive.
pub fn selection_weights(fitness: &[f64]) -> Vec<f64> {
    let min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if min < 0.0 { -min } else { 0.0 };
    fitness.iter().map(|f| f + shift + WEIGHT_FLOOR).collect()
}

/// Roulette-wheel draw over `weights`.
pub fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if pick < *w {
            return i;
        }
        pick -= w;
    }
    weights.len() - 1
}

/// `n_b` pairs of population indices `(elite, non_elite)`, each drawn
/// fitness-proportionally within its group.
pub fn select_parents<R: Rng + ?Sized>(
    population: &Population,
    n_b: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    let elite = population.elite();
    if elite.is_empty() {
        return Err(HmgaError::Contract("elite is empty".into()));
    }
    let n_elite = elite.len();
    let elite_w = selection_weights(&elite.iter().map(|g| g.fitness).collect::<Vec<_>>());
    let rest = population.non_elite();
    let (other_w, offset) = if rest.is_empty() {
        log::warn!("non-elite group empty; both parents drawn from the elite");
        (elite_w.clone(), 0)
    } else {
        (
            selection_weights(&rest.iter().map(|g| g.fitness).collect::<Vec<_>>()),
            n_elite,
        )
    };
    Ok((0..n_b)
        .map(|_| {
            let e = roulette(&elite_w, rng);
            let o = roulette(&other_w, rng) + offset;
            (e, o)
        })
        .collect())
}

/// Biased uniform crossover: every bit and the `β` gene come from the elite
/// parent with probability `r_uc`.
pub fn uniform_crossover<R: Rng + ?Sized>(
    elite: &MixedGenotype,
    other: &MixedGenotype,
    r_uc: f64,
    bits_per_var: u32,
    region: &SearchRegion,
    rng: &mut R,
) -> Result<MixedGenotype> {
    if elite.bits.len() != other.bits.len() {
        return Err(HmgaError::Dimension {
            expected: elite.bits.len(),
            got: other.bits.len(),
        });
    }
    for _ in 0..REDRAW_ATTEMPTS {
        let bits: Vec<bool> = elite
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&e, &o)| if rng.random::<f64>() < r_uc { e } else { o })
            .collect();
        let beta = if rng.random::<f64>() < r_uc {
            elite.beta
        } else {
            other.beta
        };
        if let Ok(direction) = decode(&bits, bits_per_var, region) {
            return Ok(MixedGenotype {
                beta,
                bits,
                direction,
                fitness: f64::NEG_INFINITY,
                repair: None,
            });
        }
    }
    let (bits, direction) = nudge_until_decodable(elite.bits.clone(), bits_per_var, region);
    Ok(MixedGenotype {
        beta: elite.beta,
        bits,
        direction,
        fitness: f64::NEG_INFINITY,
        repair: None,
    })
}

/// Number of direction variables whose bit blocks coincide.
pub fn equal_variables(a: &MixedGenotype, b: &MixedGenotype, bits_per_var: u32) -> usize {
    variable_codes(&a.bits, bits_per_var)
        .iter()
        .zip(variable_codes(&b.bits, bits_per_var))
        .filter(|(x, y)| **x == *y)
        .count()
}

pub fn similar(a: &MixedGenotype, b: &MixedGenotype, bits_per_var: u32, epsilon_sc: usize) -> bool {
    equal_variables(a, b, bits_per_var) > epsilon_sc
}

/// Removes every genotype similar to a fitter survivor, scanning from the
/// fittest, and refills the freed slots with random genotypes dissimilar to
/// all survivors. `members` must be ranked. Returns the indices of the
/// refills in the returned list (they are unevaluated).
pub fn similarity_control<R: Rng + ?Sized>(
    members: Vec<MixedGenotype>,
    epsilon_sc: usize,
    bits_per_var: u32,
    region: &SearchRegion,
    rng: &mut R,
) -> (Vec<MixedGenotype>, Vec<usize>) {
    let size = members.len();
    let mut kept: Vec<MixedGenotype> = Vec::with_capacity(size);
    for g in members {
        if !kept
            .iter()
            .any(|k| similar(k, &g, bits_per_var, epsilon_sc))
        {
            kept.push(g);
        }
    }
    let mut refills = Vec::new();
    while kept.len() < size {
        let mut fresh = random_genotype(region, bits_per_var, rng);
        for _ in 0..REDRAW_ATTEMPTS {
            if !kept
                .iter()
                .any(|k| similar(k, &fresh, bits_per_var, epsilon_sc))
            {
                break;
            }
            fresh = random_genotype(region, bits_per_var, rng);
        }
        refills.push(kept.len());
        kept.push(fresh);
    }
    (kept, refills)
}

/// `(n + n_B)` truncation: rank the union and keep the top `n_p`.
pub fn replacement(
    population: Vec<MixedGenotype>,
    offspring: Vec<MixedGenotype>,
    n_p: usize,
) -> Vec<MixedGenotype> {
    let mut union = population;
    union.extend(offspring);
    rank(&mut union);
    union.truncate(n_p);
    union
}

/// Replaces the `n_bot` weakest members of a ranked list with random
/// genotypes; returns their indices.
pub fn implicit_mutation<R: Rng + ?Sized>(
    members: &mut [MixedGenotype],
    n_bot: usize,
    bits_per_var: u32,
    region: &SearchRegion,
    rng: &mut R,
) -> Vec<usize> {
    let start = members.len().saturating_sub(n_bot);
    for g in &mut members[start..] {
        *g = random_genotype(region, bits_per_var, rng);
    }
    (start..members.len()).collect()
}
