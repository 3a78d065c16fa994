//! Three-stage driver: surface search, guided zooming, refinement.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HmgaError, Result};
use crate::evolution::{
    implicit_mutation, random_genotype, replacement, select_parents, similarity_control,
    uniform_crossover, EvolutionConfig,
};
use crate::fitness::{fitness, PenaltyConfig, PenaltyParams};
use crate::genotype::{rank, MixedGenotype, Population, MAX_BITS_PER_VAR, MIN_BITS_PER_VAR};
use crate::problem::benchmarks::ProblemSpec;
use crate::problem::{normal, BenchmarkProblem};
use crate::repair::{RepairConfig, Repairer};
use crate::zoom::{
    diversity_ok, high_content, recode_population, reduce, stage1_complete, SearchRegion,
    ZoomConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub seed: u64,
    pub evolution: EvolutionConfig,
    pub repair: RepairConfig,
    pub penalty: PenaltyConfig,
    pub zoom: ZoomConfig,
    pub beta_min: f64,
    pub beta_max: f64,
    pub bits_per_var: u32,
    pub max_generations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemSpec::default(),
            seed: 0,
            evolution: EvolutionConfig::default(),
            repair: RepairConfig::default(),
            penalty: PenaltyConfig::default(),
            zoom: ZoomConfig::default(),
            beta_min: 0.0,
            beta_max: 8.0,
            bits_per_var: 5,
            max_generations: 300,
        }
    }
}

impl RunConfig {
    pub fn for_problem(problem: impl Into<String>) -> Self {
        RunConfig {
            problem: ProblemSpec::Named(problem.into()),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HmgaError::Parse(e.to_string()))
    }

    /// Reads a config file; relative problem file paths resolve against the
    /// file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HmgaError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.problem.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that does not need the problem's `g0`.
    pub fn validate(&self, dimension: usize) -> Result<()> {
        if !(self.beta_min >= 0.0) || !self.beta_min.is_finite() {
            return Err(HmgaError::config(
                "beta_min",
                "must be nonnegative and finite",
            ));
        }
        if !(self.beta_min < self.beta_max) || !self.beta_max.is_finite() {
            return Err(HmgaError::config(
                "beta_min",
                format!(
                    "must be smaller than beta_max ({} vs {})",
                    self.beta_min, self.beta_max
                ),
            ));
        }
        if !(MIN_BITS_PER_VAR..=MAX_BITS_PER_VAR).contains(&self.bits_per_var) {
            return Err(HmgaError::config(
                "bits_per_var",
                format!("must lie in {MIN_BITS_PER_VAR}..={MAX_BITS_PER_VAR}"),
            ));
        }
        if self.max_generations < self.zoom.delta_t {
            return Err(HmgaError::config(
                "max_generations",
                "must be at least zoom.delta_t",
            ));
        }
        self.evolution.validate(dimension)?;
        self.zoom.validate()?;
        self.repair.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageBoundaries {
    /// Generation at which every elite member first had high failure content.
    pub t1: Option<usize>,
    /// Generation at which zooming stopped for loss of diversity.
    pub diversity_end: Option<usize>,
    pub t_final: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub generation: usize,
    pub stage: u8,
    pub best_fitness: f64,
    pub best_high_content_beta: Option<f64>,
    pub region_diameter: f64,
    pub distinct_fraction: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub seed: u64,
    pub beta_hl: f64,
    pub direction: Vec<f64>,
    pub mpp_standard: Vec<f64>,
    pub mpp_physical: Vec<f64>,
    pub g_at_mpp: f64,
    pub p_f: f64,
    pub stage_boundaries: StageBoundaries,
    pub generations: usize,
    pub evaluations: usize,
    pub penalty: PenaltyParams,
    pub config: RunConfig,
    pub history: Vec<HistoryRow>,
    pub region_history: Vec<SearchRegion>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn regions_json(&self) -> String {
        serde_json::to_string_pretty(&self.region_history).expect("regions serialize")
    }

    /// History as CSV; the high-content column is empty while none exists.
    pub fn history_csv(&self) -> String {
        let mut out = String::from(
            "generation,stage,best_fitness,best_high_content_beta,region_diameter,distinct_fraction,evaluations\n",
        );
        for r in &self.history {
            let beta = r
                .best_high_content_beta
                .map(|b| b.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.generation,
                r.stage,
                r.best_fitness,
                beta,
                r.region_diameter,
                r.distinct_fraction,
                r.evaluations
            ));
        }
        out
    }
}

/// `p_f ≈ Φ(−β)`.
pub fn probability_of_failure(beta: f64) -> f64 {
    normal::cdf(-beta)
}

/// Builds the configured problem and runs the solver on it.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let problem = config.problem.build()?;
    run_problem(&problem, config)
}

/// Runs the solver on an explicit problem; `config.problem` is ignored.
pub fn run_problem(problem: &BenchmarkProblem, config: &RunConfig) -> Result<RunReport> {
    config.validate(problem.dimension())?;
    let mut engine = Engine::new(problem, config)?;
    engine.execute()
}

struct Engine<'a> {
    problem: &'a BenchmarkProblem,
    config: &'a RunConfig,
    repairer: Repairer<'a>,
    penalty: PenaltyParams,
    epsilon_sc: usize,
    rng: ChaCha8Rng,
    region: SearchRegion,
    population: Population,
    t: usize,
    stage: u8,
    evaluations: usize,
    incumbent: Option<MixedGenotype>,
    history: Vec<HistoryRow>,
    regions: Vec<SearchRegion>,
}

impl<'a> Engine<'a> {
    fn new(problem: &'a BenchmarkProblem, config: &'a RunConfig) -> Result<Self> {
        let g0 = problem.g0();
        let penalty = config.penalty.resolve(g0, config.beta_max)?;
        let repairer = Repairer::with_g0(
            problem,
            config.repair.with_eta(penalty.eta),
            config.beta_max,
            g0,
        )?;
        let n = problem.dimension();
        let region = SearchRegion::initial(config.beta_min, config.beta_max, n)?;
        Ok(Engine {
            problem,
            config,
            repairer,
            penalty,
            epsilon_sc: config.evolution.epsilon_for(n),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            regions: vec![region.clone()],
            region,
            population: Population::new(Vec::new(), config.evolution.n_e),
            t: 1,
            stage: 1,
            evaluations: 1,
            incumbent: None,
            history: Vec::new(),
        })
    }

    fn bits(&self) -> u32 {
        self.config.bits_per_var
    }

    /// Repairs and scores every member lacking a repair outcome, in parallel;
    /// results land in index order so the run does not depend on the pool.
    fn evaluate(&mut self, members: &mut [MixedGenotype]) -> Result<()> {
        let repairer = &self.repairer;
        let penalty = &self.penalty;
        let counts: Vec<Result<usize>> = members
            .par_iter_mut()
            .filter(|g| g.repair.is_none())
            .map(|g| {
                let out = repairer.repair(g)?;
                g.fitness = fitness(g.beta, out.final_g, penalty);
                Ok(out.evaluations)
            })
            .collect();
        for c in counts {
            self.evaluations += c?;
        }
        for g in members.iter() {
            self.offer_incumbent(g)?;
        }
        Ok(())
    }

    fn offer_incumbent(&mut self, g: &MixedGenotype) -> Result<()> {
        if !high_content(g, &self.region, self.penalty.eta)? {
            return Ok(());
        }
        let better = self
            .incumbent
            .as_ref()
            .is_none_or(|inc| g.fitness > inc.fitness);
        if better {
            self.incumbent = Some(g.clone());
        }
        Ok(())
    }

    fn record(&mut self) {
        let row = HistoryRow {
            generation: self.t,
            stage: self.stage,
            best_fitness: self.population.best_fitness(),
            best_high_content_beta: self.incumbent.as_ref().map(|g| g.beta),
            region_diameter: self.region.diameter(),
            distinct_fraction: self.population.distinct_fraction(),
            evaluations: self.evaluations,
        };
        match self.history.last_mut() {
            Some(last) if last.generation == self.t => *last = row,
            _ => self.history.push(row),
        }
    }

    fn capped(&self) -> bool {
        self.t >= self.config.max_generations
    }

    fn initialize(&mut self) -> Result<()> {
        let n_p = self.config.evolution.n_p;
        let bits = self.bits();
        let mut members: Vec<MixedGenotype> = (0..n_p)
            .map(|_| random_genotype(&self.region, bits, &mut self.rng))
            .collect();
        self.evaluate(&mut members)?;
        rank(&mut members);
        self.population.members = members;
        self.record();
        Ok(())
    }

    /// Selection, crossover, survivor selection and repair of everything new.
    fn generation(&mut self) -> Result<()> {
        let evo = self.config.evolution;
        let bits = self.bits();
        let pairs = select_parents(&self.population, evo.n_b, &mut self.rng)?;
        let mut offspring = Vec::with_capacity(pairs.len());
        for (e, o) in pairs {
            let child = uniform_crossover(
                &self.population.members[e],
                &self.population.members[o],
                evo.r_uc,
                bits,
                &self.region,
                &mut self.rng,
            )?;
            offspring.push(child);
        }
        self.evaluate(&mut offspring)?;

        let mut extended = std::mem::take(&mut self.population.members);
        extended.extend(offspring);
        rank(&mut extended);
        let (mut extended, _) =
            similarity_control(extended, self.epsilon_sc, bits, &self.region, &mut self.rng);
        self.evaluate(&mut extended)?;

        let mut members = replacement(extended, Vec::new(), evo.n_p);
        implicit_mutation(&mut members, evo.n_bot, bits, &self.region, &mut self.rng);
        self.evaluate(&mut members)?;
        rank(&mut members);
        self.population.members = members;
        Ok(())
    }

    fn step(&mut self) -> Result<()> {
        self.t += 1;
        self.generation()?;
        self.record();
        Ok(())
    }

    fn zoom(&mut self) -> Result<()> {
        let region = reduce(
            self.population.elite(),
            &self.region,
            &self.config.zoom,
            self.t,
        )?;
        let bits = self.bits();
        let clamped = recode_population(&mut self.population, &region, bits, &mut self.rng);
        if clamped > 0 {
            log::debug!(
                "generation {}: {clamped} elite component(s) clamped on recode",
                self.t
            );
        }
        self.region = region;
        self.regions.push(self.region.clone());
        let mut members = std::mem::take(&mut self.population.members);
        self.evaluate(&mut members)?;
        rank(&mut members);
        self.population.members = members;
        self.record();
        Ok(())
    }

    fn execute(&mut self) -> Result<RunReport> {
        let eta = self.penalty.eta;
        self.initialize()?;

        let mut reached = stage1_complete(self.population.elite(), &self.region, eta)?;
        while !reached && !self.capped() {
            self.step()?;
            reached = stage1_complete(self.population.elite(), &self.region, eta)?;
        }

        let mut t1 = None;
        let mut diversity_end = None;
        if reached {
            let start = self.t;
            t1 = Some(start);
            self.stage = 2;
            loop {
                self.zoom()?;
                let t_ref = self.t;
                while self.t - t_ref <= self.config.zoom.t_z && !self.capped() {
                    self.step()?;
                }
                if self.capped() {
                    break;
                }
                // generation consumed by the next reduction (or the handover)
                self.t += 1;
                self.record();
                if !diversity_ok(&self.population, &self.config.zoom) {
                    diversity_end = Some(self.t);
                    break;
                }
            }

            self.stage = 3;
            if !self.capped() {
                loop {
                    self.step()?;
                    if self.t - start > self.config.zoom.delta_t || self.capped() {
                        break;
                    }
                }
            }
        } else {
            log::warn!(
                "elite never became fully high-content within {} generations",
                self.t
            );
        }

        self.finish(StageBoundaries {
            t1,
            diversity_end,
            t_final: self.t,
        })
    }

    fn finish(&mut self, stage_boundaries: StageBoundaries) -> Result<RunReport> {
        let eta = self.penalty.eta;
        let mut best = self.incumbent.clone();
        for g in &self.population.members {
            if high_content(g, &self.region, eta)?
                && best.as_ref().is_none_or(|b| g.fitness > b.fitness)
            {
                best = Some(g.clone());
            }
        }
        let Some(best) = best else {
            let partial = self
                .population
                .best()
                .ok_or_else(|| HmgaError::Contract("population is empty".into()))?;
            return Err(HmgaError::SurfaceNotFound {
                best_beta: partial.beta,
                best_g: partial.repair.as_ref().map_or(f64::NAN, |r| r.final_g),
                generations: self.t,
                evaluations: self.evaluations,
            });
        };
        let mpp_standard = best.point();
        let mpp_physical = self.problem.from_standard(&mpp_standard)?;
        let g_at_mpp = best.repair.as_ref().map_or(f64::NAN, |r| r.final_g);
        Ok(RunReport {
            problem: self.problem.name().to_string(),
            seed: self.config.seed,
            beta_hl: best.beta,
            direction: best.direction.clone(),
            mpp_standard,
            mpp_physical,
            g_at_mpp,
            p_f: probability_of_failure(best.beta),
            stage_boundaries,
            generations: self.t,
            evaluations: self.evaluations,
            penalty: self.penalty,
            config: self.config.clone(),
            history: std::mem::take(&mut self.history),
            region_history: std::mem::take(&mut self.regions),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::benchmarks;

    #[test]
    fn pf_examples() {
        assert_eq!(probability_of_failure(0.0), 0.5);
        assert!((probability_of_failure(3.0) - 1.3499e-3).abs() < 1e-7);
        assert!((probability_of_failure(1.2816) - 0.1).abs() < 1e-4);
    }

    #[test]
    fn linear_axis_run() {
        let p = benchmarks::linear(&[1.0, 0.0], 3.0).unwrap();
        let cfg = RunConfig::default();
        let r = run_problem(&p, &cfg).unwrap();
        assert!((r.beta_hl - 3.0).abs() <= 0.02, "{}", r.beta_hl);
        let pf = probability_of_failure(3.0);
        assert!((r.p_f - pf).abs() / pf <= 0.03);
        let len = crate::problem::norm(&r.mpp_standard);
        assert!((len - r.beta_hl).abs() <= 1e-9);
        assert!(r.g_at_mpp.abs() <= r.penalty.eta);
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = RunConfig {
            seed: 17,
            ..RunConfig::for_problem("sphere-2d")
        };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.history_csv(), b.history_csv());
    }

    #[test]
    fn history_has_one_row_per_generation() {
        let r = run(&RunConfig::for_problem("linear-2d")).unwrap();
        assert_eq!(r.history.len(), r.generations);
        for (i, row) in r.history.iter().enumerate() {
            assert_eq!(row.generation, i + 1);
        }
        let b = r.stage_boundaries;
        let t1 = b.t1.unwrap();
        assert!(r.generations > t1 + r.config.zoom.delta_t);
    }

    #[test]
    fn unreachable_surface() {
        let p = benchmarks::linear(&[1.0, 0.0], 20.0).unwrap();
        let cfg = RunConfig {
            max_generations: 60,
            ..Default::default()
        };
        assert!(matches!(
            run_problem(&p, &cfg),
            Err(HmgaError::SurfaceNotFound { .. })
        ));
    }

    #[test]
    fn config_errors_name_fields() {
        let cfg = RunConfig {
            beta_min: 9.0,
            ..Default::default()
        };
        assert!(matches!(run(&cfg), Err(HmgaError::Config { field, .. }) if field == "beta_min"));
        let err = RunConfig::from_json(r#"{"seed": 1, "bogus": 2}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let cfg = RunConfig::from_json(r#"{"problem": "sphere-3d", "zoom": {"t_z": 4}}"#).unwrap();
        assert_eq!(cfg.zoom.t_z, 4);
        assert_eq!(cfg.zoom.delta_a, 0.2);
    }
}
