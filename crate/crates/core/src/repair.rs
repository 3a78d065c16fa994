//! Genetic repair: a deterministic line iteration on `β` along a frozen
//! direction that drives `|G(β a)|` towards zero.
//!
//! Each step moves outward when `G ≥ 0` and inward otherwise, by
//!
//! ```text
//! Δβ = Δ_max (2^{|g| / g0} − 1)
//! ```
//!
//! which is `Δ_max` at `|g| = g0` and vanishes with `|g|`. The amplitude is
//! `Δ_max = α max(β, β_ref)`. A candidate step is accepted only when it
//! strictly reduces `|g|`; otherwise the amplitude is retried with `α²`,
//! `α³`, … up to `stability_retries` times. With `stability_retries = 0` no
//! adaptation happens and every candidate is accepted.

use serde::{Deserialize, Serialize};

use crate::error::{HmgaError, Result};
use crate::genotype::MixedGenotype;
use crate::problem::{check_unit, BenchmarkProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepairConfig {
    /// Amplitude fraction `α ∈ (0, 1)`.
    pub alpha: f64,
    pub k_max: usize,
    /// Stop tolerance; shared with the penalty and resolved at run start.
    #[serde(skip)]
    pub eta: f64,
    pub beta_ref: f64,
    /// Runaway bound as a multiple of `β_max`.
    pub beta_cap: f64,
    pub stability_retries: usize,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            alpha: 0.75,
            k_max: 50,
            eta: 1e-3,
            beta_ref: 1.0,
            beta_cap: 2.0,
            stability_retries: 8,
        }
    }
}

impl RepairConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(HmgaError::config("repair.alpha", "must lie in (0, 1)"));
        }
        if self.k_max == 0 {
            return Err(HmgaError::config("repair.k_max", "must be at least 1"));
        }
        if !(self.eta > 0.0) {
            return Err(HmgaError::config("repair.eta", "must be positive"));
        }
        if !(self.beta_ref > 0.0) {
            return Err(HmgaError::config("repair.beta_ref", "must be positive"));
        }
        if !(self.beta_cap > 0.0) {
            return Err(HmgaError::config("repair.beta_cap", "must be positive"));
        }
        Ok(())
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairStatus {
    /// `|g| ≤ η` reached.
    Total,
    /// Violation reduced but not eliminated.
    Partial,
    /// The ray ran past the cap, or `G` stayed positive and could not be
    /// reduced by any outward step.
    NoSurface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    /// One-sided descent onto the surface.
    Strong,
    /// Sign-alternating path with strictly shrinking `|g|`.
    Weak,
    Undetermined,
}

/// One row of a repair trace. `delta_beta` and `delta_max` are the values
/// that produced the next iterate (for the last row: the step that would
/// have been tried next).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub k: usize,
    pub beta: f64,
    pub g: f64,
    pub delta_beta: f64,
    pub delta_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub final_beta: f64,
    pub final_g: f64,
    pub status: RepairStatus,
    pub mode: ConvergenceMode,
    /// Accepted steps.
    pub iterations: usize,
    /// Limit-state calls, including rejected candidates.
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

impl RepairOutcome {
    pub fn is_total(&self) -> bool {
        self.status == RepairStatus::Total
    }

    /// Trace as CSV with columns `k,beta,g,delta_beta,delta_max`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("k,beta,g,delta_beta,delta_max\n");
        for t in &self.trace {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t.k, t.beta, t.g, t.delta_beta, t.delta_max
            ));
        }
        out
    }
}

/// Nonlinear increment `Δ_max (2 exp(((|g| − g0)/g0) ln 2) − 1)`.
pub fn increment(g_abs: f64, g0: f64, delta_max: f64) -> Result<f64> {
    if !(g0 > 0.0) {
        return Err(HmgaError::config(
            "g0",
            "origin must lie in the safety space (g0 > 0)",
        ));
    }
    Ok(increment_unchecked(g_abs, g0, delta_max))
}

fn increment_unchecked(g_abs: f64, g0: f64, delta_max: f64) -> f64 {
    delta_max * (2.0 * (((g_abs - g0) / g0) * std::f64::consts::LN_2).exp() - 1.0)
}

/// Applies the sign rule: outward if `g ≥ 0`, inward otherwise, clamped at 0.
pub fn next_beta(beta: f64, g: f64, delta_beta: f64) -> f64 {
    if g >= 0.0 {
        beta + delta_beta
    } else {
        (beta - delta_beta).max(0.0)
    }
}

/// One repair step from `(β, g)` with amplitude `delta_max`; returns the new
/// `β` and `G` there.
pub fn repair_step(
    problem: &BenchmarkProblem,
    a: &[f64],
    beta: f64,
    g: f64,
    delta_max: f64,
    g0: f64,
) -> Result<(f64, f64)> {
    let db = increment(g.abs(), g0, delta_max)?;
    let b = next_beta(beta, g, db);
    Ok((b, problem.g_along(b, a)?))
}

/// Strict decrease of the violation.
pub fn stable(g_prev_abs: f64, g_next_abs: f64) -> bool {
    g_next_abs < g_prev_abs
}

/// Classifies the path of a repair. Only total repairs are classified.
pub fn classify_mode(trace: &[TraceEntry], status: RepairStatus) -> ConvergenceMode {
    if status != RepairStatus::Total || trace.is_empty() {
        return ConvergenceMode::Undetermined;
    }
    let nonneg = trace.iter().all(|t| t.g >= 0.0);
    let nonpos = trace.iter().all(|t| t.g <= 0.0);
    if nonneg || nonpos {
        return ConvergenceMode::Strong;
    }
    let decreasing = trace.windows(2).all(|w| w[1].g.abs() < w[0].g.abs());
    if decreasing {
        ConvergenceMode::Weak
    } else {
        ConvergenceMode::Undetermined
    }
}

/// Repair operator bound to one problem. Holds `g0` and the runaway bound.
#[derive(Debug, Clone)]
pub struct Repairer<'a> {
    problem: &'a BenchmarkProblem,
    config: RepairConfig,
    g0: f64,
    beta_limit: f64,
}

impl<'a> Repairer<'a> {
    pub fn new(problem: &'a BenchmarkProblem, config: RepairConfig, beta_max: f64) -> Result<Self> {
        config.validate()?;
        let g0 = problem.g0();
        Self::with_g0(problem, config, beta_max, g0)
    }

    /// Same as [`Repairer::new`] with an already evaluated `g0`.
    pub fn with_g0(
        problem: &'a BenchmarkProblem,
        config: RepairConfig,
        beta_max: f64,
        g0: f64,
    ) -> Result<Self> {
        config.validate()?;
        if !(g0 > config.eta) {
            return Err(HmgaError::DegenerateProblem {
                g0,
                eta: config.eta,
            });
        }
        Ok(Repairer {
            problem,
            config,
            g0,
            beta_limit: config.beta_cap * beta_max,
        })
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn config(&self) -> &RepairConfig {
        &self.config
    }

    fn amplitude(&self, beta: f64, attempt: usize) -> f64 {
        self.config.alpha.powi(attempt as i32 + 1) * beta.max(self.config.beta_ref)
    }

    /// Repairs the ray `β a` starting from `beta0`.
    pub fn repair_ray(&self, beta0: f64, a: &[f64]) -> Result<RepairOutcome> {
        check_unit(a)?;
        if !(beta0 >= 0.0) {
            return Err(HmgaError::Contract(format!(
                "beta must be nonnegative, got {beta0}"
            )));
        }
        let cfg = &self.config;
        let adaptive = cfg.stability_retries > 0;
        let mut beta = beta0;
        let mut g = self.problem.g_along(beta, a)?;
        let mut evaluations = 1;
        let mut trace = Vec::with_capacity(cfg.k_max + 1);
        let mut best = (beta, g);

        let status = loop {
            let k = trace.len();
            if g.abs() <= cfg.eta {
                break RepairStatus::Total;
            }
            if beta > self.beta_limit {
                break RepairStatus::NoSurface;
            }
            if k == cfg.k_max {
                break RepairStatus::Partial;
            }

            let mut attempt = 0;
            let accepted = loop {
                let delta_max = self.amplitude(beta, attempt);
                let delta_beta = increment_unchecked(g.abs(), self.g0, delta_max);
                let b = next_beta(beta, g, delta_beta);
                let gb = self.problem.g_along(b, a)?;
                evaluations += 1;
                if !adaptive || stable(g.abs(), gb.abs()) {
                    break Some((b, gb, delta_beta, delta_max));
                }
                attempt += 1;
                if attempt > cfg.stability_retries {
                    break None;
                }
            };

            let Some((b, gb, delta_beta, delta_max)) = accepted else {
                // no amplitude reduces |g| from here
                let delta_max = self.amplitude(beta, 0);
                trace.push(TraceEntry {
                    k,
                    beta,
                    g,
                    delta_beta: increment_unchecked(g.abs(), self.g0, delta_max),
                    delta_max,
                });
                let status = if g > 0.0 {
                    RepairStatus::NoSurface
                } else {
                    RepairStatus::Partial
                };
                return Ok(self.finish(best, status, trace, evaluations));
            };
            trace.push(TraceEntry {
                k,
                beta,
                g,
                delta_beta,
                delta_max,
            });
            beta = b;
            g = gb;
            if g.abs() < best.1.abs() {
                best = (beta, g);
            }
        };

        let delta_max = self.amplitude(beta, 0);
        trace.push(TraceEntry {
            k: trace.len(),
            beta,
            g,
            delta_beta: increment_unchecked(g.abs(), self.g0, delta_max),
            delta_max,
        });
        Ok(self.finish(best, status, trace, evaluations))
    }

    fn finish(
        &self,
        best: (f64, f64),
        status: RepairStatus,
        trace: Vec<TraceEntry>,
        evaluations: usize,
    ) -> RepairOutcome {
        let mode = classify_mode(&trace, status);
        RepairOutcome {
            final_beta: best.0,
            final_g: best.1,
            status,
            mode,
            iterations: trace.len() - 1,
            evaluations,
            trace,
        }
    }

    /// Repairs a genotype in place: its `β` gene is overwritten by the
    /// repaired distance and the outcome is attached.
    pub fn repair(&self, genotype: &mut MixedGenotype) -> Result<RepairOutcome> {
        let outcome = self.repair_ray(genotype.beta, &genotype.direction)?;
        genotype.beta = outcome.final_beta;
        genotype.repair = Some(outcome.clone());
        Ok(outcome)
    }
}

/// One-shot repair of a genotype.
pub fn repair(
    genotype: &mut MixedGenotype,
    problem: &BenchmarkProblem,
    config: &RepairConfig,
    beta_max: f64,
) -> Result<RepairOutcome> {
    Repairer::new(problem, *config, beta_max)?.repair(genotype)
}
