//! Analytical benchmark problems and the name registry used by run configs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::polynomial::PolynomialSpec;
use super::{norm, BenchmarkProblem, LimitStateFunction, Marginal, UncertaintySpace};
use crate::error::{HmgaError, Result};

/// `G(y) = β* − ⟨α, y⟩`; `α` is normalized on construction.
pub fn linear(alpha: &[f64], beta_star: f64) -> Result<BenchmarkProblem> {
    let n = norm(alpha);
    if alpha.is_empty() || !(n > 0.0) || !n.is_finite() {
        return Err(HmgaError::config(
            "alpha",
            "must be a nonzero finite vector",
        ));
    }
    if !(beta_star > 0.0) {
        return Err(HmgaError::config("beta", "must be positive"));
    }
    let alpha: Vec<f64> = alpha.iter().map(|a| a / n).collect();
    let mpp: Vec<f64> = alpha.iter().map(|a| beta_star * a).collect();
    let dim = alpha.len();
    let ls = LimitStateFunction::new(format!("linear-{dim}d"), dim, move |y: &[f64]| {
        beta_star - alpha.iter().zip(y).map(|(a, v)| a * v).sum::<f64>()
    });
    BenchmarkProblem::new(
        UncertaintySpace::standard(dim),
        ls,
        Some(beta_star),
        Some(mpp),
    )
}

/// `G(y) = ‖y − c‖² − r²` with `‖c‖ > r`; the failure domain is the ball.
pub fn sphere(center: &[f64], radius: f64) -> Result<BenchmarkProblem> {
    let c_norm = norm(center);
    if center.is_empty() || !(radius > 0.0) || !(c_norm > radius) {
        return Err(HmgaError::config(
            "center",
            "the ball must have positive radius and exclude the origin",
        ));
    }
    let beta = c_norm - radius;
    let mpp: Vec<f64> = center.iter().map(|c| c / c_norm * beta).collect();
    let dim = center.len();
    let c = center.to_vec();
    let r2 = radius * radius;
    let ls = LimitStateFunction::new(format!("sphere-{dim}d"), dim, move |y: &[f64]| {
        c.iter()
            .zip(y)
            .map(|(ci, yi)| (yi - ci) * (yi - ci))
            .sum::<f64>()
            - r2
    });
    BenchmarkProblem::new(UncertaintySpace::standard(dim), ls, Some(beta), Some(mpp))
}

/// `G(y) = c − y₂ + κ y₁²` in two dimensions. The reliability index is
/// established by the brute-force oracle, not registered here.
pub fn parabolic(c: f64, kappa: f64) -> Result<BenchmarkProblem> {
    let ls = LimitStateFunction::new("parabolic", 2, move |y: &[f64]| {
        c - y[1] + kappa * y[0] * y[0]
    });
    BenchmarkProblem::new(UncertaintySpace::standard(2), ls, None, None)
}

/// `G(y) = t − min_i y_i`: failure only in the corner where every coordinate
/// exceeds `t`, so the failure surface is absent for any direction with a
/// nonpositive component.
pub fn quadrant(threshold: f64, dimension: usize) -> Result<BenchmarkProblem> {
    if !(threshold > 0.0) || dimension == 0 {
        return Err(HmgaError::config("threshold", "must be positive"));
    }
    let ls = LimitStateFunction::new(
        format!("quadrant-{dimension}d"),
        dimension,
        move |y: &[f64]| threshold - y.iter().copied().fold(f64::INFINITY, f64::min),
    );
    BenchmarkProblem::new(
        UncertaintySpace::standard(dimension),
        ls,
        Some(threshold * (dimension as f64).sqrt()),
        Some(vec![threshold; dimension]),
    )
}

/// `g(R, S) = R − S` with lognormal resistance and load. The failure surface
/// is a hyperplane in standard space, so the index is
/// `(μ_R − μ_S) / √(σ_R² + σ_S²)` in terms of the log-space parameters.
pub fn resistance_load(
    mu_r: f64,
    sigma_r: f64,
    mu_s: f64,
    sigma_s: f64,
) -> Result<BenchmarkProblem> {
    let space = UncertaintySpace::new(vec![
        Marginal::lognormal(mu_r, sigma_r)?,
        Marginal::lognormal(mu_s, sigma_s)?,
    ])?;
    let s = (sigma_r * sigma_r + sigma_s * sigma_s).sqrt();
    let beta = (mu_r - mu_s) / s;
    let mpp = vec![-beta * sigma_r / s, beta * sigma_s / s];
    let ls = LimitStateFunction::new("resistance-load", 2, |x: &[f64]| x[0] - x[1]);
    BenchmarkProblem::new(space, ls, Some(beta), Some(mpp))
}

/// Unit vector proportional to `(1, 2, …, n)`, the default linear normal.
pub fn ramp_direction(n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let len = norm(&raw);
    raw.into_iter().map(|v| v / len).collect()
}

/// Names accepted by [`by_name`].
pub const PRESETS: &[&str] = &[
    "linear-2d",
    "linear-5d",
    "linear-10d",
    "sphere-2d",
    "sphere-3d",
    "parabolic",
    "quadrant-2d",
    "resistance-load",
];

/// Looks up a registered benchmark by name.
pub fn by_name(name: &str) -> Result<BenchmarkProblem> {
    match name {
        "linear-2d" => linear(&[0.6, 0.8], 3.0),
        "linear-5d" => linear(&ramp_direction(5), 3.0),
        "linear-10d" => linear(&ramp_direction(10), 3.0),
        "sphere-2d" => sphere(&[4.0, 0.0], 1.0),
        "sphere-3d" => {
            let c = 4.0 / 3f64.sqrt();
            sphere(&[c, c, c], 1.0)
        }
        "parabolic" => parabolic(5.0, 0.5),
        "quadrant-2d" => quadrant(2.0, 2),
        "resistance-load" => resistance_load(2.0, 0.3, 1.0, 0.4),
        other => Err(HmgaError::UnknownBenchmark(other.to_string())),
    }
}

/// Parameterized benchmark description, tagged by `"benchmark"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "benchmark", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BenchmarkSpec {
    Linear {
        alpha: Vec<f64>,
        beta: f64,
    },
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    Parabolic {
        c: f64,
        kappa: f64,
    },
    Quadrant {
        threshold: f64,
        dimension: usize,
    },
    ResistanceLoad {
        mu_r: f64,
        sigma_r: f64,
        mu_s: f64,
        sigma_s: f64,
    },
    Polynomial(PolynomialSpec),
    PolynomialFile {
        path: PathBuf,
    },
}

/// A problem given either by registered name or by explicit parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Named(String),
    Custom(BenchmarkSpec),
}

impl<'de> Deserialize<'de> for ProblemSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        ProblemSpec::from_value(value).map_err(serde::de::Error::custom)
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<BenchmarkProblem> {
        match self {
            ProblemSpec::Named(name) => by_name(name),
            ProblemSpec::Custom(spec) => spec.build(),
        }
    }

    /// Resolves relative polynomial file paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let ProblemSpec::Custom(BenchmarkSpec::PolynomialFile { path }) = self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    /// Parses a JSON value, reporting the concrete field error for object forms.
    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        match value {
            serde_json::Value::String(s) => Ok(ProblemSpec::Named(s)),
            other => serde_json::from_value::<BenchmarkSpec>(other)
                .map(ProblemSpec::Custom)
                .map_err(|e| HmgaError::Parse(format!("problem: {e}"))),
        }
    }
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec::Named("linear-2d".to_string())
    }
}

impl BenchmarkSpec {
    pub fn build(&self) -> Result<BenchmarkProblem> {
        match self {
            BenchmarkSpec::Linear { alpha, beta } => linear(alpha, *beta),
            BenchmarkSpec::Sphere { center, radius } => sphere(center, *radius),
            BenchmarkSpec::Parabolic { c, kappa } => parabolic(*c, *kappa),
            BenchmarkSpec::Quadrant {
                threshold,
                dimension,
            } => quadrant(*threshold, *dimension),
            BenchmarkSpec::ResistanceLoad {
                mu_r,
                sigma_r,
                mu_s,
                sigma_s,
            } => resistance_load(*mu_r, *sigma_r, *mu_s, *sigma_s),
            BenchmarkSpec::Polynomial(spec) => spec.build(),
            BenchmarkSpec::PolynomialFile { path } => PolynomialSpec::from_path(path)?.build(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds_with_safe_origin() {
        for name in PRESETS {
            let p = by_name(name).unwrap();
            assert!(p.g0() > 0.0, "{name}");
        }
        assert!(matches!(
            by_name("nope"),
            Err(HmgaError::UnknownBenchmark(_))
        ));
    }

    #[test]
    fn known_mpp_lies_on_surface() {
        for name in PRESETS {
            let p = by_name(name).unwrap();
            if let (Some(beta), Some(mpp)) = (p.known_beta(), p.known_mpp()) {
                assert!((norm(mpp) - beta).abs() < 1e-12, "{name}");
                assert!(p.evaluate_g(mpp).unwrap().abs() < 1e-9, "{name}");
            }
        }
    }

    #[test]
    fn quadrant_has_direction_gaps() {
        let p = quadrant(2.0, 2).unwrap();
        // no surface along a direction with a negative component
        let a = [-0.6, 0.8];
        assert!(p.g_along(100.0, &a).unwrap() > 0.0);
    }

    #[test]
    fn resistance_load_index() {
        let p = by_name("resistance-load").unwrap();
        assert!((p.known_beta().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spec_parsing() {
        let named: ProblemSpec = serde_json::from_str("\"sphere-2d\"").unwrap();
        assert_eq!(named, ProblemSpec::Named("sphere-2d".into()));
        let custom: ProblemSpec =
            serde_json::from_str(r#"{"benchmark": "linear", "alpha": [1, 0], "beta": 3}"#).unwrap();
        assert_eq!(custom.build().unwrap().known_beta(), Some(3.0));
        let err = ProblemSpec::from_value(
            serde_json::json!({"benchmark": "linear", "alpha": [1, 0], "beta": 3, "typo": 1}),
        );
        assert!(matches!(err, Err(HmgaError::Parse(msg)) if msg.contains("typo")));
    }

    #[test]
    fn invalid_parameters() {
        assert!(linear(&[0.0, 0.0], 3.0).is_err());
        assert!(linear(&[1.0], -1.0).is_err());
        assert!(sphere(&[0.5, 0.0], 1.0).is_err());
        // origin inside the failure domain
        assert!(parabolic(-1.0, 0.5).is_err());
    }
}
