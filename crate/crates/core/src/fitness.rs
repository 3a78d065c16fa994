//! Penalty formulation: `f = C − β − λ Γ(g)` with `Γ(g) = K |g|^q` above the
//! tolerance `η` and zero otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{HmgaError, Result};

/// Resolved penalty parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyParams {
    pub c: f64,
    pub lambda: f64,
    pub k: f64,
    pub q: f64,
    pub eta: f64,
}

impl PenaltyParams {
    pub fn validate(&self, beta_max: f64) -> Result<()> {
        if !(self.c > beta_max) {
            return Err(HmgaError::config("penalty.c", "must exceed beta_max"));
        }
        for (name, v) in [
            ("penalty.lambda", self.lambda),
            ("penalty.k", self.k),
            ("penalty.q", self.q),
            ("penalty.eta", self.eta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(HmgaError::config(name, "must be positive and finite"));
            }
        }
        Ok(())
    }

    /// Default rule relative to the origin value `g0`: `η = 1e-3 g0`,
    /// `C = β_max + 1`, `λ = 1`, and `K, q` calibrated so that `|g| = 0.1 g0`
    /// costs `C` and `|g| = g0` costs `100 C`.
    pub fn defaults_for(g0: f64, beta_max: f64) -> Result<Self> {
        let g0 = g0.abs();
        let c = beta_max + 1.0;
        let (k, q) = calibrate_penalty((0.1 * g0, c), (g0, 100.0 * c))?;
        Ok(PenaltyParams {
            c,
            lambda: 1.0,
            k,
            q,
            eta: 1e-3 * g0,
        })
    }
}

/// Partially specified penalty parameters as they appear in run configs;
/// missing entries fall back to [`PenaltyParams::defaults_for`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltyConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

impl PenaltyConfig {
    pub fn resolve(&self, g0: f64, beta_max: f64) -> Result<PenaltyParams> {
        let d = PenaltyParams::defaults_for(g0, beta_max)?;
        let p = PenaltyParams {
            c: self.c.unwrap_or(d.c),
            lambda: self.lambda.unwrap_or(d.lambda),
            k: self.k.unwrap_or(d.k),
            q: self.q.unwrap_or(d.q),
            eta: self.eta.unwrap_or(d.eta),
        };
        p.validate(beta_max)?;
        Ok(p)
    }
}

impl From<PenaltyParams> for PenaltyConfig {
    fn from(p: PenaltyParams) -> Self {
        PenaltyConfig {
            c: Some(p.c),
            lambda: Some(p.lambda),
            k: Some(p.k),
            q: Some(p.q),
            eta: Some(p.eta),
        }
    }
}

/// `Γ(g)`.
pub fn penalty(g: f64, params: &PenaltyParams) -> f64 {
    let a = g.abs();
    if a > params.eta {
        params.k * a.powf(params.q)
    } else {
        0.0
    }
}

/// `f = C − β − λ Γ(g)`.
pub fn fitness(beta: f64, g: f64, params: &PenaltyParams) -> f64 {
    params.c - beta - params.lambda * penalty(g, params)
}

/// Solves `Γ₁ = K g₁^q`, `Γ₂ = K g₂^q` for `(K, q)`.
pub fn calibrate_penalty(first: (f64, f64), second: (f64, f64)) -> Result<(f64, f64)> {
    let (g1, t1) = (first.0.abs(), first.1);
    let (g2, t2) = (second.0.abs(), second.1);
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(HmgaError::Calibration(
            "penalty targets must be positive".into(),
        ));
    }
    if !(g1 > 0.0 && g2 > 0.0) || g1 == g2 {
        return Err(HmgaError::Calibration(
            "violation anchors must be distinct and positive".into(),
        ));
    }
    let q = (t1 / t2).ln() / (g1 / g2).ln();
    if !(q > 0.0) || !q.is_finite() {
        return Err(HmgaError::Calibration(format!(
            "penalty exponent {q} is not positive"
        )));
    }
    let k = t1 / g1.powf(q);
    Ok((k, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> PenaltyParams {
        PenaltyParams {
            c: 10.0,
            lambda: 1.0,
            k: 100.0,
            q: 2.0,
            eta: 1e-3,
        }
    }

    #[test]
    fn penalty_examples() {
        let p = params();
        assert_eq!(penalty(1e-3, &p), 0.0);
        assert_eq!(penalty(-1e-3, &p), 0.0);
        assert_eq!(penalty(0.0, &p), 0.0);
        assert_eq!(penalty(0.5, &p), 25.0);
    }

    #[test]
    fn fitness_examples() {
        let p = params();
        assert_eq!(fitness(3.0, 5e-4, &p), 7.0);
        assert_eq!(fitness(0.0, 0.0, &p), 10.0);
        assert_eq!(fitness(2.0, 0.5, &p), -17.0);
    }

    #[test]
    fn calibration_examples() {
        let (k, q) = calibrate_penalty((1.0, 100.0), (10.0, 10_000.0)).unwrap();
        assert!((q - 2.0).abs() < 1e-12 && (k - 100.0).abs() < 1e-9);
        let (k, q) = calibrate_penalty((2.0, 8.0), (4.0, 64.0)).unwrap();
        assert!((q - 3.0).abs() < 1e-12 && (k - 1.0).abs() < 1e-12);
        // single-parameter consistency: at g = 1 the target is K itself
        let (k, _) = calibrate_penalty((1.0, 42.0), (3.0, 42.0 * 9.0)).unwrap();
        assert!((k - 42.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_errors() {
        assert!(calibrate_penalty((1.0, 10.0), (1.0, 20.0)).is_err());
        assert!(calibrate_penalty((1.0, 0.0), (2.0, 20.0)).is_err());
        assert!(calibrate_penalty((1.0, -1.0), (2.0, 20.0)).is_err());
    }

    #[test]
    fn default_rule() {
        let p = PenaltyParams::defaults_for(3.0, 8.0).unwrap();
        assert_eq!(p.c, 9.0);
        assert!((p.eta - 3e-3).abs() < 1e-15);
        assert!((p.q - 2.0).abs() < 1e-12);
        assert!((penalty(0.3, &p) - 9.0).abs() < 1e-9);
        assert!((penalty(3.0, &p) - 900.0).abs() < 1e-6);
    }

    #[test]
    fn resolve_validates() {
        let cfg = PenaltyConfig {
            c: Some(5.0),
            ..Default::default()
        };
        assert!(matches!(
            cfg.resolve(3.0, 8.0),
            Err(HmgaError::Config { field, .. }) if field == "penalty.c"
        ));
    }

    proptest! {
        #[test]
        fn total_beats_partial_at_same_beta(
            beta in 0.0f64..8.0,
            g_total in -3e-3f64..3e-3,
            excess in 1e-9f64..10.0,
            g0 in 0.1f64..50.0,
        ) {
            let p = PenaltyParams::defaults_for(g0, 8.0).unwrap();
            let g_total = g_total * g0 / 3.0;
            let g_partial = p.eta + excess * g0;
            prop_assert!(fitness(beta, g_total, &p) > fitness(beta, g_partial, &p));
            prop_assert!(fitness(beta, g_total, &p) > fitness(beta, -g_partial, &p));
        }

        #[test]
        fn penalty_monotone(a in 0.0f64..100.0, b in 0.0f64..100.0) {
            let p = params();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(penalty(lo, &p) <= penalty(hi, &p));
        }

        #[test]
        fn fitness_strictly_decreasing_in_beta(b1 in 0.0f64..8.0, d in 1e-6f64..8.0, g in -1.0f64..1.0) {
            let p = params();
            prop_assert!(fitness(b1, g, &p) > fitness(b1 + d, g, &p));
        }
    }
}
