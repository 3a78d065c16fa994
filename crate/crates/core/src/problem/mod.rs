//! Random variables, the isoprobabilistic transform to standard normal space
//! and limit-state functions.
//!
//! Only independent marginals are handled, so the transform is the
//! coordinate-wise composition `y_i = Φ⁻¹(F_i(x_i))`.

pub mod benchmarks;
pub mod normal;
pub mod polynomial;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HmgaError, Result};

/// Tolerance on `‖a‖ = 1` for directions handed to [`BenchmarkProblem::g_along`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalKind {
    /// `param1` = mean, `param2` = standard deviation.
    Normal,
    /// `param1`, `param2` = mean and standard deviation of `ln x`.
    Lognormal,
    /// `param1` = lower bound, `param2` = upper bound.
    Uniform,
}

/// One-dimensional marginal distribution of a physical random variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Marginal {
    pub kind: MarginalKind,
    pub param1: f64,
    pub param2: f64,
}

impl Marginal {
    pub fn new(kind: MarginalKind, param1: f64, param2: f64) -> Result<Self> {
        let m = Marginal {
            kind,
            param1,
            param2,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn standard() -> Self {
        Marginal {
            kind: MarginalKind::Normal,
            param1: 0.0,
            param2: 1.0,
        }
    }

    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        Self::new(MarginalKind::Normal, mean, std_dev)
    }

    pub fn lognormal(mu_ln: f64, sigma_ln: f64) -> Result<Self> {
        Self::new(MarginalKind::Lognormal, mu_ln, sigma_ln)
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        Self::new(MarginalKind::Uniform, lower, upper)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.param1.is_finite() || !self.param2.is_finite() {
            return Err(HmgaError::config("marginal", "parameters must be finite"));
        }
        match self.kind {
            MarginalKind::Normal | MarginalKind::Lognormal if self.param2 <= 0.0 => Err(
                HmgaError::config("marginal.param2", "standard deviation must be positive"),
            ),
            MarginalKind::Uniform if self.param2 <= self.param1 => Err(HmgaError::config(
                "marginal.param2",
                "upper bound must exceed lower bound",
            )),
            _ => Ok(()),
        }
    }

    /// Maps a physical value to standard normal space; `None` outside the support.
    pub fn to_standard(&self, x: f64) -> Option<f64> {
        if !x.is_finite() {
            return None;
        }
        match self.kind {
            MarginalKind::Normal => Some((x - self.param1) / self.param2),
            MarginalKind::Lognormal => {
                if x <= 0.0 {
                    return None;
                }
                Some((x.ln() - self.param1) / self.param2)
            }
            MarginalKind::Uniform => {
                let (lo, hi) = (self.param1, self.param2);
                if x <= lo || x >= hi {
                    return None;
                }
                let width = hi - lo;
                let u = (x - lo) / width;
                if u > 0.5 {
                    Some(-normal::quantile((hi - x) / width))
                } else {
                    Some(normal::quantile(u))
                }
            }
        }
    }

    /// Maps a standard normal value back to physical space.
    pub fn from_standard(&self, y: f64) -> f64 {
        match self.kind {
            MarginalKind::Normal => self.param1 + self.param2 * y,
            MarginalKind::Lognormal => (self.param1 + self.param2 * y).exp(),
            MarginalKind::Uniform => {
                let (lo, hi) = (self.param1, self.param2);
                if y > 0.0 {
                    hi - (hi - lo) * normal::cdf(-y)
                } else {
                    lo + (hi - lo) * normal::cdf(y)
                }
            }
        }
    }
}

/// Ordered list of independent marginals spanning the uncertainty space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UncertaintySpace {
    marginals: Vec<Marginal>,
}

impl UncertaintySpace {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(HmgaError::config(
                "marginals",
                "at least one variable is required",
            ));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(UncertaintySpace { marginals })
    }

    /// `n` independent standard normal variables.
    pub fn standard(n: usize) -> Self {
        UncertaintySpace {
            marginals: vec![Marginal::standard(); n.max(1)],
        }
    }

    pub fn dimension(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dimension() {
            return Err(HmgaError::Dimension {
                expected: self.dimension(),
                got,
            });
        }
        Ok(())
    }

    pub fn to_standard(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        self.marginals
            .iter()
            .zip(x)
            .enumerate()
            .map(|(index, (m, &value))| {
                m.to_standard(value)
                    .ok_or(HmgaError::Domain { index, value })
            })
            .collect()
    }

    pub fn from_standard(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y.len())?;
        Ok(self
            .marginals
            .iter()
            .zip(y)
            .map(|(m, &v)| m.from_standard(v))
            .collect())
    }
}

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Limit-state function `g(x)` in physical space; `g < 0` is failure.
#[derive(Clone)]
pub struct LimitStateFunction {
    name: String,
    dimension: usize,
    evaluator: Arc<Evaluator>,
}

impl LimitStateFunction {
    pub fn new<F>(name: impl Into<String>, dimension: usize, evaluator: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        LimitStateFunction {
            name: name.into(),
            dimension,
            evaluator: Arc::new(evaluator),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }
}

impl fmt::Debug for LimitStateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LimitStateFunction")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .finish_non_exhaustive()
    }
}

/// An uncertainty space paired with a limit state, plus reference values when
/// they are known in closed form.
#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    space: UncertaintySpace,
    limit_state: LimitStateFunction,
    known_beta: Option<f64>,
    known_mpp: Option<Vec<f64>>,
}

impl BenchmarkProblem {
    /// Registers a problem. The standard-space origin must lie in the safety
    /// space (`G(0) > 0`).
    pub fn new(
        space: UncertaintySpace,
        limit_state: LimitStateFunction,
        known_beta: Option<f64>,
        known_mpp: Option<Vec<f64>>,
    ) -> Result<Self> {
        if space.dimension() != limit_state.dimension() {
            return Err(HmgaError::Dimension {
                expected: space.dimension(),
                got: limit_state.dimension(),
            });
        }
        if let Some(mpp) = &known_mpp {
            space.check_dim(mpp.len())?;
        }
        let problem = BenchmarkProblem {
            space,
            limit_state,
            known_beta,
            known_mpp,
        };
        let g0 = problem.g0();
        if !(g0 > 0.0) {
            return Err(HmgaError::DegenerateProblem { g0, eta: 0.0 });
        }
        Ok(problem)
    }

    /// Same problem with its evaluator replaced, e.g. by an instrumented one.
    pub fn with_limit_state(&self, limit_state: LimitStateFunction) -> Result<Self> {
        BenchmarkProblem::new(
            self.space.clone(),
            limit_state,
            self.known_beta,
            self.known_mpp.clone(),
        )
    }

    pub fn name(&self) -> &str {
        self.limit_state.name()
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn space(&self) -> &UncertaintySpace {
        &self.space
    }

    pub fn limit_state(&self) -> &LimitStateFunction {
        &self.limit_state
    }

    pub fn known_beta(&self) -> Option<f64> {
        self.known_beta
    }

    pub fn known_mpp(&self) -> Option<&[f64]> {
        self.known_mpp.as_deref()
    }

    pub fn to_standard(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.space.to_standard(x)
    }

    pub fn from_standard(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.space.from_standard(y)
    }

    /// `G(y) = g(T⁻¹(y))`.
    pub fn evaluate_g(&self, y: &[f64]) -> Result<f64> {
        let x = self.space.from_standard(y)?;
        Ok(self.limit_state.eval(&x))
    }

    /// `G` at the origin of standard space.
    pub fn g0(&self) -> f64 {
        let origin = vec![0.0; self.dimension()];
        self.evaluate_g(&origin).unwrap_or(f64::NAN)
    }

    /// `G(β a)` for a unit direction `a`.
    pub fn g_along(&self, beta: f64, a: &[f64]) -> Result<f64> {
        check_unit(a)?;
        if !(beta >= 0.0) {
            return Err(HmgaError::Contract(format!(
                "beta must be nonnegative, got {beta}"
            )));
        }
        let y: Vec<f64> = a.iter().map(|ai| beta * ai).collect();
        self.evaluate_g(&y)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn check_unit(a: &[f64]) -> Result<()> {
    let n = norm(a);
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(HmgaError::Contract(format!(
            "direction must have unit norm, got {n}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_3_minus_y1() -> BenchmarkProblem {
        benchmarks::linear(&[1.0, 0.0], 3.0).unwrap()
    }

    #[test]
    fn normal_marginal_examples() {
        let m = Marginal::normal(5.0, 2.0).unwrap();
        assert_eq!(m.to_standard(5.0), Some(0.0));
        assert_eq!(m.to_standard(9.0), Some(2.0));
        assert_eq!(m.from_standard(-1.5), 2.0);
    }

    #[test]
    fn uniform_marginal_example() {
        let m = Marginal::uniform(0.0, 1.0).unwrap();
        let y = m.to_standard(0.977_249_86).unwrap();
        assert!((y - 2.0).abs() < 1e-6, "{y}");
    }

    #[test]
    fn lognormal_marginal_example() {
        let m = Marginal::lognormal(0.0, 1.0).unwrap();
        assert!((m.from_standard(1.0) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn identity_transform_at_origin() {
        let space = UncertaintySpace::standard(4);
        assert_eq!(space.from_standard(&[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn out_of_support_names_coordinate() {
        let space = UncertaintySpace::new(vec![
            Marginal::standard(),
            Marginal::lognormal(0.0, 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            space.to_standard(&[1.0, -2.0]),
            Err(HmgaError::Domain {
                index: 1,
                value: -2.0
            })
        );
        let u = UncertaintySpace::new(vec![Marginal::uniform(0.0, 1.0).unwrap()]).unwrap();
        assert!(matches!(
            u.to_standard(&[1.0]),
            Err(HmgaError::Domain { index: 0, .. })
        ));
    }

    #[test]
    fn invalid_marginals_rejected() {
        assert!(Marginal::normal(0.0, 0.0).is_err());
        assert!(Marginal::lognormal(0.0, -1.0).is_err());
        assert!(Marginal::uniform(1.0, 1.0).is_err());
        assert!(UncertaintySpace::new(vec![]).is_err());
    }

    #[test]
    fn evaluate_g_examples() {
        let p = linear_3_minus_y1();
        assert_eq!(p.evaluate_g(&[0.0, 0.0]).unwrap(), 3.0);
        assert_eq!(p.evaluate_g(&[3.0, 0.0]).unwrap(), 0.0);
        let s = benchmarks::sphere(&[4.0, 0.0], 1.0).unwrap();
        assert_eq!(s.evaluate_g(&[4.0, 0.0]).unwrap(), -1.0);
        assert!(matches!(
            p.evaluate_g(&[0.0]),
            Err(HmgaError::Dimension {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn g_along_examples() {
        let p = linear_3_minus_y1();
        assert_eq!(p.g_along(0.0, &[1.0, 0.0]).unwrap(), 3.0);
        assert_eq!(p.g_along(3.0, &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(p.g_along(10.0, &[0.0, 1.0]).unwrap(), 3.0);
        assert!(matches!(
            p.g_along(1.0, &[1.0, 1.0]),
            Err(HmgaError::Contract(_))
        ));
        assert!(p.g_along(-1.0, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn origin_must_be_safe() {
        let ls = LimitStateFunction::new("bad", 1, |x: &[f64]| x[0] - 1.0);
        let err = BenchmarkProblem::new(UncertaintySpace::standard(1), ls, None, None);
        assert!(matches!(err, Err(HmgaError::DegenerateProblem { .. })));
    }
}
