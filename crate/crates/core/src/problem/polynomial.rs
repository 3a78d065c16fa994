//! Polynomial limit states read from JSON, for desk experiments.
//!
//! ```json
//! {
//!   "name": "beam",
//!   "marginals": [{"kind": "normal", "param1": 10.0, "param2": 1.0},
//!                 {"kind": "normal", "param1": 4.0, "param2": 1.0}],
//!   "terms": [{"coef": 1.0, "powers": [1, 0]}, {"coef": -1.0, "powers": [0, 1]}]
//! }
//! ```
//! describes `g(x) = x1 - x2` over the listed physical variables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BenchmarkProblem, LimitStateFunction, Marginal, UncertaintySpace};
use crate::error::{HmgaError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub marginals: Vec<Marginal>,
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_beta: Option<f64>,
}

fn default_name() -> String {
    "polynomial".to_string()
}

impl PolynomialSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HmgaError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HmgaError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn build(&self) -> Result<BenchmarkProblem> {
        let n = self.marginals.len();
        for (i, t) in self.terms.iter().enumerate() {
            if t.powers.len() != n {
                return Err(HmgaError::config(
                    format!("terms[{i}].powers"),
                    format!("expected {n} exponents, got {}", t.powers.len()),
                ));
            }
        }
        let space = UncertaintySpace::new(self.marginals.clone())?;
        let terms = self.terms.clone();
        let ls = LimitStateFunction::new(self.name.clone(), n, move |x: &[f64]| {
            terms
                .iter()
                .map(|t| {
                    t.powers
                        .iter()
                        .zip(x)
                        .fold(t.coef, |acc, (&p, &xi)| acc * xi.powi(p as i32))
                })
                .sum()
        });
        BenchmarkProblem::new(space, ls, self.known_beta, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resistance_minus_load() {
        let text = r#"{
            "marginals": [{"kind": "normal", "param1": 10.0, "param2": 3.0},
                          {"kind": "normal", "param1": 4.0, "param2": 4.0}],
            "terms": [{"coef": 1.0, "powers": [1, 0]}, {"coef": -1.0, "powers": [0, 1]}]
        }"#;
        let spec: PolynomialSpec = serde_json::from_str(text).unwrap();
        let p = spec.build().unwrap();
        assert_eq!(p.name(), "polynomial");
        assert_eq!(p.g0(), 6.0);
        // y = (2, 0) -> x = (16, 4), g = 12
        assert_eq!(p.evaluate_g(&[2.0, 0.0]).unwrap(), 12.0);
    }

    #[test]
    fn bad_exponent_count() {
        let spec = PolynomialSpec {
            name: "p".into(),
            marginals: vec![Marginal::standard()],
            terms: vec![Term {
                coef: 1.0,
                powers: vec![1, 1],
            }],
            known_beta: None,
        };
        assert!(matches!(spec.build(), Err(HmgaError::Config { .. })));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"marginals": [], "terms": [], "extra": 1}"#;
        assert!(serde_json::from_str::<PolynomialSpec>(text).is_err());
    }
}
