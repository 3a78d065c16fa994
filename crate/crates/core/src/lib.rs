//! Hybrid micro-genetic algorithm for the Hasofer-Lind reliability index.
//!
//! The solver looks for the point of the failure surface `G(y) = 0` nearest
//! to the origin of standard normal space. Candidates are mixed genotypes
//! `(β, b(a))`: a distance gene and a binary-coded direction. Every new
//! genotype is pulled onto the surface along its direction by a line
//! iteration ([`repair`]), ranked by a penalized fitness ([`fitness`]) and
//! evolved by a small elitist population ([`evolution`]) inside a direction
//! box that shrinks around the elite ([`zoom`]). [`engine::run`] drives the
//! three stages; [`oracle`] holds independent reference solvers.
//!
//! ```
//! use hmga::{run, RunConfig};
//!
//! let report = run(&RunConfig::for_problem("linear-2d")).unwrap();
//! assert!((report.beta_hl - 3.0).abs() < 0.05);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod evolution;
pub mod fitness;
pub mod genotype;
pub mod oracle;
pub mod problem;
pub mod repair;
pub mod zoom;

pub use engine::{
    probability_of_failure, run, run_problem, HistoryRow, RunConfig, RunReport, StageBoundaries,
};
pub use error::{HmgaError, Result};
pub use evolution::EvolutionConfig;
pub use fitness::{PenaltyConfig, PenaltyParams};
pub use genotype::{MixedGenotype, Population};
pub use oracle::{OracleMethod, OracleResult};
pub use problem::benchmarks::{BenchmarkSpec, ProblemSpec};
pub use problem::{BenchmarkProblem, LimitStateFunction, Marginal, MarginalKind, UncertaintySpace};
pub use repair::{ConvergenceMode, RepairConfig, RepairOutcome, RepairStatus, Repairer};
pub use zoom::{SearchRegion, ZoomConfig};
