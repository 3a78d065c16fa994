use std::fmt;
use std::path::Path;
use std::str::FromStr;

use hmga::{HmgaError, ProblemSpec, RepairConfig, RunConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] HmgaError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 usage or config, 2 solver-declared failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(
                HmgaError::SurfaceNotFound { .. }
                | HmgaError::NoFailureSurface
                | HmgaError::DegenerateProblem { .. },
            ) => 2,
            _ => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Half-open seed range written `A..B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn seeds(&self) -> impl Iterator<Item = u64> {
        self.start..self.end
    }
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
        let start: u64 = a
            .trim()
            .parse()
            .map_err(|e| format!("bad range start {a:?}: {e}"))?;
        let end: u64 = b
            .trim()
            .parse()
            .map_err(|e| format!("bad range end {b:?}: {e}"))?;
        if end <= start {
            return Err(format!("empty seed range {s}"));
        }
        Ok(SeedRange { start, end })
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl Serialize for SeedRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SeedRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Benchmarks and seeds for `bench`; `run` supplies every other setting
/// (its `problem` and `seed` are overwritten per cell).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub benchmarks: Vec<ProblemSpec>,
    #[serde(default)]
    pub seeds: Option<SeedRange>,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleChoice {
    BruteForce,
    Hlrf,
    ClosedForm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub problem: ProblemSpec,
    #[serde(default = "default_oracle_method")]
    pub method: OracleChoice,
    /// Angles (`N = 2`) or directions (`N = 3, 4`) for brute force.
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default = "default_beta_cap")]
    pub beta_cap: f64,
    /// HL-RF start point; the origin when absent.
    #[serde(default)]
    pub y0: Option<Vec<f64>>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_oracle_method() -> OracleChoice {
    OracleChoice::BruteForce
}
fn default_beta_cap() -> f64 {
    hmga::oracle::DEFAULT_BETA_CAP
}
fn default_max_iter() -> usize {
    100
}
fn default_tol() -> f64 {
    1e-10
}

/// One ray repair: `problem`, unit `direction`, start `beta0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepairTraceConfig {
    pub problem: ProblemSpec,
    pub direction: Vec<f64>,
    #[serde(default)]
    pub beta0: f64,
    #[serde(default)]
    pub repair: RepairConfig,
    /// Stop tolerance; defaults to the run rule `1e-3 g0`.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
}

fn default_beta_max() -> f64 {
    RunConfig::default().beta_max
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Solver(HmgaError::Parse(format!("{}: {e}", path.display()))))
}

fn resolve(problem: &mut ProblemSpec, path: &Path) {
    if let Some(dir) = path.parent() {
        problem.resolve_paths(dir);
    }
}

pub fn load_run(path: &Path) -> CliResult<RunConfig> {
    Ok(RunConfig::from_path(path)?)
}

pub fn load_bench(path: &Path) -> CliResult<BenchConfig> {
    let mut cfg: BenchConfig = parse(path)?;
    for p in &mut cfg.benchmarks {
        resolve(p, path);
    }
    if cfg.benchmarks.is_empty() {
        return Err(HmgaError::Config {
            field: "benchmarks".into(),
            reason: "must list at least one problem".into(),
        }
        .into());
    }
    Ok(cfg)
}

pub fn load_oracle(path: &Path) -> CliResult<OracleConfig> {
    let mut cfg: OracleConfig = parse(path)?;
    resolve(&mut cfg.problem, path);
    if cfg.beta_cap.is_nan() || cfg.beta_cap <= 0.0 {
        return Err(HmgaError::Config {
            field: "beta_cap".into(),
            reason: "must be positive".into(),
        }
        .into());
    }
    Ok(cfg)
}

pub fn load_repair_trace(path: &Path) -> CliResult<RepairTraceConfig> {
    let mut cfg: RepairTraceConfig = parse(path)?;
    resolve(&mut cfg.problem, path);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_range_parses() {
        let r: SeedRange = "3..7".parse().unwrap();
        assert_eq!(r.seeds().collect::<Vec<_>>(), vec![3, 4, 5, 6]);
        assert_eq!(r.to_string(), "3..7");
        assert!("5..5".parse::<SeedRange>().is_err());
        assert!("5-9".parse::<SeedRange>().is_err());
        assert!("a..9".parse::<SeedRange>().is_err());
    }

    #[test]
    fn bench_config_rejects_unknown_keys() {
        let err = serde_json::from_str::<BenchConfig>(
            r#"{"benchmarks": ["linear-2d"], "sedes": "0..2"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("sedes"));
        let ok: BenchConfig =
            serde_json::from_str(r#"{"benchmarks": ["linear-2d"], "seeds": "0..2"}"#).unwrap();
        assert_eq!(ok.seeds, Some(SeedRange { start: 0, end: 2 }));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Solver(HmgaError::NoFailureSurface).exit_code(), 2);
        let cfg = HmgaError::Config {
            field: "beta_min".into(),
            reason: "r".into(),
        };
        assert_eq!(CliError::Solver(cfg).exit_code(), 1);
    }
}
