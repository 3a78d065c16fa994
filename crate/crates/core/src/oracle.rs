//! Reference solvers used to validate the genetic search: a ray scan with
//! bisection, an exhaustive direction sweep built on it, and the classical
//! HL-RF fixed-point iteration with finite-difference gradients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HmgaError, Result};
use crate::problem::{check_unit, norm, normal, BenchmarkProblem};

pub const DEFAULT_SCAN_POINTS: usize = 512;
pub const DEFAULT_ANGLES_2D: usize = 4096;
pub const DEFAULT_DIRECTIONS_ND: usize = 65536;
pub const DEFAULT_BETA_CAP: f64 = 16.0;
pub const BISECTION_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    BruteForce,
    Hlrf,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub beta: f64,
    pub direction: Vec<f64>,
    pub method: OracleMethod,
    pub evaluations: usize,
}

/// Root of `G(β a)` with its evaluation count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayRoot {
    pub beta: Option<f64>,
    pub evaluations: usize,
}

/// First crossing of the failure surface along `a` within `[0, beta_cap]`,
/// scanned on `points` grid nodes and refined by bisection to `tol`.
pub fn scan_ray(
    problem: &BenchmarkProblem,
    a: &[f64],
    beta_cap: f64,
    points: usize,
    tol: f64,
) -> Result<RayRoot> {
    check_unit(a)?;
    if !(beta_cap > 0.0) || points < 2 {
        return Err(HmgaError::config(
            "beta_cap",
            "scan needs a positive cap and two nodes",
        ));
    }
    let step = beta_cap / (points - 1) as f64;
    let mut evaluations = 0;
    let mut prev = 0.0;
    for j in 0..points {
        let b = j as f64 * step;
        let g = problem.g_along(b, a)?;
        evaluations += 1;
        if g == 0.0 {
            return Ok(RayRoot {
                beta: Some(b),
                evaluations,
            });
        }
        if g < 0.0 {
            if j == 0 {
                // origin already failing: nothing to bracket
                return Ok(RayRoot {
                    beta: Some(0.0),
                    evaluations,
                });
            }
            let (mut lo, mut hi) = (prev, b);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let gm = problem.g_along(mid, a)?;
                evaluations += 1;
                if gm > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(RayRoot {
                beta: Some(0.5 * (lo + hi)),
                evaluations,
            });
        }
        prev = b;
    }
    Ok(RayRoot {
        beta: None,
        evaluations,
    })
}

/// Distance to the first surface crossing along `a`, or `None`.
pub fn beta_along(
    a: &[f64],
    problem: &BenchmarkProblem,
    beta_cap: f64,
    tol: f64,
) -> Result<Option<f64>> {
    Ok(scan_ray(problem, a, beta_cap, DEFAULT_SCAN_POINTS, tol)?.beta)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Quasi-uniform unit directions: Halton points pushed through `Φ⁻¹` and
/// normalized.
pub fn halton_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    assert!(
        n <= PRIMES.len(),
        "halton_directions supports up to {} dimensions",
        PRIMES.len()
    );
    (1..=count as u64)
        .filter_map(|i| {
            let v: Vec<f64> = PRIMES[..n]
                .iter()
                .map(|&p| normal::quantile(radical_inverse(i, p)))
                .collect();
            let len = norm(&v);
            (len > 1e-12).then(|| v.into_iter().map(|x| x / len).collect())
        })
        .collect()
}

struct Probe<'p> {
    problem: &'p BenchmarkProblem,
    beta_cap: f64,
    evaluations: usize,
}

impl Probe<'_> {
    fn beta(&mut self, a: &[f64]) -> Result<f64> {
        let r = scan_ray(
            self.problem,
            a,
            self.beta_cap,
            DEFAULT_SCAN_POINTS,
            BISECTION_TOL,
        )?;
        self.evaluations += r.evaluations;
        Ok(r.beta.unwrap_or(f64::INFINITY))
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let len = norm(&v);
    v.into_iter().map(|x| x / len).collect()
}

fn angle_dir(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

/// Minimum of `beta_along` over a direction sweep. `resolution` is the
/// number of angles for `N = 2` and of Halton directions for `N = 3, 4`.
pub fn brute_force_mpp(
    problem: &BenchmarkProblem,
    resolution: usize,
    beta_cap: f64,
) -> Result<OracleResult> {
    let n = problem.dimension();
    if n > 4 {
        return Err(HmgaError::config(
            "dimension",
            "brute force is limited to N <= 4",
        ));
    }
    if resolution < 4 {
        return Err(HmgaError::config("resolution", "must be at least 4"));
    }
    let directions: Vec<Vec<f64>> = match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..resolution)
            .map(|k| angle_dir(std::f64::consts::TAU * k as f64 / resolution as f64))
            .collect(),
        _ => halton_directions(n, resolution),
    };
    let scans: Vec<Result<RayRoot>> = directions
        .par_iter()
        .map(|a| scan_ray(problem, a, beta_cap, DEFAULT_SCAN_POINTS, BISECTION_TOL))
        .collect();
    let mut evaluations = 0;
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scans.into_iter().enumerate() {
        let s = s?;
        evaluations += s.evaluations;
        if let Some(b) = s.beta {
            if best.is_none_or(|(_, bb)| b < bb) {
                best = Some((i, b));
            }
        }
    }
    let (idx, mut beta) = best.ok_or(HmgaError::NoFailureSurface)?;
    let mut direction = directions[idx].clone();
    let mut probe = Probe {
        problem,
        beta_cap,
        evaluations: 0,
    };

    if n == 2 {
        // golden-section search over one grid cell either side
        let h = std::f64::consts::TAU / resolution as f64;
        let theta0 = direction[1].atan2(direction[0]);
        let (mut lo, mut hi) = (theta0 - h, theta0 + h);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = probe.beta(&angle_dir(x1))?;
        let mut f2 = probe.beta(&angle_dir(x2))?;
        while hi - lo > 1e-10 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = probe.beta(&angle_dir(x1))?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = probe.beta(&angle_dir(x2))?;
            }
        }
        let a = angle_dir(0.5 * (lo + hi));
        let b = probe.beta(&a)?;
        if b < beta {
            beta = b;
            direction = a;
        }
    } else if n > 2 {
        // coordinate descent on the sphere
        let mut step = 0.05;
        while step > 1e-9 {
            let mut improved = false;
            for i in 0..n {
                for sign in [1.0, -1.0] {
                    let mut v = direction.clone();
                    v[i] += sign * step;
                    let v = unit(v);
                    let b = probe.beta(&v)?;
                    if b < beta {
                        beta = b;
                        direction = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }

    Ok(OracleResult {
        beta,
        direction,
        method: OracleMethod::BruteForce,
        evaluations: evaluations + probe.evaluations,
    })
}

/// Central-difference gradient of `G` at `y`.
pub fn gradient(problem: &BenchmarkProblem, y: &[f64]) -> Result<Vec<f64>> {
    let mut grad = Vec::with_capacity(y.len());
    let mut p = y.to_vec();
    for i in 0..y.len() {
        p[i] = y[i] + FD_STEP;
        let up = problem.evaluate_g(&p)?;
        p[i] = y[i] - FD_STEP;
        let down = problem.evaluate_g(&p)?;
        p[i] = y[i];
        grad.push((up - down) / (2.0 * FD_STEP));
    }
    Ok(grad)
}

/// HL-RF iteration `y ← [(∇G·y − G) / ‖∇G‖²] ∇G` from `y0`. Returns `None`
/// when it leaves the ball of radius `10 beta_cap`, meets a vanishing
/// gradient, or fails to settle within `max_iter` steps.
pub fn hlrf(
    problem: &BenchmarkProblem,
    y0: &[f64],
    max_iter: usize,
    tol: f64,
    beta_cap: f64,
) -> Result<Option<OracleResult>> {
    if y0.len() != problem.dimension() {
        return Err(HmgaError::Dimension {
            expected: problem.dimension(),
            got: y0.len(),
        });
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(HmgaError::Contract("starting point must be finite".into()));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut evaluations = 0;
    for _ in 0..max_iter {
        let g = problem.evaluate_g(&y)?;
        let grad = gradient(problem, &y)?;
        evaluations += 1 + 2 * n;
        let g2: f64 = grad.iter().map(|d| d * d).sum();
        if !(g2 > 0.0) || !g2.is_finite() {
            return Ok(None);
        }
        let dot: f64 = grad.iter().zip(&y).map(|(d, v)| d * v).sum();
        let scale = (dot - g) / g2;
        let next: Vec<f64> = grad.iter().map(|d| scale * d).collect();
        let moved = norm(&next.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
        y = next;
        let len = norm(&y);
        if !len.is_finite() || len > 10.0 * beta_cap {
            return Ok(None);
        }
        if moved <= tol {
            if len == 0.0 {
                return Ok(None);
            }
            return Ok(Some(OracleResult {
                beta: len,
                direction: y.iter().map(|v| v / len).collect(),
                method: OracleMethod::Hlrf,
                evaluations,
            }));
        }
    }
    Ok(None)
}

/// The registered closed-form answer, when the problem carries one.
pub fn closed_form(problem: &BenchmarkProblem) -> Option<OracleResult> {
    let beta = problem.known_beta()?;
    let mpp = problem.known_mpp()?;
    let len = norm(mpp);
    Some(OracleResult {
        beta,
        direction: mpp.iter().map(|v| v / len).collect(),
        method: OracleMethod::ClosedForm,
        evaluations: 0,
    })
}

/// Angle between two unit vectors, in degrees.
pub fn angle_deg(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos().to_degrees()
}
