use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use hmga::problem::benchmarks;
use hmga::repair::{RepairConfig, Repairer};
use hmga::{
    probability_of_failure, run_problem, ConvergenceMode, LimitStateFunction, RepairStatus,
    RunConfig,
};

#[test]
fn reported_evaluations_match_limit_state_calls() {
    for name in ["linear-2d", "sphere-3d", "resistance-load"] {
        let base = benchmarks::by_name(name).unwrap();
        let calls = Arc::new(AtomicUsize::new(0));
        let counter = Arc::clone(&calls);
        let inner = base.limit_state().clone();
        let counted = LimitStateFunction::new(name, base.dimension(), move |x: &[f64]| {
            counter.fetch_add(1, Ordering::Relaxed);
            inner.eval(x)
        });
        let p = base.with_limit_state(counted).unwrap();
        calls.store(0, Ordering::Relaxed);
        let report = run_problem(&p, &RunConfig::default()).unwrap();
        assert_eq!(report.evaluations, calls.load(Ordering::Relaxed), "{name}");
    }
}

#[test]
fn report_is_internally_consistent() {
    let p = benchmarks::by_name("resistance-load").unwrap();
    let r = run_problem(&p, &RunConfig::default()).unwrap();
    let norm = r.mpp_standard.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - r.beta_hl).abs() <= 1e-9);
    assert_eq!(r.p_f, probability_of_failure(r.beta_hl));
    let eta = r.penalty.eta;
    assert!(p.evaluate_g(&r.mpp_standard).unwrap().abs() <= eta);
    let back = p.to_standard(&r.mpp_physical).unwrap();
    for (a, b) in back.iter().zip(&r.mpp_standard) {
        assert!((a - b).abs() < 1e-9);
    }
    assert_eq!(r.history.len(), r.generations);
    assert!(r
        .history
        .windows(2)
        .all(|w| w[1].best_fitness >= w[0].best_fitness));
}

#[test]
fn unreachable_surface_is_reported() {
    let p = benchmarks::linear(&[0.6, 0.8], 40.0).unwrap();
    let cfg = RunConfig {
        max_generations: 60,
        ..RunConfig::default()
    };
    let err = run_problem(&p, &cfg).unwrap_err();
    assert!(
        matches!(err, hmga::HmgaError::SurfaceNotFound { .. }),
        "{err}"
    );
}

#[test]
fn strong_and_weak_repair_modes_are_observable() {
    let p = benchmarks::by_name("linear-2d").unwrap();
    let a = [0.6, 0.8];
    let g0 = p.g0();
    let strong = Repairer::new(&p, RepairConfig::default().with_eta(1e-3 * g0), 8.0)
        .unwrap()
        .repair_ray(0.0, &a)
        .unwrap();
    assert_eq!(strong.status, RepairStatus::Total);
    assert_eq!(strong.mode, ConvergenceMode::Strong);

    // an amplitude well above the root overshoots and then alternates inward
    let big = RepairConfig {
        alpha: 0.95,
        beta_ref: 5.0,
        ..RepairConfig::default()
    }
    .with_eta(1e-3 * g0);
    let weak = Repairer::new(&p, big, 8.0)
        .unwrap()
        .repair_ray(0.0, &a)
        .unwrap();
    assert_eq!(weak.status, RepairStatus::Total);
    assert_eq!(weak.mode, ConvergenceMode::Weak);
    assert!(weak.trace.windows(2).all(|w| w[1].g.abs() < w[0].g.abs()));
    assert!(weak.trace.iter().any(|t| t.g < 0.0));
    assert!(
        (weak.final_beta - 3.0).abs() <= 1e-3 * g0,
        "{}",
        weak.final_beta
    );
}
