//! Closed-loop behaviour on a benchmark variant that integrates cleanly at dt = 1e-3.

mod common;

use resilient_consensus::scenario::four_agent_benchmark;
use resilient_consensus::simulator::{compute_summary, integrate, Instability, RunStatus};

fn max_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn aligned_directions_reaches_the_terminal_set() {
    let mut sc = common::aligned_directions();
    sc.integration.horizon = 20.0;
    let trace = integrate(&sc).unwrap();
    assert_eq!(trace.status, RunStatus::Completed);
    let summary = compute_summary(&trace, &sc);
    assert!(summary.bounded);
    assert!(summary.gains_monotone);
    let ts = summary.settling_time.expect("enters the terminal set");
    assert!(ts < 10.0, "settling time {ts}");
    assert!(summary.steady_spread <= summary.omega_bound);
    assert!(summary.steady_max_abs_e < 0.1);
    assert!(summary.reference_consensus_time.is_some());
}

#[test]
fn gains_never_decrease() {
    let mut sc = common::aligned_directions();
    sc.integration.horizon = 5.0;
    sc.integration.record_every = 1;
    let trace = integrate(&sc).unwrap();
    for w in trace.snapshots.windows(2) {
        for i in 0..trace.agents {
            assert!(w[1].l(i) >= w[0].l(i));
            assert!(w[1].f1(i) >= w[0].f1(i));
            assert!(w[1].f2(i) >= w[0].f2(i));
            assert!(w[1].l(i) >= 1.0);
        }
    }
}

#[test]
fn halving_the_step_changes_little() {
    let mut sc = common::aligned_directions();
    sc.integration.horizon = 10.0;
    let coarse = integrate(&sc).unwrap();
    sc.integration.dt /= 2.0;
    sc.integration.record_every *= 2;
    let fine = integrate(&sc).unwrap();
    assert!(coarse.status.is_completed() && fine.status.is_completed());
    let diff = max_norm_diff(&coarse.last().state, &fine.last().state);
    assert!(diff <= 1e-6, "final state moved by {diff}");
}

#[test]
fn runs_are_bit_identical() {
    let mut sc = common::aligned_directions();
    sc.integration.horizon = 3.0;
    let a = integrate(&sc).unwrap();
    let b = integrate(&sc).unwrap();
    assert_eq!(a.snapshots.len(), b.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(x.t.to_bits(), y.t.to_bits());
        assert!(x.state.iter().zip(&y.state).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn benchmark_divergence_is_reported_with_a_partial_trace() {
    let sc = four_agent_benchmark::<f64>();
    let trace = integrate(&sc).unwrap();
    match &trace.status {
        RunStatus::Unstable(Instability::NussbaumOverflow { agent, t, .. }) => {
            assert_eq!(*agent, 0);
            assert!(*t < 0.01);
        }
        other => panic!("unexpected status {other:?}"),
    }
    assert!(!trace.snapshots.is_empty());
    assert_eq!(trace.snapshots[0].t, 0.0);
    let summary = compute_summary(&trace, &sc);
    assert!(!summary.bounded);
    assert_eq!(summary.settling_time, None);
}

#[test]
fn single_precision_run_tracks_double() {
    let sc64 = {
        let mut sc = common::aligned_directions();
        sc.integration.horizon = 2.0;
        sc
    };
    let sc32: resilient_consensus::scenario::Scenario<f32> =
        serde_json::from_str(&serde_json::to_string(&sc64).unwrap()).unwrap();
    let a = integrate(&sc64).unwrap();
    let b = integrate(&sc32).unwrap();
    assert!(a.status.is_completed() && b.status.is_completed());
    let diff = a.last().state.iter().zip(&b.last().state).map(|(x, y)| (x - f64::from(*y)).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-2, "f32 and f64 differ by {diff}");
}
