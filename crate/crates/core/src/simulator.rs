//! Joint fixed-step integration of plants, reference generators and controllers.
//!
//! The global state stores `[x1, x2, s, L, F1, F2]` for every agent, agent `i` at offset `6i`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{evaluate, ControllerState, LawOptions};
use crate::graph::Digraph;
use crate::ode::{rk4_step, Rk4Workspace};
use crate::reference::{reference_rate_into, spread, ReferenceParams};
use crate::scalar::Scalar;
use crate::scenario::{Scenario, ValidationError};

/// Number of state components per agent.
pub const STATE_PER_AGENT: usize = 6;
const X1: usize = 0;
const X2: usize = 1;
const S: usize = 2;
const L: usize = 3;
const F1: usize = 4;
const F2: usize = 5;

/// Relative tolerance applied to the terminal-set radius when detecting its entry time.
pub const OMEGA_ENTRY_TOL: f64 = 0.05;
/// Spread below which the reference generators count as agreeing.
pub const REFERENCE_CONSENSUS_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario failed validation ({} issue(s))", .0.len())]
    Invalid(Vec<ValidationError>),
    #[error("initial state has {got} entries, expected {expected}")]
    StateShape { expected: usize, got: usize },
}

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instability {
    /// A signal exceeded the blow-up threshold.
    BlowUp { t: f64, agent: usize, signal: String, value: f64 },
    /// A rate or state became NaN or infinite.
    NonFinite { t: f64, agent: usize, signal: String },
    /// `e^{f(ν)}` of a Nussbaum gain is no longer representable.
    NussbaumOverflow { t: f64, agent: usize, gain: f64 },
}

impl Instability {
    pub fn time(&self) -> f64 {
        match self {
            Self::BlowUp { t, .. } | Self::NonFinite { t, .. } | Self::NussbaumOverflow { t, .. } => *t,
        }
    }

    pub fn agent(&self) -> usize {
        match self {
            Self::BlowUp { agent, .. } | Self::NonFinite { agent, .. } | Self::NussbaumOverflow { agent, .. } => *agent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Unstable(Instability),
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, Self::Completed)
    }
}

/// Signals derived from the state at one instant for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentSignals<T> {
    pub y: T,
    pub y_check: T,
    pub x2_check: T,
    pub u: T,
    pub u_applied: T,
    pub e: T,
    pub z1: T,
    pub z2: T,
    pub v1: T,
    pub phi2: T,
    pub varpi: T,
}

/// One recorded instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub state: Vec<T>,
    pub signals: Vec<AgentSignals<T>>,
    /// `Σ_i Σ_j (y_i − y_j)²`
    pub e_sum: T,
}

impl<T: Scalar> Snapshot<T> {
    pub fn agent_state(&self, i: usize) -> &[T] {
        &self.state[STATE_PER_AGENT * i..STATE_PER_AGENT * (i + 1)]
    }

    pub fn y(&self, i: usize) -> T {
        self.state[STATE_PER_AGENT * i + X1]
    }

    pub fn x2(&self, i: usize) -> T {
        self.state[STATE_PER_AGENT * i + X2]
    }

    pub fn s(&self, i: usize) -> T {
        self.state[STATE_PER_AGENT * i + S]
    }

    pub fn l(&self, i: usize) -> T {
        self.state[STATE_PER_AGENT * i + L]
    }

    pub fn f1(&self, i: usize) -> T {
        self.state[STATE_PER_AGENT * i + F1]
    }

    pub fn f2(&self, i: usize) -> T {
        self.state[STATE_PER_AGENT * i + F2]
    }

    pub fn outputs(&self) -> Vec<T> {
        (0..self.agent_count()).map(|i| self.y(i)).collect()
    }

    pub fn agent_count(&self) -> usize {
        self.state.len() / STATE_PER_AGENT
    }

    /// `max_{i,j} |y_i − y_j|`
    pub fn output_spread(&self) -> T {
        spread(&self.outputs())
    }
}

/// Recorded trajectory of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace<T> {
    pub agents: usize,
    pub dt: T,
    pub snapshots: Vec<Snapshot<T>>,
    pub status: RunStatus,
}

impl<T: Scalar> SimTrace<T> {
    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Snapshot<T> {
        self.snapshots.last().expect("trace holds the initial snapshot")
    }
}

/// `Σ_i Σ_j (y_i − y_j)²` over all ordered pairs.
pub fn error_sum<T: Scalar>(y: &[T]) -> T {
    let mut acc = T::zero();
    for &a in y {
        for &b in y {
            acc += (a - b) * (a - b);
        }
    }
    acc
}

/// Closed-loop right-hand side for one scenario.
pub struct Simulator<'a, T> {
    scenario: &'a Scenario<T>,
    graph: Digraph,
    options: LawOptions,
    threshold: T,
    s_buf: Vec<T>,
    s_rate: Vec<T>,
}

impl<'a, T: Scalar> Simulator<'a, T> {
    /// Validates the scenario and prepares the right-hand side.
    pub fn new(scenario: &'a Scenario<T>) -> Result<Self, SimError> {
        scenario.validate().map_err(SimError::Invalid)?;
        let n = scenario.agent_count();
        Ok(Self {
            scenario,
            graph: scenario.digraph(),
            options: scenario.flags.law_options(),
            threshold: scenario.integration.blow_up_threshold,
            s_buf: vec![T::zero(); n],
            s_rate: vec![T::zero(); n],
        })
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    fn check(&self, t: T, agent: usize, signal: &str, v: T) -> Result<(), Instability> {
        if !v.is_finite() {
            Err(Instability::NonFinite { t: t.as_f64(), agent, signal: signal.into() })
        } else if v.abs() > self.threshold {
            Err(Instability::BlowUp { t: t.as_f64(), agent, signal: signal.into(), value: v.as_f64() })
        } else {
            Ok(())
        }
    }

    /// Writes the 6n-vector of rates into `out` and, when asked, the derived signals.
    pub fn global_rate(
        &mut self,
        t: T,
        y: &[T],
        out: &mut [T],
        mut signals: Option<&mut [AgentSignals<T>]>,
    ) -> Result<(), Instability> {
        let n = self.scenario.agent_count();
        for i in 0..n {
            self.s_buf[i] = y[STATE_PER_AGENT * i + S];
        }
        reference_rate_into(&self.s_buf, &self.graph, &self.scenario.reference, &mut self.s_rate);

        let attacks = &self.scenario.attacks;
        for i in 0..n {
            let base = STATE_PER_AGENT * i;
            let agent = &self.scenario.agents[i];
            let (x1, x2, s) = (y[base + X1], y[base + X2], y[base + S]);
            let st = ControllerState { l: y[base + L], f1: y[base + F1], f2: y[base + F2] };

            let m = attacks.sense(i, x1, x2, t);
            let law = evaluate(&m, s, &st, &agent.controller, self.options, &agent.model.phi1, &agent.model.phi2)
                .map_err(|_| {
                    let gain = if agent.controller.nussbaum.eval(st.f1).is_err() { st.f1 } else { st.f2 };
                    Instability::NussbaumOverflow { t: t.as_f64(), agent: i, gain: gain.as_f64() }
                })?;
            self.check(t, i, "v1", law.v1)?;
            self.check(t, i, "u", law.u)?;
            let u_applied = attacks.actuate(i, law.u, t);
            let (dx1, dx2) = agent.model.plant_rate(x1, x2, u_applied, t).map_err(|_| Instability::NonFinite {
                t: t.as_f64(),
                agent: i,
                signal: "plant rate".into(),
            })?;

            out[base + X1] = dx1;
            out[base + X2] = dx2;
            out[base + S] = self.s_rate[i];
            out[base + L] = law.l_rate;
            out[base + F1] = law.f1_rate;
            out[base + F2] = law.f2_rate;
            for (k, name) in ["x1 rate", "x2 rate", "s rate", "L rate", "F1 rate", "F2 rate"].iter().enumerate() {
                if !out[base + k].is_finite() {
                    return Err(Instability::NonFinite { t: t.as_f64(), agent: i, signal: (*name).into() });
                }
            }

            if let Some(sig) = signals.as_deref_mut() {
                let varpi = self.graph.neighbors(i).map(|j| s - self.s_buf[j]).fold(T::zero(), |a, b| a + b);
                sig[i] = AgentSignals {
                    y: x1,
                    y_check: m.y_check,
                    x2_check: m.x2_check,
                    u: law.u,
                    u_applied,
                    e: law.e,
                    z1: law.z1,
                    z2: law.z2,
                    v1: law.v1,
                    phi2: law.phi2,
                    varpi,
                };
            }
        }
        Ok(())
    }

    fn check_state(&self, t: T, y: &[T]) -> Result<(), Instability> {
        const NAMES: [&str; STATE_PER_AGENT] = ["x1", "x2", "s", "L", "F1", "F2"];
        for (k, &v) in y.iter().enumerate() {
            self.check(t, k / STATE_PER_AGENT, NAMES[k % STATE_PER_AGENT], v)?;
        }
        Ok(())
    }

    fn snapshot(&mut self, t: T, y: &[T], scratch: &mut [T]) -> Result<Snapshot<T>, Instability> {
        let mut signals = vec![AgentSignals::default(); self.scenario.agent_count()];
        self.global_rate(t, y, scratch, Some(&mut signals))?;
        let outputs: Vec<T> = signals.iter().map(|s| s.y).collect();
        Ok(Snapshot { t, state: y.to_vec(), signals, e_sum: error_sum(&outputs) })
    }

    /// Runs the scenario over its horizon with classical RK4.
    pub fn run(&mut self) -> SimTrace<T> {
        let integ = self.scenario.integration;
        let dt = integ.dt;
        let steps = (integ.horizon / dt).round().to_usize().unwrap_or(0);
        let mut y = self.scenario.initial_state();
        let mut ws = Rk4Workspace::new(y.len());
        let mut scratch = vec![T::zero(); y.len()];
        let mut snapshots = Vec::with_capacity(steps / integ.record_every + 1);
        let trace = |snapshots, status| SimTrace { agents: self.scenario.agent_count(), dt, snapshots, status };

        match self.check_state(T::zero(), &y).and_then(|_| self.snapshot(T::zero(), &y, &mut scratch)) {
            Ok(s) => snapshots.push(s),
            Err(e) => {
                let signals = vec![AgentSignals::default(); self.scenario.agent_count()];
                snapshots.push(Snapshot { t: T::zero(), state: y, signals, e_sum: T::nan() });
                return trace(snapshots, RunStatus::Unstable(e));
            }
        }
        for k in 0..steps {
            let t = T::from_count(k) * dt;
            let t_next = T::from_count(k + 1) * dt;
            let stepped = rk4_step(t, dt, &mut y, &mut ws, |tt, yy, out| self.global_rate(tt, yy, out, None))
                .and_then(|_| self.check_state(t_next, &y));
            if let Err(e) = stepped {
                return trace(snapshots, RunStatus::Unstable(e));
            }
            if (k + 1) % integ.record_every == 0 || k + 1 == steps {
                match self.snapshot(t_next, &y, &mut scratch) {
                    Ok(s) => snapshots.push(s),
                    Err(e) => return trace(snapshots, RunStatus::Unstable(e)),
                }
            }
        }
        trace(snapshots, RunStatus::Completed)
    }
}

/// Validates and integrates `scenario`.
pub fn integrate<T: Scalar>(scenario: &Scenario<T>) -> Result<SimTrace<T>, SimError> {
    Ok(Simulator::new(scenario)?.run())
}

/// Reference generators alone, stepped with the same arithmetic as the closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrace<T> {
    pub times: Vec<T>,
    pub samples: Vec<Vec<T>>,
}

pub fn integrate_reference<T: Scalar>(
    graph: &Digraph,
    params: &ReferenceParams<T>,
    s0: &[T],
    dt: T,
    horizon: T,
    record_every: usize,
) -> Result<ReferenceTrace<T>, SimError> {
    if s0.len() != graph.agent_count() {
        return Err(SimError::StateShape { expected: graph.agent_count(), got: s0.len() });
    }
    let record_every = record_every.max(1);
    let steps = (horizon / dt).round().to_usize().unwrap_or(0);
    let mut s = s0.to_vec();
    let mut ws = Rk4Workspace::new(s.len());
    let mut times = vec![T::zero()];
    let mut samples = vec![s.clone()];
    for k in 0..steps {
        let t = T::from_count(k) * dt;
        rk4_step::<T, std::convert::Infallible, _>(t, dt, &mut s, &mut ws, |_, ss, out| {
            reference_rate_into(ss, graph, params, out);
            Ok(())
        })
        .unwrap_or_else(|e| match e {});
        if (k + 1) % record_every == 0 || k + 1 == steps {
            times.push(T::from_count(k + 1) * dt);
            samples.push(s.clone());
        }
    }
    Ok(ReferenceTrace { times, samples })
}

/// Scalar metrics of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub scenario_hash: String,
    pub dt: f64,
    pub horizon: f64,
    pub status: RunStatus,
    /// No instability and every maximum finite.
    pub bounded: bool,
    /// Largest magnitude per signal family.
    pub max_abs: BTreeMap<String, f64>,
    /// First time after which `max |y_i − y_j| ≤ 2ρε̄(1 + tol)` on every later sample.
    pub settling_time: Option<f64>,
    /// `2ρε̄`
    pub omega_bound: f64,
    /// Mean of `E` over the final 10% of the horizon.
    pub e_final: f64,
    /// Agreed value of the reference generators at the end of the run.
    pub s0_empirical: f64,
    pub reference_consensus_time: Option<f64>,
    /// `max_{t, i, j} |y_i − y_j|` over the final 20%.
    pub steady_spread: f64,
    /// `max_t |y_1 − y_N|` over the final 20%.
    pub steady_pair_band: f64,
    /// `max_{t, i} |e_i|` over the final 20%.
    pub steady_max_abs_e: f64,
    /// `max_{t > T_s, i} |y_i − s₀/ϱ_o(t)|`
    pub consensus_value_deviation: Option<f64>,
    /// `L`, `F1`, `F2` never decrease between recorded samples.
    pub gains_monotone: bool,
    pub peak_abs_y1: f64,
}

fn tail<T>(items: &[T], fraction: f64) -> &[T] {
    let keep = ((items.len() as f64) * fraction).ceil().max(1.0) as usize;
    &items[items.len().saturating_sub(keep)..]
}

/// Computes the run metrics from a trace.
pub fn compute_summary<T: Scalar>(trace: &SimTrace<T>, scenario: &Scenario<T>) -> Summary {
    let snaps = &trace.snapshots;
    let n = trace.agents;
    let f = |v: T| v.as_f64();

    let mut max_abs: BTreeMap<String, f64> = BTreeMap::new();
    let mut bump = |name: &str, v: T| {
        let e = max_abs.entry(name.to_string()).or_insert(0.0);
        let a = f(v).abs();
        *e = if a.is_nan() || e.is_nan() { f64::NAN } else { e.max(a) };
    };
    for snap in snaps {
        for i in 0..n {
            bump("y", snap.y(i));
            bump("x2", snap.x2(i));
            bump("s", snap.s(i));
            bump("L", snap.l(i));
            bump("F1", snap.f1(i));
            bump("F2", snap.f2(i));
            let sig = &snap.signals[i];
            bump("u", sig.u);
            bump("u_applied", sig.u_applied);
            bump("v1", sig.v1);
            bump("e", sig.e);
        }
        bump("E", snap.e_sum);
    }
    let bounded = trace.status.is_completed() && max_abs.values().all(|v| v.is_finite());

    let omega = f(scenario.omega_bound());
    let limit = omega * (1.0 + OMEGA_ENTRY_TOL);
    let spreads: Vec<f64> = snaps.iter().map(|s| f(s.output_spread())).collect();
    let settling_time = if trace.status.is_completed() {
        match spreads.iter().rposition(|&sp| !(sp <= limit)) {
            None => Some(f(snaps[0].t)),
            Some(k) if k + 1 < snaps.len() => Some(f(snaps[k + 1].t)),
            Some(_) => None,
        }
    } else {
        None
    };

    let e_tail = tail(snaps, 0.1);
    let e_final = e_tail.iter().map(|s| f(s.e_sum)).sum::<f64>() / e_tail.len() as f64;
    let steady = tail(snaps, 0.2);
    let steady_spread = steady.iter().map(|s| f(s.output_spread())).fold(0.0, f64::max);
    let steady_pair_band = steady.iter().map(|s| (f(s.y(0)) - f(s.y(n - 1))).abs()).fold(0.0, f64::max);
    let steady_max_abs_e = steady.iter().flat_map(|s| s.signals.iter().map(|g| f(g.e).abs())).fold(0.0, f64::max);

    let last = trace.last();
    let s_final: Vec<f64> = (0..n).map(|i| f(last.s(i))).collect();
    let s0_empirical = s_final.iter().sum::<f64>() / n as f64;
    let s_samples: Vec<Vec<T>> = snaps.iter().map(|s| (0..n).map(|i| s.s(i)).collect()).collect();
    let reference_consensus_time =
        crate::reference::detect_consensus_time(&trace.times(), &s_samples, T::lit(REFERENCE_CONSENSUS_TOL)).map(f);

    let consensus_value_deviation = settling_time.map(|ts| {
        snaps
            .iter()
            .filter(|s| f(s.t) > ts)
            .flat_map(|s| {
                let target = s0_empirical / f(scenario.attacks.rho_o.value(s.t));
                (0..n).map(move |i| (f(s.y(i)) - target).abs())
            })
            .fold(0.0, f64::max)
    });

    let gains_monotone = snaps
        .windows(2)
        .all(|w| (0..n).all(|i| w[1].l(i) >= w[0].l(i) && w[1].f1(i) >= w[0].f1(i) && w[1].f2(i) >= w[0].f2(i)));
    let peak_abs_y1 = snaps.iter().map(|s| f(s.y(0)).abs()).fold(0.0, f64::max);

    Summary {
        scenario: scenario.name.clone(),
        scenario_hash: scenario.content_hash(),
        dt: f(trace.dt),
        horizon: f(scenario.integration.horizon),
        status: trace.status.clone(),
        bounded,
        max_abs,
        settling_time,
        omega_bound: omega,
        e_final,
        s0_empirical,
        reference_consensus_time,
        steady_spread,
        steady_pair_band,
        steady_max_abs_e,
        consensus_value_deviation,
        gains_monotone,
        peak_abs_y1,
    }
}
