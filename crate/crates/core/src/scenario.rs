//! Scenario documents: schema, validation and the built-in four-agent benchmark.
//!
//! A scenario is a single JSON document. Agent indices in `topology.edges` are 1-based
//! `[from, to]` pairs meaning `to` receives from `from`.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::controller::{ControllerParams, CrossTerm, LawOptions};
use crate::graph::Digraph;
use crate::nussbaum::NussbaumFamily;
use crate::plant::{
    validate_assumptions, AgentModel, AttackProfile, BoundingFunction, DeclaredBounds, Regressor, ScalarSignal,
    StateVar,
};
use crate::reference::ReferenceParams;
use crate::scalar::Scalar;

pub const SCENARIO_VERSION: u32 = 1;

/// Grid step used when sampling signals against their declared bounds.
pub const ASSUMPTION_GRID_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub agents: usize,
    /// 1-based `[from, to]` pairs.
    pub edges: Vec<[usize; 2]>,
}

impl Topology {
    pub fn digraph(&self) -> Result<Digraph, crate::graph::GraphError> {
        let edges: Vec<(usize, usize)> =
            self.edges.iter().map(|&[from, to]| (from.wrapping_sub(1), to.wrapping_sub(1))).collect();
        Digraph::from_edges(self.agents, &edges)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState<T> {
    pub x1: T,
    pub x2: T,
    pub s: T,
    pub l: T,
    pub f1: T,
    pub f2: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct AgentConfig<T> {
    pub model: AgentModel<T>,
    pub controller: ControllerParams<T>,
    pub initial: InitialState<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integration<T> {
    pub dt: T,
    pub horizon: T,
    pub record_every: usize,
    pub blow_up_threshold: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    #[serde(default)]
    pub squared_gain_term: bool,
    #[serde(default = "enabled")]
    pub adaptive_gain_enabled: bool,
    #[serde(default)]
    pub verbose_trace: bool,
}

fn enabled() -> bool {
    true
}

impl Default for Flags {
    fn default() -> Self {
        Self { squared_gain_term: false, adaptive_gain_enabled: true, verbose_trace: false }
    }
}

impl Flags {
    pub fn law_options(&self) -> LawOptions {
        LawOptions {
            cross_term: if self.squared_gain_term { CrossTerm::Squared } else { CrossTerm::Linear },
            adaptive_gain: self.adaptive_gain_enabled,
        }
    }
}

/// Complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Scenario<T> {
    pub version: u32,
    pub name: String,
    pub topology: Topology,
    pub agents: Vec<AgentConfig<T>>,
    pub attacks: AttackProfile<T>,
    pub reference: ReferenceParams<T>,
    pub integration: Integration<T>,
    #[serde(default)]
    pub flags: Flags,
}

/// One violated constraint. `anchor` names the modelling condition behind the rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
    pub anchor: &'static str,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} [{}]", self.path, self.message, self.anchor)
    }
}

pub mod anchors {
    pub const TOPOLOGY: &str = "communication graph: binary weights, strongly connected";
    pub const REFERENCE: &str = "finite-time reference protocol: k > 0, 0 < alpha < 1";
    pub const ADAPTIVE_GAIN: &str = "adaptive gain law: gamma > 0, epsilon > 0, 0 < varsigma < 1, L(0) >= 1";
    pub const BACKSTEPPING: &str = "backstepping step gains: c1 > 0, c2 > 0";
    pub const NUSSBAUM: &str = "N-function family: a > 0, b >= 0, 1/2 < c <= 1, omega > 0";
    pub const DYNAMICS: &str = "agent dynamics: regressors, parameters and bounding functions";
    pub const SIGNALS: &str = "signal assumptions: nonvanishing coefficients, bounded attack weights and rates";
    pub const INTEGRATION: &str = "integration settings: dt > 0, horizon >= 0, record_every >= 1";
    pub const SCHEMA: &str = "scenario schema";
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scenario failed validation:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<ValidationError>),
}

impl<T: Scalar> Scenario<T> {
    pub fn agent_count(&self) -> usize {
        self.topology.agents
    }

    pub fn digraph(&self) -> Digraph {
        self.topology.digraph().expect("validated topology")
    }

    /// Largest target band `ε̄ = max_i ε_i`.
    pub fn epsilon_max(&self) -> T {
        self.agents.iter().fold(T::zero(), |m, a| m.max(a.controller.epsilon))
    }

    /// Radius `2ρε̄` of the terminal set for pairwise output disagreements.
    pub fn omega_bound(&self) -> T {
        T::lit(2.0) * self.attacks.intensity() * self.epsilon_max()
    }

    /// Initial global state, laid out as `[x1, x2, s, L, F1, F2]` per agent.
    pub fn initial_state(&self) -> Vec<T> {
        self.agents
            .iter()
            .flat_map(|a| {
                let i = a.initial;
                [i.x1, i.x2, i.s, i.l, i.f1, i.f2]
            })
            .collect()
    }

    /// Checks every constraint and collects all violations.
    pub fn validate(&self) -> Result<(), Vec<ValidationError>> {
        let mut errs = Vec::new();
        let mut push =
            |path: String, message: String, anchor: &'static str| errs.push(ValidationError { path, message, anchor });

        if self.version != SCENARIO_VERSION {
            push(
                "version".into(),
                format!("unsupported version {}, expected {SCENARIO_VERSION}", self.version),
                anchors::SCHEMA,
            );
        }
        let n = self.topology.agents;
        match self.topology.digraph() {
            Ok(g) if !g.is_strongly_connected() => {
                push("topology".into(), "graph is not strongly connected".into(), anchors::TOPOLOGY)
            }
            Ok(_) => {}
            Err(e) => push("topology".into(), e.to_string(), anchors::TOPOLOGY),
        }
        if self.agents.len() != n {
            push("agents".into(), format!("expected {n} agent entries, found {}", self.agents.len()), anchors::SCHEMA);
        }
        if self.attacks.rho_s.len() != n || self.attacks.rho_a.len() != n {
            push("attacks".into(), format!("rho_s and rho_a need {n} entries each"), anchors::SIGNALS);
        }
        if self.reference.k.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater)
            || !self.reference.k.is_finite()
        {
            push("reference.k".into(), "must be positive".into(), anchors::REFERENCE);
        }
        if !(self.reference.alpha > T::zero() && self.reference.alpha < T::one()) {
            push("reference.alpha".into(), "must lie in (0, 1)".into(), anchors::REFERENCE);
        }
        let adaptive = self.flags.adaptive_gain_enabled;
        for (i, a) in self.agents.iter().enumerate() {
            let p = &a.controller;
            let at = |field: &str| format!("agents[{i}].{field}");
            let pos = |v: T| v.is_finite() && v > T::zero();
            if !pos(p.c1) {
                push(at("controller.c1"), "must be positive".into(), anchors::BACKSTEPPING);
            }
            if !pos(p.c2) {
                push(at("controller.c2"), "must be positive".into(), anchors::BACKSTEPPING);
            }
            if adaptive && !pos(p.gamma) {
                push(
                    at("controller.gamma"),
                    "must be positive while the adaptive gain is enabled".into(),
                    anchors::ADAPTIVE_GAIN,
                );
            } else if !(p.gamma >= T::zero()) {
                push(at("controller.gamma"), "must be non-negative".into(), anchors::ADAPTIVE_GAIN);
            }
            if !pos(p.epsilon) {
                push(at("controller.epsilon"), "must be positive".into(), anchors::ADAPTIVE_GAIN);
            }
            if !(p.varsigma > T::zero() && p.varsigma < T::one()) {
                push(at("controller.varsigma"), "must lie in (0, 1)".into(), anchors::ADAPTIVE_GAIN);
            }
            if let Err(e) = p.nussbaum.validate() {
                push(at("controller.nussbaum"), e.to_string(), anchors::NUSSBAUM);
            }
            if !(a.initial.l >= T::one()) {
                push(at("initial.l"), "initial adaptive gain must be at least 1".into(), anchors::ADAPTIVE_GAIN);
            }
            let init = a.initial;
            if ![init.x1, init.x2, init.s, init.l, init.f1, init.f2].iter().all(|v| v.is_finite()) {
                push(at("initial"), "initial values must be finite".into(), anchors::SCHEMA);
            }
            for (field, reason) in a.model.structural_issues() {
                push(at(&format!("model.{field}")), reason.into(), anchors::DYNAMICS);
            }
        }
        let integ = &self.integration;
        if !(integ.dt.is_finite() && integ.dt > T::zero()) {
            push("integration.dt".into(), "must be positive".into(), anchors::INTEGRATION);
        }
        if !(integ.horizon.is_finite() && integ.horizon >= T::zero()) {
            push("integration.horizon".into(), "must be finite and non-negative".into(), anchors::INTEGRATION);
        }
        if integ.record_every == 0 {
            push("integration.record_every".into(), "must be at least 1".into(), anchors::INTEGRATION);
        }
        if !(integ.blow_up_threshold > T::zero()) {
            push("integration.blow_up_threshold".into(), "must be positive".into(), anchors::INTEGRATION);
        }

        if errs.is_empty() {
            let models: Vec<_> = self.agents.iter().map(|a| a.model.clone()).collect();
            let horizon = integ.horizon.max(T::lit(ASSUMPTION_GRID_STEP));
            if let Err(v) = validate_assumptions(&models, &self.attacks, horizon, T::lit(ASSUMPTION_GRID_STEP)) {
                errs.push(ValidationError {
                    path: format!("signals.{}", v.signal),
                    message: format!("{} (t = {})", v.detail, v.t),
                    anchor: anchors::SIGNALS,
                });
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Canonical JSON serialization.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(self).expect("scenario serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses and fully validates a scenario document.
pub fn parse_and_validate<T: Scalar>(text: &str) -> Result<Scenario<T>, ScenarioError> {
    let scenario: Scenario<T> = serde_json::from_str(text)?;
    scenario.validate().map_err(ScenarioError::Validation)?;
    Ok(scenario)
}

/// Name of the built-in benchmark.
pub const BENCHMARK_NAME: &str = "four-agent-benchmark";

/// Looks up a built-in scenario by name.
pub fn builtin<T: Scalar>(name: &str) -> Option<Scenario<T>> {
    (name == BENCHMARK_NAME).then(four_agent_benchmark)
}

/// Four heterogeneous second-order agents under sensor and actuator deception attacks.
///
/// The communication graph is the directed ring 1→2→3→4→1 with agents 1 and 3 additionally
/// exchanging in both directions. Controller gains are `c1 = c2 = 0.2`, `γ = 1.5`, `ε = 0.1`,
/// `ς = 0.9`; the reference protocol uses `k = 2`, `α = 0.8`.
pub fn four_agent_benchmark<T: Scalar>() -> Scenario<T> {
    let l = |x: f64| T::lit(x);
    let c = |x: f64| ScalarSignal::constant(l(x));
    let sin = |o: f64, a: f64, w: f64| ScalarSignal::sin(l(o), l(a), l(w));
    let cos = |o: f64, a: f64, w: f64| ScalarSignal::cos(l(o), l(a), l(w));
    let lin = |var| Regressor::Linear { var };
    use StateVar::{X1, X2};

    struct Dyn<T> {
        psi1: Regressor,
        theta1: f64,
        psi2: Regressor,
        theta2: f64,
        g1: ScalarSignal<T>,
        g2: ScalarSignal<T>,
        o1: ScalarSignal<T>,
        o2: ScalarSignal<T>,
    }
    let dynamics = [
        Dyn {
            psi1: lin(X1),
            theta1: 2.0,
            psi2: Regressor::Product,
            theta2: -2.0,
            g1: c(1.0),
            g2: c(1.0),
            o1: sin(0.0, 0.4, 1.0),
            o2: sin(0.0, 0.4, 1.0),
        },
        Dyn {
            psi1: Regressor::XSinX { var: X1 },
            theta1: -1.0,
            psi2: lin(X2),
            theta2: 1.0,
            g1: cos(-1.0, -0.2, 1.0),
            g2: cos(2.0, -0.5, 1.0),
            o1: cos(0.0, 0.4, 1.0),
            o2: cos(0.0, 0.4, 1.0),
        },
        Dyn {
            psi1: Regressor::XCosX { var: X1 },
            theta1: 0.5,
            psi2: Regressor::XTanhX { var: X2 },
            theta2: -0.5,
            g1: c(1.0),
            g2: c(-1.0),
            o1: sin(0.0, -0.4, 1.0),
            o2: sin(0.0, -0.4, 1.0),
        },
        Dyn {
            psi1: lin(X1),
            theta1: -0.2,
            psi2: Regressor::Product,
            theta2: -0.2,
            g1: cos(2.0, -1.2, 1.0),
            g2: cos(2.0, -1.2, 1.0),
            o1: cos(0.0, -0.4, 1.0),
            o2: cos(0.0, -0.4, 1.0),
        },
    ];
    let x0 = [(2.0, -1.0), (0.5, -0.5), (-1.0, 1.0), (0.8, -1.0)];
    let s0 = [1.5, 1.0, -1.5, 1.0];
    let controller = ControllerParams {
        c1: l(0.2),
        c2: l(0.2),
        gamma: l(1.5),
        epsilon: l(0.1),
        varsigma: l(0.9),
        nussbaum: NussbaumFamily::slow_growth(),
    };
    let agents = dynamics
        .into_iter()
        .zip(x0.iter().zip(s0))
        .map(|(d, (&(x1, x2), s))| AgentConfig {
            model: AgentModel {
                psi1: vec![d.psi1],
                theta1: vec![l(d.theta1)],
                psi2: vec![d.psi2],
                theta2: vec![l(d.theta2)],
                g1: d.g1,
                g2: d.g2,
                o1: d.o1,
                o2: d.o2,
                phi1: BoundingFunction::default(),
                phi2: BoundingFunction::default(),
            },
            controller,
            initial: InitialState { x1: l(x1), x2: l(x2), s: l(s), l: T::one(), f1: T::zero(), f2: T::zero() },
        })
        .collect();
    let attacks = AttackProfile {
        rho_o: sin(-1.0, -0.2, 1.0),
        rho_s: vec![sin(1.0, 0.5, 2.0), sin(-1.0, -0.3, 2.0), cos(2.0, -1.2, 2.0), cos(2.0, -1.5, 2.0)],
        rho_a: vec![cos(1.0, 0.4, 4.0), sin(1.0, -0.3, 2.0), cos(-2.0, 1.4, 2.0), cos(2.0, -1.4, 4.0)],
        declared: DeclaredBounds {
            output_lower: l(0.8),
            output_upper: l(1.2),
            state_lower: l(0.5),
            state_upper: l(3.5),
            actuator_lower: l(0.6),
            actuator_upper: l(3.4),
            rate: l(3.0),
        },
    };
    Scenario {
        version: SCENARIO_VERSION,
        name: BENCHMARK_NAME.into(),
        topology: Topology { agents: 4, edges: vec![[1, 2], [2, 3], [3, 4], [4, 1], [1, 3], [3, 1]] },
        agents,
        attacks,
        reference: ReferenceParams { k: l(2.0), alpha: l(0.8) },
        integration: Integration { dt: l(1e-3), horizon: l(50.0), record_every: 10, blow_up_threshold: l(1e8) },
        flags: Flags::default(),
    }
}
