//! Resilient output consensus of heterogeneous second-order agents under deception attacks.
//!
//! Agents track finite-time reference generators through an adaptive backstepping law with
//! Nussbaum gains that cope with unknown, time-varying control directions introduced by
//! multiplicative sensor and actuator attacks. The core is generic over [`Scalar`] and ships
//! `f64` aliases for the common case.

// `!(x > 0)` is how range checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod nussbaum;
pub mod ode;
pub mod plant;
pub mod plot;
pub mod quadrature;
pub mod reference;
pub mod scalar;
pub mod scenario;
pub mod simulator;
pub mod sweep;

pub use scalar::Scalar;

pub type ScenarioF64 = scenario::Scenario<f64>;
pub type NussbaumFamilyF64 = nussbaum::NussbaumFamily<f64>;
pub type SimTraceF64 = simulator::SimTrace<f64>;
pub type SpectralDataF64 = graph::SpectralData<f64>;
pub type ControllerParamsF64 = controller::ControllerParams<f64>;
pub type AgentModelF64 = plant::AgentModel<f64>;
pub type AttackProfileF64 = plant::AttackProfile<f64>;
pub type MatrixF64 = linalg::Matrix<f64>;
