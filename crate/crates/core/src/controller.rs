//! Per-agent two-step adaptive backstepping law with Nussbaum-modulated virtual and actual
//! controls.
//!
//! Inputs are restricted to what an agent can legitimately see: its corrupted output `y̌`,
//! corrupted second state `x̌₂`, its own reference state `s`, its adaptive states and its
//! parameters. Nothing in this module can read true plant states, coefficients or attack
//! weights.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nussbaum::{NussbaumError, NussbaumFamily};
use crate::plant::{BoundingFunction, Measurement};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerParamError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("varsigma must lie in (0, 1)")]
    Varsigma,
    #[error(transparent)]
    Nussbaum(#[from] NussbaumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams<T> {
    pub c1: T,
    pub c2: T,
    /// Adaptive-gain rate.
    pub gamma: T,
    /// Target band for the inner tracking error.
    pub epsilon: T,
    /// Dead-zone factor of the adaptive-gain law.
    pub varsigma: T,
    pub nussbaum: NussbaumFamily<T>,
}

impl<T: Scalar> ControllerParams<T> {
    /// Checks ranges. `gamma = 0` is accepted only when the adaptive gain is frozen.
    pub fn validate(&self, adaptive_gain: bool) -> Result<(), ControllerParamError> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.c1) {
            return Err(ControllerParamError::NotPositive("c1"));
        }
        if !positive(self.c2) {
            return Err(ControllerParamError::NotPositive("c2"));
        }
        if adaptive_gain && !positive(self.gamma) || !adaptive_gain && !(self.gamma >= T::zero()) {
            return Err(ControllerParamError::NotPositive("gamma"));
        }
        if !positive(self.epsilon) {
            return Err(ControllerParamError::NotPositive("epsilon"));
        }
        if !(self.varsigma > T::zero() && self.varsigma < T::one()) {
            return Err(ControllerParamError::Varsigma);
        }
        self.nussbaum.validate()?;
        Ok(())
    }
}

/// Coefficient on the `z₁² z₂` term of the second-step stabilizing function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossTerm {
    /// `L·z₁²·z₂/4`
    #[default]
    Linear,
    /// `L²·z₁²·z₂/4`, the coefficient that cancels the first step's `(L z₁ z₂)²/4` remainder.
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawOptions {
    pub cross_term: CrossTerm,
    /// When false, `L` stays at its initial value (the fixed-gain ablation).
    pub adaptive_gain: bool,
}

impl Default for LawOptions {
    fn default() -> Self {
        Self { cross_term: CrossTerm::Linear, adaptive_gain: true }
    }
}

/// Adaptive gain `L` and the two Nussbaum gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState<T> {
    pub l: T,
    pub f1: T,
    pub f2: T,
}

/// Partial derivatives of the virtual control `v₁(x̌₁, s, L, F₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V1Partials<T> {
    pub d_x1: T,
    pub d_s: T,
    pub d_l: T,
    pub d_f1: T,
}

/// Everything the law computes at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerSignals<T> {
    pub e: T,
    pub z1: T,
    pub z2: T,
    pub beta1: T,
    pub v1: T,
    pub u: T,
    pub l_rate: T,
    pub f1_rate: T,
    pub f2_rate: T,
    pub partials: V1Partials<T>,
    pub phi2: T,
}

/// `L̇ = γ·max(e² − ς ε², 0)`.
pub fn adaptive_gain_rate<T: Scalar>(e: T, p: &ControllerParams<T>) -> T {
    p.gamma * (e * e - p.varsigma * p.epsilon * p.epsilon).max(T::zero())
}

/// `φ₁² + 2 + x̌₁²`
fn first_step_weight<T: Scalar>(y_check: T, phi1: &BoundingFunction<T>) -> (T, T) {
    let phi = phi1.value(&[y_check]);
    let dphi = phi1.partial(&[y_check], 0);
    let two = T::lit(2.0);
    (phi * phi + two + y_check * y_check, two * phi * dphi + two * y_check)
}

/// First-step stabilizing function
/// `β₁ = c₁e + (L z₁/4)(φ₁² + 2 + x̌₁²) + γ(e² + ε²) z₁/L²` with `e = y̌ − s`, `z₁ = L e`.
pub fn beta1<T: Scalar>(
    y_check: T,
    s: T,
    st: &ControllerState<T>,
    p: &ControllerParams<T>,
    phi1: &BoundingFunction<T>,
) -> T {
    let e = y_check - s;
    let l = st.l;
    let z1 = l * e;
    let (q, _) = first_step_weight(y_check, phi1);
    p.c1 * e + l * z1 / T::lit(4.0) * q + p.gamma * (e * e + p.epsilon * p.epsilon) * z1 / (l * l)
}

/// `v₁ = N(F₁)·β₁` and `Ḟ₁ = L z₁ β₁`.
pub fn virtual_control<T: Scalar>(
    beta1: T,
    e: T,
    st: &ControllerState<T>,
    p: &ControllerParams<T>,
) -> Result<(T, T), NussbaumError> {
    let n = p.nussbaum.eval(st.f1)?;
    let z1 = st.l * e;
    Ok((n * beta1, st.l * z1 * beta1))
}

/// Hand-expanded chain rule for `v₁ = N(F₁)·β₁(x̌₁, s, L)`.
///
/// With `q = φ₁² + 2 + x̌₁²`, `β₁ = c₁e + L²e q/4 + γ(e²+ε²)e/L`, so
/// `∂β₁/∂e = c₁ + L²q/4 + γ(3e²+ε²)/L`, `∂β₁/∂x̌₁ = ∂β₁/∂e + L²e q′/4`,
/// `∂β₁/∂s = −∂β₁/∂e` and `∂β₁/∂L = L e q/2 − γ(e²+ε²)e/L²`.
pub fn v1_partials<T: Scalar>(
    y_check: T,
    s: T,
    st: &ControllerState<T>,
    p: &ControllerParams<T>,
    phi1: &BoundingFunction<T>,
) -> Result<V1Partials<T>, NussbaumError> {
    let (n, dn) = p.nussbaum.eval_with_derivative(st.f1)?;
    let e = y_check - s;
    let l = st.l;
    let four = T::lit(4.0);
    let (q, dq) = first_step_weight(y_check, phi1);
    let ee = e * e;
    let eps2 = p.epsilon * p.epsilon;
    let d_e = p.c1 + l * l * q / four + p.gamma * (T::lit(3.0) * ee + eps2) / l;
    let d_x1 = d_e + l * l * e * dq / four;
    let d_l = l * e * q / T::lit(2.0) - p.gamma * (ee + eps2) * e / (l * l);
    let b1 = beta1(y_check, s, st, p, phi1);
    Ok(V1Partials { d_x1: n * d_x1, d_s: -n * d_e, d_l: n * d_l, d_f1: dn * b1 })
}

/// `Φ₂ = (φ₂²+1+x̌₂²)/4 + (∂v₁/∂s)² + (∂v₁/∂F₁·Ḟ₁)² + (∂v₁/∂x̌₁)²(φ₁²+1+x̌₁²)/4 + (∂v₁/∂L·L̇)²`.
#[allow(clippy::too_many_arguments)]
pub fn phi2_aggregate<T: Scalar>(
    m: &Measurement<T>,
    partials: &V1Partials<T>,
    f1_rate: T,
    l_rate: T,
    phi1: &BoundingFunction<T>,
    phi2: &BoundingFunction<T>,
) -> T {
    let four = T::lit(4.0);
    let one = T::one();
    let p2 = phi2.value(&[m.y_check, m.x2_check]);
    let p1 = phi1.value(&[m.y_check]);
    let sq = |v: T| v * v;
    (sq(p2) + one + sq(m.x2_check)) / four
        + sq(partials.d_s)
        + sq(partials.d_f1 * f1_rate)
        + sq(partials.d_x1) * (sq(p1) + one + sq(m.y_check)) / four
        + sq(partials.d_l * l_rate)
}

/// `β₂ = c₂z₂ + z₂Φ₂ + L^{1|2}z₁²z₂/4`, `u = N(F₂)·β₂`, `Ḟ₂ = z₂β₂`.
pub fn control_input<T: Scalar>(
    z1: T,
    z2: T,
    st: &ControllerState<T>,
    phi2: T,
    p: &ControllerParams<T>,
    cross: CrossTerm,
) -> Result<(T, T), NussbaumError> {
    let gain = match cross {
        CrossTerm::Linear => st.l,
        CrossTerm::Squared => st.l * st.l,
    };
    let beta2 = p.c2 * z2 + z2 * phi2 + gain * z1 * z1 * z2 / T::lit(4.0);
    let n = p.nussbaum.eval(st.f2)?;
    Ok((n * beta2, z2 * beta2))
}

/// Evaluates the complete law at one instant.
pub fn evaluate<T: Scalar>(
    m: &Measurement<T>,
    s: T,
    st: &ControllerState<T>,
    p: &ControllerParams<T>,
    options: LawOptions,
    phi1: &BoundingFunction<T>,
    phi2: &BoundingFunction<T>,
) -> Result<ControllerSignals<T>, NussbaumError> {
    let e = m.y_check - s;
    let z1 = st.l * e;
    let l_rate = if options.adaptive_gain { adaptive_gain_rate(e, p) } else { T::zero() };
    let b1 = beta1(m.y_check, s, st, p, phi1);
    let (v1, f1_rate) = virtual_control(b1, e, st, p)?;
    let partials = v1_partials(m.y_check, s, st, p, phi1)?;
    let phi2 = phi2_aggregate(m, &partials, f1_rate, l_rate, phi1, phi2);
    let z2 = m.x2_check - v1;
    let (u, f2_rate) = control_input(z1, z2, st, phi2, p, options.cross_term)?;
    Ok(ControllerSignals { e, z1, z2, beta1: b1, v1, u, l_rate, f1_rate, f2_rate, partials, phi2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nussbaum::TrigVariant;

    fn params() -> ControllerParams<f64> {
        ControllerParams {
            c1: 0.2,
            c2: 0.2,
            gamma: 1.5,
            epsilon: 0.1,
            varsigma: 0.9,
            nussbaum: NussbaumFamily::new(0.9, 0.0, 0.7, 0.4, TrigVariant::Cosine).unwrap(),
        }
    }

    fn state(l: f64, f1: f64, f2: f64) -> ControllerState<f64> {
        ControllerState { l, f1, f2 }
    }

    #[test]
    fn gain_rate_dead_zone() {
        let p = params();
        assert_eq!(adaptive_gain_rate(0.05, &p), 0.0);
        assert!((adaptive_gain_rate(0.2, &p) - 0.0465).abs() < 1e-15);
        let boundary = (0.9f64).sqrt() * 0.1;
        assert!(adaptive_gain_rate(boundary, &p).abs() < 1e-18);
    }

    #[test]
    fn beta1_hand_value() {
        let v = beta1(1.0, 0.0, &state(1.0, 0.0, 0.0), &params(), &BoundingFunction::default());
        assert!((v - 2.965).abs() < 1e-12);
        assert_eq!(beta1(0.4, 0.4, &state(2.0, 0.0, 0.0), &params(), &BoundingFunction::default()), 0.0);
    }

    #[test]
    fn beta1_sign_follows_error() {
        let phi = BoundingFunction::default();
        for (y, s) in [(1.0, 0.5), (-0.3, 0.2), (2.0, -2.0)] {
            let b = beta1(y, s, &state(1.7, 0.0, 0.0), &params(), &phi);
            assert_eq!(b.signum(), (y - s).signum());
        }
    }

    #[test]
    fn virtual_control_structure() {
        let p = params();
        assert_eq!(virtual_control(0.0, 0.0, &state(1.0, 0.3, 0.0), &p).unwrap(), (0.0, 0.0));
        let (v1, _) = virtual_control(2.5, 0.1, &state(1.0, 0.0, 0.0), &p).unwrap();
        assert_eq!(v1, 2.5);
    }

    #[test]
    fn partials_at_zero_error() {
        let p = params();
        let phi = BoundingFunction::default();
        let st = state(1.3, 0.7, 0.0);
        let x = 0.8;
        let d = v1_partials(x, x, &st, &p, &phi).unwrap();
        let n = p.nussbaum.eval(0.7).unwrap();
        let q = phi.value(&[x]).powi(2) + 2.0 + x * x;
        let expected = n * (p.c1 + 1.3 * 1.3 / 4.0 * q + p.gamma * p.epsilon.powi(2) / 1.3);
        assert!((d.d_x1 - expected).abs() < 1e-12);
        assert!((d.d_s + expected).abs() < 1e-12);
        assert_eq!(d.d_f1, 0.0);
    }

    #[test]
    fn phi2_floor_and_scaling() {
        let p = params();
        let phi = BoundingFunction::default();
        let st = state(1.0, 0.5, 0.0);
        let m = Measurement { y_check: 0.3, x2_check: -0.7 };
        let d = v1_partials(0.3, 0.1, &st, &p, &phi).unwrap();
        let base = phi2_aggregate(&m, &d, 0.0, 0.0, &phi, &phi);
        let floor = (phi.value(&[0.3, -0.7]).powi(2) + 1.0 + 0.49) / 4.0;
        assert!(base >= floor);
        let one = phi2_aggregate(&m, &d, 1.0, 0.0, &phi, &phi) - base;
        let two = phi2_aggregate(&m, &d, 2.0, 0.0, &phi, &phi) - base;
        assert!((two - 4.0 * one).abs() < 1e-9 * two.abs().max(1.0));
    }

    #[test]
    fn phi2_at_rest_with_cosine_family() {
        let p = params();
        let phi = BoundingFunction::default();
        let st = state(1.0, 0.0, 0.0);
        let m = Measurement { y_check: 0.0, x2_check: 0.0 };
        let d = v1_partials(0.0, 0.0, &st, &p, &phi).unwrap();
        let dx = p.c1 + 3.0 / 4.0 + p.gamma * 0.01;
        let expected = (1.0 + 1.0) / 4.0 + dx * dx + dx * dx * (1.0 + 1.0) / 4.0;
        assert!((phi2_aggregate(&m, &d, 0.0, 0.0, &phi, &phi) - expected).abs() < 1e-12);
    }

    #[test]
    fn control_input_values() {
        let p = params();
        let st = state(1.0, 0.0, 0.0);
        assert_eq!(control_input(1.0, 0.0, &st, 3.0, &p, CrossTerm::Linear).unwrap(), (0.0, 0.0));
        let (u, f2) = control_input(1.0, 1.0, &st, 3.0, &p, CrossTerm::Linear).unwrap();
        assert!((f2 - 3.45).abs() < 1e-12);
        assert!((u - 3.45).abs() < 1e-12);
        let st2 = state(2.0, 0.0, 0.0);
        let (_, lin) = control_input(1.0, 1.0, &st2, 3.0, &p, CrossTerm::Linear).unwrap();
        let (_, sq) = control_input(1.0, 1.0, &st2, 3.0, &p, CrossTerm::Squared).unwrap();
        assert!((sq - lin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn frozen_gain_option() {
        let p = params();
        let phi = BoundingFunction::default();
        let m = Measurement { y_check: 1.0, x2_check: 0.0 };
        let opts = LawOptions { adaptive_gain: false, ..LawOptions::default() };
        let sig = evaluate(&m, 0.0, &state(1.0, 0.0, 0.0), &p, opts, &phi, &phi).unwrap();
        assert_eq!(sig.l_rate, 0.0);
        let sig = evaluate(&m, 0.0, &state(1.0, 0.0, 0.0), &p, LawOptions::default(), &phi, &phi).unwrap();
        assert!(sig.l_rate > 0.0);
    }

    #[test]
    fn params_validation() {
        let mut p = params();
        assert!(p.validate(true).is_ok());
        p.gamma = 0.0;
        assert!(p.validate(true).is_err());
        assert!(p.validate(false).is_ok());
        p.varsigma = 1.0;
        assert_eq!(p.validate(false), Err(ControllerParamError::Varsigma));
        let mut p = params();
        p.c2 = -1.0;
        assert_eq!(p.validate(true), Err(ControllerParamError::NotPositive("c2")));
    }
}
