//! Second-order agent dynamics, multiplicative deception attacks on the sensor and actuator
//! channels, and sampled checks of the signal assumptions (nonzero coefficients, bounded
//! attack weights with bounded rates).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Time law `offset + amplitude·{sin|cos}(frequency·t + phase)` or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound(deserialize = "T: Scalar"))]
pub enum ScalarSignal<T> {
    Constant {
        value: T,
    },
    Sinusoid {
        offset: T,
        amplitude: T,
        /// rad/s
        frequency: T,
        #[serde(default = "zero")]
        phase: T,
        uses_cos: bool,
    },
}

fn zero<T: Scalar>() -> T {
    T::zero()
}

impl<T: Scalar> ScalarSignal<T> {
    pub fn constant(value: T) -> Self {
        Self::Constant { value }
    }

    pub fn sin(offset: T, amplitude: T, frequency: T) -> Self {
        Self::Sinusoid { offset, amplitude, frequency, phase: T::zero(), uses_cos: false }
    }

    pub fn cos(offset: T, amplitude: T, frequency: T) -> Self {
        Self::Sinusoid { offset, amplitude, frequency, phase: T::zero(), uses_cos: true }
    }

    pub fn value(&self, t: T) -> T {
        match *self {
            Self::Constant { value } => value,
            Self::Sinusoid { offset, amplitude, frequency, phase, uses_cos } => {
                let arg = frequency * t + phase;
                offset + amplitude * if uses_cos { arg.cos() } else { arg.sin() }
            }
        }
    }

    pub fn derivative(&self, t: T) -> T {
        match *self {
            Self::Constant { .. } => T::zero(),
            Self::Sinusoid { amplitude, frequency, phase, uses_cos, .. } => {
                let arg = frequency * t + phase;
                amplitude * frequency * if uses_cos { -arg.sin() } else { arg.cos() }
            }
        }
    }

    /// Exact `(min, max)` of `|value|` over all `t`.
    pub fn magnitude_range(&self) -> (T, T) {
        match *self {
            Self::Constant { value } => (value.abs(), value.abs()),
            Self::Sinusoid { offset, amplitude, .. } => {
                let (lo, hi) = (offset - amplitude.abs(), offset + amplitude.abs());
                let min = if lo <= T::zero() && hi >= T::zero() { T::zero() } else { lo.abs().min(hi.abs()) };
                (min, lo.abs().max(hi.abs()))
            }
        }
    }

    /// Exact `max |d/dt value|`.
    pub fn max_rate(&self) -> T {
        match *self {
            Self::Constant { .. } => T::zero(),
            Self::Sinusoid { amplitude, frequency, .. } => (amplitude * frequency).abs(),
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Self::Constant { value } => value.is_finite(),
            Self::Sinusoid { offset, amplitude, frequency, phase, .. } => {
                offset.is_finite() && amplitude.is_finite() && frequency.is_finite() && phase.is_finite()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateVar {
    X1,
    X2,
}

/// One regressor entry `ψ_k(x₁, x₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regressor {
    Linear {
        var: StateVar,
    },
    XSinX {
        var: StateVar,
    },
    XCosX {
        var: StateVar,
    },
    XTanhX {
        var: StateVar,
    },
    /// `x₁·x₂`
    Product,
}

impl Regressor {
    fn pick<T: Scalar>(var: StateVar, x1: T, x2: T) -> T {
        match var {
            StateVar::X1 => x1,
            StateVar::X2 => x2,
        }
    }

    pub fn value<T: Scalar>(&self, x1: T, x2: T) -> T {
        match *self {
            Self::Linear { var } => Self::pick(var, x1, x2),
            Self::XSinX { var } => {
                let x = Self::pick(var, x1, x2);
                x * x.sin()
            }
            Self::XCosX { var } => {
                let x = Self::pick(var, x1, x2);
                x * x.cos()
            }
            Self::XTanhX { var } => {
                let x = Self::pick(var, x1, x2);
                x * x.tanh()
            }
            Self::Product => x1 * x2,
        }
    }

    /// `(∂ψ/∂x₁, ∂ψ/∂x₂)`.
    pub fn gradient<T: Scalar>(&self, x1: T, x2: T) -> (T, T) {
        let on = |var: StateVar, d: T| match var {
            StateVar::X1 => (d, T::zero()),
            StateVar::X2 => (T::zero(), d),
        };
        match *self {
            Self::Linear { var } => on(var, T::one()),
            Self::XSinX { var } => {
                let x = Self::pick(var, x1, x2);
                on(var, x.sin() + x * x.cos())
            }
            Self::XCosX { var } => {
                let x = Self::pick(var, x1, x2);
                on(var, x.cos() - x * x.sin())
            }
            Self::XTanhX { var } => {
                let x = Self::pick(var, x1, x2);
                let th = x.tanh();
                on(var, th + x * (T::one() - th * th))
            }
            Self::Product => (x2, x1),
        }
    }

    /// True when the entry reads only `x₁`.
    pub fn depends_only_on_x1(&self) -> bool {
        match *self {
            Self::Linear { var } | Self::XSinX { var } | Self::XCosX { var } | Self::XTanhX { var } => {
                var == StateVar::X1
            }
            Self::Product => false,
        }
    }
}

/// Known smooth bound on the regressor norm, expressed in corrupted measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundingFunction<T> {
    /// `(1 + weight·Σ x_k²)^{1/2}`
    SmoothNorm {
        weight: T,
    },
    Constant {
        value: T,
    },
}

impl<T: Scalar> Default for BoundingFunction<T> {
    fn default() -> Self {
        Self::SmoothNorm { weight: T::one() }
    }
}

impl<T: Scalar> BoundingFunction<T> {
    pub fn value(&self, args: &[T]) -> T {
        match *self {
            Self::SmoothNorm { weight } => (T::one() + weight * args.iter().map(|&a| a * a).sum::<T>()).sqrt(),
            Self::Constant { value } => value,
        }
    }

    /// `∂φ/∂args[k]`.
    pub fn partial(&self, args: &[T], k: usize) -> T {
        match *self {
            Self::SmoothNorm { weight } => weight * args[k] / self.value(args),
            Self::Constant { .. } => T::zero(),
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Self::SmoothNorm { weight } => weight.is_finite() && weight >= T::zero(),
            Self::Constant { value } => value.is_finite(),
        }
    }
}

/// True dynamics of one agent plus the bounding functions its controller may use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct AgentModel<T> {
    pub psi1: Vec<Regressor>,
    pub theta1: Vec<T>,
    pub psi2: Vec<Regressor>,
    pub theta2: Vec<T>,
    pub g1: ScalarSignal<T>,
    pub g2: ScalarSignal<T>,
    pub o1: ScalarSignal<T>,
    pub o2: ScalarSignal<T>,
    #[serde(default)]
    pub phi1: BoundingFunction<T>,
    #[serde(default)]
    pub phi2: BoundingFunction<T>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("non-finite plant rate at t = {t}")]
    NonFiniteState { t: f64 },
}

fn dot<T: Scalar>(psi: &[Regressor], theta: &[T], x1: T, x2: T) -> T {
    psi.iter().zip(theta).map(|(r, &th)| r.value(x1, x2) * th).sum()
}

impl<T: Scalar> AgentModel<T> {
    /// `(ẋ₁, ẋ₂)` from the true state and the actuator-received input.
    pub fn plant_rate(&self, x1: T, x2: T, u_applied: T, t: T) -> Result<(T, T), PlantError> {
        let dx1 = dot(&self.psi1, &self.theta1, x1, x2) + self.g1.value(t) * x2 + self.o1.value(t);
        let dx2 = dot(&self.psi2, &self.theta2, x1, x2) + self.g2.value(t) * u_applied + self.o2.value(t);
        if dx1.is_finite() && dx2.is_finite() {
            Ok((dx1, dx2))
        } else {
            Err(PlantError::NonFiniteState { t: t.as_f64() })
        }
    }

    /// Structural problems, as `(field, reason)` pairs.
    pub fn structural_issues(&self) -> Vec<(&'static str, &'static str)> {
        let mut issues = Vec::new();
        if self.psi1.len() != self.theta1.len() {
            issues.push(("theta1", "length must match psi1"));
        }
        if self.psi2.len() != self.theta2.len() {
            issues.push(("theta2", "length must match psi2"));
        }
        if self.psi1.iter().any(|r| !r.depends_only_on_x1()) {
            issues.push(("psi1", "first-channel regressors may only read x1"));
        }
        if self.theta1.iter().chain(&self.theta2).any(|v| !v.is_finite()) {
            issues.push(("theta", "parameters must be finite"));
        }
        if ![self.g1, self.g2, self.o1, self.o2].iter().all(ScalarSignal::is_finite) {
            issues.push(("signals", "signal parameters must be finite"));
        }
        if !self.phi1.is_valid() || !self.phi2.is_valid() {
            issues.push(("phi", "bounding function parameters must be finite and non-negative"));
        }
        issues
    }
}

/// Declared magnitude bounds of the attack weights and their common rate bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeclaredBounds<T> {
    pub output_lower: T,
    pub output_upper: T,
    pub state_lower: T,
    pub state_upper: T,
    pub actuator_lower: T,
    pub actuator_upper: T,
    pub rate: T,
}

/// Multiplicative attack weights on the output, second state and input channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct AttackProfile<T> {
    /// Shared output-sensor weight `ϱ_o(t)`.
    pub rho_o: ScalarSignal<T>,
    /// Per-agent state-sensor weights `ϱ_si(t)`.
    pub rho_s: Vec<ScalarSignal<T>>,
    /// Per-agent actuator weights `ϱ_ai(t)`.
    pub rho_a: Vec<ScalarSignal<T>>,
    pub declared: DeclaredBounds<T>,
}

/// What the local controller is allowed to see.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement<T> {
    pub y_check: T,
    pub x2_check: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corrupted<T> {
    pub y_check: T,
    pub x2_check: T,
    pub u_applied: T,
}

impl<T: Scalar> AttackProfile<T> {
    /// No attack on any channel for `n` agents.
    pub fn identity(n: usize) -> Self {
        let one = ScalarSignal::constant(T::one());
        Self {
            rho_o: one,
            rho_s: vec![one; n],
            rho_a: vec![one; n],
            declared: DeclaredBounds {
                output_lower: T::one(),
                output_upper: T::one(),
                state_lower: T::one(),
                state_upper: T::one(),
                actuator_lower: T::one(),
                actuator_upper: T::one(),
                rate: T::zero(),
            },
        }
    }

    /// Sensor side: `y̌ = ϱ_o y`, `x̌₂ = ϱ_si x₂`.
    pub fn sense(&self, agent: usize, y: T, x2: T, t: T) -> Measurement<T> {
        Measurement { y_check: self.rho_o.value(t) * y, x2_check: self.rho_s[agent].value(t) * x2 }
    }

    /// Actuator side: `ũ = ϱ_ai u`.
    pub fn actuate(&self, agent: usize, u: T, t: T) -> T {
        self.rho_a[agent].value(t) * u
    }

    pub fn corrupt(&self, agent: usize, y: T, x2: T, u: T, t: T) -> Corrupted<T> {
        let m = self.sense(agent, y, x2, t);
        Corrupted { y_check: m.y_check, x2_check: m.x2_check, u_applied: self.actuate(agent, u, t) }
    }

    /// `ρ = 1/ϱ̲_o`, the sensor attack intensity.
    pub fn intensity(&self) -> T {
        T::one() / self.declared.output_lower
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("assumption violated by {signal} at t = {t}: {detail}")]
pub struct AssumptionViolation {
    pub signal: String,
    pub t: f64,
    pub detail: String,
}

/// Worst-case margins observed on the sampling grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub samples: usize,
    pub min_abs_g: f64,
    pub max_abs_g: f64,
    pub max_abs_o: f64,
    pub min_abs_rho_o: f64,
    pub max_abs_rho_o: f64,
    pub min_abs_rho_s: f64,
    pub max_abs_rho_s: f64,
    pub min_abs_rho_a: f64,
    pub max_abs_rho_a: f64,
    pub max_rate_rho_o: f64,
    pub max_rate_rho_s: f64,
}

/// Samples every coefficient, disturbance and attack weight on `[0, horizon]` and checks that
/// coefficients never vanish or change sign, attack magnitudes stay inside the declared bounds,
/// and the sensor weights' rates stay below the declared rate bound.
pub fn validate_assumptions<T: Scalar>(
    agents: &[AgentModel<T>],
    attacks: &AttackProfile<T>,
    horizon: T,
    grid_step: T,
) -> Result<AssumptionReport, AssumptionViolation> {
    let d = &attacks.declared;
    let slack = T::lit(1e-9);
    let violation = |signal: String, t: T, detail: String| AssumptionViolation { signal, t: t.as_f64(), detail };

    let declared_ok = [
        (d.output_lower, d.output_upper, "output"),
        (d.state_lower, d.state_upper, "state"),
        (d.actuator_lower, d.actuator_upper, "actuator"),
    ];
    for (lo, hi, name) in declared_ok {
        if !(lo > T::zero() && lo <= hi) {
            return Err(violation(format!("declared {name} bounds"), T::zero(), "need 0 < lower <= upper".into()));
        }
    }
    if !(d.rate >= T::zero()) {
        return Err(violation("declared rate bound".into(), T::zero(), "must be non-negative".into()));
    }
    if attacks.rho_s.len() != agents.len() || attacks.rho_a.len() != agents.len() {
        return Err(violation("attack profile".into(), T::zero(), "one state and actuator weight per agent".into()));
    }

    let steps = (horizon / grid_step).ceil().to_usize().unwrap_or(0);
    let mut r = AssumptionReport {
        samples: steps + 1,
        min_abs_g: f64::INFINITY,
        max_abs_g: 0.0,
        max_abs_o: 0.0,
        min_abs_rho_o: f64::INFINITY,
        max_abs_rho_o: 0.0,
        min_abs_rho_s: f64::INFINITY,
        max_abs_rho_s: 0.0,
        min_abs_rho_a: f64::INFINITY,
        max_abs_rho_a: 0.0,
        max_rate_rho_o: 0.0,
        max_rate_rho_s: 0.0,
    };
    let mut g_sign: Vec<[T; 2]> =
        agents.iter().map(|m| [m.g1.value(T::zero()).sign0(), m.g2.value(T::zero()).sign0()]).collect();

    let check_weight = |name: String, w: &ScalarSignal<T>, t: T, lo: T, hi: T, rate: Option<T>| {
        let v = w.value(t).abs();
        if v < lo - slack || v > hi + slack {
            return Err(violation(name, t, format!("|weight| = {v} outside declared [{lo}, {hi}]")));
        }
        if let Some(bound) = rate {
            let dv = w.derivative(t).abs();
            if dv > bound + slack {
                return Err(violation(name, t, format!("|rate| = {dv} exceeds declared {bound}")));
            }
        }
        Ok((v.as_f64(), w.derivative(t).abs().as_f64()))
    };

    for k in 0..=steps {
        let t = (T::from_count(k) * grid_step).min(horizon);
        for (i, m) in agents.iter().enumerate() {
            for (j, g) in [m.g1, m.g2].iter().enumerate() {
                let v = g.value(t);
                if v == T::zero() || v.sign0() != g_sign[i][j] || g_sign[i][j] == T::zero() {
                    return Err(violation(
                        format!("g{}_{}", j + 1, i + 1),
                        t,
                        format!("coefficient {v} vanishes or changes sign"),
                    ));
                }
                g_sign[i][j] = v.sign0();
                r.min_abs_g = r.min_abs_g.min(v.abs().as_f64());
                r.max_abs_g = r.max_abs_g.max(v.abs().as_f64());
            }
            for o in [m.o1, m.o2] {
                r.max_abs_o = r.max_abs_o.max(o.value(t).abs().as_f64());
            }
            let (v, dv) = check_weight(
                format!("rho_s_{}", i + 1),
                &attacks.rho_s[i],
                t,
                d.state_lower,
                d.state_upper,
                Some(d.rate),
            )?;
            r.min_abs_rho_s = r.min_abs_rho_s.min(v);
            r.max_abs_rho_s = r.max_abs_rho_s.max(v);
            r.max_rate_rho_s = r.max_rate_rho_s.max(dv);
            let (v, _) = check_weight(
                format!("rho_a_{}", i + 1),
                &attacks.rho_a[i],
                t,
                d.actuator_lower,
                d.actuator_upper,
                None,
            )?;
            r.min_abs_rho_a = r.min_abs_rho_a.min(v);
            r.max_abs_rho_a = r.max_abs_rho_a.max(v);
        }
        let (v, dv) = check_weight("rho_o".into(), &attacks.rho_o, t, d.output_lower, d.output_upper, Some(d.rate))?;
        r.min_abs_rho_o = r.min_abs_rho_o.min(v);
        r.max_abs_rho_o = r.max_abs_rho_o.max(v);
        r.max_rate_rho_o = r.max_rate_rho_o.max(dv);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_agent() -> AgentModel<f64> {
        AgentModel {
            psi1: vec![Regressor::Linear { var: StateVar::X1 }],
            theta1: vec![0.0],
            psi2: vec![Regressor::Product],
            theta2: vec![0.0],
            g1: ScalarSignal::constant(1.0),
            g2: ScalarSignal::constant(1.0),
            o1: ScalarSignal::constant(0.0),
            o2: ScalarSignal::constant(0.0),
            phi1: BoundingFunction::default(),
            phi2: BoundingFunction::default(),
        }
    }

    #[test]
    fn zero_model_has_zero_rate() {
        assert_eq!(quiet_agent().plant_rate(0.0, 0.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn first_benchmark_agent_rate() {
        let m = AgentModel { theta1: vec![2.0], o1: ScalarSignal::sin(0.0, 0.4, 1.0), ..quiet_agent() };
        let (dx1, _) = m.plant_rate(2.0, -1.0, 0.0, 0.0).unwrap();
        assert_eq!(dx1, 3.0);
    }

    #[test]
    fn plant_is_affine_in_input_with_slope_g2() {
        let m = AgentModel { g2: ScalarSignal::cos(2.0, -0.5, 1.0), theta2: vec![0.7], ..quiet_agent() };
        let t = 0.9;
        let (_, a) = m.plant_rate(0.3, -0.4, 1.0, t).unwrap();
        let (_, b) = m.plant_rate(0.3, -0.4, 1.5, t).unwrap();
        assert!(((b - a) - 0.5 * m.g2.value(t)).abs() < 1e-14);
    }

    #[test]
    fn non_finite_rate_is_reported() {
        let m = quiet_agent();
        assert!(matches!(m.plant_rate(0.0, 0.0, f64::INFINITY, 0.0), Err(PlantError::NonFiniteState { .. })));
    }

    #[test]
    fn identity_attack_is_transparent() {
        let a = AttackProfile::<f64>::identity(2);
        let c = a.corrupt(1, 2.0, -3.0, 0.5, 4.0);
        assert_eq!((c.y_check, c.x2_check, c.u_applied), (2.0, -3.0, 0.5));
    }

    #[test]
    fn benchmark_attack_values_at_origin() {
        let mut a = AttackProfile::<f64>::identity(3);
        a.rho_o = ScalarSignal::sin(-1.0, -0.2, 1.0);
        a.rho_a[2] = ScalarSignal::cos(-2.0, 1.4, 2.0);
        let c = a.corrupt(2, 2.0, 1.0, 1.0, 0.0);
        assert_eq!(c.y_check, -2.0);
        assert!((c.u_applied + 0.6).abs() < 1e-15);
    }

    #[test]
    fn regressor_gradients_match_finite_differences() {
        let all = [
            Regressor::Linear { var: StateVar::X2 },
            Regressor::XSinX { var: StateVar::X1 },
            Regressor::XCosX { var: StateVar::X1 },
            Regressor::XTanhX { var: StateVar::X2 },
            Regressor::Product,
        ];
        let h = 1e-6;
        for r in all {
            for (x1, x2) in [(0.3f64, -1.2), (2.1, 0.7), (-1.5, 1.9)] {
                let (d1, d2) = r.gradient(x1, x2);
                let f1 = (r.value(x1 + h, x2) - r.value(x1 - h, x2)) / (2.0 * h);
                let f2 = (r.value(x1, x2 + h) - r.value(x1, x2 - h)) / (2.0 * h);
                assert!((d1 - f1).abs() < 1e-8 && (d2 - f2).abs() < 1e-8, "{r:?}");
            }
        }
    }

    #[test]
    fn bounding_function_gradient() {
        let phi = BoundingFunction::SmoothNorm { weight: 2.0 };
        let args = [0.5f64, -1.5];
        let h = 1e-6;
        for k in 0..2 {
            let mut p = args;
            let mut m = args;
            p[k] += h;
            m[k] -= h;
            let fd = (phi.value(&p) - phi.value(&m)) / (2.0 * h);
            assert!((phi.partial(&args, k) - fd).abs() < 1e-9);
        }
        assert_eq!(BoundingFunction::Constant { value: 3.0 }.partial(&args, 0), 0.0);
    }

    #[test]
    fn magnitude_ranges() {
        let s = ScalarSignal::sin(-1.0f64, -0.2, 1.0);
        let (lo, hi) = s.magnitude_range();
        assert!((lo - 0.8).abs() < 1e-15 && (hi - 1.2).abs() < 1e-15);
        assert_eq!(ScalarSignal::cos(0.0, 1.0, 1.0).magnitude_range().0, 0.0);
        assert!((s.max_rate() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn detects_sign_changing_coefficient() {
        let m = AgentModel { g2: ScalarSignal::cos(0.0, 1.0, 1.0), ..quiet_agent() };
        let err = validate_assumptions(&[m], &AttackProfile::identity(1), 10.0, 0.01).unwrap_err();
        assert_eq!(err.signal, "g2_1");
    }

    #[test]
    fn detects_optimistic_declared_bound() {
        let mut a = AttackProfile::<f64>::identity(1);
        a.rho_o = ScalarSignal::sin(-1.0, -0.2, 1.0);
        a.declared.output_lower = 0.9;
        a.declared.output_upper = 1.2;
        a.declared.rate = 1.0;
        let err = validate_assumptions(&[quiet_agent()], &a, 10.0, 0.01).unwrap_err();
        assert_eq!(err.signal, "rho_o");
    }

    #[test]
    fn detects_rate_bound_violation() {
        let mut a = AttackProfile::<f64>::identity(1);
        a.rho_s[0] = ScalarSignal::sin(1.0, 0.5, 2.0);
        a.declared.state_lower = 0.5;
        a.declared.state_upper = 1.5;
        a.declared.rate = 0.5;
        let err = validate_assumptions(&[quiet_agent()], &a, 10.0, 0.01).unwrap_err();
        assert_eq!(err.signal, "rho_s_1");
        assert!(err.detail.contains("rate"));
    }

    #[test]
    fn structural_issues_are_listed() {
        let m = AgentModel { psi1: vec![Regressor::Product], ..quiet_agent() };
        assert!(m.structural_issues().iter().any(|(f, _)| *f == "psi1"));
        let m = AgentModel { theta2: vec![], ..quiet_agent() };
        assert!(m.structural_issues().iter().any(|(f, _)| *f == "theta2"));
        assert!(quiet_agent().structural_issues().is_empty());
    }
}
