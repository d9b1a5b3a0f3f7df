//! Finite-time distributed reference protocol `ṡ_i = −k|ϖ_i|^α sign(ϖ_i)` with `ϖ = L s`,
//! its Lyapunov certificate and the static settling-time bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Digraph, SpectralData};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("protocol gain k must be positive")]
    Gain,
    #[error("exponent alpha must lie in (0, 1)")]
    Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceParams<T> {
    pub k: T,
    pub alpha: T,
}

impl<T: Scalar> ReferenceParams<T> {
    pub fn new(k: T, alpha: T) -> Result<Self, ReferenceError> {
        let p = Self { k, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ReferenceError> {
        if !(self.k.is_finite() && self.k > T::zero()) {
            return Err(ReferenceError::Gain);
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(ReferenceError::Exponent);
        }
        Ok(())
    }
}

/// Local disagreements below this magnitude produce no motion.
pub const CHATTER_GUARD: f64 = 1e-12;

/// Reference states together with their local disagreements `ϖ = L s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState<T> {
    pub s: Vec<T>,
    pub varpi: Vec<T>,
}

impl<T: Scalar> ReferenceState<T> {
    pub fn new(s: Vec<T>, g: &Digraph) -> Self {
        let varpi = g.local_disagreement(&s);
        Self { s, varpi }
    }
}

/// `−k|ϖ|^α sign(ϖ)` evaluated componentwise into `out`.
pub fn reference_rate_into<T: Scalar>(s: &[T], g: &Digraph, p: &ReferenceParams<T>, out: &mut [T]) {
    let guard = T::lit(CHATTER_GUARD);
    for (i, slot) in out.iter_mut().enumerate() {
        let varpi = g.neighbors(i).map(|j| s[i] - s[j]).fold(T::zero(), |a, b| a + b);
        *slot = if varpi.abs() < guard { T::zero() } else { -p.k * varpi.abs().powf(p.alpha) * varpi.sign0() };
    }
}

pub fn reference_rate<T: Scalar>(s: &[T], g: &Digraph, p: &ReferenceParams<T>) -> Vec<T> {
    let mut out = vec![T::zero(); s.len()];
    reference_rate_into(s, g, p, &mut out);
    out
}

/// `W = Σ h_i |ϖ_i|^{1+α} / (1+α)`.
pub fn lyapunov_w<T: Scalar>(s: &[T], h: &[T], alpha: T, g: &Digraph) -> T {
    let varpi = g.local_disagreement(s);
    let power = T::one() + alpha;
    varpi.iter().zip(h).map(|(&w, &hi)| hi * w.abs().powf(power)).sum::<T>() / power
}

/// Decay constant `Q = ½ k λ₂ N⁻¹ [(1+α)/h̄]^{2α/(1+α)}` of `Ẇ ≤ −Q W^{2α/(1+α)}`.
pub fn decay_constant<T: Scalar>(p: &ReferenceParams<T>, sd: &SpectralData<T>, n: usize) -> T {
    let one = T::one();
    let exponent = T::lit(2.0) * p.alpha / (p.alpha + one);
    T::lit(0.5) * p.k * sd.lambda2 / T::from_count(n) * ((one + p.alpha) / sd.hbar).powf(exponent)
}

/// Upper bound `W₀^{1/(1+α)}(1+α) / (Q(1−α))` on the time to reach consensus.
pub fn settling_bound_t0<T: Scalar>(w0: T, p: &ReferenceParams<T>, sd: &SpectralData<T>, n: usize) -> T {
    let one = T::one();
    let q = decay_constant(p, sd, n);
    w0.powf(one / (one + p.alpha)) * (one + p.alpha) / (q * (one - p.alpha))
}

/// Right-hand side of the integrated decay inequality:
/// `W^{1/(1+α)}(t) ≤ W^{1/(1+α)}(0) − Q(1−α)t/(1+α)`, clipped at zero.
pub fn decay_envelope<T: Scalar>(w0: T, t: T, p: &ReferenceParams<T>, q: T) -> T {
    let one = T::one();
    (w0.powf(one / (one + p.alpha)) - q * (one - p.alpha) * t / (one + p.alpha)).max(T::zero())
}

/// Largest pairwise gap `max_i s_i − min_i s_i`.
pub fn spread<T: Scalar>(values: &[T]) -> T {
    let (lo, hi) = values.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() {
        T::zero()
    } else {
        hi - lo
    }
}

/// First sampled time after which every sample has spread at most `tolerance`.
///
/// Returns `None` when the final sample is still outside tolerance.
pub fn detect_consensus_time<T: Scalar>(times: &[T], samples: &[Vec<T>], tolerance: T) -> Option<T> {
    assert_eq!(times.len(), samples.len());
    let last_violation = samples.iter().rposition(|s| spread(s) > tolerance);
    match last_violation {
        None => times.first().copied(),
        Some(k) if k + 1 < times.len() => Some(times[k + 1]),
        Some(_) => None,
    }
}
