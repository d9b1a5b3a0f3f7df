//! Exponential-trigonometric Nussbaum-type functions and a numerical certifier for the
//! multiple-direction property (the two liminf ratios that must vanish).
//!
//! The family is `N(ν) = e^{f(ν)}·sin(ων)` or `e^{f(ν)}·cos(ων)` with `f(ν) = a(ν²+b)^c`.
//! Window integrals are carried in log scale so that certification can run far past the
//! point where `e^{f}` itself overflows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{adaptive_simpson, QuadratureError};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NussbaumError {
    #[error("invalid Nussbaum parameter {param}: {reason}")]
    InvalidParameter { param: &'static str, reason: &'static str },
    #[error("e^f(ν) overflows at ν = {nu} (f = {exponent})")]
    Overflow { nu: f64, exponent: f64 },
    #[error("max_index must be at least 3, got {0}")]
    MaxIndexTooSmall(usize),
    #[error("ratio report truncated after {computed} indices; at least 3 are required")]
    Truncated { computed: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigVariant {
    Sine,
    Cosine,
}

/// Parameters of `N(ν) = e^{a(ν²+b)^c}·trig(ων)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NussbaumFamily<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub omega: T,
    pub variant: TrigVariant,
}

impl<T: Scalar> NussbaumFamily<T> {
    pub fn new(a: T, b: T, c: T, omega: T, variant: TrigVariant) -> Result<Self, NussbaumError> {
        let family = Self { a, b, c, omega, variant };
        family.validate()?;
        Ok(family)
    }

    /// `e^{0.9(ν²+0.001)^{0.7}}·cos(0.4ν)`, the slow-growing instance used by the benchmark.
    pub fn slow_growth() -> Self {
        Self { a: T::lit(0.9), b: T::lit(0.001), c: T::lit(0.7), omega: T::lit(0.4), variant: TrigVariant::Cosine }
    }

    /// `e^{ν²}·cos(0.4ν)`, the classical Gaussian-envelope form.
    pub fn gaussian_envelope() -> Self {
        Self { a: T::one(), b: T::zero(), c: T::one(), omega: T::lit(0.4), variant: TrigVariant::Cosine }
    }

    /// Checks the growth hypotheses: `f` even with `f`, `f′` strictly increasing and unbounded on
    /// `ν > 0`. For `f = a(ν²+b)^c` this holds for `a > 0`, `b ≥ 0`, `c > 1/2`; `c` is capped at 1.
    pub fn validate(&self) -> Result<(), NussbaumError> {
        let bad = |param, reason| Err(NussbaumError::InvalidParameter { param, reason });
        if !(self.a.is_finite() && self.a > T::zero()) {
            return bad("a", "must be finite and positive");
        }
        if !(self.b.is_finite() && self.b >= T::zero()) {
            return bad("b", "must be finite and non-negative");
        }
        if !(self.c > T::lit(0.5) && self.c <= T::one()) {
            return bad("c", "must lie in (0.5, 1]");
        }
        if !(self.omega.is_finite() && self.omega > T::zero()) {
            return bad("omega", "must be finite and positive");
        }
        Ok(())
    }

    /// `f(ν) = a(ν²+b)^c`.
    pub fn exponent(&self, nu: T) -> T {
        self.a * (nu * nu + self.b).powf(self.c)
    }

    /// `f′(ν) = 2acν(ν²+b)^{c−1}`.
    pub fn exponent_slope(&self, nu: T) -> T {
        if nu == T::zero() {
            return T::zero();
        }
        T::lit(2.0) * self.a * self.c * nu * (nu * nu + self.b).powf(self.c - T::one())
    }

    fn trig(&self, nu: T) -> (T, T) {
        let (s, c) = (self.omega * nu).sin_cos();
        match self.variant {
            TrigVariant::Sine => (s, self.omega * c),
            TrigVariant::Cosine => (c, -self.omega * s),
        }
    }

    fn envelope(&self, nu: T) -> Result<T, NussbaumError> {
        let f = self.exponent(nu);
        let e = f.exp();
        if e.is_finite() {
            Ok(e)
        } else {
            Err(NussbaumError::Overflow { nu: nu.as_f64(), exponent: f.as_f64() })
        }
    }

    /// `N(ν)`.
    pub fn eval(&self, nu: T) -> Result<T, NussbaumError> {
        let (trig, _) = self.trig(nu);
        Ok(self.envelope(nu)? * trig)
    }

    /// `N′(ν) = e^{f}(f′·trig(ων) + ω·trig′(ων))`.
    pub fn eval_derivative(&self, nu: T) -> Result<T, NussbaumError> {
        let (trig, dtrig) = self.trig(nu);
        let value = self.envelope(nu)? * (self.exponent_slope(nu) * trig + dtrig);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(NussbaumError::Overflow { nu: nu.as_f64(), exponent: self.exponent(nu).as_f64() })
        }
    }

    /// `N` and `N′` together.
    pub fn eval_with_derivative(&self, nu: T) -> Result<(T, T), NussbaumError> {
        Ok((self.eval(nu)?, self.eval_derivative(nu)?))
    }

    /// Full trigonometric period `2π/ω`.
    pub fn period(&self) -> T {
        T::lit(2.0) * T::PI() / self.omega
    }

    pub fn grid(&self) -> WindowGrid<T> {
        WindowGrid { omega: self.omega, variant: self.variant }
    }
}

/// Sign-change points of `trig(ων)` on `[0, ∞)`, prefixed by the origin.
///
/// Window `i ≥ 1` of positive sign is `[p_{2i−2}, p_{2i−1}]`, the matching negative window is
/// `[p_{2i−1}, p_{2i}]`. For the sine variant `p_k = kT/2`; for the cosine variant
/// `p_k = (2k−1)T/4`, i.e. the odd points of the quarter-period grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowGrid<T> {
    pub omega: T,
    pub variant: TrigVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

impl<T: Scalar> WindowGrid<T> {
    pub fn breakpoint(&self, k: usize) -> T {
        if k == 0 {
            return T::zero();
        }
        let half_period = T::PI() / self.omega;
        match self.variant {
            TrigVariant::Sine => T::from_count(k) * half_period,
            TrigVariant::Cosine => (T::from_count(k) - T::lit(0.5)) * half_period,
        }
    }

    /// Bounds of the `i`-th (1-based) window of the given polarity.
    pub fn window(&self, i: usize, polarity: Polarity) -> (T, T) {
        assert!(i >= 1, "window indices start at 1");
        match polarity {
            Polarity::Positive => (self.breakpoint(2 * i - 2), self.breakpoint(2 * i - 1)),
            Polarity::Negative => (self.breakpoint(2 * i - 1), self.breakpoint(2 * i)),
        }
    }
}

const WINDOW_TOL: f64 = 1e-10;

/// `∫ N` over a window, represented as `e^{ln_scale}·mantissa`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scaled<T> {
    ln_scale: T,
    mantissa: T,
}

impl<T: Scalar> Scaled<T> {
    fn ln_abs(&self) -> T {
        self.ln_scale + self.mantissa.abs().ln()
    }

    fn value(&self) -> T {
        self.mantissa * self.ln_scale.exp()
    }
}

fn quad_tol<T: Scalar>() -> T {
    T::lit(WINDOW_TOL).max(T::epsilon() * T::lit(64.0))
}

fn family_window<T: Scalar>(family: &NussbaumFamily<T>, lo: T, hi: T) -> Result<Scaled<T>, NussbaumError> {
    // With a steep envelope the mass sits in a layer of width ~1/f′(hi) next to the right end,
    // where the trig factor also vanishes. Panels halve toward `hi` so the layer is resolved,
    // and the mantissa is normalized by the sampled peak.
    let ln_hi = family.exponent(hi);
    let mut cuts = vec![lo];
    let mut gap = (hi - lo) * T::lit(0.5);
    while gap > (hi - lo) * T::epsilon() {
        cuts.push(hi - gap);
        gap *= T::lit(0.5);
    }
    cuts.push(hi);
    let rel = |nu: T| (family.exponent(nu) - ln_hi).exp() * family.trig(nu).0;
    let peak =
        cuts.windows(2).flat_map(|w| [w[0], (w[0] + w[1]) * T::lit(0.5)]).fold(T::zero(), |m, nu| m.max(rel(nu).abs()));
    let ln_scale = if peak > T::zero() { ln_hi + peak.ln() } else { ln_hi };
    let integrand = |nu: T| (family.exponent(nu) - ln_scale).exp() * family.trig(nu).0;
    let mut mantissa = T::zero();
    for w in cuts.windows(2) {
        mantissa += adaptive_simpson(integrand, w[0], w[1], quad_tol())?;
    }
    Ok(Scaled { ln_scale, mantissa })
}

fn raw_window<T: Scalar>(func: &dyn Fn(T) -> T, lo: T, hi: T) -> Result<Scaled<T>, QuadratureError> {
    let samples = 32;
    let mut peak = T::zero();
    for k in 0..=samples {
        let x = lo + (hi - lo) * T::from_count(k) / T::from_count(samples);
        let v = func(x);
        if !v.is_finite() {
            return Err(QuadratureError::NonFinite { at: x.as_f64() });
        }
        peak = peak.max(v.abs());
    }
    let tol = quad_tol::<T>() * peak.max(T::min_positive_value());
    let mantissa = adaptive_simpson(func, lo, hi, tol)?;
    Ok(Scaled { ln_scale: T::zero(), mantissa })
}

/// `∫ N(ν) dν` over the `i`-th window of the given polarity (`i ≥ 1`).
///
/// Positive windows integrate to `Z_i^p > 0`, negative windows to `Z_i^n < 0`.
pub fn window_integral<T: Scalar>(
    family: &NussbaumFamily<T>,
    i: usize,
    polarity: Polarity,
) -> Result<T, NussbaumError> {
    let (lo, hi) = family.grid().window(i, polarity);
    let scaled = family_window(family, lo, hi)?;
    let value = scaled.value();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(NussbaumError::Overflow { nu: hi.as_f64(), exponent: scaled.ln_scale.as_f64() })
    }
}

/// Function under certification.
pub enum Candidate<'a, T> {
    /// A validated member of the exponential-trigonometric family.
    Family(&'a NussbaumFamily<T>),
    /// Any evaluable function together with the window grid matching its sign pattern.
    Raw { function: &'a dyn Fn(T) -> T, grid: WindowGrid<T> },
}

/// Mean-value domination check `−Z_{i−1}^n / Z_i^p ≤ e^{−(T/2)·f′(p_{2i−3})}`, in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domination<T> {
    pub ln_ratio: T,
    pub ln_bound: T,
}

impl<T: Scalar> Domination<T> {
    pub fn holds(&self) -> bool {
        self.ln_ratio <= self.ln_bound + T::lit(1e-8)
    }
}

/// One sample of the certification sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow<T> {
    pub index: usize,
    /// End of positive window `i`, where the first ratio is sampled.
    pub w_positive_end: T,
    /// End of negative window `i`, where the second ratio is sampled.
    pub w_negative_end: T,
    pub ln_z_positive: T,
    pub ln_abs_z_negative: T,
    /// `S_i^p = Σ_{k≤i} Z_k^p` (may be `inf` once it leaves the representable range).
    pub sp: T,
    /// `Σ_{k≤i} Z_k^n` (may be `-inf`).
    pub sn: T,
    pub ln_sp: T,
    pub ln_abs_sn: T,
    /// `(w − ∫₀^w N_n) / ∫₀^w N_p` at `w = w_positive_end`.
    pub ratio1: T,
    /// `(w + ∫₀^w N_p) / (−∫₀^w N_n)` at `w = w_negative_end`.
    pub ratio2: T,
    pub ln_ratio1: T,
    pub ln_ratio2: T,
    /// Only available for family members and `i ≥ 2`.
    pub domination: Option<Domination<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport<T> {
    pub rows: Vec<RatioRow<T>>,
    /// Set when a window integral overflowed before `max_index` was reached.
    pub truncated: bool,
    /// False if some window integral had the wrong sign for its polarity.
    pub sign_consistent: bool,
    pub verdict: Verdict,
}

/// Threshold the final ratios must fall below for a pass.
pub const PASS_RATIO: f64 = 0.05;
/// Number of trailing indices over which both ratio sequences must strictly decrease.
pub const DECREASING_WINDOW: usize = 5;

fn log_add<T: Scalar>(x: T, y: T) -> T {
    if x == T::neg_infinity() {
        return y;
    }
    if y == T::neg_infinity() {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// Computes both liminf ratio sequences on the window grid for `i = 1..=max_index`.
///
/// The verdict is a finite-sample heuristic: PASS requires both log-ratio sequences to be
/// strictly decreasing over the last [`DECREASING_WINDOW`] indices and both final ratios to be
/// below [`PASS_RATIO`]. A liminf cannot be decided from finitely many samples.
pub fn certify_nfunction<T: Scalar>(
    candidate: Candidate<'_, T>,
    max_index: usize,
) -> Result<RatioReport<T>, NussbaumError> {
    if max_index < 3 {
        return Err(NussbaumError::MaxIndexTooSmall(max_index));
    }
    if let Candidate::Family(family) = &candidate {
        family.validate()?;
    }
    let grid = match &candidate {
        Candidate::Family(family) => family.grid(),
        Candidate::Raw { grid, .. } => *grid,
    };
    let window = |i: usize, pol: Polarity| -> Result<Option<Scaled<T>>, NussbaumError> {
        let (lo, hi) = grid.window(i, pol);
        match &candidate {
            Candidate::Family(family) => family_window(family, lo, hi).map(Some),
            Candidate::Raw { function, .. } => match raw_window(*function, lo, hi) {
                Ok(s) => Ok(Some(s)),
                Err(QuadratureError::NonFinite { .. }) => Ok(None),
            },
        }
    };

    let mut rows = Vec::with_capacity(max_index);
    let mut truncated = false;
    let mut sign_consistent = true;
    let mut ln_sp = T::neg_infinity();
    let mut ln_sn = T::neg_infinity();
    let mut prev_ln_zn = T::neg_infinity();
    for i in 1..=max_index {
        let (zp, zn) = match (window(i, Polarity::Positive)?, window(i, Polarity::Negative)?) {
            (Some(zp), Some(zn)) => (zp, zn),
            _ => {
                truncated = true;
                break;
            }
        };
        if zp.mantissa <= T::zero() || zn.mantissa >= T::zero() {
            sign_consistent = false;
        }
        let ln_zp = zp.ln_abs();
        let ln_zn = zn.ln_abs();
        let ln_sn_before = ln_sn;
        ln_sp = log_add(ln_sp, ln_zp);
        ln_sn = log_add(ln_sn, ln_zn);
        let w1 = grid.breakpoint(2 * i - 1);
        let w2 = grid.breakpoint(2 * i);
        let ln_ratio1 = log_add(w1.ln(), ln_sn_before) - ln_sp;
        let ln_ratio2 = log_add(w2.ln(), ln_sp) - ln_sn;
        let domination = match (&candidate, i) {
            (Candidate::Family(family), i) if i >= 2 => {
                let half_period = T::PI() / family.omega;
                Some(Domination {
                    ln_ratio: prev_ln_zn - ln_zp,
                    ln_bound: -half_period * family.exponent_slope(grid.breakpoint(2 * i - 3)),
                })
            }
            _ => None,
        };
        rows.push(RatioRow {
            index: i,
            w_positive_end: w1,
            w_negative_end: w2,
            ln_z_positive: ln_zp,
            ln_abs_z_negative: ln_zn,
            sp: ln_sp.exp(),
            sn: -ln_sn.exp(),
            ln_sp,
            ln_abs_sn: ln_sn,
            ratio1: ln_ratio1.exp(),
            ratio2: ln_ratio2.exp(),
            ln_ratio1,
            ln_ratio2,
            domination,
        });
        prev_ln_zn = ln_zn;
    }
    if rows.len() < 3 {
        return Err(NussbaumError::Truncated { computed: rows.len() });
    }
    let verdict = classify(&rows, sign_consistent);
    Ok(RatioReport { rows, truncated, sign_consistent, verdict })
}

fn classify<T: Scalar>(rows: &[RatioRow<T>], sign_consistent: bool) -> Verdict {
    let tail = &rows[rows.len().saturating_sub(DECREASING_WINDOW)..];
    let decreasing = |f: fn(&RatioRow<T>) -> T| tail.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let last = rows.last().expect("non-empty");
    let threshold = T::lit(PASS_RATIO).ln();
    let pass = sign_consistent
        && decreasing(|r| r.ln_ratio1)
        && decreasing(|r| r.ln_ratio2)
        && last.ln_ratio1 < threshold
        && last.ln_ratio2 < threshold;
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

impl<T: Scalar> RatioReport<T> {
    pub fn final_ratios(&self) -> (T, T) {
        let last = self.rows.last().expect("report has at least three rows");
        (last.ratio1, last.ratio2)
    }

    /// CSV with one line per index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,w_positive_end,w_negative_end,sp,sn,ratio1,ratio2,ln_sp,ln_abs_sn,ln_ratio1,ln_ratio2,domination_ln_ratio,domination_ln_bound\n",
        );
        for r in &self.rows {
            let (dl, db) = match r.domination {
                Some(d) => (d.ln_ratio.as_f64().to_string(), d.ln_bound.as_f64().to_string()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.index,
                r.w_positive_end.as_f64(),
                r.w_negative_end.as_f64(),
                r.sp.as_f64(),
                r.sn.as_f64(),
                r.ratio1.as_f64(),
                r.ratio2.as_f64(),
                r.ln_sp.as_f64(),
                r.ln_abs_sn.as_f64(),
                r.ln_ratio1.as_f64(),
                r.ln_ratio2.as_f64(),
                dl,
                db
            );
        }
        out
    }
}
