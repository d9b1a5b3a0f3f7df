//! Adaptive Simpson quadrature.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
}

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` with recursive Simpson bisection.
///
/// Each panel is accepted when `|S_left + S_right − S_whole| ≤ 15·tol_panel`, and the accepted
/// value carries the Richardson correction.
pub fn adaptive_simpson<T, F>(f: F, a: T, b: T, tol: T) -> Result<T, QuadratureError>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let eval = |x: T| -> Result<T, QuadratureError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { at: x.as_f64() })
        }
    };
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(&eval, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson<T: Scalar>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T, E>(eval: &E, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> Result<T, QuadratureError>
where
    T: Scalar,
    E: Fn(T) -> Result<T, QuadratureError>,
{
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let flm = eval(lm)?;
    let frm = eval(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return Ok(left + right + delta / T::lit(15.0));
    }
    Ok(recurse(eval, a, m, fa, flm, fm, left, tol * half, depth - 1)?
        + recurse(eval, m, b, fm, frm, fb, right, tol * half, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_up_to_cubic_are_exact() {
        let v = adaptive_simpson(|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn sine_half_period() {
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn gaussian_tail() {
        let v = adaptive_simpson(|x: f64| (-x * x).exp(), 0.0, 6.0, 1e-13).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
    }

    #[test]
    fn reports_non_finite_integrand() {
        let r = adaptive_simpson(|x: f64| 1.0 / x, 0.0, 1.0, 1e-8);
        assert!(matches!(r, Err(QuadratureError::NonFinite { .. })));
    }
}
