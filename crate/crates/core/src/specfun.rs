//! Dawson function D(x) = exp(−x²)∫₀ˣ exp(t²)dt.

use crate::roots;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("argument is NaN")]
    Nan,
    #[error("argument is not finite: {0}")]
    NonFinite(f64),
    #[error("inverse did not converge for c = {0}")]
    NoConvergence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DawsonEval {
    pub x: f64,
    pub value: f64,
    /// 1 − 2x·D(x).
    pub derivative: f64,
}

const SERIES_MAX: f64 = 6.0;

pub fn dawson(x: f64) -> Result<f64, SpecfunError> {
    if x.is_nan() {
        return Err(SpecfunError::Nan);
    }
    if x.is_infinite() {
        return Ok(0.0f64.copysign(x));
    }
    let ax = x.abs();
    let v = if ax < 1.0 {
        maclaurin(ax)
    } else if ax <= SERIES_MAX {
        (-ax * ax).exp() * exp_integral_series(ax)
    } else {
        asymptotic(ax)
    };
    Ok(if x < 0.0 { -v } else { v })
}

pub fn dawson_with_derivative(x: f64) -> Result<DawsonEval, SpecfunError> {
    let value = dawson(x)?;
    Ok(DawsonEval {
        x,
        value,
        derivative: 1.0 - 2.0 * x * value,
    })
}

/// D(x) = Σ (−1)ⁿ 2ⁿ x^{2n+1} / (2n+1)!!
fn maclaurin(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..60 {
        term *= -2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// ∫₀ˣ exp(t²)dt = Σ x^{2n+1} / (n!(2n+1)), all terms positive.
fn exp_integral_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut power = x;
    let mut sum = x;
    for n in 1..200 {
        power *= x2 / n as f64;
        let term = power / (2 * n + 1) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// D(x) ~ (1/2x) Σ (2n−1)!!/(2x²)ⁿ, truncated at the smallest term.
fn asymptotic(x: f64) -> f64 {
    let r = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..200 {
        let next = term * (2 * n - 1) as f64 * r;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * x)
}

/// exp(x²)·D(x), which equals ∫₀ˣ exp(t²)dt.
pub fn scaled_dawson(x: f64) -> Result<f64, SpecfunError> {
    Ok((x * x).exp() * dawson(x)?)
}

/// Solves exp(Γ²)·D(Γ) = c for Γ.
///
/// The left side is odd and strictly increasing with derivative exp(Γ²).
pub fn scaled_dawson_inverse(c: f64) -> Result<f64, SpecfunError> {
    if c.is_nan() {
        return Err(SpecfunError::Nan);
    }
    if !c.is_finite() {
        return Err(SpecfunError::NonFinite(c));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let target = c.abs();
    let f = |g: f64| {
        let d = dawson(g).expect("finite");
        let e = (g * g).exp();
        (e * d - target, e)
    };
    let mut hi = 1.0;
    while f(hi).0 < 0.0 {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(SpecfunError::NoConvergence(c));
        }
    }
    let tol = 1e-12 * target.max(1.0);
    let root = roots::safeguarded_newton(f, 0.0, hi, tol, 80)
        .map_err(|_| SpecfunError::NoConvergence(c))?;
    Ok(root.copysign(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_eq!(dawson(0.0).unwrap(), 0.0);
        assert_relative_eq!(dawson(1.0).unwrap(), 0.538079506912768, max_relative = 1e-14);
        let tail = 1.0 / 20.0 + 1.0 / 4000.0;
        assert!((dawson(10.0).unwrap() - tail).abs() < 3.0 / 4.0 / 1e5);
        assert!(dawson(f64::NAN).is_err());
    }

    #[test]
    fn branches_agree_at_switch_points() {
        assert_relative_eq!(maclaurin(1.0), (-1f64).exp() * exp_integral_series(1.0), max_relative = 1e-14);
        assert_relative_eq!(maclaurin(0.999), (-0.998001f64).exp() * exp_integral_series(0.999), max_relative = 1e-14);
        assert_relative_eq!(asymptotic(6.0), (-36f64).exp() * exp_integral_series(6.0), max_relative = 1e-13);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(dawson_with_derivative(0.0).unwrap().derivative, 1.0);
        let p = dawson_with_derivative(1.0).unwrap();
        let m = dawson_with_derivative(-1.0).unwrap();
        assert_eq!(p.derivative, m.derivative);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(scaled_dawson_inverse(0.0).unwrap(), 0.0);
        let c = 1f64.exp() * dawson(1.0).unwrap();
        assert_relative_eq!(scaled_dawson_inverse(c).unwrap(), 1.0, max_relative = 1e-12);
        for &c in &[5.0, -5.0, 1e-8, 1e6, -0.3] {
            let g = scaled_dawson_inverse(c).unwrap();
            assert!((scaled_dawson(g).unwrap() - c).abs() < 1e-10 * c.abs().max(1.0));
        }
        assert!(scaled_dawson_inverse(f64::INFINITY).is_err());
    }
}
