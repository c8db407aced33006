//! Bracketed scalar root finders.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("no convergence after {0} iterations")]
    MaxIterations(usize),
    #[error("function returned a non-finite value at {0}")]
    NonFinite(f64),
}

/// Newton's method kept inside a shrinking bracket, with bisection fallback.
///
/// `f` returns (value, derivative). Stops when |value| ≤ `ftol` or the
/// bracket collapses to adjacent floats.
pub fn safeguarded_newton<F>(mut f: F, lo: f64, hi: f64, ftol: f64, max_iter: usize) -> Result<f64, RootError>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoBracket { lo, hi });
    }
    let increasing = fhi > 0.0;
    let (mut a, mut b) = (lo, hi);
    let mut x = 0.5 * (a + b);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(RootError::NonFinite(x));
        }
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if (fx > 0.0) == increasing {
            b = x;
        } else {
            a = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if next == x || b - a <= f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        x = next;
    }
    Err(RootError::MaxIterations(max_iter))
}

/// Illinois-modified regula falsi. Stops when |f| ≤ `ftol` or the bracket
/// is narrower than `xtol`.
pub fn illinois<F>(mut f: F, lo: f64, hi: f64, xtol: f64, ftol: f64, max_iter: usize) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() {
        return Err(RootError::NonFinite(a));
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite(b));
    }
    if fa.abs() <= ftol {
        return Ok(a);
    }
    if fb.abs() <= ftol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { lo, hi });
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if !fc.is_finite() {
            return Err(RootError::NonFinite(c));
        }
        if fc.abs() <= ftol || (b - a).abs() <= xtol {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(RootError::MaxIterations(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_cubic() {
        let r = safeguarded_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-14, 80).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_decreasing_and_flat_start() {
        // derivative vanishes at the midpoint; bisection must take over
        let r = safeguarded_newton(|x| (1.0 - x * x * x, -3.0 * x * x), -1.0, 1.0 + 1e-3, 1e-14, 200).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn illinois_finds_cosine_root() {
        let r = illinois(f64::cos, 1.0, 2.0, 1e-15, 0.0, 100).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn reports_missing_bracket() {
        assert!(matches!(
            illinois(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0, 50),
            Err(RootError::NoBracket { .. })
        ));
        assert!(safeguarded_newton(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12, 50).is_err());
    }
}
