//! Blow-up charts around the transcritical point and the closed-form
//! transition maps of the entry chart K1 and the rescaling chart K2.
//!
//! In K2 the restricted flow is a′ = −2(y + νa)a, y′ = −1, solved in terms
//! of the Dawson function.

use crate::specfun::{dawson, scaled_dawson, scaled_dawson_inverse, SpecfunError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlowupError {
    #[error("map expects a point in chart {expected:?}, got {got:?}")]
    WrongChart { expected: Chart, got: Chart },
    #[error("ill-defined: {0}")]
    IllDefined(&'static str),
    #[error("parameter out of range: {0}")]
    Domain(&'static str),
    #[error("not in the blow-up regime: {0}")]
    Regime(&'static str),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chart {
    K1,
    K2,
    K3,
}

/// Local chart coordinates. `y_or_eps` is ε₁ in K1, y₂ in K2 and ε₃ in K3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub y_or_eps: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChartMap {
    K12,
    K21,
    K32,
    K23,
}

impl ChartMap {
    pub fn source(self) -> Chart {
        match self {
            ChartMap::K12 => Chart::K1,
            ChartMap::K21 | ChartMap::K23 => Chart::K2,
            ChartMap::K32 => Chart::K3,
        }
    }

    pub fn inverse(self) -> ChartMap {
        match self {
            ChartMap::K12 => ChartMap::K21,
            ChartMap::K21 => ChartMap::K12,
            ChartMap::K32 => ChartMap::K23,
            ChartMap::K23 => ChartMap::K32,
        }
    }
}

pub fn chart_map(which: ChartMap, p: &ChartPoint) -> Result<ChartPoint, BlowupError> {
    if p.chart != which.source() {
        return Err(BlowupError::WrongChart {
            expected: which.source(),
            got: p.chart,
        });
    }
    let scaled = |chart, s: f64, r, y_or_eps| ChartPoint {
        chart,
        a: p.a * s,
        b: p.b * s,
        c: p.c * s,
        y_or_eps,
        r,
    };
    match which {
        ChartMap::K12 => {
            if !(p.y_or_eps > 0.0) {
                return Err(BlowupError::IllDefined("K1 -> K2 needs eps1 > 0"));
            }
            let q = p.y_or_eps.sqrt();
            Ok(scaled(Chart::K2, 1.0 / q, p.r * q, 1.0 / q))
        }
        ChartMap::K21 => {
            let y2 = p.y_or_eps;
            if !(y2 > 0.0) {
                return Err(BlowupError::IllDefined("K2 -> K1 needs y2 > 0"));
            }
            Ok(scaled(Chart::K1, 1.0 / y2, p.r * y2, 1.0 / (y2 * y2)))
        }
        ChartMap::K32 => {
            if !(p.y_or_eps > 0.0) {
                return Err(BlowupError::IllDefined("K3 -> K2 needs eps3 > 0"));
            }
            let q = p.y_or_eps.sqrt();
            Ok(scaled(Chart::K2, 1.0 / q, p.r * q, -1.0 / q))
        }
        ChartMap::K23 => {
            let y2 = p.y_or_eps;
            if !(y2 < 0.0) {
                return Err(BlowupError::IllDefined("K2 -> K3 needs y2 < 0"));
            }
            Ok(scaled(Chart::K3, -1.0 / y2, -p.r * y2, 1.0 / (y2 * y2)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Transition {
    Crossed(ChartPoint),
    /// The orbit leaves every bounded set as y decreases to this value.
    BlownUpAtAsymptote { gamma2: f64 },
    IllDefined { reason: &'static str },
}

impl Transition {
    pub fn exit(&self) -> Option<&ChartPoint> {
        match self {
            Transition::Crossed(p) => Some(p),
            _ => None,
        }
    }
}

/// Leading-order passage time through K1 from ε₁ to μ₁.
pub fn k1_passage_time(eps1: f64, mu1: f64) -> f64 {
    0.5 * (1.0 / eps1 - 1.0 / mu1)
}

/// K1 transition from ε₁ to μ₁ along the centre manifold b = −a, c = 0.
///
/// Exit fast coordinate −a/(νa − (νa+1)e^{2T₁}). The denominator starts at
/// −1 and vanishes at T = ½ ln(νa/(νa+1)) when νa + 1 < 0.
pub fn pi1_map(a1: f64, delta1: f64, eps1: f64, mu1: f64, nu: f64) -> Result<Transition, BlowupError> {
    if !(eps1 > 0.0 && eps1 <= mu1) {
        return Err(BlowupError::Domain("need 0 < eps1 <= mu1"));
    }
    if !(delta1 > 0.0) {
        return Err(BlowupError::Domain("need delta1 > 0"));
    }
    if !(nu >= 0.0) {
        return Err(BlowupError::Domain("need nu >= 0"));
    }
    let t1 = k1_passage_time(eps1, mu1);
    let na = nu * a1;
    if na + 1.0 < 0.0 {
        let t_pole = 0.5 * (na / (na + 1.0)).ln();
        if t1 >= t_pole {
            return Ok(Transition::IllDefined {
                reason: "exit denominator vanishes before the passage time",
            });
        }
    }
    let h = if a1 == 0.0 {
        0.0
    } else {
        -a1 / (na - (na + 1.0) * (2.0 * t1).exp())
    };
    Ok(Transition::Crossed(ChartPoint {
        chart: Chart::K1,
        a: h,
        b: -h,
        c: 0.0,
        y_or_eps: mu1,
        r: delta1 * (eps1 / mu1).sqrt(),
    }))
}

/// Returned by [`k2_explicit_solution`] when the orbit escapes before `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlownUp {
    pub gamma2: Option<f64>,
}

/// Solution a(y) of the K2 flow through (a*, y*).
///
/// The denominator is exp(−y²)·2a*ν·(C − ∫₀ʸexp(t²)dt) with C fixed by the
/// initial point, so it changes sign at most once; the orbit exists down to
/// `y` iff the denominator is still positive there.
pub fn k2_explicit_solution(a_star: f64, y_star: f64, nu: f64, y: f64) -> Result<f64, BlownUp> {
    if a_star == 0.0 {
        return Ok(0.0);
    }
    let ds = dawson(y_star).expect("finite y_star");
    let d = dawson(y).expect("finite y");
    let k = 2.0 * a_star * nu;
    let den = (y_star * y_star - y * y).exp() * (1.0 + k * ds) - k * d;
    if den > 0.0 {
        return Ok(a_star / den);
    }
    let c = (y_star * y_star).exp() / k + scaled_dawson(y_star).expect("finite y_star");
    Err(BlownUp {
        gamma2: scaled_dawson_inverse(c).ok(),
    })
}

/// K2 transition from y = δ₂ to y = −δ₂ at leading order in r.
pub fn pi2_map(r: f64, a: f64, delta2: f64, nu: f64) -> Result<Transition, BlowupError> {
    if !(delta2 > 0.0) {
        return Err(BlowupError::Domain("need delta2 > 0"));
    }
    if !(nu >= 0.0) {
        return Err(BlowupError::Domain("need nu >= 0"));
    }
    if !(r >= 0.0) {
        return Err(BlowupError::Domain("need r >= 0"));
    }
    let den = 1.0 + 4.0 * a * nu * dawson(delta2)?;
    if den > 0.0 {
        let exit = a / den;
        return Ok(Transition::Crossed(ChartPoint {
            chart: Chart::K2,
            a: exit,
            b: -exit,
            c: 0.0,
            y_or_eps: -delta2,
            r,
        }));
    }
    Ok(Transition::BlownUpAtAsymptote {
        gamma2: gamma2_asymptote(a, delta2, nu)?,
    })
}

/// Largest a for which the K2 passage from δ₂ blows up: −1/(4νD(δ₂)).
pub fn pi2_threshold(delta2: f64, nu: f64) -> f64 {
    -1.0 / (4.0 * nu * dawson(delta2).expect("finite delta2"))
}

/// Asymptote y = Γ₂ of the K2 orbit entering at (a*, δ₂):
/// exp(Γ₂²)D(Γ₂) = exp(δ₂²)(1/(2a*ν) + D(δ₂)).
pub fn gamma2_asymptote(a_star: f64, delta2: f64, nu: f64) -> Result<f64, BlowupError> {
    if !(nu > 0.0) {
        return Err(BlowupError::Regime("need nu > 0"));
    }
    if !(a_star < 0.0) {
        return Err(BlowupError::Regime("need a < 0"));
    }
    let dd = dawson(delta2)?;
    if 1.0 + 4.0 * a_star * nu * dd > 0.0 {
        return Err(BlowupError::Regime("1 + 4 a nu D(delta2) > 0, orbit crosses"));
    }
    let c = (delta2 * delta2).exp() * (1.0 / (2.0 * a_star * nu) + dd);
    Ok(scaled_dawson_inverse(c)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// a < 0, y > 0
    Repelling,
    /// a > 0, y < 0
    Attracting,
}

/// The K2 orbits a = −1/(2νD(y)).
pub fn gamma2_curve(y: f64, nu: f64, branch: Branch) -> Result<f64, BlowupError> {
    if !(nu > 0.0) {
        return Err(BlowupError::Domain("curves exist only for nu > 0"));
    }
    if y == 0.0 {
        return Err(BlowupError::Domain("pole at y = 0"));
    }
    match branch {
        Branch::Repelling if y < 0.0 => return Err(BlowupError::Domain("repelling branch needs y > 0")),
        Branch::Attracting if y > 0.0 => return Err(BlowupError::Domain("attracting branch needs y < 0")),
        _ => {}
    }
    Ok(-1.0 / (2.0 * nu * dawson(y)?))
}

/// Attracting (y < 0) or repelling (y > 0) slow manifold of the clustering
/// branch: a = −√ε / (2νD(y/√ε)).
pub fn slow_manifold_h(y: f64, eps: f64, nu: f64) -> Result<f64, BlowupError> {
    if !(eps > 0.0) {
        return Err(BlowupError::Domain("need eps > 0"));
    }
    let branch = if y < 0.0 { Branch::Attracting } else { Branch::Repelling };
    let s = eps.sqrt();
    Ok(s * gamma2_curve(y / s, nu, branch)?)
}

/// Result of integrating the K2 flow numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum K2Flow {
    Reached(f64),
    /// |a| exceeded the threshold at this (interpolated) y.
    Diverged(f64),
}

/// RK4 integration of da/dy = 2(y + νa)a from `y_from` down to `y_to`.
pub fn k2_flow_numeric(a: f64, y_from: f64, y_to: f64, nu: f64, dy: f64, threshold: f64) -> K2Flow {
    let f = |y: f64, a: f64| 2.0 * (y + nu * a) * a;
    let n = ((y_from - y_to) / dy).ceil().max(1.0) as usize;
    let h = (y_from - y_to) / n as f64;
    let mut a = a;
    for k in 0..n {
        let y = y_from - k as f64 * h;
        let k1 = f(y, a);
        let k2 = f(y - 0.5 * h, a - 0.5 * h * k1);
        let k3 = f(y - 0.5 * h, a - 0.5 * h * k2);
        let k4 = f(y - h, a - h * k3);
        let next = a - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() || next.abs() > threshold {
            let frac = if next.is_finite() {
                (threshold.ln() - a.abs().ln()) / (next.abs().ln() - a.abs().ln())
            } else {
                0.5
            };
            return K2Flow::Diverged(y - frac.clamp(0.0, 1.0) * h);
        }
        a = next;
    }
    K2Flow::Reached(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn k1(a: f64, eps: f64, r: f64) -> ChartPoint {
        ChartPoint {
            chart: Chart::K1,
            a,
            b: -0.3 * a,
            c: 0.1,
            y_or_eps: eps,
            r,
        }
    }

    #[test]
    fn k12_at_unit_eps_is_identity() {
        let p = k1(0.4, 1.0, 0.2);
        let q = chart_map(ChartMap::K12, &p).unwrap();
        assert_eq!((q.a, q.b, q.c, q.r, q.y_or_eps), (p.a, p.b, p.c, p.r, 1.0));
    }

    #[test]
    fn k23_at_minus_one() {
        let p = ChartPoint {
            chart: Chart::K2,
            a: 0.7,
            b: -0.2,
            c: 0.3,
            y_or_eps: -1.0,
            r: 0.05,
        };
        let q = chart_map(ChartMap::K23, &p).unwrap();
        assert_eq!((q.a, q.b, q.c, q.r, q.y_or_eps), (0.7, -0.2, 0.3, 0.05, 1.0));
    }

    #[test]
    fn chart_domain_errors() {
        let mut p = k1(0.1, 0.5, 0.1);
        assert!(matches!(chart_map(ChartMap::K21, &p), Err(BlowupError::WrongChart { .. })));
        p.chart = Chart::K2;
        p.y_or_eps = 0.0;
        assert!(chart_map(ChartMap::K21, &p).is_err());
        assert!(chart_map(ChartMap::K23, &p).is_err());
    }

    #[test]
    fn pi1_examples() {
        let t = pi1_map(0.3, 1.0, 0.01, 0.04, 0.0).unwrap();
        let exit = t.exit().unwrap();
        let t1 = k1_passage_time(0.01, 0.04);
        assert_abs_diff_eq!(exit.a, 0.3 * (-2.0 * t1).exp(), epsilon = 1e-18);
        assert_abs_diff_eq!(exit.r, 0.5, epsilon = 1e-15);
        assert_eq!(exit.y_or_eps, 0.04);
        assert_eq!(pi1_map(0.0, 1.0, 0.01, 0.04, 2.0).unwrap().exit().unwrap().a, 0.0);
        // νa + 1 < 0 with a long passage hits the pole
        assert!(matches!(
            pi1_map(-2.0, 1.0, 0.01, 0.04, 1.0).unwrap(),
            Transition::IllDefined { .. }
        ));
        assert!(pi1_map(0.1, 1.0, 0.05, 0.04, 1.0).is_err());
    }

    #[test]
    fn pi1_matches_leading_order_flow() {
        // da/dT = −2(1 + νa)a over T₁; same closed form as the exit map
        let (a0, nu, eps1, mu1) = (0.8, 1.5, 0.2, 0.4);
        let t1 = k1_passage_time(eps1, mu1);
        let n = 20000;
        let h = t1 / n as f64;
        let f = |a: f64| -2.0 * (1.0 + nu * a) * a;
        let mut a = a0;
        for _ in 0..n {
            let k1 = f(a);
            let k2 = f(a + 0.5 * h * k1);
            let k3 = f(a + 0.5 * h * k2);
            let k4 = f(a + h * k3);
            a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let exit = pi1_map(a0, 1.0, eps1, mu1, nu).unwrap().exit().unwrap().a;
        assert_abs_diff_eq!(exit, a, epsilon = 1e-12);
    }

    #[test]
    fn k2_solution_examples() {
        assert_eq!(k2_explicit_solution(0.0, 1.0, 2.0, -3.0).unwrap(), 0.0);
        assert_abs_diff_eq!(k2_explicit_solution(0.7, 1.2, 1.5, 1.2).unwrap(), 0.7, epsilon = 1e-15);
        let a = k2_explicit_solution(0.5, 1.0, 0.0, -0.4).unwrap();
        assert_abs_diff_eq!(a, 0.5 * (0.16f64 - 1.0).exp(), epsilon = 1e-15);
        assert!(k2_explicit_solution(-1.0, 2.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn pi2_examples() {
        let ex = |a, nu| pi2_map(0.0, a, 1.0, nu).unwrap().exit().copied().unwrap();
        assert_eq!(ex(0.37, 0.0).a, 0.37);
        assert_eq!(ex(0.37, 0.0).y_or_eps, -1.0);
        assert_eq!(ex(0.0, 2.0).a, 0.0);
        for a in [0.0, 0.1, 10.0, 1e6] {
            assert!(matches!(pi2_map(0.1, a, 2.5, 3.0).unwrap(), Transition::Crossed(_)));
        }
        let below = pi2_threshold(1.0, 1.0) - 0.01;
        assert!(matches!(
            pi2_map(0.0, below, 1.0, 1.0).unwrap(),
            Transition::BlownUpAtAsymptote { .. }
        ));
    }

    #[test]
    fn gamma2_examples() {
        let d2 = 2.0;
        let a_zero = -1.0 / (2.0 * dawson(d2).unwrap());
        assert_abs_diff_eq!(gamma2_asymptote(a_zero, d2, 1.0).unwrap(), 0.0, epsilon = 1e-12);
        let g = gamma2_asymptote(-1.0, 2.0, 1.0).unwrap();
        let c = 4f64.exp() * (-0.5 + dawson(2.0).unwrap());
        assert!((scaled_dawson(g).unwrap() - c).abs() < 1e-9);
        assert!(g > -2.0 && g < 2.0);
        match k2_flow_numeric(-1.0, 2.0, -2.0, 1.0, 1e-5, 1e6) {
            K2Flow::Diverged(y) => assert!((y - g).abs() < 1e-3),
            K2Flow::Reached(a) => panic!("reached {a}"),
        }
        assert!(gamma2_asymptote(0.5, 1.0, 1.0).is_err());
        assert!(gamma2_asymptote(-0.01, 1.0, 1.0).is_err());
    }

    #[test]
    fn gamma2_curve_and_manifold() {
        assert!(gamma2_curve(0.0, 1.0, Branch::Attracting).is_err());
        assert!(gamma2_curve(-1.0, 0.0, Branch::Attracting).is_err());
        assert!(gamma2_curve(1.0, 1.0, Branch::Attracting).is_err());
        assert!(gamma2_curve(-1.0, 2.0, Branch::Attracting).unwrap() > 0.0);
        assert!(gamma2_curve(1.0, 2.0, Branch::Repelling).unwrap() < 0.0);
        for y in [0.1, 0.05] {
            let g = gamma2_curve(y, 1.0, Branch::Repelling).unwrap();
            assert!((g + 1.0 / (2.0 * y)).abs() < 2.0 * y);
        }
        let h = slow_manifold_h(-2.0, 0.01, 1.5).unwrap();
        assert_abs_diff_eq!(h, 2.0 / 1.5, epsilon = 0.01);
        assert!(slow_manifold_h(0.0, 0.01, 1.0).is_err());
        assert!(slow_manifold_h(-1.0, 0.0, 1.0).is_err());
    }
}
