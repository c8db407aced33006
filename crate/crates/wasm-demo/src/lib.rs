//! Browser bindings for three interactive panels: plain versus
//! canard-aware integration of the triangle, the rescaling-chart
//! transition, and the Dawson function with the slow manifolds it defines.
//!
//! Every export returns a flat `Float64Array`; row layouts are documented
//! per function. The `*_rows` functions hold the logic and are plain Rust so
//! they can be tested natively.

use fastslow::blowup::{gamma2_curve, k2_explicit_solution, pi2_map, pi2_threshold, slow_manifold_h, Branch, Transition};
use fastslow::integrate::{simulate, simulate_canard_aware, IntegratorConfig};
use fastslow::scenarios::preset;
use fastslow::specfun::dawson;
use wasm_bindgen::prelude::*;

/// Number of columns in a [`simulate_triangle`] row.
pub const TRIANGLE_COLUMNS: usize = 7;

/// Rows of `[t, x1, x2, x3, y, w, dist_A]`, about `max_rows` of them.
pub fn triangle_rows(y0: f64, eps: f64, canard: bool, t_end: f64, max_rows: usize) -> Result<Vec<f64>, String> {
    let s = preset("triangle_y19").map_err(|e| e.to_string())?;
    let model = s.model.with_epsilon(eps).map_err(|e| e.to_string())?;
    let mut ic = s.ic.clone();
    ic.y = y0;
    let steps = (t_end / s.cfg.dt).round().max(1.0) as usize;
    let cfg = IntegratorConfig {
        t_end,
        record_stride: (steps / max_rows.max(1)).max(1),
        ..s.cfg
    };
    let tr = if canard {
        simulate_canard_aware(&model, &ic, &cfg)
    } else {
        simulate(&model, &ic, &cfg)
    }
    .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(tr.samples.len() * TRIANGLE_COLUMNS);
    for smp in &tr.samples {
        out.push(smp.t);
        out.extend(tr.external(smp));
        out.extend([smp.y, smp.w, smp.dist_a]);
    }
    Ok(out)
}

/// Unit triangle with gains (2, 1) from (1.5, 1, −2.5) at `y0`.
#[wasm_bindgen]
pub fn simulate_triangle(y0: f64, eps: f64, canard: bool, t_end: f64) -> Result<Vec<f64>, JsError> {
    triangle_rows(y0, eps, canard, t_end, 2000).map_err(|e| JsError::new(&e))
}

/// Values of a(y) on the orbit entering at (a, δ), on `n` equally spaced
/// y from δ down to −δ; NaN once the orbit has blown up.
pub fn k2_orbit_rows(a: f64, delta: f64, nu: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|j| {
            let y = delta - 2.0 * delta * j as f64 / (n - 1) as f64;
            k2_explicit_solution(a, delta, nu, y).unwrap_or(f64::NAN)
        })
        .collect()
}

#[wasm_bindgen]
pub fn k2_orbit(a: f64, delta: f64, nu: f64, n: usize) -> Vec<f64> {
    k2_orbit_rows(a, delta, nu, n)
}

/// `[kind, value, threshold]`: kind 1 with the exit a, or kind 0 with the
/// blow-up asymptote Γ₂; threshold is the entry a below which orbits blow up.
pub fn pi2_rows(a: f64, delta: f64, nu: f64) -> Result<Vec<f64>, String> {
    let threshold = if nu > 0.0 { pi2_threshold(delta, nu) } else { f64::NEG_INFINITY };
    match pi2_map(0.0, a, delta, nu).map_err(|e| e.to_string())? {
        Transition::Crossed(p) => Ok(vec![1.0, p.a, threshold]),
        Transition::BlownUpAtAsymptote { gamma2 } => Ok(vec![0.0, gamma2, threshold]),
        Transition::IllDefined { reason } => Err(reason.to_string()),
    }
}

#[wasm_bindgen]
pub fn pi2(a: f64, delta: f64, nu: f64) -> Result<Vec<f64>, JsError> {
    pi2_rows(a, delta, nu).map_err(|e| JsError::new(&e))
}

/// The two special orbits a = −1/(2νD(y)) on `n` points of [−y_max, y_max];
/// the pole at y = 0 is NaN. Rows of `[y, a]`.
#[wasm_bindgen]
pub fn gamma2_curves(nu: f64, y_max: f64, n: usize) -> Vec<f64> {
    grid(-y_max, y_max, n)
        .flat_map(|y| {
            let branch = if y < 0.0 { Branch::Attracting } else { Branch::Repelling };
            [y, gamma2_curve(y, nu, branch).unwrap_or(f64::NAN)]
        })
        .collect()
}

/// Rows of `[x, D(x)]` on `n` points of [−x_max, x_max].
#[wasm_bindgen]
pub fn dawson_curve(x_max: f64, n: usize) -> Vec<f64> {
    grid(-x_max, x_max, n)
        .flat_map(|x| [x, dawson(x).unwrap_or(f64::NAN)])
        .collect()
}

/// Rows of `[y, a]` on the slow manifolds a = −√ε/(2νD(y/√ε)); NaN at y = 0.
#[wasm_bindgen]
pub fn slow_manifold(eps: f64, nu: f64, y_max: f64, n: usize) -> Vec<f64> {
    grid(-y_max, y_max, n)
        .flat_map(|y| [y, slow_manifold_h(y, eps, nu).unwrap_or(f64::NAN)])
        .collect()
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_comparison() {
        let last_gap = |rows: &[f64]| {
            let r = &rows[rows.len() - TRIANGLE_COLUMNS..];
            (r[1] - r[2]).abs()
        };
        let plain = triangle_rows(2.0, 0.05, false, 100.0, 500).unwrap();
        let aware = triangle_rows(2.0, 0.05, true, 100.0, 500).unwrap();
        assert_eq!(plain.len() % TRIANGLE_COLUMNS, 0);
        assert!(plain.len() / TRIANGLE_COLUMNS <= 502);
        assert!(last_gap(&plain) < 1e-6);
        assert!(last_gap(&aware) > 0.1);
        assert!(triangle_rows(2.0, 1.5, false, 1.0, 10).is_err());
    }

    #[test]
    fn k2_panel() {
        let orbit = k2_orbit_rows(0.5, 1.0, 1.0, 11);
        assert_eq!(orbit[0], 0.5);
        let crossed = pi2_rows(0.5, 1.0, 1.0).unwrap();
        assert_eq!(crossed[0], 1.0);
        assert!((orbit[10] - crossed[1]).abs() < 1e-12);
        let blown = pi2_rows(-2.0, 1.0, 1.0).unwrap();
        assert_eq!(blown[0], 0.0);
        assert!(k2_orbit_rows(-2.0, 1.0, 1.0, 11)[10].is_nan());
        assert!(-2.0 < blown[2]);
    }

    #[test]
    fn curves() {
        let d = dawson_curve(3.0, 7);
        assert_eq!(d.len(), 14);
        assert_eq!(d[6], 0.0);
        assert_eq!(d[7], 0.0);
        let g = gamma2_curves(1.0, 2.0, 5);
        assert!(g[5].is_nan());
        assert!(g[1] > 0.0 && g[9] < 0.0);
        let h = slow_manifold(0.05, 1.0, 1.0, 5);
        assert!(h[1] > 0.0 && h[9] < 0.0);
    }
}
