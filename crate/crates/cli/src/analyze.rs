//! `analyze`: singular-limit summary without time integration.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use fastslow::dynamics::{singular_analysis, SingularReport};
use fastslow::network::{default_kernel_tol, laplacian_spectrum, SpectrumReport};
use serde::Serialize;

use crate::config::RunSpec;
use crate::output;

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub scenario: String,
    pub nodes: usize,
    pub nu: f64,
    pub w_star: f64,
    /// Weight at which the consensus state loses stability.
    pub critical_weight: f64,
    /// y at which the consensus state loses stability; absent when w does not depend on y.
    pub singular_y: Option<f64>,
    /// Kernel vector of L(critical_weight) orthogonal to consensus, external order.
    pub critical_mode: Vec<f64>,
    pub spectrum_at_critical: SpectrumReport,
    pub kernel_dim_ok: bool,
    pub triangle: Option<SingularReport>,
    pub notices: Vec<String>,
}

pub fn analyze(spec: &RunSpec) -> Result<Analysis> {
    let s = &spec.scenario;
    let g = s.model.graph();
    let w = s.model.weight();
    let wc = g.critical_weight();
    let l = g.laplacian(wc);
    let spectrum = laplacian_spectrum(&l, default_kernel_tol(&l))?;
    let mode = g.to_external(g.critical_mode().as_slice());
    let mut notices = Vec::new();
    let triangle = match singular_analysis(&s.model) {
        Ok(rep) => {
            if rep.clustering_branch.is_none() {
                notices.push(format!(
                    "clustering manifold absent (nu = {}): the passage through the singular point leaves a unchanged",
                    rep.nu
                ));
            }
            Some(rep)
        }
        Err(e) => {
            notices.push(format!("triangle manifold section omitted: {e}"));
            None
        }
    };
    Ok(Analysis {
        scenario: s.name.clone(),
        nodes: g.node_count(),
        nu: w.nu(),
        w_star: w.w_star(),
        critical_weight: wc,
        singular_y: w.uses_y().then(|| wc - w.w_star()),
        critical_mode: mode,
        kernel_dim_ok: spectrum.kernel_dim == 2,
        spectrum_at_critical: spectrum,
        triangle,
        notices,
    })
}

pub fn render(a: &Analysis) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "scenario: {}", a.scenario);
    let _ = writeln!(r, "nodes: {}", a.nodes);
    let _ = writeln!(r, "nu = alpha1 - alpha2 = {}", a.nu);
    let _ = writeln!(r, "w_star = {}", a.w_star);
    let _ = writeln!(r, "critical weight = {:.12}", a.critical_weight);
    match a.singular_y {
        Some(y) => {
            let _ = writeln!(r, "singular y = {y:.12}");
        }
        None => {
            let _ = writeln!(r, "singular y: none (weight does not depend on y)");
        }
    }
    let _ = writeln!(r, "critical mode = {:?}", a.critical_mode);
    let sp = &a.spectrum_at_critical;
    let _ = writeln!(r, "spectrum at critical weight = {:?}", sp.eigenvalues);
    let _ = writeln!(
        r,
        "kernel dimension at critical weight = {} ({})",
        sp.kernel_dim,
        if a.kernel_dim_ok { "ok" } else { "expected 2" }
    );
    if let Some(gap) = sp.spectral_gap {
        let _ = writeln!(r, "spectral gap = {gap:.12}");
    }
    if let Some(t) = &a.triangle {
        let _ = writeln!(r, "triangle: w13 = {}, w23 = {}", t.w13, t.w23);
        let _ = writeln!(r, "  clustering ratio rho = {:.12}", t.clustering_ratio);
        let _ = writeln!(r, "  third node ratio = {:.12}", t.third_node_ratio);
        let _ = writeln!(r, "  consensus eigenvalue lambda_N(y) = -{:.12} (y - {:.12})", t.eigen_rate, t.singular_y());
        let _ = writeln!(r, "  clustering eigenvalue lambda_M(y) = -lambda_N(y)");
        match t.clustering_branch {
            Some(b) => {
                let _ = writeln!(
                    r,
                    "  clustering branch: y = {:.12} - {:.12} x1 - {:.12} x1^3",
                    t.singular_y(),
                    b.linear,
                    b.cubic
                );
            }
            None => {
                let _ = writeln!(r, "  clustering branch: none");
            }
        }
        let _ = writeln!(r, "  consensus branch attracting for y > {:.12}", t.singular_y());
    }
    for n in &a.notices {
        let _ = writeln!(r, "notice: {n}");
    }
    r
}

pub fn cmd_analyze(spec: &RunSpec, out_flag: Option<&Path>) -> Result<String> {
    let dir = output::resolve_dir(out_flag, spec.out_dir.as_deref(), &spec.scenario.name);
    let a = analyze(spec)?;
    let text = render(&a);
    output::write_text(&dir.join("analysis.txt"), &text)?;
    output::write_text(&dir.join("analysis.json"), &(serde_json::to_string_pretty(&a)? + "\n"))?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonsymmetric_triangle() {
        let a = analyze(&RunSpec::from_preset("triangle_nonsym(2,1)").unwrap()).unwrap();
        assert!((a.critical_weight + 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.spectrum_at_critical.kernel_dim, 2);
        assert!(a.triangle.unwrap().clustering_branch.is_some());
    }

    #[test]
    fn equal_gains_have_no_clustering_branch() {
        let a = analyze(&RunSpec::from_preset("periodic_drift").unwrap()).unwrap();
        assert_eq!(a.nu, 0.0);
        assert!(render(&a).contains("clustering manifold absent (nu = 0)"));
    }

    #[test]
    fn graphs_skip_the_triangle_section() {
        let a = analyze(&RunSpec::from_preset("ring(7)").unwrap()).unwrap();
        assert!(a.triangle.is_none());
        assert!(a.kernel_dim_ok);
        assert_eq!(a.critical_mode.len(), 7);
    }
}
