//! `run` and `compare`.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use fastslow::dynamics::singular_analysis;
use fastslow::integrate::{simulate, simulate_canard_aware, Termination, Trajectory};
use fastslow::scenarios::{CheckResult, Scenario};
use serde::Serialize;

use crate::config::{Emit, IntegratorKind, RunSpec};
use crate::output;

pub struct RunOutcome {
    pub passed: bool,
    pub report: String,
}

fn integrate(spec: &RunSpec, kind: IntegratorKind) -> Result<Trajectory> {
    let (cfg, canard) = spec.integrator_setup(kind);
    let s = &spec.scenario;
    Ok(if canard {
        simulate_canard_aware(&s.model, &s.ic, &cfg)?
    } else {
        simulate(&s.model, &s.ic, &cfg)?
    })
}

fn termination_text(t: Termination) -> String {
    match t {
        Termination::Completed => "completed".into(),
        Termination::NonFinite { t } => format!("diverged (non-finite state at t = {t})"),
    }
}

#[derive(Serialize)]
struct FinalState {
    t: f64,
    y: f64,
    w: f64,
    x: Vec<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    integrator: &'a str,
    passed: bool,
    diverged: bool,
    termination: Termination,
    switch_time: Option<f64>,
    final_state: FinalState,
    checks: &'a [CheckResult],
    singular_analysis: Option<fastslow::dynamics::SingularReport>,
}

fn report_text(s: &Scenario, kind: IntegratorKind, tr: &Trajectory, checks: &[CheckResult], diverged_fails: bool) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "# scenario: {}", s.name);
    let _ = writeln!(r, "# integrator: {}", kind.as_str());
    for line in s.describe().lines() {
        let _ = writeln!(r, "#   {line}");
    }
    let last = tr.last();
    let _ = writeln!(r, "# termination: {}", termination_text(tr.termination));
    match tr.switch_time {
        Some(t) => {
            let _ = writeln!(r, "# switch to reduced dynamics at t = {t}");
        }
        None => {
            let _ = writeln!(r, "# no switch to reduced dynamics");
        }
    }
    let _ = writeln!(
        r,
        "# final: t = {:.6}, y = {:.6}, w = {:.6e}, |a-b| = {:.6e}, x = {:?}",
        last.t,
        last.y,
        last.w,
        last.gap().abs(),
        tr.external(last)
    );
    match singular_analysis(&s.model) {
        Ok(rep) => {
            let _ = writeln!(
                r,
                "# singular point: y = {:.6}, critical weight = {:.6}, nu = {}",
                rep.singular_y(),
                rep.critical_weight,
                rep.nu
            );
        }
        Err(e) => {
            let _ = writeln!(r, "# singular analysis omitted: {e}");
        }
    }
    let total = checks.len() + usize::from(diverged_fails);
    let _ = writeln!(r, "1..{total}");
    for (k, c) in checks.iter().enumerate() {
        let status = if c.passed { "ok" } else { "not ok" };
        let _ = writeln!(r, "{status} {} - {} (measured {:e})", k + 1, c.name, c.measured);
    }
    if diverged_fails {
        let _ = writeln!(r, "not ok {total} - run diverged");
    }
    r
}

pub fn cmd_run(spec: &RunSpec, kind: IntegratorKind, out_flag: Option<&Path>) -> Result<RunOutcome> {
    let s = &spec.scenario;
    let dir = output::resolve_dir(out_flag, spec.out_dir.as_deref(), &s.name);
    let tr = integrate(spec, kind)?;
    let checks: Vec<CheckResult> = s.expectations.iter().map(|e| e.check(&tr, &s.model)).collect();
    let diverged_fails = tr.diverged() && !spec.allow_divergence;
    let passed = checks.iter().all(|c| c.passed) && !diverged_fails;
    let report = report_text(s, kind, &tr, &checks, diverged_fails);

    for emit in &spec.emit {
        match emit {
            Emit::TrajectoryCsv => output::write_trajectory(&dir.join("trajectory.csv"), &tr)?,
            Emit::ReportText => output::write_text(&dir.join("report.txt"), &report)?,
            Emit::Plotdata => output::write_plotdata(&dir.join("plotdata"), &tr)?,
            Emit::SummaryJson => {
                let last = tr.last();
                let summary = Summary {
                    scenario: &s.name,
                    integrator: kind.as_str(),
                    passed,
                    diverged: tr.diverged(),
                    termination: tr.termination,
                    switch_time: tr.switch_time,
                    final_state: FinalState {
                        t: last.t,
                        y: last.y,
                        w: last.w,
                        x: tr.external(last),
                    },
                    checks: &checks,
                    singular_analysis: singular_analysis(&s.model).ok(),
                };
                output::write_text(&dir.join("summary.json"), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            }
        }
    }
    Ok(RunOutcome { passed, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub integrator: &'static str,
    /// Largest |a − b| over samples with y < −1; NaN when y never gets there.
    pub max_gap_after_y_below_minus1: f64,
    pub switch_time: Option<f64>,
    pub final_t: f64,
    pub final_y: f64,
    pub final_gap: f64,
    pub diverged: bool,
}

/// Euler, RK4 and, on triangles with equal fixed weights, canard-aware.
fn compared(spec: &RunSpec) -> Vec<IntegratorKind> {
    let symmetric = spec.scenario.model.graph().triangle_weights().is_some_and(|(a, b)| a == b);
    let mut kinds = vec![IntegratorKind::Euler, IntegratorKind::Rk4];
    if symmetric {
        kinds.push(IntegratorKind::Canard);
    }
    kinds
}

pub fn compare_rows(spec: &RunSpec) -> Result<Vec<CompareRow>> {
    let kinds = compared(spec);
    let results: Vec<Result<Trajectory>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter().map(|&k| scope.spawn(move || integrate(spec, k))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("integration thread panicked"))))
            .collect()
    });
    kinds
        .iter()
        .zip(results)
        .map(|(&kind, tr)| {
            let tr = tr?;
            let last = tr.last();
            let max_gap = tr
                .samples
                .iter()
                .filter(|s| s.y < -1.0)
                .map(|s| s.gap().abs())
                .fold(f64::NAN, f64::max);
            Ok(CompareRow {
                integrator: kind.as_str(),
                max_gap_after_y_below_minus1: max_gap,
                switch_time: tr.switch_time,
                final_t: last.t,
                final_y: last.y,
                final_gap: last.gap().abs(),
                diverged: tr.diverged(),
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or("none".into(), |t| format!("{t:.6}"))
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut s = String::from("integrator,max_gap_after_y_below_-1,switch_time,final_t,final_y,final_gap,diverged\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{}",
            r.integrator,
            r.max_gap_after_y_below_minus1,
            r.switch_time.map_or(String::new(), |t| format!("{t:.16e}")),
            r.final_t,
            r.final_y,
            r.final_gap,
            r.diverged
        );
    }
    s
}

pub fn compare_table(name: &str, rows: &[CompareRow]) -> String {
    let mut s = format!("scenario: {name}\n");
    let _ = writeln!(
        s,
        "{:<10} {:>16} {:>12} {:>10} {:>10} {:>14} {:>9}",
        "integrator", "max|a-b| y<-1", "switch t", "final t", "final y", "final |a-b|", "diverged"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<10} {:>16.6e} {:>12} {:>10.3} {:>10.4} {:>14.6e} {:>9}",
            r.integrator,
            r.max_gap_after_y_below_minus1,
            opt(r.switch_time),
            r.final_t,
            r.final_y,
            r.final_gap,
            r.diverged
        );
    }
    if !rows.iter().any(|r| r.integrator == "canard") {
        s.push_str("canard-aware integration skipped: needs a triangle with equal fixed weights\n");
    }
    s
}

pub fn cmd_compare(spec: &RunSpec, out_flag: Option<&Path>) -> Result<String> {
    let dir = output::resolve_dir(out_flag, spec.out_dir.as_deref(), &spec.scenario.name);
    let rows = compare_rows(spec)?;
    let table = compare_table(&spec.scenario.name, &rows);
    output::write_text(&dir.join("compare.csv"), &compare_csv(&rows))?;
    output::write_text(&dir.join("compare.txt"), &table)?;
    Ok(table)
}
