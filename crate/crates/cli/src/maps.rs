//! `maps`: direct evaluation of the blow-up transition maps.

use anyhow::{bail, Result};
use clap::{Args, Subcommand, ValueEnum};
use fastslow::blowup::{
    chart_map, gamma2_asymptote, k2_flow_numeric, pi1_map, pi2_map, pi2_threshold, BlowupError, Chart, ChartMap,
    ChartPoint, K2Flow, Transition,
};
use fastslow::specfun::{dawson, scaled_dawson};
use serde_json::{json, Value};

const FLOW_STEP: f64 = 1e-5;
const FLOW_THRESHOLD: f64 = 1e6;

#[derive(Debug, Subcommand)]
pub enum MapCommand {
    /// Entry-chart passage from eps1 to mu1 along the centre manifold.
    Pi1(Pi1Args),
    /// Rescaling-chart passage from y = delta to y = -delta.
    Pi2(Pi2Args),
    /// Asymptote of a blowing-up rescaling-chart orbit.
    Gamma2(Gamma2Args),
    /// Chart changes and their round trips.
    Charts(ChartArgs),
}

#[derive(Debug, Args)]
pub struct Pi1Args {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long)]
    pub eps1: f64,
    #[arg(long)]
    pub mu1: f64,
    #[arg(long)]
    pub nu: f64,
}

#[derive(Debug, Args)]
pub struct Pi2Args {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
}

#[derive(Debug, Args)]
pub struct Gamma2Args {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ChartArg {
    K1,
    K2,
    K3,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    #[arg(long, value_enum)]
    pub chart: ChartArg,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub c: f64,
    /// eps1 in K1, y2 in K2, eps3 in K3.
    #[arg(long, allow_negative_numbers = true)]
    pub coord: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
}

fn point_json(p: &ChartPoint) -> Value {
    serde_json::to_value(p).expect("chart point serializes")
}

fn with_condition(e: BlowupError) -> anyhow::Error {
    match e {
        BlowupError::Regime(msg) => anyhow::anyhow!("blow-up regime condition 1 + 4 a nu D(delta) <= 0 violated: {msg}"),
        other => anyhow::anyhow!("{other}"),
    }
}

pub fn evaluate(cmd: &MapCommand) -> Result<Value> {
    match cmd {
        MapCommand::Pi1(p) => {
            let t = pi1_map(p.a, p.delta, p.eps1, p.mu1, p.nu).map_err(with_condition)?;
            Ok(match t {
                Transition::Crossed(q) => json!({"map": "pi1", "result": "crossed", "exit": point_json(&q)}),
                Transition::IllDefined { reason } => json!({"map": "pi1", "result": "ill_defined", "reason": reason}),
                Transition::BlownUpAtAsymptote { gamma2 } => json!({"map": "pi1", "result": "blown_up", "gamma2": gamma2}),
            })
        }
        MapCommand::Pi2(p) => {
            let t = pi2_map(p.r, p.a, p.delta, p.nu).map_err(with_condition)?;
            let numeric = k2_flow_numeric(p.a, p.delta, -p.delta, p.nu, FLOW_STEP, FLOW_THRESHOLD);
            Ok(match (t, numeric) {
                (Transition::Crossed(q), K2Flow::Reached(a_num)) => json!({
                    "map": "pi2", "result": "crossed", "exit": point_json(&q),
                    "numeric_exit_a": a_num, "residual": (q.a - a_num).abs(),
                }),
                (Transition::BlownUpAtAsymptote { gamma2 }, K2Flow::Diverged(y_num)) => json!({
                    "map": "pi2", "result": "blown_up", "gamma2": gamma2,
                    "threshold_a": pi2_threshold(p.delta, p.nu),
                    "numeric_divergence_y": y_num, "residual": (gamma2 - y_num).abs(),
                }),
                (t, n) => bail!("closed form {t:?} disagrees with numerical flow {n:?}"),
            })
        }
        MapCommand::Gamma2(p) => {
            let g = gamma2_asymptote(p.a, p.delta, p.nu).map_err(with_condition)?;
            let c = (p.delta * p.delta).exp() * (1.0 / (2.0 * p.a * p.nu) + dawson(p.delta)?);
            let residual = (scaled_dawson(g)? - c).abs() / c.abs().max(1.0);
            let numeric = match k2_flow_numeric(p.a, p.delta, g - 1.0, p.nu, FLOW_STEP, FLOW_THRESHOLD) {
                K2Flow::Diverged(y) => Some(y),
                K2Flow::Reached(_) => None,
            };
            Ok(json!({
                "map": "gamma2", "gamma2": g, "residual": residual,
                "numeric_divergence_y": numeric,
            }))
        }
        MapCommand::Charts(p) => {
            let chart = match p.chart {
                ChartArg::K1 => Chart::K1,
                ChartArg::K2 => Chart::K2,
                ChartArg::K3 => Chart::K3,
            };
            let start = ChartPoint {
                chart,
                a: p.a,
                b: p.b,
                c: p.c,
                y_or_eps: p.coord,
                r: p.r,
            };
            let map = match chart {
                Chart::K1 => ChartMap::K12,
                Chart::K2 if p.coord >= 0.0 => ChartMap::K21,
                Chart::K2 => ChartMap::K23,
                Chart::K3 => ChartMap::K32,
            };
            let image = chart_map(map, &start)?;
            let back = chart_map(map.inverse(), &image)?;
            let err = [
                (start.a, back.a),
                (start.b, back.b),
                (start.c, back.c),
                (start.y_or_eps, back.y_or_eps),
                (start.r, back.r),
            ]
            .iter()
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
            Ok(json!({
                "map": format!("{map:?}"), "image": point_json(&image),
                "round_trip": point_json(&back), "round_trip_error": err,
            }))
        }
    }
}

/// `key = value` lines, nested objects flattened with dots.
pub fn render(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
            other => out.push_str(&format!("{prefix} = {other}\n")),
        }
    }
    let mut out = String::new();
    walk("", v, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi2_crossing_matches_flow() {
        let v = evaluate(&MapCommand::Pi2(Pi2Args { a: 0.5, delta: 1.0, nu: 1.0, r: 0.0 })).unwrap();
        assert_eq!(v["result"], "crossed");
        assert!(v["residual"].as_f64().unwrap() < 1e-6);
    }

    #[test]
    fn pi2_canard_stays_at_zero() {
        let v = evaluate(&MapCommand::Pi2(Pi2Args { a: 0.0, delta: 1.0, nu: 1.0, r: 0.0 })).unwrap();
        assert_eq!(v["exit"]["a"], 0.0);
    }

    #[test]
    fn gamma2_residual() {
        let v = evaluate(&MapCommand::Gamma2(Gamma2Args { a: -1.0, delta: 2.0, nu: 1.0 })).unwrap();
        assert!(v["residual"].as_f64().unwrap() < 1e-9);
        let g = v["gamma2"].as_f64().unwrap();
        assert!((v["numeric_divergence_y"].as_f64().unwrap() - g).abs() < 1e-2);
    }

    #[test]
    fn gamma2_outside_regime_names_condition() {
        let e = evaluate(&MapCommand::Gamma2(Gamma2Args { a: 0.5, delta: 1.0, nu: 1.0 })).unwrap_err();
        assert!(e.to_string().contains("1 + 4 a nu D(delta)"));
    }

    #[test]
    fn render_flattens() {
        let s = render(&json!({"a": 1, "b": {"c": "x"}}));
        assert_eq!(s, "a = 1\nb.c = x\n");
    }
}
