//! Preset experiments, expectation checks and periodic-orbit search.

use crate::dynamics::{Drift, DynamicsError, FastSlowState, ModelParams};
use crate::integrate::{
    simulate, simulate_canard_aware, IntegrateError, IntegratorConfig, Method, Sample, Trajectory,
};
use crate::network::{DynamicWeight, Graph, NetworkError};
use crate::roots;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("graph families need n >= 3, got {0}")]
    TooSmall(usize),
    #[error("no return to the section within t = {0}")]
    NoReturn(f64),
    #[error("drift vanishes on the section at a = {0}")]
    TangentSection(f64),
    #[error("periodic orbit not found: {0}")]
    NotFound(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PresetName {
    TriangleY19,
    TriangleY20,
    TriangleNonsym(f64, f64),
    Ring(usize),
    Star(usize),
    Complete(usize),
    PeriodicDrift,
    PeriodicCubic,
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresetName::TriangleY19 => write!(f, "triangle_y19"),
            PresetName::TriangleY20 => write!(f, "triangle_y20"),
            PresetName::TriangleNonsym(a, b) => write!(f, "triangle_nonsym({a},{b})"),
            PresetName::Ring(n) => write!(f, "ring({n})"),
            PresetName::Star(n) => write!(f, "star({n})"),
            PresetName::Complete(n) => write!(f, "complete({n})"),
            PresetName::PeriodicDrift => write!(f, "periodic_drift"),
            PresetName::PeriodicCubic => write!(f, "periodic_cubic"),
        }
    }
}

impl FromStr for PresetName {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ScenarioError::UnknownPreset(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (head, args) = match compact.find('(') {
            Some(i) if compact.ends_with(')') => (&compact[..i], Some(&compact[i + 1..compact.len() - 1])),
            Some(_) => return Err(unknown()),
            None => (compact.as_str(), None),
        };
        let count = |args: Option<&str>| -> Result<usize, ScenarioError> {
            args.and_then(|a| a.parse().ok()).ok_or_else(unknown)
        };
        match (head, args) {
            ("triangle_y19", None) => Ok(PresetName::TriangleY19),
            ("triangle_y20", None) => Ok(PresetName::TriangleY20),
            ("triangle_nonsym", None) => Ok(PresetName::TriangleNonsym(2.0, 1.0)),
            ("triangle_nonsym", Some(a)) => {
                let v: Vec<f64> = a.split(',').map(|t| t.parse()).collect::<Result<_, _>>().map_err(|_| unknown())?;
                match v.as_slice() {
                    [w13, w23] => Ok(PresetName::TriangleNonsym(*w13, *w23)),
                    _ => Err(unknown()),
                }
            }
            ("ring", a) => Ok(PresetName::Ring(count(a)?)),
            ("star", a) => Ok(PresetName::Star(count(a)?)),
            ("complete", a) => Ok(PresetName::Complete(count(a)?)),
            ("periodic_drift", None) => Ok(PresetName::PeriodicDrift),
            ("periodic_cubic", None) => Ok(PresetName::PeriodicCubic),
            _ => Err(unknown()),
        }
    }
}

/// Machine-checkable property of a trajectory. Gaps refer to a − b on the
/// dynamic edge; norms are Euclidean over all nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expectation {
    /// |c − (a+b)/2| drops below `tol` before `before_t`.
    #[serde(rename = "attracted_to_A")]
    AttractedToA { before_t: f64, tol: f64 },
    /// |a − b| < `tol` at some sample with y > 0.
    ConsensusWhileYPositive { tol: f64 },
    /// |a − b| > `gap` at some sample where w < `weight_below`.
    ReachesClustering { gap: f64, weight_below: f64 },
    /// ‖x‖ falls below `near`, then exceeds `far` only once the weight on
    /// the consensus state is past its critical value.
    ConsensusThenClustering { near: f64, far: f64 },
    /// |Σx(t) − Σx(0)| < `tol` along the run.
    ConservesSum { tol: f64 },
    /// Max-norm of x stays below `limit` and the run completes.
    Bounded { limit: f64 },
    /// y crosses `section_y` upward at least `min_crossings` times.
    Recurrent { section_y: f64, min_crossings: usize },
}

impl Expectation {
    pub fn name(&self) -> &'static str {
        match self {
            Expectation::AttractedToA { .. } => "attracted_to_A",
            Expectation::ConsensusWhileYPositive { .. } => "consensus_while_y_positive",
            Expectation::ReachesClustering { .. } => "reaches_clustering",
            Expectation::ConsensusThenClustering { .. } => "consensus_then_clustering",
            Expectation::ConservesSum { .. } => "conserves_sum",
            Expectation::Bounded { .. } => "bounded",
            Expectation::Recurrent { .. } => "recurrent",
        }
    }

    pub fn check(&self, tr: &Trajectory, model: &ModelParams) -> CheckResult {
        let s = &tr.samples;
        let (passed, measured) = match *self {
            Expectation::AttractedToA { before_t, tol } => {
                let m = s.iter().filter(|x| x.t < before_t).map(|x| x.dist_a).fold(f64::INFINITY, f64::min);
                (m < tol, m)
            }
            Expectation::ConsensusWhileYPositive { tol } => {
                let m = s
                    .iter()
                    .filter(|x| x.y > 0.0)
                    .map(|x| x.gap().abs())
                    .fold(f64::INFINITY, f64::min);
                (m < tol, m)
            }
            Expectation::ReachesClustering { gap, weight_below } => {
                let m = s
                    .iter()
                    .filter(|x| x.w < weight_below)
                    .map(|x| x.gap().abs())
                    .fold(0.0, f64::max);
                (m > gap, m)
            }
            Expectation::ConsensusThenClustering { near, far } => {
                let y_crit = model.graph().critical_weight() - model.weight().w_star();
                consensus_then_clustering(s, near, far, y_crit)
            }
            Expectation::ConservesSum { tol } => {
                let s0: f64 = s[0].x.iter().sum();
                let m = s
                    .iter()
                    .map(|x| (x.x.iter().sum::<f64>() - s0).abs())
                    .fold(0.0, f64::max);
                (m < tol, m)
            }
            Expectation::Bounded { limit } => {
                let m = s
                    .iter()
                    .flat_map(|x| x.x.iter())
                    .fold(0.0f64, |acc, v| acc.max(v.abs()));
                (m < limit && !tr.diverged(), m)
            }
            Expectation::Recurrent { section_y, min_crossings } => {
                let n = s.windows(2).filter(|p| p[0].y < section_y && p[1].y >= section_y).count();
                (n >= min_crossings, n as f64)
            }
        };
        CheckResult {
            name: self.name().to_string(),
            passed,
            measured,
        }
    }
}

/// Measured value is the y at departure, NaN when either phase is missing.
fn consensus_then_clustering(s: &[Sample], near: f64, far: f64, y_crit: f64) -> (bool, f64) {
    let Some(i) = s.iter().position(|x| x.norm() < near) else {
        return (false, f64::NAN);
    };
    match s[i..].iter().find(|x| x.norm() > far) {
        Some(dep) => (dep.y < y_crit, dep.y),
        None => (false, f64::NAN),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
}

/// Where to look for a periodic orbit: section y = `section_y`, fixed-point
/// search over `bracket` in a, at most `t_max` per return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicSearch {
    pub section_y: f64,
    pub bracket: (f64, f64),
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: ModelParams,
    pub ic: FastSlowState,
    pub cfg: IntegratorConfig,
    pub expectations: Vec<Expectation>,
    pub periodic: Option<PeriodicSearch>,
}

impl Scenario {
    /// Stable plain-text listing of every parameter, 1-based node labels.
    pub fn describe(&self) -> String {
        use fmt::Write;
        let g = self.model.graph();
        let w = self.model.weight();
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("name = {}", self.name));
        line(format!("nodes = {}", g.node_count()));
        let (d0, d1) = g.dynamic_edge();
        line(format!("dynamic_edge = ({}, {})", d0 + 1, d1 + 1));
        let mut edges = String::new();
        for (k, (i, j, wt)) in g.external_edges().into_iter().enumerate() {
            let sep = if k == 0 { "" } else { " " };
            let _ = write!(edges, "{sep}({},{},{wt})", i + 1, j + 1);
        }
        line(format!("fixed_edges = {edges}"));
        line(format!(
            "weight = w_star {} alpha1 {} alpha2 {} cubic {:?} uses_y {}",
            w.w_star(),
            w.alpha1(),
            w.alpha2(),
            w.cubic(),
            w.uses_y()
        ));
        line(format!("epsilon = {}", self.model.epsilon()));
        line(format!("drift = {:?}", self.model.drift()));
        line(format!("x0 = {:?}", g.to_external(&self.ic.x)));
        line(format!("y0 = {}", self.ic.y));
        line(format!(
            "integrator = {:?} dt {} t_end {} e_a {} stride {}",
            self.cfg.method, self.cfg.dt, self.cfg.t_end, self.cfg.e_a, self.cfg.record_stride
        ));
        for e in &self.expectations {
            line(format!("expect = {e:?}"));
        }
        if let Some(p) = self.periodic {
            line(format!("periodic = section {} bracket {:?} t_max {}", p.section_y, p.bracket, p.t_max));
        }
        out
    }
}

fn triangle_config(t_end: f64) -> IntegratorConfig {
    IntegratorConfig {
        record_stride: 10,
        ..IntegratorConfig::new(Method::ForwardEuler, 1e-3, t_end)
    }
}

fn triangle_checks() -> Vec<Expectation> {
    vec![
        Expectation::AttractedToA { before_t: 10.0, tol: 1e-6 },
        Expectation::ConsensusWhileYPositive { tol: 1e-4 },
        Expectation::ReachesClustering { gap: 0.1, weight_below: -1.0 },
        Expectation::ConservesSum { tol: 1e-9 },
    ]
}

/// Amplitude of the initial split on the dynamic edge for graph families.
pub const GRAPH_IC_AMPLITUDE: f64 = 5e-3;

pub fn preset(name: &str) -> Result<Scenario, ScenarioError> {
    build_preset(name.parse()?)
}

pub fn build_preset(name: PresetName) -> Result<Scenario, ScenarioError> {
    let label = name.to_string();
    let fig_ic = vec![1.5, 1.0, -2.5];
    match name {
        PresetName::TriangleY19 | PresetName::TriangleY20 => {
            let y0 = if name == PresetName::TriangleY19 { 1.9 } else { 2.0 };
            let model = ModelParams::new(
                Graph::unit_triangle(),
                DynamicWeight::new(-0.5, 2.0, 1.0)?,
                0.05,
                Drift::Constant,
            )?;
            Ok(Scenario {
                name: label,
                model,
                ic: FastSlowState::new(fig_ic, y0),
                cfg: triangle_config(100.0),
                expectations: triangle_checks(),
                periodic: None,
            })
        }
        PresetName::TriangleNonsym(w13, w23) => {
            let graph = Graph::triangle(w13, w23)?;
            let w_star = crate::network::critical_weight_star(w13, w23)?;
            let weight = DynamicWeight::new(w_star, 2.0, 1.0)?;
            let ic = graph_initial_state(&graph, &weight, GRAPH_IC_AMPLITUDE, 0.5);
            let model = ModelParams::new(graph, weight, 0.05, Drift::Constant)?;
            Ok(Scenario {
                name: label,
                model,
                ic,
                cfg: triangle_config(100.0),
                expectations: vec![
                    Expectation::ConsensusThenClustering { near: 1e-3, far: 0.1 },
                    Expectation::ConservesSum { tol: 1e-9 },
                ],
                periodic: None,
            })
        }
        PresetName::Ring(n) | PresetName::Star(n) | PresetName::Complete(n) => {
            if n < 3 {
                return Err(ScenarioError::TooSmall(n));
            }
            let graph = match name {
                PresetName::Ring(_) => Graph::ring(n)?,
                PresetName::Star(_) => Graph::star(n)?,
                _ => Graph::complete(n)?,
            };
            let weight = DynamicWeight::new(0.0, 2.0, 1.0)?;
            let ic = graph_initial_state(&graph, &weight, GRAPH_IC_AMPLITUDE, 0.5);
            let model = ModelParams::new(graph, weight, 0.05, Drift::Constant)?;
            Ok(Scenario {
                name: label,
                model,
                ic,
                cfg: IntegratorConfig {
                    record_stride: 10,
                    ..IntegratorConfig::new(Method::ForwardEuler, 1e-3, 150.0)
                },
                expectations: vec![
                    Expectation::ConsensusThenClustering { near: 1e-3, far: 0.1 },
                    Expectation::ConservesSum { tol: 1e-9 },
                    Expectation::Bounded { limit: 1e3 },
                ],
                periodic: None,
            })
        }
        PresetName::PeriodicDrift => {
            let model = ModelParams::new(
                Graph::unit_triangle(),
                DynamicWeight::new(-0.5, 1.0, 1.0)?,
                0.05,
                Drift::Quadratic { k1: 1.0 },
            )?;
            Ok(Scenario {
                name: label,
                model,
                ic: FastSlowState::new(vec![0.5, -0.25, -0.25], 0.5),
                cfg: IntegratorConfig {
                    record_stride: 10,
                    ..IntegratorConfig::new(Method::Rk4, 1e-3, 200.0)
                },
                expectations: vec![
                    Expectation::Recurrent { section_y: 0.5, min_crossings: 3 },
                    Expectation::ConservesSum { tol: 1e-9 },
                    Expectation::Bounded { limit: 1e2 },
                ],
                periodic: Some(PeriodicSearch {
                    section_y: 0.5,
                    bracket: (0.2, 0.8),
                    t_max: 500.0,
                }),
            })
        }
        PresetName::PeriodicCubic => {
            let model = ModelParams::new(
                Graph::unit_triangle(),
                DynamicWeight::new(-0.5, 2.0, 1.0)?.with_cubic(1.0, 1.01)?,
                0.05,
                Drift::Linear { beta: -0.5 },
            )?;
            Ok(Scenario {
                name: label,
                model,
                ic: FastSlowState::new(vec![-0.5, 0.5, 0.0], 1.0),
                cfg: IntegratorConfig {
                    record_stride: 10,
                    ..IntegratorConfig::new(Method::Rk4, 1e-3, 700.0)
                },
                expectations: vec![
                    Expectation::Recurrent { section_y: 2.0, min_crossings: 3 },
                    Expectation::ConservesSum { tol: 1e-9 },
                    Expectation::Bounded { limit: 1e2 },
                ],
                periodic: Some(PeriodicSearch {
                    section_y: 2.0,
                    bracket: (-10.0, -7.0),
                    t_max: 1000.0,
                }),
            })
        }
    }
}

/// x = ±amp·(e₁ − e₂), with the sign chosen so the critical mode leaves
/// consensus towards the clustering branch that exists past the singular
/// point, i.e. sign(α₁v₁ + α₂v₂) for the critical mode v.
pub fn graph_initial_state(graph: &Graph, weight: &DynamicWeight, amp: f64, y0: f64) -> FastSlowState {
    let v = graph.critical_mode();
    let slope = weight.alpha1() * v[0] + weight.alpha2() * v[1];
    let sign = if slope < 0.0 { -1.0 } else { 1.0 };
    let mut x = vec![0.0; graph.node_count()];
    x[0] = sign * amp;
    x[1] = -sign * amp;
    FastSlowState::new(x, y0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub trajectory: Trajectory,
    pub checks: Vec<CheckResult>,
}

impl ScenarioRun {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_scenario(s: &Scenario, use_canard_aware: bool) -> Result<ScenarioRun, ScenarioError> {
    let trajectory = if use_canard_aware {
        simulate_canard_aware(&s.model, &s.ic, &s.cfg)?
    } else {
        simulate(&s.model, &s.ic, &s.cfg)?
    };
    let checks = s.expectations.iter().map(|e| e.check(&trajectory, &s.model)).collect();
    Ok(ScenarioRun { trajectory, checks })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Return {
    pub a: f64,
    pub time: f64,
    /// State at the return, internal order.
    pub x: Vec<f64>,
}

/// Integrates from (a0, −a0, 0) on y = `section_y` until y next crosses the
/// section in the same direction it starts moving. RK4 at the scenario dt;
/// the crossing is located by linear interpolation.
pub fn return_map_full(s: &Scenario, section_y: f64, a0: f64, t_max: f64) -> Result<Return, ScenarioError> {
    let mut x = vec![0.0; s.model.node_count()];
    x[0] = a0;
    x[1] = -a0;
    let g0 = s.model.drift().eval(a0);
    if g0 == 0.0 || s.model.epsilon() == 0.0 {
        return Err(ScenarioError::TangentSection(a0));
    }
    let up = g0 > 0.0;
    let dt = s.cfg.dt;
    let n = (t_max / dt).ceil() as usize;
    let mut state = FastSlowState::new(x, section_y);
    let mut left = false;
    for k in 0..n {
        let next = crate::integrate::rk4_step(&state, &s.model, dt)?;
        if !next.is_finite() {
            return Err(ScenarioError::NoReturn(next.t));
        }
        let before = state.y - section_y;
        let after = next.y - section_y;
        let crossed = if up { before < 0.0 && after >= 0.0 } else { before > 0.0 && after <= 0.0 };
        if left && crossed {
            let theta = before / (before - after);
            let xr: Vec<f64> = state.x.iter().zip(&next.x).map(|(&u, &v)| u + theta * (v - u)).collect();
            return Ok(Return {
                a: xr[0],
                time: (k as f64 + theta) * dt,
                x: xr,
            });
        }
        if !left && (if up { after < 0.0 } else { after > 0.0 }) {
            left = true;
        }
        state = next;
    }
    Err(ScenarioError::NoReturn(t_max))
}

/// Fast coordinate a at the next same-direction crossing of y = `section_y`.
pub fn return_map(s: &Scenario, section_y: f64, a0: f64) -> Result<f64, ScenarioError> {
    let t_max = s.periodic.map_or(1000.0, |p| p.t_max);
    Ok(return_map_full(s, section_y, a0, t_max)?.a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub a_star: f64,
    pub period: f64,
    /// Max-norm mismatch of (x, y) after one period.
    pub closure_error: f64,
}

const FIXED_POINT_TOL: f64 = 1e-7;
const CLOSURE_TOL: f64 = 1e-4;

/// Fixed point of the return map in the scenario's bracket.
///
/// The bracket is sampled first; a sample that already returns within
/// 1e-7 is accepted directly (families of closed orbits make the residual
/// vanish identically). Otherwise a sign change is refined.
pub fn find_periodic_orbit(s: &Scenario) -> Result<PeriodicOrbit, ScenarioError> {
    let search = s
        .periodic
        .ok_or_else(|| ScenarioError::NotFound("scenario has no periodic search".into()))?;
    let (lo, hi) = search.bracket;
    let residual = |a: f64| return_map_full(s, search.section_y, a, search.t_max).map(|r| r.a - a);
    let samples: Vec<(f64, Option<f64>)> = (0..=8)
        .map(|k| {
            let a = lo + (hi - lo) * k as f64 / 8.0;
            (a, residual(a).ok())
        })
        .collect();
    let best = samples
        .iter()
        .filter_map(|&(a, r)| r.map(|r| (a, r)))
        .min_by(|p, q| p.1.abs().total_cmp(&q.1.abs()));
    let a_star = match best {
        None => return Err(ScenarioError::NotFound("no return from any point in the bracket".into())),
        Some((a, r)) if r.abs() < FIXED_POINT_TOL => a,
        Some(_) => {
            let pair = samples.windows(2).find_map(|w| match (w[0].1, w[1].1) {
                (Some(r0), Some(r1)) if r0.signum() != r1.signum() => Some((w[0].0, w[1].0)),
                _ => None,
            });
            let (a0, a1) = pair.ok_or_else(|| ScenarioError::NotFound("no sign change of the residual".into()))?;
            roots::illinois(
                |a| residual(a).map_or(f64::NAN, |r| r),
                a0,
                a1,
                1e-12,
                FIXED_POINT_TOL,
                100,
            )
            .map_err(|e| ScenarioError::NotFound(e.to_string()))?
        }
    };
    let ret = return_map_full(s, search.section_y, a_star, search.t_max)?;
    let mut start = vec![0.0; s.model.node_count()];
    start[0] = a_star;
    start[1] = -a_star;
    let closure_error = ret.x.iter().zip(&start).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    if closure_error > CLOSURE_TOL {
        return Err(ScenarioError::NotFound(format!("orbit does not close: mismatch {closure_error:.3e}")));
    }
    Ok(PeriodicOrbit {
        a_star,
        period: ret.time,
        closure_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("ring(7)".parse::<PresetName>().unwrap(), PresetName::Ring(7));
        assert_eq!(
            "triangle_nonsym(2, 1)".parse::<PresetName>().unwrap(),
            PresetName::TriangleNonsym(2.0, 1.0)
        );
        for bad in ["ring", "ring(x)", "triangle_y21", "star(3", "triangle_nonsym(1)"] {
            assert!(bad.parse::<PresetName>().is_err(), "{bad}");
        }
        for name in ["triangle_y19", "ring(16)", "periodic_cubic", "triangle_nonsym(2,1)"] {
            assert_eq!(name.parse::<PresetName>().unwrap().to_string(), name);
        }
    }

    #[test]
    fn preset_parameters() {
        let s = preset("triangle_y19").unwrap();
        assert_eq!(s.model.epsilon(), 0.05);
        assert_eq!(s.ic.y, 1.9);
        let r = preset("ring(7)").unwrap();
        assert_eq!((r.model.weight().alpha1(), r.model.weight().alpha2()), (2.0, 1.0));
        assert!(r.model.graph().fixed_edges().iter().all(|e| e.2 == 1.0));
        assert_eq!(preset("periodic_cubic").unwrap().model.weight().cubic(), Some((1.0, 1.01)));
        assert!(matches!(preset("ring(2)"), Err(ScenarioError::TooSmall(2))));
        assert!(preset("nope").is_err());
    }

    #[test]
    fn graph_ics_sum_to_zero_and_point_to_clustering() {
        for name in ["ring(7)", "ring(16)", "star(11)", "complete(6)"] {
            let s = preset(name).unwrap();
            assert_eq!(s.ic.x.iter().sum::<f64>(), 0.0);
            let v = s.model.graph().critical_mode();
            let proj: f64 = s.ic.x.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            let slope = 2.0 * v[0] + v[1];
            assert!(proj * slope > 0.0, "{name}");
        }
    }

    #[test]
    fn canard_line_never_returns() {
        let s = preset("periodic_drift").unwrap();
        assert!(matches!(return_map_full(&s, 0.5, 0.0, 50.0), Err(ScenarioError::NoReturn(_))));
    }
}
