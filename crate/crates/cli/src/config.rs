//! TOML run configuration and its resolution into a [`Scenario`].

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fastslow::dynamics::{Drift, FastSlowState, ModelParams};
use fastslow::integrate::{IntegratorConfig, Method};
use fastslow::network::{DynamicWeight, Graph};
use fastslow::scenarios::{build_preset, Expectation, PeriodicSearch, PresetName, Scenario};
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug)]
pub struct ConfigError {
    pub source_name: String,
    pub position: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some((line, col)) => write!(f, "{}:{line}:{col}: {}", self.source_name, self.message),
            None => write!(f, "{}: {}", self.source_name, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    Euler,
    Rk4,
    /// Canard-aware integration; needs a triangle with equal fixed weights.
    Canard,
}

impl IntegratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IntegratorKind::Euler => "euler",
            IntegratorKind::Rk4 => "rk4",
            IntegratorKind::Canard => "canard",
        }
    }

    fn from_method(m: Method) -> Self {
        match m {
            Method::ForwardEuler => IntegratorKind::Euler,
            Method::Rk4 => IntegratorKind::Rk4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    TrajectoryCsv,
    ReportText,
    SummaryJson,
    Plotdata,
}

pub const ALL_EMITS: [Emit; 4] = [Emit::TrajectoryCsv, Emit::ReportText, Emit::SummaryJson, Emit::Plotdata];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    #[serde(default)]
    scenario: RawScenario,
    model: Option<RawModel>,
    initial: Option<RawInitial>,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    output: RawOutput,
    expect: Option<Vec<Expectation>>,
    periodic: Option<RawPeriodic>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    preset: Option<String>,
    name: Option<String>,
    #[serde(default)]
    allow_divergence: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    nodes: usize,
    edges: Vec<(usize, usize, f64)>,
    dynamic_edge: (usize, usize),
    epsilon: f64,
    weight: RawWeight,
    #[serde(default)]
    drift: RawDrift,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    w_star: f64,
    alpha1: f64,
    alpha2: f64,
    cubic: Option<(f64, f64)>,
    #[serde(default = "yes")]
    uses_y: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawDrift {
    #[default]
    Constant,
    Quadratic {
        k1: f64,
    },
    Linear {
        beta: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    x: Vec<f64>,
    y: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    method: Option<IntegratorKind>,
    step: Option<StepKind>,
    dt: Option<f64>,
    t_end: Option<f64>,
    e_a: Option<f64>,
    record_stride: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    emit: Option<Vec<Emit>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPeriodic {
    section_y: f64,
    bracket: (f64, f64),
    t_max: f64,
}

/// A fully resolved run request.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub scenario: Scenario,
    pub integrator: IntegratorKind,
    pub allow_divergence: bool,
    pub out_dir: Option<PathBuf>,
    pub emit: Vec<Emit>,
}

impl RunSpec {
    pub fn from_preset(name: &str) -> Result<Self, ConfigError> {
        let err = |message: String| ConfigError {
            source_name: "--preset".into(),
            position: None,
            message,
        };
        let parsed: PresetName = name.parse().map_err(|e: fastslow::scenarios::ScenarioError| err(e.to_string()))?;
        let scenario = build_preset(parsed).map_err(|e| err(e.to_string()))?;
        Ok(Self {
            integrator: IntegratorKind::from_method(scenario.cfg.method),
            scenario,
            allow_divergence: false,
            out_dir: None,
            emit: ALL_EMITS.to_vec(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source_name: path.display().to_string(),
            position: None,
            message: e.to_string(),
        })?;
        parse_config(&text, &path.display().to_string())
    }

    /// Integrator config and canard flag for `kind`.
    pub fn integrator_setup(&self, kind: IntegratorKind) -> (IntegratorConfig, bool) {
        let cfg = self.scenario.cfg;
        match kind {
            IntegratorKind::Euler => (IntegratorConfig { method: Method::ForwardEuler, ..cfg }, false),
            IntegratorKind::Rk4 => (IntegratorConfig { method: Method::Rk4, ..cfg }, false),
            IntegratorKind::Canard => (cfg, true),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, col)
}

pub fn parse_config(text: &str, source_name: &str) -> Result<RunSpec, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
        source_name: source_name.into(),
        position: e.span().map(|s| line_col(text, s.start)),
        message: e.message().to_string(),
    })?;
    resolve(raw).map_err(|message| ConfigError {
        source_name: source_name.into(),
        position: None,
        message,
    })
}

fn resolve(raw: RawConfig) -> Result<RunSpec, String> {
    if raw.version != CONFIG_VERSION {
        return Err(format!("unsupported config version {} (expected {CONFIG_VERSION})", raw.version));
    }
    let mut scenario = match (&raw.scenario.preset, raw.model) {
        (Some(_), Some(_)) => return Err("give either scenario.preset or [model], not both".into()),
        (None, None) => return Err("missing scenario: set scenario.preset or add a [model] table".into()),
        (Some(name), None) => {
            let parsed: PresetName = name.parse().map_err(|e: fastslow::scenarios::ScenarioError| e.to_string())?;
            build_preset(parsed).map_err(|e| e.to_string())?
        }
        (None, Some(model)) => inline_scenario(model, raw.initial.as_ref(), &raw.integrator)?,
    };
    if let Some(name) = raw.scenario.name {
        scenario.name = name;
    }
    if let Some(init) = &raw.initial {
        scenario.ic = initial_state(scenario.model.graph(), init)?;
    }
    let int = &raw.integrator;
    let cfg = &mut scenario.cfg;
    if let Some(dt) = int.dt {
        cfg.dt = dt;
    }
    if let Some(t_end) = int.t_end {
        cfg.t_end = t_end;
    }
    if let Some(e_a) = int.e_a {
        cfg.e_a = e_a;
    }
    if let Some(stride) = int.record_stride {
        cfg.record_stride = stride;
    }
    match (int.method, int.step) {
        (Some(IntegratorKind::Euler), _) | (Some(IntegratorKind::Canard), None) => cfg.method = Method::ForwardEuler,
        (Some(IntegratorKind::Rk4), _) => cfg.method = Method::Rk4,
        (Some(IntegratorKind::Canard), Some(StepKind::Rk4)) => cfg.method = Method::Rk4,
        (Some(IntegratorKind::Canard), Some(StepKind::Euler)) => cfg.method = Method::ForwardEuler,
        (None, Some(_)) => return Err("integrator.step only applies with method = \"canard\"".into()),
        (None, None) => {}
    }
    cfg.validate().map_err(|e| e.to_string())?;
    let integrator = int.method.unwrap_or(IntegratorKind::from_method(cfg.method));
    if let Some(expect) = raw.expect {
        scenario.expectations = expect;
    }
    if let Some(p) = raw.periodic {
        scenario.periodic = Some(PeriodicSearch {
            section_y: p.section_y,
            bracket: p.bracket,
            t_max: p.t_max,
        });
    }
    Ok(RunSpec {
        scenario,
        integrator,
        allow_divergence: raw.scenario.allow_divergence,
        out_dir: raw.output.dir,
        emit: raw.output.emit.unwrap_or_else(|| ALL_EMITS.to_vec()),
    })
}

fn inline_scenario(m: RawModel, initial: Option<&RawInitial>, int: &RawIntegrator) -> Result<Scenario, String> {
    let zero_based = |i: usize| {
        if i == 0 || i > m.nodes {
            Err(format!("node index {i} out of range 1..={}", m.nodes))
        } else {
            Ok(i - 1)
        }
    };
    let edges = m
        .edges
        .iter()
        .map(|&(i, j, w)| Ok((zero_based(i)?, zero_based(j)?, w)))
        .collect::<Result<Vec<_>, String>>()?;
    let dynamic = (zero_based(m.dynamic_edge.0)?, zero_based(m.dynamic_edge.1)?);
    let graph = Graph::new(m.nodes, &edges, dynamic).map_err(|e| e.to_string())?;
    let mut weight = DynamicWeight::new(m.weight.w_star, m.weight.alpha1, m.weight.alpha2).map_err(|e| e.to_string())?;
    if let Some((a3, a4)) = m.weight.cubic {
        weight = weight.with_cubic(a3, a4).map_err(|e| e.to_string())?;
    }
    if !m.weight.uses_y {
        weight = weight.without_y();
    }
    let drift = match m.drift {
        RawDrift::Constant => Drift::Constant,
        RawDrift::Quadratic { k1 } => Drift::Quadratic { k1 },
        RawDrift::Linear { beta } => Drift::Linear { beta },
    };
    let init = initial.ok_or("inline models need an [initial] table")?;
    let ic = initial_state(&graph, init)?;
    let (Some(dt), Some(t_end)) = (int.dt, int.t_end) else {
        return Err("inline models need integrator.dt and integrator.t_end".into());
    };
    let model = ModelParams::new(graph, weight, m.epsilon, drift).map_err(|e| e.to_string())?;
    Ok(Scenario {
        name: "custom".into(),
        model,
        ic,
        cfg: IntegratorConfig::new(Method::ForwardEuler, dt, t_end),
        expectations: Vec::new(),
        periodic: None,
    })
}

fn initial_state(graph: &Graph, init: &RawInitial) -> Result<FastSlowState, String> {
    if init.x.len() != graph.node_count() {
        return Err(format!(
            "initial.x has {} entries, the graph has {} nodes",
            init.x.len(),
            graph.node_count()
        ));
    }
    Ok(FastSlowState::new(graph.to_internal(&init.x), init.y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_with_overrides() {
        let spec = parse_config(
            "version = 1\n[scenario]\npreset = \"triangle_y20\"\n[integrator]\nmethod = \"canard\"\nt_end = 5.0\n",
            "t",
        )
        .unwrap();
        assert_eq!(spec.integrator, IntegratorKind::Canard);
        assert_eq!(spec.scenario.cfg.t_end, 5.0);
        assert_eq!(spec.scenario.ic.y, 2.0);
        assert_eq!(spec.emit, ALL_EMITS.to_vec());
    }

    #[test]
    fn inline_model_uses_one_based_labels() {
        let text = r#"
version = 1
[model]
nodes = 3
edges = [[1, 3, 2.0], [2, 3, 1.0]]
dynamic_edge = [1, 2]
epsilon = 0.05
[model.weight]
w_star = -0.5
alpha1 = 2.0
alpha2 = 1.0
[initial]
x = [0.1, -0.1, 0.0]
y = 0.5
[integrator]
dt = 1e-3
t_end = 1.0
"#;
        let spec = parse_config(text, "t").unwrap();
        assert_eq!(spec.scenario.model.graph().triangle_weights(), Some((2.0, 1.0)));
        assert_eq!(spec.integrator, IntegratorKind::Euler);
        assert!(spec.scenario.expectations.is_empty());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_config("version = 1\n[scenario\npreset = 1\n", "bad.toml").unwrap_err();
        assert_eq!(err.position.map(|p| p.0), Some(2));
        let err = parse_config("version = 1\n[scenario]\npreset = \"triangle_y19\"\ncolour = 3\n", "bad.toml").unwrap_err();
        assert_eq!(err.position.map(|p| p.0), Some(4));
    }

    #[test]
    fn semantic_errors() {
        for text in [
            "version = 2\n[scenario]\npreset = \"ring(7)\"\n",
            "version = 1\n",
            "version = 1\n[scenario]\npreset = \"ring(2)\"\n",
            "version = 1\n[scenario]\npreset = \"ring(7)\"\n[integrator]\ndt = 0.0\n",
            "version = 1\n[scenario]\npreset = \"ring(7)\"\n[initial]\nx = [1.0]\ny = 0.0\n",
        ] {
            assert!(parse_config(text, "t").is_err(), "{text}");
        }
    }
}
