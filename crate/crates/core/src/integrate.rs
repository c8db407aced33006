//! Fixed-step integrators for the full system, the canard-aware variant that
//! switches to the dynamics on the set c = (a+b)/2, and section crossings.

use crate::dynamics::{distance_to_a, DynamicsError, FastSlowState, ModelParams};
use serde::Serialize;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("invalid integrator config: {0}")]
    Config(&'static str),
    #[error("canard-aware integration needs a triangle with equal fixed weights")]
    NotSymmetricTriangle,
    #[error("step budget of {0} steps exceeded")]
    StepBudget(usize),
    #[error("entry state must lie on y = delta")]
    EntryOffSection,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ForwardEuler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    /// Switch threshold on |c − (a+b)/2| for the canard-aware integrator.
    pub e_a: f64,
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_end: f64) -> Self {
        Self {
            method,
            dt,
            t_end,
            e_a: 1e-9,
            record_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(IntegrateError::Config("dt must be positive"));
        }
        if !(3.0 * self.dt < 2.0) {
            return Err(IntegrateError::Config("dt must satisfy 3 dt < 2"));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(IntegrateError::Config("t_end must be finite and non-negative"));
        }
        if !(self.e_a > 0.0) {
            return Err(IntegrateError::Config("e_a must be positive"));
        }
        if self.record_stride == 0 {
            return Err(IntegrateError::Config("record_stride must be positive"));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    FullSystem,
    ReducedOnA,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::FullSystem => "FullSystem",
            Phase::ReducedOnA => "ReducedOnA",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Node states in internal order.
    pub x: Vec<f64>,
    pub y: f64,
    pub w: f64,
    /// NaN unless the graph has three nodes.
    pub dist_a: f64,
    pub phase: Phase,
}

impl Sample {
    /// a − b for the two dynamic-edge nodes.
    pub fn gap(&self) -> f64 {
        self.x[0] - self.x[1]
    }

    pub fn norm(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    Completed,
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub switch_time: Option<f64>,
    labels: Vec<usize>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory is never empty")
    }

    pub fn diverged(&self) -> bool {
        matches!(self.termination, Termination::NonFinite { .. })
    }

    /// Node states of a sample in external order.
    pub fn external(&self, s: &Sample) -> Vec<f64> {
        let mut out = vec![0.0; s.x.len()];
        for (k, &v) in s.x.iter().enumerate() {
            out[self.labels[k]] = v;
        }
        out
    }

    /// CSV with header `t,x1,…,xm,y,w,dist_A,phase`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let m = self.labels.len();
        let mut header = String::from("t");
        for k in 1..=m {
            header.push_str(&format!(",x{k}"));
        }
        writeln!(out, "{header},y,w,dist_A,phase")?;
        for s in &self.samples {
            write!(out, "{:.16e}", s.t)?;
            for v in self.external(s) {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out, ",{:.16e},{:.16e},{:.16e},{}", s.y, s.w, s.dist_a, s.phase.as_str())?;
        }
        Ok(())
    }
}

struct Stepper<'a> {
    p: &'a ModelParams,
    lbuf: Vec<f64>,
    k: [Vec<f64>; 4],
    ky: [f64; 4],
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(p: &'a ModelParams) -> Self {
        let m = p.node_count();
        Self {
            p,
            lbuf: vec![0.0; m * m],
            k: std::array::from_fn(|_| vec![0.0; m]),
            ky: [0.0; 4],
            tmp: vec![0.0; m],
        }
    }

    fn step(&mut self, method: Method, x: &mut [f64], y: &mut f64, dt: f64) {
        match method {
            Method::ForwardEuler => self.euler(x, y, dt),
            Method::Rk4 => self.rk4(x, y, dt),
        }
    }

    fn euler(&mut self, x: &mut [f64], y: &mut f64, dt: f64) {
        let dy = self.p.field_into(x, *y, &mut self.lbuf, &mut self.k[0]);
        for (xi, ki) in x.iter_mut().zip(&self.k[0]) {
            *xi += dt * ki;
        }
        *y += dt * dy;
    }

    fn rk4(&mut self, x: &mut [f64], y: &mut f64, dt: f64) {
        let offsets = [0.0, 0.5 * dt, 0.5 * dt, dt];
        for s in 0..4 {
            let yy = if s == 0 { *y } else { *y + offsets[s] * self.ky[s - 1] };
            if s == 0 {
                self.tmp.copy_from_slice(x);
            } else {
                let (prev, _) = self.k.split_at(s);
                for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(&prev[s - 1]) {
                    *t = xi + offsets[s] * ki;
                }
            }
            self.ky[s] = self.p.field_into(&self.tmp, yy, &mut self.lbuf, &mut self.k[s]);
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += dt / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
        *y += dt / 6.0 * (self.ky[0] + 2.0 * self.ky[1] + 2.0 * self.ky[2] + self.ky[3]);
    }
}

/// One forward Euler step: x ← x + dt·(−Lx), y ← y + dt·εg.
pub fn euler_step(s: &FastSlowState, p: &ModelParams, dt: f64) -> Result<FastSlowState, IntegrateError> {
    single_step(s, p, dt, Method::ForwardEuler)
}

pub fn rk4_step(s: &FastSlowState, p: &ModelParams, dt: f64) -> Result<FastSlowState, IntegrateError> {
    single_step(s, p, dt, Method::Rk4)
}

fn single_step(s: &FastSlowState, p: &ModelParams, dt: f64, method: Method) -> Result<FastSlowState, IntegrateError> {
    p.check_dim(&s.x)?;
    let mut x = s.x.clone();
    let mut y = s.y;
    Stepper::new(p).step(method, &mut x, &mut y, dt);
    Ok(FastSlowState { x, y, t: s.t + dt })
}

fn sample(p: &ModelParams, t: f64, x: &[f64], y: f64, phase: Phase) -> Sample {
    Sample {
        t,
        x: x.to_vec(),
        y,
        w: p.weight_at(x, y),
        dist_a: distance_to_a(x).unwrap_or(f64::NAN),
        phase,
    }
}

fn all_finite(x: &[f64], y: f64) -> bool {
    y.is_finite() && x.iter().all(|v| v.is_finite())
}

/// Fixed-step march of the full system from `ic` to `cfg.t_end`.
pub fn simulate(p: &ModelParams, ic: &FastSlowState, cfg: &IntegratorConfig) -> Result<Trajectory, IntegrateError> {
    march(p, ic, cfg, false)
}

/// Full-system march until |c − (a+b)/2| ≤ e_A, then the planar dynamics
/// on b = −a, c = 0: a′ = −(2w + k)a with w evaluated at (a, −a, y) and k
/// the common fixed weight.
pub fn simulate_canard_aware(
    p: &ModelParams,
    ic: &FastSlowState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    match p.graph().triangle_weights() {
        Some((w13, w23)) if w13 == w23 => march(p, ic, cfg, true),
        _ => Err(IntegrateError::NotSymmetricTriangle),
    }
}

fn march(p: &ModelParams, ic: &FastSlowState, cfg: &IntegratorConfig, canard: bool) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    p.check_dim(&ic.x)?;
    let n = cfg.steps();
    let t0 = ic.t;
    let mut x = ic.x.clone();
    let mut y = ic.y;
    let mut stepper = Stepper::new(p);
    let mut phase = Phase::FullSystem;
    let mut switch_time = None;
    let mut samples = vec![sample(p, t0, &x, y, phase)];
    let mut termination = Termination::Completed;
    let k_fixed = p.graph().triangle_weights().map_or(0.0, |w| w.0);

    for step in 0..n {
        if canard && phase == Phase::FullSystem && distance_to_a(&x)? <= cfg.e_a {
            phase = Phase::ReducedOnA;
            switch_time = Some(t0 + step as f64 * cfg.dt);
            let a = 0.5 * (x[0] - x[1]);
            x = vec![a, -a, 0.0];
            if step == 0 {
                samples[0] = sample(p, t0, &x, y, phase);
            }
        }
        let prev = (x.clone(), y);
        match phase {
            Phase::FullSystem => stepper.step(cfg.method, &mut x, &mut y, cfg.dt),
            Phase::ReducedOnA => {
                let a = reduced_step(p, cfg.method, k_fixed, x[0], &mut y, cfg.dt);
                x[0] = a;
                x[1] = -a;
            }
        }
        let t = t0 + (step + 1) as f64 * cfg.dt;
        if !all_finite(&x, y) {
            termination = Termination::NonFinite { t };
            let last_t = t - cfg.dt;
            if samples.last().map(|s| s.t) != Some(last_t) {
                samples.push(sample(p, last_t, &prev.0, prev.1, phase));
            }
            break;
        }
        if (step + 1) % cfg.record_stride == 0 || step + 1 == n {
            samples.push(sample(p, t, &x, y, phase));
        }
    }
    Ok(Trajectory {
        samples,
        termination,
        switch_time,
        labels: p.graph().labels().to_vec(),
    })
}

fn reduced_step(p: &ModelParams, method: Method, k_fixed: f64, a: f64, y: &mut f64, dt: f64) -> f64 {
    let w = p.weight();
    let eps = p.epsilon();
    let drift = p.drift();
    let f = |a: f64, y: f64| (-(2.0 * w.evaluate(a, -a, y) + k_fixed) * a, eps * drift.eval(a));
    match method {
        Method::ForwardEuler => {
            let (da, dy) = f(a, *y);
            *y += dt * dy;
            a + dt * da
        }
        Method::Rk4 => {
            let (a1, y1) = f(a, *y);
            let (a2, y2) = f(a + 0.5 * dt * a1, *y + 0.5 * dt * y1);
            let (a3, y3) = f(a + 0.5 * dt * a2, *y + 0.5 * dt * y2);
            let (a4, y4) = f(a + dt * a3, *y + dt * y3);
            *y += dt / 6.0 * (y1 + 2.0 * y2 + 2.0 * y3 + y4);
            a + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionVariable {
    Y,
    A,
    DistA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Down,
    Up,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Section {
    pub variable: SectionVariable,
    pub value: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: f64,
    pub direction: Direction,
}

fn section_value(s: &Sample, v: SectionVariable) -> f64 {
    match v {
        SectionVariable::Y => s.y,
        SectionVariable::A => s.x[0],
        SectionVariable::DistA => s.dist_a,
    }
}

/// Crossings of a section between consecutive samples, linearly interpolated.
pub fn section_crossings(tr: &Trajectory, section: &Section) -> Vec<Crossing> {
    let mut out = Vec::new();
    for pair in tr.samples.windows(2) {
        let (s0, s1) = (&pair[0], &pair[1]);
        let f0 = section_value(s0, section.variable) - section.value;
        let f1 = section_value(s1, section.variable) - section.value;
        let dir = if f0 > 0.0 && f1 <= 0.0 {
            Direction::Down
        } else if f0 < 0.0 && f1 >= 0.0 {
            Direction::Up
        } else {
            continue;
        };
        if section.direction != Direction::Both && section.direction != dir {
            continue;
        }
        let theta = f0 / (f0 - f1);
        let lerp = |u: f64, v: f64| u + theta * (v - u);
        out.push(Crossing {
            t: lerp(s0.t, s1.t),
            x: s0.x.iter().zip(&s1.x).map(|(&u, &v)| lerp(u, v)).collect(),
            y: lerp(s0.y, s1.y),
            direction: dir,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransitionOutcome {
    Exit(FastSlowState),
    /// Max-norm of x passed 10⁶ at this interpolated y.
    Diverged { y: f64 },
}

pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Integrates from an entry on y = δ until y = −δ or divergence.
/// `cfg.t_end` bounds the integration time.
pub fn transition_map_numeric(
    p: &ModelParams,
    entry: &FastSlowState,
    delta: f64,
    cfg: &IntegratorConfig,
) -> Result<TransitionOutcome, IntegrateError> {
    cfg.validate()?;
    p.check_dim(&entry.x)?;
    if (entry.y - delta).abs() > 1e-12 * delta.abs().max(1.0) {
        return Err(IntegrateError::EntryOffSection);
    }
    let budget = cfg.steps();
    let mut stepper = Stepper::new(p);
    let mut x = entry.x.clone();
    let mut y = entry.y;
    let inf_norm = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for step in 0..budget {
        let (px, py) = (x.clone(), y);
        stepper.step(cfg.method, &mut x, &mut y, cfg.dt);
        let n1 = inf_norm(&x);
        if !all_finite(&x, y) || n1 > DIVERGENCE_THRESHOLD {
            let n0 = inf_norm(&px);
            let theta = if n1.is_finite() && n0 > 0.0 {
                ((DIVERGENCE_THRESHOLD.ln() - n0.ln()) / (n1.ln() - n0.ln())).clamp(0.0, 1.0)
            } else {
                0.5
            };
            return Ok(TransitionOutcome::Diverged {
                y: py + theta * (y - py),
            });
        }
        if y <= -delta {
            let theta = (py + delta) / (py - y);
            let xe = px.iter().zip(&x).map(|(&u, &v)| u + theta * (v - u)).collect();
            return Ok(TransitionOutcome::Exit(FastSlowState {
                x: xe,
                y: -delta,
                t: entry.t + (step as f64 + theta) * cfg.dt,
            }));
        }
    }
    Err(IntegrateError::StepBudget(budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Drift;
    use crate::network::{DynamicWeight, Graph};
    use approx::assert_abs_diff_eq;

    fn unit(eps: f64) -> ModelParams {
        ModelParams::new(
            Graph::unit_triangle(),
            DynamicWeight::new(-0.5, 2.0, 1.0).unwrap(),
            eps,
            Drift::Constant,
        )
        .unwrap()
    }

    #[test]
    fn euler_at_consensus() {
        let s = euler_step(&FastSlowState::new(vec![0.0; 3], 0.4), &unit(0.05), 1e-3).unwrap();
        assert_eq!(s.x, vec![0.0; 3]);
        assert_abs_diff_eq!(s.y, 0.4 - 5e-5, epsilon = 1e-17);
    }

    #[test]
    fn euler_symmetric_and_antisymmetric_regimes() {
        let p = unit(0.05);
        let dt = 1e-3;
        let a = 0.37;
        let s = euler_step(&FastSlowState::new(vec![a, a, -2.0 * a], 1.3), &p, dt).unwrap();
        for (v, x0) in s.x.iter().zip([a, a, -2.0 * a]) {
            assert_abs_diff_eq!(*v, (1.0 - 3.0 * dt) * x0, epsilon = 1e-15);
        }
        let y = 0.8;
        let w = p.weight_at(&[a, -a], y);
        let s = euler_step(&FastSlowState::new(vec![a, -a, 0.0], y), &p, dt).unwrap();
        assert_abs_diff_eq!(s.x[0], (1.0 - (2.0 * w + 1.0) * dt) * a, epsilon = 1e-15);
        assert_eq!(s.x[2], 0.0);
    }

    #[test]
    fn rk4_scalar_mode() {
        // x = (a, a, −2a) evolves as x′ = −3x
        let p = unit(0.0);
        let dt = 0.01;
        let s = rk4_step(&FastSlowState::new(vec![1.0, 1.0, -2.0], 0.5), &p, dt).unwrap();
        assert!((s.x[0] - (-3.0 * dt).exp()).abs() < 10.0 * dt.powi(5));
        assert!(s.x.iter().sum::<f64>().abs() < 1e-13);
    }

    #[test]
    fn config_validation() {
        let p = unit(0.05);
        let ic = FastSlowState::new(vec![0.0; 3], 0.0);
        for cfg in [
            IntegratorConfig::new(Method::ForwardEuler, 0.0, 1.0),
            IntegratorConfig::new(Method::ForwardEuler, 0.7, 1.0),
            IntegratorConfig { record_stride: 0, ..IntegratorConfig::new(Method::Rk4, 0.1, 1.0) },
        ] {
            assert!(simulate(&p, &ic, &cfg).is_err());
        }
    }

    #[test]
    fn stationary_layer_at_consensus() {
        let tr = simulate(
            &unit(0.0),
            &FastSlowState::new(vec![0.0; 3], 0.3),
            &IntegratorConfig::new(Method::Rk4, 0.01, 1.0),
        )
        .unwrap();
        assert!(tr.samples.iter().all(|s| s.x == vec![0.0; 3] && s.y == 0.3));
        assert_eq!(tr.samples.len(), 101);
    }

    #[test]
    fn canard_aware_with_huge_threshold_is_reduced_throughout() {
        let cfg = IntegratorConfig {
            e_a: 1e3,
            record_stride: 10,
            ..IntegratorConfig::new(Method::ForwardEuler, 1e-3, 2.0)
        };
        let ic = FastSlowState::new(vec![1.5, 1.0, -2.5], 1.9);
        let tr = simulate_canard_aware(&unit(0.05), &ic, &cfg).unwrap();
        assert_eq!(tr.switch_time, Some(0.0));
        assert!(tr.samples.iter().all(|s| s.phase == Phase::ReducedOnA));
        assert!(tr.samples.iter().all(|s| s.x[1] == -s.x[0] && s.x[2] == 0.0));
    }

    #[test]
    fn canard_aware_rejects_other_graphs() {
        let p = ModelParams::new(
            Graph::triangle(2.0, 1.0).unwrap(),
            DynamicWeight::new(-2.0 / 3.0, 2.0, 1.0).unwrap(),
            0.05,
            Drift::Constant,
        )
        .unwrap();
        let ic = FastSlowState::new(vec![0.1, 0.0, -0.1], 1.0);
        let cfg = IntegratorConfig::new(Method::ForwardEuler, 1e-3, 1.0);
        assert_eq!(
            simulate_canard_aware(&p, &ic, &cfg),
            Err(IntegrateError::NotSymmetricTriangle)
        );
    }

    #[test]
    fn divergence_keeps_last_valid_sample() {
        // a < b on the repelling side runs off to infinity
        let cfg = IntegratorConfig {
            record_stride: 1000,
            ..IntegratorConfig::new(Method::ForwardEuler, 1e-3, 200.0)
        };
        let ic = FastSlowState::new(vec![-0.5, 0.5, 0.0], -1.0);
        let tr = simulate(&unit(0.05), &ic, &cfg).unwrap();
        assert!(tr.diverged());
        assert!(tr.samples.iter().all(|s| s.x.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn crossings_of_monotone_y() {
        let cfg = IntegratorConfig {
            record_stride: 7,
            ..IntegratorConfig::new(Method::ForwardEuler, 1e-3, 20.0)
        };
        let tr = simulate(&unit(0.05), &FastSlowState::new(vec![0.0; 3], 0.5), &cfg).unwrap();
        let sec = Section {
            variable: SectionVariable::Y,
            value: 0.0,
            direction: Direction::Both,
        };
        let c = section_crossings(&tr, &sec);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].direction, Direction::Down);
        assert_abs_diff_eq!(c[0].t, 10.0, epsilon = 1e-9);
        assert!(c[0].x.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn csv_layout() {
        let g = Graph::new(3, &[(0, 1, 1.0), (0, 2, 1.0)], (2, 1)).unwrap();
        let p = ModelParams::new(g, DynamicWeight::new(-0.5, 2.0, 1.0).unwrap(), 0.05, Drift::Constant).unwrap();
        let ic = FastSlowState::new(p.graph().to_internal(&[0.1, 0.2, 0.3]), 1.0);
        let tr = simulate(&p, &ic, &IntegratorConfig::new(Method::Rk4, 0.1, 0.1)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x1,x2,x3,y,w,dist_A,phase"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[1].parse::<f64>().unwrap(), 0.1);
        assert_eq!(first[3].parse::<f64>().unwrap(), 0.3);
        assert_eq!(first[7], "FullSystem");
    }
}
