//! Vector fields of the full and reduced systems and the ε = 0 analysis of
//! the triangle.

use crate::network::{DynamicWeight, Graph, NetworkError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("state has {got} nodes, model has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("epsilon must lie in [0, 1), got {0}")]
    Epsilon(f64),
    #[error("drift at the origin must be negative, got {0}")]
    DriftSign(f64),
    #[error("analysis implemented for triangle only")]
    NotTriangle,
    #[error("weight does not depend on y; no singular point in y")]
    NoSlowDependence,
    #[error("clustering manifold tangent to fast foliation (alpha1 = alpha2)")]
    Tangent,
    #[error("distance to the set c = (a+b)/2 needs 3 nodes, got {0}")]
    NotThreeNodes(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Node states in internal order (dynamic edge on nodes 0 and 1), slow
/// variable and time.
#[derive(Debug, Clone, PartialEq)]
pub struct FastSlowState {
    pub x: Vec<f64>,
    pub y: f64,
    pub t: f64,
}

impl FastSlowState {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y, t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.x.iter().all(|v| v.is_finite())
    }
}

/// Slow drift g, with y′ = ε·g. `a` is the state of the first dynamic node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    /// g = −1
    Constant,
    /// g = −1 + k₁a²
    Quadratic { k1: f64 },
    /// g = −1 + βa
    Linear { beta: f64 },
}

impl Drift {
    pub fn eval(&self, a: f64) -> f64 {
        match *self {
            Drift::Constant => -1.0,
            Drift::Quadratic { k1 } => -1.0 + k1 * a * a,
            Drift::Linear { beta } => -1.0 + beta * a,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    graph: Graph,
    weight: DynamicWeight,
    epsilon: f64,
    drift: Drift,
}

impl ModelParams {
    /// ε = 0 is accepted for layer-equation runs.
    pub fn new(graph: Graph, weight: DynamicWeight, epsilon: f64, drift: Drift) -> Result<Self, DynamicsError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(DynamicsError::Epsilon(epsilon));
        }
        let g0 = drift.eval(0.0);
        if !(g0 < 0.0) {
            return Err(DynamicsError::DriftSign(g0));
        }
        Ok(Self {
            graph,
            weight,
            epsilon,
            drift,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }
    pub fn weight(&self) -> &DynamicWeight {
        &self.weight
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn drift(&self) -> Drift {
        self.drift
    }
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, DynamicsError> {
        Self::new(self.graph.clone(), self.weight, epsilon, self.drift)
    }

    pub fn weight_at(&self, x: &[f64], y: f64) -> f64 {
        self.weight.evaluate(x[0], x[1], y)
    }

    /// Writes −L(x,y)x into `dx` and returns ε·g. `lbuf` holds m² entries.
    pub(crate) fn field_into(&self, x: &[f64], y: f64, lbuf: &mut [f64], dx: &mut [f64]) -> f64 {
        let m = x.len();
        self.graph.laplacian_into(self.weight_at(x, y), lbuf);
        for i in 0..m {
            let row = &lbuf[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for (l, xj) in row.iter().zip(x) {
                acc += l * xj;
            }
            dx[i] = -acc;
        }
        self.epsilon * self.drift.eval(x[0])
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<(), DynamicsError> {
        if x.len() != self.node_count() {
            return Err(DynamicsError::Dimension {
                expected: self.node_count(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// (−L(x,y)x, ε·g): m + 1 entries.
pub fn full_field(s: &FastSlowState, p: &ModelParams) -> Result<Vec<f64>, DynamicsError> {
    p.check_dim(&s.x)?;
    let m = s.x.len();
    let mut lbuf = vec![0.0; m * m];
    let mut out = vec![0.0; m + 1];
    out[m] = p.field_into(&s.x, s.y, &mut lbuf, &mut out[..m]);
    Ok(out)
}

/// a′ = −2(y + νa)a, y′ = ε·drift.
pub fn reduced_planar_field(a: f64, y: f64, nu: f64, eps: f64, drift: f64) -> (f64, f64) {
    (-2.0 * (y + nu * a) * a, eps * drift)
}

/// |x₃ − (x₁ + x₂)/2|.
pub fn distance_to_a(x: &[f64]) -> Result<f64, DynamicsError> {
    match x {
        [a, b, c] => Ok((c - 0.5 * (a + b)).abs()),
        _ => Err(DynamicsError::NotThreeNodes(x.len())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    NonHyperbolic,
}

/// Clustering set on the line x₂ = −ρx₁: y − y_p + μx₁ + κ₃x₁³ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusteringBranch {
    pub linear: f64,
    pub cubic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularReport {
    pub w13: f64,
    pub w23: f64,
    pub nu: f64,
    /// Value of the dynamic weight where the consensus branch loses stability.
    pub critical_weight: f64,
    /// ρ in x₂ = −ρx₁ along the critical direction.
    pub clustering_ratio: f64,
    /// x₃/x₁ along the critical direction.
    pub third_node_ratio: f64,
    /// 1 + ρ, the factor in λ_N(y) = −(1+ρ)(y − y_p).
    pub eigen_rate: f64,
    /// Present unless the linear coefficient μ = α₁ − α₂ρ vanishes.
    pub clustering_branch: Option<ClusteringBranch>,
    pub nonhyperbolic_point: ([f64; 3], f64),
}

impl SingularReport {
    pub fn singular_y(&self) -> f64 {
        self.nonhyperbolic_point.1
    }

    /// Eigenvalue of the consensus branch in the critical direction.
    pub fn lambda_n(&self, y: f64) -> f64 {
        -self.eigen_rate * (y - self.singular_y())
    }

    /// Eigenvalue of the clustering branch in the critical direction.
    pub fn lambda_m(&self, y: f64) -> f64 {
        self.eigen_rate * (y - self.singular_y())
    }

    pub fn consensus_stability(&self, y: f64) -> Stability {
        classify(self.lambda_n(y))
    }

    pub fn clustering_stability(&self, y: f64) -> Option<Stability> {
        self.clustering_branch.map(|_| classify(self.lambda_m(y)))
    }

    /// x₁ on the clustering branch (linear part only).
    pub fn clustering_x1(&self, y: f64) -> Option<f64> {
        self.clustering_branch.map(|b| -(y - self.singular_y()) / b.linear)
    }

    /// y on the clustering branch as a function of x₁.
    pub fn clustering_y(&self, x1: f64) -> Option<f64> {
        self.clustering_branch
            .map(|b| self.singular_y() - b.linear * x1 - b.cubic * x1 * x1 * x1)
    }

    /// Fast field restricted to the critical direction.
    pub fn reduced_fast_field(&self, x1: f64, y: f64) -> f64 {
        let (lin, cub) = self.clustering_branch.map_or((0.0, 0.0), |b| (b.linear, b.cubic));
        -self.eigen_rate * (y - self.singular_y() + lin * x1 + cub * x1 * x1 * x1) * x1
    }

    /// Scalings (κ, λ) with y = κY, t = κT, x₁ = λA under which the reduced
    /// field becomes A′ = −2(Y + ν_target·A)A with unchanged slow rate.
    pub fn equivalence_to_symmetric(&self, nu_target: f64) -> Option<(f64, f64)> {
        let kappa = (2.0 / self.eigen_rate).sqrt();
        match self.clustering_branch {
            Some(b) if b.cubic == 0.0 && nu_target != 0.0 => Some((kappa, nu_target * kappa / b.linear)),
            None if nu_target == 0.0 => Some((kappa, 1.0)),
            _ => None,
        }
    }
}

fn classify(lambda: f64) -> Stability {
    if lambda < 0.0 {
        Stability::Attracting
    } else if lambda > 0.0 {
        Stability::Repelling
    } else {
        Stability::NonHyperbolic
    }
}

pub fn singular_analysis(p: &ModelParams) -> Result<SingularReport, DynamicsError> {
    let (w13, w23) = p.graph().triangle_weights().ok_or(DynamicsError::NotTriangle)?;
    let w = p.weight();
    if !w.uses_y() {
        return Err(DynamicsError::NoSlowDependence);
    }
    let critical_weight = -w13 * w23 / (w13 + w23);
    let rho = (2.0 * w13 + w23) / (w13 + 2.0 * w23);
    let third = (w13 - w23 * rho) / (w13 + w23);
    let mu = w.alpha1() - w.alpha2() * rho;
    let cubic = w.cubic().map_or(0.0, |(a3, a4)| a3 - a4 * rho * rho * rho);
    let clustering_branch = (mu != 0.0).then_some(ClusteringBranch { linear: mu, cubic });
    let singular_y = critical_weight - w.w_star();
    Ok(SingularReport {
        w13,
        w23,
        nu: w.nu(),
        critical_weight,
        clustering_ratio: rho,
        third_node_ratio: third,
        eigen_rate: 1.0 + rho,
        clustering_branch,
        nonhyperbolic_point: ([0.0; 3], singular_y),
    })
}

/// Singular point (x₁, y) of the unit triangle in the original coordinates,
/// where the node states sum to 3σ₀/2.
pub fn unnormalized_nonhyperbolic_point(sigma0: f64, alpha1: f64, alpha2: f64) -> (f64, f64) {
    (sigma0 / 2.0, -(1.0 + sigma0 * (alpha1 + alpha2)) / 2.0)
}

/// Limit of the unit-triangle layer flow on the clustering branch, in
/// un-normalized coordinates.
pub fn clustering_limit(y: f64, alpha1: f64, alpha2: f64, sigma0: f64) -> Result<(f64, f64, f64), DynamicsError> {
    let nu = alpha1 - alpha2;
    if nu == 0.0 {
        return Err(DynamicsError::Tangent);
    }
    let x1 = -(0.5 + alpha2 * sigma0 + y) / nu;
    let x2 = (0.5 + alpha1 * sigma0 + y) / nu;
    let x3 = sigma0 / 2.0;
    debug_assert!((x1 + x2 + x3 - 1.5 * sigma0).abs() <= 1e-9 * (1.0 + x1.abs() + x2.abs()));
    Ok((x1, x2, x3))
}
