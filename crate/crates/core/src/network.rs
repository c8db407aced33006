//! Graph model, signed Laplacian assembly and spectral utilities.
//!
//! Nodes are stored in an internal order in which the dynamic edge joins
//! nodes 0 and 1. [`Graph::to_external`] and [`Graph::to_internal`] convert
//! state vectors between that order and the caller's labelling.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node index {index} out of range for {m} nodes")]
    NodeOutOfRange { index: usize, m: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) appears more than once")]
    DuplicateEdge(usize, usize),
    #[error("fixed edge ({i}, {j}) has non-positive weight {w}")]
    NonPositiveWeight { i: usize, j: usize, w: f64 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("dynamic weight requires alpha1 >= alpha2 >= 0, got ({alpha1}, {alpha2})")]
    InvalidAlpha { alpha1: f64, alpha2: f64 },
    #[error("non-finite weight coefficient")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not symmetric within {0}")]
    NotSymmetric(f64),
    #[error("{0}")]
    Domain(&'static str),
}

/// Undirected weighted graph with one state-dependent edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    m: usize,
    fixed: Vec<(usize, usize, f64)>,
    labels: Vec<usize>,
}

impl Graph {
    /// Builds a graph from 0-based external node indices.
    pub fn new(
        m: usize,
        fixed_edges: &[(usize, usize, f64)],
        dynamic_edge: (usize, usize),
    ) -> Result<Self, NetworkError> {
        if m < 2 {
            return Err(NetworkError::TooFewNodes(m));
        }
        let check = |i: usize| {
            if i >= m {
                Err(NetworkError::NodeOutOfRange { index: i, m })
            } else {
                Ok(())
            }
        };
        let (d0, d1) = dynamic_edge;
        check(d0)?;
        check(d1)?;
        if d0 == d1 {
            return Err(NetworkError::SelfLoop(d0));
        }
        let mut seen = vec![(d0.min(d1), d0.max(d1))];
        for &(i, j, w) in fixed_edges {
            check(i)?;
            check(j)?;
            if i == j {
                return Err(NetworkError::SelfLoop(i));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(NetworkError::NonPositiveWeight { i, j, w });
            }
            let key = (i.min(j), i.max(j));
            if seen.contains(&key) {
                return Err(NetworkError::DuplicateEdge(key.0, key.1));
            }
            seen.push(key);
        }

        let mut labels = vec![d0, d1];
        labels.extend((0..m).filter(|&k| k != d0 && k != d1));
        let mut position = vec![0; m];
        for (internal, &external) in labels.iter().enumerate() {
            position[external] = internal;
        }
        let mut fixed: Vec<(usize, usize, f64)> = fixed_edges
            .iter()
            .map(|&(i, j, w)| {
                let (a, b) = (position[i], position[j]);
                (a.min(b), a.max(b), w)
            })
            .collect();
        fixed.sort_by_key(|e| (e.0, e.1));

        let g = Self { m, fixed, labels };
        if !g.connected(true) {
            return Err(NetworkError::Disconnected);
        }
        Ok(g)
    }

    /// Triangle with dynamic edge (1,2) and fixed weights w13, w23 to node 3.
    pub fn triangle(w13: f64, w23: f64) -> Result<Self, NetworkError> {
        Self::new(3, &[(0, 2, w13), (1, 2, w23)], (0, 1))
    }

    pub fn unit_triangle() -> Self {
        Self::triangle(1.0, 1.0).expect("unit triangle is valid")
    }

    /// Cycle 1-2-…-n-1 with the dynamic edge on (1,2).
    pub fn ring(n: usize) -> Result<Self, NetworkError> {
        if n < 3 {
            return Err(NetworkError::TooFewNodes(n));
        }
        let edges: Vec<_> = (1..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Self::new(n, &edges, (0, 1))
    }

    /// Star centred at node 1; the dynamic edge is the spoke (1,2).
    pub fn star(n: usize) -> Result<Self, NetworkError> {
        if n < 3 {
            return Err(NetworkError::TooFewNodes(n));
        }
        let edges: Vec<_> = (2..n).map(|i| (0, i, 1.0)).collect();
        Self::new(n, &edges, (0, 1))
    }

    pub fn complete(n: usize) -> Result<Self, NetworkError> {
        if n < 3 {
            return Err(NetworkError::TooFewNodes(n));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if (i, j) != (0, 1) {
                    edges.push((i, j, 1.0));
                }
            }
        }
        Self::new(n, &edges, (0, 1))
    }

    pub fn node_count(&self) -> usize {
        self.m
    }

    /// Fixed edges in internal indices, sorted.
    pub fn fixed_edges(&self) -> &[(usize, usize, f64)] {
        &self.fixed
    }

    /// Fixed edges in external labels, sorted.
    pub fn external_edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<_> = self
            .fixed
            .iter()
            .map(|&(i, j, w)| {
                let (a, b) = (self.labels[i], self.labels[j]);
                (a.min(b), a.max(b), w)
            })
            .collect();
        out.sort_by_key(|e| (e.0, e.1));
        out
    }

    /// External label of each internal node.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The dynamic edge in external labels.
    pub fn dynamic_edge(&self) -> (usize, usize) {
        (self.labels[0], self.labels[1])
    }

    /// Fixed weights (w13, w23) when the graph is a triangle.
    pub fn triangle_weights(&self) -> Option<(f64, f64)> {
        match (self.m, self.fixed.as_slice()) {
            (3, [(0, 2, w13), (1, 2, w23)]) => Some((*w13, *w23)),
            _ => None,
        }
    }

    pub fn to_external(&self, internal: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (k, &v) in internal.iter().enumerate() {
            out[self.labels[k]] = v;
        }
        out
    }

    pub fn to_internal(&self, external: &[f64]) -> Vec<f64> {
        self.labels.iter().map(|&e| external[e]).collect()
    }

    /// Writes L(w) row-major into `buf` (length m²).
    ///
    /// Each diagonal entry is the negated sum of its row's off-diagonal
    /// entries taken in column order.
    pub fn laplacian_into(&self, w: f64, buf: &mut [f64]) {
        let m = self.m;
        buf.iter_mut().for_each(|v| *v = 0.0);
        buf[1] = -w;
        buf[m] = -w;
        for &(i, j, wij) in &self.fixed {
            buf[i * m + j] = -wij;
            buf[j * m + i] = -wij;
        }
        for i in 0..m {
            let mut off = 0.0;
            for j in 0..m {
                if j != i {
                    off += buf[i * m + j];
                }
            }
            buf[i * m + i] = -off;
        }
    }

    /// Laplacian with the dynamic entry set to `w`.
    pub fn laplacian(&self, w: f64) -> DMatrix<f64> {
        let mut buf = vec![0.0; self.m * self.m];
        self.laplacian_into(w, &mut buf);
        DMatrix::from_row_slice(self.m, self.m, &buf)
    }

    fn connected(&self, with_dynamic: bool) -> bool {
        self.component_of_zero(with_dynamic).iter().all(|&c| c)
    }

    fn component_of_zero(&self, with_dynamic: bool) -> Vec<bool> {
        let mut adj = vec![Vec::new(); self.m];
        if with_dynamic {
            adj[0].push(1);
            adj[1].push(0);
        }
        for &(i, j, _) in &self.fixed {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Value of the dynamic weight at which a second Laplacian eigenvalue
    /// reaches zero: −1/R, with R the effective resistance between the
    /// dynamic-edge endpoints in the fixed graph, or 0 when the dynamic
    /// edge is a bridge.
    pub fn critical_weight(&self) -> f64 {
        match self.fixed_resistance_solution() {
            Some((r, _)) => -1.0 / r,
            None => 0.0,
        }
    }

    /// Unit, sum-zero vector spanning the extra kernel direction of L at the
    /// critical weight, oriented so that its first two entries satisfy
    /// v[0] > v[1]. Internal node order.
    pub fn critical_mode(&self) -> DVector<f64> {
        let v = match self.fixed_resistance_solution() {
            Some((_, v)) => v,
            None => {
                let side = self.component_of_zero(false);
                let n_side = side.iter().filter(|&&s| s).count() as f64;
                let mean = n_side / self.m as f64;
                DVector::from_iterator(
                    self.m,
                    side.iter().map(|&s| if s { 1.0 - mean } else { -mean }),
                )
            }
        };
        let v = v.normalize();
        if v[0] < v[1] {
            -v
        } else {
            v
        }
    }

    /// Solves L_f v = e0 − e1 on the sum-zero subspace, returning the
    /// effective resistance and v. None when the fixed graph is disconnected.
    fn fixed_resistance_solution(&self) -> Option<(f64, DVector<f64>)> {
        if !self.connected(false) {
            return None;
        }
        let m = self.m;
        let shift = 1.0 / m as f64;
        let lf = self.laplacian(0.0).add_scalar(shift);
        let mut e = DVector::zeros(m);
        e[0] = 1.0;
        e[1] = -1.0;
        let v = lf.lu().solve(&e)?;
        Some((v[0] - v[1], v))
    }
}

/// The state-dependent weight w = w* + y + α₁x₁ + α₂x₂ (+ α₃x₁³ + α₄x₂³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicWeight {
    w_star: f64,
    alpha1: f64,
    alpha2: f64,
    cubic: Option<(f64, f64)>,
    uses_y: bool,
}

impl DynamicWeight {
    pub fn new(w_star: f64, alpha1: f64, alpha2: f64) -> Result<Self, NetworkError> {
        if ![w_star, alpha1, alpha2].iter().all(|v| v.is_finite()) {
            return Err(NetworkError::NonFinite);
        }
        if alpha2 < 0.0 || alpha1 < alpha2 {
            return Err(NetworkError::InvalidAlpha { alpha1, alpha2 });
        }
        Ok(Self {
            w_star,
            alpha1,
            alpha2,
            cubic: None,
            uses_y: true,
        })
    }

    pub fn with_cubic(mut self, alpha3: f64, alpha4: f64) -> Result<Self, NetworkError> {
        if !alpha3.is_finite() || !alpha4.is_finite() {
            return Err(NetworkError::NonFinite);
        }
        self.cubic = Some((alpha3, alpha4));
        Ok(self)
    }

    pub fn without_y(mut self) -> Self {
        self.uses_y = false;
        self
    }

    pub fn w_star(&self) -> f64 {
        self.w_star
    }
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
    pub fn cubic(&self) -> Option<(f64, f64)> {
        self.cubic
    }
    pub fn uses_y(&self) -> bool {
        self.uses_y
    }

    /// ν = α₁ − α₂.
    pub fn nu(&self) -> f64 {
        self.alpha1 - self.alpha2
    }

    pub fn evaluate(&self, x1: f64, x2: f64, y: f64) -> f64 {
        let mut w = self.w_star;
        if self.uses_y {
            w += y;
        }
        w += self.alpha1 * x1 + self.alpha2 * x2;
        if let Some((a3, a4)) = self.cubic {
            w += a3 * x1 * x1 * x1 + a4 * x2 * x2 * x2;
        }
        w
    }
}

pub fn evaluate_weight(spec: &DynamicWeight, x1: f64, x2: f64, y: f64) -> f64 {
    spec.evaluate(x1, x2, y)
}

/// Laplacian at state `x` (internal order) and slow variable `y`.
pub fn build_laplacian(
    g: &Graph,
    spec: &DynamicWeight,
    x: &[f64],
    y: f64,
) -> Result<DMatrix<f64>, NetworkError> {
    if x.len() != g.node_count() {
        return Err(NetworkError::Dimension {
            expected: g.node_count(),
            got: x.len(),
        });
    }
    Ok(g.laplacian(spec.evaluate(x[0], x[1], y)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    /// Eigenvalue of smallest magnitude among those outside the kernel.
    pub spectral_gap: Option<f64>,
}

/// Kernel tolerance 1e-9·max(1, max|L_ij|).
pub fn default_kernel_tol(l: &DMatrix<f64>) -> f64 {
    1e-9 * l.amax().max(1.0)
}

pub fn laplacian_spectrum(l: &DMatrix<f64>, tol: f64) -> Result<SpectrumReport, NetworkError> {
    if !l.is_square() {
        return Err(NetworkError::Dimension {
            expected: l.nrows(),
            got: l.ncols(),
        });
    }
    if (l - l.transpose()).amax() > tol {
        return Err(NetworkError::NotSymmetric(tol));
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(l.clone()).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    let kernel_dim = eigenvalues.iter().filter(|v| v.abs() < tol).count();
    let spectral_gap = eigenvalues
        .iter()
        .copied()
        .filter(|v| v.abs() >= tol)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()));
    Ok(SpectrumReport {
        eigenvalues,
        kernel_dim,
        spectral_gap,
    })
}

/// w* = −w13·w23/(w13 + w23).
pub fn critical_weight_star(w13: f64, w23: f64) -> Result<f64, NetworkError> {
    if !(w13 > 0.0) || !(w23 > 0.0) {
        return Err(NetworkError::Domain("fixed weights must be positive"));
    }
    Ok(-w13 * w23 / (w13 + w23))
}

/// Orthogonal change of basis for the unit triangle: TᵀL(w)T = diag{0, 3, 2w+1}.
#[derive(Debug, Clone, Copy)]
pub struct TriangleDiagonalization {
    pub t: Matrix3<f64>,
}

impl TriangleDiagonalization {
    /// Coefficients (β₁, β₂, β₃) of the weight written in the new coordinates.
    pub fn beta(&self, alpha1: f64, alpha2: f64) -> [f64; 3] {
        let s = alpha1 + alpha2;
        [
            3f64.sqrt() / 3.0 * s,
            -(6f64.sqrt()) / 6.0 * s,
            2f64.sqrt() / 2.0 * (alpha2 - alpha1),
        ]
    }
}

pub fn triangle_diagonalization() -> TriangleDiagonalization {
    let r3 = 3f64.sqrt() / 3.0;
    let r6 = 6f64.sqrt() / 6.0;
    let r2 = 2f64.sqrt() / 2.0;
    TriangleDiagonalization {
        t: Matrix3::new(
            r3, -r6, -r2, //
            r3, -r6, r2, //
            r3, 2.0 * r6, 0.0,
        ),
    }
}

/// Orthogonal P whose first row is 𝟙/√m; the remaining rows come from
/// Gram–Schmidt over e_m, e_{m−1}, …, e_2. For m = 3 this is Tᵀ.
pub fn consensus_coordinates(m: usize) -> Result<DMatrix<f64>, NetworkError> {
    if m < 2 {
        return Err(NetworkError::TooFewNodes(m));
    }
    let mut rows: Vec<DVector<f64>> = vec![DVector::from_element(m, 1.0 / (m as f64).sqrt())];
    for k in (1..m).rev() {
        let mut v = DVector::zeros(m);
        v[k] = 1.0;
        for _ in 0..2 {
            for r in &rows {
                let c = r.dot(&v);
                v -= r * c;
            }
        }
        rows.push(v.normalize());
    }
    let mut p = DMatrix::zeros(m, m);
    for (i, r) in rows.iter().enumerate() {
        p.set_row(i, &r.transpose());
    }
    Ok(p)
}
