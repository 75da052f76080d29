//! Dirichlet spectra of built-in geometries.
//!
//! Provides eigenpairs of the Laplacian with homogeneous Dirichlet
//! conditions on an interval or a rectangle, exterior-normal-derivative
//! traces on a chosen active boundary, Dirichlet-lift coefficients, and the
//! spectral Sobolev norms used for targets and residuals. Only geometries
//! with closed-form spectra are built in; whether the chosen boundary and
//! horizon actually control the equation is probed numerically elsewhere.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Active boundary of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaSelect {
    Left,
    Right,
    Both,
}

/// Edges of a rectangle `(0,a) x (0,b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// x = 0
    Left,
    /// x = a
    Right,
    /// y = 0
    Bottom,
    /// y = b
    Top,
}

/// One quadrature node on the active boundary.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryNode {
    pub point: [f64; 2],
    pub weight: f64,
}

/// One eigenmode: `-Δ φ = λ² φ`, `λ > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    /// `(n, 0)` on an interval, `(j, k)` on a rectangle.
    pub indices: (usize, usize),
    pub lambda: f64,
    pub lambda_sq: f64,
}

#[derive(Debug, Clone)]
enum Geometry {
    Interval { length: f64, gamma: GammaSelect },
    Rectangle { a: f64, b: f64, edges: Vec<Edge> },
}

/// Eigenpairs, boundary traces and norms for one domain.
#[derive(Debug, Clone)]
pub struct SpectralDomain {
    geometry: Geometry,
    modes: Vec<Mode>,
    boundary: Vec<BoundaryNode>,
    /// `traces[n][p]` = exterior normal derivative of mode `n` at boundary
    /// node `p`.
    traces: Vec<Vec<f64>>,
    /// Mode indices grouped by equal eigenvalue (bit-exact `lambda_sq`).
    groups: Vec<Vec<usize>>,
}

/// Coefficients over the eigenbasis, representing `Σ c_n φ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    pub coeffs: Vec<f64>,
}

impl SpectralVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![0.0; n],
        }
    }

    /// Unit coefficient on mode `n` (zero-based), length `len`.
    pub fn unit(n: usize, len: usize) -> Self {
        let mut coeffs = vec![0.0; len];
        coeffs[n] = 1.0;
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Euclidean inner product of coefficients, i.e. the `L²(Ω)` pairing.
    pub fn dot(&self, other: &SpectralVector) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Interval `(0, length)` with the first `n_max` Dirichlet modes
/// `φ_n = sqrt(2/length) sin(n π x / length)`, `λ_n = n π / length`.
///
/// The active boundary carries the counting measure; the exterior normal
/// derivative is `-d/dx` at `x = 0` and `+d/dx` at `x = length`.
pub fn interval_domain(length: f64, n_max: usize, gamma: GammaSelect) -> Result<SpectralDomain> {
    if length <= 0.0 {
        return Err(Error::Config(format!(
            "interval length must be positive, got {length}"
        )));
    }
    if n_max == 0 {
        return Err(Error::Config("n_max must be at least 1".into()));
    }
    let norm = (2.0 / length).sqrt();
    let modes: Vec<Mode> = (1..=n_max)
        .map(|n| {
            let lambda = n as f64 * std::f64::consts::PI / length;
            Mode {
                indices: (n, 0),
                lambda,
                lambda_sq: lambda * lambda,
            }
        })
        .collect();

    let mut boundary = Vec::new();
    if matches!(gamma, GammaSelect::Left | GammaSelect::Both) {
        boundary.push(BoundaryNode {
            point: [0.0, 0.0],
            weight: 1.0,
        });
    }
    if matches!(gamma, GammaSelect::Right | GammaSelect::Both) {
        boundary.push(BoundaryNode {
            point: [length, 0.0],
            weight: 1.0,
        });
    }
    if boundary.is_empty() {
        return Err(Error::EmptyBoundary);
    }

    let traces = modes
        .iter()
        .map(|m| {
            let n = m.indices.0;
            boundary
                .iter()
                .map(|node| {
                    if node.point[0] == 0.0 {
                        -norm * m.lambda
                    } else {
                        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                        norm * m.lambda * sign
                    }
                })
                .collect()
        })
        .collect();

    let groups = group_by_eigenvalue(&modes);
    Ok(SpectralDomain {
        geometry: Geometry::Interval { length, gamma },
        modes,
        boundary,
        traces,
        groups,
    })
}

/// Rectangle `(0,a) x (0,b)` with all Dirichlet modes of eigenvalue
/// `λ² = (jπ/a)² + (kπ/b)² <= eigenvalue_cutoff`, sorted by eigenvalue.
///
/// Modes with equal eigenvalue are reported as one group; for a square the
/// eigenvalue is computed from the integer `j² + k²` so group members agree
/// bit-exactly.
pub fn rectangle_domain(
    a: f64,
    b: f64,
    eigenvalue_cutoff: f64,
    edges: &[Edge],
) -> Result<SpectralDomain> {
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Config(format!(
            "rectangle sides must be positive, got {a} x {b}"
        )));
    }
    if edges.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let ground = (std::f64::consts::PI / a).powi(2) + (std::f64::consts::PI / b).powi(2);
    if eigenvalue_cutoff < ground {
        return Err(Error::CutoffBelowGround {
            cutoff: eigenvalue_cutoff,
            ground,
        });
    }

    let square = a == b;
    let scale = (std::f64::consts::PI / a).powi(2);
    let lambda_sq_of = |j: usize, k: usize| -> f64 {
        if square {
            scale * (j * j + k * k) as f64
        } else {
            (j as f64 * std::f64::consts::PI / a).powi(2)
                + (k as f64 * std::f64::consts::PI / b).powi(2)
        }
    };

    let j_max = ((eigenvalue_cutoff / (std::f64::consts::PI / a).powi(2)).sqrt() as usize).max(1);
    let k_max = ((eigenvalue_cutoff / (std::f64::consts::PI / b).powi(2)).sqrt() as usize).max(1);
    let mut modes = Vec::new();
    for j in 1..=j_max {
        for k in 1..=k_max {
            let lsq = lambda_sq_of(j, k);
            if lsq <= eigenvalue_cutoff {
                modes.push(Mode {
                    indices: (j, k),
                    lambda: lsq.sqrt(),
                    lambda_sq: lsq,
                });
            }
        }
    }
    modes.sort_by(|x, y| {
        x.lambda_sq
            .partial_cmp(&y.lambda_sq)
            .unwrap()
            .then(x.indices.cmp(&y.indices))
    });

    // Trapezoid nodes along each active edge, resolved for the highest
    // transverse index present.
    let max_idx = modes
        .iter()
        .map(|m| m.indices.0.max(m.indices.1))
        .max()
        .unwrap_or(1);
    let per_edge = 8 * max_idx + 9;
    let mut boundary = Vec::new();
    let mut edge_of_node = Vec::new();
    for &edge in edges {
        let (len, horizontal) = match edge {
            Edge::Left | Edge::Right => (b, false),
            Edge::Bottom | Edge::Top => (a, true),
        };
        let h = len / (per_edge - 1) as f64;
        for i in 0..per_edge {
            let s = i as f64 * h;
            let point = match edge {
                Edge::Left => [0.0, s],
                Edge::Right => [a, s],
                Edge::Bottom => [s, 0.0],
                Edge::Top => [s, b],
            };
            let _ = horizontal;
            let w = if i == 0 || i == per_edge - 1 {
                0.5 * h
            } else {
                h
            };
            boundary.push(BoundaryNode { point, weight: w });
            edge_of_node.push(edge);
        }
    }

    let norm = 2.0 / (a * b).sqrt();
    let traces = modes
        .iter()
        .map(|m| {
            let (j, k) = m.indices;
            let jf = j as f64 * std::f64::consts::PI / a;
            let kf = k as f64 * std::f64::consts::PI / b;
            boundary
                .iter()
                .zip(&edge_of_node)
                .map(|(node, edge)| {
                    let [x, y] = node.point;
                    match edge {
                        Edge::Left => -norm * jf * (kf * y).sin(),
                        Edge::Right => {
                            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                            norm * jf * sign * (kf * y).sin()
                        }
                        Edge::Bottom => -norm * kf * (jf * x).sin(),
                        Edge::Top => {
                            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                            norm * kf * sign * (jf * x).sin()
                        }
                    }
                })
                .collect()
        })
        .collect();

    let groups = group_by_eigenvalue(&modes);
    Ok(SpectralDomain {
        geometry: Geometry::Rectangle {
            a,
            b,
            edges: edges.to_vec(),
        },
        modes,
        boundary,
        traces,
        groups,
    })
}

fn group_by_eigenvalue(modes: &[Mode]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, m) in modes.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if modes[g[0]].lambda_sq == m.lambda_sq => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Min/max and fitted constants of the eigenvalue growth `λ_n² ~ n^(2/d)`.
#[derive(Debug, Clone, Copy)]
pub struct WeylFit {
    /// Smallest ratio `λ_n² / n^(2/d)`.
    pub lower: f64,
    /// Largest ratio.
    pub upper: f64,
    /// Least-squares slope of `λ_n²` against `n^(2/d)`.
    pub fitted: f64,
}

impl SpectralDomain {
    pub fn dimension(&self) -> usize {
        match self.geometry {
            Geometry::Interval { .. } => 1,
            Geometry::Rectangle { .. } => 2,
        }
    }

    /// One-line description of the geometry and the active boundary.
    pub fn describe(&self) -> String {
        match &self.geometry {
            Geometry::Interval { length, gamma } => {
                format!("interval (0, {length}), gamma = {gamma:?}")
            }
            Geometry::Rectangle { a, b, edges } => {
                format!("rectangle (0, {a}) x (0, {b}), edges = {edges:?}")
            }
        }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.modes[n].lambda
    }

    pub fn lambda_sq(&self, n: usize) -> f64 {
        self.modes[n].lambda_sq
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn boundary(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    /// Exterior normal derivative of mode `n` at the boundary nodes.
    pub fn trace(&self, n: usize) -> &[f64] {
        &self.traces[n]
    }

    /// Normalized trace `Ψ_n = γ₁φ_n / λ_n` at the boundary nodes.
    pub fn normalized_trace(&self, n: usize) -> Vec<f64> {
        let l = self.modes[n].lambda;
        self.traces[n].iter().map(|t| t / l).collect()
    }

    /// Modes grouped by equal eigenvalue, in spectral order.
    pub fn eigenvalue_groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Evaluate mode `n` at an interior point (`[x, 0]` on an interval).
    pub fn eval_mode(&self, n: usize, point: [f64; 2]) -> f64 {
        match &self.geometry {
            Geometry::Interval { length, .. } => {
                let nn = self.modes[n].indices.0 as f64;
                (2.0 / length).sqrt() * (nn * std::f64::consts::PI * point[0] / length).sin()
            }
            Geometry::Rectangle { a, b, .. } => {
                let (j, k) = self.modes[n].indices;
                2.0 / (a * b).sqrt()
                    * (j as f64 * std::f64::consts::PI * point[0] / a).sin()
                    * (k as f64 * std::f64::consts::PI * point[1] / b).sin()
            }
        }
    }

    /// Interior points for field export: uniform in `(0, length)` or a
    /// uniform lattice in the rectangle.
    pub fn evaluation_lattice(&self, per_side: usize) -> Vec<[f64; 2]> {
        let per_side = per_side.max(2);
        match &self.geometry {
            Geometry::Interval { length, .. } => (0..=per_side)
                .map(|i| [length * i as f64 / per_side as f64, 0.0])
                .collect(),
            Geometry::Rectangle { a, b, .. } => {
                let mut pts = Vec::new();
                for i in 0..=per_side {
                    for j in 0..=per_side {
                        pts.push([
                            a * i as f64 / per_side as f64,
                            b * j as f64 / per_side as f64,
                        ]);
                    }
                }
                pts
            }
        }
    }

    /// Weighted inner product of two functions sampled on the boundary.
    pub fn boundary_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.boundary
            .iter()
            .zip(f.iter().zip(g))
            .map(|(node, (a, b))| node.weight * a * b)
            .sum()
    }

    /// Spectral Sobolev norm `(Σ λ_n^{2s} c_n²)^{1/2}` for `s` in
    /// `{-1, 0, 1}`.
    pub fn sobolev_norm(&self, v: &SpectralVector, s: i32) -> Result<f64> {
        if !(-1..=1).contains(&s) {
            return Err(Error::UnsupportedSobolevIndex(s));
        }
        let mut acc = 0.0;
        for (n, c) in v.coeffs.iter().enumerate() {
            let w = match s {
                -1 => 1.0 / self.modes[n].lambda_sq,
                0 => 1.0,
                _ => self.modes[n].lambda_sq,
            };
            acc += w * c * c;
        }
        Ok(acc.sqrt())
    }

    /// Modal coefficients of the Dirichlet lift of boundary data `f`:
    /// `(Df)_n = -(1/λ_n²) ∫_Γ (γ₁φ_n) f dΓ`. No harmonic solve is needed.
    pub fn dirichlet_lift_coefficients(&self, f_snapshot: &[f64]) -> SpectralVector {
        assert_eq!(f_snapshot.len(), self.boundary.len());
        let coeffs = (0..self.n_modes())
            .map(|n| -self.boundary_inner(&self.traces[n], f_snapshot) / self.modes[n].lambda_sq)
            .collect();
        SpectralVector::new(coeffs)
    }

    /// Min/max/fitted constants of `λ_n²` against `n^(2/d)`.
    pub fn weyl_fit(&self) -> WeylFit {
        let d = self.dimension() as f64;
        let mut lower = f64::INFINITY;
        let mut upper = 0.0f64;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        for (i, m) in self.modes.iter().enumerate() {
            let x = ((i + 1) as f64).powf(2.0 / d);
            let q = m.lambda_sq / x;
            lower = lower.min(q);
            upper = upper.max(q);
            sxy += x * m.lambda_sq;
            sxx += x * x;
        }
        WeylFit {
            lower,
            upper,
            fitted: sxy / sxx,
        }
    }

    /// Eigen-table as CSV: mode rank, indices, λ, λ², traces at each
    /// boundary node.
    pub fn write_eigen_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("n,index_1,index_2,lambda,lambda_sq");
        for p in 0..self.boundary.len() {
            let _ = write!(out, ",trace_{p}");
        }
        out.push('\n');
        for (i, m) in self.modes.iter().enumerate() {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                i + 1,
                m.indices.0,
                m.indices.1,
                m.lambda,
                m.lambda_sq
            );
            for t in &self.traces[i] {
                let _ = write!(out, ",{t}");
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}
