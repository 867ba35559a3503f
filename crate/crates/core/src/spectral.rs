//! Null space of the Laplacian, the limit of the dynamics, and the shape of
//! the solution space.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::graph::{GaugeAssignment, Laplacian, MatrixWeightedGraph};
use crate::linalg::{self, sorted_symmetric_eigen};
use crate::subspace::SubspaceBasis;
use crate::tolerances::Tolerances;

/// Absolute tolerance on node blocks when matching the gauge form.
const GAUGE_BLOCK_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn of(l: &Laplacian) -> Self {
        let (eigenvalues, eigenvectors) = sorted_symmetric_eigen(l.matrix());
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }

    /// Eigenvalues at or below this count as zero.
    pub fn zero_threshold(&self, tol: &Tolerances) -> f64 {
        tol.rank * self.lambda_max().max(1.0)
    }

    pub fn nullity(&self, tol: &Tolerances) -> usize {
        let thr = self.zero_threshold(tol);
        self.eigenvalues.iter().filter(|&&v| v <= thr).count()
    }

    /// Smallest eigenvalue above the zero threshold, if any.
    pub fn smallest_positive(&self, tol: &Tolerances) -> Option<f64> {
        let thr = self.zero_threshold(tol);
        self.eigenvalues.iter().copied().find(|&v| v > thr)
    }

    pub fn null_basis(&self, tol: &Tolerances) -> SubspaceBasis {
        let k = self.nullity(tol);
        SubspaceBasis::from_orthonormal(self.eigenvectors.columns(0, k).into_owned())
    }

    pub fn reconstruction_residual(&self, l: &Laplacian) -> f64 {
        let q = &self.eigenvectors;
        let rebuilt = q * DMatrix::from_diagonal(&self.eigenvalues) * q.transpose();
        linalg::norm_inf(&(rebuilt - l.matrix()))
    }
}

pub fn null_space_basis(l: &Laplacian, tol: &Tolerances) -> SubspaceBasis {
    SpectralDecomposition::of(l).null_basis(tol)
}

/// Limit of `ẋ = -Lx`: the orthogonal projection of `x0` onto `null(L)`.
pub fn asymptotic_state(l: &Laplacian, x0: &DVector<f64>, tol: &Tolerances) -> DVector<f64> {
    null_space_basis(l, tol).project(x0)
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeResidualReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub passes: bool,
}

/// Per-edge residuals `‖A_ij (x_i - sgn(A_ij) x_j)‖∞`.
pub fn verify_null_vector(
    g: &MatrixWeightedGraph,
    x: &DVector<f64>,
    tol: f64,
) -> EdgeResidualReport {
    let d = g.dim();
    let residuals: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| {
            let xi = x.rows(e.u * d, d);
            let xj = x.rows(e.v * d, d);
            let diff = xi - xj * f64::from(e.sign());
            linalg::vec_max_abs(&(e.weight.entries() * diff))
        })
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    EdgeResidualReport {
        passes: max_residual <= tol,
        residuals,
        max_residual,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionClass {
    Trivial,
    Consensus {
        null_dim: usize,
        psi: Vec<Vec<f64>>,
    },
    BipartiteConsensus {
        null_dim: usize,
        gauge: GaugeAssignment,
        psi: Vec<Vec<f64>>,
    },
    Cluster {
        null_dim: usize,
    },
}

impl SolutionClass {
    pub fn label(&self) -> &'static str {
        match self {
            SolutionClass::Trivial => "trivial",
            SolutionClass::Consensus { .. } => "consensus",
            SolutionClass::BipartiteConsensus { .. } => "bipartite_consensus",
            SolutionClass::Cluster { .. } => "cluster",
        }
    }

    pub fn null_dim(&self) -> usize {
        match self {
            SolutionClass::Trivial => 0,
            SolutionClass::Consensus { null_dim, .. }
            | SolutionClass::BipartiteConsensus { null_dim, .. }
            | SolutionClass::Cluster { null_dim } => *null_dim,
        }
    }

    /// Gauge of the consensus-type classes; identity for plain consensus.
    pub fn gauge(&self, n: usize) -> Option<GaugeAssignment> {
        match self {
            SolutionClass::Consensus { .. } => Some(GaugeAssignment::identity(n)),
            SolutionClass::BipartiteConsensus { gauge, .. } => Some(gauge.clone()),
            _ => None,
        }
    }

    pub fn is_consensus_type(&self) -> bool {
        matches!(
            self,
            SolutionClass::Consensus { .. } | SolutionClass::BipartiteConsensus { .. }
        )
    }
}

/// Decides whether `basis = span(D (1_N ⊗ Ψ))` for some gauge `D` and
/// orthonormal `Ψ`.
///
/// An orthonormal basis of such a space has node blocks `B_i = σ_i B_0`, so
/// the signs are read off node 0 and every other block is compared against it.
/// A zero block anywhere rules the gauge form out.
pub fn classify_solution_space(basis: &SubspaceBasis, n: usize, d: usize) -> SolutionClass {
    let r = basis.rank();
    if r == 0 {
        return SolutionClass::Trivial;
    }
    if r > d {
        return SolutionClass::Cluster { null_dim: r };
    }
    let b = basis.columns();
    let b0 = b.rows(0, d).into_owned();
    if linalg::max_abs(&b0) <= GAUGE_BLOCK_TOL {
        return SolutionClass::Cluster { null_dim: r };
    }
    let mut signs = Vec::with_capacity(n);
    for i in 0..n {
        let bi = b.rows(i * d, d);
        let overlap = b0.dot(&bi);
        let s: i8 = if overlap >= 0.0 { 1 } else { -1 };
        let dev = linalg::max_abs(&(bi - &b0 * f64::from(s)));
        if dev > GAUGE_BLOCK_TOL {
            return SolutionClass::Cluster { null_dim: r };
        }
        signs.push(s);
    }
    let psi = orthonormal_rows(&(&b0 * (n as f64).sqrt()));
    let gauge = GaugeAssignment::new(signs);
    if gauge.is_identity() {
        SolutionClass::Consensus { null_dim: r, psi }
    } else {
        SolutionClass::BipartiteConsensus {
            null_dim: r,
            gauge,
            psi,
        }
    }
}

/// Row-major view of a column-orthonormal `Ψ`, re-orthonormalized.
fn orthonormal_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let q = m.clone().qr().q();
    q.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Full pipeline: Laplacian, null space and classification.
pub fn classify_graph(g: &MatrixWeightedGraph, tol: &Tolerances) -> (SubspaceBasis, SolutionClass) {
    let l = crate::graph::build_laplacian(g);
    let basis = null_space_basis(&l, tol);
    let class = classify_solution_space(&basis, g.node_count(), g.dim());
    (basis, class)
}
