use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::linalg::{self, RankRule};

/// Orthonormal basis of a linear subspace of R^m, stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(columns: DMatrix<f64>) -> Self {
        Self { columns }
    }

    /// Orthonormal basis of the column span of `m`.
    pub fn span_of(m: &DMatrix<f64>, rule: RankRule) -> Self {
        Self {
            columns: linalg::column_space(m, rule),
        }
    }

    /// Right null space of `m`.
    pub fn null_of(m: &DMatrix<f64>, rule: RankRule) -> Self {
        Self {
            columns: linalg::null_space(m, rule),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            columns: DMatrix::identity(ambient, ambient),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            columns: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn ambient(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.columns * self.columns.transpose()
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.columns * (self.columns.transpose() * v)
    }

    /// Distance from `v` to the subspace (Euclidean).
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        (v - self.project(v)).norm()
    }

    /// Intersection with another subspace of the same ambient space.
    pub fn intersect(&self, other: &SubspaceBasis, rule: RankRule) -> SubspaceBasis {
        Self::intersect_all(self.ambient(), [self, other], rule)
    }

    /// Intersection of any number of subspaces; the empty intersection is
    /// the whole ambient space.
    pub fn intersect_all<'a, I>(ambient: usize, spaces: I, rule: RankRule) -> SubspaceBasis
    where
        I: IntoIterator<Item = &'a SubspaceBasis>,
    {
        let complements: Vec<DMatrix<f64>> = spaces
            .into_iter()
            .map(|s| {
                debug_assert_eq!(s.ambient(), ambient);
                DMatrix::identity(ambient, ambient) - s.projector()
            })
            .collect();
        if complements.is_empty() {
            return Self::full(ambient);
        }
        let refs: Vec<&DMatrix<f64>> = complements.iter().collect();
        let stacked = linalg::vstack(ambient, &refs);
        Self::null_of(&stacked, rule)
    }

    /// Subspace sum (span of the union of both bases).
    pub fn sum(&self, other: &SubspaceBasis, rule: RankRule) -> SubspaceBasis {
        let m = linalg::hstack(self.ambient(), &[&self.columns, &other.columns]);
        Self::span_of(&m, rule)
    }

    /// Span of the union of several subspaces.
    pub fn sum_all<'a, I>(ambient: usize, spaces: I, rule: RankRule) -> SubspaceBasis
    where
        I: IntoIterator<Item = &'a SubspaceBasis>,
    {
        let cols: Vec<&DMatrix<f64>> = spaces.into_iter().map(|s| &s.columns).collect();
        if cols.is_empty() {
            return Self::zero(ambient);
        }
        Self::span_of(&linalg::hstack(ambient, &cols), rule)
    }

    /// Largest principal angle between the two subspaces (radians); pi/2
    /// when the dimensions differ.
    pub fn max_principal_angle(&self, other: &SubspaceBasis) -> f64 {
        if self.rank() != other.rank() {
            return std::f64::consts::FRAC_PI_2;
        }
        if self.rank() == 0 {
            return 0.0;
        }
        let off = &other.columns - &self.columns * (self.columns.transpose() * &other.columns);
        linalg::norm_2(&off).min(1.0).asin()
    }

    pub fn same_subspace(&self, other: &SubspaceBasis, angle_tol: f64) -> bool {
        self.max_principal_angle(other) <= angle_tol
    }

    /// Whether every column of `self` lies in `other` within `tol`.
    pub fn is_subspace_of(&self, other: &SubspaceBasis, tol: f64) -> bool {
        self.columns
            .column_iter()
            .all(|c| other.residual(&c.into_owned()) <= tol)
    }

    pub fn column_vecs(&self) -> Vec<Vec<f64>> {
        self.columns
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }
}

impl Serialize for SubspaceBasis {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("SubspaceBasis", 3)?;
        st.serialize_field("ambient", &self.ambient())?;
        st.serialize_field("rank", &self.rank())?;
        st.serialize_field("columns", &self.column_vecs())?;
        st.end()
    }
}
