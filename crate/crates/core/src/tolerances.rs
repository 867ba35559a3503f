use serde::{Deserialize, Serialize};

use crate::linalg::{RankRule, DEFAULT_ANGLE_TOL, DEFAULT_RANK_TOL};

/// Numerical thresholds used across the analysis.
///
/// `definiteness`: an eigenvalue of a weight counts as zero when
/// `|λ| <= definiteness * ‖W‖₂`.
/// `symmetry`: weights whose asymmetry exceeds `symmetry * max(1, ‖W‖∞)` are
/// rejected; smaller deviations are symmetrized away.
/// `rank`: relative singular-value threshold (see [`RankRule`]).
/// `angle`: largest principal angle (radians) at which subspaces are equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub definiteness: f64,
    pub symmetry: f64,
    pub rank: f64,
    pub angle: f64,
    /// Simple paths enumerated per continent pair before giving up.
    pub path_cap: usize,
    /// Candidate partitions evaluated before giving up.
    pub partition_cap: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            definiteness: 1e-9,
            symmetry: 1e-12,
            rank: DEFAULT_RANK_TOL,
            angle: DEFAULT_ANGLE_TOL,
            path_cap: 10_000,
            partition_cap: 1 << 20,
        }
    }
}

impl Tolerances {
    pub fn rank_rule(&self) -> RankRule {
        RankRule::new(self.rank)
    }
}
