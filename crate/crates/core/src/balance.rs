//! Structural balance and nontrivial balancing sets (NBS).

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GaugeAssignment, MatrixWeightedGraph};
use crate::subspace::SubspaceBasis;
use crate::tolerances::Tolerances;
use crate::topology::Continent;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BalanceError {
    #[error("{units} sign units need {needed} partitions, above the cap of {cap}")]
    SearchBudgetExceeded { units: usize, needed: f64, cap: u64 },
    #[error("NBS null space disagrees with its continent factorization (angle {angle:e})")]
    FactorizationMismatch { angle: f64 },
}

/// Two-sided node partition; canonical when node 0 is in `v1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
}

impl Partition {
    /// From per-node signs (`+1` goes to `v1` after canonical flipping).
    pub fn from_signs(signs: &[i8]) -> Self {
        let flip = signs.first().copied().unwrap_or(1);
        let (mut v1, mut v2) = (Vec::new(), Vec::new());
        for (i, &s) in signs.iter().enumerate() {
            if s * flip > 0 {
                v1.push(i);
            } else {
                v2.push(i);
            }
        }
        Self { v1, v2 }
    }

    pub fn node_count(&self) -> usize {
        self.v1.len() + self.v2.len()
    }

    pub fn signs(&self) -> Vec<i8> {
        let mut s = vec![1i8; self.node_count()];
        for &v in &self.v2 {
            s[v] = -1;
        }
        s
    }

    pub fn is_trivial_split(&self) -> bool {
        self.v2.is_empty()
    }
}

pub fn gauge_from_partition(p: &Partition) -> GaugeAssignment {
    GaugeAssignment::new(p.signs())
}

/// Edges that are negative within a side or positive across sides.
pub fn inconsistent_edges(g: &MatrixWeightedGraph, p: &Partition) -> Vec<usize> {
    inconsistent_for_signs(g, &p.signs())
}

fn inconsistent_for_signs(g: &MatrixWeightedGraph, signs: &[i8]) -> Vec<usize> {
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.sign() != signs[e.u] * signs[e.v])
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BalancingSet {
    pub partition: Partition,
    pub edges: Vec<usize>,
    pub null_basis: SubspaceBasis,
    pub nontrivial: bool,
}

impl BalancingSet {
    pub fn gauge(&self) -> GaugeAssignment {
        gauge_from_partition(&self.partition)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NbsEnumeration {
    pub sets: Vec<BalancingSet>,
    pub unique: bool,
    pub partitions_examined: usize,
}

impl NbsEnumeration {
    pub fn unique_set(&self) -> Option<&BalancingSet> {
        if self.unique {
            self.sets.first()
        } else {
            None
        }
    }
}

fn intersect_nulls(g: &MatrixWeightedGraph, edges: &[usize], tol: &Tolerances) -> SubspaceBasis {
    let d = g.dim();
    if edges.iter().any(|&e| g.edge(e).is_definite()) {
        return SubspaceBasis::zero(d);
    }
    SubspaceBasis::intersect_all(d, edges.iter().map(|&e| &g.edge(e).null), tol.rank_rule())
}

/// `B_K`: common null space of the continent edges that contradict its
/// internal gauge; `{0}` when the gauge itself is inconsistent.
pub fn continent_null_basis(
    g: &MatrixWeightedGraph,
    k: &Continent,
    tol: &Tolerances,
) -> SubspaceBasis {
    if k.conflict.is_some() {
        return SubspaceBasis::zero(g.dim());
    }
    intersect_nulls(g, &continent_inconsistent_edges(g, k), tol)
}

fn continent_inconsistent_edges(g: &MatrixWeightedGraph, k: &Continent) -> Vec<usize> {
    k.induced_edges
        .iter()
        .copied()
        .filter(|&e| {
            let edge = g.edge(e);
            let su = k.sign_of(edge.u).expect("induced edge endpoint");
            let sv = k.sign_of(edge.v).expect("induced edge endpoint");
            edge.sign() != su * sv
        })
        .collect()
}

/// Enumerates all partitions compatible with the continent gauges and
/// keeps those with a nontrivial balancing set.
///
/// Splitting a continent other than along its gauge puts a definite edge in
/// the inconsistent set, so only whole-continent sign flips are searched.
pub fn enumerate_nbs(
    g: &MatrixWeightedGraph,
    continents: &[Continent],
    tol: &Tolerances,
) -> Result<NbsEnumeration, BalanceError> {
    let d = g.dim();
    let n = g.node_count();
    if continents.iter().any(|k| k.conflict.is_some()) {
        return Ok(NbsEnumeration {
            sets: Vec::new(),
            unique: false,
            partitions_examined: 0,
        });
    }
    let units = continents.len();
    let free_bits = units.saturating_sub(1);
    let needed = 2f64.powi(free_bits as i32);
    if needed > tol.partition_cap as f64 {
        return Err(BalanceError::SearchBudgetExceeded {
            units,
            needed,
            cap: tol.partition_cap,
        });
    }
    let count = 1usize << free_bits;

    let mut owner = vec![0usize; n];
    let mut base_sign = vec![0i8; n];
    for k in continents {
        for (&v, &s) in k.nodes.iter().zip(&k.gauge) {
            owner[v] = k.index;
            base_sign[v] = s;
        }
    }
    let internal: Vec<usize> = continents
        .iter()
        .flat_map(|k| continent_inconsistent_edges(g, k))
        .collect();
    let internal_null = intersect_nulls(g, &internal, tol);
    let bridges: Vec<usize> = (0..g.edges().len())
        .filter(|&e| owner[g.edge(e).u] != owner[g.edge(e).v])
        .collect();

    let evaluate = |mask: usize| -> Option<BalancingSet> {
        if internal_null.is_trivial() && d > 0 {
            return None;
        }
        let unit_sign = |k: usize| -> i8 {
            if k == 0 || (mask >> (free_bits - k)) & 1 == 0 {
                1
            } else {
                -1
            }
        };
        let signs: Vec<i8> = (0..n).map(|v| base_sign[v] * unit_sign(owner[v])).collect();
        let bad_bridges: Vec<usize> = bridges
            .iter()
            .copied()
            .filter(|&e| {
                let edge = g.edge(e);
                edge.sign() != signs[edge.u] * signs[edge.v]
            })
            .collect();
        let null = SubspaceBasis::intersect_all(
            d,
            std::iter::once(&internal_null).chain(bad_bridges.iter().map(|&e| &g.edge(e).null)),
            tol.rank_rule(),
        );
        if null.is_trivial() {
            return None;
        }
        let mut edges = internal.clone();
        edges.extend(bad_bridges);
        edges.sort_unstable();
        Some(BalancingSet {
            partition: Partition::from_signs(&signs),
            edges,
            null_basis: null,
            nontrivial: true,
        })
    };

    let sets: Vec<BalancingSet> = if count >= 64 {
        (0..count).into_par_iter().filter_map(evaluate).collect()
    } else {
        (0..count).filter_map(evaluate).collect()
    };
    Ok(NbsEnumeration {
        unique: sets.len() == 1,
        sets,
        partitions_examined: count,
    })
}

/// `null(E^nb)` computed directly and through the continent factorization;
/// the two must agree.
pub fn nbs_null_basis(
    g: &MatrixWeightedGraph,
    nbs: &BalancingSet,
    continents: &[Continent],
    tol: &Tolerances,
) -> Result<SubspaceBasis, BalanceError> {
    let d = g.dim();
    let direct = intersect_nulls(g, &nbs.edges, tol);
    let continent_bases: Vec<SubspaceBasis> = continents
        .iter()
        .map(|k| continent_null_basis(g, k, tol))
        .collect();
    let mut inside = vec![false; g.edges().len()];
    for k in continents {
        for &e in &k.induced_edges {
            inside[e] = true;
        }
    }
    let outside: Vec<&SubspaceBasis> = nbs
        .edges
        .iter()
        .filter(|&&e| !inside[e])
        .map(|&e| &g.edge(e).null)
        .collect();
    let factored =
        SubspaceBasis::intersect_all(d, continent_bases.iter().chain(outside), tol.rank_rule());
    let angle = direct.max_principal_angle(&factored);
    if angle > tol.angle.max(1e-6) {
        return Err(BalanceError::FactorizationMismatch { angle });
    }
    Ok(direct)
}
