//! The sufficient conditions for bipartite consensus, the necessary and
//! sufficient test for edge-bridged continents, and the block-matrix rank
//! machinery behind them.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::balance::{self, BalanceError, BalancingSet, NbsEnumeration};
use crate::graph::{build_laplacian, MatrixWeightedGraph};
use crate::linalg::{self, RankRule};
use crate::spectral::verify_null_vector;
use crate::subspace::SubspaceBasis;
use crate::tolerances::Tolerances;
use crate::topology::{self, PathDescriptor, TopologyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConditionError {
    #[error("path {nodes:?} carries {count} NBS edges; at most one is allowed")]
    MultipleNBSEdgesOnPath { nodes: Vec<usize>, count: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Balance(#[from] BalanceError),
}

/// Relation between the representatives of two continents forced by the
/// bridging paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Same,
    Opposite,
}

impl Relation {
    pub fn sign(self) -> i8 {
        match self {
            Relation::Same => 1,
            Relation::Opposite => -1,
        }
    }
}

/// Paths of one continent pair split by effective sign.
#[derive(Debug, Clone, Serialize)]
pub struct PathGroups {
    /// Indices of paths with effective sign `+1`.
    pub group_one: Vec<usize>,
    /// Indices of paths with effective sign `-1`.
    pub group_two: Vec<usize>,
    pub s_one: SubspaceBasis,
    pub s_two: SubspaceBasis,
    pub holds: bool,
    pub relation: Option<Relation>,
}

/// Groups the paths by effective sign and tests that exactly one of the
/// two constrained spaces collapses to `{0}`.
pub fn group_paths_by_relation(
    paths: &[PathDescriptor],
    b_l: &SubspaceBasis,
    b_m: &SubspaceBasis,
    tol: &Tolerances,
) -> PathGroups {
    let d = b_l.ambient();
    let rule = tol.rank_rule();
    let endpoint = b_l.sum(b_m, rule);
    let (group_one, group_two): (Vec<usize>, Vec<usize>) =
        (0..paths.len()).partition(|&i| paths[i].effective_sign > 0);
    let constrained = |group: &[usize]| {
        SubspaceBasis::intersect_all(
            d,
            std::iter::once(&endpoint).chain(group.iter().map(|&i| &paths[i].null_span)),
            rule,
        )
    };
    let s_one = constrained(&group_one);
    let s_two = constrained(&group_two);
    let relation = match (s_one.is_trivial(), s_two.is_trivial()) {
        (true, false) => Some(Relation::Same),
        (false, true) => Some(Relation::Opposite),
        _ => None,
    };
    PathGroups {
        group_one,
        group_two,
        s_one,
        s_two,
        holds: relation.is_some(),
        relation,
    }
}

/// The edge null bases of the path are jointly linearly independent.
pub fn check_null_independence(path: &PathDescriptor, tol: &Tolerances) -> bool {
    let d = path.null_span.ambient();
    let cols: Vec<&DMatrix<f64>> = path.edge_nulls.iter().map(|b| b.columns()).collect();
    let total: usize = cols.iter().map(|c| c.ncols()).sum();
    if total == 0 {
        return true;
    }
    linalg::rank(&linalg::hstack(d, &cols), tol.rank_rule()) == total
}

/// Positions (0-based edge offsets) of NBS edges along the path.
pub fn nbs_positions(path: &PathDescriptor, nbs_edges: &BTreeSet<usize>) -> Vec<usize> {
    path.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| nbs_edges.contains(e))
        .map(|(k, _)| k)
        .collect()
}

/// Every non-NBS edge of the path meets `span(B_Kl) ∩ span(B_Km)` only in 0.
/// Vacuously true when the path has no NBS edge.
pub fn check_nbs_path_condition(
    path: &PathDescriptor,
    nbs_edges: &BTreeSet<usize>,
    b_l: &SubspaceBasis,
    b_m: &SubspaceBasis,
    tol: &Tolerances,
) -> Result<bool, ConditionError> {
    let positions = nbs_positions(path, nbs_edges);
    match positions.len() {
        0 => Ok(true),
        1 => {
            let rule = tol.rank_rule();
            let common = b_l.intersect(b_m, rule);
            Ok(path
                .edge_nulls
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != positions[0])
                .all(|(_, null)| null.intersect(&common, rule).is_trivial()))
        }
        count => Err(ConditionError::MultipleNBSEdgesOnPath {
            nodes: path.nodes.clone(),
            count,
        }),
    }
}

/// Linear constraints that a null vector of the Laplacian imposes on the
/// states along one path.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub dim: usize,
    pub edge_signs: Vec<i8>,
    /// Running products `α_i = s_1 ⋯ s_i`.
    pub alphas: Vec<i8>,
    pub relation_sign: i8,
    /// Unknowns `x_1 .. x_{ρ+1}`; rows: endpoint constraint, endpoint
    /// relation, then one row block per edge.
    pub gamma0: DMatrix<f64>,
    /// Present when the relation sign equals the path sign.
    pub r: Option<DMatrix<f64>>,
    pub q: Option<DMatrix<f64>>,
    pub gamma_bar: Option<DMatrix<f64>>,
    /// Present when the relation sign is opposite to the path sign.
    pub gamma_bar0: Option<DMatrix<f64>>,
    pub a_hat: Option<DMatrix<f64>>,
}

impl ConstraintSystem {
    pub fn path_sign(&self) -> i8 {
        *self.alphas.last().expect("nonempty path")
    }

    /// Nullity of `Γ̄` when it was built.
    pub fn gamma_bar_nullity(&self, rule: RankRule) -> Option<usize> {
        self.gamma_bar
            .as_ref()
            .map(|g| g.ncols() - linalg::rank(g, rule))
    }

    /// `α ⊗ I_d`.
    pub fn alpha_span(&self) -> SubspaceBasis {
        let a = DMatrix::from_fn(self.alphas.len(), 1, |i, _| f64::from(self.alphas[i]));
        let eye = DMatrix::identity(self.dim, self.dim);
        let m = linalg::kron(&a, &eye) / (self.alphas.len() as f64).sqrt();
        SubspaceBasis::from_orthonormal(m)
    }
}

/// Builds the path constraint matrices.
///
/// `weights` are the signed edge weights `(A_i, s_i)` in path order,
/// `a_bar` annihilates exactly the admissible endpoint states and `s` is the
/// required relation `x_1 = s x_{ρ+1}`. When the path carries an NBS edge its
/// offset goes in `nbs_edge`, which selects the reduced form.
pub fn build_path_constraint(
    weights: &[(DMatrix<f64>, i8)],
    a_bar: &DMatrix<f64>,
    s: i8,
    nbs_edge: Option<usize>,
    rule: RankRule,
) -> ConstraintSystem {
    let rho = weights.len();
    assert!(rho > 0, "a path has at least one edge");
    let d = a_bar.nrows();
    let eye = DMatrix::<f64>::identity(d, d);
    let edge_signs: Vec<i8> = weights.iter().map(|(_, s)| *s).collect();
    let alphas: Vec<i8> = edge_signs
        .iter()
        .scan(1i8, |acc, &s| {
            *acc *= s;
            Some(*acc)
        })
        .collect();
    let sgn_p = alphas[rho - 1];

    let mut gamma0 = DMatrix::zeros((rho + 2) * d, (rho + 1) * d);
    gamma0.view_mut((0, 0), (d, d)).copy_from(a_bar);
    gamma0.view_mut((d, 0), (d, d)).copy_from(&eye);
    gamma0
        .view_mut((d, rho * d), (d, d))
        .copy_from(&(&eye * -f64::from(s)));
    for (i, (a, si)) in weights.iter().enumerate() {
        let row = (2 + i) * d;
        gamma0.view_mut((row, i * d), (d, d)).copy_from(a);
        gamma0
            .view_mut((row, (i + 1) * d), (d, d))
            .copy_from(&(a * -f64::from(*si)));
    }

    let mut q = DMatrix::zeros(rho * d, rho * d);
    for (i, (a, si)) in weights.iter().enumerate() {
        q.view_mut((i * d, i * d), (d, d))
            .copy_from(&(a * -f64::from(*si)));
    }

    let mut sys = ConstraintSystem {
        dim: d,
        edge_signs,
        alphas: alphas.clone(),
        relation_sign: s,
        gamma0,
        r: None,
        q: None,
        gamma_bar: None,
        gamma_bar0: None,
        a_hat: None,
    };
    if s == sgn_p {
        let mut r = DMatrix::zeros(d, rho * d);
        for (i, &a) in alphas.iter().enumerate() {
            r.view_mut((0, i * d), (d, d))
                .copy_from(&(&eye * -f64::from(a)));
        }
        let proj = pinv(&r, rule) * &r;
        let gamma_bar = &q * (DMatrix::identity(rho * d, rho * d) - proj);
        sys.r = Some(r);
        sys.gamma_bar = Some(gamma_bar);
        sys.q = Some(q);
    } else {
        let mut top = DMatrix::zeros(d, (rho + 1) * d);
        top.view_mut((0, 0), (d, d)).copy_from(&(&eye * 2.0));
        for (i, &a) in alphas.iter().enumerate() {
            let coef = if i + 1 == rho {
                -f64::from(a)
            } else {
                f64::from(a)
            };
            top.view_mut((0, (i + 1) * d), (d, d))
                .copy_from(&(&eye * coef));
        }
        let mut g = DMatrix::zeros((rho + 2) * d, (rho + 1) * d);
        g.view_mut((0, 0), (d, (rho + 1) * d)).copy_from(&top);
        g.view_mut((d, 0), (d, d)).copy_from(a_bar);
        g.view_mut((2 * d, d), (rho * d, rho * d)).copy_from(&q);
        sys.gamma_bar0 = Some(g);
        if let Some(n) = nbs_edge {
            let endpoint = SubspaceBasis::null_of(a_bar, rule);
            let edge = SubspaceBasis::null_of(&weights[n].0, rule);
            let common = endpoint.intersect(&edge, rule);
            sys.a_hat = Some(DMatrix::identity(d, d) - common.projector());
        }
        sys.q = Some(q);
    }
    sys
}

fn pinv(m: &DMatrix<f64>, rule: RankRule) -> DMatrix<f64> {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    m.clone()
        .pseudo_inverse(rule.threshold(scale))
        .expect("non-negative epsilon")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankSplit {
    pub rank_r: usize,
    pub rank_residual: usize,
    pub rank_stacked: usize,
}

impl RankSplit {
    pub fn identity_holds(&self) -> bool {
        self.rank_stacked == self.rank_r + self.rank_residual
    }
}

/// `rank R`, `rank(Q - Q R⁺ R)` and `rank [R; Q]`.
pub fn rank_split(r: &DMatrix<f64>, q: &DMatrix<f64>, rule: RankRule) -> RankSplit {
    assert_eq!(r.ncols(), q.ncols(), "blocks must share columns");
    let residual = q - q * pinv(r, rule) * r;
    let stacked = linalg::vstack(r.ncols(), &[r, q]);
    RankSplit {
        rank_r: linalg::rank(r, rule),
        rank_residual: linalg::rank(&residual, rule),
        rank_stacked: linalg::rank(&stacked, rule),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
    NotApplicable,
}

/// Which of the checked conditions hold. `None` means not evaluated.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionFlags {
    pub unique_nbs: bool,
    pub groups_separate: bool,
    pub node_independent: bool,
    pub bridges_covered: bool,
    pub primary_paths_cover: Option<bool>,
    pub all_bridges_length_one: bool,
    pub null_independence: bool,
    pub nbs_path_condition: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Dependent null bases along a path.
    NullDependence,
    /// Non-NBS edge sharing a null direction with the endpoint continents.
    NbsPathIntersection,
}

/// A vector in `null(L)` outside every gauge-form subspace.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub path_nodes: Vec<usize>,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    pub sign: i8,
    pub effective_sign: i8,
    pub null_span_dim: usize,
    pub union_is_subspace: bool,
    pub nbs_edges: Vec<usize>,
    pub primary: Option<bool>,
    pub null_independent: bool,
    pub nbs_condition: Option<bool>,
    pub gamma0_nullity: Option<usize>,
    pub gamma_bar_nullity: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub from_continent: usize,
    pub to_continent: usize,
    pub group_one: Vec<usize>,
    pub group_two: Vec<usize>,
    pub s_one_dim: usize,
    pub s_two_dim: usize,
    pub groups_separate: bool,
    pub relation: Option<Relation>,
    /// Whether the forced relation agrees with the unique NBS split.
    pub relation_matches_nbs: Option<bool>,
    pub same_continent_bases: bool,
    pub paths: Vec<PathReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinentReport {
    pub index: usize,
    pub nodes: Vec<usize>,
    pub gauge: Vec<i8>,
    pub conflict: Option<Vec<usize>>,
    pub null_basis: SubspaceBasis,
}

#[derive(Debug, Clone, Serialize)]
pub struct NbsReport {
    pub count: usize,
    pub unique: bool,
    pub partitions_examined: usize,
    pub sets: Vec<BalancingSet>,
    /// `null(E^nb)` of the unique NBS, cross-checked against the continent
    /// factorization.
    pub null_basis: Option<SubspaceBasis>,
}

impl NbsReport {
    /// Node signs of the unique NBS, first node positive.
    pub fn unique_signs(&self) -> Option<Vec<i8>> {
        if !self.unique {
            return None;
        }
        self.sets.first().map(|s| s.gauge().signs().to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictedClass {
    Consensus {
        null_basis: SubspaceBasis,
    },
    BipartiteConsensus {
        signs: Vec<i8>,
        null_basis: SubspaceBasis,
    },
    Trivial,
    NotBipartite,
    Inconclusive,
}

impl PredictedClass {
    pub fn label(&self) -> &'static str {
        match self {
            PredictedClass::Consensus { .. } => "consensus",
            PredictedClass::BipartiteConsensus { .. } => "bipartite_consensus",
            PredictedClass::Trivial => "trivial",
            PredictedClass::NotBipartite => "not_bipartite",
            PredictedClass::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub connected: bool,
    /// Verdict of the five path conditions (sufficient).
    #[serde(rename = "verdict_theorem_3_8")]
    pub path_conditions: Verdict,
    /// Verdict of the primary-path variant (sufficient).
    #[serde(rename = "verdict_corollary_3_11")]
    pub primary_path_conditions: Verdict,
    /// Verdict for edge-bridged continents (necessary and sufficient).
    #[serde(rename = "verdict_theorem_3_12")]
    pub edge_bridged: Verdict,
    pub edge_bridged_is_exact: bool,
    pub conditions: ConditionFlags,
    pub failures: Vec<String>,
    pub predicted: PredictedClass,
    pub nbs: NbsReport,
    pub continents: Vec<ContinentReport>,
    pub free_nodes: Vec<usize>,
    pub uncovered_edges: Vec<usize>,
    pub pairs: Vec<PairReport>,
    pub witnesses: Vec<Witness>,
}

/// Runs continents, NBS search, path enumeration and every condition check.
pub fn full_verdict(
    g: &MatrixWeightedGraph,
    tol: &Tolerances,
) -> Result<ConditionReport, ConditionError> {
    let d = g.dim();
    let rule = tol.rank_rule();
    let topo = topology::analyze_topology(g, tol)?;
    let nbs = balance::enumerate_nbs(g, &topo.continents, tol)?;
    let continent_bases: Vec<SubspaceBasis> = topo
        .continents
        .iter()
        .map(|k| balance::continent_null_basis(g, k, tol))
        .collect();
    let unique = nbs.unique_set();
    let nbs_null = match unique {
        Some(set) => Some(balance::nbs_null_basis(g, set, &topo.continents, tol)?),
        None => None,
    };
    let reference: Option<&BalancingSet> = unique.or(nbs.sets.first());
    let nbs_edges: BTreeSet<usize> = reference
        .map(|s| s.edges.iter().copied().collect())
        .unwrap_or_default();
    let nbs_signs = unique.map(|s| s.partition.signs());

    let mut pairs = Vec::new();
    let mut separate_all = true;
    let mut null_indep_all = true;
    let mut nbs_cond_all = true;
    let mut witnesses = Vec::new();
    let mut primary_edges = BTreeSet::new();
    let mut failures = Vec::new();
    let mut all_same_bases = true;

    for pp in &topo.pairs {
        let (l, m) = (pp.from_continent, pp.to_continent);
        let (b_l, b_m) = (&continent_bases[l], &continent_bases[m]);
        let groups = group_paths_by_relation(&pp.paths, b_l, b_m, tol);
        let same_bases = b_l.same_subspace(b_m, tol.angle);
        all_same_bases &= same_bases;
        if !groups.holds {
            separate_all = false;
            failures.push(format!(
                "path groups between continents {l} and {m} both admit nonzero solutions"
            ));
        }
        let relation_matches_nbs = match (&nbs_signs, groups.relation) {
            (Some(signs), Some(rel)) => {
                let (rl, rm) = (topo.continents[l].root(), topo.continents[m].root());
                Some(signs[rl] * signs[rm] == rel.sign())
            }
            _ => None,
        };
        let common = b_l.intersect(b_m, rule);
        let a_bar = DMatrix::identity(d, d) - common.projector();
        let mut path_reports = Vec::new();
        for p in &pp.paths {
            let positions = nbs_positions(p, &nbs_edges);
            let primary = unique.map(|_| positions.len() <= 1);
            if primary == Some(true) {
                primary_edges.extend(p.edges.iter().copied());
            }
            let null_independent = check_null_independence(p, tol);
            if !null_independent {
                null_indep_all = false;
                failures.push(format!("null independence: path {:?}", p.nodes));
                witnesses.push(null_dependence_witness(g, p, tol));
            }
            let nbs_condition = match check_nbs_path_condition(p, &nbs_edges, b_l, b_m, tol) {
                Ok(ok) => Some(ok),
                Err(ConditionError::MultipleNBSEdgesOnPath { .. }) => Some(false),
                Err(e) => return Err(e),
            };
            if nbs_condition == Some(false) {
                nbs_cond_all = false;
                failures.push(format!("nbs path condition: path {:?}", p.nodes));
                if let (Some(set), [n]) = (unique, positions.as_slice()) {
                    if let Some(w) = nbs_intersection_witness(g, p, set, *n, tol) {
                        witnesses.push(w);
                    }
                }
            }
            let (gamma0_nullity, gamma_bar_nullity) = match &nbs_signs {
                Some(signs) => {
                    let s = signs[p.nodes[0]] * signs[*p.nodes.last().expect("nonempty")];
                    let weights: Vec<(DMatrix<f64>, i8)> = p
                        .edges
                        .iter()
                        .map(|&e| (g.edge(e).weight.entries().clone(), g.edge(e).sign()))
                        .collect();
                    let nbs_at = if positions.len() == 1 {
                        Some(positions[0])
                    } else {
                        None
                    };
                    let sys = build_path_constraint(&weights, &a_bar, s, nbs_at, rule);
                    let nullity = sys.gamma0.ncols() - linalg::rank(&sys.gamma0, rule);
                    (Some(nullity), sys.gamma_bar_nullity(rule))
                }
                None => (None, None),
            };
            path_reports.push(PathReport {
                nodes: p.nodes.clone(),
                edges: p.edges.clone(),
                sign: p.sign,
                effective_sign: p.effective_sign,
                null_span_dim: p.null_span.rank(),
                union_is_subspace: p.union_is_subspace,
                nbs_edges: positions.iter().map(|&k| p.edges[k]).collect(),
                primary,
                null_independent,
                nbs_condition,
                gamma0_nullity,
                gamma_bar_nullity,
            });
        }
        pairs.push(PairReport {
            from_continent: l,
            to_continent: m,
            s_one_dim: groups.s_one.rank(),
            s_two_dim: groups.s_two.rank(),
            groups_separate: groups.holds,
            relation: groups.relation,
            relation_matches_nbs,
            same_continent_bases: same_bases,
            group_one: groups.group_one,
            group_two: groups.group_two,
            paths: path_reports,
        });
    }

    let bridges = topo.bridge_edges(g);
    let primary_cover = unique.map(|_| bridges.iter().all(|e| primary_edges.contains(e)));
    let flags = ConditionFlags {
        unique_nbs: unique.is_some(),
        groups_separate: separate_all,
        node_independent: topo.node_independent,
        bridges_covered: topo.covered(),
        primary_paths_cover: primary_cover,
        all_bridges_length_one: topo.free_nodes.is_empty(),
        null_independence: null_indep_all,
        nbs_path_condition: nbs_cond_all,
    };
    if !flags.unique_nbs {
        failures.insert(
            0,
            format!("nbs: {} nontrivial balancing sets", nbs.sets.len()),
        );
    }
    if !flags.node_independent {
        failures.push("paths share interior nodes".into());
    }
    if !flags.bridges_covered {
        failures.push(format!(
            "edges on no bridging path: {:?}",
            topo.uncovered_edges
        ));
    }

    let applies = g.is_connected() && !topo.anchors.is_empty();
    let tail_ok = flags.null_independence && flags.nbs_path_condition;
    let sufficient = |topology_ok: bool| -> Verdict {
        if !applies {
            Verdict::NotApplicable
        } else if !flags.unique_nbs {
            Verdict::Fails
        } else if flags.groups_separate && topology_ok && tail_ok {
            Verdict::Holds
        } else if !topology_ok {
            Verdict::Inconclusive
        } else {
            Verdict::Fails
        }
    };
    let path_conditions = sufficient(flags.node_independent && flags.bridges_covered);
    let primary_path_conditions = sufficient(primary_cover.unwrap_or(false));
    let edge_bridged = if !(applies && flags.all_bridges_length_one) {
        Verdict::NotApplicable
    } else if flags.unique_nbs && flags.groups_separate {
        Verdict::Holds
    } else {
        Verdict::Fails
    };

    let any_witness = witnesses.iter().any(|w| w.verified);
    let single_spanning = topo.continents.len() == 1;
    let predicted = if !g.is_connected() {
        PredictedClass::NotBipartite
    } else if [path_conditions, primary_path_conditions, edge_bridged].contains(&Verdict::Holds) {
        let set = unique.expect("holding verdicts require a unique NBS");
        let null_basis = nbs_null.clone().expect("unique NBS has a null basis");
        if set.partition.is_trivial_split() {
            PredictedClass::Consensus { null_basis }
        } else {
            PredictedClass::BipartiteConsensus {
                signs: set.partition.signs(),
                null_basis,
            }
        }
    } else if nbs.sets.is_empty() && single_spanning {
        PredictedClass::Trivial
    } else if !flags.unique_nbs || any_witness {
        PredictedClass::NotBipartite
    } else if edge_bridged == Verdict::Fails && all_same_bases {
        PredictedClass::NotBipartite
    } else {
        PredictedClass::Inconclusive
    };

    Ok(ConditionReport {
        connected: g.is_connected(),
        path_conditions,
        primary_path_conditions,
        edge_bridged,
        edge_bridged_is_exact: edge_bridged != Verdict::NotApplicable && all_same_bases,
        conditions: flags,
        failures,
        predicted,
        nbs: nbs_report(&nbs, nbs_null),
        continents: topo
            .continents
            .iter()
            .zip(continent_bases)
            .map(|(k, b)| ContinentReport {
                index: k.index,
                nodes: k.nodes.clone(),
                gauge: k.gauge.clone(),
                conflict: k.conflict.clone(),
                null_basis: b,
            })
            .collect(),
        free_nodes: topo.free_nodes.clone(),
        uncovered_edges: topo.uncovered_edges.clone(),
        pairs,
        witnesses,
    })
}

fn nbs_report(nbs: &NbsEnumeration, null_basis: Option<SubspaceBasis>) -> NbsReport {
    const LISTED: usize = 16;
    NbsReport {
        count: nbs.sets.len(),
        unique: nbs.unique,
        partitions_examined: nbs.partitions_examined,
        sets: nbs.sets.iter().take(LISTED).cloned().collect(),
        null_basis,
    }
}

fn witness_tolerance(g: &MatrixWeightedGraph) -> f64 {
    1e-10 * linalg::norm_inf(build_laplacian(g).matrix()).max(1.0)
}

fn finish_witness(
    g: &MatrixWeightedGraph,
    kind: WitnessKind,
    p: &PathDescriptor,
    x: DVector<f64>,
) -> Witness {
    let report = verify_null_vector(g, &x, witness_tolerance(g));
    let nonzero = linalg::vec_max_abs(&x) > 0.0;
    Witness {
        kind,
        path_nodes: p.nodes.clone(),
        residual: report.max_residual,
        verified: report.passes && nonzero,
        vector: x.iter().copied().collect(),
    }
}

/// A null vector supported on the path interior, built from a dependency
/// `Σ B_k c_k = 0` among the edge null bases.
///
/// It lies in `null(L)` whenever the path interior touches no other edge.
pub fn null_dependence_witness(
    g: &MatrixWeightedGraph,
    p: &PathDescriptor,
    tol: &Tolerances,
) -> Witness {
    let d = g.dim();
    let rule = tol.rank_rule();
    let cols: Vec<&DMatrix<f64>> = p.edge_nulls.iter().map(|b| b.columns()).collect();
    let stacked = linalg::hstack(d, &cols);
    let dep = linalg::null_space(&stacked, rule);
    let mut x = DVector::zeros(g.node_count() * d);
    if dep.ncols() > 0 {
        let c = dep.column(0);
        let mut offset = 0;
        let mut state = DVector::<f64>::zeros(d);
        let mut alpha_prev = 1i8;
        for (k, null) in p.edge_nulls.iter().enumerate() {
            let r = null.rank();
            let y = null.columns() * c.rows(offset, r) * f64::from(alpha_prev);
            offset += r;
            let s = g.edge(p.edges[k]).sign();
            state = (&state - y) * f64::from(s);
            alpha_prev *= s;
            if k + 1 < p.edges.len() {
                x.rows_mut(p.nodes[k + 1] * d, d).copy_from(&state);
            }
        }
    }
    finish_witness(g, WitnessKind::NullDependence, p, x)
}

/// Flips the NBS gauge on the path nodes between the NBS edge and an edge
/// whose null space meets `null(E^nb \ {n})`, then embeds a common vector.
fn nbs_intersection_witness(
    g: &MatrixWeightedGraph,
    p: &PathDescriptor,
    set: &BalancingSet,
    n: usize,
    tol: &Tolerances,
) -> Option<Witness> {
    let d = g.dim();
    let rule = tol.rank_rule();
    let n_edge = p.edges[n];
    let rest: Vec<&SubspaceBasis> = set
        .edges
        .iter()
        .filter(|&&e| e != n_edge)
        .map(|&e| &g.edge(e).null)
        .collect();
    let base = SubspaceBasis::intersect_all(d, rest, rule);
    for (i, &e) in p.edges.iter().enumerate() {
        if i == n {
            continue;
        }
        let common = base.intersect(&g.edge(e).null, rule);
        if common.is_trivial() {
            continue;
        }
        let v = common.columns().column(0).into_owned();
        let mut signs = set.partition.signs();
        let (lo, hi) = (n.min(i), n.max(i));
        for &node in &p.nodes[lo + 1..=hi] {
            signs[node] = -signs[node];
        }
        let mut x = DVector::zeros(g.node_count() * d);
        for (node, &s) in signs.iter().enumerate() {
            x.rows_mut(node * d, d).copy_from(&(&v * f64::from(s)));
        }
        return Some(finish_witness(g, WitnessKind::NbsPathIntersection, p, x));
    }
    None
}
