//! Continents (maximal definite-connected node sets) and the semidefinite
//! paths bridging them.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::graph::MatrixWeightedGraph;
use crate::subspace::SubspaceBasis;
use crate::tolerances::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error(
        "continent {continent} has a definite cycle with negative sign through nodes {cycle:?}"
    )]
    GaugeConflict { continent: usize, cycle: Vec<usize> },
    #[error("more than {cap} paths between continents {from} and {to}")]
    PathBudgetExceeded { from: usize, to: usize, cap: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct Continent {
    pub index: usize,
    /// Node indices in document order; the first one is the root.
    pub nodes: Vec<usize>,
    pub tree_edges: Vec<usize>,
    /// Every edge with both endpoints in the continent.
    pub induced_edges: Vec<usize>,
    /// Sign of each entry of `nodes` relative to the root.
    pub gauge: Vec<i8>,
    /// Cycle of a definite non-tree edge whose sign contradicts `gauge`.
    pub conflict: Option<Vec<usize>>,
}

impl Continent {
    pub fn root(&self) -> usize {
        self.nodes[0]
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }

    pub fn sign_of(&self, node: usize) -> Option<i8> {
        self.nodes.binary_search(&node).ok().map(|i| self.gauge[i])
    }

    pub fn is_singleton(&self) -> bool {
        self.nodes.len() == 1
    }
}

/// Connected components over definite edges, with BFS spanning trees in
/// document order. Nodes without definite edges come out as singletons.
pub fn detect_continents(g: &MatrixWeightedGraph) -> Vec<Continent> {
    let n = g.node_count();
    let mut owner = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut sign = vec![0i8; n];
    let mut out = Vec::new();
    for start in 0..n {
        if owner[start] != usize::MAX {
            continue;
        }
        let index = out.len();
        owner[start] = index;
        sign[start] = 1;
        let mut nodes = vec![start];
        let mut tree_edges = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let mut next: Vec<(usize, usize)> = g
                .neighbors(x)
                .iter()
                .copied()
                .filter(|&(_, e)| g.edge(e).is_definite())
                .collect();
            next.sort();
            for (y, e) in next {
                if owner[y] == usize::MAX {
                    owner[y] = index;
                    parent_edge[y] = e;
                    sign[y] = sign[x] * g.edge(e).sign();
                    nodes.push(y);
                    tree_edges.push(e);
                    queue.push_back(y);
                }
            }
        }
        nodes.sort_unstable();
        out.push(Continent {
            index,
            gauge: nodes.iter().map(|&v| sign[v]).collect(),
            nodes,
            tree_edges,
            induced_edges: Vec::new(),
            conflict: None,
        });
    }
    for (e, edge) in g.edges().iter().enumerate() {
        if owner[edge.u] != owner[edge.v] {
            continue;
        }
        let k = &mut out[owner[edge.u]];
        k.induced_edges.push(e);
        let consistent = edge.sign() == sign[edge.u] * sign[edge.v];
        if edge.is_definite() && !consistent && k.conflict.is_none() && !k.tree_edges.contains(&e) {
            k.conflict = Some(tree_cycle(g, &parent_edge, k.root(), edge.u, edge.v));
        }
    }
    out
}

/// Nodes of the cycle closed by the non-tree edge `(u, v)`.
fn tree_cycle(
    g: &MatrixWeightedGraph,
    parent_edge: &[usize],
    root: usize,
    u: usize,
    v: usize,
) -> Vec<usize> {
    let to_root = |mut x: usize| {
        let mut p = vec![x];
        while x != root {
            x = g.edge(parent_edge[x]).other(x);
            p.push(x);
        }
        p
    };
    let pu = to_root(u);
    let pv = to_root(v);
    let on_v: BTreeSet<usize> = pv.iter().copied().collect();
    let meet_pos = pu
        .iter()
        .position(|x| on_v.contains(x))
        .unwrap_or(pu.len() - 1);
    let meet = pu[meet_pos];
    let mut cycle: Vec<usize> = pu[..=meet_pos].to_vec();
    let v_pos = pv.iter().position(|&x| x == meet).unwrap_or(pv.len() - 1);
    cycle.extend(pv[..v_pos].iter().rev());
    cycle
}

/// Per-node signs of the continent, or the conflicting cycle.
pub fn continent_gauge(k: &Continent) -> Result<Vec<i8>, TopologyError> {
    match &k.conflict {
        Some(cycle) => Err(TopologyError::GaugeConflict {
            continent: k.index,
            cycle: cycle.clone(),
        }),
        None => Ok(k.gauge.clone()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathDescriptor {
    pub from_continent: usize,
    pub to_continent: usize,
    /// `τ_1 .. τ_{ρ+1}`.
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    pub sign: i8,
    /// `sgn(P)` adjusted by the internal gauges of both endpoints.
    pub effective_sign: i8,
    #[serde(skip)]
    pub edge_nulls: Vec<SubspaceBasis>,
    /// Span of the union of the edge null spaces.
    pub null_span: SubspaceBasis,
    /// Whether the union of edge null spaces is itself a subspace.
    pub union_is_subspace: bool,
}

impl PathDescriptor {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn interior(&self) -> &[usize] {
        &self.nodes[1..self.nodes.len() - 1]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairPaths {
    pub from_continent: usize,
    pub to_continent: usize,
    pub paths: Vec<PathDescriptor>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Topology {
    pub continents: Vec<Continent>,
    /// Continents with at least two nodes, in index order.
    pub anchors: Vec<usize>,
    /// Nodes outside every anchor.
    pub free_nodes: Vec<usize>,
    pub pairs: Vec<PairPaths>,
    /// Paths are pairwise disjoint except at their endpoints.
    pub node_independent: bool,
    /// Edges outside the anchors that no enumerated path uses.
    pub uncovered_edges: Vec<usize>,
    #[serde(skip)]
    owner: Vec<usize>,
}

impl Topology {
    pub fn continent_of(&self, node: usize) -> usize {
        self.owner[node]
    }

    pub fn is_anchor_node(&self, node: usize) -> bool {
        !self.continents[self.owner[node]].is_singleton()
    }

    pub fn all_paths(&self) -> impl Iterator<Item = &PathDescriptor> {
        self.pairs.iter().flat_map(|p| p.paths.iter())
    }

    /// Edges not induced inside an anchor.
    pub fn bridge_edges(&self, g: &MatrixWeightedGraph) -> Vec<usize> {
        (0..g.edges().len())
            .filter(|&e| {
                let edge = g.edge(e);
                let (a, b) = (self.owner[edge.u], self.owner[edge.v]);
                a != b || self.continents[a].is_singleton()
            })
            .collect()
    }

    pub fn covered(&self) -> bool {
        self.uncovered_edges.is_empty()
    }
}

/// All simple paths from `K_l` to `K_m` whose interior avoids every anchor.
pub fn enumerate_connecting_paths(
    g: &MatrixWeightedGraph,
    continents: &[Continent],
    l: usize,
    m: usize,
    cap: usize,
    tol: &Tolerances,
) -> Result<Vec<PathDescriptor>, TopologyError> {
    let n = g.node_count();
    let mut owner = vec![0; n];
    for k in continents {
        for &v in &k.nodes {
            owner[v] = k.index;
        }
    }
    let mut found: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut on_path = vec![false; n];
    for &start in &continents[l].nodes {
        let mut nodes = vec![start];
        let mut edges = Vec::new();
        on_path[start] = true;
        extend_paths(
            g,
            continents,
            &owner,
            m,
            cap,
            l,
            &mut nodes,
            &mut edges,
            &mut on_path,
            &mut found,
        )?;
        on_path[start] = false;
    }
    Ok(found
        .into_iter()
        .map(|(nodes, edges)| describe_path(g, continents, l, m, nodes, edges, tol))
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn extend_paths(
    g: &MatrixWeightedGraph,
    continents: &[Continent],
    owner: &[usize],
    target: usize,
    cap: usize,
    source: usize,
    nodes: &mut Vec<usize>,
    edges: &mut Vec<usize>,
    on_path: &mut [bool],
    found: &mut Vec<(Vec<usize>, Vec<usize>)>,
) -> Result<(), TopologyError> {
    let x = *nodes.last().expect("path has a start");
    for &(y, e) in g.neighbors(x) {
        if on_path[y] {
            continue;
        }
        let k = owner[y];
        if k == target {
            if found.len() == cap {
                return Err(TopologyError::PathBudgetExceeded {
                    from: source,
                    to: target,
                    cap,
                });
            }
            let mut p_nodes = nodes.clone();
            p_nodes.push(y);
            let mut p_edges = edges.clone();
            p_edges.push(e);
            found.push((p_nodes, p_edges));
        } else if continents[k].is_singleton() {
            on_path[y] = true;
            nodes.push(y);
            edges.push(e);
            extend_paths(
                g, continents, owner, target, cap, source, nodes, edges, on_path, found,
            )?;
            nodes.pop();
            edges.pop();
            on_path[y] = false;
        }
    }
    Ok(())
}

fn describe_path(
    g: &MatrixWeightedGraph,
    continents: &[Continent],
    l: usize,
    m: usize,
    nodes: Vec<usize>,
    edges: Vec<usize>,
    tol: &Tolerances,
) -> PathDescriptor {
    let d = g.dim();
    let sign = edges.iter().map(|&e| g.edge(e).sign()).product::<i8>();
    let first = continents[l].sign_of(nodes[0]).unwrap_or(1);
    let last = continents[m]
        .sign_of(*nodes.last().expect("nonempty"))
        .unwrap_or(1);
    let edge_nulls: Vec<SubspaceBasis> = edges.iter().map(|&e| g.edge(e).null.clone()).collect();
    let null_span = SubspaceBasis::sum_all(d, edge_nulls.iter(), tol.rank_rule());
    let largest = edge_nulls.iter().map(|b| b.rank()).max().unwrap_or(0);
    PathDescriptor {
        from_continent: l,
        to_continent: m,
        nodes,
        edges,
        sign,
        effective_sign: sign * first * last,
        edge_nulls,
        union_is_subspace: null_span.rank() == largest,
        null_span,
    }
}

/// Continents, anchor pairs with their bridging paths, and the
/// independence and coverage verdicts.
pub fn analyze_topology(
    g: &MatrixWeightedGraph,
    tol: &Tolerances,
) -> Result<Topology, TopologyError> {
    let continents = detect_continents(g);
    let mut owner = vec![0; g.node_count()];
    for k in &continents {
        for &v in &k.nodes {
            owner[v] = k.index;
        }
    }
    let anchors: Vec<usize> = continents
        .iter()
        .filter(|k| !k.is_singleton())
        .map(|k| k.index)
        .collect();
    let free_nodes: Vec<usize> = continents
        .iter()
        .filter(|k| k.is_singleton())
        .map(|k| k.nodes[0])
        .collect();
    let mut pairs = Vec::new();
    for (i, &l) in anchors.iter().enumerate() {
        for &m in &anchors[i + 1..] {
            let paths = enumerate_connecting_paths(g, &continents, l, m, tol.path_cap, tol)?;
            if !paths.is_empty() {
                pairs.push(PairPaths {
                    from_continent: l,
                    to_continent: m,
                    paths,
                });
            }
        }
    }
    let mut seen_interior = BTreeSet::new();
    let mut node_independent = true;
    let mut used = BTreeSet::new();
    for p in pairs.iter().flat_map(|p| p.paths.iter()) {
        for &v in p.interior() {
            if !seen_interior.insert(v) {
                node_independent = false;
            }
        }
        used.extend(p.edges.iter().copied());
    }
    let mut topo = Topology {
        continents,
        anchors,
        free_nodes,
        pairs,
        node_independent,
        uncovered_edges: Vec::new(),
        owner,
    };
    topo.uncovered_edges = topo
        .bridge_edges(g)
        .into_iter()
        .filter(|e| !used.contains(e))
        .collect();
    Ok(topo)
}
