//! Matrix weights, their sign calculus, the graph container and the
//! matrix-valued Laplacian.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, sorted_symmetric_eigen};
use crate::subspace::SubspaceBasis;
use crate::tolerances::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("weight {context} is not symmetric (max deviation {deviation:e})")]
    Asymmetric { context: String, deviation: f64 },
    #[error("weight {context} is indefinite (eigenvalues span {min:e} .. {max:e})")]
    Indefinite { context: String, min: f64, max: f64 },
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(String, String),
    #[error("self-loop at node {0}")]
    SelfLoop(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("edge references unknown node {0}")]
    UnknownNode(String),
    #[error("node id {0} appears more than once")]
    DuplicateNode(String),
    #[error("edge between {0} and {1} has a zero weight")]
    ZeroWeight(String, String),
    #[error("unsigned network has a negative weight on edge {0}-{1}")]
    NegativeWeightInUnsignedInput(String, String),
    #[error("graph document has no nodes")]
    Empty,
    #[error("malformed graph document: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    Definite,
    Semidefinite,
    Zero,
}

/// Matrix-valued sign of a weight. `sign == 0` iff the weight is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignClass {
    pub sign: i8,
    pub definiteness: Definiteness,
}

impl SignClass {
    pub fn is_definite(&self) -> bool {
        self.definiteness == Definiteness::Definite
    }
}

/// A real symmetric d x d weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    entries: DMatrix<f64>,
}

impl WeightMatrix {
    /// Accepts `entries` if it is square and symmetric within
    /// `tol.symmetry`; small deviations are averaged out.
    pub fn new(entries: DMatrix<f64>, tol: &Tolerances) -> Result<Self, GraphError> {
        Self::with_context(entries, tol, "")
    }

    fn with_context(
        entries: DMatrix<f64>,
        tol: &Tolerances,
        ctx: &str,
    ) -> Result<Self, GraphError> {
        if !entries.is_square() {
            return Err(GraphError::DimensionMismatch(format!(
                "weight {ctx} is {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let deviation = linalg::max_abs(&(&entries - entries.transpose()));
        let scale = linalg::norm_inf(&entries).max(1.0);
        if deviation > tol.symmetry * scale {
            return Err(GraphError::Asymmetric {
                context: ctx.to_string(),
                deviation,
            });
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(Self { entries: sym })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `sign · W`, positive semidefinite for any classifiable weight.
    pub fn abs(&self, class: SignClass) -> DMatrix<f64> {
        &self.entries * f64::from(class.sign)
    }

    /// Null space of the weight under the definiteness tolerance.
    pub fn null_basis(&self, tol: &Tolerances) -> SubspaceBasis {
        let d = self.dim();
        let (values, vectors) = sorted_symmetric_eigen(&self.entries);
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let thr = tol.definiteness * scale;
        let keep: Vec<usize> = (0..d).filter(|&i| values[i].abs() <= thr).collect();
        let mut cols = DMatrix::zeros(d, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            cols.set_column(j, &vectors.column(i));
        }
        SubspaceBasis::from_orthonormal(cols)
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

/// Matrix-valued sign function.
pub fn classify_weight(w: &WeightMatrix, tol: &Tolerances) -> Result<SignClass, GraphError> {
    classify_with_context(w, tol, "")
}

fn classify_with_context(
    w: &WeightMatrix,
    tol: &Tolerances,
    ctx: &str,
) -> Result<SignClass, GraphError> {
    let d = w.dim();
    let (values, _) = sorted_symmetric_eigen(w.entries());
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Ok(SignClass {
            sign: 0,
            definiteness: Definiteness::Zero,
        });
    }
    let thr = tol.definiteness * scale;
    let pos = values.iter().filter(|&&v| v > thr).count();
    let neg = values.iter().filter(|&&v| v < -thr).count();
    let (sign, strict) = match (pos, neg) {
        (0, 0) => {
            return Ok(SignClass {
                sign: 0,
                definiteness: Definiteness::Zero,
            })
        }
        (p, 0) => (1, p),
        (0, n) => (-1, n),
        _ => {
            return Err(GraphError::Indefinite {
                context: ctx.to_string(),
                min: values[0],
                max: values[d - 1],
            })
        }
    };
    let definiteness = if strict == d {
        Definiteness::Definite
    } else {
        Definiteness::Semidefinite
    };
    Ok(SignClass { sign, definiteness })
}

/// Weight entries as they appear in a graph document: nested rows or a flat
/// row-major list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightEntries {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl WeightEntries {
    fn to_matrix(&self, d: usize) -> Option<DMatrix<f64>> {
        match self {
            WeightEntries::Rows(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return None;
                }
                Some(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
            }
            WeightEntries::Flat(flat) => {
                if flat.len() != d * d {
                    return None;
                }
                Some(DMatrix::from_row_slice(d, d, flat))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub u: String,
    pub v: String,
    pub w: WeightEntries,
}

/// On-disk graph format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub d: usize,
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeDocument>,
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph document serializes")
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: WeightMatrix,
    pub class: SignClass,
    pub null: SubspaceBasis,
}

impl Edge {
    pub fn other(&self, node: usize) -> usize {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn sign(&self) -> i8 {
        self.class.sign
    }

    pub fn is_definite(&self) -> bool {
        self.class.is_definite()
    }
}

#[derive(Debug, Clone)]
pub struct MatrixWeightedGraph {
    node_ids: Vec<String>,
    dim: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
    connected: bool,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl MatrixWeightedGraph {
    /// Builds a graph from node labels and `(u, v, weight)` triples given by
    /// node index.
    pub fn from_parts(
        node_ids: Vec<String>,
        dim: usize,
        raw_edges: Vec<(usize, usize, DMatrix<f64>)>,
        tol: &Tolerances,
    ) -> Result<Self, GraphError> {
        if node_ids.is_empty() {
            return Err(GraphError::Empty);
        }
        if dim == 0 {
            return Err(GraphError::DimensionMismatch("d must be positive".into()));
        }
        {
            let mut seen = HashMap::new();
            for id in &node_ids {
                if seen.insert(id.as_str(), ()).is_some() {
                    return Err(GraphError::DuplicateNode(id.clone()));
                }
            }
        }
        let n = node_ids.len();
        let mut edges = Vec::with_capacity(raw_edges.len());
        let mut index = HashMap::new();
        let mut adjacency = vec![Vec::new(); n];
        for (u, v, m) in raw_edges {
            let (lu, lv) = (node_ids[u].clone(), node_ids[v].clone());
            if u == v {
                return Err(GraphError::SelfLoop(lu));
            }
            if m.nrows() != dim || m.ncols() != dim {
                return Err(GraphError::DimensionMismatch(format!(
                    "edge {lu}-{lv} has a {}x{} weight, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if index.contains_key(&key(u, v)) {
                return Err(GraphError::DuplicateEdge(lu, lv));
            }
            let ctx = format!("{lu}-{lv}");
            let weight = WeightMatrix::with_context(m, tol, &ctx)?;
            let class = classify_with_context(&weight, tol, &ctx)?;
            if class.sign == 0 {
                return Err(GraphError::ZeroWeight(lu, lv));
            }
            let null = weight.null_basis(tol);
            let e = edges.len();
            index.insert(key(u, v), e);
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
            edges.push(Edge {
                u,
                v,
                weight,
                class,
                null,
            });
        }
        let connected = is_connected(n, &adjacency);
        Ok(Self {
            node_ids,
            dim,
            edges,
            adjacency,
            index,
            connected,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// `(neighbor, edge index)` pairs in insertion order.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&key(a, b)).copied()
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            d: self.dim,
            nodes: self.node_ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDocument {
                    u: self.node_ids[e.u].clone(),
                    v: self.node_ids[e.v].clone(),
                    w: WeightEntries::Rows(e.weight.rows()),
                })
                .collect(),
        }
    }

    /// Same topology with every weight replaced by `f(edge)`.
    pub fn map_weights<F>(&self, tol: &Tolerances, mut f: F) -> Result<Self, GraphError>
    where
        F: FnMut(&Edge) -> DMatrix<f64>,
    {
        let raw = self.edges.iter().map(|e| (e.u, e.v, f(e))).collect();
        Self::from_parts(self.node_ids.clone(), self.dim, raw, tol)
    }
}

fn is_connected(n: usize, adjacency: &[Vec<(usize, usize)>]) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = queue.pop_front() {
        for &(y, _) in &adjacency[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                queue.push_back(y);
            }
        }
    }
    count == n
}

fn resolve_edges(doc: &GraphDocument) -> Result<Vec<(usize, usize, DMatrix<f64>)>, GraphError> {
    let lookup: HashMap<&str, usize> = doc
        .nodes
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    doc.edges
        .iter()
        .map(|e| {
            let u = *lookup
                .get(e.u.as_str())
                .ok_or_else(|| GraphError::UnknownNode(e.u.clone()))?;
            let v = *lookup
                .get(e.v.as_str())
                .ok_or_else(|| GraphError::UnknownNode(e.v.clone()))?;
            let m = e.w.to_matrix(doc.d).ok_or_else(|| {
                GraphError::DimensionMismatch(format!(
                    "edge {}-{} weight is not {d}x{d}",
                    e.u,
                    e.v,
                    d = doc.d
                ))
            })?;
            Ok((u, v, m))
        })
        .collect()
}

/// Checks a parsed document and builds the graph container.
pub fn validate_graph(
    doc: &GraphDocument,
    tol: &Tolerances,
) -> Result<MatrixWeightedGraph, GraphError> {
    let raw = resolve_edges(doc)?;
    MatrixWeightedGraph::from_parts(doc.nodes.clone(), doc.d, raw, tol)
}

/// Lifts an unsigned network (all weights PSD) into the signed container.
pub fn lift_unsigned(
    doc: &GraphDocument,
    tol: &Tolerances,
) -> Result<MatrixWeightedGraph, GraphError> {
    let g = validate_graph(doc, tol)?;
    if let Some(e) = g.edges.iter().find(|e| e.sign() < 0) {
        return Err(GraphError::NegativeWeightInUnsignedInput(
            g.node_ids[e.u].clone(),
            g.node_ids[e.v].clone(),
        ));
    }
    Ok(g)
}

/// The dN x dN matrix-valued Laplacian `L = C - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    matrix: DMatrix<f64>,
    nodes: usize,
    dim: usize,
}

impl Laplacian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.nodes * self.dim
    }

    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        let d = self.dim;
        self.matrix.view((i * d, j * d), (d, d)).into_owned()
    }

    pub fn from_matrix(matrix: DMatrix<f64>, nodes: usize, dim: usize) -> Self {
        assert_eq!(matrix.nrows(), nodes * dim);
        Self { matrix, nodes, dim }
    }
}

pub fn build_laplacian(g: &MatrixWeightedGraph) -> Laplacian {
    let d = g.dim;
    let n = g.node_count();
    let mut l = DMatrix::zeros(n * d, n * d);
    for e in &g.edges {
        let abs = e.weight.abs(e.class);
        let (u, v) = (e.u * d, e.v * d);
        let mut add = |r: usize, c: usize, m: &DMatrix<f64>| {
            let mut view = l.view_mut((r, c), (d, d));
            view += m;
        };
        add(u, u, &abs);
        add(v, v, &abs);
        let neg = -e.weight.entries();
        add(u, v, &neg);
        add(v, u, &neg);
    }
    Laplacian {
        matrix: l,
        nodes: n,
        dim: d,
    }
}

/// Signed incidence `H` and `blkdiag{|A_k|}` with `L = Hᵀ W H`.
pub fn incidence_factorization(g: &MatrixWeightedGraph) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = g.dim;
    let n = g.node_count();
    let m = g.edges.len();
    let mut h = DMatrix::zeros(m * d, n * d);
    let mut w = DMatrix::zeros(m * d, m * d);
    let eye = DMatrix::<f64>::identity(d, d);
    for (k, e) in g.edges.iter().enumerate() {
        h.view_mut((k * d, e.u * d), (d, d)).copy_from(&eye);
        h.view_mut((k * d, e.v * d), (d, d))
            .copy_from(&(&eye * -f64::from(e.sign())));
        w.view_mut((k * d, k * d), (d, d))
            .copy_from(&e.weight.abs(e.class));
    }
    (h, w)
}

/// Per-node signs `σ` with `σ[0] = +1`; expands to `D = diag(σ) ⊗ I_d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaugeAssignment {
    signs: Vec<i8>,
}

impl GaugeAssignment {
    /// Normalizes so that the first node carries `+1`.
    pub fn new(mut signs: Vec<i8>) -> Self {
        assert!(
            signs.iter().all(|s| *s == 1 || *s == -1),
            "gauge signs must be ±1"
        );
        if signs.first() == Some(&-1) {
            for s in &mut signs {
                *s = -*s;
            }
        }
        Self { signs }
    }

    pub fn identity(n: usize) -> Self {
        Self { signs: vec![1; n] }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, node: usize) -> i8 {
        self.signs[node]
    }

    pub fn is_identity(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn matrix(&self, d: usize) -> DMatrix<f64> {
        let n = self.signs.len();
        DMatrix::from_fn(n * d, n * d, |i, j| {
            if i == j {
                f64::from(self.signs[i / d])
            } else {
                0.0
            }
        })
    }

    /// Node-wise product of two gauges.
    pub fn compose(&self, other: &GaugeAssignment) -> GaugeAssignment {
        GaugeAssignment::new(
            self.signs
                .iter()
                .zip(&other.signs)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    /// `D (1_N ⊗ B)` for a d x s basis matrix `B`.
    pub fn embed(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let d = basis.nrows();
        let n = self.signs.len();
        let mut out = DMatrix::zeros(n * d, basis.ncols());
        for (i, &s) in self.signs.iter().enumerate() {
            out.view_mut((i * d, 0), (d, basis.ncols()))
                .copy_from(&(basis * f64::from(s)));
        }
        out
    }
}

/// Applies the switching `A_ij -> σ_i σ_j A_ij`.
pub fn gauge_transform(
    g: &MatrixWeightedGraph,
    gauge: &GaugeAssignment,
    tol: &Tolerances,
) -> Result<MatrixWeightedGraph, GraphError> {
    g.map_weights(tol, |e| {
        e.weight.entries() * f64::from(gauge.sign(e.u) * gauge.sign(e.v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    fn class_of(m: DMatrix<f64>) -> Result<SignClass, GraphError> {
        classify_weight(&WeightMatrix::new(m, &tol())?, &tol())
    }

    #[test]
    fn sign_function_cases() {
        let c = class_of(DMatrix::identity(2, 2)).unwrap();
        assert_eq!((c.sign, c.definiteness), (1, Definiteness::Definite));
        let c = class_of(diag(&[1.0, 0.0])).unwrap();
        assert_eq!((c.sign, c.definiteness), (1, Definiteness::Semidefinite));
        let c = class_of(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!((c.sign, c.definiteness), (0, Definiteness::Zero));
        let c = class_of(-diag(&[2.0, 0.0])).unwrap();
        assert_eq!((c.sign, c.definiteness), (-1, Definiteness::Semidefinite));
        assert!(matches!(
            class_of(diag(&[1.0, -1.0])),
            Err(GraphError::Indefinite { .. })
        ));
    }

    #[test]
    fn asymmetry_rejected_or_symmetrized() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            WeightMatrix::new(m, &tol()),
            Err(GraphError::Asymmetric { .. })
        ));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1e-14, 0.0, 1.0]);
        let w = WeightMatrix::new(m, &tol()).unwrap();
        assert_eq!(w.entries()[(0, 1)], w.entries()[(1, 0)]);
    }

    #[test]
    fn tiny_eigenvalue_counts_as_zero() {
        let c = class_of(diag(&[1.0, 1e-12])).unwrap();
        assert_eq!(c.definiteness, Definiteness::Semidefinite);
        let c = class_of(diag(&[1.0, -1e-12])).unwrap();
        assert_eq!(c.sign, 1);
    }

    fn doc(json: &str) -> GraphDocument {
        GraphDocument::from_json(json).unwrap()
    }

    #[test]
    fn validation_cases() {
        let g = validate_graph(
            &doc(r#"{"d":2,"nodes":["1","2"],"edges":[{"u":"1","v":"2","w":[[1,0],[0,1]]}]}"#),
            &tol(),
        )
        .unwrap();
        assert!(g.is_connected());
        let g = validate_graph(&doc(r#"{"d":2,"nodes":["1","2"],"edges":[]}"#), &tol()).unwrap();
        assert!(!g.is_connected());
        let err = validate_graph(
            &doc(r#"{"d":2,"nodes":["1","2"],"edges":[{"u":"1","v":"1","w":[[1,0],[0,1]]}]}"#),
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::SelfLoop(_)));
        let err = validate_graph(
            &doc(r#"{"d":2,"nodes":["1","2"],"edges":[
                {"u":"1","v":"2","w":[1,0,0,1]},{"u":"2","v":"1","w":[1,0,0,1]}]}"#),
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DuplicateEdge(..)));
        let err = validate_graph(
            &doc(r#"{"d":2,"nodes":["1","2"],"edges":[{"u":"1","v":"2","w":[[1,0,0],[0,1,0]]}]}"#),
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DimensionMismatch(_)));
        let err = validate_graph(
            &doc(r#"{"d":2,"nodes":["1","2"],"edges":[{"u":"1","v":"2","w":[[1,0],[0,-1]]}]}"#),
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::Indefinite { .. }));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(GraphDocument::from_json(r#"{"d":1,"nodes":["a"],"edges":[],"x":1}"#).is_err());
        assert!(GraphDocument::from_json(
            r#"{"d":1,"nodes":["a","b"],"edges":[{"u":"a","v":"b","w":[1],"k":0}]}"#
        )
        .is_err());
    }

    #[test]
    fn laplacian_two_nodes() {
        let t = tol();
        let eye = DMatrix::<f64>::identity(2, 2);
        let g = MatrixWeightedGraph::from_parts(
            vec!["1".into(), "2".into()],
            2,
            vec![(0, 1, eye.clone())],
            &t,
        )
        .unwrap();
        let l = build_laplacian(&g);
        assert_eq!(l.block(0, 0), eye);
        assert_eq!(l.block(0, 1), -&eye);
        let g = MatrixWeightedGraph::from_parts(
            vec!["1".into(), "2".into()],
            2,
            vec![(0, 1, -eye.clone())],
            &t,
        )
        .unwrap();
        let l = build_laplacian(&g);
        assert_eq!(l.block(0, 0), eye);
        assert_eq!(l.block(0, 1), eye);
        assert_eq!(l.block(1, 0), eye);
    }

    #[test]
    fn laplacian_triangle_degree_block() {
        // edges (1,2)=I, (2,3)=I, (1,3)=-diag(1,0): C_1 = I + diag(1,0)
        let t = tol();
        let eye = DMatrix::<f64>::identity(2, 2);
        let g = MatrixWeightedGraph::from_parts(
            vec!["1".into(), "2".into(), "3".into()],
            2,
            vec![
                (0, 1, eye.clone()),
                (1, 2, eye.clone()),
                (0, 2, -diag(&[1.0, 0.0])),
            ],
            &t,
        )
        .unwrap();
        let l = build_laplacian(&g);
        assert_eq!(l.block(0, 0), diag(&[2.0, 1.0]));
        assert_eq!(l.block(0, 2), diag(&[1.0, 0.0]));
        let (h, w) = incidence_factorization(&g);
        let rebuilt = h.transpose() * w * h;
        assert!(linalg::max_abs(&(rebuilt - l.matrix())) < 1e-14);
    }

    #[test]
    fn lift_unsigned_cases() {
        let t = tol();
        let g = lift_unsigned(
            &doc(r#"{"d":2,"nodes":["a","b"],"edges":[{"u":"a","v":"b","w":[[2,0],[0,1]]}]}"#),
            &t,
        )
        .unwrap();
        assert_eq!(g.edge(0).class.definiteness, Definiteness::Definite);
        let g = lift_unsigned(
            &doc(r#"{"d":2,"nodes":["a","b"],"edges":[{"u":"a","v":"b","w":[[1,0],[0,0]]}]}"#),
            &t,
        )
        .unwrap();
        assert_eq!(g.edge(0).class.sign, 1);
        assert_eq!(g.edge(0).class.definiteness, Definiteness::Semidefinite);
        let err = lift_unsigned(
            &doc(r#"{"d":2,"nodes":["a","b"],"edges":[{"u":"a","v":"b","w":[[-1,0],[0,-1]]}]}"#),
            &t,
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::NegativeWeightInUnsignedInput(..)));
    }

    #[test]
    fn gauge_normalizes_first_sign() {
        let g = GaugeAssignment::new(vec![-1, 1, -1]);
        assert_eq!(g.signs(), &[1, -1, 1]);
        let d = g.matrix(2);
        assert_eq!(&d * &d, DMatrix::identity(6, 6));
    }
}
