//! Seeded synthesis of instances that meet or break the bipartite-consensus
//! conditions on purpose.

use nalgebra::{DMatrix, DVector};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conditions::{full_verdict, ConditionReport, Verdict};
use crate::graph::{GraphError, MatrixWeightedGraph};
use crate::subspace::SubspaceBasis;
use crate::tolerances::Tolerances;

/// Redraws allowed before a recipe is declared degenerate.
const MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("infeasible recipe: {0}")]
    InfeasibleRecipe(String),
    #[error("no admissible draw after {0} attempts")]
    Degenerate(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullFrames {
    /// Null directions are distinct columns of one random orthogonal frame.
    Orthogonal,
    /// Every null direction is drawn independently.
    Random,
    /// Null directions are standard basis vectors.
    Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    None,
    Condition2,
    Condition3,
    Condition4,
    Condition5,
    IndefiniteCycle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecipe {
    pub seed: u64,
    pub d: usize,
    pub continents: usize,
    pub continent_size: usize,
    /// Minimum number of gauge-consistent paths between consecutive
    /// continents.
    pub bridges: usize,
    pub max_path_len: usize,
    pub nulls: NullFrames,
    /// Draw a nontrivial bipartition instead of plain consensus.
    pub bipartite: bool,
    /// Add one NBS bridge per consecutive pair.
    pub nbs_bridges: bool,
    /// Give every continent an internal NBS edge.
    pub internal_nbs: bool,
    pub violate: Violation,
}

impl Default for InstanceRecipe {
    fn default() -> Self {
        Self {
            seed: 0,
            d: 2,
            continents: 2,
            continent_size: 2,
            bridges: 2,
            max_path_len: 1,
            nulls: NullFrames::Orthogonal,
            bipartite: false,
            nbs_bridges: false,
            internal_nbs: false,
            violate: Violation::None,
        }
    }
}

/// What the construction guarantees about the synthesized graph.
#[derive(Debug, Clone, Serialize)]
pub struct Expectation {
    pub recipe: InstanceRecipe,
    /// `consensus`, `bipartite_consensus`, `cluster` or `trivial`.
    pub expected_class: String,
    pub expected_signs: Option<Vec<i8>>,
    pub expected_null_dim: Option<usize>,
    /// Null vector of the Laplacian that is not of gauge form.
    pub witness: Option<Vec<f64>>,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: MatrixWeightedGraph,
    pub expectation: Expectation,
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal initial state, reproducible from `seed`.
pub fn initial_state(len: usize, seed: u64) -> DVector<f64> {
    let mut rng = rng_for(seed);
    DVector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn random_orthogonal<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    gaussian_matrix(d, d, rng).qr().q()
}

fn unit_vector<R: Rng>(d: usize, rng: &mut R) -> DVector<f64> {
    let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = v.norm();
    if n < 1e-6 {
        let mut e = DVector::zeros(d);
        e[0] = 1.0;
        e
    } else {
        v / n
    }
}

/// Symmetric matrix with eigenvalues in `[0.5, 2]` on the orthogonal
/// complement of `null_basis` and zero on it.
pub fn make_psd<R: Rng>(d: usize, null_basis: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let r = null_basis.ncols();
    let mut m = DMatrix::zeros(d, d);
    if r == d {
        return m;
    }
    let complement = if r == 0 {
        random_orthogonal(d, rng)
    } else {
        let span = SubspaceBasis::from_orthonormal(null_basis.clone());
        let proj = DMatrix::identity(d, d) - span.projector();
        let raw = &proj * gaussian_matrix(d, d - r, rng);
        raw.qr().q()
    };
    for k in 0..d - r {
        let lambda = rng.random_range(0.5..=2.0);
        let c = complement.column(k);
        m += c * c.transpose() * lambda;
    }
    (&m + m.transpose()) * 0.5
}

pub fn random_definite<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    make_psd(d, &DMatrix::zeros(d, 0), rng)
}

/// Source of null directions for one instance.
struct Frames {
    kind: NullFrames,
    frame: DMatrix<f64>,
}

impl Frames {
    fn new<R: Rng>(kind: NullFrames, d: usize, rng: &mut R) -> Self {
        let frame = match kind {
            NullFrames::Axis => DMatrix::identity(d, d),
            _ => random_orthogonal(d, rng),
        };
        Self { kind, frame }
    }

    fn direction<R: Rng>(&self, rng: &mut R) -> DMatrix<f64> {
        let d = self.frame.nrows();
        match self.kind {
            NullFrames::Random => DMatrix::from_column_slice(d, 1, unit_vector(d, rng).as_slice()),
            _ => {
                let i = rng.random_range(0..d);
                DMatrix::from_fn(d, 1, |r, _| self.frame[(r, i)])
            }
        }
    }

    /// `k` orthonormal directions.
    fn subspace<R: Rng>(&self, k: usize, rng: &mut R) -> DMatrix<f64> {
        let d = self.frame.nrows();
        match self.kind {
            NullFrames::Random => gaussian_matrix(d, k, rng)
                .qr()
                .q()
                .columns(0, k)
                .into_owned(),
            _ => {
                let mut idx: Vec<usize> = (0..d).collect();
                idx.shuffle(rng);
                DMatrix::from_fn(d, k, |i, j| self.frame[(i, idx[j])])
            }
        }
    }
}

/// Accumulates nodes and signed edges.
struct Builder {
    d: usize,
    signs: Vec<i8>,
    edges: Vec<(usize, usize, DMatrix<f64>)>,
    /// Set when a requested edge already existed; the draw is discarded.
    clash: bool,
}

impl Builder {
    fn new(d: usize) -> Self {
        Self {
            d,
            signs: Vec::new(),
            edges: Vec::new(),
            clash: false,
        }
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges
            .iter()
            .any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u))
    }

    fn node(&mut self, sign: i8) -> usize {
        self.signs.push(sign);
        self.signs.len() - 1
    }

    /// Edge whose sign agrees with the node signs (`consistent`) or
    /// contradicts them.
    fn edge(&mut self, u: usize, v: usize, psd: DMatrix<f64>, consistent: bool) {
        if self.has_edge(u, v) {
            self.clash = true;
            return;
        }
        let s = self.signs[u] * self.signs[v] * if consistent { 1 } else { -1 };
        self.edges.push((u, v, psd * f64::from(s)));
    }

    /// Star-shaped continent with definite weights; returns its nodes.
    fn continent<R: Rng>(&mut self, size: usize, bipartite: bool, rng: &mut R) -> Vec<usize> {
        let nodes: Vec<usize> = (0..size)
            .map(|_| {
                let s = if bipartite && rng.random_bool(0.5) {
                    -1
                } else {
                    1
                };
                self.node(s)
            })
            .collect();
        for &leaf in &nodes[1..] {
            let w = random_definite(self.d, rng);
            self.edge(nodes[0], leaf, w, true);
        }
        nodes
    }

    fn build(self, tol: &Tolerances) -> Result<Option<(MatrixWeightedGraph, Vec<i8>)>, GraphError> {
        if self.clash {
            return Ok(None);
        }
        let n = self.signs.len();
        let ids = (1..=n).map(|i| i.to_string()).collect();
        let g = MatrixWeightedGraph::from_parts(ids, self.d, self.edges, tol)?;
        let mut signs = self.signs;
        if signs[0] < 0 {
            signs.iter_mut().for_each(|s| *s = -*s);
        }
        Ok(Some((g, signs)))
    }
}

fn class_for(signs: &[i8]) -> (&'static str, Option<Vec<i8>>) {
    if signs.iter().all(|&s| s == 1) {
        ("consensus", None)
    } else {
        ("bipartite_consensus", Some(signs.to_vec()))
    }
}

fn require_d(recipe: &InstanceRecipe, min: usize, what: &str) -> Result<(), GeneratorError> {
    if recipe.d < min {
        return Err(GeneratorError::InfeasibleRecipe(format!(
            "{what} needs d >= {min} for semidefinite weights, got d = {}",
            recipe.d
        )));
    }
    Ok(())
}

/// Builds the instance described by `recipe`. Deterministic in the recipe.
pub fn synthesize(recipe: &InstanceRecipe) -> Result<Instance, GeneratorError> {
    let tol = Tolerances::default();
    if recipe.d == 0 || recipe.continents == 0 || recipe.continent_size == 0 {
        return Err(GeneratorError::InfeasibleRecipe(
            "d, continents and continent size must be positive".into(),
        ));
    }
    let mut rng = rng_for(recipe.seed);
    for _ in 0..MAX_ATTEMPTS {
        let attempt = match recipe.violate {
            Violation::None => holds_family(recipe, &mut rng, &tol)?,
            Violation::Condition2 => condition2(recipe, &mut rng, &tol)?,
            Violation::Condition3 => condition3(recipe, &mut rng, &tol)?,
            Violation::Condition4 => condition4(recipe, &mut rng, &tol)?,
            Violation::Condition5 => condition5(recipe, &mut rng, &tol)?,
            Violation::IndefiniteCycle => indefinite_cycle(recipe, &mut rng, &tol)?,
        };
        if let Some(instance) = attempt {
            return Ok(instance);
        }
    }
    Err(GeneratorError::Degenerate(MAX_ATTEMPTS))
}

fn verdict(g: &MatrixWeightedGraph, tol: &Tolerances) -> Option<ConditionReport> {
    full_verdict(g, tol).ok()
}

/// Chain of continents where every consecutive pair is joined by
/// node-disjoint gauge-consistent paths with one-dimensional edge nulls,
/// plus optional NBS edges sharing one common null space.
fn holds_family(
    recipe: &InstanceRecipe,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<Option<Instance>, GeneratorError> {
    let d = recipe.d;
    if recipe.continents > 1 {
        require_d(recipe, 2, "bridging continents")?;
    }
    let internal = recipe.internal_nbs && d >= 2 && recipe.continent_size >= 3;
    let nbs_bridges = recipe.nbs_bridges && d >= 2 && recipe.continents > 1;
    let frames = Frames::new(recipe.nulls, d, rng);
    let w_dim = if d >= 2 { rng.random_range(1..d) } else { 0 };
    let common = frames.subspace(w_dim, rng);
    let endpoint_dim = if internal { w_dim } else { d };
    let max_len = recipe.max_path_len.clamp(1, d.saturating_sub(1).max(1));
    const FREE_NODE_BUDGET: usize = 8;

    let mut b = Builder::new(d);
    let mut continents = Vec::new();
    for _ in 0..recipe.continents {
        let nodes = b.continent(recipe.continent_size, recipe.bipartite, rng);
        if internal {
            let w = make_psd(d, &common, rng);
            b.edge(nodes[1], nodes[2], w, false);
        }
        continents.push(nodes);
    }
    let mut free = 0;
    for pair in continents.windows(2) {
        let (kl, km) = (&pair[0], &pair[1]);
        let mut codim = 0;
        let mut paths = 0;
        while paths < recipe.bridges.max(2) || codim < endpoint_dim {
            let mut len = rng.random_range(1..=max_len);
            if free + len - 1 > FREE_NODE_BUDGET {
                len = 1;
            }
            let start = kl[rng.random_range(0..kl.len())];
            let end = km[rng.random_range(0..km.len())];
            let mut prev = start;
            for k in 0..len {
                let next = if k + 1 == len {
                    end
                } else {
                    free += 1;
                    let s = if recipe.bipartite && rng.random_bool(0.5) {
                        -1
                    } else {
                        1
                    };
                    b.node(s)
                };
                let w = make_psd(d, &frames.direction(rng), rng);
                b.edge(prev, next, w, true);
                prev = next;
            }
            codim += d - len;
            paths += 1;
        }
        if nbs_bridges {
            let u = kl[rng.random_range(0..kl.len())];
            let v = km[rng.random_range(0..km.len())];
            let w = make_psd(d, &common, rng);
            b.edge(u, v, w, false);
        }
    }
    let has_nbs = internal || nbs_bridges;
    let Some((g, signs)) = b.build(tol)? else {
        return Ok(None);
    };
    if recipe.bipartite && signs.iter().all(|&s| s == 1) && g.node_count() > 1 {
        return Ok(None);
    }
    let Some(report) = verdict(&g, tol) else {
        return Ok(None);
    };
    let c = &report.conditions;
    let all = c.unique_nbs
        && c.groups_separate
        && c.node_independent
        && c.bridges_covered
        && c.null_independence
        && c.nbs_path_condition;
    if !all || report.nbs.unique_signs() != Some(signs.clone()) {
        return Ok(None);
    }
    let (class, expected_signs) = class_for(&signs);
    Ok(Some(Instance {
        expectation: Expectation {
            recipe: recipe.clone(),
            expected_class: class.into(),
            expected_signs,
            expected_null_dim: Some(if has_nbs { w_dim } else { d }),
            witness: None,
            note: "all five path conditions hold by construction".into(),
        },
        graph: g,
    }))
}

fn random_sign<R: Rng>(bipartite: bool, rng: &mut R) -> i8 {
    if bipartite && rng.random_bool(0.5) {
        -1
    } else {
        1
    }
}

fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    m.column(0).into_owned()
}

/// `x_i = sign_i * v` for every node.
fn gauge_vector(signs: &[i8], v: &DVector<f64>) -> Vec<f64> {
    signs
        .iter()
        .flat_map(|&s| v.iter().map(move |x| f64::from(s) * x))
        .collect()
}

fn expectation(
    recipe: &InstanceRecipe,
    class: &str,
    signs: Option<Vec<i8>>,
    null_dim: usize,
    witness: Option<Vec<f64>>,
    note: &str,
) -> Expectation {
    Expectation {
        recipe: recipe.clone(),
        expected_class: class.into(),
        expected_signs: signs,
        expected_null_dim: Some(null_dim),
        witness,
        note: note.into(),
    }
}

/// Two continents sharing an internal NBS null space `W` of dimension
/// `d - 1`, joined by a consistent two-edge path and an NBS bridge with
/// null `W`. Both path groups keep nontrivial solution spaces.
fn condition2(
    recipe: &InstanceRecipe,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<Option<Instance>, GeneratorError> {
    require_d(recipe, 2, "a condition-2 violation")?;
    let d = recipe.d;
    let frames = Frames::new(recipe.nulls, d, rng);
    let common = frames.subspace(d - 1, rng);
    // Path nulls must avoid `W` while their span meets it, which frame
    // columns alone cannot do; mix one column inside `W` with the one
    // outside.
    let (n1, n2) = if recipe.nulls == NullFrames::Random {
        (frames.direction(rng), frames.direction(rng))
    } else {
        let inside = common.column(0).into_owned();
        let proj = SubspaceBasis::from_orthonormal(common.clone()).projector();
        let outside = (DMatrix::identity(d, d) - proj) * &frames.frame;
        let j = outside
            .column_iter()
            .position(|c| c.norm() > 0.5)
            .expect("W has codimension one");
        let outside = frames.frame.column(j).into_owned();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let col = |v: DVector<f64>| DMatrix::from_column_slice(d, 1, v.as_slice());
        (col((&inside + &outside) * h), col((&inside - &outside) * h))
    };
    let size = recipe.continent_size.max(3);
    let mut b = Builder::new(d);
    let kl = b.continent(size, recipe.bipartite, rng);
    let km = b.continent(size, recipe.bipartite, rng);
    for k in [&kl, &km] {
        let w = make_psd(d, &common, rng);
        b.edge(k[1], k[2], w, false);
    }
    let f = b.node(random_sign(recipe.bipartite, rng));
    let w = make_psd(d, &n1, rng);
    b.edge(kl[0], f, w, true);
    let w = make_psd(d, &n2, rng);
    b.edge(f, km[0], w, true);
    let w = make_psd(d, &common, rng);
    b.edge(kl[size - 1], km[size - 1], w, false);
    let Some((g, _)) = b.build(tol)? else {
        return Ok(None);
    };
    let Some(r) = verdict(&g, tol) else {
        return Ok(None);
    };
    let c = &r.conditions;
    if !(c.unique_nbs
        && !c.groups_separate
        && c.node_independent
        && c.bridges_covered
        && c.null_independence
        && c.nbs_path_condition)
    {
        return Ok(None);
    }
    Ok(Some(Instance {
        expectation: expectation(
            recipe,
            "cluster",
            None,
            d,
            None,
            "unique NBS, but both path groups leave nontrivial solutions",
        ),
        graph: g,
    }))
}

/// Two continents whose connecting paths share one free node, pinned by
/// two forcing bridges. Only node independence fails.
fn condition3(
    recipe: &InstanceRecipe,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<Option<Instance>, GeneratorError> {
    require_d(recipe, 2, "a condition-3 violation")?;
    let d = recipe.d;
    let frames = Frames::new(recipe.nulls, d, rng);
    let size = recipe.continent_size.max(2);
    let mut b = Builder::new(d);
    let ka = b.continent(size, recipe.bipartite, rng);
    let kb = b.continent(size, recipe.bipartite, rng);
    let f = b.node(random_sign(recipe.bipartite, rng));
    for (u, v) in [(ka[0], f), (f, kb[0]), (f, kb[1])] {
        let w = make_psd(d, &frames.direction(rng), rng);
        b.edge(u, v, w, true);
    }
    for k in 0..recipe.bridges.max(2) {
        let w = make_psd(d, &frames.direction(rng), rng);
        b.edge(ka[k % size], kb[(k + 1) % size], w, true);
    }
    let Some((g, signs)) = b.build(tol)? else {
        return Ok(None);
    };
    let Some(r) = verdict(&g, tol) else {
        return Ok(None);
    };
    let c = &r.conditions;
    if !(c.unique_nbs
        && c.groups_separate
        && !c.node_independent
        && c.null_independence
        && c.nbs_path_condition
        && r.primary_path_conditions == Verdict::Holds)
    {
        return Ok(None);
    }
    let (class, expected_signs) = class_for(&signs);
    Ok(Some(Instance {
        expectation: expectation(
            recipe,
            class,
            expected_signs,
            d,
            None,
            "paths share a free node; the primary-path variant still applies",
        ),
        graph: g,
    }))
}

/// A two-edge path whose edges share the null direction `v`, so the free
/// node can move along `v` alone.
fn condition4(
    recipe: &InstanceRecipe,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<Option<Instance>, GeneratorError> {
    require_d(recipe, 2, "a condition-4 violation")?;
    let d = recipe.d;
    let frames = Frames::new(recipe.nulls, d, rng);
    let size = recipe.continent_size.max(2);
    let mut b = Builder::new(d);
    let kl = b.continent(size, recipe.bipartite, rng);
    let km = b.continent(size, recipe.bipartite, rng);
    let f = b.node(random_sign(recipe.bipartite, rng));
    let v = frames.direction(rng);
    let w = make_psd(d, &v, rng);
    b.edge(kl[1], f, w, true);
    let w = make_psd(d, &v, rng);
    b.edge(f, km[0], w, true);
    let w = make_psd(d, &frames.direction(rng), rng);
    b.edge(kl[0], km[1], w, true);
    let w = make_psd(d, &frames.direction(rng), rng);
    b.edge(kl[0], km[0], w, false);
    let Some((g, _)) = b.build(tol)? else {
        return Ok(None);
    };
    let Some(r) = verdict(&g, tol) else {
        return Ok(None);
    };
    let c = &r.conditions;
    if !(c.unique_nbs
        && c.groups_separate
        && c.node_independent
        && c.bridges_covered
        && !c.null_independence
        && c.nbs_path_condition)
    {
        return Ok(None);
    }
    let mut witness = vec![0.0; g.node_count() * d];
    witness[f * d..(f + 1) * d].copy_from_slice(vec_of(&v).as_slice());
    Ok(Some(Instance {
        expectation: expectation(
            recipe,
            "cluster",
            None,
            2,
            Some(witness),
            "path edges share a null direction; the free node moves alone",
        ),
        graph: g,
    }))
}

/// A two-edge path carrying one NBS edge whose other edge has null `b`.
/// Flipping the free node keeps `1 (x) b` in the null space, so the NBS is
/// never unique here.
fn condition5(
    recipe: &InstanceRecipe,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<Option<Instance>, GeneratorError> {
    require_d(recipe, 2, "a condition-5 violation")?;
    let d = recipe.d;
    let frames = Frames::new(recipe.nulls, d, rng);
    let size = recipe.continent_size.max(2);
    let mut b = Builder::new(d);
    let kl = b.continent(size, recipe.bipartite, rng);
    let km = b.continent(size, recipe.bipartite, rng);
    let f = b.node(random_sign(recipe.bipartite, rng));
    let w = make_psd(d, &frames.direction(rng), rng);
    b.edge(kl[1], f, w, false);
    let null_b = frames.direction(rng);
    let w = make_psd(d, &null_b, rng);
    b.edge(f, km[0], w, true);
    for k in 0..recipe.bridges.max(2) {
        let w = make_psd(d, &frames.direction(rng), rng);
        b.edge(kl[k % size], km[(k + 1) % size], w, true);
    }
    let Some((g, signs)) = b.build(tol)? else {
        return Ok(None);
    };
    let Some(r) = verdict(&g, tol) else {
        return Ok(None);
    };
    let c = &r.conditions;
    if !(c.groups_separate
        && c.node_independent
        && c.bridges_covered
        && c.null_independence
        && !c.nbs_path_condition)
    {
        return Ok(None);
    }
    let mut alt = signs;
    alt[f] = -alt[f];
    let witness = gauge_vector(&alt, &vec_of(&null_b));
    Ok(Some(Instance {
        expectation: expectation(
            recipe,
            "cluster",
            None,
            2,
            Some(witness),
            "non-NBS path edge meets the continent null spaces; the NBS is not unique either",
        ),
        graph: g,
    }))
}

/// One continent containing a definite cycle with negative sign product.
fn indefinite_cycle(
    recipe: &InstanceRecipe,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<Option<Instance>, GeneratorError> {
    let d = recipe.d;
    let size = recipe.continent_size.max(3);
    let mut b = Builder::new(d);
    let k = b.continent(size, recipe.bipartite, rng);
    let w = random_definite(d, rng);
    b.edge(k[1], k[2], w, false);
    let Some((g, _)) = b.build(tol)? else {
        return Ok(None);
    };
    Ok(Some(Instance {
        expectation: expectation(
            recipe,
            "trivial",
            None,
            0,
            None,
            "a frustrated definite cycle forces every state to zero",
        ),
        graph: g,
    }))
}

/// Positive semidefinite weight with a random null space of dimension
/// `0..d`, biased towards definite.
fn random_weight<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    if d < 2 || rng.random_bool(0.5) {
        return random_definite(d, rng);
    }
    let k = rng.random_range(1..d);
    let null = gaussian_matrix(d, k, rng)
        .qr()
        .q()
        .columns(0, k)
        .into_owned();
    make_psd(d, &null, rng)
}

fn signed<R: Rng>(w: DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    if rng.random_bool(0.5) {
        w
    } else {
        -w
    }
}

fn assemble(n: usize, d: usize, edges: Vec<(usize, usize, DMatrix<f64>)>) -> MatrixWeightedGraph {
    let ids = (1..=n).map(|i| i.to_string()).collect();
    MatrixWeightedGraph::from_parts(ids, d, edges, &Tolerances::default())
        .expect("generated graphs are valid")
}

/// Connected graph with random tree plus chords, random signs and mixed
/// definite and semidefinite weights.
pub fn random_graph(seed: u64) -> MatrixWeightedGraph {
    let mut rng = rng_for(seed);
    let n = rng.random_range(2..=7);
    let d = rng.random_range(1..=3);
    let edges = random_edges(n, d, &mut rng, |d, rng| signed(random_weight(d, rng), rng));
    assemble(n, d, edges)
}

fn random_edges<R: Rng>(
    n: usize,
    d: usize,
    rng: &mut R,
    mut weight: impl FnMut(usize, &mut R) -> DMatrix<f64>,
) -> Vec<(usize, usize, DMatrix<f64>)> {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v, weight(d, rng)));
    }
    for u in 0..n {
        for v in u + 1..n {
            let present = edges.iter().any(|&(a, b, _)| a == u && b == v);
            if !present && rng.random_bool(0.25) {
                edges.push((u, v, weight(d, rng)));
            }
        }
    }
    edges
}

/// Single continent: a definite spanning tree plus chords of any kind.
pub fn random_single_continent(seed: u64) -> MatrixWeightedGraph {
    let mut rng = rng_for(seed);
    let n = rng.random_range(3..=7);
    let d = rng.random_range(1..=3);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        let w = random_definite(d, &mut rng);
        edges.push((u, v, signed(w, &mut rng)));
    }
    for u in 0..n {
        for v in u + 1..n {
            let present = edges.iter().any(|&(a, b, _)| a == u && b == v);
            if !present && rng.random_bool(0.3) {
                let w = random_weight(d, &mut rng);
                edges.push((u, v, signed(w, &mut rng)));
            }
        }
    }
    assemble(n, d, edges)
}

/// Up to `count` distinct node pairs across two continents.
fn bridge_endpoints<R: Rng>(
    kl: &[usize],
    km: &[usize],
    count: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = kl
        .iter()
        .flat_map(|&u| km.iter().map(move |&v| (u, v)))
        .collect();
    pairs.shuffle(rng);
    pairs.truncate(count);
    pairs
}

/// Two continents with equal null spaces joined only by semidefinite
/// length-one bridges of random sign and random null dimension.
pub fn random_edge_bridged(seed: u64) -> MatrixWeightedGraph {
    let mut rng = rng_for(seed);
    let d = rng.random_range(2..=3);
    let frames = Frames::new(NullFrames::Random, d, &mut rng);
    let internal = rng.random_bool(0.4);
    let common = frames.subspace(rng.random_range(1..d), &mut rng);
    let mut b = Builder::new(d);
    let mut continents = Vec::new();
    for _ in 0..2 {
        let size = if internal { 3 } else { rng.random_range(2..=3) };
        let k = b.continent(size, true, &mut rng);
        if internal {
            let w = make_psd(d, &common, &mut rng);
            b.edge(k[1], k[2], w, false);
        }
        continents.push(k);
    }
    let count = rng.random_range(1..=4);
    for (u, v) in bridge_endpoints(&continents[0], &continents[1], count, &mut rng) {
        let k = rng.random_range(1..d);
        let null = frames.subspace(k, &mut rng);
        let w = make_psd(d, &null, &mut rng);
        let consistent = rng.random_bool(0.5);
        b.edge(u, v, w, consistent);
    }
    b.build(&Tolerances::default())
        .expect("generated graphs are valid")
        .expect("bridge endpoints are distinct")
        .0
}

/// All-positive graph: one continent, or two continents joined by
/// semidefinite length-one bridges.
pub fn random_unsigned(seed: u64) -> MatrixWeightedGraph {
    let mut rng = rng_for(seed);
    let d = rng.random_range(1..=3);
    let mut b = Builder::new(d);
    let kl = b.continent(rng.random_range(2..=4), false, &mut rng);
    if d >= 2 && rng.random_bool(0.7) {
        let km = b.continent(rng.random_range(2..=4), false, &mut rng);
        let count = rng.random_range(1..=3);
        for (u, v) in bridge_endpoints(&kl, &km, count, &mut rng) {
            let k = rng.random_range(1..d);
            let null = gaussian_matrix(d, k, &mut rng)
                .qr()
                .q()
                .columns(0, k)
                .into_owned();
            let w = make_psd(d, &null, &mut rng);
            b.edge(u, v, w, true);
        }
    }
    b.build(&Tolerances::default())
        .expect("generated graphs are valid")
        .expect("bridge endpoints are distinct")
        .0
}

/// Two random components with no edge between them.
pub fn random_disconnected(seed: u64) -> MatrixWeightedGraph {
    let mut rng = rng_for(seed);
    let d = rng.random_range(1..=3);
    let n1 = rng.random_range(1..=4);
    let n2 = rng.random_range(1..=4);
    let mut edges = Vec::new();
    for (offset, n) in [(0, n1), (n1, n2)] {
        for (u, v, w) in random_edges(n, d, &mut rng, |d, rng| signed(random_weight(d, rng), rng)) {
            edges.push((u + offset, v + offset, w));
        }
    }
    assemble(n1 + n2, d, edges)
}

/// Recipe with randomized shape for the holds family.
pub fn random_recipe(seed: u64) -> InstanceRecipe {
    let mut rng = rng_for(seed ^ 0x9e37_79b9_7f4a_7c15);
    let d = rng.random_range(2..=4);
    let internal_nbs = rng.random_bool(0.3);
    InstanceRecipe {
        seed,
        d,
        continents: rng.random_range(1..=3),
        continent_size: if internal_nbs {
            3
        } else {
            rng.random_range(2..=3)
        },
        bridges: 2,
        max_path_len: rng.random_range(1..=3),
        nulls: *[NullFrames::Orthogonal, NullFrames::Random, NullFrames::Axis]
            .choose(&mut rng)
            .expect("nonempty"),
        bipartite: rng.random_bool(0.5),
        nbs_bridges: rng.random_bool(0.3),
        internal_nbs,
        violate: Violation::None,
    }
}
