//! Combined analysis of one graph: spectrum, predicted class and the
//! condition checks, with a plain-text rendering.

use std::fmt::Write;

use serde::Serialize;

use crate::conditions::{full_verdict, ConditionReport, PredictedClass, Verdict};
use crate::graph::{build_laplacian, MatrixWeightedGraph};
use crate::spectral::{classify_solution_space, SolutionClass, SpectralDecomposition};
use crate::subspace::SubspaceBasis;
use crate::tolerances::Tolerances;
use crate::Error;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub lambda_max: f64,
    pub smallest_positive: Option<f64>,
    pub nullity: usize,
    pub class: SolutionClass,
    pub null_basis: SubspaceBasis,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub config: Tolerances,
    pub d: usize,
    pub node_ids: Vec<String>,
    pub edge_count: usize,
    pub spectral: SpectralSummary,
    pub conditions: ConditionReport,
    /// False when the condition checks predict a class the spectrum
    /// contradicts.
    pub consistent: bool,
}

pub fn analyze(g: &MatrixWeightedGraph, tol: &Tolerances) -> Result<AnalysisReport, Error> {
    let l = build_laplacian(g);
    let spec = SpectralDecomposition::of(&l);
    let null_basis = spec.null_basis(tol);
    let class = classify_solution_space(&null_basis, g.node_count(), g.dim());
    let conditions = full_verdict(g, tol)?;
    let consistent = agrees(&conditions.predicted, &class);
    Ok(AnalysisReport {
        config: *tol,
        d: g.dim(),
        node_ids: g.node_ids().to_vec(),
        edge_count: g.edges().len(),
        spectral: SpectralSummary {
            lambda_max: spec.lambda_max(),
            smallest_positive: spec.smallest_positive(tol),
            nullity: null_basis.rank(),
            eigenvalues: spec.eigenvalues.iter().copied().collect(),
            class,
            null_basis,
        },
        conditions,
        consistent,
    })
}

/// Whether a predicted class is compatible with the spectral class.
pub fn agrees(predicted: &PredictedClass, class: &SolutionClass) -> bool {
    match (predicted, class) {
        (PredictedClass::Inconclusive, _) => true,
        (PredictedClass::Trivial, SolutionClass::Trivial) => true,
        (PredictedClass::NotBipartite, c) => !c.is_consensus_type(),
        (PredictedClass::Consensus { .. }, SolutionClass::Consensus { .. }) => true,
        (
            PredictedClass::BipartiteConsensus { signs, .. },
            SolutionClass::BipartiteConsensus { gauge, .. },
        ) => gauge.signs() == signs.as_slice(),
        _ => false,
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Inconclusive => "inconclusive",
        Verdict::NotApplicable => "not applicable",
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn render_human(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let c = &r.conditions;
    let f = &c.conditions;
    let _ = writeln!(
        s,
        "nodes {}  edges {}  d {}",
        r.node_ids.len(),
        r.edge_count,
        r.d
    );
    let _ = writeln!(
        s,
        "spectrum: lambda_max {:.6}, nullity {}, class {}",
        r.spectral.lambda_max,
        r.spectral.nullity,
        r.spectral.class.label()
    );
    if let SolutionClass::BipartiteConsensus { gauge, .. } = &r.spectral.class {
        let (v1, v2): (Vec<_>, Vec<_>) = r
            .node_ids
            .iter()
            .zip(gauge.signs())
            .partition(|(_, &sg)| sg > 0);
        let names = |v: Vec<(&String, &i8)>| {
            v.into_iter()
                .map(|(id, _)| id.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(s, "  V1: {}\n  V2: {}", names(v1), names(v2));
    }
    if !c.connected {
        let _ = writeln!(
            s,
            "graph is disconnected: bipartite consensus is impossible"
        );
    }
    let _ = writeln!(s, "predicted: {}", c.predicted.label());
    let _ = writeln!(s, "path conditions: {}", verdict_word(c.path_conditions));
    let _ = writeln!(
        s,
        "primary-path conditions: {}",
        verdict_word(c.primary_path_conditions)
    );
    let _ = writeln!(s, "edge-bridged test: {}", verdict_word(c.edge_bridged));
    let _ = writeln!(
        s,
        "  unique NBS ({} found): {}",
        c.nbs.count,
        yes(f.unique_nbs)
    );
    let _ = writeln!(s, "  path groups separate: {}", yes(f.groups_separate));
    let _ = writeln!(s, "  node-independent paths: {}", yes(f.node_independent));
    let _ = writeln!(s, "  bridges covered: {}", yes(f.bridges_covered));
    let _ = writeln!(s, "  path nulls independent: {}", yes(f.null_independence));
    let _ = writeln!(
        s,
        "  NBS path edges isolated: {}",
        yes(f.nbs_path_condition)
    );
    let _ = writeln!(
        s,
        "continents {}  free nodes {}",
        c.continents.len(),
        c.free_nodes.len()
    );
    for msg in &c.failures {
        let _ = writeln!(s, "  - {msg}");
    }
    for w in &c.witnesses {
        let _ = writeln!(
            s,
            "witness ({:?}) on nodes {:?}: residual {:.2e}, verified {}",
            w.kind,
            w.path_nodes
                .iter()
                .map(|&i| r.node_ids[i].as_str())
                .collect::<Vec<_>>(),
            w.residual,
            yes(w.verified)
        );
    }
    if !r.consistent {
        let _ = writeln!(s, "warning: predicted class disagrees with the spectrum");
    }
    s
}
