//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero when any of them fails.

use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use mwc_core::balance::enumerate_nbs;
use mwc_core::conditions::{build_path_constraint, full_verdict, rank_split, Verdict};
use mwc_core::dynamics::{default_horizon, integrate, simulate, Method};
use mwc_core::generator::{
    gaussian_matrix, make_psd, random_disconnected, random_edge_bridged, random_graph,
    random_recipe, random_single_continent, random_unsigned, rng_for, synthesize, InstanceRecipe,
    NullFrames, Violation,
};
use mwc_core::graph::{build_laplacian, lift_unsigned, GaugeAssignment};
use mwc_core::linalg::{norm_inf, RankRule};
use mwc_core::report::analyze;
use mwc_core::spectral::{
    asymptotic_state, classify_graph, verify_null_vector, SolutionClass, SpectralDecomposition,
};
use mwc_core::topology::analyze_topology;
use mwc_core::{MatrixWeightedGraph, SubspaceBasis, Tolerances};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

type Check = Result<String, String>;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn random_state(len: usize, seed: u64) -> DVector<f64> {
    let mut rng = rng_for(seed ^ 0x5eed);
    DVector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Mix of unstructured graphs and synthesized instances.
fn mixed_graph(seed: u64) -> MatrixWeightedGraph {
    match seed % 4 {
        0 | 1 => random_graph(seed),
        2 => random_edge_bridged(seed),
        _ => synthesize(&random_recipe(seed)).map_or_else(|_| random_graph(seed), |i| i.graph),
    }
}

/// Collects failures across seeds; passes when there are none.
fn over_seeds<F>(seeds: std::ops::Range<u64>, f: F) -> Vec<String>
where
    F: Fn(u64) -> Result<(), String> + Sync,
{
    seeds
        .into_par_iter()
        .filter_map(|s| f(s).err().map(|e| format!("seed {s}: {e}")))
        .collect()
}

fn verdict_of(failures: Vec<String>, ok: String) -> Check {
    if failures.is_empty() {
        Ok(ok)
    } else {
        let n = failures.len();
        Err(format!("{n} failure(s); first: {}", failures[0]))
    }
}

fn spectral_limit() -> Check {
    let worst = std::sync::Mutex::new(0.0f64);
    let failures = over_seeds(0..200, |seed| {
        let g = mixed_graph(seed);
        let t = tol();
        let l = build_laplacian(&g);
        let spec = SpectralDecomposition::of(&l);
        let horizon = default_horizon(&spec, &t);
        let x0 = random_state(l.size(), seed);
        let target = asymptotic_state(&l, &x0, &t);
        let step = 0.5 / spec.lambda_max();
        for method in [Method::Exact, Method::Rk4 { step }] {
            let traj = integrate(&l, &x0, horizon, 1, method).map_err(|e| e.to_string())?;
            let err = (traj.terminal() - &target).amax();
            let mut w = worst.lock().unwrap();
            *w = w.max(err);
            if err > 1e-6 {
                return Err(format!("{method:?}: error {err:e}"));
            }
        }
        Ok(())
    });
    let w = *worst.lock().unwrap();
    verdict_of(failures, format!("200 instances, worst error {w:.1e}"))
}

/// Stacked per-edge constraint rows `A_ij x_i - sgn(A_ij) |A_ij| x_j`.
fn edge_constraints(g: &MatrixWeightedGraph) -> DMatrix<f64> {
    let d = g.dim();
    let n = g.node_count();
    let mut m = DMatrix::zeros(g.edges().len() * d, n * d);
    for (k, e) in g.edges().iter().enumerate() {
        let w = e.weight.entries();
        let s = f64::from(e.sign());
        m.view_mut((k * d, e.u * d), (d, d)).copy_from(w);
        m.view_mut((k * d, e.v * d), (d, d)).copy_from(&(w * -s));
    }
    m
}

fn edge_equivalence() -> Check {
    let failures = over_seeds(0..200, |seed| {
        let g = mixed_graph(seed);
        let t = tol();
        let l = build_laplacian(&g);
        let basis = SpectralDecomposition::of(&l).null_basis(&t);
        for c in basis.columns().column_iter() {
            let r = verify_null_vector(&g, &c.into_owned(), 1e-8);
            if !r.passes {
                return Err(format!("basis vector residual {:e}", r.max_residual));
            }
        }
        // Independent oracle: null space of the stacked edge equations,
        // padded square so the SVD returns every right singular vector.
        let e = edge_constraints(&g);
        let cols = e.ncols();
        let mut padded = DMatrix::zeros(e.nrows().max(cols), cols);
        padded.view_mut((0, 0), (e.nrows(), cols)).copy_from(&e);
        let svd = padded.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let scale = svd.singular_values.max().max(1.0);
        let mut oracle_null = 0;
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > 1e-9 * scale {
                continue;
            }
            oracle_null += 1;
            let x = vt.row(k).transpose();
            let res = (&e * &x).amax();
            if res > 1e-8 {
                return Err(format!("oracle vector residual {res:e}"));
            }
            let err = basis.residual(&x);
            if err > 1e-8 {
                return Err(format!("zero-residual vector off the basis by {err:e}"));
            }
        }
        if oracle_null != basis.rank() {
            return Err(format!("nullity {} vs oracle {oracle_null}", basis.rank()));
        }
        Ok(())
    });
    verdict_of(failures, "200 graphs, both directions".into())
}

fn nbs_embedding() -> Check {
    let count = AtomicUsize::new(0);
    let failures = over_seeds(0..100, |seed| {
        let g = match seed % 3 {
            0 => random_graph(seed),
            1 => random_single_continent(seed),
            _ => random_edge_bridged(seed),
        };
        let t = tol();
        let topo = analyze_topology(&g, &t).map_err(|e| e.to_string())?;
        let nbs = enumerate_nbs(&g, &topo.continents, &t).map_err(|e| e.to_string())?;
        let l = build_laplacian(&g);
        let scale = norm_inf(l.matrix());
        for set in &nbs.sets {
            count.fetch_add(1, Ordering::Relaxed);
            let m = set.gauge().embed(set.null_basis.columns());
            let r = norm_inf(&(l.matrix() * m));
            if r > 1e-9 * scale {
                return Err(format!("‖L D(1⊗B)‖∞ = {r:e}"));
            }
        }
        Ok(())
    });
    let n = count.into_inner();
    verdict_of(failures, format!("{n} NBS over 100 graphs"))
}

fn single_continent() -> Check {
    let unique = AtomicUsize::new(0);
    let failures = over_seeds(0..100, |seed| {
        let g = random_single_continent(seed);
        let t = tol();
        let topo = analyze_topology(&g, &t).map_err(|e| e.to_string())?;
        if topo.continents.len() != 1 {
            return Err(format!("{} continents", topo.continents.len()));
        }
        let nbs = enumerate_nbs(&g, &topo.continents, &t).map_err(|e| e.to_string())?;
        let (_, class) = classify_graph(&g, &t);
        if nbs.unique {
            unique.fetch_add(1, Ordering::Relaxed);
        }
        if class.is_consensus_type() != nbs.unique {
            return Err(format!(
                "class {} but unique NBS {}",
                class.label(),
                nbs.unique
            ));
        }
        if nbs.sets.is_empty() && class != SolutionClass::Trivial {
            return Err(format!("no NBS but class {}", class.label()));
        }
        if let (Some(set), Some(gauge)) = (nbs.unique_set(), class.gauge(g.node_count())) {
            if set.gauge() != gauge {
                return Err("gauge differs from the NBS partition".into());
            }
        }
        Ok(())
    });
    let u = unique.into_inner();
    verdict_of(
        failures,
        format!("100 graphs ({u} with a unique NBS), zero disagreements"),
    )
}

fn edge_bridged_biconditional() -> Check {
    let holds = AtomicUsize::new(0);
    let failures = over_seeds(0..100, |seed| {
        let g = random_edge_bridged(seed);
        let t = tol();
        let report = full_verdict(&g, &t).map_err(|e| e.to_string())?;
        let answer = match report.edge_bridged {
            Verdict::Holds => true,
            Verdict::Fails => false,
            v => return Err(format!("verdict {v:?}")),
        };
        let (_, class) = classify_graph(&g, &t);
        let l = build_laplacian(&g);
        let x0 = random_state(l.size(), seed);
        let (_, outcome) = simulate(&l, &x0, Method::Exact, &t).map_err(|e| e.to_string())?;
        if answer != class.is_consensus_type() || answer != outcome.label.is_consensus_type() {
            return Err(format!(
                "verdict {answer}, class {}, simulated {}",
                class.label(),
                outcome.label.label()
            ));
        }
        if answer {
            holds.fetch_add(1, Ordering::Relaxed);
        }
        Ok(())
    });
    let h = holds.into_inner();
    verdict_of(
        failures,
        format!("100 instances, {h} hold and {} fail", 100 - h),
    )
}

fn sufficiency() -> Check {
    let bipartite = AtomicUsize::new(0);
    let failures = over_seeds(0..100, |seed| {
        let t = tol();
        let inst = synthesize(&random_recipe(seed)).map_err(|e| e.to_string())?;
        let g = &inst.graph;
        let report = full_verdict(g, &t).map_err(|e| e.to_string())?;
        if report.path_conditions != Verdict::Holds {
            return Err(format!("path conditions {:?}", report.path_conditions));
        }
        let signs = report.nbs.unique_signs().ok_or("no unique NBS")?;
        let null = report.nbs.null_basis.clone().ok_or("no NBS null space")?;
        let (_, class) = classify_graph(g, &t);
        let expect_plain = signs.iter().all(|&s| s == 1);
        let class_ok = match &class {
            SolutionClass::Consensus { .. } => expect_plain,
            SolutionClass::BipartiteConsensus { gauge, .. } => {
                !expect_plain && gauge.signs() == signs.as_slice()
            }
            _ => false,
        };
        if !class_ok {
            return Err(format!("class {}", class.label()));
        }
        if !expect_plain {
            bipartite.fetch_add(1, Ordering::Relaxed);
        }
        let l = build_laplacian(g);
        let x0 = random_state(l.size(), seed);
        let (traj, outcome) = simulate(&l, &x0, Method::Exact, &t).map_err(|e| e.to_string())?;
        if !outcome.label.is_consensus_type() {
            return Err(format!("simulated {}", outcome.label.label()));
        }
        let d = g.dim();
        let x = traj.terminal();
        let v0 = x.rows(0, d).into_owned();
        for (i, &s) in signs.iter().enumerate() {
            let xi = x.rows(i * d, d) * f64::from(s);
            let off = null.residual(&xi.clone_owned());
            let spread = (&xi - &v0).amax();
            if off > 1e-6 || spread > 1e-6 {
                return Err(format!(
                    "node {i}: off null(E^nb) by {off:e}, spread {spread:e}"
                ));
            }
        }
        Ok(())
    });
    let b = bipartite.into_inner();
    verdict_of(
        failures,
        format!("100 instances ({b} bipartite, {} consensus)", 100 - b),
    )
}

fn counterexamples() -> Check {
    let mut failures = Vec::new();
    for violate in [Violation::Condition4, Violation::Condition5] {
        failures.extend(over_seeds(0..50, |seed| {
            let t = tol();
            let recipe = InstanceRecipe {
                seed,
                d: 2 + (seed as usize % 3),
                bipartite: seed % 2 == 1,
                nulls: NullFrames::Random,
                violate,
                ..Default::default()
            };
            let inst = synthesize(&recipe).map_err(|e| e.to_string())?;
            let g = &inst.graph;
            let w = inst.expectation.witness.as_ref().ok_or("no witness")?;
            let r = verify_null_vector(g, &DVector::from_column_slice(w), 1e-10);
            if !r.passes {
                return Err(format!(
                    "{violate:?}: witness residual {:e}",
                    r.max_residual
                ));
            }
            let l = build_laplacian(g);
            for k in 0..3 {
                let x0 = random_state(l.size(), seed * 3 + k);
                let (_, outcome) =
                    simulate(&l, &x0, Method::Exact, &t).map_err(|e| e.to_string())?;
                if outcome.label.is_consensus_type() {
                    return Err(format!("{violate:?}: simulated {}", outcome.label.label()));
                }
            }
            Ok(())
        }));
    }
    verdict_of(
        failures,
        "50 seeds each for dependent path nulls and NBS-path overlap, 3 initial states each".into(),
    )
}

fn oracle_rank(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let scale = svd.singular_values.max().max(1.0);
    svd.singular_values
        .iter()
        .filter(|&&s| s > 1e-9 * scale)
        .count()
}

fn random_signs<R: Rng>(rho: usize, rng: &mut R) -> Vec<i8> {
    (0..rho)
        .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
        .collect()
}

/// Orthonormal frame columns `[from, from + k)`.
fn frame_cols(frame: &DMatrix<f64>, from: usize, k: usize) -> DMatrix<f64> {
    frame.columns(from, k).into_owned()
}

fn gamma_machinery() -> Check {
    let rule = RankRule::new(tol().rank);
    let eye = |d| DMatrix::<f64>::identity(d, d);
    let rank_failures = over_seeds(0..500, |seed| {
        let mut rng = rng_for(seed);
        let rho = rng.random_range(1..=4);
        let d = rng.random_range(1..=4);
        let (r, q) = if seed % 2 == 0 {
            let signs = random_signs(rho, &mut rng);
            let mut r = DMatrix::zeros(d, rho * d);
            let mut q = DMatrix::zeros(rho * d, rho * d);
            let mut alpha = 1i8;
            for (i, &s) in signs.iter().enumerate() {
                alpha *= s;
                r.view_mut((0, i * d), (d, d))
                    .copy_from(&(eye(d) * -f64::from(alpha)));
                let k = rng.random_range(0..d);
                let null = gaussian_matrix(d, k, &mut rng)
                    .qr()
                    .q()
                    .columns(0, k)
                    .into_owned();
                let a = make_psd(d, &null, &mut rng);
                q.view_mut((i * d, i * d), (d, d))
                    .copy_from(&(a * -f64::from(s)));
            }
            (r, q)
        } else {
            let n = rho * d;
            let kr = rng.random_range(1..=d);
            let kq = rng.random_range(1..=n);
            let r = gaussian_matrix(d, kr, &mut rng) * gaussian_matrix(kr, n, &mut rng);
            let q = gaussian_matrix(n, kq, &mut rng) * gaussian_matrix(kq, n, &mut rng);
            (r, q)
        };
        let split = rank_split(&r, &q, rule);
        let stacked = mwc_core::linalg::vstack(r.ncols(), &[&r, &q]);
        let oracle = oracle_rank(&stacked);
        if !split.identity_holds() || split.rank_stacked != oracle {
            return Err(format!("{split:?} vs oracle {oracle}"));
        }
        Ok(())
    });
    let primary_failures = over_seeds(0..200, |seed| {
        let mut rng = rng_for(seed ^ 0xabc);
        let d = rng.random_range(1..=4);
        let rho = rng.random_range(1..=4);
        let frame = gaussian_matrix(d, d, &mut rng).qr().q();
        let signs = random_signs(rho, &mut rng);
        // Jointly independent edge nulls drawn from disjoint frame columns.
        let mut used = 0;
        let weights: Vec<(DMatrix<f64>, i8)> = signs
            .iter()
            .map(|&s| {
                let k = if used < d {
                    rng.random_range(0..=(d - used).min(2))
                } else {
                    0
                };
                let k = k.min(d - 1);
                let null = frame_cols(&frame, used, k);
                used += k;
                (make_psd(d, &null, &mut rng) * f64::from(s), s)
            })
            .collect();
        let a_bar = make_psd(d, &frame_cols(&frame, 0, rng.random_range(0..d)), &mut rng);
        let sgn: i8 = signs.iter().product();
        let sys = build_path_constraint(&weights, &a_bar, sgn, None, rule);
        let gb = sys.gamma_bar.as_ref().ok_or("no reduced form")?;
        let nullity = sys.gamma_bar_nullity(rule).expect("built");
        if nullity != d {
            return Err(format!("nullity {nullity}, d {d}"));
        }
        let null = SubspaceBasis::null_of(gb, rule);
        let angle = null.max_principal_angle(&sys.alpha_span());
        if angle > 1e-8 {
            return Err(format!("principal angle {angle:e}"));
        }
        Ok(())
    });
    let nbs_failures = over_seeds(0..200, |seed| {
        let mut rng = rng_for(seed ^ 0xdef);
        let d = rng.random_range(2..=4);
        let rho = rng.random_range(1..=4);
        let n = rng.random_range(0..rho);
        let frame = gaussian_matrix(d, d, &mut rng).qr().q();
        let signs = random_signs(rho, &mut rng);
        let weights: Vec<(DMatrix<f64>, i8)> = signs
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let null = if i == n {
                    frame_cols(&frame, 0, 1)
                } else {
                    frame_cols(&frame, 0, 0)
                };
                (make_psd(d, &null, &mut rng) * f64::from(s), s)
            })
            .collect();
        let a_bar = make_psd(d, &frame_cols(&frame, 0, rng.random_range(1..d)), &mut rng);
        let sgn: i8 = signs.iter().product();
        let sys = build_path_constraint(&weights, &a_bar, -sgn, Some(n), rule);
        let a_hat = sys.a_hat.as_ref().ok_or("no reduced endpoint matrix")?;
        let b_hat = SubspaceBasis::null_of(a_hat, rule);
        if b_hat.is_trivial() {
            return Err("vacuous inclusion".into());
        }
        // Path-node signs that respect every edge except the NBS edge.
        let mut sigma = vec![1i8];
        for (i, &s) in signs.iter().enumerate() {
            let flip = if i == n { -1 } else { 1 };
            sigma.push(sigma[i] * s * flip);
        }
        let embed = GaugeAssignment::new(sigma).embed(b_hat.columns());
        let r = norm_inf(&(&sys.gamma0 * embed));
        if r > 1e-9 * norm_inf(&sys.gamma0).max(1.0) {
            return Err(format!("Γ₀ D(1⊗B) = {r:e}"));
        }
        Ok(())
    });
    let failures: Vec<String> = rank_failures
        .into_iter()
        .chain(primary_failures)
        .chain(nbs_failures)
        .collect();
    verdict_of(
        failures,
        "500 rank splits, 200 primary paths, 200 NBS-edge paths".into(),
    )
}

fn disconnected_and_unsigned() -> Check {
    let mut failures = over_seeds(0..50, |seed| {
        let g = random_disconnected(seed);
        if g.is_connected() {
            return Err("generated graph is connected".into());
        }
        let (_, class) = classify_graph(&g, &tol());
        if class.is_consensus_type() {
            return Err(format!("disconnected graph classified {}", class.label()));
        }
        Ok(())
    });
    failures.extend(over_seeds(0..50, |seed| {
        let t = tol();
        let doc = random_unsigned(seed).to_document();
        let g = lift_unsigned(&doc, &t).map_err(|e| e.to_string())?;
        let topo = analyze_topology(&g, &t).map_err(|e| e.to_string())?;
        let nbs = enumerate_nbs(&g, &topo.continents, &t).map_err(|e| e.to_string())?;
        let plain = nbs.unique_set().is_some_and(|s| s.partition.v2.is_empty());
        let (_, class) = classify_graph(&g, &t);
        let consensus = matches!(class, SolutionClass::Consensus { .. });
        if plain != consensus {
            return Err(format!("unique (V,∅) NBS {plain}, class {}", class.label()));
        }
        Ok(())
    }));
    verdict_of(failures, "50 disconnected, 50 unsigned".into())
}

/// Serialized outputs of generate, analyze and both simulation methods.
fn pipeline_bytes(recipe: &InstanceRecipe) -> Result<Vec<String>, String> {
    let t = tol();
    let inst = synthesize(recipe).map_err(|e| e.to_string())?;
    let g = &inst.graph;
    let mut out = vec![
        g.to_document().to_json(),
        serde_json::to_string(&inst.expectation).map_err(|e| e.to_string())?,
        serde_json::to_string(&analyze(g, &t).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?,
    ];
    let l = build_laplacian(g);
    let x0 = random_state(l.size(), recipe.seed);
    let step = 0.5 / SpectralDecomposition::of(&l).lambda_max();
    for method in [Method::Exact, Method::Rk4 { step }] {
        let (traj, outcome) = simulate(&l, &x0, method, &t).map_err(|e| e.to_string())?;
        let mut csv = Vec::new();
        traj.write_csv(g.node_ids(), g.dim(), &mut csv)
            .map_err(|e| e.to_string())?;
        out.push(String::from_utf8(csv).map_err(|e| e.to_string())?);
        out.push(serde_json::to_string(&outcome).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn determinism() -> Check {
    let mut recipes: Vec<InstanceRecipe> = (0..16).map(random_recipe).collect();
    for (k, violate) in [
        Violation::Condition2,
        Violation::Condition3,
        Violation::Condition4,
        Violation::Condition5,
    ]
    .into_iter()
    .enumerate()
    {
        recipes.push(InstanceRecipe {
            seed: 100 + k as u64,
            d: 3,
            violate,
            ..Default::default()
        });
    }
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    for r in &recipes {
        let first = pipeline_bytes(r)?;
        let again = pipeline_bytes(r)?;
        let serial = single.install(|| pipeline_bytes(r))?;
        if first != again || first != serial {
            failures.push(format!(
                "recipe seed {} ({:?}) differs between runs",
                r.seed, r.violate
            ));
        }
    }
    verdict_of(
        failures,
        format!(
            "{} recipes, parallel and serial runs identical",
            recipes.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        (
            "spectral limit matches projection (exact and RK4)",
            spectral_limit,
        ),
        (
            "null space equals per-edge constraint solutions",
            edge_equivalence,
        ),
        ("NBS embeddings lie in null(L)", nbs_embedding),
        (
            "single continent: bipartite iff unique NBS",
            single_continent,
        ),
        ("edge-bridged verdict is exact", edge_bridged_biconditional),
        ("path conditions are sufficient", sufficiency),
        (
            "targeted violations have null-space witnesses",
            counterexamples,
        ),
        (
            "rank split, reduced path systems, NBS inclusion",
            gamma_machinery,
        ),
        (
            "disconnected and unsigned graphs",
            disconnected_and_unsigned,
        ),
        ("deterministic pipeline output", determinism),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                all = false;
                println!("FAIL [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
