//! Integration of `ẋ = -Lx` and labelling of where it ends up.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::graph::Laplacian;
use crate::linalg;
use crate::spectral::SpectralDecomposition;
use crate::tolerances::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("RK4 step {step:e} exceeds the stability limit {limit:e}")]
    StepTooLarge { step: f64, limit: f64 },
    #[error("state has not settled (residual {residual:e} > {tolerance:e}); try a horizon of {suggested_horizon}")]
    NotSettled {
        residual: f64,
        tolerance: f64,
        suggested_horizon: f64,
    },
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("initial state has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Closed form `Q e^{-Λt} Qᵀ x0`.
    Exact,
    /// Classical fourth-order Runge-Kutta with at most this step.
    Rk4 { step: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub method: Method,
    pub times: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn terminal(&self) -> &DVector<f64> {
        self.states
            .last()
            .expect("trajectory has at least one stamp")
    }

    pub fn horizon(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory has at least one stamp")
    }

    /// CSV with a `t` column followed by `node<id>_<k>` per coordinate.
    pub fn write_csv<W: Write>(
        &self,
        node_ids: &[String],
        d: usize,
        out: &mut W,
    ) -> io::Result<()> {
        let mut header = vec!["t".to_string()];
        for id in node_ids {
            for k in 0..d {
                header.push(format!("node{id}_{k}"));
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let mut row = vec![t.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `30 / λ₂⁺`, or 1 when the Laplacian has no positive eigenvalue.
pub fn default_horizon(spec: &SpectralDecomposition, tol: &Tolerances) -> f64 {
    spec.smallest_positive(tol).map_or(1.0, |l| 30.0 / l)
}

/// Integrates from `x0` over `[0, horizon]`, recording `samples + 1`
/// uniformly spaced stamps.
pub fn integrate(
    l: &Laplacian,
    x0: &DVector<f64>,
    horizon: f64,
    samples: usize,
    method: Method,
) -> Result<Trajectory, DynamicsError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(DynamicsError::InvalidHorizon(horizon));
    }
    if x0.len() != l.size() {
        return Err(DynamicsError::DimensionMismatch {
            got: x0.len(),
            expected: l.size(),
        });
    }
    let samples = samples.max(1);
    let dt = horizon / samples as f64;
    let times: Vec<f64> = (0..=samples)
        .map(|k| if k == samples { horizon } else { k as f64 * dt })
        .collect();
    let states = match method {
        Method::Exact => {
            let spec = SpectralDecomposition::of(l);
            let q = &spec.eigenvectors;
            let coeffs = q.transpose() * x0;
            times
                .iter()
                .map(|&t| {
                    if t == 0.0 {
                        return x0.clone();
                    }
                    let decayed = DVector::from_iterator(
                        coeffs.len(),
                        coeffs
                            .iter()
                            .zip(spec.eigenvalues.iter())
                            .map(|(c, &lam)| c * (-lam.max(0.0) * t).exp()),
                    );
                    q * decayed
                })
                .collect()
        }
        Method::Rk4 { step } => {
            let lambda_max = SpectralDecomposition::of(l).lambda_max();
            let limit = if lambda_max > 0.0 {
                2.0 / lambda_max
            } else {
                f64::INFINITY
            };
            if !(step > 0.0) || step > limit {
                return Err(DynamicsError::StepTooLarge { step, limit });
            }
            let sub = (dt / step).ceil().max(1.0) as usize;
            let h = dt / sub as f64;
            let m = l.matrix();
            let mut x = x0.clone();
            let mut states = vec![x.clone()];
            for _ in 0..samples {
                for _ in 0..sub {
                    x = rk4_step(m, &x, h);
                }
                states.push(x.clone());
            }
            states
        }
    };
    Ok(Trajectory {
        method,
        times,
        states,
    })
}

fn rk4_step(m: &DMatrix<f64>, x: &DVector<f64>, h: f64) -> DVector<f64> {
    let f = |v: &DVector<f64>| -(m * v);
    let k1 = f(x);
    let k2 = f(&(x + &k1 * (h / 2.0)));
    let k3 = f(&(x + &k2 * (h / 2.0)));
    let k4 = f(&(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeLabel {
    Consensus,
    Bipartite { signs: Vec<i8> },
    Cluster { groups: Vec<Vec<usize>> },
    Trivial,
}

impl OutcomeLabel {
    pub fn label(&self) -> &'static str {
        match self {
            OutcomeLabel::Consensus => "consensus",
            OutcomeLabel::Bipartite { .. } => "bipartite_consensus",
            OutcomeLabel::Cluster { .. } => "cluster",
            OutcomeLabel::Trivial => "trivial",
        }
    }

    pub fn is_consensus_type(&self) -> bool {
        matches!(
            self,
            OutcomeLabel::Consensus | OutcomeLabel::Bipartite { .. }
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub label: OutcomeLabel,
    /// `‖L x(T)‖∞`.
    pub terminal_residual: f64,
    pub tol_zero: f64,
    pub tol_agree: f64,
}

/// Labels the terminal state after checking that it has settled.
pub fn classify_outcome(
    l: &Laplacian,
    traj: &Trajectory,
    tol: &Tolerances,
) -> Result<Outcome, DynamicsError> {
    let d = l.dim();
    let n = l.nodes();
    let x0 = &traj.states[0];
    let xt = traj.terminal();
    let x0_norm = linalg::vec_max_abs(x0);
    let residual = linalg::vec_max_abs(&(l.matrix() * xt));
    let settle = 1e-8 * linalg::norm_inf(l.matrix()) * x0_norm;
    if residual > settle {
        let spec = SpectralDecomposition::of(l);
        let suggested_horizon = spec.smallest_positive(tol).map_or(1.0, |lam| 10.0 / lam);
        return Err(DynamicsError::NotSettled {
            residual,
            tolerance: settle,
            suggested_horizon: suggested_horizon.max(traj.horizon() * 2.0),
        });
    }
    let tol_zero = 1e-7 * x0_norm;
    let xt_norm = linalg::vec_max_abs(xt);
    let tol_agree = 1e-6 * xt_norm;
    let label = if xt_norm <= tol_zero {
        OutcomeLabel::Trivial
    } else {
        label_blocks(xt, n, d, tol_agree)
    };
    Ok(Outcome {
        label,
        terminal_residual: residual,
        tol_zero,
        tol_agree,
    })
}

fn label_blocks(x: &DVector<f64>, n: usize, d: usize, tol: f64) -> OutcomeLabel {
    let block = |i: usize| x.rows(i * d, d).into_owned();
    let close = |a: &DVector<f64>, b: &DVector<f64>| linalg::vec_max_abs(&(a - b)) <= tol;
    let first = block(0);
    if (1..n).all(|i| close(&block(i), &first)) {
        return OutcomeLabel::Consensus;
    }
    if let Some(r) = (0..n).find(|&i| linalg::vec_max_abs(&block(i)) > tol) {
        let reference = block(r);
        let signs: Option<Vec<i8>> = (0..n)
            .map(|i| {
                let b = block(i);
                if close(&b, &reference) {
                    Some(1)
                } else if close(&b, &-&reference) {
                    Some(-1)
                } else {
                    None
                }
            })
            .collect();
        if let Some(mut signs) = signs {
            if signs[0] < 0 {
                signs.iter_mut().for_each(|s| *s = -*s);
            }
            return OutcomeLabel::Bipartite { signs };
        }
    }
    let mut groups: Vec<(DVector<f64>, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let b = block(i);
        match groups.iter_mut().find(|(rep, _)| close(rep, &b)) {
            Some((_, members)) => members.push(i),
            None => groups.push((b, vec![i])),
        }
    }
    OutcomeLabel::Cluster {
        groups: groups.into_iter().map(|(_, m)| m).collect(),
    }
}

/// Simulates with the default horizon and labels the result.
pub fn simulate(
    l: &Laplacian,
    x0: &DVector<f64>,
    method: Method,
    tol: &Tolerances,
) -> Result<(Trajectory, Outcome), DynamicsError> {
    let spec = SpectralDecomposition::of(l);
    let horizon = default_horizon(&spec, tol);
    let traj = integrate(l, x0, horizon, 100, method)?;
    let outcome = classify_outcome(l, &traj, tol)?;
    Ok((traj, outcome))
}
