//! Numerical rank test for classical invariance of a solution under a
//! linear combination of point generators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{CompiledExpr, ExprError, NumEnv};
use crate::jet::PointGenerator;
use crate::pdecheck::{Candidate, PdeError};

pub const DEFAULT_SAMPLES: usize = 50;
pub const RANK_THRESHOLD: f64 = 1e-8;
const MAX_RESAMPLES: usize = 5;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum InvarianceError {
    #[error("need at least as many samples ({samples}) as generators ({generators})")]
    TooFewSamples { samples: usize, generators: usize },
    #[error("no generators given")]
    NoGenerators,
    /// The vector fields themselves are linearly dependent, so a kernel of
    /// the invariance matrix would say nothing about the solution.
    #[error("generators are linearly dependent (combination {combination:?})")]
    DependentGenerators { combination: Vec<f64> },
    #[error("sampling failed {attempts} times; last error: {last}")]
    DegenerateSampling { attempts: usize, last: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    StrictlyNonInvariant,
    /// Kernel basis, one coefficient per generator.
    InvariantAlong {
        kernel: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub generators: Vec<String>,
    pub samples: Vec<(f64, f64)>,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl InvarianceReport {
    pub fn is_invariant(&self) -> bool {
        matches!(self.verdict, Verdict::InvariantAlong { .. })
    }

    pub fn kernel_dim(&self) -> usize {
        match &self.verdict {
            Verdict::StrictlyNonInvariant => 0,
            Verdict::InvariantAlong { kernel } => kernel.len(),
        }
    }
}

/// Sampling window `[x0, x1] x [t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x: (f64, f64),
    pub t: (f64, f64),
}

struct CompiledGenerator {
    xi: CompiledExpr,
    tau: CompiledExpr,
    eta: CompiledExpr,
}

/// Builds `M[p,i] = Q_i(x_p, t_p)` on the candidate and decides its rank.
/// Each column is divided by the norm of the magnitudes of its three terms
/// `|eta|, |xi u_x|, |tau u_t|`, so the verdict does not depend on how a
/// generator is normalised and cancellation is judged relative to term size.
pub fn invariance_test(
    cand: &dyn Candidate,
    generators: &[(String, PointGenerator)],
    params: &NumEnv,
    window: Window,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport, InvarianceError> {
    if generators.is_empty() {
        return Err(InvarianceError::NoGenerators);
    }
    if samples < generators.len() {
        return Err(InvarianceError::TooFewSamples {
            samples,
            generators: generators.len(),
        });
    }
    let inputs = ["x", "t", "u"];
    let compiled: Vec<CompiledGenerator> = generators
        .iter()
        .map(|(_, g)| {
            Ok(CompiledGenerator {
                xi: CompiledExpr::new(&g.xi, &inputs, params)?,
                tau: CompiledExpr::new(&g.tau, &inputs, params)?,
                eta: CompiledExpr::new(&g.eta, &inputs, params)?,
            })
        })
        .collect::<Result<_, ExprError>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::new();
    for _ in 0..MAX_RESAMPLES {
        let pts: Vec<(f64, f64)> = (0..samples)
            .map(|_| {
                (
                    rng.gen_range(window.x.0..=window.x.1),
                    rng.gen_range(window.t.0..=window.t.1),
                )
            })
            .collect();
        match build_matrix(cand, &compiled, &pts) {
            Ok((m, norms, fields)) => {
                check_independent(fields)?;
                return Ok(decide(m, norms, generators, pts));
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(InvarianceError::DegenerateSampling {
        attempts: MAX_RESAMPLES,
        last,
    })
}

fn build_matrix(
    cand: &dyn Candidate,
    gens: &[CompiledGenerator],
    pts: &[(f64, f64)],
) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>), PdeError> {
    let mut m = DMatrix::zeros(pts.len(), gens.len());
    let mut fields = DMatrix::zeros(3 * pts.len(), gens.len());
    let mut scale = vec![0.0; gens.len()];
    for (p, &(x, t)) in pts.iter().enumerate() {
        let j = cand.jet(x, t)?;
        let args = [x, t, j.u];
        for (i, g) in gens.iter().enumerate() {
            let (xi, tau, eta) = (g.xi.eval(&args)?, g.tau.eval(&args)?, g.eta.eval(&args)?);
            fields[(3 * p, i)] = xi;
            fields[(3 * p + 1, i)] = tau;
            fields[(3 * p + 2, i)] = eta;
            let terms = [eta, xi * j.u_x, tau * j.u_t];
            let q = terms[0] - terms[1] - terms[2];
            if !q.is_finite() {
                return Err(PdeError::PoleOnGrid { x, t });
            }
            m[(p, i)] = q;
            let mag: f64 = terms.iter().map(|v| v.abs()).sum();
            scale[i] += mag * mag;
        }
    }
    Ok((m, scale.into_iter().map(f64::sqrt).collect(), fields))
}

fn check_independent(mut fields: DMatrix<f64>) -> Result<(), InvarianceError> {
    let n = fields.ncols();
    let norms: Vec<f64> = (0..n).map(|i| fields.column(i).norm()).collect();
    for (i, &s) in norms.iter().enumerate() {
        if s == 0.0 {
            let mut combination = vec![0.0; n];
            combination[i] = 1.0;
            return Err(InvarianceError::DependentGenerators { combination });
        }
        fields.column_mut(i).scale_mut(1.0 / s);
    }
    let svd = fields.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let (kmin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, s)| (k, *s))
        .expect("at least one generator");
    let smax = svd.singular_values.max();
    if smin <= RANK_THRESHOLD * smax {
        let mut c: Vec<f64> = (0..n).map(|i| vt[(kmin, i)] / norms[i]).collect();
        let big = c
            .iter()
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { *v } else { acc });
        c.iter_mut().for_each(|v| *v /= big);
        return Err(InvarianceError::DependentGenerators { combination: c });
    }
    Ok(())
}

fn decide(
    mut m: DMatrix<f64>,
    norms: Vec<f64>,
    generators: &[(String, PointGenerator)],
    pts: Vec<(f64, f64)>,
) -> InvarianceReport {
    let n = m.ncols();
    for (i, &s) in norms.iter().enumerate() {
        if s > 0.0 {
            m.column_mut(i).scale_mut(1.0 / s);
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let mut kernel = Vec::new();
    for (&k, &s) in order.iter().zip(&sv) {
        if s <= RANK_THRESHOLD * smax || smax == 0.0 {
            let mut a: Vec<f64> = (0..n)
                .map(|i| {
                    let c = vt[(k, i)];
                    if norms[i] > 0.0 {
                        c / norms[i]
                    } else {
                        c
                    }
                })
                .collect();
            let big = a
                .iter()
                .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { *v } else { acc });
            if big != 0.0 {
                a.iter_mut().for_each(|v| *v /= big);
            }
            kernel.push(a);
        }
    }
    let verdict = if kernel.is_empty() {
        Verdict::StrictlyNonInvariant
    } else {
        Verdict::InvariantAlong { kernel }
    };
    InvarianceReport {
        generators: generators.iter().map(|(n, _)| n.clone()).collect(),
        samples: pts,
        singular_values: sv,
        threshold: RANK_THRESHOLD,
        verdict,
    }
}
