//! Floating-point side: closed-form family evaluation, parameter instances,
//! and adaptive integration of reduction systems.

pub mod rk45;
pub mod special;

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{PdeCase, ReductionSystem, SolutionFamily};
use crate::expr::{Binding, CompiledExpr, Expr, ExprError, NumEnv, Rat};
use crate::reduction::PHI;
pub use rk45::{IntegrateError, StepStats, Tolerances};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("validity violation: {0}")]
    ValidityViolation(String),
    #[error("missing value for `{0}`")]
    Missing(String),
    #[error("value for `{name}` conflicts with the family constraint {name}={expected}")]
    Conflict { name: String, expected: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// Exact values for a case's parameters and a family's constants, with the
/// family constraints applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub family: String,
    pub values: Binding,
}

impl Instance {
    /// `given` overrides the family defaults; constrained parameters are
    /// derived and may only be given if they agree.
    pub fn new(
        fam: &SolutionFamily,
        case: &PdeCase,
        given: &Binding,
    ) -> Result<Instance, NumericsError> {
        let mut values = Binding::new();
        for (k, v) in given.iter() {
            values.bind(k, v.clone())?;
        }
        for (k, v) in fam.defaults.iter() {
            if values.get(k).is_none() && fam.constraints.get(k).is_none() {
                values.bind(k, v.clone())?;
            }
        }
        let mut out = Binding::new();
        for (k, v) in values.iter() {
            if fam.constraints.get(k).is_none() {
                out.bind(k, v.clone())?;
            }
        }
        for (k, rule) in fam.constraints.iter() {
            let val = rule.substitute(&out)?;
            if let Some(g) = values.get(k) {
                if g != &val {
                    return Err(NumericsError::Conflict {
                        name: k.clone(),
                        expected: rule.to_string(),
                    });
                }
            }
            out.bind(k, val)?;
        }
        for name in case.parameters.iter().chain(&fam.constants) {
            match out.get(name) {
                Some(v) if v.as_rational().is_some() => {}
                Some(v) => {
                    return Err(NumericsError::ValidityViolation(format!(
                        "`{name}` must be a number, got `{v}`"
                    )))
                }
                None => return Err(NumericsError::Missing(name.clone())),
            }
        }
        Ok(Instance {
            family: fam.id.clone(),
            values: out,
        })
    }

    pub fn env(&self) -> NumEnv {
        self.values
            .iter()
            .map(|(k, v)| {
                let r: Rat = v.as_rational().expect("instance values are numbers");
                (k.clone(), r.to_f64().unwrap_or(f64::NAN))
            })
            .collect()
    }
}

/// Compiled closed form of one family instance, `t -> (phi0, phi1, phi2)`.
#[derive(Debug, Clone)]
pub struct FamilyEval {
    phi: Vec<CompiledExpr>,
}

impl FamilyEval {
    pub fn new(fam: &SolutionFamily, inst: &Instance) -> Result<FamilyEval, NumericsError> {
        let env = inst.env();
        check_predicates(fam, &env)?;
        let phi = fam
            .phi
            .iter()
            .map(|e| CompiledExpr::new(e, &["t"], &env))
            .collect::<Result<_, _>>()?;
        Ok(FamilyEval { phi })
    }

    pub fn at(&self, t: f64) -> Result<[f64; 3], NumericsError> {
        let mut out = [0.0; 3];
        for (nu, c) in self.phi.iter().enumerate() {
            let v = c
                .eval(&[t])
                .map_err(|e| NumericsError::ValidityViolation(format!("phi{nu} at t={t}: {e}")))?;
            if !v.is_finite() {
                return Err(NumericsError::ValidityViolation(format!(
                    "phi{nu} is not finite at t={t}"
                )));
            }
            out[nu] = v;
        }
        Ok(out)
    }
}

fn check_predicates(fam: &SolutionFamily, env: &NumEnv) -> Result<(), NumericsError> {
    for p in &fam.positive {
        let v = p.eval(env)?;
        if !(v > 0.0) {
            return Err(NumericsError::ValidityViolation(format!(
                "{p} > 0 (value {v})"
            )));
        }
    }
    for p in &fam.nonzero {
        let v = p.eval(env)?;
        if v == 0.0 {
            return Err(NumericsError::ValidityViolation(format!("{p} != 0")));
        }
    }
    Ok(())
}

/// Evaluates the closed form at `t`.
pub fn eval_family(
    fam: &SolutionFamily,
    inst: &Instance,
    t: f64,
) -> Result<[f64; 3], NumericsError> {
    FamilyEval::new(fam, inst)?.at(t)
}

/// Right-hand sides of a reduction system with parameters frozen.
#[derive(Debug, Clone)]
pub struct SystemEval {
    rhs: Vec<CompiledExpr>,
}

impl SystemEval {
    pub fn new(system: &ReductionSystem, params: &NumEnv) -> Result<SystemEval, ExprError> {
        let rhs = system
            .rhs
            .iter()
            .map(|e| CompiledExpr::new(e, &PHI, params))
            .collect::<Result<_, _>>()?;
        Ok(SystemEval { rhs })
    }

    pub fn at(&self, phi: &[f64]) -> Result<[f64; 3], ExprError> {
        Ok([
            self.rhs[0].eval(phi)?,
            self.rhs[1].eval(phi)?,
            self.rhs[2].eval(phi)?,
        ])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<[f64; 3]>,
    pub rtol: f64,
    pub atol: f64,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,phi0,phi1,phi2\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", t, v[0], v[1], v[2]);
        }
        s
    }

    pub fn last(&self) -> [f64; 3] {
        *self.values.last().expect("trajectory is nonempty")
    }
}

/// `n` equally spaced times from `t0` to `t1` inclusive.
pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t1];
    }
    (0..n)
        .map(|k| {
            if k == n - 1 {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Integrates `phi' = R(phi)` from `ic` at `t0`, reporting at `out_times`.
pub fn integrate(
    system: &ReductionSystem,
    params: &NumEnv,
    ic: [f64; 3],
    t0: f64,
    t1: f64,
    tol: Tolerances,
    out_times: &[f64],
) -> Result<Trajectory, NumericsError> {
    let sys = SystemEval::new(system, params)?;
    let (out, stats) = rk45::dopri5(
        |_, y, dy| {
            let r = sys.at(y).map_err(|e| e.to_string())?;
            dy.copy_from_slice(&r);
            Ok(())
        },
        t0,
        t1,
        &ic,
        out_times,
        tol,
    )?;
    Ok(Trajectory {
        times: out_times.to_vec(),
        values: out.into_iter().map(|v| [v[0], v[1], v[2]]).collect(),
        rtol: tol.rtol,
        atol: tol.atol,
        stats,
    })
}

/// Smallest radicand `phi2 x^2 + phi1 x + phi0` over an `nx` by `nt` grid
/// of the family's window.
pub fn min_radicand(
    fam: &SolutionFamily,
    eval: &FamilyEval,
    nx: usize,
    nt: usize,
) -> Result<f64, NumericsError> {
    let mut min = f64::INFINITY;
    for t in uniform_times(fam.t_window.0, fam.t_window.1, nt) {
        let p = eval.at(t)?;
        for x in uniform_times(fam.x_window.0, fam.x_window.1, nx) {
            min = min.min(p[2] * x * x + p[1] * x + p[0]);
        }
    }
    Ok(min)
}

fn random_rational<R: Rng>(rng: &mut R, center: &Rat) -> Expr {
    let q = rng.gen_range(1..=8i64);
    let p = rng.gen_range(-q..=q);
    // center + p/(2q), a perturbation of at most 1/2
    Expr::constant(center + Rat::new(p.into(), (2 * q).into()))
}

/// Draws an exact-rational instance near the family defaults whose closed
/// form is valid, with radicand at least `0.1` on the window.
pub fn sample_instance<R: Rng>(
    fam: &SolutionFamily,
    case: &PdeCase,
    rng: &mut R,
) -> Result<Instance, NumericsError> {
    let free: Vec<&String> = case
        .parameters
        .iter()
        .chain(&fam.constants)
        .filter(|n| fam.constraints.get(n).is_none())
        .collect();
    let mut last_err = NumericsError::ValidityViolation("no sample drawn".into());
    for _ in 0..1000 {
        let mut b = Binding::new();
        for name in &free {
            let center = fam
                .defaults
                .get(name)
                .and_then(|e| e.as_rational())
                .unwrap_or_default();
            b.bind(name, random_rational(rng, &center))?;
        }
        let attempt = Instance::new(fam, case, &b).and_then(|inst| {
            let ev = FamilyEval::new(fam, &inst)?;
            let m = min_radicand(fam, &ev, 11, 11)?;
            if m < 0.1 {
                return Err(NumericsError::ValidityViolation(format!(
                    "radicand drops to {m} on the window"
                )));
            }
            Ok(inst)
        });
        match attempt {
            Ok(inst) => return Ok(inst),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}
