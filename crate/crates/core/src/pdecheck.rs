//! Checks candidate solutions against the full equation `u_t = (H/u)_xx + F`:
//! grid residuals and a method-of-lines integrator.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{PdeCase, SolutionFamily};
use crate::expr::{CompiledExpr, Expr, ExprError, NumEnv};
use crate::numerics::{rk45, FamilyEval, Instance, NumericsError, SystemEval, Tolerances};
use crate::reduction::{Ansatz, PHI, PHI_DOT};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("pole on the grid at x={x}, t={t}")]
    PoleOnGrid { x: f64, t: f64 },
    #[error("validity violation: {0}")]
    ValidityViolation(String),
    #[error("u is not positive at x={x} (t={t})")]
    NegativeU { x: f64, t: f64 },
    /// `u_t = (H/u)_xx` linearises to diffusion with coefficient `-H/u^2`,
    /// so `H > 0` makes forward integration ill-posed.
    #[error(
        "backward diffusion at x={x}: H/u^2 = {ratio} > 0, the initial value problem is ill-posed"
    )]
    BackwardDiffusion { x: f64, ratio: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
}

impl Grid {
    pub fn new(x0: f64, x1: f64, nx: usize) -> Result<Grid, PdeError> {
        if !(x0 > 0.0 && x1 > x0 && x1.is_finite()) {
            return Err(PdeError::Grid(format!(
                "need 0 < x0 < x1, got [{x0}, {x1}]"
            )));
        }
        if nx < 16 {
            return Err(PdeError::Grid(format!("need at least 16 points, got {nx}")));
        }
        Ok(Grid { x0, x1, nx })
    }

    pub fn h(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.nx - 1 {
            self.x1
        } else {
            self.x0 + self.h() * i as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.point(i)).collect()
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> Grid {
        Grid {
            nx: 2 * self.nx - 1,
            ..*self
        }
    }
}

/// Pointwise data of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetPoint {
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_t: f64,
}

/// A function `u(x,t)` with analytic first derivatives and `u_xx`.
pub trait Candidate {
    fn value(&self, x: f64, t: f64) -> Result<f64, PdeError>;
    fn jet(&self, x: f64, t: f64) -> Result<JetPoint, PdeError>;
}

fn classify(e: ExprError, x: f64, t: f64) -> PdeError {
    match e {
        ExprError::Pole(..) | ExprError::DivisionByZero(_) => PdeError::PoleOnGrid { x, t },
        ExprError::Domain(m) => PdeError::ValidityViolation(format!("at x={x}, t={t}: {m}")),
        other => PdeError::Expr(other),
    }
}

fn finite(v: f64, x: f64, t: f64) -> Result<f64, PdeError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(PdeError::PoleOnGrid { x, t })
    }
}

/// The ansatz evaluated along a closed-form family, with `u_t` from the
/// reduction system.
pub struct AnsatzSolution {
    phi: FamilyEval,
    system: SystemEval,
    u: CompiledExpr,
    u_x: CompiledExpr,
    u_xx: CompiledExpr,
    u_t: CompiledExpr,
}

impl AnsatzSolution {
    pub fn new(
        case: &PdeCase,
        fam: &SolutionFamily,
        inst: &Instance,
        negative: bool,
    ) -> Result<AnsatzSolution, PdeError> {
        let env = inst.env();
        let ansatz = Ansatz {
            m: case.m,
            negative,
        };
        let u = ansatz.u();
        let u_x = u.differentiate("x");
        let u_xx = u_x.differentiate("x");
        let inputs = ["x", PHI[0], PHI[1], PHI[2]];
        let t_inputs = [
            "x", PHI[0], PHI[1], PHI[2], PHI_DOT[0], PHI_DOT[1], PHI_DOT[2],
        ];
        let system = case.expected.substitute(&inst.values)?;
        Ok(AnsatzSolution {
            phi: FamilyEval::new(fam, inst)?,
            system: SystemEval::new(&system, &env)?,
            u: CompiledExpr::new(&u, &inputs, &env)?,
            u_x: CompiledExpr::new(&u_x, &inputs, &env)?,
            u_xx: CompiledExpr::new(&u_xx, &inputs, &env)?,
            u_t: CompiledExpr::new(&ansatz.u_t(), &t_inputs, &env)?,
        })
    }

    pub fn phi(&self, t: f64) -> Result<[f64; 3], PdeError> {
        Ok(self.phi.at(t)?)
    }
}

impl Candidate for AnsatzSolution {
    fn value(&self, x: f64, t: f64) -> Result<f64, PdeError> {
        let p = self.phi(t)?;
        let v = self
            .u
            .eval(&[x, p[0], p[1], p[2]])
            .map_err(|e| classify(e, x, t))?;
        finite(v, x, t)
    }

    fn jet(&self, x: f64, t: f64) -> Result<JetPoint, PdeError> {
        let p = self.phi(t)?;
        let d = self.system.at(&p).map_err(|e| classify(e, x, t))?;
        let a = [x, p[0], p[1], p[2]];
        let ev = |c: &CompiledExpr, args: &[f64]| -> Result<f64, PdeError> {
            finite(c.eval(args).map_err(|e| classify(e, x, t))?, x, t)
        };
        Ok(JetPoint {
            u: ev(&self.u, &a)?,
            u_x: ev(&self.u_x, &a)?,
            u_xx: ev(&self.u_xx, &a)?,
            u_t: ev(&self.u_t, &[x, p[0], p[1], p[2], d[0], d[1], d[2]])?,
        })
    }
}

/// An explicit `u(x,t)` expression; derivatives are taken symbolically.
pub struct ExprSolution {
    u: CompiledExpr,
    u_x: CompiledExpr,
    u_xx: CompiledExpr,
    u_t: CompiledExpr,
}

impl ExprSolution {
    pub fn new(u: &Expr, params: &NumEnv) -> Result<ExprSolution, PdeError> {
        let c = |e: &Expr| CompiledExpr::new(e, &["x", "t"], params);
        let u_x = u.differentiate("x");
        Ok(ExprSolution {
            u: c(u)?,
            u_xx: c(&u_x.differentiate("x"))?,
            u_x: c(&u_x)?,
            u_t: c(&u.differentiate("t"))?,
        })
    }
}

impl Candidate for ExprSolution {
    fn value(&self, x: f64, t: f64) -> Result<f64, PdeError> {
        finite(self.u.eval(&[x, t]).map_err(|e| classify(e, x, t))?, x, t)
    }

    fn jet(&self, x: f64, t: f64) -> Result<JetPoint, PdeError> {
        let ev = |c: &CompiledExpr| -> Result<f64, PdeError> {
            finite(c.eval(&[x, t]).map_err(|e| classify(e, x, t))?, x, t)
        };
        Ok(JetPoint {
            u: ev(&self.u)?,
            u_x: ev(&self.u_x)?,
            u_xx: ev(&self.u_xx)?,
            u_t: ev(&self.u_t)?,
        })
    }
}

/// `u_t = (H/u)_xx + F` with parameters frozen.
pub struct PdeEval {
    h: CompiledExpr,
    f: CompiledExpr,
    k: CompiledExpr,
}

const JET_INPUTS: [&str; 4] = ["x", "u", "u1", "u2"];

impl PdeEval {
    pub fn new(h: &Expr, f: &Expr, params: &NumEnv) -> Result<PdeEval, PdeError> {
        let w = h * Expr::sym("u").recip()?;
        let k = crate::jet::total_derivative_x_n(&w, 2) + f;
        Ok(PdeEval {
            h: CompiledExpr::new(h, &["x"], params)?,
            f: CompiledExpr::new(f, &JET_INPUTS, params)?,
            k: CompiledExpr::new(&k, &JET_INPUTS, params)?,
        })
    }

    pub fn for_case(case: &PdeCase, params: &NumEnv) -> Result<PdeEval, PdeError> {
        PdeEval::new(&case.h, &case.f_terms, params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualPoint {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub max_abs_residual: f64,
    pub h: f64,
    pub times: Vec<f64>,
    pub exact: bool,
    pub points: Vec<ResidualPoint>,
}

impl ResidualReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,t,u,residual\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                p.x, p.t, p.u, p.residual
            );
        }
        s
    }
}

/// Residual `u_t - (H/u)_xx - F` over `grid x times`. With `exact` the
/// spatial derivatives are analytic; otherwise they are second-order
/// central differences at interior points.
pub fn residual(
    pde: &PdeEval,
    cand: &dyn Candidate,
    grid: &Grid,
    times: &[f64],
    exact: bool,
) -> Result<ResidualReport, PdeError> {
    let h = grid.h();
    let mut points = Vec::new();
    let mut max: f64 = 0.0;
    for &t in times {
        let range = if exact { 0..grid.nx } else { 1..grid.nx - 1 };
        for i in range {
            let x = grid.point(i);
            let j = cand.jet(x, t)?;
            let r = if exact {
                let k = pde
                    .k
                    .eval(&[x, j.u, j.u_x, j.u_xx])
                    .map_err(|e| classify(e, x, t))?;
                j.u_t - k
            } else {
                let (xl, xr) = (x - h, x + h);
                let (ul, ur) = (cand.value(xl, t)?, cand.value(xr, t)?);
                let w = |xx: f64, uu: f64| -> Result<f64, PdeError> {
                    Ok(pde.h.eval(&[xx]).map_err(|e| classify(e, xx, t))? / uu)
                };
                let wxx = (w(xr, ur)? - 2.0 * w(x, j.u)? + w(xl, ul)?) / (h * h);
                let u1 = (ur - ul) / (2.0 * h);
                let u2 = (ur - 2.0 * j.u + ul) / (h * h);
                let f = pde
                    .f
                    .eval(&[x, j.u, u1, u2])
                    .map_err(|e| classify(e, x, t))?;
                j.u_t - wxx - f
            };
            let r = finite(r, x, t)?;
            max = max.max(r.abs());
            points.push(ResidualPoint {
                x,
                t,
                u: j.u,
                residual: r,
            });
        }
    }
    Ok(ResidualReport {
        max_abs_residual: max,
        h,
        times: times.to_vec(),
        exact,
        points,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Convergence {
    pub h: f64,
    pub residual_h: f64,
    pub residual_half: f64,
    pub ratio: f64,
}

/// Finite-difference residual on `grid` and on its refinement.
pub fn residual_convergence(
    pde: &PdeEval,
    cand: &dyn Candidate,
    grid: &Grid,
    times: &[f64],
) -> Result<Convergence, PdeError> {
    let a = residual(pde, cand, grid, times, false)?.max_abs_residual;
    let b = residual(pde, cand, &grid.refined(), times, false)?.max_abs_residual;
    Ok(Convergence {
        h: grid.h(),
        residual_h: a,
        residual_half: b,
        ratio: a / b,
    })
}

/// Method of lines for `u_t = (H/u)_xx + F` on `grid` with time-dependent
/// Dirichlet data. Returns the profile at `t1`.
pub fn mol_integrate<B>(
    pde: &PdeEval,
    grid: &Grid,
    u0: &[f64],
    t0: f64,
    t1: f64,
    boundary: B,
    tol: Tolerances,
) -> Result<Vec<f64>, PdeError>
where
    B: Fn(f64) -> Result<(f64, f64), PdeError>,
{
    let n = grid.nx;
    if u0.len() != n {
        return Err(PdeError::Grid(format!(
            "initial profile has {} values for {n} grid points",
            u0.len()
        )));
    }
    let xs = grid.points();
    for (i, &u) in u0.iter().enumerate() {
        if !(u > 0.0) {
            return Err(PdeError::NegativeU { x: xs[i], t: t0 });
        }
    }
    let hs: Vec<f64> = xs
        .iter()
        .map(|&x| pde.h.eval(&[x]).map_err(|e| classify(e, x, t0)))
        .collect::<Result<_, _>>()?;
    if let Some(i) = (0..n).find(|&i| hs[i] > 0.0) {
        return Err(PdeError::BackwardDiffusion {
            x: xs[i],
            ratio: hs[i] / (u0[i] * u0[i]),
        });
    }
    let dx = grid.h();
    let inv2 = 1.0 / (dx * dx);
    let mut full = vec![0.0; n];
    let mut scratch = Vec::new();
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<(), String> {
        let (l, r) = boundary(t).map_err(|e| e.to_string())?;
        full[0] = l;
        full[n - 1] = r;
        full[1..n - 1].copy_from_slice(y);
        if let Some(k) = full.iter().position(|u| !(*u > 0.0)) {
            return Err(format!("u is not positive at x={}", xs[k]));
        }
        for i in 1..n - 1 {
            let (ul, uc, ur) = (full[i - 1], full[i], full[i + 1]);
            let wxx = (hs[i + 1] / ur - 2.0 * hs[i] / uc + hs[i - 1] / ul) * inv2;
            let u1 = (ur - ul) / (2.0 * dx);
            let u2 = (ur - 2.0 * uc + ul) * inv2;
            let f = pde
                .f
                .eval_scratch(&[xs[i], uc, u1, u2], &mut scratch)
                .map_err(|e| e.to_string())?;
            dy[i - 1] = wxx + f;
        }
        Ok(())
    };
    let (out, _) =
        rk45::dopri5(rhs, t0, t1, &u0[1..n - 1], &[t1], tol).map_err(NumericsError::from)?;
    let (l, r) = boundary(t1)?;
    let mut prof = Vec::with_capacity(n);
    prof.push(l);
    prof.extend_from_slice(&out[0]);
    prof.push(r);
    if let Some(k) = prof.iter().position(|u| !(*u > 0.0)) {
        return Err(PdeError::NegativeU { x: xs[k], t: t1 });
    }
    Ok(prof)
}

/// Tolerances used by the method of lines unless overridden.
pub const MOL_TOLERANCES: Tolerances = Tolerances {
    rtol: 1e-8,
    atol: 1e-10,
};

/// Numerical and exact profiles at the end of a method-of-lines run.
#[derive(Debug, Clone, Serialize)]
pub struct MolReport {
    pub t1: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub exact: Vec<f64>,
    /// `max |u - exact| / max |exact|`.
    pub rel_error: f64,
}

impl MolReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,u,exact,error\n");
        for ((x, u), e) in self.x.iter().zip(&self.u).zip(&self.exact) {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", x, u, e, u - e);
        }
        s
    }
}

/// Integrates exact initial data of `cand` with exact boundary values and
/// compares with `cand` at `t1`.
pub fn mol_compare(
    pde: &PdeEval,
    cand: &dyn Candidate,
    grid: &Grid,
    t0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<MolReport, PdeError> {
    let xs = grid.points();
    let u0: Vec<f64> = xs
        .iter()
        .map(|&x| cand.value(x, t0))
        .collect::<Result<_, _>>()?;
    let (a, b) = (grid.x0, grid.x1);
    let prof = mol_integrate(
        pde,
        grid,
        &u0,
        t0,
        t1,
        |t| Ok((cand.value(a, t)?, cand.value(b, t)?)),
        tol,
    )?;
    let exact: Vec<f64> = xs
        .iter()
        .map(|&x| cand.value(x, t1))
        .collect::<Result<_, _>>()?;
    let mut err: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for (u, e) in prof.iter().zip(&exact) {
        err = err.max((u - e).abs());
        norm = norm.max(e.abs());
    }
    Ok(MolReport {
        t1,
        x: xs,
        u: prof,
        exact,
        rel_error: err / norm,
    })
}

/// Relative max-norm error of [`mol_compare`].
pub fn mol_error(
    pde: &PdeEval,
    cand: &dyn Candidate,
    grid: &Grid,
    t0: f64,
    t1: f64,
    tol: Tolerances,
) -> Result<f64, PdeError> {
    Ok(mol_compare(pde, cand, grid, t0, t1, tol)?.rel_error)
}
