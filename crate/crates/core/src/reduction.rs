//! Reduction of `u_t = (H/u)_xx + F` by the ansatz
//! `u = x^-m (phi2 x^2 + phi1 x + phi0)^(-1/2)` to three ODEs for the `phi`s.

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{PdeCase, ReductionSystem};
use crate::expr::{Atom, AtomKind, Binding, Derivation, Expr, ExprError, Poly};
use crate::jet;

pub const PHI: [&str; 3] = ["phi0", "phi1", "phi2"];
pub const PHI_DOT: [&str; 3] = ["phi0'", "phi1'", "phi2'"];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReductionError {
    #[error("incompatible ansatz: {0}")]
    IncompatibleAnsatz(String),
    #[error("residual is not of the form B*sqrt(v): {0}")]
    NonRationalStructure(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `u = sign * x^-m / sqrt(v)`, `v = phi2 x^2 + phi1 x + phi0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ansatz {
    pub m: u32,
    pub negative: bool,
}

/// `d/dt` acting through `phi_nu -> phi_nu'`.
struct PhiTime;

impl Derivation for PhiTime {
    fn symbol(&self, name: &str) -> Expr {
        match PHI.iter().position(|p| *p == name) {
            Some(k) => Expr::sym(PHI_DOT[k]),
            None => Expr::zero(),
        }
    }
}

impl Ansatz {
    pub fn new(m: u32) -> Self {
        Ansatz { m, negative: false }
    }

    pub fn radicand() -> Expr {
        Expr::sym("phi2") * Expr::sym("x").powi(2).unwrap()
            + Expr::sym("phi1") * Expr::sym("x")
            + Expr::sym("phi0")
    }

    pub fn u(&self) -> Expr {
        let s = Expr::sqrt(Ansatz::radicand()).expect("radicand is a polynomial");
        let xm = Expr::sym("x").powi(self.m as i32).unwrap();
        let u = (xm * s).recip().expect("ansatz is nonzero");
        if self.negative {
            -u
        } else {
            u
        }
    }

    /// `u_t` with the `phi'` kept as symbols.
    pub fn u_t(&self) -> Expr {
        self.u().derive(&PhiTime)
    }

    /// The jet binding `u, u1, u2 -> ansatz and its x-derivatives`.
    pub fn jet_binding(&self, order: usize) -> Binding {
        let mut b = Binding::new();
        let mut d = self.u();
        for i in 0..=order {
            if i > 0 {
                d = d.differentiate("x");
            }
            b.bind(&jet::jet_var(i), d.clone())
                .expect("distinct jet symbols");
        }
        b
    }

    /// `u_t - K` on the ansatz.
    pub fn residual(&self, k: &Expr) -> Result<Expr, ExprError> {
        let order = jet::jet_order(k).unwrap_or(0);
        Ok(self.u_t() - k.substitute(&self.jet_binding(order))?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionOutcome {
    #[serde(skip)]
    pub system: ReductionSystem,
    /// Number of `x`-coefficient equations produced.
    pub equations: usize,
    /// Whether the other sign of the ansatz gives the same system.
    pub sign_symmetric: bool,
}

fn radical_atom() -> Atom {
    let s = Expr::sqrt(Ansatz::radicand()).unwrap();
    s.numer().atoms().into_iter().next().expect("radical atom")
}

/// Derives the reduction system for `u_t = K` under the ansatz with the
/// given exponent.
pub fn reduce(k: &Expr, m: u32) -> Result<ReductionOutcome, ReductionError> {
    let plus = derive(k, Ansatz::new(m))?;
    let minus = derive(k, Ansatz { m, negative: true });
    let sign_symmetric = matches!(&minus, Ok((sys, _)) if *sys == plus.0);
    Ok(ReductionOutcome {
        system: plus.0,
        equations: plus.1,
        sign_symmetric,
    })
}

/// Reduction system of a catalogued case.
pub fn substitute_ansatz(case: &PdeCase) -> Result<ReductionSystem, ReductionError> {
    Ok(reduce(&case.rhs(), case.m)?.system)
}

fn derive(k: &Expr, ansatz: Ansatz) -> Result<(ReductionSystem, usize), ReductionError> {
    let r = ansatz.residual(k)?;
    if r.is_zero() {
        return Err(ReductionError::IncompatibleAnsatz(
            "residual vanishes identically, the phi' are undetermined".into(),
        ));
    }
    // With s = sqrt(v) the canonical numerator is A + B*s.
    let s = radical_atom();
    let parts = r.numer().coeffs_in(&s);
    let mut nonzero: Vec<Poly> = parts.into_iter().filter(|p| !p.is_zero()).collect();
    if nonzero.len() != 1 {
        return Err(ReductionError::NonRationalStructure(format!(
            "both parity parts of the numerator are nonzero ({} terms)",
            r.numer().len()
        )));
    }
    let body = nonzero.pop().unwrap();
    for a in body.atoms() {
        if matches!(a.kind(), AtomKind::Sqrt(_)) || a.as_sym() == Some("u") {
            return Err(ReductionError::NonRationalStructure(format!(
                "unexpected generator `{a}` in the residual"
            )));
        }
    }
    let x = Atom::sym("x");
    let rows: Vec<Expr> = body
        .coeffs_in(&x)
        .into_iter()
        .filter(|c| !c.is_zero())
        .map(Expr::from_poly)
        .collect();
    let equations = rows.len();
    let system = solve_linear_in_phi_dot(&rows)?;
    Ok((system, equations))
}

/// Solves the rows, each affine in `phi0', phi1', phi2'`, by exact
/// elimination, then checks every row is satisfied.
fn solve_linear_in_phi_dot(rows: &[Expr]) -> Result<ReductionSystem, ReductionError> {
    let zero_dots = Binding::from_pairs(PHI_DOT.iter().map(|n| (*n, Expr::zero())))?;
    // Augmented matrix [a_0 a_1 a_2 | -b].
    let mut m: Vec<[Expr; 4]> = Vec::with_capacity(rows.len());
    for r in rows {
        let mut coeffs = Vec::with_capacity(3);
        for d in PHI_DOT {
            let a = r.differentiate(d);
            if PHI_DOT.iter().any(|e| a.depends_on(e)) {
                return Err(ReductionError::IncompatibleAnsatz(format!(
                    "equation is nonlinear in {d}"
                )));
            }
            coeffs.push(a);
        }
        let b = r.substitute(&zero_dots)?;
        m.push([coeffs[0].clone(), coeffs[1].clone(), coeffs[2].clone(), -b]);
    }
    let mut pivots = [usize::MAX; 3];
    let mut row = 0;
    for col in 0..3 {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip()?;
        for j in 0..4 {
            m[row][j] = &m[row][j] * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..4 {
                    let v = &m[i][j] - &f * &m[row][j];
                    m[i][j] = v;
                }
            }
        }
        pivots[col] = row;
        row += 1;
    }
    if let Some(col) = pivots.iter().position(|&p| p == usize::MAX) {
        return Err(ReductionError::IncompatibleAnsatz(format!(
            "{} is not determined by the coefficient equations",
            PHI_DOT[col]
        )));
    }
    if let Some(r) = m[3..].iter().find(|r| !r[3].is_zero()) {
        return Err(ReductionError::IncompatibleAnsatz(format!(
            "extra coefficient equation is not satisfied: {} = 0",
            r[3]
        )));
    }
    Ok(ReductionSystem {
        rhs: [
            m[pivots[0]][3].clone(),
            m[pivots[1]][3].clone(),
            m[pivots[2]][3].clone(),
        ],
    })
}
