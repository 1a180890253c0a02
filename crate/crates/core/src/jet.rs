//! Jet-space calculus for scalar equations in one unknown `u(x)` (and, for
//! evolution equations, time `t`). Jet coordinates are the symbols
//! `u, u1, u2, ...`; `H, H1, H2, ...` stand for an arbitrary function of `x`
//! and its derivatives.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Binding, Derivation, Expr, ExprError};

/// Highest jet order the checks accept in their inputs.
pub const MAX_ORDER: usize = 12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum JetError {
    #[error("{what} has order {order}, above the supported maximum {max}")]
    OrderTooHigh {
        what: &'static str,
        order: usize,
        max: usize,
    },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Name of the jet coordinate of order `i`.
pub fn jet_var(i: usize) -> String {
    if i == 0 {
        "u".to_string()
    } else {
        format!("u{i}")
    }
}

fn jet_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('u')?;
    if rest.is_empty() {
        return Some(0);
    }
    if rest.bytes().all(|b| b.is_ascii_digit()) {
        rest.parse().ok()
    } else {
        None
    }
}

fn h_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('H')?;
    if rest.is_empty() {
        return Some(0);
    }
    if rest.bytes().all(|b| b.is_ascii_digit()) {
        rest.parse().ok()
    } else {
        None
    }
}

fn h_var(i: usize) -> String {
    format!("H{i}")
}

/// Highest jet coordinate occurring in `e`, or `None` if `u` is absent.
pub fn jet_order(e: &Expr) -> Option<usize> {
    e.free_symbols().iter().filter_map(|s| jet_index(s)).max()
}

/// Total derivative in `x`: `x -> 1`, `u_i -> u_{i+1}`, `H_i -> H_{i+1}`.
pub struct TotalX;

impl Derivation for TotalX {
    fn symbol(&self, name: &str) -> Expr {
        if name == "x" {
            return Expr::one();
        }
        if let Some(i) = jet_index(name) {
            return Expr::sym(&jet_var(i + 1));
        }
        if let Some(i) = h_index(name) {
            return Expr::sym(&h_var(i + 1));
        }
        Expr::zero()
    }
}

pub fn total_derivative_x(e: &Expr) -> Expr {
    e.derive(&TotalX)
}

/// Iterated total derivative `D_x^k e`.
pub fn total_derivative_x_n(e: &Expr, k: usize) -> Expr {
    (0..k).fold(e.clone(), |acc, _| total_derivative_x(&acc))
}

/// Evolutionary vector field `F d/du` prolonged along `D_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionaryField {
    characteristic: Expr,
}

impl EvolutionaryField {
    pub fn new(characteristic: Expr) -> Self {
        EvolutionaryField { characteristic }
    }

    pub fn characteristic(&self) -> &Expr {
        &self.characteristic
    }

    pub fn order(&self) -> Option<usize> {
        jet_order(&self.characteristic)
    }
}

/// Point generator `xi d/dx + tau d/dt + eta d/du` for an evolution equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGenerator {
    pub xi: Expr,
    pub tau: Expr,
    pub eta: Expr,
}

impl PointGenerator {
    pub fn new(xi: Expr, tau: Expr, eta: Expr) -> Self {
        PointGenerator { xi, tau, eta }
    }

    /// `eta - xi u1 - tau u_t`, with `u_t` replaced by `k`.
    pub fn characteristic(&self, k: &Expr) -> Expr {
        &self.eta - &self.xi * Expr::sym("u1") - &self.tau * k
    }

    pub fn substitute(&self, b: &Binding) -> Result<PointGenerator, ExprError> {
        Ok(PointGenerator {
            xi: self.xi.substitute(b)?,
            tau: self.tau.substitute(b)?,
            eta: self.eta.substitute(b)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub passed: bool,
    pub remainder: String,
    pub constraints: String,
    /// Jet order of the determining expression before and after on-shell
    /// reduction.
    pub order_before: usize,
    pub order_after: usize,
}

fn check_order(e: &Expr, what: &'static str, max: usize) -> Result<usize, JetError> {
    let order = jet_order(e).unwrap_or(0);
    if order > max {
        return Err(JetError::OrderTooHigh { what, order, max });
    }
    Ok(order)
}

fn apply_constraints(e: &Expr, c: Option<&Binding>) -> Result<Expr, ExprError> {
    match c {
        Some(b) => e.substitute(b),
        None => Ok(e.clone()),
    }
}

/// On-shell derivatives `U4 = D_x U`, `U5 = D_x U4` with `u3 -> U` applied.
fn shell_derivatives(u_rhs: &Expr) -> Result<(Expr, Expr), ExprError> {
    let shell = Binding::new().with("u3", u_rhs.clone())?;
    let u4 = total_derivative_x(u_rhs).substitute(&shell)?;
    let u5 = total_derivative_x(&u4).substitute(&shell)?;
    Ok((u4, u5))
}

/// Checks that `F` generates a Lie-Bäcklund symmetry of `u3 = U(x,u,u1,u2)`.
/// The linearised condition `sum_i D_x^i(F) d(u3 - U)/du_i` is reduced on
/// the equation and its first two prolongations, then tested for zero.
/// Parameter constraints are substituted into `F` and `U` first.
pub fn check_lb_symmetry(
    field: &EvolutionaryField,
    u_rhs: &Expr,
    constraints: Option<&Binding>,
) -> Result<SymmetryReport, JetError> {
    let f = apply_constraints(field.characteristic(), constraints)?;
    let u_rhs = apply_constraints(u_rhs, constraints)?;
    check_order(&f, "characteristic", 2)?;
    check_order(&u_rhs, "equation right-hand side", 2)?;

    let g = Expr::sym("u3") - &u_rhs;
    let mut d = f.clone();
    let mut sum = Expr::zero();
    for i in 0..=3 {
        if i > 0 {
            d = total_derivative_x(&d);
        }
        let dg = g.differentiate(&jet_var(i));
        if !dg.is_zero() {
            sum = sum + &d * dg;
        }
    }
    let order_before = jet_order(&sum).unwrap_or(0);

    let (u4, u5) = shell_derivatives(&u_rhs)?;
    let r = sum.substitute(&Binding::new().with("u5", u5)?)?;
    let r = r.substitute(&Binding::new().with("u4", u4)?)?;
    let r = r.substitute(&Binding::new().with("u3", u_rhs)?)?;
    Ok(SymmetryReport {
        passed: r.is_zero(),
        order_after: jet_order(&r).unwrap_or(0),
        remainder: r.to_string(),
        constraints: constraints.map(|c| c.to_string()).unwrap_or_default(),
        order_before,
    })
}

/// Same criterion computed with the restricted total derivative
/// `d/dx + u1 d/du + u2 d/du1 + U d/du2`, which never leaves second-order
/// jets. Used to cross-check [`check_lb_symmetry`].
pub fn check_lb_symmetry_on_shell(
    field: &EvolutionaryField,
    u_rhs: &Expr,
    constraints: Option<&Binding>,
) -> Result<SymmetryReport, JetError> {
    let f = apply_constraints(field.characteristic(), constraints)?;
    let u_rhs = apply_constraints(u_rhs, constraints)?;
    check_order(&f, "characteristic", 2)?;
    check_order(&u_rhs, "equation right-hand side", 2)?;
    let shell = Binding::new().with("u3", u_rhs.clone())?;
    let dt = |e: &Expr| total_derivative_x(e).substitute(&shell);
    let d1 = dt(&f)?;
    let d2 = dt(&d1)?;
    let d3 = dt(&d2)?;
    let order_before = jet_order(&d3).unwrap_or(0);
    let mut r = d3;
    for (i, di) in [&f, &d1, &d2].into_iter().enumerate() {
        let du = u_rhs.differentiate(&jet_var(i));
        if !du.is_zero() {
            r = r - di * du;
        }
    }
    Ok(SymmetryReport {
        passed: r.is_zero(),
        order_after: jet_order(&r).unwrap_or(0),
        remainder: r.to_string(),
        constraints: constraints.map(|c| c.to_string()).unwrap_or_default(),
        order_before,
    })
}

/// Fréchet derivative of `k` applied to `q`: `sum_i dk/du_i D_x^i q`.
pub fn frechet(k: &Expr, q: &Expr) -> Expr {
    let n = jet_order(k).unwrap_or(0);
    let mut d = q.clone();
    let mut acc = Expr::zero();
    for i in 0..=n {
        if i > 0 {
            d = total_derivative_x(&d);
        }
        let dk = k.differentiate(&jet_var(i));
        if !dk.is_zero() {
            acc = acc + dk * &d;
        }
    }
    acc
}

/// Checks that `X` is a point symmetry of `u_t = K(x,u,u1,u2,...)`, where
/// `K` may not contain `t` explicitly. With `Q` the characteristic of `X`,
/// the condition is `D_t Q = K'[Q]` on solutions.
pub fn check_point_symmetry(
    gen: &PointGenerator,
    k: &Expr,
    constraints: Option<&Binding>,
) -> Result<SymmetryReport, JetError> {
    let korder = check_order(k, "evolution right-hand side", MAX_ORDER)?;
    let q = gen.characteristic(k);
    let qorder = jet_order(&q).unwrap_or(0);
    // D_t Q = Q_t + sum_i dQ/du_i D_x^i K
    let mut dtq = q.differentiate("t");
    let mut dk = k.clone();
    for i in 0..=qorder {
        if i > 0 {
            dk = total_derivative_x(&dk);
        }
        let dq = q.differentiate(&jet_var(i));
        if !dq.is_zero() {
            dtq = dtq + dq * &dk;
        }
    }
    let r = dtq - frechet(k, &q);
    let order_before = jet_order(&r).unwrap_or(0).max(korder);
    let r = apply_constraints(&r, constraints)?;
    Ok(SymmetryReport {
        passed: r.is_zero(),
        order_after: jet_order(&r).unwrap_or(0),
        remainder: r.to_string(),
        constraints: constraints.map(|c| c.to_string()).unwrap_or_default(),
        order_before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn total_derivative_basics() {
        assert_eq!(total_derivative_x(&p("x^2*u")), p("2*x*u + x^2*u1"));
        assert_eq!(total_derivative_x(&p("H*u2")), p("H1*u2 + H*u3"));
        assert_eq!(
            total_derivative_x(&p("exp(x)*u")),
            p("exp(x)*u + exp(x)*u1")
        );
        assert!(total_derivative_x(&p("kappa*t")).is_zero());
    }

    #[test]
    fn jet_orders() {
        assert_eq!(jet_order(&p("x")), None);
        assert_eq!(jet_order(&p("u + u12")), Some(12));
        assert_eq!(jet_order(&p("u1*exp(u2)")), Some(2));
    }

    #[test]
    fn linear_equation_has_identity_symmetry() {
        let u_rhs = p("0");
        let r = check_lb_symmetry(&EvolutionaryField::new(p("u")), &u_rhs, None).unwrap();
        assert!(r.passed);
        let r = check_lb_symmetry(&EvolutionaryField::new(p("u1")), &u_rhs, None).unwrap();
        assert!(r.passed);
        let r = check_lb_symmetry(&EvolutionaryField::new(p("u^2")), &u_rhs, None).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn both_routes_agree_on_simple_equation() {
        let u_rhs = p("u1*u2/u");
        for f in ["u", "u1", "x*u1", "u^2", "u1^2/u"] {
            let fld = EvolutionaryField::new(p(f));
            let a = check_lb_symmetry(&fld, &u_rhs, None).unwrap();
            let b = check_lb_symmetry_on_shell(&fld, &u_rhs, None).unwrap();
            assert_eq!(a.passed, b.passed, "{f}");
            assert_eq!(p(&a.remainder), p(&b.remainder), "{f}");
        }
    }

    #[test]
    fn order_limit_is_enforced() {
        let e = check_lb_symmetry(&EvolutionaryField::new(p("u3")), &p("0"), None).unwrap_err();
        assert!(matches!(e, JetError::OrderTooHigh { .. }));
    }

    #[test]
    fn heat_equation_point_symmetries() {
        let k = p("u2");
        let gens = [
            ("1", "0", "0"),
            ("0", "1", "0"),
            ("x", "2*t", "0"),
            ("2*t", "0", "-x*u"),
            ("0", "0", "u"),
        ];
        for (xi, tau, eta) in gens {
            let g = PointGenerator::new(p(xi), p(tau), p(eta));
            assert!(
                check_point_symmetry(&g, &k, None).unwrap().passed,
                "{xi} {tau} {eta}"
            );
        }
        let bad = PointGenerator::new(p("x"), p("t"), p("0"));
        assert!(!check_point_symmetry(&bad, &k, None).unwrap().passed);
    }
}
