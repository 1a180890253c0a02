//! Exact symbolic expressions.
//!
//! An [`Expr`] is a rational function `num / den` over exact rationals whose
//! variables are symbols and transcendental generators (`exp`, `tanh`, `erf`,
//! `E1`, `log`, symbolic powers, square-root radicals). Every value is kept in
//! canonical form:
//!
//! * `gcd(num, den) = 1` and `den` is monic in the lexicographic order,
//! * `den` is free of radicals (they are rationalised into the numerator),
//! * radicals appear in the numerator with exponent at most one.
//!
//! Two expressions that are equal as rational functions over the generators
//! therefore compare equal, and `is_zero` is an exact decision.

mod diff;
mod eval;
mod parse;
pub mod poly;
mod subst;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use diff::{Derivation, Partial};
pub use eval::{CompiledExpr, NumEnv};
pub use parse::{parse, ParseError};
pub use poly::{rat, Atom, AtomKind, Monomial, Poly, Rat};
pub use subst::Binding;

use poly::{gcd, is_evidently_irreducible};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExprError {
    #[error("division by zero: denominator `{0}` vanished")]
    DivisionByZero(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("pole: denominator `{0}` evaluates to {1:e}")]
    Pole(String, f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("symbol `{0}` bound twice")]
    DuplicateBinding(String),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct Factor {
    poly: Poly,
    exp: u32,
    irreducible: bool,
}

struct Inner {
    num: Poly,
    den: Poly,
    factors: Vec<Factor>,
}

/// Immutable canonical rational expression. Cloning is cheap.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.num == other.0.num && self.0.den == other.0.den)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.num.hash(state);
        self.0.den.hash(state);
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .num
            .cmp(&other.0.num)
            .then_with(|| self.0.den.cmp(&other.0.den))
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

// ---------------------------------------------------------------------------
// denominator bookkeeping

/// Pairwise coprime, square-free, monic, radical-free denominator factors.
#[derive(Default, Clone)]
struct FactorSet {
    items: Vec<Factor>,
}

impl FactorSet {
    fn from_factors(f: &[Factor]) -> Self {
        FactorSet { items: f.to_vec() }
    }

    /// Inserts `p^e`; `p` must be monic, radical-free and without monomial
    /// content unless it is a single atom.
    fn insert(&mut self, p: Poly, e: u32) {
        if e == 0 || p.is_constant() {
            return;
        }
        let irreducible = is_evidently_irreducible(&p);
        if !irreducible {
            if let Some((a, b)) = squarefree_split(&p) {
                self.insert(a, e);
                self.insert(b, e);
                return;
            }
        }
        for k in 0..self.items.len() {
            let g = &self.items[k];
            if g.poly == p {
                self.items[k].exp += e;
                return;
            }
            if g.irreducible && irreducible {
                continue;
            }
            let h = if g.irreducible {
                if p.div_exact(&g.poly).is_some() {
                    g.poly.clone()
                } else {
                    continue;
                }
            } else if irreducible {
                if g.poly.div_exact(&p).is_some() {
                    p.clone()
                } else {
                    continue;
                }
            } else {
                let h = gcd(&g.poly, &p);
                if h.is_constant() {
                    continue;
                }
                h
            };
            let g = self.items.remove(k);
            let g_rest = g.poly.div_exact(&h).expect("gcd divides").monic().1;
            let p_rest = p.div_exact(&h).expect("gcd divides").monic().1;
            self.insert(h, g.exp + e);
            self.insert(g_rest, g.exp);
            self.insert(p_rest, e);
            return;
        }
        self.items.push(Factor {
            poly: p,
            exp: e,
            irreducible,
        });
    }

    /// Cancels common factors between `num` and the set.
    fn cancel(&mut self, num: &mut Poly) {
        if num.is_zero() {
            self.items.clear();
            return;
        }
        let mut k = 0;
        while k < self.items.len() {
            if self.items[k].irreducible {
                while self.items[k].exp > 0 {
                    match num.div_exact(&self.items[k].poly) {
                        Some(q) => {
                            *num = q;
                            self.items[k].exp -= 1;
                        }
                        None => break,
                    }
                }
                k += 1;
                continue;
            }
            let f = self.items[k].poly.clone();
            let h = gcd(num, &f);
            if h.is_constant() {
                k += 1;
                continue;
            }
            if h == f {
                *num = num.div_exact(&f).expect("gcd divides");
                self.items[k].exp -= 1;
                if self.items[k].exp == 0 {
                    k += 1;
                }
                continue;
            }
            let fac = self.items.remove(k);
            let rest = f.div_exact(&h).expect("gcd divides").monic().1;
            self.insert(h, fac.exp);
            self.insert(rest, fac.exp);
            k = 0;
        }
        self.items.retain(|f| f.exp > 0);
    }

    fn finish(mut self) -> (Poly, Vec<Factor>) {
        self.items.retain(|f| f.exp > 0);
        self.items
            .sort_by(|a, b| a.poly.cmp(&b.poly).then(a.exp.cmp(&b.exp)));
        let mut den = Poly::one();
        for f in &self.items {
            den = den.mul(&f.poly.pow(f.exp));
        }
        (den, self.items)
    }
}

fn squarefree_split(p: &Poly) -> Option<(Poly, Poly)> {
    for v in p.atoms() {
        let d = p.diff_atom(&v);
        if d.is_zero() {
            continue;
        }
        let g = gcd(p, &d);
        if !g.is_constant() {
            let rest = p.div_exact(&g).expect("gcd divides").monic().1;
            return Some((g, rest));
        }
    }
    None
}

impl Expr {
    fn from_parts(num: Poly, den: Poly, factors: Vec<Factor>) -> Expr {
        Expr(Arc::new(Inner { num, den, factors }))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::from_parts(p, Poly::one(), Vec::new())
    }

    pub fn zero() -> Expr {
        Expr::from_poly(Poly::zero())
    }

    pub fn one() -> Expr {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::from_poly(Poly::constant(rat(n)))
    }

    pub fn rational(p: i64, q: i64) -> Expr {
        Expr::from_poly(Poly::constant(Rat::new(BigInt::from(p), BigInt::from(q))))
    }

    pub fn constant(c: Rat) -> Expr {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn sym(name: &str) -> Expr {
        let name = if name == "u0" { "u" } else { name };
        Expr::from_poly(Poly::atom(Atom::sym(name)))
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::from_poly(Poly::atom(a))
    }

    pub fn numer(&self) -> &Poly {
        &self.0.num
    }

    pub fn denom(&self) -> &Poly {
        &self.0.den
    }

    /// Denominator factors with multiplicities.
    pub fn denom_factors(&self) -> Vec<(Poly, u32)> {
        self.0
            .factors
            .iter()
            .map(|f| (f.poly.clone(), f.exp))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_one()
    }

    pub fn as_rational(&self) -> Option<Rat> {
        if self.is_polynomial() {
            self.0.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        let r = self.as_rational()?;
        if r.is_integer() {
            r.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        if !self.is_polynomial() {
            return None;
        }
        let (m, c) = self.0.num.as_monomial()?;
        match m.factors() {
            [(a, 1)] if c.is_one() => a.as_sym(),
            _ => None,
        }
    }

    /// Every symbol occurring, including inside transcendental arguments.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        self.0.num.collect_symbols(out);
        self.0.den.collect_symbols(out);
    }

    pub fn depends_on(&self, s: &str) -> bool {
        self.free_symbols().contains(s)
    }

    /// `num / prod(dens_i ^ e_i)` in canonical form.
    fn build(mut num: Poly, dens: Vec<(Poly, u32)>) -> Result<Expr, ExprError> {
        let mut set = FactorSet::default();
        for (p, e) in dens {
            if p.is_zero() {
                return Err(ExprError::DivisionByZero(p.to_string()));
            }
            let mut p = p;
            // Rationalise radicals: (a + b s)(a - b s) = a^2 - b^2 v.
            let mut guard = 0;
            while let Some((a, b, s)) = p.split_radical() {
                guard += 1;
                if guard > 16 {
                    return Err(ExprError::Unsupported(
                        "nested radicals in a denominator".into(),
                    ));
                }
                let conj = a.sub(&b.mul(&Poly::atom(s.clone())));
                let v = s.radicand().unwrap().clone();
                num = num.mul(&conj.pow(e));
                p = a.mul(&a).sub(&b.mul(&b).mul(&v));
                if p.is_zero() {
                    return Err(ExprError::DivisionByZero(
                        "radical expression with vanishing norm".into(),
                    ));
                }
            }
            let (lc, p) = p.monic();
            num = num.scale(&lc.recip().pow(e as i32));
            let mc = p.monomial_content();
            let p = if mc.is_one() {
                p
            } else {
                for (a, k) in mc.factors() {
                    set.insert(Poly::atom(a.clone()), k * e);
                }
                p.div_exact(&Poly::term(mc.clone(), Rat::one()))
                    .expect("monomial content divides")
            };
            set.insert(p, e);
        }
        set.cancel(&mut num);
        let (den, factors) = set.finish();
        Ok(Expr::from_parts(num, den, factors))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        if other.is_zero() {
            return Err(ExprError::DivisionByZero(other.to_string()));
        }
        if let Some(c) = other.as_rational() {
            return Ok(self.scale(&c.recip()));
        }
        let inv = other.recip()?;
        Ok(self * &inv)
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero(self.to_string()));
        }
        Expr::build(self.0.den.clone(), vec![(self.0.num.clone(), 1)])
    }

    pub fn scale(&self, c: &Rat) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr::from_parts(
            self.0.num.scale(c),
            self.0.den.clone(),
            self.0.factors.clone(),
        )
    }

    pub fn powi(&self, k: i32) -> Result<Expr, ExprError> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut e = k as u32;
        let mut base = self.clone();
        let mut acc = Expr::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    fn add_impl(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.is_polynomial() && other.is_polynomial() {
            return Expr::from_poly(self.0.num.add(&other.0.num));
        }
        if self.0.den == other.0.den {
            let mut num = self.0.num.add(&other.0.num);
            let mut set = FactorSet::from_factors(&self.0.factors);
            set.cancel(&mut num);
            let (den, factors) = set.finish();
            return Expr::from_parts(num, den, factors);
        }
        // Common multiple of the two factor lists; exact lcm when factors are
        // shared structurally, refined by `insert` otherwise.
        let mut common: Vec<Factor> = self.0.factors.clone();
        for g in &other.0.factors {
            match common.iter_mut().find(|f| f.poly == g.poly) {
                Some(f) => f.exp = f.exp.max(g.exp),
                None => common.push(g.clone()),
            }
        }
        let cofactor = |own: &[Factor]| {
            let mut m = Poly::one();
            for f in &common {
                let have = own
                    .iter()
                    .find(|g| g.poly == f.poly)
                    .map(|g| g.exp)
                    .unwrap_or(0);
                if f.exp > have {
                    m = m.mul(&f.poly.pow(f.exp - have));
                }
            }
            m
        };
        let ma = cofactor(&self.0.factors);
        let mb = cofactor(&other.0.factors);
        let mut num = self.0.num.mul(&ma).add(&other.0.num.mul(&mb));
        let mut set = FactorSet::default();
        for f in common {
            set.insert(f.poly, f.exp);
        }
        set.cancel(&mut num);
        let (den, factors) = set.finish();
        Expr::from_parts(num, den, factors)
    }

    fn mul_impl(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_polynomial() && other.is_polynomial() {
            return Expr::from_poly(self.0.num.mul(&other.0.num));
        }
        // Cancel each side's denominator against the other side's numerator
        // before multiplying out.
        let mut fa = FactorSet::from_factors(&self.0.factors);
        let mut fb = FactorSet::from_factors(&other.0.factors);
        let mut na = self.0.num.clone();
        let mut nb = other.0.num.clone();
        fa.cancel(&mut nb);
        fb.cancel(&mut na);
        let mut num = na.mul(&nb);
        let mut set = fa;
        for f in fb.items {
            set.insert(f.poly, f.exp);
        }
        if num.has_radicals() {
            // s^2 -> v can reintroduce factors of the denominator.
            set.cancel(&mut num);
        }
        let (den, factors) = set.finish();
        Expr::from_parts(num, den, factors)
    }

    // -- transcendental constructors -------------------------------------

    pub fn exp(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        Expr::atom(Atom::new(AtomKind::Exp(arg)))
    }

    pub fn log(arg: Expr) -> Result<Expr, ExprError> {
        if arg.as_rational().is_some_and(|c| c.is_one()) {
            return Ok(Expr::zero());
        }
        Ok(Expr::atom(Atom::new(AtomKind::Log(arg))))
    }

    pub fn tanh(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::zero();
        }
        Expr::atom(Atom::new(AtomKind::Tanh(arg)))
    }

    pub fn erf(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::zero();
        }
        Expr::atom(Atom::new(AtomKind::Erf(arg)))
    }

    pub fn e1(arg: Expr) -> Expr {
        Expr::atom(Atom::new(AtomKind::E1(arg)))
    }

    /// Square root as a tagged radical. Rational perfect squares are taken
    /// exactly; `sqrt(p/q)` becomes `sqrt(p*q)/q`.
    pub fn sqrt(arg: Expr) -> Result<Expr, ExprError> {
        if let Some(c) = arg.as_rational() {
            if c.is_zero() {
                return Ok(Expr::zero());
            }
            if c.is_positive() {
                let (n, d) = (c.numer().clone(), c.denom().clone());
                let (rn, rd) = (n.sqrt(), d.sqrt());
                if &rn * &rn == n && &rd * &rd == d {
                    return Ok(Expr::constant(Rat::new(rn, rd)));
                }
            }
        }
        let (p, q) = (arg.0.num.clone(), arg.0.den.clone());
        let v = p.mul(&q);
        if v.has_radicals() {
            return Err(ExprError::Unsupported(format!(
                "nested radical sqrt({arg})"
            )));
        }
        // Pull out rational content so equal radicals share one atom.
        let (lc, vm) = v.monic();
        let (n, d) = (lc.numer().clone(), lc.denom().clone());
        let sign = if n.is_negative() { -1 } else { 1 };
        let nn = n.abs() * &d;
        let (sq, free) = split_square(&nn);
        let radicand = vm.scale(&Rat::from_integer(free * sign));
        let s = if radicand.is_one() {
            Expr::one()
        } else {
            Expr::atom(Atom::new(AtomKind::Sqrt(radicand)))
        };
        let k = Expr::constant(Rat::new(sq, d));
        let q = Expr::from_poly(q);
        (&s * &k).checked_div(&q)
    }

    /// `base^exponent`. Integer exponents expand, half-integers use radicals,
    /// anything else becomes a symbolic power atom.
    pub fn pow(base: Expr, exponent: Expr) -> Result<Expr, ExprError> {
        if let Some(k) = exponent.as_integer() {
            return base.powi(k as i32);
        }
        if let Some(r) = exponent.as_rational() {
            if r.denom() == &BigInt::from(2) {
                let k = r
                    .numer()
                    .to_i32()
                    .ok_or_else(|| ExprError::Unsupported("exponent too large".into()))?;
                return Expr::sqrt(base)?.powi(k);
            }
            return Err(ExprError::Unsupported(format!(
                "fractional power {r} is not supported"
            )));
        }
        if !base.is_polynomial() {
            let b = Expr::pow(Expr::from_poly(base.0.num.clone()), exponent.clone())?;
            let d = Expr::pow(Expr::from_poly(base.0.den.clone()), exponent)?;
            return b.checked_div(&d);
        }
        if base.0.num.is_constant() {
            return Err(ExprError::Unsupported(format!(
                "symbolic power of a constant: pow({base}, {exponent})"
            )));
        }
        Ok(Expr::atom(Atom::new(AtomKind::Pow(
            base.0.num.clone(),
            exponent,
        ))))
    }
}

/// `n = sq^2 * free` with `free` square-free as far as small trial division
/// can tell.
fn split_square(n: &BigInt) -> (BigInt, BigInt) {
    let mut sq = BigInt::one();
    let mut free = BigInt::one();
    let mut rest = n.clone();
    let mut p = BigInt::from(2);
    while &p * &p <= rest && p < BigInt::from(10_000) {
        let mut k = 0;
        while (&rest % &p).is_zero() {
            rest /= &p;
            k += 1;
        }
        for _ in 0..k / 2 {
            sq *= &p;
        }
        if k % 2 == 1 {
            free *= &p;
        }
        p += 1;
    }
    let r = rest.sqrt();
    if &r * &r == rest {
        sq *= r;
    } else {
        free *= rest;
    }
    (sq, free)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = &self.0.num;
        if self.is_polynomial() {
            return write!(f, "{num}");
        }
        if num.len() > 1 {
            write!(f, "({num})")?;
        } else {
            write!(f, "{num}")?;
        }
        let den = &self.0.den;
        if den.len() > 1
            || den
                .as_monomial()
                .is_some_and(|(m, _)| m.factors().len() > 1)
        {
            write!(f, "/({den})")
        } else {
            write!(f, "/{den}")
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $body(self, rhs)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $body(&self, &rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $body(&self, rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Expr, b: &Expr| a.add_impl(b));
forward_binop!(Sub, sub, |a: &Expr, b: &Expr| a.add_impl(&-b));
forward_binop!(Mul, mul, |a: &Expr, b: &Expr| a.mul_impl(b));

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_parts(self.0.num.neg(), self.0.den.clone(), self.0.factors.clone())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}
