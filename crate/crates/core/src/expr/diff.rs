use super::poly::{Atom, AtomKind, Poly};
use super::{Expr, ExprError};

/// A derivation of the expression field, fixed by its action on symbols.
/// Composite atoms are differentiated by their chain rules.
pub trait Derivation {
    fn symbol(&self, name: &str) -> Expr;
}

/// Partial derivative with respect to one symbol.
pub struct Partial<'a>(pub &'a str);

impl Derivation for Partial<'_> {
    fn symbol(&self, name: &str) -> Expr {
        if name == self.0 {
            Expr::one()
        } else {
            Expr::zero()
        }
    }
}

impl Expr {
    /// Exact partial derivative with respect to `s`.
    pub fn differentiate(&self, s: &str) -> Expr {
        let s = if s == "u0" { "u" } else { s };
        self.derive(&Partial(s))
    }

    pub fn derive(&self, d: &dyn Derivation) -> Expr {
        let dn = derive_poly(&self.0.num, d);
        if self.is_polynomial() {
            return dn;
        }
        let n = Expr::from_poly(self.0.num.clone());
        // d(n/D) = (dn - n * sum e_i f_i'/f_i) / D
        let mut log_deriv = Expr::zero();
        for f in &self.0.factors {
            let df = derive_poly(&f.poly, d);
            if df.is_zero() {
                continue;
            }
            let fe = Expr::from_poly(f.poly.clone());
            let term = df
                .checked_div(&fe)
                .expect("denominator factor is nonzero")
                .scale(&super::rat(f.exp as i64));
            log_deriv = log_deriv + term;
        }
        if log_deriv.is_zero() && dn.is_zero() {
            return Expr::zero();
        }
        let top = dn - &n * &log_deriv;
        top.checked_div(&Expr::from_poly(self.0.den.clone()))
            .expect("denominator is nonzero")
    }
}

fn derive_poly(p: &Poly, d: &dyn Derivation) -> Expr {
    let mut poly_part = Poly::zero();
    let mut rest = Expr::zero();
    for a in p.atoms() {
        let da = derive_atom(&a, d);
        if da.is_zero() {
            continue;
        }
        let pa = p.diff_atom(&a);
        if da.is_polynomial() {
            poly_part = poly_part.add(&pa.mul(da.numer()));
        } else {
            rest = rest + Expr::from_poly(pa) * da;
        }
    }
    Expr::from_poly(poly_part) + rest
}

fn derive_atom(a: &Atom, d: &dyn Derivation) -> Expr {
    match a.kind() {
        AtomKind::Sym(s) => d.symbol(s),
        AtomKind::Exp(g) => g.derive(d) * Expr::atom(a.clone()),
        AtomKind::Log(g) => g
            .derive(d)
            .checked_div(g)
            .unwrap_or_else(|_| panic!("log of zero")),
        AtomKind::Tanh(g) => {
            let t = Expr::atom(a.clone());
            g.derive(d) * (Expr::one() - &t * &t)
        }
        AtomKind::Erf(g) => {
            // 2/sqrt(pi) * exp(-g^2) * g'
            let dg = g.derive(d);
            if dg.is_zero() {
                return Expr::zero();
            }
            let sqrt_pi = Expr::sqrt(Expr::sym("pi")).expect("radical");
            let k = Expr::int(2).checked_div(&sqrt_pi).expect("nonzero");
            k * Expr::exp(-(g * g)) * dg
        }
        AtomKind::E1(g) => {
            let dg = g.derive(d);
            if dg.is_zero() {
                return Expr::zero();
            }
            -(Expr::exp(-g) * dg)
                .checked_div(g)
                .unwrap_or_else(|e: ExprError| panic!("{e}"))
        }
        AtomKind::Sqrt(v) => {
            // d sqrt(v) = dv / (2 sqrt(v))
            let dv = derive_poly(v, d);
            if dv.is_zero() {
                return Expr::zero();
            }
            let s = Expr::atom(a.clone());
            (dv * s)
                .checked_div(&Expr::from_poly(v.scale(&super::rat(2))))
                .expect("radicand is nonzero")
        }
        AtomKind::Pow(b, n) => {
            // d b^n = b^n (n' log b + n b'/b)
            let p = Expr::atom(a.clone());
            let be = Expr::from_poly(b.clone());
            let db = derive_poly(b, d);
            let dn = n.derive(d);
            let mut out = Expr::zero();
            if !db.is_zero() {
                out = out + (&p * n * db).checked_div(&be).expect("base is nonzero");
            }
            if !dn.is_zero() {
                out = out + &p * dn * Expr::log(be).expect("log");
            }
            out
        }
    }
}
