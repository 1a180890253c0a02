use std::collections::BTreeMap;
use std::fmt;

use super::poly::{Atom, AtomKind, Poly};
use super::{parse, Expr, ExprError};

/// Simultaneous substitution `symbol -> Expr`.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Binding {
    map: BTreeMap<String, Expr>,
}

impl fmt::Debug for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (s, e)) in self.map.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}={e}")?;
        }
        Ok(())
    }
}

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    /// Fails if the symbol is already bound.
    pub fn bind(&mut self, name: &str, value: Expr) -> Result<(), ExprError> {
        let name = if name == "u0" { "u" } else { name };
        if self.map.contains_key(name) {
            return Err(ExprError::DuplicateBinding(name.to_string()));
        }
        self.map.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, name: &str, value: Expr) -> Result<Self, ExprError> {
        self.bind(name, value)?;
        Ok(self)
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, ExprError>
    where
        I: IntoIterator<Item = (&'a str, Expr)>,
    {
        let mut b = Binding::new();
        for (k, v) in pairs {
            b.bind(k, v)?;
        }
        Ok(b)
    }

    /// Parses `a4=0, a1=3/2*a2`. Empty text gives the empty binding.
    pub fn parse(text: &str) -> Result<Self, super::ParseError> {
        let mut b = Binding::new();
        for part in text.split([',', ';']) {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (lhs, rhs) = part
                .split_once('=')
                .ok_or_else(|| super::ParseError::Syntax {
                    pos: 0,
                    message: format!("expected `name=value` in `{part}`"),
                })?;
            let value = parse(rhs.trim())?;
            b.bind(lhs.trim(), value)
                .map_err(|e| super::ParseError::Expr { pos: 0, source: e })?;
        }
        Ok(b)
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.map.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Expr)> {
        self.map.iter()
    }

    pub fn merged(&self, other: &Binding) -> Result<Binding, ExprError> {
        let mut out = self.clone();
        for (k, v) in &other.map {
            out.bind(k, v.clone())?;
        }
        Ok(out)
    }
}

impl Expr {
    /// Simultaneous substitution followed by canonicalisation.
    pub fn substitute(&self, b: &Binding) -> Result<Expr, ExprError> {
        if b.is_empty() {
            return Ok(self.clone());
        }
        let num = subst_poly(&self.0.num, b)?;
        if self.is_polynomial() {
            return Ok(num);
        }
        let den = subst_poly(&self.0.den, b)?;
        if den.is_zero() {
            return Err(ExprError::DivisionByZero(self.0.den.to_string()));
        }
        num.checked_div(&den)
    }
}

fn atom_touched(a: &Atom, b: &Binding) -> bool {
    let mut syms = std::collections::BTreeSet::new();
    a.collect_symbols(&mut syms);
    syms.iter().any(|s| b.get(s).is_some())
}

fn subst_atom(a: &Atom, b: &Binding) -> Result<Expr, ExprError> {
    Ok(match a.kind() {
        AtomKind::Sym(s) => b.get(s).cloned().unwrap_or_else(|| Expr::atom(a.clone())),
        AtomKind::Exp(g) => Expr::exp(g.substitute(b)?),
        AtomKind::Log(g) => Expr::log(g.substitute(b)?)?,
        AtomKind::Tanh(g) => Expr::tanh(g.substitute(b)?),
        AtomKind::Erf(g) => Expr::erf(g.substitute(b)?),
        AtomKind::E1(g) => Expr::e1(g.substitute(b)?),
        AtomKind::Sqrt(v) => Expr::sqrt(subst_poly(v, b)?)?,
        AtomKind::Pow(base, n) => Expr::pow(subst_poly(base, b)?, n.substitute(b)?)?,
    })
}

/// Substitutes into a polynomial, grouping terms by the exponents of the
/// affected atoms so each distinct power product is formed once.
fn subst_poly(p: &Poly, b: &Binding) -> Result<Expr, ExprError> {
    let touched: Vec<Atom> = p
        .atoms()
        .into_iter()
        .filter(|a| atom_touched(a, b))
        .collect();
    if touched.is_empty() {
        return Ok(Expr::from_poly(p.clone()));
    }
    let images: Vec<Expr> = touched
        .iter()
        .map(|a| subst_atom(a, b))
        .collect::<Result<_, _>>()?;
    let mut power_cache: Vec<Vec<Expr>> = images
        .iter()
        .map(|e| vec![Expr::one(), e.clone()])
        .collect();
    let mut acc = Expr::zero();
    for (exps, coeff) in p.split_by(&touched) {
        let mut term = Expr::from_poly(coeff);
        for (k, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let cache = &mut power_cache[k];
            while cache.len() <= e as usize {
                let next = cache.last().unwrap() * &images[k];
                cache.push(next);
            }
            term = term * &cache[e as usize];
        }
        acc = acc + term;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn identity_case_vanishes() {
        let u = p("9*u2*u1/u - 12*u1^3/u^2");
        let e = p("u3") - &u;
        let b = Binding::new().with("u3", u).unwrap();
        assert!(e.substitute(&b).unwrap().is_zero());
    }

    #[test]
    fn shift_expands() {
        let b = Binding::new().with("x", p("x+g")).unwrap();
        assert_eq!(p("x^2").substitute(&b).unwrap(), p("x^2 + 2*g*x + g^2"));
    }

    #[test]
    fn duplicate_binding_rejected() {
        let b = Binding::new().with("x", p("1")).unwrap();
        assert!(b.with("x", p("2")).is_err());
    }

    #[test]
    fn vanishing_denominator_is_reported() {
        let b = Binding::new().with("a", p("1")).unwrap();
        let err = p("x/(a-1)").substitute(&b).unwrap_err();
        assert!(matches!(err, ExprError::DivisionByZero(_)));
    }

    #[test]
    fn substitutes_inside_transcendentals() {
        let b = Binding::new().with("t", p("2*s")).unwrap();
        assert_eq!(p("exp(3*t)").substitute(&b).unwrap(), p("exp(6*s)"));
    }

    #[test]
    fn binding_text_form() {
        let b = Binding::parse("a4=0, a1=3/2*a2").unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.get("a1").unwrap(), &p("3*a2/2"));
        assert!(Binding::parse("a=1, a=2").is_err());
    }
}
