//! Sparse multivariate polynomials over exact rationals.
//!
//! Variables are [`Atom`]s: plain symbols or transcendental generators. A
//! radical atom `sqrt(v)` never appears with exponent above one; products are
//! reduced with `sqrt(v)^2 -> v` as they are formed.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Expr;

pub type Rat = BigRational;

/// A generator of the polynomial ring.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(Arc<AtomKind>);

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum AtomKind {
    Sym(String),
    /// `sqrt(radicand)`; the radicand is a radical-free polynomial.
    Sqrt(Poly),
    /// `pow(base, exponent)` with a non-numeric exponent.
    Pow(Poly, Expr),
    Exp(Expr),
    Log(Expr),
    Tanh(Expr),
    Erf(Expr),
    E1(Expr),
}

impl Atom {
    pub fn new(kind: AtomKind) -> Self {
        Atom(Arc::new(kind))
    }

    pub fn sym(name: &str) -> Self {
        Atom::new(AtomKind::Sym(name.to_string()))
    }

    pub fn kind(&self) -> &AtomKind {
        &self.0
    }

    pub fn as_sym(&self) -> Option<&str> {
        match &*self.0 {
            AtomKind::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn radicand(&self) -> Option<&Poly> {
        match &*self.0 {
            AtomKind::Sqrt(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_radical(&self) -> bool {
        matches!(&*self.0, AtomKind::Sqrt(_))
    }

    /// Symbols this atom depends on, including those inside its arguments.
    pub fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match &*self.0 {
            AtomKind::Sym(s) => {
                out.insert(s.clone());
            }
            AtomKind::Sqrt(v) => v.collect_symbols(out),
            AtomKind::Pow(b, e) => {
                b.collect_symbols(out);
                e.collect_symbols(out);
            }
            AtomKind::Exp(g)
            | AtomKind::Log(g)
            | AtomKind::Tanh(g)
            | AtomKind::Erf(g)
            | AtomKind::E1(g) => g.collect_symbols(out),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            AtomKind::Sym(s) => write!(f, "{s}"),
            AtomKind::Sqrt(v) => write!(f, "sqrt({v})"),
            AtomKind::Pow(b, e) => write!(f, "pow({b}, {e})"),
            AtomKind::Exp(g) => write!(f, "exp({g})"),
            AtomKind::Log(g) => write!(f, "log({g})"),
            AtomKind::Tanh(g) => write!(f, "tanh({g})"),
            AtomKind::Erf(g) => write!(f, "erf({g})"),
            AtomKind::E1(g) => write!(f, "E1({g})"),
        }
    }
}

/// Power product of atoms, sorted by atom, exponents positive.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.0
            .binary_search_by(|(b, _)| b.cmp(a))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` if every exponent of `other` fits.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < *a {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == *a {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => continue,
                    Ordering::Greater => out.push((a.clone(), e - f)),
                }
            } else {
                out.push((a.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Componentwise minimum.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (a, e) in &self.0 {
            let f = other.degree_in(a);
            if f > 0 {
                out.push((a.clone(), (*e).min(f)));
            }
        }
        Monomial(out)
    }

    fn without(&self, a: &Atom) -> Monomial {
        Monomial(self.0.iter().filter(|(b, _)| b != a).cloned().collect())
    }

    fn with_degree(&self, a: &Atom, e: u32) -> Monomial {
        let mut v: Vec<_> = self.0.iter().filter(|(b, _)| b != a).cloned().collect();
        if e > 0 {
            let pos = v.partition_point(|(b, _)| b < a);
            v.insert(pos, (a.clone(), e));
        }
        Monomial(v)
    }
}

/// Lexicographic order; the smallest atom is the most significant variable.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let n = a.len().min(b.len());
        for k in 0..n {
            match a[k].0.cmp(&b[k].0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match a[k].1.cmp(&b[k].1) {
                    Ordering::Equal => {}
                    o => return o,
                },
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (a, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "{a}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Terms sorted by decreasing monomial; no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Rat)>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn atom(a: Atom) -> Self {
        Poly {
            terms: vec![(Monomial::atom(a, 1), Rat::one())],
        }
    }

    pub fn term(m: Monomial, c: Rat) -> Self {
        let p = Poly {
            terms: if c.is_zero() { vec![] } else { vec![(m, c)] },
        };
        p.reduce_radicals()
    }

    /// Builds from unsorted terms, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rat)>>(it: I) -> Self {
        let mut map: HashMap<Monomial, Rat> = HashMap::new();
        for (m, c) in it {
            *map.entry(m).or_insert_with(Rat::zero) += c;
        }
        Poly::from_map(map)
    }

    fn from_map(map: HashMap<Monomial, Rat>) -> Self {
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, Rat)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.as_slice() {
            [] => Some(Rat::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_one(&self) -> bool {
        matches!(self.terms.as_slice(), [(m, c)] if m.is_one() && c.is_one())
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.first().map(|(m, c)| (m, c))
    }

    pub fn as_monomial(&self) -> Option<(&Monomial, &Rat)> {
        match self.terms.as_slice() {
            [(m, c)] => Some((m, c)),
            _ => None,
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for (m, _) in &self.terms {
            for (a, _) in m.factors() {
                s.insert(a.clone());
            }
        }
        s
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        for a in self.atoms() {
            a.collect_symbols(out);
        }
    }

    pub fn has_radicals(&self) -> bool {
        self.terms
            .iter()
            .any(|(m, _)| m.factors().iter().any(|(a, _)| a.is_radical()))
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree_in(a))
            .max()
            .unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut map: HashMap<Monomial, Rat> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        let mut radical = false;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                radical |= m.factors().iter().any(|(a, e)| *e > 1 && a.is_radical());
                *map.entry(m).or_insert_with(Rat::zero) += ca * cb;
            }
        }
        let p = Poly::from_map(map);
        if radical {
            p.reduce_radicals()
        } else {
            p
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rat) -> Poly {
        let p = Poly {
            terms: self
                .terms
                .iter()
                .map(|(mm, cc)| (mm.mul(m), cc * c))
                .collect(),
        };
        if p.terms
            .iter()
            .any(|(m, _)| m.factors().iter().any(|(a, e)| *e > 1 && a.is_radical()))
        {
            p.reduce_radicals()
        } else {
            p
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Applies `sqrt(v)^2 -> v` to every term.
    fn reduce_radicals(self) -> Poly {
        let needs = self
            .terms
            .iter()
            .any(|(m, _)| m.factors().iter().any(|(a, e)| *e > 1 && a.is_radical()));
        if !needs {
            return self;
        }
        let mut acc = Poly::zero();
        let mut plain = Vec::new();
        for (m, c) in self.terms {
            let heavy: Vec<(Atom, u32)> = m
                .factors()
                .iter()
                .filter(|(a, e)| *e > 1 && a.is_radical())
                .cloned()
                .collect();
            if heavy.is_empty() {
                plain.push((m, c));
                continue;
            }
            let mut rest = m.clone();
            let mut extra = Poly::one();
            for (a, e) in heavy {
                rest = rest.with_degree(&a, e % 2);
                let v = a.radicand().expect("radical atom");
                extra = extra.mul(&v.pow(e / 2));
            }
            acc = acc.add(&extra.mul_term(&rest, &c));
        }
        acc.add(&Poly::from_terms(plain))
    }

    /// Coefficients with respect to `a`, indexed by degree.
    pub fn coeffs_in(&self, a: &Atom) -> Vec<Poly> {
        let d = self.degree_in(a) as usize;
        let mut buckets: Vec<Vec<(Monomial, Rat)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let e = m.degree_in(a) as usize;
            buckets[e].push((m.without(a), c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_coeffs(a: &Atom, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (k, p) in coeffs.iter().enumerate() {
            for (m, c) in &p.terms {
                terms.push((m.mul(&Monomial::atom(a.clone(), k as u32)), c.clone()));
            }
        }
        Poly::from_terms(terms)
    }

    /// Formal partial derivative with respect to the atom `a`.
    pub fn diff_atom(&self, a: &Atom) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.degree_in(a);
            if e > 0 {
                terms.push((m.with_degree(a, e - 1), c * rat(e as i64)));
            }
        }
        Poly::from_terms(terms)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    /// `d` must be free of radical atoms unless it is a constant.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (dm, dc) = d.leading().unwrap();
        if let Some((m, c)) = d.as_monomial() {
            let mut terms = Vec::with_capacity(self.terms.len());
            for (mm, cc) in &self.terms {
                terms.push((mm.div(m)?, cc / c));
            }
            return Some(Poly { terms });
        }
        let dtail = &d.terms[1..];
        let mut rem: BTreeMap<Monomial, Rat> = self.terms.iter().cloned().collect();
        let mut q = Vec::new();
        while let Some((rm, rc)) = rem.pop_last() {
            let m = rm.div(dm)?;
            let c = rc / dc;
            for (tm, tc) in dtail {
                let key = tm.mul(&m);
                let delta = tc * &c;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                }
            }
            q.push((m, c));
        }
        Some(Poly { terms: q })
    }

    /// Leading coefficient and `self / lc`.
    pub fn monic(&self) -> (Rat, Poly) {
        match self.leading() {
            None => (Rat::one(), Poly::zero()),
            Some((_, c)) => {
                let c = c.clone();
                (c.clone(), self.scale(&c.recip()))
            }
        }
    }

    /// Gcd of all term monomials.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Splits off the radical-atom part: returns `(a, b, s)` with
    /// `self = a + b*s` for the first radical atom `s`.
    pub fn split_radical(&self) -> Option<(Poly, Poly, Atom)> {
        let s = self.atoms().into_iter().find(|a| a.is_radical())?;
        let c = self.coeffs_in(&s);
        let a = c.first().cloned().unwrap_or_else(Poly::zero);
        let b = c.get(1).cloned().unwrap_or_else(Poly::zero);
        Some((a, b, s))
    }

    /// Integer content normalisation: multiplies by a positive rational so
    /// that coefficients are coprime integers.
    pub fn primitive_integer(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut l = BigInt::one();
        for (_, c) in &self.terms {
            l = l.lcm(c.denom());
        }
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            let n = c.numer() * (&l / c.denom());
            g = g.gcd(&n);
        }
        self.scale(&Rat::new(l, g))
    }

    /// Groups terms by the exponent vector of `atoms`; the map key lists
    /// exponents in the order of `atoms`.
    pub fn split_by(&self, atoms: &[Atom]) -> BTreeMap<Vec<u32>, Poly> {
        let mut groups: BTreeMap<Vec<u32>, Vec<(Monomial, Rat)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key: Vec<u32> = atoms.iter().map(|a| m.degree_in(a)).collect();
            let rest = Monomial(
                m.factors()
                    .iter()
                    .filter(|(b, _)| !atoms.contains(b))
                    .cloned()
                    .collect(),
            );
            groups.entry(key).or_default().push((rest, c.clone()));
        }
        groups
            .into_iter()
            .map(|(k, v)| (k, Poly::from_terms(v)))
            .collect()
    }

    pub fn map_coeffs<F: Fn(&Rat) -> Rat>(&self, f: F) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// gcd

/// Greatest common divisor over Q, normalised monic. Radical atoms are
/// treated as the content variables they are (coefficients are taken first),
/// so the result is always radical-free.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic().1;
    }
    if b.is_zero() {
        return a.monic().1;
    }
    if a.has_radicals() {
        return gcd(&radical_content(a), b);
    }
    if b.has_radicals() {
        return gcd(a, &radical_content(b));
    }
    gcd_plain(a, b).monic().1
}

fn radical_content(p: &Poly) -> Poly {
    let mut cur = p.clone();
    while let Some((a, b, _)) = cur.split_radical() {
        cur = gcd(&a, &b);
        if cur.is_constant() {
            break;
        }
    }
    cur
}

fn gcd_plain(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if let (Some((ma, _)), Some((mb, _))) = (a.as_monomial(), b.as_monomial()) {
        return Poly::term(ma.gcd(mb), Rat::one());
    }
    let va = a.atoms();
    let vb = b.atoms();
    // A variable present in only one argument can only live in its content.
    if let Some(v) = va.iter().find(|v| !vb.contains(v)) {
        return gcd_plain(&content_in(a, v), b);
    }
    if let Some(v) = vb.iter().find(|v| !va.contains(v)) {
        return gcd_plain(a, &content_in(b, v));
    }
    // Main variable: the one of smallest degree keeps remainder sequences short.
    let v = va
        .iter()
        .min_by_key(|v| a.degree_in(v).min(b.degree_in(v)))
        .unwrap()
        .clone();
    let ca = content_in(a, &v);
    let cb = content_in(b, &v);
    let c = gcd_plain(&ca, &cb);
    let mut p = a.div_exact(&ca).expect("content divides");
    let mut q = b.div_exact(&cb).expect("content divides");
    if p.degree_in(&v) < q.degree_in(&v) {
        std::mem::swap(&mut p, &mut q);
    }
    while !q.is_zero() && q.degree_in(&v) > 0 {
        let r = prem(&p, &q, &v);
        p = q;
        q = if r.is_zero() {
            r
        } else {
            let cr = content_in(&r, &v);
            r.div_exact(&cr).expect("content divides")
        };
    }
    let g = if q.is_zero() { p } else { Poly::one() };
    let g = if g.degree_in(&v) == 0 {
        Poly::one()
    } else {
        let cg = content_in(&g, &v);
        g.div_exact(&cg).expect("content divides")
    };
    c.mul(&g).primitive_integer()
}

/// Content of `p` regarded as a polynomial in `v`.
pub fn content_in(p: &Poly, v: &Atom) -> Poly {
    let coeffs = p.coeffs_in(v);
    let mut nz = coeffs.into_iter().filter(|c| !c.is_zero());
    let Some(mut g) = nz.next() else {
        return Poly::zero();
    };
    for c in nz {
        if g.is_constant() {
            break;
        }
        g = gcd_plain(&g, &c);
    }
    if g.is_constant() {
        Poly::one()
    } else {
        g.monic().1
    }
}

/// Pseudo-remainder of `a` by `b` in the variable `v`.
fn prem(a: &Poly, b: &Poly, v: &Atom) -> Poly {
    let db = b.degree_in(v);
    let lb = b.coeffs_in(v).pop().unwrap();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = r.coeffs_in(v).pop().unwrap();
        let shift = Monomial::atom(v.clone(), dr - db);
        let t = lr.mul(b).mul_term(&shift, &Rat::one());
        r = lb.mul(&r).sub(&t);
        r = r.primitive_integer();
    }
    r
}

/// Cheap sufficient test for irreducibility: degree one in some variable
/// with coprime coefficients.
pub fn is_evidently_irreducible(p: &Poly) -> bool {
    if p.is_constant() {
        return false;
    }
    if !p.monomial_content().is_one() && p.len() > 1 {
        return false;
    }
    if let Some((m, _)) = p.as_monomial() {
        return m.factors().len() == 1 && m.factors()[0].1 == 1;
    }
    for v in p.atoms() {
        if p.degree_in(&v) != 1 {
            continue;
        }
        let c = p.coeffs_in(&v);
        if c[1].is_constant() || gcd_plain(&c[0], &c[1]).is_constant() {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::atom(Atom::sym("x"))
    }
    fn y() -> Poly {
        Poly::atom(Atom::sym("y"))
    }
    fn c(n: i64) -> Poly {
        Poly::constant(rat(n))
    }

    #[test]
    fn exact_division_and_failure() {
        let p = x().mul(&x()).sub(&c(1));
        let d = x().sub(&c(1));
        assert_eq!(p.div_exact(&d).unwrap(), x().add(&c(1)));
        assert!(p.div_exact(&x().add(&c(2))).is_none());
    }

    #[test]
    fn gcd_multivariate() {
        let f = x().add(&y()).mul(&x().sub(&c(2)));
        let g = x().add(&y()).mul(&y().add(&c(3)));
        assert_eq!(gcd(&f, &g), x().add(&y()).monic().1);
        assert!(gcd(&x().add(&c(1)), &y()).is_one());
    }

    #[test]
    fn radical_squares_reduce() {
        let v = x().add(&c(1));
        let s = Poly::atom(Atom::new(AtomKind::Sqrt(v.clone())));
        assert_eq!(s.mul(&s), v);
        assert_eq!(s.pow(3), v.mul(&s));
    }

    #[test]
    fn irreducibility_heuristic() {
        // c2*x^2 + c1*x + c0 is linear in c0
        let q = Poly::atom(Atom::sym("c2"))
            .mul(&x().pow(2))
            .add(&Poly::atom(Atom::sym("c1")).mul(&x()))
            .add(&Poly::atom(Atom::sym("c0")));
        assert!(is_evidently_irreducible(&q));
        assert!(!is_evidently_irreducible(&x().pow(2).sub(&c(1))));
    }
}
