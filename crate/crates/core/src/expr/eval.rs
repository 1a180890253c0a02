use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::poly::{Atom, AtomKind, Poly};
use super::{Expr, ExprError};
use crate::numerics::special;

/// Numeric values for symbols. `pi` is supplied when absent.
pub type NumEnv = HashMap<String, f64>;

const POLE_EPS: f64 = 1e-300;

fn lookup(env: &NumEnv, s: &str) -> Result<f64, ExprError> {
    match env.get(s) {
        Some(v) => Ok(*v),
        None if s == "pi" => Ok(std::f64::consts::PI),
        None => Err(ExprError::Unbound(s.to_string())),
    }
}

fn eval_atom(a: &Atom, env: &NumEnv) -> Result<f64, ExprError> {
    match a.kind() {
        AtomKind::Sym(s) => lookup(env, s),
        AtomKind::Exp(g) => Ok(g.eval(env)?.exp()),
        AtomKind::Log(g) => {
            let v = g.eval(env)?;
            if v <= 0.0 {
                return Err(ExprError::Domain(format!("log of non-positive value {v}")));
            }
            Ok(v.ln())
        }
        AtomKind::Tanh(g) => Ok(g.eval(env)?.tanh()),
        AtomKind::Erf(g) => Ok(special::erf(g.eval(env)?)),
        AtomKind::E1(g) => {
            let v = g.eval(env)?;
            special::e1(v).map_err(|e| ExprError::Domain(e.to_string()))
        }
        AtomKind::Sqrt(v) => {
            let r = eval_poly(v, env)?;
            if r < 0.0 {
                return Err(ExprError::Domain(format!(
                    "sqrt of negative value {r} (radicand `{v}`)"
                )));
            }
            Ok(r.sqrt())
        }
        AtomKind::Pow(b, n) => {
            let bv = eval_poly(b, env)?;
            let nv = n.eval(env)?;
            if bv < 0.0 {
                return Err(ExprError::Domain(format!(
                    "pow of negative base {bv} (base `{b}`)"
                )));
            }
            Ok(bv.powf(nv))
        }
    }
}

fn eval_poly(p: &Poly, env: &NumEnv) -> Result<f64, ExprError> {
    let mut cache: HashMap<&Atom, f64> = HashMap::new();
    let mut acc = 0.0;
    for (m, c) in p.terms() {
        let mut t = c.to_f64().unwrap_or(f64::NAN);
        for (a, e) in m.factors() {
            let v = match cache.get(a) {
                Some(v) => *v,
                None => {
                    let v = eval_atom(a, env)?;
                    cache.insert(a, v);
                    v
                }
            };
            t *= v.powi(*e as i32);
        }
        acc += t;
    }
    Ok(acc)
}

impl Expr {
    /// Binary64 evaluation. Every free symbol must be bound.
    pub fn eval(&self, env: &NumEnv) -> Result<f64, ExprError> {
        let n = eval_poly(&self.0.num, env)?;
        if self.is_polynomial() {
            return Ok(n);
        }
        let d = eval_poly(&self.0.den, env)?;
        if d.abs() < POLE_EPS {
            return Err(ExprError::Pole(self.0.den.to_string(), d));
        }
        Ok(n / d)
    }

    /// Evaluates with the pairs given inline.
    pub fn eval_with(&self, pairs: &[(&str, f64)]) -> Result<f64, ExprError> {
        let env: NumEnv = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self.eval(&env)
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Slot {
    Input(usize),
    Const(f64),
    Exp(Box<CompiledExpr>),
    Log(Box<CompiledExpr>),
    Tanh(Box<CompiledExpr>),
    Erf(Box<CompiledExpr>),
    E1(Box<CompiledExpr>),
    Sqrt(Box<CompiledExpr>),
    Pow(Box<CompiledExpr>, Box<CompiledExpr>),
}

#[derive(Clone, Debug)]
struct CPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CPoly {
    fn run(&self, slots: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, fs) in &self.terms {
            let mut t = *c;
            for &(k, e) in fs {
                let v = slots[k];
                t *= match e {
                    1 => v,
                    2 => v * v,
                    _ => v.powi(e),
                };
            }
            acc += t;
        }
        acc
    }
}

/// An expression specialised to a fixed list of input symbols, with every
/// other symbol frozen to a constant. Evaluation is allocation-light and
/// suited to inner loops.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    slots: Vec<Slot>,
    num: CPoly,
    den: Option<CPoly>,
    den_text: String,
}

impl CompiledExpr {
    pub fn new(e: &Expr, inputs: &[&str], consts: &NumEnv) -> Result<Self, ExprError> {
        let mut slots = Vec::new();
        let mut index: HashMap<Atom, usize> = HashMap::new();
        let num = compile_poly(&e.0.num, inputs, consts, &mut slots, &mut index)?;
        let den = if e.is_polynomial() {
            None
        } else {
            Some(compile_poly(
                &e.0.den, inputs, consts, &mut slots, &mut index,
            )?)
        };
        Ok(CompiledExpr {
            slots,
            num,
            den,
            den_text: e.0.den.to_string(),
        })
    }

    pub fn eval(&self, inputs: &[f64]) -> Result<f64, ExprError> {
        let mut scratch = Vec::with_capacity(self.slots.len());
        self.eval_scratch(inputs, &mut scratch)
    }

    /// As [`CompiledExpr::eval`], reusing `scratch` for slot values.
    pub fn eval_scratch(&self, inputs: &[f64], scratch: &mut Vec<f64>) -> Result<f64, ExprError> {
        scratch.clear();
        let vals = scratch;
        for s in &self.slots {
            let v = match s {
                Slot::Input(k) => inputs[*k],
                Slot::Const(c) => *c,
                Slot::Exp(g) => g.eval(inputs)?.exp(),
                Slot::Log(g) => {
                    let v = g.eval(inputs)?;
                    if v <= 0.0 {
                        return Err(ExprError::Domain(format!("log of {v}")));
                    }
                    v.ln()
                }
                Slot::Tanh(g) => g.eval(inputs)?.tanh(),
                Slot::Erf(g) => special::erf(g.eval(inputs)?),
                Slot::E1(g) => {
                    special::e1(g.eval(inputs)?).map_err(|e| ExprError::Domain(e.to_string()))?
                }
                Slot::Sqrt(g) => {
                    let r = g.eval(inputs)?;
                    if r < 0.0 {
                        return Err(ExprError::Domain(format!("sqrt of negative value {r}")));
                    }
                    r.sqrt()
                }
                Slot::Pow(b, n) => {
                    let bv = b.eval(inputs)?;
                    if bv < 0.0 {
                        return Err(ExprError::Domain(format!("pow of negative base {bv}")));
                    }
                    bv.powf(n.eval(inputs)?)
                }
            };
            vals.push(v);
        }
        let n = self.num.run(vals);
        match &self.den {
            None => Ok(n),
            Some(d) => {
                let d = d.run(vals);
                if d.abs() < POLE_EPS {
                    return Err(ExprError::Pole(self.den_text.clone(), d));
                }
                Ok(n / d)
            }
        }
    }
}

fn compile_poly(
    p: &Poly,
    inputs: &[&str],
    consts: &NumEnv,
    slots: &mut Vec<Slot>,
    index: &mut HashMap<Atom, usize>,
) -> Result<CPoly, ExprError> {
    let mut terms = Vec::with_capacity(p.len());
    for (m, c) in p.terms() {
        let mut coeff = c.to_f64().unwrap_or(f64::NAN);
        let mut fs = Vec::with_capacity(m.factors().len());
        for (a, e) in m.factors() {
            // Frozen symbols go straight into the coefficient.
            if let Some(s) = a.as_sym() {
                if !inputs.contains(&s) {
                    coeff *= lookup(consts, s)?.powi(*e as i32);
                    continue;
                }
            }
            let k = match index.get(a) {
                Some(k) => *k,
                None => {
                    let slot = compile_atom(a, inputs, consts)?;
                    slots.push(slot);
                    index.insert(a.clone(), slots.len() - 1);
                    slots.len() - 1
                }
            };
            fs.push((k, *e as i32));
        }
        terms.push((coeff, fs));
    }
    Ok(CPoly { terms })
}

fn compile_atom(a: &Atom, inputs: &[&str], consts: &NumEnv) -> Result<Slot, ExprError> {
    let sub = |e: &Expr| CompiledExpr::new(e, inputs, consts).map(Box::new);
    Ok(match a.kind() {
        AtomKind::Sym(s) => match inputs.iter().position(|i| i == s) {
            Some(k) => Slot::Input(k),
            None => Slot::Const(lookup(consts, s)?),
        },
        AtomKind::Exp(g) => Slot::Exp(sub(g)?),
        AtomKind::Log(g) => Slot::Log(sub(g)?),
        AtomKind::Tanh(g) => Slot::Tanh(sub(g)?),
        AtomKind::Erf(g) => Slot::Erf(sub(g)?),
        AtomKind::E1(g) => Slot::E1(sub(g)?),
        AtomKind::Sqrt(v) => Slot::Sqrt(sub(&Expr::from_poly(v.clone()))?),
        AtomKind::Pow(b, n) => Slot::Pow(sub(&Expr::from_poly(b.clone()))?, sub(n)?),
    })
}
