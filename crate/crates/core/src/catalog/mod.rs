//! Registry of the third-order ODEs, the diffusion equations with their
//! point generators and reduction systems, and the closed-form solution
//! families. The data lives in `data/catalog.toml` and is parsed on load.

use std::fmt;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::expr::{parse, Binding, Expr, ExprError, ParseError};
use crate::jet::{self, EvolutionaryField, PointGenerator, SymmetryReport};

const BUILTIN: &str = include_str!("../../data/catalog.toml");

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CatalogError {
    #[error("unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },
    #[error("{record}: field `{field}`: {source}")]
    Parse {
        record: String,
        field: String,
        source: ParseError,
    },
    #[error("catalog file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Table,
    Worked,
}

#[derive(Debug, Clone)]
pub struct OdeEntry {
    pub id: String,
    pub kind: EntryKind,
    pub h: Expr,
    /// Right-hand side `U` of `u3 = U`.
    pub rhs: Expr,
    pub parameters: Vec<String>,
    pub side_condition: String,
    /// `(H/u)_xx` expanded.
    pub operator: EvolutionaryField,
    /// Named characteristics of further admitted generators.
    pub characteristics: Vec<(String, Expr)>,
}

impl OdeEntry {
    /// Runs the symmetry check for the entry's own operator.
    pub fn verify(&self, params: Option<&Binding>) -> Result<SymmetryReport, jet::JetError> {
        jet::check_lb_symmetry(&self.operator, &self.rhs, params)
    }
}

#[derive(Debug, Clone)]
pub struct CaseGenerator {
    pub name: String,
    pub generator: PointGenerator,
    /// Parameter relations under which the generator is admitted.
    pub constraints: Binding,
    /// Inequalities that must also hold, as text.
    pub requires: String,
    /// `lhs - rhs` for each `lhs != rhs` in `requires`.
    pub nonzero: Vec<Expr>,
    /// Replacement for a generator that fails as listed.
    pub corrected: Option<PointGenerator>,
}

impl CaseGenerator {
    /// The generator to use in computations: the corrected form when one
    /// is recorded.
    pub fn effective(&self) -> &PointGenerator {
        self.corrected.as_ref().unwrap_or(&self.generator)
    }

    /// Whether the recorded inequalities hold at `values`. An inequality
    /// that still involves free symbols counts as holding generically.
    pub fn requirements_hold(&self, values: &Binding) -> Result<bool, ExprError> {
        for d in &self.nonzero {
            if d.substitute(values)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `phi_nu' = R_nu(phi0, phi1, phi2)`, indexed by `nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSystem {
    pub rhs: [Expr; 3],
}

impl ReductionSystem {
    pub fn substitute(&self, b: &Binding) -> Result<ReductionSystem, crate::expr::ExprError> {
        Ok(ReductionSystem {
            rhs: [
                self.rhs[0].substitute(b)?,
                self.rhs[1].substitute(b)?,
                self.rhs[2].substitute(b)?,
            ],
        })
    }

    pub fn to_json(&self, case: &str, m: u32) -> Value {
        json!({
            "case": case,
            "m": m,
            "odes": {
                "phi2'": self.rhs[2].to_string(),
                "phi1'": self.rhs[1].to_string(),
                "phi0'": self.rhs[0].to_string(),
            }
        })
    }
}

impl fmt::Display for ReductionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for nu in (0..3).rev() {
            writeln!(f, "phi{nu}' = {}", self.rhs[nu])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PdeCase {
    pub id: String,
    pub m: u32,
    pub h: Expr,
    pub f_terms: Expr,
    pub parameters: Vec<String>,
    pub generators: Vec<CaseGenerator>,
    pub expected: ReductionSystem,
    pub families: Vec<String>,
    pub notes: String,
}

impl PdeCase {
    /// `K` in `u_t = K`, i.e. `(H/u)_xx + F` expanded in jet variables.
    pub fn rhs(&self) -> Expr {
        let w = &self.h * Expr::sym("u").recip().expect("u is nonzero");
        jet::total_derivative_x_n(&w, 2) + &self.f_terms
    }

    /// Generators that are point symmetries at the parameter values
    /// `values`: the effective form passes the check there and the recorded
    /// inequalities hold.
    pub fn admitted_generators(
        &self,
        values: &Binding,
    ) -> Result<Vec<&CaseGenerator>, jet::JetError> {
        let k = self.rhs();
        let mut out = Vec::new();
        for g in &self.generators {
            if g.requirements_hold(values)?
                && jet::check_point_symmetry(g.effective(), &k, Some(values))?.passed
            {
                out.push(g);
            }
        }
        Ok(out)
    }

    pub fn generator(&self, name: &str) -> Result<&CaseGenerator, CatalogError> {
        self.generators
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| CatalogError::UnknownId {
                kind: "generator",
                id: format!("{}/{name}", self.id),
            })
    }
}

#[derive(Debug, Clone)]
pub struct SolutionFamily {
    pub id: String,
    pub case: String,
    pub constants: Vec<String>,
    /// Parameter relations the family assumes.
    pub constraints: Binding,
    /// `phi0(t), phi1(t), phi2(t)`.
    pub phi: [Expr; 3],
    /// Expressions that must be positive, respectively nonzero, for the
    /// closed form to be defined.
    pub positive: Vec<Expr>,
    pub nonzero: Vec<Expr>,
    /// A parameter and constant instance inside the validity region.
    pub defaults: Binding,
    pub x_window: (f64, f64),
    pub t_window: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct Catalog {
    entries: Vec<OdeEntry>,
    cases: Vec<PdeCase>,
    families: Vec<SolutionFamily>,
}

#[derive(Deserialize)]
struct RawCatalog {
    ode: Vec<RawOde>,
    case: Vec<RawCase>,
    family: Vec<RawFamily>,
}

#[derive(Deserialize)]
struct RawOde {
    id: String,
    kind: String,
    h: String,
    rhs: String,
    parameters: Vec<String>,
    side_condition: String,
    #[serde(default)]
    characteristics: Vec<(String, String)>,
}

#[derive(Deserialize)]
struct RawCase {
    id: String,
    m: u32,
    h: String,
    f: String,
    parameters: Vec<String>,
    families: Vec<String>,
    #[serde(default)]
    notes: String,
    reduction: [String; 3],
    generator: Vec<RawGenerator>,
}

#[derive(Deserialize)]
struct RawGenerator {
    name: String,
    xi: String,
    tau: String,
    eta: String,
    #[serde(default)]
    constraints: String,
    #[serde(default)]
    requires: String,
    corrected_xi: Option<String>,
}

#[derive(Deserialize)]
struct RawFamily {
    id: String,
    case: String,
    constants: Vec<String>,
    constraints: String,
    phi: [String; 3],
    positive: Vec<String>,
    nonzero: Vec<String>,
    defaults: String,
    x_window: (f64, f64),
    t_window: (f64, f64),
}

fn field(record: &str, name: &str, text: &str) -> Result<Expr, CatalogError> {
    parse(text).map_err(|source| CatalogError::Parse {
        record: record.to_string(),
        field: name.to_string(),
        source,
    })
}

fn binding(record: &str, name: &str, text: &str) -> Result<Binding, CatalogError> {
    Binding::parse(text).map_err(|source| CatalogError::Parse {
        record: record.to_string(),
        field: name.to_string(),
        source,
    })
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Catalog {
        Catalog::from_toml(BUILTIN).expect("bundled catalog is well formed")
    }

    pub fn from_toml(text: &str) -> Result<Catalog, CatalogError> {
        let raw: RawCatalog =
            toml::from_str(text).map_err(|e| CatalogError::Format(e.to_string()))?;
        let mut entries = Vec::new();
        for o in raw.ode {
            let kind = match o.kind.as_str() {
                "table" => EntryKind::Table,
                "worked" => EntryKind::Worked,
                k => {
                    return Err(CatalogError::Format(format!(
                        "{}: unknown kind `{k}`",
                        o.id
                    )))
                }
            };
            let h = field(&o.id, "h", &o.h)?;
            let rhs = field(&o.id, "rhs", &o.rhs)?;
            let op = jet::total_derivative_x_n(&(&h * Expr::sym("u").recip().unwrap()), 2);
            let characteristics = o
                .characteristics
                .iter()
                .map(|(n, f)| Ok((n.clone(), field(&o.id, n, f)?)))
                .collect::<Result<_, CatalogError>>()?;
            entries.push(OdeEntry {
                kind,
                h,
                rhs,
                parameters: o.parameters,
                side_condition: o.side_condition,
                operator: EvolutionaryField::new(op),
                characteristics,
                id: o.id,
            });
        }
        let mut cases = Vec::new();
        for c in raw.case {
            let id = format!("case {}", c.id);
            let mut generators = Vec::new();
            for g in &c.generator {
                let rec = format!("{id}/{}", g.name);
                let generator = PointGenerator::new(
                    field(&rec, "xi", &g.xi)?,
                    field(&rec, "tau", &g.tau)?,
                    field(&rec, "eta", &g.eta)?,
                );
                let corrected = match &g.corrected_xi {
                    Some(xi) => Some(PointGenerator {
                        xi: field(&rec, "corrected_xi", xi)?,
                        ..generator.clone()
                    }),
                    None => None,
                };
                let mut nonzero = Vec::new();
                for clause in g
                    .requires
                    .split(',')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                {
                    let (l, r) = clause.split_once("!=").ok_or_else(|| {
                        CatalogError::Format(format!(
                            "{rec}: expected `lhs != rhs`, got `{clause}`"
                        ))
                    })?;
                    nonzero.push(field(&rec, "requires", l)? - field(&rec, "requires", r)?);
                }
                generators.push(CaseGenerator {
                    name: g.name.clone(),
                    generator,
                    constraints: binding(&rec, "constraints", &g.constraints)?,
                    requires: g.requires.clone(),
                    nonzero,
                    corrected,
                });
            }
            let r = &c.reduction;
            cases.push(PdeCase {
                m: c.m,
                h: field(&id, "h", &c.h)?,
                f_terms: field(&id, "f", &c.f)?,
                parameters: c.parameters,
                generators,
                expected: ReductionSystem {
                    rhs: [
                        field(&id, "reduction", &r[0])?,
                        field(&id, "reduction", &r[1])?,
                        field(&id, "reduction", &r[2])?,
                    ],
                },
                families: c.families,
                notes: c.notes,
                id: c.id,
            });
        }
        let mut families = Vec::new();
        for f in raw.family {
            let id = f.id.clone();
            let list = |name: &str, v: &[String]| -> Result<Vec<Expr>, CatalogError> {
                v.iter().map(|s| field(&id, name, s)).collect()
            };
            families.push(SolutionFamily {
                constraints: binding(&id, "constraints", &f.constraints)?,
                phi: [
                    field(&id, "phi0", &f.phi[0])?,
                    field(&id, "phi1", &f.phi[1])?,
                    field(&id, "phi2", &f.phi[2])?,
                ],
                positive: list("positive", &f.positive)?,
                nonzero: list("nonzero", &f.nonzero)?,
                defaults: binding(&id, "defaults", &f.defaults)?,
                constants: f.constants,
                case: f.case,
                x_window: f.x_window,
                t_window: f.t_window,
                id: f.id,
            });
        }
        for c in &cases {
            for fam in &c.families {
                if !families.iter().any(|f| &f.id == fam && f.case == c.id) {
                    return Err(CatalogError::Format(format!(
                        "case {} lists unknown family `{fam}`",
                        c.id
                    )));
                }
            }
        }
        Ok(Catalog {
            entries,
            cases,
            families,
        })
    }

    /// The table entries, in catalog order.
    pub fn list_entries(&self) -> Vec<&OdeEntry> {
        self.entries
            .iter()
            .filter(|e| e.kind == EntryKind::Table)
            .collect()
    }

    /// The two fully worked equations with their generator lists.
    pub fn worked(&self) -> Vec<&OdeEntry> {
        self.entries
            .iter()
            .filter(|e| e.kind == EntryKind::Worked)
            .collect()
    }

    pub fn get_entry(&self, id: &str) -> Result<&OdeEntry, CatalogError> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| CatalogError::UnknownId {
                kind: "entry",
                id: id.to_string(),
            })
    }

    pub fn cases(&self) -> &[PdeCase] {
        &self.cases
    }

    pub fn get_case(&self, id: &str) -> Result<&PdeCase, CatalogError> {
        self.cases
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| CatalogError::UnknownId {
                kind: "case",
                id: id.to_string(),
            })
    }

    pub fn families(&self) -> &[SolutionFamily] {
        &self.families
    }

    pub fn get_family(&self, id: &str) -> Result<&SolutionFamily, CatalogError> {
        self.families
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| CatalogError::UnknownId {
                kind: "family",
                id: id.to_string(),
            })
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "kind": match e.kind { EntryKind::Table => "table", EntryKind::Worked => "worked" },
                    "H": e.h.to_string(),
                    "U": e.rhs.to_string(),
                    "parameters": e.parameters,
                    "side_condition": e.side_condition,
                    "operator": e.operator.characteristic().to_string(),
                    "characteristics": e.characteristics.iter()
                        .map(|(n, f)| json!({"name": n, "F": f.to_string()}))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        let gen_json = |g: &PointGenerator| json!({"xi": g.xi.to_string(), "tau": g.tau.to_string(), "eta": g.eta.to_string()});
        let cases: Vec<Value> = self
            .cases
            .iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "m": c.m,
                    "H": c.h.to_string(),
                    "F": c.f_terms.to_string(),
                    "parameters": c.parameters,
                    "generators": c.generators.iter().map(|g| json!({
                        "name": g.name,
                        "generator": gen_json(&g.generator),
                        "constraints": g.constraints.to_string(),
                        "requires": g.requires,
                        "corrected": g.corrected.as_ref().map(gen_json),
                    })).collect::<Vec<_>>(),
                    "reduction": c.expected.to_json(&c.id, c.m)["odes"].clone(),
                    "families": c.families,
                    "notes": c.notes,
                })
            })
            .collect();
        let families: Vec<Value> = self
            .families
            .iter()
            .map(|f| {
                json!({
                    "id": f.id,
                    "case": f.case,
                    "constants": f.constants,
                    "constraints": f.constraints.to_string(),
                    "phi0": f.phi[0].to_string(),
                    "phi1": f.phi[1].to_string(),
                    "phi2": f.phi[2].to_string(),
                    "positive": f.positive.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "nonzero": f.nonzero.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "defaults": f.defaults.to_string(),
                    "x_window": [f.x_window.0, f.x_window.1],
                    "t_window": [f.t_window.0, f.t_window.1],
                })
            })
            .collect();
        json!({"entries": entries, "cases": cases, "families": families})
    }
}
