use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use symred::catalog::{Catalog, EntryKind, PdeCase, SolutionFamily};
use symred::invariance::{invariance_test, Verdict, Window};
use symred::jet::{
    check_lb_symmetry, check_lb_symmetry_on_shell, check_point_symmetry, EvolutionaryField,
};
use symred::numerics::{integrate, uniform_times, FamilyEval, Instance, Tolerances};
use symred::pdecheck::{
    mol_compare, residual as grid_residual, residual_convergence, AnsatzSolution, Grid, PdeEval,
    MOL_TOLERANCES,
};
use symred::reduction::reduce as derive_system;
use symred::{parse, Binding, Expr};

use crate::error::CliError;

/// What a command produced. `summary` is reported on standard error when
/// the verification failed.
pub struct Report {
    pub passed: bool,
    pub summary: String,
    pub text: String,
    pub json: Value,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct TolOverride {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

impl TolOverride {
    fn apply(self, base: Tolerances) -> Result<Tolerances, CliError> {
        let t = Tolerances {
            rtol: self.rtol.unwrap_or(base.rtol),
            atol: self.atol.unwrap_or(base.atol),
        };
        if !(t.rtol > 0.0 && t.atol > 0.0) {
            return Err(CliError::usage("tolerances must be positive"));
        }
        Ok(t)
    }
}

pub struct InstanceSpec {
    pub case: String,
    pub family: String,
    pub params: Option<String>,
    pub constants: Option<String>,
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Parameters for symbolic commands: exact rationals only.
fn exact_params(text: Option<&str>) -> Result<Binding, CliError> {
    let Some(text) = text else {
        return Ok(Binding::new());
    };
    for part in text.split([',', ';']) {
        if let Some((k, v)) = part.split_once('=') {
            if v.contains('.') {
                return Err(CliError::new(
                    "inexact-parameter",
                    format!(
                        "`{}` must be an exact rational such as 3/2, got `{}`",
                        k.trim(),
                        v.trim()
                    ),
                ));
            }
        }
    }
    Ok(Binding::parse(text)?)
}

fn binding_json(b: &Binding) -> Value {
    let m: Map<String, Value> = b
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.to_string())))
        .collect();
    Value::Object(m)
}

fn finish(
    passed: bool,
    summary: String,
    text: String,
    json: Value,
    csv: Option<String>,
) -> Result<Report, CliError> {
    Ok(Report {
        passed,
        summary,
        text,
        json,
        csv,
    })
}

pub fn catalog_list() -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let mut text = String::new();
    let mut entries = Vec::new();
    for e in cat.worked().into_iter().chain(cat.list_entries()) {
        let kind = match e.kind {
            EntryKind::Table => "table",
            EntryKind::Worked => "worked",
        };
        let _ = writeln!(text, "ode     {:<22} {:<7} H = {}", e.id, kind, e.h);
        entries.push(json!({"id": e.id, "kind": kind, "H": e.h.to_string(), "side_condition": e.side_condition}));
    }
    let mut cases = Vec::new();
    for c in cat.cases() {
        let gens: Vec<&str> = c.generators.iter().map(|g| g.name.as_str()).collect();
        let _ = writeln!(
            text,
            "case    {:<22} m={}  H = {}  F = {}  generators {}",
            c.id,
            c.m,
            c.h,
            c.f_terms,
            gens.join(",")
        );
        cases.push(
            json!({"id": c.id, "m": c.m, "H": c.h.to_string(), "F": c.f_terms.to_string(),
            "generators": gens, "families": c.families}),
        );
    }
    let mut families = Vec::new();
    for f in cat.families() {
        let _ = writeln!(
            text,
            "family  {:<22} case {}  x in [{}, {}]  t in [{}, {}]",
            f.id, f.case, f.x_window.0, f.x_window.1, f.t_window.0, f.t_window.1
        );
        families.push(json!({"id": f.id, "case": f.case, "constants": f.constants,
            "defaults": binding_json(&f.defaults), "x_window": f.x_window, "t_window": f.t_window}));
    }
    finish(
        true,
        String::new(),
        text,
        json!({"entries": entries, "cases": cases, "families": families}),
        None,
    )
}

pub fn catalog_dump() -> Result<Report, CliError> {
    let v = Catalog::builtin().to_json();
    let text =
        serde_json::to_string_pretty(&v).map_err(|e| CliError::new("io", e.to_string()))? + "\n";
    finish(true, String::new(), text, v, None)
}

pub fn catalog_verify(entry: Option<&str>, params: Option<&str>) -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let params = exact_params(params)?;
    let entries = match entry {
        Some(id) => vec![cat.get_entry(id)?],
        None => cat.list_entries(),
    };
    let p = (!params.is_empty()).then_some(&params);
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for e in entries {
        let r = e.verify(p)?;
        let _ = write!(
            text,
            "{:<24} {}  order {}->{}",
            e.id,
            mark(r.passed),
            r.order_before,
            r.order_after
        );
        if !r.passed {
            let _ = write!(text, "  remainder {}", r.remainder);
            failed.push(e.id.clone());
        }
        text.push('\n');
        rows.push(
            json!({"id": e.id, "passed": r.passed, "remainder": r.remainder,
            "order_before": r.order_before, "order_after": r.order_after}),
        );
    }
    let passed = failed.is_empty();
    let json = json!({"parameters": binding_json(&params), "entries": rows, "passed": passed});
    finish(
        passed,
        format!("failing entries: {}", failed.join(", ")),
        text,
        json,
        None,
    )
}

fn read_rhs(path: &Path) -> Result<Expr, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    let body: Vec<&str> = raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let body = body.join(" ");
    let body = match body.split_once('=') {
        Some((l, r)) if l.trim() == "u3" => r.to_string(),
        Some(_) => return Err(CliError::new("parse-error", "expected `U` or `u3 = U`")),
        None => body,
    };
    Ok(parse(&body)?)
}

pub fn symmetry_check(
    ode: Option<&str>,
    file: Option<&Path>,
    operator: Option<&str>,
    params: Option<&str>,
) -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let params = exact_params(params)?;
    let p = (!params.is_empty()).then_some(&params);
    let (source, rhs, mut items) = match (ode, file) {
        (Some(id), _) => {
            let e = cat.get_entry(id)?;
            let mut items = vec![("operator".to_string(), e.operator.clone())];
            items.extend(
                e.characteristics
                    .iter()
                    .map(|(n, f)| (n.clone(), EvolutionaryField::new(f.clone()))),
            );
            (e.id.clone(), e.rhs.clone(), items)
        }
        (None, Some(path)) => (path.display().to_string(), read_rhs(path)?, Vec::new()),
        (None, None) => return Err(CliError::usage("give --ode or --file")),
    };
    if let Some(op) = operator {
        items = vec![("F".to_string(), EvolutionaryField::new(parse(op)?))];
    }
    let mut text = format!("u3 = {rhs}\n");
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (name, f) in &items {
        let r = check_lb_symmetry(f, &rhs, p)?;
        let cross = check_lb_symmetry_on_shell(f, &rhs, p)?;
        let ok = r.passed && cross.passed;
        let _ = write!(text, "{name:<12} {}", mark(ok));
        if r.passed != cross.passed {
            let _ = write!(text, "  (the two derivations disagree)");
        }
        if !r.passed {
            let _ = write!(text, "  remainder {}", r.remainder);
        }
        text.push('\n');
        if !ok {
            failed.push(name.clone());
        }
        rows.push(
            json!({"name": name, "F": f.characteristic().to_string(), "passed": ok,
            "remainder": r.remainder, "on_shell_passed": cross.passed,
            "order_before": r.order_before, "order_after": r.order_after}),
        );
    }
    let passed = failed.is_empty();
    let json = json!({"equation": source, "U": rhs.to_string(), "parameters": binding_json(&params),
        "checks": rows, "passed": passed});
    finish(
        passed,
        format!("not a symmetry: {}", failed.join(", ")),
        text,
        json,
        None,
    )
}

/// The generator's side conditions combined with `params`, or the reason
/// they cannot be combined.
fn side_conditions(
    g: &symred::catalog::CaseGenerator,
    params: &Binding,
) -> Result<Result<Binding, String>, CliError> {
    let mut merged = params.clone();
    for (k, v) in g.constraints.iter() {
        let v = v.substitute(params)?;
        match params.get(k) {
            Some(given) => {
                if !(given - &v).is_zero() {
                    return Ok(Err(format!("needs {k}={v}")));
                }
            }
            None => merged.bind(k, v)?,
        }
    }
    if !g.requirements_hold(&merged)? {
        return Ok(Err(format!("needs {}", g.requires)));
    }
    Ok(Ok(merged))
}

pub fn classify_verify(case_id: &str, params: Option<&str>) -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let case = cat.get_case(case_id)?;
    let params = exact_params(params)?;
    let k = case.rhs();
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for g in &case.generators {
        let mut conds = g.constraints.to_string();
        if !g.requires.is_empty() {
            conds = if conds.is_empty() {
                g.requires.clone()
            } else {
                format!("{conds}, {}", g.requires)
            };
        }
        let conds_col = if conds.is_empty() {
            "-".to_string()
        } else {
            conds.clone()
        };
        let base = json!({"name": g.name, "xi": g.generator.xi.to_string(), "tau": g.generator.tau.to_string(),
            "eta": g.generator.eta.to_string(), "conditions": conds});
        let merged = match side_conditions(g, &params)? {
            Ok(b) => b,
            Err(why) => {
                let _ = writeln!(text, "{:<4} {:<28} n/a   {why}", g.name, conds_col);
                let mut row = base;
                row["status"] = json!("n/a");
                row["reason"] = json!(why);
                rows.push(row);
                continue;
            }
        };
        let listed = check_point_symmetry(&g.generator, &k, Some(&merged))?;
        let corrected = match &g.corrected {
            Some(c) => Some((c, check_point_symmetry(c, &k, Some(&merged))?)),
            None => None,
        };
        let ok = corrected.as_ref().map_or(listed.passed, |(_, r)| r.passed);
        let _ = write!(text, "{:<4} {:<28} {}", g.name, conds_col, mark(ok));
        if let Some((c, r)) = &corrected {
            let _ = write!(
                text,
                "  as listed {}, corrected xi = {}: {}",
                mark(listed.passed),
                c.xi,
                mark(r.passed)
            );
        }
        if !ok {
            let r = corrected.as_ref().map_or(&listed, |(_, r)| r);
            let _ = write!(text, "  remainder {}", r.remainder);
            failed.push(g.name.clone());
        }
        text.push('\n');
        let mut row = base;
        row["status"] = json!("checked");
        row["passed"] = json!(ok);
        row["listed"] = json!({"passed": listed.passed, "remainder": listed.remainder});
        row["corrected"] = match &corrected {
            Some((c, r)) => {
                json!({"xi": c.xi.to_string(), "tau": c.tau.to_string(), "eta": c.eta.to_string(),
                "passed": r.passed, "remainder": r.remainder})
            }
            None => Value::Null,
        };
        rows.push(row);
    }
    let passed = failed.is_empty();
    let json = json!({"case": case.id, "parameters": binding_json(&params), "generators": rows, "passed": passed});
    finish(
        passed,
        format!("case {}: failing generators {}", case.id, failed.join(", ")),
        text,
        json,
        None,
    )
}

pub fn reduce(case_id: &str) -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let case = cat.get_case(case_id)?;
    let out = derive_system(&case.rhs(), case.m)?;
    let matches = out.system == case.expected;
    let mut json = out.system.to_json(&case.id, case.m);
    json["matches_catalog"] = json!(matches);
    json["sign_symmetric"] = json!(out.sign_symmetric);
    let mut text = out.system.to_string();
    if matches {
        text.push_str("matches the catalogued system\n");
    } else {
        let _ = write!(
            text,
            "differs from the catalogued system:\n{}",
            case.expected
        );
        json["catalogued"] = case.expected.to_json(&case.id, case.m)["odes"].clone();
    }
    finish(
        matches,
        format!("case {}: derived system differs from the catalog", case.id),
        text,
        json,
        None,
    )
}

fn resolve<'a>(
    cat: &'a Catalog,
    spec: &InstanceSpec,
) -> Result<(&'a PdeCase, &'a SolutionFamily, Instance), CliError> {
    let case = cat.get_case(&spec.case)?;
    let fam = cat.get_family(&spec.family)?;
    if fam.case != case.id {
        return Err(CliError::usage(format!(
            "family `{}` belongs to case {}, not {}",
            fam.id, fam.case, case.id
        )));
    }
    let mut given = Binding::parse(spec.params.as_deref().unwrap_or(""))?;
    if let Some(c) = &spec.constants {
        given = given.merged(&Binding::parse(c)?)?;
    }
    let inst = Instance::new(fam, case, &given)?;
    Ok((case, fam, inst))
}

fn header(case: &PdeCase, fam: &SolutionFamily, inst: &Instance) -> String {
    format!("case {}, family {} [{}]\n", case.id, fam.id, inst.values)
}

fn base_json(case: &PdeCase, fam: &SolutionFamily, inst: &Instance) -> Value {
    json!({"case": case.id, "family": fam.id, "parameters": binding_json(&inst.values)})
}

pub fn solve(
    spec: &InstanceSpec,
    t0: Option<f64>,
    t1: Option<f64>,
    points: usize,
    rk45: bool,
    csv_path: Option<&Path>,
    tol: TolOverride,
) -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let (case, fam, inst) = resolve(&cat, spec)?;
    let t0 = t0.unwrap_or(fam.t_window.0);
    let t1 = t1.unwrap_or(fam.t_window.1);
    if !(t1 > t0) || points < 2 {
        return Err(CliError::usage("need t1 > t0 and at least 2 points"));
    }
    let tol = tol.apply(Tolerances::default())?;
    let env = inst.env();
    let ev = FamilyEval::new(fam, &inst)?;
    let times = uniform_times(t0, t1, points);
    let exact: Vec<[f64; 3]> = times.iter().map(|&t| ev.at(t)).collect::<Result<_, _>>()?;
    let numeric = if rk45 {
        let sys = case.expected.substitute(&inst.values)?;
        Some(integrate(&sys, &env, exact[0], t0, t1, tol, &times)?)
    } else {
        None
    };

    let mut text = header(case, fam, &inst);
    let mut csv = String::from("t,phi0,phi1,phi2");
    if numeric.is_some() {
        csv.push_str(",rk45_phi0,rk45_phi1,rk45_phi2");
    }
    csv.push('\n');
    let mut max_dev: f64 = 0.0;
    for (i, (t, e)) in times.iter().zip(&exact).enumerate() {
        let _ = write!(csv, "{t:.16e},{:.16e},{:.16e},{:.16e}", e[0], e[1], e[2]);
        let _ = write!(
            text,
            "t={t:<10.6} phi0={:<+24.16e} phi1={:<+24.16e} phi2={:<+24.16e}",
            e[0], e[1], e[2]
        );
        if let Some(tr) = &numeric {
            let v = tr.values[i];
            let _ = write!(csv, ",{:.16e},{:.16e},{:.16e}", v[0], v[1], v[2]);
            let scale = e
                .iter()
                .fold(0.0f64, |a, x| a.max(x.abs()))
                .max(f64::MIN_POSITIVE);
            let dev = (0..3).fold(0.0f64, |a, k| a.max((v[k] - e[k]).abs())) / scale;
            max_dev = max_dev.max(dev);
            let _ = write!(text, " rk45 rel dev {dev:.3e}");
        }
        csv.push('\n');
        text.push('\n');
    }
    let mut json = base_json(case, fam, &inst);
    json["times"] = json!(times);
    json["phi"] = json!(exact);
    let passed = max_dev <= 1e-6;
    if let Some(tr) = &numeric {
        let _ = writeln!(
            text,
            "rk45 (rtol {:e}, atol {:e}): max relative deviation {max_dev:.3e} {}",
            tol.rtol,
            tol.atol,
            mark(passed)
        );
        json["rk45"] = json!({"rtol": tol.rtol, "atol": tol.atol, "phi": tr.values, "steps": tr.stats,
            "max_relative_deviation": max_dev, "passed": passed});
    }
    json["passed"] = json!(passed);
    if let Some(p) = csv_path {
        fs::write(p, &csv).map_err(|e| CliError::new("io", format!("{}: {e}", p.display())))?;
    }
    finish(
        passed,
        format!("RK45 deviates from the closed form by {max_dev:e} (limit 1e-6)"),
        text,
        json,
        Some(csv),
    )
}

fn make_grid(
    g: Option<(f64, f64, usize)>,
    fam: &SolutionFamily,
    nx: usize,
) -> Result<Grid, CliError> {
    let (a, b, n) = g.unwrap_or((fam.x_window.0, fam.x_window.1, nx));
    Ok(Grid::new(a, b, n)?)
}

pub fn residual(
    spec: &InstanceSpec,
    grid: Option<(f64, f64, usize)>,
    times: &[f64],
    exact: bool,
    negative: bool,
) -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let (case, fam, inst) = resolve(&cat, spec)?;
    let grid = make_grid(grid, fam, 65)?;
    let times = if times.is_empty() {
        let (a, b) = fam.t_window;
        vec![a, 0.5 * (a + b), b]
    } else {
        times.to_vec()
    };
    let sol = AnsatzSolution::new(case, fam, &inst, negative)?;
    let pde = PdeEval::for_case(case, &inst.env())?;
    let rep = grid_residual(&pde, &sol, &grid, &times, exact)?;
    let mut text = header(case, fam, &inst);
    let _ = writeln!(
        text,
        "grid [{}, {}] with {} points, times {:?}, {} branch",
        grid.x0,
        grid.x1,
        grid.nx,
        times,
        if negative { "negative" } else { "positive" }
    );
    let mut json = base_json(case, fam, &inst);
    json["grid"] = json!(grid);
    json["times"] = json!(times);
    json["negative"] = json!(negative);
    json["mode"] = json!(if exact { "exact" } else { "finite-difference" });
    json["max_abs_residual"] = json!(rep.max_abs_residual);
    let (passed, summary) = if exact {
        let ok = rep.max_abs_residual <= 1e-9;
        let _ = writeln!(
            text,
            "exact residual max {:.3e} {}",
            rep.max_abs_residual,
            mark(ok)
        );
        (
            ok,
            format!("exact residual {:e} exceeds 1e-9", rep.max_abs_residual),
        )
    } else {
        let conv = residual_convergence(&pde, &sol, &grid, &times)?;
        let ok = (3.2..=4.8).contains(&conv.ratio);
        let _ = writeln!(
            text,
            "finite-difference residual {:.3e} at h={:.4e}, {:.3e} at h/2, ratio {:.3} {}",
            conv.residual_h,
            conv.h,
            conv.residual_half,
            conv.ratio,
            mark(ok)
        );
        json["convergence"] = json!(conv);
        (
            ok,
            format!("refinement ratio {} outside [3.2, 4.8]", conv.ratio),
        )
    };
    json["passed"] = json!(passed);
    finish(passed, summary, text, json, Some(rep.to_csv()))
}

pub fn mol(
    spec: &InstanceSpec,
    grid: Option<(f64, f64, usize)>,
    t0: Option<f64>,
    t1: Option<f64>,
    tol: TolOverride,
) -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let (case, fam, inst) = resolve(&cat, spec)?;
    let grid = make_grid(grid, fam, 201)?;
    let t0 = t0.unwrap_or(fam.t_window.0);
    let t1 = t1.unwrap_or(t0 + 0.25);
    if !(t1 > t0) {
        return Err(CliError::usage("need t1 > t0"));
    }
    let tol = tol.apply(MOL_TOLERANCES)?;
    let sol = AnsatzSolution::new(case, fam, &inst, false)?;
    let pde = PdeEval::for_case(case, &inst.env())?;
    let rep = mol_compare(&pde, &sol, &grid, t0, t1, tol)?;
    let passed = rep.rel_error <= 1e-3;
    let mut text = header(case, fam, &inst);
    let _ = writeln!(
        text,
        "grid [{}, {}] with {} points, t {} -> {}, rtol {:e}, atol {:e}",
        grid.x0, grid.x1, grid.nx, t0, t1, tol.rtol, tol.atol
    );
    let _ = writeln!(
        text,
        "relative max error {:.3e} {}",
        rep.rel_error,
        mark(passed)
    );
    let mut json = base_json(case, fam, &inst);
    json["grid"] = json!(grid);
    json["t0"] = json!(t0);
    json["t1"] = json!(t1);
    json["rtol"] = json!(tol.rtol);
    json["atol"] = json!(tol.atol);
    json["relative_error"] = json!(rep.rel_error);
    json["passed"] = json!(passed);
    finish(
        passed,
        format!("relative error {:e} exceeds 1e-3", rep.rel_error),
        text,
        json,
        Some(rep.to_csv()),
    )
}

pub fn invariance(
    spec: &InstanceSpec,
    samples: usize,
    seed: u64,
    names: &[String],
    expect_invariant: Option<bool>,
) -> Result<Report, CliError> {
    let cat = Catalog::builtin();
    let (case, fam, inst) = resolve(&cat, spec)?;
    let admitted = case.admitted_generators(&inst.values)?;
    let chosen = if names.is_empty() {
        if admitted.is_empty() {
            return Err(CliError::new(
                "not-admitted",
                "no generator is admitted at these parameters",
            ));
        }
        admitted
    } else {
        let mut out = Vec::new();
        for n in names {
            let g = case.generator(n)?;
            if !admitted.iter().any(|a| a.name == g.name) {
                return Err(CliError::new(
                    "not-admitted",
                    format!("{n} is not a symmetry at [{}]", inst.values),
                ));
            }
            out.push(g);
        }
        out
    };
    let gens = chosen
        .iter()
        .map(|g| Ok((g.name.clone(), g.effective().substitute(&inst.values)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let sol = AnsatzSolution::new(case, fam, &inst, false)?;
    let window = Window {
        x: fam.x_window,
        t: fam.t_window,
    };
    let rep = invariance_test(&sol, &gens, &inst.env(), window, samples, seed)?;
    let verdict = match &rep.verdict {
        Verdict::StrictlyNonInvariant => "strictly-non-invariant",
        Verdict::InvariantAlong { .. } => "invariant-along",
    };
    let mut text = header(case, fam, &inst);
    let _ = writeln!(text, "generators {}", rep.generators.join(", "));
    let _ = writeln!(
        text,
        "samples {samples}, seed {seed}, threshold {:e}",
        rep.threshold
    );
    let sv: Vec<String> = rep
        .singular_values
        .iter()
        .map(|s| format!("{s:.3e}"))
        .collect();
    let _ = writeln!(text, "singular values {}", sv.join(" "));
    let _ = writeln!(text, "verdict {verdict}");
    if let Verdict::InvariantAlong { kernel } = &rep.verdict {
        for k in kernel {
            let terms: Vec<String> = k
                .iter()
                .zip(&rep.generators)
                .map(|(c, n)| format!("{c:+.6}*{n}"))
                .collect();
            let _ = writeln!(text, "  kernel {}", terms.join(" "));
        }
    }
    let passed = expect_invariant.map_or(true, |e| e == rep.is_invariant());
    let mut json = base_json(case, fam, &inst);
    json["seed"] = json!(seed);
    let report = serde_json::to_value(&rep).map_err(|e| CliError::new("io", e.to_string()))?;
    if let (Value::Object(dst), Value::Object(src)) = (&mut json, report) {
        dst.extend(src);
    }
    json["passed"] = json!(passed);
    finish(
        passed,
        format!("verdict {verdict} is not the expected one"),
        text,
        json,
        None,
    )
}
