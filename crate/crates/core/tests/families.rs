use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symred::catalog::Catalog;
use symred::numerics::{integrate, sample_instance, FamilyEval, Instance, SystemEval, Tolerances};
use symred::pdecheck::{residual, residual_convergence, AnsatzSolution, Grid, PdeEval};
use symred::reduction::reduce;
use symred::Binding;

fn fd5(f: &FamilyEval, t: f64, h: f64) -> [f64; 3] {
    let a = f.at(t - 2.0 * h).unwrap();
    let b = f.at(t - h).unwrap();
    let c = f.at(t + h).unwrap();
    let d = f.at(t + 2.0 * h).unwrap();
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = (a[k] - 8.0 * b[k] + 8.0 * c[k] - d[k]) / (12.0 * h);
    }
    out
}

#[test]
fn sampled_families_satisfy_their_systems() {
    let cat = Catalog::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for fam in cat.families() {
        let case = cat.get_case(&fam.case).unwrap();
        for _ in 0..5 {
            let inst = sample_instance(fam, case, &mut rng).unwrap();
            let env = inst.env();
            let ev = FamilyEval::new(fam, &inst).unwrap();
            let sys = case.expected.substitute(&inst.values).unwrap();
            let se = SystemEval::new(&sys, &env).unwrap();
            let (t0, t1) = fam.t_window;
            for k in 0..100 {
                let t = t0 + 2e-4 + (t1 - t0 - 4e-4) * k as f64 / 99.0;
                let d = fd5(&ev, t, 1e-4);
                let r = se.at(&ev.at(t).unwrap()).unwrap();
                for nu in 0..3 {
                    let rel = (d[nu] - r[nu]).abs() / (1.0 + r[nu].abs());
                    assert!(
                        rel <= 1e-9,
                        "{} [{}] t={t} phi{nu}: {rel:e}",
                        fam.id,
                        inst.values
                    );
                }
            }
            let tr = integrate(
                &sys,
                &env,
                ev.at(t0).unwrap(),
                t0,
                t1,
                Tolerances::default(),
                &[t1],
            )
            .unwrap();
            let exact = ev.at(t1).unwrap();
            let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let got = tr.last();
            let err = (0..3).fold(0.0f64, |a, k| a.max((got[k] - exact[k]).abs())) / scale;
            assert!(err <= 1e-6, "{} [{}]: {err:e}", fam.id, inst.values);
        }
    }
}

#[test]
fn exact_residuals_vanish_and_fd_converges() {
    let cat = Catalog::builtin();
    for fam in cat.families() {
        let case = cat.get_case(&fam.case).unwrap();
        let inst = Instance::new(fam, case, &Binding::new()).unwrap();
        let sol = AnsatzSolution::new(case, fam, &inst, false).unwrap();
        let pde = PdeEval::for_case(case, &inst.env()).unwrap();
        let grid = Grid::new(fam.x_window.0, fam.x_window.1, 65).unwrap();
        let times = [fam.t_window.0, 0.3, fam.t_window.1];
        let ex = residual(&pde, &sol, &grid, &times, true).unwrap();
        assert!(
            ex.max_abs_residual <= 1e-9,
            "{}: {:e}",
            fam.id,
            ex.max_abs_residual
        );
        let conv = residual_convergence(&pde, &sol, &grid, &times).unwrap();
        assert!(
            (3.2..=4.8).contains(&conv.ratio),
            "{}: {}",
            fam.id,
            conv.ratio
        );
    }
}

#[test]
fn negative_branch_is_also_a_solution() {
    let cat = Catalog::builtin();
    for case in cat.cases() {
        assert!(
            reduce(&case.rhs(), case.m).unwrap().sign_symmetric,
            "case {}",
            case.id
        );
    }
    for fam in cat.families() {
        let case = cat.get_case(&fam.case).unwrap();
        let inst = Instance::new(fam, case, &Binding::new()).unwrap();
        let sol = AnsatzSolution::new(case, fam, &inst, true).unwrap();
        let pde = PdeEval::for_case(case, &inst.env()).unwrap();
        let grid = Grid::new(fam.x_window.0, fam.x_window.1, 33).unwrap();
        let r = residual(&pde, &sol, &grid, &[0.1, 0.4], true).unwrap();
        assert!(r.max_abs_residual <= 1e-9, "{}", fam.id);
        assert!(r.points.iter().all(|p| p.u < 0.0));
    }
}

#[test]
fn mismatched_parameters_leave_a_residual() {
    let cat = Catalog::builtin();
    for fam in cat.families() {
        let case = cat.get_case(&fam.case).unwrap();
        let inst = Instance::new(fam, case, &Binding::new()).unwrap();
        let sol = AnsatzSolution::new(case, fam, &inst, false).unwrap();
        let mut env = inst.env();
        *env.get_mut("kappa").unwrap() *= 1.1;
        let pde = PdeEval::for_case(case, &env).unwrap();
        let grid = Grid::new(fam.x_window.0, fam.x_window.1, 33).unwrap();
        let r = residual(&pde, &sol, &grid, &[0.2], true).unwrap();
        assert!(
            r.max_abs_residual > 1e-4,
            "{}: {:e}",
            fam.id,
            r.max_abs_residual
        );
    }
}
