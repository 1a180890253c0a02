use symred::catalog::Catalog;
use symred::invariance::{invariance_test, InvarianceError, Verdict, Window};
use symred::jet::PointGenerator;
use symred::numerics::Instance;
use symred::pdecheck::{AnsatzSolution, ExprSolution};
use symred::{parse, Binding};

fn run(fid: &str, given: &str, names: &[&str], seed: u64) -> symred::invariance::InvarianceReport {
    run_n(fid, given, names, seed, 50)
}

fn run_n(
    fid: &str,
    given: &str,
    names: &[&str],
    seed: u64,
    samples: usize,
) -> symred::invariance::InvarianceReport {
    let cat = Catalog::builtin();
    let fam = cat.get_family(fid).unwrap();
    let case = cat.get_case(&fam.case).unwrap();
    let inst = Instance::new(fam, case, &Binding::parse(given).unwrap()).unwrap();
    let gens: Vec<_> = names
        .iter()
        .map(|n| {
            let g = case
                .generator(n)
                .unwrap()
                .effective()
                .substitute(&inst.values)
                .unwrap();
            (n.to_string(), g)
        })
        .collect();
    let sol = AnsatzSolution::new(case, fam, &inst, false).unwrap();
    let w = Window {
        x: fam.x_window,
        t: fam.t_window,
    };
    invariance_test(&sol, &gens, &inst.env(), w, samples, seed).unwrap()
}

#[test]
fn verdicts_do_not_depend_on_the_seed() {
    for seed in [1, 2, 3, 99] {
        assert!(!run("tanh-general", "", &["X1", "X2", "X3"], seed).is_invariant());
        assert!(!run("erf", "a4=0, a5=0, c1=1/4", &["W1", "W2"], seed).is_invariant());
        assert!(run("poly-exp", "a4=0, a5=0", &["Y1", "Y2h", "Y3", "Y4"], seed).is_invariant());
    }
}

#[test]
fn verdicts_survive_doubling_the_samples() {
    let cases: [(&str, &str, &[&str]); 3] = [
        ("tanh-resonant", "", &["X1", "X2", "X3r"]),
        ("poly-cubic", "a4=0", &["Y1", "Y2h", "Y3"]),
        ("incomplete-gamma", "a4=0", &["Z1", "Z2"]),
    ];
    for (fid, given, names) in cases {
        let a = run_n(fid, given, names, 4, 50);
        let b = run_n(fid, given, names, 4, 100);
        assert_eq!(a.kernel_dim(), b.kernel_dim(), "{fid} [{given}]");
    }
}

#[test]
fn case_b_kernel_direction() {
    // The surviving combination is -Y1 + Y2h + a7*Y3 - Y4.
    for a7 in ["1/5", "0", "-1/2"] {
        let r = run(
            "poly-exp",
            &format!("a4=0, a5=0, a7={a7}"),
            &["Y1", "Y2h", "Y3", "Y4"],
            5,
        );
        let Verdict::InvariantAlong { kernel } = &r.verdict else {
            panic!("a7={a7}: {:?}", r.verdict)
        };
        assert_eq!(kernel.len(), 1);
        let a7v = parse(a7).unwrap().eval(&Default::default()).unwrap();
        let v = &kernel[0];
        let s = -v[0];
        let expected = [-1.0, 1.0, a7v, -1.0];
        for (got, want) in v.iter().zip(expected) {
            assert!((got / s - want).abs() < 1e-6, "a7={a7}: {v:?}");
        }
    }
}

#[test]
fn degenerate_sampling_is_reported() {
    let env = Default::default();
    let u = ExprSolution::new(&parse("sqrt(x - 3/2)").unwrap(), &env).unwrap();
    let gens = vec![(
        "dt".to_string(),
        PointGenerator::new(
            parse("0").unwrap(),
            parse("1").unwrap(),
            parse("0").unwrap(),
        ),
    )];
    let w = Window {
        x: (1.0, 2.0),
        t: (0.0, 1.0),
    };
    let e = invariance_test(&u, &gens, &env, w, 50, 0).unwrap_err();
    assert!(
        matches!(e, InvarianceError::DegenerateSampling { attempts: 5, .. }),
        "{e}"
    );
}
