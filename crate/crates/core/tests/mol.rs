use symred::catalog::Catalog;
use symred::numerics::Instance;
use symred::pdecheck::{mol_error, AnsatzSolution, Grid, PdeError, PdeEval, MOL_TOLERANCES};
use symred::Binding;

#[test]
fn refinement_is_second_order() {
    let cat = Catalog::builtin();
    let case = cat.get_case("A").unwrap();
    let fam = cat.get_family("tanh-resonant").unwrap();
    let inst = Instance::new(fam, case, &Binding::parse("kappa=-1").unwrap()).unwrap();
    let sol = AnsatzSolution::new(case, fam, &inst, false).unwrap();
    let pde = PdeEval::for_case(case, &inst.env()).unwrap();
    let coarse = mol_error(
        &pde,
        &sol,
        &Grid::new(1.0, 2.0, 101).unwrap(),
        0.0,
        0.25,
        MOL_TOLERANCES,
    )
    .unwrap();
    let fine = mol_error(
        &pde,
        &sol,
        &Grid::new(1.0, 2.0, 201).unwrap(),
        0.0,
        0.25,
        MOL_TOLERANCES,
    )
    .unwrap();
    assert!(fine <= 1e-3);
    let ratio = coarse / fine;
    assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn positive_kappa_is_refused() {
    let cat = Catalog::builtin();
    let case = cat.get_case("C").unwrap();
    let fam = cat.get_family("incomplete-gamma").unwrap();
    let inst = Instance::new(fam, case, &Binding::new()).unwrap();
    let sol = AnsatzSolution::new(case, fam, &inst, false).unwrap();
    let pde = PdeEval::for_case(case, &inst.env()).unwrap();
    let grid = Grid::new(1.0, 2.0, 41).unwrap();
    let e = mol_error(&pde, &sol, &grid, 0.0, 0.1, MOL_TOLERANCES).unwrap_err();
    assert!(matches!(e, PdeError::BackwardDiffusion { .. }), "{e}");
}

#[test]
fn case_d_short_horizon() {
    let cat = Catalog::builtin();
    let case = cat.get_case("D").unwrap();
    let fam = cat.get_family("erf").unwrap();
    // a3*kappa must stay positive, so both signs flip.
    let given = Binding::parse("kappa=-1, a3=-1/4, c0=1/2, c1=0, c2=2").unwrap();
    let inst = Instance::new(fam, case, &given).unwrap();
    let sol = AnsatzSolution::new(case, fam, &inst, false).unwrap();
    let pde = PdeEval::for_case(case, &inst.env()).unwrap();
    let grid = Grid::new(1.0, 2.0, 81).unwrap();
    let err = mol_error(&pde, &sol, &grid, 0.0, 0.05, MOL_TOLERANCES).unwrap();
    assert!(err <= 1e-3, "{err:e}");
}
