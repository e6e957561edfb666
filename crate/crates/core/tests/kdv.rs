use virasoro_core::geodesic::{flow_from_velocity, kdv_solve, momentum_along, soliton, StepRule};
use virasoro_core::grid::{Grid, GridFunction};

#[test]
fn short_soliton_run() {
    let (a, k) = (1.0, 0.4);
    let grid = Grid::symmetric(50.0, 1024).unwrap();
    let u0 = GridFunction::from_fn(grid, |x| soliton(a, k, x, 0.0));
    let dt = StepRule::default().max_dt(&u0, a);
    let sol = kdv_solve(&u0, a, 0.2, dt, 200).unwrap();
    let last = sol.states.last().unwrap();
    let exact = GridFunction::from_fn(grid, |x| soliton(a, k, x, 0.2));
    let err = last.zip_with(&exact, |p, q| (p - q) * (p - q)).unwrap().integrate().sqrt();
    assert!(err < 1e-6, "L² error {err:e}");
    let mass = (last.integrate() - u0.integrate()).abs();
    assert!(mass < 1e-10, "mass change {mass:e}");

    let flow = flow_from_velocity(&sol.states, sol.times.dt()).unwrap();
    let m = momentum_along(&flow, a).unwrap();
    let drift = m.last().unwrap().sup_distance(&m[0]).unwrap() / m[0].max_abs();
    assert!(drift < 1e-6, "momentum drift {drift:e}");
}

#[test]
fn l2_norm_is_conserved() {
    let grid = Grid::symmetric(40.0, 1024).unwrap();
    let u0 = GridFunction::from_fn(grid, |x| 0.3 * (-x * x / 4.0).exp());
    let dt = StepRule::default().max_dt(&u0, 1.0);
    let sol = kdv_solve(&u0, 1.0, 1.0, dt, 1000).unwrap();
    let norm = |u: &GridFunction| u.map(|v| v * v).integrate();
    let n0 = norm(&u0);
    for u in &sol.states {
        assert!((norm(u) - n0).abs() < 1e-6 * n0);
    }
}
