use virasoro_core::diffeo::Diffeo;
use virasoro_core::grid::{bump, Grid, GridFunction};
use virasoro_core::shortpath::{
    connect, corner_sweep, tune_center, ConnectConfig, CornerPathParams, LoopParams,
    TuneConfig,
};
use virasoro_core::virasoro::VirElement;

fn bump_g(grid: Grid, amp: f64, center: f64, width: f64) -> GridFunction {
    GridFunction::from_fn(grid, |x| amp * bump((x - center) / width) / bump(0.0))
}

#[test]
fn three_point_sweep_decreases() {
    let g = bump_g(Grid::symmetric(4.0, 2001).unwrap(), 0.2, -0.5, 1.0);
    let rows = corner_sweep(&CornerPathParams::new(g, 0.2), &[0.2, 0.1, 0.05]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].energy < w[0].energy);
        assert!(w[1].endpoint_err < w[0].endpoint_err);
    }
    for r in &rows {
        assert!(r.length * r.length <= std::f64::consts::PI * r.energy);
    }
}

#[test]
fn loops_reach_both_signs() {
    let cfg = TuneConfig::default();
    let p = LoopParams::default();
    let up = tune_center(0.5, &p, &cfg).unwrap();
    let down = tune_center(-0.5, &p, &cfg).unwrap();
    assert!(up.eps1() > 0.0 && down.eps1() < 0.0);
    assert!((up.achieved_a - 0.5).abs() < 5e-3);
    assert!((down.achieved_a + 0.5).abs() < 5e-3);
}

#[test]
fn connection_reaches_a_moved_target() {
    let grid = Grid::symmetric(2.0, 8001).unwrap();
    let phi = Diffeo::from_displacement(bump_g(grid, 0.02, -1.0, 0.2)).unwrap();
    let target = VirElement::new(phi, -0.3);
    let c = connect(&target, 0.2, &ConnectConfig::default()).unwrap();
    assert!(c.report.length < 0.2);
    assert!(c.endpoint_base_error < 1e-2);
    assert!(c.center_error(-0.3) < 1e-2);
    assert_eq!(c.path.last().alpha, c.endpoint_center);
}
