//! Compactly supported diffeomorphisms `Id + g` of the truncated line.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{
    derivative_samples, Grid, GridFunction, Interpolant, TimeGrid, Tolerances, DEFAULT_PAD,
};

/// Increasing map `x ↦ x + g(x)` with `g` vanishing on the pad.
#[derive(Clone, Debug)]
pub struct Diffeo {
    g: GridFunction,
    dg: GridFunction,
    interp: Interpolant,
    tol: Tolerances,
}

impl PartialEq for Diffeo {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g
    }
}

impl Diffeo {
    pub fn identity(grid: Grid) -> Diffeo {
        Diffeo::from_displacement(GridFunction::zeros(grid)).expect("identity is valid")
    }

    pub fn from_displacement(g: GridFunction) -> Result<Diffeo> {
        Diffeo::with_tolerances(g, Tolerances::default())
    }

    pub fn from_fn(grid: Grid, g: impl Fn(f64) -> f64) -> Result<Diffeo> {
        Diffeo::from_displacement(GridFunction::from_fn(grid, g))
    }

    /// Validates slope and pad conditions.
    pub fn with_tolerances(g: GridFunction, tol: Tolerances) -> Result<Diffeo> {
        let dg = g.derivative(1)?;
        if let Some((i, v)) = dg
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(1.0 + **v > tol.slope_floor))
        {
            return Err(Error::NotDiffeomorphism(format!(
                "slope 1 + g' = {:.3e} at x = {:.6}",
                1.0 + v,
                g.grid().x(i)
            )));
        }
        g.check_compact(DEFAULT_PAD, tol.boundary_tol)?;
        let interp = Interpolant::monotone_displacement(&g)?;
        Ok(Diffeo { g, dg, interp, tol })
    }

    pub fn grid(&self) -> &Grid {
        self.g.grid()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn displacement(&self) -> &GridFunction {
        &self.g
    }

    /// `g'` on the grid.
    pub fn displacement_slope(&self) -> &GridFunction {
        &self.dg
    }

    /// `φ(x_i)` on the grid.
    pub fn map_values(&self) -> GridFunction {
        let grid = *self.grid();
        GridFunction::from_fn(grid, |x| x).zip_with(&self.g, |x, g| x + g).unwrap()
    }

    /// `φ'(x_i) = 1 + g'(x_i)`.
    pub fn slope(&self) -> GridFunction {
        self.dg.map(|v| 1.0 + v)
    }

    /// `φ(x)` by monotone interpolation, identity outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }

    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        self.interp.eval_with_derivative(x)
    }

    /// `g(x) = φ(x) - x`.
    pub fn eval_displacement(&self, x: f64) -> f64 {
        self.interp.eval_data(x)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.g.max_abs() <= tol
    }

    /// `φ ∘ ψ`.
    pub fn compose(&self, psi: &Diffeo) -> Result<Diffeo> {
        if !self.grid().same_as(psi.grid()) {
            return Err(Error::GridMismatch("compose on different grids".into()));
        }
        let grid = *self.grid();
        let vals: Vec<f64> = (0..grid.n())
            .map(|i| {
                let x = grid.x(i);
                let gp = psi.g.values()[i];
                gp + self.interp.eval_data(x + gp)
            })
            .collect();
        let g = GridFunction::new(grid, vals)?;
        Diffeo::with_tolerances(g, self.tol).map_err(|e| match e {
            Error::NotDiffeomorphism(m) => Error::MonotonicityLost(m),
            other => other,
        })
    }

    /// `φ⁻¹` by root finding on the monotone interpolant.
    pub fn inverse(&self) -> Result<Diffeo> {
        let grid = *self.grid();
        let inv_tol = self.tol.inv_tol;
        let vals: Vec<f64> = (0..grid.n())
            .map(|i| {
                let y = grid.x(i);
                self.interp.solve(y, inv_tol) - y
            })
            .collect();
        Diffeo::with_tolerances(GridFunction::new(grid, vals)?, self.tol)
    }
}

/// Sum of up to three Gaussians that are below `1e-13` outside the middle 70%
/// of the grid,
/// rescaled so that `‖g‖∞ ≤ max_amp` and `‖g'‖∞ ≤ max_slope`.
pub fn random_bump_displacement<R: Rng + ?Sized>(
    grid: Grid,
    rng: &mut R,
    max_amp: f64,
    max_slope: f64,
) -> GridFunction {
    let span = grid.x_max() - grid.x_min();
    let mid = 0.5 * (grid.x_min() + grid.x_max());
    let count = rng.random_range(1..=3);
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            let c = mid + rng.random_range(-0.1..0.1) * span;
            let w = rng.random_range(0.035..0.05) * span;
            let a = rng.random_range(-1.0..1.0);
            (c, w, a)
        })
        .collect();
    let g = GridFunction::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(c, w, a)| {
                let r = (x - c) / w;
                a * (-r * r).exp()
            })
            .sum()
    });
    let amp = g.max_abs();
    let slope = g.derivative(1).map(|d| d.max_abs()).unwrap_or(0.0);
    if amp == 0.0 {
        return g;
    }
    let mut s = max_amp / amp;
    if slope > 0.0 {
        s = s.min(max_slope / slope);
    }
    let s = s * rng.random_range(0.5..1.0);
    g.map(|v| v * s)
}

/// Time-indexed frames on a uniform time grid.
#[derive(Clone, Debug)]
pub struct DiscretePath<F> {
    times: TimeGrid,
    frames: Vec<F>,
}

impl<F> DiscretePath<F> {
    pub fn new(times: TimeGrid, frames: Vec<F>) -> Result<DiscretePath<F>> {
        if frames.len() != times.m() {
            return Err(Error::InvalidParameter(format!(
                "{} frames for {} times",
                frames.len(),
                times.m()
            )));
        }
        Ok(DiscretePath { times, frames })
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn frames(&self) -> &[F] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<F> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn first(&self) -> &F {
        &self.frames[0]
    }

    pub fn last(&self) -> &F {
        &self.frames[self.frames.len() - 1]
    }
}

impl DiscretePath<Diffeo> {
    /// Path that stays at `phi` over `times`.
    pub fn constant(times: TimeGrid, phi: &Diffeo) -> DiscretePath<Diffeo> {
        DiscretePath {
            times,
            frames: vec![phi.clone(); times.m()],
        }
    }

    pub fn grid(&self) -> &Grid {
        self.frames[0].grid()
    }

    /// `φ_t` per frame, 6th-order differences in time.
    pub fn time_derivative(&self) -> Result<Vec<GridFunction>> {
        let grid = *self.grid();
        let m = self.frames.len();
        let n = grid.n();
        let dt = self.times.dt();
        let columns: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let series: Vec<f64> = self.frames.iter().map(|f| f.g.values()[i]).collect();
                derivative_samples(&series, dt, 1)
            })
            .collect::<Result<_>>()?;
        (0..m)
            .map(|k| GridFunction::new(grid, columns.iter().map(|c| c[k]).collect()))
            .collect()
    }
}

/// Right logarithmic derivative `u = φ_t ∘ φ⁻¹` of each frame.
pub fn log_derivative_path(path: &DiscretePath<Diffeo>) -> Result<Vec<GridFunction>> {
    let phi_t = path.time_derivative()?;
    path.frames()
        .par_iter()
        .zip(phi_t.par_iter())
        .map(|(phi, vt)| {
            let inv = phi.inverse()?;
            let it = vt.interpolant();
            let grid = *phi.grid();
            Ok(GridFunction::from_fn(grid, |y| {
                it.eval(y + inv.eval_displacement(y))
            }))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump_diffeo(grid: Grid, c: f64, amp: f64) -> Diffeo {
        Diffeo::from_fn(grid, |x| amp * (-(x - c) * (x - c)).exp() * (x - c).cos()).unwrap()
    }

    #[test]
    fn identity_behaves() {
        let grid = Grid::symmetric(10.0, 401).unwrap();
        let id = Diffeo::identity(grid);
        let phi = bump_diffeo(grid, 0.5, 0.3);
        assert!(id.compose(&phi).unwrap().displacement().sup_distance(phi.displacement()).unwrap() < 1e-12);
        assert!(id.inverse().unwrap().is_identity(1e-14));
    }

    #[test]
    fn rejects_folding_maps() {
        let grid = Grid::symmetric(10.0, 401).unwrap();
        let r = Diffeo::from_fn(grid, |x| -2.0 * (-(x * x)).exp() * x);
        assert!(matches!(r, Err(Error::NotDiffeomorphism(_))));
    }

    #[test]
    fn rejects_data_on_pad() {
        let grid = Grid::symmetric(10.0, 401).unwrap();
        let r = Diffeo::from_fn(grid, |x| 0.01 * (x / 10.0).sin());
        assert!(matches!(r, Err(Error::SupportEscape(_))));
    }

    #[test]
    fn eval_is_identity_outside() {
        let grid = Grid::symmetric(10.0, 401).unwrap();
        let phi = bump_diffeo(grid, 0.0, 0.3);
        assert_eq!(phi.eval(12.0), 12.0);
        assert!((phi.eval(9.5) - 9.5).abs() < 1e-14);
    }
}
