//! KdV as the geodesic equation, flow reconstruction, horizontal lifts and
//! path energies.

use std::io::Write;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{
    cumulative_integral, derivative_samples, fornberg_weights, integrate_samples, Grid,
    GridFunction, TimeGrid,
};
use crate::virasoro::{schwartzian, vir_mul, VirElement};

pub use crate::diffeo::{log_derivative_path, DiscretePath};
use crate::diffeo::Diffeo;

/// Velocity `u` with constant central charge `a` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicState {
    pub u: GridFunction,
    pub a: f64,
    pub t: f64,
}

/// Centered 6th-order odd derivative with zero values beyond both ends.
///
/// Skew-symmetric, so the semi-discrete KdV flow has no growing modes at
/// the boundary.
fn odd_derivative_zero_ext(values: &[f64], h: f64, order: usize) -> Vec<f64> {
    static W1: OnceLock<Vec<f64>> = OnceLock::new();
    static W3: OnceLock<Vec<f64>> = OnceLock::new();
    let (cell, radius) = if order == 1 { (&W1, 3) } else { (&W3, 4) };
    let w = cell.get_or_init(|| {
        let z: Vec<f64> = (0..=2 * radius).map(|j| j as f64 - radius as f64).collect();
        fornberg_weights(0.0, &z, order)[order].clone()
    });
    let scale = h.powi(order as i32).recip();
    let mut padded = vec![0.0; values.len() + 2 * radius];
    padded[radius..radius + values.len()].copy_from_slice(values);
    padded
        .windows(2 * radius + 1)
        .map(|win| win.iter().zip(w).map(|(v, c)| v * c).sum::<f64>() * scale)
        .collect()
}

/// `u_t = -3 u u_x - a u_xxx`, written as `-(3/2 u² + a u_xx)_x`.
pub fn kdv_rhs(u: &GridFunction, a: f64) -> Result<GridFunction> {
    let h = u.grid().h();
    let flux: Vec<f64> = u.values().iter().map(|v| 1.5 * v * v).collect();
    let df = odd_derivative_zero_ext(&flux, h, 1);
    let d3 = odd_derivative_zero_ext(u.values(), h, 3);
    let vals = df.iter().zip(&d3).map(|(f, t)| -f - a * t).collect();
    GridFunction::new(*u.grid(), vals)
}

/// Constants of the explicit step rule `dt ≤ min(C₁ h/‖u‖∞, C₂ h³/|a|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRule {
    pub c1: f64,
    pub c2: f64,
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule { c1: 0.2, c2: 0.05 }
    }
}

impl StepRule {
    pub fn max_dt(&self, u: &GridFunction, a: f64) -> f64 {
        let h = u.grid().h();
        let adv = if u.max_abs() > 0.0 {
            self.c1 * h / u.max_abs()
        } else {
            f64::INFINITY
        };
        let disp = if a != 0.0 {
            self.c2 * h.powi(3) / a.abs()
        } else {
            f64::INFINITY
        };
        adv.min(disp)
    }
}

/// Traveling wave of `u_t + 3uu_x + a u_xxx = 0` for `a > 0`.
pub fn soliton(a: f64, k: f64, x: f64, t: f64) -> f64 {
    let c = 4.0 * a * k * k;
    let s = 1.0 / (k * (x - c * t)).cosh();
    c * s * s
}

/// States of a KdV integration, stored every `stride` steps.
#[derive(Clone, Debug)]
pub struct KdvSolution {
    pub times: TimeGrid,
    pub states: Vec<GridFunction>,
    pub a: f64,
    pub dt: f64,
    pub steps: usize,
}

/// Classical RK4 for the KdV equation.
///
/// The step count is the smallest multiple of `stride` with step `≤ dt`; the
/// stored states are then uniformly spaced on `[0, t_final]`.
pub fn kdv_solve(
    u0: &GridFunction,
    a: f64,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<KdvSolution> {
    if !(t_final > 0.0 && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("T = {t_final}, dt = {dt}")));
    }
    let stride = stride.max(1);
    let blocks = (t_final / (dt * stride as f64)).ceil().max(1.0) as usize;
    let steps = blocks * stride;
    let dt = t_final / steps as f64;
    let limit = 10.0 * u0.max_abs().max(1e-300);
    let mut u = u0.clone();
    let mut states = vec![u.clone()];
    let n = u.grid().n();
    let axpy = |base: &GridFunction, k: &GridFunction, s: f64| -> GridFunction {
        let vals = base
            .values()
            .iter()
            .zip(k.values())
            .map(|(b, k)| b + s * k)
            .collect();
        GridFunction::new(*base.grid(), vals).unwrap()
    };
    for step in 1..=steps {
        let k1 = kdv_rhs(&u, a)?;
        let k2 = kdv_rhs(&axpy(&u, &k1, 0.5 * dt), a)?;
        let k3 = kdv_rhs(&axpy(&u, &k2, 0.5 * dt), a)?;
        let k4 = kdv_rhs(&axpy(&u, &k3, dt), a)?;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                u.values()[i]
                    + dt / 6.0
                        * (k1.values()[i]
                            + 2.0 * k2.values()[i]
                            + 2.0 * k3.values()[i]
                            + k4.values()[i])
            })
            .collect();
        u = GridFunction::new(*u.grid(), vals)?;
        let m = u.max_abs();
        if !m.is_finite() || (u0.max_abs() > 0.0 && m > limit) {
            return Err(Error::Unstable(format!(
                "‖u‖∞ = {m:.3e} at t = {:.6}",
                step as f64 * dt
            )));
        }
        if step % stride == 0 {
            states.push(u.clone());
        }
    }
    Ok(KdvSolution {
        times: TimeGrid::new(0.0, t_final, blocks + 1)?,
        states,
        a,
        dt,
        steps,
    })
}

fn midpoint_weights(k: usize, m: usize) -> [(usize, f64); 4] {
    if k == 0 {
        [(0, 5.0 / 16.0), (1, 15.0 / 16.0), (2, -5.0 / 16.0), (3, 1.0 / 16.0)]
    } else if k + 2 == m {
        [
            (m - 4, 1.0 / 16.0),
            (m - 3, -5.0 / 16.0),
            (m - 2, 15.0 / 16.0),
            (m - 1, 5.0 / 16.0),
        ]
    } else {
        [
            (k - 1, -1.0 / 16.0),
            (k, 9.0 / 16.0),
            (k + 1, 9.0 / 16.0),
            (k + 2, -1.0 / 16.0),
        ]
    }
}

/// Integrates `φ_t = u∘φ` from the identity for velocities sampled every `dt`.
///
/// RK4 per particle; the half-step velocity comes from cubic interpolation in
/// time, the spatial evaluation from cubic interpolation on the grid.
pub fn flow_from_velocity(u_seq: &[GridFunction], dt: f64) -> Result<DiscretePath<Diffeo>> {
    let m = u_seq.len();
    if m < 2 {
        return Err(Error::InvalidParameter("need at least two velocity samples".into()));
    }
    let grid = *u_seq[0].grid();
    let interps: Vec<_> = u_seq.iter().map(|u| u.interpolant()).collect();
    let mut pos = grid.nodes();
    let mut frames = vec![Diffeo::identity(grid)];
    for k in 0..m - 1 {
        let mid = if m >= 4 {
            let vals = (0..grid.n())
                .map(|i| {
                    midpoint_weights(k, m)
                        .iter()
                        .map(|&(j, w)| w * u_seq[j].values()[i])
                        .sum()
                })
                .collect();
            GridFunction::new(grid, vals)?
        } else {
            u_seq[k].zip_with(&u_seq[k + 1], |p, q| 0.5 * (p + q))?
        };
        let mid = mid.interpolant();
        let (u0, u1) = (&interps[k], &interps[k + 1]);
        pos.par_iter_mut().for_each(|x| {
            let k1 = u0.eval(*x);
            let k2 = mid.eval(*x + 0.5 * dt * k1);
            let k3 = mid.eval(*x + 0.5 * dt * k2);
            let k4 = u1.eval(*x + dt * k3);
            *x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        });
        let g = GridFunction::new(grid, pos.iter().zip(grid.nodes()).map(|(p, x)| p - x).collect())?;
        let frame = Diffeo::from_displacement(g).map_err(|e| match e {
            Error::NotDiffeomorphism(s) => Error::MonotonicityLost(s),
            other => other,
        })?;
        frames.push(frame);
    }
    DiscretePath::new(TimeGrid::new(0.0, dt * (m - 1) as f64, m)?, frames)
}

/// Per-row derivative fields of a path `φ(t, x)` on a space grid.
#[derive(Clone, Debug, Default)]
pub struct PathRow {
    pub phi_t: Vec<f64>,
    pub phi_x: Vec<f64>,
    pub phi_tx: Vec<f64>,
    pub phi_xx: Vec<f64>,
}

/// Source of derivative rows for a path on `times × grid`.
pub trait PathSampler: Sync {
    fn times(&self) -> TimeGrid;
    fn grid(&self) -> Grid;
    fn row(&self, k: usize) -> Result<PathRow>;
}

/// Row-wise densities of a path.
#[derive(Clone, Debug)]
pub struct PathMeasures {
    pub times: TimeGrid,
    /// `∫ φ_t² φ_x dx` per time row.
    pub energy_density: Vec<f64>,
    /// `∫ φ_tx φ_xx / φ_x² dx` per time row.
    pub drift_density: Vec<f64>,
}

impl PathMeasures {
    pub fn report(&self) -> EnergyReport {
        EnergyReport::from_densities(&self.times, &self.energy_density)
    }

    /// `∫∫ φ_tx φ_xx / φ_x² dx dt` over the whole time grid.
    pub fn drift(&self) -> f64 {
        integrate_samples(&self.drift_density, self.times.dt())
    }

    /// Drift over rows `k0..=k1`.
    pub fn drift_between(&self, k0: usize, k1: usize) -> f64 {
        integrate_samples(&self.drift_density[k0..=k1], self.times.dt())
    }

    pub fn cumulative_drift(&self) -> Vec<f64> {
        cumulative_integral(&self.drift_density, self.times.dt())
    }
}

/// Reduces a sampler row by row (rows in parallel, sums in order).
pub fn measure_path(sampler: &dyn PathSampler) -> Result<PathMeasures> {
    let times = sampler.times();
    let h = sampler.grid().h();
    let rows: Vec<(f64, f64)> = (0..times.m())
        .into_par_iter()
        .map(|k| {
            let r = sampler.row(k)?;
            row_densities(&r, h).map_err(|e| match e {
                Error::NotDiffeomorphism(s) => {
                    Error::NotDiffeomorphism(format!("{s} at t = {:.6}", times.t(k)))
                }
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PathMeasures {
        times,
        energy_density: rows.iter().map(|r| r.0).collect(),
        drift_density: rows.iter().map(|r| r.1).collect(),
    })
}

/// `(∫φ_t²φ_x, ∫φ_txφ_xx/φ_x²)` for one row.
pub fn row_densities(r: &PathRow, h: f64) -> Result<(f64, f64)> {
    let n = r.phi_x.len();
    let mut e = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let px = r.phi_x[i];
        if !(px > 0.0) {
            return Err(Error::NotDiffeomorphism(format!("φ_x = {px:.3e}")));
        }
        e.push(r.phi_t[i] * r.phi_t[i] * px);
        d.push(r.phi_tx[i] * r.phi_xx[i] / (px * px));
    }
    Ok((integrate_samples(&e, h), integrate_samples(&d, h)))
}

/// Finite-difference sampler for a path of diffeomorphisms.
pub struct DiffeoPathSampler<'a> {
    path: &'a DiscretePath<Diffeo>,
    phi_t: Vec<GridFunction>,
}

impl<'a> DiffeoPathSampler<'a> {
    pub fn new(path: &'a DiscretePath<Diffeo>) -> Result<DiffeoPathSampler<'a>> {
        Ok(DiffeoPathSampler {
            path,
            phi_t: path.time_derivative()?,
        })
    }

    pub fn phi_t(&self) -> &[GridFunction] {
        &self.phi_t
    }
}

impl PathSampler for DiffeoPathSampler<'_> {
    fn times(&self) -> TimeGrid {
        *self.path.times()
    }

    fn grid(&self) -> Grid {
        *self.path.grid()
    }

    fn row(&self, k: usize) -> Result<PathRow> {
        let f = &self.path.frames()[k];
        let h = f.grid().h();
        Ok(PathRow {
            phi_t: self.phi_t[k].values().to_vec(),
            phi_x: f.slope().into_values(),
            phi_tx: derivative_samples(self.phi_t[k].values(), h, 1)?,
            phi_xx: derivative_samples(f.displacement().values(), h, 2)?,
        })
    }
}

/// Energy `∫∫ e dt`, length `∫√e dt` and the largest `√e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub energy: f64,
    pub length: f64,
    pub max_step_speed: f64,
}

impl EnergyReport {
    pub fn zero() -> EnergyReport {
        EnergyReport {
            energy: 0.0,
            length: 0.0,
            max_step_speed: 0.0,
        }
    }

    pub fn from_densities(times: &TimeGrid, e: &[f64]) -> EnergyReport {
        let dt = times.dt();
        let speed: Vec<f64> = e.iter().map(|v| v.max(0.0).sqrt()).collect();
        EnergyReport {
            energy: integrate_samples(e, dt),
            length: integrate_samples(&speed, dt),
            max_step_speed: speed.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// `L² ≤ span·E` up to rounding.
    pub fn satisfies_cauchy_schwarz(&self, span: f64) -> bool {
        self.length * self.length <= span * self.energy * (1.0 + 1e-12) + 1e-300
    }

    /// Report of the path with energies scaled by `s³` (dilation by `s`).
    pub fn dilated(&self, s: f64) -> EnergyReport {
        let l = s.powf(1.5);
        EnergyReport {
            energy: self.energy * s * s * s,
            length: self.length * l,
            max_step_speed: self.max_step_speed * l,
        }
    }

    /// Report of two paths traversed one after another.
    pub fn concat(&self, other: &EnergyReport) -> EnergyReport {
        EnergyReport {
            energy: self.energy + other.energy,
            length: self.length + other.length,
            max_step_speed: self.max_step_speed.max(other.max_step_speed),
        }
    }
}

fn checked(report: EnergyReport, times: &TimeGrid) -> Result<EnergyReport> {
    if report.satisfies_cauchy_schwarz(times.span()) {
        Ok(report)
    } else {
        Err(Error::InvalidParameter(format!(
            "Cauchy-Schwarz violated: L² = {:.6e} > span·E = {:.6e}",
            report.length * report.length,
            times.span() * report.energy
        )))
    }
}

/// Energy of a base path from the `φ_t² φ_x` form.
pub fn path_energy(path: &DiscretePath<Diffeo>) -> Result<EnergyReport> {
    let s = DiffeoPathSampler::new(path)?;
    checked(measure_path(&s)?.report(), path.times())
}

/// Energy `∫∫ (φ_t∘φ⁻¹)² dx dt` computed through the inverse.
pub fn path_energy_eulerian(path: &DiscretePath<Diffeo>) -> Result<EnergyReport> {
    let u = log_derivative_path(path)?;
    let e: Vec<f64> = u.iter().map(|u| u.map(|v| v * v).integrate()).collect();
    checked(EnergyReport::from_densities(path.times(), &e), path.times())
}

/// Sign and factor multiplying `∫ φ_tx φ_xx / φ_x² dx` in the lift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftConvention {
    pub sign: f64,
    pub factor: f64,
}

impl Default for LiftConvention {
    /// The convention that makes the lifted velocity horizontal for the group
    /// law `(φ,α)(ψ,β) = (φ∘ψ, α+β+c(φ,ψ))`.
    fn default() -> Self {
        LiftConvention {
            sign: 1.0,
            factor: 0.5,
        }
    }
}

impl LiftConvention {
    /// `a(t) = a(0) - ∫∫ φ_tx φ_xx / φ_x²`.
    pub const UNIT_NEGATIVE: LiftConvention = LiftConvention {
        sign: -1.0,
        factor: 1.0,
    };

    /// Multiplier applied to the drift integral.
    pub fn kappa(&self) -> f64 {
        self.sign * self.factor
    }
}

/// Center coordinate `α(t)` of the geodesic with central charge `a`.
pub fn alpha_evolution(path: &DiscretePath<Diffeo>, a: f64) -> Result<Vec<f64>> {
    let m = measure_path(&DiffeoPathSampler::new(path)?)?;
    let rates: Vec<f64> = m.drift_density.iter().map(|d| a + 0.5 * d).collect();
    Ok(cumulative_integral(&rates, path.times().dt()))
}

/// Lifts a base path to the extension with center `a0 + κ ∫∫ φ_tx φ_xx / φ_x²`.
pub fn horizontal_lift(
    path: &DiscretePath<Diffeo>,
    a0: f64,
    convention: LiftConvention,
) -> Result<DiscretePath<VirElement>> {
    let m = measure_path(&DiffeoPathSampler::new(path)?)?;
    let alpha = m.cumulative_drift();
    let k = convention.kappa();
    let frames = path
        .frames()
        .iter()
        .zip(alpha)
        .map(|(phi, c)| VirElement::new(phi.clone(), a0 + k * c))
        .collect();
    DiscretePath::new(*path.times(), frames)
}

/// Base projection of an extended path.
pub fn base_path(path: &DiscretePath<VirElement>) -> DiscretePath<Diffeo> {
    DiscretePath::new(
        *path.times(),
        path.frames().iter().map(|f| f.phi.clone()).collect(),
    )
    .expect("same length")
}

/// Central component `α_t - ½∫ φ_tx φ_xx / φ_x² dx` of the right-translated velocity.
pub fn vertical_components(path: &DiscretePath<VirElement>) -> Result<Vec<f64>> {
    let base = base_path(path);
    let m = measure_path(&DiffeoPathSampler::new(&base)?)?;
    let alpha: Vec<f64> = path.frames().iter().map(|f| f.alpha).collect();
    let da = derivative_samples(&alpha, path.times().dt(), 1)?;
    Ok(da
        .iter()
        .zip(&m.drift_density)
        .map(|(a, d)| a - 0.5 * d)
        .collect())
}

/// Energy of an extended path: base energy plus the squared vertical part.
pub fn vir_path_energy(path: &DiscretePath<VirElement>) -> Result<EnergyReport> {
    let base = base_path(path);
    let m = measure_path(&DiffeoPathSampler::new(&base)?)?;
    let vert = vertical_components(path)?;
    let e: Vec<f64> = m
        .energy_density
        .iter()
        .zip(&vert)
        .map(|(e, v)| e + v * v)
        .collect();
    checked(EnergyReport::from_densities(path.times(), &e), path.times())
}

/// Frame-wise right translation by `g`.
pub fn path_right_translate(
    path: &DiscretePath<VirElement>,
    g: &VirElement,
) -> Result<DiscretePath<VirElement>> {
    let frames = path
        .frames()
        .par_iter()
        .map(|f| vir_mul(f, g))
        .collect::<Result<Vec<_>>>()?;
    DiscretePath::new(*path.times(), frames)
}

/// Momentum field `φ_t φ_x² + a S(φ)` along a base path.
pub fn momentum_along(path: &DiscretePath<Diffeo>, a: f64) -> Result<Vec<GridFunction>> {
    let phi_t = path.time_derivative()?;
    path.frames()
        .par_iter()
        .zip(phi_t.par_iter())
        .map(|(phi, vt)| {
            let s = schwartzian(phi)?;
            let slope = phi.slope();
            let grid = *phi.grid();
            let vals = (0..grid.n())
                .map(|i| {
                    let p = slope.values()[i];
                    vt.values()[i] * p * p + a * s.values()[i]
                })
                .collect();
            GridFunction::new(grid, vals)
        })
        .collect()
}

/// Writes `t,x,phi,alpha` rows, every `stride`-th frame and node.
pub fn write_path_csv<W: Write>(
    path: &DiscretePath<VirElement>,
    stride: usize,
    mut w: W,
) -> Result<()> {
    let stride = stride.max(1);
    writeln!(w, "# schema=1")?;
    writeln!(w, "t,x,phi,alpha")?;
    let last = path.len() - 1;
    for (k, f) in path.frames().iter().enumerate() {
        if k % stride != 0 && k != last {
            continue;
        }
        let t = path.times().t(k);
        let grid = f.phi.grid();
        for i in (0..grid.n()).step_by(stride) {
            let x = grid.x(i);
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                t,
                x,
                x + f.phi.displacement().values()[i],
                f.alpha
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soliton_is_a_traveling_wave() {
        // u_t = -c u_x for the wave; the residual of u_t + 3uu_x + a u_xxx
        // uses the closed-form u_x and a fine difference for u_xxx
        let (a, k): (f64, f64) = (1.0, 0.4);
        let c = 4.0 * a * k * k;
        for x in [-3.0, -0.7, 0.0, 1.1, 4.0] {
            let th = (k * x).tanh();
            let u = c * (1.0 - th * th);
            let ux = -2.0 * k * th * u;
            let hh = 1e-3;
            let f = |y: f64| soliton(a, k, y, 0.0);
            let d3 = (f(x + 2.0 * hh) - 2.0 * f(x + hh) + 2.0 * f(x - hh) - f(x - 2.0 * hh))
                / (2.0 * hh * hh * hh);
            let res = -c * ux + 3.0 * u * ux + a * d3;
            assert!(res.abs() < 1e-5, "x={x} res={res}");
        }
    }

    #[test]
    fn zero_extended_stencils_are_skew() {
        let n = 12;
        for order in [1, 3] {
            let col = |j: usize| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                odd_derivative_zero_ext(&e, 1.0, order)
            };
            for i in 0..n {
                for j in 0..n {
                    assert!((col(j)[i] + col(i)[j]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn step_rule() {
        let grid = Grid::symmetric(10.0, 101).unwrap();
        let u = GridFunction::from_fn(grid, |x| 2.0 * (-(x * x)).exp());
        let r = StepRule::default();
        let h: f64 = 0.2;
        assert!((r.max_dt(&u, 0.0) - 0.2 * h / 2.0).abs() < 1e-15);
        assert!((r.max_dt(&u, 1.0) - 0.05 * h.powi(3)).abs() < 1e-15);
        assert_eq!(r.max_dt(&GridFunction::zeros(grid), 0.0), f64::INFINITY);
    }

    #[test]
    fn lift_conventions() {
        assert_eq!(LiftConvention::default().kappa(), 0.5);
        assert_eq!(LiftConvention::UNIT_NEGATIVE.kappa(), -1.0);
    }

    #[test]
    fn concat_and_dilate() {
        let r = EnergyReport {
            energy: 2.0,
            length: 1.0,
            max_step_speed: 1.0,
        };
        let d = r.dilated(0.25);
        assert!((d.energy - 2.0 / 64.0).abs() < 1e-15);
        assert!((d.length - 0.125).abs() < 1e-15);
        assert_eq!(r.concat(&d).energy, 2.0 + 2.0 / 64.0);
    }
}
