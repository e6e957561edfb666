//! Loops of diffeomorphisms that shift the center: a forward path built from
//! the family `f` with a modulated mollifier width, followed by the return path
//! at constant width.

use rayon::prelude::*;

use super::family::{compute_i, FFamily, FValues};
use crate::diffeo::{DiscretePath, Diffeo};
use crate::error::{Error, Result};
use crate::geodesic::{measure_path, EnergyReport, PathMeasures, PathRow, PathSampler};
use crate::grid::{
    bump, bump_cdf, bump_derivative, gl_integrate, integrate_samples, Grid, GridFunction,
    TimeGrid,
};

/// Smooth profile `g` rising from 0 to 1, flat, then falling back to 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauProfile {
    pub rise_center: f64,
    pub rise_half_width: f64,
    pub fall_center: f64,
    pub fall_half_width: f64,
}

impl Default for PlateauProfile {
    fn default() -> Self {
        // rise on [0.1, 0.8], plateau [0.8, 5.2], fall on [5.2, 7.7]
        PlateauProfile {
            rise_center: 0.45,
            rise_half_width: 0.35,
            fall_center: 6.45,
            fall_half_width: 1.25,
        }
    }
}

impl PlateauProfile {
    /// `(g, g', g'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (ur, wr) = ((x - self.rise_center) / self.rise_half_width, self.rise_half_width);
        let (uf, wf) = ((x - self.fall_center) / self.fall_half_width, self.fall_half_width);
        let (r, r1, r2) = (bump_cdf(ur), bump(ur) / wr, bump_derivative(ur) / (wr * wr));
        let (q, q1, q2) = (
            1.0 - bump_cdf(uf),
            -bump(uf) / wf,
            -bump_derivative(uf) / (wf * wf),
        );
        (r * q, r1 * q + r * q1, r2 * q + 2.0 * r1 * q1 + r * q2)
    }

    pub fn support(&self) -> (f64, f64) {
        (
            self.rise_center - self.rise_half_width,
            self.fall_center + self.fall_half_width,
        )
    }

    /// Interval on which `g ≡ 1`.
    pub fn plateau(&self) -> (f64, f64) {
        (
            self.rise_center + self.rise_half_width,
            self.fall_center - self.fall_half_width,
        )
    }

    /// Largest `-g'`.
    pub fn max_descent(&self) -> f64 {
        bump(0.0) / self.fall_half_width
    }
}

/// Affine conjugation `x ↦ offset + scale·x` applied to the frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Placement {
    pub offset: f64,
    pub scale: f64,
}

impl Default for Placement {
    fn default() -> Self {
        Placement {
            offset: 0.0,
            scale: 1.0,
        }
    }
}

/// How `λ` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaRule {
    Fixed(f64),
    /// `λ = 1 − ε₀`
    OneMinusEps,
}

impl LambdaRule {
    pub fn lambda(&self, eps0: f64) -> f64 {
        match *self {
            LambdaRule::Fixed(l) => l,
            LambdaRule::OneMinusEps => 1.0 - eps0,
        }
    }
}

/// Parameters of the center-shifting loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopParams {
    pub lambda: f64,
    pub t_total: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub profile: PlateauProfile,
    pub placement: Placement,
    /// Space samples per `ε` (at the smallest `ε(t)`).
    pub points_per_eps: usize,
    /// Time steps over `[0, T]`; a multiple of 12.
    pub time_steps: usize,
}

impl Default for LoopParams {
    fn default() -> Self {
        LoopParams {
            lambda: 0.9,
            t_total: 6.0,
            eps0: 0.02,
            eps1: 0.0,
            profile: PlateauProfile::default(),
            placement: Placement::default(),
            points_per_eps: 12,
            time_steps: 600,
        }
    }
}

impl LoopParams {
    pub fn t_a(&self) -> f64 {
        self.t_total / 3.0
    }

    pub fn t_e(&self) -> f64 {
        2.0 * self.t_total / 3.0
    }

    fn bump_half_width(&self) -> f64 {
        0.5 * (self.t_e() - self.t_a())
    }

    /// Height-one bump on `(T_A, T_E)`.
    pub fn b(&self, t: f64) -> f64 {
        bump((t - 0.5 * self.t_total) / self.bump_half_width()) / bump(0.0)
    }

    pub fn b_dot(&self, t: f64) -> f64 {
        let w = self.bump_half_width();
        bump_derivative((t - 0.5 * self.t_total) / w) / (bump(0.0) * w)
    }

    /// `ε(t) = ε₀ + ε₁ ε₀^{3/2} b(t)`.
    pub fn eps(&self, t: f64) -> f64 {
        self.eps0 + self.eps1 * self.eps0.powf(1.5) * self.b(t)
    }

    pub fn eps_dot(&self, t: f64) -> f64 {
        self.eps1 * self.eps0.powf(1.5) * self.b_dot(t)
    }

    pub fn eps_max(&self) -> f64 {
        self.eps0 * (1.0 + self.eps1.max(0.0) * self.eps0.sqrt())
    }

    pub fn eps_min(&self) -> f64 {
        self.eps0 * (1.0 + self.eps1.min(0.0) * self.eps0.sqrt())
    }

    /// Bound `‖ε̇‖∞ ≤ ‖ḃ‖∞ |ε₁| ε₀^{3/2}`.
    pub fn eps_dot_bound(&self) -> f64 {
        let w = self.bump_half_width();
        let db = (0..=2000)
            .map(|j| bump_derivative(-1.0 + j as f64 / 1000.0).abs())
            .fold(0.0, f64::max)
            / (bump(0.0) * w);
        db * self.eps1.abs() * self.eps0.powf(1.5)
    }

    /// Window on which `g ≡ 1` is required.
    pub fn required_window(&self) -> (f64, f64) {
        let e = self.eps_max();
        (
            (self.t_a() - 1.0 - 2.0 * e) / self.lambda,
            (self.t_e() + e) / self.lambda,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidParameter(format!("lambda = {}", self.lambda)));
        }
        if !(self.eps0 > 0.0) || !(self.eps_min() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon range [{}, {}]",
                self.eps_min(),
                self.eps_max()
            )));
        }
        if self.time_steps == 0 || self.time_steps % 12 != 0 {
            return Err(Error::InvalidParameter(format!(
                "time_steps = {} is not a positive multiple of 12",
                self.time_steps
            )));
        }
        if self.points_per_eps < 4 {
            return Err(Error::UnderResolved(format!(
                "{} points per epsilon",
                self.points_per_eps
            )));
        }
        if !(self.placement.scale > 0.0) {
            return Err(Error::InvalidParameter("placement scale must be positive".into()));
        }
        let (lo, hi) = self.required_window();
        let (p_lo, p_hi) = self.profile.plateau();
        if lo < p_lo || hi > p_hi {
            return Err(Error::PlateauViolated(format!(
                "g not ≡ 1 on required window [{lo:.4}, {hi:.4}] (plateau [{p_lo:.4}, {p_hi:.4}])"
            )));
        }
        let (s_lo, _) = self.profile.support();
        if s_lo < self.eps_max() / self.lambda {
            return Err(Error::PlateauViolated(format!(
                "support of g starts at {s_lo} < ε/λ, the path does not start at Id"
            )));
        }
        if (1.0 + self.eps_max()) * self.profile.max_descent() >= 1.0 {
            return Err(Error::NotDiffeomorphism(
                "(1+ε) g' ≤ -1 on the falling edge".into(),
            ));
        }
        Ok(())
    }

    pub fn times(&self) -> TimeGrid {
        TimeGrid::new(0.0, self.t_total, self.time_steps + 1).expect("validated")
    }

    /// Local space grid in unscaled coordinates. The step divides `2dt/λ`
    /// an even number of times so that `x ↦ x + (T − 2t)/λ` maps nodes to nodes.
    pub fn space_grid(&self) -> Grid {
        let dt = self.t_total / self.time_steps as f64;
        let target = self.eps_min() / self.points_per_eps as f64;
        let base = 2.0 * dt / self.lambda;
        let mut q = (base / target).ceil() as usize;
        q += q % 2;
        let h = base / q as f64;
        let (lo, hi) = self.profile.support();
        let cells = ((hi - lo + 0.2) / h).ceil() as usize;
        let x0 = lo - 0.1;
        Grid::new(x0, x0 + cells as f64 * h, cells + 1).expect("valid grid")
    }
}

/// Direction of the loop half.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    /// `φ(t,x) = x + f(t − λx, a(x, ε(t)), ε(t))`
    Forward,
    /// `ψ(t,x) = x + f(T − t − λx, a(x, ε₀), ε₀)`
    Return,
}

/// Height argument `a = (1+ε)g − ε`, so that `a = −ε` off the support of `g`
/// and `a = 1` on the plateau.
fn height(g: f64, e: f64) -> f64 {
    (1.0 + e) * g - e
}

/// Point values of one leg with analytic partial derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LegPoint {
    pub disp: f64,
    pub phi_t: f64,
    pub phi_x: f64,
    pub phi_tx: f64,
    pub phi_xx: f64,
    pub f: FValues,
}

impl LoopParams {
    /// Fields of a leg at `(t, x)` in unscaled coordinates.
    pub fn point(&self, leg: Leg, t: f64, x: f64) -> Result<LegPoint> {
        let l = self.lambda;
        let (e, ed, z) = match leg {
            Leg::Forward => (self.eps(t), self.eps_dot(t), t - l * x),
            Leg::Return => (self.eps0, 0.0, self.t_total - t - l * x),
        };
        let fam = FFamily::new(e)?;
        let (g, g1, g2) = self.profile.eval(x);
        let a = height(g, e);
        let (ax, axx) = ((1.0 + e) * g1, (1.0 + e) * g2);
        let v = fam.eval(z, a);
        let phi_x = 1.0 - l * v.f_z + v.f_a * ax;
        let phi_xx = l * l * v.f_zz - 2.0 * l * v.f_za * ax + v.f_aa * ax * ax + v.f_a * axx;
        let (phi_t, phi_tx) = match leg {
            Leg::Forward => (
                v.f_z + ed * (v.f_a * (g - 1.0) + v.f_eps),
                -l * v.f_zz
                    + v.f_za * ax
                    + ed * ((-l * v.f_za + v.f_aa * ax) * (g - 1.0) + v.f_a * g1 - l * v.f_zeps
                        + v.f_aeps * ax),
            ),
            Leg::Return => (-v.f_z, l * v.f_zz - v.f_za * ax),
        };
        Ok(LegPoint {
            disp: v.f,
            phi_t,
            phi_x,
            phi_tx,
            phi_xx,
            f: v,
        })
    }

    /// Frames of one leg sampled on `grid`, every `stride`-th time step,
    /// with the placement applied.
    pub fn frames(&self, leg: Leg, grid: Grid, stride: usize) -> Result<DiscretePath<Diffeo>> {
        self.validate()?;
        let stride = stride.max(1);
        if self.time_steps % stride != 0 {
            return Err(Error::InvalidParameter(format!(
                "stride {stride} does not divide {}",
                self.time_steps
            )));
        }
        let m = self.time_steps / stride + 1;
        let times = TimeGrid::new(0.0, self.t_total, m)?;
        let Placement { offset, scale } = self.placement;
        let frames = (0..m)
            .into_par_iter()
            .map(|k| {
                let t = times.t(k);
                let vals = (0..grid.n())
                    .map(|i| {
                        let xi = (grid.x(i) - offset) / scale;
                        Ok(scale * self.point(leg, t, xi)?.disp)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Diffeo::from_displacement(GridFunction::new(grid, vals)?)
            })
            .collect::<Result<Vec<_>>>()?;
        DiscretePath::new(times, frames)
    }
}

/// Analytic row sampler of one leg on the unscaled local grid.
pub struct LegSampler<'a> {
    params: &'a LoopParams,
    leg: Leg,
    grid: Grid,
}

impl<'a> LegSampler<'a> {
    pub fn new(params: &'a LoopParams, leg: Leg) -> Result<LegSampler<'a>> {
        params.validate()?;
        Ok(LegSampler {
            params,
            leg,
            grid: params.space_grid(),
        })
    }
}

impl PathSampler for LegSampler<'_> {
    fn times(&self) -> TimeGrid {
        self.params.times()
    }

    fn grid(&self) -> Grid {
        self.grid
    }

    fn row(&self, k: usize) -> Result<PathRow> {
        let t = self.times().t(k);
        let n = self.grid.n();
        let mut r = PathRow {
            phi_t: Vec::with_capacity(n),
            phi_x: Vec::with_capacity(n),
            phi_tx: Vec::with_capacity(n),
            phi_xx: Vec::with_capacity(n),
        };
        for i in 0..n {
            let p = self.params.point(self.leg, t, self.grid.x(i))?;
            r.phi_t.push(p.phi_t);
            r.phi_x.push(p.phi_x);
            r.phi_tx.push(p.phi_tx);
            r.phi_xx.push(p.phi_xx);
        }
        Ok(r)
    }
}

/// Measurements of a forward + return loop.
#[derive(Clone, Debug)]
pub struct LoopMeasures {
    pub params: LoopParams,
    pub forward: PathMeasures,
    pub back: PathMeasures,
}

impl LoopMeasures {
    /// `∫∫ φ_tx φ_xx / φ_x²` over both legs; invariant under the placement.
    pub fn drift(&self) -> f64 {
        self.forward.drift() + self.back.drift()
    }

    /// Energy report of the loop traversed on `[0, 2T]`, with the placement
    /// scale applied.
    pub fn report(&self) -> EnergyReport {
        self.forward
            .report()
            .concat(&self.back.report())
            .dilated(self.params.placement.scale)
    }

    fn block(&self) -> (usize, usize, usize) {
        let n = self.params.time_steps;
        (n / 3, n / 2, 2 * n / 3)
    }

    /// Drift of both legs over `[0, T_A] ∪ [T_E, T]`.
    pub fn a1_drift(&self) -> f64 {
        let n = self.params.time_steps;
        let (ka, _, ke) = self.block();
        let part = |m: &PathMeasures| m.drift_between(0, ka) + m.drift_between(ke, n);
        part(&self.forward) + part(&self.back)
    }

    /// Forward drift over `[T_A, T_E]`.
    pub fn a2_forward_drift(&self) -> f64 {
        let (ka, _, ke) = self.block();
        self.forward.drift_between(ka, ke)
    }

    /// Return drift over `[T_A, T_E]`.
    pub fn a2_return_drift(&self) -> f64 {
        let (ka, _, ke) = self.block();
        self.back.drift_between(ka, ke)
    }
}

/// Measures the loop for the given parameters.
pub fn measure_loop(params: &LoopParams) -> Result<LoopMeasures> {
    let forward = measure_path(&LegSampler::new(params, Leg::Forward)?)?;
    let back = measure_path(&LegSampler::new(params, Leg::Return)?)?;
    Ok(LoopMeasures {
        params: *params,
        forward,
        back,
    })
}

/// `∫∫ φ_tx φ_xx / φ_x² dx dt` of a sampled path, by finite differences.
pub fn vertical_drift(path: &DiscretePath<Diffeo>) -> Result<f64> {
    let s = crate::geodesic::DiffeoPathSampler::new(path)?;
    Ok(measure_path(&s)?.drift())
}

/// `I ∫_{T_A}^{T_E} (1/ε₀ − 1/ε(t)) dt`.
pub fn predicted_drift(params: &LoopParams, i: f64) -> f64 {
    let p = *params;
    i * gl_integrate(p.t_a(), p.t_e(), 32, 16, |t| 1.0 / p.eps0 - 1.0 / p.eps(t))
}

/// The two printed estimates for the forward leg, in unscaled coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegBounds {
    /// `∫₀ᵀ∫ f_z²(1 − λ f_z) dx dt`
    pub band: f64,
    /// `∫₀ᵀ∫ f_z² f_a g' dx dt`
    pub edge: f64,
    /// `4 T ‖ε‖∞`
    pub edge_limit: f64,
    /// `‖ε̇ f_ε‖∞` over the sampled rows
    pub eps_dot_f_eps: f64,
}

pub fn leg_bounds(params: &LoopParams) -> Result<LegBounds> {
    params.validate()?;
    let times = params.times();
    let grid = params.space_grid();
    let rows: Vec<(f64, f64, f64)> = (0..times.m())
        .into_par_iter()
        .map(|k| {
            let t = times.t(k);
            let mut band = Vec::with_capacity(grid.n());
            let mut edge = Vec::with_capacity(grid.n());
            let mut sup = 0.0f64;
            let ed = params.eps_dot(t);
            for i in 0..grid.n() {
                let x = grid.x(i);
                let p = params.point(Leg::Forward, t, x)?;
                let (_, g1, _) = params.profile.eval(x);
                let fz = p.f.f_z;
                band.push(fz * fz * (1.0 - params.lambda * fz));
                edge.push(fz * fz * p.f.f_a * g1);
                sup = sup.max((ed * p.f.f_eps).abs());
            }
            Ok((
                integrate_samples(&band, grid.h()),
                integrate_samples(&edge, grid.h()),
                sup,
            ))
        })
        .collect::<Result<_>>()?;
    let dt = times.dt();
    let band: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let edge: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(LegBounds {
        band: integrate_samples(&band, dt),
        edge: integrate_samples(&edge, dt),
        edge_limit: 4.0 * params.t_total * params.eps_max(),
        eps_dot_f_eps: rows.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

/// Both sides of the change of variables `t̃ = T − t`, `x̃ = x + (T − 2t)/λ`
/// on the plateau: the forward drift over `[T/2, T_E]`, and the same block
/// rewritten over `[T_A, T/2]` through
/// `φ_tx(t̃, x̃) = −2λ f_zz(t, x) − φ_tx(t, x)`.
pub fn symmetry_blocks(params: &LoopParams) -> Result<(f64, f64)> {
    params.validate()?;
    let times = params.times();
    let grid = params.space_grid();
    let n = params.time_steps;
    let (ka, kh, ke) = (n / 3, n / 2, 2 * n / 3);
    let (p_lo, p_hi) = params.profile.plateau();
    let l = params.lambda;
    let h = grid.h();
    let on_plateau = |x: f64| x >= p_lo && x <= p_hi;

    let direct: Vec<f64> = (kh..=ke)
        .into_par_iter()
        .map(|k| {
            let t = times.t(k);
            let vals = (0..grid.n())
                .map(|i| {
                    let x = grid.x(i);
                    if !on_plateau(x) {
                        return Ok(0.0);
                    }
                    let p = params.point(Leg::Forward, t, x)?;
                    Ok(p.phi_tx * p.phi_xx / (p.phi_x * p.phi_x))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(integrate_samples(&vals, h))
        })
        .collect::<Result<_>>()?;

    let mirrored: Vec<f64> = (ka..=kh)
        .into_par_iter()
        .map(|k| {
            let t = times.t(k);
            let shift = ((n - 2 * k) as f64 * times.dt()) / l;
            let steps = (shift / h).round() as isize;
            let vals = (0..grid.n() as isize)
                .map(|i| {
                    // x̃ = x + shift runs over the plateau nodes
                    let x_tilde = grid.x(i as usize);
                    let x = grid.x_min() + (i - steps) as f64 * h;
                    if !on_plateau(x_tilde) || !on_plateau(x) {
                        return Ok(0.0);
                    }
                    let p = params.point(Leg::Forward, t, x)?;
                    let tx = -2.0 * l * p.f.f_zz - p.phi_tx;
                    Ok(tx * p.phi_xx / (p.phi_x * p.phi_x))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(integrate_samples(&vals, h))
        })
        .collect::<Result<_>>()?;
    let dt = times.dt();
    Ok((integrate_samples(&direct, dt), integrate_samples(&mirrored, dt)))
}

/// `I` for the parameters' `λ` at reference `ε = 0.01`.
pub fn loop_i(params: &LoopParams) -> Result<f64> {
    compute_i(params.lambda, 0.01)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn active() -> LoopParams {
        LoopParams {
            eps1: 2.0,
            ..LoopParams::default()
        }
    }

    /// `∫∫ max(0, min(z − z̄, a − ā)) G(z̄) G(ā) dz̄ dā` with panels split at the kinks.
    fn nested(z: f64, a: f64, e: f64) -> f64 {
        let k = crate::grid::Mollifier1D::new(e).unwrap();
        let split = |mut cuts: Vec<f64>| {
            cuts.retain(|c| *c > -e && *c < e);
            cuts.push(-e);
            cuts.push(e);
            cuts.sort_by(f64::total_cmp);
            cuts
        };
        let piecewise = |cuts: &[f64], f: &dyn Fn(f64) -> f64| {
            cuts.windows(2)
                .map(|w| gl_integrate(w[0], w[1], 8, 16, f))
                .sum::<f64>()
        };
        let outer = split(vec![a, a - z - e, a - z + e]);
        piecewise(&outer, &|ab| {
            let inner = split(vec![z, z - a + ab]);
            k.density(ab)
                * piecewise(&inner, &|zb| {
                    (z - zb).min(a - ab).max(0.0) * k.density(zb)
                })
        })
    }

    #[test]
    fn frames_match_double_quadrature() {
        let p = active();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (lo, hi) = p.profile.support();
        for _ in 0..10 {
            let t = rng.random_range(0.0..p.t_total);
            let x = rng.random_range(lo..hi);
            let e = p.eps(t);
            let a = (1.0 + e) * p.profile.eval(x).0 - e;
            let want = nested(t - p.lambda * x, a, e);
            let got = p.point(Leg::Forward, t, x).unwrap().disp;
            assert!((got - want).abs() < 1e-7, "t={t} x={x}: {got} vs {want}");
            let back = p.point(Leg::Return, t, x).unwrap().disp;
            let a0 = (1.0 + p.eps0) * p.profile.eval(x).0 - p.eps0;
            let want = nested(p.t_total - t - p.lambda * x, a0, p.eps0);
            assert!((back - want).abs() < 1e-7);
        }
    }

    #[test]
    fn forward_starts_at_identity() {
        let p = active();
        let grid = Grid::new(-2.0, 10.0, 2401).unwrap();
        let path = p.frames(Leg::Forward, grid, p.time_steps / 6).unwrap();
        assert!(path.frames()[0].displacement().max_abs() < 1e-14);
        let back = p.frames(Leg::Return, grid, p.time_steps / 6).unwrap();
        assert!(back.last().displacement().max_abs() < 1e-14);
    }

    #[test]
    fn constant_width_moves_along_z_only() {
        let p = LoopParams::default();
        for (t, x) in [(0.7, 0.3), (2.5, 1.0), (3.9, 2.2), (5.0, 6.0)] {
            let v = p.point(Leg::Forward, t, x).unwrap();
            assert_eq!(v.phi_t, v.f.f_z);
        }
    }

    #[test]
    fn return_is_time_reversed_forward() {
        let p = LoopParams::default();
        for (t, x) in [(0.7, 0.3), (2.5, 1.0), (3.9, 2.2), (5.0, 6.0)] {
            let a = p.point(Leg::Return, t, x).unwrap();
            let b = p.point(Leg::Forward, p.t_total - t, x).unwrap();
            assert!((a.disp - b.disp).abs() < 1e-15);
            assert!((a.phi_t + b.phi_t).abs() < 1e-12);
        }
    }

    #[test]
    fn short_plateau_is_rejected() {
        let p = LoopParams {
            profile: PlateauProfile {
                fall_center: 4.0,
                fall_half_width: 0.5,
                ..PlateauProfile::default()
            },
            ..LoopParams::default()
        };
        match p.validate() {
            Err(Error::PlateauViolated(m)) => assert!(m.contains("g not ≡ 1 on required window")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_width_loop_has_no_drift() {
        let m = measure_loop(&LoopParams::default()).unwrap();
        assert!(m.drift().abs() < 1e-9);
        assert!(m.a1_drift().abs() < 1e-6);
    }
}
