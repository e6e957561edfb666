//! Short paths from the identity to `Id + g`: the corner path
//! `φ(t,x) = x + max(0, min(t − λx, g)) − max(0, min(t + λx, −g))`,
//! reparametrized by `t = tan τ` and mollified in space-time.

use rayon::prelude::*;

use crate::diffeo::{DiscretePath, Diffeo};
use crate::error::{Error, Result};
use crate::geodesic::{measure_path, EnergyReport, PathMeasures, PathRow, PathSampler};
use crate::grid::{
    Field2D, Grid, GridFunction, Interpolant, Mollifier2D, Stencil2D, TimeGrid, Tolerances,
};

/// Inputs of the mollified corner path.
#[derive(Clone, Debug)]
pub struct CornerPathParams {
    pub g: GridFunction,
    pub lambda: f64,
    pub epsilon: f64,
    /// Fine samples per `ε` along both axes (at least 4).
    pub points_per_eps: usize,
    /// Sub-samples per fine cell and axis for the indicator fields.
    pub supersample: usize,
    /// Frames of the returned path on the grid of `g`.
    pub frames: usize,
}

impl CornerPathParams {
    /// `λ = 1 − ε` with default resolutions.
    pub fn new(g: GridFunction, epsilon: f64) -> CornerPathParams {
        CornerPathParams {
            g,
            lambda: 1.0 - epsilon,
            epsilon,
            points_per_eps: 6,
            supersample: 4,
            frames: 33,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {}", self.epsilon)));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!("lambda = {}", self.lambda)));
        }
        if self.points_per_eps < 4 {
            return Err(Error::UnderResolved(format!(
                "{} points per epsilon",
                self.points_per_eps
            )));
        }
        if self.frames < 2 || self.supersample == 0 {
            return Err(Error::InvalidParameter("frames ≥ 2 and supersample ≥ 1".into()));
        }
        let slope = self.g.derivative(1)?;
        if slope.values().iter().any(|v| !(1.0 + v > 0.0)) {
            return Err(Error::NotDiffeomorphism("g' ≤ −1".into()));
        }
        Ok(())
    }
}

fn clamp0(v: f64) -> f64 {
    v.max(0.0)
}

/// `φ(t, x) − x` of the corner path for a displacement value `g`.
pub fn corner_displacement(g: f64, lambda: f64, t: f64, x: f64) -> f64 {
    clamp0((t - lambda * x).min(g)) - clamp0((t + lambda * x).min(-g))
}

/// `φ(t, ·) − Id` on the grid of `g`, evaluated exactly.
pub fn corner_path_raw(g: &GridFunction, lambda: f64, t: f64) -> GridFunction {
    let grid = *g.grid();
    GridFunction::new(
        grid,
        (0..grid.n())
            .map(|i| corner_displacement(g.values()[i], lambda, t, grid.x(i)))
            .collect(),
    )
    .expect("same grid")
}

/// `(φ_t, φ_x)` of the corner path away from its kinks.
pub fn indicator_fields(g: f64, g_slope: f64, lambda: f64, t: f64, x: f64) -> (f64, f64) {
    let (p, m) = (t - lambda * x, t + lambda * x);
    let in1 = 0.0 < p && p < g;
    let in2 = 0.0 < g && g < p;
    let in3 = 0.0 < m && m < -g;
    let in4 = 0.0 < -g && -g < m;
    let phi_t = f64::from(u8::from(in1)) - f64::from(u8::from(in3));
    let mut phi_x = 1.0;
    if in1 {
        phi_x -= lambda;
    }
    if in2 {
        phi_x += g_slope;
    }
    if in3 {
        phi_x -= lambda;
    }
    if in4 {
        phi_x += g_slope;
    }
    (phi_t, phi_x)
}

/// Output of [`corner_path`].
#[derive(Clone, Debug)]
pub struct CornerPath {
    pub epsilon: f64,
    pub lambda: f64,
    pub path: DiscretePath<Diffeo>,
    pub report: EnergyReport,
    pub measures: PathMeasures,
    /// `ψ(π/2) = (Id + g) ⋆ G_ε`.
    pub endpoint: Diffeo,
    /// `sup |ψ(π/2) − (Id + g)|`.
    pub endpoint_error: f64,
    /// Cumulative `∫∫ ψ_τx ψ_xx / ψ_x²` at each frame.
    pub frame_drift: Vec<f64>,
}

impl CornerPath {
    pub fn drift(&self) -> f64 {
        self.measures.drift()
    }
}

struct CornerFields {
    /// `(1 + tan²τ) φ_t`
    a: Field2D,
    /// `φ_x − 1`
    b: Field2D,
    /// `φ − x`
    d: Field2D,
    stencil: Stencil2D,
}

impl PathSampler for CornerFields {
    fn times(&self) -> TimeGrid {
        self.a.times
    }

    fn grid(&self) -> Grid {
        self.a.grid
    }

    fn row(&self, k: usize) -> Result<PathRow> {
        let n = self.a.grid.n();
        let st = &self.stencil;
        let mut r = PathRow {
            phi_t: Vec::with_capacity(n),
            phi_x: Vec::with_capacity(n),
            phi_tx: Vec::with_capacity(n),
            phi_xx: Vec::with_capacity(n),
        };
        for i in 0..n {
            r.phi_t.push(st.apply(&self.a, k, i));
            r.phi_x.push(1.0 + st.apply(&self.b, k, i));
            r.phi_tx.push(st.apply_dx(&self.a, k, i));
            r.phi_xx.push(st.apply_dx(&self.b, k, i));
        }
        Ok(r)
    }
}

/// `(tan τ, 1 + tan²τ)`, with `t = ±∞` (and no motion) outside `(−π/2, π/2)`.
fn reparam(tau: f64) -> (f64, f64) {
    if tau.abs() >= std::f64::consts::FRAC_PI_2 {
        (tau.signum() * f64::INFINITY, 0.0)
    } else {
        let t = tau.tan();
        (t, 1.0 + t * t)
    }
}

/// Support of `g` above the boundary tolerance, as node indices.
fn support(g: &GridFunction, tol: f64) -> Option<(usize, usize)> {
    let v = g.values();
    let lo = v.iter().position(|x| x.abs() > tol)?;
    let hi = v.iter().rposition(|x| x.abs() > tol)?;
    Some((lo, hi))
}

/// The mollified, reparametrized corner path and its energy.
pub fn corner_path(params: &CornerPathParams) -> Result<CornerPath> {
    params.validate()?;
    let g = &params.g;
    let grid = *g.grid();
    let tol = Tolerances::default();
    let (lam, eps) = (params.lambda, params.epsilon);

    let Some((ia, ib)) = support(g, tol.boundary_tol) else {
        let id = Diffeo::identity(grid);
        let times = TimeGrid::new(0.0, 1.0, params.frames)?;
        return Ok(CornerPath {
            epsilon: eps,
            lambda: lam,
            path: DiscretePath::constant(times, &id),
            report: EnergyReport::zero(),
            measures: PathMeasures {
                times,
                energy_density: vec![0.0; params.frames],
                drift_density: vec![0.0; params.frames],
            },
            endpoint: id,
            endpoint_error: 0.0,
            frame_drift: vec![0.0; params.frames],
        });
    };

    if grid.h() > 0.25 * eps {
        return Err(Error::UnderResolved(format!(
            "grid step {:.3e} of g exceeds ε/4 = {:.3e}",
            grid.h(),
            0.25 * eps
        )));
    }
    // parameter range where φ(t, ·) moves
    let (mut t_lo, mut t_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in ia..=ib {
        let (x, v) = (grid.x(i), g.values()[i]);
        let base = if v >= 0.0 { lam * x } else { -lam * x };
        t_lo = t_lo.min(base);
        t_hi = t_hi.max(base + v.abs());
    }
    // beyond ±π/2 the reparametrized path is stationary
    let margin = 3.0 * eps;
    let (tau_lo, tau_hi) = (t_lo.atan() - margin, t_hi.atan() + margin);
    let (x_lo, x_hi) = (grid.x(ia) - margin, grid.x(ib) + margin);

    let h = eps / params.points_per_eps as f64;
    let nx = ((x_hi - x_lo) / h).ceil() as usize + 1;
    let seg = params.frames - 1;
    let per = ((tau_hi - tau_lo) / (h * seg as f64)).ceil() as usize;
    let fine_x = Grid::new(x_lo, x_hi, nx.max(8))?;
    let fine_t = TimeGrid::new(tau_lo, tau_hi, seg * per.max(1) + 1)?;

    let gi = Interpolant::new(g);
    // g and g' at sub-sample abscissae, shared by all rows
    let s = params.supersample;
    let offsets: Vec<f64> = (0..s).map(|j| (j as f64 + 0.5) / s as f64 - 0.5).collect();
    let (hx, ht) = (fine_x.h(), fine_t.dt());
    let columns: Vec<Vec<(f64, f64, f64)>> = (0..fine_x.n())
        .map(|i| {
            offsets
                .iter()
                .map(|o| {
                    let x = fine_x.x(i) + o * hx;
                    let (v, d) = gi.eval_with_derivative(x);
                    (x, v, d)
                })
                .collect()
        })
        .collect();
    let norm = 1.0 / (s * s) as f64;
    let sample = |k: usize, i: usize| -> (f64, f64) {
        let mut acc = (0.0, 0.0);
        for ot in &offsets {
            let tau = fine_t.t(k) + ot * ht;
            let (t, jac) = reparam(tau);
            for &(x, v, d) in &columns[i] {
                let (pt, px) = indicator_fields(v, d, lam, t, x);
                acc.0 += jac * pt;
                acc.1 += px - 1.0;
            }
        }
        (acc.0 * norm, acc.1 * norm)
    };
    let n = fine_x.n();
    let m = fine_t.m();
    let mut av = vec![0.0; n * m];
    let mut bv = vec![0.0; n * m];
    av.par_chunks_mut(n)
        .zip(bv.par_chunks_mut(n))
        .enumerate()
        .for_each(|(k, (ar, br))| {
            for i in 0..n {
                let (p, q) = sample(k, i);
                ar[i] = p;
                br[i] = q;
            }
        });
    let gvals: Vec<f64> = (0..n).map(|i| gi.eval(fine_x.x(i))).collect();
    let d = Field2D::from_fn(fine_t, fine_x, |tau, x| {
        let i = ((x - x_lo) / hx).round() as usize;
        corner_displacement(gvals[i.min(n - 1)], lam, reparam(tau).0, x)
    });
    let kernel = Mollifier2D::new(eps)?;
    let fields = CornerFields {
        a: Field2D {
            times: fine_t,
            grid: fine_x,
            values: av,
        },
        b: Field2D {
            times: fine_t,
            grid: fine_x,
            values: bv,
        },
        d,
        stencil: kernel.stencil(ht, hx)?,
    };
    let measures = measure_path(&fields).map_err(|e| e.in_stage("corner energy"))?;
    let report = measures.report();

    // frames on the grid of g
    let frame_rows: Vec<usize> = (0..params.frames).map(|j| j * per.max(1)).collect();
    let frames = frame_rows
        .par_iter()
        .map(|&k| {
            let row: Vec<f64> = (0..n).map(|i| fields.stencil.apply(&fields.d, k, i)).collect();
            let local = Interpolant::new(&GridFunction::new(fine_x, row)?);
            let vals = (0..grid.n())
                .map(|i| {
                    let x = grid.x(i);
                    if x <= x_lo || x >= x_hi {
                        0.0
                    } else {
                        local.eval(x)
                    }
                })
                .collect();
            Diffeo::from_displacement(GridFunction::new(grid, vals)?).map_err(|e| match e {
                Error::NotDiffeomorphism(s) => Error::MonotonicityLost(s),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let times = TimeGrid::new(tau_lo, tau_hi, params.frames)?;
    let path = DiscretePath::new(times, frames)?;
    let endpoint = path.last().clone();
    let endpoint_error = endpoint.displacement().sup_distance(g)?;
    let cumulative = measures.cumulative_drift();
    let frame_drift = frame_rows.iter().map(|&k| cumulative[k]).collect();
    Ok(CornerPath {
        epsilon: eps,
        lambda: lam,
        path,
        report,
        measures,
        endpoint,
        endpoint_error,
        frame_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_g() -> GridFunction {
        let grid = Grid::symmetric(10.0, 801).unwrap();
        GridFunction::from_fn(grid, |x| 0.3 * crate::grid::bump(x - 0.5) / crate::grid::bump(0.0))
    }

    #[test]
    fn raw_path_limits() {
        let g = test_g();
        let early = corner_path_raw(&g, 0.9, -20.0);
        assert_eq!(early.max_abs(), 0.0);
        let late = corner_path_raw(&g, 0.9, 50.0);
        assert!(late.sup_distance(&g).unwrap() < 1e-15);
    }

    #[test]
    fn nonnegative_g_on_positive_axis_uses_first_term_only() {
        let g = test_g();
        for t in [0.0, 0.4, 1.0] {
            for i in 0..g.grid().n() {
                let x = g.grid().x(i);
                let v = g.values()[i];
                if x > 0.0 {
                    assert_eq!(clamp0((t + 0.9 * x).min(-v)), 0.0);
                }
            }
        }
    }

    #[test]
    fn limit_fields_have_disjoint_support() {
        let g = test_g();
        let slope = g.derivative(1).unwrap();
        for k in 0..50 {
            let t = -0.5 + 0.05 * k as f64;
            for i in 0..g.grid().n() {
                let (pt, px) =
                    indicator_fields(g.values()[i], slope.values()[i], 1.0, t, g.grid().x(i));
                assert_eq!(pt * px, 0.0);
            }
        }
    }

    #[test]
    fn zero_g_gives_constant_path() {
        let grid = Grid::symmetric(10.0, 201).unwrap();
        let r = corner_path(&CornerPathParams::new(GridFunction::zeros(grid), 0.1)).unwrap();
        assert_eq!(r.report.energy, 0.0);
        assert!(r.endpoint.is_identity(0.0));
    }
}
