use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;

use super::{Grid, GridFunction, TimeGrid, DEFAULT_PAD};
use crate::error::{Error, Result};

/// Cached Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        (0..=64)
            .map(|k| {
                if k == 0 {
                    Vec::new()
                } else {
                    GaussLegendre::new(NonZeroUsize::new(k).unwrap())
                        .as_node_weight_pairs()
                        .to_vec()
                }
            })
            .collect()
    });
    &rules[n.clamp(1, 64)]
}

/// Gauss-Legendre quadrature of `f` over `[a, b]` with `panels` equal panels.
pub(crate) fn gl_integrate(a: f64, b: f64, panels: usize, nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = gauss_legendre(nodes);
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * w;
        let mid = lo + 0.5 * w;
        let s: f64 = rule.iter().map(|&(x, wt)| wt * f(mid + 0.5 * w * x)).sum();
        total += 0.5 * w * s;
    }
    total
}

fn raw_bump(z: f64) -> f64 {
    let q = 1.0 - z * z;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

const PHI_CELLS: usize = 4096;
const K_CELLS: usize = 2048;

struct Tables {
    c: f64,
    phi: Vec<f64>,
    psi: Vec<f64>,
    k: Vec<f64>,
    dk: Vec<f64>,
}

fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mass = gl_integrate(-1.0, 1.0, 64, 24, raw_bump);
        let c = 1.0 / mass;
        let g = |z: f64| c * raw_bump(z);
        let h = 2.0 / PHI_CELLS as f64;
        let z = |j: usize| -1.0 + j as f64 * h;

        let mut phi = vec![0.0; PHI_CELLS + 1];
        for j in 0..PHI_CELLS {
            phi[j + 1] = phi[j] + gl_integrate(z(j), z(j + 1), 1, 10, g);
        }
        let top = phi[PHI_CELLS];
        for v in phi.iter_mut() {
            *v /= top;
        }
        let phi_at = |x: f64| -> f64 {
            let s = ((x + 1.0) / h).clamp(0.0, PHI_CELLS as f64);
            let j = (s.floor() as usize).min(PHI_CELLS - 1);
            hermite(phi[j], phi[j + 1], g(z(j)), g(z(j + 1)), h, s - j as f64)
        };
        let mut psi = vec![0.0; PHI_CELLS + 1];
        for j in 0..PHI_CELLS {
            psi[j + 1] = psi[j] + gl_integrate(z(j), z(j + 1), 1, 10, phi_at);
        }

        let hk = 4.0 / K_CELLS as f64;
        let mut k = vec![0.0; K_CELLS + 1];
        let mut dk = vec![0.0; K_CELLS + 1];
        for j in 0..=K_CELLS {
            let s = -2.0 + j as f64 * hk;
            let lo = (-1.0f64).max(-1.0 - s);
            let hi = 1.0f64.min(1.0 - s);
            k[j] = gl_integrate(lo, hi, 8, 32, |w| g(w) * g(w + s));
            dk[j] = gl_integrate(lo, hi, 8, 32, |w| g(w) * bump_derivative_with(c, w + s));
        }
        Tables { c, phi, psi, k, dk }
    })
}

fn bump_derivative_with(c: f64, z: f64) -> f64 {
    let q = 1.0 - z * z;
    if q <= 0.0 {
        0.0
    } else {
        -2.0 * z / (q * q) * c * (-1.0 / q).exp()
    }
}

/// Normalized bump `G₁(z) = C exp(-1/(1-z²))` on `|z| < 1`.
pub fn bump(z: f64) -> f64 {
    tables().c * raw_bump(z)
}

pub fn bump_derivative(z: f64) -> f64 {
    bump_derivative_with(tables().c, z)
}

/// `Φ(z) = ∫_{-1}^z G₁`.
pub fn bump_cdf(z: f64) -> f64 {
    if z <= -1.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let t = tables();
    let h = 2.0 / PHI_CELLS as f64;
    let s = (z + 1.0) / h;
    let j = (s.floor() as usize).min(PHI_CELLS - 1);
    let zj = -1.0 + j as f64 * h;
    hermite(t.phi[j], t.phi[j + 1], bump(zj), bump(zj + h), h, s - j as f64)
}

/// `Ψ(z) = ∫_{-1}^z Φ`, equal to `z` for `z ≥ 1`.
pub fn bump_second_cdf(z: f64) -> f64 {
    if z <= -1.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return z;
    }
    let t = tables();
    let h = 2.0 / PHI_CELLS as f64;
    let s = (z + 1.0) / h;
    let j = (s.floor() as usize).min(PHI_CELLS - 1);
    let zj = -1.0 + j as f64 * h;
    hermite(
        t.psi[j],
        t.psi[j + 1],
        bump_cdf(zj),
        bump_cdf(zj + h),
        h,
        s - j as f64,
    )
}

/// `K(s) = ∫G₁(w)G₁(w+s)dw`, supported in `[-2, 2]`.
pub fn bump_correlation(s: f64) -> f64 {
    if s.abs() >= 2.0 {
        return 0.0;
    }
    let t = tables();
    let h = 4.0 / K_CELLS as f64;
    let r = (s + 2.0) / h;
    let j = (r.floor() as usize).min(K_CELLS - 1);
    hermite(t.k[j], t.k[j + 1], t.dk[j], t.dk[j + 1], h, r - j as f64)
}

/// One-dimensional mollifier `G_ε(z) = G₁(z/ε)/ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mollifier1D {
    epsilon: f64,
}

impl Mollifier1D {
    pub fn new(epsilon: f64) -> Result<Mollifier1D> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon}")));
        }
        Ok(Mollifier1D { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn density(&self, z: f64) -> f64 {
        bump(z / self.epsilon) / self.epsilon
    }

    pub fn density_derivative(&self, z: f64) -> f64 {
        bump_derivative(z / self.epsilon) / (self.epsilon * self.epsilon)
    }

    /// `∫_{-∞}^z G_ε`.
    pub fn cdf(&self, z: f64) -> f64 {
        bump_cdf(z / self.epsilon)
    }

    /// `∫_{-∞}^z ∫_{-∞}^y G_ε`.
    pub fn second_cdf(&self, z: f64) -> f64 {
        self.epsilon * bump_second_cdf(z / self.epsilon)
    }

    /// `∫G_ε(w)G_ε(w+s)dw`.
    pub fn correlation(&self, s: f64) -> f64 {
        bump_correlation(s / self.epsilon) / self.epsilon
    }

    /// Total mass by Gauss-Legendre quadrature.
    pub fn mass(&self) -> f64 {
        let e = self.epsilon;
        gl_integrate(-e, e, 32, 20, |z| self.density(z))
    }
}

/// Discrete convolution `f ⋆ G_ε` on the grid of `f`.
///
/// Kernel weights are trapezoid samples of `G_ε` renormalized to unit sum, so
/// constants are reproduced exactly. Data beyond the grid is continued by the
/// edge value.
pub fn convolve(f: &GridFunction, k: &Mollifier1D) -> Result<GridFunction> {
    let grid = *f.grid();
    let h = grid.h();
    let eps = k.epsilon();
    if eps > 0.5 * (grid.x_max() - grid.x_min()) || eps > grid.pad_width(DEFAULT_PAD) {
        return Err(Error::SupportEscape(format!(
            "kernel radius {eps} exceeds the pad width {}",
            grid.pad_width(DEFAULT_PAD)
        )));
    }
    if eps < 2.0 * h {
        return Err(Error::UnderResolved(format!("epsilon {eps} < 2h = {}", 2.0 * h)));
    }
    let r = (eps / h).floor() as isize;
    let mut w: Vec<f64> = (-r..=r).map(|j| k.density(j as f64 * h)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    let n = grid.n() as isize;
    let vals = f.values();
    let out = (0..n)
        .map(|i| {
            w.iter()
                .enumerate()
                .map(|(jj, wt)| {
                    let j = jj as isize - r;
                    wt * vals[(i - j).clamp(0, n - 1) as usize]
                })
                .sum()
        })
        .collect();
    GridFunction::new(grid, out)
}

/// Radial mollifier on the plane supported in the ε-ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mollifier2D {
    epsilon: f64,
}

fn radial_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let m = gl_integrate(0.0, 1.0, 32, 20, |r| raw_bump(r) * r);
        1.0 / (2.0 * std::f64::consts::PI * m)
    })
}

impl Mollifier2D {
    pub fn new(epsilon: f64) -> Result<Mollifier2D> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon}")));
        }
        Ok(Mollifier2D { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn density(&self, t: f64, x: f64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        let q = (t * t + x * x) / e2;
        if q >= 1.0 {
            0.0
        } else {
            radial_constant() / e2 * (-1.0 / (1.0 - q)).exp()
        }
    }

    /// `∂_x` of the density.
    pub fn density_dx(&self, t: f64, x: f64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        let q = (t * t + x * x) / e2;
        if q >= 1.0 {
            0.0
        } else {
            let d = 1.0 - q;
            -self.density(t, x) * 2.0 * x / (e2 * d * d)
        }
    }

    /// Double integral by tensor Gauss-Legendre in polar form.
    pub fn mass(&self) -> f64 {
        let e = self.epsilon;
        2.0 * std::f64::consts::PI * gl_integrate(0.0, e, 32, 20, |r| r * self.density(r, 0.0))
    }

    /// Discrete weights for sampling steps `ht`, `hx`.
    pub fn stencil(&self, ht: f64, hx: f64) -> Result<Stencil2D> {
        let e = self.epsilon;
        if ht > e / 4.0 * (1.0 + 1e-12) || hx > e / 4.0 * (1.0 + 1e-12) {
            return Err(Error::UnderResolved(format!(
                "steps ({ht:.3e}, {hx:.3e}) coarser than epsilon/4 = {:.3e}",
                e / 4.0
            )));
        }
        let rt = (e / ht).floor() as isize;
        let rx = (e / hx).floor() as isize;
        let mut taps = Vec::new();
        let mut dx_taps = Vec::new();
        for p in -rt..=rt {
            for q in -rx..=rx {
                let (t, x) = (p as f64 * ht, q as f64 * hx);
                let w = self.density(t, x);
                if w > 0.0 {
                    taps.push((p, q, w));
                    dx_taps.push((p, q, self.density_dx(t, x)));
                }
            }
        }
        let s: f64 = taps.iter().map(|t| t.2).sum();
        taps.iter_mut().for_each(|t| t.2 /= s);
        // exact on F = x: Σ w'(p,q)·(-q hx) = 1
        let m: f64 = dx_taps.iter().map(|t| -t.2 * t.1 as f64 * hx).sum();
        dx_taps.iter_mut().for_each(|t| t.2 /= m);
        Ok(Stencil2D { taps, dx_taps })
    }
}

/// Normalized discrete mollifier weights `(dt index, dx index, weight)`.
#[derive(Clone, Debug)]
pub struct Stencil2D {
    taps: Vec<(isize, isize, f64)>,
    dx_taps: Vec<(isize, isize, f64)>,
}

impl Stencil2D {
    fn apply_taps(taps: &[(isize, isize, f64)], f: &Field2D, k: usize, i: usize) -> f64 {
        let m = f.times.m() as isize;
        let n = f.grid.n() as isize;
        let mut s = 0.0;
        for &(p, q, w) in taps {
            let kk = (k as isize - p).clamp(0, m - 1) as usize;
            let ii = (i as isize - q).clamp(0, n - 1) as usize;
            s += w * f.values[kk * n as usize + ii];
        }
        s
    }

    /// `(F ⋆ G)` at sample `(k, i)`.
    pub fn apply(&self, f: &Field2D, k: usize, i: usize) -> f64 {
        Stencil2D::apply_taps(&self.taps, f, k, i)
    }

    /// `(F ⋆ ∂_x G) = ∂_x (F ⋆ G)` at sample `(k, i)`.
    pub fn apply_dx(&self, f: &Field2D, k: usize, i: usize) -> f64 {
        Stencil2D::apply_taps(&self.dx_taps, f, k, i)
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Field sampled on a time grid × space grid, rows indexed by time.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D {
    pub times: TimeGrid,
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn from_fn(times: TimeGrid, grid: Grid, f: impl Fn(f64, f64) -> f64 + Sync) -> Field2D {
        let n = grid.n();
        let mut values = vec![0.0; times.m() * n];
        values.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
            let t = times.t(k);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(t, grid.x(i));
            }
        });
        Field2D {
            times,
            grid,
            values,
        }
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.grid.n() + i]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.grid.n();
        &self.values[k * n..(k + 1) * n]
    }
}

/// Space-time convolution with the planar mollifier.
pub fn convolve2d(f: &Field2D, k: &Mollifier2D) -> Result<Field2D> {
    let st = k.stencil(f.times.dt(), f.grid.h())?;
    let n = f.grid.n();
    let mut values = vec![0.0; f.values.len()];
    values.par_chunks_mut(n).enumerate().for_each(|(kk, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = st.apply(f, kk, i);
        }
    });
    Ok(Field2D {
        times: f.times,
        grid: f.grid,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_normalized_even() {
        let m = gl_integrate(-1.0, 1.0, 50, 20, bump);
        assert!((m - 1.0).abs() < 1e-13);
        assert_eq!(bump(0.3), bump(-0.3));
        assert_eq!(bump(1.0), 0.0);
        assert!((tables().c - 2.2522836210435813).abs() < 1e-12);
    }

    #[test]
    fn cdf_tables() {
        assert!((bump_cdf(0.0) - 0.5).abs() < 1e-14);
        for z in [-0.9, -0.37, 0.1, 0.55, 0.99] {
            let direct = gl_integrate(-1.0, z, 40, 20, bump);
            assert!((bump_cdf(z) - direct).abs() < 1e-13, "z={z}");
            assert!((bump_cdf(z) + bump_cdf(-z) - 1.0).abs() < 1e-13);
        }
        assert!((bump_second_cdf(1.0 - 1e-12) - 1.0).abs() < 1e-11);
        let direct = gl_integrate(-1.0, 0.3, 40, 20, bump_cdf);
        assert!((bump_second_cdf(0.3) - direct).abs() < 1e-13);
    }

    #[test]
    fn correlation_table() {
        for s in [-1.7, -0.4, 0.0, 0.25, 1.3] {
            let lo = (-1.0f64).max(-1.0 - s);
            let hi = 1.0f64.min(1.0 - s);
            let direct = gl_integrate(lo, hi, 64, 20, |w| bump(w) * bump(w + s));
            assert!((bump_correlation(s) - direct).abs() < 1e-12, "s={s}");
        }
        let total = gl_integrate(-2.0, 2.0, 64, 20, bump_correlation);
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn masses() {
        for e in [0.5, 0.05, 0.001] {
            assert!((Mollifier1D::new(e).unwrap().mass() - 1.0).abs() < 1e-8);
            assert!((Mollifier2D::new(e).unwrap().mass() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn coarse_2d_stencil_rejected() {
        let k = Mollifier2D::new(0.1).unwrap();
        assert!(matches!(k.stencil(0.03, 0.01), Err(Error::UnderResolved(_))));
        assert!(k.stencil(0.025, 0.025).is_ok());
    }
}
