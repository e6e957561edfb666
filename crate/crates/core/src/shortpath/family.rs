use crate::error::{Error, Result};
use crate::grid::Mollifier1D;

use crate::grid::gl_integrate as gl;

/// `f(z, a, ε) = ∫∫ max(0, min(z − z̄, a − ā)) G_ε(z̄) G_ε(ā) dz̄ dā`,
/// written as `∫_0^∞ Φ_ε(z − s) Φ_ε(a − s) ds`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FFamily {
    kernel: Mollifier1D,
}

/// Value and partial derivatives of `f` at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FValues {
    pub f: f64,
    pub f_z: f64,
    pub f_a: f64,
    pub f_zz: f64,
    pub f_za: f64,
    pub f_aa: f64,
    pub f_eps: f64,
    pub f_zeps: f64,
    pub f_aeps: f64,
}

const PANELS: usize = 4;
const NODES: usize = 16;

impl FFamily {
    pub fn new(epsilon: f64) -> Result<FFamily> {
        Ok(FFamily {
            kernel: Mollifier1D::new(epsilon)?,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.kernel.epsilon()
    }

    pub fn kernel(&self) -> &Mollifier1D {
        &self.kernel
    }

    pub fn f_eval(&self, z: f64, a: f64) -> f64 {
        self.eval(z, a).f
    }

    pub fn f_z(&self, z: f64, a: f64) -> f64 {
        self.eval(z, a).f_z
    }

    pub fn f_a(&self, z: f64, a: f64) -> f64 {
        self.eval(z, a).f_a
    }

    pub fn f_zz(&self, z: f64, a: f64) -> f64 {
        self.eval(z, a).f_zz
    }

    /// `f_ε = (f − z f_z − a f_a)/ε`.
    pub fn f_eps(&self, z: f64, a: f64) -> f64 {
        self.eval(z, a).f_eps
    }

    /// All partials at `(z, a)`.
    pub fn eval(&self, z: f64, a: f64) -> FValues {
        let e = self.epsilon();
        let k = &self.kernel;
        let (m, big) = if z <= a { (z, a) } else { (a, z) };
        if m <= -e {
            return FValues::default();
        }
        let mut v = FValues::default();
        if big - m >= 2.0 * e {
            // the larger argument is saturated wherever the smaller one moves
            let (f, d1, d2) = (k.second_cdf(m), k.cdf(m), k.density(m));
            v.f = f;
            if z <= a {
                v.f_z = d1;
                v.f_zz = d2;
            } else {
                v.f_a = d1;
                v.f_aa = d2;
            }
        } else {
            // s ∈ [0, big − ε]: the larger factor is 1
            let c = (big - e).max(0.0);
            let lo = c;
            let hi = m + e;
            v.f = k.second_cdf(m) - k.second_cdf(m - c)
                + gl(lo, hi, PANELS, NODES, |s| k.cdf(z - s) * k.cdf(a - s));
            // f_z = ∫ G(z−s)Φ(a−s): Φ(a−s) = 1 on s ≤ a − ε
            v.f_z = partial(k, z, a);
            v.f_a = partial(k, a, z);
            let p = gl(lo, hi, PANELS, NODES, |s| k.density(z - s) * k.density(a - s));
            v.f_za = p;
            v.f_zz = k.density(z) * k.cdf(a) - p;
            v.f_aa = k.density(a) * k.cdf(z) - p;
        }
        v.f_eps = (v.f - z * v.f_z - a * v.f_a) / e;
        v.f_zeps = -(z * v.f_zz + a * v.f_za) / e;
        v.f_aeps = -(z * v.f_za + a * v.f_aa) / e;
        v
    }
}

/// `∫_0^∞ G_ε(u − s) Φ_ε(w − s) ds`.
fn partial(k: &Mollifier1D, u: f64, w: f64) -> f64 {
    let e = k.epsilon();
    let lo = (u - e).max(0.0);
    let hi = (u + e).min(w + e);
    if hi <= lo {
        return 0.0;
    }
    let split = (w - e).clamp(lo, hi);
    // where Φ(w − s) = 1 the integral of G(u − s) is a cdf difference
    let flat = k.cdf(u - lo) - k.cdf(u - split);
    flat + gl(split, hi, PANELS, NODES, |s| k.density(u - s) * k.cdf(w - s))
}

/// `I(λ) = λ²∫_{−1}^{1} F_zz²/(1−λF_z)² dz + λ²∫_{−2}^{2} (same at z + A) dz`
/// with `F = f(·, A, 1)`, `A = 1/ε`.
pub fn i_integral(lambda: f64, eps_ref: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda}")));
    }
    let big_a = 1.0 / eps_ref;
    if big_a < 3.0 {
        return Err(Error::EpsilonTooLarge(format!(
            "reference epsilon {eps_ref}: front regions overlap"
        )));
    }
    let fam = FFamily::new(1.0)?;
    let integrand = |z: f64| {
        let v = fam.eval(z, big_a);
        let d = 1.0 - lambda * v.f_z;
        v.f_zz * v.f_zz / (d * d)
    };
    // graded panels: the integrand peaks where F_z approaches 1
    let first = gl(-1.0, 1.0, 64, 24, integrand);
    let second = gl(big_a - 2.0, big_a + 2.0, 128, 24, integrand);
    Ok(lambda * lambda * (first + second))
}

/// `I` with the stability check `|I(ε) − I(ε/2)| ≤ 1e−6`.
pub fn compute_i(lambda: f64, eps_ref: f64) -> Result<f64> {
    let i1 = i_integral(lambda, eps_ref)?;
    let i2 = i_integral(lambda, 0.5 * eps_ref)?;
    if (i1 - i2).abs() > 1e-6 {
        return Err(Error::NoConvergence(format!(
            "I({eps_ref}) = {i1:.9} but I({}) = {i2:.9}",
            0.5 * eps_ref
        )));
    }
    Ok(i1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_below_minus_eps() {
        let f = FFamily::new(0.1).unwrap();
        assert_eq!(f.eval(-0.1, 2.0), FValues::default());
        assert_eq!(f.eval(0.5, -0.2), FValues::default());
    }

    #[test]
    fn saturated_regions() {
        let f = FFamily::new(0.1).unwrap();
        // behind both fronts f = a
        assert!((f.f_eval(5.0, 1.0) - 1.0).abs() < 1e-13);
        // between the fronts f = z
        assert!((f.f_eval(0.5, 1.0) - 0.5).abs() < 1e-13);
        assert!((f.f_z(0.5, 1.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn diagonal_is_continuous() {
        let f = FFamily::new(0.2).unwrap();
        for (z, a) in [(0.3, 0.3), (0.05, -0.1), (1.0, 1.39)] {
            let v = f.eval(z, a);
            let w = f.eval(z + 1e-9, a);
            assert!((v.f - w.f).abs() < 1e-8);
            assert!((v.f_z - w.f_z).abs() < 1e-6);
        }
    }

    #[test]
    fn scaling_law() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let unit = FFamily::new(1.0).unwrap();
        for _ in 0..50 {
            let e = rng.random_range(0.005..0.2);
            let z = rng.random_range(-2.0 * e..1.5);
            let a = rng.random_range(-2.0 * e..1.5);
            let fam = FFamily::new(e).unwrap();
            let r = fam.f_eval(z, a) - e * unit.f_eval(z / e, a / e);
            assert!(r.abs() < 1e-8, "ε={e} z={z} a={a} residual {r:e}");
        }
    }

    #[test]
    fn partials_match_differences() {
        let e = 0.1;
        let fam = FFamily::new(e).unwrap();
        let h = 1e-5;
        for (z, a) in [(0.03, 0.5), (0.41, 0.5), (0.5, 0.47), (-0.05, 0.12), (0.2, 0.23), (0.9, 0.3)] {
            let v = fam.eval(z, a);
            let dz = |f: &dyn Fn(f64, f64) -> f64| (f(z + h, a) - f(z - h, a)) / (2.0 * h);
            let da = |f: &dyn Fn(f64, f64) -> f64| (f(z, a + h) - f(z, a - h)) / (2.0 * h);
            let f = |z: f64, a: f64| fam.eval(z, a).f;
            let fz = |z: f64, a: f64| fam.eval(z, a).f_z;
            let fa = |z: f64, a: f64| fam.eval(z, a).f_a;
            let close = |x: f64, y: f64| (x - y).abs() < 1e-6;
            assert!(close(v.f_z, dz(&f)), "f_z at ({z},{a})");
            assert!(close(v.f_a, da(&f)), "f_a at ({z},{a})");
            assert!(close(v.f_zz, dz(&fz)), "f_zz at ({z},{a}): {} vs {}", v.f_zz, dz(&fz));
            assert!(close(v.f_za, da(&fz)), "f_za at ({z},{a})");
            assert!(close(v.f_aa, da(&fa)), "f_aa at ({z},{a})");
            let fe = |d: f64| FFamily::new(e + d).unwrap().eval(z, a);
            let dfe = (fe(h).f - fe(-h).f) / (2.0 * h);
            assert!(close(v.f_eps, dfe), "f_eps at ({z},{a})");
            assert!(close(v.f_zeps, (fe(h).f_z - fe(-h).f_z) / (2.0 * h)));
            assert!(close(v.f_aeps, (fe(h).f_a - fe(-h).f_a) / (2.0 * h)));
        }
    }

    #[test]
    fn i_is_positive_and_stable() {
        for l in [0.8, 0.9, 0.95] {
            let i = compute_i(l, 0.01).unwrap();
            assert!(i > 0.0);
        }
    }

    #[test]
    fn i_needs_separated_fronts() {
        assert!(matches!(i_integral(0.9, 0.5), Err(Error::EpsilonTooLarge(_))));
    }
}
