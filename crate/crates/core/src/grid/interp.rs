use super::stencil::derivative_samples;
use super::{Grid, GridFunction, Tolerances};
use crate::error::{Error, Result};

/// Behaviour of an interpolant outside its grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// Stored data is taken as zero (compact support).
    Zero,
    /// Continue linearly with the end slopes.
    Linear,
}

/// Piecewise-polynomial Hermite interpolant on a uniform grid.
///
/// Cells carry quintic Hermite data (values, 6th-order first and second
/// derivatives), which is C² and accurate to O(h⁶). Monotone interpolants
/// check every cell and fall back to a Fritsch-Carlson limited cubic on cells
/// where the quintic is not increasing.
///
/// When `offset` is set the represented function is `x + p(x)` where `p` is
/// built from the stored data; this is how diffeomorphisms `Id + g` are
/// handled without losing precision in `g`.
#[derive(Clone, Debug)]
pub struct Interpolant {
    grid: Grid,
    values: Vec<f64>,
    slopes: Vec<f64>,
    second: Vec<f64>,
    // per cell: Some((m0, m1)) limited cubic slopes of the stored data
    fallback: Vec<Option<(f64, f64)>>,
    offset: bool,
    extension: Extension,
}

fn node_derivatives(values: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let d1 = derivative_samples(values, h, 1)
        .or_else(|_| derivative_samples(values, h, 1))
        .unwrap_or_else(|_| vec![0.0; n]);
    let d2 = derivative_samples(values, h, 2)
        .or_else(|_| derivative_samples(values, h, 2))
        .unwrap_or_else(|_| vec![0.0; n]);
    (d1, d2)
}

impl Interpolant {
    /// Plain interpolant, zero outside the grid.
    pub fn new(f: &GridFunction) -> Interpolant {
        let (slopes, second) = node_derivatives(f.values(), f.grid().h());
        Interpolant {
            grid: *f.grid(),
            values: f.values().to_vec(),
            slopes,
            second,
            fallback: vec![None; f.values().len().saturating_sub(1)],
            offset: false,
            extension: Extension::Zero,
        }
    }

    /// Monotone interpolant of an increasing map given by its values.
    pub fn monotone_map(f: &GridFunction) -> Result<Interpolant> {
        let mut it = Interpolant::new(f);
        it.extension = Extension::Linear;
        it.limit()?;
        Ok(it)
    }

    /// Monotone interpolant of `x + g(x)` from the displacement `g`;
    /// the identity outside the grid.
    pub fn monotone_displacement(g: &GridFunction) -> Result<Interpolant> {
        let mut it = Interpolant::new(g);
        it.offset = true;
        it.extension = Extension::Zero;
        it.limit()?;
        Ok(it)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of cells using the limited cubic.
    pub fn limited_cells(&self) -> usize {
        self.fallback.iter().filter(|c| c.is_some()).count()
    }

    fn total_value(&self, i: usize) -> f64 {
        if self.offset {
            self.grid.x(i) + self.values[i]
        } else {
            self.values[i]
        }
    }

    fn total_slope(&self, i: usize) -> f64 {
        if self.offset {
            1.0 + self.slopes[i]
        } else {
            self.slopes[i]
        }
    }

    /// Marks non-increasing quintic cells and gives them Fritsch-Carlson slopes.
    fn limit(&mut self) -> Result<()> {
        let n = self.grid.n();
        let h = self.grid.h();
        let off = if self.offset { 1.0 } else { 0.0 };
        let secant: Vec<f64> = (0..n - 1)
            .map(|k| (self.total_value(k + 1) - self.total_value(k)) / h)
            .collect();
        for (k, &d) in secant.iter().enumerate() {
            if !(d > 0.0) {
                return Err(Error::NotDiffeomorphism(format!(
                    "secant slope {d:.3e} in cell {k}"
                )));
            }
        }
        let mut m: Vec<f64> = (0..n).map(|i| self.total_slope(i).max(0.0)).collect();
        for k in 0..n - 1 {
            let a = m[k] / secant[k];
            let b = m[k + 1] / secant[k];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[k] = tau * a * secant[k];
                m[k + 1] = tau * b * secant[k];
            }
        }
        for k in 0..n - 1 {
            let increasing = (0..=16).all(|j| {
                let t = j as f64 / 16.0;
                let (_, dp) = self.quintic(k, t);
                dp + off > 0.0
            });
            if !increasing {
                self.fallback[k] = Some((m[k] - off, m[k + 1] - off));
            }
        }
        Ok(())
    }

    /// Cell index and local coordinate in `[0,1]`, or `None` outside.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let (lo, hi) = (self.grid.x_min(), self.grid.x_max());
        if !(x >= lo && x <= hi) {
            return None;
        }
        let h = self.grid.h();
        let n = self.grid.n();
        let s = (x - lo) / h;
        let r = s.round();
        if (s - r).abs() < 1e-11 {
            // snap to the node so node values are reproduced bit for bit
            let j = r as usize;
            return Some(if j >= n - 1 { (n - 2, 1.0) } else { (j, 0.0) });
        }
        let k = (s.floor() as usize).min(n - 2);
        Some((k, s - k as f64))
    }

    fn quintic(&self, k: usize, t: f64) -> (f64, f64) {
        let h = self.grid.h();
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let (s0, s1) = (self.second[k] * h * h, self.second[k + 1] * h * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let v = (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5) * y0
            + (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5) * d0
            + (0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5) * s0
            + (0.5 * t3 - t4 + 0.5 * t5) * s1
            + (-4.0 * t3 + 7.0 * t4 - 3.0 * t5) * d1
            + (10.0 * t3 - 15.0 * t4 + 6.0 * t5) * y1;
        let dv = (-30.0 * t2 + 60.0 * t3 - 30.0 * t4) * (y0 - y1)
            + (1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4) * d0
            + (t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4) * s0
            + (1.5 * t2 - 4.0 * t3 + 2.5 * t4) * s1
            + (-12.0 * t2 + 28.0 * t3 - 15.0 * t4) * d1;
        (v, dv / h)
    }

    fn cubic(&self, k: usize, t: f64, m0: f64, m1: f64) -> (f64, f64) {
        let h = self.grid.h();
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (m0 * h, m1 * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let dv = ((6.0 * t2 - 6.0 * t) * (y0 - y1)
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        (v, dv)
    }

    fn cell(&self, k: usize, t: f64) -> (f64, f64) {
        match self.fallback[k] {
            None => self.quintic(k, t),
            Some((m0, m1)) => self.cubic(k, t, m0, m1),
        }
    }

    /// Value and first derivative at `x`.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let (p, dp) = match self.locate(x) {
            Some((k, t)) => self.cell(k, t),
            None => match self.extension {
                Extension::Zero => (0.0, 0.0),
                Extension::Linear => {
                    let n = self.grid.n();
                    let i = if x < self.grid.x_min() { 0 } else { n - 1 };
                    let x0 = self.grid.x(i);
                    (self.values[i] + self.slopes[i] * (x - x0), self.slopes[i])
                }
            },
        };
        if self.offset {
            (x + p, 1.0 + dp)
        } else {
            (p, dp)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }

    /// Stored-data value without the identity offset (the displacement).
    pub fn eval_data(&self, x: f64) -> f64 {
        let v = self.eval(x);
        if self.offset {
            v - x
        } else {
            v
        }
    }

    /// Solves `self(x) = y` for an increasing interpolant.
    pub fn solve(&self, y: f64, tol: f64) -> f64 {
        let n = self.grid.n();
        let y_first = self.total_value(0);
        let y_last = self.total_value(n - 1);
        if y < y_first || y > y_last {
            let i = if y < y_first { 0 } else { n - 1 };
            let x0 = self.grid.x(i);
            let slope = self.total_slope(i);
            return match (self.offset, self.extension) {
                (true, Extension::Zero) => y,
                _ if slope > 0.0 => x0 + (y - self.total_value(i)) / slope,
                _ => x0,
            };
        }
        // binary search for the bracketing cell
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.total_value(mid) <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = lo;
        let h = self.grid.h();
        let xk = self.grid.x(k);
        let f = |t: f64| -> (f64, f64) {
            let (p, dp) = self.cell(k, t);
            if self.offset {
                (xk + t * h + p - y, 1.0 + dp)
            } else {
                (p - y, dp)
            }
        };
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let fa = f(a).0;
        if fa == 0.0 {
            return xk;
        }
        let mut t = 0.5;
        let target = 1e-3 * tol;
        for _ in 0..200 {
            let (r, dr) = f(t);
            if r.abs() <= target {
                break;
            }
            if (r < 0.0) == (fa < 0.0) {
                a = t;
            } else {
                b = t;
            }
            let dt_dx = dr * h;
            let newton = if dt_dx > 0.0 { t - r / dt_dx } else { f64::NAN };
            t = if newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if b - a < 1e-16 {
                break;
            }
        }
        xk + t * h
    }
}

/// Samples of `φ⁻¹` on the same grid for an increasing map given by values.
pub fn invert_monotone(map: &GridFunction, tol: &Tolerances) -> Result<GridFunction> {
    let h = map.grid().h();
    for (k, w) in map.values().windows(2).enumerate() {
        let s = (w[1] - w[0]) / h;
        if !(s > tol.slope_floor) {
            return Err(Error::NotDiffeomorphism(format!(
                "discrete slope {s:.3e} in cell {k}"
            )));
        }
    }
    let it = Interpolant::monotone_map(map)?;
    let grid = *map.grid();
    Ok(GridFunction::from_fn(grid, |y| it.solve(y, tol.inv_tol)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_values_are_exact() {
        let g = Grid::new(0.0, 3.0, 31).unwrap();
        let f = GridFunction::from_fn(g, |x| x.sin());
        let it = f.interpolant();
        for i in 0..31 {
            assert_eq!(it.eval(g.x(i)), f.values()[i]);
        }
    }

    #[test]
    fn extension_modes() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let f = GridFunction::from_fn(g, |x| 2.0 * x + 1.0);
        assert_eq!(f.interpolate(1.5), 0.0);
        let m = Interpolant::monotone_map(&f).unwrap();
        assert!((m.eval(1.5) - 4.0).abs() < 1e-12);
        assert!((m.eval(-0.5) - 0.0).abs() < 1e-12);
        let d = Interpolant::monotone_displacement(&GridFunction::zeros(g)).unwrap();
        assert_eq!(d.eval(7.0), 7.0);
    }

    #[test]
    fn monotone_limiting_keeps_cells_increasing() {
        // steep logistic data that plain cubics overshoot
        let g = Grid::new(-1.0, 1.0, 21).unwrap();
        let f = GridFunction::from_fn(g, |x| 1.0 / (1.0 + (-40.0 * x).exp()) + 1e-3 * x);
        let it = Interpolant::monotone_map(&f).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for j in 0..=4000 {
            let x = -1.0 + 2.0 * j as f64 / 4000.0;
            let v = it.eval(x);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn non_monotone_rejected() {
        let g = Grid::new(-1.0, 1.0, 21).unwrap();
        let f = GridFunction::from_fn(g, |x| x * x);
        assert!(matches!(
            invert_monotone(&f, &Tolerances::default()),
            Err(Error::NotDiffeomorphism(_))
        ));
    }
}
