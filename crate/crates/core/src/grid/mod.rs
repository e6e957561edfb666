//! Sampled functions on uniform grids and the numerical kernel built on them.

mod interp;
mod mollifier;
mod quadrature;
mod stencil;

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub use interp::{invert_monotone, Interpolant, Extension};
pub use mollifier::{
    bump, bump_cdf, bump_correlation, bump_derivative, bump_second_cdf, convolve, convolve2d,
    Field2D, Mollifier1D, Mollifier2D, Stencil2D,
};
pub(crate) use mollifier::gl_integrate;
pub use quadrature::{cumulative_integral, integrate_samples, simpson_weights};
pub use stencil::{derivative_samples, fornberg_weights};

/// Fraction of nodes on each side that must carry identity/zero data.
pub const DEFAULT_PAD: f64 = 0.1;

/// Numerical tolerances shared by all modules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub quad_tol: f64,
    pub inv_tol: f64,
    pub boundary_tol: f64,
    pub slope_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad_tol: 1e-8,
            inv_tol: 1e-10,
            boundary_tol: 1e-12,
            slope_floor: 1e-6,
        }
    }
}

/// Uniform grid `x_i = x_min + i h`, `i = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Grid> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidParameter(format!(
                "grid interval [{x_min}, {x_max}] is empty"
            )));
        }
        if n < 4 {
            return Err(Error::GridTooCoarse(format!("n = {n} < 4")));
        }
        Ok(Grid { x_min, x_max, n })
    }

    /// Grid on `[-l, l]`.
    pub fn symmetric(l: f64, n: usize) -> Result<Grid> {
        Grid::new(-l, l, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Same interval with `factor` times as many intervals.
    pub fn refine(&self, factor: usize) -> Grid {
        Grid {
            x_min: self.x_min,
            x_max: self.x_max,
            n: (self.n - 1) * factor.max(1) + 1,
        }
    }

    /// Number of pad nodes on each side for a pad fraction.
    pub fn pad_count(&self, pad: f64) -> usize {
        ((self.n as f64) * pad).floor() as usize
    }

    /// Width of the pad region in x units.
    pub fn pad_width(&self, pad: f64) -> f64 {
        self.pad_count(pad) as f64 * self.h()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
            && (self.x_min - other.x_min).abs() <= 1e-14 * (1.0 + self.x_min.abs())
            && (self.x_max - other.x_max).abs() <= 1e-14 * (1.0 + self.x_max.abs())
    }
}

/// Uniform time grid with `m` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    m: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, m: usize) -> Result<TimeGrid> {
        if m < 2 || !(t_max > t_min) {
            return Err(Error::InvalidParameter(format!(
                "time grid [{t_min}, {t_max}] with {m} samples"
            )));
        }
        Ok(TimeGrid { t_min, t_max, m })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.m - 1) as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        if k + 1 == self.m {
            self.t_max
        } else {
            self.t_min + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.m).map(|k| self.t(k)).collect()
    }

    pub fn span(&self) -> f64 {
        self.t_max - self.t_min
    }
}

/// Real function sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> GridFunction {
        let values = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> GridFunction {
        GridFunction {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise difference to `other`.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Finite-difference derivative of order 1, 2 or 3 (6th-order accurate).
    pub fn derivative(&self, order: usize) -> Result<GridFunction> {
        let values = derivative_samples(&self.values, self.grid.h(), order)?;
        Ok(GridFunction {
            grid: self.grid,
            values,
        })
    }

    /// Composite Simpson integral over the whole grid.
    pub fn integrate(&self) -> f64 {
        integrate_samples(&self.values, self.grid.h())
    }

    /// Plain cubic interpolation, zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        Interpolant::new(self).eval(x)
    }

    pub fn interpolant(&self) -> Interpolant {
        Interpolant::new(self)
    }

    /// Resample onto another grid by plain cubic interpolation.
    pub fn resample(&self, grid: Grid) -> GridFunction {
        let it = self.interpolant();
        GridFunction::from_fn(grid, |x| it.eval(x))
    }

    /// Largest magnitude on the outermost pad nodes.
    pub fn pad_max(&self, pad: f64) -> f64 {
        let p = self.grid.pad_count(pad).max(1);
        let n = self.values.len();
        self.values[..p]
            .iter()
            .chain(&self.values[n - p..])
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Verifies the data vanishes on the pad.
    pub fn check_compact(&self, pad: f64, tol: f64) -> Result<()> {
        let m = self.pad_max(pad);
        if m > tol {
            Err(Error::SupportEscape(format!(
                "|values| = {m:.3e} on the pad exceeds {tol:.1e}"
            )))
        } else {
            Ok(())
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for i in 0..self.grid.n() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.x(i), self.values[i])?;
        }
        Ok(())
    }

    /// Reads the `x,value` format written by [`GridFunction::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<GridFunction> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("x,") {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Parse(format!("short line `{line}`")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("`{line}`: {e}")))
            };
            xs.push(parse(parts.next())?);
            vs.push(parse(parts.next())?);
        }
        if xs.len() < 4 {
            return Err(Error::Parse(format!("only {} samples", xs.len())));
        }
        let grid = Grid::new(xs[0], xs[xs.len() - 1], xs.len())?;
        let h = grid.h();
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.x(i)).abs() > 1e-9 * h.max(1.0) {
                return Err(Error::Parse(format!("non-uniform node {i}: {x}")));
            }
        }
        GridFunction::new(grid, vs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_tiny_n() {
        assert!(matches!(Grid::new(0.0, 1.0, 3), Err(Error::GridTooCoarse(_))));
        assert!(Grid::new(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn last_node_is_exact() {
        let g = Grid::new(-10.0, 10.0, 2049).unwrap();
        assert_eq!(g.x(2048), 10.0);
        assert_eq!(g.x(1024), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::new(-1.0, 2.0, 33).unwrap();
        let f = GridFunction::from_fn(g, |x| (3.0 * x).sin() / 7.0);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
        assert!(back.grid().same_as(f.grid()));
    }

    #[test]
    fn pad_check() {
        let g = Grid::symmetric(10.0, 201).unwrap();
        let f = GridFunction::from_fn(g, |x| if x.abs() < 5.0 { 1.0 } else { 0.0 });
        assert!(f.check_compact(DEFAULT_PAD, 1e-12).is_ok());
        let f = GridFunction::from_fn(g, |x| x);
        assert!(matches!(
            f.check_compact(DEFAULT_PAD, 1e-12),
            Err(Error::SupportEscape(_))
        ));
    }
}
