use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Fornberg's algorithm: `w[k][j]` is the weight of node `z[j]` for the
/// `k`-th derivative at `x0`, for all `k <= m`.
pub fn fornberg_weights(x0: f64, z: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = z.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = z[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = z[i] - x0;
        for j in 0..i {
            let c3 = z[i] - z[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Integer-spaced weights for one derivative order.
struct Stencil {
    radius: usize,
    interior: Vec<f64>,
    width: usize,
    // left[i]: weights on nodes 0..width for node i < radius
    left: Vec<Vec<f64>>,
    // right[r]: weights on the last `width` nodes for node n-1-r
    right: Vec<Vec<f64>>,
}

impl Stencil {
    fn build(order: usize, radius: usize, width: usize) -> Stencil {
        let centered: Vec<f64> = (0..=2 * radius)
            .map(|j| j as f64 - radius as f64)
            .collect();
        let interior = fornberg_weights(0.0, &centered, order)[order].clone();
        let window: Vec<f64> = (0..width).map(|j| j as f64).collect();
        let left = (0..radius)
            .map(|i| fornberg_weights(i as f64, &window, order)[order].clone())
            .collect();
        let right = (0..radius)
            .map(|r| fornberg_weights((width - 1 - r) as f64, &window, order)[order].clone())
            .collect();
        Stencil {
            radius,
            interior,
            width,
            left,
            right,
        }
    }

    fn min_nodes(&self) -> usize {
        self.width.max(2 * self.radius + 1)
    }

    fn apply(&self, values: &[f64], h: f64, order: usize) -> Result<Vec<f64>> {
        let n = values.len();
        if n < self.min_nodes() {
            return Err(Error::GridTooCoarse(format!(
                "{n} nodes, order-{order} stencil needs {}",
                self.min_nodes()
            )));
        }
        let scale = h.powi(order as i32).recip();
        let r = self.radius;
        let mut out = vec![0.0; n];
        for i in r..n - r {
            let s: f64 = self
                .interior
                .iter()
                .zip(&values[i - r..=i + r])
                .map(|(w, v)| w * v)
                .sum();
            out[i] = s * scale;
        }
        for i in 0..r {
            let s: f64 = self.left[i]
                .iter()
                .zip(&values[..self.width])
                .map(|(w, v)| w * v)
                .sum();
            out[i] = s * scale;
            let s: f64 = self.right[i]
                .iter()
                .zip(&values[n - self.width..])
                .map(|(w, v)| w * v)
                .sum();
            out[n - 1 - i] = s * scale;
        }
        Ok(out)
    }
}

fn stencil(order: usize) -> &'static Stencil {
    static TABLE: OnceLock<[Stencil; 3]> = OnceLock::new();
    &TABLE.get_or_init(|| {
        [
            Stencil::build(1, 3, 8),
            Stencil::build(2, 3, 8),
            Stencil::build(3, 4, 9),
        ]
    })[order - 1]
}

/// 6th-order finite-difference derivative of uniformly spaced samples.
///
/// Centered stencils in the interior (7 points, 9 for the third
/// derivative), one-sided windows of 8 or 9 points at the edges.
pub fn derivative_samples(values: &[f64], h: f64, order: usize) -> Result<Vec<f64>> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "derivative order {order} not in 1..=3"
        )));
    }
    stencil(order).apply(values, h, order)
}
