/// Composite Simpson weights for `n` uniformly spaced samples at unit spacing.
///
/// For even `n` the two ways of closing with a 3/8 panel (left or right) are
/// averaged, which keeps the weights symmetric and exact for cubics.
pub fn simpson_weights(n: usize) -> Vec<f64> {
    match n {
        0 | 1 => vec![0.0; n],
        2 => vec![0.5, 0.5],
        3 => vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
        _ if n % 2 == 1 => odd_simpson(n),
        _ => {
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            // Simpson on 0..n-3, 3/8 on the last three intervals
            add_simpson(&mut a, 0, n - 3);
            add_three_eighths(&mut a, n - 4);
            // 3/8 on the first three intervals, Simpson on 3..n
            add_three_eighths(&mut b, 0);
            add_simpson(&mut b, 3, n - 3);
            a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
        }
    }
}

fn odd_simpson(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    add_simpson(&mut w, 0, n);
    w
}

fn add_simpson(w: &mut [f64], start: usize, len: usize) {
    if len < 3 {
        return;
    }
    let mut i = start;
    while i + 2 < start + len {
        w[i] += 1.0 / 3.0;
        w[i + 1] += 4.0 / 3.0;
        w[i + 2] += 1.0 / 3.0;
        i += 2;
    }
}

fn add_three_eighths(w: &mut [f64], start: usize) {
    w[start] += 3.0 / 8.0;
    w[start + 1] += 9.0 / 8.0;
    w[start + 2] += 9.0 / 8.0;
    w[start + 3] += 3.0 / 8.0;
}

/// Composite Simpson integral of uniformly spaced samples.
pub fn integrate_samples(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n % 2 == 1 && n >= 3 {
        // direct odd case avoids allocating weights in hot loops
        let mut s = values[0] + values[n - 1];
        let mut i = 1;
        while i < n - 1 {
            s += 4.0 * values[i];
            if i + 1 < n - 1 {
                s += 2.0 * values[i + 1];
            }
            i += 2;
        }
        return s * h / 3.0;
    }
    simpson_weights(n)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum::<f64>()
        * h
}

/// Running integral `F_k = ∫_{x_0}^{x_k} f`, 4th order, from cubic panels.
pub fn cumulative_integral(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for k in 1..n {
            out[k] = out[k - 1] + 0.5 * h * (values[k - 1] + values[k]);
        }
        return out;
    }
    let f = values;
    for k in 0..n - 1 {
        let piece = if k == 0 {
            (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0
        } else if k == n - 2 {
            (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]) / 24.0
        } else {
            (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]) / 24.0
        };
        out[k + 1] = out[k] + piece * h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(x: f64) -> f64 {
        2.0 * x.powi(3) - x * x + 3.0 * x - 1.0
    }

    fn cubic_antider(x: f64) -> f64 {
        0.5 * x.powi(4) - x.powi(3) / 3.0 + 1.5 * x * x - x
    }

    #[test]
    fn cubics_exact_for_all_n() {
        for n in 4..40 {
            let (a, b) = (-0.7, 1.3);
            let h = (b - a) / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| cubic(a + i as f64 * h)).collect();
            let exact = cubic_antider(b) - cubic_antider(a);
            assert!((integrate_samples(&v, h) - exact).abs() < 1e-12, "n={n}");
            let c = cumulative_integral(&v, h);
            for k in 0..n {
                let e = cubic_antider(a + k as f64 * h) - cubic_antider(a);
                assert!((c[k] - e).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn even_weights_are_symmetric() {
        for n in [4, 6, 10, 64] {
            let w = simpson_weights(n);
            for i in 0..n {
                assert!((w[i] - w[n - 1 - i]).abs() < 1e-15);
            }
            assert!((w.iter().sum::<f64>() - (n - 1) as f64).abs() < 1e-12);
        }
    }
}
