//! CSV output for parameter sweeps and figure samples.

use std::io::Write;

use super::corner::{corner_path, CornerPath, CornerPathParams};
use super::lemma::{LegBounds, LoopParams, Leg};
use crate::error::Result;

/// One line of a corner-path sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub lambda: f64,
    pub energy: f64,
    pub length: f64,
    pub endpoint_err: f64,
    pub drift: f64,
}

impl SweepRow {
    pub fn from_corner(c: &CornerPath) -> SweepRow {
        SweepRow {
            epsilon: c.epsilon,
            lambda: c.lambda,
            energy: c.report.energy,
            length: c.report.length,
            endpoint_err: c.endpoint_error,
            drift: c.drift(),
        }
    }
}

/// Runs `corner_path` for each `ε` with `λ = 1 − ε` and the resolutions of `base`.
pub fn corner_sweep(base: &CornerPathParams, eps: &[f64]) -> Result<Vec<SweepRow>> {
    eps.iter()
        .map(|&e| {
            let p = CornerPathParams {
                epsilon: e,
                lambda: 1.0 - e,
                ..base.clone()
            };
            Ok(SweepRow::from_corner(&corner_path(&p)?))
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_power(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "# schema=1")?;
    writeln!(w, "epsilon,lambda,energy,length,endpoint_err,drift")?;
    for r in rows {
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.epsilon, r.lambda, r.energy, r.length, r.endpoint_err, r.drift
        )?;
    }
    Ok(())
}

/// `eps0,lambda,band,band_over_eps,edge,edge_limit,eps_dot_f_eps` rows.
pub fn write_bounds_csv<W: Write>(rows: &[(LoopParams, LegBounds)], mut w: W) -> Result<()> {
    writeln!(w, "# schema=1")?;
    writeln!(w, "eps0,lambda,band,band_over_eps,edge,edge_limit,eps_dot_f_eps")?;
    for (p, b) in rows {
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            p.eps0,
            p.lambda,
            b.band,
            b.band / p.eps_max(),
            b.edge,
            b.edge_limit,
            b.eps_dot_f_eps
        )?;
    }
    Ok(())
}

/// Samples of the forward leg `φ(t − Δ, ·)`, `φ(t, ·)`, `φ(t + Δ, ·)` on the
/// local grid, every `stride`-th node.
pub fn write_figure_csv<W: Write>(
    params: &LoopParams,
    t: f64,
    delta: f64,
    stride: usize,
    mut w: W,
) -> Result<()> {
    params.validate()?;
    let grid = params.space_grid();
    writeln!(w, "# schema=1")?;
    writeln!(w, "# t={t:.6},delta={delta:.6}")?;
    writeln!(w, "x,g,phi_minus,phi,phi_plus")?;
    for i in (0..grid.n()).step_by(stride.max(1)) {
        let x = grid.x(i);
        let at = |s: f64| -> Result<f64> { Ok(x + params.point(Leg::Forward, s, x)?.disp) };
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            x,
            params.profile.eval(x).0,
            at(t - delta)?,
            at(t)?,
            at(t + delta)?
        )?;
    }
    Ok(())
}
