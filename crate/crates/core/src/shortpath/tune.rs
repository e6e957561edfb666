//! Choosing `ε₀, ε₁` so that a loop shifts the center by a prescribed amount.

use super::family::compute_i;
use super::lemma::{measure_loop, predicted_drift, LoopParams, LoopMeasures};
use crate::error::{Error, Result};
use crate::geodesic::{EnergyReport, LiftConvention};

/// Solver settings of [`tune_center`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TuneConfig {
    /// Upper bound on the loop energy.
    pub budget: f64,
    /// Accepted relative error of the center shift.
    pub rel_tol: f64,
    /// Relative error at which the iteration stops early.
    pub solve_tol: f64,
    pub max_iter: usize,
    /// Number of times `ε₀` may be halved to reach the target.
    pub max_halvings: usize,
    pub convention: LiftConvention,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            budget: 0.05,
            rel_tol: 1e-2,
            solve_tol: 1e-7,
            max_iter: 40,
            max_halvings: 4,
            convention: LiftConvention::default(),
        }
    }
}

/// A loop whose horizontal lift ends at `(Id, achieved_a)`.
#[derive(Clone, Debug)]
pub struct TunedLoop {
    pub params: LoopParams,
    pub measures: LoopMeasures,
    pub achieved_a: f64,
    /// Loop energy with the placement scale applied.
    pub report: EnergyReport,
    /// `(ε₁, drift)` pairs evaluated by the solver.
    pub history: Vec<(f64, f64)>,
}

impl TunedLoop {
    pub fn eps0(&self) -> f64 {
        self.params.eps0
    }

    pub fn eps1(&self) -> f64 {
        self.params.eps1
    }

    pub fn drift(&self) -> f64 {
        self.measures.drift()
    }
}

/// Largest `|ε₁|`: keeps `ε(t)` within `[ε₀/2, 3ε₀/2]`.
pub fn eps1_limit(eps0: f64) -> f64 {
    0.5 / eps0.sqrt()
}

fn with_eps1(p: &LoopParams, e1: f64) -> LoopParams {
    LoopParams { eps1: e1, ..*p }
}

/// Root of the predicted drift in `ε₁` on `[-limit, limit]`, by bisection.
fn predicted_eps1(p: &LoopParams, i: f64, want: f64) -> Option<f64> {
    let lim = eps1_limit(p.eps0);
    let d = |e1: f64| predicted_drift(&with_eps1(p, e1), i) - want;
    let (mut lo, mut hi) = (-lim, lim);
    if d(lo) > 0.0 || d(hi) < 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn finish(
    mut params: LoopParams,
    measures: LoopMeasures,
    cfg: &TuneConfig,
    history: Vec<(f64, f64)>,
) -> Result<TunedLoop> {
    let unit = measures.forward.report().concat(&measures.back.report());
    let fit = if unit.energy > 0.0 {
        (0.9 * cfg.budget / unit.energy).cbrt()
    } else {
        1.0
    };
    let scale = measures.params.placement.scale.min(fit);
    params.placement.scale = scale;
    let measures = LoopMeasures { params, ..measures };
    let report = measures.report();
    if !(report.energy <= cfg.budget) {
        return Err(Error::NoConvergence(format!(
            "loop energy {:.4e} above budget {:.4e}",
            report.energy, cfg.budget
        )));
    }
    Ok(TunedLoop {
        params,
        achieved_a: cfg.convention.kappa() * measures.drift(),
        measures,
        report,
        history,
    })
}

/// Finds `ε₁` (halving `ε₀` when the target is out of reach) such that the
/// loop's center shift `κ ∫∫ φ_tx φ_xx / φ_x²` equals `target_a`, then
/// shrinks the loop until its energy is within the budget.
pub fn tune_center(target_a: f64, params: &LoopParams, cfg: &TuneConfig) -> Result<TunedLoop> {
    if !target_a.is_finite() {
        return Err(Error::InvalidParameter(format!("target a = {target_a}")));
    }
    let kappa = cfg.convention.kappa();
    if kappa == 0.0 {
        return Err(Error::InvalidParameter("lift factor is zero".into()));
    }
    let mut p = with_eps1(params, 0.0);
    p.validate()?;
    if target_a == 0.0 {
        let m = measure_loop(&p)?;
        let d = m.drift();
        return finish(p, m, cfg, vec![(0.0, d)]);
    }
    let want = target_a / kappa;
    let i = compute_i(p.lambda, 0.01)?;
    let mut history = Vec::new();

    for _ in 0..=cfg.max_halvings {
        let Some(seed) = predicted_eps1(&p, i, want) else {
            p.eps0 *= 0.5;
            continue;
        };
        let lim = eps1_limit(p.eps0);
        let eval = |e1: f64, history: &mut Vec<(f64, f64)>| -> Result<(f64, LoopMeasures)> {
            let q = with_eps1(&p, e1);
            q.validate()?;
            let m = measure_loop(&q)?;
            history.push((e1, m.drift()));
            Ok((m.drift() - want, m))
        };
        let (mut xa, (mut fa, ma)) = (seed, eval(seed, &mut history)?);
        if fa.abs() <= cfg.solve_tol * want.abs() {
            return finish(with_eps1(&p, xa), ma, cfg, history);
        }
        // second point from the near-proportionality of drift and ε₁
        let mut xb = (xa * want / (fa + want)).clamp(-lim, lim);
        if xb == xa {
            xb = xa * (1.0 - 1e-3);
        }
        let (mut fb, mut mb) = eval(xb, &mut history)?;
        let mut bracket: Option<((f64, f64), (f64, f64))> = None;
        for _ in 0..cfg.max_iter {
            if fb.abs() <= cfg.solve_tol * want.abs() {
                break;
            }
            if fa * fb < 0.0 {
                bracket = Some(((xa, fa), (xb, fb)));
            }
            let mut x = xb - fb * (xb - xa) / (fb - fa);
            if let Some(((l, fl), (r, fr))) = bracket {
                let (lo, hi) = (l.min(r), l.max(r));
                if !(x > lo && x < hi) || !x.is_finite() {
                    // Illinois-style fallback inside the bracket
                    x = l - fl * (r - l) / (fr - fl);
                    if !(x > lo && x < hi) {
                        x = 0.5 * (l + r);
                    }
                }
            }
            let x = x.clamp(-lim, lim);
            let (fx, mx) = eval(x, &mut history)?;
            xa = xb;
            fa = fb;
            xb = x;
            fb = fx;
            mb = mx;
        }
        if fb.abs() <= cfg.rel_tol * want.abs() {
            return finish(with_eps1(&p, xb), mb, cfg, history);
        }
        return Err(Error::NoConvergence(format!(
            "center target {target_a}: drift error {:.3e} after {} evaluations; sweep (ε₁, drift) = {history:?}",
            fb,
            history.len()
        )));
    }
    Err(Error::NoConvergence(format!(
        "center target {target_a} out of reach down to ε₀ = {:.3e}; sweep (ε₁, drift) = {history:?}",
        p.eps0
    )))
}
