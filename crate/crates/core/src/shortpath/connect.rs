//! Assembly of a short path from `(Id, 0)` to an arbitrary `(φ, a)`: a
//! mollified corner path to `φ`, lifted horizontally, followed by center
//! loops placed beside the support of `φ` and right-translated by its end.

use super::corner::{corner_path, CornerPath, CornerPathParams};
use super::family::compute_i;
use super::lemma::{predicted_drift, LoopParams, Leg, Placement};
use super::tune::{eps1_limit, tune_center, TuneConfig, TunedLoop};
use crate::diffeo::{DiscretePath, Diffeo};
use crate::error::{Error, Result};
use crate::geodesic::EnergyReport;
use crate::grid::{GridFunction, TimeGrid, Tolerances, DEFAULT_PAD};
use crate::virasoro::VirElement;

/// Frames per loop leg in the assembled path.
const LEG_FRAMES: usize = 6;

/// Settings of [`connect`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectConfig {
    /// First mollifier width tried for the corner stage.
    pub eps_start: f64,
    /// Halvings of `ε` allowed while the corner stage is too long.
    pub max_halvings: usize,
    pub points_per_eps: usize,
    pub supersample: usize,
    /// Loop parameters; the placement is chosen by [`connect`].
    pub lemma: LoopParams,
    pub tune: TuneConfig,
    /// Distance between the support of `φ` and the loops.
    pub gap: f64,
    /// Largest accepted `sup |ψ(end) − φ|` of the corner stage.
    pub endpoint_tol: f64,
    /// Fraction of `|ε₁|`'s range one loop may use before loops are repeated.
    pub loop_capacity: f64,
}

impl Default for ConnectConfig {
    fn default() -> Self {
        ConnectConfig {
            eps_start: 0.2,
            max_halvings: 8,
            points_per_eps: 6,
            supersample: 4,
            lemma: LoopParams {
                eps0: 0.05,
                ..LoopParams::default()
            },
            tune: TuneConfig {
                budget: f64::INFINITY,
                ..TuneConfig::default()
            },
            gap: 0.05,
            endpoint_tol: 1e-2,
            loop_capacity: 0.7,
        }
    }
}

/// Result of [`connect`].
#[derive(Clone, Debug)]
pub struct Connection {
    pub path: DiscretePath<VirElement>,
    pub report: EnergyReport,
    /// Mollifier width and energy of the corner stage, if there is one.
    pub corner: Option<(f64, EnergyReport)>,
    /// Center reached by the lifted corner stage.
    pub center_after_corner: f64,
    pub tuned: Option<TunedLoop>,
    /// Number of times the tuned loop is traversed.
    pub repeats: usize,
    pub endpoint_base_error: f64,
    pub endpoint_center: f64,
}

impl Connection {
    /// `|α(end) − a| / |a|`, or the absolute error when `a = 0`.
    pub fn center_error(&self, target_a: f64) -> f64 {
        let e = (self.endpoint_center - target_a).abs();
        if target_a == 0.0 {
            e
        } else {
            e / target_a.abs()
        }
    }
}

fn support_hi(g: &GridFunction, tol: f64) -> Option<f64> {
    let i = g.values().iter().rposition(|v| v.abs() > tol)?;
    Some(g.grid().x(i))
}

fn corner_stage(
    g: &GridFunction,
    delta: f64,
    cfg: &ConnectConfig,
    frames: usize,
) -> Result<CornerPath> {
    let mut eps = cfg.eps_start;
    for _ in 0..=cfg.max_halvings {
        let params = CornerPathParams {
            points_per_eps: cfg.points_per_eps,
            supersample: cfg.supersample,
            frames,
            ..CornerPathParams::new(g.clone(), eps)
        };
        let c = corner_path(&params)?;
        if c.report.length < 0.5 * delta && c.endpoint_error < cfg.endpoint_tol {
            return Ok(c);
        }
        eps *= 0.5;
    }
    Err(Error::NoConvergence(format!(
        "corner stage still longer than δ/2 = {} or off target by more than {} at ε = {}",
        0.5 * delta,
        cfg.endpoint_tol,
        2.0 * eps
    )))
}

/// Running drift rescaled so that its last value is the Simpson total.
fn normalized(cumulative: &[f64], total: f64) -> Vec<f64> {
    let last = cumulative.last().copied().unwrap_or(0.0);
    if last == 0.0 {
        return cumulative.to_vec();
    }
    cumulative.iter().map(|c| c * total / last).collect()
}

/// Base of `ψ ∘ φ` when the displacements have disjoint supports.
fn disjoint_sum(psi: &Diffeo, phi: &Diffeo) -> Result<Diffeo> {
    let (a, b) = (psi.displacement(), phi.displacement());
    if a.values().iter().zip(b.values()).any(|(u, v)| *u != 0.0 && *v != 0.0) {
        return Err(Error::SupportEscape("loop overlaps the support of φ".into()));
    }
    Diffeo::from_displacement(a.zip_with(b, |u, v| u + v)?)
}

/// Loops needed so that each one stays within the comfortable `ε₁` range.
fn loop_count(shift: f64, cfg: &ConnectConfig) -> Result<usize> {
    let p = cfg.lemma;
    let i = compute_i(p.lambda, 0.01)?;
    let lim = cfg.loop_capacity * eps1_limit(p.eps0);
    let cap = |e1: f64| {
        cfg.tune.convention.kappa() * predicted_drift(&LoopParams { eps1: e1, ..p }, i)
    };
    let per = if shift * cap(lim) > 0.0 {
        cap(lim).abs()
    } else {
        cap(-lim).abs()
    };
    Ok(((shift.abs() / per).ceil() as usize).max(1))
}

/// Builds a path from `(Id, 0)` to `target` of length below `δ` plus the
/// loop stage's share, which is also kept below `δ/2`.
pub fn connect(target: &VirElement, delta: f64, cfg: &ConnectConfig) -> Result<Connection> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta}")));
    }
    let grid = *target.phi.grid();
    let g = target.phi.displacement();
    let tol = Tolerances::default();
    let kappa = cfg.tune.convention.kappa();
    let moves = g.max_abs() > tol.boundary_tol;

    // corner stage: its length decides ε; frames are resampled once the
    // number of loops is known
    let probe = if moves {
        Some(corner_stage(g, delta, cfg, 2).map_err(|e| e.in_stage("corner"))?)
    } else {
        None
    };
    let estimate = probe.as_ref().map_or(0.0, |c| kappa * c.measures.drift());
    let repeats = if target.alpha == estimate {
        0
    } else {
        loop_count(target.alpha - estimate, cfg).map_err(|e| e.in_stage("loop count"))?
    };
    let frames = LEG_FRAMES * 2 * repeats.max(1) + 1;
    let corner = match probe {
        Some(c) => {
            let params = CornerPathParams {
                points_per_eps: cfg.points_per_eps,
                supersample: cfg.supersample,
                frames,
                ..CornerPathParams::new(g.clone(), c.epsilon)
            };
            Some(corner_path(&params).map_err(|e| e.in_stage("corner"))?)
        }
        None => None,
    };
    let center_after_corner = corner.as_ref().map_or(0.0, |c| kappa * c.drift());
    let shift = target.alpha - center_after_corner;
    let phi_end = corner
        .as_ref()
        .map_or_else(|| Diffeo::identity(grid), |c| c.endpoint.clone());

    // loop stage
    let tuned = if repeats > 0 {
        let base = LoopParams {
            placement: Placement::default(),
            ..cfg.lemma
        };
        let mut t = tune_center(shift / repeats as f64, &base, &cfg.tune)
            .map_err(|e| e.in_stage("tune center"))?;
        let unit = t.measures.forward.report().concat(&t.measures.back.report());
        let (lo, hi) = t.params.profile.support();
        let pad = grid.pad_width(DEFAULT_PAD) + grid.h();
        let start = support_hi(phi_end.displacement(), 0.0)
            .map_or(grid.x_min() + pad + 0.5 * cfg.gap, |x| x + cfg.gap);
        let room = grid.x_max() - pad - 0.5 * cfg.gap - start;
        let s_len = (0.45 * delta / (repeats as f64 * unit.length)).powf(2.0 / 3.0);
        let scale = s_len.min(room / (hi - lo)).min(1.0);
        if !(scale > 0.0) {
            return Err(Error::SupportEscape(
                "no room for the center loops beside the support".into(),
            )
            .in_stage("loop placement"));
        }
        let placement = Placement {
            offset: start - scale * lo,
            scale,
        };
        t.params.placement = placement;
        t.measures.params.placement = placement;
        t.report = t.measures.report();
        Some(t)
    } else {
        None
    };

    // assembly
    let mut frames_out: Vec<VirElement> = Vec::new();
    let mut report = EnergyReport::zero();
    if let Some(c) = &corner {
        let d = normalized(&c.frame_drift, c.drift());
        for (phi, d) in c.path.frames().iter().zip(d) {
            frames_out.push(VirElement::new(phi.clone(), kappa * d));
        }
        report = report.concat(&c.report);
    }
    if let Some(t) = &tuned {
        let p = &t.params;
        let stride = p.time_steps / LEG_FRAMES;
        let fwd = p.frames(Leg::Forward, grid, stride).map_err(|e| e.in_stage("loop frames"))?;
        let back = p.frames(Leg::Return, grid, stride).map_err(|e| e.in_stage("loop frames"))?;
        let cf = normalized(&t.measures.forward.cumulative_drift(), t.measures.forward.drift());
        let cb = normalized(&t.measures.back.cumulative_drift(), t.measures.back.drift());
        let total_f = t.measures.forward.drift();
        let mut loop_frames: Vec<(&Diffeo, f64)> = Vec::new();
        for (k, f) in fwd.frames().iter().enumerate() {
            loop_frames.push((f, cf[k * stride]));
        }
        for (k, f) in back.frames().iter().enumerate().skip(1) {
            loop_frames.push((f, total_f + cb[k * stride]));
        }
        let per_loop = t.measures.drift();
        let skip_first = !frames_out.is_empty();
        for r in 0..repeats {
            for (j, (psi, d)) in loop_frames.iter().enumerate() {
                if j == 0 && (r > 0 || skip_first) {
                    continue;
                }
                let base = disjoint_sum(psi, &phi_end)?;
                let alpha = center_after_corner + kappa * (r as f64 * per_loop + d);
                frames_out.push(VirElement::new(base, alpha));
            }
            report = report.concat(&t.report);
        }
    }
    if frames_out.is_empty() {
        frames_out = vec![VirElement::identity(grid), VirElement::identity(grid)];
    } else if frames_out.len() == 1 {
        frames_out.push(frames_out[0].clone());
    }
    let stages = usize::from(corner.is_some()) + usize::from(tuned.is_some());
    let times = TimeGrid::new(0.0, stages.max(1) as f64, frames_out.len())?;
    let path = DiscretePath::new(times, frames_out)?;
    let last = path.last();
    let endpoint_base_error = last.phi.displacement().sup_distance(g)?;
    let endpoint_center = last.alpha;
    Ok(Connection {
        report,
        corner: corner.as_ref().map(|c| (c.epsilon, c.report)),
        center_after_corner,
        tuned,
        repeats,
        endpoint_base_error,
        endpoint_center,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn identity_target_is_a_constant_path() {
        let grid = Grid::symmetric(2.0, 801).unwrap();
        let c = connect(&VirElement::identity(grid), 0.1, &ConnectConfig::default()).unwrap();
        assert_eq!(c.report.length, 0.0);
        assert_eq!(c.repeats, 0);
        assert_eq!(c.endpoint_center, 0.0);
    }

    #[test]
    fn pure_center_shift() {
        let grid = Grid::symmetric(2.0, 8001).unwrap();
        let target = VirElement::new(Diffeo::identity(grid), 1.0);
        let mut last = f64::INFINITY;
        for delta in [0.2, 0.1] {
            let c = connect(&target, delta, &ConnectConfig::default()).unwrap();
            assert!(c.report.length < delta);
            assert!(c.report.length < last);
            assert!(c.center_error(1.0) < 1e-2);
            assert!(c.endpoint_base_error < 1e-12);
            last = c.report.length;
        }
    }

    #[test]
    fn rejects_nonpositive_delta() {
        let grid = Grid::symmetric(2.0, 801).unwrap();
        assert!(connect(&VirElement::identity(grid), 0.0, &ConnectConfig::default()).is_err());
    }
}
