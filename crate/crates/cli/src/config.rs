//! Experiment configuration: embedded defaults, an optional TOML file on
//! top, then `key=value` overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use toml::{Table, Value};
use virasoro_core::grid::{bump, bump_cdf, Grid, GridFunction};
use virasoro_core::shortpath::LambdaRule;

pub const DEFAULTS: &str = include_str!("defaults.toml");

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub out: PathBuf,
    pub identities: IdentitiesConfig,
    pub kdv: KdvConfig,
    pub shortpath: ShortpathConfig,
    pub center: CenterConfig,
    pub distance: DistanceConfig,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesConfig {
    pub n: usize,
    pub half_width: f64,
    pub instances: usize,
    pub corrupt: bool,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum KdvPreset {
    Soliton,
    Zero,
    /// Smooth hump evolved with `a = 0` before its characteristics cross.
    Front,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KdvConfig {
    pub preset: KdvPreset,
    pub a: f64,
    pub k: f64,
    pub amplitude: f64,
    pub width: f64,
    pub half_width: f64,
    pub n: usize,
    pub t_final: f64,
    pub samples: usize,
    pub c1: f64,
    pub c2: f64,
    pub max_l2_error: f64,
    pub max_momentum_drift: f64,
    pub max_speed_drift: f64,
}

/// Displacement `g` of a target diffeomorphism.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Zero,
    /// `amp · G₁((x − center)/width) / G₁(0)`
    Bump { amp: f64, center: f64, width: f64 },
    /// `amp · Φ₁((x − center)/width) · (1 − Φ₁(x/decay))`
    Step {
        amp: f64,
        center: f64,
        width: f64,
        decay: f64,
    },
    /// Two-column `x,value` CSV, resampled onto the grid.
    File { path: PathBuf },
}

impl Shape {
    pub fn sample(&self, grid: Grid) -> Result<GridFunction> {
        Ok(match *self {
            Shape::Zero => GridFunction::zeros(grid),
            Shape::Bump { amp, center, width } => {
                GridFunction::from_fn(grid, |x| amp * bump((x - center) / width) / bump(0.0))
            }
            Shape::Step {
                amp,
                center,
                width,
                decay,
            } => GridFunction::from_fn(grid, |x| {
                amp * bump_cdf((x - center) / width) * (1.0 - bump_cdf(x / decay))
            }),
            Shape::File { ref path } => {
                let f = std::fs::File::open(path)
                    .with_context(|| format!("opening {}", path.display()))?;
                GridFunction::read_csv(std::io::BufReader::new(f))?.resample(grid)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum LambdaSetting {
    Fixed(f64),
    Rule(LambdaName),
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LambdaName {
    OneMinusEps,
}

impl LambdaSetting {
    pub fn rule(self) -> LambdaRule {
        match self {
            LambdaSetting::Fixed(l) => LambdaRule::Fixed(l),
            LambdaSetting::Rule(LambdaName::OneMinusEps) => LambdaRule::OneMinusEps,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ShortpathConfig {
    pub eps: Vec<f64>,
    pub half_width: f64,
    pub n: usize,
    pub points_per_eps: usize,
    pub supersample: usize,
    pub g: Shape,
    pub bounds: BoundsConfig,
    pub figure: FigureConfig,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub eps0: Vec<f64>,
    pub eps1: f64,
    pub lambda: LambdaSetting,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub eps0: f64,
    pub eps1: f64,
    pub lambda: f64,
    pub t: f64,
    pub delta: f64,
    pub stride: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CenterConfig {
    pub targets: Vec<f64>,
    pub eps0: f64,
    pub lambda: f64,
    pub budget: f64,
    pub rel_tol: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    pub a: f64,
    pub deltas: Vec<f64>,
    pub half_width: f64,
    pub n: usize,
    pub eps_start: f64,
    pub eps0: f64,
    pub endpoint_tol: f64,
    /// Write the assembled path every `path_stride` frames and nodes; 0 skips it.
    pub path_stride: usize,
    pub g: Shape,
}

/// Recursively overwrites `base` with the entries of `top`.
fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `section.key=value`; the value is parsed as TOML, falling back to a string.
fn set_path(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .with_context(|| format!("override `{assignment}` is not key=value"))?;
    let value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for s in sections {
        cur = cur
            .entry(s.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .with_context(|| format!("`{s}` in `{key}` is not a section"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl Config {
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Config> {
        let mut table: Table = toml::from_str(DEFAULTS).context("embedded defaults")?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let user: Table =
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            merge(&mut table, user);
        }
        for o in overrides {
            set_path(&mut table, o)?;
        }
        let cfg: Config = Value::Table(table).try_into().context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
            Ok(())
        };
        positive("identities.half_width", self.identities.half_width)?;
        if self.identities.instances == 0 {
            bail!("identities.instances must be at least 1");
        }
        let k = &self.kdv;
        positive("kdv.half_width", k.half_width)?;
        positive("kdv.t_final", k.t_final)?;
        positive("kdv.c1", k.c1)?;
        positive("kdv.c2", k.c2)?;
        if k.samples < 4 {
            bail!("kdv.samples must be at least 4");
        }
        if k.preset == KdvPreset::Soliton && !(k.a > 0.0 && k.k > 0.0) {
            bail!("the soliton preset needs a > 0 and k > 0");
        }
        if k.preset == KdvPreset::Front {
            positive("kdv.width", k.width)?;
            if k.a != 0.0 {
                bail!("the front preset is compared with characteristics and needs a = 0");
            }
        }
        let s = &self.shortpath;
        if s.eps.is_empty() || s.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            bail!("shortpath.eps must be a non-empty list in (0, 1)");
        }
        if s.bounds.eps0.iter().any(|e| !(*e > 0.0)) {
            bail!("shortpath.bounds.eps0 entries must be positive");
        }
        positive("shortpath.half_width", s.half_width)?;
        let c = &self.center;
        positive("center.budget", c.budget)?;
        positive("center.rel_tol", c.rel_tol)?;
        let d = &self.distance;
        if d.deltas.is_empty() || d.deltas.iter().any(|v| !(*v > 0.0)) {
            bail!("distance.deltas must be a non-empty list of positive numbers");
        }
        positive("distance.half_width", d.half_width)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = Config::load(None, &[]).unwrap();
        assert_eq!(c.identities.instances, 20);
        assert_eq!(c.shortpath.bounds.lambda.rule(), LambdaRule::OneMinusEps);
        assert_eq!(c.shortpath.eps, vec![0.2, 0.1, 0.05, 0.025]);
    }

    #[test]
    fn overrides_win() {
        let c = Config::load(
            None,
            &[
                "seed=9".into(),
                "center.targets=[2.0]".into(),
                "kdv.preset=zero".into(),
                "shortpath.bounds.lambda=0.8".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.center.targets, vec![2.0]);
        assert_eq!(c.kdv.preset, KdvPreset::Zero);
        assert_eq!(c.shortpath.bounds.lambda.rule(), LambdaRule::Fixed(0.8));
    }

    #[test]
    fn file_merges_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[distance]\na = 1.0\n[distance.g]\nkind = \"zero\"\n").unwrap();
        let c = Config::load(Some(&p), &[]).unwrap();
        assert_eq!(c.distance.a, 1.0);
        assert_eq!(c.distance.g, Shape::Zero);
        assert_eq!(c.distance.n, 8001);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(Config::load(None, &["kdv.nope=1".into()]).is_err());
        assert!(Config::load(None, &["shortpath.eps=[]".into()]).is_err());
        assert!(Config::load(None, &["kdv.t_final=-1".into()]).is_err());
    }
}
