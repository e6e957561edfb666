//! Randomized residual checks of the group and algebra identities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    adjoint_signed, adjoint_transpose, bott_cocycle, bracket, gelfand_fuks, inner, schwartzian,
    schwartzian_of_map, vir_inv, vir_mul, SchwartzianForm, VirAlgebra, VirElement,
};
use crate::diffeo::{random_bump_displacement, Diffeo};
use crate::error::Result;
use crate::grid::{Grid, GridFunction};

/// Parameters of an identity-suite run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    pub n: usize,
    pub half_width: f64,
    pub instances: usize,
    pub seed: u64,
    /// Flip the sign of the central term of the adjoint action (negative control).
    pub corrupt: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n: 2048,
            half_width: 10.0,
            instances: 20,
            seed: 0,
            corrupt: false,
        }
    }
}

/// Largest residual of one identity over all random instances.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_residual < self.tolerance
    }
}

struct Gen {
    grid: Grid,
    rng: ChaCha8Rng,
}

impl Gen {
    fn diffeo(&mut self, amp: f64) -> Result<Diffeo> {
        Diffeo::from_displacement(random_bump_displacement(self.grid, &mut self.rng, amp, 0.5))
    }

    fn element(&mut self, amp: f64) -> Result<VirElement> {
        use rand::Rng;
        let alpha = self.rng.random_range(-2.0..2.0);
        Ok(VirElement::new(self.diffeo(amp)?, alpha))
    }

    fn field(&mut self) -> GridFunction {
        random_bump_displacement(self.grid, &mut self.rng, 1.0, 10.0)
    }

    fn algebra(&mut self) -> VirAlgebra {
        use rand::Rng;
        let a = self.rng.random_range(-2.0..2.0);
        VirAlgebra::new(self.field(), a)
    }
}

type Check = fn(&mut Gen, bool) -> Result<f64>;

fn sup(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.sup_distance(g)
}

fn cocycle_identity(g: &mut Gen, _: bool) -> Result<f64> {
    let (p1, p2, p3) = (g.diffeo(0.3)?, g.diffeo(0.3)?, g.diffeo(0.3)?);
    let r = bott_cocycle(&p2, &p3)? - bott_cocycle(&p1.compose(&p2)?, &p3)?
        + bott_cocycle(&p1, &p2.compose(&p3)?)?
        - bott_cocycle(&p1, &p2)?;
    Ok(r.abs())
}

fn associativity(g: &mut Gen, _: bool) -> Result<f64> {
    let (a, b, c) = (g.element(0.3)?, g.element(0.3)?, g.element(0.3)?);
    let left = vir_mul(&vir_mul(&a, &b)?, &c)?;
    let right = vir_mul(&a, &vir_mul(&b, &c)?)?;
    let (d, e) = left.distance_to(&right)?;
    Ok(d.max(e))
}

fn cocycle_unit(g: &mut Gen, _: bool) -> Result<f64> {
    let (p, q) = (g.diffeo(0.5)?, g.diffeo(0.5)?);
    let id = Diffeo::identity(*p.grid());
    Ok(bott_cocycle(&id, &q)?.abs().max(bott_cocycle(&p, &id)?.abs()))
}

fn cocycle_inverse(g: &mut Gen, _: bool) -> Result<f64> {
    let p = g.diffeo(0.5)?;
    Ok(bott_cocycle(&p, &p.inverse()?)?.abs())
}

fn group_inverse(g: &mut Gen, _: bool) -> Result<f64> {
    let a = g.element(0.5)?;
    let e = vir_mul(&a, &vir_inv(&a)?)?;
    let (d, c) = e.distance_to(&VirElement::identity(*a.phi.grid()))?;
    Ok(d.max(c))
}

fn gf_skew(g: &mut Gen, _: bool) -> Result<f64> {
    let (x, y) = (g.field(), g.field());
    let xy = gelfand_fuks(&x, &y)?;
    let half_det = {
        let (x1, x2) = (x.derivative(1)?, x.derivative(2)?);
        let (y1, y2) = (y.derivative(1)?, y.derivative(2)?);
        let vals = (0..x.grid().n())
            .map(|i| x1.values()[i] * y2.values()[i] - x2.values()[i] * y1.values()[i])
            .collect();
        0.5 * GridFunction::new(*x.grid(), vals)?.integrate()
    };
    Ok(gelfand_fuks(&x, &x)?
        .abs()
        .max((xy + gelfand_fuks(&y, &x)?).abs())
        .max((xy - half_det).abs()))
}

fn gf_cocycle(g: &mut Gen, _: bool) -> Result<f64> {
    let (a, b, c) = (g.algebra(), g.algebra(), g.algebra());
    let r = gelfand_fuks(&bracket(&a, &b)?.x, &c.x)?
        + gelfand_fuks(&bracket(&b, &c)?.x, &a.x)?
        + gelfand_fuks(&bracket(&c, &a)?.x, &b.x)?;
    Ok(r.abs())
}

fn jacobi(g: &mut Gen, _: bool) -> Result<f64> {
    let (a, b, c) = (g.algebra(), g.algebra(), g.algebra());
    let t1 = bracket(&a, &bracket(&b, &c)?)?;
    let t2 = bracket(&b, &bracket(&c, &a)?)?;
    let t3 = bracket(&c, &bracket(&a, &b)?)?;
    let x = t1
        .x
        .zip_with(&t2.x, |p, q| p + q)?
        .zip_with(&t3.x, |p, q| p + q)?;
    Ok(x.max_abs().max((t1.a + t2.a + t3.a).abs()))
}

fn schwartzian_forms(g: &mut Gen, _: bool) -> Result<f64> {
    let p = g.diffeo(0.5)?;
    let map = p.map_values();
    let floor = p.tolerances().slope_floor;
    let s = schwartzian_of_map(&map, SchwartzianForm::Standard, floor)?;
    let l = schwartzian_of_map(&map, SchwartzianForm::LogDerivative, floor)?;
    let r = schwartzian_of_map(&map, SchwartzianForm::Ratio, floor)?;
    Ok(sup(&s, &l)?.max(sup(&s, &r)?))
}

fn schwartzian_composition(g: &mut Gen, _: bool) -> Result<f64> {
    let (p, q) = (g.diffeo(0.3)?, g.diffeo(0.3)?);
    let left = schwartzian(&p.compose(&q)?)?;
    let sp = schwartzian(&p)?.interpolant();
    let sq = schwartzian(&q)?;
    let grid = *p.grid();
    let vals = (0..grid.n())
        .map(|i| {
            let y = grid.x(i) + q.displacement().values()[i];
            let d = 1.0 + q.displacement_slope().values()[i];
            sp.eval(y) * d * d + sq.values()[i]
        })
        .collect();
    let right = GridFunction::new(grid, vals)?;
    sup(&left, &right)
}

fn schwartzian_inverse(g: &mut Gen, _: bool) -> Result<f64> {
    let p = g.diffeo(0.3)?;
    let inv = p.inverse()?;
    let left = schwartzian(&inv)?;
    let grid = *p.grid();
    let s = schwartzian(&p)?;
    let ratio = GridFunction::new(
        grid,
        (0..grid.n())
            .map(|i| {
                let d = 1.0 + p.displacement_slope().values()[i];
                -s.values()[i] / (d * d)
            })
            .collect(),
    )?
    .interpolant();
    let right = GridFunction::from_fn(grid, |y| ratio.eval(y + inv.eval_displacement(y)));
    sup(&left, &right)
}

fn duality(g: &mut Gen, corrupt: bool) -> Result<f64> {
    let e = g.element(0.3)?;
    let (b, c) = (g.algebra(), g.algebra());
    let sign = if corrupt { -1.0 } else { 1.0 };
    let l = inner(&adjoint_transpose(&e, &b)?, &c)?;
    let r = inner(&b, &adjoint_signed(&e, &c, sign)?)?;
    Ok((l - r).abs())
}

fn homomorphism(g: &mut Gen, corrupt: bool) -> Result<f64> {
    let (e1, e2) = (g.element(0.3)?, g.element(0.3)?);
    let c = g.algebra();
    let sign = if corrupt { -1.0 } else { 1.0 };
    let left = adjoint_signed(&vir_mul(&e1, &e2)?, &c, sign)?;
    let right = adjoint_signed(&e1, &adjoint_signed(&e2, &c, sign)?, sign)?;
    Ok(sup(&left.x, &right.x)?.max((left.a - right.a).abs()))
}

const CHECKS: &[(&str, f64, Check)] = &[
    ("bott_cocycle_identity", 1e-5, cocycle_identity),
    ("vir_mul_associativity", 1e-5, associativity),
    ("cocycle_with_identity", 1e-8, cocycle_unit),
    ("cocycle_with_inverse", 1e-6, cocycle_inverse),
    ("vir_inverse", 1e-6, group_inverse),
    ("gelfand_fuks_skew_forms", 1e-8, gf_skew),
    ("gelfand_fuks_cocycle", 1e-6, gf_cocycle),
    ("bracket_jacobi", 1e-6, jacobi),
    ("schwartzian_three_forms", 1e-6, schwartzian_forms),
    ("schwartzian_composition", 1e-5, schwartzian_composition),
    ("schwartzian_inverse", 1e-5, schwartzian_inverse),
    ("adjoint_duality", 1e-6, duality),
    ("adjoint_homomorphism", 1e-5, homomorphism),
];

/// Runs every identity on `instances` random inputs each.
pub fn run_identity_suite(cfg: &SuiteConfig) -> Result<Vec<IdentityCheck>> {
    let grid = Grid::symmetric(cfg.half_width, cfg.n)?;
    CHECKS
        .iter()
        .enumerate()
        .map(|(ci, &(name, tolerance, check))| {
            let residuals = (0..cfg.instances)
                .into_par_iter()
                .map(|k| {
                    let seed = cfg
                        .seed
                        .wrapping_mul(1_000_003)
                        .wrapping_add((ci * 1000 + k) as u64);
                    let mut gen = Gen {
                        grid,
                        rng: ChaCha8Rng::seed_from_u64(seed),
                    };
                    check(&mut gen, cfg.corrupt)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(IdentityCheck {
                name,
                max_residual: residuals.iter().cloned().fold(0.0, f64::max),
                tolerance,
            })
        })
        .collect()
}
