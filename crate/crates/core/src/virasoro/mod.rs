//! The Virasoro-Bott group `Diff_c(ℝ) ×_c ℝ` and its Lie algebra.

mod suite;

pub use suite::{run_identity_suite, IdentityCheck, SuiteConfig};

use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::grid::{derivative_samples, Grid, GridFunction};

/// Group element `(φ, α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VirElement {
    pub phi: Diffeo,
    pub alpha: f64,
}

impl VirElement {
    pub fn new(phi: Diffeo, alpha: f64) -> VirElement {
        VirElement { phi, alpha }
    }

    pub fn identity(grid: Grid) -> VirElement {
        VirElement {
            phi: Diffeo::identity(grid),
            alpha: 0.0,
        }
    }

    /// Sup distance of the displacements plus absolute center difference.
    pub fn distance_to(&self, other: &VirElement) -> Result<(f64, f64)> {
        Ok((
            self.phi
                .displacement()
                .sup_distance(other.phi.displacement())?,
            (self.alpha - other.alpha).abs(),
        ))
    }
}

/// Algebra element `(X, a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VirAlgebra {
    pub x: GridFunction,
    pub a: f64,
}

impl VirAlgebra {
    pub fn new(x: GridFunction, a: f64) -> VirAlgebra {
        VirAlgebra { x, a }
    }

    pub fn zero(grid: Grid) -> VirAlgebra {
        VirAlgebra {
            x: GridFunction::zeros(grid),
            a: 0.0,
        }
    }
}

/// Bott cocycle `c(φ,ψ) = ½∫ log(φ'∘ψ) (log ψ')' dx`.
pub fn bott_cocycle(phi: &Diffeo, psi: &Diffeo) -> Result<f64> {
    let grid = *psi.grid();
    if !grid.same_as(phi.grid()) {
        return Err(Error::GridMismatch("cocycle on different grids".into()));
    }
    let dphi = phi.displacement_slope().interpolant();
    let dpsi = psi.displacement_slope().values();
    let d2psi = derivative_samples(psi.displacement().values(), grid.h(), 2)?;
    let mut integrand = Vec::with_capacity(grid.n());
    for i in 0..grid.n() {
        let y = grid.x(i) + psi.displacement().values()[i];
        let s_phi = 1.0 + dphi.eval(y);
        let s_psi = 1.0 + dpsi[i];
        if !(s_phi > 0.0 && s_psi > 0.0) {
            return Err(Error::NotDiffeomorphism(format!(
                "non-positive slope in cocycle at x = {:.6}",
                grid.x(i)
            )));
        }
        integrand.push(s_phi.ln() * d2psi[i] / s_psi);
    }
    Ok(0.5 * crate::grid::integrate_samples(&integrand, grid.h()))
}

/// `(φ,α)(ψ,β) = (φ∘ψ, α+β+c(φ,ψ))`.
pub fn vir_mul(g1: &VirElement, g2: &VirElement) -> Result<VirElement> {
    Ok(VirElement {
        phi: g1.phi.compose(&g2.phi)?,
        alpha: g1.alpha + g2.alpha + bott_cocycle(&g1.phi, &g2.phi)?,
    })
}

/// `(φ,α)⁻¹ = (φ⁻¹, -α)`.
pub fn vir_inv(g: &VirElement) -> Result<VirElement> {
    Ok(VirElement {
        phi: g.phi.inverse()?,
        alpha: -g.alpha,
    })
}

/// Gelfand-Fuks cocycle `ω(X,Y) = ∫X'Y'' dx`.
pub fn gelfand_fuks(x: &GridFunction, y: &GridFunction) -> Result<f64> {
    x.check_same_grid(y)?;
    let dx = x.derivative(1)?;
    let d2y = y.derivative(2)?;
    Ok(dx.zip_with(&d2y, |a, b| a * b)?.integrate())
}

/// `[(X,a),(Y,b)] = (X'Y - XY', ω(X,Y))`; the central parts do not enter.
pub fn bracket(a: &VirAlgebra, b: &VirAlgebra) -> Result<VirAlgebra> {
    let dx = a.x.derivative(1)?;
    let dy = b.x.derivative(1)?;
    let grid = *a.x.grid();
    a.x.check_same_grid(&b.x)?;
    let vals = (0..grid.n())
        .map(|i| dx.values()[i] * b.x.values()[i] - a.x.values()[i] * dy.values()[i])
        .collect();
    Ok(VirAlgebra {
        x: GridFunction::new(grid, vals)?,
        a: gelfand_fuks(&a.x, &b.x)?,
    })
}

/// Algebraically equivalent ways of writing the Schwartzian derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchwartzianForm {
    /// `φ'''/φ' - (3/2)(φ''/φ')²`
    Standard,
    /// `(log φ')'' - ½((log φ')')²`
    LogDerivative,
    /// `(φ''/φ')' - ½(φ''/φ')²`
    Ratio,
}

/// Schwartzian derivative of a diffeomorphism.
pub fn schwartzian(phi: &Diffeo) -> Result<GridFunction> {
    let g = phi.displacement();
    let grid = *g.grid();
    let h = grid.h();
    let d1 = phi.displacement_slope().values();
    let d2 = derivative_samples(g.values(), h, 2)?;
    let d3 = derivative_samples(g.values(), h, 3)?;
    let floor = phi.tolerances().slope_floor;
    let vals = (0..grid.n())
        .map(|i| {
            let s = 1.0 + d1[i];
            if s <= floor {
                return Err(Error::NotDiffeomorphism("slope underflow".into()));
            }
            let r = d2[i] / s;
            Ok(d3[i] / s - 1.5 * r * r)
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(grid, vals)
}

/// Schwartzian of a sampled increasing map given by its values.
pub fn schwartzian_of_map(
    map: &GridFunction,
    form: SchwartzianForm,
    slope_floor: f64,
) -> Result<GridFunction> {
    let grid = *map.grid();
    let h = grid.h();
    // differentiate φ − x: the identity part would only add roundoff
    let disp: Vec<f64> = (0..grid.n()).map(|i| map.values()[i] - grid.x(i)).collect();
    let d1: Vec<f64> = derivative_samples(&disp, h, 1)?
        .into_iter()
        .map(|v| 1.0 + v)
        .collect();
    if let Some(v) = d1.iter().find(|v| !(**v > slope_floor)) {
        return Err(Error::NotDiffeomorphism(format!("slope {v:.3e}")));
    }
    let vals = match form {
        SchwartzianForm::Standard => {
            let d2 = derivative_samples(&disp, h, 2)?;
            let d3 = derivative_samples(&disp, h, 3)?;
            (0..grid.n())
                .map(|i| {
                    let r = d2[i] / d1[i];
                    d3[i] / d1[i] - 1.5 * r * r
                })
                .collect()
        }
        SchwartzianForm::LogDerivative => {
            let l: Vec<f64> = d1.iter().map(|v| v.ln()).collect();
            let l1 = derivative_samples(&l, h, 1)?;
            let l2 = derivative_samples(&l, h, 2)?;
            l1.iter().zip(&l2).map(|(a, b)| b - 0.5 * a * a).collect()
        }
        SchwartzianForm::Ratio => {
            let d2 = derivative_samples(&disp, h, 2)?;
            let r: Vec<f64> = d2.iter().zip(&d1).map(|(a, b)| a / b).collect();
            let r1 = derivative_samples(&r, h, 1)?;
            r1.iter().zip(&r).map(|(a, b)| a - 0.5 * b * b).collect()
        }
    };
    GridFunction::new(grid, vals)
}

/// `Ad(φ,α)(Y,b) = ((φ'∘φ⁻¹)(Y∘φ⁻¹), b + ∫S(φ)Y dx)`.
pub fn adjoint(g: &VirElement, b: &VirAlgebra) -> Result<VirAlgebra> {
    adjoint_signed(g, b, 1.0)
}

fn adjoint_signed(g: &VirElement, b: &VirAlgebra, sign: f64) -> Result<VirAlgebra> {
    let phi = &g.phi;
    let grid = *phi.grid();
    let inv = phi.inverse()?;
    let dg = phi.displacement_slope().interpolant();
    let y = b.x.interpolant();
    let vals = (0..grid.n())
        .map(|i| {
            let x = grid.x(i) + inv.displacement().values()[i];
            (1.0 + dg.eval(x)) * y.eval(x)
        })
        .collect();
    let s = schwartzian(phi)?;
    let shift = s.zip_with(&b.x, |p, q| p * q)?.integrate();
    Ok(VirAlgebra {
        x: GridFunction::new(grid, vals)?,
        a: b.a + sign * shift,
    })
}

/// `Ad(φ,α)^⊤(Y,b) = ((Y∘φ)(φ')² + bS(φ), b)`.
pub fn adjoint_transpose(g: &VirElement, b: &VirAlgebra) -> Result<VirAlgebra> {
    let phi = &g.phi;
    let grid = *phi.grid();
    let y = b.x.interpolant();
    let s = schwartzian(phi)?;
    let vals = (0..grid.n())
        .map(|i| {
            let gi = phi.displacement().values()[i];
            let slope = 1.0 + phi.displacement_slope().values()[i];
            y.eval(grid.x(i) + gi) * slope * slope + b.a * s.values()[i]
        })
        .collect();
    Ok(VirAlgebra {
        x: GridFunction::new(grid, vals)?,
        a: b.a,
    })
}

/// Invariant momentum `J((φ,α),(Y,b)) = Ad(φ,α)^⊤(Y,b)`.
pub fn momentum(g: &VirElement, b: &VirAlgebra) -> Result<VirAlgebra> {
    adjoint_transpose(g, b)
}

/// `⟨(X,a),(Y,b)⟩ = ∫XY dx + ab`.
pub fn inner(a: &VirAlgebra, b: &VirAlgebra) -> Result<f64> {
    Ok(a.x.zip_with(&b.x, |p, q| p * q)?.integrate() + a.a * b.a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_zero_schwartzian() {
        let grid = Grid::symmetric(10.0, 257).unwrap();
        let s = schwartzian(&Diffeo::identity(grid)).unwrap();
        assert_eq!(s.max_abs(), 0.0);
    }

    #[test]
    fn bracket_ignores_central_parts() {
        let grid = Grid::symmetric(10.0, 513).unwrap();
        let x = GridFunction::from_fn(grid, |t| (-(t * t)).exp());
        let y = GridFunction::from_fn(grid, |t| (-(t - 1.0) * (t - 1.0)).exp());
        let p = bracket(&VirAlgebra::new(x.clone(), 3.0), &VirAlgebra::new(y.clone(), -7.0)).unwrap();
        let q = bracket(&VirAlgebra::new(x, 0.0), &VirAlgebra::new(y, 0.0)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn inner_is_symmetric() {
        let grid = Grid::symmetric(10.0, 513).unwrap();
        let a = VirAlgebra::new(GridFunction::from_fn(grid, |t| (-(t * t)).exp()), 0.5);
        let b = VirAlgebra::new(GridFunction::from_fn(grid, |t| t * (-(t * t)).exp()), 2.0);
        assert_eq!(inner(&a, &b).unwrap(), inner(&b, &a).unwrap());
    }
}
