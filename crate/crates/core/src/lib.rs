//! Numerics for the Virasoro-Bott group with its right-invariant L² metric.
//!
//! The base group is modelled by compactly supported diffeomorphisms `Id + g`
//! of a truncated line sampled on a uniform grid. On top of that sit the
//! central extension, the KdV geodesic flow and the explicit path families
//! whose lengths go to zero.

pub mod diffeo;
pub mod error;
pub mod geodesic;
pub mod grid;
pub mod shortpath;
pub mod virasoro;

pub use error::{Error, Result};
