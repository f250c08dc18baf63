//! Homogenized shallow-water waves over periodic bathymetry.

pub mod error;
pub mod harness;
pub mod homogenized_solver;
pub mod banded;
pub mod coefficients;
pub mod dispersion;
pub mod rk;
pub mod spectral;
pub mod swe_reference;
pub mod traveling_wave;
pub mod unit_cell;

pub use error::{Error, Result};
