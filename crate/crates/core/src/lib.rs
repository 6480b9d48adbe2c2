//! Numerical laboratory for the radial cubic-quintic Schrödinger equation
//! `i∂ₜu + Δu = |u|²u − |u|⁴u` in three dimensions.

pub mod dynamics;
pub mod error;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod morawetz;
pub mod registry;
pub mod resample;
pub mod sampling;
pub mod spectral;
pub mod trajectory;
pub mod variational;

pub use error::{Error, Result};
pub use field::RadialField;
pub use grid::RadialGrid;
pub use spectral::SpectralPlan;
pub use trajectory::Trajectory;
