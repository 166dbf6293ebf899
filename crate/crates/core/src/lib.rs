//! Numerical toolkit for the stability of trigonometric approximation
//! problems (interpolation, m-step prediction, finitely many observations,
//! periodically observed processes) under perturbations of the spectral
//! measure.

pub mod convergence;
pub mod error;
pub mod families;
pub mod finite_obs;
pub mod fourier;
pub mod harness;
pub mod hardy;
pub mod interpolation;
pub mod measure;
pub mod mesh;
pub mod msteps;
pub mod periodic;

pub use error::{Error, Result};
pub use measure::{Atom, GridFunction, SpectralMeasure};
pub use mesh::Mesh;
