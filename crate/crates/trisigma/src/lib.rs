//! Numerical certification toolkit for a sharp Fourier extension problem
//! on the circle.
//!
//! The library evaluates the triple autoconvolution kernel of arc length
//! measure on S^1 by three independent routes, verifies a family of
//! quantitative estimates over dense grids with explicit worst-case
//! margins, locates the support-radius threshold at which the central
//! positivity inequality stops holding, and assembles the Fourier-mode
//! matrix of the underlying quadratic form to check its spectral
//! positivity at desk scale.
//!
//! Modules:
//!
//! * [`kernel`] - the radial kernel rho and the complete elliptic integral.
//! * [`geometry`] - configuration-space machinery: the weight a, polar
//!   coordinates on the zero-sum plane, the lattice and its fundamental
//!   prism, exact polynomial families and the perturbation series psi.
//! * [`certifier`] - grid certification of the quantitative lemmas.
//! * [`threshold`] - both sides of the positivity inequality and the
//!   maximal support radius.
//! * [`spectrum`] - Bessel machinery, the delta-constrained mode pairing,
//!   matrix assembly and the Jacobi eigensolver.

pub mod certifier;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod quad;
pub mod spectrum;
pub mod threshold;

pub use error::{Error, Result};
