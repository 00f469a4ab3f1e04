//! Fourier-mode analysis of the quadratic form at desk scale.
//!
//! Antipodal functions on the 3-torus carry only even Fourier modes; on
//! the truncated mode sets the form becomes a dense symmetric matrix
//! whose entries reduce to radial integrals of six Bessel functions. This
//! module assembles those matrices, checks their spectral positivity, and
//! reproduces the observed eigenvalue scaling and coefficient
//! concentration.

mod bessel;
mod oracle;
mod pair;
mod qform;

pub use bessel::{bessel_j, bessel_j_upto};
pub use oracle::{oracle_pair_integral, DensityOracle};
pub use pair::{canonical_key, pair_integral, PairCache, PairIntegral};
pub use qform::{
    assemble, concentration_report, enumerate_modes, multiplier_entry, qform_entry, scaling_study,
    smallest_eigenvalues, ConcentrationReport, ModeIndex, QFormMatrix, ScalingStudy,
};
