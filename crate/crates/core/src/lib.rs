//! Spectral computations for flat pseudo-Riemannian tori and for discrete
//! group actions on anti-de Sitter 3-space.
//!
//! * [`quadform`]: indefinite quadratic forms, inertia, integer evaluation and
//!   detection of forms proportional to integral ones.
//! * [`flat_spectra`]: the discrete spectrum `{−4π² Q(m)}` of `ℝ^{p,q}/gℤⁿ`
//!   over a box of lattice points, a finite-difference eigenfunction check,
//!   deformation scans and dense/discrete diagnostics.
//! * [`cartan`]: Cartan projections for `SL(n,ℝ)` and `SL(2,ℝ)×SL(2,ℝ)`,
//!   distance to polyhedral cones, the properness test and sharpness constants.
//! * [`ads3`]: word balls in free groups of `SL(2,ℝ)×SL(2,ℝ)`, the stable
//!   eigenvalues `l(l − 2)`, orbit counting, deformation experiments and
//!   Poincaré partial sums.

pub mod ads3;
pub mod cartan;
pub mod error;
pub mod flat_spectra;
pub mod numeric;
pub mod quadform;

pub use error::{Error, ErrorClass, Result};
