//! Lower bounds for the Hausdorff dimension of non-negative measures on the
//! circle whose spectrum lies in `C_B = {k q^v : k mod q ∈ B} ∪ {0}`.
//!
//! The bound is `1 + κ'(1)/log q`, where `κ'(1)` comes from a convex
//! maximization over the polytope `{v ∈ W_B : v_j >= -1}` ([`kappa`]). The
//! remaining modules check the ingredients numerically: Fourier analysis on
//! `Z_q` ([`zq`]), the backwards martingale on the `q^N`-point grid
//! ([`martingale`]), and closed forms for Riesz products ([`riesz`]).

pub mod error;
pub mod kappa;
pub mod martingale;
pub mod quadrature;
pub mod report;
pub mod riesz;
pub mod spectrum;
mod sum;
pub mod zq;

pub use error::{Error, Result};
pub use kappa::{dimension_bound, DimensionBound, KappaProblem};
pub use spectrum::SparseSpectrum;
pub use zq::ResidueSet;
