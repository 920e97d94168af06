//! Self-similar interval exchange transformations and their affine deformations.
//!
//! Given an irreducible permutation, a closed Rauzy-Veech loop and a log-slope
//! vector, the crate computes the self-similarity spectrum, the Hausdorff
//! dimensions of the invariant and conformal measures, the supremal Hölder
//! exponents of the conjugacy and its inverse, and thermodynamic sweeps, and
//! cross-checks them against combinatorial and Monte-Carlo oracles.

pub mod dimension;
pub mod error;
pub mod exact;
pub mod exec;
pub mod holder;
pub mod iet;
pub mod markov;
pub mod pf;
pub mod rauzy;
pub mod report;
pub mod spectral;
pub mod value;

pub use error::{Error, Result};
