//! Numerical laboratory for spectral geometry on space forms: cap eigenvalues,
//! the shifted Dirichlet-to-Neumann spectrum, the ACF monotonicity functional and
//! quantitative Faber-Krahn deficits of nearly spherical sets.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod acf;
pub mod dtn;
pub mod error;
pub mod numerics;
pub mod perturbed;
pub mod radial;
pub mod spaceform;

pub use error::{Result, SpecError};
