//! One-dimensional spectral machinery for geodesic caps.

mod eigen;
mod grid;
mod kj;
pub(crate) mod modes;
mod series;
mod torsion;

pub use eigen::{
    cap_eigenvalue_with_mode, cap_first_eigenvalue, cap_first_eigenvalue_shooting, cap_second_eigenvalue, first_eigenvalue,
    EigenMethod, EigenSolution,
};
pub use grid::{RadialGrid, Spacing};
pub use kj::{kj_deficit_curves, KjRow, KjTable};
pub use modes::{angular_radial_solution, indicial_exponent, radial_mode, ModeProfile};
pub use series::{legendre_series_auto, legendre_series_eval, recursion_ratio, SeriesEval, SeriesSolution};
pub use torsion::{torsion_ball, torsion_value, TorsionSolution};

/// Nodes used for stored radial profiles.
pub const PROFILE_NODES: usize = 401;
