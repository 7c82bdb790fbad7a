//! Small numerical kernels shared by the spectral modules.

pub mod extrapolate;
pub mod interp;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod roots;
