//! Alt-Caffarelli-Friedman functional for sampled admissible pairs.

pub mod characteristic;
pub mod corpus;
pub mod deficits;
pub mod energy;
pub mod field;
pub mod io;
pub mod report;
pub mod slice;
pub mod stability;

pub use characteristic::{
    alpha_hat, alpha_hat_profile, characteristic_constant, sine_misalignment, AlphaHatProfile, CharacteristicConstant,
    SineMisalignment,
};
pub use corpus::{corpus, corpus_names};
pub use deficits::{acf_deficits, cap_gap_constant, deficit_terms_2d, deficit_terms_nd_axisym, AcfDeficits, DeficitRow};
pub use energy::{acf_J, acf_profile, ball_mass, energy_profile, AcfProfile, EnergyProfile};
pub use field::{AcfGrid, AdmissiblePair, PolarField, POSITIVITY_REL};
pub use io::{load_pair_csv, read_pair_csv, write_pair_csv};
pub use report::{AcfPairReport, EqualityCheck, GridInfo, InequalityCheck, MonotonicityCheck, REPORT_RHO};
pub use slice::{arc_decomposition, arc_eigenvalue, Arc, ArcDecomposition};
pub use stability::{
    blowup_scale_fit, gradient_energy_ratio, one_homogeneity_error, stability_fit, BlowupFit, HomogeneityField, OneHomogeneity,
    ScaleFit, StabilityFit,
};
