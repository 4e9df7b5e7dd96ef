//! Verification engine for entropy-principle restrictions on Green–Naghdi
//! Type III heat conductors, with a 1D thermal-displacement simulator.

pub mod autodiff;
pub mod check;
pub mod constitutive;
pub mod entropy;
pub mod error;
pub mod expr;
pub mod lemmas;
pub mod library;
pub mod representation;
pub mod sim;
pub mod state;
pub mod tensor;
pub mod tolerance;

pub use autodiff::{Jet, Scalar, VecJacobian};
pub use check::{run_check, CheckConfig, CheckReport, Verdict};
pub use constitutive::{build_counterexample, parse_coeff, ConstitutiveModel, Flux, ScalarField, Symmetry};
pub use entropy::{
    condition_lists, discrepancy, expansion_crosscheck, interface_check, multiplier_independence, residuals,
    violation_search, ConditionList, DiscrepancyReport, InterfaceJumps, ResidualReport, Violation,
};
pub use error::{DomainError, ModelError, ParseError, RepresentationError, SearchError, SimError};
pub use representation::{
    extract_iso_coeffs, extract_transiso_coeffs, isotropy_defect, lemma_extract, Frame, Group, LemmaCoefficients,
};
pub use sim::{Material, Medium, Scenario, SimState, SourceSpec};
pub use state::ThermalState;
pub use tensor::{Rotation, Ten2, Vec3};
pub use tolerance::{Tolerances, TOL};
