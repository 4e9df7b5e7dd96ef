//! Named tolerances shared by every check in the crate.

/// Tolerance configuration record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Exact-in-principle algebraic identities (rotations, lemma round trips).
    pub algebraic: f64,
    /// Two analytic routes to the same AD quantity.
    pub ad_analytic: f64,
    /// AD against central finite differences.
    pub finite_difference: f64,
    /// Equality residuals and coefficient conditions of a consistent model.
    pub residual: f64,
    /// Influx discrepancy `h - λq` of a proportional model.
    pub proportionality: f64,
    /// Orthogonal part and axial spread of a transversely isotropic discrepancy.
    pub discrepancy: f64,
    /// Worst equality residual above which a model is reported as violating.
    pub violation: f64,
    /// Threshold for a nonzero discrepancy to count as non-proportional.
    pub nonproportional: f64,
    /// Isotropy defect of an isotropic form.
    pub isotropy: f64,
    /// Reconstruction residual of an isotropic flux.
    pub reconstruction: f64,
    /// Jump magnitude treated as continuous at an interface.
    pub contact: f64,
}

pub const TOL: Tolerances = Tolerances {
    algebraic: 1e-12,
    ad_analytic: 1e-9,
    finite_difference: 1e-6,
    residual: 1e-10,
    proportionality: 1e-12,
    discrepancy: 1e-10,
    violation: 1e-9,
    nonproportional: 1e-9,
    isotropy: 1e-10,
    reconstruction: 1e-9,
    contact: 1e-10,
};

/// Lower bound on `|u|`, `|v|` for Jacobian-based checks.
pub const MIN_GRADIENT_NORM: f64 = 0.1;

/// Upper bound on `|u·v| / (|u||v|)` for Jacobian-based checks.
pub const MAX_ALIGNMENT: f64 = 0.99;
