//! Constitutive models over the invariants of `(u, v)` (and the axis `e`).
//!
//! Coefficient functions are expressions in `a = α`, `da = α̇` and the
//! invariants `s1 = |u|`, `s2 = |v|`, `s3 = u·v`, plus `s4 = u·e`, `s5 = v·e`
//! for transversely isotropic models. Fluxes are assembled as
//! `c1 u + c2 v [+ c3 e]`, so every model is isotropic (or transversely
//! isotropic about `e`) by construction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{axpy3, dot, Jet, Scalar};
use crate::error::{DomainError, ModelError, ParseError, SearchError};
use crate::expr::{Expr, VarContext};
use crate::state::{GState, ThermalState};
use crate::tensor::Vec3;
use crate::tolerance::{MAX_ALIGNMENT, MIN_GRADIENT_NORM, TOL};

pub const VAR_A: usize = 0;
pub const VAR_DA: usize = 1;
pub const VAR_S1: usize = 2;
pub const VAR_S2: usize = 3;
pub const VAR_S3: usize = 4;
pub const VAR_S4: usize = 5;
pub const VAR_S5: usize = 6;

/// Bound coefficient variables `[a, da, s1, s2, s3, s4, s5]`.
pub type Vars<S> = [Option<S>; 7];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symmetry {
    Isotropic,
    TransverselyIsotropic { axis: Vec3 },
}

impl Symmetry {
    pub fn context(&self) -> VarContext {
        match self {
            Symmetry::Isotropic => VarContext::ISOTROPIC,
            Symmetry::TransverselyIsotropic { .. } => VarContext::TRANSVERSE,
        }
    }

    pub fn axis(&self) -> Option<Vec3> {
        match self {
            Symmetry::Isotropic => None,
            Symmetry::TransverselyIsotropic { axis } => Some(*axis),
        }
    }

    /// Number of flux coefficients: 2 or 3.
    pub fn flux_terms(&self) -> usize {
        match self {
            Symmetry::Isotropic => 2,
            Symmetry::TransverselyIsotropic { .. } => 3,
        }
    }

    /// Number of invariants the coefficients may depend on: 3 or 5.
    pub fn invariant_count(&self) -> usize {
        self.flux_terms() + self.flux_terms() - 1
    }
}

/// Coefficient function of `(a, da, s1..s5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFn(Expr);

impl CoeffFn {
    pub fn expr(&self) -> &Expr {
        &self.0
    }

    pub fn eval<S: Scalar>(&self, vars: &Vars<S>) -> Result<S, DomainError> {
        self.0.eval(vars)
    }

    /// Partial derivatives with respect to `[a, da, s1, s2, s3, s4, s5]` at
    /// plain variable values, one seeded pass per referenced variable.
    pub fn partials(&self, vars: &[f64; 7]) -> Result<[f64; 7], DomainError> {
        let mut out = [0.0; 7];
        for &k in self.0.variables() {
            let seeded: Vars<Jet> =
                std::array::from_fn(|i| Some(Jet::new(vars[i], if i == k { 1.0 } else { 0.0 })));
            out[k] = self.0.eval(&seeded)?.deriv;
        }
        Ok(out)
    }
}

impl std::fmt::Display for CoeffFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

pub fn parse_coeff(src: &str, symmetry: &Symmetry) -> Result<CoeffFn, ParseError> {
    Expr::parse(src, symmetry.context()).map(CoeffFn)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Interval {
        Interval { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> [f64; 2] {
        [i.lo, i.hi]
    }
}

/// Declared admissible region for `α`, `α̇`, `|u|`, `|v|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleDomain {
    pub a: Interval,
    pub da: Interval,
    pub s1: Interval,
    pub s2: Interval,
}

pub const DEFAULT_A_RANGE: Interval = Interval::new(-1.0, 1.0);

impl AdmissibleDomain {
    pub fn contains(&self, st: &ThermalState) -> bool {
        self.a.contains(st.alpha)
            && self.da.contains(st.alpha_dot)
            && self.s1.contains(st.u.norm())
            && self.s2.contains(st.v.norm())
    }
}

/// Which scalar constitutive function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarField {
    Eps,
    Eta,
    Lambda,
}

/// Which influx.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flux {
    H,
    Q,
}

/// Every constitutive quantity at one state.
#[derive(Debug, Clone)]
pub struct Evaluated<S> {
    pub eps: S,
    pub eta: S,
    pub lambda: S,
    pub h: [S; 3],
    pub q: [S; 3],
    pub h_coeffs: Vec<S>,
    pub q_coeffs: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstitutiveModel {
    pub name: String,
    pub symmetry: Symmetry,
    pub rho: f64,
    pub eps: CoeffFn,
    pub eta: CoeffFn,
    pub lambda: CoeffFn,
    pub h: Vec<CoeffFn>,
    pub q: Vec<CoeffFn>,
    pub domain: AdmissibleDomain,
}

/// Source strings of a model, before parsing.
#[derive(Debug, Clone)]
pub struct ModelSource<'a> {
    pub name: &'a str,
    pub symmetry: Symmetry,
    pub rho: f64,
    pub eps: &'a str,
    pub eta: &'a str,
    pub lambda: &'a str,
    pub h: Vec<String>,
    pub q: Vec<String>,
    pub domain: AdmissibleDomain,
}

impl ConstitutiveModel {
    pub fn from_source(src: ModelSource<'_>) -> Result<ConstitutiveModel, ModelError> {
        let sym = src.symmetry;
        let parse = |field: String, s: &str| {
            parse_coeff(s, &sym).map_err(|source| ModelError::Parse { field, source })
        };
        let parse_list = |field: &str, list: &[String]| {
            list.iter()
                .enumerate()
                .map(|(i, s)| parse(format!("{field}[{i}]"), s))
                .collect::<Result<Vec<_>, _>>()
        };
        let model = ConstitutiveModel {
            name: src.name.to_string(),
            symmetry: sym,
            rho: src.rho,
            eps: parse("eps".into(), src.eps)?,
            eta: parse("eta".into(), src.eta)?,
            lambda: parse("lambda".into(), src.lambda)?,
            h: parse_list("h", &src.h)?,
            q: parse_list("q", &src.q)?,
            domain: src.domain,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let invalid = |m: String| Err(ModelError::Invalid(m));
        if self.name.is_empty() {
            return invalid("name must be non-empty".into());
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return invalid(format!("rho must be positive, got {}", self.rho));
        }
        let n = self.symmetry.flux_terms();
        if self.h.len() != n || self.q.len() != n {
            return invalid(format!(
                "expected {n} coefficients for h and q, got {} and {}",
                self.h.len(),
                self.q.len()
            ));
        }
        if let Some(e) = self.symmetry.axis() {
            if !e.is_finite() || (e.norm() - 1.0).abs() > TOL.algebraic {
                return invalid(format!("axis must be a unit vector, has norm {}", e.norm()));
            }
        }
        let d = &self.domain;
        for (label, i) in [("a", d.a), ("da", d.da), ("s1", d.s1), ("s2", d.s2)] {
            if !i.is_valid() {
                return invalid(format!("domain.{label} must satisfy lo <= hi, got [{}, {}]", i.lo, i.hi));
            }
        }
        if d.s1.lo < 0.0 || d.s2.lo < 0.0 {
            return invalid("domain.s1 and domain.s2 must be non-negative".into());
        }
        self.check_lambda_positive(256, 0)
    }

    /// Sample the admissible domain and require `λ > 0` everywhere.
    pub fn check_lambda_positive(&self, samples: usize, seed: u64) -> Result<(), ModelError> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sampler = StateSampler::covering(&self.domain);
        for _ in 0..samples {
            let st = sampler.sample(&mut rng);
            let lam = self.lambda.eval(&self.invariants(&st.plain()))?;
            if lam <= 0.0 {
                return Err(ModelError::Invalid(format!(
                    "lambda must be positive on the admissible domain, got {lam} at {st:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_transverse(&self) -> bool {
        matches!(self.symmetry, Symmetry::TransverselyIsotropic { .. })
    }

    /// Every coefficient function, labelled.
    pub fn coefficients(&self) -> Vec<(String, &CoeffFn)> {
        let mut out = vec![
            ("eps".to_string(), &self.eps),
            ("eta".to_string(), &self.eta),
            ("lambda".to_string(), &self.lambda),
        ];
        for (i, c) in self.h.iter().enumerate() {
            out.push((format!("h{}", i + 1), c));
        }
        for (i, c) in self.q.iter().enumerate() {
            out.push((format!("q{}", i + 1), c));
        }
        out
    }

    /// Invariants of the state. With differentiable scalars `s1`/`s2` are left
    /// unbound at a zero gradient, where the norm is not smooth.
    pub fn invariants<S: Scalar>(&self, st: &GState<S>) -> Vars<S> {
        let norm = |x: &[S; 3]| {
            let sq = dot(x, x);
            if S::DIFFERENTIABLE && sq.value() == 0.0 {
                None
            } else {
                Some(sq.sqrt())
            }
        };
        let mut vars: Vars<S> = [None; 7];
        vars[VAR_A] = Some(st.alpha);
        vars[VAR_DA] = Some(st.alpha_dot);
        vars[VAR_S1] = norm(&st.u);
        vars[VAR_S2] = norm(&st.v);
        vars[VAR_S3] = Some(dot(&st.u, &st.v));
        if let Some(e) = self.symmetry.axis() {
            let e = e.0.map(S::constant);
            vars[VAR_S4] = Some(dot(&st.u, &e));
            vars[VAR_S5] = Some(dot(&st.v, &e));
        }
        vars
    }

    fn assemble<S: Scalar>(&self, coeffs: &[S], st: &GState<S>) -> [S; 3] {
        let mut acc = [S::constant(0.0); 3];
        axpy3(coeffs[0], &st.u, &mut acc);
        axpy3(coeffs[1], &st.v, &mut acc);
        if let Some(e) = self.symmetry.axis() {
            axpy3(coeffs[2], &e.0.map(S::constant), &mut acc);
        }
        acc
    }

    fn eval_list<S: Scalar>(&self, list: &[CoeffFn], vars: &Vars<S>) -> Result<Vec<S>, DomainError> {
        list.iter().map(|c| c.eval(vars)).collect()
    }

    pub fn evaluate<S: Scalar>(&self, st: &GState<S>) -> Result<Evaluated<S>, DomainError> {
        let vars = self.invariants(st);
        let lambda = self.lambda.eval(&vars)?;
        if lambda.value() <= 0.0 {
            return Err(DomainError::NonPositiveMultiplier {
                value: lambda.value(),
            });
        }
        let h_coeffs = self.eval_list(&self.h, &vars)?;
        let q_coeffs = self.eval_list(&self.q, &vars)?;
        Ok(Evaluated {
            eps: self.eps.eval(&vars)?,
            eta: self.eta.eval(&vars)?,
            lambda,
            h: self.assemble(&h_coeffs, st),
            q: self.assemble(&q_coeffs, st),
            h_coeffs,
            q_coeffs,
        })
    }

    pub fn flux_generic<S: Scalar>(&self, which: Flux, st: &GState<S>) -> Result<[S; 3], DomainError> {
        let vars = self.invariants(st);
        let list = match which {
            Flux::H => &self.h,
            Flux::Q => &self.q,
        };
        let coeffs = self.eval_list(list, &vars)?;
        Ok(self.assemble(&coeffs, st))
    }

    pub fn scalar_generic<S: Scalar>(&self, which: ScalarField, st: &GState<S>) -> Result<S, DomainError> {
        let vars = self.invariants(st);
        match which {
            ScalarField::Eps => self.eps.eval(&vars),
            ScalarField::Eta => self.eta.eval(&vars),
            ScalarField::Lambda => self.lambda.eval(&vars),
        }
    }

    /// `c1 u + c2 v [+ c3 e]` at a plain state.
    pub fn eval_flux(&self, which: Flux, state: &ThermalState) -> Result<Vec3, DomainError> {
        self.flux_generic(which, &state.plain()).map(Vec3)
    }

    pub fn eval_scalar(&self, which: ScalarField, state: &ThermalState) -> Result<f64, DomainError> {
        self.scalar_generic(which, &state.plain())
    }

    /// Plain invariant values `[a, da, s1, s2, s3, s4, s5]` (unused slots 0).
    pub fn invariant_values(&self, state: &ThermalState) -> [f64; 7] {
        self.invariants(&state.plain()).map(|x| x.unwrap_or(0.0))
    }

    pub fn to_file(&self) -> ModelFile {
        let strings = |l: &[CoeffFn]| l.iter().map(ToString::to_string).collect();
        let (symmetry, axis) = match self.symmetry {
            Symmetry::Isotropic => ("isotropic".to_string(), None),
            Symmetry::TransverselyIsotropic { axis } => ("transversely_isotropic".to_string(), Some(axis.0)),
        };
        ModelFile {
            name: self.name.clone(),
            symmetry,
            axis,
            rho: self.rho,
            eps: self.eps.to_string(),
            eta: self.eta.to_string(),
            lambda: self.lambda.to_string(),
            h: strings(&self.h),
            q: strings(&self.q),
            domain: DomainFile {
                a: (self.domain.a != DEFAULT_A_RANGE).then_some(self.domain.a),
                da: self.domain.da,
                s1: self.domain.s1,
                s2: self.domain.s2,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ConstitutiveModel, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model()
    }
}

/// On-disk model record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub symmetry: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    pub rho: f64,
    pub eps: String,
    pub eta: String,
    pub lambda: String,
    pub h: Vec<String>,
    pub q: Vec<String>,
    pub domain: DomainFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Interval>,
    pub da: Interval,
    pub s1: Interval,
    pub s2: Interval,
}

impl ModelFile {
    pub fn into_model(self) -> Result<ConstitutiveModel, ModelError> {
        let symmetry = match (self.symmetry.as_str(), self.axis) {
            ("isotropic", None) => Symmetry::Isotropic,
            ("isotropic", Some(_)) => {
                return Err(ModelError::Invalid("isotropic models take no axis".into()))
            }
            ("transversely_isotropic", Some(a)) => Symmetry::TransverselyIsotropic { axis: Vec3(a) },
            ("transversely_isotropic", None) => {
                return Err(ModelError::Invalid("transversely_isotropic models need an axis".into()))
            }
            (other, _) => {
                return Err(ModelError::Invalid(format!(
                    "symmetry must be isotropic or transversely_isotropic, got {other:?}"
                )))
            }
        };
        ConstitutiveModel::from_source(ModelSource {
            name: &self.name,
            symmetry,
            rho: self.rho,
            eps: &self.eps,
            eta: &self.eta,
            lambda: &self.lambda,
            h: self.h,
            q: self.q,
            domain: AdmissibleDomain {
                a: self.domain.a.unwrap_or(DEFAULT_A_RANGE),
                da: self.domain.da,
                s1: self.domain.s1,
                s2: self.domain.s2,
            },
        })
    }
}

/// Isotropic model with `h_j = λ q_j` written out textually.
pub fn proportional_isotropic(
    name: &str,
    rho: f64,
    lambda: &str,
    q: [&str; 2],
    eps: &str,
    eta: &str,
    domain: AdmissibleDomain,
) -> Result<ConstitutiveModel, ModelError> {
    ConstitutiveModel::from_source(ModelSource {
        name,
        symmetry: Symmetry::Isotropic,
        rho,
        eps,
        eta,
        lambda,
        h: q.iter().map(|qj| format!("({lambda}) * ({qj})")).collect(),
        q: q.iter().map(|s| s.to_string()).collect(),
        domain,
    })
}

/// Transversely isotropic model about `e = (0,0,1)` with
/// `q = -k1 u - k2 v - k3 (u·e) e`, `λ = 1/(θ0 + da)` and
/// `h = λ q + c0·da e`; `ε = η = a`.
pub fn build_counterexample(
    theta0: f64,
    k1: f64,
    k2: f64,
    k3: f64,
    c0: f64,
) -> Result<ConstitutiveModel, ModelError> {
    let finite = [theta0, k1, k2, k3, c0].iter().all(|x| x.is_finite());
    if !finite || theta0 <= 0.0 || k1 < 0.0 || k2 < 0.0 || k3 < 0.0 {
        return Err(ModelError::Invalid(format!(
            "counterexample needs theta0 > 0 and k1, k2, k3 >= 0 (got {theta0}, {k1}, {k2}, {k3}, {c0})"
        )));
    }
    let lambda = format!("1 / ({theta0} + da)");
    let q = [format!("-{k1}"), format!("-{k2}"), format!("-{k3} * s4")];
    let mut h: Vec<String> = q.iter().map(|qj| format!("{lambda} * ({qj})")).collect();
    h[2] = format!("{} + {c0} * da", h[2]);
    ConstitutiveModel::from_source(ModelSource {
        name: "counterexample_transverse",
        symmetry: Symmetry::TransverselyIsotropic { axis: Vec3::E3 },
        rho: 1000.0,
        eps: "a",
        eta: "a",
        lambda: &lambda,
        h,
        q: q.to_vec(),
        domain: AdmissibleDomain {
            a: DEFAULT_A_RANGE,
            da: Interval::new(1.0, theta0 / 2.0),
            s1: Interval::new(0.1, 10.0),
            s2: Interval::new(0.1, 10.0),
        },
    })
}

/// Draws states from an admissible domain. `non_degenerate` samplers keep
/// `|u|, |v| >= 0.1` and `|u·v| <= 0.99 |u||v|`.
#[derive(Debug, Clone, Copy)]
pub struct StateSampler {
    pub domain: AdmissibleDomain,
    pub non_degenerate: bool,
}

impl StateSampler {
    /// Sampler over the whole declared domain.
    pub fn covering(domain: &AdmissibleDomain) -> StateSampler {
        StateSampler {
            domain: *domain,
            non_degenerate: false,
        }
    }

    /// Sampler restricted to non-degenerate states; fails if none exist.
    pub fn non_degenerate(domain: &AdmissibleDomain) -> Result<StateSampler, SearchError> {
        let mut d = *domain;
        d.s1.lo = d.s1.lo.max(MIN_GRADIENT_NORM);
        d.s2.lo = d.s2.lo.max(MIN_GRADIENT_NORM);
        for (label, i) in [("a", d.a), ("da", d.da), ("s1", d.s1), ("s2", d.s2)] {
            if !i.is_valid() {
                return Err(SearchError::EmptyDomain(format!(
                    "{label} range [{}, {}] is empty after the non-degeneracy clamp",
                    i.lo, i.hi
                )));
            }
        }
        Ok(StateSampler {
            domain: d,
            non_degenerate: true,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ThermalState {
        let d = &self.domain;
        loop {
            let u = Vec3::random_unit(rng).scale(d.s1.sample(rng));
            let v = Vec3::random_unit(rng).scale(d.s2.sample(rng));
            let st = ThermalState::new(d.a.sample(rng), d.da.sample(rng), u, v);
            if !self.non_degenerate || is_non_degenerate(&st) {
                return st;
            }
        }
    }

    pub fn contains(&self, st: &ThermalState) -> bool {
        self.domain.contains(st) && (!self.non_degenerate || is_non_degenerate(st))
    }
}

pub fn is_non_degenerate(st: &ThermalState) -> bool {
    let (s1, s2) = (st.u.norm(), st.v.norm());
    s1 >= MIN_GRADIENT_NORM && s2 >= MIN_GRADIENT_NORM && st.u.dot(&st.v).abs() <= MAX_ALIGNMENT * s1 * s2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ParseErrorKind;

    fn wide() -> AdmissibleDomain {
        AdmissibleDomain {
            a: DEFAULT_A_RANGE,
            da: Interval::new(-100.0, 100.0),
            s1: Interval::new(0.0, 10.0),
            s2: Interval::new(0.0, 10.0),
        }
    }

    fn iso(h: [&str; 2], q: [&str; 2]) -> ConstitutiveModel {
        ConstitutiveModel::from_source(ModelSource {
            name: "t",
            symmetry: Symmetry::Isotropic,
            rho: 1.0,
            eps: "0",
            eta: "0",
            lambda: "1",
            h: h.map(String::from).to_vec(),
            q: q.map(String::from).to_vec(),
            domain: wide(),
        })
        .unwrap()
    }

    #[test]
    fn isotropic_flux_examples() {
        let m = iso(["1", "0"], ["-1", "-1"]);
        let st = ThermalState::new(0.0, 0.0, Vec3::new(2.0, 0.0, 0.0), Vec3::new(5.0, -1.0, 3.0));
        assert_eq!(m.eval_flux(Flux::H, &st).unwrap(), Vec3::new(2.0, 0.0, 0.0));
        let st = ThermalState::new(0.0, 0.0, Vec3::E1, Vec3::E2);
        assert_eq!(m.eval_flux(Flux::Q, &st).unwrap(), Vec3::new(-1.0, -1.0, 0.0));
    }

    #[test]
    fn transverse_flux_uses_axial_invariant() {
        let m = ConstitutiveModel::from_source(ModelSource {
            name: "axial",
            symmetry: Symmetry::TransverselyIsotropic { axis: Vec3::E3 },
            rho: 1.0,
            eps: "0",
            eta: "0",
            lambda: "1",
            h: vec!["0".into(), "0".into(), "s4".into()],
            q: vec!["0".into(), "0".into(), "0".into()],
            domain: wide(),
        })
        .unwrap();
        let st = ThermalState::new(0.0, 0.0, Vec3::new(0.0, 0.0, 3.0), Vec3::E1);
        assert_eq!(m.eval_flux(Flux::H, &st).unwrap(), Vec3::new(0.0, 0.0, 3.0));
    }

    #[test]
    fn coefficient_domain_errors_propagate() {
        let m = iso(["ln(s3)", "0"], ["0", "0"]);
        let st = ThermalState::new(0.0, 0.0, Vec3::E1, Vec3::E2);
        assert!(matches!(
            m.eval_flux(Flux::H, &st),
            Err(DomainError::Function { function: "ln", .. })
        ));
    }

    #[test]
    fn counterexample_discrepancy_is_axial() {
        let m = build_counterexample(300.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let st = ThermalState::new(0.2, 2.0, Vec3::new(0.3, -1.0, 2.0), Vec3::new(1.0, 1.0, 0.5));
        let h = m.eval_flux(Flux::H, &st).unwrap();
        let q = m.eval_flux(Flux::Q, &st).unwrap();
        let lam = m.eval_scalar(ScalarField::Lambda, &st).unwrap();
        let d = h - q.scale(lam);
        assert!((d - Vec3::new(0.0, 0.0, 2.0)).norm_inf() <= 1e-12);
    }

    #[test]
    fn counterexample_parameter_validation() {
        assert!(build_counterexample(0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(build_counterexample(300.0, -1.0, 0.0, 0.0, 1.0).is_err());
        assert!(build_counterexample(300.0, 1.0, 0.0, 0.0, f64::NAN).is_err());
        let degenerate = build_counterexample(300.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let st = ThermalState::new(0.0, 5.0, Vec3::E1, Vec3::E2);
        let d = degenerate.eval_flux(Flux::H, &st).unwrap()
            - degenerate
                .eval_flux(Flux::Q, &st)
                .unwrap()
                .scale(degenerate.eval_scalar(ScalarField::Lambda, &st).unwrap());
        assert!(d.norm_inf() <= 1e-15);
    }

    #[test]
    fn model_file_round_trip_and_rejections() {
        let m = build_counterexample(300.0, 1.0, 0.5, 2.0, 1.0).unwrap();
        let back = ConstitutiveModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);

        let mut v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        v["colour"] = "blue".into();
        assert!(matches!(ConstitutiveModel::from_json(&v.to_string()), Err(ModelError::Json(_))));

        let mut v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        v["symmetry"] = "isotropic".into();
        v.as_object_mut().unwrap().remove("axis");
        v["h"] = serde_json::json!(["s4", "0"]);
        v["q"] = serde_json::json!(["0", "0"]);
        match ConstitutiveModel::from_json(&v.to_string()) {
            Err(ModelError::Parse { field, source }) => {
                assert_eq!(field, "h[0]");
                assert_eq!(source.kind, ParseErrorKind::IdentifierNotInContext("s4".into()));
            }
            other => panic!("{other:?}"),
        }

        let mut v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        v["axis"] = serde_json::json!([0.0, 0.0, 2.0]);
        assert!(matches!(ConstitutiveModel::from_json(&v.to_string()), Err(ModelError::Invalid(_))));
    }

    #[test]
    fn non_positive_lambda_is_rejected_at_load() {
        let err = ConstitutiveModel::from_source(ModelSource {
            name: "neg",
            symmetry: Symmetry::Isotropic,
            rho: 1.0,
            eps: "0",
            eta: "0",
            lambda: "da",
            h: vec!["0".into(), "0".into()],
            q: vec!["0".into(), "0".into()],
            domain: wide(),
        })
        .unwrap_err();
        assert!(matches!(err, ModelError::Invalid(_)));
    }

    #[test]
    fn zero_gradient_is_non_smooth_only_for_jets() {
        let m = iso(["s1", "0"], ["0", "0"]);
        let st = ThermalState::new(0.0, 0.0, Vec3::ZERO, Vec3::E2);
        assert!(m.eval_flux(Flux::H, &st).is_ok());
        let err = m.flux_generic(Flux::H, &st.lift(None)).unwrap_err();
        assert_eq!(err, DomainError::NonSmooth { invariant: "s1" });
    }

    #[test]
    fn coefficient_partials_match_hand_derivatives() {
        let c = parse_coeff("s1^2 * s3 + exp(0.5 * da)", &Symmetry::Isotropic).unwrap();
        let vals = [0.0, 2.0, 3.0, 0.0, -1.5, 0.0, 0.0];
        let p = c.partials(&vals).unwrap();
        assert_eq!(p[VAR_S1], 2.0 * 3.0 * -1.5);
        assert_eq!(p[VAR_S3], 9.0);
        assert!((p[VAR_DA] - 0.5 * 1f64.exp()).abs() < 1e-15);
        assert_eq!(p[VAR_S2], 0.0);
    }

    #[test]
    fn non_degenerate_sampler_respects_bounds() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let s = StateSampler::non_degenerate(&wide()).unwrap();
        for _ in 0..1000 {
            let st = s.sample(&mut rng);
            assert!(s.contains(&st));
        }
        let mut d = wide();
        d.s1 = Interval::new(0.0, 0.05);
        assert!(matches!(StateSampler::non_degenerate(&d), Err(SearchError::EmptyDomain(_))));
    }
}
