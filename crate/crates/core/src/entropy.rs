//! Coleman–Noll restrictions of the multiplier form of the entropy
//! inequality for the state list `{α, α̇, ∇α, ∇α̇}`.
//!
//! With `u = ∇α`, `v = ∇α̇`, arbitrariness of `α̈`, `∇α̈`, `∇²α`, `∇²α̇` forces
//!
//! ```text
//! sym(∂_u h − λ ∂_u q) = 0,   sym(∂_v h − λ ∂_v q) = 0,
//! ∂_α̇ η − λ ∂_α̇ ε = 0,       ∂_v η − λ ∂_v ε = 0,
//! ```
//!
//! leaving a reduced inequality in `α̇`, `v` and `u`. The functions here
//! evaluate all of these by forward-mode AD and cross-check the Jacobian
//! route against the invariant-partials expansion of the same tensors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autodiff::{directional, gradient_wrt_vectors, Jet};
use crate::constitutive::{
    is_non_degenerate, AdmissibleDomain, ConstitutiveModel, Evaluated, Flux, ScalarField, StateSampler,
    VAR_S1,
};
use crate::error::{DomainError, SearchError};
use crate::state::{Slot, ThermalState};
use crate::tensor::{outer, sym_outer, sym_part, Ten2, Vec3};
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// `sym(∂_u h − λ ∂_u q)`
    pub r1: Ten2,
    /// `sym(∂_v h − λ ∂_v q)`
    pub r2: Ten2,
    /// `∂_α̇ η − λ ∂_α̇ ε`
    pub r3: f64,
    /// `∂_v η − λ ∂_v ε`
    pub r4: Vec3,
    /// Left-hand side of the reduced dissipation inequality.
    pub reduced: f64,
}

pub const RESIDUAL_LABELS: [&str; 4] = [
    "sym(du h - lam du q)",
    "sym(dv h - lam dv q)",
    "d_da eta - lam d_da eps",
    "dv eta - lam dv eps",
];

impl ResidualReport {
    /// Max-norm of each equality residual, in [`RESIDUAL_LABELS`] order.
    pub fn magnitudes(&self) -> [f64; 4] {
        [
            self.r1.norm_inf(),
            self.r2.norm_inf(),
            self.r3.abs(),
            self.r4.norm_inf(),
        ]
    }

    /// Largest equality residual and its label (first wins on ties).
    pub fn worst(&self) -> (&'static str, f64) {
        let m = self.magnitudes();
        let mut best = 0;
        for i in 1..4 {
            if m[i] > m[best] {
                best = i;
            }
        }
        (RESIDUAL_LABELS[best], m[best])
    }

    pub fn max_equality(&self) -> f64 {
        self.worst().1
    }
}

/// Plain values and the eight directional derivatives of every constitutive
/// quantity.
struct Sensitivities {
    value: Evaluated<f64>,
    slots: Vec<Evaluated<Jet>>,
}

impl Sensitivities {
    fn compute(model: &ConstitutiveModel, at: &ThermalState) -> Result<Sensitivities, DomainError> {
        let value = model.evaluate(&at.plain())?;
        let f = |s: &crate::state::GState<Jet>| model.evaluate(s);
        let slots = Slot::ALL
            .iter()
            .map(|&slot| directional(&f, at, slot))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sensitivities { value, slots })
    }

    fn index(slot: Slot) -> usize {
        Slot::ALL.iter().position(|s| *s == slot).expect("slot listed")
    }

    fn at(&self, slot: Slot) -> &Evaluated<Jet> {
        &self.slots[Self::index(slot)]
    }

    fn flux_deriv(&self, which: Flux, slot: Slot) -> Vec3 {
        let e = self.at(slot);
        let f = match which {
            Flux::H => &e.h,
            Flux::Q => &e.q,
        };
        Vec3(f.map(|j| j.deriv))
    }

    fn scalar_deriv(&self, which: ScalarField, slot: Slot) -> f64 {
        let e = self.at(slot);
        match which {
            ScalarField::Eps => e.eps.deriv,
            ScalarField::Eta => e.eta.deriv,
            ScalarField::Lambda => e.lambda.deriv,
        }
    }

    fn jacobian(&self, which: Flux, vector: fn(usize) -> Slot) -> Ten2 {
        Ten2::from_columns(std::array::from_fn(|k| self.flux_deriv(which, vector(k))))
    }

    fn gradient(&self, which: ScalarField, vector: fn(usize) -> Slot) -> Vec3 {
        Vec3(std::array::from_fn(|k| self.scalar_deriv(which, vector(k))))
    }
}

pub fn residuals(model: &ConstitutiveModel, state: &ThermalState) -> Result<ResidualReport, DomainError> {
    let s = Sensitivities::compute(model, state)?;
    let lam = s.value.lambda;
    let r1 = sym_part(&(s.jacobian(Flux::H, Slot::U) - s.jacobian(Flux::Q, Slot::U).scale(lam)));
    let r2 = sym_part(&(s.jacobian(Flux::H, Slot::V) - s.jacobian(Flux::Q, Slot::V).scale(lam)));
    let d_da = |f| s.scalar_deriv(f, Slot::AlphaDot);
    let r3 = d_da(ScalarField::Eta) - lam * d_da(ScalarField::Eps);
    let r4 = s.gradient(ScalarField::Eta, Slot::V) - s.gradient(ScalarField::Eps, Slot::V).scale(lam);

    let d_a = |f| s.scalar_deriv(f, Slot::Alpha);
    let flux_rate = |slot| s.flux_deriv(Flux::H, slot) - s.flux_deriv(Flux::Q, slot).scale(lam);
    let grad_u_energy =
        s.gradient(ScalarField::Eta, Slot::U) - s.gradient(ScalarField::Eps, Slot::U).scale(lam);
    let rho = model.rho;
    let reduced = rho * (d_a(ScalarField::Eta) - lam * d_a(ScalarField::Eps)) * state.alpha_dot
        + (grad_u_energy.scale(rho) + flux_rate(Slot::AlphaDot)).dot(&state.v)
        + flux_rate(Slot::Alpha).dot(&state.u);
    Ok(ResidualReport {
        r1,
        r2,
        r3,
        r4,
        reduced,
    })
}

/// Values and invariant partials `∂_1..∂_5` of `λ` and the flux coefficients.
struct CoefficientPartials {
    lam: f64,
    dlam: [f64; 7],
    h: Vec<f64>,
    dh: Vec<[f64; 7]>,
    q: Vec<f64>,
    dq: Vec<[f64; 7]>,
}

impl CoefficientPartials {
    fn compute(model: &ConstitutiveModel, state: &ThermalState) -> Result<CoefficientPartials, DomainError> {
        let vals = model.invariant_values(state);
        let bound = model.invariants(&state.plain());
        let values = |l: &[crate::constitutive::CoeffFn]| l.iter().map(|c| c.eval(&bound)).collect::<Result<Vec<_>, _>>();
        let partials = |l: &[crate::constitutive::CoeffFn]| l.iter().map(|c| c.partials(&vals)).collect::<Result<Vec<_>, _>>();
        Ok(CoefficientPartials {
            lam: model.lambda.eval(&bound)?,
            dlam: model.lambda.partials(&vals)?,
            h: values(&model.h)?,
            dh: partials(&model.h)?,
            q: values(&model.q)?,
            dq: partials(&model.q)?,
        })
    }

    /// `∂_i h_j − λ ∂_i q_j`, 1-based `i` (invariant) and `j` (coefficient).
    fn g(&self, i: usize, j: usize) -> f64 {
        match (self.dh.get(j - 1), self.dq.get(j - 1)) {
            (Some(dh), Some(dq)) => dh[VAR_S1 + i - 1] - self.lam * dq[VAR_S1 + i - 1],
            _ => 0.0,
        }
    }

    /// `h_j − λ q_j`.
    fn mismatch(&self, j: usize) -> f64 {
        self.h[j - 1] - self.lam * self.q[j - 1]
    }

    /// `∂_i(h_j − λ q_j) + (∂_i λ) q_j` with the product rule written out.
    fn coupled(&self, i: usize, j: usize) -> f64 {
        let k = VAR_S1 + i - 1;
        let d_mismatch = self.dh[j - 1][k] - (self.dlam[k] * self.q[j - 1] + self.lam * self.dq[j - 1][k]);
        d_mismatch + self.dlam[k] * self.q[j - 1]
    }
}

fn require_non_degenerate(state: &ThermalState) -> Result<(), DomainError> {
    if is_non_degenerate(state) {
        Ok(())
    } else {
        Err(DomainError::Degenerate {
            reason: format!(
                "need |u|, |v| >= 0.1 and |u.v| <= 0.99 |u||v| (|u| = {}, |v| = {}, u.v = {})",
                state.u.norm(),
                state.v.norm(),
                state.u.dot(&state.v)
            ),
        })
    }
}

/// Assemble `sym(∂_u(h − λq))` and `sym(∂_v(h − λq))` (λ held fixed) from
/// the invariant partials of the coefficient functions.
pub fn analytic_expansion(model: &ConstitutiveModel, state: &ThermalState) -> Result<(Ten2, Ten2), DomainError> {
    require_non_degenerate(state)?;
    let c = CoefficientPartials::compute(model, state)?;
    let (u, v) = (state.u, state.v);
    let (s1, s2) = (u.norm(), v.norm());
    let g = |i, j| c.g(i, j);

    let mut a1 = Ten2::IDENTITY.scale(c.mismatch(1))
        + outer(&u, &u).scale(g(1, 1) / s1)
        + outer(&v, &v).scale(g(3, 2))
        + sym_outer(&u, &v).scale(g(3, 1) + g(1, 2) / s1);
    let mut a2 = Ten2::IDENTITY.scale(c.mismatch(2))
        + outer(&u, &u).scale(g(3, 1))
        + outer(&v, &v).scale(g(2, 2) / s2)
        + sym_outer(&u, &v).scale(g(2, 1) / s2 + g(3, 2));
    if let Some(e) = model.symmetry.axis() {
        a1 += outer(&e, &e).scale(g(4, 3))
            + sym_outer(&u, &e).scale(g(4, 1) + g(1, 3) / s1)
            + sym_outer(&v, &e).scale(g(4, 2) + g(3, 3));
        a2 += outer(&e, &e).scale(g(5, 3))
            + sym_outer(&u, &e).scale(g(5, 1) + g(3, 3))
            + sym_outer(&v, &e).scale(g(5, 2) + g(2, 3) / s2);
    }
    Ok((a1, a2))
}

/// `max(‖A₁ − r1‖∞, ‖A₂ − r2‖∞)` between the invariant expansion and the
/// AD Jacobian route.
pub fn expansion_crosscheck(model: &ConstitutiveModel, state: &ThermalState) -> Result<f64, DomainError> {
    let (a1, a2) = analytic_expansion(model, state)?;
    let r = residuals(model, state)?;
    Ok((a1 - r.r1).norm_inf().max((a2 - r.r2).norm_inf()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionGroup {
    /// From `sym(∂_u h − λ ∂_u q) = 0`.
    GradU,
    /// From `sym(∂_v h − λ ∂_v q) = 0`.
    GradV,
    /// Axis terms of the `u` condition (transverse isotropy).
    AxialU,
    /// Axis terms of the `v` condition (transverse isotropy).
    AxialV,
}

impl ConditionGroup {
    pub fn name(self) -> &'static str {
        match self {
            ConditionGroup::GradU => "grad_u",
            ConditionGroup::GradV => "grad_v",
            ConditionGroup::AxialU => "axial_u",
            ConditionGroup::AxialV => "axial_v",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub group: ConditionGroup,
    pub label: &'static str,
    pub value: f64,
}

impl Condition {
    pub fn key(&self) -> String {
        format!("{}/{}", self.group.name(), self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionList {
    pub entries: Vec<Condition>,
}

impl ConditionList {
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, c| m.max(c.value.abs()))
    }

    pub fn get(&self, group: ConditionGroup, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|c| c.group == group && c.label == label)
            .map(|c| c.value)
    }
}

/// Scalar coefficient conditions implied by the tensor restrictions: 10 for
/// isotropic models, 18 for transversely isotropic ones.
pub fn condition_lists(model: &ConstitutiveModel, state: &ThermalState) -> Result<ConditionList, DomainError> {
    use ConditionGroup::*;
    require_non_degenerate(state)?;
    let c = CoefficientPartials::compute(model, state)?;
    let g = |i, j| c.g(i, j);
    let mut entries = vec![
        (GradU, "h1 - lam*q1", c.mismatch(1)),
        (GradU, "d1(h1 - lam*q1) + d1(lam)*q1", c.coupled(1, 1)),
        (GradU, "d3h2 - lam*d3q2", g(3, 2)),
        (GradU, "d3h1 - lam*d3q1", g(3, 1)),
        (GradU, "d1h2 - lam*d1q2", g(1, 2)),
        (GradV, "h2 - lam*q2", c.mismatch(2)),
        (GradV, "d2(h2 - lam*q2) + d2(lam)*q2", c.coupled(2, 2)),
        (GradV, "d3h1 - lam*d3q1", g(3, 1)),
        (GradV, "d3h2 - lam*d3q2", g(3, 2)),
        (GradV, "d2h1 - lam*d2q1", g(2, 1)),
    ];
    if model.is_transverse() {
        entries.extend([
            (AxialU, "d4h3 - lam*d4q3", g(4, 3)),
            (AxialU, "d4h1 - lam*d4q1", g(4, 1)),
            (AxialU, "d1h3 - lam*d1q3", g(1, 3)),
            (AxialU, "d4h2 - lam*d4q2 + d3h3 - lam*d3q3", g(4, 2) + g(3, 3)),
            (AxialV, "d5h3 - lam*d5q3", g(5, 3)),
            (AxialV, "d5h2 - lam*d5q2", g(5, 2)),
            (AxialV, "d2h3 - lam*d2q3", g(2, 3)),
            (AxialV, "d5h1 - lam*d5q1 + d3h3 - lam*d3q3", g(5, 1) + g(3, 3)),
        ]);
    }
    Ok(ConditionList {
        entries: entries
            .into_iter()
            .map(|(group, label, value)| Condition { group, label, value })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyReport {
    /// `h − λq`
    pub d: Vec3,
    /// `d·e` for transversely isotropic models.
    pub axial: Option<f64>,
    /// `‖d − (d·e)e‖`, or `‖d‖` without an axis.
    pub orthogonal_norm: f64,
}

pub fn discrepancy(model: &ConstitutiveModel, state: &ThermalState) -> Result<DiscrepancyReport, DomainError> {
    let v = model.evaluate(&state.plain())?;
    let d = Vec3(v.h) - Vec3(v.q).scale(v.lambda);
    Ok(match model.symmetry.axis() {
        Some(e) => DiscrepancyReport {
            d,
            axial: Some(d.dot(&e)),
            orthogonal_norm: d.reject_from(&e).norm(),
        },
        None => DiscrepancyReport {
            d,
            axial: None,
            orthogonal_norm: d.norm(),
        },
    })
}

/// `(∂_u λ, ∂_v λ)`.
pub fn multiplier_independence(model: &ConstitutiveModel, state: &ThermalState) -> Result<(Vec3, Vec3), DomainError> {
    gradient_wrt_vectors(|s| model.scalar_generic(ScalarField::Lambda, s), state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub state: ThermalState,
    pub magnitude: f64,
    pub label: &'static str,
    pub evaluations: usize,
}

/// Best-effort maximization of the worst equality residual over the
/// non-degenerate part of `domain`: seeded random multi-start sampling with
/// three quarters of the budget, then coordinate-wise pattern search from the
/// best few starts with the rest. Deterministic for a given seed; the first
/// maximum found wins ties.
pub fn violation_search(
    model: &ConstitutiveModel,
    domain: &AdmissibleDomain,
    budget: usize,
    seed: u64,
) -> Result<Violation, SearchError> {
    const STARTS: usize = 4;
    const MAX_HALVINGS: usize = 30;
    if budget == 0 {
        return Err(SearchError::EmptyDomain("budget must be at least 1".into()));
    }
    let sampler = StateSampler::non_degenerate(domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objective = |st: &ThermalState| -> Result<(&'static str, f64), SearchError> {
        Ok(residuals(model, st)?.worst())
    };

    let n_random = (budget * 3 / 4).max(1);
    let mut used = 0;
    let mut best: Option<Violation> = None;
    let mut starts: Vec<(ThermalState, f64)> = Vec::with_capacity(STARTS + 1);
    let record = |st: ThermalState, label, mag: f64, best: &mut Option<Violation>| {
        if best.is_none_or(|b| mag > b.magnitude) {
            *best = Some(Violation {
                state: st,
                magnitude: mag,
                label,
                evaluations: 0,
            });
        }
    };

    for _ in 0..n_random {
        let st = sampler.sample(&mut rng);
        let (label, mag) = objective(&st)?;
        used += 1;
        record(st, label, mag, &mut best);
        let pos = starts.iter().position(|(_, m)| mag > *m).unwrap_or(starts.len());
        if pos < STARTS {
            starts.insert(pos, (st, mag));
            starts.truncate(STARTS);
        }
    }

    let d = sampler.domain;
    let base_steps = [
        d.a.width() / 4.0,
        d.da.width() / 4.0,
        d.s1.hi / 4.0,
        d.s1.hi / 4.0,
        d.s1.hi / 4.0,
        d.s2.hi / 4.0,
        d.s2.hi / 4.0,
        d.s2.hi / 4.0,
    ];
    let n_starts = starts.len();
    for (i, (start, start_mag)) in starts.into_iter().enumerate() {
        let share = (budget - used) / (n_starts - i);
        let mut local_budget = share;
        let (mut x, mut fx) = (start, start_mag);
        let mut steps = base_steps;
        let mut halvings = 0;
        while local_budget > 0 && halvings < MAX_HALVINGS {
            let mut improved = false;
            for (slot, step) in Slot::ALL.iter().zip(steps) {
                if step == 0.0 {
                    continue;
                }
                for sign in [1.0, -1.0] {
                    if local_budget == 0 {
                        break;
                    }
                    let cand = x.perturbed(*slot, sign * step);
                    if !sampler.contains(&cand) {
                        continue;
                    }
                    let (label, mag) = objective(&cand)?;
                    local_budget -= 1;
                    used += 1;
                    record(cand, label, mag, &mut best);
                    if mag > fx {
                        x = cand;
                        fx = mag;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                steps = steps.map(|s| s / 2.0);
                halvings += 1;
            }
        }
    }
    let mut v = best.expect("at least one evaluation");
    v.evaluations = used;
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterfaceJumps {
    /// `[[q·n]] = q_A·n − q_B·n`
    pub q_n: f64,
    /// `[[h·n]]`
    pub h_n: f64,
    /// `[[λ]]`
    pub lambda: f64,
    /// Both flux jumps vanish within tolerance.
    pub ideal_contact: bool,
    pub lambda_continuous: bool,
}

pub fn interface_check(
    model_a: &ConstitutiveModel,
    model_b: &ConstitutiveModel,
    state_a: &ThermalState,
    state_b: &ThermalState,
    n: &Vec3,
) -> Result<InterfaceJumps, DomainError> {
    if (n.norm() - 1.0).abs() > TOL.algebraic {
        return Err(DomainError::Degenerate {
            reason: format!("interface normal must be a unit vector, has norm {}", n.norm()),
        });
    }
    let a = model_a.evaluate(&state_a.plain())?;
    let b = model_b.evaluate(&state_b.plain())?;
    let q_n = Vec3(a.q).dot(n) - Vec3(b.q).dot(n);
    let h_n = Vec3(a.h).dot(n) - Vec3(b.h).dot(n);
    let lambda = a.lambda - b.lambda;
    Ok(InterfaceJumps {
        q_n,
        h_n,
        lambda,
        ideal_contact: q_n.abs() <= TOL.contact && h_n.abs() <= TOL.contact,
        lambda_continuous: lambda.abs() <= TOL.contact,
    })
}
