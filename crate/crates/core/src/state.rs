//! The thermal state `{α, α̇, u = ∇α, v = ∇α̇}` at a material point.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet, Scalar};
use crate::tensor::{Rotation, Vec3};

/// Plain state record. `alpha` is the thermal displacement, `alpha_dot` the
/// empirical temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub alpha: f64,
    pub alpha_dot: f64,
    pub u: Vec3,
    pub v: Vec3,
}

/// Differentiation slot: one of the two scalars or a component of `u`, `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Alpha,
    AlphaDot,
    U(usize),
    V(usize),
}

impl Slot {
    pub const ALL: [Slot; 8] = [
        Slot::Alpha,
        Slot::AlphaDot,
        Slot::U(0),
        Slot::U(1),
        Slot::U(2),
        Slot::V(0),
        Slot::V(1),
        Slot::V(2),
    ];
}

/// State over an arbitrary scalar type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GState<S> {
    pub alpha: S,
    pub alpha_dot: S,
    pub u: [S; 3],
    pub v: [S; 3],
}

impl ThermalState {
    pub const fn new(alpha: f64, alpha_dot: f64, u: Vec3, v: Vec3) -> Self {
        ThermalState {
            alpha,
            alpha_dot,
            u,
            v,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.alpha_dot.is_finite() && self.u.is_finite() && self.v.is_finite()
    }

    pub fn plain(&self) -> GState<f64> {
        GState {
            alpha: self.alpha,
            alpha_dot: self.alpha_dot,
            u: self.u.0,
            v: self.v.0,
        }
    }

    /// Jet state with a unit seed on `slot` (or no seed).
    pub fn lift(&self, slot: Option<Slot>) -> GState<Jet> {
        let seed = |s: Slot, x: f64| Jet::new(x, if slot == Some(s) { 1.0 } else { 0.0 });
        GState {
            alpha: seed(Slot::Alpha, self.alpha),
            alpha_dot: seed(Slot::AlphaDot, self.alpha_dot),
            u: std::array::from_fn(|k| seed(Slot::U(k), self.u[k])),
            v: std::array::from_fn(|k| seed(Slot::V(k), self.v[k])),
        }
    }

    pub fn slot_value(&self, slot: Slot) -> f64 {
        match slot {
            Slot::Alpha => self.alpha,
            Slot::AlphaDot => self.alpha_dot,
            Slot::U(k) => self.u[k],
            Slot::V(k) => self.v[k],
        }
    }

    pub fn perturbed(&self, slot: Slot, h: f64) -> ThermalState {
        let mut s = *self;
        match slot {
            Slot::Alpha => s.alpha += h,
            Slot::AlphaDot => s.alpha_dot += h,
            Slot::U(k) => s.u.0[k] += h,
            Slot::V(k) => s.v.0[k] += h,
        }
        s
    }

    /// Same scalars, gradients rotated by `q`.
    pub fn rotated(&self, q: &Rotation) -> ThermalState {
        ThermalState {
            u: q.apply(&self.u),
            v: q.apply(&self.v),
            ..*self
        }
    }
}

impl<S: Scalar> GState<S> {
    pub fn values(&self) -> ThermalState {
        ThermalState {
            alpha: self.alpha.value(),
            alpha_dot: self.alpha_dot.value(),
            u: Vec3(self.u.map(Scalar::value)),
            v: Vec3(self.v.map(Scalar::value)),
        }
    }
}
