//! Forward-mode differentiation over the thermal state slots.
//!
//! Every constitutive quantity is written once, generically over [`Scalar`],
//! and evaluated either on plain `f64` or on [`Jet`]s carrying one directional
//! derivative. A Jacobian with respect to `u` and `v` costs six passes, one
//! per vector component; the scalar slots `α`, `α̇` cost one pass each.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::DomainError;
use crate::state::{GState, Slot, ThermalState};
use crate::tensor::{Ten2, Vec3};

/// Numeric type the constitutive functions are evaluated over.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether the type carries derivatives, so that non-smooth points matter.
    const DIFFERENTIABLE: bool;

    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// `self^e` for a positive base.
    fn powf(self, e: Self) -> Self;
}

impl Scalar for f64 {
    const DIFFERENTIABLE: bool = false;

    fn constant(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

/// Value with one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub deriv: f64,
}

impl Jet {
    pub const fn new(value: f64, deriv: f64) -> Jet {
        Jet { value, deriv }
    }

    pub const fn variable(value: f64) -> Jet {
        Jet { value, deriv: 1.0 }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.deriv * o.value + self.value * o.deriv,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        Jet::new(
            self.value / o.value,
            (self.deriv * o.value - self.value * o.deriv) / (o.value * o.value),
        )
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.value, -self.deriv)
    }
}

impl Scalar for Jet {
    const DIFFERENTIABLE: bool = true;

    fn constant(v: f64) -> Self {
        Jet::new(v, 0.0)
    }
    fn value(self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        Jet::new(e, e * self.deriv)
    }
    fn ln(self) -> Self {
        Jet::new(self.value.ln(), self.deriv / self.value)
    }
    fn sin(self) -> Self {
        Jet::new(self.value.sin(), self.value.cos() * self.deriv)
    }
    fn cos(self) -> Self {
        Jet::new(self.value.cos(), -self.value.sin() * self.deriv)
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        Jet::new(r, self.deriv / (2.0 * r))
    }
    fn powi(self, n: i32) -> Self {
        let d = if n == 0 {
            0.0
        } else {
            f64::from(n) * self.value.powi(n - 1) * self.deriv
        };
        Jet::new(self.value.powi(n), d)
    }
    fn powf(self, e: Self) -> Self {
        let p = self.value.powf(e.value);
        let mut d = e.value * self.value.powf(e.value - 1.0) * self.deriv;
        if e.deriv != 0.0 {
            d += p * self.value.ln() * e.deriv;
        }
        Jet::new(p, d)
    }
}

pub fn dot<S: Scalar>(a: &[S; 3], b: &[S; 3]) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn axpy3<S: Scalar>(c: S, x: &[S; 3], acc: &mut [S; 3]) {
    for k in 0..3 {
        acc[k] = acc[k] + c * x[k];
    }
}

/// Output of a differentiated state function: a scalar or a vector.
pub trait JetOutput {
    type Plain;
    fn plain_value(&self) -> Self::Plain;
    fn plain_deriv(&self) -> Self::Plain;
    fn components(&self) -> Vec<Jet>;
}

impl JetOutput for Jet {
    type Plain = f64;
    fn plain_value(&self) -> f64 {
        self.value
    }
    fn plain_deriv(&self) -> f64 {
        self.deriv
    }
    fn components(&self) -> Vec<Jet> {
        vec![*self]
    }
}

impl JetOutput for [Jet; 3] {
    type Plain = Vec3;
    fn plain_value(&self) -> Vec3 {
        Vec3(self.map(|j| j.value))
    }
    fn plain_deriv(&self) -> Vec3 {
        Vec3(self.map(|j| j.deriv))
    }
    fn components(&self) -> Vec<Jet> {
        self.to_vec()
    }
}

/// `∂f/∂u` and `∂f/∂v` of a vector-valued state function; entry `(i, k)` is
/// `∂f_i/∂u_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecJacobian {
    pub d_u: Ten2,
    pub d_v: Ten2,
}

/// Scalar slots of the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarSlot {
    Alpha,
    AlphaDot,
}

impl From<ScalarSlot> for Slot {
    fn from(s: ScalarSlot) -> Slot {
        match s {
            ScalarSlot::Alpha => Slot::Alpha,
            ScalarSlot::AlphaDot => Slot::AlphaDot,
        }
    }
}

/// Directional derivative of `f` at `at` with a unit perturbation of `slot`.
pub fn directional<F, O>(f: &F, at: &ThermalState, slot: Slot) -> Result<O, DomainError>
where
    F: Fn(&GState<Jet>) -> Result<O, DomainError>,
{
    f(&at.lift(Some(slot)))
}

pub fn jacobian_wrt_vectors<F>(f: F, at: &ThermalState) -> Result<VecJacobian, DomainError>
where
    F: Fn(&GState<Jet>) -> Result<[Jet; 3], DomainError>,
{
    let mut cols_u = [Vec3::ZERO; 3];
    let mut cols_v = [Vec3::ZERO; 3];
    for k in 0..3 {
        cols_u[k] = directional(&f, at, Slot::U(k))?.plain_deriv();
        cols_v[k] = directional(&f, at, Slot::V(k))?.plain_deriv();
    }
    Ok(VecJacobian {
        d_u: Ten2::from_columns(cols_u),
        d_v: Ten2::from_columns(cols_v),
    })
}

/// `(∂f/∂u, ∂f/∂v)` of a scalar state function.
pub fn gradient_wrt_vectors<F>(f: F, at: &ThermalState) -> Result<(Vec3, Vec3), DomainError>
where
    F: Fn(&GState<Jet>) -> Result<Jet, DomainError>,
{
    let mut du = [0.0; 3];
    let mut dv = [0.0; 3];
    for k in 0..3 {
        du[k] = directional(&f, at, Slot::U(k))?.deriv;
        dv[k] = directional(&f, at, Slot::V(k))?.deriv;
    }
    Ok((Vec3(du), Vec3(dv)))
}

pub fn partial_wrt_scalar<F, O>(
    f: F,
    which: ScalarSlot,
    at: &ThermalState,
) -> Result<O::Plain, DomainError>
where
    F: Fn(&GState<Jet>) -> Result<O, DomainError>,
    O: JetOutput,
{
    Ok(directional(&f, at, which.into())?.plain_deriv())
}

/// Largest `|AD − FD| / (1 + |AD|)` over all eight slots and all output
/// components, with central differences of step `step·(1 + |slot value|)`.
pub fn fd_crosscheck<F, O>(f: F, at: &ThermalState, step: f64) -> Result<f64, DomainError>
where
    F: Fn(&GState<Jet>) -> Result<O, DomainError>,
    O: JetOutput,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut worst = 0.0f64;
    for slot in Slot::ALL {
        let ad = directional(&f, at, slot)?.components();
        let h = step * (1.0 + at.slot_value(slot).abs());
        let plus = f(&at.perturbed(slot, h).lift(None))?.components();
        let minus = f(&at.perturbed(slot, -h).lift(None))?.components();
        for ((a, p), m) in ad.iter().zip(&plus).zip(&minus) {
            let fd = (p.value - m.value) / (2.0 * h);
            worst = worst.max((a.deriv - fd).abs() / (1.0 + a.deriv.abs()));
        }
    }
    Ok(worst)
}
