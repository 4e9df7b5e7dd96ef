//! Explicit 1D solver for the linear Type III equation
//! `ρc α̈ = k1 α'' + k2 α̇'' + ρ r` on a cell-centred grid with insulated ends.
//!
//! `k2 = 0` is the undamped (Type II) wave limit, `k1 = 0` the Fourier limit.
//! The entropy monitor uses the closure, quadratic about `θ0`,
//!
//! ```text
//! η = (c/θ0)(θ − θ0) − (c/2θ0²)(θ − θ0)² − (k1/2ρθ0²)|α'|²
//! λ(θ) = 1/θ0 − (θ − θ0)/θ0²,   h = λ(θ) q,   s = λ(θ) r,   q = −k1 α' − k2 α̇'
//! ```
//!
//! which gives `ρξ = k2 |α̇'|²/θ0²` in the continuum.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{DomainError, SimError};
use crate::expr::{Expr, VarContext};

pub const CLOSURE: &str = "linear Type III (rho c alpha_tt = k1 alpha_xx + k2 alpha_dot_xx + rho r), \
insulated ends; entropy closure quadratic about theta0 with h = q lambda(theta), \
lambda(theta) = 1/theta0 - (theta - theta0)/theta0^2; contact jumps use lambda = 1/alpha_dot";

const DIFFUSION_CFL: f64 = 0.45;
const WAVE_CFL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub rho: f64,
    pub c: f64,
    /// Modulus on `∇α`.
    pub k1: f64,
    /// Conductivity on `∇α̇`.
    pub k2: f64,
    pub theta0: f64,
}

impl Material {
    pub fn validate(&self) -> Result<(), SimError> {
        let all = [self.rho, self.c, self.k1, self.k2, self.theta0];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(SimError::Invalid("material parameters must be finite".into()));
        }
        if self.rho <= 0.0 || self.c <= 0.0 || self.theta0 <= 0.0 {
            return Err(SimError::Invalid("rho, c and theta0 must be positive".into()));
        }
        if self.k1 < 0.0 || self.k2 < 0.0 || self.k1 + self.k2 <= 0.0 {
            return Err(SimError::Invalid("need k1, k2 >= 0 and k1 + k2 > 0".into()));
        }
        Ok(())
    }

    pub fn wave_speed(&self) -> f64 {
        (self.k1 / (self.rho * self.c)).sqrt()
    }

    pub fn diffusivity(&self) -> f64 {
        self.k2 / (self.rho * self.c)
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Discretized medium. Face arrays have `n + 1` entries; the end faces carry
/// zero conductivity, which is the insulated boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    pub n: usize,
    pub dx: f64,
    pub theta0: f64,
    pub cells: Vec<Material>,
    pub k1_face: Vec<f64>,
    pub k2_face: Vec<f64>,
    /// First cell of the second material.
    pub interface: Option<usize>,
}

impl Medium {
    fn build(cells: Vec<Material>, length: f64, interface: Option<usize>) -> Result<Medium, SimError> {
        let n = cells.len();
        if n < 3 {
            return Err(SimError::Invalid(format!("need at least 3 cells, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SimError::Invalid(format!("domain length must be positive, got {length}")));
        }
        let mut k1_face = vec![0.0; n + 1];
        let mut k2_face = vec![0.0; n + 1];
        for f in 1..n {
            k1_face[f] = harmonic(cells[f - 1].k1, cells[f].k1);
            k2_face[f] = harmonic(cells[f - 1].k2, cells[f].k2);
        }
        Ok(Medium {
            n,
            dx: length / n as f64,
            theta0: cells[0].theta0,
            cells,
            k1_face,
            k2_face,
            interface,
        })
    }

    pub fn uniform(m: &Material, n: usize, length: f64) -> Result<Medium, SimError> {
        m.validate()?;
        Self::build(vec![*m; n], length, None)
    }

    /// Material `a` on cells `[0, interface)`, `b` on `[interface, n)`.
    pub fn two_material(a: &Material, b: &Material, interface: usize, n: usize, length: f64) -> Result<Medium, SimError> {
        a.validate()?;
        b.validate()?;
        if a.theta0 != b.theta0 {
            return Err(SimError::Invalid("both materials must share theta0".into()));
        }
        if interface == 0 || interface >= n {
            return Err(SimError::Invalid(format!(
                "interface cell must lie in 1..{n}, got {interface}"
            )));
        }
        let cells = (0..n).map(|i| if i < interface { *a } else { *b }).collect();
        Self::build(cells, length, Some(interface))
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    fn rho_c(&self, i: usize) -> f64 {
        self.cells[i].rho * self.cells[i].c
    }

    /// Stability limits: the wave limit where `k1 > 0`, the diffusion limit
    /// where `k2 > 0`. On a uniform grid they reduce to `0.9 dx/√(k1/ρc)` and
    /// `0.45 dx² ρc/k2`.
    pub fn stability_limits(&self) -> Vec<(f64, &'static str)> {
        let mut out = Vec::new();
        let mut speed = 0.0f64;
        let mut diffusion = f64::INFINITY;
        for i in 0..self.n {
            let k1 = 0.5 * (self.k1_face[i] + self.k1_face[i + 1]);
            speed = speed.max((k1 / self.rho_c(i)).sqrt());
            let k2 = self.k2_face[i] + self.k2_face[i + 1];
            if k2 > 0.0 {
                diffusion = diffusion.min(2.0 * DIFFUSION_CFL * self.rho_c(i) * self.dx * self.dx / k2);
            }
        }
        if speed > 0.0 {
            out.push((WAVE_CFL * self.dx / speed, "wave limit 0.9 dx / sqrt(k1/(rho c))"));
        }
        if diffusion.is_finite() {
            out.push((diffusion, "diffusion limit 0.45 dx^2 rho c / k2"));
        }
        out
    }

    pub fn check_dt(&self, dt: f64) -> Result<(), SimError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SimError::Invalid(format!("time step must be positive, got {dt}")));
        }
        for (limit, reason) in self.stability_limits() {
            if dt > limit * (1.0 + 1e-12) {
                return Err(SimError::Cfl { dt, limit, reason });
            }
        }
        Ok(())
    }

    /// Linearized coldness `1/θ0 − (θ − θ0)/θ0²`.
    pub fn coldness(&self, theta: f64) -> f64 {
        1.0 / self.theta0 - (theta - self.theta0) / (self.theta0 * self.theta0)
    }
}

/// External energy supply `r(x, t)` per unit mass; the entropy supply is
/// `λ(θ) r`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceSpec {
    r: Option<Expr>,
}

impl SourceSpec {
    pub fn none() -> SourceSpec {
        SourceSpec { r: None }
    }

    pub fn parse(src: &str) -> Result<SourceSpec, SimError> {
        let e = Expr::parse(src, VarContext::SPACE_TIME).map_err(|source| SimError::Parse {
            field: "source".into(),
            source,
        })?;
        Ok(SourceSpec { r: Some(e) })
    }

    pub fn is_none(&self) -> bool {
        self.r.is_none()
    }

    pub fn r(&self, x: f64, t: f64) -> Result<f64, DomainError> {
        match &self.r {
            Some(e) => e.eval_f64(&[x, t]),
            None => Ok(0.0),
        }
    }

    fn sample(&self, m: &Medium, t: f64) -> Result<Vec<f64>, DomainError> {
        (0..m.n).map(|i| self.r(m.x(i), t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub alpha: Vec<f64>,
    pub alpha_dot: Vec<f64>,
    /// `∫∫ ρξ dx dt` accumulated so far.
    pub entropy_ledger: f64,
}

impl SimState {
    pub fn zeros(n: usize) -> SimState {
        SimState {
            t: 0.0,
            alpha: vec![0.0; n],
            alpha_dot: vec![0.0; n],
            entropy_ledger: 0.0,
        }
    }

    pub fn from_fn(m: &Medium, alpha: impl Fn(f64) -> f64, alpha_dot: impl Fn(f64) -> f64) -> SimState {
        SimState {
            t: 0.0,
            alpha: (0..m.n).map(|i| alpha(m.x(i))).collect(),
            alpha_dot: (0..m.n).map(|i| alpha_dot(m.x(i))).collect(),
            entropy_ledger: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.entropy_ledger.is_finite()
            && self.alpha.iter().chain(&self.alpha_dot).all(|x| x.is_finite())
    }
}

/// Face gradient `(f[face] − f[face − 1])/dx` for interior faces.
fn grad(m: &Medium, f: &[f64], face: usize) -> f64 {
    (f[face] - f[face - 1]) / m.dx
}

/// `q` at interior face `face`.
fn face_flux(m: &Medium, alpha: &[f64], theta: &[f64], face: usize) -> f64 {
    -(m.k1_face[face] * grad(m, alpha, face) + m.k2_face[face] * grad(m, theta, face))
}

fn acceleration(m: &Medium, alpha: &[f64], theta: &[f64], r: &[f64]) -> Vec<f64> {
    let n = m.n;
    let mut q = vec![0.0; n + 1];
    for (f, qf) in q.iter_mut().enumerate().take(n).skip(1) {
        *qf = face_flux(m, alpha, theta, f);
    }
    (0..n)
        .map(|i| (-(q[i + 1] - q[i]) / m.dx + m.cells[i].rho * r[i]) / m.rho_c(i))
        .collect()
}

/// `ρη` in cell `i`; the gradient energy is shared between adjacent faces.
fn rho_eta(m: &Medium, alpha: &[f64], theta: &[f64], i: usize) -> f64 {
    let t0 = m.theta0;
    let d = theta[i] - t0;
    let face = |f: usize| {
        if f == 0 || f == m.n {
            0.0
        } else {
            m.k1_face[f] * grad(m, alpha, f).powi(2)
        }
    };
    m.rho_c(i) * (d / t0 - d * d / (2.0 * t0 * t0)) - 0.25 * (face(i) + face(i + 1)) / (t0 * t0)
}

/// Entropy influx `λ(θ̄) q` at every face (zero at the ends).
fn entropy_flux(m: &Medium, alpha: &[f64], theta: &[f64]) -> Vec<f64> {
    let mut h = vec![0.0; m.n + 1];
    for (f, hf) in h.iter_mut().enumerate().take(m.n).skip(1) {
        *hf = face_flux(m, alpha, theta, f) * m.coldness(0.5 * (theta[f - 1] + theta[f]));
    }
    h
}

/// Per-cell `ρξ` over one step from the discrete balance
/// `ρξ = ρ Δη/Δt + div h̄ − ρ s̄`, with time-averaged face influx and the
/// supply at the mid-step temperature.
fn production_field(m: &Medium, prev: &SimState, next: &SimState, r0: &[f64], r1: &[f64]) -> Vec<f64> {
    let dt = next.t - prev.t;
    let h0 = entropy_flux(m, &prev.alpha, &prev.alpha_dot);
    let h1 = entropy_flux(m, &next.alpha, &next.alpha_dot);
    (0..m.n)
        .map(|i| {
            let d_eta = rho_eta(m, &next.alpha, &next.alpha_dot, i) - rho_eta(m, &prev.alpha, &prev.alpha_dot, i);
            let div_h = 0.5 * ((h0[i + 1] - h0[i]) + (h1[i + 1] - h1[i])) / m.dx;
            let theta_mid = 0.5 * (prev.alpha_dot[i] + next.alpha_dot[i]);
            let supply = m.cells[i].rho * m.coldness(theta_mid) * 0.5 * (r0[i] + r1[i]);
            d_eta / dt + div_h - supply
        })
        .collect()
}

/// Advance by `dt`: velocity Verlet in `α`, trapezoidal (Heun) in the
/// `k2` damping term with a linearly extrapolated `α̇` predictor.
pub fn step(state: &SimState, medium: &Medium, source: &SourceSpec, dt: f64) -> Result<SimState, SimError> {
    step_with_production(state, medium, source, dt).map(|(s, _)| s)
}

/// As [`step`], also returning the per-cell `ξ` (per unit mass) of the step.
pub fn step_with_production(
    state: &SimState,
    m: &Medium,
    source: &SourceSpec,
    dt: f64,
) -> Result<(SimState, Vec<f64>), SimError> {
    m.check_dt(dt)?;
    if state.alpha.len() != m.n || state.alpha_dot.len() != m.n {
        return Err(SimError::Invalid("state does not match the grid".into()));
    }
    let r0 = source.sample(m, state.t)?;
    let r1 = source.sample(m, state.t + dt)?;
    let a0 = acceleration(m, &state.alpha, &state.alpha_dot, &r0);
    let half: Vec<f64> = state.alpha_dot.iter().zip(&a0).map(|(t, a)| t + 0.5 * dt * a).collect();
    let alpha: Vec<f64> = state.alpha.iter().zip(&half).map(|(a, t)| a + dt * t).collect();
    let predicted: Vec<f64> = half.iter().zip(&state.alpha_dot).map(|(h, t)| 2.0 * h - t).collect();
    let a1 = acceleration(m, &alpha, &predicted, &r1);
    let alpha_dot = half.iter().zip(&a1).map(|(h, a)| h + 0.5 * dt * a).collect();
    let mut next = SimState {
        t: state.t + dt,
        alpha,
        alpha_dot,
        entropy_ledger: state.entropy_ledger,
    };
    let rho_xi = production_field(m, state, &next, &r0, &r1);
    next.entropy_ledger += rho_xi.iter().sum::<f64>() * m.dx * dt;
    if !next.is_finite() {
        return Err(DomainError::NonFinite.into());
    }
    let xi = rho_xi.iter().zip(&m.cells).map(|(p, c)| p / c.rho).collect();
    Ok((next, xi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepProduction {
    pub t0: f64,
    pub t1: f64,
    /// Per unit mass, per cell.
    pub xi: Vec<f64>,
    /// `∫ ρξ dx · Δt`.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyProduction {
    pub steps: Vec<StepProduction>,
    pub cumulative: f64,
}

/// Discrete `ξ` between consecutive stored states.
pub fn entropy_production(
    history: &[SimState],
    medium: &Medium,
    source: &SourceSpec,
) -> Result<EntropyProduction, SimError> {
    if history.len() < 2 {
        return Err(SimError::InsufficientHistory);
    }
    let mut steps = Vec::with_capacity(history.len() - 1);
    let mut cumulative = 0.0;
    for w in history.windows(2) {
        let r0 = source.sample(medium, w[0].t)?;
        let r1 = source.sample(medium, w[1].t)?;
        let rho_xi = production_field(medium, &w[0], &w[1], &r0, &r1);
        let total = rho_xi.iter().sum::<f64>() * medium.dx * (w[1].t - w[0].t);
        cumulative += total;
        steps.push(StepProduction {
            t0: w[0].t,
            t1: w[1].t,
            xi: rho_xi.iter().zip(&medium.cells).map(|(p, c)| p / c.rho).collect(),
            total,
        });
    }
    Ok(EntropyProduction { steps, cumulative })
}

/// `∫ (ρc θ²/2 + k1 α'²/2) dx`.
pub fn energy(m: &Medium, s: &SimState) -> f64 {
    let thermal: f64 = (0..m.n).map(|i| 0.5 * m.rho_c(i) * s.alpha_dot[i].powi(2)).sum();
    let strain: f64 = (1..m.n).map(|f| 0.5 * m.k1_face[f] * grad(m, &s.alpha, f).powi(2)).sum();
    (thermal + strain) * m.dx
}

/// `dE/dt = −∫ k2 α̇'² dx + ∫ ρ r θ dx` for the semi-discrete system.
pub fn energy_rate(m: &Medium, s: &SimState, source: &SourceSpec) -> Result<f64, DomainError> {
    let r = source.sample(m, s.t)?;
    let dissipation: f64 = (1..m.n).map(|f| m.k2_face[f] * grad(m, &s.alpha_dot, f).powi(2)).sum();
    let supply: f64 = (0..m.n).map(|i| m.cells[i].rho * r[i] * s.alpha_dot[i]).sum();
    Ok((supply - dissipation) * m.dx)
}

/// `k2 α̇'²/θ0²` integrated over the grid.
fn closure_production_rate(m: &Medium, s: &SimState) -> f64 {
    let t0 = m.theta0;
    (1..m.n).map(|f| m.k2_face[f] * grad(m, &s.alpha_dot, f).powi(2)).sum::<f64>() * m.dx / (t0 * t0)
}

/// Jumps `A − B` across the material interface, normal pointing from the
/// first material into the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactJumps {
    pub t: f64,
    pub q_n: f64,
    pub h_n: f64,
    pub lambda: f64,
}

/// One-sided fluxes from the flux-continuous interface values, traces of `α̇`
/// from the adjacent cells, `λ = 1/α̇` on each side.
pub fn contact_jumps(m: &Medium, s: &SimState) -> Result<ContactJumps, SimError> {
    let f = m
        .interface
        .ok_or_else(|| SimError::Invalid("medium has no material interface".into()))?;
    let (l, r) = (f - 1, f);
    let (ma, mb) = (&m.cells[l], &m.cells[r]);
    let half = 0.5 * m.dx;
    let face_value = |ka: f64, kb: f64, fl: f64, fr: f64| {
        if ka + kb == 0.0 {
            0.5 * (fl + fr)
        } else {
            (ka * fl + kb * fr) / (ka + kb)
        }
    };
    let (a, th) = (&s.alpha, &s.alpha_dot);
    let af = face_value(ma.k1, mb.k1, a[l], a[r]);
    let tf = face_value(ma.k2, mb.k2, th[l], th[r]);
    let q_left = -(ma.k1 * (af - a[l]) + ma.k2 * (tf - th[l])) / half;
    let q_right = -(mb.k1 * (a[r] - af) + mb.k2 * (th[r] - tf)) / half;
    if th[l] <= 0.0 || th[r] <= 0.0 {
        return Err(DomainError::Degenerate {
            reason: format!("contact traces need positive alpha_dot, got {} and {}", th[l], th[r]),
        }
        .into());
    }
    let (lam_l, lam_r) = (1.0 / th[l], 1.0 / th[r]);
    Ok(ContactJumps {
        t: s.t,
        q_n: q_left - q_right,
        h_n: q_left * lam_l - q_right * lam_r,
        lambda: lam_l - lam_r,
    })
}

/// Position of the largest value at index `from` or beyond, refined by a
/// parabola through its neighbours.
pub fn peak_position(m: &Medium, f: &[f64], from: usize) -> Option<f64> {
    let mut best = None;
    for (i, &v) in f.iter().enumerate().skip(from) {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    let (i, _) = best?;
    if i == 0 || i + 1 >= f.len() {
        return Some(m.x(i));
    }
    let (a, b, c) = (f[i - 1], f[i], f[i + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom == 0.0 { 0.0 } else { 0.5 * (a - c) / denom };
    Some(m.x(i) + shift * m.dx)
}

/// Speed of the right-moving part of an `α` pulse, measured from peak
/// positions of `α − α(first cell)`.
pub fn wave_speed_estimate(m: &Medium, initial: &SimState, current: &SimState) -> Option<f64> {
    if current.t <= initial.t {
        return None;
    }
    let rel = |s: &SimState| s.alpha.iter().map(|a| a - s.alpha[0]).collect::<Vec<_>>();
    let x0 = peak_position(m, &rel(initial), 0)?;
    let start = ((x0 / m.dx).floor() as usize).saturating_add(2);
    let x1 = peak_position(m, &rel(current), start)?;
    Some((x1 - x0) / (current.t - initial.t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub alpha: String,
    pub alpha_dot: String,
}

/// Scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<Material>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<[Material; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface_cell: Option<usize>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub dt: f64,
    #[serde(rename = "T_end")]
    pub t_end: f64,
    pub initial: InitialData,
    /// `r(x, t)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Exact `α̇(x, t)` to compare against at the final time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Number of evenly spaced output times after the initial one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<usize>,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub name: String,
    pub medium: Medium,
    pub source: SourceSpec,
    pub initial: SimState,
    pub reference: Option<Expr>,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: usize,
}

fn parse_field(field: &str, src: &str, ctx: VarContext) -> Result<Expr, SimError> {
    Expr::parse(src, ctx).map_err(|source| SimError::Parse {
        field: field.into(),
        source,
    })
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, SimError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// Validate, build the grid and initial state, and check the stability
    /// limits, all before any stepping.
    pub fn prepare(&self) -> Result<Prepared, SimError> {
        let medium = match (&self.material, &self.materials, self.interface_cell) {
            (Some(m), None, None) => Medium::uniform(m, self.n, self.length)?,
            (None, Some([a, b]), Some(k)) => Medium::two_material(a, b, k, self.n, self.length)?,
            (None, Some(_), None) => return Err(SimError::Invalid("materials need interface_cell".into())),
            _ => {
                return Err(SimError::Invalid(
                    "give either material, or materials with interface_cell".into(),
                ))
            }
        };
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(SimError::Invalid(format!("T_end must be positive, got {}", self.t_end)));
        }
        medium.check_dt(self.dt)?;
        let alpha = parse_field("initial.alpha", &self.initial.alpha, VarContext::SPACE)?;
        let alpha_dot = parse_field("initial.alpha_dot", &self.initial.alpha_dot, VarContext::SPACE)?;
        let source = match &self.source {
            Some(s) => SourceSpec::parse(s)?,
            None => SourceSpec::none(),
        };
        let reference = self
            .reference
            .as_deref()
            .map(|s| parse_field("reference", s, VarContext::SPACE_TIME))
            .transpose()?;
        let eval = |e: &Expr| -> Result<Vec<f64>, DomainError> {
            (0..medium.n).map(|i| e.eval_f64(&[medium.x(i)])).collect()
        };
        let initial = SimState {
            t: 0.0,
            alpha: eval(&alpha)?,
            alpha_dot: eval(&alpha_dot)?,
            entropy_ledger: 0.0,
        };
        if medium.interface.is_some() {
            contact_jumps(&medium, &initial)?;
        }
        Ok(Prepared {
            name: self.name.clone(),
            medium,
            source,
            initial,
            reference,
            dt: self.dt,
            t_end: self.t_end,
            snapshots: self.snapshots.unwrap_or(10).max(1),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropySummary {
    /// `∫∫ ρξ dx dt` from the discrete balance.
    pub produced: f64,
    /// `∫∫ k2 α̇'²/θ0² dx dt` by the trapezoidal rule.
    pub closure_estimate: f64,
    pub min_step_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySummary {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_: f64,
    /// `∫ dE/dt` by the trapezoidal rule.
    pub rate_integral: f64,
    pub balance_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveSpeed {
    pub estimate: f64,
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactSummary {
    pub interface_cell: usize,
    pub max_abs_q_n: f64,
    pub max_abs_h_n: f64,
    pub max_abs_lambda: f64,
    pub series: Vec<ContactJumps>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub name: String,
    pub closure: &'static str,
    pub cells: usize,
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
    pub materials: Vec<Material>,
    pub entropy: EntropySummary,
    pub energy: EnergySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wave_speed: Option<WaveSpeed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_l2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contact: Option<ContactSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub summary: SimSummary,
    pub final_state: SimState,
    /// `t,x,alpha,alpha_dot,xi` rows at the output times; `xi` is that of the
    /// step ending there (zero at `t = 0`).
    pub csv: String,
}

impl SimSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario   {}", self.name);
        let _ = writeln!(s, "grid       {} cells, dx {}, dt {}, {} steps to t = {}", self.cells, self.dx, self.dt, self.steps, self.t_end);
        let _ = writeln!(
            s,
            "entropy    produced {:e} (closure estimate {:e}, min step {:e})",
            self.entropy.produced, self.entropy.closure_estimate, self.entropy.min_step_total
        );
        let _ = writeln!(s, "energy     {:e} -> {:e}, balance residual {:e}", self.energy.initial, self.energy.final_, self.energy.balance_residual);
        if let Some(w) = self.wave_speed {
            let _ = writeln!(s, "wave speed {} (expected {}, relative error {:e})", w.estimate, w.expected, w.relative_error);
        }
        if let Some(l2) = self.reference_l2 {
            let _ = writeln!(s, "reference  L2 error {l2:e}");
        }
        if let Some(c) = &self.contact {
            let _ = writeln!(
                s,
                "contact    max |[[q.n]]| {:e}, |[[h.n]]| {:e}, |[[lambda]]| {:e}",
                c.max_abs_q_n, c.max_abs_h_n, c.max_abs_lambda
            );
        }
        s
    }
}

fn csv_rows(out: &mut String, m: &Medium, s: &SimState, xi: Option<&[f64]>) {
    for i in 0..m.n {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.t,
            m.x(i),
            s.alpha[i],
            s.alpha_dot[i],
            xi.map_or(0.0, |x| x[i])
        );
    }
}

/// Run a prepared scenario to `t_end`. The last step is shortened if
/// `t_end` is not a multiple of `dt`.
pub fn run(p: &Prepared) -> Result<SimOutput, SimError> {
    let m = &p.medium;
    let steps = ((p.t_end / p.dt) - 1e-9).ceil().max(1.0) as usize;
    let output_every = steps.div_ceil(p.snapshots);
    let mut csv = String::from("t,x,alpha,alpha_dot,xi\n");
    csv_rows(&mut csv, m, &p.initial, None);

    let mut state = p.initial.clone();
    let e0 = energy(m, &state);
    let mut rate = energy_rate(m, &state, &p.source)?;
    let mut rate_integral = 0.0;
    let mut closure_rate = closure_production_rate(m, &state);
    let mut closure_estimate = 0.0;
    let mut min_step_total = f64::INFINITY;
    let mut contact = match m.interface {
        Some(k) => {
            let j = contact_jumps(m, &state)?;
            Some(ContactSummary {
                interface_cell: k,
                max_abs_q_n: j.q_n.abs(),
                max_abs_h_n: j.h_n.abs(),
                max_abs_lambda: j.lambda.abs(),
                series: vec![j],
            })
        }
        None => None,
    };

    for n in 1..=steps {
        let dt = if n == steps { p.t_end - (steps - 1) as f64 * p.dt } else { p.dt };
        let before = state.entropy_ledger;
        let (mut next, xi) = step_with_production(&state, m, &p.source, dt)?;
        next.t = if n == steps { p.t_end } else { n as f64 * p.dt };
        min_step_total = min_step_total.min(next.entropy_ledger - before);
        let next_rate = energy_rate(m, &next, &p.source)?;
        rate_integral += 0.5 * dt * (rate + next_rate);
        rate = next_rate;
        let next_closure = closure_production_rate(m, &next);
        closure_estimate += 0.5 * dt * (closure_rate + next_closure);
        closure_rate = next_closure;
        let output = n % output_every == 0 || n == steps;
        if let Some(c) = contact.as_mut() {
            let j = contact_jumps(m, &next)?;
            c.max_abs_q_n = c.max_abs_q_n.max(j.q_n.abs());
            c.max_abs_h_n = c.max_abs_h_n.max(j.h_n.abs());
            c.max_abs_lambda = c.max_abs_lambda.max(j.lambda.abs());
            if output {
                c.series.push(j);
            }
        }
        if output {
            csv_rows(&mut csv, m, &next, Some(&xi));
        }
        state = next;
    }

    let e1 = energy(m, &state);
    let wave_speed = match (m.interface, m.cells[0]) {
        (None, mat) if mat.k2 == 0.0 && mat.k1 > 0.0 => wave_speed_estimate(m, &p.initial, &state).map(|estimate| {
            let expected = mat.wave_speed();
            WaveSpeed {
                estimate,
                expected,
                relative_error: (estimate - expected).abs() / expected,
            }
        }),
        _ => None,
    };
    let reference_l2 = match &p.reference {
        Some(e) => {
            let mut sq = 0.0;
            for i in 0..m.n {
                sq += (state.alpha_dot[i] - e.eval_f64(&[m.x(i), state.t])?).powi(2);
            }
            Some((sq * m.dx).sqrt())
        }
        None => None,
    };
    let mut materials = vec![m.cells[0]];
    if let Some(k) = m.interface {
        materials.push(m.cells[k]);
    }
    Ok(SimOutput {
        summary: SimSummary {
            name: p.name.clone(),
            closure: CLOSURE,
            cells: m.n,
            dx: m.dx,
            dt: p.dt,
            steps,
            t_end: state.t,
            materials,
            entropy: EntropySummary {
                produced: state.entropy_ledger,
                closure_estimate,
                min_step_total,
            },
            energy: EnergySummary {
                initial: e0,
                final_: e1,
                rate_integral,
                balance_residual: e1 - e0 - rate_integral,
            },
            wave_speed,
            reference_l2,
            contact,
        },
        final_state: state,
        csv,
    })
}
