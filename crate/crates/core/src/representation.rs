//! Representation of isotropic and transversely isotropic vector functions
//! of two vector arguments, and the dyadic-basis lemmas used to split the
//! tensor restrictions into scalar conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::convert::Infallible;

use crate::error::RepresentationError;
use crate::tensor::{outer, rotation_about_axis, sample_rotation_haar, Rotation, Ten2, Vec3};
use crate::tolerance::TOL;

/// Symmetry group used to probe a vector function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Group {
    /// All proper rotations.
    Full,
    /// Rotations about a fixed axis.
    About(Vec3),
}

impl Group {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Rotation {
        match self {
            Group::Full => sample_rotation_haar(rng),
            Group::About(e) => {
                let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                rotation_about_axis(e, angle).expect("axis normalized on entry")
            }
        }
    }
}

/// `max ‖Q f(u,v) − f(Qu,Qv)‖` over `samples` Gaussian pairs `(u,v)` and
/// random `Q` from `group`.
///
/// # Panics
/// If `samples == 0` or the axis of `Group::About` is zero.
pub fn isotropy_defect<F>(f: F, group: Group, samples: usize, seed: u64) -> f64
where
    F: Fn(&Vec3, &Vec3) -> Vec3,
{
    let r: Result<f64, Infallible> = try_isotropy_defect(|u, v| Ok(f(u, v)), group, samples, seed);
    match r {
        Ok(d) => d,
        Err(never) => match never {},
    }
}

/// Fallible variant of [`isotropy_defect`]; the first error aborts.
pub fn try_isotropy_defect<F, E>(f: F, group: Group, samples: usize, seed: u64) -> Result<f64, E>
where
    F: Fn(&Vec3, &Vec3) -> Result<Vec3, E>,
{
    assert!(samples >= 1, "isotropy_defect needs at least one sample");
    let group = match group {
        Group::About(e) => Group::About(e.normalized().expect("rotation axis must be nonzero")),
        g => g,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = Vec3::gaussian(&mut rng);
        let v = Vec3::gaussian(&mut rng);
        let q = group.sample(&mut rng);
        let d = (q.apply(&f(&u, &v)?) - f(&q.apply(&u), &q.apply(&v))?).norm();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Rotation by π about an axis perpendicular to `e`; it maps `e` to `−e`.
pub fn half_turn_witness(e: &Vec3) -> Rotation {
    let axis = e.any_orthogonal().normalized().expect("orthogonal vector is nonzero");
    rotation_about_axis(&axis, std::f64::consts::PI).expect("unit axis")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoCoefficients {
    pub phi: [f64; 2],
    /// `‖f − φ1 u − φ2 v‖`
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransIsoCoefficients {
    pub phi: [f64; 3],
    /// `‖f − φ1 u − φ2 v − φ3 e‖`
    pub residual: f64,
}

fn residual_check(f: &Vec3, residual: f64) -> Result<(), RepresentationError> {
    let threshold = 1e-6 * (1.0 + f.norm());
    if residual > threshold {
        Err(RepresentationError::ResidualTooLarge { residual, threshold })
    } else {
        Ok(())
    }
}

/// Coefficients of `f = φ1 u + φ2 v` from the 2×2 Gram system.
pub fn extract_iso_coeffs(f: &Vec3, u: &Vec3, v: &Vec3) -> Result<IsoCoefficients, RepresentationError> {
    let (uu, vv, uv) = (u.dot(u), v.dot(v), u.dot(v));
    let gram = uu * vv - uv * uv;
    if !(gram >= 1e-8 * uu * vv) || uu == 0.0 || vv == 0.0 {
        return Err(RepresentationError::DegenerateConfiguration { gram });
    }
    let (fu, fv) = (f.dot(u), f.dot(v));
    let phi = [(fu * vv - fv * uv) / gram, (fv * uu - fu * uv) / gram];
    let residual = (*f - u.scale(phi[0]) - v.scale(phi[1])).norm();
    residual_check(f, residual)?;
    Ok(IsoCoefficients { phi, residual })
}

/// Coefficients of `f = φ1 u + φ2 v + φ3 e` from the 3×3 Gram system.
pub fn extract_transiso_coeffs(
    f: &Vec3,
    u: &Vec3,
    v: &Vec3,
    e: &Vec3,
) -> Result<TransIsoCoefficients, RepresentationError> {
    let basis = [*u, *v, *e];
    let g = Ten2::from_fn(|i, j| basis[i].dot(&basis[j]));
    let scale = g.0[0][0] * g.0[1][1] * g.0[2][2];
    let gram = g.det();
    if !(gram >= 1e-8 * scale) || scale == 0.0 {
        return Err(RepresentationError::DegenerateConfiguration { gram });
    }
    let rhs = Vec3(basis.map(|b| f.dot(&b)));
    // Cramer's rule on the symmetric Gram matrix
    let phi: [f64; 3] = std::array::from_fn(|k| {
        let mut m = g;
        for i in 0..3 {
            m.0[i][k] = rhs[i];
        }
        m.det() / gram
    });
    let residual = (*f - u.scale(phi[0]) - v.scale(phi[1]) - e.scale(phi[2])).norm();
    residual_check(f, residual)?;
    Ok(TransIsoCoefficients { phi, residual })
}

/// Orthonormal frame on which the dyadic-basis lemmas are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Frame {
    Iso { u: Vec3, v: Vec3 },
    /// Requires `u × v = e`.
    TransIso { u: Vec3, v: Vec3, e: Vec3 },
}

/// A frame built from arbitrary vectors, with `transform[i][j]` the
/// component of original vector `j` along frame vector `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Orthonormalized {
    pub frame: Frame,
    pub transform: Ten2,
}

impl Frame {
    fn vectors(&self) -> Vec<Vec3> {
        match *self {
            Frame::Iso { u, v } => vec![u, v],
            Frame::TransIso { u, v, e } => vec![u, v, e],
        }
    }

    /// Largest deviation from orthonormality (and from `u × v = e`).
    pub fn defect(&self) -> f64 {
        let vs = self.vectors();
        let mut d = 0.0f64;
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                d = d.max((a.dot(b) - target).abs());
            }
        }
        if let Frame::TransIso { u, v, e } = self {
            d = d.max((u.cross(v) - *e).norm_inf());
        }
        d
    }

    pub fn validate(&self) -> Result<(), RepresentationError> {
        let defect = self.defect();
        if defect.is_finite() && defect <= TOL.algebraic {
            Ok(())
        } else {
            Err(RepresentationError::NonOrthonormalFrame { defect })
        }
    }

    /// Gram–Schmidt on `(u, v)`.
    pub fn orthonormalize_iso(u: &Vec3, v: &Vec3) -> Result<Orthonormalized, RepresentationError> {
        let degenerate = || RepresentationError::DegenerateConfiguration {
            gram: u.dot(u) * v.dot(v) - u.dot(v).powi(2),
        };
        let fu = u.normalized().ok_or_else(degenerate)?;
        let fv = v.reject_from(&fu).normalized().ok_or_else(degenerate)?;
        let frame = Frame::Iso { u: fu, v: fv };
        let fw = fu.cross(&fv);
        let transform = Ten2::from_fn(|i, j| {
            let b = [fu, fv, fw][i];
            [*u, *v, Vec3::ZERO][j].dot(&b)
        });
        Ok(Orthonormalized { frame, transform })
    }

    /// Orthonormal `(u', v', e')` with `e' ∥ e`, `u'` in the plane of `u`
    /// and `e`, and `v' = e' × u'` so that `u' × v' = e'`.
    pub fn orthonormalize_transiso(u: &Vec3, v: &Vec3, e: &Vec3) -> Result<Orthonormalized, RepresentationError> {
        let degenerate = || RepresentationError::DegenerateConfiguration { gram: 0.0 };
        let fe = e.normalized().ok_or_else(degenerate)?;
        let fu = u.reject_from(&fe).normalized().ok_or_else(degenerate)?;
        let fv = fe.cross(&fu);
        let frame = Frame::TransIso { u: fu, v: fv, e: fe };
        let transform = Ten2::from_fn(|i, j| [*u, *v, *e][j].dot(&[fu, fv, fe][i]));
        Ok(Orthonormalized { frame, transform })
    }
}

/// Scalars of `αI + βu⊗u + γv⊗v + δ(u⊗v + v⊗u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1 {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Scalars of the seven-term form that adds
/// `φe⊗e + χ(u⊗e + e⊗u) + ψ(v⊗e + e⊗v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2 {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub phi: f64,
    pub chi: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum LemmaCoefficients {
    Iso(Lemma1),
    TransIso(Lemma2),
}

impl LemmaCoefficients {
    pub fn to_vec(&self) -> Vec<f64> {
        match *self {
            LemmaCoefficients::Iso(c) => vec![c.alpha, c.beta, c.gamma, c.delta],
            LemmaCoefficients::TransIso(c) => vec![c.alpha, c.beta, c.gamma, c.delta, c.phi, c.chi, c.psi],
        }
    }

    pub fn from_slice(c: &[f64]) -> Option<LemmaCoefficients> {
        match *c {
            [alpha, beta, gamma, delta] => Some(LemmaCoefficients::Iso(Lemma1 {
                alpha,
                beta,
                gamma,
                delta,
            })),
            [alpha, beta, gamma, delta, phi, chi, psi] => Some(LemmaCoefficients::TransIso(Lemma2 {
                alpha,
                beta,
                gamma,
                delta,
                phi,
                chi,
                psi,
            })),
            _ => None,
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.to_vec().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Max-norm distance to `other`; infinite if the kinds differ.
    pub fn distance(&self, other: &LemmaCoefficients) -> f64 {
        let (a, b) = (self.to_vec(), other.to_vec());
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }
}

fn two_sym(a: &Vec3, b: &Vec3) -> Ten2 {
    outer(a, b) + outer(b, a)
}

impl Lemma1 {
    pub fn tensor(&self, u: &Vec3, v: &Vec3) -> Ten2 {
        Ten2::IDENTITY.scale(self.alpha)
            + outer(u, u).scale(self.beta)
            + outer(v, v).scale(self.gamma)
            + two_sym(u, v).scale(self.delta)
    }
}

impl Lemma2 {
    pub fn tensor(&self, u: &Vec3, v: &Vec3, e: &Vec3) -> Ten2 {
        Lemma1 {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            delta: self.delta,
        }
        .tensor(u, v)
            + outer(e, e).scale(self.phi)
            + two_sym(u, e).scale(self.chi)
            + two_sym(v, e).scale(self.psi)
    }
}

/// Coefficients of a single tensor on an orthonormal `(u, v)`: apply it to
/// `u` and `v`, then take the trace.
pub fn extract_lemma1(t: &Ten2, u: &Vec3, v: &Vec3) -> Result<Lemma1, RepresentationError> {
    Frame::Iso { u: *u, v: *v }.validate()?;
    let (tu, tv) = (t.apply(u), t.apply(v));
    let a_plus_b = u.dot(&tu);
    let a_plus_g = v.dot(&tv);
    let delta = v.dot(&tu);
    let alpha = t.trace() - a_plus_b - a_plus_g;
    Ok(Lemma1 {
        alpha,
        beta: a_plus_b - alpha,
        gamma: a_plus_g - alpha,
        delta,
    })
}

/// Coefficients of the seven-term family `T(u, v)` on an orthonormal frame
/// with `u × v = e`.
///
/// Applying `T(u, v)` to the three frame vectors fixes `α+β`, `α+γ`, `α+φ`
/// and the three mixed coefficients, but its trace repeats that information.
/// The second evaluation `T(u, u)` applied to `u` supplies `α+β+γ+2δ`.
pub fn extract_lemma2<F>(family: F, u: &Vec3, v: &Vec3, e: &Vec3) -> Result<Lemma2, RepresentationError>
where
    F: Fn(&Vec3, &Vec3) -> Ten2,
{
    Frame::TransIso { u: *u, v: *v, e: *e }.validate()?;
    let t = family(u, v);
    let (tu, tv, te) = (t.apply(u), t.apply(v), t.apply(e));
    let a_plus_b = u.dot(&tu);
    let a_plus_g = v.dot(&tv);
    let a_plus_p = e.dot(&te);
    let delta = v.dot(&tu);
    let chi = e.dot(&tu);
    let psi = e.dot(&tv);
    let abg = u.dot(&family(u, u).apply(u)) - 2.0 * delta;
    let alpha = a_plus_b + a_plus_g - abg;
    Ok(Lemma2 {
        alpha,
        beta: a_plus_b - alpha,
        gamma: a_plus_g - alpha,
        delta,
        phi: a_plus_p - alpha,
        chi,
        psi,
    })
}

/// Dispatch on the frame kind. For an isotropic frame only `T(u, v)` is used.
pub fn lemma_extract<F>(family: F, frame: &Frame) -> Result<LemmaCoefficients, RepresentationError>
where
    F: Fn(&Vec3, &Vec3) -> Ten2,
{
    match frame {
        Frame::Iso { u, v } => extract_lemma1(&family(u, v), u, v).map(LemmaCoefficients::Iso),
        Frame::TransIso { u, v, e } => extract_lemma2(family, u, v, e).map(LemmaCoefficients::TransIso),
    }
}

/// Tensor family built from `coeffs` on the axis of `frame` (if any).
pub fn lemma_family(coeffs: LemmaCoefficients, frame: &Frame) -> impl Fn(&Vec3, &Vec3) -> Ten2 {
    let axis = match frame {
        Frame::TransIso { e, .. } => Some(*e),
        Frame::Iso { .. } => None,
    };
    move |u: &Vec3, v: &Vec3| match (coeffs, axis) {
        (LemmaCoefficients::Iso(c), _) => c.tensor(u, v),
        (LemmaCoefficients::TransIso(c), Some(e)) => c.tensor(u, v, &e),
        (LemmaCoefficients::TransIso(c), None) => c.tensor(u, v, &Vec3::ZERO),
    }
}

/// Random orthonormal frame, right-handed for the transverse kind.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, transverse: bool) -> Frame {
    let q = sample_rotation_haar(rng);
    let (u, v, e) = (q.apply(&Vec3::E1), q.apply(&Vec3::E2), q.apply(&Vec3::E3));
    if transverse {
        Frame::TransIso { u, v, e }
    } else {
        Frame::Iso { u, v }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn isotropic_forms_have_no_defect() {
        let d = isotropy_defect(|u, v| u.scale(u.dot(v)), Group::Full, 1000, 1);
        assert!(d <= 1e-12, "{d}");
        let d = isotropy_defect(|u, v| u.scale(v.norm()) - v.scale(u.dot(v).sin()), Group::Full, 1000, 2);
        assert!(d <= 1e-12, "{d}");
    }

    #[test]
    fn fixed_vector_is_only_transversely_isotropic() {
        let e = Vec3::new(0.0, 0.6, 0.8);
        let full = isotropy_defect(|_, _| e, Group::Full, 1000, 0);
        assert!(full > 1.9, "{full}");
        let w = half_turn_witness(&e);
        assert!(((w.apply(&e) - e).norm() - 2.0).abs() <= 1e-12);
        let axial = isotropy_defect(|_, _| e, Group::About(e), 1000, 0);
        assert!(axial <= 1e-12, "{axial}");
    }

    #[test]
    fn iso_extraction_examples() {
        let (u, v) = (Vec3::E1, Vec3::new(1.0, 1.0, 0.0));
        let c = extract_iso_coeffs(&u.scale(u.dot(&v)), &u, &v).unwrap();
        assert!((c.phi[0] - 1.0).abs() <= 1e-14 && c.phi[1].abs() <= 1e-14);
        assert!(c.residual <= 1e-14);
        let c = extract_iso_coeffs(&(Vec3::E1 + Vec3::E2.scale(2.0)), &Vec3::E1, &Vec3::E2).unwrap();
        assert_eq!(c.phi, [1.0, 2.0]);
        assert!(matches!(
            extract_iso_coeffs(&Vec3::E1, &Vec3::E1, &Vec3::E1.scale(3.0)),
            Err(RepresentationError::DegenerateConfiguration { .. })
        ));
        assert!(matches!(
            extract_iso_coeffs(&Vec3::E3, &Vec3::E1, &Vec3::E2),
            Err(RepresentationError::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn transiso_extraction_examples() {
        let f = Vec3::E1 - Vec3::E2 + Vec3::E3.scale(0.5);
        let c = extract_transiso_coeffs(&f, &Vec3::E1, &Vec3::E2, &Vec3::E3).unwrap();
        for (got, want) in c.phi.iter().zip([1.0, -1.0, 0.5]) {
            assert!((got - want).abs() <= 1e-15);
        }
        let coplanar = extract_transiso_coeffs(&f, &Vec3::E1, &Vec3::E2, &Vec3::new(1.0, 1.0, 0.0));
        assert!(matches!(coplanar, Err(RepresentationError::DegenerateConfiguration { .. })));
    }

    #[test]
    fn lemma_examples() {
        let frame = Frame::Iso { u: Vec3::E1, v: Vec3::E2 };
        let c = LemmaCoefficients::from_slice(&[2.0, -1.0, 3.0, 0.5]).unwrap();
        let got = lemma_extract(lemma_family(c, &frame), &frame).unwrap();
        assert!(got.distance(&c) <= 1e-12);
        let zero = lemma_extract(|_, _| Ten2::ZERO, &frame).unwrap();
        assert_eq!(zero.norm_inf(), 0.0);

        let frame = Frame::TransIso { u: Vec3::E1, v: Vec3::E2, e: Vec3::E3 };
        let c = LemmaCoefficients::from_slice(&[1.0, 1.0, 1.0, 0.0, -2.0, 0.0, 0.0]).unwrap();
        let got = lemma_extract(lemma_family(c, &frame), &frame).unwrap();
        assert!(got.distance(&c) <= 1e-12);
        let zero = lemma_extract(|_, _| Ten2::ZERO, &frame).unwrap();
        assert_eq!(zero.to_vec(), vec![0.0; 7]);
    }

    #[test]
    fn single_tensor_cannot_separate_alpha_in_the_seven_term_form() {
        // these two tuples give the same T(e1, e2) but different T(e1, e1)
        let frame = Frame::TransIso { u: Vec3::E1, v: Vec3::E2, e: Vec3::E3 };
        let a = LemmaCoefficients::from_slice(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let b = LemmaCoefficients::from_slice(&[0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let (fa, fb) = (lemma_family(a, &frame), lemma_family(b, &frame));
        assert_eq!(fa(&Vec3::E1, &Vec3::E2), fb(&Vec3::E1, &Vec3::E2));
        let ga = lemma_extract(fa, &frame).unwrap();
        let gb = lemma_extract(fb, &frame).unwrap();
        assert!(ga.distance(&a) <= 1e-15 && gb.distance(&b) <= 1e-15);
    }

    #[test]
    fn frames() {
        let bad = Frame::Iso { u: Vec3::E1, v: Vec3::new(0.1, 1.0, 0.0) };
        assert!(matches!(bad.validate(), Err(RepresentationError::NonOrthonormalFrame { .. })));
        let left = Frame::TransIso { u: Vec3::E2, v: Vec3::E1, e: Vec3::E3 };
        assert!(left.validate().is_err());
        assert!(extract_lemma1(&Ten2::ZERO, &Vec3::E1, &Vec3::E1).is_err());

        let (u, v) = (Vec3::new(2.0, 0.0, 0.0), Vec3::new(1.0, 3.0, 0.0));
        let o = Frame::orthonormalize_iso(&u, &v).unwrap();
        assert!(o.frame.validate().is_ok());
        assert_eq!(o.transform.0[0][0], 2.0);
        assert_eq!(o.transform.0[1][1], 3.0);
        assert_eq!(o.transform.0[1][0], 0.0);

        let o = Frame::orthonormalize_transiso(&u, &v, &Vec3::new(0.0, 0.0, 5.0)).unwrap();
        assert!(o.frame.validate().is_ok());
        assert!(Frame::orthonormalize_transiso(&Vec3::E3, &v, &Vec3::E3).is_err());
    }

    fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, n)
    }

    proptest! {
        #[test]
        fn round_trip_lemma1(c in coeffs(4), seed in any::<u64>()) {
            let frame = random_frame(&mut ChaCha8Rng::seed_from_u64(seed), false);
            let c = LemmaCoefficients::from_slice(&c).unwrap();
            let got = lemma_extract(lemma_family(c, &frame), &frame).unwrap();
            prop_assert!(got.distance(&c) <= 1e-12);
        }

        #[test]
        fn round_trip_lemma2(c in coeffs(7), seed in any::<u64>()) {
            let frame = random_frame(&mut ChaCha8Rng::seed_from_u64(seed), true);
            let c = LemmaCoefficients::from_slice(&c).unwrap();
            let got = lemma_extract(lemma_family(c, &frame), &frame).unwrap();
            prop_assert!(got.distance(&c) <= 1e-12);
            if c.norm_inf() > 1e-3 {
                prop_assert!(got.norm_inf() >= 0.99 * c.norm_inf());
            }
        }

        #[test]
        fn iso_extraction_reconstructs(p in coeffs(2), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (u, v) = (Vec3::gaussian(&mut rng), Vec3::gaussian(&mut rng));
            let f = u.scale(p[0]) + v.scale(p[1]);
            if let Ok(c) = extract_iso_coeffs(&f, &u, &v) {
                prop_assert!(c.residual <= 1e-9 * (1.0 + f.norm()));
            }
        }
    }
}
