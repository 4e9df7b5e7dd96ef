//! Fixed-size 3D vector and second-order tensor algebra.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::TensorError;
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);
    pub const E1: Vec3 = Vec3([1.0, 0.0, 0.0]);
    pub const E2: Vec3 = Vec3([0.0, 1.0, 0.0]);
    pub const E3: Vec3 = Vec3([0.0, 0.0, 1.0]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn basis(i: usize) -> Self {
        let mut c = [0.0; 3];
        c[i] = 1.0;
        Vec3(c)
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3(self.0.map(|x| x * s))
    }

    pub fn normalized(&self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Component of `self` orthogonal to unit vector `e`.
    pub fn reject_from(&self, e: &Vec3) -> Vec3 {
        *self - e.scale(self.dot(e))
    }

    /// Some unit vector orthogonal to `self` (which must be non-zero).
    pub fn any_orthogonal(&self) -> Vec3 {
        let [x, y, z] = self.0.map(f64::abs);
        let helper = if x <= y && x <= z {
            Vec3::E1
        } else if y <= z {
            Vec3::E2
        } else {
            Vec3::E3
        };
        self.cross(&helper)
            .normalized()
            .expect("non-zero vector has an orthogonal complement")
    }

    /// Draw a vector with independent standard normal components.
    pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
        Vec3([
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ])
    }

    /// Uniformly distributed point on the unit sphere.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
        loop {
            if let Some(v) = Vec3::gaussian(rng).normalized() {
                return v;
            }
        }
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3(self.0.map(|x| -x))
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v.scale(self)
    }
}

/// Second-order tensor stored row-major, `m[i][j]` = T_ij.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Ten2(pub [[f64; 3]; 3]);

impl Ten2 {
    pub const ZERO: Ten2 = Ten2([[0.0; 3]; 3]);
    pub const IDENTITY: Ten2 = Ten2([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Ten2 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = f(i, j);
            }
        }
        Ten2(m)
    }

    /// Tensor whose j-th column is `cols[j]`.
    pub fn from_columns(cols: [Vec3; 3]) -> Ten2 {
        Ten2::from_fn(|i, j| cols[j][i])
    }

    pub fn transpose(&self) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| {
            self.0[i][0] * v[0] + self.0[i][1] * v[1] + self.0[i][2] * v[2]
        }))
    }

    pub fn matmul(&self, o: &Ten2) -> Ten2 {
        Ten2::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum())
    }

    pub fn scale(&self, s: f64) -> Ten2 {
        Ten2(self.0.map(|row| row.map(|x| x * s)))
    }

    /// Frobenius inner product.
    pub fn inner(&self, o: &Ten2) -> f64 {
        (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| self.0[i][j] * o.0[i][j])
            .sum()
    }

    /// Largest absolute entry.
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.0[i][j] == self.0[j][i]))
    }
}

impl Add for Ten2 {
    type Output = Ten2;
    fn add(self, o: Ten2) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[i][j] + o.0[i][j])
    }
}

impl AddAssign for Ten2 {
    fn add_assign(&mut self, o: Ten2) {
        *self = *self + o;
    }
}

impl Sub for Ten2 {
    type Output = Ten2;
    fn sub(self, o: Ten2) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[i][j] - o.0[i][j])
    }
}

/// `(T + Tᵀ)/2`.
pub fn sym_part(t: &Ten2) -> Ten2 {
    Ten2::from_fn(|i, j| 0.5 * (t.0[i][j] + t.0[j][i]))
}

/// Dyad `a ⊗ b` with entries `a_i b_j`.
pub fn outer(a: &Vec3, b: &Vec3) -> Ten2 {
    Ten2::from_fn(|i, j| a[i] * b[j])
}

/// Symmetric dyad `(a ⊗ b + b ⊗ a)/2`.
pub fn sym_outer(a: &Vec3, b: &Vec3) -> Ten2 {
    Ten2::from_fn(|i, j| 0.5 * (a[i] * b[j] + b[i] * a[j]))
}

/// Proper orthogonal tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Ten2);

impl Rotation {
    pub fn identity() -> Rotation {
        Rotation(Ten2::IDENTITY)
    }

    /// Wrap a matrix, checking orthogonality and unit determinant at the
    /// algebraic tolerance.
    pub fn from_matrix(m: Ten2) -> Result<Rotation, TensorError> {
        let defect = orthogonality_defect(&m);
        let det = m.det();
        if !m.is_finite() || defect > TOL.algebraic || (det - 1.0).abs() > TOL.algebraic {
            return Err(TensorError::NotARotation { defect, det });
        }
        Ok(Rotation(m))
    }

    /// Rotation corresponding to the quaternion `(w, x, y, z)`, normalized first.
    pub fn from_quaternion(q: [f64; 4]) -> Option<Rotation> {
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return None;
        }
        let [w, x, y, z] = q.map(|c| c / n);
        Some(Rotation(Ten2([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ])))
    }

    pub fn matrix(&self) -> &Ten2 {
        &self.0
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0.apply(v)
    }

    pub fn compose(&self, o: &Rotation) -> Rotation {
        Rotation(self.0.matmul(&o.0))
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }
}

/// `‖RᵀR − I‖∞`.
pub fn orthogonality_defect(m: &Ten2) -> f64 {
    (m.transpose().matmul(m) - Ten2::IDENTITY).norm_inf()
}

/// Haar-distributed rotation from a normalized quaternion of four standard
/// normals.
pub fn sample_rotation_haar<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if let Some(r) = Rotation::from_quaternion(q) {
            return r;
        }
    }
}

/// Rodrigues rotation by `angle` about the unit axis `e`.
pub fn rotation_about_axis(e: &Vec3, angle: f64) -> Result<Rotation, TensorError> {
    let n = e.norm();
    if !e.is_finite() || (n - 1.0).abs() > TOL.algebraic {
        return Err(TensorError::NonUnitAxis { norm: n });
    }
    let (s, c) = angle.sin_cos();
    let k = Ten2([[0.0, -e[2], e[1]], [e[2], 0.0, -e[0]], [-e[1], e[0], 0.0]]);
    let m = Ten2::IDENTITY.scale(c) + k.scale(s) + outer(e, e).scale(1.0 - c);
    Ok(Rotation(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn skew(w: Vec3) -> Ten2 {
        Ten2([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    }

    #[test]
    fn sym_part_examples() {
        assert_eq!(sym_part(&Ten2::IDENTITY), Ten2::IDENTITY);
        let mut t = Ten2::ZERO;
        t.0[0][1] = 1.0;
        let s = sym_part(&t);
        assert_eq!(s.0[0][1], 0.5);
        assert_eq!(s.0[1][0], 0.5);
        assert_eq!(s.0[0][0], 0.0);
        assert_eq!(sym_part(&skew(Vec3::new(0.3, -1.2, 2.0))), Ten2::ZERO);
    }

    #[test]
    fn outer_examples() {
        let d = outer(&Vec3::E1, &Vec3::E2);
        assert_eq!(d, Ten2::from_fn(|i, j| if (i, j) == (0, 1) { 1.0 } else { 0.0 }));
        let a = Vec3::new(1.0, 1.0, 0.0);
        let aa = outer(&a, &a);
        assert!(aa.is_symmetric());
        assert_eq!(aa.trace(), 2.0);
        assert!(aa.det().abs() < 1e-15);
        assert_eq!(outer(&Vec3::ZERO, &Vec3::new(4.0, 5.0, 6.0)), Ten2::ZERO);
    }

    #[test]
    fn haar_draws_are_valid_distinct_and_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = sample_rotation_haar(&mut rng);
        let b = sample_rotation_haar(&mut rng);
        assert_ne!(a, b);
        for r in [a, b] {
            Rotation::from_matrix(*r.matrix()).unwrap();
        }
        let mut again = ChaCha8Rng::seed_from_u64(42);
        assert_eq!(sample_rotation_haar(&mut again), a);
    }

    #[test]
    fn haar_samples_satisfy_rotation_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let r = sample_rotation_haar(&mut rng);
            assert!(orthogonality_defect(r.matrix()) <= 1e-12);
            assert!((r.matrix().det() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn haar_mean_of_rotated_basis_vector_vanishes() {
        // Monte-Carlo: E[R e1] = 0 under Haar measure; standard error ~ 1/sqrt(3n).
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut acc = Vec3::ZERO;
        for _ in 0..n {
            acc += sample_rotation_haar(&mut rng).apply(&Vec3::E1);
        }
        assert!(acc.scale(1.0 / n as f64).norm() <= 0.02);
    }

    #[test]
    fn axis_rotation_examples() {
        let quarter = rotation_about_axis(&Vec3::E3, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((quarter.apply(&Vec3::E1) - Vec3::E2).norm_inf() <= 1e-12);
        let e = Vec3::new(1.0, 2.0, -2.0).scale(1.0 / 3.0);
        let id = rotation_about_axis(&e, 0.0).unwrap();
        assert!((*id.matrix() - Ten2::IDENTITY).norm_inf() <= 1e-15);
        let half = rotation_about_axis(&Vec3::E3, std::f64::consts::PI).unwrap();
        assert!((half.apply(&Vec3::E1) + Vec3::E1).norm_inf() <= 1e-12);
    }

    #[test]
    fn axis_rotation_rejects_non_unit_axis() {
        let err = rotation_about_axis(&Vec3::new(0.0, 0.0, 2.0), 1.0).unwrap_err();
        assert!(matches!(err, TensorError::NonUnitAxis { .. }));
        assert!(rotation_about_axis(&Vec3::new(0.0, 0.0, 1.0 + 1e-9), 1.0).is_err());
    }

    #[test]
    fn axis_rotation_fixes_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let e = Vec3::random_unit(&mut rng);
            let angle = rng.random_range(-10.0..10.0);
            let r = rotation_about_axis(&e, angle).unwrap();
            assert!((r.apply(&e) - e).norm_inf() <= 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ten2() -> impl Strategy<Value = Ten2> {
            proptest::array::uniform3(proptest::array::uniform3(-1e3f64..1e3)).prop_map(Ten2)
        }

        fn vec3() -> impl Strategy<Value = Vec3> {
            proptest::array::uniform3(-10.0f64..10.0).prop_map(Vec3)
        }

        proptest! {
            #[test]
            fn sym_part_is_idempotent(t in ten2()) {
                let s = sym_part(&t);
                prop_assert!((sym_part(&s) - s).norm_inf() <= 1e-15);
            }

            #[test]
            fn sym_part_is_frobenius_orthogonal_to_skew(t in ten2(), w in vec3()) {
                prop_assert!(sym_part(&t).inner(&skew(w)).abs() <= 1e-12 * (1.0 + t.norm_inf() * w.norm_inf()));
            }

            #[test]
            fn axis_rotations_compose_additively(
                axis in vec3().prop_filter("non-zero", |v| v.norm() > 1e-3),
                a in -6.0f64..6.0,
                b in -6.0f64..6.0,
            ) {
                let e = axis.normalized().unwrap();
                let ra = rotation_about_axis(&e, a).unwrap();
                let rb = rotation_about_axis(&e, b).unwrap();
                let rab = rotation_about_axis(&e, a + b).unwrap();
                prop_assert!((*ra.compose(&rb).matrix() - *rab.matrix()).norm_inf() <= 1e-12);
            }
        }
    }
}
