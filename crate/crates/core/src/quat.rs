//! Hamilton quaternion algebra, used pointwise by every field operation.
//!
//! Quaternions here are plain 4-component values (w, x, y, z) with w the
//! real part and (x, y, z) the coefficients of (i, j, k). They carry field
//! samples, not rotations, so there are no unit-norm or SLERP utilities.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// One element of the Hamilton algebra, component order (w, x, y, z).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Quaternion basis unit for component index 0..4 (1, i, j, k).
    pub fn basis(c: usize) -> Self {
        match c {
            0 => Self::ONE,
            1 => Self::I,
            2 => Self::J,
            3 => Self::K,
            _ => panic!("quaternion component index {c} out of range"),
        }
    }

    /// Component by index: 0 = w, 1 = x, 2 = y, 3 = z.
    pub fn component(self, c: usize) -> f64 {
        match c {
            0 => self.w,
            1 => self.x,
            2 => self.y,
            3 => self.z,
            _ => panic!("quaternion component index {c} out of range"),
        }
    }

    /// (w, −x, −y, −z).
    pub fn conjugate(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    /// w² + x² + y² + z². Multiplicative over the Hamilton product.
    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Euclidean magnitude, sqrt of [`Self::norm_sq`].
    pub fn magnitude(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, a: f64) -> Self {
        Quaternion::new(self.w * a, self.x * a, self.y * a, self.z * a)
    }
}

/// Hamilton product with i² = j² = k² = ijk = −1. Non-commutative.
impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;

    fn mul(self, a: f64) -> Quaternion {
        self.scale(a)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;

    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, r: Quaternion) {
        *self = *self + r;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;

    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, r: Quaternion) {
        *self = *self - r;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_quat(rng: &mut impl Rng) -> Quaternion {
        Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    }

    fn assert_close(a: Quaternion, b: Quaternion, tol: f64) {
        let d = (a - b).magnitude();
        let scale = a.magnitude().max(b.magnitude()).max(1.0);
        assert!(d <= tol * scale, "{a:?} != {b:?} (|diff| = {d:.3e})");
    }

    #[test]
    fn multiplication_table_is_exact() {
        let units = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
        // Rows/cols ordered 1, i, j, k; entries as (sign, unit index).
        let expected: [[(f64, usize); 4]; 4] = [
            [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
            [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
            [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
            [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
        ];
        for (a, row) in units.iter().zip(expected.iter()) {
            for (b, &(sign, idx)) in units.iter().zip(row.iter()) {
                let got = *a * *b;
                let want = units[idx].scale(sign);
                assert_eq!(got, want, "{a:?} * {b:?}");
            }
        }
    }

    #[test]
    fn one_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let q = random_quat(&mut rng);
            assert_eq!(Quaternion::ONE * q, q);
            assert_eq!(q * Quaternion::ONE, q);
        }
    }

    #[test]
    fn expanded_product_example() {
        // (1 + i)(1 + j) = 1 + j + i + ij = 1 + i + j + k, expanding
        // term-by-term via the multiplication table.
        let a = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let b = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(a * b, Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn conjugate_flips_imaginary_part() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(q.conjugate(), Quaternion::new(1.0, -2.0, -3.0, -4.0));
        let r = Quaternion::new(5.0, 0.0, 0.0, 0.0);
        assert_eq!(r.conjugate(), r);
    }

    #[test]
    fn conjugate_is_involutive_and_antihomomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            assert_eq!(a.conjugate().conjugate(), a);
            assert_close((a * b).conjugate(), b.conjugate() * a.conjugate(), 1e-14);
        }
    }

    #[test]
    fn q_times_conjugate_is_norm_sq() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q = random_quat(&mut rng);
            let p = q * q.conjugate();
            assert_close(p, Quaternion::new(q.norm_sq(), 0.0, 0.0, 0.0), 1e-14);
        }
    }

    #[test]
    fn norm_sq_values() {
        assert_eq!(Quaternion::ZERO.norm_sq(), 0.0);
        assert_eq!(Quaternion::new(1.0, 1.0, 1.0, 1.0).norm_sq(), 4.0);
    }

    #[test]
    fn norm_sq_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            let lhs = (a * b).norm_sq();
            let rhs = a.norm_sq() * b.norm_sq();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300),
                "norm_sq not multiplicative: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn associativity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            let c = random_quat(&mut rng);
            assert_close((a * b) * c, a * (b * c), 1e-12);
        }
    }

    #[test]
    fn distributivity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let a = random_quat(&mut rng);
            let b = random_quat(&mut rng);
            let c = random_quat(&mut rng);
            assert_close(a * (b + c), a * b + a * c, 1e-12);
            assert_close((a + b) * c, a * c + b * c, 1e-12);
        }
    }
}
