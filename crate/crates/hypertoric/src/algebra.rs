//! Quaternion algebra and the ν-map underlying the torus moment map.
//!
//! Conventions: `i·j = k`, conjugation negates the imaginary part, and
//! `Im ℍ` is identified with `ℝ³` carrying the Euclidean norm.

use std::ops::{Add, Div, Index, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: target point has {expected} columns, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A quaternion `re + i·im_i + j·im_j + k·im_k` over `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub re: f64,
    pub im_i: f64,
    pub im_j: f64,
    pub im_k: f64,
}

/// An imaginary quaternion, identified with a vector in `ℝ³`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImQuaternion {
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion { re: 0.0, im_i: 0.0, im_j: 0.0, im_k: 0.0 };
    pub const ONE: Quaternion = Quaternion { re: 1.0, im_i: 0.0, im_j: 0.0, im_k: 0.0 };
    pub const I: Quaternion = Quaternion { re: 0.0, im_i: 1.0, im_j: 0.0, im_k: 0.0 };
    pub const J: Quaternion = Quaternion { re: 0.0, im_i: 0.0, im_j: 1.0, im_k: 0.0 };
    pub const K: Quaternion = Quaternion { re: 0.0, im_i: 0.0, im_j: 0.0, im_k: 1.0 };

    pub fn new(re: f64, im_i: f64, im_j: f64, im_k: f64) -> Self {
        Quaternion { re, im_i, im_j, im_k }
    }

    pub fn from_real(re: f64) -> Self {
        Quaternion { re, ..Self::ZERO }
    }

    pub fn from_imaginary(v: ImQuaternion) -> Self {
        Quaternion { re: 0.0, im_i: v.i, im_j: v.j, im_k: v.k }
    }

    pub fn conjugate(self) -> Self {
        Quaternion { re: self.re, im_i: -self.im_i, im_j: -self.im_j, im_k: -self.im_k }
    }

    pub fn norm_sq(self) -> f64 {
        self.re * self.re + self.im_i * self.im_i + self.im_j * self.im_j + self.im_k * self.im_k
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn imaginary(self) -> ImQuaternion {
        ImQuaternion { i: self.im_i, j: self.im_j, k: self.im_k }
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion { re: self.re * s, im_i: self.im_i * s, im_j: self.im_j * s, im_k: self.im_k * s }
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im_i.is_finite() && self.im_j.is_finite() && self.im_k.is_finite()
    }

    /// The unit quaternion `cos θ + i sin θ`.
    pub fn unit_complex(theta: f64) -> Self {
        Quaternion { re: theta.cos(), im_i: theta.sin(), im_j: 0.0, im_k: 0.0 }
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Self) -> Self {
        Quaternion {
            re: self.re + rhs.re,
            im_i: self.im_i + rhs.im_i,
            im_j: self.im_j + rhs.im_j,
            im_k: self.im_k + rhs.im_k,
        }
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Self) -> Self {
        Quaternion {
            re: self.re - rhs.re,
            im_i: self.im_i - rhs.im_i,
            im_j: self.im_j - rhs.im_j,
            im_k: self.im_k - rhs.im_k,
        }
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, r: Self) -> Self {
        let (a, b, c, d) = (self.re, self.im_i, self.im_j, self.im_k);
        let (e, f, g, h) = (r.re, r.im_i, r.im_j, r.im_k);
        Quaternion {
            re: a * e - b * f - c * g - d * h,
            im_i: a * f + b * e + c * h - d * g,
            im_j: a * g - b * h + c * e + d * f,
            im_k: a * h + b * g - c * f + d * e,
        }
    }
}

impl ImQuaternion {
    pub const ZERO: ImQuaternion = ImQuaternion { i: 0.0, j: 0.0, k: 0.0 };
    pub const UNIT_I: ImQuaternion = ImQuaternion { i: 1.0, j: 0.0, k: 0.0 };

    pub fn new(i: f64, j: f64, k: f64) -> Self {
        ImQuaternion { i, j, k }
    }

    pub fn norm_sq(self) -> f64 {
        self.i * self.i + self.j * self.j + self.k * self.k
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(self, o: ImQuaternion) -> f64 {
        self.i * o.i + self.j * o.j + self.k * o.k
    }

    pub fn cross(self, o: ImQuaternion) -> ImQuaternion {
        ImQuaternion {
            i: self.j * o.k - self.k * o.j,
            j: self.k * o.i - self.i * o.k,
            k: self.i * o.j - self.j * o.i,
        }
    }

    pub fn scale(self, s: f64) -> Self {
        ImQuaternion { i: self.i * s, j: self.j * s, k: self.k * s }
    }

    pub fn is_finite(self) -> bool {
        self.i.is_finite() && self.j.is_finite() && self.k.is_finite()
    }

    pub fn normalized(self) -> ImQuaternion {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.scale(1.0 / n)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.i, self.j, self.k]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        ImQuaternion { i: a[0], j: a[1], k: a[2] }
    }
}

impl Add for ImQuaternion {
    type Output = ImQuaternion;
    fn add(self, o: Self) -> Self {
        ImQuaternion { i: self.i + o.i, j: self.j + o.j, k: self.k + o.k }
    }
}

impl Sub for ImQuaternion {
    type Output = ImQuaternion;
    fn sub(self, o: Self) -> Self {
        ImQuaternion { i: self.i - o.i, j: self.j - o.j, k: self.k - o.k }
    }
}

impl Neg for ImQuaternion {
    type Output = ImQuaternion;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul<f64> for ImQuaternion {
    type Output = ImQuaternion;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Div<f64> for ImQuaternion {
    type Output = ImQuaternion;
    fn div(self, s: f64) -> Self {
        self.scale(1.0 / s)
    }
}

/// The map `ν(x) = x̄ i x`.
///
/// Its image is imaginary with `|ν(x)| = |x|²`, and it is invariant under
/// left multiplication by unit complex numbers `e^{iθ}`.
pub fn nu(x: Quaternion) -> ImQuaternion {
    let q = x.conjugate() * Quaternion::I * x;
    debug_assert!(q.re.abs() <= 1e-14 * (1.0 + x.norm_sq()));
    q.imaginary()
}

/// A right inverse of [`nu`]: returns `x` with `ν(x) = v` and `|x|² = |v|`.
///
/// The full preimage of `v` is the circle `{ e^{iθ}·x : θ }`; `phase`
/// selects the point `e^{i·phase}·x₀` on it, with `x₀` chosen
/// deterministically. `v = 0` yields `x = 0`.
pub fn nu_inverse(v: ImQuaternion, phase: f64) -> Quaternion {
    let n = v.norm();
    if n == 0.0 {
        return Quaternion::ZERO;
    }
    let vhat = v.scale(1.0 / n);
    // Rotor q with q (±i) q̄ = v̂, built on whichever pole is far from v̂.
    // For x = √|v|·q̄ (pole +i) we get x̄ i x = |v|·q i q̄ = v; for the -i
    // pole, compose with j, which conjugates i to -i.
    let x0 = if vhat.i >= 0.0 {
        let q = rotor_from_i(vhat, 1.0);
        q.conjugate()
    } else {
        let q = rotor_from_i(vhat, -1.0);
        (q * Quaternion::J).conjugate()
    };
    let x0 = x0.scale(n.sqrt());
    Quaternion::unit_complex(phase) * x0
}

/// Unit quaternion `q` with `q·(sign·i)·q̄ = v̂`; requires `sign·v̂.i > -1`.
fn rotor_from_i(vhat: ImQuaternion, sign: f64) -> Quaternion {
    let pole = ImQuaternion::UNIT_I.scale(sign);
    let c = 1.0 + pole.dot(vhat);
    let w = pole.cross(vhat);
    let q = Quaternion { re: c, im_i: w.i, im_j: w.j, im_k: w.k };
    let norm = q.norm();
    debug_assert!(norm > 1e-8, "rotor pole too close to antipode");
    q.scale(1.0 / norm)
}

/// A positively-oriented orthonormal frame `(e, f, g)` of `Im ℍ` with the
/// given first vector, produced deterministically.
pub fn frame_from(e: ImQuaternion) -> (ImQuaternion, ImQuaternion, ImQuaternion) {
    let n = e.norm();
    assert!((n - 1.0).abs() <= 1e-9, "frame axis must be a unit vector");
    let x = nu_inverse(e, 0.0);
    // x̄ i x = e, and p ↦ x̄ p x rotates (i, j, k) onto a frame with first
    // vector e.
    let rotate = |p: Quaternion| (x.conjugate() * p * x).imaginary();
    let f = rotate(Quaternion::J);
    let g = rotate(Quaternion::K);
    (e, f, g)
}

/// An element of `Im ℍ ⊗ (ℝⁿ)*`: one imaginary quaternion per dual basis
/// vector of `(ℝⁿ)*`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPoint {
    columns: Vec<ImQuaternion>,
}

impl TargetPoint {
    pub fn new(columns: Vec<ImQuaternion>) -> Self {
        TargetPoint { columns }
    }

    pub fn zeros(n: usize) -> Self {
        TargetPoint { columns: vec![ImQuaternion::ZERO; n] }
    }

    pub fn dimension(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ImQuaternion] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> ImQuaternion {
        self.columns[i]
    }

    pub fn set_column(&mut self, i: usize, v: ImQuaternion) {
        self.columns[i] = v;
    }

    /// The pairing `b(u) = Σᵢ uᵢ·bᵢ` against an integer vector.
    pub fn pair(&self, u: &[i64]) -> Result<ImQuaternion, AlgebraError> {
        if u.len() != self.columns.len() {
            return Err(AlgebraError::DimensionMismatch { expected: self.columns.len(), got: u.len() });
        }
        let mut acc = ImQuaternion::ZERO;
        for (col, &ui) in self.columns.iter().zip(u) {
            acc = acc + col.scale(ui as f64);
        }
        Ok(acc)
    }

    /// The pairing against a real vector.
    pub fn pair_real(&self, u: &[f64]) -> Result<ImQuaternion, AlgebraError> {
        if u.len() != self.columns.len() {
            return Err(AlgebraError::DimensionMismatch { expected: self.columns.len(), got: u.len() });
        }
        let mut acc = ImQuaternion::ZERO;
        for (col, &ui) in self.columns.iter().zip(u) {
            acc = acc + col.scale(ui);
        }
        Ok(acc)
    }

    pub fn add(&self, o: &TargetPoint) -> TargetPoint {
        assert_eq!(self.dimension(), o.dimension());
        TargetPoint {
            columns: self.columns.iter().zip(&o.columns).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> TargetPoint {
        TargetPoint { columns: self.columns.iter().map(|c| c.scale(s)).collect() }
    }

    /// Flat list of the 3n coordinates, column-major: `b_0c, b_1c, b_2c` per
    /// column `c`.
    pub fn flattened(&self) -> Vec<f64> {
        self.columns.iter().flat_map(|c| [c.i, c.j, c.k]).collect()
    }

    pub fn from_flat(values: &[f64]) -> Self {
        assert!(values.len() % 3 == 0, "flat target point needs 3n values");
        TargetPoint {
            columns: values.chunks(3).map(|c| ImQuaternion::new(c[0], c[1], c[2])).collect(),
        }
    }
}

impl Index<usize> for TargetPoint {
    type Output = ImQuaternion;
    fn index(&self, i: usize) -> &ImQuaternion {
        &self.columns[i]
    }
}

/// The pairing `b(u)` as a free function.
pub fn pair(b: &TargetPoint, u: &[i64]) -> Result<ImQuaternion, AlgebraError> {
    b.pair(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn arb_quaternion() -> impl Strategy<Value = Quaternion> {
        let c = -10.0..10.0f64;
        (c.clone(), c.clone(), c.clone(), c).prop_map(|(a, b, cc, d)| Quaternion::new(a, b, cc, d))
    }

    fn arb_im() -> impl Strategy<Value = ImQuaternion> {
        let c = -10.0..10.0f64;
        (c.clone(), c.clone(), c).prop_map(|(i, j, k)| ImQuaternion::new(i, j, k))
    }

    #[test]
    fn nu_of_one_is_i() {
        let v = nu(Quaternion::ONE);
        assert_eq!(v, ImQuaternion::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn nu_of_real_multiple_of_j_is_negative_i() {
        for t in [0.5, 1.0, 3.0] {
            let v = nu(Quaternion::J.scale(t));
            assert!((v - ImQuaternion::new(-t * t, 0.0, 0.0)).norm() <= 1e-14 * (1.0 + t * t));
        }
    }

    #[test]
    fn nu_norm_on_sphere_of_radius_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let raw = Quaternion::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let x = raw.scale(2.0 / raw.norm());
            assert!((nu(x).norm() - 4.0).abs() <= 1e-12 * 4.0);
        }
    }

    #[test]
    fn nu_inverse_axis_examples() {
        let x = nu_inverse(ImQuaternion::new(1.0, 0.0, 0.0), 0.0);
        assert!((nu(x) - ImQuaternion::new(1.0, 0.0, 0.0)).norm() <= 1e-12);
        assert!((x.norm() - 1.0).abs() <= 1e-12);

        // Antipodal branch.
        let x = nu_inverse(ImQuaternion::new(-1.0, 0.0, 0.0), 0.0);
        assert!((nu(x) - ImQuaternion::new(-1.0, 0.0, 0.0)).norm() <= 1e-12);

        let v = ImQuaternion::new(0.0, 3.0, 4.0);
        let x = nu_inverse(v, 0.0);
        assert!((x.norm_sq() - 5.0).abs() <= 1e-12 * 5.0);
        assert!((nu(x) - v).norm() <= 1e-12 * 6.0);
    }

    #[test]
    fn nu_inverse_deterministic_at_phase_zero() {
        let v = ImQuaternion::new(0.3, -0.2, 0.9);
        assert_eq!(nu_inverse(v, 0.0), nu_inverse(v, 0.0));
    }

    #[test]
    fn nu_inverse_roundtrip_many_points_and_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let v = ImQuaternion::new(
                4.0 * (rng.gen::<f64>() - 0.5),
                4.0 * (rng.gen::<f64>() - 0.5),
                4.0 * (rng.gen::<f64>() - 0.5),
            );
            for s in 0..8 {
                let theta = s as f64 * std::f64::consts::FRAC_PI_4;
                let x = nu_inverse(v, theta);
                assert!((nu(x) - v).norm() <= 1e-12 * (1.0 + v.norm()));
                assert!((x.norm_sq() - v.norm()).abs() <= 1e-12 * (1.0 + v.norm()));
            }
        }
    }

    #[test]
    fn frame_is_orthonormal_and_oriented() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let raw = ImQuaternion::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let e = raw.normalized();
            let (e, f, g) = frame_from(e);
            for (a, b) in [(e, f), (f, g), (e, g)] {
                assert!(a.dot(b).abs() <= 1e-10);
            }
            assert!((f.norm() - 1.0).abs() <= 1e-10);
            assert!((g.norm() - 1.0).abs() <= 1e-10);
            assert!((e.cross(f) - g).norm() <= 1e-9);
        }
    }

    #[test]
    fn pair_examples() {
        let b = TargetPoint::zeros(3);
        assert_eq!(b.pair(&[4, -1, 2]).unwrap(), ImQuaternion::ZERO);

        let mut b = TargetPoint::zeros(2);
        b.set_column(0, ImQuaternion::new(1.0, 0.0, 0.0));
        assert_eq!(b.pair(&[1, 0]).unwrap(), ImQuaternion::new(1.0, 0.0, 0.0));
        assert!(b.pair(&[1, 0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(a in arb_quaternion(), b in arb_quaternion()) {
            let lhs = (a * b).norm();
            let rhs = a.norm() * b.norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn nu_norm_identity(x in arb_quaternion()) {
            prop_assert!((nu(x).norm() - x.norm_sq()).abs() <= 1e-12 * (1.0 + x.norm_sq()));
        }

        #[test]
        fn nu_circle_invariance(x in arb_quaternion(), theta in 0.0..(2.0 * std::f64::consts::PI)) {
            let g = Quaternion::unit_complex(theta);
            let lhs = nu(g * x);
            let rhs = nu(x);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + x.norm_sq()));
        }

        #[test]
        fn pair_is_additive(u1 in prop::collection::vec(-5i64..5, 3), u2 in prop::collection::vec(-5i64..5, 3), cols in prop::collection::vec(arb_im(), 3)) {
            let b = TargetPoint::new(cols);
            let sum: Vec<i64> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
            let lhs = b.pair(&sum).unwrap();
            let rhs = b.pair(&u1).unwrap() + b.pair(&u2).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-14 * (1.0 + rhs.norm()) * 100.0);
        }
    }
}
