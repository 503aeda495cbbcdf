//! Finite-truncation quotient data: the flat moment map, zero-set
//! membership, explicit fiber points and stabilizer subtori.

use thiserror::Error;

use crate::algebra::{nu, nu_inverse, ImQuaternion, Quaternion, TargetPoint};
use crate::arrangement::{Arrangement, ArrangementError};
use crate::context::NumericContext;
use crate::lattice;
use crate::potential::r_k;

#[derive(Debug, Error)]
pub enum QuotientError {
    #[error("coordinate count {got} does not match flat count {expected}")]
    CoordinateCount { expected: usize, got: usize },
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// One point of the flat ambient space over the explicit flats: one
/// quaternion coordinate per flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientPoint {
    pub coords: Vec<Quaternion>,
}

impl QuotientPoint {
    pub fn zeros(m: usize) -> Self {
        QuotientPoint { coords: vec![Quaternion::ZERO; m] }
    }
}

/// The moment map value per flat index: `μ_k(x) = λ_k + ½·ν(x_k)`.
pub fn mu_lambda(a: &Arrangement, x: &QuotientPoint) -> Result<Vec<ImQuaternion>, QuotientError> {
    if x.coords.len() != a.flats.len() {
        return Err(QuotientError::CoordinateCount { expected: a.flats.len(), got: x.coords.len() });
    }
    Ok(a.flats
        .iter()
        .zip(&x.coords)
        .map(|(f, &xk)| f.lambda_f64() + nu(xk).scale(0.5))
        .collect())
}

/// Least-squares solve for a target point `a` with `a(u_k) = μ_k(x)`; the
/// residual is `max_k ‖a(u_k) − μ_k(x)‖`. Membership of `x` in the zero set
/// of the quotient moment map is `residual ≤ tol`.
pub fn zero_set_residual(
    a: &Arrangement,
    x: &QuotientPoint,
) -> Result<(TargetPoint, f64), QuotientError> {
    let mu = mu_lambda(a, x)?;
    let rows: Vec<Vec<f64>> = a
        .flats
        .iter()
        .map(|f| f.u.iter().map(|&v| v as f64).collect())
        .collect();
    let n = a.dimension;
    let mut best = TargetPoint::zeros(n);
    for c in 0..3 {
        let rhs: Vec<f64> = mu.iter().map(|v| v.to_array()[c]).collect();
        let (sol, _) = lattice::f64_solve_least_norm(&rows, &rhs);
        for i in 0..n {
            let mut col = best.column(i);
            match c {
                0 => col.i = sol[i],
                1 => col.j = sol[i],
                _ => col.k = sol[i],
            }
            best.set_column(i, col);
        }
    }
    let residual = a
        .flats
        .iter()
        .zip(&mu)
        .map(|(f, &m)| (best.pair(&f.u).unwrap() - m).norm())
        .fold(0.0, f64::max);
    Ok((best, residual))
}

/// An explicit zero-set point over the target `b`:
/// `x_k = ν⁻¹(2(b(u_k) − λ_k), phase_k)`. Always succeeds, with `x_k = 0`
/// exactly when `b` lies on the k-th flat.
pub fn fiber_point(
    a: &Arrangement,
    b: &TargetPoint,
    phases: &[f64],
) -> Result<QuotientPoint, QuotientError> {
    if phases.len() != a.flats.len() {
        return Err(QuotientError::CoordinateCount { expected: a.flats.len(), got: phases.len() });
    }
    let coords = a
        .flats
        .iter()
        .zip(phases)
        .map(|(f, &phase)| {
            let v = (b.pair(&f.u).unwrap() - f.lambda_f64()).scale(2.0);
            nu_inverse(v, phase)
        })
        .collect();
    Ok(QuotientPoint { coords })
}

/// Flats through `b` and the lattice properties of their weights.
#[derive(Debug, Clone)]
pub struct StabilizerReport {
    pub incident: Vec<usize>,
    pub basis: Vec<Vec<i64>>,
    pub dimension: usize,
    /// Whether the incident weights extend to a ℤ-basis of ℤⁿ.
    pub unimodular_extension: bool,
}

/// The stabilizer subtorus data at `b`: spanned by the weights of the flats
/// through `b`.
pub fn stabilizer(a: &Arrangement, b: &TargetPoint, ctx: &NumericContext) -> StabilizerReport {
    let mut incident = Vec::new();
    let mut basis = Vec::new();
    for (i, f) in a.flats.iter().enumerate() {
        if r_k(b, f) <= ctx.base_tol * (1.0 + f.lambda_hat().norm()) {
            incident.push(i);
            basis.push(f.u.clone());
        }
    }
    let unimodular_extension = lattice::extends_to_z_basis(&basis);
    StabilizerReport { dimension: incident.len(), incident, basis, unimodular_extension }
}

/// Quotient dimension `4m − 4(m − n) = 4n`, cross-checked against the
/// kernel-lattice rank.
pub fn quotient_dimension(a: &Arrangement) -> Result<usize, QuotientError> {
    let kernel = crate::arrangement::kernel_lattice(a)?;
    let m = a.flats.len();
    let rank = kernel.basis.len();
    debug_assert_eq!(rank, m - a.dimension);
    Ok(4 * m - 4 * rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::Flat;
    use crate::exact::LevelVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(u: Vec<i64>, l: [i64; 3]) -> Flat {
        Flat::new(u, LevelVector::from_ints(l[0], l[1], l[2])).unwrap()
    }

    fn sample_arrangement() -> Arrangement {
        Arrangement::without_taub_nut(
            2,
            vec![
                flat(vec![1, 0], [0, 0, 0]),
                flat(vec![0, 1], [1, 0, 0]),
                flat(vec![1, 1], [0, 2, 0]),
                flat(vec![1, -1], [0, 0, 3]),
            ],
            vec![],
        )
        .unwrap()
    }

    fn rand_target(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> TargetPoint {
        TargetPoint::new(
            (0..n)
                .map(|_| {
                    ImQuaternion::new(
                        scale * (rng.gen::<f64>() - 0.5),
                        scale * (rng.gen::<f64>() - 0.5),
                        scale * (rng.gen::<f64>() - 0.5),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn mu_lambda_values() {
        let a = sample_arrangement();
        let x = QuotientPoint::zeros(4);
        let mu = mu_lambda(&a, &x).unwrap();
        for (f, m) in a.flats.iter().zip(&mu) {
            assert_eq!(*m, f.lambda_f64());
        }

        // Real coordinate t at index k adds (t²/2)·i.
        let mut x = QuotientPoint::zeros(4);
        x.coords[2] = Quaternion::from_real(3.0);
        let mu = mu_lambda(&a, &x).unwrap();
        let expected = a.flats[2].lambda_f64() + ImQuaternion::new(4.5, 0.0, 0.0);
        assert!((mu[2] - expected).norm() <= 1e-12);

        // Norm identity |μ_k − λ_k| = |x_k|²/2.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = QuotientPoint::zeros(4);
        for c in &mut x.coords {
            *c = Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
        }
        let mu = mu_lambda(&a, &x).unwrap();
        for (k, f) in a.flats.iter().enumerate() {
            let lhs = (mu[k] - f.lambda_f64()).norm();
            let rhs = x.coords[k].norm_sq() / 2.0;
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }

    #[test]
    fn fiber_point_hits_zero_set_and_recovers_target() {
        let a = sample_arrangement();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let b = rand_target(&mut rng, 2, 8.0);
            let phases: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 6.28).collect();
            let x = fiber_point(&a, &b, &phases).unwrap();
            let (best, residual) = zero_set_residual(&a, &x).unwrap();
            assert!(residual <= 1e-10, "residual {residual}");
            for i in 0..2 {
                assert!((best.column(i) - b.column(i)).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn fiber_point_vanishes_exactly_on_flats() {
        let a = sample_arrangement();
        // b on flat#0 (b(e1) = 0).
        let mut b = TargetPoint::zeros(2);
        b.set_column(1, ImQuaternion::new(0.7, -0.3, 0.2));
        let x = fiber_point(&a, &b, &[0.0; 4]).unwrap();
        assert_eq!(x.coords[0], Quaternion::ZERO);
        assert!(x.coords[1].norm() > 0.0);

        // Generic b: |x_k|² = 2‖b(u_k) − λ_k‖.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = rand_target(&mut rng, 2, 4.0);
        let x = fiber_point(&a, &b, &[0.0; 4]).unwrap();
        for (k, f) in a.flats.iter().enumerate() {
            let d = (b.pair(&f.u).unwrap() - f.lambda_f64()).norm();
            assert!((x.coords[k].norm_sq() - 2.0 * d).abs() <= 1e-12 * (1.0 + d));
        }
    }

    #[test]
    fn phase_circle_preserves_residual_and_target() {
        let a = sample_arrangement();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = rand_target(&mut rng, 2, 5.0);
        let x0 = fiber_point(&a, &b, &[0.0; 4]).unwrap();
        let (a0, r0) = zero_set_residual(&a, &x0).unwrap();
        for step in 1..12 {
            let phases = vec![step as f64 * 0.5; 4];
            let x = fiber_point(&a, &b, &phases).unwrap();
            let (ai, ri) = zero_set_residual(&a, &x).unwrap();
            assert!((ri - r0).abs() <= 1e-12);
            for i in 0..2 {
                assert!((ai.column(i) - a0.column(i)).norm() <= 1e-12 * (1.0 + a0.column(i).norm()));
            }
        }
    }

    #[test]
    fn inconsistent_levels_have_positive_residual() {
        // Three flats in n = 2 with levels not of the form a(u_k): x = 0
        // forces μ = λ, which no target point matches.
        let a = Arrangement::without_taub_nut(
            2,
            vec![
                flat(vec![1, 0], [1, 0, 0]),
                flat(vec![0, 1], [1, 0, 0]),
                flat(vec![1, 1], [7, 0, 0]),
            ],
            vec![],
        )
        .unwrap();
        let x = QuotientPoint::zeros(3);
        let (_, residual) = zero_set_residual(&a, &x).unwrap();
        assert!(residual > 0.1);

        // Square invertible system: always solvable.
        let a = Arrangement::without_taub_nut(
            2,
            vec![flat(vec![1, 0], [1, 0, 0]), flat(vec![0, 1], [1, 0, 0])],
            vec![],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut x = QuotientPoint::zeros(2);
        for c in &mut x.coords {
            *c = Quaternion::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
        }
        let (_, residual) = zero_set_residual(&a, &x).unwrap();
        assert!(residual <= 1e-12);
    }

    #[test]
    fn stabilizer_reports() {
        let ctx = NumericContext::default();
        let a = sample_arrangement();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = rand_target(&mut rng, 2, 3.0);
        let free = stabilizer(&a, &b, &ctx);
        assert!(free.incident.is_empty());
        assert!(free.unimodular_extension);

        // On exactly flat#0.
        let mut b = TargetPoint::zeros(2);
        b.set_column(1, ImQuaternion::new(0.9, 0.1, -0.4));
        let s = stabilizer(&a, &b, &ctx);
        assert_eq!(s.incident, vec![0]);
        assert_eq!(s.dimension, 1);
        assert!(s.unimodular_extension);

        // At the intersection of flats #0 and #1: rank 2 ℤ-basis.
        let mut b = TargetPoint::zeros(2);
        b.set_column(1, ImQuaternion::new(1.0, 0.0, 0.0));
        let s = stabilizer(&a, &b, &ctx);
        assert_eq!(s.incident, vec![0, 1]);
        assert!(s.unimodular_extension);
        assert!(s.dimension <= 2);
    }

    #[test]
    fn quotient_dimension_is_4n() {
        let a = sample_arrangement();
        assert_eq!(quotient_dimension(&a).unwrap(), 8);

        let a = Arrangement::without_taub_nut(1, vec![flat(vec![1], [0, 0, 0])], vec![]).unwrap();
        assert_eq!(quotient_dimension(&a).unwrap(), 4);

        let a = Arrangement::without_taub_nut(
            2,
            vec![flat(vec![1, 0], [0, 0, 0]), flat(vec![0, 1], [0, 0, 0])],
            vec![],
        )
        .unwrap();
        assert_eq!(quotient_dimension(&a).unwrap(), 8);
    }
}
