//! Deterministic complex Schur form for 2×2 and 3×3 matrices.
//!
//! Conventions: eigenvalues ordered lexicographically by (re, im); the
//! transforming matrix has column phases fixed by making each column's first
//! sizeable entry real positive, then the last column is rotated so the
//! determinant is exactly 1 (special unitary).

use num_complex::Complex64;

use super::cmat::{adjoint, det, identity, mul, CMat};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Roots of `z² + bz + c`.
fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let d = (b * b - 4.0 * c).sqrt();
    // Sign chosen to avoid cancellation.
    let q = if (b + d).norm() >= (b - d).norm() { -(b + d) / 2.0 } else { -(b - d) / 2.0 };
    if q.norm() == 0.0 {
        [C0, C0]
    } else {
        [q, c / q]
    }
}

/// Roots of `z³ + a z² + b z + c`, with multiple roots detected through the
/// discriminant at the scale `mscale` of the source matrix and recovered
/// exactly from the derivative polynomial.
fn cubic_roots(a: Complex64, b: Complex64, c: Complex64, mscale: f64) -> [Complex64; 3] {
    // Depressed: z = t − a/3, t³ + pt + q.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = -4.0 * p.powu(3) - 27.0 * q * q;
    let s6 = mscale.powi(6).max(1e-300);
    if disc.norm() <= 1e-10 * s6 {
        // Multiple root: a double (or triple) root of the cubic is a simple
        // root of t² = −p/3 and is recovered to machine precision there.
        let r0 = (-p / 3.0).sqrt();
        let value = |t: Complex64| (t * t + p) * t + q;
        let r = if value(r0).norm() <= value(-r0).norm() { r0 } else { -r0 };
        return [r + shift, r + shift, -2.0 * r + shift];
    }
    let half_q = q / 2.0;
    let inner = (half_q * half_q + (p / 3.0).powu(3)).sqrt();
    // Pick the branch avoiding cancellation.
    let u3 = if (-half_q + inner).norm() >= (-half_q - inner).norm() {
        -half_q + inner
    } else {
        -half_q - inner
    };
    let u = u3.cbrt();
    let omega = Complex64::new(-0.5, 0.75f64.sqrt());
    let mut roots = [C0; 3];
    if u.norm() < 1e-30 {
        for r in &mut roots {
            *r = shift;
        }
        return roots;
    }
    let mut uu = u;
    for r in &mut roots {
        let t = uu - p / (3.0 * uu);
        *r = t + shift;
        uu *= omega;
    }
    // Newton polish on the original cubic.
    for r in &mut roots {
        for _ in 0..4 {
            let f = ((*r + a) * *r + b) * *r + c;
            let df = (3.0 * *r + 2.0 * a) * *r + b;
            if df.norm() > 1e-300 {
                *r -= f / df;
            }
        }
    }
    roots
}

/// Eigenvalues with multiple roots refined through the derivative
/// polynomial: a p-fold root of the characteristic polynomial is a simple,
/// well-conditioned root of its (p−1)-st derivative, so clusters of raw
/// roots are snapped to it. This keeps the deflation vectors accurate for
/// the rank-one-image targets, whose `β` always has a double eigenvalue.
fn eigenvalues(m: &CMat) -> Vec<Complex64> {
    // Thresholds scale with the matrix norm: root-splitting errors of a
    // multiple root are governed by the coefficient scale, not the root
    // magnitude.
    let mscale = super::cmat::frobenius(m).max(1e-300);
    match m.len() {
        1 => vec![m[0][0]],
        2 => {
            let tr = m[0][0] + m[1][1];
            let d = det(m);
            let mut vals = quadratic_roots(-tr, d).to_vec();
            if (vals[0] - vals[1]).norm() <= CLUSTER_TOL * mscale {
                let mid = tr / 2.0;
                vals = vec![mid, mid];
            }
            vals
        }
        3 => {
            let tr = m[0][0] + m[1][1] + m[2][2];
            let e2 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2]
                - m[0][2] * m[2][0]
                + m[1][1] * m[2][2]
                - m[1][2] * m[2][1];
            let d = det(m);
            cubic_roots(-tr, e2, -d, mscale).to_vec()
        }
        _ => unimplemented!(),
    }
}

/// Relative separation below which eigenvalues are treated as multiple.
const CLUSTER_TOL: f64 = 1e-6;

fn lex_sort(vals: &mut [Complex64]) {
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// A unit null vector of `m` (assumed rank-deficient), by full-pivot
/// elimination; deterministic.
fn null_vector(m: &CMat) -> Vec<Complex64> {
    let n = m.len();
    let mut a = m.clone();
    let scale = super::cmat::frobenius(&a).max(1e-300);
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for step in 0..n {
        // Full pivot.
        let mut best = (step, step);
        let mut best_val = 0.0;
        for r in step..n {
            for c in step..n {
                if a[r][c].norm() > best_val {
                    best_val = a[r][c].norm();
                    best = (r, c);
                }
            }
        }
        if best_val <= 2.0 * CLUSTER_TOL * scale {
            break;
        }
        a.swap(step, best.0);
        for row in a.iter_mut() {
            row.swap(step, best.1);
        }
        col_perm.swap(step, best.1);
        let inv = a[step][step];
        for c in step..n {
            a[step][c] /= inv;
        }
        for r in 0..n {
            if r != step && a[r][step].norm() > 0.0 {
                let f = a[r][step];
                for c in step..n {
                    let t = f * a[step][c];
                    a[r][c] -= t;
                }
            }
        }
        rank += 1;
    }
    // Free variable: first non-pivot column (index `rank` after pivoting).
    let mut x = vec![C0; n];
    let free = rank.min(n - 1);
    x[free] = C1;
    for r in (0..rank).rev() {
        x[r] = -a[r][free];
    }
    // Undo column permutation.
    let mut out = vec![C0; n];
    for (pos, &orig) in col_perm.iter().enumerate() {
        out[orig] = x[pos];
    }
    let norm = out.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Unitary matrix whose first column is the given unit vector, completed by
/// Gram–Schmidt over the standard basis.
fn unitary_with_first_column(v: &[Complex64]) -> CMat {
    let n = v.len();
    let mut cols: Vec<Vec<Complex64>> = vec![v.to_vec()];
    for b in 0..n {
        if cols.len() == n {
            break;
        }
        let mut cand: Vec<Complex64> = (0..n).map(|i| if i == b { C1 } else { C0 }).collect();
        for c in &cols {
            let proj: Complex64 = c.iter().zip(&cand).map(|(ci, xi)| ci.conj() * xi).sum();
            for (xi, ci) in cand.iter_mut().zip(c) {
                *xi -= proj * ci;
            }
        }
        let norm = cand.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cand.iter_mut().for_each(|x| *x /= norm);
            cols.push(cand);
        }
    }
    assert_eq!(cols.len(), n);
    // Column-major assembly.
    (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect()
}

/// Unitary `q` with `q† m q` upper triangular and diagonal in the sorted
/// eigenvalue order.
fn schur_basis(m: &CMat) -> CMat {
    let n = m.len();
    if n == 1 {
        return identity(1);
    }
    let mut vals = eigenvalues(m);
    lex_sort(&mut vals);
    let lambda = vals[0];
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[i][i] -= lambda;
    }
    let v = null_vector(&shifted);
    let q1 = unitary_with_first_column(&v);
    if n == 2 {
        return q1;
    }
    // Deflate: trailing (n−1)×(n−1) block of q1† m q1.
    let t = mul(&adjoint(&q1), &mul(m, &q1));
    let block: CMat = (1..n).map(|r| (1..n).map(|c| t[r][c]).collect()).collect();
    let q2 = schur_basis(&block);
    let mut q2_full = identity(n);
    for r in 1..n {
        for c in 1..n {
            q2_full[r][c] = q2[r - 1][c - 1];
        }
    }
    mul(&q1, &q2_full)
}

/// Special-unitary Schur transform: returns `u` with `u·m·u†` upper
/// triangular, `det u = 1`, eigenvalues in lexicographic order along the
/// diagonal, and deterministic phases.
pub fn special_unitary_triangularizer(m: &CMat) -> CMat {
    let n = m.len();
    let mut q = schur_basis(m);
    let scale = super::cmat::frobenius(&q);
    // Column phases: first sizeable entry of each column real positive.
    for c in 0..n {
        let lead = (0..n).find(|&r| q[r][c].norm() > 1e-9 * scale.max(1.0)).unwrap_or(0);
        let phase = q[lead][c] / q[lead][c].norm();
        for r in 0..n {
            q[r][c] /= phase;
        }
    }
    // Determinant correction on the last column.
    let d = det(&q);
    let phase = d / d.norm();
    for r in 0..n {
        q[r][n - 1] /= phase;
    }
    adjoint(&q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cmat(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect()
            })
            .collect()
    }

    fn check_triangularization(m: &CMat) {
        let u = special_unitary_triangularizer(m);
        let n = m.len();
        // Unitarity.
        let uu = mul(&u, &adjoint(&u));
        for r in 0..n {
            for c in 0..n {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((uu[r][c] - Complex64::new(expect, 0.0)).norm() <= 1e-10);
            }
        }
        // Special.
        assert!((det(&u) - Complex64::new(1.0, 0.0)).norm() <= 1e-10);
        // Triangular.
        let t = mul(&u, &mul(m, &adjoint(&u)));
        let scale = super::super::cmat::frobenius(m).max(1.0);
        for r in 0..n {
            for c in 0..r {
                assert!(t[r][c].norm() <= 1e-9 * scale, "lower entry ({r},{c}) = {}", t[r][c]);
            }
        }
        // Diagonal sorted lexicographically.
        for i in 1..n {
            let (a, b) = (t[i - 1][i - 1], t[i][i]);
            assert!(
                a.re < b.re + 1e-7 * scale
                    || ((a.re - b.re).abs() <= 1e-7 * scale && a.im <= b.im + 1e-7 * scale),
                "diagonal out of order: {a} then {b}"
            );
        }
    }

    #[test]
    fn triangularizes_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            check_triangularization(&random_cmat(&mut rng, 2));
            check_triangularization(&random_cmat(&mut rng, 3));
        }
    }

    #[test]
    fn handles_defective_and_triangular_input() {
        // Nilpotent single Jordan blocks.
        let e12: CMat = vec![
            vec![C0, C1, C0],
            vec![C0, C0, C0],
            vec![C0, C0, C0],
        ];
        check_triangularization(&e12);
        let jordan: CMat = vec![
            vec![C0, C1, C0],
            vec![C0, C0, C1],
            vec![C0, C0, C0],
        ];
        check_triangularization(&jordan);
        // Already upper triangular.
        let t: CMat = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 1.0)],
            vec![C0, Complex64::new(-1.0, 0.0)],
        ];
        check_triangularization(&t);
        // Zero matrix.
        check_triangularization(&vec![vec![C0; 3]; 3]);
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_cmat(&mut rng, 3);
        let u1 = special_unitary_triangularizer(&m);
        let u2 = special_unitary_triangularizer(&m);
        assert_eq!(u1, u2);
    }
}
