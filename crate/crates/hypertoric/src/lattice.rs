//! Exact integer and rational linear algebra for desk-scale matrices.
//!
//! Everything here runs over `BigInt`/`BigRational`, so verdicts that feed
//! the combinatorial smoothness conditions are exact. Matrices are dense
//! row-major `Vec<Vec<_>>`; dimensions stay in the single digits.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;
pub type RatVector = Vec<BigRational>;

pub fn int_matrix_from_rows(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

/// Exact determinant of a square integer matrix (Bareiss elimination).
pub fn det_int(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "determinant needs a square matrix");
    if n == 0 {
        return BigInt::one();
    }
    let mut a = int_matrix_from_rows(m);
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = &num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Rank over ℚ of an integer matrix.
pub fn rank_int(m: &[Vec<i64>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let rows: Vec<RatVector> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    rat_rank(&rows)
}

fn rat_rank(rows: &[RatVector]) -> usize {
    let mut a: Vec<RatVector> = rows.to_vec();
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..nrows).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { continue };
        a.swap(rank, p);
        let inv = a[rank][col].clone();
        for r in 0..nrows {
            if r != rank && !a[r][col].is_zero() {
                let f = &a[r][col] / &inv;
                for c in col..ncols {
                    let v = &a[rank][c] * &f;
                    a[r][c] = &a[r][c] - v;
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Basis of the integer kernel lattice `{ t ∈ ℤᵐ : Σₖ tₖ·uₖ = 0 }` of the
/// map sending the k-th generator to the column `uₖ`.
///
/// Computed by unimodular column reduction, so the returned vectors generate
/// the full kernel lattice (not a finite-index sublattice).
pub fn kernel_basis(columns: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let m = columns.len();
    if m == 0 {
        return Vec::new();
    }
    let n = columns[0].len();
    // b is n×m; v tracks the m×m unimodular column transform.
    let mut b: IntMatrix = (0..n)
        .map(|r| columns.iter().map(|c| BigInt::from(c[r])).collect())
        .collect();
    let mut v: IntMatrix = (0..m)
        .map(|r| (0..m).map(|c| if r == c { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();

    let mut pivot_row = 0;
    let mut pivot_col = 0;
    while pivot_row < n && pivot_col < m {
        if (pivot_col..m).all(|c| b[pivot_row][c].is_zero()) {
            pivot_row += 1;
            continue;
        }
        // Euclid on the row until a single nonzero remains at pivot_col.
        loop {
            let mut best: Option<usize> = None;
            for c in pivot_col..m {
                if !b[pivot_row][c].is_zero()
                    && best.map_or(true, |bc| b[pivot_row][c].abs() < b[pivot_row][bc].abs())
                {
                    best = Some(c);
                }
            }
            let bc = best.unwrap();
            if bc != pivot_col {
                for row in b.iter_mut() {
                    row.swap(pivot_col, bc);
                }
                for row in v.iter_mut() {
                    row.swap(pivot_col, bc);
                }
            }
            let mut done = true;
            let pivot = b[pivot_row][pivot_col].clone();
            for c in pivot_col + 1..m {
                if b[pivot_row][c].is_zero() {
                    continue;
                }
                let q = div_round(&b[pivot_row][c], &pivot);
                if !q.is_zero() {
                    for r in 0..n {
                        let t = &b[r][pivot_col] * &q;
                        b[r][c] = &b[r][c] - t;
                    }
                    for r in 0..m {
                        let t = &v[r][pivot_col] * &q;
                        v[r][c] = &v[r][c] - t;
                    }
                }
                if !b[pivot_row][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        pivot_row += 1;
        pivot_col += 1;
    }

    let rank = pivot_col;
    (rank..m).map(|c| (0..m).map(|r| v[r][c].clone()).collect()).collect()
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // Nearest-integer division keeps entries small during reduction.
    let (q, r) = a.div_rem(b);
    let two_r: BigInt = &r * 2;
    if two_r.abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Invariant factors (Smith normal form diagonal) of an integer matrix.
pub fn smith_invariant_factors(m: &[Vec<i64>]) -> Vec<BigInt> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut a = int_matrix_from_rows(m);
    let mut factors = Vec::new();
    let mut top = 0;
    let mut left = 0;
    while top < rows && left < cols {
        let mut pivot: Option<(usize, usize)> = None;
        for r in top..rows {
            for c in left..cols {
                if !a[r][c].is_zero()
                    && pivot.map_or(true, |(pr, pc)| a[r][c].abs() < a[pr][pc].abs())
                {
                    pivot = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        a.swap(top, pr);
        for row in a.iter_mut() {
            row.swap(left, pc);
        }
        // Clear the row and column; restart when a remainder pops up.
        let mut clean = true;
        for r in top + 1..rows {
            if !a[r][left].is_zero() {
                let q = div_round(&a[r][left], &a[top][left]);
                for c in left..cols {
                    let t = &a[top][c] * &q;
                    a[r][c] = &a[r][c] - t;
                }
                if !a[r][left].is_zero() {
                    clean = false;
                }
            }
        }
        for c in left + 1..cols {
            if !a[top][c].is_zero() {
                let q = div_round(&a[top][c], &a[top][left]);
                for r in top..rows {
                    let t = &a[r][left] * &q;
                    a[r][c] = &a[r][c] - t;
                }
                if !a[top][c].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        factors.push(a[top][left].abs());
        top += 1;
        left += 1;
    }
    factors
}

/// Whether the given integer vectors span a primitive sublattice, i.e.
/// extend to a ℤ-basis of ℤⁿ (all invariant factors 1 and full rank).
pub fn extends_to_z_basis(vectors: &[Vec<i64>]) -> bool {
    if vectors.is_empty() {
        return true;
    }
    let factors = smith_invariant_factors(vectors);
    factors.len() == vectors.len() && factors.iter().all(|f| f.is_one())
}

/// Inverse of a unimodular integer matrix (|det| = 1), exact.
pub fn unimodular_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = m.len();
    let det = det_int(m);
    if !det.abs().is_one() {
        return None;
    }
    // Rational inverse; entries are integers because |det| = 1.
    let mut a: Vec<RatVector> = m
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .chain((0..n).map(|c| {
                    BigRational::from_integer(if c == r { BigInt::one() } else { BigInt::zero() })
                }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] = &a[col][c] / &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let t = &a[col][c] * &f;
                    a[r][c] = &a[r][c] - t;
                }
            }
        }
    }
    let mut out = vec![vec![0i64; n]; n];
    for r in 0..n {
        for c in 0..n {
            let v = &a[r][n + c];
            if !v.denom().is_one() {
                return None;
            }
            out[r][c] = i64::try_from(v.numer()).ok()?;
        }
    }
    Some(out)
}

/// Outcome of an exact linear solve `A·x = b` over the rationals.
#[derive(Debug, Clone, PartialEq)]
pub enum RatSolve {
    Inconsistent,
    /// A solution, flagged unique when the kernel is trivial.
    Solution { x: RatVector, unique: bool },
}

/// Exact consistency check and canonical solution of `rows·x = rhs`.
///
/// When the system is underdetermined the least-norm solution is returned
/// (computed from a maximal independent row subset via the Gram matrix).
pub fn rat_solve_least_norm(rows: &[Vec<i64>], rhs: &[BigRational]) -> RatSolve {
    assert_eq!(rows.len(), rhs.len());
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());

    // Forward elimination on [A | b] for consistency and row-basis selection.
    let mut aug: Vec<RatVector> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            r.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .chain([b.clone()])
                .collect()
        })
        .collect();
    let mut row_of_pivot: Vec<usize> = (0..m).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&r| !aug[r][col].is_zero()) else { continue };
        aug.swap(rank, p);
        row_of_pivot.swap(rank, p);
        let inv = aug[rank][col].clone();
        for r in 0..m {
            if r != rank && !aug[r][col].is_zero() {
                let f = &aug[r][col] / &inv;
                for c in col..=n {
                    let t = &aug[rank][c] * &f;
                    aug[r][c] = &aug[r][c] - t;
                }
            }
        }
        rank += 1;
    }
    for r in rank..m {
        if !aug[r][n].is_zero() {
            return RatSolve::Inconsistent;
        }
    }

    // Least-norm solution x = Aᵢᵀ (Aᵢ Aᵢᵀ)⁻¹ bᵢ on an independent row subset.
    let idx: Vec<usize> = row_of_pivot[..rank].to_vec();
    let sub: Vec<&Vec<i64>> = idx.iter().map(|&r| &rows[r]).collect();
    let subrhs: Vec<BigRational> = idx.iter().map(|&r| rhs[r].clone()).collect();
    let mut gram: Vec<RatVector> = vec![vec![BigRational::zero(); rank + 1]; rank];
    for a in 0..rank {
        for b in 0..rank {
            let mut s = BigInt::zero();
            for c in 0..n {
                s += BigInt::from(sub[a][c]) * BigInt::from(sub[b][c]);
            }
            gram[a][b] = BigRational::from_integer(s);
        }
        gram[a][rank] = subrhs[a].clone();
    }
    let y = rat_gauss_solve(&mut gram).expect("Gram matrix of independent rows is invertible");
    let mut x = vec![BigRational::zero(); n];
    for (a, ya) in y.iter().enumerate() {
        for c in 0..n {
            x[c] = &x[c] + BigRational::from_integer(BigInt::from(sub[a][c])) * ya;
        }
    }
    RatSolve::Solution { x, unique: rank == n }
}

/// Solves a square augmented system `[A | b]` in place; `None` if singular.
fn rat_gauss_solve(aug: &mut [RatVector]) -> Option<RatVector> {
    let n = aug.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, p);
        let inv = aug[col][col].clone();
        for c in col..=n {
            aug[col][c] = &aug[col][c] / &inv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..=n {
                    let t = &aug[col][c] * &f;
                    aug[r][c] = &aug[r][c] - t;
                }
            }
        }
    }
    Some((0..n).map(|r| aug[r][n].clone()).collect())
}

/// Floating-point least-squares / least-norm solve of `rows·x = rhs`.
///
/// Returns `(x, residual)` where `residual = max_k |row_k·x − rhs_k|`.
pub fn f64_solve_least_norm(rows: &[Vec<f64>], rhs: &[f64]) -> (Vec<f64>, f64) {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    // Normal equations on AᵀA keep the solve n×n; fine at desk conditioning.
    let mut ata = vec![vec![0.0; n + 1]; n];
    for a in 0..n {
        for b in 0..n {
            ata[a][b] = (0..m).map(|r| rows[r][a] * rows[r][b]).sum();
        }
        ata[a][n] = (0..m).map(|r| rows[r][a] * rhs[r]).sum();
    }
    let x = f64_gauss_solve_ridge(&mut ata, n);
    let residual = rows
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let v: f64 = row.iter().zip(&x).map(|(a, xi)| a * xi).sum();
            (v - b).abs()
        })
        .fold(0.0, f64::max);
    (x, residual)
}

fn f64_gauss_solve_ridge(aug: &mut [Vec<f64>], n: usize) -> Vec<f64> {
    // Partial pivoting; a singular normal matrix falls back to dropping the
    // pivotless column (its coefficient stays zero: minimum-norm behaviour).
    let mut x = vec![0.0; n];
    let mut used = vec![false; n];
    let mut row = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..n {
        let mut best = row;
        let mut best_val = 0.0;
        for r in row..n {
            if aug[r][col].abs() > best_val {
                best_val = aug[r][col].abs();
                best = r;
            }
        }
        if best_val <= 1e-13 {
            continue;
        }
        aug.swap(row, best);
        let inv = aug[row][col];
        for c in col..=n {
            aug[row][c] /= inv;
        }
        for r in 0..n {
            if r != row {
                let f = aug[r][col];
                if f != 0.0 {
                    for c in col..=n {
                        aug[r][c] -= f * aug[row][c];
                    }
                }
            }
        }
        pivots.push((row, col));
        used[col] = true;
        row += 1;
    }
    for &(r, c) in &pivots {
        x[c] = aug[r][n];
    }
    x
}

/// Builds a unimodular matrix from shear operations `(i, j, c)`, each adding
/// `c` times row `j` to row `i` of the identity. Determinant is exactly 1.
pub fn unimodular_from_shears(n: usize, ops: &[(usize, usize, i64)]) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n)
        .map(|r| (0..n).map(|c| i64::from(r == c)).collect())
        .collect();
    for &(i, j, c) in ops {
        if i == j {
            continue;
        }
        for col in 0..n {
            m[i][col] += c * m[j][col];
        }
    }
    m
}

/// Integer matrix-vector product.
pub fn mat_vec_i64(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_examples() {
        assert_eq!(det_int(&[vec![1, 0], vec![0, 1]]), BigInt::from(1));
        assert_eq!(det_int(&[vec![1, 0], vec![1, 2]]), BigInt::from(2));
        assert_eq!(det_int(&[vec![2, 4], vec![1, 2]]), BigInt::from(0));
        assert_eq!(
            det_int(&[vec![2, 0, 1], vec![1, 3, -1], vec![0, 5, 2]]),
            BigInt::from(27)
        );
    }

    #[test]
    fn kernel_of_standard_basis_plus_diagonal() {
        // Columns e1, e2, e3, e1+e2+e3: kernel generated by (1,1,1,-1).
        let cols = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 1]];
        let ker = kernel_basis(&cols);
        assert_eq!(ker.len(), 1);
        let t = &ker[0];
        for r in 0..3 {
            let mut s = BigInt::zero();
            for (k, col) in cols.iter().enumerate() {
                s += BigInt::from(col[r]) * &t[k];
            }
            assert!(s.is_zero());
        }
        let expected: Vec<i64> = vec![1, 1, 1, -1];
        let matches = t.iter().zip(&expected).all(|(a, &b)| *a == BigInt::from(b))
            || t.iter().zip(&expected).all(|(a, &b)| *a == BigInt::from(-b));
        assert!(matches, "kernel basis {t:?} not ±(1,1,1,-1)");
    }

    #[test]
    fn kernel_trivial_for_square_basis() {
        let cols = vec![vec![1, 0], vec![0, 1]];
        assert!(kernel_basis(&cols).is_empty());
    }

    #[test]
    fn smith_factors_and_basis_extension() {
        assert!(extends_to_z_basis(&[vec![1, 0, 0]]));
        assert!(extends_to_z_basis(&[vec![1, 2, 3], vec![0, 1, 7]]));
        assert!(!extends_to_z_basis(&[vec![2, 0, 0]]));
        assert!(!extends_to_z_basis(&[vec![1, 0, 0], vec![1, 2, 0]]));
        assert!(extends_to_z_basis(&[]));
    }

    #[test]
    fn unimodular_inverse_roundtrip() {
        let m = unimodular_from_shears(3, &[(0, 1, 2), (2, 0, -3), (1, 2, 5)]);
        assert_eq!(det_int(&m).abs(), BigInt::one());
        let inv = unimodular_inverse(&m).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let v: i64 = (0..3).map(|k| m[r][k] * inv[k][c]).sum();
                assert_eq!(v, i64::from(r == c));
            }
        }
    }

    #[test]
    fn rational_solve_consistency() {
        let rows = vec![vec![1, 0], vec![0, 1], vec![1, 1]];
        let rhs: Vec<BigRational> = [1, 2, 3]
            .iter()
            .map(|&x| BigRational::from_integer(BigInt::from(x)))
            .collect();
        match rat_solve_least_norm(&rows, &rhs) {
            RatSolve::Solution { x, unique } => {
                assert!(unique);
                assert_eq!(x[0], BigRational::from_integer(BigInt::from(1)));
                assert_eq!(x[1], BigRational::from_integer(BigInt::from(2)));
            }
            other => panic!("unexpected {other:?}"),
        }

        let rhs_bad: Vec<BigRational> = [1, 2, 4]
            .iter()
            .map(|&x| BigRational::from_integer(BigInt::from(x)))
            .collect();
        assert_eq!(rat_solve_least_norm(&rows, &rhs_bad), RatSolve::Inconsistent);
    }

    #[test]
    fn rational_least_norm_is_in_row_space() {
        // Single row (1, 1): least-norm solution of x + y = 2 is (1, 1).
        let rows = vec![vec![1, 1]];
        let rhs = vec![BigRational::from_integer(BigInt::from(2))];
        match rat_solve_least_norm(&rows, &rhs) {
            RatSolve::Solution { x, unique } => {
                assert!(!unique);
                assert_eq!(x[0], BigRational::from_integer(BigInt::from(1)));
                assert_eq!(x[1], BigRational::from_integer(BigInt::from(1)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn f64_least_norm_residual() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let (x, res) = f64_solve_least_norm(&rows, &[1.0, 2.0, 3.0]);
        assert!(res <= 1e-12);
        assert!((x[0] - 1.0).abs() <= 1e-12 && (x[1] - 2.0).abs() <= 1e-12);

        let (_, res) = f64_solve_least_norm(&rows, &[1.0, 2.0, 4.0]);
        assert!(res > 0.1);
    }
}
