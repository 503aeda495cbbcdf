//! Support-pattern analysis of moment-map fibers over a triangular target.
//!
//! For a solution `(z, w)` of `(zw)₀ = β` with `β` upper triangular, the
//! product matrix `z·w` is upper triangular, which forces
//! `max supp(z) ≤ min supp(w)`. Fixing the two supports, all products
//! `z_i w_j` on the support rectangle are pinned by `β` (rank-one
//! compatibility required), leaving one complex pivot `ω`; the anti-diagonal
//! circle `(e^{iθ}z, e^{-iθ}w)` moves only its phase, so fiber components
//! correspond to admissible values of the modulus `m = |ω|²`. The remaining
//! conditions from the real moment map are linear in `(m, 1/m)`.

use num_complex::Complex64;

use super::cmat::CMat;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// A support pattern compatible with the triangular `β`, carrying the fixed
/// coordinate ratios: `z_i = c_i·ω` on the z-support, `w_j = b_j/ω` on the
/// w-support.
#[derive(Debug, Clone)]
pub struct ProductPattern {
    pub sz: Vec<usize>,
    pub sw: Vec<usize>,
    pub label: String,
    pub c: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl ProductPattern {
    /// The phase-zero point with pivot modulus `m`.
    pub fn point_at(&self, m: f64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let root = m.sqrt();
        let mut z = vec![C0; n];
        let mut w = vec![C0; n];
        for &i in &self.sz {
            z[i] = self.c[i] * root;
        }
        for &j in &self.sw {
            w[j] = self.b[j] / root;
        }
        (z, w)
    }
}

/// Tracks whether any branch decision landed near its threshold.
#[derive(Debug, Default, Clone)]
pub struct BoundaryFlags {
    pub near_threshold: bool,
}

impl BoundaryFlags {
    fn check(&mut self, magnitude: f64, threshold: f64) {
        if magnitude >= threshold / 1e3 && magnitude <= threshold * 1e3 {
            self.near_threshold = true;
        }
    }
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
    }
    out
}

/// All support pairs with `max(Sz) ≤ min(Sw)`, both nonempty.
pub fn support_pairs(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let subs = subsets(n);
    let mut out = Vec::new();
    for sz in &subs {
        for sw in &subs {
            if sz.last().unwrap() <= sw.first().unwrap() {
                out.push((sz.clone(), sw.clone()));
            }
        }
    }
    out
}

/// Patterns whose forced product structure is consistent with `beta`
/// (support match, eigenvalue pattern, rank-one compatibility).
pub fn compatible_patterns(
    beta: &CMat,
    tol: f64,
    flags: &mut BoundaryFlags,
) -> Vec<ProductPattern> {
    let n = beta.len();
    let lambda: Vec<Complex64> = (0..n).map(|i| beta[i][i]).collect();
    let mut out = Vec::new();
    'pattern: for (sz, sw) in support_pairs(n) {
        let overlap: Vec<usize> = sz.iter().copied().filter(|i| sw.contains(i)).collect();
        debug_assert!(overlap.len() <= 1);
        let t = match overlap.first() {
            Some(&i) => lambda[i] / (n as f64 - 1.0),
            None => C0,
        };
        // Diagonal products vanish off the overlap: λ_i = −t there.
        for i in 0..n {
            if overlap.contains(&i) {
                continue;
            }
            let v = (lambda[i] + t).norm();
            flags.check(v, tol);
            if v > tol {
                continue 'pattern;
            }
        }
        // Product matrix on the support rectangle.
        let product = |i: usize, j: usize| -> Complex64 {
            if i == j {
                lambda[i] + t
            } else {
                beta[i][j]
            }
        };
        // Required nonzero on the rectangle.
        for &i in &sz {
            for &j in &sw {
                let v = product(i, j).norm();
                flags.check(v, tol);
                if v <= tol {
                    continue 'pattern;
                }
            }
        }
        // Upper entries off the rectangle must vanish.
        for i in 0..n {
            for j in i + 1..n {
                if sz.contains(&i) && sw.contains(&j) {
                    continue;
                }
                let v = beta[i][j].norm();
                flags.check(v, tol);
                if v > tol {
                    continue 'pattern;
                }
            }
        }
        // Rank-one compatibility of the forced products.
        let pscale: f64 = sz
            .iter()
            .flat_map(|&i| sw.iter().map(move |&j| product(i, j).norm()))
            .fold(0.0, f64::max);
        for a in 0..sz.len() {
            for bidx in a + 1..sz.len() {
                for x in 0..sw.len() {
                    for y in x + 1..sw.len() {
                        let minor = product(sz[a], sw[x]) * product(sz[bidx], sw[y])
                            - product(sz[a], sw[y]) * product(sz[bidx], sw[x]);
                        let v = minor.norm();
                        flags.check(v, tol * pscale * pscale.max(1.0));
                        if v > tol * pscale * pscale.max(1.0) {
                            continue 'pattern;
                        }
                    }
                }
            }
        }
        let i0 = sz[0];
        let j0 = sw[0];
        let pivot = product(i0, j0);
        let mut c = vec![C0; n];
        let mut b = vec![C0; n];
        for &i in &sz {
            c[i] = product(i, j0) / pivot;
        }
        for &j in &sw {
            b[j] = product(i0, j);
        }
        let label = format!(
            "z{{{}}}w{{{}}}",
            sz.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","),
            sw.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(","),
        );
        out.push(ProductPattern { sz, sw, label, c, b });
    }
    out
}

/// Moduli solving the real moment-map equations for one pattern. Each entry
/// is `(m, double_root)`.
pub fn solve_for_modulus(pat: &ProductPattern, g: &CMat, tol: f64) -> Vec<(f64, bool)> {
    let n = g.len();
    let gscale = super::cmat::frobenius(g).max(1.0);
    // Real rows a·u + b·v = rhs with (u, v) = (m, 1/m).
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let both_z = pat.sz.contains(&i) && pat.sz.contains(&j);
            let both_w = pat.sw.contains(&i) && pat.sw.contains(&j);
            let a = if both_z { pat.c[i] * pat.c[j].conj() } else { C0 };
            let b = if both_w { -(pat.b[i].conj() * pat.b[j]) } else { C0 };
            rows.push([a.re, b.re, g[i][j].re]);
            rows.push([a.im, b.im, g[i][j].im]);
        }
    }
    let dz: Vec<f64> = (0..n).map(|i| if pat.sz.contains(&i) { pat.c[i].norm_sqr() } else { 0.0 }).collect();
    let dw: Vec<f64> = (0..n).map(|i| if pat.sw.contains(&i) { pat.b[i].norm_sqr() } else { 0.0 }).collect();
    let sz_sum: f64 = dz.iter().sum();
    let sw_sum: f64 = dw.iter().sum();
    for i in 0..n {
        rows.push([
            dz[i] - sz_sum / n as f64,
            -(dw[i] - sw_sum / n as f64),
            g[i][i].re,
        ]);
    }

    // Coefficient-free rows are pure feasibility constraints.
    let feas = 1e-6 * gscale;
    let coeff_floor = 1e-12 * rows.iter().map(|r| r[0].abs().max(r[1].abs())).fold(1.0, f64::max);
    let mut live: Vec<[f64; 3]> = Vec::new();
    for r in rows.iter() {
        if r[0].abs().max(r[1].abs()) <= coeff_floor {
            if r[2].abs() > feas {
                return Vec::new();
            }
        } else {
            live.push(*r);
        }
    }
    if live.is_empty() {
        return Vec::new();
    }
    // First pivot: strongest row.
    let p1 = live
        .iter()
        .enumerate()
        .max_by(|a, b| row_scale(a.1).total_cmp(&row_scale(b.1)))
        .map(|(i, _)| i)
        .unwrap();
    let r1 = live.remove(p1);
    let s1 = row_scale(&r1);
    // Eliminate the stronger coefficient of r1 from the rest.
    let use_first = r1[0].abs() >= r1[1].abs();
    let mut reduced: Vec<[f64; 3]> = Vec::new();
    for r in &live {
        let f = if use_first { r[0] / r1[0] } else { r[1] / r1[1] };
        reduced.push([r[0] - f * r1[0], r[1] - f * r1[1], r[2] - f * r1[2]]);
    }
    let p2 = reduced
        .iter()
        .enumerate()
        .max_by(|a, b| row_scale(a.1).total_cmp(&row_scale(b.1)))
        .map(|(i, _)| i);
    let rank2 = p2.map_or(false, |i| row_scale(&reduced[i]) > 1e-9 * s1);

    let mut candidates: Vec<(f64, bool)> = Vec::new();
    if rank2 {
        let r2 = reduced[p2.unwrap()];
        let det = r1[0] * r2[1] - r1[1] * r2[0];
        if det.abs() <= 1e-12 * s1 * row_scale(&r2) {
            return Vec::new();
        }
        let u = (r1[2] * r2[1] - r1[1] * r2[2]) / det;
        let v = (r1[0] * r2[2] - r1[2] * r2[0]) / det;
        if u > 0.0 && v > 0.0 && (u * v - 1.0).abs() <= 1e-6 * (1.0 + u * v) {
            candidates.push(((u / v).sqrt(), false));
        }
    } else {
        // One independent equation: a·m + b/m = g ⇒ a·m² − g·m + b = 0.
        let (a, b, rhs) = (r1[0], r1[1], r1[2]);
        if a.abs() <= 1e-12 * s1 {
            if rhs.abs() > 1e-12 * s1 && b / rhs > 0.0 {
                candidates.push((b / rhs, false));
            }
        } else {
            let disc = rhs * rhs - 4.0 * a * b;
            let scale2 = rhs * rhs + (4.0 * a * b).abs();
            if disc.abs() <= 1e-12 * scale2.max(1e-300) {
                let m = rhs / (2.0 * a);
                if m > 0.0 {
                    candidates.push((m, true));
                }
            } else if disc > 0.0 {
                let sq = disc.sqrt();
                let q = if rhs >= 0.0 { (rhs + sq) / 2.0 } else { (rhs - sq) / 2.0 };
                for m in [q / a, b / q] {
                    if m > 0.0 {
                        candidates.push((m, false));
                    }
                }
            }
        }
    }
    // Residual check against every equation.
    let _ = tol;
    candidates.retain(|&(m, _)| {
        let v = 1.0 / m;
        live.iter()
            .chain([&r1])
            .all(|r| (r[0] * m + r[1] * v - r[2]).abs() <= feas * (1.0 + row_scale(r) * (m + v)))
    });
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    candidates.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-9 * (1.0 + b.0));
    candidates
}

fn row_scale(r: &[f64; 3]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// A rank-one branch for targets with vanishing `β`: either `w = 0` and
/// `zz† = G + sI`, or `z = 0` and `w†w = −G + sI`, each requiring the
/// eigenvalue pattern that makes the right side PSD of rank one.
#[derive(Debug, Clone)]
pub struct RankOneBranch {
    pub z_side: bool,
    /// Unit direction of the nonzero vector.
    pub direction: Vec<Complex64>,
    /// Squared norm of the vector demanded by the eigenvalues.
    pub magnitude: f64,
    pub label: String,
}

/// Eigen-decomposition of a Hermitian matrix via the Schur machinery:
/// `(ascending eigenvalues, matching unit eigenvectors)`.
pub fn hermitian_eigen(g: &CMat) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let u = super::schur::special_unitary_triangularizer(g);
    let t = super::cmat::mul(&u, &super::cmat::mul(g, &super::cmat::adjoint(&u)));
    let n = g.len();
    let vals: Vec<f64> = (0..n).map(|i| t[i][i].re).collect();
    // Eigenvector for vals[i] is column i of U†, i.e. the conjugate of row i.
    let vecs: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| u[i][j].conj()).collect())
        .collect();
    (vals, vecs)
}

pub fn rank_one_branches(g: &CMat, tol: f64, flags: &mut BoundaryFlags) -> Vec<RankOneBranch> {
    let n = g.len();
    let (vals, vecs) = hermitian_eigen(g);
    let mut out = Vec::new();
    // z-branch: all but the top eigenvalue equal.
    let lows_equal = (0..n - 1).all(|i| {
        let d = (vals[i] - vals[0]).abs();
        flags.check(d, tol);
        d <= tol
    });
    let s = -vals[0];
    flags.check(s.abs(), tol);
    if lows_equal && s > tol {
        out.push(RankOneBranch {
            z_side: true,
            direction: vecs[n - 1].clone(),
            magnitude: n as f64 * s,
            label: "z-only".into(),
        });
    }
    // w-branch: all but the bottom eigenvalue equal.
    let highs_equal = (1..n).all(|i| {
        let d = (vals[i] - vals[n - 1]).abs();
        flags.check(d, tol);
        d <= tol
    });
    let sp = vals[n - 1];
    flags.check(sp.abs(), tol);
    if highs_equal && sp > tol {
        out.push(RankOneBranch {
            z_side: false,
            direction: vecs[0].clone(),
            magnitude: n as f64 * sp,
            label: "w-only".into(),
        });
    }
    out
}

impl RankOneBranch {
    /// The phase-zero point with the branch magnitude scaled by `m ≥ 0`
    /// (`m = 1` is the solving magnitude).
    pub fn point_at(&self, norm_sq: f64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let amp = norm_sq.max(0.0).sqrt();
        let mut z = vec![C0; n];
        let mut w = vec![C0; n];
        if self.z_side {
            for (zi, d) in z.iter_mut().zip(&self.direction) {
                *zi = d * amp;
            }
        } else {
            // w = amp·v†: conjugate entries of the direction.
            for (wi, d) in w.iter_mut().zip(&self.direction) {
                *wi = d.conj() * amp;
            }
        }
        (z, w)
    }
}
