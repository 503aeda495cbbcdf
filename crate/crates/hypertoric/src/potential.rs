//! Potentials, slice reduction, the generating function `F`, and metric
//! matrices, with finite-difference harmonicity diagnostics.
//!
//! The metric matrix of an arrangement is
//! `V_ij(b) = T_ij + Σ_k a_k·û_{k,i}û_{k,j}/r_k(b)` with `a_k = ½` by
//! default; `T` is the stored Taub-NUT matrix, which for `n = 1` is the
//! scalar constant of the four-dimensional potential
//! `V(p) = c + ½ Σ_q 1/‖p − q‖`. `V_ij` is the Hessian `F_{x_i x_j}` of
//! `F = Σ_k a_k(s_k log(s_k + r_k) − r_k) + Σ_ij (T_ij/8)(4x_ix_j − z_iz̄_j − z_jz̄_i)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{frame_from, ImQuaternion, TargetPoint};
use crate::arrangement::{Arrangement, Flat};
use crate::par;
use crate::tail;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluation point coincides with center {0}")]
    OnSingularity(String),
    #[error("point lies on flat {0}")]
    OnFlat(String),
    #[error("family #{0} diverges; potential is infinite")]
    DivergentFamily(usize),
    #[error("slice lies inside flat {0}")]
    SliceInsideFlat(String),
    #[error("alpha covector must be nonzero")]
    ZeroAlpha,
    #[error("log branch point: s + r vanishes at flat {0}")]
    LogBranch(String),
    #[error("family axis lies on the log branch for the chosen frame")]
    FamilyOnLogBranch,
    #[error("requested family tolerance {requested} not reachable (achieved {achieved})")]
    FamilyTolerance { requested: f64, achieved: f64 },
    #[error("finite-difference stencil hits a singularity")]
    StencilHitsSingularity,
    #[error("dimension mismatch")]
    Dimension,
}

/// Distance of `b` from a flat: `r_k(b) = ‖b(û_k) − λ̂_k‖`.
pub fn r_k(b: &TargetPoint, flat: &Flat) -> f64 {
    let v = b.pair(&flat.u).expect("dimension checked by caller");
    (v.scale(1.0 / flat.weight_norm()) - flat.lambda_hat()).norm()
}

/// Signed coordinate of `b` along a unit axis `e`:
/// `s_k(b) = ⟨e, b(û_k) − λ̂_k⟩`; always `|s_k| ≤ r_k`.
pub fn s_k(b: &TargetPoint, flat: &Flat, e: ImQuaternion) -> f64 {
    debug_assert!((e.norm() - 1.0).abs() <= 1e-9);
    let v = b.pair(&flat.u).expect("dimension checked by caller");
    e.dot(v.scale(1.0 / flat.weight_norm()) - flat.lambda_hat())
}

/// An infinite monomial family of potential centers in the 3d slice
/// coordinate: `q(k) = base + scale·k^power·direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceFamily {
    pub base: ImQuaternion,
    pub direction: ImQuaternion,
    pub scale: f64,
    pub power: f64,
    pub weight: f64,
}

impl SliceFamily {
    pub fn center(&self, k: u64) -> ImQuaternion {
        self.base + self.direction.scale(self.scale * (k as f64).powf(self.power))
    }

    pub fn converges(&self) -> bool {
        self.power > 1.0
    }
}

/// A four-dimensional potential datum: weighted centers, optional infinite
/// families of centers, and a constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicePotential {
    pub points: Vec<(ImQuaternion, f64)>,
    pub families: Vec<SliceFamily>,
    pub constant: f64,
}

impl SlicePotential {
    pub fn from_centers(centers: &[ImQuaternion], constant: f64) -> Self {
        SlicePotential {
            points: centers.iter().map(|&q| (q, 1.0)).collect(),
            families: Vec::new(),
            constant,
        }
    }

    /// Global scale applied to every center weight and the constant.
    pub fn with_scale(mut self, c: f64) -> Self {
        for p in &mut self.points {
            p.1 *= c;
        }
        for f in &mut self.families {
            f.weight *= c;
        }
        self.constant *= c;
        self
    }

    /// Minimum distance from `p` to the finite centers (families handled by
    /// the local member search).
    pub fn distance_to_centers(&self, p: ImQuaternion) -> f64 {
        let mut d = f64::INFINITY;
        for (q, _) in &self.points {
            d = d.min((p - *q).norm());
        }
        for fam in &self.families {
            // Candidate closest member indices near the projection.
            let t = (p - fam.base).dot(fam.direction).max(fam.scale);
            let k0 = (t / fam.scale).powf(1.0 / fam.power);
            for k in [k0.floor() as i64 - 1, k0.floor() as i64, k0.ceil() as i64, k0.ceil() as i64 + 1]
            {
                if k >= 1 {
                    d = d.min((p - fam.center(k as u64)).norm());
                }
            }
        }
        d
    }
}

/// Evaluates `V(p) = c + ½ Σ w_k/‖p − q_k‖`, truncating each infinite
/// family so the certified tail error stays below `tol`.
pub fn potential_v(s: &SlicePotential, p: ImQuaternion, tol: f64) -> Result<f64, EvalError> {
    let mut acc = s.constant;
    for (idx, (q, w)) in s.points.iter().enumerate() {
        let d = (p - *q).norm();
        if d <= 1e-12 * (1.0 + p.norm() + q.norm()) {
            return Err(EvalError::OnSingularity(format!("point#{idx}")));
        }
        acc += 0.5 * w / d;
    }
    for (fi, fam) in s.families.iter().enumerate() {
        if !fam.converges() {
            return Err(EvalError::DivergentFamily(fi));
        }
        acc += 0.5 * family_inverse_distance_sum(fam, p, tol)?;
    }
    Ok(acc)
}

/// Certified `Σ_k w/‖p − q(k)‖` over one family.
fn family_inverse_distance_sum(fam: &SliceFamily, p: ImQuaternion, tol: f64) -> Result<f64, EvalError> {
    let rel = p - fam.base;
    let f = |x: f64| {
        let q = fam.direction.scale(fam.scale * x.powf(fam.power));
        fam.weight / (rel - q).norm()
    };
    // Beyond x₀ the distance grows monotonically.
    let x0 = ((2.0 * (rel.norm() + 1.0) / fam.scale).powf(1.0 / fam.power)).ceil() as u64;
    // Nearby members can sit on the evaluation point.
    let probe = ((rel.dot(fam.direction).max(fam.scale) / fam.scale)
        .powf(1.0 / fam.power))
    .round() as i64;
    for k in probe - 2..=probe + 2 {
        if k >= 1 {
            let d = (p - fam.center(k as u64)).norm();
            if d <= 1e-12 * (1.0 + p.norm() + fam.center(k as u64).norm()) {
                return Err(EvalError::OnSingularity(format!("family center k={k}")));
            }
        }
    }
    let sum = tail::certified_series_sum(&f, fam.power, fam.weight / fam.scale, x0, tol, 4_000_000);
    if sum.error_bound > tol {
        return Err(EvalError::FamilyTolerance { requested: tol, achieved: sum.error_bound });
    }
    Ok(sum.value)
}

/// Reduces an arrangement to the four-dimensional potential on the affine
/// slice `q ↦ base + q⊗α`.
///
/// Centers are `q_k = (λ_k − base(u_k))/α(u_k)` over the flats with
/// `α(u_k) ≠ 0`; each carries weight `1/‖α‖`, which is the
/// `|α̂(û_k)|/r_k`-term of the slice potential re-expressed over the slice
/// distance `‖q − q_k‖`. Flats with `α(u_k) = 0` must miss the slice
/// entirely, else the slice sits inside a flat and is rejected. The constant
/// term is `α̂ᵀ·T·α̂`.
pub fn slice(a: &Arrangement, base: &TargetPoint, alpha: &[i64]) -> Result<SlicePotential, EvalError> {
    if alpha.len() != a.dimension || base.dimension() != a.dimension {
        return Err(EvalError::Dimension);
    }
    let alpha_norm = (alpha.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
    if alpha_norm == 0.0 {
        return Err(EvalError::ZeroAlpha);
    }
    let weight = 1.0 / alpha_norm;
    let mut points: Vec<(ImQuaternion, f64)> = Vec::new();
    for (i, flat) in a.flats.iter().enumerate() {
        let au: i64 = flat.u.iter().zip(alpha).map(|(a, b)| a * b).sum();
        let bv = base.pair(&flat.u).map_err(|_| EvalError::Dimension)?;
        if au == 0 {
            if (bv - flat.lambda_f64()).norm() <= 1e-12 * (1.0 + flat.lambda_f64().norm()) {
                return Err(EvalError::SliceInsideFlat(format!("flat#{i}")));
            }
            continue;
        }
        let q = (flat.lambda_f64() - bv).scale(1.0 / au as f64);
        // Coincident centers merge by weight.
        if let Some(existing) = points
            .iter_mut()
            .find(|(pq, _)| (*pq - q).norm() <= 1e-12 * (1.0 + q.norm()))
        {
            existing.1 += weight;
        } else {
            points.push((q, weight));
        }
    }
    let mut families = Vec::new();
    for (i, fam) in a.families.iter().enumerate() {
        let au: i64 = fam.u.iter().zip(alpha).map(|(a, b)| a * b).sum();
        let bv = base.pair(&fam.u).map_err(|_| EvalError::Dimension)?;
        if au == 0 {
            if fam.member_through(bv, 1e-12).is_some() {
                return Err(EvalError::SliceInsideFlat(format!("family#{i}")));
            }
            continue;
        }
        let auf = au as f64;
        families.push(SliceFamily {
            base: (fam.base - bv).scale(1.0 / auf),
            direction: fam.direction.scale(auf.signum()),
            scale: fam.scale / auf.abs(),
            power: fam.power,
            weight,
        });
    }
    let alpha_hat: Vec<f64> = alpha.iter().map(|&x| x as f64 / alpha_norm).collect();
    let mut constant = 0.0;
    for r in 0..a.dimension {
        for c in 0..a.dimension {
            constant += alpha_hat[r] * a.taub_nut[r][c] * alpha_hat[c];
        }
    }
    Ok(SlicePotential { points, families, constant })
}

/// Builds the target point with e-axis coordinates `x` and transverse
/// complex coordinates `z` in the deterministic frame completing `e`.
pub fn target_from_xz(x: &[f64], z: &[Complex64], e: ImQuaternion) -> TargetPoint {
    assert_eq!(x.len(), z.len());
    let (e, f, g) = frame_from(e);
    TargetPoint::new(
        x.iter()
            .zip(z)
            .map(|(&xi, zi)| e.scale(xi) + f.scale(zi.re) + g.scale(zi.im))
            .collect(),
    )
}

/// Evaluates the generating function `F` with the default coefficients
/// `a_k = ½`.
pub fn f_eval(
    a: &Arrangement,
    x: &[f64],
    z: &[Complex64],
    e: ImQuaternion,
    tol: f64,
) -> Result<f64, EvalError> {
    let coeffs = vec![0.5; a.flats.len()];
    f_eval_with_coefficients(a, x, z, e, tol, &coeffs)
}

/// `F` with per-flat coefficients `a_k` (families keep `½`).
pub fn f_eval_with_coefficients(
    a: &Arrangement,
    x: &[f64],
    z: &[Complex64],
    e: ImQuaternion,
    tol: f64,
    coeffs: &[f64],
) -> Result<f64, EvalError> {
    if x.len() != a.dimension || z.len() != a.dimension || coeffs.len() != a.flats.len() {
        return Err(EvalError::Dimension);
    }
    let b = target_from_xz(x, z, e);
    let mut acc = 0.0;
    for ((i, flat), &ak) in a.flats.iter().enumerate().zip(coeffs) {
        let s = s_k(&b, flat, e);
        let r = r_k(&b, flat);
        if s + r <= 1e-12 * (1.0 + r) {
            return Err(EvalError::LogBranch(format!("flat#{i}")));
        }
        acc += ak * (s * (s + r).ln() - r);
    }
    for fam in &a.families {
        acc += family_f_sum(fam, &b, e, tol)?;
    }
    // Constant quadratic term: T_ij/8 are the coefficients pairing with
    // (4·x_i·x_j − z_i·z̄_j − z_j·z̄_i); its x-Hessian is exactly T.
    for i in 0..a.dimension {
        for j in 0..a.dimension {
            let c = a.taub_nut[i][j] / 8.0;
            acc += c * (4.0 * x[i] * x[j] - 2.0 * (z[i] * z[j].conj()).re);
        }
    }
    Ok(acc)
}

/// Family contribution to `F`: terms beyond a fixed head are regularized by
/// subtracting their affine part at the origin, which leaves the Hessian
/// unchanged and makes the series summable.
fn family_f_sum(
    fam: &crate::arrangement::FamilyGenerator,
    b: &TargetPoint,
    e: ImQuaternion,
    tol: f64,
) -> Result<f64, EvalError> {
    if fam.power <= 1.0 {
        return Err(EvalError::DivergentFamily(0));
    }
    let un = fam.weight_norm();
    let (_, fr, gr) = frame_from(e);
    let vb = b.pair(&fam.u).unwrap().scale(1.0 / un);
    let v0 = ImQuaternion::ZERO;
    // Alignment of the family axis with +e approaches the log branch cut.
    let axis = fam.direction.scale(-1.0);
    if e.dot(axis) >= 1.0 - 1e-9 {
        return Err(EvalError::FamilyOnLogBranch);
    }
    let phi = |v: ImQuaternion, lam_hat: ImQuaternion| -> Result<f64, EvalError> {
        let w = v - lam_hat;
        let s = e.dot(w);
        let r = w.norm();
        if s + r <= 1e-12 * (1.0 + r) {
            return Err(EvalError::LogBranch("family member".into()));
        }
        Ok(0.5 * (s * (s + r).ln() - r))
    };
    // Gradient of φ at v in slice coordinates (e, f, g).
    let grad = |v: ImQuaternion, lam_hat: ImQuaternion| -> [f64; 3] {
        let w = v - lam_hat;
        let s = e.dot(w);
        let r = w.norm();
        let a = fr.dot(w);
        let bb = gr.dot(w);
        [0.5 * (s + r).ln(), -0.5 * a / (s + r), -0.5 * bb / (s + r)]
    };
    let delta = [e.dot(vb - v0), fr.dot(vb - v0), gr.dot(vb - v0)];
    let delta_norm_sq: f64 = delta.iter().map(|d| d * d).sum();

    // Head: plain terms while levels are comparable to the evaluation point.
    let head_bound = 4.0 * (1.0 + fam.base.norm() / un + vb.norm());
    let k_head = (((head_bound * un) / fam.scale).powf(1.0 / fam.power)).ceil() as u64;
    let mut acc = 0.0;
    for k in 1..=k_head {
        let lam_hat = fam.level(k).scale(1.0 / un);
        acc += phi(vb, lam_hat)?;
    }
    // Regularized tail: φ(vb) − φ(0) − ∇φ(0)·Δ = O(‖Δ‖²/r); truncated when
    // the rigorous remainder bound drops below tol.
    let sep = 1.0 - e.dot(axis);
    let hess_coeff = 4.0 * delta_norm_sq * un / (fam.scale * sep.max(0.25));
    let p1 = fam.power - 1.0;
    let mut n_tail = ((hess_coeff / (p1 * tol)).powf(1.0 / p1)).ceil() as u64;
    n_tail = n_tail.clamp(k_head, 4_000_000);
    let achieved = hess_coeff * (n_tail as f64).powf(-p1) / p1;
    if achieved > tol && n_tail == 4_000_000 {
        return Err(EvalError::FamilyTolerance { requested: tol, achieved });
    }
    for k in k_head + 1..=n_tail {
        let lam_hat = fam.level(k).scale(1.0 / un);
        let g0 = grad(v0, lam_hat);
        let lin: f64 = g0.iter().zip(&delta).map(|(a, b)| a * b).sum();
        acc += phi(vb, lam_hat)? - phi(v0, lam_hat)? - lin;
    }
    Ok(acc)
}

/// The metric matrix and its inverse at a point.
#[derive(Debug, Clone)]
pub struct MetricSample {
    pub point: TargetPoint,
    pub v: Vec<Vec<f64>>,
    /// Absent when the weights do not span and the matrix is singular.
    pub v_inv: Option<Vec<Vec<f64>>>,
}

/// Evaluates `V_ij(b) = T_ij + Σ_k a_k û_{k,i}û_{k,j}/r_k(b)` with
/// `a_k = ½` and certified family truncation.
pub fn metric_matrix(a: &Arrangement, b: &TargetPoint, tol: f64) -> Result<MetricSample, EvalError> {
    let n = a.dimension;
    if b.dimension() != n {
        return Err(EvalError::Dimension);
    }
    let mut v = a.taub_nut.clone();
    for (i, flat) in a.flats.iter().enumerate() {
        let r = r_k(b, flat);
        if r <= 1e-12 * (1.0 + flat.lambda_hat().norm()) {
            return Err(EvalError::OnFlat(format!("flat#{i}")));
        }
        let uh = flat.u_hat();
        for p in 0..n {
            for q in 0..n {
                v[p][q] += 0.5 * uh[p] * uh[q] / r;
            }
        }
    }
    for (fi, fam) in a.families.iter().enumerate() {
        if !fam.converges() {
            return Err(EvalError::DivergentFamily(fi));
        }
        let un = fam.weight_norm();
        let w = b.pair(&fam.u).map_err(|_| EvalError::Dimension)?;
        let slice_fam = SliceFamily {
            base: fam.base,
            direction: fam.direction,
            scale: fam.scale,
            power: fam.power,
            weight: un,
        };
        // Σ_k 1/r_k(b) = ‖u‖ Σ_k 1/‖b(u) − λ_k‖ over the family.
        let sum = family_inverse_distance_sum(&slice_fam, w, tol)?;
        let uh: Vec<f64> = fam.u.iter().map(|&x| x as f64 / un).collect();
        for p in 0..n {
            for q in 0..n {
                v[p][q] += 0.5 * uh[p] * uh[q] * sum;
            }
        }
    }
    let v_inv = invert(&v);
    Ok(MetricSample { point: b.clone(), v, v_inv })
}

fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut aug: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .copied()
                .chain((0..n).map(|c| f64::from(u8::from(c == r))))
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))?;
        if aug[p][col].abs() <= 1e-14 {
            return None;
        }
        aug.swap(col, p);
        let inv = aug[col][col];
        for c in 0..2 * n {
            aug[col][c] /= inv;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        aug[r][c] -= f * aug[col][c];
                    }
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Seven-point finite-difference Laplacian of the potential at `p` with
/// step `h`; the residual of a harmonic function scales as `O(h²)`.
pub fn harmonic_residual(s: &SlicePotential, p: ImQuaternion, h: f64, tol: f64) -> Result<f64, EvalError> {
    if s.distance_to_centers(p) <= h * (1.0 + 1e-9) {
        return Err(EvalError::StencilHitsSingularity);
    }
    let axes = [
        ImQuaternion::new(1.0, 0.0, 0.0),
        ImQuaternion::new(0.0, 1.0, 0.0),
        ImQuaternion::new(0.0, 0.0, 1.0),
    ];
    let mut acc = -6.0 * potential_v(s, p, tol)?;
    for ax in axes {
        acc += potential_v(s, p + ax.scale(h), tol)?;
        acc += potential_v(s, p - ax.scale(h), tol)?;
    }
    Ok(acc / (h * h))
}

/// Finite-difference Laplacian, in the slice coordinate through `base`
/// along `alpha`, of the metric entry `V_ij`.
pub fn polyharmonic_residual(
    a: &Arrangement,
    base: &TargetPoint,
    alpha: &[i64],
    i: usize,
    j: usize,
    p: ImQuaternion,
    h: f64,
    tol: f64,
) -> Result<f64, EvalError> {
    let entry = |q: ImQuaternion| -> Result<f64, EvalError> {
        let b = slice_point(base, alpha, q);
        Ok(metric_matrix(a, &b, tol)?.v[i][j])
    };
    let axes = [
        ImQuaternion::new(1.0, 0.0, 0.0),
        ImQuaternion::new(0.0, 1.0, 0.0),
        ImQuaternion::new(0.0, 0.0, 1.0),
    ];
    let mut acc = -6.0 * entry(p)?;
    for ax in axes {
        acc += entry(p + ax.scale(h))?;
        acc += entry(p - ax.scale(h))?;
    }
    Ok(acc / (h * h))
}

/// The ambient point `base + q⊗α`.
pub fn slice_point(base: &TargetPoint, alpha: &[i64], q: ImQuaternion) -> TargetPoint {
    let mut b = base.clone();
    for (c, &ac) in alpha.iter().enumerate() {
        b.set_column(c, b.column(c) + q.scale(ac as f64));
    }
    b
}

// ---------------------------------------------------------------------------
// Grid evaluation
// ---------------------------------------------------------------------------

/// A rectangular lattice of slice coordinates, iterated in lexicographic
/// axis order.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub from: [f64; 3],
    pub to: [f64; 3],
    pub counts: [usize; 3],
}

impl GridSpec {
    pub fn points(&self) -> Vec<ImQuaternion> {
        let coords = |axis: usize| -> Vec<f64> {
            let n = self.counts[axis].max(1);
            (0..n)
                .map(|i| {
                    if n == 1 {
                        self.from[axis]
                    } else {
                        self.from[axis]
                            + (self.to[axis] - self.from[axis]) * i as f64 / (n - 1) as f64
                    }
                })
                .collect()
        };
        let (xs, ys, zs) = (coords(0), coords(1), coords(2));
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push(ImQuaternion::new(x, y, z));
                }
            }
        }
        out
    }
}

pub fn potential_grid(
    s: &SlicePotential,
    points: &[ImQuaternion],
    tol: f64,
) -> Result<Vec<f64>, EvalError> {
    par::map_slice(points, |&p| potential_v(s, p, tol))
        .into_iter()
        .collect()
}

pub fn potential_grid_seq(
    s: &SlicePotential,
    points: &[ImQuaternion],
    tol: f64,
) -> Result<Vec<f64>, EvalError> {
    par::map_slice_seq(points, |&p| potential_v(s, p, tol))
        .into_iter()
        .collect()
}

pub fn metric_grid(
    a: &Arrangement,
    base: &TargetPoint,
    alpha: &[i64],
    points: &[ImQuaternion],
    tol: f64,
) -> Result<Vec<MetricSample>, EvalError> {
    par::map_slice(points, |&q| metric_matrix(a, &slice_point(base, alpha, q), tol))
        .into_iter()
        .collect()
}

pub fn metric_grid_seq(
    a: &Arrangement,
    base: &TargetPoint,
    alpha: &[i64],
    points: &[ImQuaternion],
    tol: f64,
) -> Result<Vec<MetricSample>, EvalError> {
    par::map_slice_seq(points, |&q| metric_matrix(a, &slice_point(base, alpha, q), tol))
        .into_iter()
        .collect()
}
