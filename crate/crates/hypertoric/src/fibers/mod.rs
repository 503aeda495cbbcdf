//! The SU(n) moment map on `T*ℂⁿ` (n = 2, 3) and exact classification of
//! its fibers.
//!
//! The action is `A·(z, w) = (Az, wA⁻¹)` for a column `z` and row `w`, with
//! moment map `μ(z, w) = ((i/2)(zz† − w†w)₀, (zw)₀)`. Fibers are invariant
//! under the anti-diagonal circle `(z, w) ↦ (e^{iθ}z, e^{-iθ}w)`, and every
//! fiber is a finite union of such circles, a single point (over the
//! origin), or empty.

pub mod cmat;
pub mod oracle;
pub mod patterns;
pub mod schur;

use num_complex::Complex64;
use thiserror::Error;

use cmat::{adjoint, frobenius, mat_vec, mul, outer, scale, sub, trace, traceless, vec_mat, CMat};
use patterns::BoundaryFlags;

#[derive(Debug, Error)]
pub enum FiberError {
    #[error("matrices must be square of equal size 2 or 3")]
    BadShape,
    #[error("alpha must be anti-Hermitian traceless (deviation {0:.3e})")]
    NotAntiHermitian(f64),
    #[error("beta must be traceless (deviation {0:.3e})")]
    NotTraceless(f64),
}

/// A point of `T*ℂⁿ`: column vector `z`, row covector `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl CotangentPoint {
    pub fn new(z: Vec<Complex64>, w: Vec<Complex64>) -> Self {
        assert_eq!(z.len(), w.len());
        CotangentPoint { z, w }
    }

    pub fn zero(n: usize) -> Self {
        CotangentPoint { z: vec![Complex64::new(0.0, 0.0); n], w: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Coordinate moduli `(|z_1|, …, |z_n|, |w_1|, …, |w_n|)`; circle
    /// components are separated by this profile.
    pub fn modulus_profile(&self) -> Vec<f64> {
        self.z.iter().chain(&self.w).map(|c| c.norm()).collect()
    }

    /// The anti-diagonal circle action at angle `theta`.
    pub fn phase_shifted(&self, theta: f64) -> CotangentPoint {
        let e = Complex64::from_polar(1.0, theta);
        CotangentPoint {
            z: self.z.iter().map(|v| v * e).collect(),
            w: self.w.iter().map(|v| v / e).collect(),
        }
    }
}

/// A target value `(α, β) ∈ su(n) ⊕ sl(n, ℂ)` of the moment map.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTarget {
    pub alpha: CMat,
    pub beta: CMat,
}

impl MomentTarget {
    pub fn new(alpha: CMat, beta: CMat) -> Result<Self, FiberError> {
        let n = alpha.len();
        if !(n == 2 || n == 3)
            || alpha.iter().any(|r| r.len() != n)
            || beta.len() != n
            || beta.iter().any(|r| r.len() != n)
        {
            return Err(FiberError::BadShape);
        }
        let scale = frobenius(&alpha).max(frobenius(&beta)).max(1.0);
        let anti = frobenius(&sub(&adjoint(&alpha), &scale_neg(&alpha)));
        if anti > 1e-12 * scale {
            return Err(FiberError::NotAntiHermitian(anti));
        }
        let ta = trace(&alpha).norm();
        let tb = trace(&beta).norm();
        if ta > 1e-12 * scale {
            return Err(FiberError::NotTraceless(ta));
        }
        if tb > 1e-12 * scale {
            return Err(FiberError::NotTraceless(tb));
        }
        Ok(MomentTarget { alpha, beta })
    }

    pub fn dimension(&self) -> usize {
        self.alpha.len()
    }

    pub fn norm(&self) -> f64 {
        (frobenius(&self.alpha).powi(2) + frobenius(&self.beta).powi(2)).sqrt()
    }

    /// Distance between two targets.
    pub fn distance(&self, other: &MomentTarget) -> f64 {
        (frobenius(&sub(&self.alpha, &other.alpha)).powi(2)
            + frobenius(&sub(&self.beta, &other.beta)).powi(2))
        .sqrt()
    }
}

fn scale_neg(a: &CMat) -> CMat {
    scale(a, Complex64::new(-1.0, 0.0))
}

/// The hyperKähler moment map `μ(z, w) = ((i/2)(zz† − w†w)₀, (zw)₀)`.
pub fn mu(p: &CotangentPoint) -> MomentTarget {
    let z_conj: Vec<Complex64> = p.z.iter().map(|v| v.conj()).collect();
    let w_conj: Vec<Complex64> = p.w.iter().map(|v| v.conj()).collect();
    let zzd = outer(&p.z, &z_conj);
    let wdw = outer(&w_conj, &p.w);
    let m = traceless(&sub(&zzd, &wdw));
    let alpha = scale(&m, Complex64::new(0.0, 0.5));
    let beta = traceless(&outer(&p.z, &p.w));
    MomentTarget { alpha, beta }
}

/// Adjoint action of a (special) unitary matrix on a target.
pub fn conjugate_target(t: &MomentTarget, a: &CMat) -> MomentTarget {
    let ad = adjoint(a);
    MomentTarget { alpha: mul(a, &mul(&t.alpha, &ad)), beta: mul(a, &mul(&t.beta, &ad)) }
}

/// The action `A·(z, w) = (Az, wA†)` for unitary `A`.
pub fn act(p: &CotangentPoint, a: &CMat) -> CotangentPoint {
    CotangentPoint { z: mat_vec(a, &p.z), w: vec_mat(&p.w, &adjoint(a)) }
}

/// Topological type of a fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberKind {
    Empty,
    Point,
    Circles(usize),
}

/// A classified fiber with verified witnesses (one per component).
#[derive(Debug, Clone)]
pub struct FiberReport {
    pub kind: FiberKind,
    pub witnesses: Vec<CotangentPoint>,
    /// Residuals `‖μ(witness) − target‖` per witness.
    pub residuals: Vec<f64>,
    /// Labels of the solution branches that fired.
    pub branch_path: Vec<String>,
    /// Set when a branch decision fell near its numeric threshold.
    pub boundary: bool,
}

impl FiberReport {
    pub fn component_count(&self) -> usize {
        match self.kind {
            FiberKind::Empty => 0,
            FiberKind::Point => 1,
            FiberKind::Circles(c) => c,
        }
    }
}

/// Triangularizes the target: returns `(u, t')` with `t'.beta = u·β·u†`
/// upper triangular, `u` special unitary with deterministic conventions,
/// and `t'.alpha = u·α·u†`.
pub fn triangularize(t: &MomentTarget) -> (CMat, MomentTarget) {
    let u = schur::special_unitary_triangularizer(&t.beta);
    let mut tt = conjugate_target(t, &u);
    // The transform is exact up to rounding; the lower triangle is zero by
    // construction.
    let n = tt.beta.len();
    for r in 0..n {
        for c in 0..r {
            tt.beta[r][c] = Complex64::new(0.0, 0.0);
        }
    }
    (u, tt)
}

const WITNESS_TOL: f64 = 1e-9;

/// Classifies the fiber `μ⁻¹(t)` exactly and returns verified witnesses.
pub fn classify(t: &MomentTarget) -> FiberReport {
    let n = t.dimension();
    let scale_t = t.norm();
    if scale_t <= 1e-12 {
        let origin = CotangentPoint::zero(n);
        let res = mu(&origin).distance(t);
        return FiberReport {
            kind: FiberKind::Point,
            witnesses: vec![origin],
            residuals: vec![res],
            branch_path: vec!["origin".into()],
            boundary: false,
        };
    }
    let (u, tt) = triangularize(t);
    let u_adj = adjoint(&u);
    let tol = 1e-10 * scale_t;
    let mut flags = BoundaryFlags::default();
    // G = −2i·α' is Hermitian traceless; symmetrize residual rounding away.
    let g = hermitian_part(&scale(&tt.alpha, Complex64::new(0.0, -2.0)));

    let accept = WITNESS_TOL * (1.0 + scale_t) * 0.1;
    let mut witnesses: Vec<CotangentPoint> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    let mut branch_path: Vec<String> = Vec::new();

    let mut push_candidate = |z: Vec<Complex64>, w: Vec<Complex64>, label: &str| {
        let cand = CotangentPoint::new(z, w);
        let res = mu(&cand).distance(&tt);
        if res <= accept {
            // Pull back to the original frame.
            let original = CotangentPoint {
                z: mat_vec(&u_adj, &cand.z),
                w: vec_mat(&cand.w, &u),
            };
            witnesses.push(original);
            residuals.push(res);
            branch_path.push(label.to_string());
            true
        } else {
            false
        }
    };

    for pat in patterns::compatible_patterns(&tt.beta, tol, &mut flags) {
        for (m, double) in patterns::solve_for_modulus(&pat, &g, tol) {
            let (z, w) = pat.point_at(m, n);
            let label = if double { format!("{} (double root)", pat.label) } else { pat.label.clone() };
            push_candidate(z, w, &label);
        }
    }
    if frobenius(&tt.beta) <= tol {
        for branch in patterns::rank_one_branches(&g, tol, &mut flags) {
            let (z, w) = branch.point_at(branch.magnitude, n);
            push_candidate(z, w, &branch.label);
        }
    }

    dedupe_components(&mut witnesses, &mut residuals, &mut branch_path);
    let kind = if witnesses.is_empty() { FiberKind::Empty } else { FiberKind::Circles(witnesses.len()) };
    debug_assert!(witnesses.len() <= 2, "more than two fiber components found");
    FiberReport { kind, witnesses, residuals, branch_path, boundary: flags.near_threshold }
}

fn hermitian_part(a: &CMat) -> CMat {
    let ad = adjoint(a);
    a.iter()
        .zip(&ad)
        .map(|(ra, rd)| ra.iter().zip(rd).map(|(x, y)| (x + y) / 2.0).collect())
        .collect()
}

pub(crate) fn dedupe_components(
    witnesses: &mut Vec<CotangentPoint>,
    residuals: &mut Vec<f64>,
    branch_path: &mut Vec<String>,
) {
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..witnesses.len() {
        let pi = witnesses[i].modulus_profile();
        let dup = keep.iter().any(|&j| {
            let pj = witnesses[j].modulus_profile();
            let d: f64 = pi.iter().zip(&pj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let s: f64 = pi.iter().sum::<f64>().max(1e-12);
            d <= 1e-8 * (1.0 + s)
        });
        if !dup {
            keep.push(i);
        }
    }
    *witnesses = keep.iter().map(|&i| witnesses[i].clone()).collect();
    *residuals = keep.iter().map(|&i| residuals[i]).collect();
    *branch_path = keep.iter().map(|&i| branch_path[i].clone()).collect();
}

/// SU(2) fiber classification.
pub fn classify_su2(t: &MomentTarget) -> FiberReport {
    assert_eq!(t.dimension(), 2);
    classify(t)
}

/// SU(3) fiber classification.
pub fn classify_su3(t: &MomentTarget) -> FiberReport {
    assert_eq!(t.dimension(), 3);
    classify(t)
}

/// Whether the target lies in the image of the moment map.
pub fn in_image(t: &MomentTarget) -> bool {
    classify(t).kind != FiberKind::Empty
}
