//! Numeric scanning oracle for fiber classification.
//!
//! Independent of the closed-form modulus solving: for each admissible
//! support pattern the residual `‖μ(x(m)) − t‖` is scanned over a log-spaced
//! grid of the single modulus and minima are polished by golden-section
//! search. Used in tests to validate [`super::classify`].

use num_complex::Complex64;

use super::cmat::{adjoint, frobenius, mat_vec, scale, vec_mat};
use super::patterns::{self, BoundaryFlags};
use super::{mu, triangularize, CotangentPoint, FiberKind, FiberReport, MomentTarget};

/// Classifies by residual scanning, counting distinct solution moduli.
pub fn oracle_classify(t: &MomentTarget, resolution: usize) -> FiberReport {
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
    let accept = 1e-9 * (1.0 + scale_t);
    let mut flags = BoundaryFlags::default();

    let mut witnesses = Vec::new();
    let mut residuals = Vec::new();
    let mut branch_path = Vec::new();
    let mut push = |cand: CotangentPoint, res: f64, label: String| {
        witnesses.push(CotangentPoint { z: mat_vec(&u_adj, &cand.z), w: vec_mat(&cand.w, &u) });
        residuals.push(res);
        branch_path.push(label);
    };

    for pat in patterns::compatible_patterns(&tt.beta, tol, &mut flags) {
        let eval = |m: f64| {
            let (z, w) = pat.point_at(m, n);
            mu(&CotangentPoint::new(z, w)).distance(&tt)
        };
        for m in scan_minima(&eval, resolution, accept) {
            let (z, w) = pat.point_at(m, n);
            let cand = CotangentPoint::new(z, w);
            push(cand, eval(m), format!("scan {}", pat.label));
        }
    }
    if frobenius(&tt.beta) <= tol {
        let g = hermitian(&scale(&tt.alpha, Complex64::new(0.0, -2.0)));
        for branch in patterns::rank_one_branches(&g, tol, &mut flags) {
            let eval = |m: f64| {
                let (z, w) = branch.point_at(m, n);
                mu(&CotangentPoint::new(z, w)).distance(&tt)
            };
            for m in scan_minima(&eval, resolution, accept) {
                let (z, w) = branch.point_at(m, n);
                push(CotangentPoint::new(z, w), eval(m), format!("scan {}", branch.label));
            }
        }
    }

    super::dedupe_components(&mut witnesses, &mut residuals, &mut branch_path);
    let kind = if witnesses.is_empty() { FiberKind::Empty } else { FiberKind::Circles(witnesses.len()) };
    FiberReport { kind, witnesses, residuals, branch_path, boundary: flags.near_threshold }
}

fn hermitian(a: &super::cmat::CMat) -> super::cmat::CMat {
    let ad = adjoint(a);
    a.iter()
        .zip(&ad)
        .map(|(ra, rd)| ra.iter().zip(rd).map(|(x, y)| (x + y) / 2.0).collect())
        .collect()
}

/// Log-grid scan of a residual function on `m ∈ [1e-8, 1e8]`, returning the
/// polished locations of minima whose residual drops below `accept`.
fn scan_minima(eval: &impl Fn(f64) -> f64, resolution: usize, accept: f64) -> Vec<f64> {
    let resolution = resolution.max(64);
    let (lo, hi) = (-8.0f64, 8.0f64);
    let grid: Vec<f64> = (0..resolution)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (resolution - 1) as f64))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&m| eval(m)).collect();
    let mut out = Vec::new();
    for i in 0..grid.len() {
        let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
        let right = if i + 1 == grid.len() { f64::INFINITY } else { values[i + 1] };
        if values[i] <= left && values[i] <= right {
            let a = if i == 0 { grid[0] / 10.0 } else { grid[i - 1] };
            let b = if i + 1 == grid.len() { grid[i] * 10.0 } else { grid[i + 1] };
            let m = golden_min(eval, a, b);
            if eval(m) <= accept {
                out.push(m);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * (1.0 + *b));
    out
}

fn golden_min(eval: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    // Search in log coordinates.
    let (mut lo, mut hi) = (a.ln(), b.ln());
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1.exp());
    let mut f2 = eval(x2.exp());
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1.exp());
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2.exp());
        }
        if (hi - lo).abs() <= 1e-14 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}
