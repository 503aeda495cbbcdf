//! Integral estimates for tails of monomial-family series.
//!
//! Series of the form `Σ_k f(k)` with `f(x) ~ coeff·x^{-p}`, `p > 1`, are
//! certified by the monotone sandwich `∫_{N+1}^∞ f ≤ Σ_{k>N} f(k) ≤ ∫_N^∞ f`,
//! so the midpoint of the two integrals estimates the tail with rigorous
//! error at most half the unit-cell integral `∫_N^{N+1} f`.

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `∫_n^{n+1} f(x) dx`.
pub fn integral_over_unit_cell(f: &impl Fn(f64) -> f64, n: f64) -> f64 {
    let scale = f(n).abs().max(1e-300);
    adaptive_simpson(&|x| f(x), n, n + 1.0, 1e-13 * scale)
}

/// `∫_n^∞ f(x) dx` for integrands with `f(x) → coeff·x^{-p}` as `x → ∞`
/// (`p > 1`). Computed by the substitution `x = n·t^{-1/(p-1)}`, which maps
/// the ray onto `(0, 1]` with a bounded integrand.
pub fn integral_to_infinity(f: &impl Fn(f64) -> f64, n: f64, p: f64, coeff: f64) -> f64 {
    assert!(p > 1.0, "power-law tail integral needs p > 1");
    assert!(n > 0.0);
    let q = 1.0 / (p - 1.0);
    let limit = coeff * n.powf(1.0 - p) / (p - 1.0);
    let h = |t: f64| {
        if t <= 0.0 {
            return limit;
        }
        let x = n * t.powf(-q);
        if !x.is_finite() {
            return limit;
        }
        (n * q) * f(x) * t.powf(-p * q)
    };
    let scale = limit.abs().max(h(1.0).abs()).max(1e-300);
    adaptive_simpson(&|t| h(t), 0.0, 1.0, 1e-13 * scale)
}

/// Tail sum `Σ_{k>n} f(k)` as `(estimate, error_bound)` for eventually
/// decreasing `f` with power-law decay `coeff·x^{-p}`.
pub fn tail_sum(f: &impl Fn(f64) -> f64, n: u64, p: f64, coeff: f64) -> (f64, f64) {
    let upper = integral_to_infinity(f, n as f64, p, coeff);
    let cell = integral_over_unit_cell(f, n as f64);
    let lower = upper - cell;
    (0.5 * (upper + lower), 0.5 * cell)
}

/// Smallest `n ≥ monotone_from` (up to `cap`) whose tail-estimate error
/// bound `∫_n^{n+1} f / 2` is at most `tol`.
pub fn minimal_tail_index(
    f: &impl Fn(f64) -> f64,
    monotone_from: u64,
    tol: f64,
    cap: u64,
) -> u64 {
    let err_at = |n: u64| integral_over_unit_cell(f, n as f64) / 2.0;
    let mut hi = monotone_from.max(4);
    while err_at(hi) > tol && hi < cap {
        hi = (hi * 2).min(cap);
    }
    if err_at(hi) > tol {
        return cap;
    }
    let mut lo = monotone_from.max(4);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if err_at(mid) <= tol {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    hi
}

/// A fully summed series value with a rigorous error bound.
#[derive(Debug, Clone, Copy)]
pub struct CertifiedSum {
    pub n_terms: u64,
    pub value: f64,
    pub error_bound: f64,
}

/// `Σ_{k≥1} f(k)` for positive `f`, decreasing beyond `monotone_from`, with
/// decay `coeff·x^{-p}` (`p > 1`): explicit partial sum plus an integral
/// sandwich tail estimate.
pub fn certified_series_sum(
    f: &impl Fn(f64) -> f64,
    p: f64,
    coeff: f64,
    monotone_from: u64,
    tol: f64,
    cap: u64,
) -> CertifiedSum {
    let n = minimal_tail_index(f, monotone_from, tol, cap);
    let mut partial = 0.0;
    for k in 1..=n {
        partial += f(k as f64);
    }
    let (tail, err) = tail_sum(f, n, p, coeff);
    CertifiedSum { n_terms: n, value: partial + tail, error_bound: err }
}
