//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its runtime. Tolerances and runtime caps are pinned in the
//! assertions.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypertoric::algebra::{ImQuaternion, Quaternion, TargetPoint};
use hypertoric::arrangement::{
    self, convergence_check, weight_normal_form, Arrangement, FamilyGenerator, Flat,
};
use hypertoric::exact::LevelVector;
use hypertoric::fibers::cmat::CMat;
use hypertoric::fibers::oracle::oracle_classify;
use hypertoric::fibers::{
    classify_su2, classify_su3, conjugate_target, mu, CotangentPoint, FiberKind, MomentTarget,
};
use hypertoric::lattice;
use hypertoric::modification::{iterate_ak, modify, scale, ScaleConvention};
use hypertoric::potential::{
    f_eval, harmonic_residual, metric_matrix, polyharmonic_residual, potential_v, r_k, s_k, slice,
    target_from_xz, SlicePotential,
};
use hypertoric::quotient::{fiber_point, zero_set_residual};
use hypertoric::NumericContext;

fn report(name: &str, started: Instant, cap_secs: f64, pass: bool) {
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion {name}: {} ({elapsed:.2}s, cap {cap_secs}s)",
        if pass && elapsed < cap_secs { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {name} failed");
    assert!(elapsed < cap_secs, "criterion {name} exceeded {cap_secs}s: {elapsed:.2}s");
}

fn rand_im(rng: &mut ChaCha8Rng, scale: f64) -> ImQuaternion {
    ImQuaternion::new(
        scale * (rng.gen::<f64>() - 0.5),
        scale * (rng.gen::<f64>() - 0.5),
        scale * (rng.gen::<f64>() - 0.5),
    )
}

fn rand_target(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> TargetPoint {
    TargetPoint::new((0..n).map(|_| rand_im(rng, scale)).collect())
}

fn flat(u: Vec<i64>, l: [i64; 3]) -> Flat {
    Flat::new(u, LevelVector::from_ints(l[0], l[1], l[2])).unwrap()
}

/// The finite-difference ratio-test at 100 points: |res(h)| ≤ K·h² and
/// res(1e-2)/res(5e-3) ∈ [3, 5] at 90% of the points.
fn ratio_test_points(
    rng: &mut ChaCha8Rng,
    s: &SlicePotential,
    points: usize,
    k_bound: f64,
) -> (usize, usize) {
    let mut ok = 0;
    let mut total = 0;
    let mut guard = 0;
    while total < points && guard < 100 * points {
        guard += 1;
        let p = rand_im(rng, 8.0);
        if s.distance_to_centers(p) < 0.5 {
            continue;
        }
        total += 1;
        let r1 = harmonic_residual(s, p, 1e-2, 1e-13).unwrap();
        let r2 = harmonic_residual(s, p, 5e-3, 1e-13).unwrap();
        assert!(r1.abs() <= k_bound * 1e-4, "residual bound violated: {r1}");
        assert!(r2.abs() <= k_bound * 2.5e-5, "residual bound violated: {r2}");
        if r2 != 0.0 && (3.0..=5.0).contains(&(r1.abs() / r2.abs())) {
            ok += 1;
        }
    }
    (ok, total)
}

#[test]
fn acceptance_01_harmonicity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    // |∂⁴(1/r)| ≤ 105/r⁵ per center: at distance ≥ ½ with ≤ 10 half-weight
    // centers the 7-point Laplacian truncation stays below ~4200·h²; K = 5000
    // bounds it with margin.
    let k_bound = 5000.0;
    let mut ok = 0;
    let mut total = 0;
    for _ in 0..20 {
        let count = rng.gen_range(1..=10);
        let c = f64::from(rng.gen_range(0..=1) as u8 as u32);
        let mut centers: Vec<ImQuaternion> = Vec::new();
        while centers.len() < count {
            let q = rand_im(&mut rng, 6.0);
            if centers.iter().all(|z| (*z - q).norm() > 0.2) {
                centers.push(q);
            }
        }
        let s = SlicePotential::from_centers(&centers, c);
        let (o, t) = ratio_test_points(&mut rng, &s, 100, k_bound);
        ok += o;
        total += t;
    }
    report("01 harmonicity", started, 5.0, ok * 10 >= total * 9);
}

fn random_tu_arrangement(rng: &mut ChaCha8Rng, n: usize) -> Arrangement {
    // Interval weights (consecutive ones) are closed under taking
    // determinants in {−1, 0, 1}.
    let mut pool: Vec<Vec<i64>> = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut u = vec![0i64; n];
            for e in u.iter_mut().take(j + 1).skip(i) {
                *e = 1;
            }
            pool.push(u);
        }
    }
    let mut flats = Vec::new();
    // Standard basis ensures span, then random extras with generic levels.
    for i in 0..n {
        let mut u = vec![0i64; n];
        u[i] = 1;
        flats.push(flat(u, [rng.gen_range(-9..9), rng.gen_range(-9..9), rng.gen_range(1..9)]));
    }
    for _ in 0..rng.gen_range(1..=3) {
        let u = pool[rng.gen_range(0..pool.len())].clone();
        let sign = if rng.gen::<bool>() { 1 } else { -1 };
        let u: Vec<i64> = u.iter().map(|&x| sign * x).collect();
        let f = flat(u, [rng.gen_range(-9..9), rng.gen_range(-9..9), rng.gen_range(1..9)]);
        if !flats.iter().any(|g| g.same_subspace(&f)) {
            flats.push(f);
        }
    }
    let mut tn = vec![vec![0.0; n]; n];
    for (i, row) in tn.iter_mut().enumerate() {
        row[i] = rng.gen::<f64>();
    }
    Arrangement::new(n, flats, vec![], tn).unwrap()
}

#[test]
fn acceptance_02_polyharmonicity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut ok = 0;
    let mut total = 0;
    let arrangements: Vec<Arrangement> =
        (0..5).map(|i| random_tu_arrangement(&mut rng, 1 + (i % 3))).collect();
    for slice_idx in 0..20 {
        let a = &arrangements[slice_idx % arrangements.len()];
        let n = a.dimension;
        let base = rand_target(&mut rng, n, 0.4);
        let mut alpha = vec![0i64; n];
        alpha[rng.gen_range(0..n)] = if rng.gen::<bool>() { 1 } else { -1 };
        if n > 1 && rng.gen::<bool>() {
            alpha[rng.gen_range(0..n)] = rng.gen_range(-1..=1);
        }
        if alpha.iter().all(|&x| x == 0) {
            alpha[0] = 1;
        }
        let Ok(sliced) = slice(a, &base, &alpha) else { continue };
        let mut sampled = 0;
        let mut guard = 0;
        while sampled < 4 && guard < 200 {
            guard += 1;
            let q = rand_im(&mut rng, 8.0);
            if sliced.distance_to_centers(q) < 0.6 {
                continue;
            }
            sampled += 1;
            for i in 0..n {
                for j in i..n {
                    let r1 =
                        polyharmonic_residual(a, &base, &alpha, i, j, q, 1e-2, 1e-13).unwrap();
                    let r2 =
                        polyharmonic_residual(a, &base, &alpha, i, j, q, 5e-3, 1e-13).unwrap();
                    total += 1;
                    if r2 != 0.0 && (3.0..=5.0).contains(&(r1.abs() / r2.abs())) {
                        ok += 1;
                    } else if r1.abs() <= 1e-10 && r2.abs() <= 1e-10 {
                        // Constant entries (orthogonal weights) are exactly
                        // harmonic; the ratio is 0/0.
                        ok += 1;
                    }
                }
            }
        }
    }
    report("02 polyharmonicity", started, 30.0, total > 100 && ok * 10 >= total * 9);
}

#[test]
fn acceptance_03_metric_vs_generating_function() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let arrangements = vec![
        Arrangement::new(
            2,
            vec![flat(vec![1, 0], [0, 0, 0]), flat(vec![0, 1], [1, 0, 2]), flat(vec![1, 1], [0, 3, 0])],
            vec![],
            vec![vec![1.0, 0.2], vec![0.2, 0.7]],
        )
        .unwrap(),
        Arrangement::new(
            3,
            vec![
                flat(vec![1, 0, 0], [0, 0, 0]),
                flat(vec![0, 1, 0], [2, 0, 0]),
                flat(vec![0, 0, 1], [0, 2, 0]),
                flat(vec![1, 1, 1], [0, 0, 2]),
            ],
            vec![],
            vec![vec![0.5, 0.1, 0.0], vec![0.1, 0.4, 0.1], vec![0.0, 0.1, 0.6]],
        )
        .unwrap(),
    ];
    let e = ImQuaternion::new(1.0, 0.0, 0.0);
    let h = 1e-4;
    let mut checked = 0;
    let mut pass = true;
    'outer: while checked < 100 {
        let a = &arrangements[checked % 2];
        let n = a.dimension;
        let x: Vec<f64> = (0..n).map(|_| 6.0 * (rng.gen::<f64>() - 0.5)).collect();
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(6.0 * (rng.gen::<f64>() - 0.5), 6.0 * (rng.gen::<f64>() - 0.5)))
            .collect();
        let b = target_from_xz(&x, &z, e);
        if a.flats.iter().any(|f| r_k(&b, f) < 0.5 || s_k(&b, f, e) + r_k(&b, f) < 0.5) {
            continue;
        }
        let closed = metric_matrix(a, &b, 1e-12).unwrap().v;
        for i in 0..n {
            for j in 0..n {
                let mut xs = x.clone();
                let f_at = |xs: &[f64]| f_eval(a, xs, &z, e, 1e-12).unwrap();
                let fd = if i == j {
                    let f0 = f_at(&xs);
                    xs[i] = x[i] + h;
                    let fp = f_at(&xs);
                    xs[i] = x[i] - h;
                    let fm = f_at(&xs);
                    (fp - 2.0 * f0 + fm) / (h * h)
                } else {
                    xs[i] = x[i] + h;
                    xs[j] = x[j] + h;
                    let fpp = f_at(&xs);
                    xs[j] = x[j] - h;
                    let fpm = f_at(&xs);
                    xs[i] = x[i] - h;
                    xs[j] = x[j] + h;
                    let fmp = f_at(&xs);
                    xs[j] = x[j] - h;
                    let fmm = f_at(&xs);
                    (fpp - fpm - fmp + fmm) / (4.0 * h * h)
                };
                if (fd - closed[i][j]).abs() > 1e-6 * (1.0 + closed[i][j].abs()) {
                    pass = false;
                    break 'outer;
                }
            }
        }
        checked += 1;
    }
    report("03 metric matches generating-function Hessian", started, 10.0, pass && checked == 100);
}

#[test]
fn acceptance_04_convergence_lemma() {
    let started = Instant::now();
    // Accepted: λ̂_k = k² along a fixed axis (p = 2).
    let hattori = Arrangement::without_taub_nut(
        1,
        vec![],
        vec![FamilyGenerator::new(
            vec![1],
            ImQuaternion::ZERO,
            ImQuaternion::new(-1.0, 0.0, 0.0),
            1.0,
            2.0,
        )
        .unwrap()],
    )
    .unwrap();
    let r = convergence_check(&hattori, 1e-8, 10.0);
    let w = r.families[0].witness.as_ref().unwrap();
    let accepted = r.all_converge && w.n_terms <= 10_000 && w.tail_error_bound < 1e-8;

    // Rejected: linear growth (p = 1), partial sums exceed 10.
    let linear = Arrangement::without_taub_nut(
        1,
        vec![],
        vec![FamilyGenerator::new(
            vec![1],
            ImQuaternion::ZERO,
            ImQuaternion::new(1.0, 0.0, 0.0),
            0.5,
            1.0,
        )
        .unwrap()],
    )
    .unwrap();
    let r = convergence_check(&linear, 1e-8, 10.0);
    let d = r.families[0].divergence.as_ref().unwrap();
    let rejected = !r.all_converge && d.partial_sum > 10.0 && d.n_terms <= 30_000;

    report("04 convergence lemma", started, 5.0, accepted && rejected);
}

#[test]
fn acceptance_05_weight_finiteness() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut pass = true;
    for case in 0..100 {
        let n = 1 + case % 4;
        let base = random_tu_arrangement(&mut rng, n);
        // Transport through a random unimodular change of coordinates.
        let ops: Vec<(usize, usize, i64)> = (0..4)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(-2..=2)))
            .collect();
        let u_mat = lattice::unimodular_from_shears(n, &ops);
        let a = base.transform_weights(&u_mat).unwrap();

        // Independent oracle: every linearly independent n-subset of the
        // distinct weights must have determinant ±1.
        let weights = a.distinct_weights();
        let mut idx: Vec<usize> = (0..n).collect();
        if weights.len() >= n {
            loop {
                let sub: Vec<Vec<i64>> = idx.iter().map(|&i| weights[i].clone()).collect();
                let det = lattice::det_int(&sub);
                use num::Signed;
                if !num::Zero::is_zero(&det) && det.abs() != num::BigInt::from(1) {
                    pass = false;
                }
                if !advance(&mut idx, weights.len()) {
                    break;
                }
            }
        }

        let nf = weight_normal_form(&a).unwrap();
        pass &= nf.all_in_unit_box;
        pass &= nf.classified.len() <= 3usize.pow(n as u32);
        if !pass {
            break;
        }
    }
    report("05 weight finiteness", started, 10.0, pass);
}

fn advance(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] + 1 <= m - (k - i) {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[test]
fn acceptance_06_fiber_point_witnesses() {
    let started = Instant::now();
    let ctx = NumericContext::default();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let arrangements = vec![
        Arrangement::without_taub_nut(1, vec![flat(vec![1], [0, 0, 0])], vec![]).unwrap(),
        Arrangement::without_taub_nut(
            1,
            vec![flat(vec![1], [0, 0, 0]), flat(vec![1], [1, 0, 0])],
            vec![],
        )
        .unwrap(),
        Arrangement::without_taub_nut(
            2,
            vec![
                flat(vec![1, 0], [0, 0, 0]),
                flat(vec![0, 1], [1, 0, 0]),
                flat(vec![1, 1], [0, 2, 0]),
            ],
            vec![],
        )
        .unwrap(),
        Arrangement::without_taub_nut(
            2,
            vec![
                flat(vec![1, 0], [-1, 0, 0]),
                flat(vec![1, 0], [-4, 0, 0]),
                flat(vec![1, 1], [0, 0, 0]),
                flat(vec![0, -1], [0, 0, 0]),
            ],
            vec![],
        )
        .unwrap(),
        Arrangement::without_taub_nut(
            3,
            vec![
                flat(vec![1, 0, 0], [0, 0, 0]),
                flat(vec![0, 1, 0], [1, 0, 0]),
                flat(vec![0, 0, 1], [0, 1, 0]),
                flat(vec![1, 1, 1], [0, 0, 1]),
            ],
            vec![],
        )
        .unwrap(),
    ];
    let mut pass = true;
    for a in &arrangements {
        // Validated smooth data.
        assert!(arrangement::condition_a(a, &ctx).pass);
        assert!(arrangement::condition_b(a, &ctx).pass);
        let m = a.flats.len();
        for _ in 0..1000 {
            let b = rand_target(&mut rng, a.dimension, 8.0);
            let phases: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
            let x = fiber_point(a, &b, &phases).unwrap();
            let (best, residual) = zero_set_residual(a, &x).unwrap();
            pass &= residual <= 1e-10;
            for i in 0..a.dimension {
                pass &= (best.column(i) - b.column(i)).norm() <= 1e-10;
            }
        }
        // Target exactly on the zero-level flats: those coordinates vanish
        // exactly.
        let b = TargetPoint::zeros(a.dimension);
        let x = fiber_point(a, &b, &vec![0.0; m]).unwrap();
        let (_, residual) = zero_set_residual(a, &x).unwrap();
        pass &= residual <= 1e-10;
        for (k, f) in a.flats.iter().enumerate() {
            if f.lambda_f64() == ImQuaternion::ZERO {
                pass &= x.coords[k] == Quaternion::ZERO;
            }
        }
    }
    report("06 zero-set witnesses", started, 5.0, pass);
}

fn random_cotangent(rng: &mut ChaCha8Rng, n: usize) -> CotangentPoint {
    CotangentPoint::new(
        (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect(),
        (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect(),
    )
}

fn random_su2_element_target(rng: &mut ChaCha8Rng) -> MomentTarget {
    let h = rng.gen::<f64>() - 0.5;
    let eta = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let g = vec![vec![Complex64::new(h, 0.0), eta], vec![eta.conj(), Complex64::new(-h, 0.0)]];
    let lam = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let xi = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let rho = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let alpha: CMat = g
        .iter()
        .map(|r| r.iter().map(|x| Complex64::new(0.0, 0.5) * x).collect())
        .collect();
    MomentTarget::new(alpha, vec![vec![lam, xi], vec![rho, -lam]]).unwrap()
}

#[test]
fn acceptance_07_su2_classifier_vs_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut pass = true;
    for _ in 0..200 {
        let t = mu(&random_cotangent(&mut rng, 2));
        let r = classify_su2(&t);
        let o = oracle_classify(&t, 1024);
        pass &= r.kind == o.kind;
        pass &= r.kind != FiberKind::Empty;
        for w in &r.witnesses {
            pass &= mu(w).distance(&t) <= 1e-9 * (1.0 + t.norm());
        }
    }
    for _ in 0..200 {
        let t = random_su2_element_target(&mut rng);
        let r = classify_su2(&t);
        let o = oracle_classify(&t, 1024);
        pass &= r.kind == o.kind;
        for w in &r.witnesses {
            pass &= mu(w).distance(&t) <= 1e-9 * (1.0 + t.norm());
        }
    }
    let zero = MomentTarget::new(
        vec![vec![Complex64::new(0.0, 0.0); 2]; 2],
        vec![vec![Complex64::new(0.0, 0.0); 2]; 2],
    )
    .unwrap();
    pass &= classify_su2(&zero).kind == FiberKind::Point;
    report("07 su2 classifier vs oracle", started, 60.0, pass);
}

#[test]
fn acceptance_08i_su3_disconnected_fiber() {
    let started = Instant::now();
    // Nilpotent β with ξ₁ = 1 and a large first diagonal α-entry, so the
    // first diagonal moment equation 2m + 1/m = 3g₁ has two roots (m = 2 and
    // m = 1/4); the claimed classification is a disjoint pair of circles.
    let g1 = 1.5;
    let beta: CMat = vec![
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0); 3],
        vec![Complex64::new(0.0, 0.0); 3],
    ];
    let m = 2.0;
    let g = [g1, -(m + 2.0 / m) / 3.0, (-m + 1.0 / m) / 3.0];
    let alpha: CMat = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    if i == j {
                        Complex64::new(0.0, 0.5 * g[i])
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let t = MomentTarget::new(alpha, beta).unwrap();
    let r = classify_su3(&t);
    let pass = r.kind == FiberKind::Circles(2);
    println!(
        "  observed kind: {:?} (oracle: {:?})",
        r.kind,
        oracle_classify(&t, 4096).kind
    );
    report("08i su3 disconnected fiber", started, 120.0, pass);
}

#[test]
fn acceptance_08ii_su3_random_targets_empty() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut pass = true;
    for _ in 0..1000 {
        let t = random_su3_gaussian(&mut rng);
        pass &= classify_su3(&t).kind == FiberKind::Empty;
    }
    report("08ii su3 non-surjectivity", started, 120.0, pass);
}

fn random_su3_gaussian(rng: &mut ChaCha8Rng) -> MomentTarget {
    let n = 3;
    let raw: CMat = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect()
        })
        .collect();
    let mut alpha = hypertoric::fibers::cmat::sub(&raw, &hypertoric::fibers::cmat::adjoint(&raw));
    let tr = hypertoric::fibers::cmat::trace(&alpha) / n as f64;
    for i in 0..n {
        alpha[i][i] -= tr;
    }
    let mut beta: CMat = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect()
        })
        .collect();
    let trb = hypertoric::fibers::cmat::trace(&beta) / n as f64;
    for i in 0..n {
        beta[i][i] -= trb;
    }
    MomentTarget::new(alpha, beta).unwrap()
}

#[test]
fn acceptance_08iii_su3_case1_relation_violation_empty() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut pass = true;
    let mut tested = 0;
    while tested < 50 {
        // Upper-triangular β with both superdiagonal entries nonzero, levels
        // in the ±½λ₂ pattern, ζ random: reject draws satisfying either
        // 3λ₂ξ₂ = 2ξ₁ζ or the product relation 3λ₂ζ = 2ξ₁ξ₂.
        let lam2 = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let xi1 = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let xi2 = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let zeta = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        if (3.0 * lam2 * xi2 - 2.0 * xi1 * zeta).norm() < 1e-2
            || (3.0 * lam2 * zeta - 2.0 * xi1 * xi2).norm() < 1e-2
        {
            continue;
        }
        tested += 1;
        let half = -lam2 / 2.0;
        let beta: CMat = vec![
            vec![half, xi1, zeta],
            vec![Complex64::new(0.0, 0.0), lam2, xi2],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), half],
        ];
        let alpha = random_su3_gaussian(&mut rng).alpha;
        let t = MomentTarget::new(alpha, beta).unwrap();
        pass &= classify_su3(&t).kind == FiberKind::Empty;
    }
    report("08iii su3 case-1 relation violations empty", started, 120.0, pass);
}

#[test]
fn acceptance_08iv_su3_conjugation_invariance() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut pass = true;
    let mut targets: Vec<MomentTarget> = Vec::new();
    for _ in 0..5 {
        targets.push(mu(&random_cotangent(&mut rng, 3)));
        targets.push(random_su3_gaussian(&mut rng));
    }
    for t in &targets {
        let base = classify_su3(t).kind;
        for _ in 0..20 {
            let a = random_su_matrix(&mut rng, 3);
            pass &= classify_su3(&conjugate_target(t, &a)).kind == base;
        }
    }
    report("08iv su3 conjugation invariance", started, 120.0, pass);
}

fn random_su_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    let mut q: CMat = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
    let d = hypertoric::fibers::cmat::det(&q);
    let corr = d.conj() / d.norm();
    for r in 0..n {
        q[r][0] *= corr;
    }
    q
}

#[test]
fn acceptance_09_ak_iteration() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut pass = true;
    // Iterated modification of the single-flat arrangement.
    let mut a = Arrangement::without_taub_nut(1, vec![flat(vec![1], [0, 0, 0])], vec![]).unwrap();
    for k in 1..=5usize {
        let new_flat = flat(vec![1], [k as i64, 0, 0]);
        let before = slice(&a, &TargetPoint::zeros(1), &[1]).unwrap();
        let added = new_flat.lambda_f64();
        a = modify(&a, new_flat).unwrap();
        let after = slice(&a, &TargetPoint::zeros(1), &[1]).unwrap();
        pass &= after.points.len() == k + 1;
        // A_k report with the same centers.
        let centers: Vec<ImQuaternion> = after.points.iter().map(|(q, _)| *q).collect();
        let (_, report_ak) = iterate_ak(k, &centers, 0.0).unwrap();
        pass &= report_ak.b2 == Some(k);
        // Additivity of the potential at 100 points.
        for _ in 0..100 {
            let p = rand_im(&mut rng, 10.0);
            let (Ok(vb), Ok(va)) = (potential_v(&before, p, 1e-12), potential_v(&after, p, 1e-12))
            else {
                continue;
            };
            let single = 0.5 / (p - added).norm();
            pass &= (va - vb - single).abs() <= 1e-12 * (1.0 + va.abs());
        }
    }
    report("09 multi-center iteration", started, 5.0, pass);
}

#[test]
fn acceptance_10_scaling_identity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let a = Arrangement::new(
        1,
        vec![flat(vec![1], [0, 0, 0]), flat(vec![1], [2, 0, 0]), flat(vec![1], [0, 1, 1])],
        vec![],
        vec![vec![0.75]],
    )
    .unwrap();
    let s = slice(&a, &TargetPoint::zeros(1), &[1]).unwrap();
    let mut pass = true;
    for c in [0.5, 2.0, 10.0] {
        let scaled = scale(&a, c, ScaleConvention::default()).unwrap();
        let ss = slice(&scaled, &TargetPoint::zeros(1), &[1]).unwrap();
        let mut checked = 0;
        while checked < 100 {
            let p = rand_im(&mut rng, 8.0);
            let Ok(v) = potential_v(&s, p, 1e-12) else { continue };
            let Ok(vs) = potential_v(&ss, p.scale(c), 1e-12) else { continue };
            pass &= (vs - v / c).abs() <= 1e-12 * (1.0 + (v / c).abs());
            checked += 1;
        }
    }
    report("10 scaling identity", started, 5.0, pass);
}
