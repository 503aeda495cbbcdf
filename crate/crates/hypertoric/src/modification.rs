//! Arrangement-level transforms: modification (adding a flat), Taub-NUT
//! deformation, metric scaling, A_k iteration, and cut-region reports.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::ImQuaternion;
use crate::arrangement::{Arrangement, ArrangementError, Flat};
use crate::exact::LevelVector;
use crate::potential::SlicePotential;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("new flat duplicates an existing flat")]
    DuplicateFlat,
    #[error("scale constant must be positive")]
    BadScale,
    #[error("deformation matrix must be symmetric positive semidefinite")]
    BadDeformation,
    #[error("A_k construction needs k+1 distinct points")]
    BadPoints,
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// Adds one flat to the arrangement. Nothing is removed: on the original
/// moment image this only introduces one new singular point, and potentials
/// change additively by the single-center term of the new flat.
pub fn modify(a: &Arrangement, f: Flat) -> Result<Arrangement, TransformError> {
    if a.flats.iter().any(|g| g.same_subspace(&f)) {
        return Err(TransformError::DuplicateFlat);
    }
    let mut flats = a.flats.clone();
    flats.push(f);
    Ok(Arrangement::new(a.dimension, flats, a.families.clone(), a.taub_nut.clone())?)
}

/// Report of an A_k multi-center construction.
#[derive(Debug, Clone, Serialize)]
pub struct AkReport {
    pub center_count: usize,
    /// Second Betti number `|Z| − 1`, absent for the centerless case.
    pub b2: Option<usize>,
    /// `c = 0`, finite nonempty centers: the multi-instanton family.
    pub gibbons_hawking: bool,
    /// `c > 0`, finite nonempty centers.
    pub multi_taub_nut: bool,
    /// `c > 0` with no centers: the circle × 3-space geometry.
    pub circle_times_r3: bool,
}

/// Builds the A_k potential with the given `k+1` distinct centers and
/// constant `c`.
pub fn iterate_ak(
    k: usize,
    points: &[ImQuaternion],
    c: f64,
) -> Result<(SlicePotential, AkReport), TransformError> {
    if points.len() != k + 1 {
        return Err(TransformError::BadPoints);
    }
    multi_center(points, c)
}

/// Multi-center potential over arbitrary distinct centers (possibly none).
pub fn multi_center(
    points: &[ImQuaternion],
    c: f64,
) -> Result<(SlicePotential, AkReport), TransformError> {
    if c < 0.0 {
        return Err(TransformError::BadScale);
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() <= 1e-12 * (1.0 + points[i].norm()) {
                return Err(TransformError::BadPoints);
            }
        }
    }
    let s = SlicePotential::from_centers(points, c);
    let report = AkReport {
        center_count: points.len(),
        b2: if points.is_empty() { None } else { Some(points.len() - 1) },
        gibbons_hawking: c == 0.0 && !points.is_empty(),
        multi_taub_nut: c > 0.0 && !points.is_empty(),
        circle_times_r3: c > 0.0 && points.is_empty(),
    };
    Ok((s, report))
}

/// Adds a symmetric PSD matrix to the Taub-NUT term; the metric matrix
/// shifts by exactly this constant.
pub fn taub_nut_deform(a: &Arrangement, c: &[Vec<f64>]) -> Result<Arrangement, TransformError> {
    let n = a.dimension;
    if c.len() != n || c.iter().any(|r| r.len() != n) {
        return Err(TransformError::BadDeformation);
    }
    for r in 0..n {
        for s in 0..n {
            if (c[r][s] - c[s][r]).abs() > 1e-12 {
                return Err(TransformError::BadDeformation);
            }
        }
    }
    let mut tn = a.taub_nut.clone();
    for r in 0..n {
        for s in 0..n {
            tn[r][s] += c[r][s];
        }
    }
    Arrangement::new(a.dimension, a.flats.clone(), a.families.clone(), tn)
        .map_err(|_| TransformError::BadDeformation)
}

/// How scaled levels relate to the original ones when the metric is scaled
/// by `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScaleConvention {
    /// Moment image scales by `C`, so levels map to `C·λ` (and centers to
    /// `C·q`); the constant becomes `c/C`. Under this convention
    /// `V'(C·p) = V(p)/C` holds pointwise.
    PointsTimesC,
    /// Levels map to `λ/C`; the convention matching a metric scaling by
    /// `1/C`.
    PointsOverC,
}

impl Default for ScaleConvention {
    fn default() -> Self {
        ScaleConvention::PointsTimesC
    }
}

/// Scales the arrangement data for a metric scaled by `C > 0`: the constant
/// term becomes `c/C` and the levels move per the convention.
pub fn scale(
    a: &Arrangement,
    c: f64,
    convention: ScaleConvention,
) -> Result<Arrangement, TransformError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(TransformError::BadScale);
    }
    let factor = match convention {
        ScaleConvention::PointsTimesC => c,
        ScaleConvention::PointsOverC => 1.0 / c,
    };
    let factor_rat = float_to_rational(factor);
    let flats = a
        .flats
        .iter()
        .map(|f| Flat {
            u: f.u.clone(),
            lambda: match &factor_rat {
                Some(fr) => f.lambda.scaled_rational(fr),
                None => LevelVector::from_f64(f.lambda_f64().scale(factor)),
            },
        })
        .collect();
    let families = a
        .families
        .iter()
        .map(|f| crate::arrangement::FamilyGenerator {
            u: f.u.clone(),
            base: f.base.scale(factor),
            direction: f.direction,
            scale: f.scale * factor,
            power: f.power,
        })
        .collect();
    let tn = a
        .taub_nut
        .iter()
        .map(|r| r.iter().map(|x| x / c).collect())
        .collect();
    Ok(Arrangement::new(a.dimension, flats, families, tn)?)
}

fn float_to_rational(x: f64) -> Option<num::rational::BigRational> {
    use num::bigint::BigInt;
    use num::rational::BigRational;
    if x == x.trunc() && x.abs() < 1e15 {
        return Some(BigRational::from_integer(BigInt::from(x as i64)));
    }
    let recip = 1.0 / x;
    if recip == recip.trunc() && recip.abs() < 1e15 {
        return Some(BigRational::new(BigInt::from(1), BigInt::from(recip as i64)));
    }
    None
}

/// Half-open interval of the real moment image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }
}

/// Regions of the toy cut: the circle action on ℂ with moment map
/// `z ↦ |z|²` and image `[0, ∞)`.
#[derive(Debug, Clone, Serialize)]
pub struct CutRegionReport {
    /// Points with moment value below the level: removed by the cut.
    pub removed: Interval,
    /// The level set that is collapsed by the circle.
    pub collapsed: Option<f64>,
    /// Points above the level: untouched.
    pub unchanged: Interval,
    /// Whether anything at all is removed (always false for the
    /// quaternionic modification).
    pub removes_points: bool,
}

/// The symplectic-cut region decomposition at level `epsilon`.
pub fn cut_region(epsilon: f64) -> CutRegionReport {
    let removed = Interval { lo: 0.0, hi: epsilon.max(0.0) };
    let collapsed = if epsilon >= 0.0 { Some(epsilon) } else { None };
    CutRegionReport {
        removed,
        collapsed,
        unchanged: Interval { lo: epsilon.max(0.0), hi: f64::INFINITY },
        removes_points: !Interval { lo: 0.0, hi: epsilon.max(0.0) }.is_empty(),
    }
}

/// The corresponding report for the quaternionic modification: the moment
/// image is all of ℝ³ and nothing is removed; only the level set collapses.
pub fn modification_region(epsilon: f64) -> CutRegionReport {
    CutRegionReport {
        removed: Interval { lo: 0.0, hi: 0.0 },
        collapsed: Some(epsilon),
        unchanged: Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY },
        removes_points: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TargetPoint;
    use crate::context::NumericContext;
    use crate::exact::LevelVector;
    use crate::potential::{potential_v, slice};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(u: Vec<i64>, l: [i64; 3]) -> Flat {
        Flat::new(u, LevelVector::from_ints(l[0], l[1], l[2])).unwrap()
    }

    fn flat_h() -> Arrangement {
        Arrangement::without_taub_nut(1, vec![flat(vec![1], [0, 0, 0])], vec![]).unwrap()
    }

    fn rand_im(rng: &mut ChaCha8Rng, scale: f64) -> ImQuaternion {
        ImQuaternion::new(
            scale * (rng.gen::<f64>() - 0.5),
            scale * (rng.gen::<f64>() - 0.5),
            scale * (rng.gen::<f64>() - 0.5),
        )
    }

    #[test]
    fn modify_appends_and_rejects_duplicates() {
        let a = flat_h();
        let b = modify(&a, flat(vec![1], [1, 0, 0])).unwrap();
        assert_eq!(b.flats.len(), 2);
        assert!(matches!(modify(&b, flat(vec![1], [1, 0, 0])), Err(TransformError::DuplicateFlat)));
    }

    #[test]
    fn modify_adds_single_center_to_sliced_potential() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = flat_h();
        let eps = ImQuaternion::new(1.0, 2.0, -0.5);
        let b = modify(&a, Flat::with_f64_level(vec![1], eps).unwrap()).unwrap();
        let sa = slice(&a, &TargetPoint::zeros(1), &[1]).unwrap();
        let sb = slice(&b, &TargetPoint::zeros(1), &[1]).unwrap();
        for _ in 0..100 {
            let p = rand_im(&mut rng, 8.0);
            let va = match potential_v(&sa, p, 1e-12) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let vb = match potential_v(&sb, p, 1e-12) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let single = 0.5 / (p - eps).norm();
            assert!((vb - va - single).abs() <= 1e-12 * (1.0 + vb.abs()));
        }
    }

    #[test]
    fn iterated_modification_counts_centers() {
        let mut a = flat_h();
        for k in 1..=5 {
            a = modify(&a, flat(vec![1], [k, 0, 0])).unwrap();
            let s = slice(&a, &TargetPoint::zeros(1), &[1]).unwrap();
            assert_eq!(s.points.len(), k as usize + 1);
        }
    }

    #[test]
    fn ak_reports() {
        let pts = vec![ImQuaternion::ZERO];
        let (_, r) = iterate_ak(0, &pts, 0.0).unwrap();
        assert_eq!(r.b2, Some(0));
        assert!(r.gibbons_hawking && !r.multi_taub_nut);

        let pts = vec![ImQuaternion::ZERO, ImQuaternion::new(1.0, 0.0, 0.0)];
        let (_, r) = iterate_ak(1, &pts, 0.0).unwrap();
        assert_eq!(r.b2, Some(1));

        let (_, r) = multi_center(&[], 2.0).unwrap();
        assert!(r.circle_times_r3);
        assert_eq!(r.b2, None);

        assert!(iterate_ak(1, &[ImQuaternion::ZERO, ImQuaternion::ZERO], 0.0).is_err());
    }

    #[test]
    fn taub_nut_deformation_shifts_metric_by_constant() {
        use crate::potential::metric_matrix;
        let a = Arrangement::without_taub_nut(
            2,
            vec![flat(vec![1, 0], [0, 0, 0]), flat(vec![0, 1], [1, 0, 0])],
            vec![],
        )
        .unwrap();
        let c = vec![vec![1.0, 0.5], vec![0.5, 2.0]];
        let b = taub_nut_deform(&a, &c).unwrap();
        // Identity transform with zero matrix.
        let z = taub_nut_deform(&a, &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(z, a);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let p = TargetPoint::new(vec![rand_im(&mut rng, 4.0), rand_im(&mut rng, 4.0)]);
            let va = match metric_matrix(&a, &p, 1e-10) {
                Ok(s) => s.v,
                Err(_) => continue,
            };
            let vb = metric_matrix(&b, &p, 1e-10).unwrap().v;
            for i in 0..2 {
                for j in 0..2 {
                    assert!((vb[i][j] - va[i][j] - c[i][j]).abs() <= 1e-12);
                }
            }
        }
        assert!(taub_nut_deform(&a, &[vec![0.0, 1.0], vec![-1.0, 0.0]]).is_err());
    }

    #[test]
    fn scaling_identity_under_default_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let a = Arrangement::new(
            1,
            vec![flat(vec![1], [0, 0, 0]), flat(vec![1], [2, 0, 0]), flat(vec![1], [0, 1, 1])],
            vec![],
            vec![vec![0.5]],
        )
        .unwrap();
        let s = slice(&a, &TargetPoint::zeros(1), &[1]).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled = scale(&a, c, ScaleConvention::PointsTimesC).unwrap();
            let ss = slice(&scaled, &TargetPoint::zeros(1), &[1]).unwrap();
            for _ in 0..100 {
                let p = rand_im(&mut rng, 6.0);
                let v = match potential_v(&s, p, 1e-12) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                let vs = potential_v(&ss, p.scale(c), 1e-12).unwrap();
                assert!((vs - v / c).abs() <= 1e-12 * (1.0 + v.abs()), "c={c}: {vs} vs {}", v / c);
            }
        }
        // C = 1 is the identity.
        let id = scale(&a, 1.0, ScaleConvention::PointsTimesC).unwrap();
        assert_eq!(id, a);
        // The c-only arrangement maps c ↦ c/C under both conventions.
        let c_only = Arrangement::new(1, vec![], vec![], vec![vec![3.0]]).unwrap();
        for conv in [ScaleConvention::PointsTimesC, ScaleConvention::PointsOverC] {
            let sc = scale(&c_only, 2.0, conv).unwrap();
            assert!((sc.taub_nut[0][0] - 1.5).abs() <= 1e-15);
        }
        assert!(scale(&a, 0.0, ScaleConvention::PointsTimesC).is_err());
    }

    #[test]
    fn alternative_convention_fails_the_identity() {
        // The flipped convention does not satisfy V'(C·p) = V(p)/C for an
        // arrangement with a center away from zero.
        let a = Arrangement::without_taub_nut(1, vec![flat(vec![1], [1, 0, 0])], vec![]).unwrap();
        let s = slice(&a, &TargetPoint::zeros(1), &[1]).unwrap();
        let c = 2.0;
        let flipped = scale(&a, c, ScaleConvention::PointsOverC).unwrap();
        let sf = slice(&flipped, &TargetPoint::zeros(1), &[1]).unwrap();
        let p = ImQuaternion::new(3.0, 0.0, 0.0);
        let v = potential_v(&s, p, 1e-12).unwrap();
        let vf = potential_v(&sf, p.scale(c), 1e-12).unwrap();
        assert!((vf - v / c).abs() > 1e-3);
    }

    #[test]
    fn scaling_fixes_origin_center() {
        let a = flat_h();
        for conv in [ScaleConvention::PointsTimesC, ScaleConvention::PointsOverC] {
            let sc = scale(&a, 4.0, conv).unwrap();
            assert_eq!(sc.flats[0].lambda_f64(), ImQuaternion::ZERO);
        }
    }

    #[test]
    fn modification_preserves_smoothness_generically() {
        use crate::arrangement::{condition_a, condition_b};
        let ctx = NumericContext::default();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let base = Arrangement::without_taub_nut(
            2,
            vec![flat(vec![1, 0], [0, 0, 0]), flat(vec![0, 1], [0, 0, 0]), flat(vec![1, 1], [1, 0, 0])],
            vec![],
        )
        .unwrap();
        assert!(condition_a(&base, &ctx).pass && condition_b(&base, &ctx).pass);
        for _ in 0..50 {
            // Weight pool stays inside a unimodular system compatible with
            // the base weights; the level is the generic datum.
            let u = [vec![1i64, 0], vec![0, 1], vec![1, 1], vec![-1, 0], vec![0, -1]]
                [rng.gen_range(0..5)]
            .clone();
            let lvl = LevelVector::from_ints(
                rng.gen_range(-50..50),
                rng.gen_range(-50..50),
                rng.gen_range(1..50),
            );
            let f = match Flat::new(u, lvl) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let modified = match modify(&base, f) {
                Ok(m) => m,
                Err(_) => continue,
            };
            assert!(condition_a(&modified, &ctx).pass, "random generic level broke (a)");
            assert!(condition_b(&modified, &ctx).pass, "random generic level broke (b)");
        }
    }

    #[test]
    fn cut_and_modification_regions() {
        let r = cut_region(1.0);
        assert_eq!(r.removed, Interval { lo: 0.0, hi: 1.0 });
        assert_eq!(r.collapsed, Some(1.0));
        assert!(r.removes_points);

        let r = cut_region(0.0);
        assert!(r.removed.is_empty());
        assert_eq!(r.collapsed, Some(0.0));
        assert!(!r.removes_points);

        let m = modification_region(1.0);
        assert!(!m.removes_points);
        assert!(m.removed.is_empty());
        assert_eq!(m.collapsed, Some(1.0));
    }
}
