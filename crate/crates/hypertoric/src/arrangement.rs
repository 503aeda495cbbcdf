//! Arrangements of flats: data model, smoothness conditions, convergence.
//!
//! An arrangement in dimension `n` is a finite list of flats
//! `H(u, λ) = { a ∈ Im ℍ ⊗ (ℝⁿ)* : a(u) = λ }` together with monomial
//! families of flats sharing one weight, `λ_k = base + s·k^p·dir`, and a
//! constant positive-semidefinite matrix for Taub-NUT terms. Validation
//! decides the two smoothness conditions: (a) no point lies on `n+1` flats,
//! (b) any `n` flats through a common point have weights forming a ℤ-basis.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{ImQuaternion, TargetPoint};
use crate::context::NumericContext;
use crate::exact::{LevelScalar, LevelVector};
use crate::lattice;
use crate::tail;

#[derive(Debug, Error)]
pub enum ArrangementError {
    #[error("flat weight has wrong dimension: expected {expected}, got {got}")]
    WeightDimension { expected: usize, got: usize },
    #[error("flat weight must be nonzero")]
    ZeroWeight,
    #[error("duplicate flat: #{first} and #{second} describe the same affine subspace")]
    DuplicateFlat { first: String, second: String },
    #[error("taub_nut matrix must be symmetric {n}×{n}")]
    BadTaubNut { n: usize },
    #[error("taub_nut matrix must be positive semidefinite")]
    TaubNutNotPsd,
    #[error("family parameters invalid: {0}")]
    BadFamily(String),
    #[error("weights do not span ℝⁿ")]
    WeightsDoNotSpan,
    #[error("no ℤ-basis found among the weights (condition (b) cannot hold)")]
    NoZBasis,
    #[error("mixed exact and floating levels; supply a tolerance to compare them")]
    MixedExactness,
    #[error("intersection query needs at least one flat")]
    EmptyQuery,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension must be at least 1")]
    BadDimension,
}

/// One flat `H(u, λ)` with integer weight `u` and level `λ ∈ Im ℍ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Flat {
    pub u: Vec<i64>,
    pub lambda: LevelVector,
}

impl Flat {
    pub fn new(u: Vec<i64>, lambda: LevelVector) -> Result<Self, ArrangementError> {
        if u.iter().all(|&x| x == 0) {
            return Err(ArrangementError::ZeroWeight);
        }
        Ok(Flat { u, lambda })
    }

    pub fn with_f64_level(u: Vec<i64>, lambda: ImQuaternion) -> Result<Self, ArrangementError> {
        Flat::new(u, LevelVector::from_f64(lambda))
    }

    pub fn weight_norm(&self) -> f64 {
        (self.u.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt()
    }

    pub fn u_hat(&self) -> Vec<f64> {
        let n = self.weight_norm();
        self.u.iter().map(|&x| x as f64 / n).collect()
    }

    pub fn lambda_f64(&self) -> ImQuaternion {
        self.lambda.to_im()
    }

    /// Normalized level `λ̂ = λ / ‖u‖`, derived on demand.
    pub fn lambda_hat(&self) -> ImQuaternion {
        self.lambda_f64().scale(1.0 / self.weight_norm())
    }

    pub fn is_primitive(&self) -> bool {
        let mut g: i64 = 0;
        for &x in &self.u {
            g = g.gcd(&x.abs());
        }
        g == 1
    }

    /// Whether two flats describe the same affine subspace, i.e. agree as
    /// pairs `(u, λ)` up to simultaneous sign.
    pub fn same_subspace(&self, other: &Flat) -> bool {
        if self.u.len() != other.u.len() {
            return false;
        }
        let same = self.u == other.u && levels_equal(&self.lambda, &other.lambda, 1.0);
        let flipped = self.u.iter().zip(&other.u).all(|(a, b)| *a == -b)
            && levels_equal(&self.lambda, &other.lambda, -1.0);
        same || flipped
    }
}

fn levels_equal(a: &LevelVector, b: &LevelVector, sign: f64) -> bool {
    for c in 0..3 {
        match (a.component(c), b.component(c)) {
            (LevelScalar::Rational(x), LevelScalar::Rational(y)) => {
                let y = if sign < 0.0 { -y.clone() } else { y.clone() };
                if *x != y {
                    return false;
                }
            }
            (x, y) => {
                if x.to_f64() != sign * y.to_f64() {
                    return false;
                }
            }
        }
    }
    true
}

/// A monomial family of flats sharing one weight: `λ_k = base + s·k^p·dir`
/// for `k = 1, 2, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyGenerator {
    pub u: Vec<i64>,
    pub base: ImQuaternion,
    pub direction: ImQuaternion,
    pub scale: f64,
    pub power: f64,
}

impl FamilyGenerator {
    pub fn new(
        u: Vec<i64>,
        base: ImQuaternion,
        direction: ImQuaternion,
        scale: f64,
        power: f64,
    ) -> Result<Self, ArrangementError> {
        if u.iter().all(|&x| x == 0) {
            return Err(ArrangementError::ZeroWeight);
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(ArrangementError::BadFamily("scale must be positive".into()));
        }
        if !(power > 0.0) || !power.is_finite() {
            return Err(ArrangementError::BadFamily("power must be positive".into()));
        }
        let dn = direction.norm();
        if !((dn - 1.0).abs() <= 1e-9) {
            return Err(ArrangementError::BadFamily("direction must be a unit vector".into()));
        }
        Ok(FamilyGenerator { u, base, direction: direction.scale(1.0 / dn), scale, power })
    }

    pub fn level(&self, k: u64) -> ImQuaternion {
        self.base + self.direction.scale(self.scale * (k as f64).powf(self.power))
    }

    pub fn member(&self, k: u64) -> Flat {
        Flat { u: self.u.clone(), lambda: LevelVector::from_f64(self.level(k)) }
    }

    pub fn weight_norm(&self) -> f64 {
        (self.u.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt()
    }

    /// Whether the family converges, i.e. `Σ (1+|λ̂_k|)⁻¹ < ∞`.
    pub fn converges(&self) -> bool {
        self.power > 1.0
    }

    /// The member index whose level matches `v`, if any: solves
    /// `base + s·k^p·dir = v` for a positive integer `k`.
    pub fn member_through(&self, v: ImQuaternion, tol: f64) -> Option<u64> {
        let d = v - self.base;
        let t = d.dot(self.direction);
        if t <= 0.0 {
            return None;
        }
        if (d - self.direction.scale(t)).norm() > tol * (1.0 + d.norm()) {
            return None;
        }
        let k = (t / self.scale).powf(1.0 / self.power);
        let kr = k.round();
        if kr < 1.0 || kr > 1e15 {
            return None;
        }
        let level = self.scale * kr.powf(self.power);
        if (level - t).abs() <= tol * (1.0 + t.abs()) {
            Some(kr as u64)
        } else {
            None
        }
    }
}

/// Identifies one flat inside an arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlatId {
    Explicit(usize),
    Family { family: usize, index: u64 },
}

impl std::fmt::Display for FlatId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FlatId::Explicit(i) => write!(f, "flat#{i}"),
            FlatId::Family { family, index } => write!(f, "family#{family}[k={index}]"),
        }
    }
}

/// The full arrangement datum.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    pub dimension: usize,
    pub flats: Vec<Flat>,
    pub families: Vec<FamilyGenerator>,
    /// Constant term of the metric matrix (for `n = 1` the scalar `c`).
    pub taub_nut: Vec<Vec<f64>>,
}

impl Arrangement {
    pub fn new(
        dimension: usize,
        flats: Vec<Flat>,
        families: Vec<FamilyGenerator>,
        taub_nut: Vec<Vec<f64>>,
    ) -> Result<Self, ArrangementError> {
        if dimension == 0 {
            return Err(ArrangementError::BadDimension);
        }
        for f in &flats {
            if f.u.len() != dimension {
                return Err(ArrangementError::WeightDimension { expected: dimension, got: f.u.len() });
            }
        }
        for f in &families {
            if f.u.len() != dimension {
                return Err(ArrangementError::WeightDimension { expected: dimension, got: f.u.len() });
            }
        }
        for i in 0..flats.len() {
            for j in i + 1..flats.len() {
                if flats[i].same_subspace(&flats[j]) {
                    return Err(ArrangementError::DuplicateFlat {
                        first: format!("flat#{i}"),
                        second: format!("flat#{j}"),
                    });
                }
            }
        }
        for (fi, fam) in families.iter().enumerate() {
            for (i, flat) in flats.iter().enumerate() {
                if let Some(k) = family_member_matching(fam, flat) {
                    return Err(ArrangementError::DuplicateFlat {
                        first: format!("flat#{i}"),
                        second: format!("family#{fi}[k={k}]"),
                    });
                }
            }
            for (fj, other) in families.iter().enumerate().skip(fi + 1) {
                if fam == other {
                    return Err(ArrangementError::DuplicateFlat {
                        first: format!("family#{fi}"),
                        second: format!("family#{fj}"),
                    });
                }
            }
        }
        if taub_nut.len() != dimension || taub_nut.iter().any(|r| r.len() != dimension) {
            return Err(ArrangementError::BadTaubNut { n: dimension });
        }
        for r in 0..dimension {
            for c in 0..dimension {
                if (taub_nut[r][c] - taub_nut[c][r]).abs() > 1e-12 {
                    return Err(ArrangementError::BadTaubNut { n: dimension });
                }
            }
        }
        if !is_psd(&taub_nut) {
            return Err(ArrangementError::TaubNutNotPsd);
        }
        Ok(Arrangement { dimension, flats, families, taub_nut })
    }

    /// Arrangement with zero Taub-NUT term.
    pub fn without_taub_nut(
        dimension: usize,
        flats: Vec<Flat>,
        families: Vec<FamilyGenerator>,
    ) -> Result<Self, ArrangementError> {
        let tn = vec![vec![0.0; dimension]; dimension];
        Arrangement::new(dimension, flats, families, tn)
    }

    pub fn flat(&self, id: FlatId) -> Flat {
        match id {
            FlatId::Explicit(i) => self.flats[i].clone(),
            FlatId::Family { family, index } => self.families[family].member(index),
        }
    }

    /// Distinct weight vectors appearing in the arrangement, in first-seen
    /// order.
    pub fn distinct_weights(&self) -> Vec<Vec<i64>> {
        let mut seen: Vec<Vec<i64>> = Vec::new();
        for u in self
            .flats
            .iter()
            .map(|f| &f.u)
            .chain(self.families.iter().map(|f| &f.u))
        {
            if !seen.contains(u) {
                seen.push(u.clone());
            }
        }
        seen
    }

    pub fn weights_span(&self) -> bool {
        let w = self.distinct_weights();
        lattice::rank_int(&w) == self.dimension
    }

    /// All explicit flat levels are exact rationals.
    pub fn is_exact(&self) -> bool {
        self.flats.iter().all(|f| f.lambda.is_rational())
    }

    /// Applies `u ↦ A·u` to every weight (levels fixed). `A` must be
    /// unimodular for the result to describe the same quotient in new torus
    /// coordinates.
    pub fn transform_weights(&self, a: &[Vec<i64>]) -> Result<Arrangement, ArrangementError> {
        let flats = self
            .flats
            .iter()
            .map(|f| Flat { u: lattice::mat_vec_i64(a, &f.u), lambda: f.lambda.clone() })
            .collect();
        let families = self
            .families
            .iter()
            .map(|f| FamilyGenerator { u: lattice::mat_vec_i64(a, &f.u), ..f.clone() })
            .collect();
        Arrangement::new(self.dimension, flats, families, self.taub_nut.clone())
    }
}

fn family_member_matching(fam: &FamilyGenerator, flat: &Flat) -> Option<u64> {
    let lam = flat.lambda_f64();
    if fam.u == flat.u {
        if let Some(k) = fam.member_through(lam, 1e-12) {
            return Some(k);
        }
    }
    if fam.u.iter().zip(&flat.u).all(|(a, b)| *a == -b) {
        if let Some(k) = fam.member_through(-lam, 1e-12) {
            return Some(k);
        }
    }
    None
}

fn is_psd(m: &[Vec<f64>]) -> bool {
    // LDLᵀ with tolerance; desk-scale symmetric matrices.
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    for k in 0..n {
        if a[k][k] < -1e-12 * scale {
            return false;
        }
        if a[k][k] <= 1e-14 * scale {
            // Zero pivot: row/column must vanish for PSD.
            for j in k + 1..n {
                if a[k][j].abs() > 1e-10 * scale {
                    return false;
                }
            }
            continue;
        }
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FileFlat {
    u: Vec<i64>,
    lambda: LevelVector,
}

#[derive(Serialize, Deserialize)]
struct FileFamily {
    u: Vec<i64>,
    base: [f64; 3],
    direction: [f64; 3],
    scale: f64,
    power: f64,
}

#[derive(Serialize, Deserialize)]
struct ArrangementFile {
    version: u32,
    dimension: usize,
    flats: Vec<FileFlat>,
    #[serde(default)]
    families: Vec<FileFamily>,
    #[serde(default)]
    taub_nut: Option<Vec<Vec<f64>>>,
}

impl Arrangement {
    pub fn from_json(text: &str) -> Result<Self, ArrangementError> {
        let file: ArrangementFile =
            serde_json::from_str(text).map_err(|e| ArrangementError::Parse(e.to_string()))?;
        if file.version != 1 {
            return Err(ArrangementError::Parse(format!("unsupported version {}", file.version)));
        }
        let flats = file
            .flats
            .into_iter()
            .map(|f| Flat::new(f.u, f.lambda))
            .collect::<Result<Vec<_>, _>>()?;
        let families = file
            .families
            .into_iter()
            .map(|f| {
                FamilyGenerator::new(
                    f.u,
                    ImQuaternion::from_array(f.base),
                    ImQuaternion::from_array(f.direction),
                    f.scale,
                    f.power,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tn = file
            .taub_nut
            .unwrap_or_else(|| vec![vec![0.0; file.dimension]; file.dimension]);
        Arrangement::new(file.dimension, flats, families, tn)
    }

    pub fn to_json(&self) -> String {
        let file = ArrangementFile {
            version: 1,
            dimension: self.dimension,
            flats: self
                .flats
                .iter()
                .map(|f| FileFlat { u: f.u.clone(), lambda: f.lambda.clone() })
                .collect(),
            families: self
                .families
                .iter()
                .map(|f| FileFamily {
                    u: f.u.clone(),
                    base: f.base.to_array(),
                    direction: f.direction.to_array(),
                    scale: f.scale,
                    power: f.power,
                })
                .collect(),
            taub_nut: Some(self.taub_nut.clone()),
        };
        serde_json::to_string_pretty(&file).expect("arrangement serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// validate_primitive
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PrimitiveReport {
    pub pass: bool,
    pub non_primitive: Vec<String>,
    pub weights_span: bool,
}

pub fn validate_primitive(a: &Arrangement) -> PrimitiveReport {
    let mut non_primitive = Vec::new();
    for (i, f) in a.flats.iter().enumerate() {
        if !f.is_primitive() {
            non_primitive.push(format!("flat#{i} u={:?}", f.u));
        }
    }
    for (i, f) in a.families.iter().enumerate() {
        let flat = Flat { u: f.u.clone(), lambda: LevelVector::zero() };
        if !flat.is_primitive() {
            non_primitive.push(format!("family#{i} u={:?}", f.u));
        }
    }
    let weights_span = a.weights_span();
    PrimitiveReport { pass: non_primitive.is_empty() && weights_span, non_primitive, weights_span }
}

// ---------------------------------------------------------------------------
// intersection
// ---------------------------------------------------------------------------

/// A common point of a set of flats, exact when the inputs allow it.
#[derive(Debug, Clone)]
pub struct IntersectionPoint {
    pub point: TargetPoint,
    pub exact: Option<Vec<[BigRational; 3]>>,
    pub unique: bool,
}

impl IntersectionPoint {
    fn from_exact(cols: Vec<[BigRational; 3]>, unique: bool) -> Self {
        use num::ToPrimitive;
        let point = TargetPoint::new(
            cols.iter()
                .map(|c| {
                    ImQuaternion::new(
                        c[0].to_f64().unwrap(),
                        c[1].to_f64().unwrap(),
                        c[2].to_f64().unwrap(),
                    )
                })
                .collect(),
        );
        IntersectionPoint { point, exact: Some(cols), unique }
    }
}

/// Common point of the given flats: the three imaginary components decouple
/// into linear systems over the weights. Exact when every level is rational;
/// otherwise floating with residual tolerance `tol` (default 1e-10), which
/// must be supplied explicitly when exact and floating levels are mixed.
pub fn intersection(
    flats: &[&Flat],
    tol: Option<f64>,
) -> Result<Option<IntersectionPoint>, ArrangementError> {
    if flats.is_empty() {
        return Err(ArrangementError::EmptyQuery);
    }
    let n = flats[0].u.len();
    let rows: Vec<Vec<i64>> = flats.iter().map(|f| f.u.clone()).collect();
    let all_exact = flats.iter().all(|f| f.lambda.is_rational());
    let any_exact = flats.iter().any(|f| f.lambda.is_rational());
    if all_exact {
        let mut cols = vec![[BigRational::zero(), BigRational::zero(), BigRational::zero()]; n];
        let mut unique = true;
        for c in 0..3 {
            let rhs: Vec<BigRational> = flats
                .iter()
                .map(|f| f.lambda.component(c).as_rational().unwrap().clone())
                .collect();
            match lattice::rat_solve_least_norm(&rows, &rhs) {
                lattice::RatSolve::Inconsistent => return Ok(None),
                lattice::RatSolve::Solution { x, unique: u } => {
                    unique &= u;
                    for (col, v) in cols.iter_mut().zip(x) {
                        col[c] = v;
                    }
                }
            }
        }
        return Ok(Some(IntersectionPoint::from_exact(cols, unique)));
    }
    if any_exact && tol.is_none() {
        return Err(ArrangementError::MixedExactness);
    }
    let tol = tol.unwrap_or(1e-10);
    let rows_f: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect();
    let mut cols = vec![ImQuaternion::ZERO; n];
    let mut unique = true;
    let scale: f64 = flats
        .iter()
        .map(|f| f.lambda_f64().norm())
        .fold(1.0, f64::max);
    for c in 0..3 {
        let rhs: Vec<f64> = flats.iter().map(|f| f.lambda_f64().to_array()[c]).collect();
        let (x, residual) = lattice::f64_solve_least_norm(&rows_f, &rhs);
        if residual > tol * scale {
            return Ok(None);
        }
        for (col, v) in cols.iter_mut().zip(x) {
            match c {
                0 => col.i = v,
                1 => col.j = v,
                _ => col.k = v,
            }
        }
    }
    unique &= lattice::rank_int(&rows) == n;
    Ok(Some(IntersectionPoint { point: TargetPoint::new(cols), exact: None, unique }))
}

// ---------------------------------------------------------------------------
// Conditions (a) and (b)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Concurrence {
    pub point: TargetPoint,
    pub flats: Vec<FlatId>,
}

#[derive(Debug, Clone)]
pub struct ConditionAReport {
    pub pass: bool,
    pub violations: Vec<Concurrence>,
    pub candidate_points: usize,
}

#[derive(Debug, Clone)]
pub struct UnimodularViolation {
    pub flats: Vec<FlatId>,
    /// Determinant of the weights for independent subsets; `None` marks a
    /// dependent subset with non-empty intersection.
    pub det: Option<BigInt>,
}

#[derive(Debug, Clone)]
pub struct ConditionBReport {
    pub pass: bool,
    pub violations: Vec<UnimodularViolation>,
}

/// Candidate intersection point with its generating data.
#[derive(Debug, Clone)]
enum Candidate {
    Exact(Vec<[BigRational; 3]>),
    Float(TargetPoint),
}

impl Candidate {
    fn as_target(&self) -> TargetPoint {
        match self {
            Candidate::Exact(cols) => IntersectionPoint::from_exact(cols.clone(), true).point,
            Candidate::Float(p) => p.clone(),
        }
    }
}

/// Condition (a): no point lies on `n + 1` or more flats.
///
/// Candidate points are generated from all independent `n`-subsets drawn
/// from the explicit flats plus, for each family, the closed-form solutions
/// that bring a single family member through an `(n−1)`-subset together with
/// a further flat. Incidence counts at each candidate are exact over the
/// explicit flats (rational levels) and closed-form over the families, so no
/// truncation index is involved. Concurrences realizable only through two or
/// more family members and at most `n − 2` explicit flats are outside this
/// enumeration.
pub fn condition_a(a: &Arrangement, ctx: &NumericContext) -> ConditionAReport {
    let n = a.dimension;
    let candidates = gather_candidates(a, ctx);
    let mut violations = Vec::new();
    let mut seen_keys: Vec<Vec<i64>> = Vec::new();
    for cand in &candidates {
        let incident = incident_flats(a, cand, ctx);
        if incident.len() >= n + 1 {
            let point = cand.as_target();
            let key = point_key(&point);
            if !seen_keys.contains(&key) {
                seen_keys.push(key);
                violations.push(Concurrence { point, flats: incident });
            }
        }
    }
    ConditionAReport { pass: violations.is_empty(), violations, candidate_points: candidates.len() }
}

/// Condition (b): whenever `n` distinct flats meet, their weights form a
/// ℤ-basis of ℤⁿ.
///
/// Independent `n`-subsets of distinct weights always meet in exactly one
/// point, so those reduce to exact `|det| = 1` checks with no enumeration
/// over family indices. Dependent subsets that nevertheless intersect are
/// violations; they are scanned over explicit flats and single family
/// members.
pub fn condition_b(a: &Arrangement, ctx: &NumericContext) -> ConditionBReport {
    let n = a.dimension;
    let mut violations = Vec::new();

    // Independent subsets of distinct weights: |det| must be 1.
    let weights = a.distinct_weights();
    if weights.len() >= n {
        let mut idx = (0..n).collect::<Vec<_>>();
        loop {
            let sub: Vec<Vec<i64>> = idx.iter().map(|&i| weights[i].clone()).collect();
            let det = lattice::det_int(&sub);
            if !det.is_zero() && !det.abs().is_one() {
                violations.push(UnimodularViolation {
                    flats: sub
                        .iter()
                        .map(|u| first_flat_with_weight(a, u))
                        .collect(),
                    det: Some(det),
                });
            }
            if !advance_combination(&mut idx, weights.len()) {
                break;
            }
        }
    }

    // Dependent subsets of explicit flats with non-empty intersection.
    let m = a.flats.len();
    if m >= n {
        let mut idx = (0..n).collect::<Vec<_>>();
        loop {
            let rows: Vec<Vec<i64>> = idx.iter().map(|&i| a.flats[i].u.clone()).collect();
            if lattice::rank_int(&rows) < n {
                let refs: Vec<&Flat> = idx.iter().map(|&i| &a.flats[i]).collect();
                if let Ok(Some(_)) = intersection(&refs, Some(ctx.residual_tol)) {
                    violations.push(UnimodularViolation {
                        flats: idx.iter().map(|&i| FlatId::Explicit(i)).collect(),
                        det: None,
                    });
                }
            }
            if !advance_combination(&mut idx, m) {
                break;
            }
        }
    }

    // Dependent subsets of (n−1) explicit flats plus one family member.
    if n >= 1 && m >= n - 1 {
        for (fi, fam) in a.families.iter().enumerate() {
            let mut idx: Vec<usize> = (0..n - 1).collect();
            loop {
                if n == 1 || idx.last().map_or(true, |&l| l < m) {
                    let mut rows: Vec<Vec<i64>> =
                        idx.iter().map(|&i| a.flats[i].u.clone()).collect();
                    rows.push(fam.u.clone());
                    if lattice::rank_int(&rows) < n {
                        if let Some(k) = family_member_meeting_locus(a, &idx, fam, ctx) {
                            violations.push(UnimodularViolation {
                                flats: idx
                                    .iter()
                                    .map(|&i| FlatId::Explicit(i))
                                    .chain([FlatId::Family { family: fi, index: k }])
                                    .collect(),
                                det: None,
                            });
                        }
                    }
                }
                if n == 1 || !advance_combination(&mut idx, m) {
                    break;
                }
            }
        }
    }

    ConditionBReport { pass: violations.is_empty(), violations }
}

fn first_flat_with_weight(a: &Arrangement, u: &[i64]) -> FlatId {
    for (i, f) in a.flats.iter().enumerate() {
        if f.u == u {
            return FlatId::Explicit(i);
        }
    }
    for (i, f) in a.families.iter().enumerate() {
        if f.u == u {
            return FlatId::Family { family: i, index: 1 };
        }
    }
    unreachable!("weight comes from the arrangement")
}

/// Whether some member of `fam` meets the intersection locus of the given
/// dependent explicit subset (whose weights span the family weight).
fn family_member_meeting_locus(
    a: &Arrangement,
    explicit: &[usize],
    fam: &FamilyGenerator,
    ctx: &NumericContext,
) -> Option<u64> {
    let refs: Vec<&Flat> = explicit.iter().map(|&i| &a.flats[i]).collect();
    if refs.is_empty() {
        // Family alone: every member is a flat of its own; a single-member
        // "subset" is never a violation.
        return None;
    }
    let base_pt = intersection(&refs, Some(ctx.residual_tol)).ok()??;
    let rows: Vec<Vec<i64>> = refs.iter().map(|f| f.u.clone()).collect();
    let rank = lattice::rank_int(&rows);
    let fam_in_span = {
        let mut with = rows.clone();
        with.push(fam.u.clone());
        lattice::rank_int(&with) == rank
    };
    if fam_in_span {
        let v = base_pt.point.pair(&fam.u).ok()?;
        fam.member_through(v, ctx.residual_tol)
    } else {
        // The family weight escapes the span, so the locus meets every
        // member level; index 1 witnesses the violation.
        Some(1)
    }
}

fn point_key(p: &TargetPoint) -> Vec<i64> {
    p.flattened().iter().map(|&x| (x * 1e8).round() as i64).collect()
}

fn advance_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    if k == 0 {
        return false;
    }
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

fn gather_candidates(a: &Arrangement, ctx: &NumericContext) -> Vec<Candidate> {
    let n = a.dimension;
    let m = a.flats.len();
    let mut out = Vec::new();

    // Independent n-subsets of explicit flats.
    if m >= n {
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let rows: Vec<Vec<i64>> = idx.iter().map(|&i| a.flats[i].u.clone()).collect();
            if lattice::rank_int(&rows) == n {
                let refs: Vec<&Flat> = idx.iter().map(|&i| &a.flats[i]).collect();
                if let Ok(Some(pt)) = intersection(&refs, Some(ctx.residual_tol)) {
                    out.push(match pt.exact {
                        Some(cols) => Candidate::Exact(cols),
                        None => Candidate::Float(pt.point),
                    });
                }
            }
            if !advance_combination(&mut idx, m) {
                break;
            }
        }
    }

    // One family member + (n−1) explicit flats + one further flat, solved in
    // closed form for the family parameter.
    for fam in a.families.iter() {
        let subset_size = n - 1;
        if m < subset_size {
            continue;
        }
        let mut idx: Vec<usize> = (0..subset_size).collect();
        loop {
            let mut rows: Vec<Vec<i64>> = idx.iter().map(|&i| a.flats[i].u.clone()).collect();
            rows.push(fam.u.clone());
            if lattice::rank_int(&rows) == n {
                if let Some((p0, p1)) = parametric_point(a, &idx, fam) {
                    // Third flats: remaining explicit flats.
                    for (g, flat) in a.flats.iter().enumerate() {
                        if idx.contains(&g) {
                            continue;
                        }
                        let av = p0.pair(&flat.u).unwrap() - flat.lambda_f64();
                        let bv = p1.pair(&flat.u).unwrap();
                        for t in solve_affine_zero(av, bv, ctx.residual_tol) {
                            if let Some(k) = index_for_level(fam, t, ctx.residual_tol) {
                                out.push(Candidate::Float(point_at(&p0, &p1, fam, k)));
                            }
                        }
                    }
                    // Third flats: members of (other or same) families.
                    for other in a.families.iter() {
                        if std::ptr::eq(other, fam) {
                            continue;
                        }
                        let av = p0.pair(&other.u).unwrap() - other.base;
                        let bv = p1.pair(&other.u).unwrap();
                        for (t, tp) in solve_two_affine(av, bv, other.direction, ctx.residual_tol) {
                            let k = index_for_level(fam, t, ctx.residual_tol);
                            let kp = index_for_param(other, tp, ctx.residual_tol);
                            if let (Some(k), Some(_)) = (k, kp) {
                                out.push(Candidate::Float(point_at(&p0, &p1, fam, k)));
                            }
                        }
                    }
                }
            }
            if subset_size == 0 || !advance_combination(&mut idx, m) {
                break;
            }
        }
    }
    out
}

/// Solves the square system of `(n−1)` explicit flats plus a family flat
/// with level `base + t·dir`, returning the affine decomposition
/// `p(t) = p0 + t·p1` of the intersection point.
fn parametric_point(
    a: &Arrangement,
    explicit: &[usize],
    fam: &FamilyGenerator,
) -> Option<(TargetPoint, TargetPoint)> {
    let n = a.dimension;
    let rows_f: Vec<Vec<f64>> = explicit
        .iter()
        .map(|&i| a.flats[i].u.iter().map(|&x| x as f64).collect())
        .chain([fam.u.iter().map(|&x| x as f64).collect()])
        .collect();
    let mut p0 = TargetPoint::zeros(n);
    let mut p1 = TargetPoint::zeros(n);
    for c in 0..3 {
        let rhs0: Vec<f64> = explicit
            .iter()
            .map(|&i| a.flats[i].lambda_f64().to_array()[c])
            .chain([fam.base.to_array()[c]])
            .collect();
        let rhs1: Vec<f64> = explicit
            .iter()
            .map(|_| 0.0)
            .chain([fam.direction.to_array()[c]])
            .collect();
        let (x0, r0) = lattice::f64_solve_least_norm(&rows_f, &rhs0);
        let (x1, r1) = lattice::f64_solve_least_norm(&rows_f, &rhs1);
        if r0 > 1e-9 || r1 > 1e-9 {
            return None;
        }
        for i in 0..n {
            let mut c0 = p0.column(i);
            let mut c1 = p1.column(i);
            match c {
                0 => {
                    c0.i = x0[i];
                    c1.i = x1[i];
                }
                1 => {
                    c0.j = x0[i];
                    c1.j = x1[i];
                }
                _ => {
                    c0.k = x0[i];
                    c1.k = x1[i];
                }
            }
            p0.set_column(i, c0);
            p1.set_column(i, c1);
        }
    }
    Some((p0, p1))
}

fn point_at(p0: &TargetPoint, p1: &TargetPoint, fam: &FamilyGenerator, k: u64) -> TargetPoint {
    let t = fam.scale * (k as f64).powf(fam.power);
    p0.add(&p1.scale(t))
}

/// Solutions `t` of `A + t·B = 0` in `Im ℍ`.
fn solve_affine_zero(a: ImQuaternion, b: ImQuaternion, tol: f64) -> Vec<f64> {
    let bn = b.norm_sq();
    if bn <= 1e-24 {
        return Vec::new();
    }
    let t = -a.dot(b) / bn;
    if (a + b.scale(t)).norm() <= tol * (1.0 + a.norm()) {
        vec![t]
    } else {
        Vec::new()
    }
}

/// Solutions `(t, t')` of `A + t·B = t'·D` in `Im ℍ` (least squares with
/// residual check).
fn solve_two_affine(a: ImQuaternion, b: ImQuaternion, d: ImQuaternion, tol: f64) -> Vec<(f64, f64)> {
    let rows = vec![
        vec![b.i, -d.i],
        vec![b.j, -d.j],
        vec![b.k, -d.k],
    ];
    let rhs = vec![-a.i, -a.j, -a.k];
    let (x, residual) = lattice::f64_solve_least_norm(&rows, &rhs);
    if residual <= tol * (1.0 + a.norm()) {
        vec![(x[0], x[1])]
    } else {
        Vec::new()
    }
}

fn index_for_level(fam: &FamilyGenerator, t: f64, tol: f64) -> Option<u64> {
    if t <= 0.0 {
        return None;
    }
    let k = (t / fam.scale).powf(1.0 / fam.power).round();
    if k < 1.0 || k > 1e15 {
        return None;
    }
    if (fam.scale * k.powf(fam.power) - t).abs() <= tol * (1.0 + t.abs()) * 1e2 {
        Some(k as u64)
    } else {
        None
    }
}

fn index_for_param(fam: &FamilyGenerator, t: f64, tol: f64) -> Option<u64> {
    index_for_level(fam, t, tol)
}

fn incident_flats(a: &Arrangement, cand: &Candidate, ctx: &NumericContext) -> Vec<FlatId> {
    let mut out = Vec::new();
    match cand {
        Candidate::Exact(cols) => {
            for (i, f) in a.flats.iter().enumerate() {
                if let Some(lams) = f.lambda.rationals() {
                    let mut hit = true;
                    for c in 0..3 {
                        let mut s = BigRational::zero();
                        for (col, &ui) in cols.iter().zip(&f.u) {
                            s += &col[c] * BigRational::from_integer(BigInt::from(ui));
                        }
                        if s != lams[c] {
                            hit = false;
                            break;
                        }
                    }
                    if hit {
                        out.push(FlatId::Explicit(i));
                    }
                } else if float_incident(&cand.as_target(), f, ctx) {
                    out.push(FlatId::Explicit(i));
                }
            }
            let p = cand.as_target();
            family_incidences(a, &p, ctx, &mut out);
        }
        Candidate::Float(p) => {
            for (i, f) in a.flats.iter().enumerate() {
                if float_incident(p, f, ctx) {
                    out.push(FlatId::Explicit(i));
                }
            }
            family_incidences(a, p, ctx, &mut out);
        }
    }
    out
}

fn float_incident(p: &TargetPoint, f: &Flat, ctx: &NumericContext) -> bool {
    let v = p.pair(&f.u).unwrap() - f.lambda_f64();
    v.norm() <= ctx.residual_tol * (1.0 + f.lambda_f64().norm())
}

fn family_incidences(a: &Arrangement, p: &TargetPoint, ctx: &NumericContext, out: &mut Vec<FlatId>) {
    for (fi, fam) in a.families.iter().enumerate() {
        let v = p.pair(&fam.u).unwrap();
        if let Some(k) = fam.member_through(v, ctx.residual_tol) {
            out.push(FlatId::Family { family: fi, index: k });
        }
    }
}

// ---------------------------------------------------------------------------
// weight_normal_form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct WeightNormalForm {
    /// Unimodular matrix mapping the chosen weight basis to the standard
    /// basis.
    pub basis_change: Vec<Vec<i64>>,
    /// `(original, transformed, entries ∈ {−1,0,1})` per distinct weight.
    pub classified: Vec<(Vec<i64>, Vec<i64>, bool)>,
    pub all_in_unit_box: bool,
}

/// Finds a ℤ-basis inside the weight set and rewrites every weight in its
/// coordinates; under condition (b) all entries land in `{−1, 0, 1}`.
pub fn weight_normal_form(a: &Arrangement) -> Result<WeightNormalForm, ArrangementError> {
    let n = a.dimension;
    let weights = a.distinct_weights();
    if lattice::rank_int(&weights) < n {
        return Err(ArrangementError::WeightsDoNotSpan);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let basis_cols = loop {
        let sub: Vec<Vec<i64>> = idx.iter().map(|&i| weights[i].clone()).collect();
        // Columns of the basis matrix are the chosen weights.
        let cols: Vec<Vec<i64>> = (0..n)
            .map(|r| sub.iter().map(|w| w[r]).collect())
            .collect();
        if lattice::det_int(&cols).abs().is_one() {
            break cols;
        }
        if !advance_combination(&mut idx, weights.len()) {
            return Err(ArrangementError::NoZBasis);
        }
    };
    let basis_change = lattice::unimodular_inverse(&basis_cols).expect("|det| = 1 by construction");
    let mut all_in = true;
    let classified = weights
        .into_iter()
        .map(|u| {
            let t = lattice::mat_vec_i64(&basis_change, &u);
            let ok = t.iter().all(|&x| (-1..=1).contains(&x));
            all_in &= ok;
            (u, t, ok)
        })
        .collect();
    Ok(WeightNormalForm { basis_change, classified, all_in_unit_box: all_in })
}

// ---------------------------------------------------------------------------
// convergence_check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TailWitness {
    /// Number of explicitly summed terms.
    pub n_terms: u64,
    /// Partial sum of `(1 + |λ̂_k|)⁻¹` for `k ≤ n_terms`.
    pub partial_sum: f64,
    /// Certified estimate of the tail beyond `n_terms`.
    pub tail_estimate: f64,
    /// Rigorous bound on the error of `tail_estimate`.
    pub tail_error_bound: f64,
}

#[derive(Debug, Clone)]
pub struct DivergenceWitness {
    pub bound: f64,
    pub n_terms: u64,
    pub partial_sum: f64,
}

#[derive(Debug, Clone)]
pub struct FamilyConvergence {
    pub converges: bool,
    pub witness: Option<TailWitness>,
    pub divergence: Option<DivergenceWitness>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub all_converge: bool,
    pub families: Vec<FamilyConvergence>,
}

/// Decides the convergence condition `Σ (1 + |λ̂_k|)⁻¹ < ∞` per family.
///
/// A finite arrangement always converges. A monomial family converges
/// exactly when `p > 1`; the witness certifies the series value by an
/// integral-sandwich tail estimate with a rigorous error bound below `tol`.
/// Divergent families carry a partial sum exceeding `divergence_bound`.
pub fn convergence_check(a: &Arrangement, tol: f64, divergence_bound: f64) -> ConvergenceReport {
    let families = a
        .families
        .iter()
        .map(|fam| {
            if fam.converges() {
                FamilyConvergence {
                    converges: true,
                    witness: Some(tail_witness(fam, tol)),
                    divergence: None,
                }
            } else {
                FamilyConvergence {
                    converges: false,
                    witness: None,
                    divergence: Some(divergence_witness(fam, divergence_bound)),
                }
            }
        })
        .collect::<Vec<_>>();
    ConvergenceReport { all_converge: families.iter().all(|f| f.converges), families }
}

fn normalized_level_term(fam: &FamilyGenerator) -> impl Fn(f64) -> f64 + '_ {
    let un = fam.weight_norm();
    move |x: f64| {
        let lvl = fam.base + fam.direction.scale(fam.scale * x.powf(fam.power));
        1.0 / (1.0 + lvl.norm() / un)
    }
}

fn tail_witness(fam: &FamilyGenerator, tol: f64) -> TailWitness {
    let f = normalized_level_term(fam);
    // Beyond x₀ the level norm is increasing, so f is decreasing and the
    // integral sandwich applies.
    let x0 = ((2.0 * fam.base.norm() / fam.scale).max(1.0)).powf(1.0 / fam.power).ceil() as u64;
    let n = tail::minimal_tail_index(&f, x0.max(4), tol, 1 << 40);
    let mut partial = 0.0;
    for k in 1..=n {
        partial += f(k as f64);
    }
    let coeff = fam.weight_norm() / fam.scale;
    let (tail_estimate, tail_error_bound) = tail::tail_sum(&f, n, fam.power, coeff);
    TailWitness { n_terms: n, partial_sum: partial, tail_estimate, tail_error_bound }
}

fn divergence_witness(fam: &FamilyGenerator, bound: f64) -> DivergenceWitness {
    let f = normalized_level_term(fam);
    let mut partial = 0.0;
    let mut k = 0u64;
    while partial <= bound && k < 100_000_000 {
        k += 1;
        partial += f(k as f64);
    }
    DivergenceWitness { bound, n_terms: k, partial_sum: partial }
}

// ---------------------------------------------------------------------------
// kernel_lattice
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct KernelLattice {
    /// Integer basis of `{ t : Σ t_k u_k = 0 }` over the explicit flats.
    pub basis: Vec<Vec<BigInt>>,
    /// Whether the weights generate all of ℤⁿ (trivial cokernel).
    pub surjective_onto_lattice: bool,
}

/// Kernel lattice of the weight map over the explicit flats.
pub fn kernel_lattice(a: &Arrangement) -> Result<KernelLattice, ArrangementError> {
    let cols: Vec<Vec<i64>> = a.flats.iter().map(|f| f.u.clone()).collect();
    if lattice::rank_int(&cols) < a.dimension {
        return Err(ArrangementError::WeightsDoNotSpan);
    }
    let basis = lattice::kernel_basis(&cols);
    debug_assert_eq!(basis.len(), cols.len() - a.dimension);
    let factors = lattice::smith_invariant_factors(&cols);
    let surjective =
        factors.len() == a.dimension && factors.iter().all(|f| f.is_one());
    Ok(KernelLattice { basis, surjective_onto_lattice: surjective })
}
