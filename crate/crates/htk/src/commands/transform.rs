//! `htk transform`: modification, Taub-NUT deformation, scaling, A_k
//! iteration and the cut-region report. Transformed arrangements are written
//! back in the file format; the report re-verifies the defining identity of
//! each transform at sampled points.

use anyhow::{bail, Context, Result};
use serde::Serialize;

use hypertoric::algebra::ImQuaternion;
use hypertoric::arrangement::{Arrangement, Flat};
use hypertoric::exact::{parse_rational, LevelScalar, LevelVector};
use hypertoric::modification::{
    cut_region, modification_region, modify, multi_center, scale, taub_nut_deform, CutRegionReport,
    ScaleConvention,
};
use hypertoric::potential::{metric_matrix, r_k};

use crate::util::{parse_f64_list, parse_i64_list, parse_point_list, print_report, read_file, Envelope, SamplePoints};

pub struct Params {
    pub file: String,
    pub op: String,
    pub flat_u: Option<String>,
    pub flat_lambda: Option<String>,
    pub matrix: Option<String>,
    pub factor: Option<f64>,
    pub convention: String,
    pub k: Option<usize>,
    pub points: Option<String>,
    pub epsilon: Option<f64>,
    pub out: Option<String>,
}

#[derive(Serialize)]
struct IdentityCheck {
    identity: String,
    samples: usize,
    max_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct TransformReport {
    #[serde(flatten)]
    envelope: Envelope,
    op: String,
    out: Option<String>,
    flat_count: usize,
    center_count: Option<usize>,
    b2: Option<usize>,
    verification: Option<IdentityCheck>,
    cut: Option<CutRegionReport>,
    modification_contrast: Option<CutRegionReport>,
}

pub fn run(p: Params) -> Result<bool> {
    let text = read_file(&p.file)?;
    let arrangement = Arrangement::from_json(&text)?;
    let envelope = Envelope::new(text.as_bytes());
    match p.op.as_str() {
        "modify" => {
            let Some(u) = p.flat_u.as_deref() else { bail!("modify needs --flat-u") };
            let Some(lam) = p.flat_lambda.as_deref() else { bail!("modify needs --flat-lambda") };
            let flat = Flat::new(parse_i64_list(u)?, parse_level(lam)?)?;
            let new = modify(&arrangement, flat.clone())?;
            let check = verify_additivity(&arrangement, &new, &flat)?;
            let out = write_out(&new, p.out.as_deref())?;
            let report = TransformReport {
                envelope,
                op: p.op,
                out,
                flat_count: new.flats.len(),
                center_count: None,
                b2: None,
                verification: Some(check),
                cut: None,
                modification_contrast: None,
            };
            print_report(&report)?;
            Ok(false)
        }
        "taubnut" => {
            let Some(m) = p.matrix.as_deref() else { bail!("taubnut needs --matrix") };
            let c = parse_matrix(m, arrangement.dimension)?;
            let new = taub_nut_deform(&arrangement, &c)?;
            let check = verify_constant_shift(&arrangement, &new, &c)?;
            let out = write_out(&new, p.out.as_deref())?;
            let report = TransformReport {
                envelope,
                op: p.op,
                out,
                flat_count: new.flats.len(),
                center_count: None,
                b2: None,
                verification: Some(check),
                cut: None,
                modification_contrast: None,
            };
            print_report(&report)?;
            Ok(false)
        }
        "scale" => {
            let Some(factor) = p.factor else { bail!("scale needs --factor") };
            let convention = match p.convention.as_str() {
                "times-c" => ScaleConvention::PointsTimesC,
                "over-c" => ScaleConvention::PointsOverC,
                other => bail!("unknown convention {other:?}"),
            };
            let new = scale(&arrangement, factor, convention)?;
            let check = verify_scaling(&arrangement, &new, factor, convention)?;
            let out = write_out(&new, p.out.as_deref())?;
            let report = TransformReport {
                envelope,
                op: p.op,
                out,
                flat_count: new.flats.len(),
                center_count: None,
                b2: None,
                verification: Some(check),
                cut: None,
                modification_contrast: None,
            };
            print_report(&report)?;
            Ok(false)
        }
        "iterate-ak" => {
            if arrangement.dimension != 1 {
                bail!("iterate-ak applies to dimension-1 arrangements");
            }
            let Some(k) = p.k else { bail!("iterate-ak needs --k") };
            let new_points: Vec<ImQuaternion> = match p.points.as_deref() {
                Some(s) => parse_point_list(s)?,
                None => (1..=k).map(|i| ImQuaternion::new(i as f64, 0.0, 0.0)).collect(),
            };
            if new_points.len() != k {
                bail!("iterate-ak adds k = {k} centers, got {}", new_points.len());
            }
            let mut current = arrangement;
            for q in &new_points {
                current = modify(&current, Flat::with_f64_level(vec![1], *q)?)?;
            }
            // Center census through the canonical slice.
            let centers: Vec<ImQuaternion> =
                current.flats.iter().map(|f| f.lambda_f64().scale(1.0 / f.u[0] as f64)).collect();
            let (_, ak) = multi_center(&centers, current.taub_nut[0][0])?;
            let out = write_out(&current, p.out.as_deref())?;
            let report = TransformReport {
                envelope,
                op: p.op,
                out,
                flat_count: current.flats.len(),
                center_count: Some(ak.center_count),
                b2: ak.b2,
                verification: None,
                cut: None,
                modification_contrast: None,
            };
            print_report(&report)?;
            Ok(false)
        }
        "cut" => {
            let Some(eps) = p.epsilon else { bail!("cut needs --epsilon") };
            let report = TransformReport {
                envelope,
                op: p.op,
                out: None,
                flat_count: arrangement.flats.len(),
                center_count: None,
                b2: None,
                verification: None,
                cut: Some(cut_region(eps)),
                modification_contrast: Some(modification_region(eps)),
            };
            print_report(&report)?;
            Ok(false)
        }
        other => bail!("unknown transform {other:?}"),
    }
}

fn parse_level(s: &str) -> Result<LevelVector> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        bail!("level needs three components");
    }
    let comp = |t: &str| -> Result<LevelScalar> {
        let t = t.trim();
        if t.contains('/') {
            Ok(LevelScalar::Rational(parse_rational(t).map_err(anyhow::Error::msg)?))
        } else if let Ok(i) = t.parse::<i64>() {
            Ok(LevelScalar::Rational(parse_rational(&i.to_string()).map_err(anyhow::Error::msg)?))
        } else {
            Ok(LevelScalar::Float(t.parse::<f64>()?))
        }
    };
    Ok(LevelVector([comp(parts[0])?, comp(parts[1])?, comp(parts[2])?]))
}

fn parse_matrix(s: &str, n: usize) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(parse_f64_list)
        .collect::<Result<_>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        bail!("matrix must be {n}×{n}");
    }
    Ok(rows)
}

fn write_out(a: &Arrangement, out: Option<&str>) -> Result<Option<String>> {
    match out {
        Some(path) => {
            std::fs::write(path, a.to_json()).with_context(|| format!("writing {path}"))?;
            Ok(Some(path.to_string()))
        }
        None => bail!("this transform needs --out"),
    }
}

/// Off-flat sample points for identity verification.
fn sample_points(a: &Arrangement, count: usize) -> Vec<hypertoric::TargetPoint> {
    let mut sp = SamplePoints::new();
    let mut out = Vec::new();
    let mut guard = 0;
    while out.len() < count && guard < 100 * count {
        guard += 1;
        let b = sp.target(a.dimension, 8.0);
        if a.flats.iter().all(|f| r_k(&b, f) > 0.25) {
            out.push(b);
        }
    }
    out
}

fn verify_additivity(old: &Arrangement, new: &Arrangement, flat: &Flat) -> Result<IdentityCheck> {
    let n = old.dimension;
    let uh = flat.u_hat();
    let mut max_err: f64 = 0.0;
    let samples = sample_points(new, 100);
    for b in &samples {
        let vo = metric_matrix(old, b, 1e-12)?.v;
        let vn = metric_matrix(new, b, 1e-12)?.v;
        let r = r_k(b, flat);
        for i in 0..n {
            for j in 0..n {
                let single = 0.5 * uh[i] * uh[j] / r;
                max_err = max_err.max((vn[i][j] - vo[i][j] - single).abs());
            }
        }
    }
    Ok(IdentityCheck {
        identity: "metric additivity of the added flat".into(),
        samples: samples.len(),
        max_error: max_err,
        pass: max_err <= 1e-12,
    })
}

fn verify_constant_shift(old: &Arrangement, new: &Arrangement, c: &[Vec<f64>]) -> Result<IdentityCheck> {
    let n = old.dimension;
    let mut max_err: f64 = 0.0;
    let samples = sample_points(old, 20);
    for b in &samples {
        let vo = metric_matrix(old, b, 1e-12)?.v;
        let vn = metric_matrix(new, b, 1e-12)?.v;
        for i in 0..n {
            for j in 0..n {
                max_err = max_err.max((vn[i][j] - vo[i][j] - c[i][j]).abs());
            }
        }
    }
    Ok(IdentityCheck {
        identity: "constant metric shift".into(),
        samples: samples.len(),
        max_error: max_err,
        pass: max_err <= 1e-12,
    })
}

fn verify_scaling(
    old: &Arrangement,
    new: &Arrangement,
    factor: f64,
    convention: ScaleConvention,
) -> Result<IdentityCheck> {
    let n = old.dimension;
    let mut max_err: f64 = 0.0;
    let samples = sample_points(old, 100);
    for b in &samples {
        let vo = metric_matrix(old, b, 1e-13)?.v;
        let image = match convention {
            ScaleConvention::PointsTimesC => b.scale(factor),
            ScaleConvention::PointsOverC => b.scale(1.0 / factor),
        };
        let vn = metric_matrix(new, &image, 1e-13)?.v;
        for i in 0..n {
            for j in 0..n {
                max_err = max_err.max((vn[i][j] - vo[i][j] / factor).abs() * factor.max(1.0));
            }
        }
    }
    Ok(IdentityCheck {
        identity: "scaled potential identity V'(image of p) = V(p)/C".into(),
        samples: samples.len(),
        max_error: max_err,
        pass: max_err <= 1e-12 * factor.max(1.0 / factor).max(1.0) * 10.0,
    })
}
