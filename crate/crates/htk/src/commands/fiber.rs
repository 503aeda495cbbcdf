//! `htk fiber`: SU(2)/SU(3) fiber classification from a target file, or a
//! torus fiber witness over an arrangement.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use hypertoric::arrangement::Arrangement;
use hypertoric::fibers::cmat::CMat;
use hypertoric::fibers::oracle::oracle_classify;
use hypertoric::fibers::{classify, mu, CotangentPoint, FiberKind, MomentTarget};
use hypertoric::quotient::{fiber_point, zero_set_residual};

use crate::util::{parse_f64_list, print_report, read_file, Envelope};

/// Complex entries serialized as `[re, im]` pairs.
#[derive(Deserialize)]
struct TargetFile {
    alpha: Vec<Vec<[f64; 2]>>,
    beta: Vec<Vec<[f64; 2]>>,
}

fn to_cmat(rows: &[Vec<[f64; 2]>]) -> CMat {
    rows.iter()
        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect()
}

fn witness_json(w: &CotangentPoint) -> WitnessJson {
    WitnessJson {
        z: w.z.iter().map(|c| [c.re, c.im]).collect(),
        w: w.w.iter().map(|c| [c.re, c.im]).collect(),
    }
}

#[derive(Serialize)]
struct WitnessJson {
    z: Vec<[f64; 2]>,
    w: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ClassifyJson {
    kind: String,
    count: usize,
    branch_path: Vec<String>,
    boundary: bool,
    residuals: Vec<f64>,
    witnesses: Vec<WitnessJson>,
}

fn classify_json(r: &hypertoric::fibers::FiberReport) -> ClassifyJson {
    ClassifyJson {
        kind: match r.kind {
            FiberKind::Empty => "empty".into(),
            FiberKind::Point => "point".into(),
            FiberKind::Circles(_) => "circles".into(),
        },
        count: r.component_count(),
        branch_path: r.branch_path.clone(),
        boundary: r.boundary,
        residuals: r.residuals.clone(),
        witnesses: r.witnesses.iter().map(witness_json).collect(),
    }
}

#[derive(Serialize)]
struct FiberReportJson {
    #[serde(flatten)]
    envelope: Envelope,
    group: String,
    classification: ClassifyJson,
    oracle: Option<ClassifyJson>,
    oracle_agrees: Option<bool>,
}

#[derive(Serialize)]
struct TorusReportJson {
    #[serde(flatten)]
    envelope: Envelope,
    group: String,
    residual: f64,
    in_zero_set: bool,
    coordinates: Vec<[f64; 4]>,
}

pub fn run(
    path: &str,
    group: &str,
    oracle: bool,
    point: Option<String>,
    phases: Option<String>,
) -> Result<bool> {
    let text = read_file(path)?;
    match group {
        "su2" | "su3" => {
            let file: TargetFile =
                serde_json::from_str(&text).with_context(|| format!("parsing target {path}"))?;
            let target = MomentTarget::new(to_cmat(&file.alpha), to_cmat(&file.beta))?;
            let expected = if group == "su2" { 2 } else { 3 };
            if target.dimension() != expected {
                bail!("target is {0}×{0} but group {group} expects {expected}×{expected}", target.dimension());
            }
            let r = classify(&target);
            let oracle_report = oracle.then(|| oracle_classify(&target, 2048));
            let oracle_agrees = oracle_report.as_ref().map(|o| o.kind == r.kind);
            // Witness sanity independent of the solver path.
            for w in &r.witnesses {
                let res = mu(w).distance(&target);
                if res > 1e-9 * (1.0 + target.norm()) {
                    bail!("internal witness validation failed: residual {res:.3e}");
                }
            }
            let report = FiberReportJson {
                envelope: Envelope::new(text.as_bytes()),
                group: group.to_string(),
                classification: classify_json(&r),
                oracle: oracle_report.as_ref().map(classify_json),
                oracle_agrees,
            };
            print_report(&report)?;
            Ok(false)
        }
        "torus" => {
            let arrangement = Arrangement::from_json(&text)?;
            let n = arrangement.dimension;
            let m = arrangement.flats.len();
            let Some(point) = point else { bail!("torus mode needs --point") };
            let b = crate::util::parse_target_point(&point, n)?;
            let phases: Vec<f64> = match phases {
                Some(s) => parse_f64_list(&s)?,
                None => vec![0.0; m],
            };
            if phases.len() != m {
                bail!("need {m} phases (one per flat)");
            }
            let x = fiber_point(&arrangement, &b, &phases)?;
            let (_, residual) = zero_set_residual(&arrangement, &x)?;
            let report = TorusReportJson {
                envelope: Envelope::new(text.as_bytes()),
                group: group.to_string(),
                residual,
                in_zero_set: residual <= 1e-10,
                coordinates: x
                    .coords
                    .iter()
                    .map(|q| [q.re, q.im_i, q.im_j, q.im_k])
                    .collect(),
            };
            print_report(&report)?;
            Ok(false)
        }
        other => bail!("unknown group {other:?}"),
    }
}
