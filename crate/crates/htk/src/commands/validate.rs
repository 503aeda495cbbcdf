//! `htk validate`: primitivity/span, smoothness conditions (a) and (b),
//! convergence of infinite families.

use anyhow::Result;
use serde::Serialize;

use hypertoric::arrangement::{self, Arrangement};
use hypertoric::NumericContext;

use crate::util::{print_report, read_file, Envelope};

#[derive(Serialize)]
struct PrimitiveSection {
    pass: bool,
    weights_span: bool,
    non_primitive: Vec<String>,
}

#[derive(Serialize)]
struct ConditionASection {
    pass: bool,
    candidate_points: usize,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct ConditionBSection {
    pass: bool,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct FamilySection {
    converges: bool,
    n_terms: Option<u64>,
    partial_sum: Option<f64>,
    tail_estimate: Option<f64>,
    tail_error_bound: Option<f64>,
    divergence_partial_sum: Option<f64>,
    divergence_n_terms: Option<u64>,
}

#[derive(Serialize)]
struct ConvergenceSection {
    pass: bool,
    families: Vec<FamilySection>,
}

#[derive(Serialize)]
struct ValidateReport {
    #[serde(flatten)]
    envelope: Envelope,
    pass: bool,
    primitive: PrimitiveSection,
    condition_a: ConditionASection,
    condition_b: ConditionBSection,
    convergence: ConvergenceSection,
}

pub fn run(path: &str, tol: f64) -> Result<bool> {
    let text = read_file(path)?;
    let arrangement = Arrangement::from_json(&text)?;
    let report = build_report(&arrangement, Envelope::new(text.as_bytes()), tol);
    let violations = !report.pass;
    print_report(&report)?;
    Ok(violations)
}

fn build_report(a: &Arrangement, envelope: Envelope, tol: f64) -> ValidateReport {
    let ctx = NumericContext { residual_tol: tol, ..NumericContext::default() };
    let prim = arrangement::validate_primitive(a);
    let cond_a = arrangement::condition_a(a, &ctx);
    let cond_b = arrangement::condition_b(a, &ctx);
    let conv = arrangement::convergence_check(a, 1e-8, 10.0);
    let pass = prim.pass && cond_a.pass && cond_b.pass && conv.all_converge;
    ValidateReport {
        envelope,
        pass,
        primitive: PrimitiveSection {
            pass: prim.pass,
            weights_span: prim.weights_span,
            non_primitive: prim.non_primitive,
        },
        condition_a: ConditionASection {
            pass: cond_a.pass,
            candidate_points: cond_a.candidate_points,
            violations: cond_a
                .violations
                .iter()
                .map(|v| {
                    let flats: Vec<String> = v.flats.iter().map(|f| f.to_string()).collect();
                    format!("point on {} flats: {}", flats.len(), flats.join(", "))
                })
                .collect(),
        },
        condition_b: ConditionBSection {
            pass: cond_b.pass,
            violations: cond_b
                .violations
                .iter()
                .map(|v| {
                    let flats: Vec<String> = v.flats.iter().map(|f| f.to_string()).collect();
                    match &v.det {
                        Some(d) => format!("det {} for {}", d, flats.join(", ")),
                        None => format!("dependent intersecting subset {}", flats.join(", ")),
                    }
                })
                .collect(),
        },
        convergence: ConvergenceSection {
            pass: conv.all_converge,
            families: conv
                .families
                .iter()
                .map(|f| FamilySection {
                    converges: f.converges,
                    n_terms: f.witness.as_ref().map(|w| w.n_terms),
                    partial_sum: f.witness.as_ref().map(|w| w.partial_sum),
                    tail_estimate: f.witness.as_ref().map(|w| w.tail_estimate),
                    tail_error_bound: f.witness.as_ref().map(|w| w.tail_error_bound),
                    divergence_partial_sum: f.divergence.as_ref().map(|d| d.partial_sum),
                    divergence_n_terms: f.divergence.as_ref().map(|d| d.n_terms),
                })
                .collect(),
        },
    }
}
