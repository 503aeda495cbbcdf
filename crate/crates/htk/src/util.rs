//! Shared CLI helpers: deterministic report envelope, number formatting,
//! small parsers.

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use hypertoric::algebra::{ImQuaternion, TargetPoint};
use hypertoric::potential::GridSpec;

/// Envelope common to every report; serialized first for stable output.
#[derive(Serialize)]
pub struct Envelope {
    pub command: String,
    pub input_digest: String,
    pub version: &'static str,
}

impl Envelope {
    pub fn new(input: &[u8]) -> Self {
        let digest = Sha256::digest(input);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Envelope {
            command: std::env::args().collect::<Vec<_>>().join(" "),
            input_digest: hex,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// 17-significant-digit decimal form used in CSV output.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
}

pub fn print_report<T: Serialize>(report: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    println!("{text}");
    Ok(())
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| anyhow!("bad number {p:?}: {e}")))
        .collect()
}

pub fn parse_i64_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|e| anyhow!("bad integer {p:?}: {e}")))
        .collect()
}

/// Points "x,y,z;x,y,z;...".
pub fn parse_point_list(s: &str) -> Result<Vec<ImQuaternion>> {
    s.split(';')
        .map(|chunk| {
            let v = parse_f64_list(chunk)?;
            if v.len() != 3 {
                bail!("point {chunk:?} must have three coordinates");
            }
            Ok(ImQuaternion::new(v[0], v[1], v[2]))
        })
        .collect()
}

/// Grid "x0,y0,z0:x1,y1,z1:nx,ny,nz".
pub fn parse_grid(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("grid spec needs three ':'-separated groups");
    }
    let from = parse_f64_list(parts[0])?;
    let to = parse_f64_list(parts[1])?;
    let counts = parse_i64_list(parts[2])?;
    if from.len() != 3 || to.len() != 3 || counts.len() != 3 {
        bail!("grid spec needs three values per group");
    }
    if counts.iter().any(|&c| c < 1) {
        bail!("grid counts must be at least 1");
    }
    Ok(GridSpec {
        from: [from[0], from[1], from[2]],
        to: [to[0], to[1], to[2]],
        counts: [counts[0] as usize, counts[1] as usize, counts[2] as usize],
    })
}

pub fn parse_target_point(s: &str, n: usize) -> Result<TargetPoint> {
    let v = parse_f64_list(s)?;
    if v.len() != 3 * n {
        bail!("target point needs {} values (3n), got {}", 3 * n, v.len());
    }
    Ok(TargetPoint::from_flat(&v))
}

/// Deterministic quasi-random stream for verification sample points.
pub struct SamplePoints {
    state: u64,
}

impl SamplePoints {
    pub fn new() -> Self {
        SamplePoints { state: 0x9e3779b97f4a7c15 }
    }

    fn next_f64(&mut self) -> f64 {
        // xorshift64*; plenty for sampling verification points.
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        let bits = x.wrapping_mul(0x2545f4914f6cdd1d);
        (bits >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn im(&mut self, scale: f64) -> ImQuaternion {
        ImQuaternion::new(
            scale * (self.next_f64() - 0.5),
            scale * (self.next_f64() - 0.5),
            scale * (self.next_f64() - 0.5),
        )
    }

    pub fn target(&mut self, n: usize, scale: f64) -> TargetPoint {
        TargetPoint::new((0..n).map(|_| self.im(scale)).collect())
    }
}
