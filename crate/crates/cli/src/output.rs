//! Text formats. Every writer returns the whole file so callers can write it
//! in one go; numbers use 17 significant digits, which round-trip `f64`.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use xyconv_core::convertibility::MajorizationProfile;
use xyconv_core::sweep::{PhaseDiagramGrid, SignMap};
use xyconv_core::{ConvertibilityVerdict, Order, RenyiCurve, ScalingResult, SchmidtSpectrum};

use crate::config::RunConfig;

pub const GRID_HEADER: &str =
    "gamma,h,locc,elocc,degenerate,gap,S1,lambda1,lambda2,lambda3,lambda4";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn order_tag(order: Order) -> String {
    match order {
        Order::Finite(a) => num(a),
        other => other.to_string(),
    }
}

fn run_line(out: &mut String, run_id: &str) {
    writeln!(out, "# run_id={run_id}").unwrap();
}

/// `grid.csv`. Failed cells carry `failed` verdicts and `NaN` numbers.
pub fn grid_csv(run_id: &str, grid: &PhaseDiagramGrid) -> String {
    let mut out = String::new();
    run_line(&mut out, run_id);
    out.push_str(GRID_HEADER);
    out.push('\n');
    for cell in &grid.cells {
        let (g, h) = (num(cell.gamma), num(cell.h));
        match &cell.outcome {
            Ok(d) => {
                let lambda: Vec<String> = (0..4)
                    .map(|k| num(d.lambdas.get(k).copied().unwrap_or(0.0)))
                    .collect();
                writeln!(
                    out,
                    "{g},{h},{},{},{},{},{},{}",
                    d.verdict.locc.code(),
                    d.verdict.elocc.code(),
                    d.verdict.degenerate,
                    num(d.gap),
                    num(d.s1),
                    lambda.join(",")
                )
                .unwrap();
            }
            Err(_) => {
                writeln!(out, "{g},{h},failed,failed,,NaN,NaN,NaN,NaN,NaN,NaN").unwrap();
            }
        }
    }
    out
}

/// `sign_map.csv`: one row per `(γ, h, α)`.
pub fn sign_map_csv(run_id: &str, maps: &[SignMap]) -> String {
    let mut out = String::new();
    run_line(&mut out, run_id);
    out.push_str("gamma,h,alpha,dS,sign\n");
    for map in maps {
        for (i, h) in map.fields.iter().enumerate() {
            for (k, order) in map.orders.iter().enumerate() {
                let (d, sign) = match &map.derivatives[i] {
                    Ok(d) => (num(d[k]), map.sign(i, k).map_or("failed", |s| s.code())),
                    Err(_) => ("NaN".to_string(), "failed"),
                };
                writeln!(
                    out,
                    "{},{},{},{d},{sign}",
                    num(map.gamma),
                    num(*h),
                    order_tag(*order)
                )
                .unwrap();
            }
        }
    }
    out
}

/// One Rényi curve; the limits appear as `0+`, `1` and `inf`.
pub fn curve_csv(run_id: &str, chain_len: usize, gamma: f64, h: f64, curve: &RenyiCurve) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# run_id={run_id} L={chain_len} gamma={} h={}",
        num(gamma),
        num(h)
    )
    .unwrap();
    out.push_str("alpha,S\n");
    for (order, s) in curve.orders.iter().zip(&curve.entropies) {
        writeln!(out, "{},{}", order_tag(*order), num(*s)).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizationRecord {
    pub gamma: f64,
    pub h: f64,
    pub h_delta: f64,
    pub spectrum_h: Vec<f64>,
    pub spectrum_h_delta: Vec<f64>,
    pub partial_sums_h: Vec<f64>,
    pub partial_sums_h_delta: Vec<f64>,
    pub locc: String,
    pub elocc: String,
    pub degenerate: bool,
}

impl MajorizationRecord {
    pub fn new(
        gamma: f64,
        h: f64,
        h_delta: f64,
        at_h: &SchmidtSpectrum,
        at_hd: &SchmidtSpectrum,
        v: &ConvertibilityVerdict,
    ) -> Self {
        MajorizationRecord {
            gamma,
            h,
            h_delta,
            spectrum_h: at_h.values().to_vec(),
            spectrum_h_delta: at_hd.values().to_vec(),
            partial_sums_h: MajorizationProfile::of(at_h).partial_sums,
            partial_sums_h_delta: MajorizationProfile::of(at_hd).partial_sums,
            locc: v.locc.code().into(),
            elocc: v.elocc.code().into(),
            degenerate: v.degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizationFile {
    pub run_id: String,
    pub pairs: Vec<MajorizationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    #[serde(rename = "L")]
    pub chain_len: usize,
    pub h_c: Option<f64>,
    pub artifact: bool,
    /// Whether the sample entered the fit, and why not.
    pub used: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFile {
    pub run_id: String,
    pub gamma: f64,
    pub kind: crate::config::KindName,
    pub criterion: crate::config::CriterionName,
    pub samples: Vec<ScalingSample>,
    pub fit: Option<ScalingResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub run_id: String,
    pub command: String,
    pub config: RunConfig,
    pub outputs: Vec<String>,
    pub cells: usize,
    pub failed_cells: usize,
    pub wall_clock_seconds: f64,
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0), "1.0000000000000000e0");
        let x = 0.123_456_789_012_345_67_f64;
        assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn limit_tags() {
        assert_eq!(order_tag(Order::ZeroLimit), "0+");
        assert_eq!(order_tag(Order::One), "1");
        assert_eq!(order_tag(Order::Infinity), "inf");
    }
}
