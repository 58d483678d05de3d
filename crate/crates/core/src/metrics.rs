//! Link metrics for a set of beams and the interior-point complexity model.

use serde::{Deserialize, Serialize};

use crate::beamforming::BeamformingSolution;
use crate::channel::{ChannelSet, SystemConfig};
use crate::linalg::ComplexVector;

/// Relative tolerance used when judging rate and power feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub sinr: Vec<f64>,
    /// `log2(1 + sinr)` in bits/s/Hz.
    pub rate: Vec<f64>,
    /// Received power at each EU, watts.
    pub eu_power: Vec<f64>,
    /// Sum of `eu_power`.
    pub total_power: f64,
    pub tx_power_used: f64,
    pub feasible: bool,
    pub violations: Vec<String>,
}

/// Evaluates a beamforming solution on its channels.
pub fn evaluate(solution: &BeamformingSolution, channels: &ChannelSet, config: &SystemConfig) -> MetricsReport {
    evaluate_beams(&solution.w, solution.v.as_ref(), channels, config)
}

/// SINR of every IU, with the energy beam `v` counted as interference, and
/// received power of every EU.
pub fn evaluate_beams(
    w: &[ComplexVector],
    v: Option<&ComplexVector>,
    channels: &ChannelSet,
    config: &SystemConfig,
) -> MetricsReport {
    let gain = |h: &ComplexVector, x: &ComplexVector| h.dotc(x).norm_sqr();

    let mut sinr = Vec::with_capacity(w.len());
    let mut rate = Vec::with_capacity(w.len());
    let mut violations = Vec::new();
    for (i, h) in channels.h_iu.iter().enumerate() {
        let rho = channels.rho_iu[i];
        let signal = rho * gain(h, &w[i]);
        let mut interference: f64 = w
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != i)
            .map(|(_, wl)| rho * gain(h, wl))
            .sum();
        if let Some(v) = v {
            interference += rho * gain(h, v);
        }
        let eta = signal / (interference + config.noise_power);
        let r = eta.ln_1p() / std::f64::consts::LN_2;
        let target = config.rate_target(i);
        if r < target - FEASIBILITY_TOL {
            violations.push(format!("IU {i}: rate {r:.9} below target {target}"));
        }
        sinr.push(eta);
        rate.push(r);
    }

    let eu_power: Vec<f64> = channels
        .h_eu
        .iter()
        .zip(&channels.rho_eu)
        .map(|(h, rho)| {
            let from_ib: f64 = w.iter().map(|wi| gain(h, wi)).sum();
            let from_eb = v.map_or(0.0, |v| gain(h, v));
            rho * (from_ib + from_eb)
        })
        .collect();
    let total_power = eu_power.iter().sum();

    let tx_power_used = w.iter().map(|x| x.norm_squared()).sum::<f64>() + v.map_or(0.0, |v| v.norm_squared());
    if tx_power_used > config.p_max * (1.0 + FEASIBILITY_TOL) {
        violations.push(format!(
            "transmit power {tx_power_used:.9e} W exceeds budget {} W",
            config.p_max
        ));
    }

    MetricsReport {
        sinr,
        rate,
        eu_power,
        total_power,
        tx_power_used,
        feasible: violations.is_empty(),
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityMethod {
    /// Full SDR with one energy beam.
    P12,
    /// Null-space SDR.
    P22,
    /// Low-complexity design.
    P3,
}

impl ComplexityMethod {
    pub const ALL: [ComplexityMethod; 3] = [ComplexityMethod::P12, ComplexityMethod::P22, ComplexityMethod::P3];

    pub fn label(self) -> &'static str {
        match self {
            ComplexityMethod::P12 => "P1.2",
            ComplexityMethod::P22 => "P2.2",
            ComplexityMethod::P3 => "P3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityEstimate {
    pub method: ComplexityMethod,
    pub flops: f64,
    /// `1 − flops / flops(P1.2)`.
    pub reduction_vs_p12: f64,
}

/// Operation count of each design with unit big-O constants.
fn flops(method: ComplexityMethod, k: f64, m: f64) -> f64 {
    let d = m - k + 1.0;
    match method {
        ComplexityMethod::P12 => ((k + 1.0) * m).powf(3.5) + (k + 1.0) * m.powi(3),
        ComplexityMethod::P22 => (k * d).powf(3.5) + k * d.powi(3) + k * m * (k - 1.0).powi(2),
        ComplexityMethod::P3 => k * (d.powf(3.5) + d.powi(3) + m * (k - 1.0).powi(2)),
    }
}

pub fn complexity_estimate(method: ComplexityMethod, num_iu: usize, num_antennas: usize) -> ComplexityEstimate {
    let (k, m) = (num_iu as f64, num_antennas as f64);
    let f = flops(method, k, m);
    ComplexityEstimate {
        method,
        flops: f,
        reduction_vs_p12: 1.0 - f / flops(ComplexityMethod::P12, k, m),
    }
}
