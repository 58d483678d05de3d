//! Single-scenario solve with a JSON dump of beams and metrics.

use serde::Serialize;
use swipt_core::beamforming::Method;
use swipt_core::channel::{generate_scenario, SystemConfig};
use swipt_core::linalg::ComplexVector;
use swipt_core::metrics::MetricsReport;

use crate::error::{CliError, CliResult};
use crate::sweep::solve_outcome;

#[derive(Debug, Clone, Serialize)]
pub struct SolveDump {
    pub config: SystemConfig,
    pub trial: u64,
    pub seed: u64,
    pub aod_iu: Vec<f64>,
    pub aod_eu: Vec<f64>,
    pub rho_iu: Vec<f64>,
    pub rho_eu: Vec<f64>,
    pub results: Vec<MethodDump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodDump {
    pub method: Method,
    pub feasible: bool,
    /// Beams as `[re, im]` pairs per antenna.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_defects: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
}

fn pairs(x: &ComplexVector) -> Vec<[f64; 2]> {
    x.iter().map(|z| [z.re, z.im]).collect()
}

pub fn cmd_solve(config: &SystemConfig, trial: u64, methods: &[Method]) -> CliResult<SolveDump> {
    let channels = generate_scenario(config, trial)?;
    let mut results = Vec::with_capacity(methods.len());
    for &method in methods {
        let (_, sol) = solve_outcome(method, &channels, config)
            .map_err(|e| CliError::Solver(format!("trial {trial} ({}): {e}", method.name())))?;
        let dump = match sol {
            Some(sol) => MethodDump {
                method,
                feasible: true,
                w: Some(sol.w.iter().map(pairs).collect()),
                v: sol.v.as_ref().map(pairs),
                chosen_index: sol.chosen_index,
                objective: Some(sol.objective),
                rank_defects: Some(sol.rank_defects.clone()),
                solver_iterations: Some(sol.solver_stats.iterations),
                metrics: Some(sol.metrics(&channels, config)),
            },
            None => MethodDump {
                method,
                feasible: false,
                w: None,
                v: None,
                chosen_index: None,
                objective: None,
                rank_defects: None,
                solver_iterations: None,
                metrics: None,
            },
        };
        results.push(dump);
    }
    Ok(SolveDump {
        config: config.clone(),
        trial,
        seed: channels.seed,
        aod_iu: channels.aod_iu.clone(),
        aod_eu: channels.aod_eu.clone(),
        rho_iu: channels.rho_iu.clone(),
        rho_eu: channels.rho_eu.clone(),
        results,
    })
}
