//! Experiment driver for the SWIPT beamforming designs: parameter sweeps,
//! invariant verification, the complexity table and single-scenario dumps.

pub mod complexity;
pub mod error;
pub mod solve;
pub mod sweep;
pub mod verify;

use std::path::Path;

pub use error::{CliError, CliResult};
use swipt_core::beamforming::Method;
pub use sweep::{run_sweep, Axis, ResultRow, SweepSpec};

/// Loads a sweep document or bare system configuration; defaults when no
/// path is given.
pub fn load_spec(path: Option<&Path>) -> CliResult<SweepSpec> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            SweepSpec::from_json(&text)
        }
        None => Ok(SweepSpec::new(Default::default(), Axis::PMax)),
    }
}

/// Parses a comma-separated method list such as `full_sdr,lowcomplexity`.
pub fn parse_methods(list: &str) -> CliResult<Vec<Method>> {
    list.split(',')
        .map(|s| {
            let s = s.trim();
            Method::parse(s).ok_or_else(|| CliError::Config(format!("unknown method {s:?}")))
        })
        .collect()
}

/// Parses a comma-separated list of sweep values.
pub fn parse_values(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad sweep value {s:?}")))
        })
        .collect()
}
