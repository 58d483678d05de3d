//! Batch check of the Lemma-1 certificate and the per-solution invariants.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use swipt_core::beamforming::{verify_lemma1, Method};
use swipt_core::channel::{generate_scenario, trial_seed, SystemConfig};
use swipt_core::metrics::FEASIBILITY_TOL;
use swipt_core::Error;

use crate::error::{CliError, CliResult};
use crate::sweep::{check_ordering, solve_outcome, TrialOutcome};

/// Largest accepted `tr(D)/P_max`.
pub const TRACE_D_TOL: f64 = 1e-6;
/// Largest accepted IU interference under the null-space designs, relative to `P_max`.
pub const INTERFERENCE_TOL: f64 = 1e-16;
/// Relative tolerance on the rates of IUs kept at their MRT power.
pub const EQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub trial: u64,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trial: u64,
    pub seed: u64,
    /// `None` when the null-space SDR with an energy block is infeasible.
    pub trace_d_rel: Option<f64>,
    pub lemma_trivial: bool,
    pub interlace_ok: bool,
    /// Objective per method, `None` where infeasible.
    pub objectives: Vec<(Method, Option<f64>)>,
    /// Largest interference of the null-space designs divided by `P_max`.
    pub max_interference_rel: f64,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub trials: usize,
    pub master_seed: u64,
    pub lemma_trivial: bool,
    pub lemma_checked: usize,
    pub worst_trace_d_rel: f64,
    pub max_interference_rel: f64,
    pub infeasible_trials: usize,
    pub reports: Vec<TrialReport>,
    pub violations: Vec<Violation>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "trials: {} (master seed {})", self.trials, self.master_seed);
        if self.lemma_trivial {
            let _ = writeln!(s, "lemma 1: trivial (empty D)");
        } else {
            let _ = writeln!(
                s,
                "lemma 1: {} solved, worst tr(D)/P_max = {:e}",
                self.lemma_checked, self.worst_trace_d_rel
            );
        }
        let _ = writeln!(s, "max interference / P_max: {:e}", self.max_interference_rel);
        let _ = writeln!(s, "infeasible trials: {}", self.infeasible_trials);
        for v in &self.violations {
            let _ = writeln!(s, "VIOLATION trial {} seed {}: {}", v.trial, v.seed, v.message);
        }
        let _ = writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// Runs the Lemma-1 check and all three designs on `trials` channel draws.
/// Violations are collected, solver failures abort.
pub fn cmd_verify(config: &SystemConfig, trials: usize) -> CliResult<VerifySummary> {
    config.validate()?;
    if trials == 0 {
        return Err(CliError::Config("verify needs at least one trial".into()));
    }
    let reports: Vec<CliResult<TrialReport>> =
        (0..trials as u64).into_par_iter().map(|t| verify_trial(config, t)).collect();
    let reports = reports.into_iter().collect::<CliResult<Vec<_>>>()?;

    let lemma_trivial = config.num_antennas == config.num_iu;
    let checked: Vec<f64> = reports.iter().filter_map(|r| r.trace_d_rel).collect();
    Ok(VerifySummary {
        trials,
        master_seed: config.master_seed,
        lemma_trivial,
        lemma_checked: if lemma_trivial { 0 } else { checked.len() },
        worst_trace_d_rel: checked.iter().copied().fold(0.0, f64::max),
        max_interference_rel: reports.iter().map(|r| r.max_interference_rel).fold(0.0, f64::max),
        infeasible_trials: reports
            .iter()
            .filter(|r| r.objectives.iter().any(|(_, o)| o.is_none()))
            .count(),
        violations: reports.iter().flat_map(|r| r.violations.iter().cloned()).collect(),
        reports,
    })
}

pub fn verify_trial(config: &SystemConfig, trial: u64) -> CliResult<TrialReport> {
    let seed = trial_seed(config.master_seed, trial);
    let channels = generate_scenario(config, trial)?;
    let mut violations = Vec::new();
    let mut flag = |message: String| violations.push(Violation { trial, seed, message });
    let solver_err = |what: &str, e: Error| CliError::Solver(format!("trial {trial} seed {seed} ({what}): {e}"));

    let (trace_d_rel, lemma_trivial, interlace_ok) = match verify_lemma1(&channels, config) {
        Ok(report) => {
            if !report.passes(TRACE_D_TOL) {
                flag(format!(
                    "lemma 1: tr(D)/P_max = {:e}, interlacing {}",
                    report.trace_d_rel,
                    if report.interlace_ok { "ok" } else { "violated" }
                ));
            }
            (Some(report.trace_d_rel), report.trivial, report.interlace_ok)
        }
        Err(Error::Infeasible { .. }) => (None, false, true),
        Err(e) => return Err(solver_err("lemma 1", e)),
    };

    let mut objectives = Vec::with_capacity(Method::ALL.len());
    let mut outcomes = Vec::with_capacity(Method::ALL.len());
    let mut max_interference_rel: f64 = 0.0;
    for method in Method::ALL {
        let (outcome, sol) = solve_outcome(method, &channels, config).map_err(|e| solver_err(method.name(), e))?;
        outcomes.push((method, outcome));
        objectives.push((method, outcome.objective()));
        let Some(sol) = sol else { continue };

        let report = sol.metrics(&channels, config);
        for v in &report.violations {
            flag(format!("{}: {v}", method.name()));
        }
        for (i, r) in sol.per_user_rate.iter().enumerate() {
            let target = config.rate_target(i);
            if *r < target - FEASIBILITY_TOL {
                flag(format!("{}: IU {i} rate {r} below {target}", method.name()));
            }
            if method == Method::LowComplexity
                && sol.chosen_index != Some(i)
                && (r - target).abs() > EQUALITY_TOL * target
            {
                flag(format!("{}: IU {i} rate {r} differs from {target}", method.name()));
            }
        }
        if method != Method::FullSdr {
            let rel = sol.interference(&channels) / config.p_max;
            max_interference_rel = max_interference_rel.max(rel);
            if rel > INTERFERENCE_TOL {
                flag(format!("{}: interference / P_max = {rel:e}", method.name()));
            }
        }
    }
    if let Err(msg) = check_ordering(&outcomes) {
        flag(format!("ordering: {msg}"));
    }
    let feasible = |m: Method| outcomes.iter().any(|(k, o)| *k == m && matches!(o, TrialOutcome::Feasible { .. }));
    if feasible(Method::LowComplexity) != feasible(Method::NullspaceSdr) {
        flag("nullspace_sdr and lowcomplexity disagree on feasibility".into());
    }

    Ok(TrialReport {
        trial,
        seed,
        trace_d_rel,
        lemma_trivial,
        interlace_ok,
        objectives,
        max_interference_rel,
        violations,
    })
}
