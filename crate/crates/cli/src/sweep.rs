//! Monte-Carlo sweeps over one system parameter with paired channels.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use swipt_core::beamforming::{BeamformingSolution, Method};
use swipt_core::channel::{generate_scenario, PerUser, SystemConfig};
use swipt_core::Error;

use crate::error::{CliError, CliResult};

/// Relative slack allowed when comparing objectives across methods.
pub const ORDERING_TOL: f64 = 1e-6;

pub const CSV_HEADER: &str =
    "axis,axis_value,method,mean_total_power_w,std_err_w,feasible_fraction,mean_rate_slack,mean_rank_defect,trials";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "P_max")]
    PMax,
    #[serde(rename = "T")]
    RateTarget,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "M")]
    Antennas,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::PMax, Axis::RateTarget, Axis::Kappa, Axis::Antennas];

    pub fn name(self) -> &'static str {
        match self {
            Axis::PMax => "P_max",
            Axis::RateTarget => "T",
            Axis::Kappa => "kappa",
            Axis::Antennas => "M",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            Axis::PMax => vec![0.5, 1.0, 2.0, 4.0, 8.0],
            Axis::RateTarget => vec![2.0, 4.0, 6.0, 8.0, 10.0],
            Axis::Kappa => vec![0.0, 1.0, 5.0, 10.0],
            Axis::Antennas => vec![4.0, 5.0, 6.0, 8.0],
        }
    }

    /// `base` with this parameter set to `value` (for every user where the
    /// parameter is per user).
    pub fn apply(self, base: &SystemConfig, value: f64) -> CliResult<SystemConfig> {
        let mut cfg = base.clone();
        match self {
            Axis::PMax => cfg.p_max = value,
            Axis::RateTarget => cfg.rate_targets = PerUser::All(value),
            Axis::Kappa => {
                cfg.kappa_iu = PerUser::All(value);
                cfg.kappa_eu = PerUser::All(value);
            }
            Axis::Antennas => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(CliError::Config(format!("M must be a positive integer, got {value}")));
                }
                cfg.num_antennas = value as usize;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub master_seed: u64,
}

/// On-disk form of [`SweepSpec`]; absent fields fall back to defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    base: Option<SystemConfig>,
    axis: Option<Axis>,
    values: Option<Vec<f64>>,
    methods: Option<Vec<Method>>,
    trials: Option<usize>,
    master_seed: Option<u64>,
}

impl SweepSpec {
    /// All methods over the default grid of `axis`, with trial count and seed
    /// taken from `base`.
    pub fn new(base: SystemConfig, axis: Axis) -> Self {
        Self {
            values: axis.default_values(),
            methods: Method::ALL.to_vec(),
            trials: base.mc_trials,
            master_seed: base.master_seed,
            axis,
            base,
        }
    }

    /// Reads either a sweep document (`base`, `axis`, `values`, ...) or a
    /// bare system configuration, which is swept along `P_max`.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        const SWEEP_KEYS: [&str; 6] = ["base", "axis", "values", "methods", "trials", "master_seed"];
        let is_sweep = value
            .as_object()
            .is_some_and(|obj| obj.keys().all(|k| SWEEP_KEYS.contains(&k.as_str())) && !obj.is_empty());
        if !is_sweep {
            let base: SystemConfig = serde_json::from_value(value)?;
            return Ok(Self::new(base, Axis::PMax));
        }
        let file: SweepFile = serde_json::from_value(value)?;
        let mut spec = Self::new(file.base.unwrap_or_default(), file.axis.unwrap_or(Axis::PMax));
        if let Some(values) = file.values {
            spec.values = values;
        }
        if let Some(methods) = file.methods {
            spec.methods = methods;
        }
        if let Some(trials) = file.trials {
            spec.trials = trials;
        }
        if let Some(seed) = file.master_seed {
            spec.master_seed = seed;
        }
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.values.is_empty() {
            return Err(CliError::Config("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) || self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("sweep values must be finite and strictly increasing".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("sweep needs at least one method".into()));
        }
        if self.trials == 0 {
            return Err(CliError::Config("sweep needs at least one trial".into()));
        }
        self.point_configs().map(|_| ())
    }

    /// One configuration per sweep value, all sharing the master seed.
    pub fn point_configs(&self) -> CliResult<Vec<SystemConfig>> {
        self.values
            .iter()
            .map(|&v| {
                let mut cfg = self.axis.apply(&self.base, v)?;
                cfg.master_seed = self.master_seed;
                Ok(cfg)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub axis: Axis,
    pub axis_value: f64,
    pub method: Method,
    /// Mean received power at the EUs in watts; infeasible trials count as 0.
    pub mean_total_power: f64,
    pub std_err: f64,
    pub feasible_fraction: f64,
    /// Mean over feasible trials of `min_i (rate_i − T_i)`; NaN if none.
    pub mean_rate_slack: f64,
    /// Mean over feasible trials of the largest rank defect; NaN if none.
    pub mean_rank_defect: f64,
    pub trials: usize,
}

/// What one method produced on one channel draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialOutcome {
    Feasible {
        objective: f64,
        rate_slack: f64,
        rank_defect: f64,
    },
    Infeasible,
}

impl TrialOutcome {
    pub fn objective(&self) -> Option<f64> {
        match self {
            TrialOutcome::Feasible { objective, .. } => Some(*objective),
            TrialOutcome::Infeasible => None,
        }
    }
}

/// Solves one method, turning infeasibility into an outcome and keeping any
/// other error.
pub fn solve_outcome(
    method: Method,
    channels: &swipt_core::channel::ChannelSet,
    config: &SystemConfig,
) -> Result<(TrialOutcome, Option<BeamformingSolution>), Error> {
    match method.solve(channels, config) {
        Ok(sol) => {
            let rate_slack = sol
                .per_user_rate
                .iter()
                .enumerate()
                .map(|(i, r)| r - config.rate_target(i))
                .fold(f64::INFINITY, f64::min);
            let rank_defect = sol.rank_defects.iter().copied().fold(0.0, f64::max);
            let outcome = TrialOutcome::Feasible {
                objective: sol.objective,
                rate_slack,
                rank_defect,
            };
            Ok((outcome, Some(sol)))
        }
        Err(Error::Infeasible { .. } | Error::InfeasibleBudget { .. } | Error::RankOneRepair { .. }) => {
            Ok((TrialOutcome::Infeasible, None))
        }
        Err(e) => Err(e),
    }
}

/// Checks `lowcomplexity ≤ nullspace_sdr ≤ full_sdr` among the feasible
/// outcomes present in `pairs`.
pub fn check_ordering(pairs: &[(Method, TrialOutcome)]) -> Result<(), String> {
    let get = |m: Method| pairs.iter().find(|(k, _)| *k == m).and_then(|(_, o)| o.objective());
    let chain = [Method::LowComplexity, Method::NullspaceSdr, Method::FullSdr];
    for (lo, hi) in [(chain[0], chain[1]), (chain[1], chain[2]), (chain[0], chain[2])] {
        if let (Some(a), Some(b)) = (get(lo), get(hi)) {
            if a > b + ORDERING_TOL * a.abs().max(b.abs()) {
                return Err(format!("{} = {a:e} exceeds {} = {b:e}", lo.name(), hi.name()));
            }
        }
    }
    Ok(())
}

fn run_trial(config: &SystemConfig, trial: u64, methods: &[Method]) -> CliResult<Vec<TrialOutcome>> {
    let channels = generate_scenario(config, trial)?;
    let mut outcomes = Vec::with_capacity(methods.len());
    for &m in methods {
        let (outcome, _) = solve_outcome(m, &channels, config)
            .map_err(|e| CliError::Solver(format!("trial {trial} ({}): {e}", m.name())))?;
        outcomes.push(outcome);
    }
    let pairs: Vec<(Method, TrialOutcome)> = methods.iter().copied().zip(outcomes.iter().copied()).collect();
    check_ordering(&pairs).map_err(|msg| CliError::Invariant(format!("trial {trial}: {msg}")))?;
    Ok(outcomes)
}

/// Runs every (value, trial) pair on the rayon pool and reduces in
/// (value, trial) order, so the result does not depend on the thread count.
pub fn run_sweep(spec: &SweepSpec) -> CliResult<Vec<ResultRow>> {
    spec.validate()?;
    let configs = spec.point_configs()?;
    let trials = spec.trials as u64;
    let jobs: Vec<(usize, u64)> = (0..configs.len()).flat_map(|v| (0..trials).map(move |t| (v, t))).collect();
    let results: Vec<CliResult<Vec<TrialOutcome>>> = jobs
        .par_iter()
        .map(|&(v, t)| {
            run_trial(&configs[v], t, &spec.methods).map_err(|e| match e {
                CliError::Solver(msg) => CliError::Solver(format!("{} = {}: {msg}", spec.axis.name(), spec.values[v])),
                CliError::Invariant(msg) => {
                    CliError::Invariant(format!("{} = {}: {msg}", spec.axis.name(), spec.values[v]))
                }
                other => other,
            })
        })
        .collect();

    let mut per_point: Vec<Vec<Vec<TrialOutcome>>> = vec![Vec::with_capacity(spec.trials); configs.len()];
    for ((v, _), r) in jobs.iter().zip(results) {
        per_point[*v].push(r?);
    }

    let mut rows = Vec::with_capacity(configs.len() * spec.methods.len());
    for (v, outcomes) in per_point.iter().enumerate() {
        for (k, &method) in spec.methods.iter().enumerate() {
            let column: Vec<TrialOutcome> = outcomes.iter().map(|o| o[k]).collect();
            rows.push(aggregate(spec.axis, spec.values[v], method, &column));
        }
    }
    Ok(rows)
}

fn aggregate(axis: Axis, axis_value: f64, method: Method, outcomes: &[TrialOutcome]) -> ResultRow {
    let n = outcomes.len();
    let power: Vec<f64> = outcomes.iter().map(|o| o.objective().unwrap_or(0.0)).collect();
    let mean = power.iter().sum::<f64>() / n as f64;
    let std_err = if n > 1 {
        let var = power.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let (mut feasible, mut slack, mut defect) = (0usize, 0.0, 0.0);
    for o in outcomes {
        if let TrialOutcome::Feasible {
            rate_slack, rank_defect, ..
        } = o
        {
            feasible += 1;
            slack += rate_slack;
            defect += rank_defect;
        }
    }
    let per_feasible = |x: f64| if feasible > 0 { x / feasible as f64 } else { f64::NAN };
    ResultRow {
        axis,
        axis_value,
        method,
        mean_total_power: mean,
        std_err,
        feasible_fraction: feasible as f64 / n as f64,
        mean_rate_slack: per_feasible(slack),
        mean_rank_defect: per_feasible(defect),
        trials: n,
    }
}

/// Twelve significant digits in scientific notation.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.axis.name(),
            fmt12(r.axis_value),
            r.method.name(),
            fmt12(r.mean_total_power),
            fmt12(r.std_err),
            fmt12(r.feasible_fraction),
            fmt12(r.mean_rate_slack),
            fmt12(r.mean_rank_defect),
            r.trials
        );
    }
    out
}
