//! Beamforming designs: full SDR with a single energy beam, null-space SDR,
//! and the low-complexity MRT-plus-one-boosted-beam search. Also the
//! numerical check that the dedicated energy beam vanishes under null-space
//! projection.
//!
//! Objective matrices are pathloss weighted, `S = Σ_j ϱ_j h_j h_j^H`, so every
//! objective value is received power in watts.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{
    dominant_rank_one, max_eigenvalue, min_eigenvalue, null_space_of_columns, numerical_rank, ComplexMatrix,
    ComplexVector, HermitianMatrix, C64, DEFAULT_RANK_TOL,
};
use crate::metrics::{evaluate_beams, MetricsReport};
use crate::sdp::{extract_rank_one, solve_sdp, Constraint, SdpProblem, SdpSolution, Sense, SolveOptions, SolveStatus};

/// Interlacing slack for `ξ_max(S^E) ≤ ξ_max(S_i^{E,I})`.
pub const INTERLACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "full_sdr")]
    FullSdr,
    #[serde(rename = "nullspace_sdr")]
    NullspaceSdr,
    #[serde(rename = "lowcomplexity")]
    LowComplexity,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::FullSdr, Method::NullspaceSdr, Method::LowComplexity];

    pub fn name(self) -> &'static str {
        match self {
            Method::FullSdr => "full_sdr",
            Method::NullspaceSdr => "nullspace_sdr",
            Method::LowComplexity => "lowcomplexity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn solve(self, channels: &ChannelSet, config: &SystemConfig) -> Result<BeamformingSolution> {
        match self {
            Method::FullSdr => solve_full_sdr(channels, config),
            Method::NullspaceSdr => solve_nullspace_sdr(channels, config),
            Method::LowComplexity => algorithm1(channels, config),
        }
    }
}

/// Null spaces of the IU channels and the projected channel quantities.
#[derive(Debug, Clone)]
pub struct NullSpaceWorkspace {
    /// `N_i^I`: basis orthogonal to every IU channel except `i`, M×(M−K_I+1).
    pub n_iu: Vec<ComplexMatrix>,
    /// `N^E`: basis orthogonal to all IU channels, M×(M−K_I).
    pub n_eu: ComplexMatrix,
    /// `(N_i^I)^H h_t^E`, indexed `[i][t]`.
    pub eff_h_ei: Vec<Vec<ComplexVector>>,
    /// `(N^E)^H h_t^E`.
    pub eff_h_e: Vec<ComplexVector>,
    /// `(N_i^I)^H h_i^I`.
    pub eff_h_ii: Vec<ComplexVector>,
    /// `S = Σ_t ϱ_t h_t^E (h_t^E)^H`; identical to the matrix `G` used by the
    /// interlacing argument.
    pub s: HermitianMatrix,
    /// `S_i^{E,I} = (N_i^I)^H S N_i^I`.
    pub s_ei: Vec<HermitianMatrix>,
    /// `S^E = (N^E)^H S N^E`; `None` when `M = K_I`.
    pub s_e: Option<HermitianMatrix>,
}

impl NullSpaceWorkspace {
    pub fn null_dim_iu(&self) -> usize {
        self.n_iu[0].ncols()
    }

    pub fn null_dim_eu(&self) -> usize {
        self.n_eu.ncols()
    }
}

fn iu_matrix(channels: &ChannelSet, skip: Option<usize>) -> ComplexMatrix {
    let m = channels.num_antennas();
    let cols: Vec<&ComplexVector> = channels
        .h_iu
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, h)| h)
        .collect();
    ComplexMatrix::from_fn(m, cols.len(), |r, c| cols[c][r])
}

/// Energy matrix `S = Σ_t ϱ_t h_t h_t^H` of a channel set.
pub fn energy_matrix(channels: &ChannelSet) -> HermitianMatrix {
    let m = channels.num_antennas();
    let mut s = HermitianMatrix::zeros(m);
    for (h, rho) in channels.h_eu.iter().zip(&channels.rho_eu) {
        s.axpy(*rho, &HermitianMatrix::outer(h));
    }
    s
}

/// Null spaces via SVD and the projected channels built from them.
pub fn compute_null_spaces(channels: &ChannelSet) -> Result<NullSpaceWorkspace> {
    let m = channels.num_antennas();
    let k = channels.num_iu();
    if m < k {
        return Err(Error::InvalidInput(format!("M = {m} is smaller than K_I = {k}")));
    }
    let h_all = iu_matrix(channels, None);
    let rank = numerical_rank(&h_all, DEFAULT_RANK_TOL);
    if rank != k {
        return Err(Error::DegenerateChannel {
            detected: rank,
            expected: k,
        });
    }

    let n_iu: Vec<ComplexMatrix> = (0..k)
        .map(|i| null_space_of_columns(&iu_matrix(channels, Some(i)), DEFAULT_RANK_TOL))
        .collect::<Result<_>>()?;
    if let Some(bad) = n_iu.iter().find(|n| n.ncols() != m - k + 1) {
        return Err(Error::DegenerateChannel {
            detected: m - bad.ncols(),
            expected: k - 1,
        });
    }
    let n_eu = null_space_of_columns(&h_all, DEFAULT_RANK_TOL)?;

    let s = energy_matrix(channels);
    let eff_h_ei = n_iu
        .iter()
        .map(|n| channels.h_eu.iter().map(|h| n.adjoint() * h).collect())
        .collect();
    let eff_h_e = channels.h_eu.iter().map(|h| n_eu.adjoint() * h).collect();
    let eff_h_ii = n_iu.iter().zip(&channels.h_iu).map(|(n, h)| n.adjoint() * h).collect();
    let s_ei = n_iu.iter().map(|n| s.congruence(n)).collect();
    let s_e = (n_eu.ncols() > 0).then(|| s.congruence(&n_eu));

    Ok(NullSpaceWorkspace {
        n_iu,
        n_eu,
        eff_h_ei,
        eff_h_e,
        eff_h_ii,
        s,
        s_ei,
        s_e,
    })
}

fn sinr_target(config: &SystemConfig, iu: usize) -> f64 {
    config.rate_target(iu).exp2() - 1.0
}

fn noise_over_gain(channels: &ChannelSet, config: &SystemConfig, iu: usize) -> f64 {
    config.noise_power / channels.rho_iu[iu]
}

/// Full SDR with IB covariances `W_1..W_K` (blocks `0..K`) and a single EB
/// covariance `V` (block `K`), all M×M.
pub fn build_p12(channels: &ChannelSet, config: &SystemConfig) -> SdpProblem {
    let m = channels.num_antennas();
    let k = channels.num_iu();
    let mut p = SdpProblem::new(vec![m; k + 1]);
    let s = energy_matrix(channels);
    for b in 0..=k {
        p.set_objective(b, s.clone());
    }
    for i in 0..k {
        let hh = HermitianMatrix::outer(&channels.h_iu[i]);
        let mut con = Constraint::new(Sense::Ge, noise_over_gain(channels, config, i));
        for b in 0..=k {
            let coeff = if b == i {
                hh.scale(1.0 / sinr_target(config, i))
            } else {
                hh.scale(-1.0)
            };
            con = con.with_term(b, coeff);
        }
        p.add_constraint(con);
    }
    p.add_constraint(power_constraint(&vec![m; k + 1], config.p_max));
    p
}

fn power_constraint(dims: &[usize], budget: f64) -> Constraint {
    dims.iter()
        .enumerate()
        .fold(Constraint::new(Sense::Le, budget), |con, (b, &d)| {
            con.with_term(b, HermitianMatrix::identity(d))
        })
}

fn projected_rate_constraint(ws: &NullSpaceWorkspace, channels: &ChannelSet, config: &SystemConfig, i: usize, block: usize) -> Constraint {
    Constraint::new(Sense::Ge, noise_over_gain(channels, config, i)).with_term(
        block,
        HermitianMatrix::outer(&ws.eff_h_ii[i]).scale(1.0 / sinr_target(config, i)),
    )
}

/// Null-space SDR over `B_1..B_K`, each (M−K+1)×(M−K+1). Rate constraints
/// are decoupled: row `i` only touches block `i`.
pub fn build_p22(ws: &NullSpaceWorkspace, channels: &ChannelSet, config: &SystemConfig) -> SdpProblem {
    let k = channels.num_iu();
    let d = ws.null_dim_iu();
    let mut p = SdpProblem::new(vec![d; k]);
    for i in 0..k {
        p.set_objective(i, ws.s_ei[i].clone());
        p.add_constraint(projected_rate_constraint(ws, channels, config, i, i));
    }
    p.add_constraint(power_constraint(&vec![d; k], config.p_max));
    p
}

/// Null-space SDR with a dedicated energy covariance `D` (last block,
/// (M−K)×(M−K)). `None` when `M = K_I`, where `D` has no room.
pub fn build_p21(ws: &NullSpaceWorkspace, channels: &ChannelSet, config: &SystemConfig) -> Option<SdpProblem> {
    let s_e = ws.s_e.as_ref()?;
    let k = channels.num_iu();
    let d = ws.null_dim_iu();
    let mut dims = vec![d; k];
    dims.push(ws.null_dim_eu());
    let mut p = SdpProblem::new(dims.clone());
    for i in 0..k {
        p.set_objective(i, ws.s_ei[i].clone());
        p.add_constraint(projected_rate_constraint(ws, channels, config, i, i));
    }
    p.set_objective(k, s_e.clone());
    p.add_constraint(power_constraint(&dims, config.p_max));
    Some(p)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub solves: usize,
    pub iterations: usize,
    /// Largest relative duality gap over the solves.
    pub max_gap: f64,
}

impl SolverStats {
    fn record(&mut self, sol: &SdpSolution) {
        self.solves += 1;
        self.iterations += sol.iterations;
        self.max_gap = self.max_gap.max(sol.gap);
    }
}

#[derive(Debug, Clone)]
pub struct BeamformingSolution {
    pub method: Method,
    pub w: Vec<ComplexVector>,
    /// Energy beam; only the full SDR uses one.
    pub v: Option<ComplexVector>,
    /// IU whose beam carries the energy boost (low-complexity design).
    pub chosen_index: Option<usize>,
    pub per_user_rate: Vec<f64>,
    pub per_eu_power: Vec<f64>,
    /// Total received power at the EUs, watts.
    pub objective: f64,
    pub tx_power: f64,
    /// `1 − λ_max/tr` of each extracted covariance.
    pub rank_defects: Vec<f64>,
    pub solver_stats: SolverStats,
}

impl BeamformingSolution {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        method: Method,
        w: Vec<ComplexVector>,
        v: Option<ComplexVector>,
        chosen_index: Option<usize>,
        rank_defects: Vec<f64>,
        solver_stats: SolverStats,
        channels: &ChannelSet,
        config: &SystemConfig,
    ) -> Self {
        let report = evaluate_beams(&w, v.as_ref(), channels, config);
        Self {
            method,
            w,
            v,
            chosen_index,
            per_user_rate: report.rate,
            per_eu_power: report.eu_power,
            objective: report.total_power,
            tx_power: report.tx_power_used,
            rank_defects,
            solver_stats,
        }
    }

    pub fn metrics(&self, channels: &ChannelSet, config: &SystemConfig) -> MetricsReport {
        evaluate_beams(&self.w, self.v.as_ref(), channels, config)
    }

    /// `Σ_i Σ_{l≠i} |(h_i^I)^H w_l|² + Σ_i |(h_i^I)^H v|²`.
    pub fn interference(&self, channels: &ChannelSet) -> f64 {
        let mut acc = 0.0;
        for (i, h) in channels.h_iu.iter().enumerate() {
            for (l, w) in self.w.iter().enumerate() {
                if l != i {
                    acc += h.dotc(w).norm_sqr();
                }
            }
            if let Some(v) = &self.v {
                acc += h.dotc(v).norm_sqr();
            }
        }
        acc
    }
}

fn check_status(sol: &SdpSolution, shortfall: impl FnOnce() -> Vec<f64>) -> Result<()> {
    match sol.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::Infeasible => Err(Error::Infeasible { shortfall: shortfall() }),
        SolveStatus::MaxIter => Err(Error::Solver {
            status: sol.status,
            iterations: sol.iterations,
        }),
    }
}

/// Rate deficits of a set of beams after scaling them into the power budget.
fn shortfall_of(w: &[ComplexVector], v: Option<&ComplexVector>, channels: &ChannelSet, config: &SystemConfig) -> Vec<f64> {
    let total: f64 = w.iter().map(|x| x.norm_squared()).sum::<f64>() + v.map_or(0.0, |x| x.norm_squared());
    let scale = if total > config.p_max {
        C64::new((config.p_max / total).sqrt(), 0.0)
    } else {
        C64::new(1.0, 0.0)
    };
    let w: Vec<ComplexVector> = w.iter().map(|x| x * scale).collect();
    let v = v.map(|x| x * scale);
    let report = evaluate_beams(&w, v.as_ref(), channels, config);
    report
        .rate
        .iter()
        .enumerate()
        .map(|(i, r)| (config.rate_target(i) - r).max(0.0))
        .collect()
}

/// Solves the full SDR, takes the dominant direction of every covariance and
/// repairs the powers so that every rate target holds within the budget.
pub fn solve_full_sdr(channels: &ChannelSet, config: &SystemConfig) -> Result<BeamformingSolution> {
    let k = channels.num_iu();
    let problem = build_p12(channels, config);
    let sol = solve_sdp(&problem, &SolveOptions::precise())?;
    let mut stats = SolverStats::default();
    stats.record(&sol);

    let mut beams = Vec::with_capacity(k + 1);
    let mut rank_defects = Vec::with_capacity(k + 1);
    for x in &sol.primal {
        let (beam, defect) = extract_rank_one(x)?;
        beams.push(beam);
        rank_defects.push(defect);
    }
    let v = beams.pop();
    check_status(&sol, || shortfall_of(&beams, v.as_ref(), channels, config))?;

    let (w, v) = repair_powers(beams, v, channels, config, &rank_defects)?;
    Ok(BeamformingSolution::assemble(
        Method::FullSdr,
        w,
        v,
        None,
        rank_defects,
        stats,
        channels,
        config,
    ))
}

/// Solves the null-space SDR and maps each `B_i` back through `N_i^I`.
pub fn solve_nullspace_sdr(channels: &ChannelSet, config: &SystemConfig) -> Result<BeamformingSolution> {
    let ws = compute_null_spaces(channels)?;
    let problem = build_p22(&ws, channels, config);
    let sol = solve_sdp(&problem, &SolveOptions::precise())?;
    let mut stats = SolverStats::default();
    stats.record(&sol);

    let mut w = Vec::with_capacity(channels.num_iu());
    let mut rank_defects = Vec::with_capacity(channels.num_iu());
    for (n, b) in ws.n_iu.iter().zip(&sol.primal) {
        let (reduced, defect) = extract_rank_one(b)?;
        w.push(n * reduced);
        rank_defects.push(defect);
    }
    check_status(&sol, || shortfall_of(&w, None, channels, config))?;

    let (w, _) = repair_powers(w, None, channels, config, &rank_defects)?;
    Ok(BeamformingSolution::assemble(
        Method::NullspaceSdr,
        w,
        None,
        None,
        rank_defects,
        stats,
        channels,
        config,
    ))
}

/// Split a beam into unit direction and power.
fn polar(x: &ComplexVector) -> (ComplexVector, f64) {
    let p = x.norm_squared();
    if p > 0.0 {
        (x / C64::new(p.sqrt(), 0.0), p)
    } else {
        (x.clone(), 0.0)
    }
}

/// Keeps every beam direction and adjusts powers so each IU meets its rate
/// target and the total stays within `P_max`.
///
/// IB powers are raised (Gauss-Seidel on the SINR equations) until all rates
/// hold. Any excess over the budget is then taken from the energy beam
/// first and afterwards from the IBs' surplus above their minimum powers. If
/// that still overshoots, the IBs drop to their minimum powers and the energy
/// beam keeps the largest power that still fits.
fn repair_powers(
    w: Vec<ComplexVector>,
    v: Option<ComplexVector>,
    channels: &ChannelSet,
    config: &SystemConfig,
    rank_defects: &[f64],
) -> Result<(Vec<ComplexVector>, Option<ComplexVector>)> {
    let k = w.len();
    let fail = || Error::RankOneRepair {
        rank_defects: rank_defects.to_vec(),
    };
    let (dirs, p): (Vec<ComplexVector>, Vec<f64>) = w.iter().map(polar).unzip();
    let (v_dir, q) = v.as_ref().map(polar).map_or((None, 0.0), |(d, q)| (Some(d), q));

    // gain[i][l] = ϱ_i |h_i^H u_l|²
    let gain: Vec<Vec<f64>> = channels
        .h_iu
        .iter()
        .zip(&channels.rho_iu)
        .map(|(h, rho)| dirs.iter().map(|u| rho * h.dotc(u).norm_sqr()).collect())
        .collect();
    let gain_v: Vec<f64> = channels
        .h_iu
        .iter()
        .zip(&channels.rho_iu)
        .map(|(h, rho)| v_dir.as_ref().map_or(0.0, |u| rho * h.dotc(u).norm_sqr()))
        .collect();
    if (0..k).any(|i| gain[i][i] <= 0.0) {
        return Err(fail());
    }
    let required = |p: &[f64], q: f64, i: usize| -> f64 {
        let interference: f64 = (0..k).filter(|&l| l != i).map(|l| gain[i][l] * p[l]).sum::<f64>() + gain_v[i] * q;
        sinr_target(config, i) * (interference + config.noise_power) / gain[i][i]
    };

    // Smallest powers at or above `p` meeting every rate for energy-beam power `q`.
    let raise = |mut p: Vec<f64>, q: f64| -> Option<Vec<f64>> {
        for _ in 0..10_000 {
            let mut changed = false;
            for i in 0..k {
                let need = required(&p, q, i) * (1.0 + 1e-10);
                if p[i] < need {
                    p[i] = need;
                    changed = true;
                }
            }
            if !changed {
                return Some(p);
            }
        }
        None
    };
    let total = |p: &[f64], q: f64| p.iter().sum::<f64>() + q;

    let trimmed = raise(p, q).map(|mut p| {
        let mut q = q;
        let mut excess = total(&p, q) - config.p_max;
        if excess > 0.0 {
            let cut = excess.min(q);
            q -= cut;
            excess -= cut;
        }
        if excess > 0.0 {
            // Lowering any IB only lowers interference, so the other rates keep holding.
            let floor: Vec<f64> = (0..k).map(|i| required(&p, q, i) * (1.0 + 1e-10)).collect();
            let surplus: Vec<f64> = (0..k).map(|i| (p[i] - floor[i]).max(0.0)).collect();
            let available: f64 = surplus.iter().sum();
            let fraction = if available > 0.0 { (excess / available).min(1.0) } else { 0.0 };
            for i in 0..k {
                p[i] -= surplus[i] * fraction;
            }
        }
        (p, q)
    });
    let (p, q) = match trimmed {
        Some((p, q)) if total(&p, q) <= config.p_max * (1.0 + 1e-8) => (p, q),
        _ => {
            // Fall back to the minimum IB powers and the largest energy-beam
            // power that still fits the budget.
            let fits = |q: f64| raise(vec![0.0; k], q).filter(|p| total(p, q) <= config.p_max);
            let mut best = fits(0.0).map(|p| (p, 0.0)).ok_or_else(fail)?;
            let (mut lo, mut hi) = (0.0, q);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                match fits(mid) {
                    Some(pm) => {
                        best = (pm, mid);
                        lo = mid;
                    }
                    None => hi = mid,
                }
            }
            best
        }
    };
    if total(&p, q) > config.p_max * (1.0 + 1e-8) {
        return Err(fail());
    }

    let w = dirs.iter().zip(&p).map(|(u, pi)| u * C64::new(pi.sqrt(), 0.0)).collect();
    let v = v_dir.map(|u| u * C64::new(q.sqrt(), 0.0));
    Ok((w, v))
}

/// MRT beams inside each IU's null space at the minimum power that meets its
/// rate target.
#[derive(Debug, Clone)]
pub struct MrtAllocation {
    /// Unit-norm `N_i N_i^H h_i / ‖N_i^H h_i‖`.
    pub directions: Vec<ComplexVector>,
    /// `P_i^I = (2^{T_i} − 1) σ² / (ϱ_i β_i)`.
    pub powers: Vec<f64>,
    /// `β_i = ‖N_i^H h_i‖²`.
    pub beta: Vec<f64>,
}

impl MrtAllocation {
    /// `√P_i · direction_i`.
    pub fn beam(&self, i: usize) -> ComplexVector {
        &self.directions[i] * C64::new(self.powers[i].sqrt(), 0.0)
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

pub fn mrt_closed_form(ws: &NullSpaceWorkspace, channels: &ChannelSet, config: &SystemConfig) -> Result<MrtAllocation> {
    let k = channels.num_iu();
    let mut directions = Vec::with_capacity(k);
    let mut powers = Vec::with_capacity(k);
    let mut beta = Vec::with_capacity(k);
    for i in 0..k {
        let g = &ws.eff_h_ii[i];
        let b = g.norm_squared();
        if b <= 1e-24 * channels.h_iu[i].norm_squared().max(f64::MIN_POSITIVE) || b == 0.0 {
            return Err(Error::DegenerateChannel {
                detected: 0,
                expected: 1,
            });
        }
        directions.push(&ws.n_iu[i] * g / C64::new(b.sqrt(), 0.0));
        powers.push(sinr_target(config, i) * config.noise_power / (channels.rho_iu[i] * b));
        beta.push(b);
    }
    Ok(MrtAllocation {
        directions,
        powers,
        beta,
    })
}

/// Result of boosting one IU's beam with the leftover power.
#[derive(Debug, Clone)]
pub struct BoostedBeam {
    pub b: HermitianMatrix,
    /// `tr(S_i^{E,I} B_i)` at the optimum, watts.
    pub objective: f64,
    /// `√(P_max − Σ_{l≠i} P_l) · N_i b_i` with `b_i` the dominant unit
    /// eigenvector of `B_i`.
    pub w_boosted: ComplexVector,
    pub rank_defect: f64,
    pub residual_budget: f64,
    pub solution: SdpSolution,
}

/// Single-block SDP for IU `i`'s dual-function beam under the residual budget.
pub fn build_p3(i: usize, ws: &NullSpaceWorkspace, channels: &ChannelSet, config: &SystemConfig, residual: f64) -> SdpProblem {
    let d = ws.null_dim_iu();
    let mut p = SdpProblem::new(vec![d]);
    p.set_objective(0, ws.s_ei[i].clone());
    p.add_constraint(projected_rate_constraint(ws, channels, config, i, 0));
    p.add_constraint(power_constraint(&[d], residual));
    p
}

pub fn solve_p3_for_index(
    i: usize,
    ws: &NullSpaceWorkspace,
    channels: &ChannelSet,
    config: &SystemConfig,
    mrt: &MrtAllocation,
) -> Result<BoostedBeam> {
    let residual = config.p_max - (0..channels.num_iu()).filter(|&l| l != i).map(|l| mrt.powers[l]).sum::<f64>();
    if residual <= 0.0 {
        return Err(Error::InfeasibleBudget { residual });
    }
    let problem = build_p3(i, ws, channels, config, residual);
    let sol = solve_sdp(&problem, &SolveOptions::precise())?;
    check_status(&sol, || {
        let snr = channels.rho_iu[i] * residual * mrt.beta[i] / config.noise_power;
        let mut s = vec![0.0; channels.num_iu()];
        s[i] = (config.rate_target(i) - snr.ln_1p() / std::f64::consts::LN_2).max(0.0);
        s
    })?;
    let b = sol.primal[0].clone();
    let r = dominant_rank_one(&b)?;
    let amp = C64::new(residual.sqrt(), 0.0);
    let mut w_boosted = &ws.n_iu[i] * &r.direction * amp;
    let snr = |w: &ComplexVector| channels.rho_iu[i] * channels.h_iu[i].dotc(w).norm_sqr() / config.noise_power;
    if snr(&w_boosted) < sinr_target(config, i) * (1.0 - 1e-9) {
        // Only reachable when B_i is far from rank one (e.g. no EU energy to
        // steer toward); the MRT direction meets the target at this power.
        w_boosted = &mrt.directions[i] * amp;
    }
    Ok(BoostedBeam {
        objective: sol.objective,
        rank_defect: r.rank_defect,
        b,
        w_boosted,
        residual_budget: residual,
        solution: sol,
    })
}

/// Per-candidate record of the low-complexity search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateScore {
    pub index: usize,
    /// Received power of the reconstructed beams, watts.
    pub received_power: f64,
    /// `Σ_{t≠i} tr(S W_t) + tr(S_i^{E,I} B_i)` with the MRT covariances `W_t`.
    pub trace_form: f64,
}

/// Low-complexity design: every IU in turn gets the leftover power on a
/// dual-function beam while the others keep their minimum-power MRT beams;
/// the candidate with the largest received power wins (lowest index on ties).
pub fn algorithm1(channels: &ChannelSet, config: &SystemConfig) -> Result<BeamformingSolution> {
    algorithm1_detailed(channels, config).map(|(sol, _)| sol)
}

/// [`algorithm1`] plus the score of every candidate.
pub fn algorithm1_detailed(channels: &ChannelSet, config: &SystemConfig) -> Result<(BeamformingSolution, Vec<CandidateScore>)> {
    let k = channels.num_iu();
    let ws = compute_null_spaces(channels)?;
    let mrt = mrt_closed_form(&ws, channels, config)?;
    if mrt.total_power() > config.p_max {
        let scale = config.p_max / mrt.total_power();
        let shortfall = (0..k)
            .map(|i| {
                let snr = sinr_target(config, i) * scale;
                (config.rate_target(i) - snr.ln_1p() / std::f64::consts::LN_2).max(0.0)
            })
            .collect();
        return Err(Error::Infeasible { shortfall });
    }

    let mut stats = SolverStats::default();
    let mut scores = Vec::with_capacity(k);
    let mut best: Option<(f64, usize, Vec<ComplexVector>, f64)> = None;
    for i in 0..k {
        let boosted = solve_p3_for_index(i, &ws, channels, config, &mrt)?;
        stats.record(&boosted.solution);
        let beams: Vec<ComplexVector> = (0..k)
            .map(|l| if l == i { boosted.w_boosted.clone() } else { mrt.beam(l) })
            .collect();
        let received = evaluate_beams(&beams, None, channels, config).total_power;
        let trace_form = (0..k)
            .filter(|&t| t != i)
            .map(|t| mrt.powers[t] * ws.s.quad_form(&mrt.directions[t]))
            .sum::<f64>()
            + boosted.objective;
        scores.push(CandidateScore {
            index: i,
            received_power: received,
            trace_form,
        });
        if best.as_ref().is_none_or(|(value, ..)| received > *value) {
            best = Some((received, i, beams, boosted.rank_defect));
        }
    }
    let (_, chosen, w, defect) = best.expect("at least one IU");
    let mut rank_defects = vec![0.0; k];
    rank_defects[chosen] = defect;
    let solution = BeamformingSolution::assemble(
        Method::LowComplexity,
        w,
        None,
        Some(chosen),
        rank_defects,
        stats,
        channels,
        config,
    );
    Ok((solution, scores))
}

/// Numerical evidence that the dedicated energy covariance is zero at the
/// optimum of the null-space SDR with an energy block.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    /// `M = K_I`: no room for an energy block, the claim holds vacuously.
    pub trivial: bool,
    pub trace_d: f64,
    pub trace_d_rel: f64,
    /// `ξ_max(S^E)`.
    pub xi_max_e: f64,
    /// `ξ_max(S_i^{E,I})` per IU.
    pub xi_max_ei: Vec<f64>,
    pub interlace_ok: bool,
    /// Multipliers of the rate constraints (`λ_i ≥ 0`).
    pub dual_lambda: Vec<f64>,
    /// Multiplier of the power constraint (`β ≥ 0`).
    pub dual_beta: f64,
    /// Extreme eigenvalues of `S^E − βI`.
    pub min_eig_c: f64,
    pub max_eig_c: f64,
    pub objective: f64,
    pub gap: f64,
}

impl Lemma1Report {
    pub fn passes(&self, trace_tol: f64) -> bool {
        self.trivial || (self.interlace_ok && self.trace_d_rel <= trace_tol)
    }
}

pub fn verify_lemma1(channels: &ChannelSet, config: &SystemConfig) -> Result<Lemma1Report> {
    let k = channels.num_iu();
    let ws = compute_null_spaces(channels)?;
    let Some(problem) = build_p21(&ws, channels, config) else {
        return Ok(Lemma1Report {
            trivial: true,
            trace_d: 0.0,
            trace_d_rel: 0.0,
            xi_max_e: 0.0,
            xi_max_ei: ws.s_ei.iter().map(max_eigenvalue).collect::<Result<_>>()?,
            interlace_ok: true,
            dual_lambda: Vec::new(),
            dual_beta: 0.0,
            min_eig_c: 0.0,
            max_eig_c: 0.0,
            objective: 0.0,
            gap: 0.0,
        });
    };
    let s_e = ws.s_e.as_ref().expect("energy block exists when P2.1 is built");
    let sol = solve_sdp(&problem, &SolveOptions::precise())?;
    check_status(&sol, || vec![f64::NAN; k])?;

    let trace_d = sol.primal[k].trace();
    let xi_max_e = max_eigenvalue(s_e)?;
    let xi_max_ei: Vec<f64> = ws.s_ei.iter().map(max_eigenvalue).collect::<Result<_>>()?;
    let interlace_ok = xi_max_ei.iter().all(|&x| xi_max_e <= x + INTERLACE_TOL);
    let dual_beta = sol.dual[k];
    let c = s_e.sub(&HermitianMatrix::identity(s_e.dim()).scale(dual_beta));
    Ok(Lemma1Report {
        trivial: false,
        trace_d,
        trace_d_rel: trace_d / config.p_max,
        xi_max_e,
        xi_max_ei,
        interlace_ok,
        dual_lambda: sol.dual[..k].to_vec(),
        dual_beta,
        min_eig_c: min_eigenvalue(&c)?,
        max_eig_c: max_eigenvalue(&c)?,
        objective: sol.objective,
        gap: sol.gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_scenario, steering_vector, PerUser};
    use crate::linalg::hermitian_eig;

    fn default_case(trial: u64) -> (ChannelSet, SystemConfig) {
        let cfg = SystemConfig::default();
        (generate_scenario(&cfg, trial).unwrap(), cfg)
    }

    fn unit(m: usize, k: usize) -> ComplexVector {
        let mut e = ComplexVector::zeros(m);
        e[k] = C64::new(1.0, 0.0);
        e
    }

    fn manual_channels(h_iu: Vec<ComplexVector>, h_eu: Vec<ComplexVector>) -> ChannelSet {
        let (ki, ke) = (h_iu.len(), h_eu.len());
        ChannelSet {
            h_iu,
            h_eu,
            rho_iu: vec![1.0; ki],
            rho_eu: vec![1.0; ke],
            aod_iu: vec![0.0; ki],
            aod_eu: vec![0.0; ke],
            seed: 0,
        }
    }

    #[test]
    fn null_space_single_iu_spans_everything() {
        let (mut ch, _) = default_case(1);
        ch.h_iu.truncate(1);
        ch.rho_iu.truncate(1);
        let ws = compute_null_spaces(&ch).unwrap();
        assert_eq!(ws.n_iu[0].shape(), (4, 4));
        let gram = ws.n_iu[0].adjoint() * &ws.n_iu[0];
        assert!((gram - ComplexMatrix::identity(4, 4)).norm() < 1e-12);
        assert_eq!(ws.null_dim_eu(), 3);
    }

    #[test]
    fn null_space_canonical_square() {
        let ch = manual_channels(vec![unit(2, 0), unit(2, 1)], vec![unit(2, 0)]);
        let ws = compute_null_spaces(&ch).unwrap();
        assert_eq!(ws.n_iu[0].shape(), (2, 1));
        assert!((ws.n_iu[0][(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert_eq!(ws.null_dim_eu(), 0);
        assert!(ws.s_e.is_none());
    }

    #[test]
    fn null_space_residuals() {
        let (ch, _) = default_case(5);
        let ws = compute_null_spaces(&ch).unwrap();
        assert_eq!(ws.null_dim_iu(), 3);
        assert_eq!(ws.null_dim_eu(), 2);
        for (i, n) in ws.n_iu.iter().enumerate() {
            for (l, h) in ch.h_iu.iter().enumerate() {
                if l != i {
                    assert!((h.adjoint() * n).norm() <= 1e-10);
                }
            }
        }
        for h in &ch.h_iu {
            assert!((h.adjoint() * &ws.n_eu).norm() <= 1e-10);
        }
        for s in ws.s_ei.iter().chain(ws.s_e.iter()) {
            let (vals, _) = hermitian_eig(s).unwrap();
            assert!(vals[0] >= -1e-18);
        }
    }

    #[test]
    fn collinear_ius_are_degenerate() {
        let h = steering_vector(4, 0.3);
        let ch = manual_channels(vec![h.clone(), &h * C64::new(0.0, 2.0)], vec![unit(4, 0)]);
        assert!(matches!(
            compute_null_spaces(&ch),
            Err(Error::DegenerateChannel { detected: 1, expected: 2 })
        ));
    }

    #[test]
    fn p12_shape() {
        let (ch, cfg) = default_case(0);
        let p = build_p12(&ch, &cfg);
        assert_eq!(p.block_dims, vec![4, 4, 4]);
        assert_eq!(p.constraints.len(), 3);
        p.validate().unwrap();
        let s = energy_matrix(&ch);
        let (vals, _) = hermitian_eig(&s).unwrap();
        // PSD with rank at most K_E = 2.
        assert!(vals[0] > -1e-18 && vals[1].abs() < 1e-18);
    }

    #[test]
    fn p12_vanishing_rate_is_energy_maximization() {
        let (ch, cfg) = default_case(3);
        let cfg = SystemConfig {
            rate_targets: PerUser::All(1e-9),
            ..cfg
        };
        let sol = solve_sdp(&build_p12(&ch, &cfg), &SolveOptions::precise()).unwrap();
        let oracle = cfg.p_max * max_eigenvalue(&energy_matrix(&ch)).unwrap();
        assert!((sol.objective - oracle).abs() <= 1e-6 * oracle);
    }

    #[test]
    fn p22_and_p21_structure() {
        let (ch, cfg) = default_case(2);
        let ws = compute_null_spaces(&ch).unwrap();
        let p22 = build_p22(&ws, &ch, &cfg);
        assert_eq!(p22.constraints.len(), 3);
        assert_eq!(p22.block_dims, vec![3, 3]);
        for i in 0..2 {
            let terms = &p22.constraints[i].terms;
            assert_eq!(terms.len(), 1);
            assert_eq!(terms[0].0, i);
        }
        let p21 = build_p21(&ws, &ch, &cfg).unwrap();
        assert_eq!(p21.block_dims, vec![3, 3, 2]);
        assert_eq!(p21.objective[..2], p22.objective[..]);
        assert_eq!(p21.objective[2], ws.s_e.clone().unwrap());
    }

    #[test]
    fn mrt_unit_example() {
        let ch = manual_channels(vec![unit(2, 0)], vec![unit(2, 1)]);
        let cfg = SystemConfig {
            num_antennas: 2,
            num_iu: 1,
            num_eu: 1,
            noise_power: 1.0,
            rate_targets: PerUser::All(1.0),
            ..SystemConfig::default()
        };
        let ws = compute_null_spaces(&ch).unwrap();
        let mrt = mrt_closed_form(&ws, &ch, &cfg).unwrap();
        assert!((mrt.beta[0] - 1.0).abs() < 1e-14);
        assert!((mrt.powers[0] - 1.0).abs() < 1e-14);
        let w = mrt.beam(0);
        assert!((w - unit(2, 0)).norm() < 1e-14);
    }

    #[test]
    fn mrt_beta_matches_trace_form() {
        for trial in 0..10 {
            let (ch, cfg) = default_case(trial);
            let ws = compute_null_spaces(&ch).unwrap();
            let mrt = mrt_closed_form(&ws, &ch, &cfg).unwrap();
            for i in 0..2 {
                // tr(h h^H N N^H h h^H N N^H) / ‖N^H h‖²
                let hh = &ch.h_iu[i] * ch.h_iu[i].adjoint();
                let nn = &ws.n_iu[i] * ws.n_iu[i].adjoint();
                let prod = &hh * &nn * &hh * &nn;
                let trace: f64 = prod.diagonal().iter().map(|z| z.re).sum();
                let beta = trace / ws.eff_h_ii[i].norm_squared();
                assert!((mrt.beta[i] - beta).abs() <= 1e-10 * beta);
                let snr = ch.rho_iu[i] * mrt.powers[i] * ch.h_iu[i].dotc(&mrt.directions[i]).norm_sqr() / cfg.noise_power;
                let target = sinr_target(&cfg, i);
                assert!((snr - target).abs() <= 1e-9 * target);
            }
        }
    }

    #[test]
    fn p3_vanishing_rate_is_dominant_eigenvalue() {
        let (ch, cfg) = default_case(8);
        let cfg = SystemConfig {
            rate_targets: PerUser::All(1e-9),
            ..cfg
        };
        let ws = compute_null_spaces(&ch).unwrap();
        let mrt = mrt_closed_form(&ws, &ch, &cfg).unwrap();
        let out = solve_p3_for_index(0, &ws, &ch, &cfg, &mrt).unwrap();
        let oracle = out.residual_budget * max_eigenvalue(&ws.s_ei[0]).unwrap();
        assert!((out.objective - oracle).abs() <= 1e-6 * oracle);
    }

    #[test]
    fn p3_rate_constraint_holds() {
        let (ch, cfg) = default_case(11);
        let ws = compute_null_spaces(&ch).unwrap();
        let mrt = mrt_closed_form(&ws, &ch, &cfg).unwrap();
        let Ok(out) = solve_p3_for_index(1, &ws, &ch, &cfg, &mrt) else {
            return;
        };
        let lhs = ws.eff_h_ii[1].dotc(&(out.b.as_matrix() * &ws.eff_h_ii[1])).re / sinr_target(&cfg, 1);
        let rhs = noise_over_gain(&ch, &cfg, 1);
        assert!(lhs >= rhs * (1.0 - 1e-7));
        assert!((out.w_boosted.norm_squared() - out.residual_budget).abs() <= 1e-12 * out.residual_budget);
    }

    #[test]
    fn p3_rejects_exhausted_budget() {
        let (ch, cfg) = default_case(0);
        let cfg = SystemConfig { p_max: 1e-6, ..cfg };
        let ws = compute_null_spaces(&ch).unwrap();
        let mrt = mrt_closed_form(&ws, &ch, &cfg).unwrap();
        assert!(matches!(
            solve_p3_for_index(0, &ws, &ch, &cfg, &mrt),
            Err(Error::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn single_iu_low_complexity_uses_whole_budget() {
        let cfg = SystemConfig {
            num_iu: 1,
            ..SystemConfig::default()
        };
        let ch = generate_scenario(&cfg, 4).unwrap();
        let sol = algorithm1(&ch, &cfg).unwrap();
        assert_eq!(sol.chosen_index, Some(0));
        assert!((sol.tx_power - cfg.p_max).abs() <= 1e-12);
    }

    #[test]
    fn low_complexity_infeasible_when_mrt_exceeds_budget() {
        let (ch, cfg) = default_case(0);
        let cfg = SystemConfig { p_max: 1e-3, ..cfg };
        assert!(matches!(algorithm1(&ch, &cfg), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn step7_trace_form_matches_reconstructed_beams() {
        for trial in 0..10 {
            let (ch, cfg) = default_case(trial);
            let Ok((_, scores)) = algorithm1_detailed(&ch, &cfg) else {
                continue;
            };
            for s in scores {
                assert!(
                    (s.received_power - s.trace_form).abs() <= 1e-6 * s.received_power,
                    "trial {trial}: {s:?}"
                );
            }
        }
    }

    #[test]
    fn no_energy_users_gives_zero_objective() {
        let (mut ch, cfg) = default_case(6);
        ch.h_eu.clear();
        ch.rho_eu.clear();
        for method in Method::ALL {
            match method.solve(&ch, &cfg) {
                Ok(sol) => {
                    assert!(sol.objective.abs() < 1e-30, "{method:?}");
                    assert!(sol.metrics(&ch, &cfg).feasible, "{method:?}");
                }
                Err(Error::Infeasible { .. }) => {}
                Err(e) => panic!("{method:?}: {e}"),
            }
        }
    }

    #[test]
    fn lemma1_trivial_when_no_room() {
        let cfg = SystemConfig {
            num_antennas: 2,
            ..SystemConfig::default()
        };
        let ch = generate_scenario(&cfg, 0).unwrap();
        let report = verify_lemma1(&ch, &cfg).unwrap();
        assert!(report.trivial && report.passes(1e-6));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()), Some(m));
            assert_eq!(serde_json::to_value(m).unwrap(), m.name());
        }
        assert_eq!(Method::parse("bogus"), None);
    }
}
