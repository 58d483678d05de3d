//! Small dense complex-Hermitian semidefinite programs.
//!
//! Problems are stated in maximization form over a list of PSD blocks:
//!
//! ```text
//! maximize    Σ_b Re tr(C_b X_b)
//! subject to  Σ_b Re tr(A_{c,b} X_b)  {≤, ≥, =}  rhs_c      for every c
//!             X_b ⪰ 0
//! ```
//!
//! The solver is an infeasible-start primal-dual path-following method using
//! the HKM search direction with a Mehrotra predictor-corrector. Inequalities
//! are turned into equalities with 1×1 slack blocks. Rows and objective are
//! normalized internally; all reported quantities are in the caller's units.
//!
//! Dual sign convention: the reported multiplier of every inequality is
//! nonnegative. With `y` the internal equality-form multipliers (dual
//! feasibility `Σ_c y_c A_c − C = Z ⪰ 0`), a `≤` row reports `y_c` and a `≥`
//! row reports `−y_c`. Equality multipliers are free and reported as `y_c`.

use nalgebra::Cholesky;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    check_finite, dominant_rank_one, hermitian_eig, trace_product, ComplexMatrix, ComplexVector,
    HermitianMatrix, C64,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// One linear constraint `Σ_b Re tr(A_b X_b) sense rhs`. Blocks that do not
/// appear in `terms` have a zero coefficient.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(usize, HermitianMatrix)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(sense: Sense, rhs: f64) -> Self {
        Self {
            terms: Vec::new(),
            sense,
            rhs,
        }
    }

    pub fn with_term(mut self, block: usize, coeff: HermitianMatrix) -> Self {
        self.terms.push((block, coeff));
        self
    }

    pub fn coeff(&self, block: usize) -> Option<&HermitianMatrix> {
        self.terms.iter().find(|(b, _)| *b == block).map(|(_, a)| a)
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub objective: Vec<HermitianMatrix>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    /// An empty problem with zero objective on every block.
    pub fn new(block_dims: Vec<usize>) -> Self {
        let objective = block_dims.iter().map(|&d| HermitianMatrix::zeros(d)).collect();
        Self {
            block_dims,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, block: usize, coeff: HermitianMatrix) {
        self.objective[block] = coeff;
    }

    pub fn add_constraint(&mut self, constraint: Constraint) {
        self.constraints.push(constraint);
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Checks coefficient dimensions and that some `≤` row bounds the trace of
    /// every block (a positive definite coefficient on each block).
    pub fn validate(&self) -> Result<()> {
        if self.block_dims.is_empty() || self.block_dims.contains(&0) {
            return Err(Error::InvalidInput("SDP blocks must be nonempty".into()));
        }
        for (b, c) in self.objective.iter().enumerate() {
            if c.dim() != self.block_dims[b] {
                return Err(Error::InvalidInput(format!("objective block {b} has wrong dimension")));
            }
            check_finite(c.as_matrix())?;
        }
        for (k, con) in self.constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return Err(Error::InvalidInput(format!("constraint {k} has non-finite rhs")));
            }
            for (b, a) in &con.terms {
                if *b >= self.num_blocks() || a.dim() != self.block_dims[*b] {
                    return Err(Error::InvalidInput(format!(
                        "constraint {k} references block {b} with mismatched dimension"
                    )));
                }
                check_finite(a.as_matrix())?;
            }
        }
        let bounded = self.constraints.iter().any(|con| {
            con.sense == Sense::Le
                && (0..self.num_blocks()).all(|b| {
                    con.coeff(b)
                        .and_then(|a| hermitian_eig(a).ok())
                        .is_some_and(|(vals, _)| vals[0] > 0.0)
                })
        });
        if !bounded {
            return Err(Error::InvalidInput(
                "no constraint bounds the trace of every block".into(),
            ));
        }
        Ok(())
    }

    /// Debug dump for offline cross-checking with other solvers.
    pub fn to_json(&self) -> serde_json::Value {
        let objective: Vec<_> = self
            .objective
            .iter()
            .enumerate()
            .map(|(b, c)| MatrixDump::new(b, c))
            .collect();
        let constraints: Vec<_> = self
            .constraints
            .iter()
            .map(|con| ConstraintDump {
                sense: con.sense,
                rhs: con.rhs,
                terms: con.terms.iter().map(|(b, a)| MatrixDump::new(*b, a)).collect(),
            })
            .collect();
        serde_json::json!({
            "sense": "maximize",
            "blocks": self.block_dims,
            "objective": objective,
            "constraints": constraints,
        })
    }
}

#[derive(Serialize)]
struct MatrixDump {
    block: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl MatrixDump {
    fn new(block: usize, a: &HermitianMatrix) -> Self {
        let m = a.as_matrix();
        let n = a.dim();
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self {
            block,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

#[derive(Serialize)]
struct ConstraintDump {
    sense: Sense,
    rhs: f64,
    terms: Vec<MatrixDump>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative primal and dual residual tolerance.
    pub feas_tol: f64,
    /// Relative duality gap tolerance. The default sits well below the 1e-6
    /// accuracy promised for optimal solves, since the objective error can
    /// be a small multiple of the relative gap.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Fraction-to-boundary factor for step lengths.
    pub step_fraction: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            gap_tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.98,
        }
    }
}

impl SolveOptions {
    /// Tight tolerances for solves whose output feeds further numeric checks.
    pub fn precise() -> Self {
        Self {
            feas_tol: 1e-10,
            gap_tol: 1e-10,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal: Vec<HermitianMatrix>,
    /// One multiplier per constraint, nonnegative for inequalities.
    pub dual: Vec<f64>,
    /// `Z_b = Σ_c y_c A_{c,b} − C_b` in equality-form sign.
    pub dual_slack: Vec<HermitianMatrix>,
    pub objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap of the normalized problem.
    pub gap: f64,
    /// Relative primal residual of the normalized problem.
    pub primal_residual: f64,
    /// Relative dual residual of the normalized problem.
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl SdpSolution {
    /// `Re tr(Z_b X_b)` per block.
    pub fn complementarity(&self) -> Vec<f64> {
        self.primal
            .iter()
            .zip(&self.dual_slack)
            .map(|(x, z)| trace_product(z.as_matrix(), x.as_matrix()))
            .collect()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Unscaled left-hand side `Σ_b Re tr(A_{c,b} X_b)` of constraint `c`.
    pub fn constraint_value(&self, problem: &SdpProblem, c: usize) -> f64 {
        problem.constraints[c]
            .terms
            .iter()
            .map(|(b, a)| trace_product(a.as_matrix(), self.primal[*b].as_matrix()))
            .sum()
    }
}

/// Normalized equality-form problem the iteration works on.
struct StandardForm {
    dims: Vec<usize>,
    c: Vec<ComplexMatrix>,
    /// Row `k`: list of (block, coefficient).
    a: Vec<Vec<(usize, ComplexMatrix)>>,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    obj_scale: f64,
    /// Slack block and sign (+1 for ≤, −1 for ≥) per original row.
    slack: Vec<Option<(usize, f64)>>,
    n_orig_blocks: usize,
}

impl StandardForm {
    fn build(problem: &SdpProblem) -> Self {
        let mut dims = problem.block_dims.clone();
        let n_orig_blocks = dims.len();
        let c_norm = problem
            .objective
            .iter()
            .map(|c| c.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt();
        let obj_scale = if c_norm > 0.0 { 1.0 / c_norm } else { 1.0 };
        let mut c: Vec<ComplexMatrix> = problem
            .objective
            .iter()
            .map(|m| m.as_matrix().map(|z| z * obj_scale))
            .collect();

        let mut a = Vec::with_capacity(problem.constraints.len());
        let mut b = Vec::with_capacity(problem.constraints.len());
        let mut row_scale = Vec::with_capacity(problem.constraints.len());
        let mut slack = Vec::with_capacity(problem.constraints.len());
        for con in &problem.constraints {
            let sign = match con.sense {
                Sense::Le => Some(1.0),
                Sense::Ge => Some(-1.0),
                Sense::Eq => None,
            };
            let mut norm2: f64 = con.terms.iter().map(|(_, m)| m.frobenius_norm().powi(2)).sum();
            if sign.is_some() {
                norm2 += 1.0;
            }
            let scale = if norm2 > 0.0 { 1.0 / norm2.sqrt() } else { 1.0 };
            let mut row: Vec<(usize, ComplexMatrix)> = con
                .terms
                .iter()
                .map(|(blk, m)| (*blk, m.as_matrix().map(|z| z * scale)))
                .collect();
            match sign {
                Some(s) => {
                    let blk = dims.len();
                    dims.push(1);
                    c.push(ComplexMatrix::zeros(1, 1));
                    row.push((blk, ComplexMatrix::from_element(1, 1, C64::new(s * scale, 0.0))));
                    slack.push(Some((blk, s)));
                }
                None => slack.push(None),
            }
            a.push(row);
            b.push(con.rhs * scale);
            row_scale.push(scale);
        }
        Self {
            dims,
            c,
            a,
            b,
            row_scale,
            obj_scale,
            slack,
            n_orig_blocks,
        }
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn n_total(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `A(X)`.
    fn apply(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        self.a
            .iter()
            .map(|row| row.iter().map(|(blk, a)| trace_product(a, &x[*blk])).sum())
            .collect()
    }

    /// `A*(y) = Σ_k y_k A_k`.
    fn adjoint(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        let mut out: Vec<ComplexMatrix> =
            self.dims.iter().map(|&d| ComplexMatrix::zeros(d, d)).collect();
        for (row, &yk) in self.a.iter().zip(y) {
            for (blk, a) in row {
                out[*blk].zip_apply(a, |o, v| *o += v * yk);
            }
        }
        out
    }
}

fn inner(x: &[ComplexMatrix], z: &[ComplexMatrix]) -> f64 {
    x.iter().zip(z).map(|(a, b)| trace_product(a, b)).sum()
}

fn frob(x: &[ComplexMatrix]) -> f64 {
    x.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sym(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Largest `α ≤ cap` with `X + α dX ⪰ 0`, for `X ≻ 0`.
fn max_step(x: &ComplexMatrix, dx: &ComplexMatrix, cap: f64) -> f64 {
    if x.nrows() == 1 {
        let (xv, dv) = (x[(0, 0)].re, dx[(0, 0)].re);
        return if dv < 0.0 { (-xv / dv).min(cap) } else { cap };
    }
    let Some(chol) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let l = chol.l();
    let Some(linv) = l.clone().try_inverse() else {
        return 0.0;
    };
    let m = sym(&(&linv * dx * linv.adjoint()));
    let lam_min = match hermitian_eig(&HermitianMatrix::symmetrize(&m)) {
        Ok((vals, _)) => vals[0],
        Err(_) => return 0.0,
    };
    if lam_min < 0.0 {
        (-1.0 / lam_min).min(cap)
    } else {
        cap
    }
}

fn hermitian_inverse(z: &ComplexMatrix) -> Option<ComplexMatrix> {
    if z.nrows() == 1 {
        let v = z[(0, 0)].re;
        return (v > 0.0).then(|| ComplexMatrix::from_element(1, 1, C64::new(1.0 / v, 0.0)));
    }
    Cholesky::new(z.clone()).map(|c| sym(&c.inverse()))
}

/// Gap and feasibility accepted from an iterate that stopped improving.
const ACCEPT_GAP: f64 = 1e-6;
const ACCEPT_FEAS: f64 = 1e-7;
/// Iterations of a nearly feasible iterate without halving the gap before the solver gives up.
const STALL_ITERATIONS: usize = 10;

/// Solves a block SDP with the primal-dual interior-point method.
pub fn solve_sdp(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let sf = StandardForm::build(problem);
    let m = sf.m();
    let n = sf.n_total() as f64;
    let nb = sf.dims.len();

    let b_norm = norm2(&sf.b);
    let c_norm = frob(&sf.c);
    let x0 = sf.b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let mut x: Vec<ComplexMatrix> = sf
        .dims
        .iter()
        .map(|&d| ComplexMatrix::identity(d, d).scale(x0))
        .collect();
    let mut z: Vec<ComplexMatrix> = sf.dims.iter().map(|&d| ComplexMatrix::identity(d, d)).collect();
    let mut y = vec![0.0; m];

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut metrics = IterMetrics::default();
    let mut best_gap = f64::INFINITY;
    let mut since_progress = 0;
    let mut best: Option<Snapshot> = None;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let ax = sf.apply(&x);
        let rp: Vec<f64> = sf.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = sf.adjoint(&y);
        let rd: Vec<ComplexMatrix> = (0..nb).map(|k| &sf.c[k] + &z[k] - &aty[k]).collect();
        let pobj = inner(&sf.c, &x);
        let dobj: f64 = sf.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let xz = inner(&x, &z);
        let mu = xz / n;

        metrics = IterMetrics {
            gap: xz.abs().max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs()),
            pinf: norm2(&rp) / (1.0 + b_norm),
            dinf: frob(&rd) / (1.0 + c_norm),
        };
        if metrics.gap <= opts.gap_tol && metrics.pinf <= opts.feas_tol && metrics.dinf <= opts.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }
        let merit = metrics.merit();
        if best.as_ref().is_none_or(|b| merit < b.metrics.merit()) {
            best = Some(Snapshot {
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
                metrics,
                iteration: iter,
            });
        }
        if primal_infeasible(&sf, &y, dobj) {
            status = SolveStatus::Infeasible;
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        if metrics.pinf.max(metrics.dinf) > ACCEPT_FEAS {
            best_gap = f64::INFINITY;
            since_progress = 0;
        } else if metrics.gap < 0.5 * best_gap {
            best_gap = metrics.gap;
            since_progress = 0;
        } else {
            since_progress += 1;
            if since_progress >= STALL_ITERATIONS {
                break;
            }
        }

        let Some(zinv) = z.iter().map(hermitian_inverse).collect::<Option<Vec<_>>>() else {
            break;
        };

        // Schur complement M_ij = Σ_b Re tr(A_ib X_b A_jb Z_b^{-1}).
        let mut schur = nalgebra::DMatrix::<f64>::zeros(m, m);
        let xaz: Vec<Vec<(usize, ComplexMatrix)>> = sf
            .a
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(blk, a)| (*blk, &x[*blk] * a * &zinv[*blk]))
                    .collect()
            })
            .collect();
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for (bi, ai) in &sf.a[i] {
                    for (bj, g) in &xaz[j] {
                        if bi == bj {
                            acc += trace_product(ai, g);
                        }
                    }
                }
                schur[(i, j)] = acc;
                schur[(j, i)] = acc;
            }
        }
        let Some(schur_chol) = factor_schur(schur) else {
            break;
        };

        // X Rd Z^{-1} enters every right-hand side.
        let x_rd_zinv: Vec<ComplexMatrix> = (0..nb).map(|k| &x[k] * &rd[k] * &zinv[k]).collect();

        let direction = |rc: &[ComplexMatrix]| -> (Vec<f64>, Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
            let lhs: Vec<ComplexMatrix> = (0..nb).map(|k| &rc[k] + &x_rd_zinv[k]).collect();
            let a_lhs = sf.apply(&lhs);
            let rhs = nalgebra::DVector::from_iterator(m, a_lhs.iter().zip(&rp).map(|(a, r)| a - r));
            let dy = schur_chol.solve(&rhs);
            let dy: Vec<f64> = dy.iter().copied().collect();
            let at_dy = sf.adjoint(&dy);
            let dz: Vec<ComplexMatrix> = (0..nb).map(|k| &at_dy[k] - &rd[k]).collect();
            let dx: Vec<ComplexMatrix> = (0..nb)
                .map(|k| &rc[k] - sym(&(&x[k] * &dz[k] * &zinv[k])))
                .collect();
            (dy, dx, dz)
        };
        let steps = |dx: &[ComplexMatrix], dz: &[ComplexMatrix]| -> (f64, f64) {
            let ap = (0..nb).fold(f64::INFINITY, |acc, k| acc.min(max_step(&x[k], &dx[k], f64::INFINITY)));
            let ad = (0..nb).fold(f64::INFINITY, |acc, k| acc.min(max_step(&z[k], &dz[k], f64::INFINITY)));
            (ap, ad)
        };

        // Predictor: affine-scaling direction.
        let rc_aff: Vec<ComplexMatrix> = x.iter().map(|xk| -xk).collect();
        let (_, dx_aff, dz_aff) = direction(&rc_aff);
        let (ap, ad) = steps(&dx_aff, &dz_aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let x_aff: Vec<ComplexMatrix> = (0..nb).map(|k| &x[k] + &dx_aff[k] * C64::new(ap, 0.0)).collect();
        let z_aff: Vec<ComplexMatrix> = (0..nb).map(|k| &z[k] + &dz_aff[k] * C64::new(ad, 0.0)).collect();
        let mu_aff = inner(&x_aff, &z_aff) / n;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // Corrector with centering and second-order term.
        let rc: Vec<ComplexMatrix> = (0..nb)
            .map(|k| {
                &zinv[k] * C64::new(sigma * mu, 0.0) - &x[k] - sym(&(&dx_aff[k] * &dz_aff[k] * &zinv[k]))
            })
            .collect();
        let (dy, dx, dz) = direction(&rc);
        let (ap, ad) = steps(&dx, &dz);
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || (ap <= 1e-14 && ad <= 1e-14) {
            break;
        }
        for k in 0..nb {
            x[k] = sym(&(&x[k] + &dx[k] * C64::new(ap, 0.0)));
            z[k] = sym(&(&z[k] + &dz[k] * C64::new(ad, 0.0)));
        }
        for (yi, di) in y.iter_mut().zip(&dy) {
            *yi += ad * di;
        }
    }

    // Round-off can degrade the last iterates of a stalled run.
    if status == SolveStatus::MaxIter {
        if let Some(b) = best.filter(|b| b.metrics.merit() < metrics.merit()) {
            (x, y, z, metrics, iterations) = (b.x, b.y, b.z, b.metrics, b.iteration);
        }
    }

    // A stalled run whose iterate already meets the contract tolerances is
    // still reported as optimal.
    if status == SolveStatus::MaxIter
        && metrics.gap <= opts.gap_tol.max(ACCEPT_GAP)
        && metrics.pinf.max(metrics.dinf) <= opts.feas_tol.max(ACCEPT_FEAS)
    {
        status = SolveStatus::Optimal;
    }

    Ok(unscale(problem, &sf, x, y, z, metrics, iterations, status))
}

#[derive(Debug, Default, Clone, Copy)]
struct IterMetrics {
    gap: f64,
    pinf: f64,
    dinf: f64,
}

struct Snapshot {
    x: Vec<ComplexMatrix>,
    y: Vec<f64>,
    z: Vec<ComplexMatrix>,
    metrics: IterMetrics,
    iteration: usize,
}

impl IterMetrics {
    fn merit(&self) -> f64 {
        self.gap.max(self.pinf).max(self.dinf)
    }
}

/// Farkas-type test: `b^T y → −∞` while `A*(y)` stays PSD up to a vanishing
/// relative error.
fn primal_infeasible(sf: &StandardForm, y: &[f64], dobj: f64) -> bool {
    let t = -dobj;
    if t <= 1e8 {
        return false;
    }
    let aty = sf.adjoint(y);
    let worst = aty
        .iter()
        .map(|m| {
            if m.nrows() == 1 {
                m[(0, 0)].re
            } else {
                hermitian_eig(&HermitianMatrix::symmetrize(m)).map(|(v, _)| v[0]).unwrap_or(f64::NEG_INFINITY)
            }
        })
        .fold(f64::INFINITY, f64::min);
    worst / t >= -1e-8
}

fn factor_schur(mut schur: nalgebra::DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let m = schur.nrows();
    if let Some(ch) = Cholesky::new(schur.clone()) {
        return Some(ch);
    }
    // Tiny diagonal shift for near-singular systems close to convergence.
    let scale = (0..m).map(|i| schur[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    for i in 0..m {
        schur[(i, i)] += 1e-14 * scale;
    }
    Cholesky::new(schur)
}

#[allow(clippy::too_many_arguments)]
fn unscale(
    problem: &SdpProblem,
    sf: &StandardForm,
    x: Vec<ComplexMatrix>,
    y: Vec<f64>,
    z: Vec<ComplexMatrix>,
    metrics: IterMetrics,
    iterations: usize,
    status: SolveStatus,
) -> SdpSolution {
    let y_orig: Vec<f64> = y
        .iter()
        .zip(&sf.row_scale)
        .map(|(yk, r)| yk * r / sf.obj_scale)
        .collect();
    let dual = y_orig
        .iter()
        .zip(&sf.slack)
        .map(|(yk, s)| match s {
            Some((_, sign)) => yk * sign,
            None => *yk,
        })
        .collect();
    let primal: Vec<HermitianMatrix> = x
        .iter()
        .take(sf.n_orig_blocks)
        .map(HermitianMatrix::symmetrize)
        .collect();
    let dual_slack: Vec<HermitianMatrix> = z
        .iter()
        .take(sf.n_orig_blocks)
        .map(|zk| HermitianMatrix::symmetrize(&zk.map(|v| v / sf.obj_scale)))
        .collect();
    let objective = problem
        .objective
        .iter()
        .zip(&primal)
        .map(|(c, xk)| trace_product(c.as_matrix(), xk.as_matrix()))
        .sum();
    let dual_objective = problem
        .constraints
        .iter()
        .zip(&y_orig)
        .map(|(con, yk)| con.rhs * yk)
        .sum();
    SdpSolution {
        primal,
        dual,
        dual_slack,
        objective,
        dual_objective,
        gap: metrics.gap,
        primal_residual: metrics.pinf,
        dual_residual: metrics.dinf,
        iterations,
        status,
    }
}

/// Rank-one beam from a PSD solution block: `w = √tr(X) · u_max`.
pub fn extract_rank_one(x: &HermitianMatrix) -> Result<(ComplexVector, f64)> {
    let r = dominant_rank_one(x)?;
    let power = x.trace().max(0.0);
    if power == 0.0 {
        return Ok((ComplexVector::zeros(x.dim()), 0.0));
    }
    Ok((r.direction * C64::new(power.sqrt(), 0.0), r.rank_defect))
}
