//! Acceptance checks, one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails.

use std::process::{Command, ExitCode};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use swipt_cli::complexity::cmd_complexity_table;
use swipt_cli::sweep::{check_ordering, run_sweep, solve_outcome, Axis, SweepSpec, TrialOutcome};
use swipt_core::beamforming::{compute_null_spaces, verify_lemma1, BeamformingSolution, Method, INTERLACE_TOL};
use swipt_core::channel::{generate_scenario, SystemConfig};
use swipt_core::linalg::{max_eigenvalue, HermitianMatrix, C64};
use swipt_core::sdp::{solve_sdp, Constraint, SdpProblem, Sense, SolveOptions};
use swipt_core::Error;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn criterion_1_table() -> Verdict {
    let rows = cmd_complexity_table(&[]).expect("default table");
    let expect = [(2, "P2.2", 90.4), (2, "P3", 97.5), (16, "P2.2", 68.2), (16, "P3", 99.96)];
    let mut pass = true;
    let mut got = Vec::new();
    for (k, label, expected) in expect {
        let r = rows.iter().find(|r| r.num_iu == k && r.method.label() == label).unwrap();
        pass &= (r.reduction_pct - expected).abs() <= 0.1;
        got.push(format!("{label}@K={k}: {:.3}% (expected {expected}%)", r.reduction_pct));
    }
    verdict(pass, got.join(", "))
}

fn criterion_2_lemma(cfg: &SystemConfig) -> Verdict {
    let (mut solved, mut infeasible, mut worst, mut interlace_bad) = (0, 0, 0.0f64, 0);
    let mut failures = Vec::new();
    for t in 0..200 {
        let ch = generate_scenario(cfg, t).unwrap();
        // Interlacing is a property of the channels alone, so it is checked
        // on every draw, feasible or not.
        let ws = compute_null_spaces(&ch).unwrap();
        let xi_e = max_eigenvalue(ws.s_e.as_ref().unwrap()).unwrap();
        for s in &ws.s_ei {
            if xi_e > max_eigenvalue(s).unwrap() + INTERLACE_TOL {
                interlace_bad += 1;
                failures.push(format!("trial {t}: interlacing"));
            }
        }
        match verify_lemma1(&ch, cfg) {
            Ok(r) => {
                solved += 1;
                worst = worst.max(r.trace_d_rel);
                if r.trace_d_rel > 1e-6 {
                    failures.push(format!("trial {t}: tr(D)/P_max = {:e}", r.trace_d_rel));
                }
            }
            Err(Error::Infeasible { .. }) => infeasible += 1,
            Err(e) => failures.push(format!("trial {t}: {e}")),
        }
    }
    let detail = format!(
        "{solved} solved, {infeasible} infeasible, worst tr(D)/P_max = {worst:.3e}, interlacing failures {interlace_bad}{}",
        if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
    );
    verdict(failures.is_empty(), detail)
}

/// All three designs on the first 500 default draws.
struct PairedRun {
    trials: Vec<Vec<(Method, TrialOutcome, Option<BeamformingSolution>)>>,
    channels: Vec<swipt_core::channel::ChannelSet>,
    errors: Vec<String>,
}

fn paired_run(cfg: &SystemConfig, n: u64) -> PairedRun {
    let mut run = PairedRun {
        trials: Vec::new(),
        channels: Vec::new(),
        errors: Vec::new(),
    };
    for t in 0..n {
        let ch = generate_scenario(cfg, t).unwrap();
        let mut row = Vec::new();
        for m in Method::ALL {
            match solve_outcome(m, &ch, cfg) {
                Ok((o, s)) => row.push((m, o, s)),
                Err(e) => {
                    run.errors.push(format!("trial {t} {}: {e}", m.name()));
                    row.push((m, TrialOutcome::Infeasible, None));
                }
            }
        }
        run.trials.push(row);
        run.channels.push(ch);
    }
    run
}

fn criterion_3_interference(cfg: &SystemConfig, run: &PairedRun) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (row, ch) in run.trials.iter().zip(&run.channels) {
        for (m, _, sol) in row {
            if let (Method::NullspaceSdr | Method::LowComplexity, Some(sol)) = (m, sol) {
                // Independent sum over every (i, l ≠ i) pair.
                let mut acc = 0.0;
                for (i, h) in ch.h_iu.iter().enumerate() {
                    for (l, w) in sol.w.iter().enumerate() {
                        if l != i {
                            let z: C64 = h.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
                            acc += z.norm_sqr();
                        }
                    }
                }
                worst = worst.max(acc / cfg.p_max);
                count += 1;
            }
        }
    }
    verdict(
        worst <= 1e-16 && run.errors.is_empty(),
        format!("{count} null-space solutions, worst interference / P_max = {worst:.3e}"),
    )
}

fn criterion_4_ordering(run: &PairedRun) -> Verdict {
    let mut violations = Vec::new();
    let mut gaps = Vec::new();
    for (t, row) in run.trials.iter().enumerate() {
        let pairs: Vec<(Method, TrialOutcome)> = row.iter().map(|(m, o, _)| (*m, *o)).collect();
        if let Err(msg) = check_ordering(&pairs) {
            violations.push(format!("trial {t}: {msg}"));
        }
        let get = |m: Method| pairs.iter().find(|(k, _)| *k == m).and_then(|(_, o)| o.objective());
        if let (Some(a), Some(p)) = (get(Method::LowComplexity), get(Method::NullspaceSdr)) {
            gaps.push((p - a) / p);
        }
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    let pass = violations.is_empty() && !gaps.is_empty() && mean_gap <= 0.05 && run.errors.is_empty();
    verdict(
        pass,
        format!(
            "{} ordering violations, mean relative gap lowcomplexity vs nullspace_sdr = {:.3}% over {} trials{}",
            violations.len(),
            100.0 * mean_gap,
            gaps.len(),
            if run.errors.is_empty() { String::new() } else { format!("; errors: {}", run.errors.join("; ")) }
        ),
    )
}

fn criterion_5_rates(cfg: &SystemConfig, run: &PairedRun) -> Verdict {
    let (mut checked, mut worst_shortfall, mut worst_equality) = (0, 0.0f64, 0.0f64);
    for (row, ch) in run.trials.iter().zip(&run.channels) {
        for (m, _, sol) in row {
            let Some(sol) = sol else { continue };
            checked += 1;
            for (i, h) in ch.h_iu.iter().enumerate() {
                // SINR recomputed from the beams, independent of the library metrics.
                let rho = ch.rho_iu[i];
                let g = |w: &swipt_core::linalg::ComplexVector| rho * h.dotc(w).norm_sqr();
                let signal = g(&sol.w[i]);
                let interference: f64 = sol.w.iter().enumerate().filter(|(l, _)| *l != i).map(|(_, w)| g(w)).sum::<f64>()
                    + sol.v.as_ref().map_or(0.0, g);
                let rate = (1.0 + signal / (interference + cfg.noise_power)).log2();
                let target = cfg.rate_target(i);
                worst_shortfall = worst_shortfall.max(target - rate);
                if *m == Method::LowComplexity && sol.chosen_index != Some(i) {
                    worst_equality = worst_equality.max((rate - target).abs() / target);
                }
            }
        }
    }
    verdict(
        worst_shortfall <= 1e-6 && worst_equality <= 1e-9,
        format!(
            "{checked} solutions, worst rate shortfall {worst_shortfall:.3e}, worst non-boosted deviation {worst_equality:.3e}"
        ),
    )
}

fn criterion_6_trends(cfg: &SystemConfig) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (axis, increasing) in [
        (Axis::PMax, true),
        (Axis::Antennas, true),
        (Axis::RateTarget, false),
        (Axis::Kappa, false),
    ] {
        let mut spec = SweepSpec::new(cfg.clone(), axis);
        spec.trials = 500;
        let rows = match run_sweep(&spec) {
            Ok(rows) => rows,
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", axis.name()));
                continue;
            }
        };
        let mut breaks = Vec::new();
        for method in Method::ALL {
            let means: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.method == method)
                .map(|r| (r.axis_value, r.mean_total_power))
                .collect();
            for w in means.windows(2) {
                let ok = if increasing { w[1].1 >= w[0].1 } else { w[1].1 <= w[0].1 };
                if !ok {
                    breaks.push(format!("{} {}->{}: {:.4e}->{:.4e}", method.name(), w[0].0, w[1].0, w[0].1, w[1].1));
                }
            }
        }
        let dir = if increasing { "non-decreasing" } else { "non-increasing" };
        if breaks.is_empty() {
            parts.push(format!("{} {dir} ok", axis.name()));
        } else {
            pass = false;
            parts.push(format!("{} not {dir} [{}]", axis.name(), breaks.join(", ")));
        }
    }
    verdict(pass, parts.join("; "))
}

/// Largest eigenvalue via the real symmetric embedding [[Re, −Im], [Im, Re]].
fn lambda_max_oracle(c: &HermitianMatrix) -> f64 {
    let a = c.as_matrix();
    let n = a.nrows();
    let real = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, s| {
        let z = a[(r % n, s % n)];
        match (r < n, s < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    real.symmetric_eigen().eigenvalues.max()
}

fn criterion_7_sdp_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5d9);
    let (mut worst_obj, mut worst_gap, mut worst_cs) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for k in 0..100 {
        let n = rng.random_range(2..=6);
        let terms = rng.random_range(1..=3);
        let budget = rng.random_range(0.5..5.0);
        let vecs: Vec<_> = (0..terms)
            .map(|_| {
                swipt_core::linalg::ComplexVector::from_fn(n, |_, _| {
                    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
            })
            .collect();
        let c = HermitianMatrix::sum_of_outers(n, &vecs);
        let mut p = SdpProblem::new(vec![n]);
        p.set_objective(0, c.clone());
        p.add_constraint(Constraint::new(Sense::Le, budget).with_term(0, HermitianMatrix::identity(n)));
        let sol = match solve_sdp(&p, &SolveOptions::default()) {
            Ok(s) if s.is_optimal() => s,
            Ok(s) => {
                failures.push(format!("instance {k}: status {:?}", s.status));
                continue;
            }
            Err(e) => {
                failures.push(format!("instance {k}: {e}"));
                continue;
            }
        };
        let closed = budget * lambda_max_oracle(&c);
        let obj_err = (sol.objective - closed).abs() / closed.abs();
        let scale = 1.0 + sol.objective.abs();
        let cs = (sol.complementarity()[0].abs() + sol.dual[0] * (budget - sol.constraint_value(&p, 0)).abs()) / scale;
        worst_obj = worst_obj.max(obj_err);
        worst_gap = worst_gap.max(sol.gap);
        worst_cs = worst_cs.max(cs);
    }
    let pass = failures.is_empty() && worst_obj <= 1e-6 && worst_gap <= 1e-6 && worst_cs <= 1e-6;
    verdict(
        pass,
        format!(
            "100 instances, worst objective error {worst_obj:.3e}, worst gap {worst_gap:.3e}, worst complementarity {worst_cs:.3e}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn run_cli(args: &[&str], threads: usize) -> (Vec<u8>, i32) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swipt"));
    cmd.arg("--threads").arg(threads.to_string()).args(args).arg("--out").arg(&out);
    let status = cmd.output().expect("run swipt").status;
    (std::fs::read(&out).unwrap_or_default(), status.code().unwrap_or(-1))
}

fn criterion_8_determinism() -> Verdict {
    let commands: [&[&str]; 4] = [
        &["sweep", "--axis", "T", "--trials", "12", "--seed", "77"],
        &["verify", "--trials", "8", "--seed", "77"],
        &["complexity", "--pair", "3,9"],
        &["solve", "--trial", "5", "--seed", "77"],
    ];
    let mut mismatches = Vec::new();
    for args in commands {
        let (a, code_a) = run_cli(args, 1);
        let (b, code_b) = run_cli(args, 1);
        let (c, code_c) = run_cli(args, 4);
        if a.is_empty() || code_a != 0 || a != b || a != c || code_b != code_a || code_c != code_a {
            mismatches.push(format!("{} (exit {code_a}/{code_b}/{code_c})", args[0]));
        }
    }
    verdict(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "sweep, verify, complexity and solve byte-identical across reruns and 1 vs 4 threads".into()
        } else {
            format!("differing outputs: {}", mismatches.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let cfg = SystemConfig::default();
    let paired = paired_run(&cfg, 500);
    let results = [
        ("1 complexity table", criterion_1_table()),
        ("2 lemma 1", criterion_2_lemma(&cfg)),
        ("3 interference elimination", criterion_3_interference(&cfg, &paired)),
        ("4 objective ordering", criterion_4_ordering(&paired)),
        ("5 rate constraints", criterion_5_rates(&cfg, &paired)),
        ("6 trends", criterion_6_trends(&cfg)),
        ("7 sdp oracle", criterion_7_sdp_oracle()),
        ("8 determinism", criterion_8_determinism()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        println!("[{}] criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
