use std::fmt::Write as _;

use serde::Serialize;
use swipt_core::metrics::{complexity_estimate, ComplexityMethod};

use crate::error::{CliError, CliResult};
use crate::sweep::fmt12;

/// (K_I, M) scenarios always reported.
pub const DEFAULT_PAIRS: [(usize, usize); 2] = [(2, 4), (16, 64)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub num_iu: usize,
    pub num_antennas: usize,
    pub method: ComplexityMethod,
    pub flops: f64,
    /// Reduction against the full SDR in percent.
    pub reduction_pct: f64,
}

/// Rows for the default scenarios followed by `extra` (K_I, M) pairs.
pub fn cmd_complexity_table(extra: &[(usize, usize)]) -> CliResult<Vec<ComplexityRow>> {
    let mut rows = Vec::new();
    for &(k, m) in DEFAULT_PAIRS.iter().chain(extra) {
        if k == 0 || m < k {
            return Err(CliError::Config(format!("need 1 <= K_I <= M, got K_I = {k}, M = {m}")));
        }
        for method in ComplexityMethod::ALL {
            let e = complexity_estimate(method, k, m);
            rows.push(ComplexityRow {
                num_iu: k,
                num_antennas: m,
                method,
                flops: e.flops,
                reduction_pct: 100.0 * e.reduction_vs_p12,
            });
        }
    }
    Ok(rows)
}

/// Parses `K,M` (also `KxM`).
pub fn parse_pair(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Config(format!("expected K_I,M but got {s:?}"));
    let (k, m) = s.split_once([',', 'x']).ok_or_else(bad)?;
    Ok((k.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?))
}

pub fn to_csv(rows: &[ComplexityRow]) -> String {
    let mut out = String::from("K_I,M,method,flops,reduction_pct\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.num_iu,
            r.num_antennas,
            r.method.label(),
            fmt12(r.flops),
            fmt12(r.reduction_pct)
        );
    }
    out
}

pub fn to_text(rows: &[ComplexityRow]) -> String {
    let mut out = format!("{:>5} {:>5}  {:<6} {:>14} {:>10}\n", "K_I", "M", "method", "flops", "reduction");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>5} {:>5}  {:<6} {:>14.6e} {:>9.2}%",
            r.num_iu,
            r.num_antennas,
            r.method.label(),
            r.flops,
            r.reduction_pct
        );
    }
    out
}
