//! CSV rendering for summaries and bound tables.

use std::fmt::Write as _;
use std::path::Path;

use super::SummaryRow;
use crate::bounds::{self, BoundParams, TailKind};
use crate::error::{Error, Result};

pub const SUMMARY_HEADER: &str =
    "solver,n,trials,mean_subopt,stderr,q50,q90,q95,q99,bound,bound_satisfied";

/// 17 significant digits, so values round-trip exactly.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(rows: &[SummaryRow]) -> String {
    let mut sorted: Vec<&SummaryRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.solver.cmp(&b.solver).then(a.n.cmp(&b.n)));
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.solver),
            r.n,
            r.trials,
            fmt_float(r.mean),
            fmt_float(r.stderr),
            fmt_float(r.q50),
            fmt_float(r.q90),
            fmt_float(r.q95),
            fmt_float(r.q99),
            fmt_opt(r.bound),
            r.bound_satisfied.map(|b| b.to_string()).unwrap_or_default(),
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn emit_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    write_text(path, &render_csv(rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTableOptions {
    /// Failure probability for the high-probability columns.
    pub eta: f64,
    /// `f(x1)` in the bundle rate; `None` uses `G^2 / (2 lambda)`.
    pub f_x1: Option<f64>,
}

impl Default for BoundTableOptions {
    fn default() -> Self {
        BoundTableOptions {
            eta: 0.05,
            f_x1: None,
        }
    }
}

pub const BOUND_HEADER: &str = "n,algo1,epoch_gd,bundle,sgd,erm,markov,chernoff,azuma,bennett";

/// One row per budget. The high-probability columns are full thresholds
/// (tail quantile plus the expected rate); cells whose bound is undefined
/// for the given constants are left empty.
pub fn render_bound_table(
    params: &BoundParams,
    n_grid: &[usize],
    opts: BoundTableOptions,
) -> Result<String> {
    params.validate()?;
    let f_x1 = opts
        .f_x1
        .unwrap_or(params.G * params.G / (2.0 * params.lambda));
    let mut out = String::from(BOUND_HEADER);
    out.push('\n');
    for &n in n_grid {
        let algo1 = bounds::algo1_rate(n, params)?;
        let mut cells = vec![
            n.to_string(),
            fmt_float(algo1),
            fmt_float(bounds::epoch_gd_rate(n, params)?),
            fmt_opt(bounds::bundle_rate(n, params, f_x1).ok()),
            fmt_opt(bounds::sgd_rate(n, params).ok()),
            fmt_float(bounds::erm_rate(n, params)?),
            fmt_opt(bounds::hp_markov(n, params, opts.eta).ok()),
        ];
        for kind in TailKind::ALL {
            cells.push(fmt_opt(
                bounds::hp_invert(kind, opts.eta, n, params)
                    .ok()
                    .map(|t| t + algo1),
            ));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_bound_table(
    params: &BoundParams,
    n_grid: &[usize],
    path: &Path,
    opts: BoundTableOptions,
) -> Result<()> {
    write_text(path, &render_bound_table(params, n_grid, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::summarize;

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(render_csv(&[]), format!("{SUMMARY_HEADER}\n"));
    }

    #[test]
    fn rows_are_sorted_and_round_trip() {
        let rows = vec![
            summarize("b", 10, &[0.1, 0.2], Some(1.0)),
            summarize("a", 100, &[1.0 / 3.0], None),
            summarize("a", 10, &[0.5, 0.5], Some(0.25)),
        ];
        let text = render_csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("a,10,2,"));
        assert!(lines[2].starts_with("a,100,1,"));
        assert!(lines[3].starts_with("b,10,2,"));
        assert!(lines[1].ends_with(",false"));
        assert!(lines[2].ends_with(",,"));
        let mean: f64 = lines[2].split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(mean, 1.0 / 3.0);
        assert_eq!(lines[1].split(',').nth(4).unwrap(), fmt_float(0.0));
    }

    #[test]
    fn bound_table_adjacent_columns() {
        let p = BoundParams::new(1.0, 1.0, 1.0, 0.5, 2.0).unwrap();
        let text = render_bound_table(&p, &[1000], BoundTableOptions::default()).unwrap();
        let row: Vec<f64> = text
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|c| c.parse().unwrap())
            .collect();
        assert_eq!(row.len(), BOUND_HEADER.split(',').count());
        assert!((row[1] - 0.002).abs() < 1e-5);
        assert_eq!(row[2], 0.008);
    }

    #[test]
    fn undefined_cells_are_empty() {
        let p = BoundParams::new(1.0, 1.0, 0.0, 0.0, 2.0).unwrap();
        let text = render_bound_table(&p, &[1], BoundTableOptions::default()).unwrap();
        let row = text.lines().nth(1).unwrap();
        // sgd needs n >= 2; every tail needs noise constants
        assert!(row.ends_with(",,,"));
        assert_eq!(row.split(',').nth(4), Some(""));
    }
}
