//! Recompute a reference table and compare it with the shipped golden data.

use std::io::Write;

use serde::{Deserialize, Serialize};

use growth_bounds::automata::{self, LoopSizes};
use growth_bounds::lattice::LatticeId;
use growth_bounds::twig;
use growth_bounds::walk_rules::{RuleId, WalkRule};

use crate::{CliError, CliResult};

const TABLES: [&str; 6] = [
    include_str!("../data/table1.csv"),
    include_str!("../data/table2.csv"),
    include_str!("../data/table3.csv"),
    include_str!("../data/table4.csv"),
    include_str!("../data/table5.csv"),
    include_str!("../data/table6.csv"),
];

/// Absolute tolerance on five-decimal bounds.
pub const BOUND_TOL: f64 = 2e-5;
/// Absolute tolerance on twig bounds.
pub const TWIG_TOL: f64 = 1e-4;
/// Window in which a recomputed value for a row marked `duplicate` is flagged
/// rather than failed.
pub const DUPLICATE_WINDOW: (f64, f64) = (4.52, 4.59);
const DUPLICATE_TOL: f64 = 5e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Match,
    Flagged,
    Mismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceRow {
    /// n, k or twig level.
    pub key: usize,
    pub value: f64,
    pub expected: f64,
    /// Exact count and its golden value, for count tables.
    pub count: Option<String>,
    pub expected_count: Option<String>,
    pub status: RowStatus,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub table: u8,
    pub key_name: String,
    pub rows: Vec<ReproduceRow>,
}

struct Golden {
    key_name: String,
    rows: Vec<Vec<String>>,
}

/// The shipped golden CSV for `table`.
pub fn shipped_golden(table: u8) -> Option<&'static str> {
    TABLES.get((table as usize).checked_sub(1)?).copied()
}

fn golden(text: &str) -> CliResult<Golden> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let key_name = rdr.headers()?.get(0).unwrap_or("key").to_string();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()?;
    Ok(Golden { key_name, rows })
}

fn num<T: std::str::FromStr>(s: &str) -> CliResult<T> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("malformed golden value `{s}`")))
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol + 1e-12
}

fn bound_row(key: usize, value: f64, expected: f64, tol: f64) -> ReproduceRow {
    ReproduceRow {
        key,
        value,
        expected,
        count: None,
        expected_count: None,
        status: if within(value, expected, tol) {
            RowStatus::Match
        } else {
            RowStatus::Mismatch
        },
        note: String::new(),
    }
}

fn automata_table(g: &Golden, rule: WalkRule, sizes: LoopSizes, max: usize) -> CliResult<Vec<ReproduceRow>> {
    let mut rows = Vec::new();
    for r in &g.rows {
        let k: usize = num(&r[0])?;
        if k > max {
            continue;
        }
        let expected: f64 = num(&r[1])?;
        let value = automata::automata_bound_with(rule, k, 1e-9, sizes)?.bound;
        let mut row = bound_row(k, value, expected, BOUND_TOL);
        if r.get(2).is_some_and(|n| n == "duplicate") && row.status == RowStatus::Mismatch {
            if within(value, expected, DUPLICATE_TOL) {
                row.status = RowStatus::Match;
            } else if (DUPLICATE_WINDOW.0..=DUPLICATE_WINDOW.1).contains(&value) {
                row.status = RowStatus::Flagged;
                row.note = format!("printed value {expected:.5} repeats the next row; recomputed {value:.5}");
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Recompute table `table` up to `max` (n, k or level) and diff it against
/// `golden_csv`, or the shipped table when `None`.
pub fn reproduce(table: u8, max: Option<usize>, golden_csv: Option<&str>) -> CliResult<ReproduceReport> {
    let Some(shipped) = shipped_golden(table) else {
        return Err(CliError::Usage(format!("no table {table}")));
    };
    let g = golden(golden_csv.unwrap_or(shipped))?;
    let width = if table == 1 { 3 } else { 2 };
    if g.rows.iter().any(|r| r.len() < width) {
        return Err(CliError::Usage(format!("golden rows for table {table} need {width} columns")));
    }
    let rule = |id, lat| WalkRule::new(id, lat).map_err(CliError::from);
    let rows = match table {
        1 => {
            let n = max.unwrap_or(18).min(g.rows.len());
            let report = crate::enumerate(rule(RuleId::Sow, LatticeId::Square)?, n, n)?;
            g.rows
                .iter()
                .take(n)
                .zip(report.counts.iter().zip(&report.mu_upper))
                .map(|(r, (c, &mu))| {
                    let expected: f64 = num(&r[2])?;
                    let mut row = bound_row(num(&r[0])?, mu, expected, BOUND_TOL);
                    if *c != r[1] {
                        row.status = RowStatus::Mismatch;
                    }
                    row.count = Some(c.clone());
                    row.expected_count = Some(r[1].clone());
                    Ok(row)
                })
                .collect::<CliResult<Vec<_>>>()?
        }
        2 => automata_table(&g, rule(RuleId::Sow, LatticeId::Square)?, LoopSizes::OddOnly, max.unwrap_or(13))?,
        3 => automata_table(&g, rule(RuleId::Sow, LatticeId::Triangular)?, LoopSizes::All, max.unwrap_or(10))?,
        4 => automata_table(&g, rule(RuleId::Odw, LatticeId::Triangular)?, LoopSizes::All, max.unwrap_or(10))?,
        5 => {
            let top = max.unwrap_or(2).min(g.rows.len());
            if top == 0 {
                return Err(CliError::Usage("twig level starts at 1".into()));
            }
            let report = twig::twig_bound(3, top)?;
            g.rows
                .iter()
                .take(top)
                .zip(&report.per_level)
                .map(|(r, lvl)| {
                    let expected: f64 = num(&r[1])?;
                    Ok(bound_row(num(&r[0])?, twig::round_up5(lvl.selected), expected, TWIG_TOL))
                })
                .collect::<CliResult<Vec<_>>>()?
        }
        _ => automata_table(&g, rule(RuleId::Lwalk, LatticeId::Square)?, LoopSizes::All, max.unwrap_or(28))?,
    };
    Ok(ReproduceReport {
        table,
        key_name: g.key_name,
        rows,
    })
}

pub fn write_csv(report: &ReproduceReport, out: &mut dyn Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let counts = report.rows.iter().any(|r| r.count.is_some());
    let mut header = vec![report.key_name.as_str()];
    if counts {
        header.extend(["c_n", "expected_c_n"]);
    }
    header.extend(["value", "expected", "status"]);
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![r.key.to_string()];
        if counts {
            rec.push(r.count.clone().unwrap_or_default());
            rec.push(r.expected_count.clone().unwrap_or_default());
        }
        rec.push(format!("{:.5}", r.value));
        rec.push(format!("{:.5}", r.expected));
        rec.push(
            match r.status {
                RowStatus::Match => "match",
                RowStatus::Flagged => "flagged",
                RowStatus::Mismatch => "mismatch",
            }
            .to_string(),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
