//! Command-line front end: walk enumeration, automata and twig bounds,
//! manifold counts, closed-form bounds, and table reproduction.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use growth_bounds::automata::{self, AutomataReport, LoopSizes};
use growth_bounds::enumeration;
use growth_bounds::lattice::LatticeId;
use growth_bounds::manifolds::{self, FormulaBound, ManifoldClass, ManifoldKind};
use growth_bounds::twig::{self, TwigBoundReport};
use growth_bounds::walk_rules::{RuleId, WalkRule};

mod reproduce;

pub use reproduce::{reproduce, shipped_golden, ReproduceReport, ReproduceRow, RowStatus};

/// Largest walk length the `enumerate` subcommand accepts without `--cap`.
pub const ENUMERATE_CAP: usize = 22;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "growth-bounds", version, about = "Counts and rigorous bounds for restricted lattice walks and manifolds")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "GROWTH_BOUNDS_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact walk counts c_1..c_n with c_n^(1/n) rounded up.
    Enumerate {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Transfer-matrix upper bound excluding loops up to size k.
    AutomataBound {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Keep only loops of size 2 and odd sizes.
        #[arg(long)]
        odd_loops_only: bool,
        #[arg(long)]
        emit_matrix: Option<PathBuf>,
    },
    /// Twig-method bound for surfaces (d = 2 polyominoes, d = 3 surfaces).
    TwigBound {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        emit_poly: Option<PathBuf>,
    },
    /// Exact counts of manifolds of k-area 1..n.
    ManifoldCount {
        /// sam, som, xd or sam_closed
        #[arg(long)]
        class: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Closed-form growth-constant bound (theorems 2 to 6).
    FormulaBound {
        #[arg(long)]
        theorem: u8,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
    },
    /// Recompute a reference table and diff against the shipped values.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        table: u8,
        /// Largest n, k or level to recompute (defaults keep runs short).
        #[arg(long)]
        max: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Compare against this CSV instead of the shipped table.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub rule: String,
    pub lattice: String,
    pub n: usize,
    /// Exact counts as decimal strings, `c_1` first.
    pub counts: Vec<String>,
    pub mu_upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldCountReport {
    pub class: ManifoldKind,
    pub d: usize,
    pub k: usize,
    /// Counts for sizes `1..=n`.
    pub counts: Vec<u128>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(growth_bounds::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<growth_bounds::Error> for CliError {
    fn from(e: growth_bounds::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn walk_rule(rule: &str, lattice: &str) -> CliResult<WalkRule> {
    let id: RuleId = rule.parse()?;
    let lat: LatticeId = lattice.parse()?;
    Ok(WalkRule::new(id, lat)?)
}

pub fn enumerate(rule: WalkRule, n: usize, cap: usize) -> CliResult<EnumerationReport> {
    if n > cap {
        return Err(growth_bounds::Error::SizeCap {
            what: "walk length n".into(),
            requested: n,
            cap,
        }
        .into());
    }
    let counts = enumeration::count_walks(rule, n)?;
    let mu_upper = enumeration::mu_upper_from_counts(&counts)?;
    Ok(EnumerationReport {
        rule: rule.id.to_string(),
        lattice: rule.lattice.to_string(),
        n,
        counts: counts.iter().map(|c| c.to_string()).collect(),
        mu_upper,
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    match cmd {
        Command::Enumerate {
            rule,
            lattice,
            n,
            cap,
            format,
        } => {
            let report = enumerate(walk_rule(&rule, &lattice)?, n, cap.unwrap_or(ENUMERATE_CAP))?;
            match format {
                Format::Json => write_json(out, &report)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["n", "c_n", "mu_upper"])?;
                    for (i, (c, m)) in report.counts.iter().zip(&report.mu_upper).enumerate() {
                        w.write_record([(i + 1).to_string(), c.clone(), format!("{m:.5}")])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::AutomataBound {
            rule,
            lattice,
            k,
            tol,
            odd_loops_only,
            emit_matrix,
        } => {
            let r = walk_rule(&rule, &lattice)?;
            let sizes = if odd_loops_only { LoopSizes::OddOnly } else { LoopSizes::All };
            let run = automata::automata_run(r, k, tol, sizes)?;
            if let Some(path) = emit_matrix {
                fs::write(path, serde_json::to_string(&run.matrix)?)?;
            }
            let report: AutomataReport = run.report(r, k);
            if !report.converged {
                writeln!(err, "warning: bracket width above tolerance {tol}")?;
            }
            write_json(out, &report)?;
        }
        Command::TwigBound { d, level, emit_poly } => {
            let report: TwigBoundReport = twig::twig_bound(d, level)?;
            if let Some(path) = emit_poly {
                let (p, _) = twig::twig_polynomial(d, level)?;
                fs::write(path, serde_json::to_string(&p)?)?;
            }
            write_json(out, &report)?;
        }
        Command::ManifoldCount {
            class,
            d,
            k,
            n,
            cap,
            format,
        } => {
            let kind: ManifoldKind = class.parse()?;
            let c = ManifoldClass::new(kind, d, k)?;
            let counts = manifolds::enumerate_counts(c, n, cap)?;
            let report = ManifoldCountReport {
                class: kind,
                d,
                k,
                counts: counts[1..].to_vec(),
            };
            match format {
                Format::Json => write_json(out, &report)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["n", "count"])?;
                    for (i, c) in report.counts.iter().enumerate() {
                        w.write_record([(i + 1).to_string(), c.to_string()])?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::FormulaBound { theorem, d, k } => {
            let b: FormulaBound = manifolds::formula_bound(theorem, d, k)?;
            serde_json::to_writer(&mut *out, &b)?;
            writeln!(out)?;
        }
        Command::Reproduce {
            table,
            max,
            format,
            golden,
        } => {
            let golden = golden.map(fs::read_to_string).transpose()?;
            let report = reproduce::reproduce(table, max, golden.as_deref())?;
            match format {
                Format::Json => write_json(out, &report)?,
                Format::Csv => reproduce::write_csv(&report, out)?,
            }
            let bad = report.rows.iter().filter(|r| r.status == RowStatus::Mismatch).count();
            for r in report.rows.iter().filter(|r| r.status == RowStatus::Flagged) {
                writeln!(err, "flag: table {table} row {}: {}", r.key, r.note)?;
            }
            if bad > 0 {
                writeln!(err, "table {table}: {bad} row(s) outside tolerance")?;
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    if let Some(n) = cli.threads {
        // the global pool can only be set once per process; later calls keep the first size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
