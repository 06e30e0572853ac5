//! Command-line front end: single runs, phase sweeps, verification reports,
//! and state-decomposition dumps, all emitted deterministically.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use twinsim::experiment::{closed_form, run_experiment, ExperimentConfig};
use twinsim::fock::Statistics;
use twinsim::labeled::{build_initial, split_regions, ExchangeParity, LabeledState};
use twinsim::oracle;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const DEFAULT_SWEEP_GRID: &str = "0:6.283185307179586:64";

/// One tabulation request: which statistics, which phases, where the CSV
/// goes, and which checks run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub statistics: Vec<Statistics>,
    pub phis: Vec<f64>,
    pub out: Option<PathBuf>,
    pub tolerance: f64,
    pub verify: bool,
    pub include_patterns: bool,
    pub cross_check: bool,
}

/// What the command line asked for.
#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Table(RunSpec),
    Decompose { phi: f64 },
}

#[derive(Debug)]
pub enum CliError {
    Io(io::Error),
    Verification { max_deviation: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Verification { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Verification {
                max_deviation,
                tolerance,
            } => write!(
                f,
                "verification failed: max deviation {max_deviation:e} exceeds tolerance {tolerance:e}"
            ),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "twinsim",
    version,
    about = "Coincidence statistics of two particles from independent sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate a single phase point.
    Run(RunArgs),
    /// Tabulate a phase grid.
    Sweep(SweepArgs),
    /// Sweep a grid and check every row against the independent references.
    Verify(VerifyArgs),
    /// Print the state decomposition at one phase, term by term.
    Decompose(DecomposeArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Comma-separated list: boson, fermion, distinguishable.
    #[arg(long, default_value = "boson,fermion,distinguishable", value_parser = parse_statistics_list)]
    stats: StatsList,

    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Verification tolerance (must be positive).
    #[arg(long, default_value_t = DEFAULT_TOLERANCE, value_parser = parse_positive)]
    tol: f64,

    /// Append the ten raw per-pattern probability columns.
    #[arg(long)]
    patterns: bool,
}

#[derive(Clone, Debug)]
struct StatsList(Vec<Statistics>);

fn parse_statistics_list(s: &str) -> Result<StatsList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let stat: Statistics = part.parse()?;
        if !out.contains(&stat) {
            out.push(stat);
        }
    }
    if out.is_empty() {
        return Err("at least one statistics required".to_string());
    }
    Ok(StatsList(out))
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("expected a positive finite number, got {s}"));
    }
    Ok(v)
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Phase in radians.
    #[arg(long, value_parser = parse_finite)]
    phi: f64,

    /// Check the row against the oracle and closed form; exit 1 on deviation.
    #[arg(long)]
    verify: bool,

    /// Also check conditional patterns against the labeled representation.
    #[arg(long)]
    cross_check: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Phase grid: `a:b:n` (n points from a, excluding b) or a comma list.
    #[arg(long, default_value = DEFAULT_SWEEP_GRID, value_parser = parse_phi_grid_arg)]
    phi: PhiGrid,

    /// Check every row against the oracle and closed form; exit 1 on deviation.
    #[arg(long)]
    verify: bool,

    /// Also check conditional patterns against the labeled representation.
    #[arg(long)]
    cross_check: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Phase grid: `a:b:n` (n points from a, excluding b) or a comma list.
    #[arg(long, default_value = DEFAULT_SWEEP_GRID, value_parser = parse_phi_grid_arg)]
    phi: PhiGrid,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    /// Phase in radians.
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite)]
    phi: f64,
}

#[derive(Clone, Debug)]
struct PhiGrid(Vec<f64>);

fn parse_phi_grid_arg(s: &str) -> Result<PhiGrid, String> {
    parse_phi_grid(s).map(PhiGrid)
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !v.is_finite() {
        return Err(format!("expected a finite number, got {s}"));
    }
    Ok(v)
}

/// Parses `a:b:n` into n evenly spaced points from a, excluding b, or a
/// comma-separated explicit list. The grid must contain at least one point.
pub fn parse_phi_grid(s: &str) -> Result<Vec<f64>, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected a:b:n, got {s:?}"));
        }
        let a = parse_finite(parts[0])?;
        let b = parse_finite(parts[1])?;
        let n: usize = parts[2]
            .parse()
            .map_err(|e| format!("bad grid count {:?}: {e}", parts[2]))?;
        if n == 0 {
            return Err("grid count must be at least 1".to_string());
        }
        let step = (b - a) / n as f64;
        Ok((0..n).map(|i| a + i as f64 * step).collect())
    } else {
        let phis: Result<Vec<f64>, String> = s.split(',').map(parse_finite).collect();
        let phis = phis?;
        if phis.is_empty() {
            return Err("empty phase list".to_string());
        }
        Ok(phis)
    }
}

/// Parses the command line; usage problems surface as a `clap::Error` whose
/// exit status is nonzero.
pub fn parse_args<I, T>(argv: I) -> Result<Action, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(match cli.command {
        Command::Run(args) => Action::Table(RunSpec {
            statistics: args.common.stats.0,
            phis: vec![args.phi],
            out: args.common.out,
            tolerance: args.common.tol,
            verify: args.verify,
            include_patterns: args.common.patterns,
            cross_check: args.cross_check,
        }),
        Command::Sweep(args) => Action::Table(RunSpec {
            statistics: args.common.stats.0,
            phis: args.phi.0,
            out: args.common.out,
            tolerance: args.common.tol,
            verify: args.verify,
            include_patterns: args.common.patterns,
            cross_check: args.cross_check,
        }),
        Command::Verify(args) => Action::Table(RunSpec {
            statistics: args.common.stats.0,
            phis: args.phi.0,
            out: args.common.out,
            tolerance: args.common.tol,
            verify: true,
            include_patterns: args.common.patterns,
            cross_check: true,
        }),
        Command::Decompose(args) => Action::Decompose { phi: args.phi },
    })
}

/// One computed CSV row plus its verification deviations.
struct Row {
    statistics: Statistics,
    phi: f64,
    csv: String,
    oracle_deviation: f64,
    closed_form_deviation: f64,
    labeled_deviation: Option<f64>,
}

fn float_cell(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_cell(v: Option<f64>) -> String {
    match v {
        Some(v) => float_cell(v),
        None => "NaN".to_string(),
    }
}

/// Header-safe column name for a detector pattern: D1&D1' becomes p_D1_D1p.
fn pattern_column(pair: twinsim::labeled::DetectorPair) -> String {
    format!("p_{}_{}", pair.first(), pair.second()).replace('\'', "p")
}

pub fn csv_header(include_patterns: bool) -> String {
    let mut header = String::from(
        "stats,phi,w_both_v,w_both_e,w_one_each,p_same_cond,p_cross_cond,\
         p_same_closed,p_cross_closed,max_pattern_dev",
    );
    if include_patterns {
        for pair in twinsim::labeled::DetectorPair::all() {
            header.push(',');
            header.push_str(&pattern_column(pair));
        }
    }
    header
}

fn compute_row(
    statistics: Statistics,
    phi: f64,
    include_patterns: bool,
    cross_check: bool,
) -> Result<Row, CliError> {
    let table = run_experiment(&ExperimentConfig::new(phi, statistics))
        .map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
    let (same_closed, cross_closed) = closed_form(phi, statistics);
    let report = oracle::verify(&table, phi, statistics, f64::INFINITY);
    let closed_form_deviation = match (table.p_same_cond, table.p_cross_cond) {
        (Some(same), Some(cross)) => (same - same_closed).abs().max((cross - cross_closed).abs()),
        _ => f64::INFINITY,
    };
    let labeled_deviation = if cross_check {
        Some(labeled_conditional_deviation(&table, phi, statistics))
    } else {
        None
    };
    let mut csv = format!(
        "{},{},{},{},{},{},{},{},{},{}",
        statistics.name(),
        float_cell(phi),
        float_cell(table.both_v),
        float_cell(table.both_e),
        float_cell(table.one_each),
        opt_cell(table.p_same_cond),
        opt_cell(table.p_cross_cond),
        float_cell(same_closed),
        float_cell(cross_closed),
        float_cell(report.max_deviation),
    );
    if include_patterns {
        for pair in twinsim::labeled::DetectorPair::all() {
            csv.push(',');
            csv.push_str(&float_cell(table.per_pattern[&pair]));
        }
    }
    Ok(Row {
        statistics,
        phi,
        csv,
        oracle_deviation: report.max_deviation,
        closed_form_deviation,
        labeled_deviation,
    })
}

/// Max deviation of the engine's conditional one-each patterns from the
/// labeled-representation projection. Distinguishable particles have no
/// parity projection, so they compare as zero.
fn labeled_conditional_deviation(
    table: &twinsim::experiment::CoincidenceTable,
    phi: f64,
    statistics: Statistics,
) -> f64 {
    let parity = match statistics {
        Statistics::Boson => ExchangeParity::Symmetric,
        Statistics::Fermion => ExchangeParity::Antisymmetric,
        Statistics::Distinguishable => return 0.0,
    };
    let split = match split_regions(&build_initial(phi)) {
        Ok(split) => split,
        Err(_) => return f64::INFINITY,
    };
    let dist = split
        .one_each
        .evolve()
        .and_then(|evolved| evolved.project(parity).detection_distribution());
    let dist = match dist {
        Ok(dist) => dist,
        Err(_) => return f64::INFINITY,
    };
    let mut max = 0.0f64;
    for (pair, &prob) in &dist {
        let conditional = table.per_pattern[pair] / table.one_each;
        max = max.max((conditional - prob).abs());
    }
    max
}

/// Runs a tabulation spec: writes the CSV (file or `out`), prints the
/// verification report to `out` when requested, and returns a verification
/// error when any row deviates beyond tolerance.
pub fn execute_table(spec: &RunSpec, out: &mut impl Write) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &statistics in &spec.statistics {
        for &phi in &spec.phis {
            rows.push(compute_row(
                statistics,
                phi,
                spec.include_patterns,
                spec.cross_check,
            )?);
        }
    }

    let mut csv = csv_header(spec.include_patterns);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv);
        csv.push('\n');
    }
    match &spec.out {
        Some(path) => {
            let file = File::create(path)?;
            let mut writer = BufWriter::new(file);
            writer.write_all(csv.as_bytes())?;
            writer.flush()?;
        }
        None => out.write_all(csv.as_bytes())?,
    }

    if spec.verify {
        let max_oracle = rows.iter().map(|r| r.oracle_deviation).fold(0.0, f64::max);
        let max_closed = rows
            .iter()
            .map(|r| r.closed_form_deviation)
            .fold(0.0, f64::max);
        let max_labeled = rows
            .iter()
            .filter_map(|r| r.labeled_deviation)
            .fold(0.0, f64::max);
        writeln!(out, "verification over {} rows:", rows.len())?;
        writeln!(out, "  max |simulated - oracle| = {max_oracle:.3e}")?;
        writeln!(out, "  max |simulated - closed-form| = {max_closed:.3e}")?;
        if spec.cross_check {
            writeln!(out, "  max |simulated - labeled| = {max_labeled:.3e}")?;
        }
        writeln!(out, "  tolerance = {:.3e}", spec.tolerance)?;
        let max_deviation = max_oracle.max(max_closed).max(max_labeled);
        if max_deviation < spec.tolerance {
            writeln!(out, "PASS")?;
        } else {
            writeln!(out, "FAIL")?;
            let worst = rows
                .iter()
                .max_by(|a, b| {
                    row_deviation(a)
                        .partial_cmp(&row_deviation(b))
                        .expect("finite deviations")
                })
                .expect("at least one row");
            writeln!(
                out,
                "  worst row: {} at phi = {:.6}",
                worst.statistics, worst.phi
            )?;
            return Err(CliError::Verification {
                max_deviation,
                tolerance: spec.tolerance,
            });
        }
    }
    Ok(())
}

fn row_deviation(row: &Row) -> f64 {
    row.oracle_deviation
        .max(row.closed_form_deviation)
        .max(row.labeled_deviation.unwrap_or(0.0))
}

fn format_complex(c: Complex64) -> String {
    format!("{:+.6}{:+.6}i", c.re, c.im)
}

fn print_labeled(out: &mut impl Write, state: &LabeledState) -> io::Result<()> {
    if state.is_zero() {
        return writeln!(out, "  (zero state)");
    }
    for ((l, r), amp) in state.terms() {
        writeln!(out, "  ({l}, {r})  {}", format_complex(amp))?;
    }
    Ok(())
}

/// Prints the labeled-representation decomposition at one phase: the initial
/// state, its region components with their coefficients, the evolved
/// components, and both parity projections of the evolved one-each component.
pub fn execute_decompose(phi: f64, out: &mut impl Write) -> Result<(), CliError> {
    let initial = build_initial(phi);
    let split =
        split_regions(&initial).map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
    let fail = |e: twinsim::Error| CliError::Io(io::Error::other(e.to_string()));

    writeln!(out, "phase: {phi:.6}")?;
    writeln!(out, "initial state (both particles past their sources):")?;
    print_labeled(out, &initial)?;
    writeln!(
        out,
        "same-region component (coefficient {}):",
        format_complex(split.coeff_same)
    )?;
    print_labeled(out, &split.same_region)?;
    writeln!(
        out,
        "one-each component (coefficient {}):",
        format_complex(split.coeff_one_each)
    )?;
    print_labeled(out, &split.one_each)?;

    let same_evolved = split.same_region.evolve().map_err(fail)?;
    writeln!(out, "evolved same-region component:")?;
    print_labeled(out, &same_evolved)?;
    let one_each_evolved = split.one_each.evolve().map_err(fail)?;
    writeln!(out, "evolved one-each component:")?;
    print_labeled(out, &one_each_evolved)?;

    writeln!(
        out,
        "symmetric projection of the evolved one-each component:"
    )?;
    print_labeled(out, &one_each_evolved.project(ExchangeParity::Symmetric))?;
    writeln!(
        out,
        "antisymmetric projection of the evolved one-each component:"
    )?;
    print_labeled(
        out,
        &one_each_evolved.project(ExchangeParity::Antisymmetric),
    )?;
    Ok(())
}

/// Dispatches a parsed action.
pub fn execute(action: &Action, out: &mut impl Write) -> Result<(), CliError> {
    match action {
        Action::Table(spec) => execute_table(spec, out),
        Action::Decompose { phi } => execute_decompose(*phi, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_excludes_the_endpoint() {
        let grid = parse_phi_grid("0:1:4").unwrap();
        assert_eq!(grid, vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn grid_of_one_point_is_the_start() {
        assert_eq!(parse_phi_grid("2.5:9:1").unwrap(), vec![2.5]);
    }

    #[test]
    fn grid_count_zero_is_rejected() {
        assert!(parse_phi_grid("0:1:0").is_err());
    }

    #[test]
    fn grid_accepts_explicit_lists() {
        assert_eq!(parse_phi_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_phi_grid("0.5,1.5").unwrap(), vec![0.5, 1.5]);
        assert!(parse_phi_grid("0.5,abc").is_err());
        assert!(parse_phi_grid("1:2").is_err());
        assert!(parse_phi_grid("nan").is_err());
    }

    #[test]
    fn statistics_lists_deduplicate_and_preserve_order() {
        let list = parse_statistics_list("fermion,boson,fermion").unwrap();
        assert_eq!(list.0, vec![Statistics::Fermion, Statistics::Boson]);
        assert!(parse_statistics_list("quark").is_err());
    }

    #[test]
    fn float_cells_round_trip() {
        for v in [0.0, 0.1, 1.0 / 3.0, std::f64::consts::PI] {
            let cell = float_cell(v);
            let back: f64 = cell.parse().unwrap();
            assert_eq!(back, v);
        }
        assert_eq!(opt_cell(None), "NaN");
    }

    #[test]
    fn pattern_columns_are_csv_safe() {
        for pair in twinsim::labeled::DetectorPair::all() {
            let column = pattern_column(pair);
            assert!(!column.contains(',') && !column.contains('\''));
        }
        let header = csv_header(true);
        assert!(header.ends_with("p_D1p_D2p,p_D2p_D2p"));
    }
}
