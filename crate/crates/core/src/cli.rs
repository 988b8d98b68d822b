//! The `hillquota` command-line front end.
//!
//! Every subcommand writes one document to stdout in the chosen format.
//! Failures print `{"error": {"kind": ..., "message": ...}}` to stderr and
//! exit with 2 for usage errors or 1 for computation errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::analysis::{evaluate_criteria, CriteriaReport, QuotaClass, ViolationReport};
use crate::apportion::{
    hill_divisor, huntington_hill, huntington_hill_traced, standard_quotas, Apportionment, Grant,
    PopulationVector, QuotaVector,
};
use crate::density::PopulationDensity;
use crate::error::Error;
use crate::geometry::{
    cell_overlap_area, exact_uniform_probability, exact_uniform_probability_rational,
    region_points, triangle, FloorPair, RegionData,
};
use crate::mc::{sample_violation_rate_with, SampleEstimate, SampleOptions, SamplingScheme};
use crate::probmodel::{
    general_pdf_probability, iid_quota_density, QuadratureSpec, UniformSimplexDensity,
};
use crate::real::DoubleDouble;
use crate::scalar::{parse_rational, Arithmetic, Population};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_DIST: &str = "uniform:0:1000";

#[derive(Debug, Parser)]
#[command(name = "hillquota", version, about = "Huntington-Hill apportionment and quota-violation analysis")]
pub struct Cli {
    /// Output format; svg is only available for `region`.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apportion seats among states.
    Apportion(ApportionArgs),
    /// Classify an apportionment against the standard quotas.
    Check(PopulationArgs),
    /// Evaluate the three-state violation criteria on quotas.
    Criteria(CriteriaArgs),
    /// Violation probability for uniform quotas.
    ExactProb(ExactProbArgs),
    /// Violation probability for IID populations or another quota density.
    PdfProb(PdfProbArgs),
    /// Monte Carlo estimate of the violation probability.
    Sample(SampleArgs),
    /// Boundary lines and feasible triangle of one floor pair.
    Region(RegionArgs),
    /// Theoretical and sampled probabilities for several house sizes.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArithmeticChoice {
    /// Integers and fractions exact, decimal populations in floating point.
    Auto,
    Exact,
    Float,
}

#[derive(Debug, Args)]
pub struct PopulationArgs {
    /// Comma-separated populations, or `-` to read them from stdin.
    #[arg(long)]
    pub pops: String,
    #[arg(long)]
    pub seats: u64,
    #[arg(long, value_enum, default_value_t = ArithmeticChoice::Auto)]
    pub arithmetic: ArithmeticChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Priority,
    Divisor,
}

#[derive(Debug, Args)]
pub struct ApportionArgs {
    #[command(flatten)]
    pub input: PopulationArgs,
    #[arg(long, value_enum, default_value_t = Method::Priority)]
    pub method: Method,
    /// Include the sequence of priority grants.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct CriteriaArgs {
    /// Three comma-separated quotas summing to the house size, or `-`.
    #[arg(long)]
    pub quotas: String,
    #[arg(long)]
    pub seats: u64,
    /// `auto` treats decimal quotas as exact fractions.
    #[arg(long, value_enum, default_value_t = ArithmeticChoice::Auto)]
    pub arithmetic: ArithmeticChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Plain f64.
    Double,
    /// Double-double, about 32 significant digits.
    High,
    /// Exact fractions; only when every boundary is rational.
    Rational,
}

#[derive(Debug, Args)]
pub struct ExactProbArgs {
    #[arg(long)]
    pub seats: u64,
    /// List the area of every floor pair's triangle and cell.
    #[arg(long)]
    pub list_cells: bool,
    #[arg(long, value_enum, default_value_t = Precision::High)]
    pub precision: Precision,
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    /// Relative tolerance of the adaptive triangle quadrature.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 12)]
    pub max_depth: u32,
    #[arg(long, default_value_t = 10)]
    pub degree: usize,
    #[arg(long, default_value_t = 64)]
    pub z_nodes: usize,
}

impl QuadratureArgs {
    fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            triangle_rule_degree: self.degree,
            max_subdivision_depth: self.max_depth,
            relative_tolerance: self.tol,
            z_integral_nodes: self.z_nodes,
        }
    }
}

#[derive(Debug, Args)]
pub struct PdfProbArgs {
    #[arg(long)]
    pub seats: u64,
    /// Population density (`uniform:a:b`, `piecewise:file.csv`) or `simplex`
    /// for uniformly distributed quotas.
    #[arg(long)]
    pub dist: String,
    #[command(flatten)]
    pub quad: QuadratureArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Quotas,
    Populations,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub seats: u64,
    #[arg(long)]
    pub samples: u64,
    #[arg(long)]
    pub seed: u64,
    /// Population density for `--mode populations` (default uniform:0:1000).
    #[arg(long)]
    pub dist: Option<String>,
    /// Worker threads (default from HILLQUOTA_WORKERS).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Check every draw with both the criteria and the algorithm.
    #[arg(long)]
    pub cross_check: bool,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub seats: u64,
    #[arg(long)]
    pub floor1: u64,
    #[arg(long)]
    pub floor2: u64,
    /// Points sampled along each boundary line.
    #[arg(long, default_value_t = 2)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Uniform,
    Iid,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    /// Comma-separated house sizes.
    #[arg(long)]
    pub seats: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Population density for `--which iid`.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApportionOutput {
    pub arithmetic: Arithmetic,
    pub method: Method,
    pub apportionment: Apportionment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Grant>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutput {
    pub arithmetic: Arithmetic,
    pub report: ViolationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub j: u64,
    pub k: u64,
    pub triangle_area: f64,
    pub cell_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactProbOutput {
    pub seats: u64,
    pub precision: Precision,
    pub probability: f64,
    /// The probability as a fraction, in rational precision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfProbOutput {
    pub seats: u64,
    pub dist: String,
    pub probability: f64,
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "M")]
    pub seats: u64,
    pub theoretical: f64,
    pub sampled: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub redraws: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOutput {
    pub which: Which,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Debug, Serialize)]
struct ErrorDocument<'a> {
    error: ErrorBody<'a>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

type Outcome = std::result::Result<String, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses arguments (including the program name), runs the subcommand and
/// returns the exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{}", e.render());
            report(err, "usage", e.kind().to_string());
            return EXIT_USAGE;
        }
    };
    match dispatch(&cli, stdin) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            EXIT_OK
        }
        Err(Failure::Usage(msg)) => {
            report(err, "usage", msg);
            EXIT_USAGE
        }
        Err(Failure::Compute(e)) => {
            report(err, "computation", e.to_string());
            EXIT_COMPUTATION
        }
    }
}

fn report(err: &mut dyn Write, kind: &str, message: String) {
    let doc = ErrorDocument {
        error: ErrorBody { kind, message },
    };
    let _ = writeln!(err, "{}", serde_json::to_string(&doc).unwrap_or_default());
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read) -> Outcome {
    let format = cli.format;
    if format == Format::Svg && !matches!(cli.command, Command::Region(_)) {
        return Err(usage("svg output is only available for the region subcommand"));
    }
    match &cli.command {
        Command::Apportion(a) => cmd_apportion(a, format, stdin),
        Command::Check(a) => cmd_check(a, format, stdin),
        Command::Criteria(a) => cmd_criteria(a, format, stdin),
        Command::ExactProb(a) => cmd_exact_prob(a, format),
        Command::PdfProb(a) => cmd_pdf_prob(a, format),
        Command::Sample(a) => cmd_sample(a, format),
        Command::Region(a) => cmd_region(a, format),
        Command::Table(a) => cmd_table(a, format),
    }
}

fn json<T: Serialize>(value: &T) -> Outcome {
    serde_json::to_string_pretty(value).map_err(|e| usage(format!("serialization failed: {e}")))
}

fn read_list(raw: &str, stdin: &mut dyn Read) -> std::result::Result<Vec<String>, Failure> {
    let text = if raw.trim() == "-" {
        let mut buf = String::new();
        stdin
            .read_to_string(&mut buf)
            .map_err(|e| usage(format!("cannot read stdin: {e}")))?;
        buf
    } else {
        raw.to_string()
    };
    let items: Vec<String> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if items.is_empty() {
        return Err(usage("empty value list"));
    }
    Ok(items)
}

fn parse_seats_list(raw: &str) -> std::result::Result<Vec<u64>, Failure> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| usage(format!("bad house size {s:?}")))
        })
        .collect()
}

/// Populations in the representation chosen by `--arithmetic`.
enum Pops {
    Integer(PopulationVector<u64>),
    Rational(PopulationVector<BigRational>),
    Float(PopulationVector<f64>),
}

fn parse_f64s(items: &[String]) -> std::result::Result<Vec<f64>, Failure> {
    items
        .iter()
        .map(|s| s.parse::<f64>().map_err(|_| usage(format!("bad number {s:?}"))))
        .collect()
}

fn parse_rationals(items: &[String]) -> std::result::Result<Vec<BigRational>, Failure> {
    items
        .iter()
        .map(|s| parse_rational(s).ok_or_else(|| usage(format!("bad exact number {s:?}"))))
        .collect()
}

fn parse_pops(items: &[String], choice: ArithmeticChoice) -> std::result::Result<Pops, Failure> {
    let ints: Option<Vec<u64>> = items.iter().map(|s| s.parse::<u64>().ok()).collect();
    Ok(match choice {
        ArithmeticChoice::Float => Pops::Float(PopulationVector::new(parse_f64s(items)?)?),
        ArithmeticChoice::Exact => match ints {
            Some(v) => Pops::Integer(PopulationVector::new(v)?),
            None => Pops::Rational(PopulationVector::new(parse_rationals(items)?)?),
        },
        ArithmeticChoice::Auto => match ints {
            Some(v) => Pops::Integer(PopulationVector::new(v)?),
            None if items.iter().all(|s| !s.contains('.') && !s.contains(['e', 'E'])) => {
                Pops::Rational(PopulationVector::new(parse_rationals(items)?)?)
            }
            None => Pops::Float(PopulationVector::new(parse_f64s(items)?)?),
        },
    })
}

fn apportion_with<P: Population>(
    pops: &PopulationVector<P>,
    args: &ApportionArgs,
) -> crate::error::Result<(Apportionment, Option<Vec<Grant>>)> {
    let seats = args.input.seats;
    match (args.method, args.trace) {
        (Method::Priority, true) => huntington_hill_traced(pops, seats).map(|(a, t)| (a, Some(t))),
        (Method::Priority, false) => huntington_hill(pops, seats).map(|a| (a, None)),
        (Method::Divisor, _) => hill_divisor(pops, seats).map(|a| (a, None)),
    }
}

fn cmd_apportion(args: &ApportionArgs, format: Format, stdin: &mut dyn Read) -> Outcome {
    if args.trace && args.method == Method::Divisor {
        return Err(usage("--trace is only available with --method priority"));
    }
    let items = read_list(&args.input.pops, stdin)?;
    let (arithmetic, (apportionment, trace)) = match parse_pops(&items, args.input.arithmetic)? {
        Pops::Integer(p) => (Arithmetic::Exact, apportion_with(&p, args)?),
        Pops::Rational(p) => (Arithmetic::Exact, apportion_with(&p, args)?),
        Pops::Float(p) => (Arithmetic::Float, apportion_with(&p, args)?),
    };
    let output = ApportionOutput {
        arithmetic,
        method: args.method,
        apportionment,
        trace,
    };
    match format {
        Format::Json => json(&output),
        Format::Csv => {
            let mut s = String::from("state,seats\n");
            for (i, seats) in output.apportionment.seats().iter().enumerate() {
                let _ = writeln!(s, "{i},{seats}");
            }
            Ok(s)
        }
        _ => {
            let mut s = format!(
                "apportionment ({:?} arithmetic, {:?} method): {:?}\n",
                arithmetic,
                args.method,
                output.apportionment.seats()
            );
            for g in output.trace.iter().flatten() {
                let _ = writeln!(
                    s,
                    "seat {:>4} -> state {} (held {}, priority {:.6})",
                    g.seat, g.state, g.held, g.priority
                );
            }
            Ok(s)
        }
    }
}

fn check_with<P: Population>(pops: &PopulationVector<P>, seats: u64) -> crate::error::Result<ViolationReport> {
    let quotas = standard_quotas(pops, seats)?;
    let app = huntington_hill(pops, seats)?;
    Ok(ViolationReport::classify(&quotas, &app))
}

fn cmd_check(args: &PopulationArgs, format: Format, stdin: &mut dyn Read) -> Outcome {
    let items = read_list(&args.pops, stdin)?;
    let (arithmetic, report) = match parse_pops(&items, args.arithmetic)? {
        Pops::Integer(p) => (Arithmetic::Exact, check_with(&p, args.seats)?),
        Pops::Rational(p) => (Arithmetic::Exact, check_with(&p, args.seats)?),
        Pops::Float(p) => (Arithmetic::Float, check_with(&p, args.seats)?),
    };
    let output = CheckOutput { arithmetic, report };
    match format {
        Format::Json => json(&output),
        Format::Csv => {
            let mut s = String::from("state,quota,lower_bound,upper_bound,seats,class\n");
            for (i, r) in output.report.per_state.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{i},{},{},{},{},{}",
                    r.quota,
                    r.lower_bound,
                    r.upper_bound,
                    r.seats,
                    class_name(r.class)
                );
            }
            Ok(s)
        }
        _ => {
            let mut s = format!("arithmetic: {arithmetic:?}\n");
            for (i, r) in output.report.per_state.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "state {i}: quota {:.6} in [{}, {}], seats {} -> {}",
                    r.quota,
                    r.lower_bound,
                    r.upper_bound,
                    r.seats,
                    class_name(r.class)
                );
            }
            let _ = writeln!(
                s,
                "lower violation: {}, upper violation: {}",
                output.report.has_lower, output.report.has_upper
            );
            Ok(s)
        }
    }
}

fn class_name(class: QuotaClass) -> &'static str {
    match class {
        QuotaClass::Lower => "LOWER",
        QuotaClass::None => "NONE",
        QuotaClass::Upper => "UPPER",
    }
}

fn cmd_criteria(args: &CriteriaArgs, format: Format, stdin: &mut dyn Read) -> Outcome {
    let items = read_list(&args.quotas, stdin)?;
    if items.len() != 3 {
        return Err(usage(format!("expected three quotas, got {}", items.len())));
    }
    let exact = match args.arithmetic {
        ArithmeticChoice::Float => None,
        ArithmeticChoice::Exact => Some(parse_rationals(&items)?),
        ArithmeticChoice::Auto => items.iter().map(|s| parse_rational(s)).collect(),
    };
    let report: CriteriaReport = match exact {
        Some(q) => evaluate_criteria(&QuotaVector::from_quotas(q, args.seats)?)?,
        None => evaluate_criteria(&QuotaVector::from_quotas(parse_f64s(&items)?, args.seats)?)?,
    };
    match format {
        Format::Json => json(&report),
        Format::Csv => {
            let margin = |m: Option<f64>| m.map(|v| v.to_string()).unwrap_or_default();
            Ok(format!(
                "holds,criterion1,criterion2,criterion3,margin1,margin2,floor_sum,seats,guarded,near_boundary\n{},{},{},{},{},{},{},{},{},{}\n",
                report.holds,
                report.criteria[0],
                report.criteria[1],
                report.criteria[2],
                margin(report.margins[0]),
                margin(report.margins[1]),
                report.floor_sum,
                report.seats,
                report.guarded,
                report.near_boundary
            ))
        }
        _ => {
            let mut s = format!("violation: {} ({:?} arithmetic)\n", report.holds, report.arithmetic);
            for (i, c) in report.criteria.iter().enumerate() {
                let margin = report.margins.get(i).copied().flatten();
                match margin {
                    Some(m) => {
                        let _ = writeln!(s, "criterion {}: {c} (margin {m:e})", i + 1);
                    }
                    None => {
                        let _ = writeln!(s, "criterion {}: {c}", i + 1);
                    }
                }
            }
            let _ = writeln!(s, "floor sum {} of {} seats", report.floor_sum, report.seats);
            if report.guarded {
                s.push_str("largest quota below 2: no violation possible\n");
            }
            if report.near_boundary {
                s.push_str("warning: a margin is within float tolerance of zero\n");
            }
            Ok(s)
        }
    }
}

fn cmd_exact_prob(args: &ExactProbArgs, format: Format) -> Outcome {
    let seats = args.seats;
    let (probability, fraction) = match args.precision {
        Precision::Double => (exact_uniform_probability::<f64>(seats)?, None),
        Precision::High => (exact_uniform_probability::<DoubleDouble>(seats)?.hi(), None),
        Precision::Rational => {
            let r = exact_uniform_probability_rational(seats)?;
            let value = crate::scalar::Field::to_f64(&r);
            (value, Some(r.to_string()))
        }
    };
    let cells = if args.list_cells {
        let mut rows = Vec::new();
        for fp in FloorPair::all(seats) {
            rows.push(CellRow {
                j: fp.j,
                k: fp.k,
                triangle_area: triangle::<DoubleDouble>(&fp)?.area.hi(),
                cell_area: cell_overlap_area::<DoubleDouble>(&fp).hi(),
            });
        }
        Some(rows)
    } else {
        None
    };
    let output = ExactProbOutput {
        seats,
        precision: args.precision,
        probability,
        fraction,
        cells,
    };
    match format {
        Format::Json => json(&output),
        Format::Csv => match &output.cells {
            Some(cells) => {
                let mut s = String::from("j,k,triangle_area,cell_area\n");
                for c in cells {
                    let _ = writeln!(s, "{},{},{},{}", c.j, c.k, c.triangle_area, c.cell_area);
                }
                Ok(s)
            }
            None => Ok(format!("M,probability\n{},{}\n", seats, probability)),
        },
        _ => {
            let mut s = format!("P(violation | M = {seats}) = {probability:.12}");
            if let Some(f) = &output.fraction {
                let _ = write!(s, " = {f}");
            }
            s.push('\n');
            for c in output.cells.iter().flatten() {
                let _ = writeln!(
                    s,
                    "({}, {}): triangle {:.6e}, cell {:.6}",
                    c.j, c.k, c.triangle_area, c.cell_area
                );
            }
            Ok(s)
        }
    }
}

fn parse_dist(spec: &str) -> std::result::Result<PopulationDensity, Failure> {
    PopulationDensity::parse(spec).map_err(|e| usage(e.to_string()))
}

fn cmd_pdf_prob(args: &PdfProbArgs, format: Format) -> Outcome {
    let quad = args.quad.spec();
    quad.validate().map_err(|e| usage(e.to_string()))?;
    let probability = if args.dist.trim() == "simplex" {
        general_pdf_probability(args.seats, &UniformSimplexDensity::new(args.seats), &quad)?
    } else {
        let pop = parse_dist(&args.dist)?;
        let g = iid_quota_density(&pop, args.seats, &quad)?;
        general_pdf_probability(args.seats, &g, &quad)?
    };
    let output = PdfProbOutput {
        seats: args.seats,
        dist: args.dist.clone(),
        probability,
        quadrature: quad,
    };
    match format {
        Format::Json => json(&output),
        Format::Csv => Ok(format!("M,probability\n{},{}\n", output.seats, probability)),
        _ => Ok(format!(
            "P(violation | M = {}, {}) = {probability:.10}\n",
            output.seats, output.dist
        )),
    }
}

fn sample_options(workers: Option<usize>, cross_check: bool) -> std::result::Result<SampleOptions, Failure> {
    if workers == Some(0) {
        return Err(usage("--workers must be positive"));
    }
    Ok(SampleOptions { workers, cross_check })
}

fn cmd_sample(args: &SampleArgs, format: Format) -> Outcome {
    let options = sample_options(args.workers, args.cross_check)?;
    if args.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let scheme = match args.mode {
        Mode::Quotas => {
            if args.dist.is_some() {
                return Err(usage("--dist only applies to --mode populations"));
            }
            SamplingScheme::uniform_quotas(args.seats)?
        }
        Mode::Populations => {
            let pop = parse_dist(args.dist.as_deref().unwrap_or(DEFAULT_DIST))?;
            SamplingScheme::iid_populations(args.seats, pop)?
        }
    };
    let est: SampleEstimate = sample_violation_rate_with(&scheme, args.samples, args.seed, &options)?;
    match format {
        Format::Json => json(&est),
        Format::Csv => Ok(format!(
            "M,sampled,ci_low,ci_high,n,seed,redraws\n{},{},{},{},{},{},{}\n",
            est.seats, est.p_hat, est.ci_low, est.ci_high, est.n, est.seed, est.redraws
        )),
        _ => Ok(format!(
            "M = {}: p_hat = {:.5} ({} samples, seed {}), 95% CI ({:.5}, {:.5}), {} redraws\n",
            est.seats, est.p_hat, est.n, est.seed, est.ci_low, est.ci_high, est.redraws
        )),
    }
}

fn cmd_region(args: &RegionArgs, format: Format) -> Outcome {
    let fp = FloorPair::new(args.floor1, args.floor2, args.seats)?;
    let data = region_points(&fp, args.resolution)?;
    match format {
        Format::Json => json(&data),
        Format::Csv => Ok(region_csv(&data)),
        Format::Svg => Ok(region_svg(&data)),
        Format::Text => {
            let mut s = format!(
                "M = {}, floors ({}, {}): area {:.6e}, empty {}\n",
                data.seats, data.floor1, data.floor2, data.area, data.empty
            );
            for line in &data.lines {
                let _ = writeln!(s, "{} ({}): {} points", line.id, line.kind, line.points.len());
            }
            for (i, v) in data.vertices.iter().enumerate() {
                let _ = writeln!(s, "v{}: ({:.9}, {:.9})", i + 1, v.x, v.y);
            }
            Ok(s)
        }
    }
}

/// Rows of `element,id,kind,x,y` after a summary comment.
pub fn region_csv(data: &RegionData) -> String {
    let mut s = format!(
        "# seats={} floor1={} floor2={} area={} empty={}\nelement,id,kind,x,y\n",
        data.seats, data.floor1, data.floor2, data.area, data.empty
    );
    for line in &data.lines {
        for p in &line.points {
            let _ = writeln!(s, "line,{},{},{},{}", line.id, line.kind, p.x, p.y);
        }
    }
    for (i, v) in data.vertices.iter().enumerate() {
        let _ = writeln!(s, "vertex,v{},vertex,{},{}", i + 1, v.x, v.y);
    }
    s
}

/// Unit cell, boundary lines and the shaded feasible triangle.
pub fn region_svg(data: &RegionData) -> String {
    const SIZE: f64 = 420.0;
    const MARGIN: f64 = 30.0;
    const SCALE: f64 = SIZE - 2.0 * MARGIN;
    const COLORS: [&str; 3] = ["#c0392b", "#2471a3", "#555555"];
    let px = |x: f64| MARGIN + SCALE * x;
    let py = |y: f64| MARGIN + SCALE * (1.0 - y);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    );
    let _ = writeln!(
        s,
        "  <title>Feasible region, M={} floors ({}, {})</title>",
        data.seats, data.floor1, data.floor2
    );
    let _ = writeln!(
        s,
        "  <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{SCALE}\" height=\"{SCALE}\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>"
    );
    if !data.empty && data.vertices.len() == 3 {
        let pts: Vec<String> = data
            .vertices
            .iter()
            .map(|v| format!("{:.4},{:.4}", px(v.x), py(v.y)))
            .collect();
        let _ = writeln!(
            s,
            "  <polygon id=\"feasible\" points=\"{}\" fill=\"#f5b041\" fill-opacity=\"0.6\" stroke=\"none\"/>",
            pts.join(" ")
        );
    }
    for (i, line) in data.lines.iter().enumerate() {
        if line.points.is_empty() {
            continue;
        }
        let pts: Vec<String> = line
            .points
            .iter()
            .map(|p| format!("{:.4},{:.4}", px(p.x), py(p.y)))
            .collect();
        let _ = writeln!(
            s,
            "  <polyline id=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>",
            line.id,
            pts.join(" "),
            COLORS[i % COLORS.len()]
        );
    }
    let _ = writeln!(
        s,
        "  <text x=\"{MARGIN}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">d1 (j = {}, k = {}, M = {}){}</text>",
        SIZE - 8.0,
        data.floor1,
        data.floor2,
        data.seats,
        if data.empty { ", empty" } else { "" }
    );
    s.push_str("</svg>\n");
    s
}

fn cmd_table(args: &TableArgs, format: Format) -> Outcome {
    let options = sample_options(args.workers, false)?;
    if args.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let houses = parse_seats_list(&args.seats)?;
    let pop = match args.which {
        Which::Uniform => {
            if args.dist.is_some() {
                return Err(usage("--dist only applies to --which iid"));
            }
            None
        }
        Which::Iid => Some(parse_dist(args.dist.as_deref().unwrap_or(DEFAULT_DIST))?),
    };
    let quad = QuadratureSpec::default();
    let mut rows = Vec::with_capacity(houses.len());
    for &m in &houses {
        let (theoretical, scheme) = match &pop {
            None => (
                exact_uniform_probability::<DoubleDouble>(m)?.hi(),
                SamplingScheme::uniform_quotas(m)?,
            ),
            Some(p) => {
                let g = iid_quota_density(p, m, &quad)?;
                (
                    general_pdf_probability(m, &g, &quad)?,
                    SamplingScheme::iid_populations(m, p.clone())?,
                )
            }
        };
        let est = sample_violation_rate_with(&scheme, args.samples, args.seed, &options)?;
        rows.push(TableRow {
            seats: m,
            theoretical,
            sampled: est.p_hat,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            redraws: est.redraws,
        });
    }
    let output = TableOutput {
        which: args.which,
        samples: args.samples,
        seed: args.seed,
        rows,
    };
    match format {
        Format::Json => json(&output),
        Format::Csv => {
            let mut s = String::from("M,theoretical,sampled,ci_low,ci_high\n");
            for r in &output.rows {
                let _ = writeln!(s, "{},{},{},{},{}", r.seats, r.theoretical, r.sampled, r.ci_low, r.ci_high);
            }
            Ok(s)
        }
        _ => {
            let mut s = format!(
                "{:>5}  {:>12}  {:>9}  {:>20}\n",
                "M", "theoretical", "sampled", "95% CI"
            );
            for r in &output.rows {
                let _ = writeln!(
                    s,
                    "{:>5}  {:>12.5}  {:>9.5}  ({:.5}, {:.5})",
                    r.seats, r.theoretical, r.sampled, r.ci_low, r.ci_high
                );
            }
            Ok(s)
        }
    }
}
