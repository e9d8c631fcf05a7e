//! Command-line front end. [`run`] takes its streams as arguments so the
//! whole surface can be driven from tests.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{exact_coverage, CoverageReport};
use crate::error::Error;
use crate::level::ConfidenceLevel;
use crate::methods::{compute, Method, MethodResult, Options};
use crate::randtest::{PValueMode, Statistic, Tester, DEFAULT_MAX_EXACT_N};
use crate::tables::{enumerate_compatible, enumerate_completions, ObservedTable, PotentialTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SCALE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_COVERAGE: i32 = 5;

/// Environment variable overriding the largest `n` for exact tests.
pub const MAX_N_ENV: &str = "ATE_EXACT_MAX_N";

/// Tables used by `bench` when none are given.
pub const BENCH_TABLES: [ObservedTable; 6] = [
    ObservedTable::new(1, 1, 1, 13),
    ObservedTable::new(2, 6, 8, 0),
    ObservedTable::new(6, 0, 11, 3),
    ObservedTable::new(6, 4, 4, 6),
    ObservedTable::new(1, 1, 3, 19),
    ObservedTable::new(8, 4, 5, 7),
];

#[derive(Debug, Parser)]
#[command(
    name = "ate-exact",
    version,
    about = "Exact confidence intervals for the average causal effect on a binary outcome"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interval for a single observed table.
    Compute(ComputeArgs),
    /// Intervals for every row of a CSV file with header n11,n10,n01,n00,alpha,method.
    Batch(BatchArgs),
    /// List the potential tables compatible with an observed table.
    Enumerate(EnumerateArgs),
    /// Exact coverage of a method over every potential table of size n.
    Coverage(CoverageArgs),
    /// Compare test counts and run time of the frontier scan and brute force.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Tau,
    Ntau,
    Both,
}

impl Scale {
    fn tau(self) -> bool {
        self != Scale::Ntau
    }

    fn ntau(self) -> bool {
        self != Scale::Tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Exact enumeration or Monte Carlo p-values.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Monte Carlo draws per test.
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shrink the hypergeometric intervals while keeping their coverage.
    #[arg(long = "wang")]
    pub refine: bool,
    /// Largest n allowed for exact tests.
    #[arg(long, env = MAX_N_ENV, default_value_t = DEFAULT_MAX_EXACT_N)]
    pub max_n: u64,
}

impl EngineArgs {
    pub fn options(&self) -> Options {
        Options {
            mode: match self.mode {
                ModeArg::Exact => PValueMode::Exact,
                ModeArg::Mc => PValueMode::MonteCarlo {
                    reps: self.reps,
                    seed: self.seed,
                },
            },
            max_exact_n: self.max_n,
            refine_hypergeom: self.refine,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ComputeArgs {
    /// Observed table n11,n10,n01,n00.
    #[arg(long)]
    pub table: ObservedTable,
    /// Significance level, as a decimal or a fraction a/b.
    #[arg(long, default_value = "0.05")]
    pub alpha: ConfidenceLevel,
    #[arg(long, default_value = "two-sided")]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Scale::Both)]
    pub scale: Scale,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    /// Input CSV; reads standard input when absent or `-`.
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Scale::Both)]
    pub scale: Scale,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub table: ObservedTable,
    /// Add the two-sided p-value of each table.
    #[arg(long)]
    pub pvalues: bool,
    /// One row per distinct table instead of one per completion.
    #[arg(long)]
    pub distinct: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub m: u64,
    #[arg(long, default_value = "0.05")]
    pub alpha: ConfidenceLevel,
    #[arg(long, default_value = "two-sided")]
    pub method: Method,
    /// Include every potential table in the report.
    #[arg(long)]
    pub rows: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Observed tables; may be repeated. Defaults to a fixed set of six.
    #[arg(long = "table")]
    pub tables: Vec<ObservedTable>,
    #[arg(long, default_value = "0.05")]
    pub alpha: ConfidenceLevel,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub engine: EngineArgs,
}

/// Serialized form of a [`MethodResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub table: [u64; 4],
    pub n: u64,
    pub m: u64,
    pub alpha: ConfidenceLevel,
    pub method: Method,
    pub ci_tau: [String; 2],
    pub ci_ntau: [i64; 2],
    pub tests: u64,
    pub mode: PValueMode,
    pub elapsed_ms: f64,
}

impl From<&MethodResult> for ResultRecord {
    fn from(r: &MethodResult) -> Self {
        let (lo, hi) = r.ci_tau();
        Self {
            table: r.table.counts(),
            n: r.table.n(),
            m: r.table.m(),
            alpha: r.alpha,
            method: r.method,
            ci_tau: [lo.to_string(), hi.to_string()],
            ci_ntau: [r.ci_ntau.lo, r.ci_ntau.hi],
            tests: r.tests,
            mode: r.mode,
            elapsed_ms: r.elapsed.as_micros() as f64 / 1000.0,
        }
    }
}

fn mode_name(mode: PValueMode) -> String {
    match mode {
        PValueMode::Exact => "exact".into(),
        PValueMode::MonteCarlo { reps, seed } => format!("mc(reps={reps},seed={seed})"),
    }
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ScaleGuard { .. } => EXIT_SCALE,
        _ => EXIT_INVALID,
    }
}

enum Failure {
    Lib(Error),
    Io(io::Error),
    Csv(csv::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Csv(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Compute(a) => cmd_compute(&a, out),
        Command::Batch(a) => cmd_batch(&a, stdin, out, err),
        Command::Enumerate(a) => cmd_enumerate(&a, out),
        Command::Coverage(a) => cmd_coverage(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_IO
        }
        Err(Failure::Csv(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io_error() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn csv_header(scale: Scale) -> Vec<&'static str> {
    let mut h = vec!["n11", "n10", "n01", "n00", "n", "m", "alpha", "method"];
    if scale.ntau() {
        h.extend(["ntau_lo", "ntau_hi"]);
    }
    if scale.tau() {
        h.extend(["tau_lo", "tau_hi"]);
    }
    h.extend(["tests", "mode", "elapsed_ms"]);
    h
}

fn csv_fields(r: &ResultRecord, scale: Scale) -> Vec<String> {
    let mut f: Vec<String> = r.table.iter().map(u64::to_string).collect();
    f.extend([
        r.n.to_string(),
        r.m.to_string(),
        r.alpha.to_string(),
        r.method.id().into(),
    ]);
    if scale.ntau() {
        f.extend(r.ci_ntau.iter().map(i64::to_string));
    }
    if scale.tau() {
        f.extend(r.ci_tau.iter().cloned());
    }
    f.extend([
        r.tests.to_string(),
        mode_name(r.mode),
        format!("{:.3}", r.elapsed_ms),
    ]);
    f
}

fn text_line(r: &ResultRecord, scale: Scale) -> String {
    let [a, b, c, d] = r.table;
    let mut s = format!("({a},{b},{c},{d}) {} alpha={}", r.method.id(), r.alpha);
    if scale.ntau() {
        s += &format!(" ntau=[{}, {}]", r.ci_ntau[0], r.ci_ntau[1]);
    }
    if scale.tau() {
        s += &format!(" tau=[{}, {}]", r.ci_tau[0], r.ci_tau[1]);
    }
    s + &format!(
        " tests={} mode={} elapsed={:.3}ms",
        r.tests,
        mode_name(r.mode),
        r.elapsed_ms
    )
}

fn cmd_compute(a: &ComputeArgs, out: &mut dyn Write) -> CmdResult {
    let result = compute(&a.table, a.alpha, a.method, &a.engine.options())?;
    let rec = ResultRecord::from(&result);
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rec)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(csv_header(a.scale))?;
            w.write_record(csv_fields(&rec, a.scale))?;
            w.flush()?;
        }
        Format::Text => {
            let [n11, n10, n01, n00] = rec.table;
            writeln!(
                out,
                "table     ({n11},{n10},{n01},{n00})  n={} m={}",
                rec.n, rec.m
            )?;
            writeln!(out, "method    {}", rec.method.id())?;
            writeln!(out, "alpha     {}", rec.alpha)?;
            if a.scale.ntau() {
                writeln!(out, "ci_ntau   [{}, {}]", rec.ci_ntau[0], rec.ci_ntau[1])?;
            }
            if a.scale.tau() {
                writeln!(out, "ci_tau    [{}, {}]", rec.ci_tau[0], rec.ci_tau[1])?;
            }
            writeln!(out, "tests     {}", rec.tests)?;
            writeln!(out, "mode      {}", mode_name(rec.mode))?;
            writeln!(out, "elapsed   {:.3} ms", rec.elapsed_ms)?;
        }
    }
    Ok(EXIT_OK)
}

const BATCH_HEADER: [&str; 6] = ["n11", "n10", "n01", "n00", "alpha", "method"];

/// One input row of a batch file.
#[derive(Debug)]
struct BatchRow {
    table: ObservedTable,
    alpha: ConfidenceLevel,
    method: Method,
}

impl BatchRow {
    fn parse(rec: &csv::StringRecord) -> std::result::Result<Self, String> {
        if rec.len() != BATCH_HEADER.len() {
            return Err(format!(
                "expected {} fields, found {}",
                BATCH_HEADER.len(),
                rec.len()
            ));
        }
        let mut counts = [0u64; 4];
        for (i, c) in counts.iter_mut().enumerate() {
            *c = rec[i]
                .parse()
                .map_err(|_| format!("{}: not a count: {:?}", BATCH_HEADER[i], &rec[i]))?;
        }
        Ok(Self {
            table: ObservedTable::new(counts[0], counts[1], counts[2], counts[3]),
            alpha: rec[4].parse().map_err(|e: Error| e.to_string())?,
            method: rec[5].parse().map_err(|e: Error| e.to_string())?,
        })
    }
}

/// One output row of a batch run. `line` is the input line number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub line: u64,
    pub result: Option<ResultRecord>,
    pub error: Option<String>,
}

fn cmd_batch(
    a: &BatchArgs,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let mut data = String::new();
    match &a.input {
        Some(p) if p.as_os_str() != "-" => File::open(p)?.read_to_string(&mut data)?,
        _ => stdin.read_to_string(&mut data)?,
    };
    if data.trim().is_empty() {
        return Ok(EXIT_OK);
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(data.as_bytes());
    let header = reader.headers()?.clone();
    if !header.iter().eq(BATCH_HEADER) {
        writeln!(
            err,
            "error: expected header {}, found {}",
            BATCH_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )?;
        return Ok(EXIT_INVALID);
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        match rec {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line());
                rows.push((line, BatchRow::parse(&rec)));
            }
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                rows.push((line, Err(e.to_string())));
            }
        }
    }
    if rows.is_empty() {
        return Ok(EXIT_OK);
    }
    let opts = a.engine.options();
    let entries: Vec<BatchEntry> = rows
        .into_par_iter()
        .map(|(line, row)| {
            let outcome = row.and_then(|r| {
                compute(&r.table, r.alpha, r.method, &opts)
                    .map(|res| ResultRecord::from(&res))
                    .map_err(|e| e.to_string())
            });
            match outcome {
                Ok(rec) => BatchEntry {
                    line,
                    result: Some(rec),
                    error: None,
                },
                Err(e) => BatchEntry {
                    line,
                    result: None,
                    error: Some(e),
                },
            }
        })
        .collect();

    let mut failed = false;
    for e in &entries {
        if let Some(msg) = &e.error {
            failed = true;
            writeln!(err, "line {}: {msg}", e.line)?;
        }
    }
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &entries)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut header = vec!["line"];
            header.extend(csv_header(a.scale));
            header.push("error");
            let width = header.len();
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(&header)?;
            for e in &entries {
                let mut fields = vec![e.line.to_string()];
                match (&e.result, &e.error) {
                    (Some(r), _) => {
                        fields.extend(csv_fields(r, a.scale));
                        fields.push(String::new());
                    }
                    (None, msg) => {
                        fields.resize(width - 1, String::new());
                        fields.push(msg.clone().unwrap_or_default());
                    }
                }
                w.write_record(&fields)?;
            }
            w.flush()?;
        }
        Format::Text => {
            for e in &entries {
                match (&e.result, &e.error) {
                    (Some(r), _) => writeln!(out, "line {}: {}", e.line, text_line(r, a.scale))?,
                    (None, msg) => writeln!(
                        out,
                        "line {}: error: {}",
                        e.line,
                        msg.as_deref().unwrap_or("")
                    )?,
                }
            }
        }
    }
    Ok(if failed { EXIT_INVALID } else { EXIT_OK })
}

/// One row of `enumerate` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateRow {
    /// Completion `(a, b, c, d)`; absent with `--distinct`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub completion: Option<[u64; 4]>,
    pub table: [u64; 4],
    pub ntau: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p2: Option<String>,
}

fn cmd_enumerate(a: &EnumerateArgs, out: &mut dyn Write) -> CmdResult {
    a.table.validate()?;
    let listed: Vec<(Option<[u64; 4]>, PotentialTable)> = if a.distinct {
        enumerate_compatible(&a.table)
            .into_iter()
            .map(|t| (None, t))
            .collect()
    } else {
        enumerate_completions(&a.table)
            .into_iter()
            .map(|(k, t)| (Some([k.a, k.b, k.c, k.d]), t))
            .collect()
    };
    let mut pvalues = HashMap::new();
    if a.pvalues {
        let mut tester = Tester::new(a.engine.options().mode, a.engine.max_n);
        tester.check_scale(a.table.n())?;
        for (_, t) in &listed {
            if !pvalues.contains_key(t) {
                let p = tester.p_value(t, &a.table, Statistic::TwoSided)?;
                pvalues.insert(*t, p);
            }
        }
    }
    let rows: Vec<EnumerateRow> = listed
        .iter()
        .map(|(k, t)| EnumerateRow {
            completion: *k,
            table: t.counts(),
            ntau: t.n_tau(),
            p2: pvalues.get(t).map(|p| p.to_string()),
        })
        .collect();
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            let mut header = Vec::new();
            if !a.distinct {
                header.extend(["a", "b", "c", "d"]);
            }
            header.extend(["N11", "N10", "N01", "N00", "ntau"]);
            if a.pvalues {
                header.push("p2");
            }
            w.write_record(&header)?;
            for r in &rows {
                let mut f: Vec<String> =
                    r.completion.iter().flatten().map(u64::to_string).collect();
                f.extend(r.table.iter().map(u64::to_string));
                f.push(r.ntau.to_string());
                f.extend(r.p2.clone());
                w.write_record(&f)?;
            }
            w.flush()?;
        }
        Format::Text => {
            for r in &rows {
                let [b11, b10, b01, b00] = r.table;
                let mut s = String::new();
                if let Some([ka, kb, kc, kd]) = r.completion {
                    s += &format!("({ka},{kb},{kc},{kd}) -> ");
                }
                s += &format!("({b11},{b10},{b01},{b00}) ntau={}", r.ntau);
                if let Some(p) = &r.p2 {
                    s += &format!(" p2={p}");
                }
                writeln!(out, "{s}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CoverageSummary<'a> {
    n: u64,
    m: u64,
    alpha: ConfidenceLevel,
    method: Method,
    tables: usize,
    min_coverage: String,
    min_table: [u64; 4],
    mean_coverage: f64,
    failures: Vec<[u64; 4]>,
    empty_intervals: Vec<[u64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<&'a [crate::coverage::CoverageRow]>,
}

fn cmd_coverage(a: &CoverageArgs, out: &mut dyn Write) -> CmdResult {
    let report: CoverageReport = exact_coverage(a.n, a.m, a.alpha, a.method, &a.engine.options())?;
    let min = report.min_row();
    let failures = report.failures();
    let summary = CoverageSummary {
        n: report.n,
        m: report.m,
        alpha: report.alpha,
        method: report.method,
        tables: report.rows.len(),
        min_coverage: min.coverage().to_string(),
        min_table: min.table.counts(),
        mean_coverage: report.mean_coverage(),
        failures: failures.iter().map(|r| r.table.counts()).collect(),
        empty_intervals: report
            .empty_intervals
            .iter()
            .map(ObservedTable::counts)
            .collect(),
        rows: a.rows.then_some(report.rows.as_slice()),
    };
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &summary)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record([
                "N11", "N10", "N01", "N00", "covered", "total", "coverage", "meets",
            ])?;
            let shown: Vec<_> = if a.rows {
                report.rows.iter().collect()
            } else {
                failures.clone()
            };
            for r in shown {
                let mut f: Vec<String> = r.table.counts().iter().map(u64::to_string).collect();
                f.extend([
                    r.covered.to_string(),
                    r.total.to_string(),
                    format!("{:.6}", r.coverage_f64()),
                    r.meets(a.alpha).to_string(),
                ]);
                w.write_record(&f)?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(
                out,
                "{} n={} m={} alpha={}: {} potential tables",
                a.method.id(),
                a.n,
                a.m,
                a.alpha,
                summary.tables
            )?;
            writeln!(
                out,
                "min coverage {} ({:.6}) at {}",
                summary.min_coverage,
                min.coverage_f64(),
                min.table
            )?;
            writeln!(out, "mean coverage {:.6}", summary.mean_coverage)?;
            writeln!(out, "empty intervals {}", report.empty_intervals.len())?;
            if a.rows {
                for r in &report.rows {
                    writeln!(
                        out,
                        "{} {}/{} {:.6}",
                        r.table,
                        r.covered,
                        r.total,
                        r.coverage_f64()
                    )?;
                }
            }
            for r in &failures {
                writeln!(
                    out,
                    "below {}: {} ({:.6})",
                    a.alpha.confidence_f64(),
                    r.table,
                    r.coverage_f64()
                )?;
            }
        }
    }
    Ok(if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_COVERAGE
    })
}

/// One `bench` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub table: [u64; 4],
    pub frontier_ntau: [i64; 2],
    pub frontier_tests: u64,
    pub frontier_ms: f64,
    pub brute_ntau: [i64; 2],
    pub brute_tests: u64,
    pub brute_ms: f64,
    /// `(2n+1)(n+1)`, the most tests one side of the scan can need.
    pub side_bound: u64,
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> CmdResult {
    let tables = if a.tables.is_empty() {
        BENCH_TABLES.to_vec()
    } else {
        a.tables.clone()
    };
    let opts = a.engine.options();
    let mut rows = Vec::new();
    for t in &tables {
        let start = Instant::now();
        let f = compute(t, a.alpha, Method::TwoSided, &opts)?;
        let frontier_ms = start.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();
        let b = compute(t, a.alpha, Method::BruteForce, &opts)?;
        let brute_ms = start.elapsed().as_secs_f64() * 1e3;
        let n = t.n();
        rows.push(BenchRow {
            table: t.counts(),
            frontier_ntau: [f.ci_ntau.lo, f.ci_ntau.hi],
            frontier_tests: f.tests,
            frontier_ms,
            brute_ntau: [b.ci_ntau.lo, b.ci_ntau.hi],
            brute_tests: b.tests,
            brute_ms,
            side_bound: (2 * n + 1) * (n + 1),
        });
    }
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for r in &rows {
                w.serialize(CsvBench::from(r))?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(
                out,
                "{:<14} {:>12} {:>7} {:>9} {:>12} {:>7} {:>9}",
                "table", "frontier", "tests", "ms", "brute", "tests", "ms"
            )?;
            for r in &rows {
                let [n11, n10, n01, n00] = r.table;
                writeln!(
                    out,
                    "{:<14} {:>12} {:>7} {:>9.3} {:>12} {:>7} {:>9.3}",
                    format!("({n11},{n10},{n01},{n00})"),
                    format!("[{}, {}]", r.frontier_ntau[0], r.frontier_ntau[1]),
                    r.frontier_tests,
                    r.frontier_ms,
                    format!("[{}, {}]", r.brute_ntau[0], r.brute_ntau[1]),
                    r.brute_tests,
                    r.brute_ms
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CsvBench {
    n11: u64,
    n10: u64,
    n01: u64,
    n00: u64,
    frontier_lo: i64,
    frontier_hi: i64,
    frontier_tests: u64,
    frontier_ms: f64,
    brute_lo: i64,
    brute_hi: i64,
    brute_tests: u64,
    brute_ms: f64,
    side_bound: u64,
}

impl From<&BenchRow> for CsvBench {
    fn from(r: &BenchRow) -> Self {
        let [n11, n10, n01, n00] = r.table;
        Self {
            n11,
            n10,
            n01,
            n00,
            frontier_lo: r.frontier_ntau[0],
            frontier_hi: r.frontier_ntau[1],
            frontier_tests: r.frontier_tests,
            frontier_ms: r.frontier_ms,
            brute_lo: r.brute_ntau[0],
            brute_hi: r.brute_ntau[1],
            brute_tests: r.brute_tests,
            brute_ms: r.brute_ms,
            side_bound: r.side_bound,
        }
    }
}
