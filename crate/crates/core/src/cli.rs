//! Command-line front end.
//!
//! Every command prints a table, as CSV (header plus rows) or as JSON
//! `{"meta": {...}, "rows": [...]}` with the same columns. Exact rationals
//! appear twice, as a `p/q` string and as a `_decimal` column.
//!
//! Exit codes: 2 usage, 3 invalid argument / precondition / out of regime,
//! 4 capacity or overflow, 5 empty fraction set.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::arith::{rational_string, rational_to_f64, ExactRational, FactorSieve};
use crate::asymptotics::{corollary_ratio_report, lemma_check};
use crate::enumeration::in_coprimality_class;
use crate::enumeration::{FareyEnumerator, MultiplesSpec};
use crate::experiments::{run_theorem2_table, run_theorem5, run_truncation, TruncationExperiment};
use crate::intervals::{IntervalAt, IntervalFamily};
use crate::limits::{ie_density, verify_theorem4};
use crate::sums::{density_sequence, s_direct, s_mobius, CoprimalitySpec, SumExponents};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum CommandArg {
    /// Exact limiting density of M(A,B|q).
    /// Columns: A, B, q, density, density_decimal.
    Limit,
    /// Complement lower bound against the exact density.
    /// Columns: A, B, q, bound, bound_decimal, density, density_decimal,
    /// one_minus_density, one_minus_density_decimal, holds, density_is_zero.
    Bound,
    /// Empirical density of M(A,B|q) along the x grid.
    /// Columns: x, lambda1, lambda2, r, density.
    Density,
    /// Direct and Möbius sums over the coprimality class (q0,q1,q2).
    /// Columns: x, lambda1, lambda2, r, q0, q1, q2, direct, mobius,
    /// direct_terms, mobius_terms, relative_difference, precision_warning.
    Sums,
    /// Sums over the coprimality class against the closed-form main term.
    /// Columns: x, lambda1, lambda2, r, q0, q1, q2, main_term, empirical, ratio.
    LemmaCheck,
    /// Share of the coprimality class in the full sum, against its limit.
    /// Columns: x, lambda1, lambda2, r, q0, q1, q2, restricted, full, ratio,
    /// pi, distance.
    Corollary,
    /// Integer densities of M(A_N), A_N = A ∩ [1,N].
    /// Columns: N, x, nu0, nu1.
    Truncation,
    /// All four empirical densities for a fixed interval.
    /// Columns: x, nu00, nu01, nu10, nu11, error.
    Theorem2,
    /// nu11 along the family against the exact limit.
    /// Columns: x, lambda1, lambda2, nu11, reference, reference_decimal,
    /// distance.
    Theorem5,
    /// The reduced fractions of the interval with denominator at most x.
    /// Columns: m, n.
    Enumerate,
}

impl CommandArg {
    fn name(self) -> &'static str {
        match self {
            CommandArg::Limit => "limit",
            CommandArg::Bound => "bound",
            CommandArg::Density => "density",
            CommandArg::Sums => "sums",
            CommandArg::LemmaCheck => "lemma-check",
            CommandArg::Corollary => "corollary",
            CommandArg::Truncation => "truncation",
            CommandArg::Theorem2 => "theorem2",
            CommandArg::Theorem5 => "theorem5",
            CommandArg::Enumerate => "enumerate",
        }
    }
}

#[derive(Debug, Args)]
struct Options {
    /// Elements of A, comma separated.
    #[arg(long = "A", value_delimiter = ',', global = true)]
    a: Vec<u64>,
    /// Elements of B, comma separated.
    #[arg(long = "B", value_delimiter = ',', global = true)]
    b: Vec<u64>,
    #[arg(long, global = true)]
    q: Option<u64>,
    #[arg(long, global = true)]
    q0: Option<u64>,
    #[arg(long, global = true)]
    q1: Option<u64>,
    #[arg(long, global = true)]
    q2: Option<u64>,
    /// const:λ1,λ2 | zeropow:c | shrink:λ0,γ
    #[arg(long, global = true)]
    family: Option<IntervalFamily>,
    /// Exponent pair r1r2: 00, 01, 10 or 11.
    #[arg(long, global = true)]
    r: Option<SumExponents>,
    #[arg(long, global = true)]
    x: Option<u64>,
    /// Increasing scales, comma separated.
    #[arg(long = "x-grid", value_delimiter = ',', global = true)]
    x_grid: Vec<u64>,
    /// Increasing truncation levels, comma separated.
    #[arg(long = "N-grid", value_delimiter = ',', global = true)]
    n_grid: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    #[arg(long = "sieve-limit", global = true)]
    sieve_limit: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "MULTDENS_THREADS", global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(
    name = "multdens",
    version,
    about = "Densities of sets of rational multiples"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArg,
    #[command(flatten)]
    options: Options,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub q: u64,
    pub coprimality: (u64, u64, u64),
    pub family: IntervalFamily,
    pub exponents: SumExponents,
    pub x_grid: Vec<u64>,
    pub n_grid: Vec<u64>,
    pub format: Format,
    pub sieve_limit: Option<u64>,
    pub threads: Option<usize>,
}

/// Failure of a CLI invocation.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(err) => match err {
                Error::InvalidArgument(_) | Error::Precondition(_) | Error::OutOfRegime(_) => 3,
                Error::Capacity(_) | Error::Overflow(_) => 4,
                Error::EmptyFareySet { .. } => 5,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Domain(err) => err.kind(),
        }
    }

    /// `error: kind=<kind> message=<text>` on a single line.
    pub fn line(&self) -> String {
        let message = match self {
            CliError::Usage(m) => m.clone(),
            CliError::Domain(err) => err.to_string(),
        };
        let message = message.split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error: kind={} message={message}", self.kind())
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Domain(err)
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Usage(format!("output: {err}"))
    }
}

fn join(values: &[u64]) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn usage(flag: &str, why: &str) -> CliError {
    CliError::Usage(format!("--{flag}: {why}"))
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let o = cli.options;
        let command = cli.command.name();
        let needs_sets = matches!(
            cli.command,
            CommandArg::Limit
                | CommandArg::Bound
                | CommandArg::Density
                | CommandArg::Theorem2
                | CommandArg::Theorem5
        );
        if (needs_sets || cli.command == CommandArg::Truncation) && o.a.is_empty() {
            return Err(usage("A", "required"));
        }
        if needs_sets && o.b.is_empty() {
            return Err(usage("B", "required"));
        }
        let mut x_grid = o.x_grid;
        if let Some(x) = o.x {
            if !x_grid.is_empty() {
                return Err(usage("x", "conflicts with --x-grid"));
            }
            x_grid.push(x);
        }
        let needs_grid = !matches!(cli.command, CommandArg::Limit | CommandArg::Bound);
        if needs_grid && x_grid.is_empty() {
            return Err(usage("x", "required (or --x-grid)"));
        }
        if x_grid.windows(2).any(|w| w[0] >= w[1]) || x_grid.contains(&0) {
            return Err(usage("x-grid", "must be positive and strictly increasing"));
        }
        if cli.command == CommandArg::Truncation && o.n_grid.is_empty() {
            return Err(usage("N-grid", "required"));
        }
        if o.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("N-grid", "must be strictly increasing"));
        }
        if matches!(cli.command, CommandArg::Truncation) && x_grid.first().is_some_and(|&x| x < 2) {
            return Err(usage("x-grid", "integer densities need x ≥ 2"));
        }
        if o.threads == Some(0) {
            return Err(usage("threads", "must be at least 1"));
        }
        let q = o.q.unwrap_or(1);
        if q == 0 {
            return Err(usage("q", "must be at least 1"));
        }
        let coprimality = (o.q0.unwrap_or(1), o.q1.unwrap_or(1), o.q2.unwrap_or(1));
        CoprimalitySpec::new(coprimality.0, coprimality.1, coprimality.2)
            .map_err(|e| CliError::Usage(format!("--q0/--q1/--q2: {e}")))?;
        if needs_sets {
            MultiplesSpec::new(o.a.clone(), o.b.clone(), q)
                .map_err(|e| CliError::Usage(format!("--A/--B: {e}")))?;
        }
        let mut a = o.a;
        a.sort_unstable();
        a.dedup();
        let mut b = o.b;
        b.sort_unstable();
        b.dedup();
        Ok(RunConfig {
            command,
            a,
            b,
            q,
            coprimality,
            family: match o.family {
                Some(f) => f,
                None => "const:0,1".parse().expect("default family parses"),
            },
            exponents: o
                .r
                .unwrap_or(SumExponents::new(1, 1).expect("valid exponents")),
            x_grid,
            n_grid: o.n_grid,
            format: o.format,
            sieve_limit: o.sieve_limit,
            threads: o.threads,
        })
    }

    /// Arguments that parse back to this configuration.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec![self.command.to_string()];
        let mut push = |flag: &str, value: String| {
            args.push(format!("--{flag}"));
            args.push(value);
        };
        if !self.a.is_empty() {
            push("A", join(&self.a));
        }
        if !self.b.is_empty() {
            push("B", join(&self.b));
        }
        push("q", self.q.to_string());
        push("q0", self.coprimality.0.to_string());
        push("q1", self.coprimality.1.to_string());
        push("q2", self.coprimality.2.to_string());
        push("family", self.family.to_string());
        push("r", self.exponents.to_string());
        if !self.x_grid.is_empty() {
            push("x-grid", join(&self.x_grid));
        }
        if !self.n_grid.is_empty() {
            push("N-grid", join(&self.n_grid));
        }
        push("format", self.format.to_string());
        if let Some(limit) = self.sieve_limit {
            push("sieve-limit", limit.to_string());
        }
        if let Some(threads) = self.threads {
            push("threads", threads.to_string());
        }
        args
    }

    pub fn canonical(&self) -> String {
        self.to_args().join(" ")
    }

    fn needs_mobius(&self) -> bool {
        matches!(self.command, "sums" | "lemma-check")
    }

    /// Explicit `--sieve-limit`, else large enough for every numerator,
    /// set element, modulus and (for Möbius sums) `x·q0·q2`.
    pub fn effective_sieve_limit(&self) -> Result<u64, CliError> {
        if let Some(limit) = self.sieve_limit {
            return Ok(limit);
        }
        let x_max = self.x_grid.last().copied().unwrap_or(1);
        let lambda = self.family.max_upper(&self.x_grid).max(1.0);
        let mut limit = (x_max as f64 * lambda).ceil() as u64;
        let (q0, q1, q2) = self.coprimality;
        for v in self
            .a
            .iter()
            .chain(&self.b)
            .chain(&[self.q, q0, q1, q2, x_max, 2])
        {
            limit = limit.max(*v);
        }
        if self.needs_mobius() {
            let d_max = x_max
                .checked_mul(q0 * q2)
                .ok_or_else(|| CliError::Domain(Error::Overflow("x·q0·q2 exceeds u64".into())))?;
            limit = limit.max(d_max);
        }
        if self.command == "truncation" {
            limit = limit.min(x_max.max(self.a.iter().copied().max().unwrap_or(2)));
        }
        Ok(limit)
    }
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        parse_args(std::iter::once("multdens").chain(s.split_whitespace()))
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Parses a full argument vector, program name first.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let text = e.to_string();
        let first = text
            .lines()
            .find(|l| !l.trim().is_empty())
            .unwrap_or("invalid arguments")
            .trim_start_matches("error: ")
            .to_string();
        CliError::Usage(first)
    })?;
    RunConfig::from_cli(cli)
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

/// A table of results in column order.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn rational_cells(r: &ExactRational) -> [Cell; 2] {
    [
        Cell::Text(rational_string(r)),
        Cell::Float(rational_to_f64(r)),
    ]
}

fn interval_cells(i: &IntervalAt) -> [Cell; 2] {
    [
        Cell::Text(i.lower().to_string()),
        Cell::Text(i.upper().to_string()),
    ]
}

/// A fixed family is usable at every scale; the others need `x > e`.
fn interval_at(family: &IntervalFamily, x: u64) -> crate::Result<IntervalAt> {
    match *family {
        IntervalFamily::Constant { lower, upper } => IntervalAt::new(lower, upper, x as f64),
        _ => family.evaluate(x as f64),
    }
}

fn compute(config: &RunConfig, sieve: &FactorSieve) -> Result<Table, CliError> {
    let spec = || MultiplesSpec::new(config.a.clone(), config.b.clone(), config.q);
    let (q0, q1, q2) = config.coprimality;
    let class = CoprimalitySpec::new(q0, q1, q2)?;
    let exps = config.exponents;
    let sets = |t: &mut Vec<Cell>| {
        t.push(Cell::Text(join(&config.a)));
        t.push(Cell::Text(join(&config.b)));
        t.push(Cell::Int(config.q));
    };
    let class_cells = [Cell::Int(q0), Cell::Int(q1), Cell::Int(q2)];
    let table = match config.command {
        "limit" => {
            let mut t = Table::new(&["A", "B", "q", "density", "density_decimal"]);
            let d = ie_density(&config.a, &config.b, config.q, sieve)?;
            let mut row = Vec::new();
            sets(&mut row);
            row.extend(rational_cells(d.value()));
            t.push(row);
            t
        }
        "bound" => {
            let mut t = Table::new(&[
                "A",
                "B",
                "q",
                "bound",
                "bound_decimal",
                "density",
                "density_decimal",
                "one_minus_density",
                "one_minus_density_decimal",
                "holds",
                "density_is_zero",
            ]);
            let check = verify_theorem4(&config.a, &config.b, config.q, sieve)?;
            let mut row = Vec::new();
            sets(&mut row);
            row.extend(rational_cells(&check.bound));
            row.extend(rational_cells(check.density.value()));
            row.extend(rational_cells(&check.one_minus_density));
            row.push(Cell::Bool(check.holds));
            row.push(Cell::Bool(check.density_is_zero));
            t.push(row);
            t
        }
        "density" => {
            let mut t = Table::new(&["x", "lambda1", "lambda2", "r", "density"]);
            let spec = spec()?;
            if matches!(config.family, IntervalFamily::Constant { .. }) {
                for &x in &config.x_grid {
                    let interval = interval_at(&config.family, x)?;
                    let v = crate::sums::empirical_density(x, interval, exps, &spec, sieve)?;
                    let [l1, l2] = interval_cells(&interval);
                    t.push(vec![
                        Cell::Int(x),
                        l1,
                        l2,
                        Cell::Text(exps.to_string()),
                        Cell::Float(v),
                    ]);
                }
            } else {
                for (x, v) in density_sequence(&config.x_grid, &config.family, exps, &spec, sieve)?
                {
                    let [l1, l2] = interval_cells(&config.family.evaluate(x as f64)?);
                    t.push(vec![
                        Cell::Int(x),
                        l1,
                        l2,
                        Cell::Text(exps.to_string()),
                        Cell::Float(v),
                    ]);
                }
            }
            t
        }
        "sums" => {
            let mut t = Table::new(&[
                "x",
                "lambda1",
                "lambda2",
                "r",
                "q0",
                "q1",
                "q2",
                "direct",
                "mobius",
                "direct_terms",
                "mobius_terms",
                "relative_difference",
                "precision_warning",
            ]);
            for &x in &config.x_grid {
                let interval = interval_at(&config.family, x)?;
                let direct = s_direct(
                    x,
                    interval,
                    exps,
                    |f| in_coprimality_class(f, &class),
                    sieve,
                )?;
                let mobius = s_mobius(x, interval, exps, class, sieve)?;
                let rel = (direct.value - mobius.value).abs() / direct.value.max(1.0);
                let mut row = vec![Cell::Int(x)];
                row.extend(interval_cells(&interval));
                row.push(Cell::Text(exps.to_string()));
                row.extend(class_cells.clone());
                row.extend([
                    Cell::Float(direct.value),
                    Cell::Float(mobius.value),
                    Cell::Int(direct.term_count),
                    Cell::Int(mobius.term_count),
                    Cell::Float(rel),
                    Cell::Bool(direct.precision_warning || mobius.precision_warning),
                ]);
                t.push(row);
            }
            t
        }
        "lemma-check" => {
            let mut t = Table::new(&[
                "x",
                "lambda1",
                "lambda2",
                "r",
                "q0",
                "q1",
                "q2",
                "main_term",
                "empirical",
                "ratio",
            ]);
            for &x in &config.x_grid {
                let interval = interval_at(&config.family, x)?;
                let rep = lemma_check(x, interval, exps, class, sieve)?;
                let mut row = vec![Cell::Int(x)];
                row.extend(interval_cells(&interval));
                row.push(Cell::Text(exps.to_string()));
                row.extend(class_cells.clone());
                row.extend([
                    Cell::Float(rep.main_term),
                    Cell::Float(rep.empirical),
                    Cell::Float(rep.ratio),
                ]);
                t.push(row);
            }
            t
        }
        "corollary" => {
            let mut t = Table::new(&[
                "x",
                "lambda1",
                "lambda2",
                "r",
                "q0",
                "q1",
                "q2",
                "restricted",
                "full",
                "ratio",
                "pi",
                "distance",
            ]);
            for rep in corollary_ratio_report(&config.x_grid, &config.family, exps, class, sieve)? {
                let mut row = vec![Cell::Int(rep.x)];
                row.extend(interval_cells(&rep.interval));
                row.push(Cell::Text(exps.to_string()));
                row.extend(class_cells.clone());
                row.extend([
                    Cell::Float(rep.restricted),
                    Cell::Float(rep.full),
                    Cell::Float(rep.ratio),
                    Cell::Float(rep.pi),
                    Cell::Float(rep.distance),
                ]);
                t.push(row);
            }
            t
        }
        "truncation" => {
            let mut t = Table::new(&["N", "x", "nu0", "nu1"]);
            let exp = TruncationExperiment {
                a: config.a.clone(),
                n_grid: config.n_grid.clone(),
                x_grid: config.x_grid.clone(),
            };
            for row in run_truncation(&exp)? {
                t.push(vec![
                    Cell::Int(row.n),
                    Cell::Int(row.x),
                    Cell::Float(row.nu0),
                    Cell::Float(row.nu1),
                ]);
            }
            t
        }
        "theorem2" => {
            let mut t = Table::new(&["x", "nu00", "nu01", "nu10", "nu11", "error"]);
            for row in run_theorem2_table(&config.family, &spec()?, &config.x_grid, sieve)? {
                let mut cells = vec![Cell::Int(row.x)];
                match row.values {
                    Some(v) => cells.extend(v.iter().map(|&f| Cell::Float(f))),
                    None => cells.extend((0..4).map(|_| Cell::Text(String::new()))),
                }
                cells.push(Cell::Text(row.error.unwrap_or_default()));
                t.push(cells);
            }
            t
        }
        "theorem5" => {
            let mut t = Table::new(&[
                "x",
                "lambda1",
                "lambda2",
                "nu11",
                "reference",
                "reference_decimal",
                "distance",
            ]);
            for row in run_theorem5(&config.family, &spec()?, &config.x_grid, sieve)? {
                let mut cells = vec![Cell::Int(row.x)];
                cells.extend(interval_cells(&config.family.evaluate(row.x as f64)?));
                cells.push(Cell::Float(row.nu11));
                cells.extend(rational_cells(row.reference.value()));
                cells.push(Cell::Float(row.distance));
                t.push(cells);
            }
            t
        }
        "enumerate" => {
            let mut t = Table::new(&["m", "n"]);
            let x = *config.x_grid.last().expect("grid checked nonempty");
            let interval = interval_at(&config.family, x)?;
            for f in FareyEnumerator::new(x, interval, sieve)?.iter() {
                t.push(vec![Cell::Int(f.m), Cell::Int(f.n)]);
            }
            t
        }
        other => unreachable!("unknown command {other}"),
    };
    Ok(table)
}

fn emit(
    config: &RunConfig,
    sieve_limit: u64,
    table: &Table,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Usage(format!("output: {e}"));
    match config.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush().map_err(io)?;
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let doc = json!({
                "meta": {
                    "config": config.canonical(),
                    "version": env!("CARGO_PKG_VERSION"),
                    "sieve_limit": sieve_limit,
                },
                "rows": rows,
            });
            serde_json::to_writer(&mut *out, &doc)
                .map_err(|e| CliError::Usage(format!("output: {e}")))?;
            writeln!(out).map_err(io)?;
        }
    }
    Ok(())
}

/// Runs a parsed configuration and writes the report to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let sieve_limit = config.effective_sieve_limit()?;
    let work = || -> Result<Table, CliError> {
        let sieve = FactorSieve::new(sieve_limit)?;
        compute(config, &sieve)
    };
    let table = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?
            .install(work)?,
        None => work()?,
    };
    emit(config, sieve_limit, &table, out)
}

/// Full entry point: parses, runs, reports errors on `err` and returns the
/// process exit code.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&argv) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
        ) {
            let _ = write!(out, "{e}");
            return if e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                2
            } else {
                0
            };
        }
    }
    let result = parse_args(argv).and_then(|config| run(&config, out));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &str) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("multdens").chain(args.split_whitespace()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn parse_shapes() {
        let c: RunConfig = "limit --A 2,3 --B 1 --q 1".parse().unwrap();
        assert_eq!(c.command, "limit");
        assert_eq!(c.a, vec![2, 3]);
        let c: RunConfig =
            "density --A 2 --B 3 --q 1 --family const:0,1 --r 11 --x 10000 --format json"
                .parse()
                .unwrap();
        assert_eq!(c.x_grid, vec![10_000]);
        assert_eq!(c.format, Format::Json);
        let err = "density --A 2 --B 3 --family const:1,1 --x 10"
            .parse::<RunConfig>()
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.line().contains("family"), "{}", err.line());
        assert!("limit --A 2".parse::<RunConfig>().is_err());
        assert!("density --A 2 --B 3".parse::<RunConfig>().is_err());
        assert!("density --A 2 --B 3 --x-grid 10,5"
            .parse::<RunConfig>()
            .is_err());
    }

    #[test]
    fn canonical_round_trip() {
        for s in [
            "limit --A 3,2 --B 1",
            "density --A 2 --B 3 --family shrink:1,0.5 --r 01 --x-grid 100,1000 --threads 2",
            "truncation --A 2,3,5 --N-grid 2,3 --x 1000 --format json --sieve-limit 5000",
            "sums --q0 2 --q1 3 --q2 5 --family const:1/2,3 --x 50",
        ] {
            let c: RunConfig = s.parse().unwrap();
            let back: RunConfig = c.canonical().parse().unwrap();
            assert_eq!(back, c);
            assert_eq!(back.canonical(), c.canonical());
        }
    }

    #[test]
    fn limit_and_bound_rows() {
        let (code, out, _) = run_str("limit --A 2 --B 3 --q 1");
        assert_eq!(code, 0);
        assert_eq!(
            out.lines().nth(1).unwrap(),
            "2,3,1,1/12,0.08333333333333333"
        );
        let (code, out, _) = run_str("bound --A 2 --B 3 --q 1");
        assert_eq!(code, 0);
        let row = out.lines().nth(1).unwrap();
        assert!(
            row.contains("1/2,0.5") && row.contains("11/12") && row.ends_with("true,false"),
            "{row}"
        );
    }

    #[test]
    fn enumerate_rows() {
        let (code, out, _) = run_str("enumerate --x 4 --family const:0,1");
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 6);
        assert_eq!(out.lines().next().unwrap(), "m,n");
    }

    #[test]
    fn error_exit_codes() {
        let (code, _, err) = run_str("bound --A 4,6 --B 7");
        assert_eq!(code, 3);
        assert!(err.starts_with("error: kind=precondition") && err.lines().count() == 1);
        let (code, _, err) = run_str("limit --A 2,3,5,7,11,13,17,19,23,29,31,37 --B 1,41");
        assert_eq!(code, 4);
        assert!(err.contains("kind=capacity"));
        let (code, _, err) = run_str("theorem2 --A 1 --B 1 --family const:1/7,1/6 --x 3");
        assert_eq!(code, 0, "{err}");
        let (code, _, err) = run_str("density --A 1 --B 1 --family const:1/7,1/6 --x 3");
        assert_eq!(code, 5);
        assert!(err.contains("kind=empty-farey-set"));
        let (code, _, err) = run_str("limit --A x --B 1");
        assert_eq!(code, 2);
        assert!(err.starts_with("error: kind=usage"));
    }

    #[test]
    fn json_shape() {
        let (code, out, _) = run_str("limit --A 2,3 --B 1 --format json");
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["rows"][0]["density"], "1/2");
        assert_eq!(v["rows"][0]["density_decimal"], 0.5);
        assert!(v["meta"]["config"].as_str().unwrap().starts_with("limit"));
        assert!(v["meta"]["sieve_limit"].as_u64().unwrap() >= 3);
    }

    #[test]
    fn csv_independent_of_threads() {
        let base = "sums --q0 2 --q1 1 --q2 3 --family const:0,1 --r 11 --x-grid 100,400";
        let (_, one, _) = run_str(&format!("{base} --threads 1"));
        let (_, four, _) = run_str(&format!("{base} --threads 4"));
        assert_eq!(one, four);
        assert_eq!(one.lines().count(), 3);
    }
}
