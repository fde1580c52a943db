//! The `shw` command line.
//!
//! Results go to stdout as JSON with sorted keys; diagnostics go to stderr.
//! Exit codes: 0 success, 1 verification failure (or a numerical
//! hypothesis failing in `trflow`), 2 usage error, 3 when a base case is
//! unavailable or the oracle budget is exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hurwitz::{self, ClassicalQuery, DEFAULT_ORACLE_BUDGET};
use crate::partitions::{self, euler_characteristic, odd_partitions_of, Partition};
use crate::rational::{self, Rational};
use crate::spin::{Parity, SpinEngine, SpinQuery};
use crate::trflow;
use crate::verify::{self, Suite, VerifyOptions};

const PARITY_HELP: &str = "Parity of the spin structure: `even` is sign +1 (the `+` case), \
`odd` is sign −1 (the `−` case). `+` and `-` are accepted as aliases.";

#[derive(Debug, Parser)]
#[command(
    name = "shw",
    version,
    about = "Exact classical and spin Hurwitz numbers",
    long_about = "Exact classical and spin Hurwitz numbers, local GT invariants, and a \
finite-dimensional spectral-flow laboratory.\n\nParity convention: --parity even ↔ sign +1 ↔ '+'; \
--parity odd ↔ sign −1 ↔ '−'.\n\nValues are printed as \"p/q\" in lowest terms (\"108/1\" for \
integers unless --pretty is given)."
)]
pub struct Cli {
    /// Directory for cached character tables.
    #[arg(long, env = "SHW_CACHE_DIR", global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Maximum number of group compositions the brute-force oracle may perform.
    #[arg(long, env = "SHW_ORACLE_BUDGET", global = true, default_value_t = DEFAULT_ORACLE_BUDGET)]
    pub oracle_budget: u128,

    /// Print integer values without the "/1" denominator.
    #[arg(long, global = true)]
    pub pretty: bool,

    /// Add elapsed milliseconds to the result envelope (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spin Hurwitz number H^{h,p}_{m¹,…,m^k}.
    Spin(SpinArgs),
    /// Classical (possibly disconnected) Hurwitz number H^h_{m¹,…,m^k}.
    Classical(ClassicalArgs),
    /// Local GT invariant of a genus-h spin curve (etale spin Hurwitz number).
    Gt(GtArgs),
    /// Table of spin Hurwitz numbers for one degree.
    Table(TableArgs),
    /// Run property suites.
    Verify(VerifyArgs),
    /// Spectral flow of a block TR family.
    Trflow(TrflowArgs),
}

#[derive(Debug, Args)]
pub struct SpinArgs {
    #[arg(long)]
    pub genus: u32,
    #[arg(long, help = PARITY_HELP, value_parser = parse_parity)]
    pub parity: Parity,
    #[arg(long)]
    pub degree: u32,
    /// Odd profiles such as "3,1;3,1" or "1^4".
    #[arg(long, default_value = "")]
    pub profiles: String,
    /// Attach the derivation tree.
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassicalMethod {
    Frobenius,
    BruteForce,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[arg(long)]
    pub genus: u32,
    #[arg(long)]
    pub degree: u32,
    #[arg(long, default_value = "")]
    pub profiles: String,
    #[arg(long, value_enum, default_value_t = ClassicalMethod::Frobenius)]
    pub method: ClassicalMethod,
}

#[derive(Debug, Args)]
pub struct GtArgs {
    #[arg(long)]
    pub genus: u32,
    #[arg(long, help = PARITY_HELP, value_parser = parse_parity)]
    pub parity: Parity,
    #[arg(long)]
    pub degree: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub degree: u32,
    #[arg(long, default_value_t = 3)]
    pub max_genus: u32,
    #[arg(long, default_value_t = 3)]
    pub max_insertions: u32,
    #[arg(long, value_enum, default_value_t = TableFormat::Json)]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// all, or one of partitions|characters|frobenius|split|handle|gt|trflow.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 4)]
    pub degree_max: u32,
    #[arg(long, default_value_t = 5)]
    pub genus_max: u32,
}

#[derive(Debug, Args)]
pub struct TrflowArgs {
    /// Comma-separated blocks: kernel|invertible.
    #[arg(long)]
    pub blocks: String,
    /// Seed for a random orthogonal change of basis; omit for the block basis.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    /// Scale a of the conjugate-linear part.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

fn parse_parity(s: &str) -> std::result::Result<Parity, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs one command line, writing to the given streams; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let mut value = match &cli.command {
        Command::Spin(args) => cmd_spin(cli, args)?,
        Command::Classical(args) => cmd_classical(cli, args)?,
        Command::Gt(args) => cmd_gt(cli, args)?,
        Command::Table(args) => return cmd_table(cli, args, out),
        Command::Verify(args) => return cmd_verify(args, cli.oracle_budget, out, err),
        Command::Trflow(args) => cmd_trflow(args)?,
    };
    if cli.timing {
        value["timing_ms"] = json!(started.elapsed().as_millis() as u64);
    }
    emit(out, &value)?;
    Ok(0)
}

fn emit(out: &mut dyn Write, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn render(cli: &Cli, r: &Rational) -> String {
    if cli.pretty {
        rational::to_pretty_string(r)
    } else {
        rational::to_ratio_string(r)
    }
}

fn profile_strings(profiles: &[Partition]) -> Vec<String> {
    profiles.iter().map(Partition::to_string).collect()
}

pub fn cmd_spin(cli: &Cli, args: &SpinArgs) -> Result<Value> {
    let profiles = partitions::parse_profiles(&args.profiles)?;
    let q = SpinQuery::new(args.genus, args.parity, args.degree, profiles)?.normalize();
    let chi = euler_characteristic(q.degree(), q.genus(), q.profiles())?;
    let engine = SpinEngine::new();
    let mut envelope = json!({
        "query": {
            "command": "spin",
            "genus": q.genus(),
            "parity": q.parity(),
            "degree": q.degree(),
            "profiles": profile_strings(q.profiles()),
        },
        "chi": chi,
    });
    let value = if args.explain {
        let (value, tree) = engine.explain(&q)?;
        envelope["derivation"] = serde_json::to_value(tree).expect("serializable");
        value
    } else {
        engine.spin_hurwitz(&q)?
    };
    envelope["value"] = json!(render(cli, &value));
    Ok(envelope)
}

pub fn cmd_classical(cli: &Cli, args: &ClassicalArgs) -> Result<Value> {
    let profiles = partitions::parse_profiles(&args.profiles)?;
    let q = ClassicalQuery::new(args.genus, args.degree, profiles)?;
    let chi = euler_characteristic(q.d, q.h, &q.profiles)?;
    let (value, method) = match args.method {
        ClassicalMethod::Frobenius => (
            hurwitz::classical_hurwitz_cached(&q, cli.cache_dir.as_deref())?,
            "frobenius",
        ),
        ClassicalMethod::BruteForce => (hurwitz::brute_force_hurwitz(&q, cli.oracle_budget)?, "brute-force"),
    };
    Ok(json!({
        "query": {
            "command": "classical",
            "genus": q.h,
            "degree": q.d,
            "profiles": profile_strings(&q.profiles),
            "method": method,
        },
        "chi": chi,
        "value": render(cli, &value),
    }))
}

pub fn cmd_gt(cli: &Cli, args: &GtArgs) -> Result<Value> {
    let value = SpinEngine::new().gt_local(args.genus, args.parity, args.degree)?;
    let chi = euler_characteristic(args.degree, args.genus, &[])?;
    Ok(json!({
        "query": {
            "command": "gt",
            "genus": args.genus,
            "parity": args.parity,
            "degree": args.degree,
        },
        "chi": chi,
        "value": render(cli, &value),
    }))
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub h: u32,
    pub parity: Parity,
    pub d: u32,
    pub profiles: Vec<Partition>,
    pub value: Rational,
}

/// Every admissible `(h, p)` with `h ≤ max_genus`, and every multiset of at
/// most `max_insertions` nontrivial odd profiles.
pub fn spin_table(engine: &SpinEngine, d: u32, max_genus: u32, max_insertions: u32) -> Result<Vec<TableRow>> {
    let nontrivial: Vec<Partition> = odd_partitions_of(d)?
        .into_iter()
        .filter(|m| !m.is_trivial())
        .collect();
    let mut insertion_sets = vec![Vec::new()];
    let mut layer: Vec<(Vec<Partition>, usize)> = vec![(Vec::new(), 0)];
    for _ in 0..max_insertions {
        let mut next = Vec::new();
        for (set, start) in &layer {
            for (i, m) in nontrivial.iter().enumerate().skip(*start) {
                let mut grown = set.clone();
                grown.push(m.clone());
                next.push((grown, i));
            }
        }
        insertion_sets.extend(next.iter().map(|(s, _)| s.clone()));
        layer = next;
    }
    let mut rows = Vec::new();
    for h in 0..=max_genus {
        for parity in Parity::BOTH {
            if h == 0 && parity == Parity::Odd {
                continue;
            }
            for profiles in &insertion_sets {
                let q = SpinQuery::new(h, parity, d, profiles.clone())?;
                rows.push(TableRow {
                    h,
                    parity,
                    d,
                    profiles: profiles.clone(),
                    value: engine.spin_hurwitz(&q)?,
                });
            }
        }
    }
    Ok(rows)
}

pub fn cmd_table(cli: &Cli, args: &TableArgs, out: &mut dyn Write) -> Result<i32> {
    let rows = spin_table(&SpinEngine::new(), args.degree, args.max_genus, args.max_insertions)?;
    let io = |e: std::io::Error| Error::InvalidArgument(e.to_string());
    match args.format {
        TableFormat::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "h": r.h,
                        "parity": r.parity,
                        "d": r.d,
                        "profiles": profile_strings(&r.profiles),
                        "k": r.profiles.len(),
                        "value": render(cli, &r.value),
                    })
                })
                .collect();
            emit(out, &Value::Array(rows))?;
        }
        TableFormat::Csv => {
            writeln!(out, "h,parity,d,profiles,k,value_num,value_den").map_err(io)?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},\"{}\",{},{},{}",
                    r.h,
                    r.parity,
                    r.d,
                    partitions::format_profiles(&r.profiles),
                    r.profiles.len(),
                    r.value.numer(),
                    r.value.denom()
                )
                .map_err(io)?;
            }
        }
        TableFormat::Text => {
            writeln!(out, "{:>3} {:>6} {:>3} {:>3}  {:<24} value", "h", "parity", "d", "k", "profiles").map_err(io)?;
            for r in &rows {
                let labels: Vec<String> = r.profiles.iter().map(Partition::label).collect();
                writeln!(
                    out,
                    "{:>3} {:>6} {:>3} {:>3}  {:<24} {}",
                    r.h,
                    r.parity,
                    r.d,
                    r.profiles.len(),
                    labels.join(" "),
                    render(cli, &r.value)
                )
                .map_err(io)?;
            }
        }
    }
    Ok(0)
}

pub fn cmd_verify(args: &VerifyArgs, oracle_budget: u128, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let opts = VerifyOptions {
        degree_max: args.degree_max,
        genus_max: args.genus_max,
        oracle_budget,
    };
    let mut reports = std::thread::scope(|scope| {
        let handles: Vec<_> = suites
            .iter()
            .map(|&suite| {
                let opts = &opts;
                scope.spawn(move || verify::run_suite(suite, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect::<Vec<_>>()
    });
    reports.sort_by(|a, b| a.suite.cmp(&b.suite));
    let passed = reports.iter().all(|r| r.passed());
    for r in &reports {
        for failure in &r.failures {
            let _ = writeln!(err, "FAIL [{}] {failure}", r.suite);
        }
    }
    emit(out, &json!({ "passed": passed, "suites": reports }))?;
    Ok(if passed { 0 } else { 1 })
}

pub fn cmd_trflow(args: &TrflowArgs) -> Result<Value> {
    let blocks = trflow::parse_blocks(&args.blocks)?;
    let family = trflow::make_block_family(&blocks, args.scale, args.seed)?;
    let by_det = trflow::sf_by_determinant(&family, args.t_max, 11)?;
    let by_ker = trflow::sf_by_kernel(&family)?;
    let grid: Vec<f64> = (-10..=10).map(|i| args.t_max * i as f64 / 10.0).collect();
    let vanishing = trflow::vanishing_check(&family, &grid, 100, args.seed.unwrap_or(0));
    let block_names: Vec<String> = blocks.iter().map(ToString::to_string).collect();
    Ok(json!({
        "blocks": block_names,
        "seed": args.seed,
        "scale": args.scale,
        "t_max": args.t_max,
        "sf_det": by_det,
        "sf_ker": by_ker,
        "agree": by_det.sign == by_ker.sign,
        "min_sv_path": vanishing.min_singular_values,
        "residuals": {
            "tr_invariance": family.tr_invariance_residual(&grid),
            "vanishing_identity": vanishing.max_identity_residual,
        },
        "geometric": vanishing.geometric,
        "vanishing_bound_holds": vanishing.bound_holds,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("shw").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn spin_value() {
        let (code, out, _) = run_str(&["spin", "--genus", "1", "--parity", "odd", "--degree", "4", "--profiles", "3,1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], "-6/1");
        assert_eq!(v["chi"], -2);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["spin", "--genus", "1"]).0, 2);
        assert_eq!(run_str(&["spin", "--genus", "0", "--parity", "odd", "--degree", "4"]).0, 2);
        assert_eq!(run_str(&["spin", "--genus", "1", "--parity", "odd", "--degree", "4", "--profiles", "2,2"]).0, 2);
    }

    #[test]
    fn missing_base_case_exits_three() {
        let (code, _, err) = run_str(&["spin", "--genus", "2", "--parity", "even", "--degree", "5"]);
        assert_eq!(code, 3);
        assert!(err.contains("BaseCaseUnavailable"));
    }
}
