//! `rank3`: construct the two elliptic-curve families, determine torsion,
//! compute height-pairing certificates, and report rank lower bounds.
//!
//! Exit codes: 0 = certified, 1 = inconclusive numerics, 2 = input or usage
//! error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use rank3_cli::report::{self, pell_json, pell_line, CertificateReport, CSV_HEADER};
use rank3_core::families::{
    build_sixth, build_square, certify, scan, CertifyOptions, Family, FamilyInstance, LogBase,
    ScanRecord, ScanSource,
};
use rank3_core::pell::{admissible_stream, PellPair};
use rank3_core::rational::render;
use rank3_core::Point;

#[derive(Parser)]
#[command(
    name = "rank3",
    about = "Rank-3 certificates for two families of elliptic curves over Q",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate Pell pairs a^2 - 3b^2 = 1 with the admissibility flag
    Pell(PellArgs),
    /// Build one family member, certify it, and emit the certificate
    Analyze(AnalyzeArgs),
    /// Certify a batch of family members
    Scan(ScanArgs),
    /// Exact group-law arithmetic on the designated points P1, P2, P3
    Point(PointArgs),
}

#[derive(Args)]
struct PellArgs {
    /// How many pairs to print
    #[arg(long)]
    count: usize,
    /// Print the full sequence instead of only admissible pairs
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Family parameter a (decimal, arbitrary size)
    #[arg(long)]
    a: String,
    /// Family parameter b (decimal, arbitrary size)
    #[arg(long)]
    b: String,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Draw the first K admissible Pell pairs as (a, b)
    #[arg(long, conflicts_with = "pairs")]
    pell_count: Option<usize>,
    /// CSV file with header "a,b", one instance per row
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// Group-law operation
    #[arg(long, value_enum)]
    op: OpArg,
    /// double P | add P Q | mul K P, with P in {P1, P2, P3, -P1, ...}
    #[arg(long, num_args = 1..=2, required = true, allow_hyphen_values = true)]
    args: Vec<String>,
}

#[derive(Args)]
struct ConfigArgs {
    /// Height-iteration stopping tolerance, natural-log units
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Doubling cap, 4..=16 (default 10; RANK3_MAX_DOUBLINGS overrides the
    /// default, the flag wins over the environment)
    #[arg(long)]
    max_doublings: Option<u32>,
    /// How many odd good-reduction primes bound the torsion order
    #[arg(long, default_value_t = 5)]
    primes: usize,
    /// Gram-entry normalization
    #[arg(long, value_enum, default_value_t = LogBaseArg::Natural)]
    log_base: LogBaseArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Square,
    Sixth,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Square => Family::Square,
            FamilyArg::Sixth => Family::Sixth,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LogBaseArg {
    /// Natural logarithm
    Natural,
    /// log base a (square family) or b (sixth family)
    Family,
}

impl From<LogBaseArg> for LogBase {
    fn from(l: LogBaseArg) -> LogBase {
        match l {
            LogBaseArg::Natural => LogBase::Natural,
            LogBaseArg::Family => LogBase::FamilyBase,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Double,
    Add,
    Mul,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Pell(args) => cmd_pell(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Point(args) => cmd_point(args),
    }
}

/// Resolves and validates the numeric configuration shared by subcommands.
fn certify_options(config: &ConfigArgs) -> Result<CertifyOptions, String> {
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(format!("--tol must be positive, got {}", config.tol));
    }
    let max_doublings = match config.max_doublings {
        Some(n) => n,
        None => match std::env::var("RANK3_MAX_DOUBLINGS") {
            Ok(v) => v
                .parse::<u32>()
                .map_err(|_| format!("RANK3_MAX_DOUBLINGS must be an integer, got {v:?}"))?,
            Err(_) => 10,
        },
    };
    if !(4..=16).contains(&max_doublings) {
        return Err(format!(
            "doubling cap must lie in 4..=16, got {max_doublings}"
        ));
    }
    if config.primes == 0 {
        return Err("--primes must be at least 1".to_string());
    }
    let timestamp_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_millis() as u64);
    Ok(CertifyOptions {
        tol: config.tol,
        max_doublings,
        prime_window: config.primes,
        prime_limit: 200,
        compute_torsion: None,
        log_base: config.log_base.into(),
        timestamp_ms,
    })
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_param(name: &str, value: &str) -> Result<BigUint, String> {
    let n = BigUint::from_str(value)
        .map_err(|_| format!("--{name} must be a nonnegative decimal integer, got {value:?}"))?;
    if n == BigUint::from(0u32) {
        return Err(format!("--{name} must be at least 1"));
    }
    Ok(n)
}

fn build_instance(family: Family, a: BigUint, b: BigUint) -> Result<FamilyInstance, String> {
    let result = match family {
        Family::Square => build_square(a, b),
        Family::Sixth => build_sixth(a, b),
    };
    result.map_err(|e| e.to_string())
}

fn cmd_pell(args: PellArgs) -> Result<u8, String> {
    if args.count == 0 {
        return Err("--count must be at least 1".to_string());
    }
    let pairs: Vec<PellPair> = if args.all {
        PellPair::sequence().take(args.count).collect()
    } else {
        admissible_stream(args.count)
    };
    let mut content = String::new();
    match args.config.format {
        FormatArg::Json => {
            content.push_str(&pell_json(&pairs));
            content.push('\n');
        }
        FormatArg::Csv => {
            content.push_str("n,a,b,admissible\n");
            for p in &pairs {
                content.push_str(&pell_line(p));
                content.push('\n');
            }
        }
        FormatArg::Text => {
            for p in &pairs {
                content.push_str(&pell_line(p));
                content.push('\n');
            }
        }
    }
    write_output(&args.config.out, &content)?;
    Ok(0)
}

fn certificate_report(
    inst: &FamilyInstance,
    opts: &CertifyOptions,
) -> (CertificateReport, Option<String>, bool) {
    let started = Instant::now();
    let cert = certify(inst, opts);
    let runtime_ms = started.elapsed().as_millis() as u64;
    let report = CertificateReport::from_certificate(&cert, opts.log_base, runtime_ms);
    (report, cert.diagnostic.clone(), cert.certified())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<u8, String> {
    let opts = certify_options(&args.config)?;
    let a = parse_param("a", &args.a)?;
    let b = parse_param("b", &args.b)?;
    let inst = build_instance(args.family.into(), a, b)?;
    let (report, diagnostic, certified) = certificate_report(&inst, &opts);

    let content = match args.config.format {
        FormatArg::Json => format!("{}\n", report::to_json(&report)),
        FormatArg::Csv => format!("{CSV_HEADER}\n{}\n", report::to_csv_row(&report)),
        FormatArg::Text => report::to_text(&report, diagnostic.as_deref()),
    };
    write_output(&args.config.out, &content)?;
    if let Some(d) = diagnostic {
        eprintln!("diagnostic: {d}");
    }
    Ok(if certified { 0 } else { 1 })
}

fn read_pairs_file(path: &PathBuf) -> Result<Vec<(BigUint, BigUint)>, String> {
    let content =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = content.lines();
    match lines.next().map(str::trim) {
        Some("a,b") => {}
        other => {
            return Err(format!(
                "pairs file must start with the header \"a,b\", found {other:?}"
            ))
        }
    }
    let mut pairs = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| format!("row {}: expected \"a,b\", got {line:?}", idx + 2))?;
        let parse = |s: &str| {
            BigUint::from_str(s.trim()).map_err(|_| format!("row {}: bad integer {s:?}", idx + 2))
        };
        pairs.push((parse(a)?, parse(b)?));
    }
    Ok(pairs)
}

fn cmd_scan(args: ScanArgs) -> Result<u8, String> {
    let opts = certify_options(&args.config)?;
    let source = match (args.pell_count, &args.pairs) {
        (Some(k), None) => {
            if k == 0 {
                return Err("--pell-count must be at least 1".to_string());
            }
            ScanSource::PellCount(k)
        }
        (None, Some(path)) => ScanSource::Pairs(read_pairs_file(path)?),
        _ => return Err("scan needs exactly one of --pell-count or --pairs".to_string()),
    };

    let started = Instant::now();
    let records = scan(args.family.into(), source, &opts);
    let total_ms = started.elapsed().as_millis() as u64;
    let per_item_ms = if records.is_empty() {
        0
    } else {
        total_ms / records.len() as u64
    };

    let mut content = String::new();
    let mut all_certified = !records.is_empty();
    if args.config.format == FormatArg::Csv {
        content.push_str(CSV_HEADER);
        content.push('\n');
    }
    for record in &records {
        match &record.outcome {
            Ok(cert) => {
                let report = CertificateReport::from_certificate(cert, opts.log_base, per_item_ms);
                if !cert.certified() {
                    all_certified = false;
                }
                match args.config.format {
                    FormatArg::Json => {
                        content.push_str(&report::to_json(&report));
                        content.push('\n');
                    }
                    FormatArg::Csv => {
                        content.push_str(&report::to_csv_row(&report));
                        content.push('\n');
                    }
                    FormatArg::Text => {
                        content.push_str(&report::to_text(&report, cert.diagnostic.as_deref()));
                        content.push('\n');
                    }
                }
            }
            Err(e) => {
                all_certified = false;
                scan_failure_inline(&mut content, record, e, args.config.format);
                eprintln!("item (a={}, b={}): {e}", record.a, record.b);
            }
        }
    }
    write_output(&args.config.out, &content)?;
    Ok(if all_certified { 0 } else { 1 })
}

fn scan_failure_inline(
    content: &mut String,
    record: &ScanRecord,
    error: &rank3_core::FamilyError,
    format: FormatArg,
) {
    match format {
        FormatArg::Json => {
            let obj = serde_json::json!({
                "a": record.a.to_string(),
                "b": record.b.to_string(),
                "error": error.to_string(),
            });
            content.push_str(&obj.to_string());
            content.push('\n');
        }
        FormatArg::Csv => {
            // The row shape cannot carry errors; the diagnostic goes to stderr.
        }
        FormatArg::Text => {
            content.push_str(&format!(
                "item (a = {}, b = {}): {error}\n\n",
                record.a, record.b
            ));
        }
    }
}

fn parse_point_arg(s: &str, inst: &FamilyInstance) -> Result<Point, String> {
    let (negated, name) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let index = match name.to_ascii_uppercase().as_str() {
        "P1" => 0,
        "P2" => 1,
        "P3" => 2,
        _ => return Err(format!("unknown point {s:?}; use P1, P2, P3, -P1, ...")),
    };
    let point = inst.points[index].clone();
    if negated {
        inst.curve
            .negate(&point)
            .map_err(|e| format!("cannot negate {name}: {e}"))
    } else {
        Ok(point)
    }
}

fn cmd_point(args: PointArgs) -> Result<u8, String> {
    let a = parse_param("a", &args.a)?;
    let b = parse_param("b", &args.b)?;
    let inst = build_instance(args.family.into(), a, b)?;

    let result = match args.op {
        OpArg::Double => {
            let [p] = args.args.as_slice() else {
                return Err("--op double takes exactly one point argument".to_string());
            };
            let p = parse_point_arg(p, &inst)?;
            inst.curve.double(&p).map_err(|e| e.to_string())?
        }
        OpArg::Add => {
            let [p, q] = args.args.as_slice() else {
                return Err("--op add takes exactly two point arguments".to_string());
            };
            let p = parse_point_arg(p, &inst)?;
            let q = parse_point_arg(q, &inst)?;
            inst.curve.add(&p, &q).map_err(|e| e.to_string())?
        }
        OpArg::Mul => {
            let [k, p] = args.args.as_slice() else {
                return Err("--op mul takes a scalar and a point".to_string());
            };
            let k: i64 = k
                .parse()
                .map_err(|_| format!("scalar must be an integer, got {k:?}"))?;
            let p = parse_point_arg(p, &inst)?;
            inst.curve.scalar_mul(k, &p).map_err(|e| e.to_string())?
        }
    };

    match result {
        Point::Identity => println!("infinity"),
        Point::Affine(x, y) => {
            println!("x = {}", render(&x));
            println!("y = {}", render(&y));
        }
    }
    Ok(0)
}
