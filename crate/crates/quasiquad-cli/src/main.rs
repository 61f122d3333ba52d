//! Command-line surface for the quasiquad library.
//!
//! Every subcommand maps to one library operation family and supports three
//! output formats: `human` (default), `json` (stable schema: `{command,
//! inputs, modulus?, values, exact}`), and `csv`. Results go to stdout,
//! diagnostics to stderr. Exit codes: 0 success, 2 invalid arguments,
//! 3 resource-cap refusal.

use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use quasiquad::chi::orbit;
use quasiquad::classes::{chain_witness, covering_gap_demo, ClassEnumerator};
use quasiquad::counting::{series_partial_sum, CountTable};
use quasiquad::order::{order_bounded, BoundedOrderQuery};
use quasiquad::padic::{lambda_classes_with, LambdaOptions};
use quasiquad::survey::{empirical_density_with, scan_smallest, verify_family, ScanOptions};
use quasiquad::Error;

/// Environment variable holding the default worker-thread count.
const THREADS_ENV: &str = "QUASIQUAD_THREADS";

#[derive(Parser)]
#[command(
    name = "quasiquad",
    version,
    about = "Exact dynamics of the map x -> x*ceil(x) on the rationals",
    arg_required_else_help = true
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Worker threads for scans (0 = all cores). Overrides QUASIQUAD_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Order of a/M up to a bound: prints the order, or ">N" past the bound.
    Ord {
        /// Numerator (any integer coprime to M).
        a: String,
        /// Denominator base, >= 2.
        m: u64,
        /// Order bound N.
        #[arg(long, default_value_t = 40)]
        bound: u32,
    },
    /// Iterates of p/q, stopping at the first integer or after --steps.
    Orbit {
        p: String,
        q: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// The order-n congruence classes of numerators over base M.
    Classes { n: u32, m: u64 },
    /// The exact number of order-n classes over base M.
    Count { n: u32, m: u64 },
    /// Class-count table for n in 1..=n-max, M in 2..=m-max.
    Table {
        #[arg(long, default_value_t = 5)]
        n_max: u32,
        #[arg(long, default_value_t = 20)]
        m_max: u64,
    },
    /// Smallest numerator of each order over base M, scanning up to --limit.
    Smallest {
        m: u64,
        /// Inclusive order range, e.g. 1..34.
        #[arg(long, default_value = "1..34")]
        orders: String,
        /// Largest numerator scanned.
        #[arg(long, default_value_t = 10_000_000)]
        limit: u64,
        /// Order bound used by the scan (default: max(40, top of range)).
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Partial sum of the finite-order probability series over base M.
    Series { m: u64, n: u32 },
    /// Empirical density of order-n numerators among 1..=k.
    Density { m: u64, n: u32, k: u64 },
    /// A fraction whose orbit realizes a prescribed denominator chain.
    ChainWitness {
        /// Comma-separated chain, e.g. 10,5,5,5,1.
        chain: String,
    },
    /// Residues a for which a/p^k keeps its denominator for n map steps.
    Lambda { p: u64, k: u32, n: u32 },
    /// Disjoint classes with density sum near 1 that still miss 1+3^j.
    CoveringDemo { n_max: u32 },
    /// Check the three closed-form order-n families over an odd prime p.
    VerifyFamilies { p: u64, n: u32 },
}

#[derive(Serialize)]
struct Response {
    command: &'static str,
    inputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    modulus: Option<String>,
    values: Value,
    exact: bool,
}

impl Response {
    fn new(command: &'static str, inputs: Value, modulus: Option<String>, values: Value) -> Self {
        Self {
            command,
            inputs,
            modulus,
            values,
            exact: true,
        }
    }

    fn print(&self) {
        println!("{}", serde_json::to_string(self).expect("serializable"));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, cli.format, threads) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::InvalidArgument(_) => 2,
                Error::ResourceCap(_) | Error::DigitLimit { .. } => 3,
                Error::PrecisionExhausted(_) => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, String> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_ENV} must be an unsigned integer, got {raw:?}")),
        Err(_) => Ok(0),
    }
}

fn parse_bigint(text: &str, what: &str) -> Result<BigInt, Error> {
    BigInt::from_str(text)
        .map_err(|_| Error::InvalidArgument(format!("{what} must be an integer, got {text:?}")))
}

fn parse_order_range(text: &str) -> Result<(u32, u32), Error> {
    let bad = || {
        Error::InvalidArgument(format!(
            "order range must look like LO..HI (inclusive) or a single order, got {text:?}"
        ))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if lo < 1 || hi < lo {
            return Err(bad());
        }
        Ok((lo, hi))
    } else {
        let n: u32 = text.trim().parse().map_err(|_| bad())?;
        if n < 1 {
            return Err(bad());
        }
        Ok((n, n))
    }
}

/// Twelve decimal digits, truncated toward zero.
fn approx12(x: &BigRational) -> String {
    let scale = BigInt::from(10u64.pow(12));
    let scaled = (x * BigRational::from_integer(scale.clone()))
        .floor()
        .to_integer();
    let int_part = &scaled / &scale;
    let frac = (&scaled % &scale).magnitude().to_string();
    format!("{int_part}.{frac:0>12}")
}

fn run(command: Command, format: Format, threads: usize) -> Result<(), Error> {
    match command {
        Command::Ord { a, m, bound } => {
            let numerator = parse_bigint(&a, "a")?;
            let result = order_bounded(&BoundedOrderQuery::new(numerator, m, bound)?);
            match format {
                Format::Human | Format::Csv => println!("{result}"),
                Format::Json => Response::new(
                    "ord",
                    json!({"a": a, "m": m, "bound": bound}),
                    None,
                    json!([result.to_string()]),
                )
                .print(),
            }
        }
        Command::Orbit { p, q, steps } => {
            if steps < 1 {
                return Err(Error::InvalidArgument("steps must be >= 1".into()));
            }
            let num = parse_bigint(&p, "p")?;
            let den = parse_bigint(&q, "q")?;
            if den.is_zero() {
                return Err(Error::InvalidArgument("q must be nonzero".into()));
            }
            let seq = orbit(&BigRational::new(num, den), steps);
            let rendered: Vec<String> = seq.iter().map(|x| x.to_string()).collect();
            match format {
                Format::Human => rendered.iter().for_each(|x| println!("{x}")),
                Format::Csv => println!("{}", rendered.join(",")),
                Format::Json => Response::new(
                    "orbit",
                    json!({"p": p, "q": q, "steps": steps}),
                    None,
                    json!(rendered),
                )
                .print(),
            }
        }
        Command::Classes { n, m } => {
            let set = ClassEnumerator::new().enumerate(n, m)?;
            let residues: Vec<String> = set.residues().iter().map(|r| r.to_string()).collect();
            let modulus = set.modulus().to_string();
            match format {
                Format::Human => {
                    println!("modulus = {modulus}");
                    println!("{}", residues.join(", "));
                }
                Format::Csv => {
                    println!("modulus={modulus}");
                    println!("{}", residues.join(","));
                }
                Format::Json => Response::new(
                    "classes",
                    json!({"n": n, "m": m}),
                    Some(modulus),
                    json!(residues),
                )
                .print(),
            }
        }
        Command::Count { n, m } => {
            if m < 1 {
                return Err(Error::InvalidArgument("base must be >= 1".into()));
            }
            let count = CountTable::new().count(n, m).to_string();
            match format {
                Format::Human | Format::Csv => println!("{count}"),
                Format::Json => {
                    Response::new("count", json!({"n": n, "m": m}), None, json!([count])).print()
                }
            }
        }
        Command::Table { n_max, m_max } => {
            if n_max < 1 || m_max < 2 {
                return Err(Error::InvalidArgument(
                    "need n-max >= 1 and m-max >= 2".into(),
                ));
            }
            let mut table = CountTable::new();
            match format {
                Format::Human | Format::Csv => {
                    let header: Vec<String> = std::iter::once("n".to_string())
                        .chain((2..=m_max).map(|m| m.to_string()))
                        .collect();
                    println!("{}", header.join(","));
                    for n in 1..=n_max {
                        let row: Vec<String> = std::iter::once(n.to_string())
                            .chain((2..=m_max).map(|m| table.count(n, m).to_string()))
                            .collect();
                        println!("{}", row.join(","));
                    }
                }
                Format::Json => {
                    let mut entries = Vec::new();
                    for n in 1..=n_max {
                        for m in 2..=m_max {
                            entries.push(json!({
                                "n": n,
                                "m": m,
                                "count": table.count(n, m).to_string(),
                            }));
                        }
                    }
                    Response::new(
                        "table",
                        json!({"n_max": n_max, "m_max": m_max}),
                        None,
                        Value::Array(entries),
                    )
                    .print()
                }
            }
        }
        Command::Smallest {
            m,
            orders,
            limit,
            bound,
        } => {
            let (lo, hi) = parse_order_range(&orders)?;
            let bound = bound.unwrap_or_else(|| hi.max(40));
            if bound < hi {
                return Err(Error::InvalidArgument(format!(
                    "bound {bound} is below the top of the order range {hi}"
                )));
            }
            let opts = ScanOptions {
                order_bound: bound,
                threads,
            };
            let report = scan_smallest(m, limit, &opts)?;
            let rows: Vec<(u32, Option<u64>)> =
                (lo..=hi).map(|n| (n, report.smallest_for(n))).collect();
            match format {
                Format::Human => {
                    for (n, found) in &rows {
                        match found {
                            Some(a) => println!("order {n}: {a}"),
                            None => println!("order {n}: none up to {limit}"),
                        }
                    }
                }
                Format::Csv => {
                    println!("order,smallest");
                    for (n, found) in &rows {
                        match found {
                            Some(a) => println!("{n},{a}"),
                            None => println!("{n},"),
                        }
                    }
                }
                Format::Json => Response::new(
                    "smallest",
                    json!({"m": m, "orders": orders, "limit": limit, "bound": bound}),
                    None,
                    Value::Array(
                        rows.iter()
                            .map(|(n, found)| {
                                json!({
                                    "order": n,
                                    "smallest": found.map(|a| a.to_string()),
                                })
                            })
                            .collect(),
                    ),
                )
                .print(),
            }
        }
        Command::Series { m, n } => {
            if m < 1 {
                return Err(Error::InvalidArgument("base must be >= 1".into()));
            }
            let sum = series_partial_sum(m, n);
            emit_probability("series", json!({"m": m, "n": n}), &sum, format);
        }
        Command::Density { m, n, k } => {
            let opts = ScanOptions {
                order_bound: n.max(1),
                threads,
            };
            let density = empirical_density_with(m, n, k, &opts)?;
            emit_probability("density", json!({"m": m, "n": n, "k": k}), &density, format);
        }
        Command::ChainWitness { chain } => {
            let parsed: Result<Vec<u64>, _> = chain
                .split(',')
                .map(|part| part.trim().parse::<u64>())
                .collect();
            let parsed = parsed.map_err(|_| {
                Error::InvalidArgument(format!(
                    "chain must be comma-separated positive integers, got {chain:?}"
                ))
            })?;
            let witness = chain_witness(&parsed)?;
            match format {
                Format::Human | Format::Csv => println!("{witness}"),
                Format::Json => Response::new(
                    "chain-witness",
                    json!({"chain": parsed}),
                    None,
                    json!([witness.to_string()]),
                )
                .print(),
            }
        }
        Command::Lambda { p, k, n } => {
            let opts = LambdaOptions {
                threads,
                ..LambdaOptions::default()
            };
            let set = lambda_classes_with(p, k, n, &opts)?;
            let residues: Vec<String> = set.residues().iter().map(|r| r.to_string()).collect();
            let modulus = set.modulus().to_string();
            match format {
                Format::Human => {
                    println!("modulus = {modulus}");
                    println!("{}", residues.join(", "));
                }
                Format::Csv => {
                    println!("modulus={modulus}");
                    println!("{}", residues.join(","));
                }
                Format::Json => Response::new(
                    "lambda",
                    json!({"p": p, "k": k, "n": n}),
                    Some(modulus),
                    json!(residues),
                )
                .print(),
            }
        }
        Command::CoveringDemo { n_max } => {
            let levels = covering_gap_demo(n_max)?;
            match format {
                Format::Human => {
                    for lv in &levels {
                        let joined = join_u64(&lv.residues, " ");
                        println!("level {} (mod {}): {}", lv.level, lv.modulus, joined);
                    }
                }
                Format::Csv => {
                    println!("level,modulus,residues");
                    for lv in &levels {
                        let joined = join_u64(&lv.residues, " ");
                        println!("{},{},{joined}", lv.level, lv.modulus);
                    }
                }
                Format::Json => Response::new(
                    "covering-demo",
                    json!({"n_max": n_max}),
                    None,
                    Value::Array(
                        levels
                            .iter()
                            .map(|lv| {
                                json!({
                                    "level": lv.level,
                                    "modulus": lv.modulus.to_string(),
                                    "residues": lv
                                        .residues
                                        .iter()
                                        .map(|r| r.to_string())
                                        .collect::<Vec<_>>(),
                                })
                            })
                            .collect(),
                    ),
                )
                .print(),
            }
        }
        Command::VerifyFamilies { p, n } => {
            let ok = verify_family(p, n)?;
            match format {
                Format::Human | Format::Csv => println!("{ok}"),
                Format::Json => Response::new(
                    "verify-families",
                    json!({"p": p, "n": n}),
                    None,
                    json!([ok.to_string()]),
                )
                .print(),
            }
        }
    }
    Ok(())
}

fn join_u64(values: &[u64], sep: &str) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn emit_probability(command: &'static str, inputs: Value, value: &BigRational, format: Format) {
    match format {
        Format::Human => {
            println!("{value}");
            println!("~ {} (approximate)", approx12(value));
        }
        Format::Csv => println!("{value}"),
        Format::Json => Response::new(command, inputs, None, json!([value.to_string()])).print(),
    }
}
