use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cotsums::numtheory::mod_inverse;
use cotsums::reciprocity::{bound_sf, bound_v1};
use cotsums::sums::{dedekind_exact, partial_cot, s_f, vasyunin};
use cotsums::verify::{self, LMode, Suite, SweepConfig};
use cotsums::vseries::{v1_closed, v1_truncated, v2_closed, v2_eval, V1Args, V2Args};
use cotsums::{bench, figure, Error, Fraction, PiecewisePoly, Precision, SumValue};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cotsums", version, about = "Cotangent-type sums, their reciprocity relations and bounds")]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 128)]
    prec: u32,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled ℓ and pseudorandom triples.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single sum and print it as JSON.
    Compute(ComputeArgs),
    /// Emit `ell,x,value` rows of C_ℓ(h/k) for ℓ = 1..k-1 as CSV.
    Figure1 { frac: Fraction },
    /// Run a verification sweep and emit its JSON report.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        kmax: Option<u64>,
        /// `all` or `sample:N`.
        #[arg(long)]
        lmode: Option<LMode>,
    },
    /// Time the direct, closed-form and bound routes.
    Bench,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// The fraction h/k (for v2, the parameter a).
    frac: Fraction,
    #[arg(long)]
    l: Option<i64>,
    /// Piecewise polynomial in JSON.
    #[arg(long = "fn")]
    function: Option<PathBuf>,
    #[arg(long)]
    beta: Option<Fraction>,
    /// Use the truncated series with this many blocks.
    #[arg(long)]
    blocks: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Dedekind,
    Vasyunin,
    Partial,
    Sf,
    V1,
    V2,
    Bound,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Dedekind,
    Dft,
    V1,
    #[value(name = "prop_mp")]
    PropMp,
    Mcc,
    #[value(name = "thm_mt")]
    ThmMt,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Dedekind => vec![Suite::Dedekind],
            SuiteArg::Dft => vec![Suite::Dft],
            SuiteArg::V1 => vec![Suite::V1],
            SuiteArg::PropMp => vec![Suite::PropMp],
            SuiteArg::Mcc => vec![Suite::Mcc],
            SuiteArg::ThmMt => vec![Suite::ThmMt],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let prec = Precision::new(cli.prec)?;
    match &cli.command {
        Command::Compute(args) => {
            let value = compute(args, prec)?;
            emit(cli.out.as_deref(), &format!("{value}\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Figure1 { frac } => {
            let rows = figure::figure1(frac, prec)?;
            let mut buf = Vec::new();
            figure::write_csv(&rows, &mut buf).expect("writing to memory");
            emit(cli.out.as_deref(), &String::from_utf8(buf).expect("ascii csv"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, kmax, lmode } => {
            let mut reports = Vec::new();
            for s in suite.suites() {
                let defaults = SweepConfig::for_suite(s);
                let cfg = SweepConfig {
                    kmax: kmax.unwrap_or(defaults.kmax),
                    lmode: lmode.unwrap_or(defaults.lmode),
                    prec,
                    seed: cli.seed,
                };
                let report = verify::run(s, &cfg)?;
                eprintln!(
                    "{} {}: max {:.6e} vs threshold {:.6e} over {} cases",
                    if report.passed { "PASS" } else { "FAIL" },
                    s,
                    report.max_residual,
                    report.threshold,
                    report.cases
                );
                reports.push(report);
            }
            let passed = reports.iter().all(|r| r.passed);
            let out = if reports.len() == 1 {
                reports[0].to_json()
            } else {
                json!({ "passed": passed, "suites": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>() })
            };
            emit(cli.out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&out).expect("json")))?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Bench => {
            let report = bench::run(prec)?;
            println!("{report}");
            if let Some(path) = &cli.out {
                let text = serde_json::to_string_pretty(&report).expect("json");
                fs::write(path, text + "\n").map_err(|e| io_failure(path, e))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn sum_json(v: &SumValue) -> Value {
    json!({
        "value": v.value.to_string(),
        "err_estimate": format!("{:.6e}", v.err_estimate.to_f64()),
        "method": v.method.to_string(),
    })
}

fn pair(frac: &Fraction) -> Result<(i64, u64), Failure> {
    frac.to_i64_u64()
        .ok_or_else(|| Failure::Usage(format!("{frac} does not fit in 64-bit integers")))
}

fn require<T: Copy>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("this kind requires {flag}")))
}

fn read_function(path: &Path) -> Result<PiecewisePoly, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(PiecewisePoly::from_json(&text)?)
}

fn compute(args: &ComputeArgs, prec: Precision) -> Result<Value, Failure> {
    let frac = &args.frac;
    Ok(match args.kind {
        Kind::Dedekind => {
            let (h, k) = pair(frac)?;
            json!({ "value": dedekind_exact(h, k)?.to_string() })
        }
        Kind::Vasyunin => {
            let (h, k) = pair(frac)?;
            sum_json(&vasyunin(h, k, prec)?)
        }
        Kind::Partial => {
            let (h, k) = pair(frac)?;
            let l = require(args.l, "--l")?;
            let l = u64::try_from(l).map_err(|_| Failure::Usage("--l must be positive".into()))?;
            sum_json(&partial_cot(h, k, l, prec)?)
        }
        Kind::Sf => {
            let (h, k) = pair(frac)?;
            let path = args.function.as_deref().ok_or_else(|| Failure::Usage("sf requires --fn".into()))?;
            sum_json(&s_f(&read_function(path)?, h, k, prec)?)
        }
        Kind::V1 => {
            let (h, k) = pair(frac)?;
            let a = V1Args::new(h, k, require(args.l, "--l")?)?;
            match args.blocks {
                Some(m) => sum_json(&v1_truncated(a, m, prec)?),
                None => sum_json(&v1_closed(a, prec)?),
            }
        }
        Kind::V2 => {
            let beta = args.beta.clone().ok_or_else(|| Failure::Usage("v2 requires --beta".into()))?;
            let a = V2Args::new(frac.clone(), beta)?;
            match args.blocks {
                Some(m) => sum_json(&v2_eval(&a, m, prec)?),
                None => sum_json(&v2_closed(&a, prec)?),
            }
        }
        Kind::Bound => {
            let (h, k) = (frac.numer(), frac.denom());
            if *h <= 0 || h >= k {
                return Err(Failure::Usage(format!("bound needs 0 < h < k, got {frac}")));
            }
            let b = bound_v1(h, k)?;
            let mut v = serde_json::to_value(&b).expect("json");
            v["inverse"] = json!(mod_inverse(h, k)?.to_string());
            if let Some(path) = &args.function {
                v["sf"] = serde_json::to_value(bound_sf(&read_function(path)?, h, k)?).expect("json");
            }
            v
        }
    })
}
