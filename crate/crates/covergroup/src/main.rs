use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use covergroup::cover::{self, CoverRecord};
use covergroup::einstein::{self, PointRecord};
use covergroup::verify::{self, AllReport, Suite, SuiteConfig, SuiteReport};
use covergroup::CoverElement;

#[derive(Parser)]
#[command(
    name = "covergroup",
    version,
    about = "Numerical checks for the covering group of the cylinder conformal group"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite and print its report.
    Verify(VerifyArgs),
    /// Multiply two elements read from JSON files.
    Mul { a: PathBuf, b: PathBuf },
    /// Apply an element from a JSON file to a cylinder point from a JSON file.
    Act { element: PathBuf, point: PathBuf },
    /// Draw a seeded random element and print it.
    Sample {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, env = "COVERGROUP_SEED", default_value_t = 7)]
        seed: u64,
    },
    /// Print the k-th power of the central generator.
    Center {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i64,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or "all".
    #[arg(long)]
    suite: String,
    /// Sphere dimension; defaults to the suite's preferred one.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, env = "COVERGROUP_SEED", default_value_t = 7)]
    seed: u64,
    /// Override a check bound, e.g. --tol action_tau=1e-5 (repeatable).
    #[arg(long, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Print the report as a single JSON object.
    #[arg(long)]
    json: bool,
    /// Attach regenerated inputs to failure records.
    #[arg(long)]
    verbose: bool,
}

fn parse_tol(raw: &str) -> Result<(String, f64), String> {
    let (name, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{raw}'"))?;
    if name.is_empty() {
        return Err(format!("empty check name in '{raw}'"));
    }
    let parsed: f64 = value
        .parse()
        .map_err(|e| format!("bad bound '{value}': {e}"))?;
    if !parsed.is_finite() {
        return Err(format!("bound must be finite, got '{value}'"));
    }
    Ok((name.to_string(), parsed))
}

/// Writes a line to stdout, treating a closed pipe as a clean stop.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).is_err() || out.write_all(b"\n").is_err() {
        std::process::exit(0);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Mul { a, b } => cmd_mul(&a, &b),
        Cmd::Act { element, point } => cmd_act(&element, &point),
        Cmd::Sample { n, seed } => cmd_sample(n, seed),
        Cmd::Center { n, k } => cmd_center(n, k),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let tol: BTreeMap<String, f64> = args.tol.iter().cloned().collect();
    let config_for = |suite: Suite| SuiteConfig {
        n: args.n.unwrap_or(suite.default_n()),
        samples: args.samples,
        seed: args.seed,
        tol: tol.clone(),
        verbose: args.verbose,
    };

    if args.suite == "all" {
        let start = Instant::now();
        let mut reports: Vec<SuiteReport> = Vec::new();
        for suite in Suite::ALL {
            reports.push(
                verify::run_suite(suite, &config_for(suite)).map_err(|e| e.to_string())?,
            );
        }
        let all = AllReport {
            suite: "all".to_string(),
            passed: reports.iter().all(|r| r.passed),
            reports,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        if args.json {
            emit(&serde_json::to_string_pretty(&all).map_err(|e| e.to_string())?);
        } else {
            for report in &all.reports {
                emit(verify::render_text(report).trim_end());
            }
            emit(&format!(
                "{} suites, {} in {:.1} ms",
                all.reports.len(),
                if all.passed { "all PASS" } else { "FAIL" },
                all.wall_time_ms
            ));
        }
        return Ok(exit_for(all.passed));
    }

    let suite = Suite::parse(&args.suite).map_err(|e| e.to_string())?;
    let report =
        verify::run_suite(suite, &config_for(suite)).map_err(|e| e.to_string())?;
    if args.json {
        emit(&serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?);
    } else {
        emit(verify::render_text(&report).trim_end());
    }
    Ok(exit_for(report.passed))
}

fn exit_for(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn read_element(path: &Path) -> Result<CoverElement, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("reading {}: {e}", path.display()))?;
    let record: CoverRecord =
        serde_json::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))?;
    CoverElement::from_record(&record).map_err(|e| e.to_string())
}

fn print_element(e: &CoverElement) -> Result<ExitCode, String> {
    let mut value = serde_json::to_value(e.to_record()).map_err(|e| e.to_string())?;
    value["constraint"] = serde_json::json!(e.constraint());
    emit(&serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_mul(a: &Path, b: &Path) -> Result<ExitCode, String> {
    let product = read_element(a)?
        .star(&read_element(b)?)
        .map_err(|e| e.to_string())?;
    print_element(&product)
}

fn cmd_act(element: &Path, point: &Path) -> Result<ExitCode, String> {
    let e = read_element(element)?;
    let text = std::fs::read_to_string(point)
        .map_err(|err| format!("reading {}: {err}", point.display()))?;
    let record: PointRecord =
        serde_json::from_str(&text).map_err(|err| format!("parsing {}: {err}", point.display()))?;
    let p = einstein::EinsteinPoint::from_record(&record).map_err(|err| err.to_string())?;
    let image = einstein::act_cover(&e, &p).map_err(|err| err.to_string())?;
    let mut value = serde_json::to_value(image.to_record()).map_err(|err| err.to_string())?;
    value["constraint"] = serde_json::json!(e.constraint());
    emit(&serde_json::to_string_pretty(&value).map_err(|err| err.to_string())?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(n: usize, seed: u64) -> Result<ExitCode, String> {
    if n < 2 {
        return Err("n must be at least 2".to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = CoverElement::random_with_rng(n, &mut rng, 0.4).map_err(|e| e.to_string())?;
    print_element(&e)
}

fn cmd_center(n: usize, k: i64) -> Result<ExitCode, String> {
    if n < 2 {
        return Err("n must be at least 2".to_string());
    }
    print_element(&cover::center(n, k))
}
