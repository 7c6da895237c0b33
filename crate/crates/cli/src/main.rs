mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use channelflow::decomposition::{build, validate_decomposition, DecompositionDump, DecompositionKind};
use channelflow::dist_sim::{write_trace, RunError, SimError};
use channelflow::generate::{generate, GenParams, HeightProfile};
use channelflow::model::{expand_demand_instances, InstanceFile, Mode, Problem};
use channelflow::oracle::ORACLE_CAP;
use channelflow::pipeline::{run_algorithm, Algorithm, PipelineError, RunOptions};
use channelflow::rational::Q;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use report::RunReport;

const EXIT_VALIDATION: u8 = 2;
const EXIT_CERTIFICATION: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(name = "channelflow", version, about = "Throughput maximization on tree and line networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Check an instance file.
    Validate { file: PathBuf },
    /// Build and validate a decomposition of every network.
    Decompose {
        file: PathBuf,
        #[arg(long, default_value = "ideal", value_parser = parse_kind)]
        kind: DecompositionKind,
    },
    /// Run one algorithm on an instance file and print a report.
    Run {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Seed for the algorithm's randomness.
        #[arg(long, env = "CHANNELFLOW_SEED", default_value_t = 0)]
        seed: u64,
        /// Write the raise trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Generate and run a batch of instances.
    Bench {
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 10)]
        count: u64,
        /// Emit CSV rows instead of JSON.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Tree,
    Line,
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "tree")]
    mode: ModeArg,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value = "unit", value_parser = parse_profile)]
    heights: HeightProfile,
    #[arg(long, default_value_t = 1)]
    pmin: u64,
    #[arg(long, default_value_t = 10)]
    pmax: u64,
    #[arg(long, default_value_t = 3)]
    max_slack: usize,
    #[arg(long, default_value_t = 4)]
    max_processing: usize,
    /// Generation seed; in `bench`, instance `i` uses `seed + i` for both
    /// generation and the run.
    #[arg(long, env = "CHANNELFLOW_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long, default_value = "0.1", value_parser = parse_rational)]
    eps: Q,
    /// Compute the exact optimum and certify the ratio.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = ORACLE_CAP)]
    cap: usize,
    /// Minimum narrow height; inferred when absent.
    #[arg(long, value_parser = parse_rational)]
    hmin: Option<Q>,
    /// Narrow-side constant `c` in `ξ = c / (c + h_min)`.
    #[arg(long, value_parser = parse_rational)]
    c: Option<Q>,
    #[arg(long, default_value_t = 2)]
    c_steps: u32,
    #[arg(long, default_value = "ideal", value_parser = parse_kind)]
    kind: DecompositionKind,
    /// Sequential solver without `α` raises (one network only).
    #[arg(long)]
    single_tree: bool,
}

impl RunArgs {
    fn options(&self, seed: u64) -> RunOptions {
        RunOptions {
            eps: self.eps.clone(),
            seed,
            c_steps: self.c_steps,
            c: self.c.clone(),
            h_min: self.hmin.clone(),
            kind: self.kind,
            single_tree: self.single_tree,
            oracle: self.oracle,
            oracle_cap: self.cap,
        }
    }
}

fn parse_kind(s: &str) -> Result<DecompositionKind, String> {
    s.parse()
}

fn parse_profile(s: &str) -> Result<HeightProfile, String> {
    s.parse()
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

/// Accepts `a/b`, integers and plain decimals such as `0.05`, exactly.
fn parse_rational(s: &str) -> Result<Q, String> {
    let bad = || format!("not a rational number: {s:?}");
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(Q::new(num, den));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(Q::new(digits, BigInt::from(10).pow(frac.len() as u32)))
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load(path: &Path) -> Result<(Vec<u8>, Problem), String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| e.to_string())?;
    let file = InstanceFile::from_json(&text).map_err(|e| e.to_string())?;
    let problem = file.to_problem().map_err(|e| e.to_string())?;
    Ok((bytes, problem))
}

fn gen_params(g: &GenArgs, seed: u64) -> GenParams {
    GenParams {
        mode: match g.mode {
            ModeArg::Tree => Mode::Tree,
            ModeArg::Line => Mode::Line,
        },
        n: g.n,
        m: g.m,
        r: g.r,
        seed,
        heights: g.heights,
        profit_range: (g.pmin, g.pmax),
        max_slack: g.max_slack,
        max_processing: g.max_processing,
    }
}

fn pipeline_exit(e: &PipelineError) -> u8 {
    match e {
        PipelineError::ModeMismatch { .. } | PipelineError::NeedsUnitHeights { .. } => {
            EXIT_VALIDATION
        }
        PipelineError::Oracle(_) => EXIT_CAP,
        PipelineError::Run(RunError::Sim(SimError::StepCapExceeded { .. })) => EXIT_CERTIFICATION,
        PipelineError::Run(RunError::Params(_) | RunError::HminTooLarge { .. }) => EXIT_VALIDATION,
        _ => EXIT_CERTIFICATION,
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run_one(bytes: &[u8], problem: &Problem, args: &RunArgs, seed: u64) -> Result<(RunReport, Vec<u8>), PipelineError> {
    let opts = args.options(seed);
    let start = Instant::now();
    let outcome = run_algorithm(problem, args.algo, &opts)?;
    let wall_ms = start.elapsed().as_millis() as u64;
    let records: Vec<_> = outcome.records().cloned().collect();
    let mut trace = Vec::new();
    write_trace(&records, &mut trace).expect("writing to memory");
    Ok((RunReport::new(digest(bytes), &outcome, &opts, wall_ms), trace))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(g) => match generate(&gen_params(&g, g.seed)) {
            Ok(problem) => {
                let text = InstanceFile::from_problem(&problem).to_json();
                match write_out(&g.output, &text) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(EXIT_VALIDATION, e),
                }
            }
            Err(e) => fail(EXIT_VALIDATION, e),
        },
        Command::Validate { file } => match load(&file) {
            Ok((bytes, problem)) => {
                let report = serde_json::json!({
                    "ok": true,
                    "digest": digest(&bytes),
                    "networks": problem.networks().len(),
                    "processors": problem.processors().len(),
                    "instances": expand_demand_instances(&problem).len(),
                });
                println!("{}", serde_json::to_string_pretty(&report).expect("json"));
                ExitCode::SUCCESS
            }
            Err(e) => {
                let report = serde_json::json!({ "ok": false, "error": e });
                println!("{}", serde_json::to_string_pretty(&report).expect("json"));
                ExitCode::from(EXIT_VALIDATION)
            }
        },
        Command::Decompose { file, kind } => {
            let problem = match load(&file) {
                Ok((_, p)) => p,
                Err(e) => return fail(EXIT_VALIDATION, e),
            };
            let mut dumps = Vec::new();
            for net in problem.networks() {
                let dec = build(net, kind);
                match validate_decomposition(&dec, net) {
                    Ok(report) => dumps.push(DecompositionDump::new(&dec, &report)),
                    Err(e) => return fail(EXIT_VALIDATION, e),
                }
            }
            println!("{}", serde_json::to_string_pretty(&dumps).expect("json"));
            ExitCode::SUCCESS
        }
        Command::Run {
            file,
            run,
            seed,
            trace,
        } => {
            let (bytes, problem) = match load(&file) {
                Ok(x) => x,
                Err(e) => return fail(EXIT_VALIDATION, e),
            };
            match run_one(&bytes, &problem, &run, seed) {
                Ok((report, trace_bytes)) => {
                    if let Some(path) = trace {
                        if let Err(e) = fs::write(&path, trace_bytes) {
                            return fail(EXIT_VALIDATION, format!("{}: {e}", path.display()));
                        }
                    }
                    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_CERTIFICATION)
                    }
                }
                Err(e) => fail(pipeline_exit(&e), e),
            }
        }
        Command::Bench {
            gen,
            run,
            count,
            csv,
        } => {
            let results: Vec<Result<RunReport, (u8, String)>> = (0..count)
                .into_par_iter()
                .map(|i| {
                    let seed = gen.seed.wrapping_add(i);
                    let problem =
                        generate(&gen_params(&gen, seed)).map_err(|e| (EXIT_VALIDATION, e.to_string()))?;
                    let bytes = InstanceFile::from_problem(&problem).to_json().into_bytes();
                    run_one(&bytes, &problem, &run, seed)
                        .map(|(mut r, _)| {
                            r.wall_ms = 0;
                            r
                        })
                        .map_err(|e| (pipeline_exit(&e), e.to_string()))
                })
                .collect();
            let mut code = 0;
            let mut reports = Vec::new();
            for r in results {
                match r {
                    Ok(rep) => {
                        if !rep.passed() {
                            code = code.max(EXIT_CERTIFICATION);
                        }
                        reports.push(rep);
                    }
                    Err((c, msg)) => {
                        eprintln!("error: {msg}");
                        code = code.max(c);
                    }
                }
            }
            let text = if csv {
                let mut lines = vec![RunReport::CSV_HEADER.to_string()];
                lines.extend(reports.iter().map(RunReport::csv_row));
                lines.join("\n")
            } else {
                serde_json::to_string_pretty(&reports).expect("json")
            };
            if let Err(e) = write_out(&gen.output, &text) {
                return fail(EXIT_VALIDATION, e);
            }
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use channelflow::rational::q;

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_rational("2").unwrap(), q(2, 1));
        assert_eq!(parse_rational(".25").unwrap(), q(1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("0.1e3").is_err());
    }
}
