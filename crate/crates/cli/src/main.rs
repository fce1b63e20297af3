use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sscover::advgen::GenParams;
use sscover::sssc::write_snapshot;
use sscover::weight::{parse_rational, render, Rational};
use sscover_cli::commands::write_certificates;
use sscover_cli::config::parse_epsilon;
use sscover_cli::error::{EXIT_BOUND, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
use sscover_cli::{
    cmd_generate, cmd_run, cmd_sweep, cmd_verify, parse_epsilons, CliError, OracleConfig, RunConfig, Source,
};

#[derive(Parser)]
#[command(name = "sscover", version, about = "One-pass set cover: generate, run, verify, sweep")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated edge stream and its truth sidecar.
    Generate(GenerateArgs),
    /// Stream once, extract certificates for every epsilon, validate and report.
    Run(RunArgs),
    /// Check a certificate against a stream.
    Verify(VerifyArgs),
    /// Extract over an epsilon grid from one pass and print a table.
    Sweep(SweepArgs),
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Args, Clone)]
struct GenOpts {
    /// Plane order.
    #[arg(long)]
    q: Option<u32>,
    /// Lines removed from the closing edge; sets epsilon = r/(3q).
    #[arg(long)]
    r: Option<u32>,
    /// Generator epsilon (exact rational).
    #[arg(long = "gen-epsilon", value_parser = rational)]
    gen_epsilon: Option<Rational>,
    #[arg(long, value_parser = rational)]
    alpha: Option<Rational>,
    /// Vertex count (random).
    #[arg(long)]
    n: Option<usize>,
    /// Edge count (random).
    #[arg(long)]
    m: Option<usize>,
    /// Unit benefits and costs (random).
    #[arg(long)]
    unit: bool,
    #[arg(long, default_value_t = 16)]
    max_weight: u64,
    #[arg(long)]
    max_edge_size: Option<usize>,
    /// Accept epsilon outside the construction's stated range.
    #[arg(long)]
    relax_range: bool,
    /// Emit empty dummy edges for every unused identifier.
    #[arg(long)]
    materialize_dummies: bool,
}

impl GenOpts {
    fn params(&self) -> GenParams {
        GenParams {
            q: self.q,
            epsilon: self.gen_epsilon.clone(),
            r: self.r,
            alpha: self.alpha.clone(),
            n: self.n,
            m: self.m,
            unit: self.unit,
            max_weight: self.max_weight,
            max_edge_size: self.max_edge_size,
            relax_range: self.relax_range,
            materialize_dummies: self.materialize_dummies,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// certified, uncertified or random.
    kind: String,
    #[command(flatten)]
    gen: GenOpts,
    #[arg(long, env = "SSSC_SEED")]
    seed: Option<u64>,
    /// Stream output path (stdout when absent).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Truth sidecar path; defaults to `<out>.truth` when --out is given.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SourceOpts {
    /// Edge stream file.
    #[arg(long, short, conflicts_with = "gen_kind")]
    input: Option<PathBuf>,
    /// Generate the stream in memory instead of reading a file.
    #[arg(long = "gen")]
    gen_kind: Option<String>,
    #[command(flatten)]
    gen: GenOpts,
    #[arg(long, env = "SSSC_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    allow_empty_edges: bool,
    /// Round every weight down to a power of two before streaming.
    #[arg(long)]
    pow2_round: bool,
    /// Skip the membership log and certificate validation.
    #[arg(long)]
    no_validate: bool,
    /// Offline solver for OPT (exact, exhaustive, greedy, or none).
    #[arg(long, default_value = "exact")]
    oracle: String,
    /// Largest edge count handed to the oracle.
    #[arg(long, default_value_t = 128)]
    oracle_max_edges: usize,
    /// Node budget of the exact solver.
    #[arg(long, default_value_t = sscover::oracles::DEFAULT_NODE_BUDGET)]
    oracle_budget: u64,
    /// Record wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
}

impl SourceOpts {
    fn config(&self, epsilons: Vec<Rational>) -> Result<RunConfig, CliError> {
        let source = match (&self.input, &self.gen_kind) {
            (Some(path), None) => Source::File(path.clone()),
            (None, Some(kind)) => {
                let seed = self.seed.ok_or_else(|| CliError::Usage("generators need --seed or SSSC_SEED".into()))?;
                Source::Generator { kind: kind.clone(), params: self.gen.params(), seed }
            }
            _ => return Err(CliError::Usage("give exactly one of --input or --gen".into())),
        };
        let oracle = (self.oracle != "none").then(|| OracleConfig {
            solver: self.oracle.clone(),
            max_edges: self.oracle_max_edges,
            budget: self.oracle_budget,
        });
        Ok(RunConfig {
            source,
            epsilons,
            allow_empty_edges: self.allow_empty_edges || self.gen.materialize_dummies,
            pow2_round: self.pow2_round,
            validate: !self.no_validate,
            oracle: if self.no_validate { None } else { oracle },
            timings: self.timings,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceOpts,
    /// Comma-separated epsilons, e.g. 0,1/8,1/4.
    #[arg(long, default_value = "0")]
    eps: String,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the summary snapshot here.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Write one certificate file per epsilon into this directory.
    #[arg(long)]
    certificates: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    certificate: PathBuf,
    /// Overrides the epsilon recorded in the certificate.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    allow_empty_edges: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceOpts,
    /// Comma-separated epsilon grid.
    #[arg(long, default_value = "0,1/8,1/4,1/2,3/4")]
    grid: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    /// Output path (stdout when absent).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn verdict_code(report: &sscover_cli::Report) -> i32 {
    let invalid = report.validation_failures();
    let broken = report.bound_failures();
    for msg in invalid.iter().chain(&broken) {
        eprintln!("sscover: {msg}");
    }
    if !invalid.is_empty() {
        EXIT_VALIDATION
    } else if !broken.is_empty() {
        EXIT_BOUND
    } else {
        EXIT_OK
    }
}

fn generate(args: GenerateArgs) -> Result<i32, CliError> {
    let seed = args.seed.ok_or_else(|| CliError::Usage("generators need --seed or SSSC_SEED".into()))?;
    let truth = args.truth.or_else(|| {
        args.out.as_ref().map(|o| {
            let mut p = o.clone().into_os_string();
            p.push(".truth");
            PathBuf::from(p)
        })
    });
    let mut out = output(args.out.as_ref())?;
    cmd_generate(&args.kind, &args.gen.params(), seed, &mut out, truth.as_deref())?;
    Ok(EXIT_OK)
}

fn run(args: RunArgs) -> Result<i32, CliError> {
    let config = args.source.config(parse_epsilons(&args.eps)?)?;
    let outcome = cmd_run(&config)?;
    if let Some(path) = &args.snapshot {
        let mut w = BufWriter::new(File::create(path)?);
        write_snapshot(&mut w, &outcome.summary)?;
        w.flush()?;
    }
    if let Some(dir) = &args.certificates {
        write_certificates(dir, &outcome.certificates)?;
    }
    match &args.report {
        Some(path) => fs::write(path, outcome.report.to_json())?,
        None => {
            let mut out = output(None)?;
            out.write_all(outcome.report.to_json().as_bytes())?;
            out.flush()?;
        }
    }
    Ok(verdict_code(&outcome.report))
}

fn verify(args: VerifyArgs) -> Result<i32, CliError> {
    let eps = args.eps.as_deref().map(parse_epsilon).transpose()?;
    let v = cmd_verify(&args.input, &args.certificate, eps, args.allow_empty_edges)?;
    println!(
        "ok epsilon={} dom_benefit={} required={} im_cost={} im_size={}",
        render(&v.epsilon),
        render(&v.dom_benefit),
        render(&v.required),
        render(&v.im_cost),
        v.im_size
    );
    Ok(EXIT_OK)
}

fn sweep(args: SweepArgs) -> Result<i32, CliError> {
    let config = args.source.config(parse_epsilons(&args.grid)?)?;
    let outcome = cmd_sweep(&config)?;
    let mut out = output(args.out.as_ref())?;
    match args.format {
        TableFormat::Csv => {
            outcome.report.write_csv(&mut out).map_err(|e| CliError::Io(io::Error::other(e)))?;
            eprintln!("sscover: im_cost monotone in epsilon: {}", outcome.report.observations.im_cost_monotone);
        }
        TableFormat::Json => out.write_all(outcome.report.to_json().as_bytes())?,
    }
    out.flush()?;
    Ok(verdict_code(&outcome.report))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sscover: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
