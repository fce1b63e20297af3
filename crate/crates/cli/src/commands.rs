use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::Zero;

use sscover::advgen::{write_truth, GenParams, GeneratorRegistry, LowerBoundInstance, Truth};
use sscover::oracles::{OfflineInstance, OptCover, SolverRegistry};
use sscover::sssc::{
    above_bound_holds, below_bound_holds, lemma2_holds, parse_certificate, round_edge_pow2, validate_certificate,
    write_certificate, Certificate, Regime, StreamSummary, Violation,
};
use sscover::stream::{write_stream, ParseOptions, StreamEdge, StreamError, StreamReader};
use sscover::weight::{render, Rational};

use crate::config::{RunConfig, Source};
use crate::error::CliError;
use crate::report::{
    render_r_star, BoundCheck, Exact, ExtractionRecord, Observations, OptSection, Report, StreamSection, TruthSection,
    ValidationOutcome, Verdict, SCHEMA_VERSION,
};

/// Everything one `run` produces.
pub struct RunOutcome {
    pub report: Report,
    pub summary: StreamSummary,
    pub certificates: Vec<Certificate>,
}

pub fn generate_instance(kind: &str, params: &GenParams, seed: u64) -> Result<LowerBoundInstance, CliError> {
    GeneratorRegistry::with_defaults().get(kind).and_then(|g| g.generate(params, seed)).map_err(CliError::usage)
}

/// Writes a generated stream, and its truth sidecar when a path is given.
pub fn cmd_generate(
    kind: &str,
    params: &GenParams,
    seed: u64,
    out: &mut impl Write,
    truth_path: Option<&Path>,
) -> Result<LowerBoundInstance, CliError> {
    let inst = generate_instance(kind, params, seed)?;
    write_stream(out, &inst.header, &inst.stream)?;
    out.flush()?;
    if let Some(path) = truth_path {
        let mut w = BufWriter::new(File::create(path)?);
        write_truth(&mut w, &inst.truth)?;
        w.flush()?;
    }
    Ok(inst)
}

struct Ingested {
    summary: StreamSummary,
    log: Option<OfflineInstance>,
    truth: Option<Truth>,
}

/// The single pass: every edge goes to the summary once, and to the
/// membership log when validation is on.
fn ingest<I>(
    edges: I,
    declared_n: Option<usize>,
    config: &RunConfig,
) -> Result<(StreamSummary, Option<OfflineInstance>), CliError>
where
    I: IntoIterator<Item = Result<StreamEdge, StreamError>>,
{
    let mut summary = StreamSummary::new(declared_n);
    let mut log = config.validate.then(OfflineInstance::new);
    for edge in edges {
        let edge = edge.map_err(CliError::format)?;
        if edge.is_empty() && !config.allow_empty_edges {
            return Err(CliError::format(format!(
                "edge {} is empty (pass --allow-empty-edges to admit dummy edges)",
                edge.id
            )));
        }
        if let Some(log) = log.as_mut() {
            log.push(&edge).map_err(CliError::format)?;
        }
        let fed = if config.pow2_round { Cow::Owned(round_edge_pow2(&edge)) } else { Cow::Borrowed(&edge) };
        summary.push(&fed).map_err(CliError::format)?;
    }
    summary.finish().map_err(CliError::format)?;
    Ok((summary, log))
}

fn load(config: &RunConfig) -> Result<Ingested, CliError> {
    match &config.source {
        Source::File(path) => {
            let file = File::open(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            let opts = ParseOptions { allow_empty_edges: config.allow_empty_edges };
            let reader = StreamReader::new(BufReader::new(file), opts).map_err(CliError::format)?;
            let declared = reader.header().n;
            let (summary, log) = ingest(reader, declared, config)?;
            Ok(Ingested { summary, log, truth: None })
        }
        Source::Generator { kind, params, seed } => {
            let inst = generate_instance(kind, params, *seed)?;
            let (summary, log) = ingest(inst.stream.into_iter().map(Ok), inst.header.n, config)?;
            Ok(Ingested { summary, log, truth: Some(inst.truth) })
        }
    }
}

fn truth_section(t: &Truth) -> TruthSection {
    TruthSection {
        generator: t.kind.to_string(),
        r: t.r,
        witness_size: t.opt_witness.len(),
        star: t.star.map(|s| s.0),
        iota: t.iota,
        dummy_edges: t.dummy_count,
    }
}

fn run_oracle(config: &RunConfig, log: Option<&OfflineInstance>) -> Result<Option<(String, OptCover)>, CliError> {
    let (Some(oc), Some(log)) = (&config.oracle, log) else {
        return Ok(None);
    };
    if log.edges().len() > oc.max_edges || log.vertex_count() == 0 {
        return Ok(None);
    }
    let registry = SolverRegistry::with_defaults(oc.budget);
    let solver = registry.get(&oc.solver).map_err(CliError::usage)?;
    match solver.solve(log) {
        Ok(opt) => Ok(Some((oc.solver.clone(), opt))),
        Err(sscover::oracles::OracleError::TooLarge { .. }) => Ok(None),
        Err(e) => Err(CliError::format(e)),
    }
}

fn ratio(num: &Rational, den: &Rational) -> Option<Exact> {
    (!den.is_zero()).then(|| Exact::new(&(num / den)))
}

fn validate(
    cert: &Certificate,
    log: &OfflineInstance,
    epsilon: &Rational,
    pow2: bool,
) -> (ValidationOutcome, Option<Rational>) {
    // Rounded weights are each within a factor two, so coverage is checked at 1 − 4ε.
    let level = if pow2 { epsilon * Rational::from_integer(BigInt::from(4)) } else { epsilon.clone() };
    let coverage_only = level >= Rational::from_integer(BigInt::from(1));
    let checked = if coverage_only { Rational::zero() } else { level.clone() };
    match validate_certificate(&cert.assignment, log, &checked) {
        Ok(v) => (
            ValidationOutcome { verdict: Verdict::Pass, epsilon: Some(Exact::new(&level)), detail: None },
            Some(v.im_cost),
        ),
        Err(Violation::Coverage { .. }) if coverage_only => {
            let cost = log.cost_of(&cert.image()).ok();
            (ValidationOutcome { verdict: Verdict::Pass, epsilon: Some(Exact::new(&level)), detail: None }, cost)
        }
        Err(e) => (
            ValidationOutcome {
                verdict: Verdict::Fail,
                epsilon: Some(Exact::new(&level)),
                detail: Some(e.to_string()),
            },
            None,
        ),
    }
}

/// Streams the input once, extracts a certificate for every ε, validates
/// each one and compares against the offline oracle when it is feasible.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let mut timings = BTreeMap::new();
    let t0 = Instant::now();
    let Ingested { summary, log, truth } = load(config)?;
    timings.insert("ingest".to_string(), t0.elapsed().as_millis());

    let t1 = Instant::now();
    let opt = run_oracle(config, log.as_ref())?;
    timings.insert("oracle".to_string(), t1.elapsed().as_millis());
    let proven = opt.as_ref().filter(|(_, o)| o.proven_optimal && !config.pow2_round).map(|(_, o)| &o.cost);

    let lemma2 = match proven {
        Some(c) => {
            Verdict::from_bool(lemma2_holds(&summary.p1().finalize(), c) && lemma2_holds(&summary.p2().finalize(), c))
        }
        None => Verdict::Skipped,
    };

    let t2 = Instant::now();
    let mut records = Vec::with_capacity(config.epsilons.len());
    let mut certificates = Vec::with_capacity(config.epsilons.len());
    for eps in &config.epsilons {
        let cert = summary.extract(eps).map_err(CliError::usage)?;
        let r = &cert.report;
        let (validation, logged_cost) = match log.as_ref() {
            Some(log) => validate(&cert, log, eps, config.pow2_round),
            None => (ValidationOutcome { verdict: Verdict::Skipped, epsilon: None, detail: None }, None),
        };
        let validation = match &logged_cost {
            Some(c) if !config.pow2_round && *c != r.im_cost => ValidationOutcome {
                verdict: Verdict::Fail,
                epsilon: validation.epsilon,
                detail: Some(format!("image cost {} disagrees with the log ({})", render(&r.im_cost), render(c))),
            },
            _ => validation,
        };
        let im_cost = logged_cost.unwrap_or_else(|| r.im_cost.clone());
        let bound = match (r.regime, proven) {
            (Regime::Above, Some(c)) => {
                BoundCheck { name: "lemma4", verdict: Verdict::from_bool(above_bound_holds(&im_cost, c, eps)) }
            }
            (Regime::Below, Some(c)) => {
                BoundCheck { name: "thm4", verdict: Verdict::from_bool(below_bound_holds(&im_cost, r.n, c)) }
            }
            (Regime::Above, None) => BoundCheck { name: "lemma4", verdict: Verdict::Skipped },
            (Regime::Below, None) => BoundCheck { name: "thm4", verdict: Verdict::Skipped },
        };
        records.push(ExtractionRecord {
            epsilon: Exact::new(eps),
            regime: r.regime.to_string(),
            r_star: render_r_star(r.r_star),
            dom_benefit: Exact::new(&r.dom_benefit),
            coverage_fraction: Exact::new(&r.coverage_fraction()),
            im_size: r.im_size,
            im_cost: Exact::new(&im_cost),
            im_cost_over_opt: opt.as_ref().and_then(|(_, o)| ratio(&im_cost, &o.cost)),
            im_size_over_opt_size: opt.as_ref().and_then(|(_, o)| {
                ratio(&Rational::from_integer(r.im_size.into()), &Rational::from_integer(o.edges.len().into()))
            }),
            validation,
            bound,
        });
        certificates.push(cert);
    }
    timings.insert("extract".to_string(), t2.elapsed().as_millis());

    let stats = summary.stats();
    let report = Report {
        schema_version: SCHEMA_VERSION,
        source: config.source.describe(),
        stream: StreamSection {
            n: stats.n_seen,
            m: stats.m_seen,
            edges_visited: summary.edges_visited(),
            total_benefit: Exact::new(&stats.total_benefit),
            comparisons: summary.comparisons(),
            pow2_rounded: config.pow2_round,
        },
        truth: truth.as_ref().map(truth_section),
        opt: opt.map(|(solver, o)| OptSection {
            solver,
            cost: Exact::new(&o.cost),
            size: o.edges.len(),
            proven_optimal: o.proven_optimal,
            nodes: o.nodes,
        }),
        lemma2,
        observations: Observations { im_cost_monotone: im_cost_monotone(&config.epsilons, &certificates) },
        extractions: records,
        timings_ms: config.timings.then_some(timings),
    };
    Ok(RunOutcome { report, summary, certificates })
}

/// Whether `c(Im)` is non-increasing in ε over the requested grid.
fn im_cost_monotone(epsilons: &[Rational], certs: &[Certificate]) -> bool {
    let mut pairs: Vec<(&Rational, &Rational)> = epsilons.iter().zip(certs.iter().map(|c| &c.report.im_cost)).collect();
    pairs.sort_by(|a, b| a.0.cmp(b.0));
    pairs.windows(2).all(|w| w[0].1 >= w[1].1)
}

/// File name used for the certificate of one ε, e.g. `eps-1_8.cert`.
pub fn certificate_file_name(epsilon: &Rational) -> String {
    format!("eps-{}.cert", render(epsilon).replace('/', "_"))
}

pub fn write_certificates(dir: &Path, certs: &[Certificate]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for cert in certs {
        let path = dir.join(certificate_file_name(&cert.report.epsilon));
        let mut w = BufWriter::new(File::create(path)?);
        write_certificate(&mut w, cert)?;
        w.flush()?;
    }
    Ok(())
}

/// Result of a standalone validation.
#[derive(Debug)]
pub struct VerifyOutcome {
    pub epsilon: Rational,
    pub dom_benefit: Rational,
    pub required: Rational,
    pub im_cost: Rational,
    pub im_size: usize,
}

/// Re-reads a stream into a membership log and checks a certificate file
/// against it. `epsilon` overrides the value recorded in the certificate.
pub fn cmd_verify(
    stream: &Path,
    certificate: &Path,
    epsilon: Option<Rational>,
    allow_empty_edges: bool,
) -> Result<VerifyOutcome, CliError> {
    let file = File::open(stream).map_err(|e| CliError::usage(format!("{}: {e}", stream.display())))?;
    let reader =
        StreamReader::new(BufReader::new(file), ParseOptions { allow_empty_edges }).map_err(CliError::format)?;
    let mut log = OfflineInstance::new();
    for edge in reader {
        log.push(&edge.map_err(CliError::format)?).map_err(CliError::format)?;
    }
    let cert_file = File::open(certificate).map_err(|e| CliError::usage(format!("{}: {e}", certificate.display())))?;
    let parsed = parse_certificate(BufReader::new(cert_file)).map_err(CliError::format)?;
    let epsilon = epsilon
        .or(parsed.epsilon)
        .ok_or_else(|| CliError::usage("no epsilon given and none recorded in the certificate"))?;
    let v =
        validate_certificate(&parsed.assignment, &log, &epsilon).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(VerifyOutcome {
        epsilon,
        dom_benefit: v.dom_benefit,
        required: v.required,
        im_cost: v.im_cost,
        im_size: v.im_size,
    })
}

/// A sweep is a run whose report is read as a table, one row per ε.
pub fn cmd_sweep(config: &RunConfig) -> Result<RunOutcome, CliError> {
    cmd_run(config)
}
