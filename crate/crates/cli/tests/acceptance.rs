//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sscover::advgen::{
    build_affine_plane, gen_certified, gen_random, gen_uncertified, verify_plane, GenParams, IdLayout, RandomParams,
    UncertifiedParams,
};
use sscover::cover::{BenefitMode, CoverState, Effectiveness};
use sscover::oracles::{best_effective_benefit, brute_force_opt, is_cover, level_by_doubling, OfflineInstance};
use sscover::sssc::{
    above_bound_holds, below_bound_holds, lemma1_violations, lemma2_holds, run_edges, snapshot_to_string,
    validate_certificate, Regime, StreamSummary,
};
use sscover::stream::{EdgeId, StreamEdge, VertexId};
use sscover::weight::{parse_rational, render, Rational, Weight};
use sscover_cli::{cmd_run, RunConfig, Source};

const CORPUS_SIZE: usize = 1000;
const CORPUS_SEED: u64 = 0x5eed_c0de;
const OPT_BUDGET: u64 = 2_000_000;
/// Measured ceiling on comparisons / (|e|·(1 + log2|e|)) for `process_edge`.
const PER_EDGE_WORK_CONSTANT: f64 = 1.5;

struct Line {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn epsilons() -> Vec<Rational> {
    ["0", "1/8", "1/4", "1/2", "3/4"].iter().map(|s| parse_rational(s).unwrap()).collect()
}

struct Case {
    edges: Vec<StreamEdge>,
    log: OfflineInstance,
}

fn corpus() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|_| {
            let p = RandomParams {
                n: rng.gen_range(1..=20),
                m: rng.gen_range(1..=30),
                unit: false,
                max_weight: 16,
                max_edge_size: Some(rng.gen_range(1..=8)),
            };
            let edges = gen_random(&p, rng.gen()).unwrap().stream;
            let log = OfflineInstance::from_edges(&edges).unwrap();
            Case { edges, log }
        })
        .collect()
}

fn certificate_soundness(corpus: &[Case], summaries: &mut Vec<StreamSummary>) -> Line {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for (i, case) in corpus.iter().enumerate() {
        let s = run_edges(&case.edges).unwrap();
        for eps in epsilons() {
            let cert = s.extract(&eps).unwrap();
            match validate_certificate(&cert.assignment, &case.log, &eps) {
                Ok(v) if v.im_cost == cert.report.im_cost => checked += 1,
                Ok(_) => failures.push(format!("instance {i} eps {}: cost mismatch", render(&eps))),
                Err(e) => failures.push(format!("instance {i} eps {}: {e}", render(&eps))),
            }
        }
        summaries.push(s);
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(60);
    Line {
        id: 1,
        name: "certificate soundness",
        pass,
        detail: format!(
            "{checked} certificates valid over {} instances in {:.2}s{}",
            corpus.len(),
            elapsed.as_secs_f64(),
            failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
        ),
    }
}

fn per_edge_lemma(corpus: &[Case]) -> Line {
    let mut edges_checked = 0usize;
    let mut violations = 0usize;
    for case in corpus {
        for mode in [BenefitMode::True, BenefitMode::Unit] {
            let mut st = CoverState::new(mode);
            for e in &case.edges {
                st.process_edge(e);
                violations += lemma1_violations(&st, e).len();
                edges_checked += 1;
            }
        }
    }
    Line {
        id: 2,
        name: "per-edge level invariant",
        pass: violations == 0,
        detail: format!("{violations} violations over {edges_checked} edge updates (true and unit benefits)"),
    }
}

fn bounds_against_opt(corpus: &[Case], summaries: &[StreamSummary]) -> Line {
    let mut proven = 0usize;
    let (mut prefix_checks, mut above_checks, mut below_checks) = (0usize, 0usize, 0usize);
    let mut failures = Vec::new();
    for (i, (case, s)) in corpus.iter().zip(summaries).enumerate() {
        let opt = brute_force_opt(&case.log, OPT_BUDGET).unwrap();
        if !opt.proven_optimal {
            continue;
        }
        proven += 1;
        for frozen in [s.p1().finalize(), s.p2().finalize()] {
            prefix_checks += 1;
            if !lemma2_holds(&frozen, &opt.cost) {
                failures.push(format!("instance {i}: prefix benefit bound"));
            }
        }
        for eps in epsilons() {
            let r = s.extract(&eps).unwrap().report;
            let ok = match r.regime {
                Regime::Above => {
                    above_checks += 1;
                    above_bound_holds(&r.im_cost, &opt.cost, &eps)
                }
                Regime::Below => {
                    below_checks += 1;
                    below_bound_holds(&r.im_cost, r.n, &opt.cost)
                }
            };
            if !ok {
                failures.push(format!("instance {i} eps {}: {} bound", render(&eps), r.regime));
            }
        }
    }
    Line {
        id: 3,
        name: "cost bounds against exact OPT",
        pass: failures.is_empty() && proven > 0,
        detail: format!(
            "{proven}/{} instances proven optimal; {prefix_checks} prefix, {above_checks} above-regime, \
             {below_checks} below-regime checks; {} violations{}",
            corpus.len(),
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    }
}

fn subset_selection() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 4);
    let weight = |rng: &mut ChaCha8Rng| Weight::ratio(rng.gen_range(1..=16), rng.gen_range(1..=16)).unwrap();
    let mut mismatches = 0usize;
    let mut nonempty = 0usize;
    for t in 0..200u64 {
        let mode = if rng.gen_bool(0.5) { BenefitMode::True } else { BenefitMode::Unit };
        let mut st = CoverState::new(mode);
        let size = rng.gen_range(1..=12);
        let vertices: BTreeSet<u32> = std::iter::repeat_with(|| rng.gen_range(0..40)).take(40).collect();
        let mut members = Vec::with_capacity(size);
        for &v in vertices.iter().take(size) {
            let b = weight(&mut rng);
            if rng.gen_bool(0.7) {
                st.restore(VertexId(v), Effectiveness::Level(rng.gen_range(-5..=6)), Some(EdgeId(0)), b.clone());
            }
            members.push((VertexId(v), b));
        }
        let edge = StreamEdge::new(EdgeId(t + 1), weight(&mut rng), members);
        let (sel, _) = st.max_effective_subset(&edge);
        let chosen = sel.as_ref().map(|s| {
            s.subset
                .iter()
                .map(|v| match mode {
                    BenefitMode::Unit => Rational::one(),
                    BenefitMode::True => edge.members.iter().find(|(u, _)| u == v).unwrap().1.as_rational().clone(),
                })
                .sum::<Rational>()
        });
        let effective = sel.as_ref().is_none_or(|s| {
            let top = s.subset.iter().map(|v| st.eff(*v)).max().unwrap();
            let lev = level_by_doubling(chosen.as_ref().unwrap(), edge.cost.as_rational());
            lev == s.level && Effectiveness::Level(lev) > top
        });
        if chosen.is_some() {
            nonempty += 1;
        }
        if !effective || chosen != best_effective_benefit(&st, &edge) {
            mismatches += 1;
        }
    }
    Line {
        id: 4,
        name: "subset selection vs enumeration",
        pass: mismatches == 0,
        detail: format!("200 edges, {nonempty} with a non-empty effective subset, {mismatches} mismatches"),
    }
}

fn affine_planes() -> Line {
    let start = Instant::now();
    let mut failures = Vec::new();
    for q in [2u32, 3, 4, 5, 7, 8] {
        let plane = build_affine_plane(q).unwrap();
        let counts = (plane.point_count(), plane.lines.len(), plane.angles.len());
        let want = ((q * q) as usize, (q * (q + 1)) as usize, q as usize + 1);
        if counts != want {
            failures.push(format!("q = {q}: counts {counts:?}"));
        }
        if let Err(e) = verify_plane(&plane) {
            failures.push(format!("q = {q}: {e}"));
        }
    }
    let elapsed = start.elapsed();
    Line {
        id: 5,
        name: "affine plane properties",
        pass: failures.is_empty() && elapsed < Duration::from_secs(10),
        detail: format!(
            "q in {{2,3,4,5,7,8}} verified exhaustively in {:.3}s{}",
            elapsed.as_secs_f64(),
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()
        ),
    }
}

fn certified_opt() -> Line {
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    for q in [5u32, 7, 11] {
        for r in [1u32, 2] {
            let eps = Rational::new(BigInt::from(r), BigInt::from(3 * q));
            let inst = gen_certified(q, &eps, 1000 + u64::from(q * 10 + r), true).unwrap();
            let log = OfflineInstance::from_edges(&inst.stream).unwrap();
            let bound = Rational::from_integer(BigInt::from(2 * r + 1));
            let witness_ok = is_cover(&inst.truth.opt_witness, &log).unwrap()
                && log.cost_of(&inst.truth.opt_witness).unwrap() == bound;
            let opt = brute_force_opt(&log, 20_000_000).unwrap();
            if !witness_ok || !opt.proven_optimal || opt.cost > bound {
                failures.push(format!(
                    "q = {q}, r = {r}: witness {witness_ok}, opt {} proven {}",
                    render(&opt.cost),
                    opt.proven_optimal
                ));
                continue;
            }
            let s = run_edges(&inst.stream).unwrap();
            let cert = s.extract(&eps).unwrap();
            ratios.push(format!("q{q}/r{r}: OPT {} SSSC {}", render(&opt.cost), cert.report.im_size));
        }
    }
    Line {
        id: 6,
        name: "certified construction OPT bound",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("OPT <= 2r+1 proven for all six; Im size vs OPT (reported only): {}", ratios.join(", "))
        } else {
            failures.join("; ")
        },
    }
}

fn ceil_lg(x: u32) -> u32 {
    let mut bits = 0;
    while (1u64 << bits) < u64::from(x) {
        bits += 1;
    }
    bits
}

fn uncertified_structure() -> Line {
    let mut failures = Vec::new();
    let mut checked = Vec::new();
    for (q, eps) in [(4u32, "1/6"), (4, "1/4"), (8, "1/12"), (8, "1/8")] {
        let modes: &[bool] = if q == 4 { &[false, true] } else { &[false] };
        for &materialize in modes {
            let p = UncertifiedParams {
                q,
                alpha: parse_rational("1/2").unwrap(),
                epsilon: parse_rational(eps).unwrap(),
                materialize_dummies: materialize,
                relax_range: true,
            };
            let inst = gen_uncertified(&p, 77).unwrap();
            let t = &inst.truth;
            let r = t.r.unwrap();
            let lg_q = q.trailing_zeros();
            let iota = 1 + ceil_lg(q + 1) + lg_q + ceil_lg(r) + 3 * lg_q;
            let star = 1u64 << (iota - 1);
            let layout = IdLayout::new(q, r);
            let plane = build_affine_plane(q).unwrap();
            let mut ids = BTreeSet::new();
            let mut ok = t.iota == Some(iota) && t.star == Some(EdgeId(star));
            for (l, parts) in t.line_parts.iter().enumerate() {
                for (k, id) in parts.iter().enumerate() {
                    ok &= ids.insert(*id) && id.0 < star;
                    let want = (plane.lines[l].angle as u64, plane.lines[l].index as u64, k as u64);
                    ok &= layout.decode(id.0).map(|(i, j, kk, _)| (i, j, kk)) == Some(want);
                }
            }
            ok &= ids.len() as u32 == q * (q + 1) * r;
            let log = OfflineInstance::from_edges(&inst.stream).unwrap();
            ok &= t.opt_witness.len() as u32 == r * r + 1 && is_cover(&t.opt_witness, &log).unwrap();
            if materialize {
                ok &= inst.stream.len() as u64 == star + 1
                    && inst.stream.iter().enumerate().all(|(i, e)| e.id.0 == i as u64);
            }
            if ok {
                checked.push(format!("q{q}/r{r}{} iota {iota}", if materialize { "/dummies" } else { "" }));
            } else {
                failures.push(format!("q = {q}, eps = {eps}, materialize = {materialize}"));
            }
        }
    }
    Line {
        id: 7,
        name: "uncertified construction structure",
        pass: failures.is_empty(),
        detail: if failures.is_empty() { checked.join(", ") } else { failures.join("; ") },
    }
}

fn determinism() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let sources = vec![
        Source::Generator {
            kind: "random".into(),
            params: GenParams { n: Some(18), m: Some(27), ..GenParams::default() },
            seed: 5,
        },
        Source::Generator {
            kind: "certified".into(),
            params: GenParams { q: Some(5), r: Some(2), relax_range: true, ..GenParams::default() },
            seed: 6,
        },
        {
            let params = GenParams {
                q: Some(4),
                r: Some(2),
                alpha: parse_rational("1/2").ok(),
                relax_range: true,
                ..GenParams::default()
            };
            let path = dir.path().join("u.txt");
            let mut f = std::fs::File::create(&path).unwrap();
            sscover_cli::cmd_generate("uncertified", &params, 7, &mut f, None).unwrap();
            Source::File(path)
        },
    ];
    let mut runs = 0;
    for source in sources {
        let cfg = RunConfig::new(source, epsilons());
        let a = cmd_run(&cfg).unwrap();
        let b = cmd_run(&cfg).unwrap();
        runs += 2;
        let same = a.report.to_json() == b.report.to_json()
            && snapshot_to_string(&a.summary) == snapshot_to_string(&b.summary);
        let single_pass = a.report.stream.edges_visited == a.report.stream.m;
        if !same || !single_pass {
            failures.push(format!("{:?}: identical {same}, single pass {single_pass}", cfg.source.describe()));
        }
    }
    Line {
        id: 8,
        name: "determinism and single pass",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{runs} runs: byte-identical reports and snapshots, edges visited = m")
        } else {
            failures.join("; ")
        },
    }
}

fn per_edge_work(corpus: &[Case]) -> Line {
    let mut worst = 0f64;
    let mut updates = 0usize;
    let mut streams: Vec<Vec<StreamEdge>> = corpus.iter().map(|c| c.edges.clone()).collect();
    for q in [7u32, 11, 13] {
        let eps = Rational::new(BigInt::from(2), BigInt::from(3 * q));
        streams.push(gen_certified(q, &eps, 3, true).unwrap().stream);
    }
    let wide = RandomParams { n: 400, m: 60, unit: false, max_weight: 16, max_edge_size: Some(300) };
    streams.push(gen_random(&wide, 9).unwrap().stream);
    for edges in &streams {
        for mode in [BenefitMode::True, BenefitMode::Unit] {
            let mut st = CoverState::new(mode);
            for e in edges {
                let k = e.members.len() as f64;
                let up = st.process_edge(e);
                updates += 1;
                if k > 0.0 {
                    worst = worst.max(up.comparisons as f64 / (k * (1.0 + k.log2())));
                }
            }
        }
    }
    Line {
        id: 9,
        name: "per-edge comparison count",
        pass: worst <= PER_EDGE_WORK_CONSTANT && !worst.is_zero(),
        detail: format!(
            "max comparisons / (|e|(1+log2|e|)) = {worst:.3} over {updates} updates, pinned C = {PER_EDGE_WORK_CONSTANT}"
        ),
    }
}

fn main() {
    let corpus = corpus();
    let mut summaries = Vec::with_capacity(corpus.len());
    let lines = vec![
        certificate_soundness(&corpus, &mut summaries),
        per_edge_lemma(&corpus),
        bounds_against_opt(&corpus, &summaries),
        subset_selection(),
        affine_planes(),
        certified_opt(),
        uncertified_structure(),
        determinism(),
        per_edge_work(&corpus),
    ];
    for l in &lines {
        println!("[{}] criterion {} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    let failed: Vec<u8> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
