use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

use sscover::advgen::{gen_random, RandomParams};
use sscover::cover::{BenefitMode, CoverState, Effectiveness};
use sscover::oracles::{best_effective_benefit, level_by_doubling, OfflineInstance};
use sscover::sssc::{
    assignment_matches_level, lemma1_violations, lemma3_holds, round_edge_pow2, run_edges, snapshot_to_string,
    validate_certificate,
};
use sscover::stream::{parse_str, stream_to_string, EdgeId, ParseOptions, StreamEdge, StreamHeader, VertexId};
use sscover::weight::{parse_rational, Rational, Weight};

fn instance(seed: u64, n: usize, m: usize, unit: bool) -> Vec<StreamEdge> {
    let p = RandomParams { n, m, unit, max_weight: 16, max_edge_size: None };
    gen_random(&p, seed).unwrap().stream
}

fn eps_grid() -> Vec<Rational> {
    ["0", "1/8", "1/4", "1/2", "3/4"].iter().map(|s| parse_rational(s).unwrap()).collect()
}

fn weight() -> impl Strategy<Value = Weight> {
    (1u64..=40, 1u64..=40).prop_map(|(a, b)| Weight::ratio(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(seed in any::<u64>(), n in 1usize..15, m in 1usize..20) {
        let edges = instance(seed, n, m, false);
        let header = StreamHeader { n: Some(n), ..StreamHeader::default() };
        let text = stream_to_string(&header, &edges);
        let (h, back) = parse_str(&text, ParseOptions::default()).unwrap();
        prop_assert_eq!(h, header);
        prop_assert_eq!(back, edges);
    }

    #[test]
    fn effectiveness_never_decreases(seed in any::<u64>(), n in 1usize..15, m in 1usize..25) {
        let edges = instance(seed, n, m, false);
        for mode in [BenefitMode::True, BenefitMode::Unit] {
            let mut st = CoverState::new(mode);
            for e in &edges {
                let before: Vec<Effectiveness> = (0..n as u32).map(|v| st.eff(VertexId(v))).collect();
                let up = st.process_edge(e);
                prop_assert!(assignment_matches_level(&st, &up));
                for v in 0..n as u32 {
                    prop_assert!(st.eff(VertexId(v)) >= before[v as usize]);
                }
                prop_assert!(lemma1_violations(&st, e).is_empty());
            }
        }
    }

    #[test]
    fn level_sums_stay_below_benefit(seed in any::<u64>(), n in 1usize..15, m in 1usize..25) {
        let edges = instance(seed, n, m, false);
        let costs: BTreeMap<EdgeId, Weight> = edges.iter().map(|e| (e.id, e.cost.clone())).collect();
        let s = run_edges(&edges).unwrap();
        prop_assert!(lemma3_holds(&s.p1().finalize(), |id| costs[&id].clone()));
    }

    #[test]
    fn prefix_selection_matches_enumeration(
        cost in weight(),
        members in prop::collection::btree_map(0u32..30, (weight(), prop::option::of(-4i64..6)), 1..=12),
        unit in any::<bool>(),
    ) {
        let mode = if unit { BenefitMode::Unit } else { BenefitMode::True };
        let mut st = CoverState::new(mode);
        for (v, (b, eff)) in &members {
            if let Some(l) = eff {
                st.restore(VertexId(*v), Effectiveness::Level(*l), Some(EdgeId(0)), b.clone());
            }
        }
        let edge = StreamEdge::new(EdgeId(1), cost, members.iter().map(|(v, (b, _))| (VertexId(*v), b.clone())).collect());
        let (sel, _) = st.max_effective_subset(&edge);
        let got = sel.map(|s| {
            let lookup: BTreeMap<_, _> = edge.members.iter().cloned().collect();
            s.subset.iter().map(|v| if unit { Rational::one() } else { lookup[v].as_rational().clone() }).sum::<Rational>()
        });
        prop_assert_eq!(got, best_effective_benefit(&st, &edge));
    }

    #[test]
    fn level_agrees_with_doubling(a in 1u64..5000, b in 1u64..5000, c in 1u64..5000, d in 1u64..5000) {
        let x = Rational::new(BigInt::from(a), BigInt::from(b));
        let y = Rational::new(BigInt::from(c), BigInt::from(d));
        prop_assert_eq!(sscover::level(&x, &y).unwrap(), level_by_doubling(&x, &y));
    }

    #[test]
    fn rounding_stays_within_factor_two(a in 1u64..100_000, b in 1u64..100_000) {
        let w = Weight::ratio(a, b).unwrap();
        let r = w.floor_pow2();
        prop_assert!(r <= w);
        prop_assert!(w.as_rational() < &(r.as_rational() * Rational::from_integer(BigInt::from(2))));
        prop_assert_eq!(r.floor_pow2(), r);
    }

    #[test]
    fn every_epsilon_yields_a_valid_certificate(seed in any::<u64>(), n in 1usize..20, m in 1usize..30) {
        let edges = instance(seed, n, m, false);
        let log = OfflineInstance::from_edges(&edges).unwrap();
        let s = run_edges(&edges).unwrap();
        for eps in eps_grid() {
            let cert = s.extract(&eps).unwrap();
            let v = validate_certificate(&cert.assignment, &log, &eps).unwrap();
            prop_assert_eq!(&v.im_cost, &cert.report.im_cost);
            prop_assert_eq!(&v.dom_benefit, &cert.report.dom_benefit);
            if eps.is_zero() {
                prop_assert!(cert.is_total());
            }
        }
    }

    #[test]
    fn summary_is_oblivious_to_epsilon(seed in any::<u64>(), n in 1usize..20, m in 1usize..30) {
        let edges = instance(seed, n, m, false);
        let s = run_edges(&edges).unwrap();
        let before = snapshot_to_string(&s);
        for eps in eps_grid() {
            s.extract(&eps).unwrap();
            prop_assert_eq!(&snapshot_to_string(&s), &before);
        }
    }

    #[test]
    fn unit_streams_make_p1_equal_p2(seed in any::<u64>(), n in 1usize..20, m in 1usize..30) {
        let edges = instance(seed, n, m, true);
        let s = run_edges(&edges).unwrap();
        let (a, b) = (s.p1().finalize(), s.p2().finalize());
        prop_assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn rounded_run_still_covers(seed in any::<u64>(), n in 1usize..20, m in 1usize..30) {
        let edges = instance(seed, n, m, false);
        let log = OfflineInstance::from_edges(&edges).unwrap();
        let rounded: Vec<StreamEdge> = edges.iter().map(round_edge_pow2).collect();
        let s = run_edges(&rounded).unwrap();
        for eps in eps_grid() {
            let cert = s.extract(&eps).unwrap();
            let four_eps = (Rational::from_integer(BigInt::from(4)) * &eps).min(parse_rational("99/100").unwrap());
            prop_assert!(validate_certificate(&cert.assignment, &log, &four_eps).is_ok());
        }
    }
}

#[test]
fn emin_keeps_cheapest_and_earliest() {
    let text = "e - 5 0:1 1:1\ne - 2 0:1\ne - 2 0:1 1:1\n";
    let (_, edges) = parse_str(text, ParseOptions::default()).unwrap();
    let s = run_edges(&edges).unwrap();
    assert_eq!(s.emin(VertexId(0)).map(|(id, _)| id), Some(EdgeId(1)));
    assert_eq!(s.emin(VertexId(1)).map(|(id, _)| id), Some(EdgeId(2)));
}
