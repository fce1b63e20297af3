use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;

use sscover::advgen::{
    build_affine_plane, gen_certified, gen_uncertified, verify_plane, GenParams, GeneratorRegistry, IdLayout,
    UncertifiedParams,
};
use sscover::oracles::{
    brute_force_opt, exhaustive_opt, greedy_cover, is_cover, OfflineInstance, SolverRegistry, DEFAULT_NODE_BUDGET,
};
use sscover::stream::{stream_stats, StreamEdge};
use sscover::weight::{parse_rational, Rational};

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

#[test]
fn planes_pass_exhaustive_checks() {
    for order in [2u32, 3, 4, 5, 7, 8, 11, 16] {
        let plane = build_affine_plane(order).unwrap();
        assert_eq!(plane.point_count(), (order * order) as usize);
        assert_eq!(plane.lines.len(), (order * (order + 1)) as usize);
        assert_eq!(plane.angles.len(), order as usize + 1);
        assert_eq!(verify_plane(&plane), Ok(()), "q = {order}");
    }
}

#[test]
fn certified_witness_is_a_cover_and_opt_is_small() {
    for (order, r) in [(5u32, 1u32), (5, 2), (7, 1), (7, 2)] {
        let eps = Rational::new(r.into(), (3 * order).into());
        let inst = gen_certified(order, &eps, 17, true).unwrap();
        let log = OfflineInstance::from_edges(&inst.stream).unwrap();
        assert!(is_cover(&inst.truth.opt_witness, &log).unwrap());
        let opt = brute_force_opt(&log, DEFAULT_NODE_BUDGET).unwrap();
        assert!(opt.proven_optimal, "q = {order}, r = {r}");
        assert!(opt.cost <= Rational::from_integer((2 * r + 1).into()));
    }
}

#[test]
fn uncertified_ids_decode_back_to_lines() {
    for order in [4u32, 8] {
        let p = UncertifiedParams {
            q: order,
            alpha: q("1/2"),
            epsilon: Rational::new(2.into(), (3 * order).into()),
            materialize_dummies: false,
            relax_range: true,
        };
        let inst = gen_uncertified(&p, 23).unwrap();
        let t = &inst.truth;
        let r = t.r.unwrap();
        let layout = IdLayout::new(order, r);
        let plane = build_affine_plane(order).unwrap();
        let star = t.star.unwrap();
        let mut seen = BTreeSet::new();
        for (l, ids) in t.line_parts.iter().enumerate() {
            for (k, id) in ids.iter().enumerate() {
                assert!(seen.insert(*id));
                let (angle, line, part, _) = layout.decode(id.0).unwrap();
                assert_eq!(
                    (angle as usize, line as usize, part as usize),
                    (plane.lines[l].angle, plane.lines[l].index, k)
                );
                assert!(*id < star);
            }
        }
        let log = OfflineInstance::from_edges(&inst.stream).unwrap();
        assert_eq!(t.opt_witness.len() as u32, r * r + 1);
        assert!(is_cover(&t.opt_witness, &log).unwrap());
    }
}

#[test]
fn registry_generators_round_through_text() {
    let reg = GeneratorRegistry::with_defaults();
    let params = GenParams { n: Some(10), m: Some(15), unit: true, ..GenParams::default() };
    let inst = reg.get("random").unwrap().generate(&params, 3).unwrap();
    let stats = stream_stats(&inst.stream).unwrap();
    assert_eq!((stats.n_seen, stats.m_seen), (10, 15));
    let params = GenParams { q: Some(7), r: Some(2), relax_range: true, ..GenParams::default() };
    let inst = reg.get("certified").unwrap().generate(&params, 3).unwrap();
    assert_eq!(inst.stream.len(), 113);
}

fn small_instance() -> impl Strategy<Value = Vec<StreamEdge>> {
    (1usize..10, 1usize..14, any::<u64>()).prop_map(|(n, m, seed)| {
        let p = sscover::advgen::RandomParams { n, m, unit: false, max_weight: 16, max_edge_size: None };
        sscover::advgen::gen_random(&p, seed).unwrap().stream
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn branch_and_bound_matches_exhaustive(edges in small_instance()) {
        let log = OfflineInstance::from_edges(&edges).unwrap();
        let bb = brute_force_opt(&log, DEFAULT_NODE_BUDGET).unwrap();
        let ex = exhaustive_opt(&log).unwrap();
        prop_assert!(bb.proven_optimal);
        prop_assert_eq!(&bb.cost, &ex.cost);
        prop_assert!(is_cover(&bb.edges, &log).unwrap());
        let greedy = greedy_cover(&log).unwrap();
        prop_assert!(greedy.cost >= bb.cost);
    }

    #[test]
    fn registry_solvers_agree(edges in small_instance()) {
        let log = OfflineInstance::from_edges(&edges).unwrap();
        let reg = SolverRegistry::with_defaults(DEFAULT_NODE_BUDGET);
        let costs: HashMap<&str, Rational> =
            reg.names().into_iter().map(|n| (n, reg.get(n).unwrap().solve(&log).unwrap().cost)).collect();
        prop_assert_eq!(&costs["exact"], &costs["exhaustive"]);
        prop_assert!(costs["greedy"] >= costs["exact"]);
    }
}
