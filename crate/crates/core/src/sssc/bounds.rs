//! Runtime checks for the guarantees the summary is supposed to satisfy.
//! All comparisons are exact.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cover::{CoverState, EdgeUpdate, Effectiveness, FrozenCover};
use crate::stream::{EdgeId, StreamEdge};
use crate::weight::{pow2, Rational, Weight};

/// After `edge` was processed by `state`: the levels `r` for which
/// `b({v ∈ e : eff(v) ≤ r}) ≥ 2^(r+1)·c(e)`, which must never happen.
/// Every level held by a member of the edge is tested.
pub fn lemma1_violations(state: &CoverState, edge: &StreamEdge) -> Vec<i64> {
    let mut members: Vec<(Effectiveness, Rational)> = edge
        .members
        .iter()
        .map(|(v, b)| {
            let benefit = match state.mode() {
                crate::cover::BenefitMode::True => b.as_rational().clone(),
                crate::cover::BenefitMode::Unit => Rational::from_integer(BigInt::from(1)),
            };
            (state.eff(*v), benefit)
        })
        .collect();
    members.sort_by_key(|m| m.0);
    let mut out = Vec::new();
    let mut acc = Rational::zero();
    for (i, (eff, b)) in members.iter().enumerate() {
        acc += b;
        let last_at_level = members.get(i + 1).is_none_or(|next| next.0 != *eff);
        if let (true, Effectiveness::Level(r)) = (last_at_level, eff) {
            if acc >= pow2(r + 1) * edge.cost.as_rational() {
                out.push(*r);
            }
        }
    }
    out
}

/// `b(I(≤ r)) < 2^(r+1)·c(OPT)` at every level present.
pub fn lemma2_holds(frozen: &FrozenCover, opt_cost: &Rational) -> bool {
    frozen.levels().into_iter().all(|r| *frozen.benefit_le(r) < pow2(r + 1) * opt_cost)
}

/// `c(S(r)) < b(V) / 2^(r−1)` and `c(S(> r)) < b(V) / 2^(r−1)` at every
/// level present, with edge costs looked up through `cost`.
pub fn lemma3_holds(frozen: &FrozenCover, cost: impl Fn(EdgeId) -> Weight) -> bool {
    let total = frozen.total_benefit();
    let sum = |ids: BTreeSet<EdgeId>| -> Rational { ids.into_iter().map(|id| cost(id).into_rational()).sum() };
    frozen.levels().into_iter().all(|r| {
        let bound = total / pow2(r - 1);
        sum(frozen.edges_at(r)) < bound && sum(frozen.edges_gt(r)) < bound
    })
}

/// `c(Im) < 8·c(OPT)/ε`, checked as `ε·c(Im) < 8·c(OPT)`.
pub fn above_bound_holds(im_cost: &Rational, opt_cost: &Rational, epsilon: &Rational) -> bool {
    epsilon * im_cost < Rational::from_integer(8.into()) * opt_cost
}

/// `c(Im) ≤ 9·√n·c(OPT)`, checked as `c(Im)² ≤ 81·n·c(OPT)²`.
pub fn below_bound_holds(im_cost: &Rational, n: usize, opt_cost: &Rational) -> bool {
    im_cost * im_cost <= Rational::from_integer(BigInt::from(81u64) * BigInt::from(n)) * opt_cost * opt_cost
}

/// Consistency of an update with the chosen level: every vertex of the
/// chosen subset now sits exactly at that level.
pub fn assignment_matches_level(state: &CoverState, update: &EdgeUpdate) -> bool {
    update
        .selection
        .as_ref()
        .is_none_or(|sel| sel.subset.iter().all(|v| state.eff(*v) == Effectiveness::Level(sel.level)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::BenefitMode;
    use crate::weight::parse_rational;

    #[test]
    fn fresh_edge_satisfies_lemma1() {
        let mut st = CoverState::new(BenefitMode::True);
        let e = StreamEdge::unit(0, Weight::one(), [0, 1, 2]);
        let up = st.process_edge(&e);
        assert!(assignment_matches_level(&st, &up));
        assert!(lemma1_violations(&st, &e).is_empty());
    }

    #[test]
    fn bound_forms() {
        let q = |s| parse_rational(s).unwrap();
        assert!(above_bound_holds(&q("15"), &q("1"), &q("1/2")));
        assert!(!above_bound_holds(&q("16"), &q("1"), &q("1/2")));
        // 9·√4 = 18
        assert!(below_bound_holds(&q("18"), 4, &q("1")));
        assert!(!below_bound_holds(&q("181/10"), 4, &q("1")));
    }
}
