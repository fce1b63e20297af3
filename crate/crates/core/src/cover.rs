//! The per-vertex effectiveness procedure.
//!
//! Each vertex keeps an effectiveness (an integer, or bottom before it is
//! first covered) and the id of the edge that last raised it. An arriving
//! edge picks its maximum-benefit effective subset: a subset whose level
//! `⌈lg(b(T)/c(e))⌉` strictly exceeds the effectiveness of every member.
//! Members of that subset adopt the edge and the level.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::stream::{EdgeId, StreamEdge, VertexId};
use crate::weight::{bit_len, cmp_scaled, render, Rational, Weight, WeightError};

/// Effectiveness of a vertex; `Bottom` stands for −∞ and sorts below every
/// finite level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Effectiveness {
    Bottom,
    Level(i64),
}

impl Effectiveness {
    pub fn level(self) -> Option<i64> {
        match self {
            Effectiveness::Bottom => None,
            Effectiveness::Level(k) => Some(k),
        }
    }

    pub fn is_bottom(self) -> bool {
        self == Effectiveness::Bottom
    }
}

impl fmt::Display for Effectiveness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effectiveness::Bottom => f.write_str("_"),
            Effectiveness::Level(k) => k.fmt(f),
        }
    }
}

/// `⌈lg(total_benefit / cost)⌉`, i.e. the unique `k` with
/// `2^(k-1)·cost < total_benefit ≤ 2^k·cost`.
pub fn level(total_benefit: &Rational, cost: &Rational) -> Result<i64, WeightError> {
    if !total_benefit.is_positive() {
        return Err(WeightError::NonPositive(render(total_benefit)));
    }
    if !cost.is_positive() {
        return Err(WeightError::NonPositive(render(cost)));
    }
    Ok(level_of(total_benefit, cost))
}

pub(crate) fn level_of(benefit: &Rational, cost: &Rational) -> i64 {
    // b/c = (bn·cd) / (bd·cn)
    let p: BigInt = benefit.numer() * cost.denom();
    let q: BigInt = benefit.denom() * cost.numer();
    let k0 = bit_len(&p) - bit_len(&q);
    // p/q lies in (2^(k0-1), 2^(k0+1)); one comparison settles it.
    if cmp_scaled(&p, &q, k0) == Ordering::Greater {
        k0 + 1
    } else {
        k0
    }
}

/// Which benefit function a [`CoverState`] runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenefitMode {
    /// Benefits as listed on the stream.
    True,
    /// Every vertex weighs 1.
    Unit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Slot {
    eff: Effectiveness,
    eid: Option<EdgeId>,
    benefit: Option<Weight>,
}

const EMPTY_SLOT: Slot = Slot { eff: Effectiveness::Bottom, eid: None, benefit: None };

/// A maximum-benefit effective subset of an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub subset: Vec<VertexId>,
    pub level: i64,
}

/// What processing one edge changed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeUpdate {
    /// `None` when only the empty subset is effective.
    pub selection: Option<Selection>,
    /// Previous `eid` of each vertex in `selection.subset`, in the same order.
    pub replaced: Vec<Option<EdgeId>>,
    /// Key comparisons plus level tests spent on this edge.
    pub comparisons: u64,
}

/// Per-vertex `(eid, eff)` table for one run of the procedure.
#[derive(Clone, Debug)]
pub struct CoverState {
    mode: BenefitMode,
    slots: Vec<Slot>,
    seen: usize,
    comparisons: u64,
}

impl CoverState {
    pub fn new(mode: BenefitMode) -> Self {
        CoverState { mode, slots: Vec::new(), seen: 0, comparisons: 0 }
    }

    pub fn mode(&self) -> BenefitMode {
        self.mode
    }

    pub fn eff(&self, v: VertexId) -> Effectiveness {
        self.slot(v).map_or(Effectiveness::Bottom, |s| s.eff)
    }

    pub fn eid(&self, v: VertexId) -> Option<EdgeId> {
        self.slot(v).and_then(|s| s.eid)
    }

    pub fn benefit(&self, v: VertexId) -> Option<&Weight> {
        self.slot(v).and_then(|s| s.benefit.as_ref())
    }

    /// Number of distinct vertices observed.
    pub fn vertex_count(&self) -> usize {
        self.seen
    }

    /// Total comparisons spent since construction.
    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    /// Observed vertices in id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.slots.iter().enumerate().filter(|(_, s)| s.benefit.is_some()).map(|(i, _)| VertexId(i as u32))
    }

    fn slot(&self, v: VertexId) -> Option<&Slot> {
        self.slots.get(v.0 as usize)
    }

    fn slot_mut(&mut self, v: VertexId) -> &mut Slot {
        let i = v.0 as usize;
        if i >= self.slots.len() {
            self.slots.resize(i + 1, EMPTY_SLOT);
        }
        &mut self.slots[i]
    }

    fn member_benefit<'a>(&self, b: &'a Weight) -> Option<&'a Weight> {
        match self.mode {
            BenefitMode::True => Some(b),
            BenefitMode::Unit => None,
        }
    }

    /// Finds a maximum-benefit effective subset of `edge` without mutating
    /// state. Returns the selection (or `None` for the empty subset) and the
    /// number of comparisons spent.
    ///
    /// Members are sorted by `(eff, id)`; some maximum-benefit effective
    /// subset is always a prefix of that order, and a prefix is effective iff
    /// its level beats the effectiveness of its last member. The longest such
    /// prefix wins since benefits are positive.
    pub fn max_effective_subset(&self, edge: &StreamEdge) -> (Option<Selection>, u64) {
        let mut comparisons = 0u64;
        let mut order: Vec<(Effectiveness, VertexId, Option<&Weight>)> =
            edge.members.iter().map(|(v, b)| (self.eff(*v), *v, self.member_benefit(b))).collect();
        order.sort_by(|a, b| {
            comparisons += 1;
            (a.0, a.1).cmp(&(b.0, b.1))
        });

        let mut prefix = Vec::with_capacity(order.len());
        let mut acc = Rational::zero();
        for (_, _, b) in &order {
            match b {
                Some(b) => acc += b.as_rational(),
                None => acc += Rational::one(),
            }
            prefix.push(acc.clone());
        }

        let cost = edge.cost.as_rational();
        for k in (0..order.len()).rev() {
            comparisons += 1;
            let lev = level_of(&prefix[k], cost);
            if Effectiveness::Level(lev) > order[k].0 {
                let subset = order[..=k].iter().map(|(_, v, _)| *v).collect();
                return (Some(Selection { subset, level: lev }), comparisons);
            }
        }
        (None, comparisons)
    }

    /// Processes one arriving edge.
    pub fn process_edge(&mut self, edge: &StreamEdge) -> EdgeUpdate {
        for (v, b) in &edge.members {
            let unit = self.mode == BenefitMode::Unit;
            let slot = self.slot_mut(*v);
            if slot.benefit.is_none() {
                slot.benefit = Some(if unit { Weight::one() } else { b.clone() });
                self.seen += 1;
            }
        }
        let (selection, comparisons) = self.max_effective_subset(edge);
        self.comparisons += comparisons;
        let mut replaced = Vec::new();
        if let Some(sel) = &selection {
            replaced.reserve(sel.subset.len());
            for v in &sel.subset {
                let slot = self.slot_mut(*v);
                debug_assert!(Effectiveness::Level(sel.level) > slot.eff);
                replaced.push(slot.eid);
                slot.eff = Effectiveness::Level(sel.level);
                slot.eid = Some(edge.id);
            }
        }
        EdgeUpdate { selection, replaced, comparisons }
    }

    /// Installs a vertex record directly (snapshot reload, seeded prior tables).
    pub fn restore(&mut self, v: VertexId, eff: Effectiveness, eid: Option<EdgeId>, benefit: Weight) {
        let slot = self.slot_mut(v);
        if slot.benefit.is_none() {
            self.seen += 1;
        }
        let slot = self.slot_mut(v);
        slot.eff = eff;
        slot.eid = eid;
        slot.benefit = Some(benefit);
    }

    /// Frozen view over the final table.
    pub fn finalize(&self) -> FrozenCover {
        let entries = self
            .vertices()
            .map(|v| {
                let s = &self.slots[v.0 as usize];
                FrozenVertex {
                    vertex: v,
                    eff: s.eff,
                    eid: s.eid,
                    benefit: s.benefit.clone().expect("observed vertex has a benefit"),
                }
            })
            .collect();
        FrozenCover::from_entries(entries)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenVertex {
    pub vertex: VertexId,
    pub eff: Effectiveness,
    pub eid: Option<EdgeId>,
    pub benefit: Weight,
}

/// Immutable final `(eff∞, eid∞)` table with level-set queries.
///
/// `I(≤ r)` is every vertex whose final effectiveness is at most `r`
/// (bottom included), `I(> r)` the rest; `S(·)` collects the distinct edge
/// ids recorded by a vertex set.
#[derive(Clone, Debug)]
pub struct FrozenCover {
    /// Sorted by `(eff, vertex)`.
    entries: Vec<FrozenVertex>,
    /// `cumulative[i]` = benefit of `entries[..i]`.
    cumulative: Vec<Rational>,
    index: HashMap<VertexId, usize>,
}

impl FrozenCover {
    pub fn from_entries(mut entries: Vec<FrozenVertex>) -> Self {
        entries.sort_by_key(|e| (e.eff, e.vertex));
        let mut cumulative = Vec::with_capacity(entries.len() + 1);
        let mut acc = Rational::zero();
        cumulative.push(acc.clone());
        for e in &entries {
            acc += e.benefit.as_rational();
            cumulative.push(acc.clone());
        }
        let index = entries.iter().enumerate().map(|(i, e)| (e.vertex, i)).collect();
        FrozenCover { entries, cumulative, index }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, v: VertexId) -> Option<&FrozenVertex> {
        self.index.get(&v).map(|&i| &self.entries[i])
    }

    pub fn eff(&self, v: VertexId) -> Effectiveness {
        self.get(v).map_or(Effectiveness::Bottom, |e| e.eff)
    }

    pub fn eid(&self, v: VertexId) -> Option<EdgeId> {
        self.get(v).and_then(|e| e.eid)
    }

    /// All vertices ordered by `(eff, id)`.
    pub fn entries(&self) -> &[FrozenVertex] {
        &self.entries
    }

    fn split_le(&self, r: i64) -> usize {
        self.entries.partition_point(|e| e.eff <= Effectiveness::Level(r))
    }

    pub fn vertices_le(&self, r: i64) -> &[FrozenVertex] {
        &self.entries[..self.split_le(r)]
    }

    pub fn vertices_gt(&self, r: i64) -> &[FrozenVertex] {
        &self.entries[self.split_le(r)..]
    }

    pub fn vertices_at(&self, r: i64) -> &[FrozenVertex] {
        let lo = self.entries.partition_point(|e| e.eff < Effectiveness::Level(r));
        &self.entries[lo..self.split_le(r)]
    }

    pub fn count_le(&self, r: i64) -> usize {
        self.split_le(r)
    }

    /// `b(I(≤ r))`.
    pub fn benefit_le(&self, r: i64) -> &Rational {
        &self.cumulative[self.split_le(r)]
    }

    pub fn total_benefit(&self) -> &Rational {
        self.cumulative.last().expect("cumulative always has a zero entry")
    }

    /// Benefit of the first `i` vertices in `(eff, id)` order.
    pub fn prefix_benefit(&self, i: usize) -> &Rational {
        &self.cumulative[i]
    }

    /// `S(r)`.
    pub fn edges_at(&self, r: i64) -> BTreeSet<EdgeId> {
        self.vertices_at(r).iter().filter_map(|e| e.eid).collect()
    }

    /// `S(> r)`.
    pub fn edges_gt(&self, r: i64) -> BTreeSet<EdgeId> {
        self.vertices_gt(r).iter().filter_map(|e| e.eid).collect()
    }

    /// Distinct finite levels present, ascending.
    pub fn levels(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self.entries.iter().filter_map(|e| e.eff.level()).collect();
        out.dedup();
        out
    }
}
