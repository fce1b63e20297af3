//! One-pass set cover: four per-edge procedures feeding an ε-oblivious
//! summary, and certificate extraction for any `0 ≤ ε < 1` afterwards.
//!
//! * P1 runs the effectiveness procedure with the true benefits.
//! * P2 runs it with unit benefits.
//! * P3 keeps, per vertex, the cheapest edge seen that contains it.
//! * P4 records each vertex's benefit.
//!
//! When `ε²·n ≥ 1` the certificate maps every vertex above the threshold
//! level `r*` (largest `r` with `b(I(≤ r)) ≤ ε·b(V)` over P1) to its P1 edge.
//! Otherwise `r*` is the largest `r` with `|I¹(≤ r)|² ≤ n` over P2; vertices
//! above it take their P2 edge and the rest fall back to their P3 edge,
//! yielding a full cover.

mod bounds;
mod certificate;
mod snapshot;

pub use bounds::{
    above_bound_holds, assignment_matches_level, below_bound_holds, lemma1_violations, lemma2_holds, lemma3_holds,
};
pub use certificate::{
    parse_certificate, validate_certificate, write_certificate, Certificate, CertificateFile, ExtractionReport,
    MembershipLog, Regime, Validation, Violation,
};
pub use snapshot::{read_snapshot, snapshot_to_string, write_snapshot, SnapshotError, SNAPSHOT_VERSION};

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::cover::{BenefitMode, CoverState, EdgeUpdate, Effectiveness, FrozenCover};
use crate::stream::{BenefitTable, EdgeId, StreamEdge, StreamError, StreamStats, VertexId};
use crate::weight::{render, Rational, Weight};

#[derive(Debug, Error)]
pub enum SsscError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("epsilon must lie in [0, 1), got {0}")]
    Epsilon(String),
    #[error("epsilon {epsilon} is outside the {expected} regime for n = {n}")]
    Regime { epsilon: String, expected: Regime, n: usize },
    #[error("header declares n = {declared} but the stream has {seen} distinct vertices")]
    DeclaredVertexCount { declared: usize, seen: usize },
}

/// What one pushed edge did to each procedure.
#[derive(Clone, Debug)]
pub struct PushReport {
    pub p1: EdgeUpdate,
    pub p2: EdgeUpdate,
}

/// Reference-counted costs of the edges currently named by any per-vertex
/// record, so certificate costs are available without the edge list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct CostTable {
    entries: BTreeMap<EdgeId, (Weight, u32)>,
}

impl CostTable {
    fn acquire(&mut self, id: EdgeId, cost: &Weight) {
        self.entries.entry(id).or_insert_with(|| (cost.clone(), 0)).1 += 1;
    }

    fn release(&mut self, id: EdgeId) {
        if let Entry::Occupied(mut e) = self.entries.entry(id) {
            e.get_mut().1 -= 1;
            if e.get().1 == 0 {
                e.remove();
            }
        }
    }

    pub(crate) fn get(&self, id: EdgeId) -> Option<&Weight> {
        self.entries.get(&id).map(|(w, _)| w)
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = (EdgeId, &Weight)> {
        self.entries.iter().map(|(id, (w, _))| (*id, w))
    }
}

/// The retained summary after one pass. Nothing in it depends on ε.
#[derive(Clone, Debug)]
pub struct StreamSummary {
    p1: CoverState,
    p2: CoverState,
    emin: BTreeMap<VertexId, (EdgeId, Weight)>,
    benefits: BenefitTable,
    costs: CostTable,
    declared_n: Option<usize>,
    edges_visited: u64,
}

impl Default for StreamSummary {
    fn default() -> Self {
        Self::new(None)
    }
}

impl StreamSummary {
    pub fn new(declared_n: Option<usize>) -> Self {
        StreamSummary {
            p1: CoverState::new(BenefitMode::True),
            p2: CoverState::new(BenefitMode::Unit),
            emin: BTreeMap::new(),
            benefits: BenefitTable::new(),
            costs: CostTable::default(),
            declared_n,
            edges_visited: 0,
        }
    }

    /// Feeds one edge to P1–P4.
    pub fn push(&mut self, edge: &StreamEdge) -> Result<PushReport, SsscError> {
        self.benefits.observe(edge)?;
        self.edges_visited += 1;

        let p1 = self.p1.process_edge(edge);
        Self::account(&mut self.costs, &p1, edge);
        let p2 = self.p2.process_edge(edge);
        Self::account(&mut self.costs, &p2, edge);

        for v in edge.vertices() {
            let replace = match self.emin.get(&v) {
                None => true,
                Some((_, c)) => edge.cost < *c,
            };
            if replace {
                if let Some((old, _)) = self.emin.insert(v, (edge.id, edge.cost.clone())) {
                    self.costs.release(old);
                }
                self.costs.acquire(edge.id, &edge.cost);
            }
        }
        Ok(PushReport { p1, p2 })
    }

    fn account(costs: &mut CostTable, update: &EdgeUpdate, edge: &StreamEdge) {
        if let Some(sel) = &update.selection {
            for old in update.replaced.iter().flatten() {
                costs.release(*old);
            }
            for _ in &sel.subset {
                costs.acquire(edge.id, &edge.cost);
            }
        }
    }

    /// Checks the declared vertex count, if any, against what was seen.
    pub fn finish(&self) -> Result<(), SsscError> {
        match self.declared_n {
            Some(declared) if declared != self.n() => Err(SsscError::DeclaredVertexCount { declared, seen: self.n() }),
            _ => Ok(()),
        }
    }

    pub fn p1(&self) -> &CoverState {
        &self.p1
    }

    pub fn p2(&self) -> &CoverState {
        &self.p2
    }

    pub fn emin(&self, v: VertexId) -> Option<(EdgeId, &Weight)> {
        self.emin.get(&v).map(|(id, c)| (*id, c))
    }

    pub fn benefits(&self) -> &BenefitTable {
        &self.benefits
    }

    pub fn n(&self) -> usize {
        self.benefits.len()
    }

    pub fn declared_n(&self) -> Option<usize> {
        self.declared_n
    }

    pub fn stats(&self) -> StreamStats {
        self.benefits.stats()
    }

    /// Edges pushed so far.
    pub fn edges_visited(&self) -> u64 {
        self.edges_visited
    }

    /// Cost of an edge currently named by some per-vertex record.
    pub fn edge_cost(&self, id: EdgeId) -> Option<&Weight> {
        self.costs.get(id)
    }

    /// Total comparisons spent by P1 and P2.
    pub fn comparisons(&self) -> u64 {
        self.p1.comparisons() + self.p2.comparisons()
    }

    pub fn regime(&self, epsilon: &Rational) -> Regime {
        regime_for(epsilon, self.n())
    }

    /// Extracts a `(1 − ε)`-cover certificate, picking the branch by the
    /// exact test `ε²·n ≥ 1`.
    pub fn extract(&self, epsilon: &Rational) -> Result<Certificate, SsscError> {
        check_epsilon(epsilon)?;
        match self.regime(epsilon) {
            Regime::Above => self.extract_above(epsilon),
            Regime::Below => self.extract_below(epsilon),
        }
    }

    pub fn extract_above(&self, epsilon: &Rational) -> Result<Certificate, SsscError> {
        check_epsilon(epsilon)?;
        self.require(epsilon, Regime::Above)?;
        let frozen = self.p1.finalize();
        let threshold = epsilon * self.benefits.total();
        let r_star = threshold_level(&frozen, |i| *frozen.prefix_benefit(i) > threshold);
        let assignment: BTreeMap<VertexId, EdgeId> = dom_entries(&frozen, r_star)
            .iter()
            .map(|e| (e.vertex, e.eid.expect("finite effectiveness has an eid")))
            .collect();
        Ok(self.certify(epsilon, Regime::Above, r_star, assignment))
    }

    pub fn extract_below(&self, epsilon: &Rational) -> Result<Certificate, SsscError> {
        check_epsilon(epsilon)?;
        self.require(epsilon, Regime::Below)?;
        let frozen = self.p2.finalize();
        let n = BigInt::from(self.n());
        let r_star = threshold_level(&frozen, |i| {
            let i = BigInt::from(i);
            &i * &i > n
        });
        let mut assignment = BTreeMap::new();
        for e in frozen.entries() {
            let above = match (e.eff, r_star) {
                (Effectiveness::Level(k), Effectiveness::Level(r)) => k > r,
                (Effectiveness::Level(_), Effectiveness::Bottom) => true,
                (Effectiveness::Bottom, _) => false,
            };
            let target = if above { e.eid } else { self.emin.get(&e.vertex).map(|(id, _)| *id) };
            if let Some(id) = target {
                assignment.insert(e.vertex, id);
            }
        }
        Ok(self.certify(epsilon, Regime::Below, r_star, assignment))
    }

    fn require(&self, epsilon: &Rational, expected: Regime) -> Result<(), SsscError> {
        if self.regime(epsilon) == expected {
            Ok(())
        } else {
            Err(SsscError::Regime { epsilon: render(epsilon), expected, n: self.n() })
        }
    }

    fn certify(
        &self,
        epsilon: &Rational,
        regime: Regime,
        r_star: Effectiveness,
        assignment: BTreeMap<VertexId, EdgeId>,
    ) -> Certificate {
        let dom_benefit: Rational =
            assignment.keys().map(|v| self.benefits.get(*v).expect("assigned vertex was observed").as_rational()).sum();
        let mut image: Vec<EdgeId> = assignment.values().copied().collect();
        image.sort();
        image.dedup();
        let im_cost: Rational = image
            .iter()
            .map(|id| self.costs.get(*id).expect("referenced edge has a recorded cost").as_rational())
            .sum();
        Certificate {
            assignment,
            report: ExtractionReport {
                epsilon: epsilon.clone(),
                regime,
                r_star,
                n: self.n(),
                total_benefit: self.benefits.total().clone(),
                dom_benefit,
                im_cost,
                im_size: image.len(),
            },
        }
    }
}

/// Largest integer `r` whose prefix `I(≤ r)` does not yet trip `exceeds`,
/// where `exceeds(i)` judges the first `i` vertices in `(eff, id)` order.
/// Returns `Bottom` when even the bottom-effectiveness vertices trip it or
/// when there is no vertex at all.
fn threshold_level(frozen: &FrozenCover, exceeds: impl Fn(usize) -> bool) -> Effectiveness {
    let entries = frozen.entries();
    let bottoms = entries.partition_point(|e| e.eff.is_bottom());
    if entries.is_empty() || exceeds(bottoms) {
        return Effectiveness::Bottom;
    }
    let mut i = bottoms;
    while i < entries.len() {
        let level = entries[i].eff.level().expect("past the bottom group");
        let end = i + entries[i..].partition_point(|e| e.eff.level() == Some(level));
        if exceeds(end) {
            return Effectiveness::Level(level - 1);
        }
        i = end;
    }
    // Only reachable when nothing ever exceeds; sit at the top level.
    entries.last().map_or(Effectiveness::Bottom, |e| e.eff)
}

fn dom_entries(frozen: &FrozenCover, r_star: Effectiveness) -> &[crate::cover::FrozenVertex] {
    match r_star {
        Effectiveness::Level(r) => frozen.vertices_gt(r),
        Effectiveness::Bottom => {
            let bottoms = frozen.entries().partition_point(|e| e.eff.is_bottom());
            &frozen.entries()[bottoms..]
        }
    }
}

fn check_epsilon(epsilon: &Rational) -> Result<(), SsscError> {
    if epsilon.is_negative() || *epsilon >= Rational::one() {
        Err(SsscError::Epsilon(render(epsilon)))
    } else {
        Ok(())
    }
}

/// `Above` iff `ε²·n ≥ 1`.
pub fn regime_for(epsilon: &Rational, n: usize) -> Regime {
    let lhs = epsilon * epsilon * Rational::from_integer(BigInt::from(n));
    if lhs >= Rational::one() {
        Regime::Above
    } else {
        Regime::Below
    }
}

/// Runs P1–P4 over a stream in a single pass.
pub fn run_stream<I>(edges: I, declared_n: Option<usize>) -> Result<StreamSummary, SsscError>
where
    I: IntoIterator<Item = Result<StreamEdge, StreamError>>,
{
    let mut summary = StreamSummary::new(declared_n);
    for edge in edges {
        summary.push(&edge?)?;
    }
    summary.finish()?;
    Ok(summary)
}

/// Runs P1–P4 over edges already in memory.
pub fn run_edges<'a>(edges: impl IntoIterator<Item = &'a StreamEdge>) -> Result<StreamSummary, SsscError> {
    let mut summary = StreamSummary::new(None);
    for edge in edges {
        summary.push(edge)?;
    }
    Ok(summary)
}

/// Replaces every benefit and cost by the largest power of two not above it.
pub fn round_edge_pow2(edge: &StreamEdge) -> StreamEdge {
    StreamEdge {
        id: edge.id,
        cost: edge.cost.floor_pow2(),
        members: edge.members.iter().map(|(v, b)| (*v, b.floor_pow2())).collect(),
    }
}

pub fn round_weights_pow2<I>(edges: I) -> impl Iterator<Item = StreamEdge>
where
    I: IntoIterator<Item = StreamEdge>,
{
    edges.into_iter().map(|e| round_edge_pow2(&e))
}
