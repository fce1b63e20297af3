//! Offline ground truth: materialized instances, exact minimum-cost covers,
//! the greedy baseline and coverage evaluation.
//!
//! Solvers sit behind [`CoverSolver`] and are looked up by name through a
//! [`SolverRegistry`], so harnesses can pick a baseline at runtime.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::cover::{BenefitMode, CoverState, Effectiveness};
use crate::stream::{EdgeId, StreamEdge, VertexId};
use crate::weight::{Rational, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("vertex {0} is not contained in any edge")]
    IsolatedVertex(VertexId),
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("vertex {0} carries conflicting benefits")]
    BenefitConflict(VertexId),
    #[error("instance too large for {solver}: {reason}")]
    TooLarge { solver: &'static str, reason: String },
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfflineEdge {
    pub id: EdgeId,
    pub cost: Weight,
    pub members: Vec<VertexId>,
}

/// A fully materialized weighted hypergraph.
#[derive(Clone, Debug, Default)]
pub struct OfflineInstance {
    edges: Vec<OfflineEdge>,
    by_id: HashMap<EdgeId, usize>,
    benefits: BTreeMap<VertexId, Weight>,
    total: Rational,
}

impl OfflineInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges<'a>(edges: impl IntoIterator<Item = &'a StreamEdge>) -> Result<Self, OracleError> {
        let mut inst = Self::new();
        for e in edges {
            inst.push(e)?;
        }
        Ok(inst)
    }

    pub fn push(&mut self, edge: &StreamEdge) -> Result<(), OracleError> {
        if self.by_id.contains_key(&edge.id) {
            return Err(OracleError::DuplicateEdge(edge.id));
        }
        for (v, b) in &edge.members {
            match self.benefits.get(v) {
                Some(existing) if existing != b => return Err(OracleError::BenefitConflict(*v)),
                Some(_) => {}
                None => {
                    self.total += b.as_rational();
                    self.benefits.insert(*v, b.clone());
                }
            }
        }
        self.by_id.insert(edge.id, self.edges.len());
        self.edges.push(OfflineEdge { id: edge.id, cost: edge.cost.clone(), members: edge.vertices().collect() });
        Ok(())
    }

    /// Declares a vertex that may not appear in any edge.
    pub fn add_vertex(&mut self, v: VertexId, benefit: Weight) -> Result<(), OracleError> {
        match self.benefits.get(&v) {
            Some(existing) if *existing != benefit => Err(OracleError::BenefitConflict(v)),
            Some(_) => Ok(()),
            None => {
                self.total += benefit.as_rational();
                self.benefits.insert(v, benefit);
                Ok(())
            }
        }
    }

    pub fn edges(&self) -> &[OfflineEdge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Option<&OfflineEdge> {
        self.by_id.get(&id).map(|&i| &self.edges[i])
    }

    pub fn contains(&self, id: EdgeId, v: VertexId) -> Option<bool> {
        self.edge(id).map(|e| e.members.contains(&v))
    }

    pub fn benefit(&self, v: VertexId) -> Option<&Weight> {
        self.benefits.get(&v)
    }

    pub fn benefits(&self) -> &BTreeMap<VertexId, Weight> {
        &self.benefits
    }

    pub fn vertex_count(&self) -> usize {
        self.benefits.len()
    }

    pub fn total_benefit(&self) -> &Rational {
        &self.total
    }

    pub fn cost_of<'a>(&self, ids: impl IntoIterator<Item = &'a EdgeId>) -> Result<Rational, OracleError> {
        let mut sum = Rational::zero();
        for id in ids {
            sum += self.edge(*id).ok_or(OracleError::UnknownEdge(*id))?.cost.as_rational();
        }
        Ok(sum)
    }

    fn check_no_isolated(&self) -> Result<(), OracleError> {
        let mut covered = BTreeSet::new();
        for e in &self.edges {
            covered.extend(e.members.iter().copied());
        }
        match self.benefits.keys().find(|v| !covered.contains(v)) {
            Some(v) => Err(OracleError::IsolatedVertex(*v)),
            None => Ok(()),
        }
    }
}

/// A full cover together with its cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptCover {
    /// Ascending edge ids.
    pub edges: Vec<EdgeId>,
    pub cost: Rational,
    /// True only when the search finished and the cost is the minimum.
    pub proven_optimal: bool,
    /// Search nodes expanded (0 for non-search solvers).
    pub nodes: u64,
}

/// Covered benefit of the union of `ids`, and its fraction of `b(V)`.
///
/// An instance with no vertices counts as fully covered.
pub fn coverage_of(ids: &[EdgeId], instance: &OfflineInstance) -> Result<(Rational, Rational), OracleError> {
    let mut covered = BTreeSet::new();
    for id in ids {
        let e = instance.edge(*id).ok_or(OracleError::UnknownEdge(*id))?;
        covered.extend(e.members.iter().copied());
    }
    let benefit: Rational =
        covered.iter().map(|v| instance.benefit(*v).expect("members have benefits").as_rational()).sum();
    let total = instance.total_benefit();
    let fraction = if total.is_zero() { Rational::one() } else { &benefit / total };
    Ok((benefit, fraction))
}

pub fn is_cover(ids: &[EdgeId], instance: &OfflineInstance) -> Result<bool, OracleError> {
    let (benefit, _) = coverage_of(ids, instance)?;
    Ok(benefit == *instance.total_benefit())
}

/// Benefit-per-cost greedy: repeatedly takes the edge with the largest
/// uncovered benefit over cost (ties to the smaller id).
pub fn greedy_cover(instance: &OfflineInstance) -> Result<OptCover, OracleError> {
    instance.check_no_isolated()?;
    let mut uncovered: BTreeSet<VertexId> = instance.benefits.keys().copied().collect();
    let mut chosen = Vec::new();
    let mut cost = Rational::zero();
    while !uncovered.is_empty() {
        let mut best: Option<(Rational, usize)> = None;
        for (i, e) in instance.edges.iter().enumerate() {
            let gain: Rational =
                e.members.iter().filter(|v| uncovered.contains(v)).map(|v| instance.benefits[v].as_rational()).sum();
            if gain.is_zero() {
                continue;
            }
            let ratio = gain / e.cost.as_rational();
            let better = match &best {
                None => true,
                Some((r, j)) => match ratio.cmp(r) {
                    Ordering::Greater => true,
                    Ordering::Equal => e.id < instance.edges[*j].id,
                    Ordering::Less => false,
                },
            };
            if better {
                best = Some((ratio, i));
            }
        }
        let (_, i) = best.expect("no isolated vertices, so some edge makes progress");
        let e = &instance.edges[i];
        for v in &e.members {
            uncovered.remove(v);
        }
        cost += e.cost.as_rational();
        chosen.push(e.id);
    }
    chosen.sort();
    Ok(OptCover { edges: chosen, cost, proven_optimal: false, nodes: 0 })
}

/// Integer-scaled view of an instance for the exact searches.
struct Scaled {
    /// Original cost denominator scale: `cost_i = scaled_i / scale`.
    scale: BigInt,
    costs: Vec<u128>,
    masks: Vec<FixedBitSet>,
    containing: Vec<Vec<usize>>,
    n: usize,
}

/// Fixed-point factor applied to the search lower bound.
const LB_SCALE: u128 = 1 << 20;

impl Scaled {
    fn new(instance: &OfflineInstance, solver: &'static str) -> Result<Self, OracleError> {
        instance.check_no_isolated()?;
        let dense: HashMap<VertexId, usize> = instance.benefits.keys().enumerate().map(|(i, v)| (*v, i)).collect();
        let n = dense.len();
        let scale = instance.edges.iter().fold(BigInt::one(), |acc, e| acc.lcm(e.cost.as_rational().denom()));
        let too_large = |reason: &str| OracleError::TooLarge { solver, reason: reason.to_string() };
        let mut costs = Vec::with_capacity(instance.edges.len());
        let mut total: u128 = 0;
        for e in &instance.edges {
            let c = e.cost.as_rational();
            let s = (c.numer() * (&scale / c.denom())).to_u128().ok_or_else(|| too_large("cost overflow"))?;
            total = total.checked_add(s).ok_or_else(|| too_large("cost overflow"))?;
            costs.push(s);
        }
        if total.checked_mul(LB_SCALE * 2).is_none() {
            return Err(too_large("total cost exceeds search precision"));
        }
        let mut masks = Vec::with_capacity(instance.edges.len());
        let mut containing = vec![Vec::new(); n];
        for (i, e) in instance.edges.iter().enumerate() {
            let mut m = FixedBitSet::with_capacity(n);
            for v in &e.members {
                let d = dense[v];
                m.insert(d);
                containing[d].push(i);
            }
            masks.push(m);
        }
        // Exploration order follows edge id.
        for list in &mut containing {
            list.sort_by_key(|&i| instance.edges[i].id);
        }
        Ok(Scaled { scale, costs, masks, containing, n })
    }

    fn unscale(&self, c: u128) -> Rational {
        Rational::new(BigInt::from(c), self.scale.clone())
    }

    fn full(&self) -> FixedBitSet {
        let mut all = FixedBitSet::with_capacity(self.n);
        all.insert_range(..);
        all
    }
}

/// Exact minimum-cost cover by enumerating all `2^m` edge subsets.
pub fn exhaustive_opt(instance: &OfflineInstance) -> Result<OptCover, OracleError> {
    const LIMIT: usize = 24;
    let m = instance.edges.len();
    if m > LIMIT {
        return Err(OracleError::TooLarge { solver: "exhaustive", reason: format!("m = {m} > {LIMIT}") });
    }
    let sc = Scaled::new(instance, "exhaustive")?;
    let all = sc.full();
    let mut best: Option<(u128, u32)> = None;
    let mut union = FixedBitSet::with_capacity(sc.n);
    for subset in 0u32..(1u32 << m) {
        let mut cost = 0u128;
        union.clear();
        for i in 0..m {
            if subset >> i & 1 == 1 {
                cost += sc.costs[i];
                union.union_with(&sc.masks[i]);
            }
        }
        if union == all && best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, subset));
        }
    }
    let (cost, subset) = best.expect("no isolated vertices, so all edges form a cover");
    let mut edges: Vec<EdgeId> = (0..m).filter(|i| subset >> i & 1 == 1).map(|i| instance.edges[i].id).collect();
    edges.sort();
    Ok(OptCover { edges, cost: sc.unscale(cost), proven_optimal: true, nodes: 1u64 << m })
}

struct Search<'a> {
    sc: &'a Scaled,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    best_cost: u128,
    best: Vec<usize>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    /// Sum over uncovered vertices of the cheapest per-vertex price
    /// `c(e) / |e ∩ U|`, floored in `LB_SCALE` fixed point.
    fn lower_bound(&self, uncovered: &FixedBitSet) -> u128 {
        let hits: Vec<u128> = self.sc.masks.iter().map(|m| m.intersection(uncovered).count() as u128).collect();
        let mut sum = 0u128;
        for v in uncovered.ones() {
            let mut best: Option<(u128, u128)> = None;
            for &e in &self.sc.containing[v] {
                let (c, k) = (self.sc.costs[e], hits[e]);
                if best.is_none_or(|(bc, bk)| c * bk < bc * k) {
                    best = Some((c, k));
                }
            }
            let (c, k) = best.expect("vertex has a containing edge");
            sum += c * LB_SCALE / k;
        }
        sum
    }

    fn dfs(&mut self, uncovered: &FixedBitSet, cost: u128) {
        if self.exhausted {
            return;
        }
        if self.nodes >= self.budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        if uncovered.is_clear() {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = self.chosen.clone();
            }
            return;
        }
        if cost >= self.best_cost {
            return;
        }
        if cost * LB_SCALE + self.lower_bound(uncovered) >= self.best_cost * LB_SCALE {
            return;
        }
        let pivot = uncovered.ones().min_by_key(|&v| (self.sc.containing[v].len(), v)).expect("non-empty");
        for idx in 0..self.sc.containing[pivot].len() {
            let e = self.sc.containing[pivot][idx];
            let mut next = uncovered.clone();
            next.difference_with(&self.sc.masks[e]);
            self.chosen.push(e);
            self.dfs(&next, cost + self.sc.costs[e]);
            self.chosen.pop();
        }
    }
}

/// Exact minimum-cost cover by depth-first branch and bound.
///
/// Branches on the uncovered vertex with the fewest containing edges, trying
/// those edges in id order, and prunes with the per-vertex price bound. The
/// greedy cover seeds the incumbent. When the node budget runs out the best
/// cover found is returned with `proven_optimal = false`.
pub fn brute_force_opt(instance: &OfflineInstance, budget: u64) -> Result<OptCover, OracleError> {
    let sc = Scaled::new(instance, "branch-and-bound")?;
    let greedy = greedy_cover(instance)?;
    let seed: Vec<usize> = greedy.edges.iter().map(|id| instance.by_id[id]).collect();
    let seed_cost = seed.iter().map(|&i| sc.costs[i]).sum();
    let mut search =
        Search { sc: &sc, budget, nodes: 0, exhausted: false, best_cost: seed_cost, best: seed, chosen: Vec::new() };
    search.dfs(&sc.full(), 0);
    let mut edges: Vec<EdgeId> = search.best.iter().map(|&i| instance.edges[i].id).collect();
    edges.sort();
    Ok(OptCover { edges, cost: sc.unscale(search.best_cost), proven_optimal: !search.exhausted, nodes: search.nodes })
}

/// `⌈lg(b/c)⌉` found by doubling or halving `c` until it brackets `b`.
pub fn level_by_doubling(benefit: &Rational, cost: &Rational) -> i64 {
    let two = Rational::from_integer(BigInt::from(2));
    let mut bound = cost.clone();
    let mut i = 0i64;
    while *benefit > bound {
        bound *= &two;
        i += 1;
    }
    loop {
        let half = &bound / &two;
        if *benefit > half {
            return i;
        }
        bound = half;
        i -= 1;
    }
}

/// Largest benefit over all non-empty effective subsets of `edge` given the
/// prior effectiveness table, by enumerating every subset (`|e| ≤ 20`).
/// `None` when no non-empty subset is effective.
pub fn best_effective_benefit(state: &CoverState, edge: &StreamEdge) -> Option<Rational> {
    let k = edge.members.len();
    assert!(k <= 20, "exhaustive subset search is limited to 20 members");
    let benefit = |b: &Weight| match state.mode() {
        BenefitMode::True => b.as_rational().clone(),
        BenefitMode::Unit => Rational::one(),
    };
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1u32 << k) {
        let mut total = Rational::zero();
        let mut top = Effectiveness::Bottom;
        for (i, (v, b)) in edge.members.iter().enumerate() {
            if mask >> i & 1 == 1 {
                total += benefit(b);
                top = top.max(state.eff(*v));
            }
        }
        let lev = level_by_doubling(&total, edge.cost.as_rational());
        if Effectiveness::Level(lev) > top && best.as_ref().is_none_or(|b| total > *b) {
            best = Some(total);
        }
    }
    best
}

/// An offline full-cover solver selectable by name.
pub trait CoverSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, instance: &OfflineInstance) -> Result<OptCover, OracleError>;
}

pub struct BranchAndBound {
    pub budget: u64,
}

impl CoverSolver for BranchAndBound {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn solve(&self, instance: &OfflineInstance) -> Result<OptCover, OracleError> {
        brute_force_opt(instance, self.budget)
    }
}

pub struct Exhaustive;

impl CoverSolver for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn solve(&self, instance: &OfflineInstance) -> Result<OptCover, OracleError> {
        exhaustive_opt(instance)
    }
}

pub struct Greedy;

impl CoverSolver for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn solve(&self, instance: &OfflineInstance) -> Result<OptCover, OracleError> {
        greedy_cover(instance)
    }
}

pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

/// Name-indexed collection of offline solvers.
pub struct SolverRegistry {
    solvers: Vec<Box<dyn CoverSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry { solvers: Vec::new() }
    }

    /// `exact`, `exhaustive` and `greedy`.
    pub fn with_defaults(budget: u64) -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(BranchAndBound { budget }));
        reg.register(Box::new(Exhaustive));
        reg.register(Box::new(Greedy));
        reg
    }

    /// Adds a solver, replacing any previous one with the same name.
    pub fn register(&mut self, solver: Box<dyn CoverSolver>) {
        self.solvers.retain(|s| s.name() != solver.name());
        self.solvers.push(solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn CoverSolver, OracleError> {
        self.solvers
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| OracleError::UnknownSolver(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.iter().map(|s| s.name()).collect()
    }
}
