use rand::seq::index;
use rand::Rng;

use super::{rng, GenError, LowerBoundInstance, Truth};
use crate::stream::{EdgeId, IdMode, StreamEdge, StreamHeader, VertexId};
use crate::weight::Weight;

#[derive(Clone, Debug)]
pub struct RandomParams {
    pub n: usize,
    pub m: usize,
    /// Unit benefits and costs.
    pub unit: bool,
    /// Numerators and denominators are drawn from `1..=max_weight`.
    pub max_weight: u64,
    /// Defaults to `min(n, 6)`.
    pub max_edge_size: Option<usize>,
}

/// Random weighted hypergraph without isolated vertices.
///
/// Each edge draws a size in `1..=max_edge_size` and that many distinct
/// vertices; every vertex left uncovered is then added to a uniformly chosen
/// edge. Ids are `0..m`.
pub fn gen_random(p: &RandomParams, seed: u64) -> Result<LowerBoundInstance, GenError> {
    if p.n == 0 || p.m == 0 {
        return Err(GenError::Domain("random instances need n ≥ 1 and m ≥ 1".into()));
    }
    if p.n > u32::MAX as usize {
        return Err(GenError::Domain(format!("n = {} is too large", p.n)));
    }
    if !p.unit && p.max_weight == 0 {
        return Err(GenError::Domain("max_weight must be positive".into()));
    }
    let max_size = p.max_edge_size.unwrap_or(6).clamp(1, p.n);
    let mut rng = rng(seed);
    let weight = |rng: &mut rand_chacha::ChaCha8Rng| -> Weight {
        if p.unit {
            Weight::one()
        } else {
            let num = rng.gen_range(1..=p.max_weight);
            let den = rng.gen_range(1..=p.max_weight);
            Weight::ratio(num, den).expect("positive by construction")
        }
    };

    let benefits: Vec<Weight> = (0..p.n).map(|_| weight(&mut rng)).collect();
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(p.m);
    let mut covered = vec![false; p.n];
    for _ in 0..p.m {
        let size = rng.gen_range(1..=max_size);
        let vs = index::sample(&mut rng, p.n, size).into_vec();
        for &v in &vs {
            covered[v] = true;
        }
        members.push(vs);
    }
    for (v, hit) in covered.iter().enumerate() {
        if !hit {
            let e = rng.gen_range(0..p.m);
            members[e].push(v);
        }
    }

    let stream = members
        .into_iter()
        .enumerate()
        .map(|(i, mut vs)| {
            vs.sort_unstable();
            let cost = weight(&mut rng);
            let ms = vs.into_iter().map(|v| (VertexId(v as u32), benefits[v].clone())).collect();
            StreamEdge::new(EdgeId(i as u64), cost, ms)
        })
        .collect();

    Ok(LowerBoundInstance {
        header: StreamHeader { n: Some(p.n), mode: IdMode::Default },
        stream,
        truth: Truth { kind: "random", seed, ..Truth::default() },
    })
}
