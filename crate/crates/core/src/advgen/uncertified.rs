use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::seq::index;
use rand::Rng;

use super::plane::build_affine_plane;
use super::{lines_removed, rng, GenError, LowerBoundInstance, Truth};
use crate::stream::{EdgeId, IdMode, StreamEdge, StreamHeader};
use crate::weight::{render, Rational, Weight};

#[derive(Clone, Debug)]
pub struct UncertifiedParams {
    /// A power of two.
    pub q: u32,
    pub alpha: Rational,
    pub epsilon: Rational,
    pub materialize_dummies: bool,
    pub relax_range: bool,
}

fn ceil_log2(x: u32) -> u32 {
    if x <= 1 {
        0
    } else {
        32 - (x - 1).leading_zeros()
    }
}

/// Bit layout of a line-part identifier: a leading 0, then the angle, line,
/// part and random tag fields, most significant first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdLayout {
    pub angle_bits: u32,
    pub line_bits: u32,
    pub part_bits: u32,
    pub tag_bits: u32,
}

impl IdLayout {
    /// Widths `⌈lg(q+1)⌉`, `lg q`, `⌈lg r⌉` and `3·lg q`.
    pub fn new(q: u32, r: u32) -> Self {
        let lg_q = q.trailing_zeros();
        IdLayout { angle_bits: ceil_log2(q + 1), line_bits: lg_q, part_bits: ceil_log2(r), tag_bits: 3 * lg_q }
    }

    /// Total identifier width, leading bit included.
    pub fn iota(&self) -> u32 {
        1 + self.angle_bits + self.line_bits + self.part_bits + self.tag_bits
    }

    /// `1 ∘ 0^(ι−1)`.
    pub fn star_id(&self) -> u64 {
        1u64 << (self.iota() - 1)
    }

    pub fn encode(&self, angle: u64, line: u64, part: u64, tag: u64) -> u64 {
        let mut id = angle;
        id = (id << self.line_bits) | line;
        id = (id << self.part_bits) | part;
        (id << self.tag_bits) | tag
    }

    /// Splits an id below [`IdLayout::star_id`] into `(angle, line, part, tag)`.
    pub fn decode(&self, id: u64) -> Option<(u64, u64, u64, u64)> {
        if id >= self.star_id() {
            return None;
        }
        let mask = |bits: u32| (1u64 << bits) - 1;
        let tag = id & mask(self.tag_bits);
        let rest = id >> self.tag_bits;
        let part = rest & mask(self.part_bits);
        let rest = rest >> self.part_bits;
        let line = rest & mask(self.line_bits);
        let angle = rest >> self.line_bits;
        Some((angle, line, part, tag))
    }
}

/// `q^{-(1-α)} ≤ ε ≤ 1/66 − 1/(3q)`, decided exactly.
fn in_range(p: &UncertifiedParams) -> Result<bool, GenError> {
    let upper = Rational::new(BigInt::one(), BigInt::from(66)) - Rational::new(BigInt::one(), BigInt::from(3 * p.q));
    if p.epsilon > upper {
        return Ok(false);
    }
    if p.alpha >= Rational::one() {
        return Ok(false);
    }
    // q^((a-b)/b) ≤ ε  ⇔  ε^b · q^(b-a) ≥ 1, with α = a/b.
    let b = p
        .alpha
        .denom()
        .to_i32()
        .filter(|b| *b <= 64)
        .ok_or_else(|| GenError::Domain(format!("alpha denominator too large: {}", render(&p.alpha))))?;
    let a = p.alpha.numer().to_i32().expect("numerator below denominator");
    let lhs = num_traits::pow(p.epsilon.clone(), b as usize)
        * Rational::from_integer(num_traits::pow(BigInt::from(p.q), (b - a) as usize));
    Ok(lhs >= Rational::one())
}

/// `r`-way split of every affine-plane line with structured identifiers.
///
/// Part `k` of line `j` in angle `i` gets id `0 ∘ i ∘ j ∘ k ∘ X` (fields
/// 0-based, widths from [`IdLayout`]) with `X` a uniform `3·lg q`-bit tag;
/// `e*` gets `2^(ι−1)`. Edges arrive in id order. With
/// `materialize_dummies` every unused id below `e*` is filled by an empty
/// edge; otherwise only the real edges are emitted and the number of dummies
/// is recorded in the truth. Each point of a line picks its part uniformly
/// (redrawn until no part is empty).
pub fn gen_uncertified(p: &UncertifiedParams, seed: u64) -> Result<LowerBoundInstance, GenError> {
    let q = p.q;
    if q < 2 || !q.is_power_of_two() {
        return Err(GenError::Domain(format!("q = {q} must be a power of two")));
    }
    if !p.alpha.is_positive() {
        return Err(GenError::Domain(format!("alpha must be positive, got {}", render(&p.alpha))));
    }
    if !p.relax_range && !in_range(p)? {
        return Err(GenError::Domain(format!(
            "epsilon {} outside [q^-(1-alpha), 1/66 - 1/(3q)] for q = {q} (use relax-range)",
            render(&p.epsilon)
        )));
    }
    let r = lines_removed(&p.epsilon, q)?;
    if r >= q {
        return Err(GenError::Domain(format!("r = {r} must be below q = {q}")));
    }
    let layout = IdLayout::new(q, r);
    if layout.iota() > 63 {
        return Err(GenError::Domain(format!("identifier width {} exceeds 63 bits", layout.iota())));
    }
    let plane = build_affine_plane(q)?;
    let mut rng = rng(seed);

    let mut parts: Vec<Vec<Vec<u32>>> = Vec::with_capacity(plane.lines.len());
    for line in &plane.lines {
        loop {
            let mut split = vec![Vec::new(); r as usize];
            for &pt in &line.points {
                split[rng.gen_range(0..r as usize)].push(pt);
            }
            if split.iter().all(|s| !s.is_empty()) {
                parts.push(split);
                break;
            }
        }
    }

    let angle = rng.gen_range(0..=plane.q);
    let mut chosen: Vec<usize> = index::sample(&mut rng, plane.q, r as usize).into_vec();
    chosen.sort_unstable();

    // Global line order is angle-major then index, so ids come out ascending.
    let tag_range = 1u64 << layout.tag_bits;
    let mut real = Vec::with_capacity(plane.lines.len() * r as usize);
    let mut line_parts = Vec::with_capacity(plane.lines.len());
    for (l, line) in plane.lines.iter().enumerate() {
        let mut ids = Vec::with_capacity(r as usize);
        for (k, members) in parts[l].iter().enumerate() {
            let tag = rng.gen_range(0..tag_range);
            let id = EdgeId(layout.encode(line.angle as u64, line.index as u64, k as u64, tag));
            ids.push(id);
            real.push(StreamEdge::unit(id.0, Weight::one(), members.iter().copied()));
        }
        line_parts.push(ids);
    }
    if real.windows(2).any(|w| w[0].id >= w[1].id) {
        return Err(GenError::Construction("line-part identifiers are not strictly increasing".into()));
    }

    let star = EdgeId(layout.star_id());
    let mut removed = vec![false; plane.point_count()];
    for &j in &chosen {
        for &pt in &plane.line(angle, j).points {
            removed[pt as usize] = true;
        }
    }
    let star_edge =
        StreamEdge::unit(star.0, Weight::one(), (0..plane.point_count() as u32).filter(|x| !removed[*x as usize]));

    let dummy_count = star.0 - real.len() as u64;
    let stream = if p.materialize_dummies {
        let mut out = Vec::with_capacity(star.0 as usize + 1);
        let mut next = 0u64;
        for e in real {
            out.extend((next..e.id.0).map(|id| StreamEdge::unit(id, Weight::one(), [])));
            next = e.id.0 + 1;
            out.push(e);
        }
        out.extend((next..star.0).map(|id| StreamEdge::unit(id, Weight::one(), [])));
        out.push(star_edge);
        out
    } else {
        real.push(star_edge);
        real
    };

    let mut witness: Vec<EdgeId> =
        chosen.iter().flat_map(|&j| line_parts[plane.angles[angle][j]].iter().copied()).collect();
    witness.push(star);
    witness.sort();

    let sizes = parts.iter().flatten().map(Vec::len);
    let part_sizes = (sizes.clone().min().unwrap_or(0), sizes.max().unwrap_or(0));

    Ok(LowerBoundInstance {
        header: StreamHeader { n: Some(plane.point_count()), mode: IdMode::ExplicitId },
        stream,
        truth: Truth {
            kind: "uncertified",
            seed,
            q: Some(q),
            r: Some(r),
            epsilon: Some(p.epsilon.clone()),
            alpha: Some(p.alpha.clone()),
            angle: Some(angle),
            chosen_lines: chosen,
            line_parts,
            opt_witness: witness,
            star: Some(star),
            iota: Some(layout.iota()),
            dummy_count: Some(dummy_count),
            part_sizes: Some(part_sizes),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::parse_rational;

    fn params(q: u32, eps: &str, materialize: bool) -> UncertifiedParams {
        UncertifiedParams {
            q,
            alpha: parse_rational("1/2").unwrap(),
            epsilon: parse_rational(eps).unwrap(),
            materialize_dummies: materialize,
            relax_range: true,
        }
    }

    #[test]
    fn layout_for_q4_r2() {
        let l = IdLayout::new(4, 2);
        assert_eq!((l.angle_bits, l.line_bits, l.part_bits, l.tag_bits), (3, 2, 1, 6));
        assert_eq!(l.iota(), 13);
        assert_eq!(l.star_id(), 4096);
        assert_eq!(l.decode(l.encode(4, 3, 1, 63)), Some((4, 3, 1, 63)));
        assert_eq!(l.decode(4096), None);
    }

    #[test]
    fn single_part_lines_have_no_part_bits() {
        let l = IdLayout::new(8, 1);
        assert_eq!(l.part_bits, 0);
        assert_eq!(l.iota(), 17);
    }

    #[test]
    fn q4_instance_structure() {
        let inst = gen_uncertified(&params(4, "1/8", false), 5).unwrap();
        let t = &inst.truth;
        assert_eq!(t.r, Some(2));
        assert_eq!(t.iota, Some(13));
        assert_eq!(t.star, Some(EdgeId(4096)));
        assert_eq!(inst.stream.len(), 4 * 5 * 2 + 1);
        assert_eq!(t.dummy_count, Some(4096 - 40));
        assert_eq!(t.opt_witness.len(), 5);
        assert_eq!(inst.header.mode, IdMode::ExplicitId);
        assert!(inst.stream.windows(2).all(|w| w[0].id < w[1].id));
    }

    #[test]
    fn materialized_ids_are_a_bijection() {
        let inst = gen_uncertified(&params(4, "1/8", true), 5).unwrap();
        assert_eq!(inst.stream.len(), 4097);
        assert!(inst.stream.iter().enumerate().all(|(i, e)| e.id.0 == i as u64));
        let empties = inst.stream.iter().filter(|e| e.is_empty()).count() as u64;
        assert_eq!(Some(empties), inst.truth.dummy_count);
    }

    #[test]
    fn range_check_is_exact() {
        // q = 64, alpha = 1/2: lower bound 64^(-1/2) = 1/8, above the upper bound.
        let mut p = params(64, "1/8", false);
        p.relax_range = false;
        assert!(!in_range(&p).unwrap());
        // q = 4096, alpha = 1/4: lower bound 4096^(-3/4) = 1/512. Predicate only,
        // the field itself would be out of range.
        let p = UncertifiedParams {
            q: 1 << 12,
            alpha: parse_rational("1/4").unwrap(),
            epsilon: parse_rational("1/512").unwrap(),
            materialize_dummies: false,
            relax_range: false,
        };
        assert!(in_range(&p).unwrap());
        let p = UncertifiedParams { epsilon: parse_rational("1/513").unwrap(), ..p.clone() };
        assert!(!in_range(&p).unwrap());
        let p = UncertifiedParams { epsilon: parse_rational("1/65").unwrap(), ..p };
        assert!(!in_range(&p).unwrap());
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(gen_uncertified(&params(5, "1/8", false), 1).is_err());
    }
}
