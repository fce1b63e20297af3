use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::plane::build_affine_plane;
use super::{in_certified_range, lines_removed, rng, GenError, LowerBoundInstance, Truth};
use crate::stream::{EdgeId, IdMode, StreamEdge, StreamHeader};
use crate::weight::{render, Rational, Weight};

/// Two-way split of every affine-plane line plus one large closing edge.
///
/// Each line is split into two parts by a fair coin per point (redrawn until
/// both parts are non-empty). One angle and `r = ⌈3εq⌉` of its lines are
/// drawn; the closing edge `e*` holds every point off those lines. The
/// `2q(q+1)` line parts arrive in shuffled order with ids `0, 1, ...`, and
/// `e*` arrives last. The two parts of each chosen line plus `e*` cover all
/// points, giving a witness of size `2r + 1`. All weights are 1.
///
/// Randomness is drawn in this order: coins line by line (global line order,
/// points ascending), the angle, the chosen lines, the arrival shuffle.
pub fn gen_certified(q: u32, epsilon: &Rational, seed: u64, relax_range: bool) -> Result<LowerBoundInstance, GenError> {
    if !relax_range && !in_certified_range(epsilon, q) {
        return Err(GenError::Domain(format!(
            "epsilon {} outside [1/(3q), 1/66 - 1/(3q)] for q = {q} (use relax-range)",
            render(epsilon)
        )));
    }
    let r = lines_removed(epsilon, q)?;
    if r >= q {
        return Err(GenError::Domain(format!("r = {r} must be below q = {q}")));
    }
    let plane = build_affine_plane(q)?;
    let mut rng = rng(seed);

    let mut parts: Vec<[Vec<u32>; 2]> = Vec::with_capacity(plane.lines.len());
    for line in &plane.lines {
        loop {
            let mut split = [Vec::new(), Vec::new()];
            for &p in &line.points {
                split[rng.gen::<bool>() as usize].push(p);
            }
            if !split[0].is_empty() && !split[1].is_empty() {
                parts.push(split);
                break;
            }
        }
    }

    let angle = rng.gen_range(0..=plane.q);
    let mut chosen: Vec<usize> = index::sample(&mut rng, plane.q, r as usize).into_vec();
    chosen.sort_unstable();

    let mut arrival: Vec<(usize, usize)> = (0..plane.lines.len()).flat_map(|l| [(l, 0), (l, 1)]).collect();
    arrival.shuffle(&mut rng);

    let mut line_parts = vec![vec![EdgeId(0); 2]; plane.lines.len()];
    let mut stream = Vec::with_capacity(arrival.len() + 1);
    for (t, &(l, k)) in arrival.iter().enumerate() {
        let id = EdgeId(t as u64);
        line_parts[l][k] = id;
        stream.push(StreamEdge::unit(id.0, Weight::one(), parts[l][k].iter().copied()));
    }

    let mut removed = vec![false; plane.point_count()];
    for &j in &chosen {
        for &p in &plane.line(angle, j).points {
            removed[p as usize] = true;
        }
    }
    let star_points = (0..plane.point_count() as u32).filter(|p| !removed[*p as usize]);
    let star = EdgeId(arrival.len() as u64);
    stream.push(StreamEdge::unit(star.0, Weight::one(), star_points));

    let mut witness: Vec<EdgeId> =
        chosen.iter().flat_map(|&j| line_parts[plane.angles[angle][j]].iter().copied()).collect();
    witness.push(star);
    witness.sort();

    let sizes = parts.iter().flat_map(|p| p.iter().map(Vec::len));
    let part_sizes = (sizes.clone().min().unwrap_or(0), sizes.max().unwrap_or(0));

    Ok(LowerBoundInstance {
        header: StreamHeader { n: Some(plane.point_count()), mode: IdMode::Default },
        stream,
        truth: Truth {
            kind: "certified",
            seed,
            q: Some(q),
            r: Some(r),
            epsilon: Some(epsilon.clone()),
            angle: Some(angle),
            chosen_lines: chosen,
            line_parts,
            opt_witness: witness,
            star: Some(star),
            part_sizes: Some(part_sizes),
            ..Truth::default()
        },
    })
}
