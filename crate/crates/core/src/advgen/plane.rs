//! The affine plane AG(2, q) over a [`GaloisField`].
//!
//! Points are `GF(q)²`, encoded as `x·q + y`. Lines are `y = a·x + b` for
//! every slope `a` and intercept `b`, plus the verticals `x = c`. Angles
//! (parallel classes) are the slopes `0..q` followed by the vertical class
//! `q`; within an angle a line is indexed by its intercept. Line `l` of angle
//! `a` lives at `lines[a·q + l]`.

use std::fmt;

use fixedbitset::FixedBitSet;

use super::gf::GaloisField;
use super::GenError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub angle: usize,
    pub index: usize,
    /// Ascending point ids.
    pub points: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct AffinePlane {
    pub q: usize,
    pub lines: Vec<Line>,
    /// `angles[a]` lists the global indices of the lines in angle `a`.
    pub angles: Vec<Vec<usize>>,
}

impl AffinePlane {
    pub fn point_count(&self) -> usize {
        self.q * self.q
    }

    pub fn line(&self, angle: usize, index: usize) -> &Line {
        &self.lines[self.angles[angle][index]]
    }

    /// Global line indices through each point.
    pub fn lines_through(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.point_count()];
        for (i, line) in self.lines.iter().enumerate() {
            for &p in &line.points {
                if let Some(slot) = out.get_mut(p as usize) {
                    slot.push(i);
                }
            }
        }
        out
    }
}

pub fn build_affine_plane(q: u32) -> Result<AffinePlane, GenError> {
    let field = GaloisField::new(q)?;
    let qs = q as usize;
    let mut lines = Vec::with_capacity(qs * (qs + 1));
    let mut angles = Vec::with_capacity(qs + 1);
    for a in 0..q {
        let mut class = Vec::with_capacity(qs);
        for b in 0..q {
            let mut points: Vec<u32> = (0..q).map(|x| x * q + field.add(field.mul(a, x), b)).collect();
            points.sort_unstable();
            class.push(lines.len());
            lines.push(Line { angle: a as usize, index: b as usize, points });
        }
        angles.push(class);
    }
    let mut vertical = Vec::with_capacity(qs);
    for c in 0..q {
        vertical.push(lines.len());
        lines.push(Line { angle: qs, index: c as usize, points: (0..q).map(|y| c * q + y).collect() });
    }
    angles.push(vertical);
    Ok(AffinePlane { q: qs, lines, angles })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaneViolation {
    Counts { lines: usize, angles: usize },
    AngleSize { angle: usize, size: usize },
    LineSize { line: usize, size: usize },
    PointOutOfRange { line: usize, point: u32 },
    PointDegree { point: usize, degree: usize },
    PairCoverage { a: usize, b: usize, lines: usize },
    Intersection { a: usize, b: usize, common: usize },
    Parallelism { a: usize, b: usize },
}

impl fmt::Display for PlaneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaneViolation::Counts { lines, angles } => write!(f, "{lines} lines in {angles} angles"),
            PlaneViolation::AngleSize { angle, size } => write!(f, "angle {angle} has {size} lines"),
            PlaneViolation::LineSize { line, size } => write!(f, "line {line} has {size} points"),
            PlaneViolation::PointOutOfRange { line, point } => write!(f, "line {line} holds unknown point {point}"),
            PlaneViolation::PointDegree { point, degree } => write!(f, "point {point} lies on {degree} lines"),
            PlaneViolation::PairCoverage { a, b, lines } => write!(f, "points {a} and {b} share {lines} lines"),
            PlaneViolation::Intersection { a, b, common } => write!(f, "lines {a} and {b} share {common} points"),
            PlaneViolation::Parallelism { a, b } => {
                write!(f, "lines {a} and {b} disagree on parallelism versus angle membership")
            }
        }
    }
}

/// Exhaustively checks the incidence properties of an affine plane of
/// order `q`: `q(q+1)` lines in `q+1` angles of `q`, `q` points per line,
/// `q+1` lines per point, exactly one line through any two points, at most
/// one common point for any two lines, and two lines disjoint iff they share
/// an angle.
pub fn verify_plane(plane: &AffinePlane) -> Result<(), PlaneViolation> {
    let q = plane.q;
    let n = plane.point_count();
    if plane.lines.len() != q * (q + 1) || plane.angles.len() != q + 1 {
        return Err(PlaneViolation::Counts { lines: plane.lines.len(), angles: plane.angles.len() });
    }
    for (a, class) in plane.angles.iter().enumerate() {
        if class.len() != q {
            return Err(PlaneViolation::AngleSize { angle: a, size: class.len() });
        }
    }
    let mut angle_of = vec![usize::MAX; plane.lines.len()];
    for (a, class) in plane.angles.iter().enumerate() {
        for &l in class {
            angle_of[l] = a;
        }
    }
    let mut sets = Vec::with_capacity(plane.lines.len());
    for (i, line) in plane.lines.iter().enumerate() {
        let mut set = FixedBitSet::with_capacity(n);
        for &p in &line.points {
            if p as usize >= n {
                return Err(PlaneViolation::PointOutOfRange { line: i, point: p });
            }
            set.insert(p as usize);
        }
        if set.count_ones(..) != q {
            return Err(PlaneViolation::LineSize { line: i, size: set.count_ones(..) });
        }
        sets.push(set);
    }

    let through = plane.lines_through();
    for (p, ls) in through.iter().enumerate() {
        if ls.len() != q + 1 {
            return Err(PlaneViolation::PointDegree { point: p, degree: ls.len() });
        }
    }

    let mut shared = vec![0usize; n];
    for (p, ls) in through.iter().enumerate() {
        shared.iter_mut().for_each(|c| *c = 0);
        for &l in ls {
            for &x in &plane.lines[l].points {
                shared[x as usize] += 1;
            }
        }
        if let Some((x, &c)) = shared.iter().enumerate().find(|&(x, &c)| x != p && c != 1) {
            return Err(PlaneViolation::PairCoverage { a: p, b: x, lines: c });
        }
    }

    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let common = sets[a].intersection(&sets[b]).count();
            if common > 1 {
                return Err(PlaneViolation::Intersection { a, b, common });
            }
            if (common == 0) != (angle_of[a] == angle_of[b]) {
                return Err(PlaneViolation::Parallelism { a, b });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_two_counts() {
        let p = build_affine_plane(2).unwrap();
        assert_eq!(p.point_count(), 4);
        assert_eq!(p.lines.len(), 6);
        assert_eq!(p.angles.len(), 3);
        assert!(p.angles.iter().all(|a| a.len() == 2));
        verify_plane(&p).unwrap();
    }

    #[test]
    fn order_three_degrees() {
        let p = build_affine_plane(3).unwrap();
        assert_eq!(p.point_count(), 9);
        assert_eq!(p.lines.len(), 12);
        assert!(p.lines_through().iter().all(|ls| ls.len() == 4));
        verify_plane(&p).unwrap();
    }

    #[test]
    fn order_seven_counts() {
        let p = build_affine_plane(7).unwrap();
        assert_eq!((p.point_count(), p.lines.len(), p.angles.len()), (49, 56, 8));
    }

    #[test]
    fn moved_point_is_caught() {
        let mut p = build_affine_plane(3).unwrap();
        let line = &mut p.lines[0];
        let old = line.points[0];
        let replacement = (0..9).find(|x| !line.points.contains(x)).unwrap();
        line.points[0] = replacement;
        line.points.sort_unstable();
        assert_ne!(old, replacement);
        assert!(verify_plane(&p).is_err());
    }

    #[test]
    fn unsupported_order() {
        assert!(build_affine_plane(6).is_err());
        assert!(build_affine_plane(9).is_err());
    }
}
