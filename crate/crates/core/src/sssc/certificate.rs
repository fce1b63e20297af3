use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::cover::Effectiveness;
use crate::oracles::OfflineInstance;
use crate::stream::{EdgeId, VertexId};
use crate::weight::{parse_rational, render, Rational};

/// Which extraction rule applies to an ε.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `ε ≥ 1/√n`
    Above,
    /// `ε < 1/√n`
    Below,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Above => "above",
            Regime::Below => "below",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionReport {
    pub epsilon: Rational,
    pub regime: Regime,
    pub r_star: Effectiveness,
    pub n: usize,
    pub total_benefit: Rational,
    pub dom_benefit: Rational,
    pub im_cost: Rational,
    pub im_size: usize,
}

impl ExtractionReport {
    /// `b(Dom) / b(V)`, or 1 for an empty vertex set.
    pub fn coverage_fraction(&self) -> Rational {
        if self.total_benefit.is_zero() {
            Rational::one()
        } else {
            &self.dom_benefit / &self.total_benefit
        }
    }
}

/// A partial vertex → edge-id map witnessing a `(1 − ε)`-cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub assignment: BTreeMap<VertexId, EdgeId>,
    pub report: ExtractionReport,
}

impl Certificate {
    pub fn domain(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.assignment.keys().copied()
    }

    /// Distinct edge ids in the image, ascending.
    pub fn image(&self) -> Vec<EdgeId> {
        let mut ids: Vec<EdgeId> = self.assignment.values().copied().collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn is_total(&self) -> bool {
        self.assignment.len() == self.report.n
    }
}

/// Full edge memberships, kept only by validators and test harnesses.
pub type MembershipLog = OfflineInstance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub dom_benefit: Rational,
    pub required: Rational,
    pub im_cost: Rational,
    pub im_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("vertex {vertex} is mapped to edge {edge}, which does not contain it")]
    Membership { vertex: VertexId, edge: EdgeId },
    #[error("vertex {vertex} is mapped to unknown edge {edge}")]
    UnknownEdge { vertex: VertexId, edge: EdgeId },
    #[error("covered benefit {} is short of the required {} by {}", render(.dom_benefit), render(.required), render(.deficit))]
    Coverage { dom_benefit: Rational, required: Rational, deficit: Rational },
    #[error("epsilon must lie in [0, 1), got {}", render(.0))]
    Epsilon(Rational),
}

/// Checks membership of every assignment and `b(Dom) ≥ (1 − ε)·b(V)`.
#[allow(clippy::result_large_err)]
pub fn validate_certificate(
    assignment: &BTreeMap<VertexId, EdgeId>,
    log: &MembershipLog,
    epsilon: &Rational,
) -> Result<Validation, Violation> {
    if *epsilon < Rational::zero() || *epsilon >= Rational::one() {
        return Err(Violation::Epsilon(epsilon.clone()));
    }
    let mut dom_benefit = Rational::zero();
    for (v, id) in assignment {
        match log.contains(*id, *v) {
            None => return Err(Violation::UnknownEdge { vertex: *v, edge: *id }),
            Some(false) => return Err(Violation::Membership { vertex: *v, edge: *id }),
            Some(true) => {}
        }
        dom_benefit += log.benefit(*v).expect("members of logged edges have benefits").as_rational();
    }
    let required = (Rational::one() - epsilon) * log.total_benefit();
    if dom_benefit < required {
        let deficit = &required - &dom_benefit;
        return Err(Violation::Coverage { dom_benefit, required, deficit });
    }
    let mut image: Vec<EdgeId> = assignment.values().copied().collect();
    image.sort();
    image.dedup();
    let im_cost = log.cost_of(&image).expect("image edges were checked above");
    Ok(Validation { dom_benefit, required, im_cost, im_size: image.len() })
}

/// Writes `c <vertex> <edge-id>` rows followed by one `s` summary line.
pub fn write_certificate(out: &mut impl Write, cert: &Certificate) -> io::Result<()> {
    for (v, id) in &cert.assignment {
        writeln!(out, "c {v} {id}")?;
    }
    let r = &cert.report;
    writeln!(
        out,
        "s epsilon={} regime={} r_star={} dom_benefit={} im_cost={} im_size={}",
        render(&r.epsilon),
        r.regime,
        r.r_star,
        render(&r.dom_benefit),
        render(&r.im_cost),
        r.im_size
    )
}

/// A certificate as read back from disk.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CertificateFile {
    pub assignment: BTreeMap<VertexId, EdgeId>,
    /// `epsilon=` from the summary line, when present.
    pub epsilon: Option<Rational>,
}

pub fn parse_certificate(input: impl BufRead) -> Result<CertificateFile, String> {
    let mut file = CertificateFile::default();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let line_no = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        let mut tokens = body.split_whitespace();
        match tokens.next() {
            None => {}
            Some("c") => {
                let mut num = |what: &str| -> Result<u64, String> {
                    tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| format!("line {line_no}: bad or missing {what}"))
                };
                let v = u32::try_from(num("vertex")?).map_err(|_| format!("line {line_no}: vertex out of range"))?;
                let id = num("edge id")?;
                if tokens.next().is_some() {
                    return Err(format!("line {line_no}: trailing tokens"));
                }
                if file.assignment.insert(VertexId(v), EdgeId(id)).is_some() {
                    return Err(format!("line {line_no}: vertex {v} assigned twice"));
                }
            }
            Some("s") => {
                for tok in tokens {
                    if let Some(eps) = tok.strip_prefix("epsilon=") {
                        file.epsilon = Some(parse_rational(eps).map_err(|e| format!("line {line_no}: {e}"))?);
                    }
                }
            }
            Some(other) => return Err(format!("line {line_no}: unknown record `{other}`")),
        }
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{parse_str, ParseOptions};

    fn log() -> MembershipLog {
        let (_, edges) = parse_str("e 0 1 0:1 1:1\ne 1 2 2:2\n", ParseOptions::default()).unwrap();
        OfflineInstance::from_edges(&edges).unwrap()
    }

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn accepts_valid_total_certificate() {
        let a = BTreeMap::from([(VertexId(0), EdgeId(0)), (VertexId(1), EdgeId(0)), (VertexId(2), EdgeId(1))]);
        let v = validate_certificate(&a, &log(), &q("0")).unwrap();
        assert_eq!(v.im_cost, q("3"));
        assert_eq!(v.im_size, 2);
    }

    #[test]
    fn rejects_non_member() {
        let a = BTreeMap::from([(VertexId(2), EdgeId(0))]);
        assert_eq!(
            validate_certificate(&a, &log(), &q("3/4")),
            Err(Violation::Membership { vertex: VertexId(2), edge: EdgeId(0) })
        );
    }

    #[test]
    fn coverage_boundary_is_inclusive() {
        // b(V) = 4; covering {0,1} gives exactly (1 - 1/2)·4.
        let a = BTreeMap::from([(VertexId(0), EdgeId(0)), (VertexId(1), EdgeId(0))]);
        assert!(validate_certificate(&a, &log(), &q("1/2")).is_ok());
        match validate_certificate(&a, &log(), &q("1/4")) {
            Err(Violation::Coverage { deficit, .. }) => assert_eq!(deficit, q("1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certificate_text_round_trip() {
        let cert = Certificate {
            assignment: BTreeMap::from([(VertexId(3), EdgeId(9)), (VertexId(1), EdgeId(4))]),
            report: ExtractionReport {
                epsilon: q("1/8"),
                regime: Regime::Below,
                r_star: Effectiveness::Level(-2),
                n: 2,
                total_benefit: q("2"),
                dom_benefit: q("2"),
                im_cost: q("5/2"),
                im_size: 2,
            },
        };
        let mut buf = Vec::new();
        write_certificate(&mut buf, &cert).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "c 1 4\nc 3 9\ns epsilon=1/8 regime=below r_star=-2 dom_benefit=2 im_cost=5/2 im_size=2\n");
        let back = parse_certificate(text.as_bytes()).unwrap();
        assert_eq!(back.assignment, cert.assignment);
        assert_eq!(back.epsilon, Some(q("1/8")));
        assert!(parse_certificate("c 1\n".as_bytes()).is_err());
        assert!(parse_certificate("c 1 2\nc 1 3\n".as_bytes()).is_err());
    }
}
