//! Versioned text snapshot of a [`StreamSummary`].
//!
//! ```text
//! sssc-snapshot 1
//! h n=<n> m=<m> declared=<n|_> b=<b(V)>
//! v <id> <eff1> <eid1> <eff2> <eid2> <emin_id> <emin_cost> <benefit>
//! e <id> <cost>
//! ```
//!
//! `_` marks bottom effectiveness or an unset id. `e` rows carry the costs
//! of every edge referenced by a `v` row.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{CostTable, StreamSummary};
use crate::cover::Effectiveness;
use crate::stream::{EdgeId, VertexId};
use crate::weight::{render, Weight};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "_".to_string(), |v| v.to_string())
}

pub fn write_snapshot(out: &mut impl Write, s: &StreamSummary) -> io::Result<()> {
    writeln!(out, "sssc-snapshot {SNAPSHOT_VERSION}")?;
    let stats = s.stats();
    writeln!(
        out,
        "h n={} m={} declared={} b={}",
        stats.n_seen,
        stats.m_seen,
        opt(s.declared_n),
        render(&stats.total_benefit)
    )?;
    for (v, benefit) in s.benefits.iter() {
        let (emin_id, emin_cost) = match s.emin.get(&v) {
            Some((id, c)) => (id.to_string(), c.to_string()),
            None => ("_".to_string(), "_".to_string()),
        };
        writeln!(
            out,
            "v {} {} {} {} {} {} {} {}",
            v,
            s.p1.eff(v),
            opt(s.p1.eid(v)),
            s.p2.eff(v),
            opt(s.p2.eid(v)),
            emin_id,
            emin_cost,
            benefit
        )?;
    }
    for (id, cost) in s.costs.iter() {
        writeln!(out, "e {id} {cost}")?;
    }
    Ok(())
}

pub fn snapshot_to_string(s: &StreamSummary) -> String {
    let mut buf = Vec::new();
    write_snapshot(&mut buf, s).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("snapshot text is ASCII")
}

struct Row {
    v: VertexId,
    eff1: Effectiveness,
    eid1: Option<EdgeId>,
    eff2: Effectiveness,
    eid2: Option<EdgeId>,
    emin: Option<EdgeId>,
    benefit: Weight,
}

pub fn read_snapshot(input: impl BufRead) -> Result<StreamSummary, SnapshotError> {
    let mut lines = input.lines().enumerate();
    let ferr = |line: usize, msg: &str| SnapshotError::Format { line, msg: msg.to_string() };

    let (_, first) = lines.next().ok_or_else(|| ferr(1, "empty snapshot"))?;
    let first = first?;
    let version = first.strip_prefix("sssc-snapshot ").ok_or_else(|| ferr(1, "missing magic"))?;
    if version.trim() != SNAPSHOT_VERSION.to_string() {
        return Err(ferr(1, &format!("unsupported version `{version}`")));
    }

    let mut m = None;
    let mut declared = None;
    let mut rows = Vec::new();
    let mut costs = std::collections::BTreeMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| ferr(line_no, &format!("bad {what}"));
        let id = |t: &str| -> Result<Option<EdgeId>, SnapshotError> {
            if t == "_" {
                Ok(None)
            } else {
                t.parse().map(|x| Some(EdgeId(x))).map_err(|_| bad("edge id"))
            }
        };
        let eff = |t: &str| -> Result<Effectiveness, SnapshotError> {
            if t == "_" {
                Ok(Effectiveness::Bottom)
            } else {
                t.parse().map(Effectiveness::Level).map_err(|_| bad("effectiveness"))
            }
        };
        let weight = |t: &str| -> Result<Weight, SnapshotError> { t.parse().map_err(|_| bad("weight")) };
        match toks.first().copied() {
            None => {}
            Some("h") => {
                for tok in &toks[1..] {
                    match tok.split_once('=') {
                        Some(("m", x)) => m = Some(x.parse::<u64>().map_err(|_| bad("edge count"))?),
                        Some(("declared", "_")) => declared = None,
                        Some(("declared", x)) => declared = Some(x.parse::<usize>().map_err(|_| bad("declared n"))?),
                        Some(("n", _)) | Some(("b", _)) => {}
                        _ => return Err(bad("header field")),
                    }
                }
            }
            Some("v") if toks.len() == 9 => {
                let v = VertexId(toks[1].parse().map_err(|_| bad("vertex id"))?);
                let row = Row {
                    v,
                    eff1: eff(toks[2])?,
                    eid1: id(toks[3])?,
                    eff2: eff(toks[4])?,
                    eid2: id(toks[5])?,
                    emin: id(toks[6])?,
                    benefit: weight(toks[8])?,
                };
                if let Some(e) = row.emin {
                    let c = weight(toks[7])?;
                    if costs.insert(e, c.clone()).is_some_and(|prev| prev != c) {
                        return Err(bad("emin cost (conflicts with another row)"));
                    }
                }
                rows.push(row);
            }
            Some("e") if toks.len() == 3 => {
                let e = id(toks[1])?.ok_or_else(|| bad("edge id"))?;
                let c = weight(toks[2])?;
                if costs.insert(e, c.clone()).is_some_and(|prev| prev != c) {
                    return Err(bad("edge cost (conflicts with another row)"));
                }
            }
            Some(_) => return Err(bad("record")),
        }
    }

    let mut s = StreamSummary::new(declared);
    let mut table = CostTable::default();
    let mut acquire = |id: EdgeId, line_hint: &str| -> Result<(), SnapshotError> {
        let c = costs.get(&id).ok_or_else(|| ferr(0, &format!("no cost recorded for edge {id} ({line_hint})")))?;
        table.acquire(id, c);
        Ok(())
    };
    for row in rows {
        s.p1.restore(row.v, row.eff1, row.eid1, row.benefit.clone());
        s.p2.restore(row.v, row.eff2, row.eid2, Weight::one());
        s.benefits.restore(row.v, row.benefit);
        for id in [row.eid1, row.eid2].into_iter().flatten() {
            acquire(id, "eid")?;
        }
        if let Some(e) = row.emin {
            acquire(e, "emin")?;
            s.emin.insert(row.v, (e, costs[&e].clone()));
        }
    }
    s.costs = table;
    let m = m.ok_or_else(|| ferr(2, "missing header"))?;
    s.benefits.set_edge_count(m);
    s.edges_visited = m;
    Ok(s)
}
