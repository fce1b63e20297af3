//! Hypergraph edge streams: data model, text format and benefit bookkeeping.
//!
//! Format, one record per line:
//!
//! ```text
//! # comment
//! h n=<int> mode=<default|explicit-id>
//! e <id|-> <cost> <v>:<benefit> [<v>:<benefit> ...]
//! ```
//!
//! Weights are `<int>` or `<int>/<int>`. A `-` id takes the previous id plus
//! one, which is the edge's 0-based arrival time when no ids are given. Ids
//! must strictly increase along the stream.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use num_traits::Zero;
use thiserror::Error;

use crate::weight::{render, Rational, Weight, WeightError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One arriving hyperedge with its cost and the benefits of its members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamEdge {
    pub id: EdgeId,
    pub cost: Weight,
    pub members: Vec<(VertexId, Weight)>,
}

impl StreamEdge {
    pub fn new(id: EdgeId, cost: Weight, members: Vec<(VertexId, Weight)>) -> Self {
        StreamEdge { id, cost, members }
    }

    /// Edge whose members all carry benefit 1.
    pub fn unit(id: u64, cost: Weight, vertices: impl IntoIterator<Item = u32>) -> Self {
        let members = vertices.into_iter().map(|v| (VertexId(v), Weight::one())).collect();
        StreamEdge { id: EdgeId(id), cost, members }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.members.iter().map(|(v, _)| *v)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IdMode {
    #[default]
    Default,
    ExplicitId,
}

impl IdMode {
    fn as_str(self) -> &'static str {
        match self {
            IdMode::Default => "default",
            IdMode::ExplicitId => "explicit-id",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StreamHeader {
    pub n: Option<usize>,
    pub mode: IdMode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamStats {
    pub n_seen: usize,
    pub m_seen: u64,
    pub total_benefit: Rational,
}

impl Default for StreamStats {
    fn default() -> Self {
        StreamStats { n_seen: 0, m_seen: 0, total_benefit: Rational::zero() }
    }
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: vertex {vertex} appears twice in one edge")]
    DuplicateVertex { line: usize, vertex: VertexId },
    #[error("line {line}: {source}")]
    Weight { line: usize, source: WeightError },
    #[error("line {line}: empty edge (pass --allow-empty-edges to admit dummy edges)")]
    EmptyEdge { line: usize },
    #[error("line {line}: edge id {id} does not exceed previous id {prev}")]
    IdOrder { line: usize, id: EdgeId, prev: EdgeId },
    #[error("line {line}: explicit-id mode requires an id")]
    MissingId { line: usize },
    #[error("line {line}: header must precede all edges")]
    LateHeader { line: usize },
    #[error("vertex {0} carries conflicting benefits")]
    BenefitConflict(VertexId),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    pub allow_empty_edges: bool,
}

/// Lazy reader over the text stream format.
///
/// Leading comments and the optional header are consumed at construction so
/// that [`StreamReader::header`] is available before the first edge.
pub struct StreamReader<R> {
    input: R,
    opts: ParseOptions,
    header: StreamHeader,
    line_no: usize,
    pending: Option<String>,
    prev_id: Option<EdgeId>,
    done: bool,
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(input: R, opts: ParseOptions) -> Result<Self, StreamError> {
        let mut reader = StreamReader {
            input,
            opts,
            header: StreamHeader::default(),
            line_no: 0,
            pending: None,
            prev_id: None,
            done: false,
        };
        if let Some(line) = reader.next_record()? {
            if is_keyword(&line, "h") {
                reader.header = parse_header(&line, reader.line_no)?;
            } else {
                reader.pending = Some(line);
            }
        }
        Ok(reader)
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// Next non-blank, non-comment line, trimmed.
    fn next_record(&mut self) -> Result<Option<String>, StreamError> {
        let mut buf = String::new();
        loop {
            buf.clear();
            if self.input.read_line(&mut buf)? == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let body = match buf.find('#') {
                Some(i) => &buf[..i],
                None => &buf[..],
            };
            let body = body.trim();
            if !body.is_empty() {
                return Ok(Some(body.to_string()));
            }
        }
    }

    fn parse_edge(&mut self, line: &str) -> Result<StreamEdge, StreamError> {
        let line_no = self.line_no;
        let perr = |msg: String| StreamError::Parse { line: line_no, msg };
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("e") => {}
            Some("h") => return Err(StreamError::LateHeader { line: line_no }),
            Some(other) => return Err(perr(format!("unknown record type `{other}`"))),
            None => unreachable!("blank lines are skipped"),
        }
        let id_tok = tokens.next().ok_or_else(|| perr("missing edge id".into()))?;
        let id = if id_tok == "-" {
            if self.header.mode == IdMode::ExplicitId {
                return Err(StreamError::MissingId { line: line_no });
            }
            EdgeId(self.prev_id.map_or(0, |p| p.0 + 1))
        } else {
            EdgeId(id_tok.parse().map_err(|_| perr(format!("bad edge id `{id_tok}`")))?)
        };
        if let Some(prev) = self.prev_id {
            if id <= prev {
                return Err(StreamError::IdOrder { line: line_no, id, prev });
            }
        }
        let cost_tok = tokens.next().ok_or_else(|| perr("missing edge cost".into()))?;
        let cost: Weight = cost_tok.parse().map_err(|source| StreamError::Weight { line: line_no, source })?;

        let mut members = Vec::new();
        let mut seen = BTreeSet::new();
        for tok in tokens {
            let (v, b) =
                tok.split_once(':').ok_or_else(|| perr(format!("member `{tok}` is not <vertex>:<benefit>")))?;
            let v = VertexId(v.parse().map_err(|_| perr(format!("bad vertex id `{v}`")))?);
            let b: Weight = b.parse().map_err(|source| StreamError::Weight { line: line_no, source })?;
            if !seen.insert(v) {
                return Err(StreamError::DuplicateVertex { line: line_no, vertex: v });
            }
            members.push((v, b));
        }
        if members.is_empty() && !self.opts.allow_empty_edges {
            return Err(StreamError::EmptyEdge { line: line_no });
        }
        self.prev_id = Some(id);
        Ok(StreamEdge { id, cost, members })
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<StreamEdge, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let line = match self.pending.take() {
            Some(line) => line,
            None => match self.next_record() {
                Ok(Some(line)) => line,
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            },
        };
        let res = self.parse_edge(&line);
        if res.is_err() {
            self.done = true;
        }
        Some(res)
    }
}

fn is_keyword(line: &str, kw: &str) -> bool {
    line.split_whitespace().next() == Some(kw)
}

fn parse_header(line: &str, line_no: usize) -> Result<StreamHeader, StreamError> {
    let perr = |msg: String| StreamError::Parse { line: line_no, msg };
    let mut header = StreamHeader::default();
    for tok in line.split_whitespace().skip(1) {
        match tok.split_once('=') {
            Some(("n", v)) => header.n = Some(v.parse().map_err(|_| perr(format!("bad vertex count `{v}`")))?),
            Some(("mode", "default")) => header.mode = IdMode::Default,
            Some(("mode", "explicit-id")) => header.mode = IdMode::ExplicitId,
            _ => return Err(perr(format!("unknown header field `{tok}`"))),
        }
    }
    Ok(header)
}

/// Parses a stream held entirely in memory.
pub fn parse_stream(source: impl BufRead, opts: ParseOptions) -> Result<(StreamHeader, Vec<StreamEdge>), StreamError> {
    let reader = StreamReader::new(source, opts)?;
    let header = reader.header().clone();
    let edges = reader.collect::<Result<Vec<_>, _>>()?;
    Ok((header, edges))
}

pub fn parse_str(text: &str, opts: ParseOptions) -> Result<(StreamHeader, Vec<StreamEdge>), StreamError> {
    parse_stream(text.as_bytes(), opts)
}

pub fn write_header(out: &mut impl Write, header: &StreamHeader) -> io::Result<()> {
    match header.n {
        Some(n) => writeln!(out, "h n={} mode={}", n, header.mode.as_str()),
        None => writeln!(out, "h mode={}", header.mode.as_str()),
    }
}

pub fn write_edge(out: &mut impl Write, edge: &StreamEdge) -> io::Result<()> {
    write!(out, "e {} {}", edge.id, edge.cost)?;
    for (v, b) in &edge.members {
        write!(out, " {v}:{b}")?;
    }
    writeln!(out)
}

/// Writes a header (when it carries information) followed by every edge.
pub fn write_stream<'a>(
    out: &mut impl Write,
    header: &StreamHeader,
    edges: impl IntoIterator<Item = &'a StreamEdge>,
) -> io::Result<()> {
    if *header != StreamHeader::default() {
        write_header(out, header)?;
    }
    for edge in edges {
        write_edge(out, edge)?;
    }
    Ok(())
}

pub fn stream_to_string<'a>(header: &StreamHeader, edges: impl IntoIterator<Item = &'a StreamEdge>) -> String {
    let mut buf = Vec::new();
    write_stream(&mut buf, header, edges).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("stream text is ASCII")
}

/// Per-vertex benefit table built incrementally from arriving edges.
#[derive(Clone, Debug, Default)]
pub struct BenefitTable {
    benefits: BTreeMap<VertexId, Weight>,
    total: Rational,
    edges: u64,
}

impl BenefitTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records an edge, failing on the first vertex whose benefit disagrees
    /// with an earlier appearance.
    pub fn observe(&mut self, edge: &StreamEdge) -> Result<(), StreamError> {
        for (v, b) in &edge.members {
            match self.benefits.entry(*v) {
                Entry::Occupied(e) => {
                    if e.get() != b {
                        return Err(StreamError::BenefitConflict(*v));
                    }
                }
                Entry::Vacant(e) => {
                    self.total += b.as_rational();
                    e.insert(b.clone());
                }
            }
        }
        self.edges += 1;
        Ok(())
    }

    pub fn get(&self, v: VertexId) -> Option<&Weight> {
        self.benefits.get(&v)
    }

    pub(crate) fn restore(&mut self, v: VertexId, benefit: Weight) {
        if let Entry::Vacant(e) = self.benefits.entry(v) {
            self.total += benefit.as_rational();
            e.insert(benefit);
        }
    }

    pub(crate) fn set_edge_count(&mut self, m: u64) {
        self.edges = m;
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &Weight)> {
        self.benefits.iter().map(|(v, b)| (*v, b))
    }

    pub fn len(&self) -> usize {
        self.benefits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.benefits.is_empty()
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn stats(&self) -> StreamStats {
        StreamStats { n_seen: self.benefits.len(), m_seen: self.edges, total_benefit: self.total.clone() }
    }
}

/// Checks that each vertex carries a single benefit across the stream.
pub fn check_benefit_consistency<'a>(edges: impl IntoIterator<Item = &'a StreamEdge>) -> Result<(), VertexId> {
    let mut table = BenefitTable::new();
    for edge in edges {
        if let Err(StreamError::BenefitConflict(v)) = table.observe(edge) {
            return Err(v);
        }
    }
    Ok(())
}

pub fn stream_stats<'a>(edges: impl IntoIterator<Item = &'a StreamEdge>) -> Result<StreamStats, StreamError> {
    let mut table = BenefitTable::new();
    for edge in edges {
        table.observe(edge)?;
    }
    Ok(table.stats())
}

impl fmt::Display for StreamStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} m={} b(V)={}", self.n_seen, self.m_seen, render(&self.total_benefit))
    }
}
