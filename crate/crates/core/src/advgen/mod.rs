//! Instance generators: affine-plane adversarial streams and random
//! weighted hypergraphs, each a pure function of its parameters and seed.
//!
//! Generators implement [`InstanceGenerator`] and are selected by name from a
//! [`GeneratorRegistry`] (`certified`, `uncertified`, `random`).

mod certified;
pub mod gf;
pub mod plane;
mod random;
mod uncertified;

pub use certified::gen_certified;
pub use gf::GaloisField;
pub use plane::{build_affine_plane, verify_plane, AffinePlane, Line, PlaneViolation};
pub use random::{gen_random, RandomParams};
pub use uncertified::{gen_uncertified, IdLayout, UncertifiedParams};

use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::stream::{EdgeId, StreamEdge, StreamHeader};
use crate::weight::{render, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("{0}")]
    Domain(String),
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("construction failed: {0}")]
    Construction(String),
}

/// Hidden ground truth of a generated instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Truth {
    pub kind: &'static str,
    pub seed: u64,
    pub q: Option<u32>,
    pub r: Option<u32>,
    pub epsilon: Option<Rational>,
    pub alpha: Option<Rational>,
    /// Chosen angle (0-based).
    pub angle: Option<usize>,
    /// Chosen line indices within the angle, ascending (0-based).
    pub chosen_lines: Vec<usize>,
    /// Edge ids of the parts of each line, by global line index.
    pub line_parts: Vec<Vec<EdgeId>>,
    /// A full cover known by construction (ascending ids).
    pub opt_witness: Vec<EdgeId>,
    pub star: Option<EdgeId>,
    pub iota: Option<u32>,
    pub dummy_count: Option<u64>,
    /// Smallest and largest line part.
    pub part_sizes: Option<(usize, usize)>,
}

/// A generated edge stream together with its ground truth.
#[derive(Clone, Debug)]
pub struct LowerBoundInstance {
    pub header: StreamHeader,
    pub stream: Vec<StreamEdge>,
    pub truth: Truth,
}

/// Writes the truth sidecar: one `t <key> <values...>` row per field.
pub fn write_truth(out: &mut impl Write, truth: &Truth) -> io::Result<()> {
    let ids = |v: &[EdgeId]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "t kind {}", truth.kind)?;
    writeln!(out, "t seed {}", truth.seed)?;
    if let Some(q) = truth.q {
        writeln!(out, "t q {q}")?;
    }
    if let Some(r) = truth.r {
        writeln!(out, "t r {r}")?;
    }
    if let Some(e) = &truth.epsilon {
        writeln!(out, "t epsilon {}", render(e))?;
    }
    if let Some(a) = &truth.alpha {
        writeln!(out, "t alpha {}", render(a))?;
    }
    if let Some(a) = truth.angle {
        writeln!(out, "t angle {a}")?;
    }
    if !truth.chosen_lines.is_empty() {
        let js: Vec<String> = truth.chosen_lines.iter().map(|j| j.to_string()).collect();
        writeln!(out, "t lines {}", js.join(" "))?;
    }
    if let Some(s) = truth.star {
        writeln!(out, "t star {s}")?;
    }
    if let Some(i) = truth.iota {
        writeln!(out, "t iota {i}")?;
    }
    if let Some(d) = truth.dummy_count {
        writeln!(out, "t dummies {d}")?;
    }
    if let Some((lo, hi)) = truth.part_sizes {
        writeln!(out, "t part_sizes {lo} {hi}")?;
    }
    if !truth.opt_witness.is_empty() {
        writeln!(out, "t witness {}", ids(&truth.opt_witness))?;
    }
    for (i, parts) in truth.line_parts.iter().enumerate() {
        writeln!(out, "t line {i} {}", ids(parts))?;
    }
    Ok(())
}

pub fn truth_to_string(truth: &Truth) -> String {
    let mut buf = Vec::new();
    write_truth(&mut buf, truth).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("truth text is ASCII")
}

/// Union of generator parameters; each generator reads what it needs.
#[derive(Clone, Debug)]
pub struct GenParams {
    pub q: Option<u32>,
    pub epsilon: Option<Rational>,
    /// Sets `ε = r/(3q)` when no epsilon is given.
    pub r: Option<u32>,
    pub alpha: Option<Rational>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub unit: bool,
    pub max_weight: u64,
    pub max_edge_size: Option<usize>,
    pub relax_range: bool,
    pub materialize_dummies: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            q: None,
            epsilon: None,
            r: None,
            alpha: None,
            n: None,
            m: None,
            unit: false,
            max_weight: 16,
            max_edge_size: None,
            relax_range: false,
            materialize_dummies: false,
        }
    }
}

impl GenParams {
    fn need_q(&self) -> Result<u32, GenError> {
        self.q.ok_or(GenError::MissingParam("q"))
    }

    /// Explicit ε, or `r/(3q)` from an explicit `r`.
    fn resolve_epsilon(&self, q: u32) -> Result<Rational, GenError> {
        match (&self.epsilon, self.r) {
            (Some(e), _) => Ok(e.clone()),
            (None, Some(r)) => Ok(Rational::new(BigInt::from(r), BigInt::from(3 * q))),
            (None, None) => Err(GenError::MissingParam("epsilon")),
        }
    }
}

pub trait InstanceGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate(&self, params: &GenParams, seed: u64) -> Result<LowerBoundInstance, GenError>;
}

pub struct Certified;

impl InstanceGenerator for Certified {
    fn name(&self) -> &'static str {
        "certified"
    }

    fn generate(&self, params: &GenParams, seed: u64) -> Result<LowerBoundInstance, GenError> {
        let q = params.need_q()?;
        let eps = params.resolve_epsilon(q)?;
        gen_certified(q, &eps, seed, params.relax_range)
    }
}

pub struct Uncertified;

impl InstanceGenerator for Uncertified {
    fn name(&self) -> &'static str {
        "uncertified"
    }

    fn generate(&self, params: &GenParams, seed: u64) -> Result<LowerBoundInstance, GenError> {
        let q = params.need_q()?;
        let p = UncertifiedParams {
            q,
            alpha: params.alpha.clone().ok_or(GenError::MissingParam("alpha"))?,
            epsilon: params.resolve_epsilon(q)?,
            materialize_dummies: params.materialize_dummies,
            relax_range: params.relax_range,
        };
        gen_uncertified(&p, seed)
    }
}

pub struct Random;

impl InstanceGenerator for Random {
    fn name(&self) -> &'static str {
        "random"
    }

    fn generate(&self, params: &GenParams, seed: u64) -> Result<LowerBoundInstance, GenError> {
        let p = RandomParams {
            n: params.n.ok_or(GenError::MissingParam("n"))?,
            m: params.m.ok_or(GenError::MissingParam("m"))?,
            unit: params.unit,
            max_weight: params.max_weight,
            max_edge_size: params.max_edge_size,
        };
        gen_random(&p, seed)
    }
}

pub struct GeneratorRegistry {
    generators: Vec<Box<dyn InstanceGenerator>>,
}

impl GeneratorRegistry {
    pub fn empty() -> Self {
        GeneratorRegistry { generators: Vec::new() }
    }

    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Certified));
        reg.register(Box::new(Uncertified));
        reg.register(Box::new(Random));
        reg
    }

    /// Adds a generator, replacing any previous one with the same name.
    pub fn register(&mut self, generator: Box<dyn InstanceGenerator>) {
        self.generators.retain(|g| g.name() != generator.name());
        self.generators.push(generator);
    }

    pub fn get(&self, name: &str) -> Result<&dyn InstanceGenerator, GenError> {
        self.generators
            .iter()
            .find(|g| g.name() == name)
            .map(|g| g.as_ref())
            .ok_or_else(|| GenError::UnknownGenerator(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.generators.iter().map(|g| g.name()).collect()
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `r = ⌈3·ε·q⌉`.
pub(crate) fn lines_removed(epsilon: &Rational, q: u32) -> Result<u32, GenError> {
    if !epsilon.is_positive() {
        return Err(GenError::Domain(format!("epsilon must be positive, got {}", render(epsilon))));
    }
    let x = epsilon * Rational::from_integer(BigInt::from(3 * q));
    let r = x.numer().div_ceil(x.denom());
    u32::try_from(&r).map_err(|_| GenError::Domain(format!("r = {r} is too large")))
}

/// `1/(3q) ≤ ε ≤ 1/66 − 1/(3q)`.
pub(crate) fn in_certified_range(epsilon: &Rational, q: u32) -> bool {
    let third = Rational::new(BigInt::one(), BigInt::from(3 * q));
    let upper = Rational::new(BigInt::one(), BigInt::from(66)) - &third;
    *epsilon >= third && *epsilon <= upper
}
