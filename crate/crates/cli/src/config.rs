use std::collections::BTreeMap;
use std::path::PathBuf;

use sscover::advgen::GenParams;
use sscover::oracles::DEFAULT_NODE_BUDGET;
use sscover::weight::{parse_rational, render, Rational};

use crate::error::CliError;

/// Where the edge stream comes from.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Source {
    File(PathBuf),
    Generator { kind: String, params: GenParams, seed: u64 },
}

impl Source {
    /// Parameters as they appear in reports.
    pub fn describe(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        match self {
            Source::File(path) => {
                out.insert("kind".into(), "file".into());
                out.insert("path".into(), path.display().to_string());
            }
            Source::Generator { kind, params, seed } => {
                out.insert("kind".into(), "generator".into());
                out.insert("generator".into(), kind.clone());
                out.insert("seed".into(), seed.to_string());
                let mut put = |k: &str, v: Option<String>| {
                    if let Some(v) = v {
                        out.insert(k.into(), v);
                    }
                };
                put("q", params.q.map(|x| x.to_string()));
                put("r", params.r.map(|x| x.to_string()));
                put("epsilon", params.epsilon.as_ref().map(render));
                put("alpha", params.alpha.as_ref().map(render));
                put("n", params.n.map(|x| x.to_string()));
                put("m", params.m.map(|x| x.to_string()));
                put("max_edge_size", params.max_edge_size.map(|x| x.to_string()));
                if kind == "random" {
                    put("unit", Some(params.unit.to_string()));
                    put("max_weight", Some(params.max_weight.to_string()));
                }
                if params.relax_range {
                    put("relax_range", Some("true".into()));
                }
                if params.materialize_dummies {
                    put("materialize_dummies", Some("true".into()));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Registry name of the offline solver.
    pub solver: String,
    /// Instances with more edges are not handed to the solver.
    pub max_edges: usize,
    pub budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { solver: "exact".into(), max_edges: 128, budget: DEFAULT_NODE_BUDGET }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: Source,
    pub epsilons: Vec<Rational>,
    pub allow_empty_edges: bool,
    /// Round every weight down to a power of two before streaming.
    pub pow2_round: bool,
    /// Keep a membership log next to the pass and validate every certificate.
    pub validate: bool,
    pub oracle: Option<OracleConfig>,
    /// Include wall-clock timings (makes reports non-reproducible).
    pub timings: bool,
}

impl RunConfig {
    pub fn new(source: Source, epsilons: Vec<Rational>) -> Self {
        RunConfig {
            source,
            epsilons,
            allow_empty_edges: false,
            pow2_round: false,
            validate: true,
            oracle: Some(OracleConfig::default()),
            timings: false,
        }
    }
}

/// Parses a comma-separated list of exact rationals in `[0, 1)`.
/// The empty string yields an empty list.
pub fn parse_epsilons(list: &str) -> Result<Vec<Rational>, CliError> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse_epsilon).collect()
}

pub fn parse_epsilon(s: &str) -> Result<Rational, CliError> {
    let eps = parse_rational(s).map_err(|e| CliError::usage(format!("epsilon `{s}`: {e}")))?;
    if eps < Rational::from_integer(0.into()) || eps >= Rational::from_integer(1.into()) {
        return Err(CliError::usage(format!("epsilon must lie in [0, 1), got {s}")));
    }
    Ok(eps)
}
