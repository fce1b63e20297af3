use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use sscover::cover::Effectiveness;
use sscover::weight::{render, to_decimal, Rational};

pub const SCHEMA_VERSION: u32 = 1;
const DECIMAL_PLACES: usize = 6;

/// An exact rational with a rounded decimal rendering next to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exact {
    pub exact: String,
    pub decimal: String,
}

impl Exact {
    pub fn new(value: &Rational) -> Self {
        Exact { exact: render(value), decimal: to_decimal(value, DECIMAL_PLACES) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StreamSection {
    pub n: usize,
    pub m: u64,
    pub edges_visited: u64,
    pub total_benefit: Exact,
    pub comparisons: u64,
    pub pow2_rounded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptSection {
    pub solver: String,
    pub cost: Exact,
    pub size: usize,
    pub proven_optimal: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruthSection {
    pub generator: String,
    pub r: Option<u32>,
    pub witness_size: usize,
    pub star: Option<u64>,
    pub iota: Option<u32>,
    pub dummy_edges: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    /// `lemma4` above the regime boundary, `thm4` below it.
    pub name: &'static str,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationOutcome {
    pub verdict: Verdict,
    /// Coverage level the certificate was checked against.
    pub epsilon: Option<Exact>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtractionRecord {
    pub epsilon: Exact,
    pub regime: String,
    pub r_star: String,
    pub dom_benefit: Exact,
    pub coverage_fraction: Exact,
    pub im_size: usize,
    pub im_cost: Exact,
    pub im_cost_over_opt: Option<Exact>,
    pub im_size_over_opt_size: Option<Exact>,
    pub validation: ValidationOutcome,
    pub bound: BoundCheck,
}

#[derive(Clone, Debug, Serialize)]
pub struct Observations {
    /// Whether `c(Im)` never decreases as ε decreases along the grid.
    pub im_cost_monotone: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub source: BTreeMap<String, String>,
    pub stream: StreamSection,
    pub truth: Option<TruthSection>,
    pub opt: Option<OptSection>,
    /// `b(I(≤ r)) < 2^(r+1)·c(OPT)` over both effectiveness tables.
    pub lemma2: Verdict,
    pub extractions: Vec<ExtractionRecord>,
    pub observations: Observations,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u128>>,
}

impl Report {
    pub fn validation_failures(&self) -> Vec<String> {
        self.extractions
            .iter()
            .filter(|x| x.validation.verdict == Verdict::Fail)
            .map(|x| format!("epsilon {}: {}", x.epsilon.exact, x.validation.detail.as_deref().unwrap_or("invalid")))
            .collect()
    }

    pub fn bound_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.lemma2 == Verdict::Fail {
            out.push("lemma2 prefix-benefit bound violated".to_string());
        }
        for x in &self.extractions {
            if x.bound.verdict == Verdict::Fail {
                out.push(format!("epsilon {}: {} bound violated", x.epsilon.exact, x.bound.name));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per extraction.
    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "epsilon",
            "epsilon_decimal",
            "regime",
            "r_star",
            "dom_benefit",
            "coverage_fraction",
            "coverage_decimal",
            "im_size",
            "im_cost",
            "im_cost_decimal",
            "im_cost_over_opt",
            "validation",
            "bound",
        ])?;
        for x in &self.extractions {
            let verdict = |v: Verdict| match v {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
                Verdict::Skipped => "skipped",
            };
            w.write_record([
                x.epsilon.exact.as_str(),
                x.epsilon.decimal.as_str(),
                x.regime.as_str(),
                x.r_star.as_str(),
                x.dom_benefit.exact.as_str(),
                x.coverage_fraction.exact.as_str(),
                x.coverage_fraction.decimal.as_str(),
                &x.im_size.to_string(),
                x.im_cost.exact.as_str(),
                x.im_cost.decimal.as_str(),
                x.im_cost_over_opt.as_ref().map_or("", |r| r.exact.as_str()),
                verdict(x.validation.verdict),
                verdict(x.bound.verdict),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn render_r_star(r: Effectiveness) -> String {
    match r {
        Effectiveness::Bottom => "bottom".to_string(),
        Effectiveness::Level(k) => k.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sscover::weight::parse_rational;

    #[test]
    fn exact_values_carry_both_forms() {
        let e = Exact::new(&parse_rational("2/3").unwrap());
        assert_eq!(e.exact, "2/3");
        assert_eq!(e.decimal, "0.666667");
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"exact":"2/3","decimal":"0.666667"}"#);
    }

    #[test]
    fn verdicts_serialize_lowercase() {
        assert_eq!(serde_json::to_string(&Verdict::Skipped).unwrap(), "\"skipped\"");
    }
}
