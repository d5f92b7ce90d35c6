//! Verification reports and their JSON and CSV encodings.
//!
//! Floats are written with 17 significant digits so that they round-trip;
//! non-finite values become `null`.

use std::collections::BTreeMap;
use std::io::Write;

use anyhow::{Context, Result};
use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

fn float_token(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

mod float {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match float_token(*v) {
            Some(t) => RawValue::from_string(t).map_err(S::Error::custom)?.serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

mod opt_float {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => float::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<f64>::deserialize(d)
    }
}

/// A parameter value: integers stay integers in the output.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Param::Int(v) => s.serialize_i64(*v),
            Param::Real(v) => float::serialize(v, s),
            Param::Text(v) => s.serialize_str(v),
        }
    }
}

impl Param {
    fn csv_field(&self) -> String {
        match self {
            Param::Int(v) => v.to_string(),
            Param::Real(v) => float_token(*v).unwrap_or_default(),
            Param::Text(v) => v.clone(),
        }
    }
}

impl From<u32> for Param {
    fn from(v: u32) -> Self {
        Param::Int(v as i64)
    }
}

impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Int(v as i64)
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Real(v)
    }
}

impl From<&str> for Param {
    fn from(v: &str) -> Self {
        Param::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub parameters: BTreeMap<String, Param>,
    pub samples: u64,
    #[serde(with = "float")]
    pub worst_margin: f64,
    #[serde(with = "float")]
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_ms: u64,
    pub seed: u64,
    /// The headline number of the claim, when there is one.
    #[serde(with = "opt_float", default)]
    pub value: Option<f64>,
}

impl VerificationReport {
    /// A report whose verdict is `worst_margin ≥ 0`.
    pub fn new(claim_id: &str, worst_margin: f64, tolerance: f64) -> Self {
        VerificationReport {
            claim_id: claim_id.to_string(),
            parameters: BTreeMap::new(),
            samples: 0,
            worst_margin,
            tolerance,
            passed: worst_margin >= 0.0,
            runtime_ms: 0,
            seed: 0,
            value: None,
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<Param>) -> Self {
        self.parameters.insert(key.to_string(), v.into());
        self
    }

    pub fn samples(mut self, n: usize) -> Self {
        self.samples = n as u64;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }
}

pub const CSV_COLUMNS: [&str; 9] =
    ["claim_id", "k", "lambda", "samples", "worst_margin", "tolerance", "passed", "runtime_ms", "seed"];

pub fn write_json<W: Write>(reports: &[VerificationReport], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, reports)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_csv<W: Write>(reports: &[VerificationReport], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    for r in reports {
        let get = |key: &str| r.parameters.get(key).map(Param::csv_field).unwrap_or_default();
        out.write_record([
            r.claim_id.clone(),
            get("k"),
            get("lambda"),
            r.samples.to_string(),
            float_token(r.worst_margin).unwrap_or_default(),
            float_token(r.tolerance).unwrap_or_default(),
            r.passed.to_string(),
            r.runtime_ms.to_string(),
            r.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_json(text: &str) -> Result<Vec<VerificationReport>> {
    serde_json::from_str(text).context("report file is not a JSON array of reports")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        VerificationReport::new("chern.clifford", 1e-6 - 3.2e-14, 1e-6)
            .param("k", 3u32)
            .param("lambda", 64.0)
            .param("mode", "clifford")
            .samples(65536)
            .seed(7)
            .value(2.0 * std::f64::consts::PI * 3.0)
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut buf = Vec::new();
        write_json(&[sample()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("1.8849555921538759e1"), "{text}");
        assert!(!text.contains('\r'));
        assert_eq!(read_json(&text).unwrap(), vec![sample()]);
    }

    #[test]
    fn nonfinite_becomes_null() {
        let mut r = VerificationReport::new("x", f64::NEG_INFINITY, 0.0);
        r.value = Some(f64::NAN);
        let mut buf = Vec::new();
        write_json(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"worst_margin\": null") && text.contains("\"value\": null"));
        let back = read_json(&text).unwrap();
        assert!(back[0].worst_margin.is_nan() && back[0].value.is_none() && !back[0].passed);
    }

    #[test]
    fn csv_column_order() {
        let mut buf = Vec::new();
        write_csv(&[sample(), VerificationReport::new("green.ode", 1e-8, 1e-8)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines[1].starts_with("chern.clifford,3,6.4000000000000000e1,65536,"));
        assert!(lines[1].ends_with(",true,0,7"));
        assert!(lines[2].starts_with("green.ode,,,0,"));
    }

    #[test]
    fn verdict_follows_margin() {
        assert!(VerificationReport::new("a", 0.0, 0.0).passed);
        assert!(!VerificationReport::new("a", -1e-300, 0.0).passed);
        assert!(!VerificationReport::new("a", f64::NAN, 0.0).passed);
    }
}
