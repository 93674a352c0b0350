//! Reading metric spaces and maps.
//!
//! A space is JSON `{"points": [...], "dist": [[...]]}` or a CSV distance
//! matrix with an optional header row of labels. Entries that are strings
//! such as `"1/9"` or integers make an exact space; any non-integer number
//! makes the whole space approximate.
//!
//! A map is a JSON array of target indices, where `null` marks a point
//! outside the domain, optionally wrapped as `{"permutation": [...]}`, or
//! the same indices as whitespace or comma separated text.

use std::path::Path;

use num_rational::BigRational;
use serde_json::Value;

use super::{FiniteMetricSpace, PointMap};
use crate::error::{Error, Result};
use crate::scalar::parse_rational;

#[derive(Clone, Debug, PartialEq)]
pub enum AnySpace {
    Exact(FiniteMetricSpace<BigRational>),
    Approx(FiniteMetricSpace<f64>),
}

impl AnySpace {
    pub fn len(&self) -> usize {
        match self {
            AnySpace::Exact(s) => s.len(),
            AnySpace::Approx(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnySpace::Exact(_))
    }
}

enum Entry {
    Exact(BigRational),
    Float(f64),
}

fn parse_error(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        what: "metric space",
        input: input.chars().take(60).collect(),
        reason: reason.into(),
    }
}

fn entry_from_text(t: &str) -> Result<Entry> {
    let t = t.trim();
    if let Ok(r) = parse_rational(t) {
        return Ok(Entry::Exact(r));
    }
    t.parse::<f64>()
        .map(Entry::Float)
        .map_err(|_| parse_error(t, "not a number or rational"))
}

fn entry_from_json(v: &Value) -> Result<Entry> {
    match v {
        Value::String(s) => entry_from_text(s),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Entry::Exact(BigRational::from_integer(i.into()))),
            None => n
                .as_f64()
                .map(Entry::Float)
                .ok_or_else(|| parse_error(&n.to_string(), "number out of range")),
        },
        other => Err(parse_error(&other.to_string(), "distance must be a string or number")),
    }
}

fn build(labels: Vec<String>, rows: Vec<Vec<Entry>>) -> Result<AnySpace> {
    let approx = rows.iter().flatten().any(|e| matches!(e, Entry::Float(_)));
    if approx {
        let dist = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e {
                        Entry::Float(f) => f,
                        Entry::Exact(q) => super::MetricScalar::to_f64(&q),
                    })
                    .collect()
            })
            .collect();
        Ok(AnySpace::Approx(FiniteMetricSpace::new(labels, dist)?))
    } else {
        let dist = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e {
                        Entry::Exact(q) => q,
                        Entry::Float(_) => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        Ok(AnySpace::Exact(FiniteMetricSpace::new(labels, dist)?))
    }
}

fn parse_json_space(text: &str) -> Result<AnySpace> {
    let v: Value = serde_json::from_str(text)?;
    let dist = v
        .get("dist")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_error(text, "missing \"dist\" array"))?;
    let rows = dist
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| parse_error(&row.to_string(), "row is not an array"))?
                .iter()
                .map(entry_from_json)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = match v.get("points") {
        Some(Value::Array(ps)) => ps
            .iter()
            .map(|p| match p {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect(),
        Some(_) => return Err(parse_error(text, "\"points\" is not an array")),
        None => (0..rows.len()).map(|i| i.to_string()).collect(),
    };
    build(labels, rows)
}

fn parse_csv_space(text: &str) -> Result<AnySpace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        records.push(rec?.iter().map(str::to_string).collect());
    }
    let header = records
        .first()
        .is_some_and(|r| r.iter().any(|t| entry_from_text(t).is_err()));
    let labels = if header {
        records.remove(0)
    } else {
        (0..records.len()).map(|i| i.to_string()).collect()
    };
    let rows = records
        .iter()
        .map(|r| r.iter().map(|t| entry_from_text(t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    build(labels, rows)
}

/// Parses a space, choosing JSON when the text starts with `{`.
pub fn parse_space(text: &str) -> Result<AnySpace> {
    if text.trim_start().starts_with('{') {
        parse_json_space(text)
    } else {
        parse_csv_space(text)
    }
}

pub fn read_space(path: &Path) -> Result<AnySpace> {
    parse_space(&std::fs::read_to_string(path)?)
}

fn map_error(input: &str, reason: &str) -> Error {
    Error::Parse {
        what: "point map",
        input: input.chars().take(60).collect(),
        reason: reason.into(),
    }
}

pub fn parse_map(text: &str) -> Result<PointMap> {
    let t = text.trim();
    let images: Vec<Option<usize>> = if t.starts_with('[') || t.starts_with('{') {
        let v: Value = serde_json::from_str(t)?;
        let arr = match &v {
            Value::Array(a) => a,
            Value::Object(o) => o
                .get("permutation")
                .or_else(|| o.get("map"))
                .and_then(Value::as_array)
                .ok_or_else(|| map_error(t, "expected a \"permutation\" array"))?,
            _ => unreachable!(),
        };
        arr.iter()
            .map(|x| match x {
                Value::Null => Ok(None),
                Value::Number(n) => n
                    .as_u64()
                    .map(|i| Some(i as usize))
                    .ok_or_else(|| map_error(t, "indices must be nonnegative integers")),
                _ => Err(map_error(t, "indices must be integers or null")),
            })
            .collect::<Result<_>>()?
    } else {
        t.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "-" | "null" => Ok(None),
                _ => s.parse().map(Some).map_err(|_| map_error(t, "bad index")),
            })
            .collect::<Result<_>>()?
    };
    PointMap::new(images)
}

pub fn read_map(path: &Path) -> Result<PointMap> {
    parse_map(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_exact_and_approximate() {
        let s = parse_space(r#"{"points":["x","y","z"],"dist":[[0,"1/3","1/3"],["1/3",0,"1/9"],["1/3","1/9",0]]}"#)
            .unwrap();
        assert!(s.is_exact());
        assert_eq!(s.len(), 3);
        let a = parse_space(r#"{"points":[0,1,2],"dist":[[0,0.5,1],[0.5,0,0.5],[1,0.5,0]]}"#).unwrap();
        assert!(!a.is_exact());
    }

    #[test]
    fn csv_with_and_without_header() {
        let s = parse_space("a,b,c\n0,1/3,1/3\n1/3,0,1/9\n1/3,1/9,0\n").unwrap();
        let AnySpace::Exact(e) = s else { panic!() };
        assert_eq!(e.labels(), ["a", "b", "c"]);
        let s = parse_space("0,1.5\n1.5,0\n").unwrap();
        assert!(!s.is_exact());
    }

    #[test]
    fn triangle_violation_is_a_metric_error() {
        let e = parse_space("0,1,5\n1,0,1\n5,1,0\n").unwrap_err();
        assert!(matches!(e, Error::MetricAxiom(_)));
    }

    #[test]
    fn map_formats() {
        assert_eq!(
            parse_map("[1,0,2]").unwrap(),
            PointMap::from_permutation(vec![1, 0, 2]).unwrap()
        );
        assert_eq!(parse_map(r#"{"permutation":[1,null]}"#).unwrap().domain(), vec![0]);
        assert_eq!(parse_map("2 0 1").unwrap().apply(0), Some(2));
        assert!(parse_map("[0,0]").is_err());
        assert!(parse_map("[x]").is_err());
    }
}
