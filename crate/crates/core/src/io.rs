//! JSON payloads for functions and dfs, and CSV ingestion of data rows.
//!
//! Numbers travel as strings (`"0.3"`, `"1/3"`) so that parsing is exact.
//! Payload files keep numbers in the textual form they were read with;
//! payloads built from values use a decimal when one is exact and `p/q`
//! otherwise.

use std::fmt;
use std::io::Read;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::families::GridMass;
use crate::monotone::{Knot, MonotoneFn};
use crate::mvdf::{DistributionFunction, Family, MultivariateDf};
use crate::scalar::Scalar;

/// The text of an exact number as it appears in a payload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct NumText(String);

impl NumText {
    pub fn parse(&self) -> Result<Scalar> {
        self.0.parse()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&Scalar> for NumText {
    fn from(s: &Scalar) -> Self {
        NumText(s.to_input_string())
    }
}

struct NumTextVisitor;

impl Visitor<'_> for NumTextVisitor {
    type Value = NumText;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an exact number as a string or an integer")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<NumText, E> {
        Ok(NumText(v.to_string()))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<NumText, E> {
        Ok(NumText(v.to_string()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<NumText, E> {
        Ok(NumText(v.to_string()))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<NumText, E> {
        Err(E::custom(format!(
            "floating-point literal {v} is not exact; quote it as a string"
        )))
    }
}

impl<'de> Deserialize<'de> for NumText {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(NumTextVisitor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotFile {
    pub x: NumText,
    pub left: NumText,
    pub value: NumText,
}

/// `{"knots": [{"x": ..., "left": ..., "value": ...}, ...]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneFnFile {
    pub knots: Vec<KnotFile>,
}

impl MonotoneFnFile {
    pub fn to_fn(&self) -> Result<MonotoneFn> {
        let knots = self
            .knots
            .iter()
            .enumerate()
            .map(|(index, k)| {
                let parse = |t: &NumText| {
                    t.parse().map_err(|e| Error::InvalidKnot {
                        index,
                        reason: e.to_string(),
                    })
                };
                Ok(Knot::new(parse(&k.x)?, parse(&k.left)?, parse(&k.value)?))
            })
            .collect::<Result<Vec<_>>>()?;
        MonotoneFn::new(knots)
    }

    pub fn from_fn(g: &MonotoneFn) -> Self {
        MonotoneFnFile {
            knots: g
                .knots()
                .iter()
                .map(|k| KnotFile {
                    x: (&k.x).into(),
                    left: (&k.left).into(),
                    value: (&k.value).into(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassFile {
    pub point: Vec<NumText>,
    pub mass: NumText,
}

/// `{"family": ..., "dim": d, <payload>}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DfFile {
    Empirical {
        dim: usize,
        rows: Vec<Vec<NumText>>,
    },
    Product {
        dim: usize,
        margins: Vec<MonotoneFnFile>,
    },
    Comonotone {
        dim: usize,
        margins: Vec<MonotoneFnFile>,
    },
    Countermonotone {
        dim: usize,
        margins: Vec<MonotoneFnFile>,
    },
    Grid {
        dim: usize,
        masses: Vec<MassFile>,
    },
}

fn parse_row(row: &[NumText], index: usize) -> Result<Vec<Scalar>> {
    row.iter()
        .enumerate()
        .map(|(column, t)| {
            t.parse().map_err(|e| Error::BadCell {
                row: index + 1,
                column: column + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

fn parse_margins(margins: &[MonotoneFnFile]) -> Result<Vec<MonotoneFn>> {
    margins.iter().map(MonotoneFnFile::to_fn).collect()
}

impl DfFile {
    pub fn dim(&self) -> usize {
        match self {
            DfFile::Empirical { dim, .. }
            | DfFile::Product { dim, .. }
            | DfFile::Comonotone { dim, .. }
            | DfFile::Countermonotone { dim, .. }
            | DfFile::Grid { dim, .. } => *dim,
        }
    }

    pub fn to_df(&self) -> Result<MultivariateDf> {
        let df = match self {
            DfFile::Empirical { rows, .. } => MultivariateDf::empirical(
                rows.iter()
                    .enumerate()
                    .map(|(i, r)| parse_row(r, i))
                    .collect::<Result<_>>()?,
            )?,
            DfFile::Product { margins, .. } => MultivariateDf::product(parse_margins(margins)?)?,
            DfFile::Comonotone { margins, .. } => {
                MultivariateDf::comonotone(parse_margins(margins)?)?
            }
            DfFile::Countermonotone { margins, .. } => {
                MultivariateDf::countermonotone(parse_margins(margins)?)?
            }
            DfFile::Grid { masses, .. } => MultivariateDf::grid(
                masses
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let mass = m.mass.parse().map_err(|e| Error::BadCell {
                            row: i + 1,
                            column: 0,
                            reason: e.to_string(),
                        })?;
                        Ok(GridMass::new(parse_row(&m.point, i)?, mass))
                    })
                    .collect::<Result<_>>()?,
            )?,
        };
        if df.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: df.dim(),
            });
        }
        Ok(df)
    }

    pub fn from_df(f: &MultivariateDf) -> Self {
        let dim = f.dim();
        let fns = |margins: &[MonotoneFn]| margins.iter().map(MonotoneFnFile::from_fn).collect();
        match &f.family {
            Family::Empirical { rows } => DfFile::Empirical {
                dim,
                rows: rows
                    .iter()
                    .map(|r| r.iter().map(NumText::from).collect())
                    .collect(),
            },
            Family::Product { margins } => DfFile::Product {
                dim,
                margins: fns(margins),
            },
            Family::Comonotone { margins } => DfFile::Comonotone {
                dim,
                margins: fns(margins),
            },
            Family::Countermonotone { margins } => DfFile::Countermonotone {
                dim,
                margins: fns(margins),
            },
            Family::Grid { masses } => DfFile::Grid {
                dim,
                masses: masses
                    .iter()
                    .map(|m| MassFile {
                        point: m.point.iter().map(NumText::from).collect(),
                        mass: (&m.mass).into(),
                    })
                    .collect(),
            },
        }
    }
}

/// Either payload kind, told apart by its top-level keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Function(MonotoneFnFile),
    Df(DfFile),
}

impl Payload {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("knots").is_some() {
            Ok(Payload::Function(serde_json::from_value(value)?))
        } else if value.get("family").is_some() {
            Ok(Payload::Df(serde_json::from_value(value)?))
        } else {
            Err(Error::Parse(
                "expected a function payload (\"knots\") or a df payload (\"family\")".into(),
            ))
        }
    }
}

/// Reads one data row per record. With `has_header` the first line is
/// skipped. Errors carry the 1-based line number of the offending record.
pub fn read_empirical_csv<R: Read>(reader: R, has_header: bool) -> Result<MultivariateDf> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut width = None;
    for record in csv.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows.len() + 1);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row: line,
                expected,
                found: record.len(),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(column, cell)| {
                cell.parse().map_err(|e: Error| Error::BadCell {
                    row: line,
                    column: column + 1,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<Scalar>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidFamily("no data rows".into()));
    }
    MultivariateDf::empirical(rows)
}
