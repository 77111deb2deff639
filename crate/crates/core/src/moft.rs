//! Moving-object fact table: raw `(oid, t, x, y)` samples grouped into
//! per-object trajectories with strictly increasing timestamps.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::temporal::Interval;

#[derive(Debug, Error)]
pub enum MoftError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: duplicate sample for object {oid} at t={t}")]
    Duplicate { line: u64, oid: ObjectId, t: f64 },
    #[error("trajectory of {0} is empty")]
    EmptyTrajectory(ObjectId),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl MoftError {
    /// Duplicate timestamps are a data-validation failure; everything else
    /// is a syntax or I/O failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, MoftError::Duplicate { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Self {
        ObjectId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        ObjectId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub oid: ObjectId,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPoint {
    pub t: f64,
    pub p: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    oid: ObjectId,
    samples: Vec<TimedPoint>,
}

impl Trajectory {
    /// Sorts the samples by time; equal timestamps are rejected.
    pub fn new(oid: ObjectId, mut samples: Vec<TimedPoint>) -> Result<Self, MoftError> {
        samples.sort_by(|a, b| a.t.total_cmp(&b.t));
        if let Some(w) = samples.windows(2).find(|w| w[0].t == w[1].t) {
            return Err(MoftError::Duplicate { line: 0, oid, t: w[0].t });
        }
        Ok(Trajectory { oid, samples })
    }

    pub fn oid(&self) -> &ObjectId {
        &self.oid
    }

    pub fn samples(&self) -> &[TimedPoint] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `[t_0, t_N]`.
    pub fn time_domain(&self) -> Result<Interval, MoftError> {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => Ok(Interval::new(a.t, b.t).expect("sorted finite timestamps")),
            _ => Err(MoftError::EmptyTrajectory(self.oid.clone())),
        }
    }
}

/// Per-object trajectories, ordered by object id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Moft {
    trajectories: Vec<Trajectory>,
}

fn parse_real(field: &str, value: &str, line: u64) -> Result<f64, MoftError> {
    let v: f64 = value.trim().parse().map_err(|_| MoftError::Parse {
        line,
        message: format!("{field} is not a decimal number: {value:?}"),
    })?;
    if !v.is_finite() {
        return Err(MoftError::Parse { line, message: format!("{field} is not finite: {value:?}") });
    }
    Ok(v)
}

impl Moft {
    pub fn from_samples(samples: impl IntoIterator<Item = Sample>) -> Result<Self, MoftError> {
        let mut groups: BTreeMap<ObjectId, Vec<TimedPoint>> = BTreeMap::new();
        for s in samples {
            groups
                .entry(s.oid)
                .or_default()
                .push(TimedPoint { t: s.t, p: Point::new(s.x, s.y) });
        }
        let trajectories = groups
            .into_iter()
            .map(|(oid, pts)| Trajectory::new(oid, pts))
            .collect::<Result<_, _>>()?;
        Ok(Moft { trajectories })
    }

    /// Reads CSV with header `oid,t,x,y`. Rows may come in any order.
    pub fn read_csv<R: Read>(source: R) -> Result<Self, MoftError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let headers = reader.headers().map_err(|e| MoftError::Parse { line: 1, message: e.to_string() })?;
        if headers.iter().collect::<Vec<_>>() != ["oid", "t", "x", "y"] {
            return Err(MoftError::Parse {
                line: 1,
                message: format!("expected header oid,t,x,y, got {}", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        // (oid, t bits) -> first line seen
        let mut seen: BTreeMap<(ObjectId, u64), u64> = BTreeMap::new();
        let mut samples = Vec::new();
        let mut record = csv::StringRecord::new();
        loop {
            match reader.read_record(&mut record) {
                Ok(true) => {}
                Ok(false) => break,
                Err(e) => {
                    return Err(MoftError::Parse {
                        line: e.position().map_or(0, |p| p.line()),
                        message: e.to_string(),
                    })
                }
            }
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 4 {
                return Err(MoftError::Parse { line, message: format!("expected 4 fields, got {}", record.len()) });
            }
            if record[0].is_empty() {
                return Err(MoftError::Parse { line, message: "empty oid".into() });
            }
            let oid = ObjectId(record[0].to_owned());
            let t = parse_real("t", &record[1], line)?;
            let x = parse_real("x", &record[2], line)?;
            let y = parse_real("y", &record[3], line)?;
            let key = (oid.clone(), (t + 0.0).to_bits());
            if seen.insert(key, line).is_some() {
                return Err(MoftError::Duplicate { line, oid, t });
            }
            samples.push(Sample { oid, t, x, y });
        }
        Self::from_samples(samples)
    }

    /// Writes CSV that reads back to an identical table.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "oid,t,x,y")?;
        for tr in &self.trajectories {
            for s in &tr.samples {
                writeln!(sink, "{},{:?},{:?},{:?}", tr.oid, s.t, s.p.x, s.p.y)?;
            }
        }
        Ok(())
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn trajectory(&self, oid: &ObjectId) -> Option<&Trajectory> {
        self.trajectories
            .binary_search_by(|t| t.oid.cmp(oid))
            .ok()
            .map(|i| &self.trajectories[i])
    }

    pub fn len(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        self.trajectories.iter().flat_map(|tr| {
            tr.samples.iter().map(move |s| Sample { oid: tr.oid.clone(), t: s.t, x: s.p.x, y: s.p.y })
        })
    }
}
