//! Places of interest, stop and move detection, and the compressed stops
//! fact table (SM-MOFT) of `(oid, gid, ts, tf)` records.
//!
//! A stop is a maximal run of consecutive samples that all lie in the same
//! PoI and whose first and last timestamps are more than the PoI's minimum
//! duration apart. Detection is a single pass with one point query per
//! sample.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{self, Geometry, GeometryError, GeometryId, SpatialIndex};
use crate::moft::{Moft, ObjectId, Trajectory};
use crate::numfmt::format_real;
use crate::temporal::Interval;

#[derive(Debug, Error)]
pub enum StopsError {
    #[error("PoI {pid}: minimum duration must be a positive finite number, got {delta}")]
    BadDelta { pid: String, delta: f64 },
    #[error("PoI {pid}: tolerance must be finite and non-negative, got {tol}")]
    BadTolerance { pid: String, tol: f64 },
    #[error("duplicate PoI id {0}")]
    DuplicatePid(String),
    #[error("geometry {0} is used by more than one PoI")]
    DuplicateGeometry(GeometryId),
    #[error("PoIs {first} and {second} have intersecting geometries")]
    Overlap { first: String, second: String },
    #[error("a PIA needs at least one PoI")]
    Empty,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: stop of {oid} at {gid} overlaps the previous stop of that object")]
    OverlappingRecords { line: u64, oid: ObjectId, gid: GeometryId },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Place of interest: a geometry with a minimum stop duration.
#[derive(Debug, Clone, PartialEq)]
pub struct PoI {
    pub pid: String,
    pub dimension: String,
    pub geometry_id: GeometryId,
    pub geometry: Geometry,
    pub delta: f64,
    /// Containment band for polyline and point geometries.
    pub tol: f64,
}

/// The PoIs of an application, with mutually disjoint geometries, plus the
/// point-location index over them.
#[derive(Debug, Clone)]
pub struct Pia {
    pois: Vec<PoI>,
    index: Option<SpatialIndex>,
}

impl Pia {
    /// Validates a PoI collection. All violations are reported.
    pub fn new(pois: Vec<PoI>) -> Result<Self, Vec<StopsError>> {
        let mut errors = Vec::new();
        let mut pids = BTreeSet::new();
        let mut gids = BTreeSet::new();
        for p in &pois {
            if !(p.delta.is_finite() && p.delta > 0.0) {
                errors.push(StopsError::BadDelta { pid: p.pid.clone(), delta: p.delta });
            }
            if !(p.tol.is_finite() && p.tol >= 0.0) {
                errors.push(StopsError::BadTolerance { pid: p.pid.clone(), tol: p.tol });
            }
            if !pids.insert(p.pid.as_str()) {
                errors.push(StopsError::DuplicatePid(p.pid.clone()));
            }
            if !gids.insert(&p.geometry_id) {
                errors.push(StopsError::DuplicateGeometry(p.geometry_id.clone()));
            }
        }
        if errors.is_empty() {
            let banded: Vec<(&Geometry, f64)> = pois.iter().map(|p| (&p.geometry, p.tol)).collect();
            for (i, j) in geometry::all_overlaps(&banded) {
                errors.push(StopsError::Overlap { first: pois[i].pid.clone(), second: pois[j].pid.clone() });
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let index = if pois.is_empty() {
            None
        } else {
            Some(
                SpatialIndex::build_with_tolerance(
                    pois.iter()
                        .map(|p| (p.geometry_id.clone(), p.geometry.clone(), p.tol))
                        .collect(),
                )
                .map_err(|e| vec![e.into()])?,
            )
        };
        Ok(Pia { pois, index })
    }

    pub fn pois(&self) -> &[PoI] {
        &self.pois
    }

    pub fn index(&self) -> Option<&SpatialIndex> {
        self.index.as_ref()
    }

    pub fn by_geometry(&self, gid: &GeometryId) -> Option<&PoI> {
        self.pois.iter().find(|p| &p.geometry_id == gid)
    }

    /// The PoI (by position) containing `p`, if any.
    pub fn locate(&self, p: &geometry::Point) -> Option<usize> {
        self.index.as_ref()?.first_hit(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stop {
    /// Position of the PoI in the PIA.
    pub poi: usize,
    pub first_index: usize,
    pub last_index: usize,
    pub interval: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    BetweenStops,
    BeforeFirstStop,
    AfterLastStop,
    WholeTrajectory,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub first_index: usize,
    pub last_index: usize,
}

/// Stops of `tr` in temporal order.
pub fn detect_stops(tr: &Trajectory, pia: &Pia) -> Vec<Stop> {
    let samples = tr.samples();
    let mut stops = Vec::new();
    // (poi, first sample index) of the run in progress
    let mut run: Option<(usize, usize)> = None;
    let close = |run: Option<(usize, usize)>, last: usize, stops: &mut Vec<Stop>| {
        if let Some((poi, first)) = run {
            let (ts, tf) = (samples[first].t, samples[last].t);
            if tf - ts > pia.pois[poi].delta {
                stops.push(Stop {
                    poi,
                    first_index: first,
                    last_index: last,
                    interval: Interval::new(ts, tf).expect("ordered samples"),
                });
            }
        }
    };
    for (i, s) in samples.iter().enumerate() {
        let hit = pia.locate(&s.p);
        match (run, hit) {
            (Some((poi, _)), Some(h)) if poi == h => {}
            _ => {
                if i > 0 {
                    close(run, i - 1, &mut stops);
                }
                run = hit.map(|h| (h, i));
            }
        }
    }
    if !samples.is_empty() {
        close(run, samples.len() - 1, &mut stops);
    }
    stops
}

/// Moves of `tr` given its stops: the maximal sample runs not covered by a
/// stop, classified by position. Without stops the whole trajectory is one
/// move.
pub fn detect_moves(tr: &Trajectory, stops: &[Stop]) -> Vec<Move> {
    let n = tr.len();
    if n == 0 {
        return Vec::new();
    }
    if stops.is_empty() {
        return vec![Move { kind: MoveKind::WholeTrajectory, first_index: 0, last_index: n - 1 }];
    }
    let mut moves = Vec::new();
    let first = &stops[0];
    if first.first_index > 0 {
        moves.push(Move { kind: MoveKind::BeforeFirstStop, first_index: 0, last_index: first.first_index - 1 });
    }
    for w in stops.windows(2) {
        if w[1].first_index > w[0].last_index + 1 {
            moves.push(Move {
                kind: MoveKind::BetweenStops,
                first_index: w[0].last_index + 1,
                last_index: w[1].first_index - 1,
            });
        }
    }
    let last = &stops[stops.len() - 1];
    if last.last_index + 1 < n {
        moves.push(Move { kind: MoveKind::AfterLastStop, first_index: last.last_index + 1, last_index: n - 1 });
    }
    moves
}

/// One compressed stop: object, PoI geometry and stop interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SmRecord {
    pub oid: ObjectId,
    pub gid: GeometryId,
    pub interval: Interval,
}

/// Stops fact table, sorted by `(oid, ts)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SmMoft {
    records: Vec<SmRecord>,
}

impl SmMoft {
    /// Sorts the records by `(oid, ts, tf, gid)`.
    pub fn from_records(mut records: Vec<SmRecord>) -> Self {
        records.sort_by(|a, b| {
            a.oid
                .cmp(&b.oid)
                .then(a.interval.start().total_cmp(&b.interval.start()))
                .then(a.interval.end().total_cmp(&b.interval.end()))
                .then(a.gid.cmp(&b.gid))
        });
        SmMoft { records }
    }

    pub fn records(&self) -> &[SmRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn oids(&self) -> BTreeSet<&ObjectId> {
        self.records.iter().map(|r| &r.oid).collect()
    }

    /// Records of one object, in temporal order.
    pub fn select(&self, oid: &ObjectId) -> &[SmRecord] {
        let lo = self.records.partition_point(|r| &r.oid < oid);
        let hi = self.records.partition_point(|r| &r.oid <= oid);
        &self.records[lo..hi]
    }

    /// Reads CSV with header `oid,gid,ts,tf`. Stops of one object may touch
    /// but not overlap.
    pub fn read_csv<R: Read>(source: R) -> Result<Self, StopsError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let headers = reader
            .headers()
            .map_err(|e| StopsError::Parse { line: 1, message: e.to_string() })?;
        if headers.iter().collect::<Vec<_>>() != ["oid", "gid", "ts", "tf"] {
            return Err(StopsError::Parse {
                line: 1,
                message: format!("expected header oid,gid,ts,tf, got {}", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut rows = Vec::new();
        let mut record = csv::StringRecord::new();
        loop {
            match reader.read_record(&mut record) {
                Ok(true) => {}
                Ok(false) => break,
                Err(e) => {
                    return Err(StopsError::Parse {
                        line: e.position().map_or(0, |p| p.line()),
                        message: e.to_string(),
                    })
                }
            }
            let line = record.position().map_or(0, |p| p.line());
            let num = |field: &str, v: &str| -> Result<f64, StopsError> {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| StopsError::Parse { line, message: format!("{field} is not a finite number: {v:?}") })
            };
            if record[0].is_empty() || record[1].is_empty() {
                return Err(StopsError::Parse { line, message: "empty identifier".into() });
            }
            let ts = num("ts", &record[2])?;
            let tf = num("tf", &record[3])?;
            let interval = Interval::new(ts, tf)
                .map_err(|e| StopsError::Parse { line, message: e.to_string() })?;
            rows.push((
                line,
                SmRecord { oid: ObjectId::new(&record[0]), gid: GeometryId::new(&record[1]), interval },
            ));
        }
        rows.sort_by(|(_, a), (_, b)| a.oid.cmp(&b.oid).then(a.interval.start().total_cmp(&b.interval.start())));
        for w in rows.windows(2) {
            let ((_, a), (line, b)) = (&w[0], &w[1]);
            if a.oid == b.oid && b.interval.start() < a.interval.end() {
                return Err(StopsError::OverlappingRecords { line: *line, oid: b.oid.clone(), gid: b.gid.clone() });
            }
        }
        Ok(Self::from_records(rows.into_iter().map(|(_, r)| r).collect()))
    }

    /// Writes CSV sorted by `(oid, ts)` with reals trimmed to six
    /// fractional digits.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "oid,gid,ts,tf")?;
        for r in &self.records {
            writeln!(
                sink,
                "{},{},{},{}",
                r.oid,
                r.gid,
                format_real(r.interval.start()),
                format_real(r.interval.end())
            )?;
        }
        Ok(())
    }
}

/// Runs stop detection over every trajectory. Trajectories are processed in
/// parallel; the result order is fixed by `(oid, ts)`.
pub fn build_sm_moft(m: &Moft, pia: &Pia) -> SmMoft {
    let per_object: Vec<Vec<SmRecord>> = m
        .trajectories()
        .par_iter()
        .map(|tr| {
            detect_stops(tr, pia)
                .into_iter()
                .map(|s| SmRecord {
                    oid: tr.oid().clone(),
                    gid: pia.pois[s.poi].geometry_id.clone(),
                    interval: s.interval,
                })
                .collect()
        })
        .collect();
    SmMoft::from_records(per_object.into_iter().flatten().collect())
}
