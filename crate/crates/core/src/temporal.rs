//! Closed time intervals, the strict-precedence and strict-inside operators,
//! and aggregates over finite sets of intervals and instants.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt::format_real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemporalError {
    #[error("interval bounds must be finite with start <= end, got [{0}, {1}]")]
    BadInterval(f64, f64),
    #[error("aggregate {0} is undefined on an empty set")]
    Empty(&'static str),
    #[error("interval {next} does not strictly follow {prev}")]
    NotOrdered { prev: Interval, next: Interval },
}

/// Closed interval `[start, end]` of instants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    start: f64,
    end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self, TemporalError> {
        if start.is_finite() && end.is_finite() && start <= end {
            Ok(Interval { start, end })
        } else {
            Err(TemporalError::BadInterval(start, end))
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// `self ⋖ other`: `t1 < t2 < t3 < t4`.
    pub fn strictly_precedes(&self, other: &Interval) -> bool {
        strictly_precedes(self, other)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", format_real(self.start), format_real(self.end))
    }
}

/// True iff `a.start < a.end < b.start < b.end`.
pub fn strictly_precedes(a: &Interval, b: &Interval) -> bool {
    a.start < a.end && a.end < b.start && b.start < b.end
}

/// `t ◁ i`: strict interior membership.
pub fn inside(t: f64, i: &Interval) -> bool {
    i.start < t && t < i.end
}

/// A non-empty, strictly ordered sequence of intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TemporalElement {
    intervals: Vec<Interval>,
}

impl TemporalElement {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an interval that must come strictly after the current last one.
    pub fn push(&mut self, i: Interval) -> Result<(), TemporalError> {
        if let Some(prev) = self.intervals.last() {
            if !strictly_precedes(prev, &i) {
                return Err(TemporalError::NotOrdered { prev: *prev, next: i });
            }
        }
        self.intervals.push(i);
        Ok(())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

impl fmt::Display for TemporalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.intervals.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalAggregate {
    MaxL,
    MinL,
    AvgL,
    TimespanL,
}

impl IntervalAggregate {
    pub fn name(&self) -> &'static str {
        match self {
            IntervalAggregate::MaxL => "max_l",
            IntervalAggregate::MinL => "min_l",
            IntervalAggregate::AvgL => "avg_l",
            IntervalAggregate::TimespanL => "timespan_l",
        }
    }
}

/// Maximum, minimum and average interval length, or the timespan of the
/// union (latest end minus earliest start).
pub fn interval_aggregate(set: &[Interval], kind: IntervalAggregate) -> Result<f64, TemporalError> {
    let first = set.first().ok_or(TemporalError::Empty(kind.name()))?;
    let lengths = set.iter().map(Interval::length);
    Ok(match kind {
        IntervalAggregate::MaxL => lengths.fold(f64::NEG_INFINITY, f64::max),
        IntervalAggregate::MinL => lengths.fold(f64::INFINITY, f64::min),
        IntervalAggregate::AvgL => lengths.sum::<f64>() / set.len() as f64,
        IntervalAggregate::TimespanL => {
            let (lo, hi) = set.iter().fold((first.start, first.end), |(lo, hi), i| {
                (lo.min(i.start), hi.max(i.end))
            });
            hi - lo
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstantAggregate {
    Count,
    Max,
    Min,
    Timespan,
}

impl InstantAggregate {
    pub fn name(&self) -> &'static str {
        match self {
            InstantAggregate::Count => "count",
            InstantAggregate::Max => "max",
            InstantAggregate::Min => "min",
            InstantAggregate::Timespan => "timespan",
        }
    }
}

/// Aggregates over a finite set of instants. The input is treated as a set:
/// repeated instants count once.
pub fn instant_aggregate(set: &[f64], kind: InstantAggregate) -> Result<f64, TemporalError> {
    if kind == InstantAggregate::Count {
        let mut sorted = set.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        return Ok(sorted.len() as f64);
    }
    if set.is_empty() {
        return Err(TemporalError::Empty(kind.name()));
    }
    let max = set.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = set.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(match kind {
        InstantAggregate::Max => max,
        InstantAggregate::Min => min,
        InstantAggregate::Timespan => max - min,
        InstantAggregate::Count => unreachable!(),
    })
}

/// Measure of the union of the intervals. Not one of the interval
/// aggregates above: `timespan_l` ignores gaps, this does not.
pub fn covered_length(set: &[Interval]) -> f64 {
    let mut sorted = set.to_vec();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for i in sorted {
        current = match current {
            Some((s, e)) if i.start <= e => Some((s, e.max(i.end))),
            Some((s, e)) => {
                total += e - s;
                Some((i.start, i.end))
            }
            None => Some((i.start, i.end)),
        };
    }
    if let Some((s, e)) = current {
        total += e - s;
    }
    total
}
