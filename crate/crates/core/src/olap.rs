//! Finite OLAP dimensions: level hierarchies with rollup maps, attribute
//! maps, the member-to-geometry (alpha) mappings of PoI dimensions, and a
//! time dimension whose categories label instants periodically.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryId;
use crate::temporal::Interval;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OlapError {
    #[error("dimension {0}: no levels declared")]
    NoLevels(String),
    #[error("dimension {dim}: duplicate level {level}")]
    DuplicateLevel { dim: String, level: String },
    #[error("dimension {dim}: unknown level {level}")]
    UnknownLevel { dim: String, level: String },
    #[error("dimension {dim}: hierarchy has a cycle through {level}")]
    Cycle { dim: String, level: String },
    #[error("dimension {dim}: level {level} is not above the bottom level {bottom}")]
    NotAboveBottom { dim: String, level: String, bottom: String },
    #[error("dimension {dim}: duplicate attribute {attr} on level {level}")]
    DuplicateAttribute { dim: String, level: String, attr: String },
    #[error("dimension {dim}: no rollup path from {from} to {to}")]
    NoPath { dim: String, from: String, to: String },
    #[error("dimension {dim}: {member} is not a member of level {level}")]
    UnknownMember { dim: String, level: String, member: String },
    #[error("dimension {dim}: rollup {from}->{to} is not a hierarchy edge")]
    NotAnEdge { dim: String, from: String, to: String },
    #[error("dimension {dim}: rollup {from}->{to} is undefined for member {member}")]
    PartialRollup { dim: String, from: String, to: String, member: String },
    #[error("dimension {dim}: rollup paths from {from} to {to} disagree on member {member} ({first} vs {second})")]
    InconsistentPaths {
        dim: String,
        from: String,
        to: String,
        member: String,
        first: String,
        second: String,
    },
    #[error("dimension {dim}: unknown attribute {attr} on level {level}")]
    UnknownAttribute { dim: String, level: String, attr: String },
    #[error("dimension {dim}: attribute {attr} has kind {expected} but value {value} was given")]
    KindMismatch { dim: String, attr: String, expected: ValueKind, value: Value },
    #[error("dimension {dim}: attribute {attr} has no value for member {member}")]
    MissingValue { dim: String, attr: String, member: String },
    #[error("unknown dimension {0}")]
    UnknownDimension(String),
    #[error("dimension name or label {0} is used twice")]
    DuplicateDimension(String),
    #[error("alpha mapping {layer}/{dim}: geometry {gid} is assigned to both {first} and {second}")]
    NotInjective { layer: String, dim: String, gid: GeometryId, first: String, second: String },
    #[error("alpha mapping {layer}/{dim}: no geometry for member {member}")]
    NoGeometry { layer: String, dim: String, member: String },
    #[error("geometry {gid} is claimed by {first} and {second}")]
    GeometryClaimedTwice { gid: GeometryId, first: String, second: String },
    #[error("unknown time category {0}")]
    UnknownCategory(String),
    #[error("time category {category} has no label {label}")]
    UnknownLabel { category: String, label: String },
    #[error("time category {category}: {reason}")]
    BadCategory { category: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Text,
    Number,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Text => "text",
            ValueKind::Number => "number",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Text(_) => ValueKind::Text,
            Value::Number(_) => ValueKind::Number,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => write!(f, "'{s}'"),
            Value::Number(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDecl {
    pub name: String,
    pub kind: ValueKind,
}

/// Levels (bottom first), parent edges and per-level attribute declarations.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionSchema {
    name: String,
    label: String,
    levels: Vec<String>,
    edges: Vec<(String, String)>,
    attributes: BTreeMap<String, Vec<AttributeDecl>>,
}

impl DimensionSchema {
    /// `edges` are `(child, parent)` pairs. `label` is the short name used
    /// in queries and label-collapsed graphs; it defaults to `name`.
    pub fn new(
        name: impl Into<String>,
        label: Option<String>,
        levels: Vec<String>,
        edges: Vec<(String, String)>,
        attributes: BTreeMap<String, Vec<AttributeDecl>>,
    ) -> Result<Self, OlapError> {
        let name = name.into();
        let dim = || name.clone();
        if levels.is_empty() {
            return Err(OlapError::NoLevels(name));
        }
        let mut seen = BTreeSet::new();
        for l in &levels {
            if !seen.insert(l.as_str()) {
                return Err(OlapError::DuplicateLevel { dim: dim(), level: l.clone() });
            }
        }
        let unknown = |l: &String| OlapError::UnknownLevel { dim: dim(), level: l.clone() };
        for (c, p) in &edges {
            for l in [c, p] {
                if !seen.contains(l.as_str()) {
                    return Err(unknown(l));
                }
            }
            if c == p {
                return Err(OlapError::Cycle { dim: dim(), level: c.clone() });
            }
        }
        for (level, decls) in &attributes {
            if !seen.contains(level.as_str()) {
                return Err(unknown(level));
            }
            let mut names = BTreeSet::new();
            for d in decls {
                if !names.insert(d.name.as_str()) {
                    return Err(OlapError::DuplicateAttribute {
                        dim: dim(),
                        level: level.clone(),
                        attr: d.name.clone(),
                    });
                }
            }
        }
        let schema = DimensionSchema {
            label: label.unwrap_or_else(|| name.clone()),
            name,
            levels,
            edges,
            attributes,
        };
        schema.check_dag()?;
        Ok(schema)
    }

    fn check_dag(&self) -> Result<(), OlapError> {
        // Kahn's algorithm over child -> parent edges
        let mut indegree: BTreeMap<&str, usize> =
            self.levels.iter().map(|l| (l.as_str(), 0)).collect();
        for (_, p) in &self.edges {
            *indegree.get_mut(p.as_str()).unwrap() += 1;
        }
        let mut queue: VecDeque<&str> =
            indegree.iter().filter(|(_, &d)| d == 0).map(|(l, _)| *l).collect();
        let mut visited = 0;
        while let Some(l) = queue.pop_front() {
            visited += 1;
            for p in self.parents(l) {
                let d = indegree.get_mut(p).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push_back(p);
                }
            }
        }
        if visited != self.levels.len() {
            let level = indegree
                .iter()
                .find(|(_, &d)| d > 0)
                .map(|(l, _)| l.to_string())
                .unwrap_or_default();
            return Err(OlapError::Cycle { dim: self.name.clone(), level });
        }
        // every level other than the bottom must be reachable from it
        let bottom = self.bottom();
        let reachable = self.ancestors(bottom);
        for l in &self.levels[1..] {
            if !reachable.contains(l.as_str()) {
                return Err(OlapError::NotAboveBottom {
                    dim: self.name.clone(),
                    level: l.clone(),
                    bottom: bottom.to_owned(),
                });
            }
        }
        Ok(())
    }

    fn parents<'a>(&'a self, level: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |(c, _)| c == level)
            .map(|(_, p)| p.as_str())
    }

    fn ancestors<'a>(&'a self, level: &'a str) -> BTreeSet<&'a str> {
        let mut out = BTreeSet::new();
        let mut stack = vec![level];
        while let Some(l) = stack.pop() {
            for p in self.parents(l) {
                if out.insert(p) {
                    stack.push(p);
                }
            }
        }
        out
    }

    /// Every upward path from `from` to `to`, as level sequences.
    fn paths(&self, from: &str, to: &str) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        let mut path = vec![from.to_owned()];
        self.collect_paths(from, to, &mut path, &mut out);
        out
    }

    fn collect_paths(&self, at: &str, to: &str, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if at == to {
            out.push(path.clone());
            return;
        }
        for p in self.parents(at) {
            path.push(p.to_owned());
            self.collect_paths(p, to, path, out);
            path.pop();
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn bottom(&self) -> &str {
        &self.levels[0]
    }

    pub fn attributes(&self, level: &str) -> &[AttributeDecl] {
        self.attributes.get(level).map_or(&[], Vec::as_slice)
    }

    pub fn attribute_kind(&self, level: &str, attr: &str) -> Option<ValueKind> {
        self.attributes
            .get(level)?
            .iter()
            .find(|d| d.name == attr)
            .map(|d| d.kind)
    }

    fn has_level(&self, level: &str) -> bool {
        self.levels.iter().any(|l| l == level)
    }
}

/// Members per level plus the rollup and attribute maps of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionInstance {
    schema: DimensionSchema,
    members: BTreeMap<String, BTreeSet<String>>,
    rollups: BTreeMap<(String, String), BTreeMap<String, String>>,
    values: BTreeMap<(String, String), BTreeMap<String, Value>>,
}

impl DimensionInstance {
    /// `rollups` is keyed by `(child level, parent level)`; `values` by
    /// `(level, attribute)`. Every hierarchy edge needs a total rollup map
    /// and all rollup paths between two levels must agree.
    pub fn new(
        schema: DimensionSchema,
        members: BTreeMap<String, BTreeSet<String>>,
        rollups: BTreeMap<(String, String), BTreeMap<String, String>>,
        values: BTreeMap<(String, String), BTreeMap<String, Value>>,
    ) -> Result<Self, OlapError> {
        let dim = schema.name.clone();
        for level in members.keys() {
            if !schema.has_level(level) {
                return Err(OlapError::UnknownLevel { dim, level: level.clone() });
            }
        }
        let mut members = members;
        for l in &schema.levels {
            members.entry(l.clone()).or_default();
        }
        for (from, to) in rollups.keys() {
            if !schema.edges.iter().any(|(c, p)| c == from && p == to) {
                return Err(OlapError::NotAnEdge { dim, from: from.clone(), to: to.clone() });
            }
        }
        for (from, to) in &schema.edges {
            let map = rollups.get(&(from.clone(), to.clone()));
            for m in &members[from] {
                match map.and_then(|map| map.get(m)) {
                    None => {
                        return Err(OlapError::PartialRollup {
                            dim,
                            from: from.clone(),
                            to: to.clone(),
                            member: m.clone(),
                        })
                    }
                    Some(target) if !members[to].contains(target) => {
                        return Err(OlapError::UnknownMember {
                            dim,
                            level: to.clone(),
                            member: target.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
            if let Some(map) = map {
                if let Some(extra) = map.keys().find(|k| !members[from].contains(*k)) {
                    return Err(OlapError::UnknownMember {
                        dim,
                        level: from.clone(),
                        member: extra.clone(),
                    });
                }
            }
        }
        for ((level, attr), map) in &values {
            let kind = schema.attribute_kind(level, attr).ok_or_else(|| {
                OlapError::UnknownAttribute { dim: dim.clone(), level: level.clone(), attr: attr.clone() }
            })?;
            for (m, v) in map {
                if !members[level].contains(m) {
                    return Err(OlapError::UnknownMember {
                        dim,
                        level: level.clone(),
                        member: m.clone(),
                    });
                }
                if v.kind() != kind {
                    return Err(OlapError::KindMismatch {
                        dim,
                        attr: attr.clone(),
                        expected: kind,
                        value: v.clone(),
                    });
                }
            }
        }
        let inst = DimensionInstance { schema, members, rollups, values };
        inst.check_path_consistency()?;
        Ok(inst)
    }

    fn check_path_consistency(&self) -> Result<(), OlapError> {
        for from in &self.schema.levels {
            for to in self.schema.ancestors(from) {
                let paths = self.schema.paths(from, to);
                if paths.len() < 2 {
                    continue;
                }
                for m in &self.members[from] {
                    let first = self.compose(&paths[0], m);
                    for p in &paths[1..] {
                        let other = self.compose(p, m);
                        if other != first {
                            return Err(OlapError::InconsistentPaths {
                                dim: self.schema.name.clone(),
                                from: from.clone(),
                                to: to.to_owned(),
                                member: m.clone(),
                                first: first.to_owned(),
                                second: other.to_owned(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    // rollup maps are total on validated instances
    fn compose<'a>(&'a self, path: &[String], m: &'a str) -> &'a str {
        path.windows(2).fold(m, |cur, w| {
            self.rollups[&(w[0].clone(), w[1].clone())][cur].as_str()
        })
    }

    pub fn schema(&self) -> &DimensionSchema {
        &self.schema
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn label(&self) -> &str {
        &self.schema.label
    }

    pub fn members(&self, level: &str) -> Option<&BTreeSet<String>> {
        self.members.get(level)
    }

    pub fn is_member(&self, level: &str, m: &str) -> bool {
        self.members.get(level).is_some_and(|s| s.contains(m))
    }

    fn check_member(&self, level: &str, m: &str) -> Result<(), OlapError> {
        if !self.schema.has_level(level) {
            return Err(OlapError::UnknownLevel { dim: self.name().to_owned(), level: level.to_owned() });
        }
        if !self.is_member(level, m) {
            return Err(OlapError::UnknownMember {
                dim: self.name().to_owned(),
                level: level.to_owned(),
                member: m.to_owned(),
            });
        }
        Ok(())
    }

    /// Rolls `m` up from level `from` to level `to` along the hierarchy.
    pub fn rollup(&self, from: &str, to: &str, m: &str) -> Result<&str, OlapError> {
        self.check_member(from, m)?;
        if !self.schema.has_level(to) {
            return Err(OlapError::UnknownLevel { dim: self.name().to_owned(), level: to.to_owned() });
        }
        let path = self.schema.paths(from, to).into_iter().next().ok_or_else(|| {
            OlapError::NoPath { dim: self.name().to_owned(), from: from.to_owned(), to: to.to_owned() }
        })?;
        let m = self.members[from].get(m).expect("checked above");
        Ok(self.compose(&path, m))
    }

    pub fn attribute(&self, level: &str, attr: &str, m: &str) -> Result<&Value, OlapError> {
        self.check_member(level, m)?;
        if self.schema.attribute_kind(level, attr).is_none() {
            return Err(OlapError::UnknownAttribute {
                dim: self.name().to_owned(),
                level: level.to_owned(),
                attr: attr.to_owned(),
            });
        }
        self.values
            .get(&(level.to_owned(), attr.to_owned()))
            .and_then(|map| map.get(m))
            .ok_or_else(|| OlapError::MissingValue {
                dim: self.name().to_owned(),
                attr: attr.to_owned(),
                member: m.to_owned(),
            })
    }
}

/// Injective map from bottom-level members of a dimension to geometry ids
/// of a layer.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMapping {
    layer: String,
    dimension: String,
    forward: BTreeMap<String, GeometryId>,
    inverse: BTreeMap<GeometryId, String>,
}

impl AlphaMapping {
    pub fn new(
        layer: impl Into<String>,
        dim: &DimensionInstance,
        pairs: impl IntoIterator<Item = (String, GeometryId)>,
    ) -> Result<Self, OlapError> {
        let layer = layer.into();
        let bottom = dim.schema.bottom();
        let mut forward = BTreeMap::new();
        let mut inverse: BTreeMap<GeometryId, String> = BTreeMap::new();
        for (m, gid) in pairs {
            dim.check_member(bottom, &m)?;
            if let Some(first) = inverse.get(&gid) {
                return Err(OlapError::NotInjective {
                    layer,
                    dim: dim.name().to_owned(),
                    gid,
                    first: first.clone(),
                    second: m,
                });
            }
            if let Some(old) = forward.insert(m.clone(), gid.clone()) {
                return Err(OlapError::NotInjective {
                    layer,
                    dim: dim.name().to_owned(),
                    gid: old,
                    first: m.clone(),
                    second: m,
                });
            }
            inverse.insert(gid, m);
        }
        Ok(AlphaMapping { layer, dimension: dim.name().to_owned(), forward, inverse })
    }

    pub fn layer(&self) -> &str {
        &self.layer
    }

    pub fn dimension(&self) -> &str {
        &self.dimension
    }

    pub fn alpha(&self, m: &str) -> Result<&GeometryId, OlapError> {
        self.forward.get(m).ok_or_else(|| OlapError::NoGeometry {
            layer: self.layer.clone(),
            dim: self.dimension.clone(),
            member: m.to_owned(),
        })
    }

    pub fn alpha_inverse(&self, gid: &GeometryId) -> Option<&str> {
        self.inverse.get(gid).map(String::as_str)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &GeometryId)> {
        self.forward.iter().map(|(m, g)| (m.as_str(), g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRange {
    pub label: String,
    pub start: f64,
    pub end: f64,
}

/// Periodic labelling of instants: the phase `(t - offset) mod period` falls
/// into exactly one half-open range `[start, end)`; the ranges partition
/// `[0, period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeCategory {
    period: f64,
    offset: f64,
    ranges: Vec<TimeRange>,
}

impl TimeCategory {
    pub fn from_ranges(
        name: &str,
        period: f64,
        offset: f64,
        mut ranges: Vec<TimeRange>,
    ) -> Result<Self, OlapError> {
        let bad = |reason: String| OlapError::BadCategory { category: name.to_owned(), reason };
        if !(period.is_finite() && period > 0.0) {
            return Err(bad(format!("period must be positive, got {period}")));
        }
        if !offset.is_finite() {
            return Err(bad("offset must be finite".into()));
        }
        if ranges.is_empty() {
            return Err(bad("no ranges".into()));
        }
        ranges.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut expected = 0.0;
        for r in &ranges {
            if r.start != expected {
                return Err(bad(format!("ranges must partition [0, {period}); gap or overlap at {expected}")));
            }
            if !(r.end > r.start) {
                return Err(bad(format!("empty range for {}", r.label)));
            }
            expected = r.end;
        }
        if expected != period {
            return Err(bad(format!("ranges end at {expected}, not at the period {period}")));
        }
        Ok(TimeCategory { period, offset, ranges })
    }

    /// `labels.len()` equal-width buckets over one period.
    pub fn from_buckets(
        name: &str,
        period: f64,
        offset: f64,
        labels: Vec<String>,
    ) -> Result<Self, OlapError> {
        if labels.is_empty() {
            return Err(OlapError::BadCategory { category: name.to_owned(), reason: "no labels".into() });
        }
        let n = labels.len();
        let ranges = labels
            .into_iter()
            .enumerate()
            .map(|(i, label)| TimeRange {
                label,
                start: period * i as f64 / n as f64,
                end: if i + 1 == n { period } else { period * (i + 1) as f64 / n as f64 },
            })
            .collect();
        Self::from_ranges(name, period, offset, ranges)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn ranges(&self) -> &[TimeRange] {
        &self.ranges
    }

    /// Absolute bounds of range `r` in cycle `k`. A range ending at the
    /// period ends where the next cycle starts, so cycles tile exactly.
    fn bounds(&self, k: i64, r: usize) -> (f64, f64) {
        let at = |k: i64, x: f64| self.offset + k as f64 * self.period + x;
        let range = &self.ranges[r];
        let end = if r + 1 == self.ranges.len() { at(k + 1, 0.0) } else { at(k, range.end) };
        (at(k, range.start), end)
    }

    fn cycle(&self, t: f64) -> i64 {
        ((t - self.offset) / self.period).floor() as i64
    }

    pub fn label_at(&self, t: f64) -> &str {
        let k = self.cycle(t);
        for kk in [k - 1, k, k + 1] {
            let r = (0..self.ranges.len()).find(|&r| {
                let (s, e) = self.bounds(kk, r);
                s <= t && t < e
            });
            if let Some(r) = r {
                return &self.ranges[r].label;
            }
        }
        unreachable!("cycles tile the line")
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.ranges.iter().any(|r| r.label == label)
    }

    /// Maximal pieces of `window` labelled `label`, ordered and disjoint.
    /// Each piece is reported as `[start, end]`; the end instant itself
    /// belongs to the next range unless it is the window's end.
    /// Zero-length pieces (a label touching the window at one instant) are
    /// dropped.
    pub fn label_pieces(&self, label: &str, window: &Interval) -> Vec<Interval> {
        let (lo, hi) = (window.start(), window.end());
        let mut out: Vec<Interval> = Vec::new();
        for k in self.cycle(lo) - 1..=self.cycle(hi) + 1 {
            for r in (0..self.ranges.len()).filter(|&r| self.ranges[r].label == label) {
                let (s, e) = self.bounds(k, r);
                let (s, e) = (s.max(lo), e.min(hi));
                if s < e {
                    match out.last_mut() {
                        Some(last) if last.end() >= s => {
                            *last = Interval::new(last.start(), e.max(last.end())).expect("ordered");
                        }
                        _ => out.push(Interval::new(s, e).expect("ordered")),
                    }
                }
            }
        }
        out
    }
}

/// Named time categories (hour, timeOfDay, dayOfWeek, ...).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeDimension {
    categories: BTreeMap<String, TimeCategory>,
}

impl TimeDimension {
    pub fn new(categories: BTreeMap<String, TimeCategory>) -> Self {
        TimeDimension { categories }
    }

    /// hour, timeOfDay and dayOfWeek for instants measured in units where
    /// one hour is `hour` long and instant 0 is Monday 00:00.
    pub fn standard(hour: f64) -> Self {
        let day = 24.0 * hour;
        let mut categories = BTreeMap::new();
        categories.insert(
            "hour".to_owned(),
            TimeCategory::from_buckets("hour", day, 0.0, (0..24).map(|h| h.to_string()).collect())
                .expect("valid"),
        );
        let tod = [("Night", 0.0, 6.0), ("Morning", 6.0, 12.0), ("Afternoon", 12.0, 18.0), ("Evening", 18.0, 24.0)]
            .into_iter()
            .map(|(label, s, e)| TimeRange { label: label.to_owned(), start: s * hour, end: e * hour })
            .collect();
        categories.insert(
            "timeOfDay".to_owned(),
            TimeCategory::from_ranges("timeOfDay", day, 0.0, tod).expect("valid"),
        );
        let days = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];
        categories.insert(
            "dayOfWeek".to_owned(),
            TimeCategory::from_buckets("dayOfWeek", 7.0 * day, 0.0, days.iter().map(|d| d.to_string()).collect())
                .expect("valid"),
        );
        TimeDimension { categories }
    }

    pub fn category(&self, name: &str) -> Result<&TimeCategory, OlapError> {
        self.categories
            .get(name)
            .ok_or_else(|| OlapError::UnknownCategory(name.to_owned()))
    }

    pub fn categories(&self) -> impl Iterator<Item = (&str, &TimeCategory)> {
        self.categories.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn time_label(&self, category: &str, t: f64) -> Result<&str, OlapError> {
        Ok(self.category(category)?.label_at(t))
    }

    pub fn label_instant_set(
        &self,
        category: &str,
        label: &str,
        window: &Interval,
    ) -> Result<Vec<Interval>, OlapError> {
        let cat = self.category(category)?;
        if !cat.has_label(label) {
            return Err(OlapError::UnknownLabel { category: category.to_owned(), label: label.to_owned() });
        }
        Ok(cat.label_pieces(label, window))
    }
}

/// All OLAP-side context needed by graph building and query evaluation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Olap {
    dimensions: BTreeMap<String, DimensionInstance>,
    labels: BTreeMap<String, String>,
    alpha: Vec<AlphaMapping>,
    owners: BTreeMap<GeometryId, (String, String)>,
    time: TimeDimension,
}

impl Olap {
    pub fn new(
        dimensions: Vec<DimensionInstance>,
        alpha: Vec<AlphaMapping>,
        time: TimeDimension,
    ) -> Result<Self, OlapError> {
        let mut by_name = BTreeMap::new();
        let mut labels = BTreeMap::new();
        for d in dimensions {
            let name = d.name().to_owned();
            for key in [name.clone(), d.label().to_owned()] {
                if let Some(prev) = labels.insert(key.clone(), name.clone()) {
                    if prev != name {
                        return Err(OlapError::DuplicateDimension(key));
                    }
                }
            }
            if by_name.insert(name.clone(), d).is_some() {
                return Err(OlapError::DuplicateDimension(name));
            }
        }
        let mut owners: BTreeMap<GeometryId, (String, String)> = BTreeMap::new();
        for a in &alpha {
            if !by_name.contains_key(a.dimension()) {
                return Err(OlapError::UnknownDimension(a.dimension().to_owned()));
            }
            for (m, gid) in a.pairs() {
                let owner = (a.dimension().to_owned(), m.to_owned());
                if let Some((d, first)) = owners.get(gid) {
                    return Err(OlapError::GeometryClaimedTwice {
                        gid: gid.clone(),
                        first: format!("{d}/{first}"),
                        second: format!("{}/{}", owner.0, owner.1),
                    });
                }
                owners.insert(gid.clone(), owner);
            }
        }
        Ok(Olap { dimensions: by_name, labels, alpha, owners, time })
    }

    /// Looks a dimension up by name or by its short label.
    pub fn dimension(&self, name_or_label: &str) -> Result<&DimensionInstance, OlapError> {
        self.labels
            .get(name_or_label)
            .and_then(|n| self.dimensions.get(n))
            .ok_or_else(|| OlapError::UnknownDimension(name_or_label.to_owned()))
    }

    pub fn dimensions(&self) -> impl Iterator<Item = &DimensionInstance> {
        self.dimensions.values()
    }

    pub fn alpha_mappings(&self) -> &[AlphaMapping] {
        &self.alpha
    }

    pub fn alpha_for(&self, dimension: &str) -> Option<&AlphaMapping> {
        self.alpha.iter().find(|a| a.dimension() == dimension)
    }

    /// The dimension and bottom-level member owning geometry `gid`.
    pub fn resolve_geometry(&self, gid: &GeometryId) -> Option<(&DimensionInstance, &str)> {
        let (dim, m) = self.owners.get(gid)?;
        Some((&self.dimensions[dim], m.as_str()))
    }

    pub fn time(&self) -> &TimeDimension {
        &self.time
    }
}
