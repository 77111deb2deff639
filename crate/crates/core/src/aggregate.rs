//! Aggregation operators over explicit finite sets and over query results.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geometry::{self, Geometry, GeometryId};
use crate::moft::{Moft, ObjectId};
use crate::olap::Olap;
use crate::resm::{self, ResmError};
use crate::stops::SmMoft;
use crate::temporal::{self, InstantAggregate, Interval, IntervalAggregate, TemporalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregateError {
    #[error("unknown geometry {0}")]
    UnknownGeometry(GeometryId),
    #[error("geometries {0} and {1} overlap; their areas cannot be summed")]
    Overlapping(GeometryId, GeometryId),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Resm(#[from] ResmError),
}

/// Cardinality of an explicit finite set.
pub fn count<T>(s: &BTreeSet<T>) -> usize {
    s.len()
}

/// Number of distinct `(oid, t)` pairs among the MOFT samples selected by
/// `keep`.
pub fn count_pairs(m: &Moft, keep: impl Fn(&ObjectId, f64, f64, f64) -> bool) -> usize {
    m.trajectories()
        .iter()
        .map(|tr| tr.samples().iter().filter(|s| keep(tr.oid(), s.t, s.p.x, s.p.y)).count())
        .sum()
}

/// Number of distinct `(oid, t, x, y)` tuples among the selected samples.
/// Timestamps are unique per object, so this equals [`count_pairs`].
pub fn count_tuples(m: &Moft, keep: impl Fn(&ObjectId, f64, f64, f64) -> bool) -> usize {
    count_pairs(m, keep)
}

/// Total area of disjoint geometries looked up through `layer`.
pub fn area_total<'a>(
    gids: &BTreeSet<GeometryId>,
    layer: impl Fn(&GeometryId) -> Option<&'a Geometry>,
) -> Result<f64, AggregateError> {
    let mut geoms = Vec::with_capacity(gids.len());
    for gid in gids {
        geoms.push((gid, layer(gid).ok_or_else(|| AggregateError::UnknownGeometry(gid.clone()))?));
    }
    let banded: Vec<(&Geometry, f64)> = geoms.iter().map(|(_, g)| (*g, 0.0)).collect();
    if let Some((i, j)) = geometry::first_overlap(&banded) {
        return Err(AggregateError::Overlapping(geoms[i].0.clone(), geoms[j].0.clone()));
    }
    Ok(geoms.iter().map(|(_, g)| geometry::area(g)).sum())
}

/// Number of objects with at least one contiguous stop run matching `q`.
pub fn count_resm(sm: &SmMoft, q: &str, olap: &Olap) -> Result<usize, AggregateError> {
    let ast = resm::parse(q)?;
    Ok(resm::matching_oids(sm, &ast, olap)?.len())
}

/// A single aggregation request with its operand.
#[derive(Debug, Clone, PartialEq)]
pub enum AggregateRequest {
    CountOids(BTreeSet<ObjectId>),
    CountPairs(BTreeSet<(ObjectId, u64)>),
    CountTuples(BTreeSet<(ObjectId, u64, u64, u64)>),
    AreaGeoms(BTreeSet<GeometryId>),
    Instants(InstantAggregate, Vec<f64>),
    Intervals(IntervalAggregate, Vec<Interval>),
    CountResm(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregateValue {
    Count(usize),
    Real(f64),
}

/// What requests may refer to: the PoI layer, the OLAP context and the
/// stops table.
pub struct AggregateContext<'a> {
    pub sm: &'a SmMoft,
    pub olap: &'a Olap,
    pub layer: &'a dyn Fn(&GeometryId) -> Option<&'a Geometry>,
}

pub fn evaluate(req: &AggregateRequest, ctx: &AggregateContext<'_>) -> Result<AggregateValue, AggregateError> {
    Ok(match req {
        AggregateRequest::CountOids(s) => AggregateValue::Count(count(s)),
        AggregateRequest::CountPairs(s) => AggregateValue::Count(count(s)),
        AggregateRequest::CountTuples(s) => AggregateValue::Count(count(s)),
        AggregateRequest::AreaGeoms(s) => AggregateValue::Real(area_total(s, ctx.layer)?),
        AggregateRequest::Instants(InstantAggregate::Count, v) => {
            AggregateValue::Count(temporal::instant_aggregate(v, InstantAggregate::Count)? as usize)
        }
        AggregateRequest::Instants(k, v) => AggregateValue::Real(temporal::instant_aggregate(v, *k)?),
        AggregateRequest::Intervals(k, v) => AggregateValue::Real(temporal::interval_aggregate(v, *k)?),
        AggregateRequest::CountResm(q) => AggregateValue::Count(count_resm(ctx.sm, q, ctx.olap)?),
    })
}
