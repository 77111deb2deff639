//! JSON application catalog: dimensions, alpha mappings, PoIs and the time
//! dimension, validated as a whole.
//!
//! ```json
//! {
//!   "dimensions": [{
//!     "name": "Hotels", "label": "H",
//!     "levels": ["hotelId", "category"],
//!     "hierarchy": [["hotelId", "category"]],
//!     "attributes": {"hotelId": [{"name": "name", "kind": "text"}]},
//!     "members": {"hotelId": ["H1"], "category": ["3-star"]},
//!     "rollups": [{"from": "hotelId", "to": "category", "map": {"H1": "3-star"}}],
//!     "values": {"hotelId": {"name": {"H1": "Hilton"}}}
//!   }],
//!   "alpha": [{"layer": "L_PoI", "dimension": "Hotels", "map": {"H1": "H1"}}],
//!   "pois": [{"pid": "H1", "dimension": "Hotels", "gid": "H1",
//!             "geometry": {"polygon": [[0, 0], [10, 0], [10, 10], [0, 10]]},
//!             "delta": 0.5, "tol": 0}],
//!   "time": {"standard_hour": 1,
//!            "categories": {"shift": {"period": 24, "labels": ["day", "night"]}}}
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::geometry::{Geometry, GeometryId, Point, Polygon, Polyline};
use crate::olap::{
    AlphaMapping, AttributeDecl, DimensionInstance, DimensionSchema, Olap, TimeCategory,
    TimeDimension, TimeRange, Value,
};
use crate::stops::{Pia, PoI};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("catalog syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("catalog is invalid:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    dimensions: Vec<DimensionFile>,
    #[serde(default)]
    alpha: Vec<AlphaFile>,
    #[serde(default)]
    pois: Vec<PoiFile>,
    #[serde(default)]
    time: TimeFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionFile {
    name: String,
    label: Option<String>,
    levels: Vec<String>,
    #[serde(default)]
    hierarchy: Vec<(String, String)>,
    #[serde(default)]
    attributes: BTreeMap<String, Vec<AttributeDecl>>,
    #[serde(default)]
    members: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    rollups: Vec<RollupFile>,
    #[serde(default)]
    values: BTreeMap<String, BTreeMap<String, BTreeMap<String, Value>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RollupFile {
    from: String,
    to: String,
    map: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaFile {
    layer: String,
    dimension: String,
    map: BTreeMap<String, GeometryId>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoiFile {
    pid: String,
    dimension: String,
    gid: GeometryId,
    geometry: GeometryFile,
    delta: f64,
    #[serde(default)]
    tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GeometryFile {
    Polygon(Vec<[f64; 2]>),
    Polyline(Vec<[f64; 2]>),
    Point([f64; 2]),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeFile {
    /// Length of one hour in instant units; enables hour, timeOfDay and
    /// dayOfWeek.
    standard_hour: Option<f64>,
    #[serde(default)]
    categories: BTreeMap<String, CategoryFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryFile {
    period: f64,
    #[serde(default)]
    offset: f64,
    ranges: Option<Vec<TimeRange>>,
    labels: Option<Vec<String>>,
}

fn points(v: &[[f64; 2]]) -> Vec<Point> {
    v.iter().map(|&[x, y]| Point::new(x, y)).collect()
}

/// Validated application context.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub olap: Olap,
    pub pia: Pia,
}

impl Catalog {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn from_reader<R: Read>(source: R) -> Result<Self, CatalogError> {
        let file: CatalogFile = serde_json::from_reader(source)?;
        Self::from_file(file)
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    fn from_file(file: CatalogFile) -> Result<Self, CatalogError> {
        let mut errors: Vec<String> = Vec::new();

        let mut dims = Vec::new();
        for d in file.dimensions {
            match build_dimension(d) {
                Ok(inst) => dims.push(inst),
                Err(e) => errors.push(e),
            }
        }

        let mut alpha = Vec::new();
        for a in file.alpha {
            let Some(dim) = dims.iter().find(|d| d.name() == a.dimension) else {
                errors.push(format!("alpha mapping {}: unknown dimension {}", a.layer, a.dimension));
                continue;
            };
            match AlphaMapping::new(a.layer, dim, a.map) {
                Ok(m) => alpha.push(m),
                Err(e) => errors.push(e.to_string()),
            }
        }

        let time = match build_time(file.time) {
            Ok(t) => t,
            Err(e) => {
                errors.push(e);
                TimeDimension::default()
            }
        };

        let mut pois = Vec::new();
        for p in file.pois {
            let geometry = match &p.geometry {
                GeometryFile::Polygon(v) => Polygon::new(points(v)).map(Geometry::Polygon),
                GeometryFile::Polyline(v) => Polyline::new(points(v)).map(Geometry::Polyline),
                GeometryFile::Point([x, y]) => Geometry::point(Point::new(*x, *y)),
            };
            let geometry = match geometry {
                Ok(g) => g,
                Err(e) => {
                    errors.push(format!("PoI {}: {e}", p.pid));
                    continue;
                }
            };
            match dims.iter().find(|d| d.name() == p.dimension) {
                None => errors.push(format!("PoI {}: unknown dimension {}", p.pid, p.dimension)),
                Some(dim) if !dim.is_member(dim.schema().bottom(), &p.pid) => errors.push(format!(
                    "PoI {}: not a member of the bottom level of {}",
                    p.pid, p.dimension
                )),
                Some(_) => match alpha.iter().find(|a| a.dimension() == p.dimension) {
                    None => errors.push(format!("PoI {}: no alpha mapping for dimension {}", p.pid, p.dimension)),
                    Some(a) => match a.alpha(&p.pid) {
                        Ok(g) if *g == p.gid => {}
                        Ok(g) => errors.push(format!(
                            "PoI {}: geometry {} differs from its alpha image {g}",
                            p.pid, p.gid
                        )),
                        Err(e) => errors.push(format!("PoI {}: {e}", p.pid)),
                    },
                },
            }
            pois.push(PoI {
                pid: p.pid,
                dimension: p.dimension,
                geometry_id: p.gid,
                geometry,
                delta: p.delta,
                tol: p.tol,
            });
        }
        let pia = match Pia::new(pois) {
            Ok(pia) => Some(pia),
            Err(es) => {
                errors.extend(es.iter().map(ToString::to_string));
                None
            }
        };

        if !errors.is_empty() {
            return Err(CatalogError::Invalid(errors));
        }
        let olap = Olap::new(dims, alpha, time).map_err(|e| CatalogError::Invalid(vec![e.to_string()]))?;
        Ok(Catalog { olap, pia: pia.expect("no errors") })
    }

    /// Geometry of a PoI by id.
    pub fn geometry(&self, gid: &GeometryId) -> Option<&Geometry> {
        self.pia.by_geometry(gid).map(|p| &p.geometry)
    }
}

fn build_dimension(d: DimensionFile) -> Result<DimensionInstance, String> {
    let name = d.name.clone();
    let schema = DimensionSchema::new(d.name, d.label, d.levels, d.hierarchy, d.attributes)
        .map_err(|e| e.to_string())?;
    let mut members: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (level, ms) in d.members {
        let set = members.entry(level.clone()).or_default();
        for m in ms {
            if !set.insert(m.clone()) {
                return Err(format!("dimension {name}: member {m} listed twice on level {level}"));
            }
        }
    }
    let mut rollups = BTreeMap::new();
    for r in d.rollups {
        if rollups.insert((r.from.clone(), r.to.clone()), r.map).is_some() {
            return Err(format!("dimension {name}: rollup {}->{} given twice", r.from, r.to));
        }
    }
    let values = d
        .values
        .into_iter()
        .flat_map(|(level, attrs)| attrs.into_iter().map(move |(attr, map)| ((level.clone(), attr), map)))
        .collect();
    DimensionInstance::new(schema, members, rollups, values).map_err(|e| e.to_string())
}

fn build_time(t: TimeFile) -> Result<TimeDimension, String> {
    let mut categories: BTreeMap<String, TimeCategory> = match t.standard_hour {
        Some(h) if h.is_finite() && h > 0.0 => TimeDimension::standard(h)
            .categories()
            .map(|(k, v)| (k.to_owned(), v.clone()))
            .collect(),
        Some(h) => return Err(format!("time: standard_hour must be positive, got {h}")),
        None => BTreeMap::new(),
    };
    for (name, c) in t.categories {
        let cat = match (c.ranges, c.labels) {
            (Some(r), None) => TimeCategory::from_ranges(&name, c.period, c.offset, r),
            (None, Some(l)) => TimeCategory::from_buckets(&name, c.period, c.offset, l),
            _ => return Err(format!("time category {name}: give exactly one of ranges or labels")),
        }
        .map_err(|e| e.to_string())?;
        categories.insert(name, cat);
    }
    Ok(TimeDimension::new(categories))
}
