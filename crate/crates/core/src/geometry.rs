//! Planar geometry for places of interest: polygons, polylines and points,
//! closed-set containment, a uniform-grid point-location index, and areas.
//!
//! Polygons are closed point sets, so a point on the boundary is inside.
//! Polylines and points have no interior; a sample "is in" one of them when
//! it lies within a caller-supplied distance band.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("coordinate is not finite: ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewPolygonVertices(usize),
    #[error("polyline needs at least 2 vertices, got {0}")]
    TooFewPolylineVertices(usize),
    #[error("zero-length segment at vertex {0}")]
    ZeroLengthSegment(usize),
    #[error("polygon is degenerate (all vertices collinear)")]
    Degenerate,
    #[error("polygon ring self-intersects between edges {0} and {1}")]
    SelfIntersecting(usize, usize),
    #[error("cannot build an index over an empty geometry list")]
    EmptyIndex,
    #[error("tolerance must be finite and non-negative, got {0}")]
    BadTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn checked(self) -> Result<Self, GeometryError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(GeometryError::NonFinite(self.x, self.y))
        }
    }
}

/// Identifier of a geometry inside a layer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeometryId(pub String);

impl GeometryId {
    pub fn new(id: impl Into<String>) -> Self {
        GeometryId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GeometryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for GeometryId {
    fn from(s: &str) -> Self {
        GeometryId(s.to_owned())
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    fn of(points: &[Point]) -> BBox {
        let mut min = points[0];
        let mut max = points[0];
        for p in &points[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BBox { min, max }
    }

    pub fn expand(&self, by: f64) -> BBox {
        BBox {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min: Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn diagonal(&self) -> f64 {
        self.min.distance(&self.max)
    }
}

/// Simple polygon without holes. The ring is stored counter-clockwise and
/// without a repeated closing vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    ring: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let mut ring = vertices
            .into_iter()
            .map(Point::checked)
            .collect::<Result<Vec<_>, _>>()?;
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(GeometryError::TooFewPolygonVertices(ring.len()));
        }
        for i in 0..ring.len() {
            if ring[i] == ring[(i + 1) % ring.len()] {
                return Err(GeometryError::ZeroLengthSegment(i));
            }
        }
        let signed = signed_area(&ring);
        if signed != 0.0 {
            check_simple(&ring)?;
        } else if check_simple(&ring).is_err() && !collinear(&ring) {
            return Err(check_simple(&ring).unwrap_err());
        } else {
            return Err(GeometryError::Degenerate);
        }
        if signed < 0.0 {
            ring.reverse();
        }
        Ok(Polygon { ring })
    }

    /// Axis-aligned rectangle with corners `min` and `max`.
    pub fn rect(min: Point, max: Point) -> Result<Self, GeometryError> {
        Polygon::new(vec![
            min,
            Point::new(max.x, min.y),
            max,
            Point::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.ring
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.ring.len();
        (0..n).map(move |i| (self.ring[i], self.ring[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.ring).abs()
    }

    fn contains(&self, p: &Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            let (lo, hi) = canonical(a, b);
            if on_segment(lo, hi, *p) {
                return true;
            }
            if (lo.y > p.y) != (hi.y > p.y) {
                let x_cross = lo.x + (p.y - lo.y) * (hi.x - lo.x) / (hi.y - lo.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let vertices = vertices
            .into_iter()
            .map(Point::checked)
            .collect::<Result<Vec<_>, _>>()?;
        if vertices.len() < 2 {
            return Err(GeometryError::TooFewPolylineVertices(vertices.len()));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(GeometryError::ZeroLengthSegment(i));
        }
        Ok(Polyline { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// A place-of-interest geometry: polygon, polyline or single point.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Polygon(Polygon),
    Polyline(Polyline),
    Point(Point),
}

impl Geometry {
    pub fn point(p: Point) -> Result<Self, GeometryError> {
        Ok(Geometry::Point(p.checked()?))
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Geometry::Polygon(pg) => BBox::of(&pg.ring),
            Geometry::Polyline(pl) => BBox::of(&pl.vertices),
            Geometry::Point(p) => BBox { min: *p, max: *p },
        }
    }

    /// 2 for polygons, 1 for polylines, 0 for points.
    pub fn dimension(&self) -> u8 {
        match self {
            Geometry::Polygon(_) => 2,
            Geometry::Polyline(_) => 1,
            Geometry::Point(_) => 0,
        }
    }

    /// Segments of the geometry's boundary (a point is one degenerate segment).
    fn segments(&self) -> Vec<(Point, Point)> {
        match self {
            Geometry::Polygon(pg) => pg.edges().collect(),
            Geometry::Polyline(pl) => pl.segments().collect(),
            Geometry::Point(p) => vec![(*p, *p)],
        }
    }

    fn any_vertex(&self) -> Point {
        match self {
            Geometry::Polygon(pg) => pg.ring[0],
            Geometry::Polyline(pl) => pl.vertices[0],
            Geometry::Point(p) => *p,
        }
    }

    /// Tolerance band actually applied to this geometry: polygons ignore it.
    pub fn band(&self, tol: f64) -> f64 {
        if self.dimension() == 2 {
            0.0
        } else {
            tol
        }
    }
}

/// Closed-set membership. `tol` is the distance band for polylines and
/// points and is ignored for polygons.
pub fn contains(g: &Geometry, p: &Point, tol: f64) -> bool {
    match g {
        Geometry::Polygon(pg) => pg.contains(p),
        Geometry::Polyline(pl) => pl
            .segments()
            .any(|(a, b)| point_segment_distance(*p, a, b) <= tol),
        Geometry::Point(q) => q.distance(p) <= tol,
    }
}

/// Planar area. Polylines and points have area 0.
pub fn area(g: &Geometry) -> f64 {
    match g {
        Geometry::Polygon(pg) => pg.area(),
        _ => 0.0,
    }
}

/// Euclidean distance between two geometries' point sets (0 when they meet).
pub fn distance(a: &Geometry, b: &Geometry) -> f64 {
    if a.bbox().intersects(&b.bbox()) {
        if let Geometry::Polygon(pa) = a {
            if pa.contains(&b.any_vertex()) {
                return 0.0;
            }
        }
        if let Geometry::Polygon(pb) = b {
            if pb.contains(&a.any_vertex()) {
                return 0.0;
            }
        }
    }
    let sa = a.segments();
    let sb = b.segments();
    let mut best = f64::INFINITY;
    for &(p, q) in &sa {
        for &(r, s) in &sb {
            let d = segment_distance(p, q, r, s);
            if d == 0.0 {
                return 0.0;
            }
            best = best.min(d);
        }
    }
    best
}

/// Finds the first pair of geometries whose (banded) point sets share a
/// point. Each entry carries its tolerance; polygons ignore theirs.
pub fn first_overlap(geoms: &[(&Geometry, f64)]) -> Option<(usize, usize)> {
    overlaps(geoms, true).into_iter().next()
}

/// All overlapping pairs `(i, j)` with `i < j`, in lexicographic order.
pub fn all_overlaps(geoms: &[(&Geometry, f64)]) -> Vec<(usize, usize)> {
    overlaps(geoms, false)
}

fn overlaps(geoms: &[(&Geometry, f64)], stop_at_first: bool) -> Vec<(usize, usize)> {
    let boxes: Vec<BBox> = geoms
        .iter()
        .map(|(g, tol)| g.bbox().expand(g.band(*tol)))
        .collect();
    // sweep along x over boxes sorted by their left edge
    let mut order: Vec<usize> = (0..geoms.len()).collect();
    order.sort_by(|&i, &j| boxes[i].min.x.total_cmp(&boxes[j].min.x));
    let mut found = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j].min.x > boxes[i].max.x {
                break;
            }
            if !boxes[i].intersects(&boxes[j]) {
                continue;
            }
            let (gi, ti) = geoms[i];
            let (gj, tj) = geoms[j];
            if distance(gi, gj) <= gi.band(ti) + gj.band(tj) {
                found.push((i.min(j), i.max(j)));
                if stop_at_first {
                    return found;
                }
            }
        }
    }
    found.sort_unstable();
    found
}

/// True iff no two geometries share a point. Polygon pairs are checked
/// exactly; pairs involving polylines or points use the `tol` band.
pub fn pairwise_disjoint(geoms: &[Geometry], tol: f64) -> bool {
    let banded: Vec<(&Geometry, f64)> = geoms.iter().map(|g| (g, tol)).collect();
    first_overlap(&banded).is_none()
}

/// Uniform grid over the bounding box of the indexed geometries. Each cell
/// lists every geometry whose (tolerance-expanded) bounding box overlaps it.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    entries: Vec<IndexEntry>,
    origin: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    extent: BBox,
    cells: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
struct IndexEntry {
    id: GeometryId,
    geometry: Geometry,
    tol: f64,
}

const MAX_GRID_CELLS: usize = 1 << 22;

impl SpatialIndex {
    /// Index with zero tolerance for every geometry.
    pub fn build(geoms: Vec<(GeometryId, Geometry)>) -> Result<Self, GeometryError> {
        Self::build_with_tolerance(geoms.into_iter().map(|(id, g)| (id, g, 0.0)).collect())
    }

    pub fn build_with_tolerance(
        geoms: Vec<(GeometryId, Geometry, f64)>,
    ) -> Result<Self, GeometryError> {
        if geoms.is_empty() {
            return Err(GeometryError::EmptyIndex);
        }
        if let Some((_, _, tol)) = geoms.iter().find(|(_, _, t)| !(t.is_finite() && *t >= 0.0)) {
            return Err(GeometryError::BadTolerance(*tol));
        }
        let entries: Vec<IndexEntry> = geoms
            .into_iter()
            .map(|(id, geometry, tol)| IndexEntry { id, geometry, tol })
            .collect();
        let boxes: Vec<BBox> = entries
            .iter()
            .map(|e| e.geometry.bbox().expand(e.geometry.band(e.tol)))
            .collect();
        let extent = boxes[1..].iter().fold(boxes[0], |acc, b| acc.union(b));

        let mut diagonals: Vec<f64> = boxes.iter().map(BBox::diagonal).collect();
        diagonals.sort_by(f64::total_cmp);
        let mut cell = diagonals[diagonals.len() / 2];
        let width = extent.max.x - extent.min.x;
        let height = extent.max.y - extent.min.y;
        if !(cell > 0.0) {
            cell = (width.max(height) / (entries.len() as f64).sqrt()).max(1.0);
        }
        // keep the grid bounded for layers mixing tiny and huge extents
        while ((width / cell) as usize + 1).saturating_mul((height / cell) as usize + 1)
            > MAX_GRID_CELLS
        {
            cell *= 2.0;
        }
        let cols = (width / cell) as usize + 1;
        let rows = (height / cell) as usize + 1;

        let mut index = SpatialIndex {
            entries,
            origin: extent.min,
            cell,
            cols,
            rows,
            extent,
            cells: vec![Vec::new(); cols * rows],
        };
        for (i, b) in boxes.iter().enumerate() {
            let (c0, r0) = index.cell_of(&b.min);
            let (c1, r1) = index.cell_of(&b.max);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    index.cells[r * cols + c].push(i as u32);
                }
            }
        }
        Ok(index)
    }

    fn cell_of(&self, p: &Point) -> (usize, usize) {
        let c = ((p.x - self.origin.x) / self.cell).floor().max(0.0) as usize;
        let r = ((p.y - self.origin.y) / self.cell).floor().max(0.0) as usize;
        (c.min(self.cols - 1), r.min(self.rows - 1))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, i: usize) -> &GeometryId {
        &self.entries[i].id
    }

    pub fn geometry(&self, i: usize) -> &Geometry {
        &self.entries[i].geometry
    }

    /// Positions (in build order) of the geometries containing `p`,
    /// ascending.
    pub fn query_positions(&self, p: &Point) -> impl Iterator<Item = usize> + '_ {
        let p = *p;
        let candidates: &[u32] = if self.extent.contains(&p) {
            let (c, r) = self.cell_of(&p);
            &self.cells[r * self.cols + c]
        } else {
            &[]
        };
        candidates.iter().map(|&i| i as usize).filter(move |&i| {
            let e = &self.entries[i];
            contains(&e.geometry, &p, e.tol)
        })
    }

    /// First containing geometry, if any. For a layer of disjoint geometries
    /// this is the only one.
    pub fn first_hit(&self, p: &Point) -> Option<usize> {
        self.query_positions(p).next()
    }

    /// Identifiers of every geometry containing `p`.
    pub fn point_query(&self, p: &Point) -> BTreeSet<GeometryId> {
        self.query_positions(p)
            .map(|i| self.entries[i].id.clone())
            .collect()
    }
}

fn collinear(ring: &[Point]) -> bool {
    let a = ring[0];
    let b = ring[1];
    ring.iter().all(|p| orient(a, b, *p) == 0.0)
}

fn signed_area(ring: &[Point]) -> f64 {
    // shoelace relative to the first vertex
    let o = ring[0];
    let mut twice = 0.0;
    for i in 1..ring.len() - 1 {
        let a = ring[i];
        let b = ring[i + 1];
        twice += (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
    }
    twice / 2.0
}

fn check_simple(ring: &[Point]) -> Result<(), GeometryError> {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in i + 1..n {
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // neighbours share exactly one vertex; they must not fold back
                let shared = if j == i + 1 { b } else { a };
                let (other_i, other_j) = if j == i + 1 { (a, d) } else { (b, c) };
                if orient(shared, other_i, other_j) == 0.0
                    && (other_i.x - shared.x) * (other_j.x - shared.x)
                        + (other_i.y - shared.y) * (other_j.y - shared.y)
                        > 0.0
                {
                    return Err(GeometryError::SelfIntersecting(i, j));
                }
            } else if segments_intersect(a, b, c, d) {
                return Err(GeometryError::SelfIntersecting(i, j));
            }
        }
    }
    Ok(())
}

/// Orders segment endpoints lexicographically so that per-segment
/// computations do not depend on ring orientation.
fn canonical(a: Point, b: Point) -> (Point, Point) {
    if (a.x, a.y) <= (b.x, b.y) {
        (a, b)
    } else {
        (b, a)
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    orient(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Closed segment intersection (touching counts).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (a, b) = canonical(a, b);
    let (c, d) = canonical(c, d);
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (a, b) = canonical(a, b);
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    if orient(a, b, p) == 0.0 && t > 0.0 && t < 1.0 {
        return 0.0;
    }
    p.distance(&Point::new(a.x + t * dx, a.y + t * dy))
}

fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}
