//! Slow reference implementations and random instance generators for the
//! semtraj test suites. Nothing here shares code paths with the library
//! beyond its data types.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use semtraj::geometry::{self, Geometry, GeometryId, Point, Polygon};
use semtraj::moft::{ObjectId, TimedPoint, Trajectory};
use semtraj::olap::{Olap, TimeCategory, Value, ValueKind};
use semtraj::resm::{CmpOp, Cond, Literal, Resm};
use semtraj::smgraph::StopEvent;
use semtraj::stops::{Pia, PoI};
use semtraj::temporal::Interval;

// ---------------------------------------------------------------- geometry

/// Linear-scan point query.
pub fn linear_point_query(entries: &[(GeometryId, Geometry, f64)], p: &Point) -> BTreeSet<GeometryId> {
    entries
        .iter()
        .filter(|(_, g, tol)| geometry::contains(g, p, *tol))
        .map(|(id, _, _)| id.clone())
        .collect()
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
}

/// Area by ear clipping. Expects a simple ring in either orientation.
pub fn ear_clipping_area(ring: &[Point]) -> f64 {
    let mut v: Vec<Point> = ring.to_vec();
    let twice: f64 = (0..v.len()).map(|i| cross(Point::new(0.0, 0.0), v[i], v[(i + 1) % v.len()])).sum();
    if twice < 0.0 {
        v.reverse();
    }
    let mut total = 0.0;
    while v.len() > 3 {
        let n = v.len();
        let ear = (0..n).find(|&i| {
            let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            cross(a, b, c) > 0.0
                && (0..n)
                    .filter(|&j| j != i && j != (i + n - 1) % n && j != (i + 1) % n)
                    .all(|j| !in_triangle(v[j], a, b, c) || v[j] == a || v[j] == b || v[j] == c)
        });
        let i = match ear {
            Some(i) => i,
            // only collinear vertices remain convex-less; drop one
            None => (0..n)
                .find(|&i| cross(v[(i + n - 1) % n], v[i], v[(i + 1) % n]) == 0.0)
                .expect("simple ring has an ear"),
        };
        let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
        total += cross(a, b, c).abs() / 2.0;
        v.remove(i);
    }
    total + cross(v[0], v[1], v[2]).abs() / 2.0
}

/// Whether two axis-aligned rectangles share any point, closed boundaries
/// included.
pub fn rects_touch(a: (Point, Point), b: (Point, Point)) -> bool {
    a.0.x <= b.1.x && b.0.x <= a.1.x && a.0.y <= b.1.y && b.0.y <= a.1.y
}

// ------------------------------------------------------------------- stops

/// (poi position, first sample, last sample) of every stop, found by
/// enumerating all index pairs.
pub fn brute_stops(tr: &Trajectory, pia: &Pia) -> Vec<(usize, usize, usize)> {
    let s = tr.samples();
    let owner: Vec<Option<usize>> = s
        .iter()
        .map(|tp| pia.pois().iter().position(|p| geometry::contains(&p.geometry, &tp.p, p.tol)))
        .collect();
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in i..s.len() {
            let Some(k) = owner[i] else { continue };
            if !(i..=j).all(|m| owner[m] == Some(k)) {
                continue;
            }
            let left_max = i == 0 || owner[i - 1] != Some(k);
            let right_max = j + 1 == s.len() || owner[j + 1] != Some(k);
            if left_max && right_max && s[j].t - s[i].t > pia.pois()[k].delta {
                out.push((k, i, j));
            }
        }
    }
    out
}

// -------------------------------------------------------------------- time

/// Whether some instant strictly inside `w` carries `label`, decided by
/// labelling the midpoints between all range boundaries inside `w`.
pub fn label_occurs(cat: &TimeCategory, label: &str, w: &Interval) -> bool {
    let offset = cat.offset();
    let (a, b) = (w.start(), w.end());
    if a == b {
        return false;
    }
    let mut cuts = vec![a, b];
    let mut k = ((a - offset) / cat.period()).floor() - 1.0;
    loop {
        let base = offset + k * cat.period();
        if base > b {
            break;
        }
        for r in cat.ranges() {
            let t = base + r.start;
            if t > a && t < b {
                cuts.push(t);
            }
        }
        k += 1.0;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).filter(|c| c[1] > c[0]).any(|c| cat.label_at((c[0] + c[1]) / 2.0) == label)
}

// -------------------------------------------------------------------- RESM

fn literal_holds(stored: &Value, op: CmpOp, lit: &Literal) -> bool {
    match (stored, lit) {
        (Value::Number(a), Literal::Number(b)) => match op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        },
        (Value::Text(a), Literal::Text(b)) => match op {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => panic!("ordering on text"),
        },
        _ => panic!("kind mismatch"),
    }
}

/// Direct evaluation of a condition on one stop.
pub fn cond_holds(c: &Cond, stop: &StopEvent, olap: &Olap) -> bool {
    match c {
        Cond::Cmp { attr, op, value } => {
            let dim = olap.dimension(&stop.dimension).expect("dimension");
            let v = dim.attribute(dim.schema().bottom(), attr, &stop.extent).expect("attribute");
            literal_holds(v, *op, value)
        }
        Cond::Time { category, label } => {
            let cat = olap.time().category(category).expect("category");
            label_occurs(cat, label, &stop.interval)
        }
        Cond::Not(a) => !cond_holds(a, stop, olap),
        Cond::And(a, b) => cond_holds(a, stop, olap) && cond_holds(b, stop, olap),
        Cond::Or(a, b) => cond_holds(a, stop, olap) || cond_holds(b, stop, olap),
    }
}

/// Positions `j >= i` such that `seq[i..j]` is in the language of `e`.
pub fn ends(e: &Resm, seq: &[StopEvent], i: usize, olap: &Olap) -> BTreeSet<usize> {
    match e {
        Resm::Epsilon => BTreeSet::from([i]),
        Resm::Wildcard => (i..=seq.len()).collect(),
        Resm::Dim(name) | Resm::DimCond(name, _) => {
            let dim = olap.dimension(name).expect("dimension");
            let ok = i < seq.len()
                && seq[i].dimension == dim.name()
                && match e {
                    Resm::DimCond(_, c) => cond_holds(c, &seq[i], olap),
                    _ => true,
                };
            if ok {
                BTreeSet::from([i + 1])
            } else {
                BTreeSet::new()
            }
        }
        Resm::Concat(a, b) => ends(a, seq, i, olap)
            .into_iter()
            .flat_map(|j| ends(b, seq, j, olap))
            .collect(),
        Resm::Star(a) => {
            let mut reached = BTreeSet::from([i]);
            let mut frontier = vec![i];
            while let Some(j) = frontier.pop() {
                for k in ends(a, seq, j, olap) {
                    if reached.insert(k) {
                        frontier.push(k);
                    }
                }
            }
            reached
        }
    }
}

/// Whether some contiguous run of `seq`, possibly empty, is in the language.
pub fn resm_matches(e: &Resm, seq: &[StopEvent], olap: &Olap) -> bool {
    (0..=seq.len()).any(|i| !ends(e, seq, i, olap).is_empty())
}

// -------------------------------------------------------------- generators

/// `n` disjoint axis-aligned squares on a jittered grid with gaps of at
/// least `gap`.
pub fn disjoint_squares<R: Rng>(rng: &mut R, n: usize, gap: f64) -> Vec<(Point, Point)> {
    let side = (n as f64).sqrt().ceil() as usize;
    let cell = 10.0;
    let mut cells: Vec<usize> = (0..side * side).collect();
    cells.shuffle(rng);
    cells
        .into_iter()
        .take(n)
        .map(|c| {
            let (cx, cy) = ((c % side) as f64 * cell, (c / side) as f64 * cell);
            let w = rng.gen_range(1.0..cell - gap);
            let h = rng.gen_range(1.0..cell - gap);
            let x0 = cx + rng.gen_range(0.0..cell - gap - w);
            let y0 = cy + rng.gen_range(0.0..cell - gap - h);
            (Point::new(x0, y0), Point::new(x0 + w, y0 + h))
        })
        .collect()
}

/// A PIA of disjoint squares with deltas in `[0.5, 5)`.
pub fn random_pia<R: Rng>(rng: &mut R, n: usize) -> Pia {
    let pois = disjoint_squares(rng, n, 1.0)
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| PoI {
            pid: format!("p{i}"),
            dimension: "D".to_owned(),
            geometry_id: GeometryId::new(format!("g{i}")),
            geometry: Geometry::Polygon(Polygon::rect(a, b).expect("rect")),
            delta: rng.gen_range(0.5..5.0),
            tol: 0.0,
        })
        .collect();
    Pia::new(pois).expect("disjoint")
}

fn point_in(rng: &mut impl Rng, g: &Geometry) -> Point {
    let b = g.bbox();
    Point::new(rng.gen_range(b.min.x..=b.max.x), rng.gen_range(b.min.y..=b.max.y))
}

/// A trajectory that alternates between random points and dwell runs
/// inside PIA squares, some long enough to be stops and some not.
pub fn random_trajectory<R: Rng>(rng: &mut R, oid: &str, pia: &Pia, len: usize) -> Trajectory {
    let extent = pia
        .pois()
        .iter()
        .map(|p| p.geometry.bbox())
        .reduce(|a, b| a.union(&b))
        .expect("non-empty pia");
    let mut t = rng.gen_range(-10.0..10.0);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        if rng.gen_bool(0.4) && !pia.pois().is_empty() {
            let poi = pia.pois().choose(rng).expect("poi");
            let k = rng.gen_range(1..6);
            for _ in 0..k {
                out.push(TimedPoint { t, p: point_in(rng, &poi.geometry) });
                t += rng.gen_range(0.1..3.0);
            }
        } else {
            let p = Point::new(
                rng.gen_range(extent.min.x - 5.0..extent.max.x + 5.0),
                rng.gen_range(extent.min.y - 5.0..extent.max.y + 5.0),
            );
            out.push(TimedPoint { t, p });
            t += rng.gen_range(0.1..3.0);
        }
    }
    out.truncate(len);
    Trajectory::new(ObjectId::new(oid), out).expect("increasing times")
}

/// Labels and member extents available to the RESM generators: for each
/// dimension label, its members and a numeric attribute name if any.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub dims: Vec<(String, Vec<String>, Option<String>)>,
    pub time: Vec<(String, Vec<String>)>,
}

impl Vocabulary {
    pub fn of(olap: &Olap) -> Self {
        let dims = olap
            .dimensions()
            .filter(|d| olap.alpha_for(d.name()).is_some())
            .map(|d| {
                let members = d.members(d.schema().bottom()).map(|m| m.iter().cloned().collect()).unwrap_or_default();
                let numeric = d
                    .schema()
                    .attributes(d.schema().bottom())
                    .iter()
                    .find(|a| a.kind == ValueKind::Number)
                    .map(|a| a.name.clone());
                (d.label().to_owned(), members, numeric)
            })
            .collect();
        let time = olap
            .time()
            .categories()
            .filter(|(n, _)| *n != "hour")
            .map(|(n, c)| {
                let mut labels: Vec<String> = c.ranges().iter().map(|r| r.label.clone()).collect();
                labels.dedup();
                (n.to_owned(), labels)
            })
            .collect();
        Vocabulary { dims, time }
    }
}

fn random_cond<R: Rng>(rng: &mut R, voc: &Vocabulary, numeric: Option<&str>, depth: usize) -> Cond {
    let leaf = depth == 0 || rng.gen_bool(0.5);
    if leaf {
        match numeric {
            Some(a) if rng.gen_bool(0.5) => {
                let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
                Cond::Cmp {
                    attr: a.to_owned(),
                    op: *ops.choose(rng).expect("op"),
                    value: Literal::Number(rng.gen_range(0..400) as f64),
                }
            }
            _ => {
                let (cat, labels) = voc.time.choose(rng).expect("category");
                Cond::Time { category: cat.clone(), label: labels.choose(rng).expect("label").clone() }
            }
        }
    } else {
        match rng.gen_range(0..3) {
            0 => Cond::Not(Box::new(random_cond(rng, voc, numeric, depth - 1))),
            1 => Cond::And(
                Box::new(random_cond(rng, voc, numeric, depth - 1)),
                Box::new(random_cond(rng, voc, numeric, depth - 1)),
            ),
            _ => Cond::Or(
                Box::new(random_cond(rng, voc, numeric, depth - 1)),
                Box::new(random_cond(rng, voc, numeric, depth - 1)),
            ),
        }
    }
}

/// Random expression of depth at most `depth` over the vocabulary.
pub fn random_resm<R: Rng>(rng: &mut R, voc: &Vocabulary, depth: usize) -> Resm {
    let leaf = depth <= 1 || rng.gen_bool(0.3);
    if leaf {
        let (label, _, numeric) = voc.dims.choose(rng).expect("dimension");
        match rng.gen_range(0..10) {
            0 => Resm::Epsilon,
            1 => Resm::Wildcard,
            2..=4 if !voc.time.is_empty() || numeric.is_some() => {
                Resm::DimCond(label.clone(), random_cond(rng, voc, numeric.as_deref(), 2))
            }
            _ => Resm::Dim(label.clone()),
        }
    } else if rng.gen_bool(0.3) {
        Resm::star(random_resm(rng, voc, depth - 1))
    } else {
        Resm::concat(random_resm(rng, voc, depth - 1), random_resm(rng, voc, depth - 1))
    }
}

/// Random stop sequence of length at most `max_len` over members that the
/// OLAP context can resolve.
pub fn random_stop_sequence<R: Rng>(rng: &mut R, olap: &Olap, max_len: usize) -> Vec<StopEvent> {
    let members: Vec<(String, String, String, GeometryId)> = olap
        .alpha_mappings()
        .iter()
        .flat_map(|a| {
            let dim = olap.dimension(a.dimension()).expect("dimension");
            a.pairs()
                .map(|(m, g)| (dim.name().to_owned(), dim.label().to_owned(), m.to_owned(), g.clone()))
                .collect::<Vec<_>>()
        })
        .collect();
    let n = rng.gen_range(0..=max_len);
    let mut t = rng.gen_range(0.0..200.0);
    (0..n)
        .map(|_| {
            let (dim, label, extent, gid) = members.choose(rng).expect("member").clone();
            let len = rng.gen_range(0.5..20.0);
            let iv = Interval::new(t, t + len).expect("interval");
            t += len + rng.gen_range(0.5..20.0);
            StopEvent { gid, extent, dimension: dim, label, interval: iv }
        })
        .collect()
}
