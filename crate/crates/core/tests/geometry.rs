use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semtraj::geometry::{self, Geometry, GeometryId, Point, Polygon, Polyline, SpatialIndex};
use semtraj_testkit as kit;

fn poly(pts: &[(f64, f64)]) -> Polygon {
    Polygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
}

/// Star-shaped ring around `c`: sorted angles, random radii.
fn star_ring(rng: &mut impl Rng, c: Point, n: usize) -> Vec<Point> {
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    angles
        .into_iter()
        .map(|a| {
            let r = rng.gen_range(1.0..10.0);
            Point::new(c.x + r * a.cos(), c.y + r * a.sin())
        })
        .collect()
}

fn convex_ring(rng: &mut impl Rng, c: Point, n: usize) -> Vec<Point> {
    let r = rng.gen_range(1.0..10.0);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    angles.into_iter().map(|a| Point::new(c.x + r * a.cos(), c.y + r * a.sin())).collect()
}

#[test]
fn reference_areas() {
    assert_eq!(geometry::area(&Geometry::Polygon(poly(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]))), 1.0);
    let tri = geometry::area(&Geometry::Polygon(poly(&[(0., 0.), (4., 0.), (0., 3.)])));
    assert!((tri - 6.0).abs() <= 1e-9);
    let line = Geometry::Polyline(Polyline::new(vec![Point::new(0., 0.), Point::new(3., 0.)]).unwrap());
    assert_eq!(geometry::area(&line), 0.0);
}

#[test]
fn ear_clipping_agrees_on_random_polygons() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..400 {
        let c = Point::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let n = rng.gen_range(3..14);
        let ring = if k % 2 == 0 { convex_ring(&mut rng, c, n) } else { star_ring(&mut rng, c, n) };
        let Ok(p) = Polygon::new(ring.clone()) else { continue };
        let oracle = kit::ear_clipping_area(&ring);
        assert!((p.area() - oracle).abs() <= 1e-9 * oracle.max(1.0), "{ring:?}: {} vs {oracle}", p.area());
    }
}

#[test]
fn rectangle_disjointness_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let rects: Vec<(Point, Point)> = (0..50)
            .map(|_| {
                let (x, y) = (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
                (Point::new(x, y), Point::new(x + rng.gen_range(0.5..6.0), y + rng.gen_range(0.5..6.0)))
            })
            .collect();
        let geoms: Vec<Geometry> = rects.iter().map(|&(a, b)| Geometry::Polygon(Polygon::rect(a, b).unwrap())).collect();
        let mut expected = true;
        for i in 0..rects.len() {
            for j in i + 1..rects.len() {
                if kit::rects_touch(rects[i], rects[j]) {
                    expected = false;
                }
            }
        }
        assert_eq!(geometry::pairwise_disjoint(&geoms, 0.0), expected);
        for i in 0..geoms.len() {
            for j in i + 1..geoms.len() {
                let pair = [geoms[i].clone(), geoms[j].clone()];
                assert_eq!(geometry::pairwise_disjoint(&pair, 0.0), !kit::rects_touch(rects[i], rects[j]));
            }
        }
    }
}

#[test]
fn shared_edge_is_not_disjoint() {
    let a = Geometry::Polygon(Polygon::rect(Point::new(0., 0.), Point::new(1., 1.)).unwrap());
    let b = Geometry::Polygon(Polygon::rect(Point::new(1., 0.), Point::new(2., 1.)).unwrap());
    let c = Geometry::Polygon(Polygon::rect(Point::new(3., 0.), Point::new(4., 1.)).unwrap());
    assert!(!geometry::pairwise_disjoint(&[a.clone(), b], 0.0));
    assert!(geometry::pairwise_disjoint(&[a, c], 0.0));
}

#[test]
fn index_matches_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut entries: Vec<(GeometryId, Geometry, f64)> = Vec::new();
    for (i, (a, b)) in kit::disjoint_squares(&mut rng, 60, 1.0).into_iter().enumerate() {
        let g = match i % 4 {
            0 => Geometry::Point(Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)),
            1 => Geometry::Polyline(Polyline::new(vec![a, Point::new(b.x, a.y), b]).unwrap()),
            _ => Geometry::Polygon(Polygon::rect(a, b).unwrap()),
        };
        let tol = if i % 4 < 2 { rng.gen_range(0.0..0.4) } else { 0.0 };
        entries.push((GeometryId::new(format!("g{i}")), g, tol));
    }
    let idx = SpatialIndex::build_with_tolerance(entries.clone()).unwrap();
    for _ in 0..10_000 {
        let p = Point::new(rng.gen_range(-5.0..85.0), rng.gen_range(-5.0..85.0));
        assert_eq!(idx.point_query(&p), kit::linear_point_query(&entries, &p), "{p:?}");
    }
    // vertices and edges of every polygon are inside
    for (id, g, _) in &entries {
        if let Geometry::Polygon(p) = g {
            for v in p.vertices() {
                assert!(idx.point_query(v).contains(id));
            }
        }
    }
}

#[test]
fn overlapping_index_reports_every_hit() {
    let a = Geometry::Polygon(Polygon::rect(Point::new(0., 0.), Point::new(2., 2.)).unwrap());
    let b = Geometry::Polygon(Polygon::rect(Point::new(1., 1.), Point::new(3., 3.)).unwrap());
    let idx = SpatialIndex::build(vec![("a".into(), a), ("b".into(), b)]).unwrap();
    assert_eq!(idx.point_query(&Point::new(1.5, 1.5)), BTreeSet::from(["a".into(), "b".into()]));
    assert!(idx.point_query(&Point::new(9.0, 9.0)).is_empty());
}

fn arb_star() -> impl Strategy<Value = Vec<Point>> {
    any::<u64>().prop_filter_map("degenerate", |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..10);
        let ring = star_ring(&mut rng, Point::new(0.0, 0.0), n);
        Polygon::new(ring.clone()).ok().map(|_| ring)
    })
}

proptest! {
    #[test]
    fn contains_ignores_rotation_and_orientation(
        ring in arb_star(),
        k in 0usize..10,
        px in -12.0f64..12.0,
        py in -12.0f64..12.0,
    ) {
        let p = Point::new(px, py);
        let base = geometry::contains(&Geometry::Polygon(Polygon::new(ring.clone()).unwrap()), &p, 0.0);
        let mut rotated = ring.clone();
        rotated.rotate_left(k % ring.len());
        let mut reversed = ring.clone();
        reversed.reverse();
        for r in [rotated, reversed] {
            let g = Geometry::Polygon(Polygon::new(r).unwrap());
            prop_assert_eq!(geometry::contains(&g, &p, 0.0), base);
        }
    }

    #[test]
    fn area_translation_and_scale(
        ring in arb_star(),
        dx in -1e3f64..1e3,
        dy in -1e3f64..1e3,
        s in 0.1f64..10.0,
    ) {
        let a = Polygon::new(ring.clone()).unwrap().area();
        let moved = Polygon::new(ring.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect()).unwrap().area();
        let scaled = Polygon::new(ring.iter().map(|p| Point::new(p.x * s, p.y * s)).collect()).unwrap().area();
        prop_assert!((moved - a).abs() <= 1e-9 * a.max(1.0) * (1.0 + dx.abs() + dy.abs()));
        prop_assert!((scaled - a * s * s).abs() <= 1e-9 * (a * s * s).max(1.0));
    }

    #[test]
    fn polygon_orientation_is_normalized(ring in arb_star()) {
        let mut rev = ring.clone();
        rev.reverse();
        let a = Polygon::new(ring).unwrap();
        let b = Polygon::new(rev).unwrap();
        let signed = |p: &Polygon| p.edges().map(|(u, v)| u.x * v.y - v.x * u.y).sum::<f64>();
        prop_assert!(signed(&a) > 0.0);
        prop_assert!(signed(&b) > 0.0);
    }
}
