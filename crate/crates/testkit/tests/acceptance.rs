//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semtraj::geometry::{self, Geometry, GeometryId, Point, Polygon, Polyline, SpatialIndex};
use semtraj::moft::{ObjectId, Trajectory};
use semtraj::resm::{parse, ResmAutomaton};
use semtraj::smgraph::SmGraph;
use semtraj::stops::{detect_moves, detect_stops, Pia, SmMoft};
use semtraj::temporal::{interval_aggregate, Interval, IntervalAggregate};
use semtraj::Catalog;
use semtraj_cli::{cmd_detect, cmd_query, run_from};
use semtraj_testkit as kit;

type Verdict = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/paris").join(name)
}

fn catalog() -> Catalog {
    Catalog::from_path(fixture("catalog.json")).expect("fixture catalog")
}

fn running_example() -> Verdict {
    let expected = std::fs::read_to_string(fixture("reference_smmoft.csv")).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let got = cmd_detect(Some(&fixture("catalog.json")), &fixture("moft.csv")).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let missing: Vec<&str> = expected.lines().filter(|l| !got.lines().any(|g| g == *l)).collect();
    let extra: Vec<&str> = got.lines().filter(|l| !expected.lines().any(|e| e == *l)).collect();
    let summary = format!("{} rows in {:.3}s", got.lines().count() - 1, elapsed.as_secs_f64());
    if got == expected && elapsed < Duration::from_secs(1) {
        Ok(summary)
    } else {
        Err(format!("{summary}; missing {missing:?}, unexpected {extra:?}"))
    }
}

fn reference_counts() -> Verdict {
    let c = catalog();
    let path = fixture("reference_smmoft.csv");
    let sm = SmMoft::read_csv(std::fs::File::open(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut seen = Vec::new();
    for (q, want) in [("H.?.M.?.T", 1), ("H.?.T.?.H", 2), ("H.?.M.?.H", 2), ("H", 3)] {
        let e = parse(q).map_err(|e| e.to_string())?;
        let oracle = sm
            .oids()
            .into_iter()
            .filter(|o| kit::resm_matches(&e, &SmGraph::build(&sm, o, &c.olap).unwrap().stop_sequence(), &c.olap))
            .count();
        let out = cmd_query(Some(&fixture("catalog.json")), &path, &format!("count({q})")).map_err(|e| e.to_string())?;
        let got: usize = out.trim().parse().map_err(|_| format!("bad output {out:?}"))?;
        if oracle != want || got != want {
            return Err(format!("{q}: expected {want}, oracle {oracle}, matcher {got}"));
        }
        seen.push(format!("{q}={got}"));
    }
    Ok(seen.join(" "))
}

fn random_instance(seed: u64) -> (Pia, Trajectory) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_pois = rng.gen_range(1..=5);
    let pia = kit::random_pia(&mut rng, n_pois);
    let n = rng.gen_range(1..=50);
    let tr = kit::random_trajectory(&mut rng, "A", &pia, n);
    (pia, tr)
}

fn stop_oracle() -> Verdict {
    let mut bad = 0;
    let mut total_stops = 0;
    for seed in 0..500 {
        let (pia, tr) = random_instance(seed);
        let got: Vec<_> = detect_stops(&tr, &pia).iter().map(|s| (s.poi, s.first_index, s.last_index)).collect();
        total_stops += got.len();
        if got != kit::brute_stops(&tr, &pia) {
            bad += 1;
        }
    }
    if bad == 0 {
        Ok(format!("500 instances, {total_stops} stops, 0 discrepancies"))
    } else {
        Err(format!("{bad} of 500 instances differ"))
    }
}

fn matcher_oracle() -> Verdict {
    let c = catalog();
    let full = kit::Vocabulary::of(&c.olap);
    let mut bare = full.clone();
    bare.time.clear();
    bare.dims.iter_mut().for_each(|d| d.2 = None);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut pairs, mut bad, mut hits) = (0, 0, 0);
    for k in 0..1000 {
        let voc = if k % 2 == 0 { &bare } else { &full };
        let e = kit::random_resm(&mut rng, voc, 4);
        let auto = ResmAutomaton::compile(&e, &c.olap).map_err(|err| format!("{e}: {err}"))?;
        for _ in 0..3 {
            let seq = kit::random_stop_sequence(&mut rng, &c.olap, 6);
            let want = kit::resm_matches(&e, &seq, &c.olap);
            let got = auto.matches(&seq, &c.olap).map_err(|e| e.to_string())?;
            pairs += 1;
            hits += usize::from(want);
            if got != want {
                bad += 1;
            }
        }
    }
    if bad == 0 {
        Ok(format!("{pairs} pairs ({hits} matching), 0 discrepancies"))
    } else {
        Err(format!("{bad} of {pairs} pairs differ"))
    }
}

fn invariants() -> Verdict {
    let c = catalog();
    let mut checked = 0;
    for seed in 0..300 {
        let (pia, tr) = random_instance(10_000 + seed);
        let s = tr.samples();
        let stops = detect_stops(&tr, &pia);
        for (i, st) in stops.iter().enumerate() {
            let poi = &pia.pois()[st.poi];
            if !(st.interval.end() - st.interval.start() > poi.delta) {
                return Err(format!("seed {seed}: stop not longer than delta"));
            }
            let inside = |k: usize| geometry::contains(&poi.geometry, &s[k].p, poi.tol);
            if !(st.first_index..=st.last_index).all(inside)
                || (st.first_index > 0 && inside(st.first_index - 1))
                || (st.last_index + 1 < s.len() && inside(st.last_index + 1))
            {
                return Err(format!("seed {seed}: stop not maximal"));
            }
            for other in &stops[i + 1..] {
                if !st.interval.strictly_precedes(&other.interval) {
                    return Err(format!("seed {seed}: stop intervals not totally ordered"));
                }
            }
        }
        let mut cover = vec![0; s.len()];
        for st in &stops {
            (st.first_index..=st.last_index).for_each(|k| cover[k] += 1);
        }
        for mv in detect_moves(&tr, &stops) {
            (mv.first_index..=mv.last_index).for_each(|k| cover[k] += 1);
        }
        if cover.iter().any(|&n| n != 1) {
            return Err(format!("seed {seed}: stops and moves do not partition the samples"));
        }
        checked += 1;
    }
    // graph round trip and interval aggregate order on random tables
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let gids = ["H1", "H2", "L", "E"];
    for _ in 0..300 {
        let mut records = Vec::new();
        let mut t = rng.gen_range(0.0..10.0);
        for _ in 0..rng.gen_range(1..12) {
            let len = rng.gen_range(0.1..30.0);
            records.push(semtraj::stops::SmRecord {
                oid: ObjectId::new("A"),
                gid: gids[rng.gen_range(0..4)].into(),
                interval: Interval::new(t, t + len).unwrap(),
            });
            t += len + rng.gen_range(0.1..30.0);
        }
        let sm = SmMoft::from_records(records);
        let g = SmGraph::build(&sm, &ObjectId::new("A"), &c.olap).map_err(|e| e.to_string())?;
        let expected: Vec<(GeometryId, Interval)> = sm.records().iter().map(|r| (r.gid.clone(), r.interval)).collect();
        if g.unfold() != expected {
            return Err("unfold(build(sm)) differs from the sorted table".into());
        }
        let ivs: Vec<Interval> = expected.iter().map(|(_, i)| *i).collect();
        let span = interval_aggregate(&ivs, IntervalAggregate::TimespanL).unwrap();
        let max = interval_aggregate(&ivs, IntervalAggregate::MaxL).unwrap();
        if span < max {
            return Err(format!("timespan_l {span} < max_l {max}"));
        }
        checked += 1;
    }
    Ok(format!("{checked} randomized cases"))
}

fn synthetic(pia: &Pia, samples: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = 1000;
    (0..samples / per).map(|k| kit::random_trajectory(&mut rng, &format!("o{k}"), pia, per)).collect()
}

fn time_detection(pia: &Pia, trs: &[Trajectory], repeats: usize) -> f64 {
    (0..repeats)
        .map(|_| {
            let start = Instant::now();
            let n: usize = trs.iter().map(|tr| detect_stops(tr, pia).len()).sum();
            std::hint::black_box(n);
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn scaling() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let pia = kit::random_pia(&mut rng, 100);
    let mut times = Vec::new();
    for (i, n) in [100_000, 200_000, 400_000, 800_000].into_iter().enumerate() {
        let trs = synthetic(&pia, n, i as u64);
        times.push(time_detection(&pia, &trs, 3));
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1] / w[0]).collect();
    let big = synthetic(&pia, 1_000_000, 9);
    let million = time_detection(&pia, &big, 1);
    let summary = format!(
        "times {:?}s, ratios {:?}, 1e6 samples in {:.3}s",
        times.iter().map(|t| (t * 1e3).round() / 1e3).collect::<Vec<_>>(),
        ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>(),
        million
    );
    if ratios.iter().all(|&r| r <= 2.5) && million <= 10.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn geometry_checks() -> Verdict {
    let unit = geometry::area(&Geometry::Polygon(
        Polygon::rect(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).map_err(|e| e.to_string())?,
    ));
    if unit != 1.0 {
        return Err(format!("unit square area {unit}"));
    }
    let tri = geometry::area(&Geometry::Polygon(
        Polygon::new(vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(0.0, 3.0)]).map_err(|e| e.to_string())?,
    ));
    if (tri - 6.0).abs() > 1e-9 {
        return Err(format!("triangle area {tri}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let entries: Vec<(GeometryId, Geometry, f64)> = kit::disjoint_squares(&mut rng, 100, 1.0)
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let g = match i % 3 {
                0 => Geometry::Polygon(Polygon::rect(a, b).unwrap()),
                1 => Geometry::Polyline(Polyline::new(vec![a, b]).unwrap()),
                _ => Geometry::Point(a),
            };
            (GeometryId::new(format!("g{i}")), g, if i % 3 == 0 { 0.0 } else { 0.3 })
        })
        .collect();
    let idx = SpatialIndex::build_with_tolerance(entries.clone()).map_err(|e| e.to_string())?;
    let mut hits = 0;
    for _ in 0..10_000 {
        let p = Point::new(rng.gen_range(-5.0..105.0), rng.gen_range(-5.0..105.0));
        let got = idx.point_query(&p);
        if got != kit::linear_point_query(&entries, &p) {
            return Err(format!("point query differs at {p:?}"));
        }
        hits += usize::from(!got.is_empty());
    }
    Ok(format!("unit square 1, triangle {tri}, 10000 queries ({hits} hits) agree"))
}

fn pipeline_once(dir: &Path) -> Result<String, String> {
    let cat = fixture("catalog.json").display().to_string();
    let moft = fixture("moft.csv").display().to_string();
    let sm = dir.join("sm.csv").display().to_string();
    let step = |args: &[&str]| -> Result<String, String> {
        let mut argv = vec!["semtraj", "--catalog", cat.as_str()];
        argv.extend_from_slice(args);
        run_from(argv).map_err(|e| e.to_string())
    };
    let mut out = step(&["detect", "--moft", &moft, "--out", &sm])?;
    for oid in ["O1", "O2", "O3"] {
        out += &step(&["graph", "--smmoft", &sm, oid])?;
        out += &step(&["graph", "--asm", "--smmoft", &sm, oid])?;
    }
    for q in ["count(H.?.M.?.T)", "oids(H.?.T.?.H)", "timespan_l(*)", "area(H1,H2,L)"] {
        out += &step(&["query", "--smmoft", &sm, q])?;
    }
    out += &std::fs::read_to_string(&sm).map_err(|e| e.to_string())?;
    Ok(out)
}

fn determinism() -> Verdict {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = pipeline_once(a.path())?;
    let second = pipeline_once(b.path())?;
    if first == second {
        Ok(format!("{} identical bytes across two runs", first.len()))
    } else {
        Err("outputs differ between runs".into())
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("running-example reproduction", running_example),
        ("reference query counts", reference_counts),
        ("stop detector vs brute force", stop_oracle),
        ("matcher vs denotational oracle", matcher_oracle),
        ("randomized invariants", invariants),
        ("detection scaling", scaling),
        ("geometry", geometry_checks),
        ("pipeline determinism", determinism),
    ];
    let mut failed = BTreeSet::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {} {name}: {detail}", i + 1);
                failed.insert(i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
