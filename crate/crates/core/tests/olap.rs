use std::collections::BTreeMap;

use proptest::prelude::*;

use semtraj::olap::{
    DimensionInstance, DimensionSchema, OlapError, TimeCategory, TimeDimension, TimeRange, Value,
};
use semtraj::temporal::Interval;
use semtraj::Catalog;
use semtraj_testkit as kit;

fn catalog() -> Catalog {
    Catalog::from_json(include_str!("../fixtures/paris/catalog.json")).unwrap()
}

#[test]
fn fixture_rollups_and_attributes() {
    let c = catalog();
    let h = c.olap.dimension("H").unwrap();
    assert_eq!(h.name(), "Hotels");
    assert_eq!(h.rollup("hotelId", "category", "H1").unwrap(), "3-star");
    assert_eq!(h.attribute("hotelId", "name", "H1").unwrap(), &Value::Text("Hilton".into()));
    let d = c.olap.dimension("Districts").unwrap();
    assert_eq!(d.attribute("distr", "income", "D7").unwrap(), &Value::Number(2500.0));
    assert_eq!(c.olap.alpha_for("Museums").unwrap().alpha("Louvre").unwrap().as_str(), "L");
}

#[test]
fn morning_label_sets() {
    let t = TimeDimension::standard(1.0);
    let w = |a, b| Interval::new(a, b).unwrap();
    assert_eq!(t.label_instant_set("timeOfDay", "Morning", &w(0.0, 24.0)).unwrap(), vec![w(6.0, 12.0)]);
    assert_eq!(t.label_instant_set("timeOfDay", "Morning", &w(10.0, 30.0)).unwrap(), vec![w(10.0, 12.0)]);
    assert!(t.label_instant_set("timeOfDay", "Morning", &w(13.0, 17.0)).unwrap().is_empty());
    assert_eq!(t.time_label("dayOfWeek", 8.0 * 24.0).unwrap(), "Tuesday");
}

fn diamond(consistent: bool) -> Result<DimensionInstance, OlapError> {
    let levels = ["store", "city", "region", "all"].map(String::from).to_vec();
    let edges = [("store", "city"), ("store", "region"), ("city", "all"), ("region", "all")]
        .map(|(a, b)| (a.to_owned(), b.to_owned()))
        .to_vec();
    let schema = DimensionSchema::new("Stores", None, levels, edges, BTreeMap::new())?;
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
    let members = BTreeMap::from([
        ("store".to_owned(), set(&["s1"])),
        ("city".to_owned(), set(&["c1"])),
        ("region".to_owned(), set(&["r1"])),
        ("all".to_owned(), set(&["a", "b"])),
    ]);
    let map = |k: &str, v: &str| BTreeMap::from([(k.to_owned(), v.to_owned())]);
    let rollups = BTreeMap::from([
        (("store".to_owned(), "city".to_owned()), map("s1", "c1")),
        (("store".to_owned(), "region".to_owned()), map("s1", "r1")),
        (("city".to_owned(), "all".to_owned()), map("c1", "a")),
        (("region".to_owned(), "all".to_owned()), map("r1", if consistent { "a" } else { "b" })),
    ]);
    DimensionInstance::new(schema, members, rollups, BTreeMap::new())
}

#[test]
fn diamond_paths_must_agree() {
    assert_eq!(diamond(true).unwrap().rollup("store", "all", "s1").unwrap(), "a");
    assert!(diamond(false).is_err());
}

fn arb_category() -> impl Strategy<Value = TimeCategory> {
    (prop::collection::vec(1u32..20, 1..6), 0.0f64..50.0).prop_map(|(widths, offset)| {
        let mut start = 0.0;
        let ranges: Vec<TimeRange> = widths
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let r = TimeRange { label: format!("L{}", i % 3), start, end: start + *w as f64 };
                start += *w as f64;
                r
            })
            .collect();
        TimeCategory::from_ranges("c", start, offset, ranges).unwrap()
    })
}

proptest! {
    #[test]
    fn label_pieces_agree_with_labelling(
        cat in arb_category(),
        a in -100.0f64..100.0,
        len in 0.0f64..120.0,
        fs in prop::collection::vec(0.0f64..1.0, 20),
    ) {
        let w = Interval::new(a, a + len).unwrap();
        for label in ["L0", "L1", "L2"] {
            if !cat.has_label(label) {
                continue;
            }
            let pieces = cat.label_pieces(label, &w);
            prop_assert_eq!(!pieces.is_empty(), kit::label_occurs(&cat, label, &w));
            let eps = 1e-7;
            let mut probes: Vec<f64> = fs.iter().map(|f| a + f * len).collect();
            for p in &pieces {
                prop_assert!(p.start() >= w.start() && p.end() <= w.end() && p.start() < p.end());
                probes.extend([p.start(), p.start() + eps, p.end() - eps, p.end() + eps, p.start() - eps]);
            }
            for t in probes {
                if t < w.start() || t >= w.end() {
                    continue;
                }
                let covered = pieces.iter().any(|p| p.start() <= t && t < p.end());
                prop_assert_eq!(covered, cat.label_at(t) == label, "t={} pieces={:?}", t, pieces);
            }
        }
    }
}
