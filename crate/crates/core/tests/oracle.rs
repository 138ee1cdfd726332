mod common;

use std::collections::BTreeSet;

use cfcolor::anchored::AnchoredCF;
use cfcolor::oracle::{axis_probes, check_rect_points, check_rects, rect_probes, satisfies, RangeSampling, Rule};
use cfcolor::unimax::{RectPointColorer, UnimaxColorer};
use cfcolor::{AxisRect, GlobalColor, ObjectId, Pt};
use common::{anchored, Op, Script};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gc(c: u64) -> GlobalColor {
    GlobalColor::new(0, c)
}

#[test]
fn rule_examples() {
    assert!(satisfies(Rule::ConflictFree, &[gc(1), gc(1), gc(2)]));
    assert!(!satisfies(Rule::Unimax, &[gc(2), gc(2), gc(1)]));
    assert!(satisfies(Rule::ConflictFree, &[gc(2), gc(2), gc(1)]));
    assert!(!satisfies(Rule::ConflictFree, &[gc(3), gc(3)]));
    assert!(satisfies(Rule::Unimax, &[]));
}

#[test]
fn anchored_after_two_hundred_updates() {
    let mut script = Script::new(ChaCha8Rng::seed_from_u64(61));
    let mut s = AnchoredCF::new();
    for _ in 0..200 {
        match script.step(0.3) {
            Op::Insert(id) => {
                let r = anchored(&mut script.rng, id, 32.0);
                s.insert(r).unwrap();
            }
            Op::Delete(id) => {
                s.delete(id).unwrap();
            }
        }
    }
    let rects: Vec<_> = s.rects().map(|r| (*r, s.global_color(r.id).unwrap())).collect();
    check_rects(&rects, Rule::ConflictFree).unwrap();
}

#[test]
fn witness_names_the_clash() {
    let a = AxisRect::new(0.0, 2.0, 0.0, 2.0, ObjectId(1));
    let b = AxisRect::new(1.0, 3.0, 1.0, 3.0, ObjectId(2));
    let w = check_rects(&[(a, gc(0)), (b, gc(0))], Rule::ConflictFree).unwrap_err();
    let ids: BTreeSet<ObjectId> = w.members.iter().map(|(id, _)| *id).collect();
    assert_eq!(ids, BTreeSet::from([ObjectId(1), ObjectId(2)]));
    assert!(!w.to_string().is_empty());
}

#[test]
fn rect_colorer_fourteen_points_all_ranges() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let pts: Vec<_> = (0..14)
        .map(|k| (ObjectId(k), Pt::new(rng.gen_range(0..6) as f64, rng.gen_range(0..6) as f64)))
        .collect();
    let c = RectPointColorer::color_all(&pts);
    let items: Vec<_> = pts.iter().map(|&(id, p)| (id, p, gc(c.color_of(id).unwrap() as u64))).collect();
    let sampling = RangeSampling {
        exhaustive_limit: 14,
        ..RangeSampling::default()
    };
    check_rect_points(&items, Rule::Unimax, &sampling).unwrap();
}

#[test]
fn axis_probes_cover_coordinates_and_gaps() {
    let p = axis_probes(vec![2.0, 0.0, 2.0, 1.0]);
    for v in [0.0, 0.5, 1.0, 1.5, 2.0] {
        assert!(p.contains(&v), "{v} missing from {p:?}");
    }
}

fn coverage(rects: &[AxisRect], p: Pt) -> BTreeSet<ObjectId> {
    rects.iter().filter(|r| r.contains(p)).map(|r| r.id).collect()
}

proptest! {
    // every non-empty coverage pattern realised by some point of the plane
    // is also realised by a probe
    #[test]
    fn probes_hit_every_face(
        raw in proptest::collection::vec((0u8..12, 0u8..6, 0u8..12, 0u8..6), 1..8),
        samples in proptest::collection::vec((0u16..1500, 0u16..1500), 1..200),
    ) {
        let rects: Vec<AxisRect> = raw
            .iter()
            .enumerate()
            .map(|(k, &(x, w, y, h))| AxisRect::new(x as f64, (x + w) as f64, y as f64, (y + h) as f64, ObjectId(k as u64)))
            .collect();
        let probes = rect_probes(&rects);
        let seen: BTreeSet<BTreeSet<ObjectId>> = probes.iter().map(|&p| coverage(&rects, p)).collect();
        for (sx, sy) in samples {
            let p = Pt::new(sx as f64 / 100.0 - 0.5, sy as f64 / 100.0 - 0.5);
            let c = coverage(&rects, p);
            prop_assert!(c.is_empty() || seen.contains(&c));
        }
        for r in &rects {
            for p in [Pt::new(r.x1, r.y1), Pt::new(r.x2, r.y2), Pt::new(r.x1, r.y2)] {
                prop_assert!(seen.contains(&coverage(&rects, p)));
            }
        }
    }
}
