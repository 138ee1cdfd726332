use std::collections::{BTreeMap, BTreeSet};

use cfcolor::anchored::AnchoredCF;
use cfcolor::oracle::definitional_anchored;
use cfcolor::{AxisRect, GlobalColor, ObjectId, RecolorDiff};
use cfcolor_harness::bench::bench;
use cfcolor_harness::report::Verified;
use cfcolor_harness::structure::build;
use cfcolor_harness::workload::{generate, parse_workload, to_jsonl, GenParams, ObjectKind, ObjectSpec, Op, WorkloadEvent};
use cfcolor_harness::{run, run_with, HarnessError, Structure, StructureKind, StructureParams, VerifyMode};

/// Max recolorings of the seed-0 anchored workload with n = 256 and 30%
/// deletions, re-derived below from the definitional coloring.
const FROZEN_ANCHORED_256_MAX_RECOLORINGS: usize = 8;

fn gen(kind: ObjectKind, n: usize, r: f64, seed: u64) -> Vec<WorkloadEvent> {
    generate(&GenParams::new(kind, n, r, seed)).unwrap()
}

#[test]
fn gen_is_deterministic() {
    let a = gen(ObjectKind::UnitSquare, 10, 0.0, 1);
    let b = gen(ObjectKind::UnitSquare, 10, 0.0, 1);
    assert_eq!(a.len(), 10);
    assert!(a.iter().all(|e| e.op == Op::Insert));
    assert_eq!(to_jsonl(&a), to_jsonl(&b));
    assert_ne!(to_jsonl(&a), to_jsonl(&gen(ObjectKind::UnitSquare, 10, 0.0, 2)));
}

#[test]
fn gen_rejects_coordinates_outside_universe() {
    let p = GenParams {
        universe: Some(16),
        extent: Some(17.0),
        ..GenParams::new(ObjectKind::UniverseRect, 5, 0.0, 0)
    };
    assert!(matches!(generate(&p), Err(HarnessError::InvalidParams(_))));
    let ok = GenParams {
        extent: Some(16.0),
        ..p
    };
    assert_eq!(generate(&ok).unwrap().len(), 5);
}

#[test]
fn gen_rejects_missing_parameters() {
    assert!(matches!(
        generate(&GenParams::new(ObjectKind::BoundedRect, 5, 0.0, 0)),
        Err(HarnessError::InvalidParams(_))
    ));
    assert!(matches!(
        generate(&GenParams::new(ObjectKind::Point1d, 5, 1.5, 0)),
        Err(HarnessError::InvalidParams(_))
    ));
}

#[test]
fn point_workload_deletes_only_live_ids() {
    let ev = gen(ObjectKind::Point2d, 1000, 0.3, 7);
    let inserts = ev.iter().filter(|e| e.op == Op::Insert).count();
    assert_eq!(inserts, 1000);
    assert!((1200..=1400).contains(&ev.len()), "{} events", ev.len());
    let mut live = BTreeSet::new();
    for e in &ev {
        match e.op {
            Op::Insert => assert!(live.insert(e.id)),
            Op::Delete => assert!(live.remove(&e.id), "delete of {} not live", e.id),
        }
    }
    assert_eq!(parse_workload(&to_jsonl(&ev)).unwrap(), ev);
}

#[test]
fn empty_workload_gives_empty_report() {
    let r = run(StructureKind::Anchored, &[], VerifyMode::OracleEveryStep, StructureParams::default(), "empty").unwrap();
    assert!(r.steps.is_empty());
    assert_eq!(r.summary.max_recolorings, 0);
    assert_eq!(r.exit_code(), 0);
}

fn definitional_colors(s: &AnchoredCF) -> BTreeMap<ObjectId, u64> {
    definitional_anchored(s)
}

#[test]
fn anchored_256_every_step_within_frozen_bound() {
    let ev = gen(ObjectKind::AnchoredRect, 256, 0.3, 0);
    let r = run(StructureKind::Anchored, &ev, VerifyMode::OracleEveryStep, StructureParams::default(), "w").unwrap();
    assert_eq!(r.exit_code(), 0, "{:?}", r.summary.violations);
    assert!(r.steps.iter().all(|s| s.verified == Verified::Passed));

    // recount recolorings from the definitional coloring before and after
    let mut s = AnchoredCF::new();
    let mut before = BTreeMap::new();
    let mut derived_max = 0;
    for (e, step) in ev.iter().zip(&r.steps) {
        match e.object {
            Some(ObjectSpec::AnchoredRect { x, y }) => {
                s.insert(AxisRect::anchored(x, y, ObjectId(e.id))).unwrap();
            }
            _ => {
                s.delete(ObjectId(e.id)).unwrap();
            }
        }
        let after = definitional_colors(&s);
        let changed = before.iter().filter(|(id, c)| after.get(*id).is_some_and(|a| a != *c)).count();
        assert_eq!(changed, step.recolorings, "step {}", step.step);
        derived_max = derived_max.max(changed);
        before = after;
    }
    assert_eq!(derived_max, r.summary.max_recolorings);
    assert_eq!(r.summary.max_recolorings, FROZEN_ANCHORED_256_MAX_RECOLORINGS);
}

/// Reports every object with one color.
struct OneColor(Box<dyn Structure>);

impl Structure for OneColor {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> cfcolor_harness::Result<RecolorDiff> {
        self.0.insert(id, o)
    }
    fn delete(&mut self, id: ObjectId) -> cfcolor_harness::Result<RecolorDiff> {
        self.0.delete(id)
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors().into_iter().map(|(id, _)| (id, GlobalColor::new(0, 0))).collect()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> Result<(), String> {
        Err("broken build".into())
    }
}

#[test]
fn broken_structure_fails_with_witness() {
    let ev = gen(ObjectKind::AnchoredRect, 50, 0.0, 3);
    let inner = build(StructureKind::Anchored, &StructureParams::default()).unwrap();
    let r = run_with(
        Box::new(OneColor(inner)),
        StructureKind::Anchored,
        &ev,
        VerifyMode::OracleEveryStep,
        StructureParams::default(),
        "w",
    )
    .unwrap();
    assert_ne!(r.exit_code(), 0);
    let v = &r.summary.violations[0];
    assert_eq!(v.check, "oracle");
    let w = v.witness.as_ref().expect("witness");
    assert!(w.members.len() >= 2);
    // two nested anchored rectangles already conflict
    assert_eq!(v.step, 1);
    assert_eq!(r.steps.len(), 2);
    assert_eq!(r.steps[1].verified, Verified::Failed);
    let json = r.to_json().unwrap();
    assert!(json.contains("\"witness\""));

    let inner = build(StructureKind::Anchored, &StructureParams::default()).unwrap();
    let r = run_with(Box::new(OneColor(inner)), StructureKind::Anchored, &ev, VerifyMode::Invariants, StructureParams::default(), "w").unwrap();
    assert_eq!(r.exit_code(), 2);
    assert_eq!(r.summary.violations[0].check, "invariants");
}

fn workload_for(kind: StructureKind, seed: u64) -> Vec<WorkloadEvent> {
    let r = if kind.supports_delete() { 0.3 } else { 0.0 };
    let p = GenParams {
        c: Some(2.0),
        universe: Some(32),
        ..GenParams::new(kind.object_kind(), 150, r, seed)
    };
    generate(&p).unwrap()
}

#[test]
fn totals_match_structure_counter_for_every_kind() {
    for kind in StructureKind::ALL {
        let ev = workload_for(kind, 4);
        let r = run(kind, &ev, VerifyMode::Invariants, StructureParams::default(), "w").unwrap();
        assert_eq!(r.exit_code(), 0, "{kind}: {:?}", r.summary.violations);
        let sum: u64 = r.steps.iter().map(|s| s.recolorings as u64).sum();
        assert_eq!(sum, r.summary.structure_total_recolorings, "{kind}");
        assert_eq!(sum, r.summary.total_recolorings, "{kind}");
        for s in &r.steps {
            assert_eq!(s.ell.is_some(), s.levels.is_some());
        }
    }
}

#[test]
fn oracle_sampled_passes_for_every_kind() {
    for kind in StructureKind::ALL {
        let ev = workload_for(kind, 5);
        let r = run(kind, &ev, VerifyMode::OracleSampled, StructureParams::default(), "w").unwrap();
        assert_eq!(r.exit_code(), 0, "{kind}: {:?}", r.summary.violations);
        assert_eq!(r.steps.last().unwrap().verified, Verified::Passed);
    }
}

#[test]
fn sampled_mode_thins_out_above_256() {
    let ev = gen(ObjectKind::UnitSquare, 400, 0.0, 9);
    let r = run(StructureKind::Square, &ev, VerifyMode::OracleSampled, StructureParams::default(), "w").unwrap();
    for s in &r.steps {
        let expect = s.n <= 256 || (s.step + 1) % 32 == 0 || s.step + 1 == ev.len();
        assert_eq!(s.verified == Verified::Passed, expect, "step {}", s.step);
    }
}

#[test]
fn kind_mismatch_and_unsupported_delete_are_rejected() {
    let ev = gen(ObjectKind::Point1d, 10, 0.5, 1);
    let e = run(StructureKind::Square, &ev, VerifyMode::None, StructureParams::default(), "w").unwrap_err();
    assert!(matches!(e, HarnessError::KindMismatch { .. }), "{e}");
    let e = run(StructureKind::SemiInterval, &ev, VerifyMode::None, StructureParams::default(), "w").unwrap_err();
    assert!(matches!(e, HarnessError::Unsupported { .. }), "{e}");
}

#[test]
fn missing_parameters_are_inferred() {
    let p = GenParams {
        c: Some(2.5),
        ..GenParams::new(ObjectKind::BoundedRect, 40, 0.0, 2)
    };
    let ev = generate(&p).unwrap();
    let r = run(StructureKind::Bounded, &ev, VerifyMode::OracleEveryStep, StructureParams::default(), "w").unwrap();
    let c = r.config.params.c.unwrap();
    assert!((1.0..=2.5).contains(&c));
    assert_eq!(r.exit_code(), 0);

    let p = GenParams {
        universe: Some(16),
        ..GenParams::new(ObjectKind::UniverseRect, 40, 0.0, 2)
    };
    let ev = generate(&p).unwrap();
    let r = run(StructureKind::Universe, &ev, VerifyMode::OracleEveryStep, StructureParams::default(), "w").unwrap();
    assert!(r.config.params.universe.unwrap() <= 16);
    assert_eq!(r.exit_code(), 0);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for kind in [StructureKind::Square, StructureKind::FullInterval] {
        let ev = workload_for(kind, 6);
        let a = run(kind, &ev, VerifyMode::Invariants, StructureParams::default(), "w").unwrap();
        let b = run(kind, &ev, VerifyMode::Invariants, StructureParams::default(), "w").unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }
}

#[test]
fn csv_mirrors_steps() {
    let ev = workload_for(StructureKind::FullInterval, 2);
    let r = run(StructureKind::FullInterval, &ev, VerifyMode::None, StructureParams::default(), "w").unwrap();
    let csv = r.to_csv().unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,op,id,n,recolorings,distinct_colors,verified,ell");
    assert_eq!(lines.len(), r.steps.len() + 1);
    assert!(lines[1].ends_with(",skipped,0"), "{}", lines[1]);
}

#[test]
fn bench_rows_are_ordered_and_repeatable() {
    let a = bench(StructureKind::Anchored, &[64, 128], &[0, 1, 2], 0.3, StructureParams::default()).unwrap();
    let keys: Vec<_> = a.rows.iter().map(|r| (r.size, r.seed)).collect();
    assert_eq!(keys, vec![(64, 0), (64, 1), (64, 2), (128, 0), (128, 1), (128, 2)]);
    let b = bench(StructureKind::Anchored, &[64, 128], &[0, 1, 2], 0.3, StructureParams::default()).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let semi = bench(StructureKind::SemiInterval, &[32], &[0], 0.3, StructureParams::default()).unwrap();
    assert_eq!(semi.config.delete_ratio, 0.0);
    assert_eq!(semi.rows[0].final_n, 32);
}
