//! Workload events, their JSONL encoding and the seeded generator.
//!
//! Randomness comes from `ChaCha8Rng` seeded with `seed_from_u64`, which is
//! specified bit-for-bit and therefore regenerates identically everywhere.
//! Coordinates are drawn on a 1/16 lattice so ties occur regularly.

use std::fmt;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Geometric payload of an insert event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectSpec {
    /// Square `[x, x+1] x [y, y+1]`.
    UnitSquare { x: f64, y: f64 },
    /// Rectangle `[0, x] x [0, y]`.
    AnchoredRect { x: f64, y: f64 },
    BoundedRect { x1: f64, x2: f64, y1: f64, y2: f64 },
    UniverseRect { x1: f64, x2: f64, y1: f64, y2: f64 },
    #[serde(rename = "point_1d")]
    Point1d { x: f64 },
    #[serde(rename = "point_2d")]
    Point2d { x: f64, y: f64 },
}

impl ObjectSpec {
    pub fn kind(&self) -> ObjectKind {
        match self {
            ObjectSpec::UnitSquare { .. } => ObjectKind::UnitSquare,
            ObjectSpec::AnchoredRect { .. } => ObjectKind::AnchoredRect,
            ObjectSpec::BoundedRect { .. } => ObjectKind::BoundedRect,
            ObjectSpec::UniverseRect { .. } => ObjectKind::UniverseRect,
            ObjectSpec::Point1d { .. } => ObjectKind::Point1d,
            ObjectSpec::Point2d { .. } => ObjectKind::Point2d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ObjectKind {
    UnitSquare,
    AnchoredRect,
    BoundedRect,
    UniverseRect,
    #[serde(rename = "point_1d")]
    #[value(name = "point_1d")]
    Point1d,
    #[serde(rename = "point_2d")]
    #[value(name = "point_2d")]
    Point2d,
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ObjectKind::UnitSquare => "unit_square",
            ObjectKind::AnchoredRect => "anchored_rect",
            ObjectKind::BoundedRect => "bounded_rect",
            ObjectKind::UniverseRect => "universe_rect",
            ObjectKind::Point1d => "point_1d",
            ObjectKind::Point2d => "point_2d",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Insert,
    Delete,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadEvent {
    pub op: Op,
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<ObjectSpec>,
}

impl WorkloadEvent {
    pub fn insert(id: u64, object: ObjectSpec) -> Self {
        WorkloadEvent {
            op: Op::Insert,
            id,
            object: Some(object),
        }
    }

    pub fn delete(id: u64) -> Self {
        WorkloadEvent {
            op: Op::Delete,
            id,
            object: None,
        }
    }
}

/// Parses JSONL; blank lines are skipped. Checks that inserts carry an
/// object and use fresh ids and that deletes name live ids.
pub fn parse_workload(text: &str) -> Result<Vec<WorkloadEvent>> {
    let mut out = Vec::new();
    let mut live = std::collections::BTreeSet::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse = |message: String| HarnessError::Parse { line: k + 1, message };
        let ev: WorkloadEvent = serde_json::from_str(line).map_err(|e| parse(e.to_string()))?;
        match ev.op {
            Op::Insert if ev.object.is_none() => return Err(parse("insert without object".into())),
            Op::Insert if !live.insert(ev.id) => return Err(parse(format!("id {} inserted twice", ev.id))),
            Op::Delete if !live.remove(&ev.id) => return Err(parse(format!("id {} is not live", ev.id))),
            _ => {}
        }
        out.push(ev);
    }
    Ok(out)
}

pub fn to_jsonl(events: &[WorkloadEvent]) -> String {
    let mut s = String::new();
    for ev in events {
        s.push_str(&serde_json::to_string(ev).expect("events serialize"));
        s.push('\n');
    }
    s
}

/// Generator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub kind: ObjectKind,
    /// Number of insertions.
    pub n: usize,
    /// Expected deletions per insertion, in `[0, 1]`.
    pub delete_ratio: f64,
    pub seed: u64,
    /// Side-length bound for `bounded_rect`.
    pub c: Option<f64>,
    /// Universe size for `universe_rect`.
    pub universe: Option<u64>,
    /// Coordinate range `[0, extent]`; for `universe_rect` coordinates are
    /// integers below `extent`, which must not exceed the universe.
    pub extent: Option<f64>,
}

impl GenParams {
    pub fn new(kind: ObjectKind, n: usize, delete_ratio: f64, seed: u64) -> Self {
        GenParams {
            kind,
            n,
            delete_ratio,
            seed,
            c: None,
            universe: None,
            extent: None,
        }
    }

    fn default_extent(&self) -> f64 {
        match self.kind {
            ObjectKind::UnitSquare => 16.0,
            ObjectKind::BoundedRect => 16.0,
            ObjectKind::AnchoredRect | ObjectKind::Point1d | ObjectKind::Point2d => 1024.0,
            ObjectKind::UniverseRect => self.universe.unwrap_or(0) as f64,
        }
    }
}

fn lattice(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let a = (lo * 16.0).ceil() as i64;
    let b = (hi * 16.0).floor() as i64;
    rng.gen_range(a..=b) as f64 / 16.0
}

/// Deterministic workload for `params`. Deletions pick a uniformly random
/// live id.
pub fn generate(params: &GenParams) -> Result<Vec<WorkloadEvent>> {
    let bad = |m: String| Err(HarnessError::InvalidParams(m));
    if !(0.0..=1.0).contains(&params.delete_ratio) {
        return bad(format!("delete ratio {} outside [0, 1]", params.delete_ratio));
    }
    let extent = params.extent.unwrap_or_else(|| params.default_extent());
    if !(extent.is_finite() && extent >= 0.0) {
        return bad(format!("extent {extent} must be finite and non-negative"));
    }
    let c = match params.kind {
        ObjectKind::BoundedRect => match params.c {
            Some(c) if c.is_finite() && c >= 1.0 => c,
            Some(c) => return bad(format!("size bound c = {c} must be at least 1")),
            None => return bad("bounded_rect needs --c".into()),
        },
        _ => 0.0,
    };
    let universe = match params.kind {
        ObjectKind::UniverseRect => match params.universe {
            Some(u) if u >= 1 => {
                if extent > u as f64 {
                    return bad(format!("coordinates up to {extent} requested in a universe of size {u}"));
                }
                u
            }
            _ => return bad("universe_rect needs --universe N with N >= 1".into()),
        },
        _ => 0,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let p_delete = params.delete_ratio / (1.0 + params.delete_ratio);
    let mut live: Vec<u64> = Vec::new();
    let mut out = Vec::new();
    let mut inserted = 0;
    while inserted < params.n {
        if !live.is_empty() && rng.gen_bool(p_delete) {
            let k = rng.gen_range(0..live.len());
            out.push(WorkloadEvent::delete(live.swap_remove(k)));
            continue;
        }
        let id = inserted as u64;
        let object = match params.kind {
            ObjectKind::UnitSquare => ObjectSpec::UnitSquare {
                x: lattice(&mut rng, 0.0, extent),
                y: lattice(&mut rng, 0.0, extent),
            },
            ObjectKind::AnchoredRect => ObjectSpec::AnchoredRect {
                x: lattice(&mut rng, 1.0 / 16.0, extent.max(1.0 / 16.0)),
                y: lattice(&mut rng, 1.0 / 16.0, extent.max(1.0 / 16.0)),
            },
            ObjectKind::BoundedRect => {
                let (x, y) = (lattice(&mut rng, 0.0, extent), lattice(&mut rng, 0.0, extent));
                let (w, h) = (lattice(&mut rng, 1.0, c), lattice(&mut rng, 1.0, c));
                ObjectSpec::BoundedRect {
                    x1: x,
                    x2: x + w,
                    y1: y,
                    y2: y + h,
                }
            }
            ObjectKind::UniverseRect => {
                let top = (extent as u64).clamp(1, universe);
                let mut side = || {
                    let (a, b) = (rng.gen_range(0..top), rng.gen_range(0..top));
                    (a.min(b) as f64, a.max(b) as f64)
                };
                let (x1, x2) = side();
                let (y1, y2) = side();
                ObjectSpec::UniverseRect { x1, x2, y1, y2 }
            }
            ObjectKind::Point1d => ObjectSpec::Point1d {
                x: lattice(&mut rng, 0.0, extent),
            },
            ObjectKind::Point2d => ObjectSpec::Point2d {
                x: lattice(&mut rng, 0.0, extent),
                y: lattice(&mut rng, 0.0, extent),
            },
        };
        out.push(WorkloadEvent::insert(id, object));
        live.push(id);
        inserted += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_json_shape() {
        let ev = WorkloadEvent::insert(3, ObjectSpec::Point2d { x: 1.0, y: 2.5 });
        assert_eq!(
            serde_json::to_string(&ev).unwrap(),
            r#"{"op":"insert","id":3,"object":{"kind":"point_2d","x":1.0,"y":2.5}}"#
        );
        assert_eq!(serde_json::to_string(&WorkloadEvent::delete(3)).unwrap(), r#"{"op":"delete","id":3}"#);
    }

    #[test]
    fn parse_rejects_dead_delete() {
        let err = parse_workload("{\"op\":\"delete\",\"id\":1}\n").unwrap_err();
        assert!(matches!(err, HarnessError::Parse { line: 1, .. }));
    }

    #[test]
    fn round_trip() {
        let mut p = GenParams::new(ObjectKind::BoundedRect, 50, 0.3, 4);
        p.c = Some(2.0);
        let evs = generate(&p).unwrap();
        assert_eq!(parse_workload(&to_jsonl(&evs)).unwrap(), evs);
    }
}
