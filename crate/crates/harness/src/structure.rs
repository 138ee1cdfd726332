//! Uniform adapter over the library structures.

use std::fmt;

use cfcolor::anchored::AnchoredCF;
use cfcolor::framework::{FullyDynamicEngine, LevelInfo, SemiDynamicEngine};
use cfcolor::oracle::{definitional_anchored, definitional_common_point, definitional_grid_squares};
use cfcolor::rect::{BoundedRectCF, CommonPointCF, UniverseRectCF};
use cfcolor::square::GridSquareCF;
use cfcolor::unimax::{IntervalPointColorer, RectPointColorer};
use cfcolor::{AxisRect, GlobalColor, ObjectId, Pt, RecolorDiff, UnitSquare};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::workload::{ObjectKind, ObjectSpec, Op, WorkloadEvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    /// Anchored rectangles.
    Anchored,
    /// Unit squares.
    Square,
    /// Rectangles with sides in `[1, c]`.
    Bounded,
    /// Integer rectangles in a fixed universe.
    Universe,
    /// Insertion-only framework over points on a line.
    SemiInterval,
    /// Insertion-only framework over points in the plane.
    SemiRect,
    /// Fully dynamic framework over points on a line.
    FullInterval,
    /// Fully dynamic framework over points in the plane.
    FullRect,
}

impl StructureKind {
    pub const ALL: [StructureKind; 8] = [
        StructureKind::Anchored,
        StructureKind::Square,
        StructureKind::Bounded,
        StructureKind::Universe,
        StructureKind::SemiInterval,
        StructureKind::SemiRect,
        StructureKind::FullInterval,
        StructureKind::FullRect,
    ];

    pub fn object_kind(self) -> ObjectKind {
        match self {
            StructureKind::Anchored => ObjectKind::AnchoredRect,
            StructureKind::Square => ObjectKind::UnitSquare,
            StructureKind::Bounded => ObjectKind::BoundedRect,
            StructureKind::Universe => ObjectKind::UniverseRect,
            StructureKind::SemiInterval | StructureKind::FullInterval => ObjectKind::Point1d,
            StructureKind::SemiRect | StructureKind::FullRect => ObjectKind::Point2d,
        }
    }

    pub fn supports_delete(self) -> bool {
        !matches!(self, StructureKind::SemiInterval | StructureKind::SemiRect)
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

/// Parameters some structures need. Missing values are inferred from the
/// workload by [`StructureParams::resolve`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StructureParams {
    pub c: Option<f64>,
    pub universe: Option<u64>,
}

impl StructureParams {
    /// Fills in `c` as the longest side and `universe` as one past the
    /// largest coordinate of the workload, where needed.
    pub fn resolve(self, kind: StructureKind, events: &[WorkloadEvent]) -> Self {
        let objects = events.iter().filter_map(|e| e.object);
        match kind {
            StructureKind::Bounded if self.c.is_none() => {
                let c = objects
                    .filter_map(|o| match o {
                        ObjectSpec::BoundedRect { x1, x2, y1, y2 } => Some((x2 - x1).max(y2 - y1)),
                        _ => None,
                    })
                    .fold(1.0, f64::max);
                StructureParams { c: Some(c), ..self }
            }
            StructureKind::Universe if self.universe.is_none() => {
                let top = objects
                    .filter_map(|o| match o {
                        ObjectSpec::UniverseRect { x2, y2, .. } => Some(x2.max(y2)),
                        _ => None,
                    })
                    .fold(0.0, f64::max);
                StructureParams {
                    universe: Some(top.max(0.0) as u64 + 1),
                    ..self
                }
            }
            _ => self,
        }
    }
}

/// What the run loop needs from a structure.
pub trait Structure {
    fn insert(&mut self, id: ObjectId, object: &ObjectSpec) -> Result<RecolorDiff>;
    fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Colors of all live objects.
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)>;
    /// Cumulative recolorings as counted by the structure itself.
    fn total_recolorings(&self) -> u64;
    /// Internal consistency: tree audits plus agreement with the
    /// definitional recomputation, or the framework invariants.
    fn check_invariants(&self) -> std::result::Result<(), String>;
    /// Last level index and set states, for framework structures.
    fn levels(&self) -> Option<(u32, Vec<LevelInfo>)> {
        None
    }
}

fn mismatch(kind: StructureKind, object: &ObjectSpec) -> HarnessError {
    HarnessError::KindMismatch {
        structure: kind.to_string(),
        object: object.kind().to_string(),
    }
}

fn core(e: cfcolor::Error) -> HarnessError {
    HarnessError::Structure { step: 0, source: e }
}

/// Axis-parallel rectangle covered by a rectangle-like object.
pub fn as_rect(id: ObjectId, o: &ObjectSpec) -> Option<AxisRect> {
    match *o {
        ObjectSpec::UnitSquare { x, y } => Some(UnitSquare::new(x, y, id).as_rect()),
        ObjectSpec::AnchoredRect { x, y } => Some(AxisRect::anchored(x, y, id)),
        ObjectSpec::BoundedRect { x1, x2, y1, y2 } | ObjectSpec::UniverseRect { x1, x2, y1, y2 } => {
            Some(AxisRect::new(x1, x2, y1, y2, id))
        }
        _ => None,
    }
}

fn audit_common(cp: &CommonPointCF) -> std::result::Result<(), String> {
    cp.east().audit().map_err(|v| format!("east tree: {}", v.message))?;
    cp.west().audit().map_err(|v| format!("west tree: {}", v.message))?;
    let def = definitional_common_point(cp);
    for (id, c) in cp.colors() {
        if def.get(&id) != Some(&c) {
            return Err(format!("{id} has pair {c:?}, definition gives {:?}", def.get(&id)));
        }
    }
    Ok(())
}

struct Anchored(AnchoredCF);

impl Structure for Anchored {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> Result<RecolorDiff> {
        match *o {
            ObjectSpec::AnchoredRect { x, y } => self.0.insert(AxisRect::anchored(x, y, id)).map_err(core),
            _ => Err(mismatch(StructureKind::Anchored, o)),
        }
    }
    fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        self.0.delete(id).map_err(core)
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors().collect()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> std::result::Result<(), String> {
        self.0.tree().audit().map_err(|v| v.message)?;
        let def = definitional_anchored(&self.0);
        for (id, c) in self.0.colors() {
            if def.get(&id) != Some(&c.local) {
                return Err(format!("{id} has color {c}, definition gives {:?}", def.get(&id)));
            }
        }
        Ok(())
    }
}

struct Square(GridSquareCF);

impl Structure for Square {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> Result<RecolorDiff> {
        match *o {
            ObjectSpec::UnitSquare { x, y } => self.0.insert(UnitSquare::new(x, y, id)).map_err(core),
            _ => Err(mismatch(StructureKind::Square, o)),
        }
    }
    fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        self.0.delete(id).map_err(core)
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> std::result::Result<(), String> {
        for (cell, p) in self.0.cells() {
            p.tree().audit().map_err(|v| format!("cell {cell:?}: {}", v.message))?;
        }
        let def = definitional_grid_squares(&self.0);
        for (id, c) in self.0.colors() {
            if def.get(&id) != Some(&c) {
                return Err(format!("{id} has color {c}, definition gives {:?}", def.get(&id)));
            }
        }
        Ok(())
    }
}

struct Bounded(BoundedRectCF);

impl Structure for Bounded {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> Result<RecolorDiff> {
        match *o {
            ObjectSpec::BoundedRect { x1, x2, y1, y2 } => self.0.insert(AxisRect::new(x1, x2, y1, y2, id)).map_err(core),
            _ => Err(mismatch(StructureKind::Bounded, o)),
        }
    }
    fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        self.0.delete(id).map_err(core)
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> std::result::Result<(), String> {
        self.0
            .cells()
            .try_for_each(|(cell, cp)| audit_common(cp).map_err(|m| format!("cell {cell:?}: {m}")))
    }
}

struct Universe(UniverseRectCF);

impl Structure for Universe {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> Result<RecolorDiff> {
        match *o {
            ObjectSpec::UniverseRect { x1, x2, y1, y2 } => self.0.insert(AxisRect::new(x1, x2, y1, y2, id)).map_err(core),
            _ => Err(mismatch(StructureKind::Universe, o)),
        }
    }
    fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        self.0.delete(id).map_err(core)
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> std::result::Result<(), String> {
        self.0
            .node_pairs()
            .try_for_each(|(node, cp)| audit_common(cp).map_err(|m| format!("node pair {node:?}: {m}")))
    }
}

fn point_1d(kind: StructureKind, o: &ObjectSpec) -> Result<f64> {
    match *o {
        ObjectSpec::Point1d { x } => Ok(x),
        _ => Err(mismatch(kind, o)),
    }
}

fn point_2d(kind: StructureKind, o: &ObjectSpec) -> Result<Pt> {
    match *o {
        ObjectSpec::Point2d { x, y } => Ok(Pt::new(x, y)),
        _ => Err(mismatch(kind, o)),
    }
}

fn lemma_check(failures: &[String]) -> std::result::Result<(), String> {
    match failures.first() {
        Some(f) => Err(format!("lemma breach: {f}")),
        None => Ok(()),
    }
}

struct SemiInterval(SemiDynamicEngine<IntervalPointColorer>);

impl Structure for SemiInterval {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> Result<RecolorDiff> {
        let x = point_1d(StructureKind::SemiInterval, o)?;
        self.0.insert(id, x).map_err(core)
    }
    fn delete(&mut self, _: ObjectId) -> Result<RecolorDiff> {
        Err(HarnessError::Unsupported {
            structure: StructureKind::SemiInterval.to_string(),
            op: "delete".into(),
        })
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors().collect()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> std::result::Result<(), String> {
        lemma_check(self.0.lemma_failures())
    }
    fn levels(&self) -> Option<(u32, Vec<LevelInfo>)> {
        Some((self.0.ell(), self.0.levels()))
    }
}

struct SemiRect(SemiDynamicEngine<RectPointColorer>);

impl Structure for SemiRect {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> Result<RecolorDiff> {
        let p = point_2d(StructureKind::SemiRect, o)?;
        self.0.insert(id, p).map_err(core)
    }
    fn delete(&mut self, _: ObjectId) -> Result<RecolorDiff> {
        Err(HarnessError::Unsupported {
            structure: StructureKind::SemiRect.to_string(),
            op: "delete".into(),
        })
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors().collect()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> std::result::Result<(), String> {
        lemma_check(self.0.lemma_failures())
    }
    fn levels(&self) -> Option<(u32, Vec<LevelInfo>)> {
        Some((self.0.ell(), self.0.levels()))
    }
}

struct FullInterval(FullyDynamicEngine<IntervalPointColorer>);

impl Structure for FullInterval {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> Result<RecolorDiff> {
        let x = point_1d(StructureKind::FullInterval, o)?;
        self.0.insert(id, x).map_err(core)
    }
    fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        self.0.delete(id).map_err(core)
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors().collect()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> std::result::Result<(), String> {
        self.0.check_invariants().map_err(|v| v.to_string())?;
        lemma_check(self.0.lemma_failures())
    }
    fn levels(&self) -> Option<(u32, Vec<LevelInfo>)> {
        Some((self.0.ell(), self.0.levels()))
    }
}

struct FullRect(FullyDynamicEngine<RectPointColorer>);

impl Structure for FullRect {
    fn insert(&mut self, id: ObjectId, o: &ObjectSpec) -> Result<RecolorDiff> {
        let p = point_2d(StructureKind::FullRect, o)?;
        self.0.insert(id, p).map_err(core)
    }
    fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        self.0.delete(id).map_err(core)
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        self.0.colors().collect()
    }
    fn total_recolorings(&self) -> u64 {
        self.0.total_recolorings()
    }
    fn check_invariants(&self) -> std::result::Result<(), String> {
        self.0.check_invariants().map_err(|v| v.to_string())?;
        lemma_check(self.0.lemma_failures())
    }
    fn levels(&self) -> Option<(u32, Vec<LevelInfo>)> {
        Some((self.0.ell(), self.0.levels()))
    }
}

/// Colorings up to this size are checked exhaustively for the unimax
/// property in rectangle-point invariant checks.
const RECT_UNIMAX_CHECK_LIMIT: usize = 12;

/// Builds an empty structure. `params` must already be resolved.
pub fn build(kind: StructureKind, params: &StructureParams) -> Result<Box<dyn Structure>> {
    let s: Box<dyn Structure> = match kind {
        StructureKind::Anchored => Box::new(Anchored(AnchoredCF::new())),
        StructureKind::Square => Box::new(Square(GridSquareCF::new())),
        StructureKind::Bounded => {
            let c = params.c.ok_or_else(|| HarnessError::InvalidParams("bounded needs c".into()))?;
            Box::new(Bounded(BoundedRectCF::new(c).map_err(|e| HarnessError::InvalidParams(e.to_string()))?))
        }
        StructureKind::Universe => {
            let n = params
                .universe
                .ok_or_else(|| HarnessError::InvalidParams("universe needs N".into()))?;
            Box::new(Universe(UniverseRectCF::new(n).map_err(|e| HarnessError::InvalidParams(e.to_string()))?))
        }
        StructureKind::SemiInterval => Box::new(SemiInterval(SemiDynamicEngine::new())),
        StructureKind::SemiRect => Box::new(SemiRect(SemiDynamicEngine::new())),
        StructureKind::FullInterval => Box::new(FullInterval(FullyDynamicEngine::new())),
        StructureKind::FullRect => Box::new(FullRect(
            FullyDynamicEngine::new().with_unimax_check_limit(RECT_UNIMAX_CHECK_LIMIT),
        )),
    };
    Ok(s)
}

/// Rejects workloads whose objects do not fit the structure or that
/// delete from an insertion-only structure.
pub fn validate(kind: StructureKind, events: &[WorkloadEvent]) -> Result<()> {
    for ev in events {
        match (ev.op, &ev.object) {
            (Op::Insert, Some(o)) if o.kind() != kind.object_kind() => return Err(mismatch(kind, o)),
            (Op::Delete, _) if !kind.supports_delete() => {
                return Err(HarnessError::Unsupported {
                    structure: kind.to_string(),
                    op: "delete".into(),
                })
            }
            _ => {}
        }
    }
    Ok(())
}
