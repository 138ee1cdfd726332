//! Conflict-free coloring of rectangles anchored at the origin.
//!
//! Rectangles are stored in an [`AugTree`] keyed by their right edge and
//! ranked by their top edge. The color of `r` is the largest height of a
//! node `v` such that `r` is the top-most rectangle in the right subtree of
//! `v`, or 0 if there is none.

use std::collections::BTreeMap;

use crate::augtree::{AugTree, DirtyLog};
use crate::error::{Error, Result};
use crate::geom::{AxisRect, GlobalColor, KeyOrder, ObjectId, RecolorDiff, Recoloring};

#[derive(Clone, Debug, Default)]
pub struct AnchoredCF {
    tree: AugTree,
    rects: BTreeMap<ObjectId, AxisRect>,
    colors: BTreeMap<ObjectId, u64>,
    total_recolorings: u64,
}

impl AnchoredCF {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn tree(&self) -> &AugTree {
        &self.tree
    }

    pub fn total_recolorings(&self) -> u64 {
        self.total_recolorings
    }

    pub fn rect(&self, id: ObjectId) -> Option<&AxisRect> {
        self.rects.get(&id)
    }

    pub fn rects(&self) -> impl Iterator<Item = &AxisRect> {
        self.rects.values()
    }

    pub fn insert(&mut self, r: AxisRect) -> Result<RecolorDiff> {
        if !r.is_anchored() {
            return Err(Error::NotAnchored(r.id));
        }
        if self.rects.contains_key(&r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        let log = self.tree.insert(key_of(&r), r.id, r.y2)?;
        self.rects.insert(r.id, r);
        Ok(self.refresh(&log, Some(r.id)))
    }

    pub fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        let r = self.rects.get(&id).copied().ok_or(Error::UnknownId(id))?;
        let log = self.tree.delete(key_of(&r))?;
        self.rects.remove(&id);
        self.colors.remove(&id);
        Ok(self.refresh(&log, None))
    }

    pub fn color_of(&self, id: ObjectId) -> Result<u64> {
        self.colors.get(&id).copied().ok_or(Error::UnknownId(id))
    }

    pub fn global_color(&self, id: ObjectId) -> Result<GlobalColor> {
        self.color_of(id).map(|c| GlobalColor::new(0, c))
    }

    /// Current coloring in id order.
    pub fn colors(&self) -> impl Iterator<Item = (ObjectId, GlobalColor)> + '_ {
        self.colors.iter().map(|(&id, &c)| (id, GlobalColor::new(0, c)))
    }

    /// Evaluates the coloring rule for a stored rectangle from the tree.
    fn evaluate(&self, id: ObjectId) -> u64 {
        let m = self.tree.n_set_maxima(id).expect("stored rectangle");
        m.right_max.unwrap_or(0) as u64
    }

    fn refresh(&mut self, log: &DirtyLog, inserted: Option<ObjectId>) -> RecolorDiff {
        let mut diff = RecolorDiff::default();
        for id in log.affected_objects() {
            if !self.rects.contains_key(&id) {
                continue;
            }
            let new = self.evaluate(id);
            match self.colors.insert(id, new) {
                Some(old) if old != new => diff.recolored.push(Recoloring {
                    id,
                    from: GlobalColor::new(0, old),
                    to: GlobalColor::new(0, new),
                }),
                _ => {}
            }
        }
        if let Some(id) = inserted {
            diff.assigned = Some((id, GlobalColor::new(0, self.colors[&id])));
        }
        self.total_recolorings += diff.recolorings() as u64;
        diff
    }
}

fn key_of(r: &AxisRect) -> KeyOrder {
    KeyOrder::new(r.x2, r.id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Pt;

    fn rect(x: f64, y: f64, id: u64) -> AxisRect {
        AxisRect::anchored(x, y, ObjectId(id))
    }

    fn is_cf(s: &AnchoredCF) -> bool {
        let xs: Vec<f64> = s.rects().map(|r| r.x2).collect();
        let ys: Vec<f64> = s.rects().map(|r| r.y2).collect();
        xs.iter().all(|&x| {
            ys.iter().all(|&y| {
                let hit: Vec<u64> = s
                    .rects()
                    .filter(|r| r.contains(Pt::new(x, y)))
                    .map(|r| s.color_of(r.id).unwrap())
                    .collect();
                hit.is_empty() || hit.iter().any(|c| hit.iter().filter(|d| *d == c).count() == 1)
            })
        })
    }

    #[test]
    fn first_rectangle_gets_color_zero() {
        let mut s = AnchoredCF::new();
        let d = s.insert(rect(2.0, 5.0, 1)).unwrap();
        assert_eq!(d.assigned, Some((ObjectId(1), GlobalColor::new(0, 0))));
        assert_eq!(d.recolorings(), 0);
        assert_eq!(s.color_of(ObjectId(1)), Ok(0));
    }

    #[test]
    fn rejects_bad_input() {
        let mut s = AnchoredCF::new();
        let r = AxisRect::new(1.0, 2.0, 0.0, 1.0, ObjectId(1));
        assert_eq!(s.insert(r), Err(Error::NotAnchored(ObjectId(1))));
        s.insert(rect(1.0, 1.0, 1)).unwrap();
        assert_eq!(s.insert(rect(3.0, 1.0, 1)), Err(Error::DuplicateId(ObjectId(1))));
        assert_eq!(s.delete(ObjectId(9)), Err(Error::UnknownId(ObjectId(9))));
        assert_eq!(s.color_of(ObjectId(9)), Err(Error::UnknownId(ObjectId(9))));
    }

    #[test]
    fn three_rectangles_are_conflict_free() {
        let mut s = AnchoredCF::new();
        for (i, (x, y)) in [(2.0, 5.0), (4.0, 3.0), (6.0, 8.0)].into_iter().enumerate() {
            s.insert(rect(x, y, i as u64)).unwrap();
            assert!(is_cf(&s));
        }
    }

    #[test]
    fn delete_only_rectangle() {
        let mut s = AnchoredCF::new();
        s.insert(rect(1.0, 1.0, 1)).unwrap();
        let d = s.delete(ObjectId(1)).unwrap();
        assert!(s.is_empty());
        assert_eq!(d.recolorings(), 0);
        assert!(d.assigned.is_none());
    }
}
