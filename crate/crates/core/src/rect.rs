//! Conflict-free colorings of general axis-parallel rectangles.
//!
//! [`CommonPointCF`] colors rectangles that share a point with an ordered
//! pair: the east parts are colored from a tree over right edges, the west
//! parts from a tree over left edges. [`BoundedRectCF`] routes rectangles
//! with sides in `[1, c]` to integer grid points, [`UniverseRectCF`] routes
//! rectangles with integer coordinates to the nodes of a two-level skeleton
//! tree over the universe.

use std::collections::BTreeMap;

use crate::augtree::{AugTree, DirtyLog};
use crate::error::{Error, Result};
use crate::geom::{AxisRect, GlobalColor, KeyOrder, ObjectId, Pt, RecolorDiff, Recoloring};

/// Rectangles that all contain a common point.
#[derive(Clone, Debug)]
pub struct CommonPointCF {
    pin: Pt,
    east: AugTree,
    west: AugTree,
    rects: BTreeMap<ObjectId, AxisRect>,
    colors: BTreeMap<ObjectId, (u32, u32)>,
}

impl CommonPointCF {
    pub fn new(pin: Pt) -> Self {
        CommonPointCF {
            pin,
            east: AugTree::new(),
            west: AugTree::new(),
            rects: BTreeMap::new(),
            colors: BTreeMap::new(),
        }
    }

    pub fn pin(&self) -> Pt {
        self.pin
    }

    pub fn east(&self) -> &AugTree {
        &self.east
    }

    pub fn west(&self) -> &AugTree {
        &self.west
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn rects(&self) -> impl Iterator<Item = &AxisRect> {
        self.rects.values()
    }

    pub fn insert(&mut self, r: AxisRect) -> Result<RecolorDiff> {
        if !r.contains(self.pin) {
            return Err(Error::PinNotContained(r.id));
        }
        if self.rects.contains_key(&r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        let e = self.east.insert_bounds(KeyOrder::new(r.x2, r.id), r.id, r.y2, r.y1)?;
        let w = self.west.insert_bounds(KeyOrder::new(r.x1, r.id), r.id, r.y2, r.y1)?;
        self.rects.insert(r.id, r);
        Ok(self.refresh(&e, &w, Some(r.id)))
    }

    pub fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        let r = self.rects.get(&id).copied().ok_or(Error::UnknownId(id))?;
        let e = self.east.delete(KeyOrder::new(r.x2, r.id))?;
        let w = self.west.delete(KeyOrder::new(r.x1, r.id))?;
        self.rects.remove(&id);
        self.colors.remove(&id);
        Ok(self.refresh(&e, &w, None))
    }

    /// The `(east, west)` color pair of a stored rectangle, evaluated from
    /// the trees.
    pub fn pair_color(&self, id: ObjectId) -> Result<(u32, u32)> {
        let e = self.east.n_set_maxima(id).ok_or(Error::UnknownId(id))?;
        let w = self.west.n_set_maxima(id).ok_or(Error::UnknownId(id))?;
        Ok((
            half_color(e.right_max, e.right_min),
            half_color(w.left_min, w.left_max),
        ))
    }

    pub fn color_of(&self, id: ObjectId) -> Result<(u32, u32)> {
        self.colors.get(&id).copied().ok_or(Error::UnknownId(id))
    }

    pub fn colors(&self) -> impl Iterator<Item = (ObjectId, (u32, u32))> + '_ {
        self.colors.iter().map(|(&id, &c)| (id, c))
    }

    fn refresh(&mut self, e: &DirtyLog, w: &DirtyLog, inserted: Option<ObjectId>) -> RecolorDiff {
        let mut affected = e.affected_objects();
        affected.extend(w.affected_objects());
        affected.sort_unstable();
        affected.dedup();
        let mut diff = RecolorDiff::default();
        for id in affected {
            if !self.rects.contains_key(&id) {
                continue;
            }
            let new = self.pair_color(id).expect("stored rectangle");
            match self.colors.insert(id, new) {
                Some(old) if old != new => diff.recolored.push(Recoloring {
                    id,
                    from: GlobalColor::pair(0, old.0, old.1),
                    to: GlobalColor::pair(0, new.0, new.1),
                }),
                _ => {}
            }
        }
        if let Some(id) = inserted {
            let (a, b) = self.colors[&id];
            diff.assigned = Some((id, GlobalColor::pair(0, a, b)));
        }
        diff
    }
}

/// `0` when both direction sets are empty or reach only height 0, else
/// `2h + j` with `j` the first direction attaining the maximum `h`.
fn half_color(first: Option<u32>, second: Option<u32>) -> u32 {
    let h = first.max(second).unwrap_or(0);
    if h == 0 {
        0
    } else if first == Some(h) {
        2 * h
    } else {
        2 * h + 1
    }
}

/// Rectangles with width and height in `[1, c]`.
#[derive(Clone, Debug)]
pub struct BoundedRectCF {
    c: f64,
    modulus: i64,
    cells: BTreeMap<(i64, i64), CommonPointCF>,
    owner: BTreeMap<ObjectId, (i64, i64)>,
    total_recolorings: u64,
}

impl BoundedRectCF {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 1.0) {
            return Err(Error::InvalidParams(format!("size bound c = {c} must be finite and at least 1")));
        }
        Ok(BoundedRectCF {
            c,
            modulus: 2 * c.ceil() as i64 + 1,
            cells: BTreeMap::new(),
            owner: BTreeMap::new(),
            total_recolorings: 0,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Residue modulus of the grid classes.
    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn total_recolorings(&self) -> u64 {
        self.total_recolorings
    }

    pub fn cells(&self) -> impl Iterator<Item = ((i64, i64), &CommonPointCF)> {
        self.cells.iter().map(|(&k, v)| (k, v))
    }

    pub fn cell_of(&self, id: ObjectId) -> Option<(i64, i64)> {
        self.owner.get(&id).copied()
    }

    /// The smallest grid point, in lexicographic order, inside `r`.
    pub fn grid_point(r: &AxisRect) -> (i64, i64) {
        (r.x1.ceil() as i64, r.y1.ceil() as i64)
    }

    pub fn class_of(&self, cell: (i64, i64)) -> u32 {
        let a = cell.0.rem_euclid(self.modulus);
        let b = cell.1.rem_euclid(self.modulus);
        (a * self.modulus + b) as u32
    }

    pub fn insert(&mut self, r: AxisRect) -> Result<RecolorDiff> {
        let ok = |s: f64| (1.0..=self.c).contains(&s);
        if !ok(r.width()) || !ok(r.height()) {
            return Err(Error::SizeOutOfRange {
                id: r.id,
                width: r.width(),
                height: r.height(),
                c: self.c,
            });
        }
        if self.owner.contains_key(&r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        let cell = Self::grid_point(&r);
        let tag = self.class_of(cell);
        let cp = self
            .cells
            .entry(cell)
            .or_insert_with(|| CommonPointCF::new(Pt::new(cell.0 as f64, cell.1 as f64)));
        let diff = cp.insert(r)?.retag(tag);
        self.owner.insert(r.id, cell);
        self.total_recolorings += diff.recolorings() as u64;
        Ok(diff)
    }

    pub fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        let cell = self.owner.remove(&id).ok_or(Error::UnknownId(id))?;
        let tag = self.class_of(cell);
        let cp = self.cells.get_mut(&cell).expect("owner cell exists");
        let diff = cp.delete(id)?.retag(tag);
        if cp.is_empty() {
            self.cells.remove(&cell);
        }
        self.total_recolorings += diff.recolorings() as u64;
        Ok(diff)
    }

    pub fn color_of(&self, id: ObjectId) -> Result<GlobalColor> {
        let cell = *self.owner.get(&id).ok_or(Error::UnknownId(id))?;
        let (a, b) = self.cells[&cell].color_of(id)?;
        Ok(GlobalColor::pair(self.class_of(cell), a, b))
    }

    pub fn rects(&self) -> impl Iterator<Item = &AxisRect> {
        self.cells.values().flat_map(|c| c.rects())
    }

    pub fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        let mut out: Vec<_> = self
            .cells
            .iter()
            .flat_map(|(&cell, cp)| {
                let tag = self.class_of(cell);
                cp.colors().map(move |(id, (a, b))| (id, GlobalColor::pair(tag, a, b)))
            })
            .collect();
        out.sort_unstable_by_key(|(id, _)| *id);
        out
    }
}

/// Static complete binary skeleton over the slots `0..size`.
///
/// A node covers a contiguous slot range; its value is the lower midpoint
/// of the range and its children cover the parts strictly left and right
/// of the value. Every slot is the value of exactly one node, so nodes are
/// identified by their value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Skeleton {
    size: u64,
}

impl Skeleton {
    pub fn new(size: u64) -> Self {
        Skeleton { size }
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Depth of the deepest node.
    pub fn max_level(&self) -> u32 {
        let mut depth = 0;
        let (mut lo, hi) = (0u64, self.size.saturating_sub(1));
        // the right part is never smaller than the left part
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            lo = mid + 1;
            depth += 1;
        }
        depth
    }

    /// The highest node whose value lies in `[a, b]`, as `(value, level)`.
    /// Requires `a <= b < size`.
    pub fn highest_in(&self, a: u64, b: u64) -> (u64, u32) {
        debug_assert!(a <= b && b < self.size);
        let (mut lo, mut hi) = (0u64, self.size - 1);
        let mut level = 0;
        loop {
            let mid = lo + (hi - lo) / 2;
            if a <= mid && mid <= b {
                return (mid, level);
            }
            if b < mid {
                hi = mid - 1;
            } else {
                lo = mid + 1;
            }
            level += 1;
        }
    }

    /// Value of every node on the path from the root to the node with value
    /// `v`, excluding that node.
    pub fn ancestors(&self, v: u64) -> Vec<u64> {
        let (mut lo, mut hi) = (0u64, self.size - 1);
        let mut out = Vec::new();
        loop {
            let mid = lo + (hi - lo) / 2;
            if mid == v {
                return out;
            }
            out.push(mid);
            if v < mid {
                hi = mid - 1;
            } else {
                lo = mid + 1;
            }
        }
    }
}

/// Where a universe rectangle is stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SkeletonSlot {
    pub x_node: u64,
    pub x_level: u32,
    pub y_node: u64,
    pub y_level: u32,
}

/// Rectangles with integer coordinates in `0..universe`.
#[derive(Clone, Debug)]
pub struct UniverseRectCF {
    universe: u64,
    skeleton: Skeleton,
    nodes: BTreeMap<(u64, u64), CommonPointCF>,
    owner: BTreeMap<ObjectId, SkeletonSlot>,
    total_recolorings: u64,
}

impl UniverseRectCF {
    pub fn new(universe: u64) -> Result<Self> {
        if universe == 0 {
            return Err(Error::InvalidParams("universe size must be positive".into()));
        }
        Ok(UniverseRectCF {
            universe,
            skeleton: Skeleton::new(universe.next_power_of_two()),
            nodes: BTreeMap::new(),
            owner: BTreeMap::new(),
            total_recolorings: 0,
        })
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn skeleton(&self) -> Skeleton {
        self.skeleton
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn total_recolorings(&self) -> u64 {
        self.total_recolorings
    }

    pub fn slot_of(&self, id: ObjectId) -> Option<SkeletonSlot> {
        self.owner.get(&id).copied()
    }

    pub fn node_pairs(&self) -> impl Iterator<Item = ((u64, u64), &CommonPointCF)> {
        self.nodes.iter().map(|(&k, v)| (k, v))
    }

    /// Color-set class of a node pair.
    pub fn tag(&self, slot: &SkeletonSlot) -> u32 {
        slot.x_level * (self.skeleton.max_level() + 1) + slot.y_level
    }

    pub fn route(&self, r: &AxisRect) -> Result<SkeletonSlot> {
        let n = self.universe as f64;
        let fine = |v: f64| v.fract() == 0.0 && (0.0..n).contains(&v);
        if ![r.x1, r.x2, r.y1, r.y2].into_iter().all(fine) {
            return Err(Error::CoordinateOutOfUniverse {
                id: r.id,
                universe: self.universe,
            });
        }
        let (x_node, x_level) = self.skeleton.highest_in(r.x1 as u64, r.x2 as u64);
        let (y_node, y_level) = self.skeleton.highest_in(r.y1 as u64, r.y2 as u64);
        Ok(SkeletonSlot {
            x_node,
            x_level,
            y_node,
            y_level,
        })
    }

    pub fn insert(&mut self, r: AxisRect) -> Result<RecolorDiff> {
        let slot = self.route(&r)?;
        if self.owner.contains_key(&r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        let tag = self.tag(&slot);
        let cp = self
            .nodes
            .entry((slot.x_node, slot.y_node))
            .or_insert_with(|| CommonPointCF::new(Pt::new(slot.x_node as f64, slot.y_node as f64)));
        let diff = cp.insert(r)?.retag(tag);
        self.owner.insert(r.id, slot);
        self.total_recolorings += diff.recolorings() as u64;
        Ok(diff)
    }

    pub fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        let slot = self.owner.remove(&id).ok_or(Error::UnknownId(id))?;
        let tag = self.tag(&slot);
        let key = (slot.x_node, slot.y_node);
        let cp = self.nodes.get_mut(&key).expect("owner node exists");
        let diff = cp.delete(id)?.retag(tag);
        if cp.is_empty() {
            self.nodes.remove(&key);
        }
        self.total_recolorings += diff.recolorings() as u64;
        Ok(diff)
    }

    pub fn color_of(&self, id: ObjectId) -> Result<GlobalColor> {
        let slot = *self.owner.get(&id).ok_or(Error::UnknownId(id))?;
        let (a, b) = self.nodes[&(slot.x_node, slot.y_node)].color_of(id)?;
        Ok(GlobalColor::pair(self.tag(&slot), a, b))
    }

    pub fn rects(&self) -> impl Iterator<Item = &AxisRect> {
        self.nodes.values().flat_map(|c| c.rects())
    }

    pub fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        let mut out: Vec<_> = self
            .owner
            .keys()
            .map(|&id| (id, self.color_of(id).expect("owned id")))
            .collect();
        out.sort_unstable_by_key(|(id, _)| *id);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x1: f64, x2: f64, y1: f64, y2: f64, id: u64) -> AxisRect {
        AxisRect::new(x1, x2, y1, y2, ObjectId(id))
    }

    #[test]
    fn single_rectangle_gets_zero_pair() {
        let mut cp = CommonPointCF::new(Pt::new(0.0, 0.0));
        let d = cp.insert(r(-1.0, 1.0, -1.0, 1.0, 1)).unwrap();
        assert_eq!(d.assigned, Some((ObjectId(1), GlobalColor::pair(0, 0, 0))));
        assert_eq!(cp.color_of(ObjectId(1)), Ok((0, 0)));
    }

    #[test]
    fn nested_rectangles_get_distinct_pairs() {
        let mut cp = CommonPointCF::new(Pt::new(0.0, 0.0));
        cp.insert(r(-2.0, 2.0, -2.0, 2.0, 1)).unwrap();
        cp.insert(r(-1.0, 1.0, -1.0, 1.0, 2)).unwrap();
        assert_ne!(cp.color_of(ObjectId(1)), cp.color_of(ObjectId(2)));
    }

    #[test]
    fn pin_must_be_contained() {
        let mut cp = CommonPointCF::new(Pt::new(0.0, 0.0));
        assert_eq!(cp.insert(r(1.0, 2.0, -1.0, 1.0, 1)), Err(Error::PinNotContained(ObjectId(1))));
    }

    #[test]
    fn bounded_routing_and_size_check() {
        let mut b = BoundedRectCF::new(2.0).unwrap();
        assert_eq!(b.modulus(), 5);
        b.insert(r(0.5, 2.0, 0.5, 1.6, 1)).unwrap();
        assert_eq!(b.cell_of(ObjectId(1)), Some((1, 1)));
        assert!(matches!(b.insert(r(0.0, 0.5, 0.0, 1.0, 2)), Err(Error::SizeOutOfRange { .. })));
        assert!(matches!(b.insert(r(0.0, 3.0, 0.0, 1.0, 3)), Err(Error::SizeOutOfRange { .. })));
        assert!(BoundedRectCF::new(0.5).is_err());
    }

    #[test]
    fn skeleton_routing() {
        let s = Skeleton::new(8);
        assert_eq!(s.highest_in(0, 7), (3, 0));
        assert_eq!(s.highest_in(5, 6), (5, 1));
        assert_eq!(s.highest_in(0, 0), (0, 2));
        assert_eq!(s.highest_in(7, 7), (7, 3));
        assert_eq!(s.max_level(), 3);
        assert_eq!(s.ancestors(6), vec![3, 5]);
    }

    #[test]
    fn universe_routing_and_rejection() {
        let mut u = UniverseRectCF::new(8).unwrap();
        u.insert(r(0.0, 7.0, 0.0, 7.0, 1)).unwrap();
        let slot = u.slot_of(ObjectId(1)).unwrap();
        assert_eq!((slot.x_level, slot.y_level), (0, 0));
        assert!(matches!(u.insert(r(0.0, 8.0, 0.0, 1.0, 2)), Err(Error::CoordinateOutOfUniverse { .. })));
        assert!(matches!(u.insert(r(0.5, 1.0, 0.0, 1.0, 3)), Err(Error::CoordinateOutOfUniverse { .. })));
        // padded universe: slots beyond the original size stay rejected
        let mut v = UniverseRectCF::new(6).unwrap();
        assert_eq!(v.skeleton().size(), 8);
        assert!(v.insert(r(0.0, 6.0, 0.0, 1.0, 4)).is_err());
        assert!(v.insert(r(0.0, 5.0, 0.0, 1.0, 5)).is_ok());
    }
}
