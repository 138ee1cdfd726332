//! Conflict-free coloring of unit squares.
//!
//! Squares sharing a grid point are colored by [`PinnedSquareCF`]: one tree
//! over the x-order serves all four quadrant parts, and a square's color is
//! `4h + j` where `h` is the largest height among its N-set nodes and `j`
//! names the first direction (NE, SE, SW, NW) attaining it. [`GridSquareCF`]
//! routes each square to the smallest grid point it contains and gives
//! cells of the same residue class modulo [`GRID_MODULUS`] the same color
//! set.

use std::collections::BTreeMap;

use crate::augtree::{AugTree, DirtyLog};
use crate::error::{Error, Result};
use crate::geom::{GlobalColor, KeyOrder, ObjectId, Pt, RecolorDiff, Recoloring, UnitSquare};

/// Residue modulus of the grid classes. Cells of one class are at least
/// three apart in some coordinate, so their closed squares never touch.
pub const GRID_MODULUS: i64 = 3;

/// Squares that all contain one common point.
#[derive(Clone, Debug)]
pub struct PinnedSquareCF {
    pin: Pt,
    tree: AugTree,
    squares: BTreeMap<ObjectId, UnitSquare>,
    colors: BTreeMap<ObjectId, u64>,
}

impl PinnedSquareCF {
    pub fn new(pin: Pt) -> Self {
        PinnedSquareCF {
            pin,
            tree: AugTree::new(),
            squares: BTreeMap::new(),
            colors: BTreeMap::new(),
        }
    }

    pub fn pin(&self) -> Pt {
        self.pin
    }

    pub fn tree(&self) -> &AugTree {
        &self.tree
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn squares(&self) -> impl Iterator<Item = &UnitSquare> {
        self.squares.values()
    }

    pub fn insert(&mut self, sq: UnitSquare) -> Result<RecolorDiff> {
        if !sq.contains(self.pin) {
            return Err(Error::PinNotContained(sq.id));
        }
        if self.squares.contains_key(&sq.id) {
            return Err(Error::DuplicateId(sq.id));
        }
        let log = self.tree.insert(KeyOrder::new(sq.x, sq.id), sq.id, sq.y)?;
        self.squares.insert(sq.id, sq);
        Ok(self.refresh(&log, Some(sq.id)))
    }

    pub fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        let sq = self.squares.get(&id).copied().ok_or(Error::UnknownId(id))?;
        let log = self.tree.delete(KeyOrder::new(sq.x, sq.id))?;
        self.squares.remove(&id);
        self.colors.remove(&id);
        Ok(self.refresh(&log, None))
    }

    /// The height value and direction index of a stored square. Squares
    /// stored only at a leaf report `(0, 0)`.
    pub fn pinned_color(&self, id: ObjectId) -> Result<(u32, u8)> {
        let m = self.tree.n_set_maxima(id).ok_or(Error::UnknownId(id))?;
        let dirs = [m.right_max, m.right_min, m.left_min, m.left_max];
        let h = dirs.iter().flatten().copied().max().unwrap_or(0);
        if h == 0 {
            return Ok((0, 0));
        }
        let j = dirs.iter().position(|d| *d == Some(h)).unwrap() as u8;
        Ok((h, j))
    }

    pub fn color_of(&self, id: ObjectId) -> Result<u64> {
        self.colors.get(&id).copied().ok_or(Error::UnknownId(id))
    }

    pub fn colors(&self) -> impl Iterator<Item = (ObjectId, u64)> + '_ {
        self.colors.iter().map(|(&id, &c)| (id, c))
    }

    fn evaluate(&self, id: ObjectId) -> u64 {
        let (h, j) = self.pinned_color(id).expect("stored square");
        color_value(h, j)
    }

    fn refresh(&mut self, log: &DirtyLog, inserted: Option<ObjectId>) -> RecolorDiff {
        let mut diff = RecolorDiff::default();
        for id in log.affected_objects() {
            if !self.squares.contains_key(&id) {
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
        diff
    }
}

/// `0` for height 0, otherwise `4h + j`.
pub fn color_value(h: u32, j: u8) -> u64 {
    if h == 0 {
        0
    } else {
        4 * h as u64 + j as u64
    }
}

/// The smallest grid point, in lexicographic order, contained in `sq`.
pub fn grid_point(sq: &UnitSquare) -> (i64, i64) {
    (sq.x.ceil() as i64, sq.y.ceil() as i64)
}

/// Color-set class of a grid cell.
pub fn class_of(cell: (i64, i64)) -> u32 {
    let a = cell.0.rem_euclid(GRID_MODULUS);
    let b = cell.1.rem_euclid(GRID_MODULUS);
    (a * GRID_MODULUS + b) as u32
}

#[derive(Clone, Debug, Default)]
pub struct GridSquareCF {
    cells: BTreeMap<(i64, i64), PinnedSquareCF>,
    owner: BTreeMap<ObjectId, (i64, i64)>,
    total_recolorings: u64,
}

impl GridSquareCF {
    pub fn new() -> Self {
        Self::default()
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

    pub fn cells(&self) -> impl Iterator<Item = ((i64, i64), &PinnedSquareCF)> {
        self.cells.iter().map(|(&k, v)| (k, v))
    }

    pub fn cell_of(&self, id: ObjectId) -> Option<(i64, i64)> {
        self.owner.get(&id).copied()
    }

    pub fn insert(&mut self, sq: UnitSquare) -> Result<RecolorDiff> {
        if self.owner.contains_key(&sq.id) {
            return Err(Error::DuplicateId(sq.id));
        }
        let cell = grid_point(&sq);
        let pinned = self
            .cells
            .entry(cell)
            .or_insert_with(|| PinnedSquareCF::new(Pt::new(cell.0 as f64, cell.1 as f64)));
        let diff = pinned.insert(sq)?.retag(class_of(cell));
        self.owner.insert(sq.id, cell);
        self.total_recolorings += diff.recolorings() as u64;
        Ok(diff)
    }

    pub fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        let cell = self.owner.remove(&id).ok_or(Error::UnknownId(id))?;
        let pinned = self.cells.get_mut(&cell).expect("owner cell exists");
        let diff = pinned.delete(id)?.retag(class_of(cell));
        if pinned.is_empty() {
            self.cells.remove(&cell);
        }
        self.total_recolorings += diff.recolorings() as u64;
        Ok(diff)
    }

    pub fn color_of(&self, id: ObjectId) -> Result<GlobalColor> {
        let cell = self.owner.get(&id).ok_or(Error::UnknownId(id))?;
        let local = self.cells[cell].color_of(id)?;
        Ok(GlobalColor::new(class_of(*cell), local))
    }

    pub fn squares(&self) -> impl Iterator<Item = &UnitSquare> {
        self.cells.values().flat_map(|c| c.squares())
    }

    pub fn colors(&self) -> Vec<(ObjectId, GlobalColor)> {
        let mut out: Vec<_> = self
            .cells
            .iter()
            .flat_map(|(&cell, c)| c.colors().map(move |(id, l)| (id, GlobalColor::new(class_of(cell), l))))
            .collect();
        out.sort_unstable_by_key(|(id, _)| *id);
        out
    }

    /// Largest tree height over all cells.
    pub fn max_tree_height(&self) -> u32 {
        self.cells.values().map(|c| c.tree().height()).max().unwrap_or(0)
    }
}
