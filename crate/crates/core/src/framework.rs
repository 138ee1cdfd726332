//! Dynamization of static unimax colorers.
//!
//! Objects are partitioned into level sets `S_0, S_1, ...`, each colored by
//! its own palette `C(i, t)`. When sets are merged the new coloring is not
//! applied at once: the merged set is *in migration* and a constant number
//! of its objects, highest final color first, switch to the new coloring at
//! every update. Objects not yet switched keep the color they had before.
//!
//! [`SemiDynamicEngine`] handles insertions only. [`FullyDynamicEngine`]
//! also handles deletions through the colorer's weak deletions, shrinking
//! the top levels by a downwards migration when the last set gets too
//! small.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{GlobalColor, ObjectId, RecolorDiff, Recoloring};
use crate::unimax::UnimaxColorer;

/// Color set `C(level, index)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Palette {
    pub level: u32,
    pub index: u32,
}

impl Palette {
    pub fn new(level: u32, index: u32) -> Self {
        Palette { level, index }
    }

    pub fn tag(self) -> u32 {
        (self.level << 16) | self.index
    }

    pub fn from_tag(tag: u32) -> Self {
        Palette::new(tag >> 16, tag & 0xffff)
    }

    pub fn color(self, local: u32) -> GlobalColor {
        GlobalColor::new(self.tag(), local as u64)
    }
}

impl fmt::Display for Palette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C({},{})", self.level, self.index)
    }
}

/// A failed invariant check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameworkViolation {
    /// Name of the violated invariant, e.g. `Inv-C-Mig-2`.
    pub invariant: String,
    pub detail: String,
}

impl fmt::Display for FrameworkViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

fn violation(invariant: &str, detail: String) -> FrameworkViolation {
    FrameworkViolation {
        invariant: invariant.to_string(),
        detail,
    }
}

/// Summary of one level set, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelInfo {
    pub index: u32,
    /// `empty`, `full`, `non_empty`, `migrating`, `up` or `down`.
    pub state: String,
    pub size: usize,
    /// Objects already wearing their final color.
    pub switched: usize,
}

fn pick_highest<C: UnimaxColorer>(colorer: &C, switched: &BTreeSet<ObjectId>) -> Option<ObjectId> {
    // highest final color first, smallest id among ties
    colorer
        .colors()
        .into_iter()
        .filter(|(id, _)| !switched.contains(id))
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(id, _)| id)
}

fn pow2(e: u32) -> usize {
    1usize << e
}

// ---------------------------------------------------------------------------
// insertion only

#[derive(Clone, Debug)]
enum SemiSet<C> {
    Empty,
    Full { palette: Palette, colorer: C },
    Migrating { palette: Palette, colorer: C, switched: BTreeSet<ObjectId> },
}

/// Insertion-only engine. Level `i` holds either nothing or exactly `2^i`
/// objects.
#[derive(Clone, Debug)]
pub struct SemiDynamicEngine<C: UnimaxColorer> {
    sets: Vec<SemiSet<C>>,
    items: BTreeMap<ObjectId, C::Item>,
    level_of: BTreeMap<ObjectId, u32>,
    actual: BTreeMap<ObjectId, GlobalColor>,
    lemma_failures: Vec<String>,
    total_recolorings: u64,
}

impl<C: UnimaxColorer> Default for SemiDynamicEngine<C> {
    fn default() -> Self {
        SemiDynamicEngine {
            sets: Vec::new(),
            items: BTreeMap::new(),
            level_of: BTreeMap::new(),
            actual: BTreeMap::new(),
            lemma_failures: Vec::new(),
            total_recolorings: 0,
        }
    }
}

impl<C: UnimaxColorer> SemiDynamicEngine<C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_recolorings(&self) -> u64 {
        self.total_recolorings
    }

    /// Highest index of a non-empty set.
    pub fn ell(&self) -> u32 {
        self.sets
            .iter()
            .rposition(|s| !matches!(s, SemiSet::Empty))
            .unwrap_or(0) as u32
    }

    /// Breaches of the structural lemmas observed so far. Always empty when
    /// the engine behaves as designed.
    pub fn lemma_failures(&self) -> &[String] {
        &self.lemma_failures
    }

    pub fn color_of(&self, id: ObjectId) -> Option<GlobalColor> {
        self.actual.get(&id).copied()
    }

    pub fn colors(&self) -> impl Iterator<Item = (ObjectId, GlobalColor)> + '_ {
        self.actual.iter().map(|(&id, &c)| (id, c))
    }

    pub fn colored_items(&self) -> Vec<(ObjectId, C::Item, GlobalColor)> {
        self.items
            .iter()
            .map(|(&id, it)| (id, it.clone(), self.actual[&id]))
            .collect()
    }

    pub fn levels(&self) -> Vec<LevelInfo> {
        self.sets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let (state, size, switched) = match s {
                    SemiSet::Empty => ("empty", 0, 0),
                    SemiSet::Full { colorer, .. } => ("full", colorer.len(), colorer.len()),
                    SemiSet::Migrating { colorer, switched, .. } => ("migrating", colorer.len(), switched.len()),
                };
                LevelInfo {
                    index: i as u32,
                    state: state.to_string(),
                    size,
                    switched,
                }
            })
            .collect()
    }

    pub fn insert(&mut self, id: ObjectId, item: C::Item) -> Result<RecolorDiff> {
        if self.items.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.items.insert(id, item);

        // smallest empty set; everything below it must be full
        let i = self
            .sets
            .iter()
            .position(|s| matches!(s, SemiSet::Empty))
            .unwrap_or(self.sets.len());
        if i == self.sets.len() {
            self.sets.push(SemiSet::Empty);
        }
        let mut members = vec![id];
        for k in 0..i {
            match std::mem::replace(&mut self.sets[k], SemiSet::Empty) {
                SemiSet::Full { colorer, .. } => members.extend(colorer.colors().into_iter().map(|(m, _)| m)),
                SemiSet::Migrating { colorer, .. } => {
                    self.lemma_failures
                        .push(format!("set {k} still in migration when set {i} was created"));
                    members.extend(colorer.colors().into_iter().map(|(m, _)| m));
                }
                SemiSet::Empty => unreachable!("sets below the first empty one are non-empty"),
            }
        }

        let ell = self.ell().max(i as u32);
        let palette = self.allocate(i as u32, ell);
        let items: Vec<(ObjectId, C::Item)> = members.iter().map(|m| (*m, self.items[m].clone())).collect();
        let colorer = C::color_all(&items);
        for m in &members {
            self.level_of.insert(*m, i as u32);
        }
        let assigned = palette.color(colorer.color_of(id).expect("colored"));
        self.actual.insert(id, assigned);
        self.sets[i] = SemiSet::Migrating {
            palette,
            colorer,
            switched: BTreeSet::from([id]),
        };

        let mut diff = RecolorDiff {
            assigned: Some((id, assigned)),
            recolored: Vec::new(),
        };
        for k in 0..self.sets.len() {
            let SemiSet::Migrating { palette, colorer, switched } = &mut self.sets[k] else {
                continue;
            };
            if let Some(m) = pick_highest(colorer, switched) {
                let to = palette.color(colorer.color_of(m).unwrap());
                let from = self.actual.insert(m, to).expect("member has a color");
                switched.insert(m);
                if from != to {
                    diff.recolored.push(Recoloring { id: m, from, to });
                }
            }
            if switched.len() == colorer.len() {
                let SemiSet::Migrating { palette, colorer, .. } = std::mem::replace(&mut self.sets[k], SemiSet::Empty) else {
                    unreachable!()
                };
                self.sets[k] = SemiSet::Full { palette, colorer };
            }
        }
        self.total_recolorings += diff.recolorings() as u64;
        Ok(diff)
    }

    /// Picks an unused `C(level, t)` with `t <= ell - level`.
    fn allocate(&mut self, level: u32, ell: u32) -> Palette {
        let mut used = BTreeSet::new();
        for s in &self.sets {
            match s {
                SemiSet::Empty => {}
                SemiSet::Full { palette, .. } => {
                    used.insert(*palette);
                }
                SemiSet::Migrating { palette, colorer, switched } => {
                    used.insert(*palette);
                    for (m, _) in colorer.colors() {
                        if !switched.contains(&m) {
                            used.insert(Palette::from_tag(self.actual[&m].scheme_tag));
                        }
                    }
                }
            }
        }
        let limit = ell - level;
        match (0..=limit).map(|t| Palette::new(level, t)).find(|p| !used.contains(p)) {
            Some(p) => p,
            None => {
                self.lemma_failures
                    .push(format!("no free palette C({level}, t) with t <= {limit}"));
                (limit + 1..).map(|t| Palette::new(level, t)).find(|p| !used.contains(p)).unwrap()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// fully dynamic

/// Direction of a migration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    /// Created by merging the last three sets while the last index was
    /// `ell_prime`.
    Down { ell_prime: u32 },
}

/// A set colored with one palette, or a set in migration.
#[derive(Clone, Debug)]
pub enum Group<C: UnimaxColorer> {
    Static { palette: Palette, colorer: C },
    Migrating(Box<Migration<C>>),
}

/// A set in migration: the final coloring on all members, the switched
/// subset `star`, and the sub-parts whose colorings the other members
/// still wear.
#[derive(Clone, Debug)]
pub struct Migration<C: UnimaxColorer> {
    pub direction: Direction,
    pub palette: Palette,
    pub final_coloring: C,
    pub star: BTreeSet<ObjectId>,
    /// The object whose insertion started an upwards migration. It belongs
    /// to no sub-part and wears its final color from the start.
    pub extra: Option<ObjectId>,
    pub parts: BTreeMap<u32, Group<C>>,
}

impl<C: UnimaxColorer> Group<C> {
    pub fn len(&self) -> usize {
        match self {
            Group::Static { colorer, .. } => colorer.len(),
            Group::Migrating(m) => m.final_coloring.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        match self {
            Group::Static { colorer, .. } => colorer.contains(id),
            Group::Migrating(m) => m.final_coloring.contains(id),
        }
    }

    pub fn members(&self) -> Vec<ObjectId> {
        let c = match self {
            Group::Static { colorer, .. } => colorer.colors(),
            Group::Migrating(m) => m.final_coloring.colors(),
        };
        c.into_iter().map(|(id, _)| id).collect()
    }

    /// The color `id` currently wears.
    pub fn actual_color(&self, id: ObjectId) -> Option<GlobalColor> {
        match self {
            Group::Static { palette, colorer } => colorer.color_of(id).map(|c| palette.color(c)),
            Group::Migrating(m) => {
                if m.star.contains(&id) {
                    m.final_coloring.color_of(id).map(|c| m.palette.color(c))
                } else {
                    m.parts.values().find_map(|g| g.actual_color(id))
                }
            }
        }
    }

    /// Every palette referenced by this group, nested ones included.
    pub fn palettes(&self, out: &mut Vec<Palette>) {
        match self {
            Group::Static { palette, .. } => out.push(*palette),
            Group::Migrating(m) => {
                out.push(m.palette);
                for g in m.parts.values() {
                    g.palettes(out);
                }
            }
        }
    }

    fn weak_delete(&mut self, id: ObjectId, dirty: &mut BTreeSet<ObjectId>) -> Result<()> {
        match self {
            Group::Static { colorer, .. } => {
                dirty.extend(colorer.weak_delete(id)?.into_iter().map(|r| r.id));
                Ok(())
            }
            Group::Migrating(m) => m.weak_delete(id, dirty),
        }
    }

    /// Turns finished migrations into static groups and drops empty parts.
    fn settle(self) -> Option<Group<C>> {
        match self {
            g @ Group::Static { .. } => (!g.is_empty()).then_some(g),
            Group::Migrating(mut m) => {
                if m.final_coloring.is_empty() {
                    return None;
                }
                let parts = std::mem::take(&mut m.parts);
                m.parts = parts.into_iter().filter_map(|(k, g)| g.settle().map(|g| (k, g))).collect();
                if m.star.len() == m.final_coloring.len() {
                    Some(Group::Static {
                        palette: m.palette,
                        colorer: m.final_coloring,
                    })
                } else {
                    Some(Group::Migrating(m))
                }
            }
        }
    }
}

impl<C: UnimaxColorer> Migration<C> {
    /// Weak deletion in the hosting sub-part and in the final coloring,
    /// then restores the shape of the switched subset keeping its size.
    fn weak_delete(&mut self, id: ObjectId, dirty: &mut BTreeSet<ObjectId>) -> Result<()> {
        if !self.final_coloring.contains(id) {
            return Err(Error::UnknownId(id));
        }
        if self.extra == Some(id) {
            self.extra = None;
        } else {
            let key = self
                .parts
                .iter()
                .find(|(_, g)| g.contains(id))
                .map(|(k, _)| *k)
                .ok_or(Error::UnknownId(id))?;
            let g = self.parts.get_mut(&key).unwrap();
            g.weak_delete(id, dirty)?;
            if g.is_empty() {
                self.parts.remove(&key);
            }
        }
        self.star.remove(&id);
        let keep = self.star.len();
        dirty.extend(self.final_coloring.weak_delete(id)?.into_iter().map(|r| r.id));
        self.repair(keep, dirty);
        Ok(())
    }

    /// Rebuilds the switched subset as the `size` members with the highest
    /// final colors, preferring current members among ties. The extra
    /// object, which has no temporary color, always stays.
    fn repair(&mut self, size: usize, dirty: &mut BTreeSet<ObjectId>) {
        let fixed = self.extra.filter(|e| self.star.contains(e));
        let mut ranked: Vec<(u32, bool, ObjectId)> = self
            .final_coloring
            .colors()
            .into_iter()
            .filter(|(id, _)| Some(*id) != fixed)
            .map(|(id, c)| (c, self.star.contains(&id), id))
            .collect();
        ranked.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
        let take = size - usize::from(fixed.is_some());
        let new_star: BTreeSet<ObjectId> = ranked.iter().take(take).map(|t| t.2).chain(fixed).collect();
        dirty.extend(self.star.symmetric_difference(&new_star).copied());
        self.star = new_star;
    }

    /// Switches up to `count` members with the highest final colors.
    fn switch_highest(&mut self, count: usize, dirty: &mut BTreeSet<ObjectId>) {
        for _ in 0..count {
            match pick_highest(&self.final_coloring, &self.star) {
                Some(m) => {
                    self.star.insert(m);
                    dirty.insert(m);
                }
                None => break,
            }
        }
    }
}

/// Fully dynamic engine.
///
/// Size invariant: `|S_i| <= 2^i` below the last index `ell`, and
/// `2^(ell-2) <= |S_ell| <= 2^ell`.
#[derive(Clone, Debug)]
pub struct FullyDynamicEngine<C: UnimaxColorer> {
    sets: Vec<Option<Group<C>>>,
    ell: u32,
    items: BTreeMap<ObjectId, C::Item>,
    level_of: BTreeMap<ObjectId, u32>,
    actual: BTreeMap<ObjectId, GlobalColor>,
    lemma_failures: Vec<String>,
    total_recolorings: u64,
    unimax_check_limit: usize,
}

impl<C: UnimaxColorer> Default for FullyDynamicEngine<C> {
    fn default() -> Self {
        FullyDynamicEngine {
            sets: vec![None, None],
            ell: 0,
            items: BTreeMap::new(),
            level_of: BTreeMap::new(),
            actual: BTreeMap::new(),
            lemma_failures: Vec::new(),
            total_recolorings: 0,
            unimax_check_limit: 32,
        }
    }
}

impl<C: UnimaxColorer> FullyDynamicEngine<C> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Colorings with at most this many objects are checked for the unimax
    /// property by [`FullyDynamicEngine::check_invariants`].
    pub fn with_unimax_check_limit(mut self, limit: usize) -> Self {
        self.unimax_check_limit = limit;
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn total_recolorings(&self) -> u64 {
        self.total_recolorings
    }

    pub fn lemma_failures(&self) -> &[String] {
        &self.lemma_failures
    }

    pub fn set(&self, i: u32) -> Option<&Group<C>> {
        self.sets.get(i as usize).and_then(|s| s.as_ref())
    }

    pub fn level_of(&self, id: ObjectId) -> Option<u32> {
        self.level_of.get(&id).copied()
    }

    pub fn color_of(&self, id: ObjectId) -> Option<GlobalColor> {
        self.actual.get(&id).copied()
    }

    pub fn colors(&self) -> impl Iterator<Item = (ObjectId, GlobalColor)> + '_ {
        self.actual.iter().map(|(&id, &c)| (id, c))
    }

    pub fn colored_items(&self) -> Vec<(ObjectId, C::Item, GlobalColor)> {
        self.items
            .iter()
            .map(|(&id, it)| (id, it.clone(), self.actual[&id]))
            .collect()
    }

    pub fn levels(&self) -> Vec<LevelInfo> {
        (0..=self.ell)
            .map(|i| {
                let (state, size, switched) = match self.set(i) {
                    None => ("empty", 0, 0),
                    Some(g @ Group::Static { .. }) => ("non_empty", g.len(), g.len()),
                    Some(Group::Migrating(m)) => {
                        let s = if m.direction == Direction::Up { "up" } else { "down" };
                        (s, m.final_coloring.len(), m.star.len())
                    }
                };
                LevelInfo {
                    index: i,
                    state: state.to_string(),
                    size,
                    switched,
                }
            })
            .collect()
    }

    fn size(&self, i: u32) -> usize {
        self.set(i).map_or(0, |g| g.len())
    }

    fn ensure_slots(&mut self) {
        while self.sets.len() < self.ell as usize + 2 {
            self.sets.push(None);
        }
    }

    pub fn insert(&mut self, id: ObjectId, item: C::Item) -> Result<RecolorDiff> {
        if self.items.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.items.insert(id, item);
        self.ensure_slots();
        let mut dirty = BTreeSet::new();

        // first empty set and the level the merge lands on
        let i = (0..=self.ell + 1).find(|&k| self.set(k).is_none()).unwrap();
        for k in 0..i {
            if !matches!(self.set(k), Some(Group::Static { .. })) {
                self.lemma_failures
                    .push(format!("set {k} in migration when the first empty set is {i}"));
            }
        }
        let total: usize = (0..i).map(|k| self.size(k)).sum::<usize>() + 1;
        let j = (0..).find(|&j| total <= pow2(j)).unwrap();
        if j == self.ell + 1 {
            self.ell += 1;
        } else if i == self.ell + 1 {
            // the last set is absorbed into a lower one
            self.ell = j;
        }
        self.ensure_slots();

        // merge the lower sets into S_j
        let mut parts = BTreeMap::new();
        for m in 0..i {
            if let Some(g) = self.sets[m as usize].take() {
                parts.insert(m, g);
            }
        }

        // final coloring with a fresh palette
        let mut pending = Vec::new();
        for g in parts.values() {
            g.palettes(&mut pending);
        }
        let palette = self.allocate(j, &pending);
        let mut members: Vec<ObjectId> = parts.values().flat_map(|g| g.members()).collect();
        members.push(id);
        let items: Vec<(ObjectId, C::Item)> = members.iter().map(|m| (*m, self.items[m].clone())).collect();
        let final_coloring = C::color_all(&items);
        for m in &members {
            self.level_of.insert(*m, j);
        }
        self.sets[j as usize] = Some(Group::Migrating(Box::new(Migration {
            direction: Direction::Up,
            palette,
            final_coloring,
            star: BTreeSet::from([id]),
            extra: Some(id),
            parts,
        })));
        dirty.insert(id);

        // advance migrations
        self.switch_step(&mut dirty, None);
        self.finish(dirty, Some(id))
    }

    pub fn delete(&mut self, id: ObjectId) -> Result<RecolorDiff> {
        let i = *self.level_of.get(&id).ok_or(Error::UnknownId(id))?;
        let mut dirty = BTreeSet::new();
        let ell_before = self.ell;
        let size = self.size(i);

        if i == self.ell && 4 * size <= pow2(self.ell) {
            self.merge_down(id, &mut dirty)?;
        } else {
            let slot = &mut self.sets[i as usize];
            slot.as_mut().expect("hosting set").weak_delete(id, &mut dirty)?;
            if slot.as_ref().is_some_and(|g| g.is_empty()) {
                *slot = None;
            }
        }
        self.items.remove(&id);
        self.level_of.remove(&id);
        self.actual.remove(&id);
        dirty.remove(&id);

        // the last set keeps migrating when it lost an object
        if i == ell_before {
            if let Some(Group::Migrating(m)) = self.sets[self.ell as usize].as_mut() {
                m.switch_highest(2, &mut dirty);
            }
        }
        self.finish(dirty, None)
    }

    /// Merges the last three sets into a set in downwards migration after
    /// deleting `id` from the last one.
    fn merge_down(&mut self, id: ObjectId, dirty: &mut BTreeSet<ObjectId>) -> Result<()> {
        let ell_prime = self.ell;
        if !matches!(self.set(ell_prime), Some(Group::Static { .. })) {
            self.lemma_failures
                .push(format!("last set {ell_prime} in migration when it became too small"));
        }
        let mut last = self.sets[ell_prime as usize].take().expect("hosting set");
        last.weak_delete(id, dirty)?;
        let total = self.size(ell_prime - 2) + self.size(ell_prime - 1) + last.len();
        if total <= pow2(ell_prime - 1) {
            self.ell -= 1;
        }
        let mut parts = BTreeMap::new();
        for m in [ell_prime - 2, ell_prime - 1] {
            if let Some(g) = self.sets[m as usize].take() {
                parts.insert(m, g);
            }
        }
        if !last.is_empty() {
            parts.insert(ell_prime, last);
        }
        if total == 0 {
            return Ok(());
        }
        let mut pending = Vec::new();
        for g in parts.values() {
            g.palettes(&mut pending);
        }
        let palette = self.allocate(self.ell, &pending);
        let members: Vec<ObjectId> = parts.values().flat_map(|g| g.members()).collect();
        let items: Vec<(ObjectId, C::Item)> = members.iter().map(|m| (*m, self.items[m].clone())).collect();
        let final_coloring = C::color_all(&items);
        for m in &members {
            self.level_of.insert(*m, self.ell);
        }
        self.sets[self.ell as usize] = Some(Group::Migrating(Box::new(Migration {
            direction: Direction::Down { ell_prime },
            palette,
            final_coloring,
            star: BTreeSet::new(),
            extra: None,
            parts,
        })));
        Ok(())
    }

    /// One switch per migrating set below `ell`, two in the last set.
    fn switch_step(&mut self, dirty: &mut BTreeSet<ObjectId>, only: Option<u32>) {
        let ell = self.ell;
        for (k, slot) in self.sets.iter_mut().enumerate() {
            if only.is_some_and(|o| o as usize != k) {
                continue;
            }
            if let Some(Group::Migrating(m)) = slot.as_mut() {
                let count = if (k as u32) < ell { 1 } else { 2 };
                m.switch_highest(count, dirty);
            }
        }
    }

    /// Settles finished migrations, lowers `ell` past empty top sets and
    /// turns the touched objects into a diff.
    fn finish(&mut self, dirty: BTreeSet<ObjectId>, inserted: Option<ObjectId>) -> Result<RecolorDiff> {
        for slot in self.sets.iter_mut() {
            if let Some(g) = slot.take() {
                *slot = g.settle();
            }
        }
        while self.ell > 0 && self.set(self.ell).is_none() {
            self.ell -= 1;
        }
        let mut diff = RecolorDiff::default();
        for id in dirty {
            let Some(level) = self.level_of.get(&id) else {
                continue;
            };
            let to = self.sets[*level as usize]
                .as_ref()
                .and_then(|g| g.actual_color(id))
                .expect("live object has a color");
            match self.actual.insert(id, to) {
                Some(from) if from != to && Some(id) != inserted => diff.recolored.push(Recoloring { id, from, to }),
                _ => {}
            }
        }
        if let Some(id) = inserted {
            diff.assigned = Some((id, self.actual[&id]));
        }
        self.total_recolorings += diff.recolorings() as u64;
        Ok(diff)
    }

    fn palettes_in_use(&self) -> Vec<Palette> {
        let mut out = Vec::new();
        for g in self.sets.iter().flatten() {
            g.palettes(&mut out);
        }
        out
    }

    /// Picks an unused `C(level, t)` with `t <= ell + 1`.
    fn allocate(&mut self, level: u32, pending: &[Palette]) -> Palette {
        let mut used: BTreeSet<Palette> = self.palettes_in_use().into_iter().collect();
        used.extend(pending.iter().copied());
        let limit = self.ell + 1;
        match (0..=limit).map(|t| Palette::new(level, t)).find(|p| !used.contains(p)) {
            Some(p) => p,
            None => {
                self.lemma_failures
                    .push(format!("no free palette C({level}, t) with t <= {limit}"));
                (limit + 1..).map(|t| Palette::new(level, t)).find(|p| !used.contains(p)).unwrap()
            }
        }
    }

    /// Verifies the size and color invariants, palette exclusivity and the
    /// consistency of the reported colors. Colorings with at most the
    /// configured number of objects are also checked to be unimax.
    pub fn check_invariants(&self) -> std::result::Result<(), FrameworkViolation> {
        let n = self.items.len();
        let ell = self.ell;

        // Inv-S
        for i in 0..ell {
            if self.size(i) > pow2(i) {
                return Err(violation("Inv-S", format!("|S_{i}| = {} > 2^{i}", self.size(i))));
            }
        }
        let last = self.size(ell);
        if last > pow2(ell) || (n > 1 && 4 * last < pow2(ell)) {
            return Err(violation("Inv-S", format!("|S_{ell}| = {last} outside [2^{}, 2^{ell}]", ell as i64 - 2)));
        }
        for k in ell + 1..self.sets.len() as u32 {
            if self.set(k).is_some() {
                return Err(violation("Inv-S", format!("set {k} above the last index {ell} is not empty")));
            }
        }
        let mut seen = 0;
        for i in 0..=ell {
            if let Some(g) = self.set(i) {
                for m in g.members() {
                    if self.level_of.get(&m) != Some(&i) {
                        return Err(violation("Inv-S", format!("{m} is in S_{i} but recorded elsewhere")));
                    }
                }
                seen += g.len();
            }
        }
        if seen != n {
            return Err(violation("Inv-S", format!("sets hold {seen} objects, engine has {n}")));
        }

        for i in 0..=ell {
            match self.set(i) {
                None => {}
                Some(Group::Static { palette, colorer }) => {
                    if palette.level != i {
                        return Err(violation("Inv-C-NonEmp", format!("S_{i} colored with {palette}")));
                    }
                    self.check_palette_range("Inv-C-NonEmp", *palette, colorer)?;
                }
                Some(Group::Migrating(m)) => {
                    if m.palette.level != i {
                        return Err(violation("Inv-C-Mig-1", format!("S_{i} migrates to {}", m.palette)));
                    }
                    self.check_palette_range("Inv-C-Mig-1", m.palette, &m.final_coloring)?;
                    check_migration_shape(i, m)?;
                    match m.direction {
                        Direction::Up => check_up(i, m)?,
                        Direction::Down { ell_prime } => {
                            if i != ell {
                                return Err(violation("Inv-C-Down", format!("S_{i} in downwards migration below {ell}")));
                            }
                            check_down(ell, ell_prime, m)?;
                        }
                    }
                }
            }
        }

        let mut palettes = self.palettes_in_use();
        palettes.sort_unstable();
        for w in palettes.windows(2) {
            if w[0] == w[1] {
                return Err(violation("palette-exclusive", format!("{} used by two colorings", w[0])));
            }
        }

        for (&id, &c) in &self.actual {
            let level = self.level_of[&id];
            let recomputed = self.set(level).and_then(|g| g.actual_color(id));
            if recomputed != Some(c) {
                return Err(violation(
                    "actual-color",
                    format!("{id} reported {c}, structure gives {recomputed:?}"),
                ));
            }
        }

        for i in 0..=ell {
            if let Some(g) = self.set(i) {
                self.check_unimax_group(g)?;
            }
        }
        Ok(())
    }

    fn check_palette_range(&self, inv: &str, palette: Palette, colorer: &C) -> std::result::Result<(), FrameworkViolation> {
        let cap = C::palette_size(pow2(palette.level));
        if let Some((id, c)) = colorer.colors().into_iter().find(|(_, c)| *c >= cap) {
            return Err(violation(inv, format!("{id} has color {c} outside {palette} of size {cap}")));
        }
        Ok(())
    }

    fn check_unimax_group(&self, g: &Group<C>) -> std::result::Result<(), FrameworkViolation> {
        let (colorer, palette) = match g {
            Group::Static { palette, colorer } => (colorer, *palette),
            Group::Migrating(m) => {
                for p in m.parts.values() {
                    self.check_unimax_group(p)?;
                }
                (&m.final_coloring, m.palette)
            }
        };
        if colorer.len() <= self.unimax_check_limit {
            let items: Vec<(ObjectId, C::Item, u32)> = colorer
                .colors()
                .into_iter()
                .map(|(id, c)| (id, self.items[&id].clone(), c))
                .collect();
            if let Err(w) = C::check_unimax(&items) {
                let inv = if matches!(g, Group::Static { .. }) { "Inv-C-NonEmp" } else { "Inv-C-Mig-1" };
                return Err(violation(inv, format!("coloring with {palette} is not unimax: {w}")));
            }
        }
        Ok(())
    }

    /// Removes the highest-colored switched object from the switched subset
    /// of the first set in migration without recoloring it. Test support
    /// for fault injection; returns whether anything was changed.
    #[doc(hidden)]
    pub fn corrupt_star_for_testing(&mut self) -> bool {
        for slot in self.sets.iter_mut() {
            if let Some(Group::Migrating(m)) = slot.as_mut() {
                let top = m
                    .star
                    .iter()
                    .filter(|id| Some(**id) != m.extra)
                    .max_by_key(|id| (m.final_coloring.color_of(**id), std::cmp::Reverse(**id)))
                    .copied();
                if let Some(id) = top {
                    m.star.remove(&id);
                    return true;
                }
            }
        }
        false
    }
}

/// Inv-C-Mig-2 plus membership bookkeeping of a migration.
fn check_migration_shape<C: UnimaxColorer>(i: u32, m: &Migration<C>) -> std::result::Result<(), FrameworkViolation> {
    let finals: BTreeMap<ObjectId, u32> = m.final_coloring.colors().into_iter().collect();
    if let Some(x) = m.star.iter().find(|x| !finals.contains_key(x)) {
        return Err(violation("Inv-C-Mig-2", format!("switched object {x} is not in S_{i}")));
    }
    if let Some(z) = finals.iter().filter(|(id, _)| !m.star.contains(id)).map(|(_, c)| *c).max() {
        let below: Vec<ObjectId> = m.star.iter().filter(|x| finals[x] < z).copied().collect();
        if below.len() > 1 {
            return Err(violation(
                "Inv-C-Mig-2",
                format!("S_{i}: unswitched final color {z} but switched {below:?} lie below it"),
            ));
        }
    }
    let mut count = usize::from(m.extra.is_some());
    for g in m.parts.values() {
        count += g.len();
    }
    if count != finals.len() {
        return Err(violation("Inv-C-Mig-1", format!("S_{i}: sub-parts hold {count} of {} objects", finals.len())));
    }
    if let Some(e) = m.extra {
        if !m.star.contains(&e) {
            return Err(violation("Inv-C-Mig-2", format!("S_{i}: inserted object {e} lost its final color")));
        }
    }
    for g in m.parts.values() {
        if let Group::Migrating(inner) = g {
            check_migration_shape(i, inner)?;
        }
    }
    Ok(())
}

fn check_up<C: UnimaxColorer>(i: u32, m: &Migration<C>) -> std::result::Result<(), FrameworkViolation> {
    for (&k, g) in &m.parts {
        if k > i {
            return Err(violation("Inv-C-Up", format!("S_{i} has a sub-part of index {k}")));
        }
        match g {
            Group::Static { palette, .. } if palette.level == k => {}
            Group::Static { palette, .. } => {
                return Err(violation("Inv-C-Up", format!("S_{i}^({k}) colored with {palette}")));
            }
            Group::Migrating(_) => {
                return Err(violation("Inv-C-Up", format!("S_{i}^({k}) is itself in migration")));
            }
        }
    }
    Ok(())
}

fn check_down<C: UnimaxColorer>(ell: u32, ell_prime: u32, m: &Migration<C>) -> std::result::Result<(), FrameworkViolation> {
    if ell_prime != ell && ell_prime != ell + 1 {
        return Err(violation("Inv-C-Down", format!("ell' = {ell_prime} with ell = {ell}")));
    }
    if m.extra.is_some() {
        return Err(violation("Inv-C-Down", "downwards migration with an inserted object".into()));
    }
    for (&k, g) in &m.parts {
        if k + 2 < ell_prime || k > ell_prime {
            return Err(violation("Inv-C-Down", format!("S_{ell}^({k}) is not empty")));
        }
        match g {
            Group::Static { palette, .. } if k == ell_prime && palette.level != ell_prime => {
                return Err(violation("Inv-C-Down", format!("S_{ell}^({k}) must use one set C({ell_prime},t), has {palette}")));
            }
            Group::Static { palette, .. } if palette.level > k => {
                return Err(violation("Inv-C-Down", format!("S_{ell}^({k}) colored with {palette}")));
            }
            Group::Static { .. } => {}
            Group::Migrating(_) if k == ell_prime => {
                return Err(violation("Inv-C-Down", format!("S_{ell}^({k}) was in migration when merged")));
            }
            Group::Migrating(inner) => {
                // an upwards migration absorbed whole keeps its own structure
                if inner.direction != Direction::Up || inner.palette.level != k {
                    return Err(violation(
                        "Inv-C-Down",
                        format!("S_{ell}^({k}) holds a migration towards {}", inner.palette),
                    ));
                }
                check_up(k, inner)?;
            }
        }
    }
    Ok(())
}
