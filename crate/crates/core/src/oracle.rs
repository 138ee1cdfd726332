//! Brute-force verification: probe generation, conflict-free and unimax
//! checks, and recomputation of the tree-based colorings straight from
//! their definitions.
//!
//! For axis-parallel rectangles the probes are all points whose coordinates
//! are object coordinates or midpoints between consecutive ones; every face,
//! edge and vertex of the arrangement contains one. For point sets the
//! ranges are all contiguous runs in the tiebroken coordinate order, which
//! includes every combinatorially distinct interval or rectangle.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anchored::AnchoredCF;
use crate::augtree::AugTree;
use crate::geom::{AxisRect, GlobalColor, KeyOrder, ObjectId, Pt};
use crate::rect::CommonPointCF;
use crate::square::{class_of, color_value, GridSquareCF, PinnedSquareCF};

/// Which property a colored range must have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Some color occurs exactly once.
    ConflictFree,
    /// The maximum color occurs exactly once.
    Unimax,
}

/// A query that failed a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Probe {
    Point { x: f64, y: f64 },
    Interval { a: f64, b: f64 },
    Range { x1: f64, x2: f64, y1: f64, y2: f64 },
}

/// A violating query with the objects it hits and their colors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub probe: Probe,
    pub members: Vec<(ObjectId, GlobalColor)>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.probe {
            Probe::Point { x, y } => write!(f, "point ({x}, {y})")?,
            Probe::Interval { a, b } => write!(f, "interval [{a}, {b}]")?,
            Probe::Range { x1, x2, y1, y2 } => write!(f, "range [{x1}, {x2}] x [{y1}, {y2}]")?,
        }
        write!(f, " hits")?;
        for (id, c) in &self.members {
            write!(f, " {id}={c}")?;
        }
        Ok(())
    }
}

/// Whether a multiset of colors passes `rule`. Empty sets pass.
pub fn satisfies(rule: Rule, colors: &[GlobalColor]) -> bool {
    let mut counts = ColorCounts::default();
    for &c in colors {
        counts.add(c);
    }
    counts.ok(rule)
}

#[derive(Default)]
struct ColorCounts {
    counts: BTreeMap<GlobalColor, u32>,
    singles: usize,
    total: usize,
}

impl ColorCounts {
    fn add(&mut self, c: GlobalColor) {
        let e = self.counts.entry(c).or_insert(0);
        *e += 1;
        match *e {
            1 => self.singles += 1,
            2 => self.singles -= 1,
            _ => {}
        }
        self.total += 1;
    }

    fn remove(&mut self, c: GlobalColor) {
        let e = self.counts.get_mut(&c).expect("counted color");
        *e -= 1;
        match *e {
            0 => {
                self.singles -= 1;
                self.counts.remove(&c);
            }
            1 => self.singles += 1,
            _ => {}
        }
        self.total -= 1;
    }

    fn ok(&self, rule: Rule) -> bool {
        if self.total == 0 {
            return true;
        }
        match rule {
            Rule::ConflictFree => self.singles > 0,
            Rule::Unimax => self.counts.values().next_back() == Some(&1),
        }
    }
}

/// Sorted distinct values plus the midpoints between consecutive ones.
pub fn axis_probes(mut coords: Vec<f64>) -> Vec<f64> {
    coords.sort_by(f64::total_cmp);
    coords.dedup();
    let mut out = Vec::with_capacity(coords.len() * 2);
    for (i, &c) in coords.iter().enumerate() {
        out.push(c);
        if let Some(&next) = coords.get(i + 1) {
            out.push((c + next) / 2.0);
        }
    }
    out
}

/// The coordinate-grid probe set of a rectangle family.
pub fn rect_probes(rects: &[AxisRect]) -> Vec<Pt> {
    let xs = axis_probes(rects.iter().flat_map(|r| [r.x1, r.x2]).collect());
    let ys = axis_probes(rects.iter().flat_map(|r| [r.y1, r.y2]).collect());
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| Pt::new(x, y))).collect()
}

/// Checks `rule` at every probe by testing every object. Returns the first
/// violating probe in the given order.
pub fn check_probes<T, F>(objects: &[(ObjectId, T, GlobalColor)], probes: &[Pt], contains: F, rule: Rule) -> Result<(), Witness>
where
    F: Fn(&T, Pt) -> bool,
{
    for &p in probes {
        let members: Vec<(ObjectId, GlobalColor)> =
            objects.iter().filter(|(_, o, _)| contains(o, p)).map(|(id, _, c)| (*id, *c)).collect();
        let colors: Vec<GlobalColor> = members.iter().map(|m| m.1).collect();
        if !satisfies(rule, &colors) {
            return Err(Witness {
                probe: Probe::Point { x: p.x, y: p.y },
                members,
            });
        }
    }
    Ok(())
}

/// Brute-force conflict-free check.
pub fn check_cf<T, F>(objects: &[(ObjectId, T, GlobalColor)], probes: &[Pt], contains: F) -> Result<(), Witness>
where
    F: Fn(&T, Pt) -> bool,
{
    check_probes(objects, probes, contains, Rule::ConflictFree)
}

/// Brute-force unimax check.
pub fn check_unimax<T, F>(objects: &[(ObjectId, T, GlobalColor)], probes: &[Pt], contains: F) -> Result<(), Witness>
where
    F: Fn(&T, Pt) -> bool,
{
    check_probes(objects, probes, contains, Rule::Unimax)
}

/// Checks a colored rectangle family on its full coordinate-grid probe set.
///
/// Equivalent to [`check_probes`] over [`rect_probes`], but sweeps each
/// probe column in y with running color counts instead of testing every
/// rectangle at every probe.
pub fn check_rects(rects: &[(AxisRect, GlobalColor)], rule: Rule) -> Result<(), Witness> {
    let xs = axis_probes(rects.iter().flat_map(|(r, _)| [r.x1, r.x2]).collect());
    let mut by_x1: Vec<usize> = (0..rects.len()).collect();
    by_x1.sort_by(|&a, &b| rects[a].0.x1.total_cmp(&rects[b].0.x1));
    for &x in &xs {
        let active: Vec<usize> = by_x1
            .iter()
            .copied()
            .take_while(|&k| rects[k].0.x1 <= x)
            .filter(|&k| x <= rects[k].0.x2)
            .collect();
        if let Some(y) = sweep_column(rects, &active, rule) {
            let p = Pt::new(x, y);
            let mut members: Vec<(ObjectId, GlobalColor)> =
                rects.iter().filter(|(r, _)| r.contains(p)).map(|(r, c)| (r.id, *c)).collect();
            members.sort_unstable_by_key(|m| m.0);
            return Err(Witness {
                probe: Probe::Point { x, y },
                members,
            });
        }
    }
    Ok(())
}

/// Returns the lowest violating y in one probe column.
fn sweep_column(rects: &[(AxisRect, GlobalColor)], active: &[usize], rule: Rule) -> Option<f64> {
    let mut starts: Vec<usize> = active.to_vec();
    starts.sort_by(|&a, &b| rects[a].0.y1.total_cmp(&rects[b].0.y1));
    let mut ends: Vec<usize> = active.to_vec();
    ends.sort_by(|&a, &b| rects[a].0.y2.total_cmp(&rects[b].0.y2));
    let mut values: Vec<f64> = active.iter().flat_map(|&k| [rects[k].0.y1, rects[k].0.y2]).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let mut counts = ColorCounts::default();
    let (mut si, mut ei) = (0, 0);
    for (i, &v) in values.iter().enumerate() {
        while si < starts.len() && rects[starts[si]].0.y1 <= v {
            counts.add(rects[starts[si]].1);
            si += 1;
        }
        if !counts.ok(rule) {
            return Some(v);
        }
        while ei < ends.len() && rects[ends[ei]].0.y2 <= v {
            counts.remove(rects[ends[ei]].1);
            ei += 1;
        }
        if let Some(&next) = values.get(i + 1) {
            if !counts.ok(rule) {
                return Some((v + next) / 2.0);
            }
        }
    }
    None
}

/// Checks every contiguous run of points in `(x, id)` order.
pub fn check_interval_points(points: &[(ObjectId, f64, GlobalColor)], rule: Rule) -> Result<(), Witness> {
    let mut sorted: Vec<(KeyOrder, GlobalColor)> =
        points.iter().map(|&(id, x, c)| (KeyOrder::new(x, id), c)).collect();
    sorted.sort_unstable_by_key(|a| a.0);
    for a in 0..sorted.len() {
        let mut counts = ColorCounts::default();
        for b in a..sorted.len() {
            counts.add(sorted[b].1);
            if !counts.ok(rule) {
                return Err(Witness {
                    probe: Probe::Interval {
                        a: sorted[a].0.coord,
                        b: sorted[b].0.coord,
                    },
                    members: sorted[a..=b].iter().map(|(k, c)| (k.tiebreak, *c)).collect(),
                });
            }
        }
    }
    Ok(())
}

/// How [`check_rect_points`] enumerates ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeSampling {
    /// Up to this many points every canonical range is checked.
    pub exhaustive_limit: usize,
    /// Number of random canonical ranges checked beyond the limit.
    pub samples: usize,
    pub seed: u64,
}

impl Default for RangeSampling {
    fn default() -> Self {
        RangeSampling {
            exhaustive_limit: 40,
            samples: 100_000,
            seed: 0,
        }
    }
}

/// Checks canonical rectangles over a colored point set: runs of the
/// `(x, id)` order crossed with runs of the `(y, id)` order.
pub fn check_rect_points(points: &[(ObjectId, Pt, GlobalColor)], rule: Rule, sampling: &RangeSampling) -> Result<(), Witness> {
    let n = points.len();
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by(|&a, &b| KeyOrder::new(points[a].1.x, points[a].0).cmp(&KeyOrder::new(points[b].1.x, points[b].0)));
    let mut by_y: Vec<usize> = (0..n).collect();
    by_y.sort_by(|&a, &b| KeyOrder::new(points[a].1.y, points[a].0).cmp(&KeyOrder::new(points[b].1.y, points[b].0)));
    let mut y_rank = vec![0; n];
    for (r, &k) in by_y.iter().enumerate() {
        y_rank[k] = r;
    }
    let witness = |xa: usize, xb: usize, members: &[usize]| {
        let ys: Vec<f64> = members.iter().map(|&k| points[k].1.y).collect();
        Witness {
            probe: Probe::Range {
                x1: points[by_x[xa]].1.x,
                x2: points[by_x[xb]].1.x,
                y1: ys.iter().copied().fold(f64::INFINITY, f64::min),
                y2: ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            },
            members: members.iter().map(|&k| (points[k].0, points[k].2)).collect(),
        }
    };

    if n <= sampling.exhaustive_limit {
        for a in 0..n {
            // points of the x-run, kept sorted by y-rank
            let mut run: Vec<usize> = Vec::new();
            for b in a..n {
                let k = by_x[b];
                let pos = run.partition_point(|&q| y_rank[q] < y_rank[k]);
                run.insert(pos, k);
                for c in 0..run.len() {
                    let mut counts = ColorCounts::default();
                    for d in c..run.len() {
                        counts.add(points[run[d]].2);
                        if !counts.ok(rule) {
                            return Err(witness(a, b, &run[c..=d]));
                        }
                    }
                }
            }
        }
        return Ok(());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut x_rank = vec![0; n];
    for (r, &k) in by_x.iter().enumerate() {
        x_rank[k] = r;
    }
    for _ in 0..sampling.samples {
        let (a, b) = ordered_pair(&mut rng, n);
        let (c, d) = ordered_pair(&mut rng, n);
        let mut counts = ColorCounts::default();
        let mut members = Vec::new();
        for &k in &by_x[a..=b] {
            if (c..=d).contains(&y_rank[k]) {
                counts.add(points[k].2);
                members.push(k);
            }
        }
        if !counts.ok(rule) {
            members.sort_by_key(|&k| y_rank[k]);
            return Err(witness(a, b, &members));
        }
    }
    Ok(())
}

fn ordered_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    (a.min(b), a.max(b))
}

/// Per object, the maximum node height in each direction set, found by
/// scanning every internal node once: index 0 = `summary_max` of the right
/// child, 1 = `summary_min` of the right child, 2 = `summary_min` of the
/// left child, 3 = `summary_max` of the left child. Leaves contribute
/// nothing.
pub fn direction_heights(tree: &AugTree) -> BTreeMap<ObjectId, [Option<u32>; 4]> {
    let mut out: BTreeMap<ObjectId, [Option<u32>; 4]> = BTreeMap::new();
    let mut stack: Vec<_> = tree.root().into_iter().collect();
    while let Some(v) = stack.pop() {
        let node = tree.node(v);
        if node.is_leaf() {
            out.entry(node.payload().unwrap()).or_default();
            continue;
        }
        let (l, r) = (tree.node(node.left().unwrap()), tree.node(node.right().unwrap()));
        let h = node.height();
        let hits = [r.summary_max(), r.summary_min(), l.summary_min(), l.summary_max()];
        for (dir, id) in hits.into_iter().enumerate() {
            let slot = &mut out.entry(id).or_default()[dir];
            *slot = Some(slot.map_or(h, |m| m.max(h)));
        }
        stack.push(node.left().unwrap());
        stack.push(node.right().unwrap());
    }
    out
}

/// Colors of an anchored structure evaluated from its tree.
pub fn definitional_anchored(s: &AnchoredCF) -> BTreeMap<ObjectId, u64> {
    direction_heights(s.tree())
        .into_iter()
        .map(|(id, d)| (id, d[0].unwrap_or(0) as u64))
        .collect()
}

/// Colors of one square cell evaluated from its tree.
pub fn definitional_pinned_squares(s: &PinnedSquareCF) -> BTreeMap<ObjectId, u64> {
    direction_heights(s.tree())
        .into_iter()
        .map(|(id, d)| {
            let h = d.iter().flatten().copied().max().unwrap_or(0);
            let j = d.iter().position(|x| *x == Some(h)).unwrap_or(0) as u8;
            (id, color_value(h, j))
        })
        .collect()
}

/// Colors of every square, evaluated cell by cell.
pub fn definitional_grid_squares(s: &GridSquareCF) -> BTreeMap<ObjectId, GlobalColor> {
    s.cells()
        .flat_map(|(cell, pinned)| {
            definitional_pinned_squares(pinned)
                .into_iter()
                .map(move |(id, c)| (id, GlobalColor::new(class_of(cell), c)))
        })
        .collect()
}

/// Color pairs of a common-point structure evaluated from its two trees.
pub fn definitional_common_point(s: &CommonPointCF) -> BTreeMap<ObjectId, (u32, u32)> {
    let half = |first: Option<u32>, second: Option<u32>| {
        let h = first.max(second).unwrap_or(0);
        match h {
            0 => 0,
            _ if first == Some(h) => 2 * h,
            _ => 2 * h + 1,
        }
    };
    let east = direction_heights(s.east());
    let west = direction_heights(s.west());
    east.into_iter()
        .map(|(id, e)| {
            let w = west[&id];
            (id, (half(e[0], e[1]), half(w[2], w[3])))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gc(c: u64) -> GlobalColor {
        GlobalColor::new(0, c)
    }

    #[test]
    fn one_object_passes() {
        let r = AxisRect::new(0.0, 1.0, 0.0, 1.0, ObjectId(1));
        let objs = vec![(r.id, r, gc(3))];
        let probes = rect_probes(&[r]);
        assert!(check_cf(&objs, &probes, |r, p| r.contains(p)).is_ok());
        assert!(check_unimax(&objs, &probes, |r, p| r.contains(p)).is_ok());
    }

    #[test]
    fn identical_rectangles_with_same_color_fail() {
        let a = AxisRect::new(0.0, 1.0, 0.0, 1.0, ObjectId(1));
        let b = AxisRect::new(0.0, 1.0, 0.0, 1.0, ObjectId(2));
        let objs = vec![(a.id, a, gc(0)), (b.id, b, gc(0))];
        let w = check_cf(&objs, &rect_probes(&[a, b]), |r, p| r.contains(p)).unwrap_err();
        assert_eq!(w.probe, Probe::Point { x: 0.0, y: 0.0 });
        assert_eq!(w.members.len(), 2);
        let w2 = check_rects(&[(a, gc(0)), (b, gc(0))], Rule::ConflictFree).unwrap_err();
        assert_eq!(w2.probe, w.probe);
    }

    #[test]
    fn overlapping_equal_maxima_fail_unimax_only() {
        let a = AxisRect::new(0.0, 2.0, 0.0, 2.0, ObjectId(1));
        let b = AxisRect::new(1.0, 3.0, 1.0, 3.0, ObjectId(2));
        let c = AxisRect::new(0.5, 2.5, 0.5, 2.5, ObjectId(3));
        let objs = [(a, gc(5)), (b, gc(5)), (c, gc(1))];
        assert!(check_rects(&objs, Rule::ConflictFree).is_ok());
        assert!(check_rects(&objs, Rule::Unimax).is_err());
    }

    #[test]
    fn interval_points_runs() {
        let pts = [(ObjectId(1), 1.0, gc(0)), (ObjectId(2), 2.0, gc(1)), (ObjectId(3), 3.0, gc(0))];
        assert!(check_interval_points(&pts, Rule::Unimax).is_ok());
        let bad = [(ObjectId(1), 1.0, gc(1)), (ObjectId(2), 2.0, gc(0)), (ObjectId(3), 3.0, gc(1))];
        let w = check_interval_points(&bad, Rule::Unimax).unwrap_err();
        assert_eq!(w.probe, Probe::Interval { a: 1.0, b: 3.0 });
        assert!(check_interval_points(&bad, Rule::ConflictFree).is_ok());
    }

    #[test]
    fn axis_probes_include_midpoints() {
        assert_eq!(axis_probes(vec![2.0, 0.0, 2.0, 1.0]), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
