//! Static unimax colorers that support weak deletions.
//!
//! A unimax coloring gives every nonempty range a unique maximum color. A
//! weak deletion removes one object and recolors a bounded number of others
//! without leaving the initial palette.

use std::collections::BTreeMap;
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::geom::{bit_length, ceil_sqrt, GlobalColor, KeyOrder, ObjectId, Pt};
use crate::oracle::{self, Witness};

/// A color change inside a single colorer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalRecoloring {
    pub id: ObjectId,
    pub from: u32,
    pub to: u32,
}

/// A static unimax coloring with weak deletions, pluggable into the
/// dynamization engines of [`crate::framework`].
pub trait UnimaxColorer: Clone + Debug {
    type Item: Clone + Debug;

    /// Colors a fresh set of objects.
    fn color_all(items: &[(ObjectId, Self::Item)]) -> Self;

    /// Removes `id`, returning the recolorings of the remaining objects.
    fn weak_delete(&mut self, id: ObjectId) -> Result<Vec<LocalRecoloring>>;

    fn color_of(&self, id: ObjectId) -> Option<u32>;

    /// Live objects and their colors in id order.
    fn colors(&self) -> Vec<(ObjectId, u32)>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn contains(&self, id: ObjectId) -> bool {
        self.color_of(id).is_some()
    }

    /// Number of objects the colorer was built on.
    fn initial_len(&self) -> usize;

    /// Upper bound on the colors used for `n0` objects; all colors lie in
    /// `0..palette_size(n0)`.
    fn palette_size(n0: usize) -> u32;

    /// Upper bound on recolorings per weak deletion.
    fn max_recolorings(n0: usize) -> usize;

    /// Exhaustive (or sampled, for large inputs) unimax check of a colored
    /// item set.
    fn check_unimax(items: &[(ObjectId, Self::Item, u32)]) -> std::result::Result<(), Witness>;

    /// Conflict-free check of a colored item set over the same ranges.
    fn check_cf(items: &[(ObjectId, Self::Item, GlobalColor)]) -> std::result::Result<(), Witness>;
}

/// Points on a line colored with respect to intervals.
///
/// The lower median of the sorted points gets the highest color and the two
/// sides are colored recursively, so `n` points use `floor(log2 n) + 1`
/// colors.
#[derive(Clone, Debug, Default)]
pub struct IntervalPointColorer {
    order: BTreeMap<KeyOrder, ObjectId>,
    keys: BTreeMap<ObjectId, KeyOrder>,
    colors: BTreeMap<ObjectId, u32>,
    n0: usize,
}

impl IntervalPointColorer {
    /// Colors points given by their sort keys.
    pub fn from_keys(points: &[(ObjectId, KeyOrder)]) -> Self {
        let mut sorted: Vec<(KeyOrder, ObjectId)> = points.iter().map(|&(id, k)| (k, id)).collect();
        sorted.sort_unstable_by_key(|a| a.0);
        let mut colors = BTreeMap::new();
        interval_color_all(&sorted, &mut colors);
        IntervalPointColorer {
            order: sorted.iter().copied().collect(),
            keys: points.iter().copied().collect(),
            colors,
            n0: points.len(),
        }
    }

    /// Live points in key order.
    pub fn sequence(&self) -> impl Iterator<Item = (KeyOrder, ObjectId)> + '_ {
        self.order.iter().map(|(&k, &id)| (k, id))
    }
}

/// Median recursion over `sorted`; colors are written into `out`.
pub fn interval_color_all(sorted: &[(KeyOrder, ObjectId)], out: &mut BTreeMap<ObjectId, u32>) {
    if sorted.is_empty() {
        return;
    }
    let mid = (sorted.len() - 1) / 2;
    out.insert(sorted[mid].1, bit_length(sorted.len()) - 1);
    interval_color_all(&sorted[..mid], out);
    interval_color_all(&sorted[mid + 1..], out);
}

impl UnimaxColorer for IntervalPointColorer {
    type Item = f64;

    fn color_all(items: &[(ObjectId, f64)]) -> Self {
        let keyed: Vec<(ObjectId, KeyOrder)> = items.iter().map(|&(id, x)| (id, KeyOrder::new(x, id))).collect();
        Self::from_keys(&keyed)
    }

    /// If a live neighbor of the deleted point has a smaller color, that
    /// neighbor (the left one if both qualify) takes over the deleted color.
    fn weak_delete(&mut self, id: ObjectId) -> Result<Vec<LocalRecoloring>> {
        let key = self.keys.remove(&id).ok_or(Error::UnknownPoint(id))?;
        self.order.remove(&key);
        let c = self.colors.remove(&id).expect("colored point");
        let left = self.order.range(..key).next_back().map(|(_, &n)| n);
        let right = self.order.range(key..).next().map(|(_, &n)| n);
        let pick = [left, right].into_iter().flatten().find(|n| self.colors[n] < c);
        Ok(match pick {
            Some(n) => {
                let from = self.colors.insert(n, c).unwrap();
                vec![LocalRecoloring { id: n, from, to: c }]
            }
            None => Vec::new(),
        })
    }

    fn color_of(&self, id: ObjectId) -> Option<u32> {
        self.colors.get(&id).copied()
    }

    fn colors(&self) -> Vec<(ObjectId, u32)> {
        self.colors.iter().map(|(&id, &c)| (id, c)).collect()
    }

    fn len(&self) -> usize {
        self.colors.len()
    }

    fn initial_len(&self) -> usize {
        self.n0
    }

    fn palette_size(n0: usize) -> u32 {
        bit_length(n0)
    }

    fn max_recolorings(_n0: usize) -> usize {
        1
    }

    fn check_unimax(items: &[(ObjectId, f64, u32)]) -> std::result::Result<(), Witness> {
        let pts: Vec<(ObjectId, f64, GlobalColor)> =
            items.iter().map(|&(id, x, c)| (id, x, GlobalColor::new(0, c as u64))).collect();
        oracle::check_interval_points(&pts, oracle::Rule::Unimax)
    }

    fn check_cf(items: &[(ObjectId, f64, GlobalColor)]) -> std::result::Result<(), Witness> {
        oracle::check_interval_points(items, oracle::Rule::ConflictFree)
    }
}

/// A monotone chain of points, listed in x-order.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub increasing: bool,
    pub ids: Vec<ObjectId>,
}

fn x_key(id: ObjectId, p: Pt) -> KeyOrder {
    KeyOrder::new(p.x, id)
}

fn y_key(id: ObjectId, p: Pt) -> KeyOrder {
    KeyOrder::new(p.y, id)
}

/// Indices of a longest strictly increasing subsequence of `seq`.
fn longest_increasing(seq: &[usize]) -> Vec<usize> {
    // tails[k]: index of the smallest tail of an increasing run of length k+1
    let mut tails: Vec<usize> = Vec::new();
    let mut prev: Vec<Option<usize>> = vec![None; seq.len()];
    for i in 0..seq.len() {
        let pos = tails.partition_point(|&t| seq[t] < seq[i]);
        prev[i] = pos.checked_sub(1).map(|p| tails[p]);
        if pos == tails.len() {
            tails.push(i);
        } else {
            tails[pos] = i;
        }
    }
    let mut out = Vec::with_capacity(tails.len());
    let mut cur = tails.last().copied();
    while let Some(i) = cur {
        out.push(i);
        cur = prev[i];
    }
    out.reverse();
    out
}

/// Partitions points into monotone chains by repeatedly removing a longest
/// increasing or decreasing subsequence. Since every set of `m` points has a
/// monotone subsequence of length at least `sqrt(m)`, at most
/// `2 * ceil(sqrt(n))` chains result.
pub fn chain_decompose(points: &[(ObjectId, Pt)]) -> Vec<Chain> {
    let mut by_y: Vec<(KeyOrder, ObjectId)> = points.iter().map(|&(id, p)| (y_key(id, p), id)).collect();
    by_y.sort_unstable_by_key(|a| a.0);
    let rank: BTreeMap<ObjectId, usize> = by_y.iter().enumerate().map(|(r, &(_, id))| (id, r)).collect();
    let mut rest: Vec<(KeyOrder, ObjectId)> = points.iter().map(|&(id, p)| (x_key(id, p), id)).collect();
    rest.sort_unstable_by_key(|a| a.0);

    let mut chains = Vec::new();
    while !rest.is_empty() {
        let up: Vec<usize> = rest.iter().map(|(_, id)| rank[id]).collect();
        let down: Vec<usize> = up.iter().map(|&r| usize::MAX - r).collect();
        let inc = longest_increasing(&up);
        let dec = longest_increasing(&down);
        let (increasing, picked) = if inc.len() >= dec.len() { (true, inc) } else { (false, dec) };
        let ids = picked.iter().map(|&i| rest[i].1).collect();
        let mut keep = vec![true; rest.len()];
        for &i in &picked {
            keep[i] = false;
        }
        let mut k = keep.iter();
        rest.retain(|_| *k.next().unwrap());
        chains.push(Chain { increasing, ids });
    }
    chains
}

#[derive(Clone, Debug)]
struct ChainColorer {
    increasing: bool,
    offset: u32,
    colorer: IntervalPointColorer,
}

/// Points in the plane colored with respect to axis-parallel rectangles.
///
/// Each monotone chain meets a rectangle in a contiguous run, so it is
/// colored like points on a line; chains get disjoint blocks of colors,
/// later chains higher, which keeps the union unimax.
#[derive(Clone, Debug, Default)]
pub struct RectPointColorer {
    chains: Vec<ChainColorer>,
    chain_of: BTreeMap<ObjectId, usize>,
    n0: usize,
}

impl RectPointColorer {
    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    /// The chains as currently populated, in block order.
    pub fn chains(&self) -> Vec<Chain> {
        self.chains
            .iter()
            .map(|c| Chain {
                increasing: c.increasing,
                ids: c.colorer.sequence().map(|(_, id)| id).collect(),
            })
            .collect()
    }
}

impl UnimaxColorer for RectPointColorer {
    type Item = Pt;

    fn color_all(items: &[(ObjectId, Pt)]) -> Self {
        let pos: BTreeMap<ObjectId, Pt> = items.iter().copied().collect();
        let mut chains = Vec::new();
        let mut chain_of = BTreeMap::new();
        let mut offset = 0;
        for (k, chain) in chain_decompose(items).into_iter().enumerate() {
            let keyed: Vec<(ObjectId, KeyOrder)> = chain.ids.iter().map(|&id| (id, x_key(id, pos[&id]))).collect();
            for &id in &chain.ids {
                chain_of.insert(id, k);
            }
            chains.push(ChainColorer {
                increasing: chain.increasing,
                offset,
                colorer: IntervalPointColorer::from_keys(&keyed),
            });
            offset += bit_length(chain.ids.len());
        }
        RectPointColorer {
            chains,
            chain_of,
            n0: items.len(),
        }
    }

    fn weak_delete(&mut self, id: ObjectId) -> Result<Vec<LocalRecoloring>> {
        let k = self.chain_of.remove(&id).ok_or(Error::UnknownPoint(id))?;
        let chain = &mut self.chains[k];
        let off = chain.offset;
        Ok(chain
            .colorer
            .weak_delete(id)?
            .into_iter()
            .map(|r| LocalRecoloring {
                id: r.id,
                from: r.from + off,
                to: r.to + off,
            })
            .collect())
    }

    fn color_of(&self, id: ObjectId) -> Option<u32> {
        let k = *self.chain_of.get(&id)?;
        let c = &self.chains[k];
        c.colorer.color_of(id).map(|l| l + c.offset)
    }

    fn colors(&self) -> Vec<(ObjectId, u32)> {
        self.chain_of
            .keys()
            .map(|&id| (id, self.color_of(id).expect("chained point")))
            .collect()
    }

    fn len(&self) -> usize {
        self.chain_of.len()
    }

    fn initial_len(&self) -> usize {
        self.n0
    }

    fn palette_size(n0: usize) -> u32 {
        2 * ceil_sqrt(n0) as u32 * bit_length(n0)
    }

    fn max_recolorings(_n0: usize) -> usize {
        1
    }

    fn check_unimax(items: &[(ObjectId, Pt, u32)]) -> std::result::Result<(), Witness> {
        let pts: Vec<(ObjectId, Pt, GlobalColor)> =
            items.iter().map(|&(id, p, c)| (id, p, GlobalColor::new(0, c as u64))).collect();
        oracle::check_rect_points(&pts, oracle::Rule::Unimax, &oracle::RangeSampling::default())
    }

    fn check_cf(items: &[(ObjectId, Pt, GlobalColor)]) -> std::result::Result<(), Witness> {
        oracle::check_rect_points(items, oracle::Rule::ConflictFree, &oracle::RangeSampling::default())
    }
}
