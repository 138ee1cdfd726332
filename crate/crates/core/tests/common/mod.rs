#![allow(dead_code)]

use cfcolor::{AxisRect, GlobalColor, ObjectId, UnitSquare};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Coordinates on a 1/16 lattice keep ties frequent.
pub fn q(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let a = (lo * 16.0) as i64;
    let b = (hi * 16.0) as i64;
    rng.gen_range(a..=b) as f64 / 16.0
}

pub fn anchored(rng: &mut ChaCha8Rng, id: u64, extent: f64) -> AxisRect {
    AxisRect::anchored(q(rng, 1.0 / 16.0, extent), q(rng, 1.0 / 16.0, extent), ObjectId(id))
}

pub fn square(rng: &mut ChaCha8Rng, id: u64, extent: f64) -> UnitSquare {
    UnitSquare::new(q(rng, 0.0, extent), q(rng, 0.0, extent), ObjectId(id))
}

pub fn bounded(rng: &mut ChaCha8Rng, id: u64, c: f64, extent: f64) -> AxisRect {
    let (x, y) = (q(rng, 0.0, extent), q(rng, 0.0, extent));
    let (w, h) = (q(rng, 1.0, c), q(rng, 1.0, c));
    AxisRect::new(x, x + w, y, y + h, ObjectId(id))
}

pub fn universe(rng: &mut ChaCha8Rng, id: u64, n: u64) -> AxisRect {
    let mut side = || {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        (a.min(b) as f64, a.max(b) as f64)
    };
    let (x1, x2) = side();
    let (y1, y2) = side();
    AxisRect::new(x1, x2, y1, y2, ObjectId(id))
}

/// Pairs every live rectangle with its color for the oracle.
pub fn paired<'a>(rects: impl Iterator<Item = &'a AxisRect>, colors: &[(ObjectId, GlobalColor)]) -> Vec<(AxisRect, GlobalColor)> {
    let map: std::collections::BTreeMap<_, _> = colors.iter().copied().collect();
    rects.map(|r| (*r, map[&r.id])).collect()
}

/// Random insert/delete script: `Some(id)` inserts a fresh id, `None`
/// deletes a uniformly random live one.
pub struct Script {
    pub rng: ChaCha8Rng,
    pub live: Vec<ObjectId>,
    next: u64,
}

pub enum Op {
    Insert(u64),
    Delete(ObjectId),
}

impl Script {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Script {
            rng,
            live: Vec::new(),
            next: 0,
        }
    }

    pub fn step(&mut self, delete_ratio: f64) -> Op {
        if !self.live.is_empty() && self.rng.gen_bool(delete_ratio) {
            let k = self.rng.gen_range(0..self.live.len());
            Op::Delete(self.live.swap_remove(k))
        } else {
            let id = self.next;
            self.next += 1;
            self.live.push(ObjectId(id));
            Op::Insert(id)
        }
    }
}
