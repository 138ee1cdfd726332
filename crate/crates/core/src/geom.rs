//! Geometric value types, object identifiers and color encoding shared by
//! every coloring scheme.
//!
//! All objects are closed sets. Degenerate coordinates are resolved by
//! [`KeyOrder`], which breaks ties with the object id.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of an inserted object. Never reused within one structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u64);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A point in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pt {
    pub x: f64,
    pub y: f64,
}

impl Pt {
    pub fn new(x: f64, y: f64) -> Self {
        Pt { x, y }
    }
}

/// Closed axis-parallel rectangle `[x1, x2] x [y1, y2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRect {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub id: ObjectId,
}

impl AxisRect {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64, id: ObjectId) -> Self {
        debug_assert!(x1 <= x2 && y1 <= y2, "degenerate rectangle bounds");
        AxisRect { x1, x2, y1, y2, id }
    }

    /// Rectangle with its bottom-left corner at the origin.
    pub fn anchored(x: f64, y: f64, id: ObjectId) -> Self {
        AxisRect::new(0.0, x, 0.0, y, id)
    }

    pub fn is_anchored(&self) -> bool {
        self.x1 == 0.0 && self.y1 == 0.0
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn contains(&self, p: Pt) -> bool {
        self.x1 <= p.x && p.x <= self.x2 && self.y1 <= p.y && p.y <= self.y2
    }

    pub fn intersects(&self, other: &AxisRect) -> bool {
        self.x1 <= other.x2 && other.x1 <= self.x2 && self.y1 <= other.y2 && other.y1 <= self.y2
    }
}

/// Closed unit square `[x, x+1] x [y, y+1]`, given by its bottom-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSquare {
    pub x: f64,
    pub y: f64,
    pub id: ObjectId,
}

impl UnitSquare {
    pub fn new(x: f64, y: f64, id: ObjectId) -> Self {
        UnitSquare { x, y, id }
    }

    pub fn as_rect(&self) -> AxisRect {
        AxisRect::new(self.x, self.x + 1.0, self.y, self.y + 1.0, self.id)
    }

    pub fn contains(&self, p: Pt) -> bool {
        self.as_rect().contains(p)
    }
}

/// Closed interval `[a, b]` on the real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub id: ObjectId,
}

impl Interval {
    pub fn new(a: f64, b: f64, id: ObjectId) -> Self {
        debug_assert!(a <= b);
        Interval { a, b, id }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }
}

/// Search key: a coordinate with the object id as tiebreak, so keys of
/// distinct objects never compare equal.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KeyOrder {
    pub coord: f64,
    pub tiebreak: ObjectId,
}

impl KeyOrder {
    pub fn new(coord: f64, tiebreak: ObjectId) -> Self {
        KeyOrder { coord, tiebreak }
    }
}

/// Lexicographic comparison on `(coord, tiebreak)`.
pub fn compare_keys(k1: &KeyOrder, k2: &KeyOrder) -> Ordering {
    k1.coord
        .total_cmp(&k2.coord)
        .then_with(|| k1.tiebreak.cmp(&k2.tiebreak))
}

impl PartialEq for KeyOrder {
    fn eq(&self, other: &Self) -> bool {
        compare_keys(self, other) == Ordering::Equal
    }
}

impl Eq for KeyOrder {}

impl PartialOrd for KeyOrder {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for KeyOrder {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_keys(self, other)
    }
}

/// A color issued by some scheme.
///
/// `scheme_tag` names the color set (grid class, skeleton level pair,
/// palette of a dynamization level, ...) and `local` is the color inside
/// that set. Product colors pack the two components into `local`, see
/// [`GlobalColor::pair`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GlobalColor {
    pub scheme_tag: u32,
    pub local: u64,
}

impl GlobalColor {
    pub fn new(scheme_tag: u32, local: u64) -> Self {
        GlobalColor { scheme_tag, local }
    }

    /// Packs an ordered pair of local colors.
    pub fn pair(scheme_tag: u32, first: u32, second: u32) -> Self {
        GlobalColor {
            scheme_tag,
            local: ((first as u64) << 32) | second as u64,
        }
    }

    /// Inverse of [`GlobalColor::pair`].
    pub fn unpair(&self) -> (u32, u32) {
        ((self.local >> 32) as u32, self.local as u32)
    }

    pub fn with_tag(self, scheme_tag: u32) -> Self {
        GlobalColor { scheme_tag, ..self }
    }
}

impl fmt::Display for GlobalColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scheme_tag, self.local)
    }
}

/// Dense integer view of the colors issued so far.
///
/// Codes are handed out in order of first appearance, so the encoding is a
/// bijection between issued colors and `0..len()`.
#[derive(Clone, Debug, Default)]
pub struct ColorCodec {
    codes: BTreeMap<GlobalColor, u32>,
    colors: Vec<GlobalColor>,
}

impl ColorCodec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, color: GlobalColor) -> u32 {
        if let Some(&code) = self.codes.get(&color) {
            return code;
        }
        let code = self.colors.len() as u32;
        self.codes.insert(color, code);
        self.colors.push(color);
        code
    }

    pub fn decode(&self, code: u32) -> Option<GlobalColor> {
        self.colors.get(code as usize).copied()
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

/// One recoloring of a pre-existing object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recoloring {
    pub id: ObjectId,
    pub from: GlobalColor,
    pub to: GlobalColor,
}

/// Effect of a single update on the coloring.
///
/// `recolored` holds every pre-existing object whose color changed; the
/// color given to a newly inserted object is reported separately in
/// `assigned` and is not a recoloring.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecolorDiff {
    pub assigned: Option<(ObjectId, GlobalColor)>,
    pub recolored: Vec<Recoloring>,
}

impl RecolorDiff {
    pub fn recolorings(&self) -> usize {
        self.recolored.len()
    }

    pub(crate) fn retag(mut self, scheme_tag: u32) -> Self {
        if let Some((_, c)) = self.assigned.as_mut() {
            *c = c.with_tag(scheme_tag);
        }
        for r in &mut self.recolored {
            r.from = r.from.with_tag(scheme_tag);
            r.to = r.to.with_tag(scheme_tag);
        }
        self
    }
}

/// Number of distinct colors in an assignment.
pub fn distinct_colors<'a, I>(colors: I) -> usize
where
    I: IntoIterator<Item = &'a GlobalColor>,
{
    let mut seen: Vec<GlobalColor> = colors.into_iter().copied().collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// `ceil(log2(n))`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// `floor(log2(n)) + 1` for `n >= 1`, i.e. the bit length of `n`.
pub fn bit_length(n: usize) -> u32 {
    usize::BITS - n.leading_zeros()
}

/// `ceil(sqrt(n))` computed exactly on integers.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(c: f64, id: u64) -> KeyOrder {
        KeyOrder::new(c, ObjectId(id))
    }

    #[test]
    fn compare_keys_examples() {
        assert_eq!(compare_keys(&k(3.0, 1), &k(3.0, 2)), Ordering::Less);
        assert_eq!(compare_keys(&k(2.0, 9), &k(3.0, 1)), Ordering::Less);
        assert_eq!(compare_keys(&k(5.0, 4), &k(5.0, 4)), Ordering::Equal);
    }

    #[test]
    fn integer_logs() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(4097), 13);
        assert_eq!(bit_length(1), 1);
        assert_eq!(bit_length(7), 3);
        assert_eq!(bit_length(8), 4);
        assert_eq!(ceil_sqrt(0), 0);
        assert_eq!(ceil_sqrt(15), 4);
        assert_eq!(ceil_sqrt(16), 4);
        assert_eq!(ceil_sqrt(17), 5);
    }

    #[test]
    fn pair_packing() {
        let c = GlobalColor::pair(7, 5, 9);
        assert_eq!(c.unpair(), (5, 9));
        assert_ne!(c, GlobalColor::pair(7, 9, 5));
    }

    #[test]
    fn rectangle_containment_is_closed() {
        let r = AxisRect::new(0.0, 1.0, 0.0, 2.0, ObjectId(1));
        assert!(r.contains(Pt::new(1.0, 2.0)));
        assert!(!r.contains(Pt::new(1.0 + 1e-9, 2.0)));
        let s = AxisRect::new(1.0, 3.0, 2.0, 3.0, ObjectId(2));
        assert!(r.intersects(&s));
    }

    proptest! {
        #[test]
        fn key_order_is_total(a in (-5i32..5, 0u64..4), b in (-5i32..5, 0u64..4), c in (-5i32..5, 0u64..4)) {
            let (ka, kb, kc) = (k(a.0 as f64, a.1), k(b.0 as f64, b.1), k(c.0 as f64, c.1));
            prop_assert_eq!(compare_keys(&ka, &kb), compare_keys(&kb, &ka).reverse());
            prop_assert_eq!(compare_keys(&ka, &kb) == Ordering::Equal, a == b);
            if ka <= kb && kb <= kc {
                prop_assert!(ka <= kc);
            }
        }

        #[test]
        fn codec_round_trips(colors in proptest::collection::vec((0u32..4, 0u64..6), 0..40)) {
            let mut codec = ColorCodec::new();
            for &(t, l) in &colors {
                let c = GlobalColor::new(t, l);
                let code = codec.encode(c);
                prop_assert_eq!(codec.decode(code), Some(c));
            }
            prop_assert_eq!(codec.len(), distinct_colors(colors.iter().map(|&(t, l)| GlobalColor::new(t, l)).collect::<Vec<_>>().iter()));
        }
    }
}
