//! Leaf-oriented red-black tree augmented with subtree height and two
//! extremal summaries.
//!
//! Keys live in the leaves; an internal node stores as its split value the
//! maximum key of its left subtree and routes `key <= split` to the left.
//! Every node keeps
//!
//! * `height`: 0 for a leaf, `1 + max(children)` otherwise,
//! * `summary_max`: the object in the subtree maximizing its `hi` value,
//! * `summary_min`: the object in the subtree minimizing its `lo` value,
//!
//! with ties broken by object id. Each update returns a [`DirtyLog`] that
//! lists every node whose augmentation, children or existence changed,
//! together with before/after snapshots of what the node references. The
//! coloring layers use it to find the objects whose color may have changed.

use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::geom::{KeyOrder, ObjectId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// An object reference together with the value it is ranked by.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub id: ObjectId,
    pub value: f64,
}

impl Summary {
    fn order(&self) -> KeyOrder {
        KeyOrder::new(self.value, self.id)
    }
}

#[derive(Clone, Debug)]
pub struct AugNode {
    parent: Option<NodeId>,
    left: Option<NodeId>,
    right: Option<NodeId>,
    /// Leaf key, or split value for internal nodes.
    key: KeyOrder,
    payload: Option<ObjectId>,
    hi: f64,
    lo: f64,
    height: u32,
    smax: Summary,
    smin: Summary,
    red: bool,
}

impl AugNode {
    pub fn is_leaf(&self) -> bool {
        self.left.is_none()
    }

    /// The leaf key or the split value.
    pub fn key(&self) -> KeyOrder {
        self.key
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn left(&self) -> Option<NodeId> {
        self.left
    }

    pub fn right(&self) -> Option<NodeId> {
        self.right
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn summary_max(&self) -> ObjectId {
        self.smax.id
    }

    pub fn summary_min(&self) -> ObjectId {
        self.smin.id
    }

    pub fn summary_max_value(&self) -> f64 {
        self.smax.value
    }

    pub fn summary_min_value(&self) -> f64 {
        self.smin.value
    }

    /// The stored object, for leaves.
    pub fn payload(&self) -> Option<ObjectId> {
        self.payload
    }

    pub fn is_red(&self) -> bool {
        self.red
    }
}

/// What a node references at one point in time: its own augmentation and
/// the summaries of its children.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeSnapshot {
    pub height: u32,
    pub payload: Option<ObjectId>,
    pub summary_max: ObjectId,
    pub summary_min: ObjectId,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
    /// `(summary_max, summary_min)` of the left child.
    pub left_summaries: Option<(ObjectId, ObjectId)>,
    pub right_summaries: Option<(ObjectId, ObjectId)>,
}

impl NodeSnapshot {
    fn objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        let own = [Some(self.summary_max), Some(self.summary_min), self.payload];
        let kids = [self.left_summaries, self.right_summaries]
            .into_iter()
            .flatten()
            .flat_map(|(a, b)| [a, b]);
        own.into_iter().flatten().chain(kids)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirtyEntry {
    pub node: NodeId,
    /// `None` if the node was created by the update.
    pub before: Option<NodeSnapshot>,
    /// `None` if the node was destroyed by the update.
    pub after: Option<NodeSnapshot>,
}

/// Nodes touched by one update. May over-approximate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DirtyLog {
    entries: Vec<DirtyEntry>,
}

impl DirtyLog {
    pub fn entries(&self) -> &[DirtyEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.entries.iter().any(|e| e.node == node)
    }

    /// Every object referenced by a touched node before or after the update.
    pub fn affected_objects(&self) -> Vec<ObjectId> {
        let mut out: Vec<ObjectId> = self
            .entries
            .iter()
            .flat_map(|e| e.before.iter().chain(e.after.iter()))
            .flat_map(|s| s.objects().collect::<Vec<_>>())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Per-direction maxima of node heights over the internal nodes whose child
/// on the path to a leaf has that leaf's object as a summary. `None` means
/// the set is empty. The leaf itself (height 0) is not included.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NSetMaxima {
    /// `summary_max` of a right child.
    pub right_max: Option<u32>,
    /// `summary_min` of a right child.
    pub right_min: Option<u32>,
    /// `summary_min` of a left child.
    pub left_min: Option<u32>,
    /// `summary_max` of a left child.
    pub left_max: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    pub node: Option<NodeId>,
    pub message: String,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(n) => write!(f, "{}: {}", n, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AugTree {
    nodes: Vec<Option<AugNode>>,
    free: Vec<NodeId>,
    root: Option<NodeId>,
    leaves: HashMap<ObjectId, NodeId>,
    // per-update bookkeeping
    touched: BTreeMap<NodeId, Option<NodeSnapshot>>,
}

impl AugTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    /// Height of the root, 0 for an empty tree.
    pub fn height(&self) -> u32 {
        self.root.map_or(0, |r| self.n(r).height)
    }

    pub fn node(&self, id: NodeId) -> &AugNode {
        self.n(id)
    }

    pub fn leaf_of(&self, payload: ObjectId) -> Option<NodeId> {
        self.leaves.get(&payload).copied()
    }

    pub fn contains_object(&self, payload: ObjectId) -> bool {
        self.leaves.contains_key(&payload)
    }

    /// All live nodes in arena order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_some())
            .map(|(i, _)| NodeId(i as u32))
    }

    /// Leaves from left to right.
    pub fn leaves_in_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut cur = self.root;
        while cur.is_some() || !stack.is_empty() {
            while let Some(c) = cur {
                stack.push(c);
                cur = self.n(c).left;
            }
            let c = stack.pop().unwrap();
            if self.n(c).is_leaf() {
                out.push(c);
            }
            cur = self.n(c).right;
        }
        out
    }

    pub fn snapshot(&self, id: NodeId) -> NodeSnapshot {
        let n = self.n(id);
        let sums = |c: Option<NodeId>| c.map(|c| (self.n(c).smax.id, self.n(c).smin.id));
        NodeSnapshot {
            height: n.height,
            payload: n.payload,
            summary_max: n.smax.id,
            summary_min: n.smin.id,
            left: n.left,
            right: n.right,
            left_summaries: sums(n.left),
            right_summaries: sums(n.right),
        }
    }

    /// Inserts a leaf for `key` storing `payload`, ranked by `y` in both
    /// summaries.
    pub fn insert(&mut self, key: KeyOrder, payload: ObjectId, y: f64) -> Result<DirtyLog> {
        self.insert_bounds(key, payload, y, y)
    }

    /// Like [`AugTree::insert`] with separate values: `summary_max` ranks by
    /// `hi`, `summary_min` by `lo`.
    pub fn insert_bounds(&mut self, key: KeyOrder, payload: ObjectId, hi: f64, lo: f64) -> Result<DirtyLog> {
        if self.leaves.contains_key(&payload) {
            return Err(Error::DuplicateId(payload));
        }
        self.touched.clear();
        let Some(root) = self.root else {
            let leaf = self.alloc_leaf(key, payload, hi, lo);
            self.root = Some(leaf);
            self.leaves.insert(payload, leaf);
            return Ok(self.finish());
        };

        let leaf = self.descend(root, &key);
        if self.n(leaf).key == key {
            self.touched.clear();
            return Err(Error::DuplicateKey(key));
        }
        let new_leaf = self.alloc_leaf(key, payload, hi, lo);
        let old_key = self.n(leaf).key;
        let (l, r, split) = if key < old_key {
            (new_leaf, leaf, key)
        } else {
            (leaf, new_leaf, old_key)
        };
        let parent = self.n(leaf).parent;
        let internal = self.alloc_internal(split, l, r);
        self.n_mut(internal).parent = parent;
        self.replace_child(parent, leaf, internal);
        self.n_mut(l).parent = Some(internal);
        self.n_mut(r).parent = Some(internal);
        self.leaves.insert(payload, new_leaf);
        self.insert_fixup(internal);
        Ok(self.finish())
    }

    /// Removes the leaf for `key`.
    pub fn delete(&mut self, key: KeyOrder) -> Result<DirtyLog> {
        self.touched.clear();
        let Some(root) = self.root else {
            return Err(Error::KeyNotFound(key));
        };
        let leaf = self.descend(root, &key);
        if self.n(leaf).key != key {
            self.touched.clear();
            return Err(Error::KeyNotFound(key));
        }
        let payload = self.n(leaf).payload.expect("leaf without payload");
        self.leaves.remove(&payload);

        let Some(parent) = self.n(leaf).parent else {
            self.release(leaf);
            self.root = None;
            return Ok(self.finish());
        };
        let sibling = if self.n(parent).left == Some(leaf) {
            self.n(parent).right.unwrap()
        } else {
            // The removed leaf was the maximum of every left subtree whose
            // rightmost path it ends; the nearest such ancestor takes the
            // new maximum, which is the parent's split.
            let new_split = self.n(parent).key;
            let mut child = parent;
            while let Some(anc) = self.n(child).parent {
                if self.n(anc).left == Some(child) {
                    self.touch(anc);
                    self.n_mut(anc).key = new_split;
                    break;
                }
                child = anc;
            }
            self.n(parent).left.unwrap()
        };
        let grand = self.n(parent).parent;
        self.touch(sibling);
        self.n_mut(sibling).parent = grand;
        self.replace_child(grand, parent, sibling);
        let parent_was_red = self.n(parent).red;
        self.release(leaf);
        self.release(parent);

        if !parent_was_red {
            if self.n(sibling).red {
                self.n_mut(sibling).red = false;
            } else {
                self.delete_fixup(sibling);
            }
        }
        Ok(self.finish())
    }

    /// Maximum node height in each directional N-set of `payload`.
    ///
    /// Walking up from the leaf, an ancestor `v` reached from child `c`
    /// belongs to a set when `payload` is the corresponding summary of `c`.
    /// Returns `None` if `payload` is not stored.
    pub fn n_set_maxima(&self, payload: ObjectId) -> Option<NSetMaxima> {
        let leaf = self.leaf_of(payload)?;
        let mut out = NSetMaxima::default();
        let mut child = leaf;
        while let Some(v) = self.n(child).parent {
            let h = self.n(v).height;
            let c = self.n(child);
            let bump = |slot: &mut Option<u32>| *slot = Some(slot.map_or(h, |m| m.max(h)));
            if self.n(v).right == Some(child) {
                if c.smax.id == payload {
                    bump(&mut out.right_max);
                }
                if c.smin.id == payload {
                    bump(&mut out.right_min);
                }
            } else {
                if c.smin.id == payload {
                    bump(&mut out.left_min);
                }
                if c.smax.id == payload {
                    bump(&mut out.left_max);
                }
            }
            child = v;
        }
        Some(out)
    }

    /// Checks every structural and augmentation invariant by full traversal.
    pub fn audit(&self) -> std::result::Result<(), ViolationReport> {
        let Some(root) = self.root else {
            if !self.leaves.is_empty() {
                return Err(violation(None, "empty tree with registered leaves"));
            }
            return Ok(());
        };
        if self.n(root).parent.is_some() {
            return Err(violation(Some(root), "root has a parent"));
        }
        if self.n(root).red {
            return Err(violation(Some(root), "root is red"));
        }
        let mut leaves = Vec::new();
        self.audit_node(root, &mut leaves)?;
        for w in leaves.windows(2) {
            if self.n(w[0]).key >= self.n(w[1]).key {
                return Err(violation(Some(w[1]), "leaf keys out of order"));
            }
        }
        if leaves.len() != self.leaves.len() {
            return Err(violation(None, "leaf index size mismatch"));
        }
        for &leaf in &leaves {
            let p = self.n(leaf).payload.unwrap();
            if self.leaves.get(&p) != Some(&leaf) {
                return Err(violation(Some(leaf), "leaf index points elsewhere"));
            }
        }
        Ok(())
    }

    // Returns (black height, max key) of the subtree.
    fn audit_node(&self, id: NodeId, leaves: &mut Vec<NodeId>) -> std::result::Result<(u32, KeyOrder), ViolationReport> {
        let n = self.n(id);
        if n.is_leaf() {
            if n.right.is_some() || n.payload.is_none() {
                return Err(violation(Some(id), "malformed leaf"));
            }
            if n.red {
                return Err(violation(Some(id), "red leaf"));
            }
            if n.height != 0 {
                return Err(violation(Some(id), "leaf height is not 0"));
            }
            let own = Summary { id: n.payload.unwrap(), value: n.hi };
            let own_lo = Summary { id: n.payload.unwrap(), value: n.lo };
            if n.smax != own || n.smin != own_lo {
                return Err(violation(Some(id), "leaf summaries differ from its object"));
            }
            leaves.push(id);
            return Ok((1, n.key));
        }
        let (Some(l), Some(r)) = (n.left, n.right) else {
            return Err(violation(Some(id), "internal node with a missing child"));
        };
        if n.payload.is_some() {
            return Err(violation(Some(id), "internal node with payload"));
        }
        for c in [l, r] {
            if self.n(c).parent != Some(id) {
                return Err(violation(Some(c), "parent pointer mismatch"));
            }
            if n.red && self.n(c).red {
                return Err(violation(Some(id), "red node with red child"));
            }
        }
        let (bl, max_l) = self.audit_node(l, leaves)?;
        let (br, max_r) = self.audit_node(r, leaves)?;
        if bl != br {
            return Err(violation(Some(id), "unequal black heights"));
        }
        if max_l != n.key {
            return Err(violation(Some(id), "split is not the maximum key of the left subtree"));
        }
        let (ln, rn) = (self.n(l), self.n(r));
        if n.height != 1 + ln.height.max(rn.height) {
            return Err(violation(Some(id), "height field is stale"));
        }
        if n.smax != max_summary(ln.smax, rn.smax) || n.smin != min_summary(ln.smin, rn.smin) {
            return Err(violation(Some(id), "summary field is stale"));
        }
        Ok((bl + u32::from(!n.red), max_r))
    }

    /// Overwrites a height field without fixing anything. Test support for
    /// fault injection.
    #[doc(hidden)]
    pub fn corrupt_height_for_testing(&mut self, node: NodeId, height: u32) {
        self.n_mut(node).height = height;
    }

    // ---- internals ----

    fn n(&self, id: NodeId) -> &AugNode {
        self.nodes[id.index()].as_ref().expect("dangling node id")
    }

    fn n_mut(&mut self, id: NodeId) -> &mut AugNode {
        self.nodes[id.index()].as_mut().expect("dangling node id")
    }

    fn alive(&self, id: NodeId) -> bool {
        self.nodes.get(id.index()).is_some_and(|n| n.is_some())
    }

    fn alloc(&mut self, node: AugNode) -> NodeId {
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id.index()] = Some(node);
                id
            }
            None => {
                self.nodes.push(Some(node));
                NodeId(self.nodes.len() as u32 - 1)
            }
        };
        self.touched.insert(id, None);
        id
    }

    fn alloc_leaf(&mut self, key: KeyOrder, payload: ObjectId, hi: f64, lo: f64) -> NodeId {
        self.alloc(AugNode {
            parent: None,
            left: None,
            right: None,
            key,
            payload: Some(payload),
            hi,
            lo,
            height: 0,
            smax: Summary { id: payload, value: hi },
            smin: Summary { id: payload, value: lo },
            red: false,
        })
    }

    fn alloc_internal(&mut self, split: KeyOrder, left: NodeId, right: NodeId) -> NodeId {
        let (l, r) = (self.n(left).clone(), self.n(right).clone());
        self.alloc(AugNode {
            parent: None,
            left: Some(left),
            right: Some(right),
            key: split,
            payload: None,
            hi: 0.0,
            lo: 0.0,
            height: 1 + l.height.max(r.height),
            smax: max_summary(l.smax, r.smax),
            smin: min_summary(l.smin, r.smin),
            red: true,
        })
    }

    fn release(&mut self, id: NodeId) {
        self.touch(id);
        self.nodes[id.index()] = None;
        self.free.push(id);
    }

    /// Records the before-snapshot of `id` the first time it is touched in
    /// the current update.
    fn touch(&mut self, id: NodeId) {
        if !self.touched.contains_key(&id) {
            let snap = self.snapshot(id);
            self.touched.insert(id, Some(snap));
        }
    }

    /// Walks from `from` to the leaf where `key` is routed, touching the path.
    fn descend(&mut self, from: NodeId, key: &KeyOrder) -> NodeId {
        let mut cur = from;
        loop {
            self.touch(cur);
            let n = self.n(cur);
            match (n.left, n.right) {
                (Some(l), Some(r)) => cur = if *key <= n.key { l } else { r },
                _ => return cur,
            }
        }
    }

    fn replace_child(&mut self, parent: Option<NodeId>, old: NodeId, new: NodeId) {
        match parent {
            None => self.root = Some(new),
            Some(p) => {
                self.touch(p);
                let pn = self.n_mut(p);
                if pn.left == Some(old) {
                    pn.left = Some(new);
                } else {
                    debug_assert_eq!(pn.right, Some(old));
                    pn.right = Some(new);
                }
            }
        }
    }

    fn is_red(&self, id: Option<NodeId>) -> bool {
        id.is_some_and(|i| self.n(i).red)
    }

    fn rotate_left(&mut self, x: NodeId) {
        let y = self.n(x).right.expect("rotate_left without right child");
        self.touch(x);
        self.touch(y);
        let beta = self.n(y).left.unwrap();
        let parent = self.n(x).parent;
        self.n_mut(x).right = Some(beta);
        self.n_mut(beta).parent = Some(x);
        self.n_mut(y).parent = parent;
        self.replace_child(parent, x, y);
        self.n_mut(y).left = Some(x);
        self.n_mut(x).parent = Some(y);
    }

    fn rotate_right(&mut self, y: NodeId) {
        let x = self.n(y).left.expect("rotate_right without left child");
        self.touch(x);
        self.touch(y);
        let beta = self.n(x).right.unwrap();
        let parent = self.n(y).parent;
        self.n_mut(y).left = Some(beta);
        self.n_mut(beta).parent = Some(y);
        self.n_mut(x).parent = parent;
        self.replace_child(parent, y, x);
        self.n_mut(x).right = Some(y);
        self.n_mut(y).parent = Some(x);
    }

    fn insert_fixup(&mut self, mut z: NodeId) {
        while let Some(p) = self.n(z).parent.filter(|&p| self.n(p).red) {
            let g = self.n(p).parent.expect("red node at the root");
            if self.n(g).left == Some(p) {
                let uncle = self.n(g).right;
                if self.is_red(uncle) {
                    self.n_mut(p).red = false;
                    self.n_mut(uncle.unwrap()).red = false;
                    self.n_mut(g).red = true;
                    z = g;
                } else {
                    let mut p = p;
                    if self.n(p).right == Some(z) {
                        z = p;
                        self.rotate_left(z);
                        p = self.n(z).parent.unwrap();
                    }
                    self.n_mut(p).red = false;
                    self.n_mut(g).red = true;
                    self.rotate_right(g);
                }
            } else {
                let uncle = self.n(g).left;
                if self.is_red(uncle) {
                    self.n_mut(p).red = false;
                    self.n_mut(uncle.unwrap()).red = false;
                    self.n_mut(g).red = true;
                    z = g;
                } else {
                    let mut p = p;
                    if self.n(p).left == Some(z) {
                        z = p;
                        self.rotate_right(z);
                        p = self.n(z).parent.unwrap();
                    }
                    self.n_mut(p).red = false;
                    self.n_mut(g).red = true;
                    self.rotate_left(g);
                }
            }
        }
        let root = self.root.unwrap();
        self.n_mut(root).red = false;
    }

    fn delete_fixup(&mut self, mut x: NodeId) {
        while Some(x) != self.root && !self.n(x).red {
            let p = self.n(x).parent.unwrap();
            if self.n(p).left == Some(x) {
                let mut w = self.n(p).right.unwrap();
                if self.n(w).red {
                    self.n_mut(w).red = false;
                    self.n_mut(p).red = true;
                    self.rotate_left(p);
                    w = self.n(p).right.unwrap();
                }
                let (wl, wr) = (self.n(w).left, self.n(w).right);
                if !self.is_red(wl) && !self.is_red(wr) {
                    self.n_mut(w).red = true;
                    x = p;
                } else {
                    if !self.is_red(wr) {
                        self.n_mut(wl.unwrap()).red = false;
                        self.n_mut(w).red = true;
                        self.rotate_right(w);
                        w = self.n(p).right.unwrap();
                    }
                    self.n_mut(w).red = self.n(p).red;
                    self.n_mut(p).red = false;
                    let wr = self.n(w).right.unwrap();
                    self.n_mut(wr).red = false;
                    self.rotate_left(p);
                    x = self.root.unwrap();
                }
            } else {
                let mut w = self.n(p).left.unwrap();
                if self.n(w).red {
                    self.n_mut(w).red = false;
                    self.n_mut(p).red = true;
                    self.rotate_right(p);
                    w = self.n(p).left.unwrap();
                }
                let (wl, wr) = (self.n(w).left, self.n(w).right);
                if !self.is_red(wl) && !self.is_red(wr) {
                    self.n_mut(w).red = true;
                    x = p;
                } else {
                    if !self.is_red(wl) {
                        self.n_mut(wr.unwrap()).red = false;
                        self.n_mut(w).red = true;
                        self.rotate_left(w);
                        w = self.n(p).left.unwrap();
                    }
                    self.n_mut(w).red = self.n(p).red;
                    self.n_mut(p).red = false;
                    let wl = self.n(w).left.unwrap();
                    self.n_mut(wl).red = false;
                    self.rotate_right(p);
                    x = self.root.unwrap();
                }
            }
        }
        self.n_mut(x).red = false;
    }

    fn depth(&self, mut id: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.n(id).parent {
            d += 1;
            id = p;
        }
        d
    }

    fn recompute(&mut self, id: NodeId) {
        let n = self.n(id);
        let (Some(l), Some(r)) = (n.left, n.right) else {
            return;
        };
        let (ln, rn) = (self.n(l), self.n(r));
        let height = 1 + ln.height.max(rn.height);
        let smax = max_summary(ln.smax, rn.smax);
        let smin = min_summary(ln.smin, rn.smin);
        let n = self.n_mut(id);
        n.height = height;
        n.smax = smax;
        n.smin = smin;
    }

    /// Recomputes augmentation bottom-up from every touched node to the root
    /// and assembles the log.
    fn finish(&mut self) -> DirtyLog {
        let mut heap: BinaryHeap<(usize, NodeId)> = BinaryHeap::new();
        let mut queued = std::collections::HashSet::new();
        let start: Vec<NodeId> = self.touched.keys().copied().filter(|&id| self.alive(id)).collect();
        for id in start {
            if queued.insert(id) {
                heap.push((self.depth(id), id));
            }
        }
        while let Some((_, id)) = heap.pop() {
            self.recompute(id);
            if let Some(p) = self.n(id).parent {
                if queued.insert(p) {
                    self.touch(p);
                    heap.push((self.depth(p), p));
                }
            }
        }
        let touched = std::mem::take(&mut self.touched);
        let entries = touched
            .into_iter()
            .map(|(node, before)| DirtyEntry {
                node,
                before,
                after: self.alive(node).then(|| self.snapshot(node)),
            })
            .collect();
        DirtyLog { entries }
    }
}

fn max_summary(a: Summary, b: Summary) -> Summary {
    if a.order() >= b.order() {
        a
    } else {
        b
    }
}

fn min_summary(a: Summary, b: Summary) -> Summary {
    if a.order() <= b.order() {
        a
    } else {
        b
    }
}

fn violation(node: Option<NodeId>, message: &str) -> ViolationReport {
    ViolationReport {
        node,
        message: message.to_string(),
    }
}
