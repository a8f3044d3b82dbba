//! Which pairs of derivation classes can appear together in one complete
//! parse.
//!
//! Within a piece the relation is exact: two classes co-occur iff some
//! complete tree contains a derivation of each. Classes of different pieces
//! always co-occur, since the corpus is explained jointly.

use std::collections::{BTreeMap, BTreeSet};

use chordlearn_egraph::Id;

use crate::lang::Op;
use crate::parser::Forest;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoOccur {
    /// Unordered same-piece pairs, stored as `(min, max)`.
    within: BTreeSet<(Id, Id)>,
    piece_of: BTreeMap<Id, u32>,
}

impl CoOccur {
    pub fn holds(&self, a: Id, b: Id) -> bool {
        let (Some(pa), Some(pb)) = (self.piece_of.get(&a), self.piece_of.get(&b)) else {
            return false;
        };
        if pa != pb {
            return true;
        }
        self.within.contains(&ordered(a, b))
    }

    /// All unordered pairs `(a, b)` with `a <= b` that co-occur.
    pub fn pairs(&self) -> Vec<(Id, Id)> {
        let classes: Vec<Id> = self.piece_of.keys().copied().collect();
        let mut out = Vec::new();
        for (k, &a) in classes.iter().enumerate() {
            for &b in &classes[k..] {
                if self.holds(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn classes(&self) -> impl Iterator<Item = Id> + '_ {
        self.piece_of.keys().copied()
    }
}

fn ordered(a: Id, b: Id) -> (Id, Id) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Reflexive-transitive descendants of every marked class through primitive
/// `Compose` nodes.
pub fn descendants(forest: &Forest) -> BTreeMap<Id, BTreeSet<Id>> {
    let mut order: Vec<Id> = forest.marked().collect();
    order.sort_by_key(|&id| forest.key_of(id).map_or(0, |k| k.len()));
    let mut desc: BTreeMap<Id, BTreeSet<Id>> = BTreeMap::new();
    for id in order {
        let mut set = BTreeSet::from([id]);
        for node in forest.primitive_nodes(id) {
            if let Op::Compose(_) = node.op {
                for &c in &node.children {
                    set.extend(desc[&forest.find(c)].iter().copied());
                }
            }
        }
        desc.insert(id, set);
    }
    desc
}

pub fn compute_cooccur(forest: &Forest) -> CoOccur {
    let desc = descendants(forest);
    let mut within = BTreeSet::new();
    let mut piece_of = BTreeMap::new();
    for id in forest.marked() {
        let key = forest.key_of(id).expect("marked classes are spans");
        piece_of.insert(id, key.piece);
        // An ancestor and any of its descendants share a tree through the
        // ancestor, which is itself part of a complete parse.
        for &d in &desc[&id] {
            within.insert(ordered(id, d));
        }
        // Disjoint spans meet at their lowest common ancestor node.
        for node in forest.primitive_nodes(id) {
            if let Op::Compose(_) = node.op {
                let (x, y) = (forest.find(node.children[0]), forest.find(node.children[1]));
                for &a in &desc[&x] {
                    for &b in &desc[&y] {
                        within.insert(ordered(a, b));
                    }
                }
            }
        }
    }
    CoOccur { within, piece_of }
}
