//! Cost sets: for each class, the (library, use cost) pairs under which it
//! can be derived.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chordlearn_egraph::{ENode, Id};

use crate::error::{Error, Result};
use crate::lang::{FnId, Op};
use crate::liblearn::select::Storage;
use crate::parser::Forest;

pub type Lib = BTreeSet<FnId>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CostPair {
    pub lib: Lib,
    pub cost: usize,
}

impl CostPair {
    pub fn new(lib: impl IntoIterator<Item = FnId>, cost: usize) -> CostPair {
        CostPair { lib: lib.into_iter().collect(), cost }
    }

    /// `self` is at least as good as `other` on both axes.
    pub fn dominates(&self, other: &CostPair) -> bool {
        self.lib.is_subset(&other.lib) && self.cost <= other.cost
    }
}

impl fmt::Display for CostPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("({")?;
        for (k, id) in self.lib.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}, {})", self.cost)
    }
}

/// A set of pairs, kept sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CostSet {
    pairs: Vec<CostPair>,
}

impl CostSet {
    pub fn new(pairs: impl IntoIterator<Item = CostPair>) -> CostSet {
        let set: BTreeSet<CostPair> = pairs.into_iter().collect();
        CostSet { pairs: set.into_iter().collect() }
    }

    pub fn pairs(&self) -> &[CostPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairwise combination: libraries are joined, costs added, and
    /// combinations with more than `max_lib` abstractions dropped.
    pub fn cross(&self, other: &CostSet, max_lib: usize) -> CostSet {
        let mut out = BTreeSet::new();
        for p in &self.pairs {
            for q in &other.pairs {
                let lib: Lib = p.lib.union(&q.lib).copied().collect();
                if lib.len() <= max_lib {
                    out.insert(CostPair { lib, cost: p.cost + q.cost });
                }
            }
        }
        CostSet { pairs: out.into_iter().collect() }
    }

    fn map_cost(self, f: impl Fn(usize) -> usize) -> CostSet {
        CostSet::new(self.pairs.into_iter().map(|p| CostPair { cost: f(p.cost), lib: p.lib }))
    }
}

/// Keeps the Pareto antichain: a pair goes iff another pair has a subset
/// library and no higher cost.
pub fn reduce(cs: &CostSet) -> CostSet {
    // Cheapest first, so every dominator is seen before what it dominates.
    let mut order: Vec<&CostPair> = cs.pairs.iter().collect();
    order.sort_by(|a, b| (a.cost, a.lib.len(), &a.lib).cmp(&(b.cost, b.lib.len(), &b.lib)));
    let mut kept: Vec<&CostPair> = Vec::new();
    for p in order {
        if !kept.iter().any(|k| k.dominates(p)) {
            kept.push(p);
        }
    }
    CostSet::new(kept.into_iter().cloned())
}

/// Beam ordering: use cost, then library size, then fn ids.
pub fn beam_order(a: &CostPair, b: &CostPair) -> std::cmp::Ordering {
    (a.cost, a.lib.len(), &a.lib).cmp(&(b.cost, b.lib.len(), &b.lib))
}

/// Keeps the `beam` best pairs by use cost; `None` keeps everything.
pub fn prune(cs: &CostSet, beam: Option<usize>) -> CostSet {
    prune_by(cs, beam, |_| 0)
}

/// Keeps the `beam` pairs with the smallest `storage(lib) + cost`, then
/// falls back to the use-cost order.
pub fn prune_by(cs: &CostSet, beam: Option<usize>, storage: impl Fn(&Lib) -> usize) -> CostSet {
    match beam {
        Some(k) if cs.len() > k => {
            let mut order: Vec<(usize, &CostPair)> = cs.pairs.iter().map(|p| (storage(&p.lib) + p.cost, p)).collect();
            order.sort_by(|(fa, a), (fb, b)| fa.cmp(fb).then_with(|| beam_order(a, b)));
            CostSet::new(order.into_iter().take(k).map(|(_, p)| p.clone()))
        }
        _ => cs.clone(),
    }
}

/// How the per-class beam ranks pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PruneOrder {
    /// Use cost alone.
    UseCost,
    /// Library storage plus use cost.
    #[default]
    FullCost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostConfig {
    /// Largest library a pair may carry.
    pub max_lib: usize,
    /// Per-class beam width; `None` disables pruning.
    pub beam: Option<usize>,
    /// Whether dominated pairs are removed before pruning.
    pub reduce: bool,
    pub order: PruneOrder,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig { max_lib: 15, beam: Some(5), reduce: true, order: PruneOrder::FullCost }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CostAnalysis {
    pub sets: BTreeMap<Id, CostSet>,
}

impl CostAnalysis {
    pub fn get(&self, id: Id) -> Option<&CostSet> {
        self.sets.get(&id)
    }
}

/// Cost set of one derivation node from its children's final sets.
pub fn node_cost_set(
    forest: &Forest,
    node: &ENode<Op>,
    finals: &BTreeMap<Id, CostSet>,
    cfg: &CostConfig,
) -> Result<CostSet> {
    let unit = CostSet::new([CostPair::new([], 0)]);
    let mut acc = match &node.op {
        Op::Leaf(_) => return Ok(CostSet::new([CostPair::new([], 1)])),
        Op::App { .. } if cfg.max_lib == 0 => return Ok(CostSet::default()),
        Op::App { fun, .. } => CostSet::new([CostPair::new([*fun], 0)]),
        Op::Compose(_) => unit,
        other => unreachable!("{other} is not a derivation node"),
    };
    for &child in &node.children[..node.op.template_arity()] {
        let child = forest.find(child);
        let set = finals.get(&child).ok_or(Error::Cycle(child.index()))?;
        acc = acc.cross(set, cfg.max_lib);
    }
    Ok(acc.map_cost(|c| c + 1))
}

/// Bottom-up cost sets for every root-connected class. Children always
/// cover strictly shorter spans, so span length is a valid schedule.
///
/// `storage` is only read by the full-cost beam.
pub fn cost_set_analysis(forest: &Forest, cfg: &CostConfig, storage: &Storage<'_>) -> Result<CostAnalysis> {
    let storage = |lib: &Lib| -> usize {
        match cfg.order {
            PruneOrder::UseCost => 0,
            PruneOrder::FullCost => storage.cost(lib),
        }
    };
    let mut order: Vec<(u32, Id)> = forest.marked().map(|id| (forest.key_of(id).map_or(0, |k| k.len()), id)).collect();
    order.sort();
    let mut finals: BTreeMap<Id, CostSet> = BTreeMap::new();
    for (_, id) in order {
        let mut collected = Vec::new();
        for node in forest.derivation_nodes(id) {
            collected.extend(node_cost_set(forest, node, &finals, cfg)?.pairs);
        }
        let collected = CostSet::new(collected);
        let reduced = if cfg.reduce { reduce(&collected) } else { collected };
        finals.insert(id, prune_by(&reduced, cfg.beam, storage));
    }
    Ok(CostAnalysis { sets: finals })
}
