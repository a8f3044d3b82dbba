//! Candidate abstractions as anti-unifiers of pairs of derivation classes.
//!
//! Each unordered class pair `(a, b)` gets the set of generalizations of
//! every pair of derivations drawn from `a` and `b`. Node pairs are computed
//! once all their child class pairs are final; a class pair is final once
//! all its node pairs are in. The two steps alternate until every pair the
//! co-occurring top-level pairs depend on is final.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value as Json};

use chordlearn_egraph::{ENode, Id};

use crate::cooccur::CoOccur;
use crate::error::{Error, Result};
use crate::lang::Op;
use crate::liblearn::rewrite::match_class;
use crate::parser::Forest;
use crate::template::Template;

pub const AU_ITERATION_CAP: usize = 10_000;

type Pair = (Id, Id);
type NodePair<'a> = (&'a ENode<Op>, &'a ENode<Op>);

fn ordered(a: Id, b: Id) -> Pair {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Pairs and node pairs in ascending id order.
    #[default]
    Forward,
    Reverse,
}

#[derive(Clone, Debug, Default)]
pub struct AuState {
    sets: BTreeMap<Pair, BTreeSet<Template>>,
    finalized: BTreeSet<Pair>,
    /// Candidates offered to an already final pair. Always zero unless the
    /// scheduler is broken.
    pub late_additions: usize,
}

impl AuState {
    pub fn is_final(&self, a: Id, b: Id) -> bool {
        self.finalized.contains(&ordered(a, b))
    }

    pub fn get(&self, a: Id, b: Id) -> Option<&BTreeSet<Template>> {
        let p = ordered(a, b);
        self.finalized.contains(&p).then(|| &self.sets[&p])
    }

    fn add(&mut self, pair: Pair, ts: BTreeSet<Template>) {
        if self.finalized.contains(&pair) {
            self.late_additions += 1;
            return;
        }
        self.sets.entry(pair).or_default().extend(ts);
    }
}

/// Anti-unifiers of two derivation nodes, or `None` while a child pair is
/// not final.
pub fn anti_unify_pair(forest: &Forest, x: &ENode<Op>, y: &ENode<Op>, state: &AuState) -> Option<BTreeSet<Template>> {
    match (&x.op, &y.op) {
        (Op::Leaf(r), Op::Leaf(s)) if r == s => Some(BTreeSet::from([Template::Pure(r.clone())])),
        (Op::Compose(r), Op::Compose(s)) if r == s && x.children.len() == y.children.len() => {
            let mut partial = vec![Vec::new()];
            for (&cx, &cy) in x.children.iter().zip(&y.children) {
                let child = state.get(forest.find(cx), forest.find(cy))?;
                partial = partial
                    .iter()
                    .flat_map(|prefix| {
                        child.iter().map(move |t| {
                            let mut v: Vec<Template> = prefix.clone();
                            v.push(t.clone());
                            v
                        })
                    })
                    .collect();
            }
            Some(partial.into_iter().map(|cs| Template::Compose(r.clone(), cs)).collect())
        }
        _ => Some(BTreeSet::from([Template::Hole])),
    }
}

fn node_pairs(forest: &Forest, (a, b): Pair) -> Vec<NodePair<'_>> {
    let xs: Vec<_> = forest.primitive_nodes(a).collect();
    let ys: Vec<_> = forest.primitive_nodes(b).collect();
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuStats {
    pub rounds: usize,
    pub class_pairs: usize,
    pub node_pairs: usize,
    pub top_pairs: usize,
    pub raw_patterns: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub pattern: Template,
    /// Distinct root-connected classes the pattern matches.
    pub matches: Vec<Id>,
}

#[derive(Clone, Debug)]
pub struct AuResult {
    pub candidates: Vec<Candidate>,
    pub state: AuState,
    pub stats: AuStats,
}

impl AuResult {
    pub fn patterns(&self) -> Vec<Template> {
        self.candidates.iter().map(|c| c.pattern.clone()).collect()
    }

    pub fn to_json(&self, forest: &Forest) -> Json {
        let candidates: Vec<Json> = self
            .candidates
            .iter()
            .map(|c| {
                let spans: Vec<Json> = c
                    .matches
                    .iter()
                    .filter_map(|&id| forest.key_of(id))
                    .map(|k| json!([forest.corpus.pieces[k.piece as usize].title, k.head.to_string(), k.i, k.j]))
                    .collect();
                json!({
                    "pattern": c.pattern.to_string(),
                    "holes": c.pattern.holes(),
                    "terminals": c.pattern.terminals(),
                    "size": c.pattern.size(),
                    "match_count": c.matches.len(),
                    "matched_spans": spans,
                })
            })
            .collect();
        Json::Array(candidates)
    }
}

pub fn run_au_fixpoint(forest: &Forest, cooccur: &CoOccur, schedule: Schedule) -> Result<AuResult> {
    let top: Vec<Pair> = cooccur.pairs();

    // Every class pair the top-level pairs depend on.
    let mut needed: BTreeSet<Pair> = BTreeSet::new();
    let mut stack = top.clone();
    while let Some(pair) = stack.pop() {
        if !needed.insert(pair) {
            continue;
        }
        for (x, y) in node_pairs(forest, pair) {
            if let (Op::Compose(r), Op::Compose(s)) = (&x.op, &y.op) {
                if r == s {
                    for (&cx, &cy) in x.children.iter().zip(&y.children) {
                        stack.push(ordered(forest.find(cx), forest.find(cy)));
                    }
                }
            }
        }
    }

    let mut order: Vec<Pair> = needed.iter().copied().collect();
    if schedule == Schedule::Reverse {
        order.reverse();
    }
    let mut pending: BTreeMap<Pair, Vec<NodePair<'_>>> = BTreeMap::new();
    let mut stats = AuStats { class_pairs: order.len(), top_pairs: top.len(), ..AuStats::default() };
    for &pair in &order {
        let mut nodes = node_pairs(forest, pair);
        stats.node_pairs += nodes.len();
        if schedule == Schedule::Reverse {
            nodes.reverse();
        }
        pending.insert(pair, nodes);
    }

    let mut state = AuState::default();
    while !pending.is_empty() {
        if stats.rounds >= AU_ITERATION_CAP {
            return Err(Error::IterationCap { stage: "anti-unification", cap: AU_ITERATION_CAP });
        }
        stats.rounds += 1;
        // Node step: only pairs finalized in earlier rounds are visible.
        let mut results: Vec<(Pair, BTreeSet<Template>)> = Vec::new();
        for &pair in &order {
            let Some(nodes) = pending.get_mut(&pair) else { continue };
            nodes.retain(|(x, y)| match anti_unify_pair(forest, x, y, &state) {
                Some(ts) => {
                    results.push((pair, ts));
                    false
                }
                None => true,
            });
        }
        let progressed = !results.is_empty();
        for (pair, ts) in results {
            state.add(pair, ts);
        }
        // Finalization step.
        let done: Vec<Pair> = pending.iter().filter(|(_, n)| n.is_empty()).map(|(&p, _)| p).collect();
        if done.is_empty() && !progressed {
            return Err(Error::IterationCap { stage: "anti-unification", cap: stats.rounds });
        }
        for pair in done {
            pending.remove(&pair);
            state.sets.entry(pair).or_default();
            state.finalized.insert(pair);
        }
    }

    let mut raw: BTreeSet<Template> = BTreeSet::new();
    for &(a, b) in &top {
        raw.extend(state.sets[&(a, b)].iter().cloned());
    }
    stats.raw_patterns = raw.len();
    let marked: Vec<Id> = forest.marked().collect();
    let candidates = raw
        .into_iter()
        .filter(|t| !t.is_trivial())
        .filter_map(|pattern| {
            let matches: Vec<Id> =
                marked.iter().copied().filter(|&c| !match_class(forest, &pattern, c).is_empty()).collect();
            (matches.len() >= 2).then_some(Candidate { pattern, matches })
        })
        .collect();
    Ok(AuResult { candidates, state, stats })
}
