//! Library selection by total description length: storage of the library
//! plus the use cost of every piece.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::lang::FnId;
use crate::liblearn::costset::{reduce, CostAnalysis, CostConfig, CostPair, CostSet, Lib};
use crate::parser::Forest;
use crate::template::Template;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abstraction {
    pub id: FnId,
    pub body: Template,
}

impl Abstraction {
    pub fn arity(&self) -> usize {
        self.body.holes()
    }

    pub fn def_size(&self) -> usize {
        def_size(&self.body)
    }
}

/// Storage cost of a body on its own: one per node, holes included.
pub fn def_size(body: &Template) -> usize {
    body.size()
}

pub type Abstractions = BTreeMap<FnId, Abstraction>;

/// How a library's storage is charged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StorageModel {
    /// Every body in full. Additive, hence monotone in the library.
    #[default]
    Flat,
    /// Each body written as cheaply as possible in terms of the other
    /// entries, so shared sub-abstractions are paid for once. Adding an
    /// entry can lower the total, so dominance pruning is only a heuristic
    /// under this model.
    Shared,
}

/// Fills of `pattern`'s holes when it matches `t`, in pre-order. A hole in
/// `t` is only matched by a hole in `pattern`.
fn template_fills<'t>(pattern: &Template, t: &'t Template, out: &mut Vec<&'t Template>) -> bool {
    match (pattern, t) {
        (Template::Hole, _) => {
            out.push(t);
            true
        }
        (Template::Pure(a), Template::Pure(b)) => a == b,
        (Template::Compose(a, xs), Template::Compose(b, ys)) => {
            a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| template_fills(x, y, out))
        }
        _ => false,
    }
}

/// Cheapest encoding of `t` using references to `others`, and the
/// references it uses. A reference costs 1 plus its fills.
pub fn decompose(t: &Template, others: &[(FnId, &Template)]) -> (usize, Vec<FnId>) {
    let mut best = match t {
        Template::Hole | Template::Pure(_) => (1, Vec::new()),
        Template::Compose(_, cs) => {
            let mut cost = 1;
            let mut used = Vec::new();
            for c in cs {
                let (k, u) = decompose(c, others);
                cost += k;
                used.extend(u);
            }
            (cost, used)
        }
    };
    for &(f, body) in others {
        let mut fills = Vec::new();
        // A bare reference to a leaf saves nothing.
        if body.size() < 2 || !template_fills(body, t, &mut fills) {
            continue;
        }
        let mut cost = 1;
        let mut used = vec![f];
        for fill in fills {
            let (k, u) = decompose(fill, others);
            cost += k;
            used.extend(u);
        }
        if cost < best.0 {
            best = (cost, used);
        }
    }
    best.1.sort();
    best.1.dedup();
    best
}

/// Storage of libraries under one model, memoized per library.
pub struct Storage<'a> {
    pub abstractions: &'a Abstractions,
    pub model: StorageModel,
    cache: RefCell<HashMap<Lib, usize>>,
}

impl<'a> Storage<'a> {
    pub fn new(abstractions: &'a Abstractions, model: StorageModel) -> Storage<'a> {
        Storage { abstractions, model, cache: RefCell::new(HashMap::new()) }
    }

    pub fn cost(&self, lib: &Lib) -> usize {
        if let Some(&c) = self.cache.borrow().get(lib) {
            return c;
        }
        let c = library_storage(lib, self.abstractions, self.model);
        self.cache.borrow_mut().insert(lib.clone(), c);
        c
    }
}

/// Per-entry storage of a library, in `lib` order.
pub fn entry_storage(lib: &Lib, abstractions: &Abstractions, model: StorageModel) -> Vec<(FnId, usize, Vec<FnId>)> {
    lib.iter()
        .map(|&f| {
            let body = &abstractions[&f].body;
            match model {
                StorageModel::Flat => (f, def_size(body), Vec::new()),
                StorageModel::Shared => {
                    let others: Vec<(FnId, &Template)> =
                        lib.iter().filter(|&&g| g != f).map(|g| (*g, &abstractions[g].body)).collect();
                    let (cost, used) = decompose(body, &others);
                    (f, cost, used)
                }
            }
        })
        .collect()
}

pub fn library_storage(lib: &Lib, abstractions: &Abstractions, model: StorageModel) -> usize {
    entry_storage(lib, abstractions, model).iter().map(|(_, c, _)| c).sum()
}

/// Root set of a piece: the sets of its complete-parse classes plus the
/// library-free baseline, so the empty library always survives.
pub fn piece_root_set(forest: &Forest, analysis: &CostAnalysis, piece: u32, cfg: &CostConfig) -> Result<CostSet> {
    let p = &forest.corpus.pieces[piece as usize];
    let roots = forest.roots(piece);
    if roots.is_empty() {
        return Err(Error::Unparseable(p.title.clone()));
    }
    let mut pairs = vec![CostPair::new([], p.baseline())];
    for root in roots {
        if let Some(set) = analysis.get(root) {
            pairs.extend(set.pairs().iter().cloned());
        }
    }
    let set = CostSet::new(pairs);
    Ok(if cfg.reduce { reduce(&set) } else { set })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectConfig {
    pub max_lib: usize,
    /// Beam over partial corpus folds, ranked by objective; `None` keeps all.
    pub corpus_beam: Option<usize>,
    pub reduce: bool,
}

impl From<&CostConfig> for SelectConfig {
    fn from(c: &CostConfig) -> Self {
        SelectConfig { max_lib: c.max_lib, corpus_beam: None, reduce: c.reduce }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub library: Lib,
    pub storage: usize,
    /// Cheapest use cost of each piece using only `library`.
    pub use_costs: Vec<usize>,
}

impl Selection {
    pub fn objective(&self) -> usize {
        self.storage + self.use_costs.iter().sum::<usize>()
    }
}

fn objective_order<'s>(storage: &'s Storage<'_>) -> impl Fn(&CostPair, &CostPair) -> std::cmp::Ordering + 's {
    move |a, b| {
        let oa = storage.cost(&a.lib) + a.cost;
        let ob = storage.cost(&b.lib) + b.cost;
        (oa, a.lib.len(), &a.lib, a.cost).cmp(&(ob, b.lib.len(), &b.lib, b.cost))
    }
}

/// Folds the piece root sets under a virtual corpus root and returns the
/// library with the smallest total description length.
pub fn select_library(root_sets: &[CostSet], storage: &Storage<'_>, cfg: &SelectConfig) -> Selection {
    let mut acc = CostSet::new([CostPair::new([], 0)]);
    for set in root_sets {
        let joined = acc.cross(set, cfg.max_lib);
        let joined = if cfg.reduce { reduce(&joined) } else { joined };
        acc = match cfg.corpus_beam {
            Some(k) if joined.len() > k => {
                let mut order: Vec<&CostPair> = joined.pairs().iter().collect();
                order.sort_by(|a, b| objective_order(storage)(a, b));
                CostSet::new(order.into_iter().take(k).cloned())
            }
            _ => joined,
        };
    }
    let best = acc
        .pairs()
        .iter()
        .min_by(|a, b| objective_order(storage)(a, b))
        .expect("the empty library always survives")
        .clone();
    let use_costs = root_sets
        .iter()
        .map(|set| {
            set.pairs()
                .iter()
                .filter(|p| p.lib.is_subset(&best.lib))
                .map(|p| p.cost)
                .min()
                .expect("every root set holds the empty library")
        })
        .collect();
    Selection { storage: storage.cost(&best.lib), library: best.lib, use_costs }
}

/// The selected abstractions with their storage accounting.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Library {
    pub entries: Vec<Abstraction>,
    pub model: StorageModel,
}

impl Library {
    pub fn new(lib: &Lib, abstractions: &Abstractions, model: StorageModel) -> Library {
        Library { entries: lib.iter().map(|f| abstractions[f].clone()).collect(), model }
    }

    fn as_map(&self) -> (Lib, Abstractions) {
        (self.entries.iter().map(|a| a.id).collect(), self.entries.iter().map(|a| (a.id, a.clone())).collect())
    }

    pub fn storage_cost(&self) -> usize {
        let (lib, map) = self.as_map();
        library_storage(&lib, &map, self.model)
    }

    /// Storage charged for one entry.
    pub fn entry_cost(&self, id: FnId) -> usize {
        let (lib, map) = self.as_map();
        entry_storage(&lib, &map, self.model).into_iter().find(|e| e.0 == id).map_or(0, |e| e.1)
    }

    pub fn bodies(&self) -> BTreeMap<FnId, Template> {
        self.entries.iter().map(|a| (a.id, a.body.clone())).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Entries this entry's body is written with in the cheapest shared
    /// encoding. Empty under flat storage.
    pub fn components(&self, id: FnId) -> Vec<FnId> {
        let (lib, map) = self.as_map();
        let others: Vec<(FnId, &Template)> =
            self.entries.iter().filter(|a| a.id != id).map(|a| (a.id, &a.body)).collect();
        match (self.model, map.get(&id)) {
            (StorageModel::Shared, Some(a)) if lib.contains(&id) => decompose(&a.body, &others).1,
            _ => Vec::new(),
        }
    }

    pub fn to_json(&self) -> Json {
        Json::Array(
            self.entries
                .iter()
                .map(|a| {
                    json!({
                        "id": a.id.to_string(),
                        "arity": a.arity(),
                        "terminals": a.body.terminals(),
                        "def_size": a.def_size(),
                        "storage": self.entry_cost(a.id),
                        "body": a.body.to_string(),
                        "components": self.components(a.id).iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs(n: u32, body: &str) -> (FnId, Abstraction) {
        (FnId(n), Abstraction { id: FnId(n), body: Template::parse(body).unwrap() })
    }

    #[test]
    fn empty_candidates_give_baseline() {
        let sets = vec![CostSet::new([CostPair::new([], 25)]), CostSet::new([CostPair::new([], 29)])];
        let none = Abstractions::new();
        let s = select_library(
            &sets,
            &Storage::new(&none, StorageModel::Flat),
            &SelectConfig { max_lib: 15, corpus_beam: None, reduce: true },
        );
        assert!(s.library.is_empty());
        assert_eq!(s.objective(), 54);
    }

    #[test]
    fn shared_abstraction_pays_off_jointly() {
        let a: Abstractions = [abs(0, "(dominant (descending_fifth terminate terminate) terminate)")].into();
        let piece = CostSet::new([CostPair::new([], 5), CostPair::new([FnId(0)], 1)]);
        let cfg = SelectConfig { max_lib: 15, corpus_beam: None, reduce: true };
        // One use saves 4 and the body costs 5, two uses save 8.
        let st = Storage::new(&a, StorageModel::Flat);
        assert!(select_library(std::slice::from_ref(&piece), &st, &cfg).library.is_empty());
        let s = select_library(&[piece.clone(), piece], &st, &cfg);
        assert_eq!(s.library, Lib::from([FnId(0)]));
        assert_eq!(s.objective(), 7);
    }

    #[test]
    fn shared_storage_charges_sub_abstractions_once() {
        let lib: Abstractions = [
            abs(1, "(descending_fifth terminate terminate)"),
            abs(2, "(dominant (descending_fifth terminate terminate) terminate)"),
            abs(3, "(dominant ? terminate)"),
        ]
        .into();
        let all: Lib = lib.keys().copied().collect();
        assert_eq!(library_storage(&all, &lib, StorageModel::Flat), 3 + 5 + 3);
        // f2 = f3 applied to f1: one reference plus one for the filled hole.
        let l = Library::new(&all, &lib, StorageModel::Shared);
        assert_eq!(l.entry_cost(FnId(2)), 2);
        assert_eq!(l.components(FnId(2)), vec![FnId(1), FnId(3)]);
        assert!(l.components(FnId(1)).is_empty());
        assert_eq!(l.storage_cost(), 3 + 2 + 3);
        let pair: Lib = [FnId(1), FnId(2)].into();
        assert_eq!(library_storage(&pair, &lib, StorageModel::Shared), 3 + 3);
    }
}
