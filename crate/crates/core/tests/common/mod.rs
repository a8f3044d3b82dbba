//! Independent oracles for the integration tests. Nothing here goes through
//! the e-graph: trees come from a direct chart enumeration, generalizations
//! from textbook lgg, and library costs from exhaustive search.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use chordlearn::{Corpus, Piece, Program, RuleName, Template};
use chordlearn_harmony::{check_termination, parse_chord_symbol, ChordLabel, Grammar, StartPolicy};

pub fn corpus(pieces: &[(&str, &[&str])]) -> Corpus {
    Corpus { pieces: pieces.iter().map(|(t, c)| Piece::new(t, c).unwrap()).collect() }
}

pub fn corpus_of(progressions: &[Vec<ChordLabel>]) -> Corpus {
    Corpus {
        pieces: progressions
            .iter()
            .enumerate()
            .map(|(k, chords)| {
                let symbols: Vec<String> = chords.iter().map(|c| c.to_string()).collect();
                let refs: Vec<&str> = symbols.iter().map(String::as_str).collect();
                Piece::new(&format!("p{k}"), &refs).unwrap()
            })
            .collect(),
    }
}

pub fn three_pieces() -> Corpus {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/three_pieces.txt");
    Corpus::load(path).unwrap()
}

// ---------------------------------------------------------------------------
// Brute-force chart enumeration.

/// Every derivation of `chords` whose head is allowed at the root, by
/// recursion over split points. Exponential; for short inputs only.
pub fn brute_trees(grammar: &Grammar, chords: &[ChordLabel]) -> BTreeSet<Program> {
    let n = chords.len();
    let mut memo: BTreeMap<(usize, usize), Vec<(ChordLabel, Program)>> = BTreeMap::new();
    for len in 1..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut out = Vec::new();
            if len == 1 {
                for rule in grammar.termination_rules() {
                    if check_termination(rule, &chords[i]) {
                        out.push((
                            chords[i].clone(),
                            Program::Leaf { rule: rule.id.as_str().into(), chord: chords[i].clone() },
                        ));
                    }
                }
            } else {
                for k in i + 1..j {
                    for (hx, tx) in &memo[&(i, k)] {
                        for (hy, ty) in &memo[&(k, j)] {
                            for rule in grammar.binary_rules() {
                                if let Some(h) = Grammar::apply(rule, hx, hy) {
                                    out.push((
                                        h,
                                        Program::Compose {
                                            rule: rule.id.as_str().into(),
                                            children: vec![tx.clone(), ty.clone()],
                                        },
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            memo.insert((i, j), out);
        }
    }
    memo.remove(&(0, n))
        .unwrap_or_default()
        .into_iter()
        .filter(|(h, _)| match grammar.start {
            StartPolicy::AnyHead => true,
            StartPolicy::FinalChord => Some(h) == chords.last(),
        })
        .map(|(_, t)| t)
        .collect()
}

pub fn node_count(p: &Program) -> usize {
    match p {
        Program::Leaf { .. } => 1,
        Program::Compose { children, .. } => 1 + children.iter().map(node_count).sum::<usize>(),
        Program::App { .. } => panic!("library-free trees only"),
    }
}

// ---------------------------------------------------------------------------
// Random parseable progressions.

/// Chords with at most one accidental in every quality the parser knows.
pub fn universe() -> Vec<ChordLabel> {
    let mut out = Vec::new();
    for letter in ["C", "D", "E", "F", "G", "A", "B"] {
        for acc in ["", "b", "#"] {
            for q in ["M7", "m7", "7", "%7", "o7", "sus"] {
                out.push(parse_chord_symbol(&format!("{letter}{acc}{q}")).unwrap());
            }
        }
    }
    out
}

/// Generates progressions top-down: pick a head, then repeatedly pick a
/// rule and a pair of children that the rule combines into that head.
pub struct Generator {
    by_head: BTreeMap<ChordLabel, Vec<(ChordLabel, ChordLabel)>>,
    terminable: BTreeSet<ChordLabel>,
    heads: Vec<ChordLabel>,
}

impl Generator {
    pub fn new(grammar: &Grammar) -> Generator {
        let chords = universe();
        let mut by_head: BTreeMap<ChordLabel, Vec<(ChordLabel, ChordLabel)>> = BTreeMap::new();
        for x in &chords {
            for y in &chords {
                for rule in grammar.binary_rules() {
                    if let Some(h) = Grammar::apply(rule, x, y) {
                        by_head.entry(h).or_default().push((x.clone(), y.clone()));
                    }
                }
            }
        }
        let terminable: BTreeSet<ChordLabel> =
            chords.iter().filter(|c| grammar.termination_rules().any(|r| check_termination(r, c))).cloned().collect();
        let heads = by_head.keys().filter(|h| terminable.contains(*h)).cloned().collect();
        Generator { by_head, terminable, heads }
    }

    fn expand(&self, rng: &mut impl Rng, head: &ChordLabel, n: usize, out: &mut Vec<ChordLabel>) -> bool {
        if n == 1 {
            if self.terminable.contains(head) {
                out.push(head.clone());
                return true;
            }
            return false;
        }
        let Some(options) = self.by_head.get(head) else { return false };
        for _ in 0..8 {
            let k = rng.gen_range(1..n);
            let (x, y) = options.choose(rng).unwrap();
            let mark = out.len();
            if self.expand(rng, x, k, out) && self.expand(rng, y, n - k, out) {
                return true;
            }
            out.truncate(mark);
        }
        false
    }

    /// A progression of exactly `n` chords with at least one derivation.
    pub fn progression(&self, rng: &mut impl Rng, n: usize) -> Vec<ChordLabel> {
        loop {
            let head = self.heads.choose(rng).unwrap().clone();
            let mut out = Vec::new();
            if self.expand(rng, &head, n, &mut out) {
                return out;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Plotkin least general generalization.

/// A first-order term over rule names; chords are not part of templates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    App(RuleName, Vec<Term>),
    Var(usize),
}

pub fn erase(p: &Program) -> Term {
    match p {
        Program::Leaf { rule, .. } => Term::App(rule.clone(), vec![]),
        Program::Compose { rule, children } => Term::App(rule.clone(), children.iter().map(erase).collect()),
        Program::App { .. } => panic!("library-free trees only"),
    }
}

/// lgg with the usual disagreement table: equal disagreement pairs share a
/// variable.
pub fn lgg(a: &Term, b: &Term, table: &mut BTreeMap<(Term, Term), usize>) -> Term {
    match (a, b) {
        (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => {
            Term::App(f.clone(), xs.iter().zip(ys).map(|(x, y)| lgg(x, y, table)).collect())
        }
        _ => {
            let next = table.len();
            Term::Var(*table.entry((a.clone(), b.clone())).or_insert(next))
        }
    }
}

/// Forgets which variables coincide: every variable becomes a hole.
pub fn project(t: &Term) -> Template {
    match t {
        Term::Var(_) => Template::Hole,
        Term::App(f, xs) if xs.is_empty() => Template::Pure(f.clone()),
        Term::App(f, xs) => Template::Compose(f.clone(), xs.iter().map(project).collect()),
    }
}

pub fn plotkin(a: &Program, b: &Program) -> Template {
    project(&lgg(&erase(a), &erase(b), &mut BTreeMap::new()))
}

// ---------------------------------------------------------------------------
// Exhaustive library selection.

fn template_nodes(t: &Template) -> usize {
    match t {
        Template::Hole | Template::Pure(_) => 1,
        Template::Compose(_, cs) => 1 + cs.iter().map(template_nodes).sum::<usize>(),
    }
}

fn matches<'a>(pattern: &Template, t: &'a Program, fills: &mut Vec<&'a Program>) -> bool {
    match (pattern, t) {
        (Template::Hole, _) => {
            fills.push(t);
            true
        }
        (Template::Pure(r), Program::Leaf { rule, .. }) => r == rule,
        (Template::Compose(r, ps), Program::Compose { rule, children }) => {
            r == rule && ps.len() == children.len() && ps.iter().zip(children).all(|(p, c)| matches(p, c, fills))
        }
        _ => false,
    }
}

/// Cheapest description of a fixed tree when any pattern in `lib` may be
/// applied at any node. An application costs 1 plus its arguments; the
/// terminals it consumes are free.
pub fn refactor_cost(t: &Program, lib: &[&Template]) -> usize {
    let mut best = match t {
        Program::Leaf { .. } => 1,
        Program::Compose { children, .. } => 1 + children.iter().map(|c| refactor_cost(c, lib)).sum::<usize>(),
        Program::App { .. } => unreachable!(),
    };
    for p in lib {
        let mut fills = Vec::new();
        if matches(p, t, &mut fills) {
            best = best.min(1 + fills.iter().map(|f| refactor_cost(f, lib)).sum::<usize>());
        }
    }
    best
}

/// Minimum of `storage(L) + sum of cheapest refactorings` over every subset
/// `L` of `patterns` and every derivation of every piece, with storage the
/// node count of each body. Returns the optimum and all optimal subsets.
pub fn exhaustive_objective(
    grammar: &Grammar,
    corpus: &Corpus,
    patterns: &[Template],
) -> (usize, Vec<BTreeSet<usize>>) {
    let trees: Vec<BTreeSet<Program>> = corpus.pieces.iter().map(|p| brute_trees(grammar, &p.chords)).collect();
    let mut best = usize::MAX;
    let mut argmins = Vec::new();
    for mask in 0u32..(1 << patterns.len()) {
        let chosen: BTreeSet<usize> = (0..patterns.len()).filter(|k| mask & (1 << k) != 0).collect();
        let lib: Vec<&Template> = chosen.iter().map(|&k| &patterns[k]).collect();
        let storage: usize = lib.iter().map(|t| template_nodes(t)).sum();
        let uses: usize = trees
            .iter()
            .filter(|ts| !ts.is_empty())
            .map(|ts| ts.iter().map(|t| refactor_cost(t, &lib)).min().unwrap())
            .sum();
        let total = storage + uses;
        if total < best {
            best = total;
            argmins.clear();
        }
        if total == best {
            argmins.push(chosen);
        }
    }
    (best, argmins)
}
