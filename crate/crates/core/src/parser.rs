//! Deductive CYK parsing of a corpus into one e-graph.
//!
//! Facts `IsWord(piece, chord, pos)` and `IsPhrase(piece, head, i, j)` live
//! in engine tables. Every phrase has a derivation class, keyed by a
//! `Der(piece, head, i, j)` node, holding all of its derivations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde_json::{json, Value as Json};

use chordlearn_egraph::{
    Action, ENode, Engine, Evaluation, Id, Rule, Ruleset, SaturationReport, Term, Value, DEFAULT_ITERATION_CAP,
};
use chordlearn_harmony::{check_termination, ChordLabel, Grammar, RuleKind, StartPolicy};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lang::{Op, RuleName};
use crate::template::Program;

pub const IS_WORD: &str = "IsWord";
pub const IS_PHRASE: &str = "IsPhrase";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsWord {
    pub piece: u32,
    pub chord: ChordLabel,
    pub pos: u32,
}

/// One `IsWord` fact per position.
pub fn encode_piece(piece: u32, chords: &[ChordLabel]) -> Vec<IsWord> {
    chords.iter().enumerate().map(|(pos, chord)| IsWord { piece, chord: chord.clone(), pos: pos as u32 }).collect()
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SpanKey {
    pub piece: u32,
    pub head: ChordLabel,
    pub i: u32,
    pub j: u32,
}

impl SpanKey {
    pub fn len(&self) -> u32 {
        self.j - self.i
    }

    pub fn is_empty(&self) -> bool {
        self.i == self.j
    }

    pub fn der(&self) -> Term<Op> {
        Term::leaf(Op::Der { piece: self.piece, head: self.head.clone(), i: self.i, j: self.j })
    }
}

/// Chord labels are interned so table rows stay small.
#[derive(Default)]
struct Labels {
    list: Vec<ChordLabel>,
    index: HashMap<ChordLabel, i64>,
}

impl Labels {
    fn intern(&mut self, c: &ChordLabel) -> i64 {
        if let Some(&i) = self.index.get(c) {
            return i;
        }
        self.list.push(c.clone());
        let i = self.list.len() as i64 - 1;
        self.index.insert(c.clone(), i);
        i
    }
}

fn int(v: &Value) -> i64 {
    v.as_int().expect("integer column")
}

/// IsWord p t i, termination rule r accepts t
///   => IsPhrase p t i (i+1), Der p t i (i+1) ≡ Pure r
struct BaseRule {
    labels: Arc<Vec<ChordLabel>>,
    terminations: Vec<(RuleName, chordlearn_harmony::GrammarRule)>,
}

impl Rule<Op, ()> for BaseRule {
    fn name(&self) -> &str {
        "cyk-base"
    }

    fn search(&self, e: &Engine<Op>, since: u64) -> Vec<Action<Op>> {
        let mut out = Vec::new();
        for row in e.rows_since(IS_WORD, since) {
            let (p, t, i) = (int(&row[0]), int(&row[1]), int(&row[2]));
            let chord = &self.labels[t as usize];
            for (name, rule) in &self.terminations {
                if !check_termination(rule, chord) {
                    continue;
                }
                out.push(Action::Insert {
                    table: IS_PHRASE.into(),
                    row: vec![Value::Int(p), Value::Int(t), Value::Int(i), Value::Int(i + 1)],
                });
                let key = SpanKey { piece: p as u32, head: chord.clone(), i: i as u32, j: i as u32 + 1 };
                let word = Term::leaf(Op::Word { piece: p as u32, pos: i as u32 });
                out.push(Action::Union(key.der(), Term::Node(Op::Leaf(name.clone()), vec![word])));
            }
        }
        out
    }
}

/// IsPhrase p y i j, IsPhrase p z j k, binary rule r: (y, z) => x
///   => IsPhrase p x i k, Der p x i k ≡ Compose(Pure r, [Der p y i j, Der p z j k])
struct InductiveRule {
    labels: Arc<Vec<ChordLabel>>,
    label_index: Arc<HashMap<ChordLabel, i64>>,
    binaries: Vec<(RuleName, chordlearn_harmony::GrammarRule)>,
}

impl InductiveRule {
    fn combine(&self, left: &[Value], right: &[Value], out: &mut Vec<Action<Op>>) {
        let (p, y, i, j) = (int(&left[0]), int(&left[1]), int(&left[2]), int(&left[3]));
        let (z, k) = (int(&right[1]), int(&right[3]));
        let (hy, hz) = (&self.labels[y as usize], &self.labels[z as usize]);
        for (name, rule) in &self.binaries {
            let Some(x) = Grammar::apply(rule, hy, hz) else { continue };
            let xi = self.label_index[&x];
            out.push(Action::Insert {
                table: IS_PHRASE.into(),
                row: vec![Value::Int(p), Value::Int(xi), Value::Int(i), Value::Int(k)],
            });
            let key =
                |h: &ChordLabel, a: i64, b: i64| SpanKey { piece: p as u32, head: h.clone(), i: a as u32, j: b as u32 };
            let compose = Term::Node(Op::Compose(name.clone()), vec![key(hy, i, j).der(), key(hz, j, k).der()]);
            out.push(Action::Union(key(&x, i, k).der(), compose));
        }
    }
}

impl Rule<Op, ()> for InductiveRule {
    fn name(&self) -> &str {
        "cyk-inductive"
    }

    fn search(&self, e: &Engine<Op>, since: u64) -> Vec<Action<Op>> {
        let mut by_start: BTreeMap<(i64, i64), Vec<&Vec<Value>>> = BTreeMap::new();
        let mut by_end: BTreeMap<(i64, i64), Vec<&Vec<Value>>> = BTreeMap::new();
        for row in e.rows(IS_PHRASE) {
            by_start.entry((int(&row[0]), int(&row[2]))).or_default().push(row);
            by_end.entry((int(&row[0]), int(&row[3]))).or_default().push(row);
        }
        let mut out = Vec::new();
        for delta in e.rows_since(IS_PHRASE, since) {
            let p = int(&delta[0]);
            // delta as the left constituent
            for right in by_start.get(&(p, int(&delta[3]))).into_iter().flatten() {
                self.combine(delta, right, &mut out);
            }
            // delta as the right constituent
            for left in by_end.get(&(p, int(&delta[2]))).into_iter().flatten() {
                self.combine(left, delta, &mut out);
            }
        }
        out
    }
}

/// The parse forest of a corpus: the saturated engine plus span bookkeeping.
pub struct Forest {
    pub engine: Engine<Op>,
    pub corpus: Corpus,
    pub grammar: Grammar,
    pub saturation: SaturationReport,
    spans: BTreeMap<SpanKey, Id>,
    keys: BTreeMap<Id, SpanKey>,
    marked: BTreeSet<Id>,
}

/// Parses every piece and saturates the CYK rules.
pub fn cyk_saturate(corpus: &Corpus, grammar: &Grammar) -> Result<Forest> {
    cyk_saturate_with(corpus, grammar, Evaluation::SemiNaive, DEFAULT_ITERATION_CAP)
}

pub fn cyk_saturate_with(corpus: &Corpus, grammar: &Grammar, evaluation: Evaluation, cap: usize) -> Result<Forest> {
    let mut labels = Labels::default();
    let mut engine: Engine<Op> = Engine::default();
    for (p, piece) in corpus.pieces.iter().enumerate() {
        for fact in encode_piece(p as u32, &piece.chords) {
            let t = labels.intern(&fact.chord);
            engine.insert(IS_WORD, vec![Value::Int(p as i64), Value::Int(t), Value::Int(fact.pos as i64)]);
        }
    }
    let label_list = Arc::new(labels.list);
    let label_index = Arc::new(labels.index);
    let named = |keep: fn(&RuleKind) -> bool| {
        grammar
            .rules
            .iter()
            .filter(|r| keep(&r.kind))
            .map(|r| (RuleName::from(r.id.as_str()), r.clone()))
            .collect::<Vec<_>>()
    };
    let mut rules = Ruleset::new("cyk");
    rules.push(BaseRule {
        labels: label_list.clone(),
        terminations: named(|k| matches!(k, RuleKind::Termination { .. })),
    });
    rules.push(InductiveRule {
        labels: label_list.clone(),
        label_index,
        binaries: named(|k| matches!(k, RuleKind::Binary { .. })),
    });
    let saturation = engine.run_to_fixpoint(&rules, cap, evaluation);
    if !saturation.saturated {
        return Err(Error::IterationCap { stage: "CYK parsing", cap });
    }

    let mut spans = BTreeMap::new();
    let mut keys = BTreeMap::new();
    for row in engine.rows(IS_PHRASE) {
        let key = SpanKey {
            piece: int(&row[0]) as u32,
            head: label_list[int(&row[1]) as usize].clone(),
            i: int(&row[2]) as u32,
            j: int(&row[3]) as u32,
        };
        let id = engine.egraph.lookup_term(&key.der()).expect("every phrase has a Der node");
        keys.insert(id, key.clone());
        spans.insert(key, id);
    }
    let mut forest = Forest {
        engine,
        corpus: corpus.clone(),
        grammar: grammar.clone(),
        saturation,
        spans,
        keys,
        marked: BTreeSet::new(),
    };
    filter_root_connected(&mut forest);
    Ok(forest)
}

/// Marks every derivation class reachable from a complete parse. Later
/// stages only look at marked classes.
pub fn filter_root_connected(forest: &mut Forest) {
    let mut marked = BTreeSet::new();
    let mut stack: Vec<Id> = (0..forest.corpus.pieces.len() as u32).flat_map(|p| forest.roots(p)).collect();
    while let Some(id) = stack.pop() {
        if !marked.insert(id) {
            continue;
        }
        for node in forest.primitive_nodes(id) {
            if let Op::Compose(_) = node.op {
                stack.extend(node.children.iter().copied());
            }
        }
    }
    forest.marked = marked;
}

impl Forest {
    pub fn find(&self, id: Id) -> Id {
        self.engine.egraph.find(id)
    }

    pub fn class_of(&self, key: &SpanKey) -> Option<Id> {
        self.spans.get(key).map(|&id| self.find(id))
    }

    pub fn key_of(&self, id: Id) -> Option<&SpanKey> {
        self.keys.get(&self.find(id))
    }

    pub fn spans(&self) -> impl Iterator<Item = (&SpanKey, Id)> {
        self.spans.iter().map(|(k, &id)| (k, self.find(id)))
    }

    /// Full-span classes of a piece accepted by the start policy.
    pub fn roots(&self, piece: u32) -> Vec<Id> {
        let p = &self.corpus.pieces[piece as usize];
        let n = p.len() as u32;
        let last = p.chords.last().expect("pieces are nonempty");
        self.spans
            .iter()
            .filter(|(k, _)| k.piece == piece)
            .filter(|(k, _)| k.i == 0 && k.j == n)
            .filter(|(k, _)| match self.grammar.start {
                StartPolicy::AnyHead => true,
                StartPolicy::FinalChord => &k.head == last,
            })
            .map(|(_, &id)| self.find(id))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn full_span_heads(&self, piece: u32) -> Vec<ChordLabel> {
        self.roots(piece).into_iter().filter_map(|id| self.key_of(id).map(|k| k.head.clone())).collect()
    }

    pub fn is_parsed(&self, piece: u32) -> bool {
        !self.roots(piece).is_empty()
    }

    pub fn is_marked(&self, id: Id) -> bool {
        self.marked.contains(&self.find(id))
    }

    pub fn marked(&self) -> impl Iterator<Item = Id> + '_ {
        self.marked.iter().copied()
    }

    /// `Leaf` and `Compose` nodes of a class.
    pub fn primitive_nodes(&self, id: Id) -> impl Iterator<Item = &ENode<Op>> {
        self.engine.egraph.class(id).nodes.iter().filter(|n| n.op.is_primitive())
    }

    /// Derivation nodes (primitive and applications) of a class.
    pub fn derivation_nodes(&self, id: Id) -> impl Iterator<Item = &ENode<Op>> {
        self.engine.egraph.class(id).nodes.iter().filter(|n| n.op.is_derivation())
    }

    /// Chord at a `Word` class.
    pub fn word_chord(&self, word: Id) -> &ChordLabel {
        let node = &self.engine.egraph.class(word).nodes[0];
        match node.op {
            Op::Word { piece, pos } => &self.corpus.pieces[piece as usize].chords[pos as usize],
            ref other => panic!("expected a Word node, found {other}"),
        }
    }

    /// Number of distinct library-free derivation trees of a class.
    pub fn count_derivations(&self, id: Id) -> Result<BigUint> {
        let mut memo = HashMap::new();
        let mut on_stack = BTreeSet::new();
        self.count_rec(self.find(id), &mut memo, &mut on_stack)
    }

    fn count_rec(&self, id: Id, memo: &mut HashMap<Id, BigUint>, on_stack: &mut BTreeSet<Id>) -> Result<BigUint> {
        if let Some(c) = memo.get(&id) {
            return Ok(c.clone());
        }
        if !on_stack.insert(id) {
            return Err(Error::Cycle(id.index()));
        }
        let mut total = BigUint::zero();
        for node in self.primitive_nodes(id) {
            match node.op {
                Op::Leaf(_) => total += BigUint::one(),
                _ => {
                    let mut product = BigUint::one();
                    for &child in &node.children {
                        product *= self.count_rec(self.find(child), memo, on_stack)?;
                    }
                    total += product;
                }
            }
        }
        on_stack.remove(&id);
        memo.insert(id, total.clone());
        Ok(total)
    }

    /// Derivations of a whole piece, summed over accepted full-span heads.
    pub fn piece_derivations(&self, piece: u32) -> Result<BigUint> {
        let mut total = BigUint::zero();
        for root in self.roots(piece) {
            total += self.count_derivations(root)?;
        }
        Ok(total)
    }

    /// All library-free trees of a class, or `None` if there are more than
    /// `limit`.
    pub fn trees(&self, id: Id, limit: usize) -> Option<Vec<Program>> {
        let mut memo = HashMap::new();
        self.trees_rec(self.find(id), limit, &mut memo)
    }

    fn trees_rec(&self, id: Id, limit: usize, memo: &mut HashMap<Id, Option<Vec<Program>>>) -> Option<Vec<Program>> {
        if let Some(t) = memo.get(&id) {
            return t.clone();
        }
        let mut out = Vec::new();
        for node in self.primitive_nodes(id) {
            match &node.op {
                Op::Leaf(rule) => {
                    out.push(Program::Leaf { rule: rule.clone(), chord: self.word_chord(node.children[0]).clone() })
                }
                Op::Compose(rule) => {
                    let left = self.trees_rec(self.find(node.children[0]), limit, memo)?;
                    let right = self.trees_rec(self.find(node.children[1]), limit, memo)?;
                    if out.len() + left.len() * right.len() > limit {
                        memo.insert(id, None);
                        return None;
                    }
                    for l in &left {
                        for r in &right {
                            out.push(Program::Compose { rule: rule.clone(), children: vec![l.clone(), r.clone()] });
                        }
                    }
                }
                _ => unreachable!("primitive_nodes yields only Leaf and Compose"),
            }
        }
        out.sort();
        memo.insert(id, Some(out.clone()));
        Some(out)
    }

    /// Forest dump keyed by `(title, head, i, j)`.
    pub fn to_json(&self) -> Json {
        let label = |id: Id| -> Json {
            match self.key_of(id) {
                Some(k) => json!([self.corpus.pieces[k.piece as usize].title, k.head.to_string(), k.i, k.j]),
                None => json!(self.engine.egraph.class(id).nodes[0].op.to_string()),
            }
        };
        let classes: Vec<Json> = self
            .spans()
            .map(|(key, id)| {
                let nodes: Vec<Json> = self
                    .derivation_nodes(id)
                    .map(|n| {
                        json!({
                            "op": n.op.to_string(),
                            "children": n.children.iter().map(|&c| label(self.find(c))).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({
                    "key": label(id),
                    "piece": self.corpus.pieces[key.piece as usize].title,
                    "root_connected": self.is_marked(id),
                    "derivations": self.count_derivations(id).map(|c| c.to_string()).unwrap_or_default(),
                    "nodes": nodes,
                })
            })
            .collect();
        json!({ "classes": classes })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph forest {\n  node [shape=box, fontname=\"Helvetica\"];\n");
        let name = |id: Id| format!("c{}", id.index());
        for (key, id) in self.spans() {
            let style = if self.is_marked(id) { "solid" } else { "dashed" };
            out.push_str(&format!(
                "  {} [label=\"{} {} [{},{})\", style={}];\n",
                name(id),
                self.corpus.pieces[key.piece as usize].title.replace('"', "'"),
                key.head,
                key.i,
                key.j,
                style
            ));
        }
        for (_, id) in self.spans() {
            for (k, node) in self.derivation_nodes(id).enumerate() {
                let n = format!("{}_{}", name(id), k);
                out.push_str(&format!("  {n} [shape=ellipse, label=\"{}\"];\n  {} -> {n};\n", node.op, name(id)));
                let arity = node.op.template_arity();
                for (ci, &c) in node.children.iter().enumerate() {
                    let c = self.find(c);
                    if ci < arity {
                        out.push_str(&format!("  {n} -> {};\n", name(c)));
                    } else if let Op::Word { piece, pos } = self.engine.egraph.class(c).nodes[0].op {
                        let chord = &self.corpus.pieces[piece as usize].symbols[pos as usize];
                        out.push_str(&format!(
                            "  {n}_w{ci} [shape=plaintext, label=\"{chord}\"];\n  {n} -> {n}_w{ci};\n"
                        ));
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
