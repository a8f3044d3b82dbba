//! Pattern matching over derivation classes and the rewrites that add
//! applications of candidate abstractions.

use std::collections::BTreeSet;

use chordlearn_egraph::{Action, EGraph, Engine, Evaluation, Id, Rule, Ruleset, SaturationReport, Term};

use crate::error::{Error, Result};
use crate::lang::{FnId, Op, Routing};
use crate::parser::Forest;
use crate::template::Template;

/// One way a pattern matches a class: the classes filling its holes and the
/// `Word`s consumed by its `Pure` leaves, both in pre-order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Match {
    pub fills: Vec<Id>,
    pub words: Vec<Id>,
}

/// All matches of `pattern` against the primitive nodes of `class`.
pub fn match_in(egraph: &EGraph<Op>, pattern: &Template, class: Id) -> Vec<Match> {
    let class = egraph.find(class);
    let mut out: BTreeSet<Match> = BTreeSet::new();
    match pattern {
        Template::Hole => {
            out.insert(Match { fills: vec![class], words: Vec::new() });
        }
        Template::Pure(r) => {
            for node in egraph.class(class).iter() {
                if matches!(&node.op, Op::Leaf(s) if s == r) {
                    out.insert(Match { fills: Vec::new(), words: vec![egraph.find(node.children[0])] });
                }
            }
        }
        Template::Compose(r, subs) => {
            for node in egraph.class(class).iter() {
                if !matches!(&node.op, Op::Compose(s) if s == r) || node.children.len() != subs.len() {
                    continue;
                }
                let mut partial = vec![Match { fills: Vec::new(), words: Vec::new() }];
                for (sub, &child) in subs.iter().zip(&node.children) {
                    let child_matches = match_in(egraph, sub, child);
                    partial = partial
                        .iter()
                        .flat_map(|m| {
                            child_matches.iter().map(move |c| {
                                let mut m = m.clone();
                                m.fills.extend(&c.fills);
                                m.words.extend(&c.words);
                                m
                            })
                        })
                        .collect();
                    if partial.is_empty() {
                        break;
                    }
                }
                out.extend(partial);
            }
        }
    }
    out.into_iter().collect()
}

pub fn match_class(forest: &Forest, pattern: &Template, class: Id) -> Vec<Match> {
    match_in(&forest.engine.egraph, pattern, class)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub fun: FnId,
    pub pattern: Template,
}

/// One rewrite per pattern, numbered in the given order.
pub fn generate_rewrites(patterns: &[Template]) -> Vec<Rewrite> {
    patterns.iter().enumerate().map(|(k, p)| Rewrite { fun: FnId(k as u32), pattern: p.clone() }).collect()
}

/// The application node a match turns into. Hole fills that land in the
/// same class share one argument.
pub fn application(fun: FnId, m: &Match) -> Term<Op> {
    let (routing, args) = Routing::dedup(&m.fills);
    let children = args.iter().chain(&m.words).map(|&id| Term::Class(id)).collect();
    Term::Node(Op::App { fun, routing }, children)
}

struct PatternRule {
    rewrites: Vec<Rewrite>,
    classes: Vec<Id>,
}

impl Rule<Op, ()> for PatternRule {
    fn name(&self) -> &str {
        "abstraction-rewrites"
    }

    fn search(&self, engine: &Engine<Op>, _since: u64) -> Vec<Action<Op>> {
        let mut out = Vec::new();
        for rw in &self.rewrites {
            for &class in &self.classes {
                for m in match_in(&engine.egraph, &rw.pattern, class) {
                    out.push(Action::Union(Term::Class(class), application(rw.fun, &m)));
                }
            }
        }
        out
    }
}

/// Adds every application of every rewrite to the root-connected classes.
/// Patterns only look at primitive nodes, so the second round finds nothing
/// new.
pub fn saturate_with_patterns(forest: &mut Forest, rewrites: &[Rewrite]) -> Result<SaturationReport> {
    let cap = chordlearn_egraph::DEFAULT_ITERATION_CAP;
    let mut rules = Ruleset::new("rewrites");
    rules.push(PatternRule { rewrites: rewrites.to_vec(), classes: forest.marked().collect() });
    let report = forest.engine.run_to_fixpoint(&rules, cap, Evaluation::Naive);
    if !report.saturated {
        return Err(Error::IterationCap { stage: "rewriting", cap });
    }
    Ok(report)
}
