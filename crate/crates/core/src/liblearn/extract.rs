//! Cheapest derivation of each piece under a fixed library.

use std::collections::BTreeMap;

use chordlearn_egraph::Id;

use crate::lang::Op;
use crate::liblearn::costset::Lib;
use crate::parser::Forest;
use crate::template::Program;

/// Best `(size, program)` for every root-connected class, using primitive
/// nodes and applications of functions in `library`. Ties go to the
/// smaller program in `Program`'s order.
pub fn best_programs(forest: &Forest, library: &Lib) -> BTreeMap<Id, (usize, Program)> {
    let mut order: Vec<(u32, Id)> = forest.marked().map(|id| (forest.key_of(id).map_or(0, |k| k.len()), id)).collect();
    order.sort();
    let mut best: BTreeMap<Id, (usize, Program)> = BTreeMap::new();
    for (_, id) in order {
        let mut choice: Option<(usize, Program)> = None;
        for node in forest.derivation_nodes(id) {
            let arity = node.op.template_arity();
            let args: Vec<&(usize, Program)> = node.children[..arity].iter().map(|&c| &best[&forest.find(c)]).collect();
            let cost = 1 + args.iter().map(|(c, _)| c).sum::<usize>();
            let program = match &node.op {
                Op::Leaf(rule) => {
                    Program::Leaf { rule: rule.clone(), chord: forest.word_chord(node.children[0]).clone() }
                }
                Op::Compose(rule) => {
                    Program::Compose { rule: rule.clone(), children: args.iter().map(|(_, p)| p.clone()).collect() }
                }
                Op::App { fun, routing } => {
                    if !library.contains(fun) {
                        continue;
                    }
                    Program::App {
                        fun: *fun,
                        routing: routing.clone(),
                        args: args.iter().map(|(_, p)| p.clone()).collect(),
                        terminals: node.children[arity..].iter().map(|&w| forest.word_chord(w).clone()).collect(),
                    }
                }
                _ => continue,
            };
            let better = match &choice {
                None => true,
                Some((c, p)) => (cost, &program) < (*c, p),
            };
            if better {
                choice = Some((cost, program));
            }
        }
        best.insert(id, choice.expect("every marked class has a primitive derivation"));
    }
    best
}

/// Cheapest refactored derivation of a piece over all its complete parses.
pub fn extract_refactored(forest: &Forest, library: &Lib, piece: u32) -> Option<(usize, Program)> {
    let best = best_programs(forest, library);
    extract_from(forest, &best, piece)
}

pub fn extract_from(forest: &Forest, best: &BTreeMap<Id, (usize, Program)>, piece: u32) -> Option<(usize, Program)> {
    forest.roots(piece).into_iter().filter_map(|r| best.get(&r)).min().cloned()
}
