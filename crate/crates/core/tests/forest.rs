mod common;

use std::collections::BTreeSet;

use chordlearn::{cyk_saturate, cyk_saturate_with, Program, SpanKey};
use chordlearn_egraph::Evaluation;
use chordlearn_harmony::Grammar;

use common::*;

#[test]
fn three_piece_derivation_counts() {
    let corpus = three_pieces();
    let forest = cyk_saturate(&corpus, &Grammar::default_grammar()).unwrap();
    let lens: Vec<usize> = corpus.pieces.iter().map(|p| p.len()).collect();
    assert_eq!(lens, [13, 15, 17]);
    let baselines: Vec<usize> = corpus.pieces.iter().map(|p| p.baseline()).collect();
    assert_eq!(baselines, [25, 29, 33]);
    assert_eq!(baselines.iter().sum::<usize>(), 87);
    let counts: Vec<String> = (0..3).map(|p| forest.piece_derivations(p).unwrap().to_string()).collect();
    assert_eq!(counts, ["5", "6", "31"]);
}

#[test]
fn three_piece_forest_matches_enumeration() {
    let grammar = Grammar::default_grammar();
    let corpus = three_pieces();
    let forest = cyk_saturate(&corpus, &grammar).unwrap();
    for (p, piece) in corpus.pieces.iter().enumerate() {
        let expected = brute_trees(&grammar, &piece.chords);
        let mut got = BTreeSet::new();
        for root in forest.roots(p as u32) {
            got.extend(forest.trees(root, 1000).unwrap());
        }
        assert_eq!(got, expected, "{}", piece.title);
        assert!(got.iter().all(|t| node_count(t) == piece.baseline()));
    }
}

#[test]
fn naive_and_semi_naive_agree() {
    let grammar = Grammar::default_grammar();
    let corpus = three_pieces();
    let a = cyk_saturate_with(&corpus, &grammar, Evaluation::SemiNaive, 1000).unwrap();
    let b = cyk_saturate_with(&corpus, &grammar, Evaluation::Naive, 1000).unwrap();
    let keys = |f: &chordlearn::Forest| f.spans().map(|(k, _)| k.clone()).collect::<Vec<SpanKey>>();
    assert_eq!(keys(&a), keys(&b));
    for p in 0..3 {
        assert_eq!(a.piece_derivations(p).unwrap(), b.piece_derivations(p).unwrap());
    }
}

#[test]
fn marked_spans_are_exactly_those_in_complete_trees() {
    let grammar = Grammar::default_grammar();
    let corpus = three_pieces();
    let forest = cyk_saturate(&corpus, &grammar).unwrap();
    let mut expected = BTreeSet::new();
    for (p, piece) in corpus.pieces.iter().enumerate() {
        for t in brute_trees(&grammar, &piece.chords) {
            collect_spans(&grammar, p as u32, &t, 0, &mut expected);
        }
    }
    let got: BTreeSet<SpanKey> = forest.marked().map(|id| forest.key_of(id).unwrap().clone()).collect();
    assert_eq!(got, expected);
    assert!(forest.spans().count() > got.len(), "the corpus has dead spans to filter");
}

/// Span keys of every subtree of `t`, which starts at chord `i`. Returns
/// the end position.
pub fn collect_spans(grammar: &Grammar, piece: u32, t: &Program, i: u32, out: &mut BTreeSet<SpanKey>) -> u32 {
    let j = match t {
        Program::Leaf { .. } => i + 1,
        Program::Compose { children, .. } => {
            let mid = collect_spans(grammar, piece, &children[0], i, out);
            collect_spans(grammar, piece, &children[1], mid, out)
        }
        Program::App { .. } => unreachable!(),
    };
    out.insert(SpanKey { piece, head: t.head(grammar).unwrap(), i, j });
    j
}

#[test]
fn unparseable_piece_is_reported() {
    let grammar = Grammar::default_grammar();
    let corpus = corpus(&[("ok", &["Dm7", "G7", "CM7"]), ("bad", &["CM7", "F#7"])]);
    let forest = cyk_saturate(&corpus, &grammar).unwrap();
    assert!(forest.is_parsed(0));
    assert!(!forest.is_parsed(1));
    assert!(brute_trees(&grammar, &corpus.pieces[1].chords).is_empty());
}
