mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_rational::Ratio;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use chordlearn::liblearn::{best_programs, extract_refactored, prune, reduce, CostPair, CostSet, Lib};
use chordlearn::{
    compute_cooccur, cyk_saturate, learn, run_au_fixpoint, Corpus, FnId, Mode, Routing, RunConfig, Schedule, SpanKey,
};
use chordlearn_harmony::{ChordLabel, Grammar};

use common::*;

fn grammar() -> &'static Grammar {
    static G: OnceLock<Grammar> = OnceLock::new();
    G.get_or_init(Grammar::default_grammar)
}

fn generator() -> &'static Generator {
    static G: OnceLock<Generator> = OnceLock::new();
    G.get_or_init(|| Generator::new(grammar()))
}

fn progression(seed: u64, n: usize) -> Vec<ChordLabel> {
    generator().progression(&mut StdRng::seed_from_u64(seed), n)
}

fn progressions(seed: u64, lens: &[usize]) -> Corpus {
    let mut rng = StdRng::seed_from_u64(seed);
    let ps: Vec<_> = lens.iter().map(|&n| generator().progression(&mut rng, n)).collect();
    corpus_of(&ps)
}

fn span_keys(t: &chordlearn::Program, piece: u32, i: u32, out: &mut Vec<SpanKey>) -> u32 {
    let j = match t {
        chordlearn::Program::Compose { children, .. } => {
            let mid = span_keys(&children[0], piece, i, out);
            span_keys(&children[1], piece, mid, out)
        }
        _ => i + 1,
    };
    out.push(SpanKey { piece, head: t.head(grammar()).unwrap(), i, j });
    j
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forest_holds_exactly_the_enumerated_trees(seed in any::<u64>(), n in 1usize..=8) {
        let chords = progression(seed, n);
        let corpus = corpus_of(std::slice::from_ref(&chords));
        let forest = cyk_saturate(&corpus, grammar()).unwrap();
        let expected = brute_trees(grammar(), &chords);
        prop_assert!(!expected.is_empty());
        let mut got = BTreeSet::new();
        for root in forest.roots(0) {
            got.extend(forest.trees(root, 100_000).unwrap());
        }
        prop_assert_eq!(forest.piece_derivations(0).unwrap(), (expected.len() as u32).into());
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn every_tree_is_a_derivation_of_the_input(seed in any::<u64>(), n in 1usize..=8) {
        let chords = progression(seed, n);
        let forest = cyk_saturate(&corpus_of(std::slice::from_ref(&chords)), grammar()).unwrap();
        for root in forest.roots(0) {
            for t in forest.trees(root, 500).unwrap() {
                prop_assert!(t.head(grammar()).is_ok());
                let leaves: Vec<ChordLabel> = t.chords().into_iter().cloned().collect();
                prop_assert_eq!(&leaves, &chords);
                prop_assert_eq!(t.size(), 2 * n - 1);
            }
        }
    }

    #[test]
    fn library_free_extraction_has_2n_minus_1_nodes(seed in any::<u64>(), n in 1usize..=12) {
        let chords = progression(seed, n);
        let forest = cyk_saturate(&corpus_of(&[chords]), grammar()).unwrap();
        let (size, program) = extract_refactored(&forest, &Lib::new(), 0).unwrap();
        prop_assert_eq!(size, 2 * n - 1);
        prop_assert_eq!(node_count(&program), 2 * n - 1);
        let best = best_programs(&forest, &Lib::new());
        for (id, (size, _)) in best {
            let key = forest.key_of(id).unwrap();
            prop_assert_eq!(size, 2 * key.len() as usize - 1);
        }
    }

    #[test]
    fn marking_and_cooccurrence_match_the_trees(seed in any::<u64>(), n in 1usize..=7) {
        let chords = progression(seed, n);
        let forest = cyk_saturate(&corpus_of(std::slice::from_ref(&chords)), grammar()).unwrap();
        let co = compute_cooccur(&forest);
        let mut marked = BTreeSet::new();
        let mut pairs = BTreeSet::new();
        for t in brute_trees(grammar(), &chords) {
            let mut keys = Vec::new();
            span_keys(&t, 0, 0, &mut keys);
            for a in &keys {
                marked.insert(a.clone());
                for b in &keys {
                    pairs.insert((a.clone(), b.clone()));
                }
            }
        }
        let got: BTreeSet<SpanKey> = forest.marked().map(|id| forest.key_of(id).unwrap().clone()).collect();
        prop_assert_eq!(&got, &marked);
        for a in forest.marked() {
            for b in forest.marked() {
                let expect = pairs.contains(&(forest.key_of(a).unwrap().clone(), forest.key_of(b).unwrap().clone()));
                prop_assert_eq!(co.holds(a, b), expect);
            }
        }
    }

    #[test]
    fn anti_unification_is_schedule_independent(seed in any::<u64>(), a in 1usize..=6, b in 1usize..=6) {
        let corpus = progressions(seed, &[a, b]);
        let forest = cyk_saturate(&corpus, grammar()).unwrap();
        let co = compute_cooccur(&forest);
        let fwd = run_au_fixpoint(&forest, &co, Schedule::Forward).unwrap();
        let rev = run_au_fixpoint(&forest, &co, Schedule::Reverse).unwrap();
        prop_assert_eq!(fwd.state.late_additions, 0);
        prop_assert_eq!(rev.state.late_additions, 0);
        prop_assert_eq!(&fwd.candidates, &rev.candidates);
        prop_assert!(fwd.patterns().iter().all(|p| !p.is_trivial()));
    }

    #[test]
    fn class_anti_unifier_contains_tree_lgg(seed in any::<u64>(), a in 1usize..=7, b in 1usize..=7) {
        let corpus = progressions(seed, &[a, b]);
        let forest = cyk_saturate(&corpus, grammar()).unwrap();
        let au = run_au_fixpoint(&forest, &compute_cooccur(&forest), Schedule::Forward).unwrap();
        for ra in forest.roots(0) {
            for rb in forest.roots(1) {
                let set = au.state.get(ra, rb).unwrap();
                for x in forest.trees(ra, 50).unwrap() {
                    for y in forest.trees(rb, 50).unwrap() {
                        prop_assert!(set.contains(&plotkin(&x, &y)));
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn learning_round_trips_and_never_loses(seed in any::<u64>(), lens in prop::collection::vec(1usize..=7, 1..=3)) {
        let corpus = progressions(seed, &lens);
        let cfg = RunConfig::default();
        let learned = learn(&corpus, grammar(), &cfg).unwrap();
        prop_assert!(learned.verify_round_trip().is_ok(), "{:?}", learned.verify_round_trip());
        let baseline: usize = corpus.pieces.iter().map(|p| p.baseline()).sum();
        prop_assert!(learned.selection.objective() <= baseline);
        prop_assert!(learned.objective() <= learned.selection.objective());
        let again = learn(&corpus, grammar(), &cfg).unwrap();
        prop_assert_eq!(learned.to_json().to_string(), again.to_json().to_string());
        let output = chordlearn::run(&corpus, grammar(), &RunConfig { mode: Mode::Piecewise, ..cfg }).unwrap();
        prop_assert!(output.verify_round_trip().is_ok());
        prop_assert!(output.report.rows.iter().all(|r| r.cr() >= Ratio::from_integer(1)));
    }
}

fn cost_set() -> impl Strategy<Value = CostSet> {
    prop::collection::vec((prop::collection::btree_set(0u32..5, 0..4), 0usize..12), 0..14)
        .prop_map(|v| CostSet::new(v.into_iter().map(|(lib, cost)| CostPair::new(lib.into_iter().map(FnId), cost))))
}

proptest! {
    #[test]
    fn reduce_keeps_the_pareto_antichain(cs in cost_set()) {
        let r = reduce(&cs);
        for p in r.pairs() {
            prop_assert!(cs.pairs().contains(p));
            prop_assert!(r.pairs().iter().all(|q| q == p || !q.dominates(p)));
        }
        for p in cs.pairs() {
            prop_assert!(r.pairs().iter().any(|q| q.dominates(p)));
        }
        prop_assert_eq!(reduce(&r), r);
    }

    #[test]
    fn prune_keeps_the_cheapest(cs in cost_set(), k in 1usize..6) {
        let p = prune(&cs, Some(k));
        prop_assert_eq!(p.len(), cs.len().min(k));
        prop_assert!(p.pairs().iter().all(|x| cs.pairs().contains(x)));
        let worst_kept = p.pairs().iter().map(|x| x.cost).max().unwrap_or(0);
        let dropped = cs.pairs().iter().filter(|x| !p.pairs().contains(x));
        for x in dropped {
            prop_assert!(x.cost >= worst_kept);
        }
        prop_assert_eq!(prune(&p, Some(k)), p.clone());
        prop_assert_eq!(prune(&cs, None), cs);
    }

    #[test]
    fn cross_unions_libraries_and_adds_costs(a in cost_set(), b in cost_set(), k in 0usize..6) {
        let c = a.cross(&b, k);
        for p in c.pairs() {
            prop_assert!(p.lib.len() <= k);
            let witnessed = a.pairs().iter().any(|x| {
                b.pairs().iter().any(|y| x.cost + y.cost == p.cost && x.lib.union(&y.lib).copied().collect::<Lib>() == p.lib)
            });
            prop_assert!(witnessed);
        }
    }

    #[test]
    fn routing_dedup_reconstructs_fills(fills in prop::collection::vec(0u8..4, 0..8)) {
        let (routing, args) = Routing::dedup(&fills);
        let routed: Vec<u8> = routing.route(&args).into_iter().copied().collect();
        prop_assert_eq!(routed, fills.clone());
        let distinct: BTreeSet<u8> = args.iter().copied().collect();
        prop_assert_eq!(distinct.len(), args.len());
        prop_assert_eq!(routing.arity(), args.len());
    }
}

#[test]
fn generator_covers_every_length() {
    let mut rng = StdRng::seed_from_u64(7);
    for n in 1..=12 {
        let chords = generator().progression(&mut rng, n);
        assert_eq!(chords.len(), n);
        assert!(!brute_trees(grammar(), &chords).is_empty() || n > 10);
    }
    let heads: BTreeSet<String> = (0..40).map(|s| progression(s, 3).choose(&mut rng).unwrap().to_string()).collect();
    assert!(heads.len() > 5, "generator is too narrow: {heads:?}");
}
