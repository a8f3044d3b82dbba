//! End-to-end runs: parse, filter, anti-unify, rewrite, cost sets, select,
//! extract.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::Ratio;
use serde_json::{json, Value as Json};

use chordlearn_harmony::Grammar;

use crate::antiunify::{run_au_fixpoint, AuResult, Schedule};
use crate::cooccur::compute_cooccur;
use crate::corpus::Corpus;
use crate::error::Result;
use crate::lang::FnId;
use crate::liblearn::extract::extract_from;
use crate::liblearn::{
    best_programs, cost_set_analysis, generate_rewrites, piece_root_set, saturate_with_patterns, select_library,
    Abstraction, Abstractions, CostConfig, Lib, Library, PruneOrder, SelectConfig, Selection, Storage, StorageModel,
};
use crate::parser::{cyk_saturate, Forest};
use crate::report::{CompressionReport, Mode, ReportRow};
use crate::template::{Program, Template};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Per-class beam width; `None` disables pruning.
    pub beam: Option<usize>,
    pub max_lib: usize,
    /// Beam over the corpus-level fold, ranked by objective.
    pub corpus_beam: Option<usize>,
    pub reduce: bool,
    pub prune_order: PruneOrder,
    pub storage: StorageModel,
    pub schedule: Schedule,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Joint,
            beam: Some(5),
            max_lib: 15,
            corpus_beam: None,
            reduce: true,
            prune_order: PruneOrder::FullCost,
            storage: StorageModel::Flat,
            schedule: Schedule::Forward,
        }
    }
}

impl RunConfig {
    pub fn cost_config(&self) -> CostConfig {
        CostConfig { max_lib: self.max_lib, beam: self.beam, reduce: self.reduce, order: self.prune_order }
    }

    pub fn select_config(&self) -> SelectConfig {
        SelectConfig { max_lib: self.max_lib, corpus_beam: self.corpus_beam, reduce: self.reduce }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "mode": self.mode,
            "beam": self.beam,
            "max_lib": self.max_lib,
            "corpus_beam": self.corpus_beam,
            "reduce": self.reduce,
            "prune_order": format!("{:?}", self.prune_order),
            "storage": format!("{:?}", self.storage),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceOutcome {
    pub piece: u32,
    pub title: String,
    pub baseline: usize,
    pub derivations: BigUint,
    pub heads: Vec<String>,
    pub size: usize,
    pub program: Program,
}

/// One learning run over a corpus.
pub struct Learned {
    /// The forest after rewriting with every candidate.
    pub forest: Forest,
    pub au: Option<AuResult>,
    pub candidates: Abstractions,
    pub selection: Selection,
    /// Abstractions the extracted programs use, renumbered from `f0`.
    pub library: Library,
    pub pieces: Vec<PieceOutcome>,
    pub unparsed: Vec<String>,
}

/// Parses and learns jointly over the whole corpus.
pub fn learn(corpus: &Corpus, grammar: &Grammar, cfg: &RunConfig) -> Result<Learned> {
    let forest = cyk_saturate(corpus, grammar)?;
    let cooccur = compute_cooccur(&forest);
    let au = run_au_fixpoint(&forest, &cooccur, cfg.schedule)?;
    let patterns = au.patterns();
    let mut learned = learn_with_patterns(forest, &patterns, cfg)?;
    learned.au = Some(au);
    Ok(learned)
}

/// Learning from a given candidate list instead of the anti-unifiers.
pub fn learn_with_patterns(mut forest: Forest, patterns: &[Template], cfg: &RunConfig) -> Result<Learned> {
    let rewrites = generate_rewrites(patterns);
    let candidates: Abstractions =
        rewrites.iter().map(|r| (r.fun, Abstraction { id: r.fun, body: r.pattern.clone() })).collect();
    saturate_with_patterns(&mut forest, &rewrites)?;
    let storage = Storage::new(&candidates, cfg.storage);
    let costs = cost_set_analysis(&forest, &cfg.cost_config(), &storage)?;

    let n = forest.corpus.pieces.len() as u32;
    let parsed: Vec<u32> = (0..n).filter(|&p| forest.is_parsed(p)).collect();
    let unparsed: Vec<String> =
        (0..n).filter(|&p| !forest.is_parsed(p)).map(|p| forest.corpus.pieces[p as usize].title.clone()).collect();
    let root_sets =
        parsed.iter().map(|&p| piece_root_set(&forest, &costs, p, &cfg.cost_config())).collect::<Result<Vec<_>>>()?;
    let selection = select_library(&root_sets, &storage, &cfg.select_config());

    let best = best_programs(&forest, &selection.library);
    let mut extracted = Vec::new();
    let mut used = Lib::new();
    for &p in &parsed {
        let (size, program) = extract_from(&forest, &best, p).expect("parsed pieces have roots");
        used.extend(program.uses());
        extracted.push((p, size, program));
    }

    // Renumber the used abstractions densely, in candidate order.
    let renumber: BTreeMap<FnId, FnId> = used.iter().enumerate().map(|(k, &old)| (old, FnId(k as u32))).collect();
    let library = Library {
        entries: used.iter().map(|old| Abstraction { id: renumber[old], body: candidates[old].body.clone() }).collect(),
        model: cfg.storage,
    };
    let mut pieces = Vec::new();
    for (p, size, program) in extracted {
        let piece = &forest.corpus.pieces[p as usize];
        pieces.push(PieceOutcome {
            piece: p,
            title: piece.title.clone(),
            baseline: piece.baseline(),
            derivations: forest.piece_derivations(p)?,
            heads: forest.full_span_heads(p).iter().map(|h| h.to_string()).collect(),
            size,
            program: rename(&program, &renumber),
        });
    }
    Ok(Learned { forest, au: None, candidates, selection, library, pieces, unparsed })
}

fn rename(p: &Program, map: &BTreeMap<FnId, FnId>) -> Program {
    match p {
        Program::Leaf { .. } => p.clone(),
        Program::Compose { rule, children } => {
            Program::Compose { rule: rule.clone(), children: children.iter().map(|c| rename(c, map)).collect() }
        }
        Program::App { fun, routing, args, terminals } => Program::App {
            fun: map[fun],
            routing: routing.clone(),
            args: args.iter().map(|a| rename(a, map)).collect(),
            terminals: terminals.clone(),
        },
    }
}

impl Learned {
    pub fn storage(&self) -> usize {
        self.library.storage_cost()
    }

    pub fn objective(&self) -> usize {
        self.storage() + self.pieces.iter().map(|p| p.size).sum::<usize>()
    }

    /// Expands every refactored program, checks it against the grammar and
    /// compares its leaves with the input symbols.
    pub fn verify_round_trip(&self) -> std::result::Result<(), String> {
        let bodies = self.library.bodies();
        for outcome in &self.pieces {
            let piece = &self.forest.corpus.pieces[outcome.piece as usize];
            let expanded = outcome.program.expand(&bodies)?;
            expanded.head(&self.forest.grammar).map_err(|e| format!("{}: {e}", piece.title))?;
            let leaves: Vec<String> = expanded.chords().iter().map(|c| c.to_string()).collect();
            if leaves != piece.symbols {
                return Err(format!("{}: expansion reads {:?}", piece.title, leaves));
            }
            if expanded.size() != piece.baseline() {
                return Err(format!("{}: expansion has {} nodes", piece.title, expanded.size()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        let bodies = self.library.bodies();
        let programs: Vec<Json> = self
            .pieces
            .iter()
            .map(|p| {
                json!({
                    "title": p.title,
                    "baseline": p.baseline,
                    "derivations": p.derivations.to_string(),
                    "full_span_heads": p.heads,
                    "size": p.size,
                    "program": p.program.to_string(),
                    "expanded": p.program.expand(&bodies).map(|e| e.to_string()).unwrap_or_default(),
                })
            })
            .collect();
        let egraph = &self.forest.engine.egraph;
        json!({
            "forest": {
                "classes": egraph.number_of_classes(),
                "nodes": egraph.total_number_of_nodes(),
                "spans": self.forest.spans().count(),
                "root_connected": self.forest.marked().count(),
                "cyk_iterations": self.forest.saturation.iterations,
            },
            "candidates": self.candidates.len(),
            "library": self.library.to_json(),
            "storage": self.storage(),
            "programs": programs,
            "unparsed": self.unparsed,
        })
    }
}

pub struct RunOutput {
    pub config: RunConfig,
    pub runs: Vec<Learned>,
    pub report: CompressionReport,
}

impl RunOutput {
    pub fn to_json(&self) -> Json {
        json!({
            "config": self.config.to_json(),
            "report": self.report.to_json(),
            "runs": self.runs.iter().map(Learned::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn verify_round_trip(&self) -> std::result::Result<(), String> {
        self.runs.iter().try_for_each(Learned::verify_round_trip)
    }
}

/// Runs the configured mode. Pieces without a complete parse are listed in
/// the report and skipped.
pub fn run(corpus: &Corpus, grammar: &Grammar, cfg: &RunConfig) -> Result<RunOutput> {
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    let mut unparsed = Vec::new();
    let mut total_storage = 0;
    match cfg.mode {
        Mode::Joint => {
            let learned = learn(corpus, grammar, cfg)?;
            let storage = learned.storage();
            let share = Ratio::new(storage as u64, learned.pieces.len().max(1) as u64);
            for p in &learned.pieces {
                rows.push(ReportRow {
                    title: p.title.clone(),
                    baseline: p.baseline,
                    refactored: p.size,
                    storage_share: share,
                });
            }
            total_storage = storage;
            unparsed = learned.unparsed.clone();
            runs.push(learned);
        }
        Mode::Piecewise => {
            for piece in &corpus.pieces {
                let learned = learn(&Corpus::single(piece.clone()), grammar, cfg)?;
                let storage = learned.storage();
                for p in &learned.pieces {
                    rows.push(ReportRow {
                        title: p.title.clone(),
                        baseline: p.baseline,
                        refactored: p.size,
                        storage_share: Ratio::from_integer(storage as u64),
                    });
                }
                total_storage += storage;
                unparsed.extend(learned.unparsed.iter().cloned());
                runs.push(learned);
            }
        }
    }
    let report = CompressionReport { mode: cfg.mode, rows, total_storage, unparsed };
    Ok(RunOutput { config: cfg.clone(), runs, report })
}
