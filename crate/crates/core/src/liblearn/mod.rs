//! Library learning over the parse forest: rewriting with candidate
//! patterns, cost sets, selection and extraction.

pub mod costset;
pub mod extract;
pub mod rewrite;
pub mod select;

pub use costset::{
    cost_set_analysis, prune, prune_by, reduce, CostAnalysis, CostConfig, CostPair, CostSet, Lib, PruneOrder,
};
pub use extract::{best_programs, extract_refactored};
pub use rewrite::{generate_rewrites, match_class, saturate_with_patterns, Match, Rewrite};
pub use select::{
    decompose, def_size, library_storage, piece_root_set, select_library, Abstraction, Abstractions, Library,
    SelectConfig, Selection, Storage, StorageModel,
};
