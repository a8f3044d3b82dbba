//! A small e-graph with hash-consing, a union-find, deferred congruence
//! closure and per-class semilattice analyses, plus relational tables and a
//! naive / semi-naive fixpoint driver in the same store.

mod egraph;
mod engine;
mod unionfind;

pub use egraph::{Analysis, EClass, EGraph, ENode, Id, Operator, Term};
pub use engine::{
    Action, Engine, Evaluation, Row, Rule, Ruleset, SaturationReport, Table, Value, DEFAULT_ITERATION_CAP,
};
pub use unionfind::UnionFind;
