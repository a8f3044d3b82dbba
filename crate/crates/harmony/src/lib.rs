//! Chord symbols with spelled roots, spelled interval arithmetic, and the
//! relational headed grammar whose rules are the derivation primitives.

mod chord;
mod error;
mod grammar;
mod interval;
mod pitch;

pub use chord::{parse_chord_symbol, ChordLabel, ChordQuality, Third};
pub use error::{ChordError, GrammarError};
pub use grammar::{
    check_rule, check_termination, load_grammar, Constraint, Grammar, GrammarRule, RuleKind, Side, StartPolicy,
    TerminalConstraint, DEFAULT_GRAMMAR,
};
pub use interval::{interval_down, IntervalQuality, SpelledInterval};
pub use pitch::{Letter, SpelledPitchClass, MAX_ACCIDENTAL};
