use thiserror::Error;

use chordlearn_harmony::{ChordError, GrammarError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("corpus line {line}: {source}")]
    Chord {
        line: usize,
        #[source]
        source: ChordError,
    },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("piece `{0}` has no complete parse")]
    Unparseable(String),
    #[error("cycle through e-class {0} in the derivation graph")]
    Cycle(usize),
    #[error("{stage} did not saturate within {cap} iterations")]
    IterationCap { stage: &'static str, cap: usize },
    #[error("invalid JSON corpus: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
