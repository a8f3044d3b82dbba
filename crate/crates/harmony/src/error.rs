use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChordError {
    #[error("empty chord symbol")]
    Empty,
    #[error("unknown root `{0}`")]
    UnknownRoot(String),
    #[error("too many accidentals in `{0}`")]
    AccidentalRange(String),
    #[error("unknown quality `{token}` in chord `{symbol}`")]
    UnknownQuality { symbol: String, token: String },
    #[error("unknown interval `{0}`")]
    UnknownInterval(String),
}

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("cannot read grammar {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("grammar syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule `{id}` (line {line}): {message}")]
    Rule { id: String, line: usize, message: String },
}
