pub mod antiunify;
pub mod cooccur;
pub mod corpus;
pub mod dot;
pub mod error;
pub mod lang;
pub mod liblearn;
pub mod parser;
pub mod pipeline;
pub mod report;
pub mod template;

pub use antiunify::{anti_unify_pair, run_au_fixpoint, AuResult, Candidate, Schedule};
pub use cooccur::{compute_cooccur, CoOccur};
pub use corpus::{Corpus, Piece};
pub use error::{Error, Result};
pub use lang::{FnId, Op, Routing, RuleName};
pub use parser::{cyk_saturate, cyk_saturate_with, encode_piece, filter_root_connected, Forest, SpanKey};
pub use pipeline::{learn, learn_with_patterns, run, Learned, PieceOutcome, RunConfig, RunOutput};
pub use report::{reference_diff, CompressionReport, Mode, ReportRow};
pub use template::{Program, Template};
