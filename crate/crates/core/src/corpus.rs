//! Corpus files.
//!
//! Text format, one piece per line, `#` starts a comment:
//!
//! ```text
//! Red Clay: Cm7 Bbm7 Dbsus Ebsus Fsus
//! ```
//!
//! JSON format: `[{"title": "Red Clay", "chords": ["Cm7", "Bbm7"]}]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use chordlearn_harmony::{parse_chord_symbol, ChordLabel};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub title: String,
    pub chords: Vec<ChordLabel>,
    /// Chord symbols exactly as written in the input.
    pub symbols: Vec<String>,
}

impl Piece {
    pub fn new(title: &str, symbols: &[&str]) -> Result<Piece> {
        Piece::from_symbols(title, symbols.iter().map(|s| s.to_string()).collect(), 0)
    }

    fn from_symbols(title: &str, symbols: Vec<String>, line: usize) -> Result<Piece> {
        if symbols.is_empty() {
            return Err(Error::Corpus { line, message: format!("piece `{title}` has no chords") });
        }
        let chords = symbols
            .iter()
            .map(|s| parse_chord_symbol(s).map_err(|source| Error::Chord { line, source }))
            .collect::<Result<_>>()?;
        Ok(Piece { title: title.to_string(), chords, symbols })
    }

    pub fn len(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    /// Size of any library-free derivation of a CNF grammar.
    pub fn baseline(&self) -> usize {
        2 * self.len() - 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub pieces: Vec<Piece>,
}

#[derive(Serialize, Deserialize)]
struct JsonPiece {
    title: String,
    chords: Vec<String>,
}

impl Corpus {
    pub fn parse_text(text: &str) -> Result<Corpus> {
        let mut pieces = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            let (title, chords) = content
                .split_once(':')
                .ok_or_else(|| Error::Corpus { line, message: "expected `Title: chord chord ...`".into() })?;
            let title = title.trim();
            if title.is_empty() {
                return Err(Error::Corpus { line, message: "empty title".into() });
            }
            let symbols = chords.split_whitespace().map(str::to_string).collect();
            pieces.push(Piece::from_symbols(title, symbols, line)?);
        }
        Ok(Corpus { pieces })
    }

    pub fn parse_json(text: &str) -> Result<Corpus> {
        let raw: Vec<JsonPiece> = serde_json::from_str(text)?;
        let pieces = raw
            .into_iter()
            .enumerate()
            .map(|(k, p)| Piece::from_symbols(&p.title, p.chords, k + 1))
            .collect::<Result<_>>()?;
        Ok(Corpus { pieces })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let raw: Vec<JsonPiece> =
            self.pieces.iter().map(|p| JsonPiece { title: p.title.clone(), chords: p.symbols.clone() }).collect();
        serde_json::to_value(raw).expect("plain data serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Corpus> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('[');
        if is_json {
            Corpus::parse_json(&text)
        } else {
            Corpus::parse_text(&text)
        }
    }

    pub fn single(piece: Piece) -> Corpus {
        Corpus { pieces: vec![piece] }
    }
}

/// `#` opens a comment only at the start of a word, so `F#m7` survives.
fn strip_comment(line: &str) -> &str {
    let mut prev_space = true;
    for (i, c) in line.char_indices() {
        if c == '#' && prev_space {
            return &line[..i];
        }
        prev_space = c.is_whitespace();
    }
    line
}
