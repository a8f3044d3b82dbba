use std::fmt;
use std::str::FromStr;

use crate::error::ChordError;
use crate::interval::SpelledInterval;
use crate::pitch::SpelledPitchClass;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Third {
    Maj,
    Min,
}

/// Chord quality as a stack of thirds above the root, or a suspended chord.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ChordQuality {
    Stack(Vec<Third>),
    Sus,
}

use Third::{Maj, Min};

/// Surface tokens, longest first so that "M7" wins over "7".
const TOKENS: [&str; 6] = ["M7", "m7", "%7", "o7", "sus", "7"];

impl ChordQuality {
    pub fn major_seventh() -> Self {
        ChordQuality::Stack(vec![Maj, Min, Maj])
    }

    pub fn minor_seventh() -> Self {
        ChordQuality::Stack(vec![Min, Maj, Min])
    }

    pub fn dominant_seventh() -> Self {
        ChordQuality::Stack(vec![Maj, Min, Min])
    }

    pub fn half_diminished() -> Self {
        ChordQuality::Stack(vec![Min, Min, Maj])
    }

    pub fn diminished_seventh() -> Self {
        ChordQuality::Stack(vec![Min, Min, Min])
    }

    pub fn from_token(token: &str) -> Option<Self> {
        Some(match token {
            "M7" => Self::major_seventh(),
            "m7" => Self::minor_seventh(),
            "7" => Self::dominant_seventh(),
            "%7" => Self::half_diminished(),
            "o7" => Self::diminished_seventh(),
            "sus" => ChordQuality::Sus,
            _ => return None,
        })
    }

    pub fn token(&self) -> &'static str {
        TOKENS
            .iter()
            .find(|t| ChordQuality::from_token(t).as_ref() == Some(self))
            .expect("every constructible quality has a token")
    }

    pub fn tokens() -> &'static [&'static str] {
        &TOKENS
    }
}

impl fmt::Display for ChordQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A chord symbol: spelled root, quality and an opaque extension tail.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ChordLabel {
    pub root: SpelledPitchClass,
    pub quality: ChordQuality,
    pub ext: String,
}

impl ChordLabel {
    pub fn new(root: SpelledPitchClass, quality: ChordQuality) -> Self {
        ChordLabel { root, quality, ext: String::new() }
    }

    /// Transposes the root up by `interval`, or `None` if the new root would
    /// need more than two accidentals.
    pub fn transpose_up(&self, interval: SpelledInterval) -> Option<ChordLabel> {
        Some(ChordLabel {
            root: self.root.shift(interval.generic() as i32, interval.semitones())?,
            quality: self.quality.clone(),
            ext: self.ext.clone(),
        })
    }
}

/// Parses `<root><quality><ext>`, e.g. `Bb7`, `F#m7`, `B%7`, `Dbsus`.
pub fn parse_chord_symbol(text: &str) -> Result<ChordLabel, ChordError> {
    let text = text.trim();
    let (root, rest) = SpelledPitchClass::parse_prefix(text)?;
    let token = TOKENS
        .iter()
        .find(|t| rest.starts_with(*t))
        .ok_or_else(|| ChordError::UnknownQuality { symbol: text.to_string(), token: rest.to_string() })?;
    Ok(ChordLabel {
        root,
        quality: ChordQuality::from_token(token).expect("token table is closed"),
        ext: rest[token.len()..].to_string(),
    })
}

impl FromStr for ChordLabel {
    type Err = ChordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_chord_symbol(s)
    }
}

impl fmt::Display for ChordLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.root, self.quality, self.ext)
    }
}
