use std::fmt;
use std::str::FromStr;

use crate::error::ChordError;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Letter {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Letter {
    pub const ALL: [Letter; 7] = [Letter::C, Letter::D, Letter::E, Letter::F, Letter::G, Letter::A, Letter::B];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Letter {
        Letter::ALL[(i % 7) as usize]
    }

    /// Semitones above C of the natural note.
    pub fn natural_semitones(self) -> i32 {
        [0, 2, 4, 5, 7, 9, 11][self as usize]
    }

    fn from_char(c: char) -> Option<Letter> {
        Some(match c {
            'C' => Letter::C,
            'D' => Letter::D,
            'E' => Letter::E,
            'F' => Letter::F,
            'G' => Letter::G,
            'A' => Letter::A,
            'B' => Letter::B,
            _ => return None,
        })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

pub const MAX_ACCIDENTAL: i8 = 2;

/// A pitch class that remembers its spelling: Bb and A# are different.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SpelledPitchClass {
    letter: Letter,
    accidental: i8,
}

impl SpelledPitchClass {
    pub fn new(letter: Letter, accidental: i8) -> Option<Self> {
        (accidental.abs() <= MAX_ACCIDENTAL).then_some(SpelledPitchClass { letter, accidental })
    }

    pub fn letter(self) -> Letter {
        self.letter
    }

    pub fn accidental(self) -> i8 {
        self.accidental
    }

    /// Semitones above C, in `0..12`.
    pub fn semitones(self) -> i32 {
        (self.letter.natural_semitones() + self.accidental as i32).rem_euclid(12)
    }

    /// Every spelling with at most one sharp or flat (21 pitch classes).
    pub fn single_accidentals() -> Vec<SpelledPitchClass> {
        Letter::ALL
            .iter()
            .flat_map(|&l| (-1..=1).map(move |a| SpelledPitchClass { letter: l, accidental: a }))
            .collect()
    }

    /// Every representable spelling (35 pitch classes).
    pub fn all() -> Vec<SpelledPitchClass> {
        Letter::ALL
            .iter()
            .flat_map(|&l| {
                (-MAX_ACCIDENTAL..=MAX_ACCIDENTAL).map(move |a| SpelledPitchClass { letter: l, accidental: a })
            })
            .collect()
    }

    /// Moves up by `steps` letters and `semitones` semitones. `None` when the
    /// result would need more than two accidentals.
    pub fn shift(self, steps: i32, semitones: i32) -> Option<SpelledPitchClass> {
        let letter = Letter::from_index((self.letter.index() as i32 + steps).rem_euclid(7) as u8);
        let target = self.semitones() + semitones;
        let accidental = (target - letter.natural_semitones() + 6).rem_euclid(12) - 6;
        SpelledPitchClass::new(letter, i8::try_from(accidental).ok()?)
    }

    /// Parses the longest spelled-pitch prefix of `s`, returning the pitch
    /// and the remaining text.
    pub fn parse_prefix(s: &str) -> Result<(SpelledPitchClass, &str), ChordError> {
        let mut chars = s.char_indices();
        let (_, first) = chars.next().ok_or(ChordError::Empty)?;
        let letter = Letter::from_char(first).ok_or_else(|| ChordError::UnknownRoot(first.to_string()))?;
        let mut accidental: i32 = 0;
        let mut end = first.len_utf8();
        let rest = &s[end..];
        // "b" directly after the letter is always a flat: no quality token
        // starts with it.
        for c in rest.chars() {
            match c {
                'b' => accidental -= 1,
                '#' => accidental += 1,
                _ => break,
            }
            end += 1;
        }
        if accidental.abs() > MAX_ACCIDENTAL as i32 {
            return Err(ChordError::AccidentalRange(s[..end].to_string()));
        }
        Ok((SpelledPitchClass { letter, accidental: accidental as i8 }, &s[end..]))
    }
}

impl fmt::Display for SpelledPitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter)?;
        let sign = if self.accidental < 0 { "b" } else { "#" };
        for _ in 0..self.accidental.abs() {
            f.write_str(sign)?;
        }
        Ok(())
    }
}

impl FromStr for SpelledPitchClass {
    type Err = ChordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, rest) = SpelledPitchClass::parse_prefix(s)?;
        if rest.is_empty() {
            Ok(p)
        } else {
            Err(ChordError::UnknownRoot(s.to_string()))
        }
    }
}
