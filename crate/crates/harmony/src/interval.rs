use std::fmt;
use std::str::FromStr;

use crate::error::ChordError;
use crate::pitch::SpelledPitchClass;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum IntervalQuality {
    /// Diminished `n` times (d, dd, ...).
    Diminished(u8),
    Minor,
    Perfect,
    Major,
    /// Augmented `n` times (A, AA, ...).
    Augmented(u8),
}

/// Interval class between spelled pitch classes. `generic` counts letter
/// steps modulo 7 (0 is a unison, 4 a fifth).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SpelledInterval {
    generic: u8,
    quality: IntervalQuality,
}

/// Unisons, fourths and fifths take perfect qualities.
fn is_perfect_class(generic: u8) -> bool {
    matches!(generic, 0 | 3 | 4)
}

/// Semitones of the major or perfect interval with the given letter steps.
fn reference_semitones(generic: u8) -> i32 {
    [0, 2, 4, 5, 7, 9, 11][generic as usize]
}

impl SpelledInterval {
    pub fn new(generic: u8, quality: IntervalQuality) -> Option<Self> {
        if generic > 6 {
            return None;
        }
        let ok = match quality {
            IntervalQuality::Perfect => is_perfect_class(generic),
            IntervalQuality::Major | IntervalQuality::Minor => !is_perfect_class(generic),
            IntervalQuality::Diminished(n) | IntervalQuality::Augmented(n) => n >= 1,
        };
        ok.then_some(SpelledInterval { generic, quality })
    }

    pub fn generic(self) -> u8 {
        self.generic
    }

    pub fn quality(self) -> IntervalQuality {
        self.quality
    }

    /// Builds an interval from letter steps and a semitone size, both taken
    /// modulo their cycles.
    pub fn from_steps(steps: i32, semitones: i32) -> SpelledInterval {
        let generic = steps.rem_euclid(7) as u8;
        let deviation = (semitones - reference_semitones(generic) + 6).rem_euclid(12) - 6;
        let quality = if is_perfect_class(generic) {
            match deviation {
                0 => IntervalQuality::Perfect,
                d if d > 0 => IntervalQuality::Augmented(d as u8),
                d => IntervalQuality::Diminished((-d) as u8),
            }
        } else {
            match deviation {
                0 => IntervalQuality::Major,
                -1 => IntervalQuality::Minor,
                d if d > 0 => IntervalQuality::Augmented(d as u8),
                d => IntervalQuality::Diminished((-d - 1) as u8),
            }
        };
        SpelledInterval { generic, quality }
    }

    /// Semitone size in `0..12`.
    pub fn semitones(self) -> i32 {
        let r = reference_semitones(self.generic);
        let d = match self.quality {
            IntervalQuality::Perfect | IntervalQuality::Major => 0,
            IntervalQuality::Minor => -1,
            IntervalQuality::Augmented(n) => n as i32,
            IntervalQuality::Diminished(n) if is_perfect_class(self.generic) => -(n as i32),
            IntervalQuality::Diminished(n) => -(n as i32) - 1,
        };
        (r + d).rem_euclid(12)
    }
}

/// The interval from `from` down to `to`.
///
/// ```
/// use chordlearn_harmony::{interval_down, SpelledPitchClass};
/// let p = |s: &str| s.parse::<SpelledPitchClass>().unwrap();
/// assert_eq!(interval_down(p("G"), p("C")).to_string(), "P5");
/// assert_eq!(interval_down(p("F"), p("B")).to_string(), "d5");
/// ```
pub fn interval_down(from: SpelledPitchClass, to: SpelledPitchClass) -> SpelledInterval {
    let steps = from.letter().index() as i32 - to.letter().index() as i32;
    let semitones = from.semitones() - to.semitones();
    SpelledInterval::from_steps(steps, semitones)
}

impl fmt::Display for SpelledInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.quality {
            IntervalQuality::Perfect => f.write_str("P")?,
            IntervalQuality::Major => f.write_str("M")?,
            IntervalQuality::Minor => f.write_str("m")?,
            IntervalQuality::Augmented(n) => f.write_str(&"A".repeat(n as usize))?,
            IntervalQuality::Diminished(n) => f.write_str(&"d".repeat(n as usize))?,
        }
        write!(f, "{}", self.generic + 1)
    }
}

impl FromStr for SpelledInterval {
    type Err = ChordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ChordError::UnknownInterval(s.to_string());
        let split = s.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?;
        let (q, n) = s.split_at(split);
        let number: u8 = n.parse().map_err(|_| bad())?;
        if !(1..=7).contains(&number) {
            return Err(bad());
        }
        let quality = match q {
            "P" => IntervalQuality::Perfect,
            "M" => IntervalQuality::Major,
            "m" => IntervalQuality::Minor,
            _ if !q.is_empty() && q.chars().all(|c| c == 'A') => IntervalQuality::Augmented(q.len() as u8),
            _ if !q.is_empty() && q.chars().all(|c| c == 'd') => IntervalQuality::Diminished(q.len() as u8),
            _ => return Err(bad()),
        };
        SpelledInterval::new(number - 1, quality).ok_or_else(bad)
    }
}
