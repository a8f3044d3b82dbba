//! Headed binary grammar over chord labels, read from TOML.
//!
//! ```toml
//! start = "any"            # or "final": only parses headed by the last chord
//!
//! [[rule]]
//! id = "descending_fifth"
//! kind = "binary"
//! head = "right"
//! relation = "Prep(Descending5th)"
//! constraints = [
//!   { type = "interval_down", from = "left", to = "right", interval = "P5" },
//!   { type = "quality_is_not", side = "left", quality = "7" },
//! ]
//!
//! [[rule]]
//! id = "terminate"
//! kind = "termination"
//! ```
//!
//! Constraint types: `interval_down`, `quality_is`, `quality_is_not`,
//! `roots_equal`, `qualities_equal`. Termination rules accept only
//! `quality_is` / `quality_is_not` without a `side`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::chord::{ChordLabel, ChordQuality};
use crate::error::GrammarError;
use crate::interval::{interval_down, SpelledInterval};

pub const DEFAULT_GRAMMAR: &str = include_str!("../grammars/default.toml");

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn pick<'a>(self, x: &'a ChordLabel, y: &'a ChordLabel) -> &'a ChordLabel {
        match self {
            Side::Left => x,
            Side::Right => y,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Constraint {
    IntervalDown { from: Side, to: Side, interval: SpelledInterval },
    QualityIs { side: Side, quality: ChordQuality },
    QualityIsNot { side: Side, quality: ChordQuality },
    RootsEqual,
    QualitiesEqual,
}

impl Constraint {
    pub fn holds(&self, x: &ChordLabel, y: &ChordLabel) -> bool {
        match self {
            Constraint::IntervalDown { from, to, interval } => {
                interval_down(from.pick(x, y).root, to.pick(x, y).root) == *interval
            }
            Constraint::QualityIs { side, quality } => side.pick(x, y).quality == *quality,
            Constraint::QualityIsNot { side, quality } => side.pick(x, y).quality != *quality,
            Constraint::RootsEqual => x.root == y.root,
            Constraint::QualitiesEqual => x.quality == y.quality,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TerminalConstraint {
    QualityIs(ChordQuality),
    QualityIsNot(ChordQuality),
}

impl TerminalConstraint {
    pub fn holds(&self, x: &ChordLabel) -> bool {
        match self {
            TerminalConstraint::QualityIs(q) => x.quality == *q,
            TerminalConstraint::QualityIsNot(q) => x.quality != *q,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RuleKind {
    Binary { head: Side, relation: String, constraints: Vec<Constraint> },
    Termination { constraints: Vec<TerminalConstraint> },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GrammarRule {
    pub id: String,
    pub kind: RuleKind,
}

impl GrammarRule {
    pub fn is_binary(&self) -> bool {
        matches!(self.kind, RuleKind::Binary { .. })
    }
}

/// Which full-span heads count as complete parses.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum StartPolicy {
    #[default]
    AnyHead,
    FinalChord,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Grammar {
    pub rules: Vec<GrammarRule>,
    pub start: StartPolicy,
}

/// True iff `rule` is binary and all its constraints hold for `(x, y)`.
pub fn check_rule(rule: &GrammarRule, x: &ChordLabel, y: &ChordLabel) -> bool {
    match &rule.kind {
        RuleKind::Binary { constraints, .. } => constraints.iter().all(|c| c.holds(x, y)),
        RuleKind::Termination { .. } => false,
    }
}

/// True iff `rule` is a termination rule accepting `x`.
pub fn check_termination(rule: &GrammarRule, x: &ChordLabel) -> bool {
    match &rule.kind {
        RuleKind::Termination { constraints } => constraints.iter().all(|c| c.holds(x)),
        RuleKind::Binary { .. } => false,
    }
}

impl Grammar {
    pub fn default_grammar() -> Grammar {
        Grammar::from_toml_str(DEFAULT_GRAMMAR).expect("shipped grammar is valid")
    }

    pub fn binary_rules(&self) -> impl Iterator<Item = &GrammarRule> {
        self.rules.iter().filter(|r| r.is_binary())
    }

    pub fn termination_rules(&self) -> impl Iterator<Item = &GrammarRule> {
        self.rules.iter().filter(|r| !r.is_binary())
    }

    pub fn rule(&self, id: &str) -> Option<&GrammarRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Head label produced by combining `x` and `y` with `rule`, if it applies.
    pub fn apply(rule: &GrammarRule, x: &ChordLabel, y: &ChordLabel) -> Option<ChordLabel> {
        match &rule.kind {
            RuleKind::Binary { head, .. } if check_rule(rule, x, y) => Some(head.pick(x, y).clone()),
            _ => None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Grammar, GrammarError> {
        let raw: RawGrammar = toml::from_str(text).map_err(|e| GrammarError::Syntax {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let start = match raw.start.as_deref() {
            None | Some("any") => StartPolicy::AnyHead,
            Some("final") => StartPolicy::FinalChord,
            Some(other) => {
                return Err(GrammarError::Syntax { line: 1, message: format!("unknown start policy `{other}`") })
            }
        };
        let mut seen = BTreeSet::new();
        let mut rules = Vec::new();
        for spanned in raw.rule {
            let line = line_of(text, spanned.span().start);
            let raw = spanned.into_inner();
            let rule = raw.validate(line)?;
            if !seen.insert(rule.id.clone()) {
                return Err(GrammarError::Rule { id: rule.id, line, message: "duplicate rule id".into() });
            }
            rules.push(rule);
        }
        Ok(Grammar { rules, start })
    }
}

/// Reads and validates a grammar file.
pub fn load_grammar(path: impl AsRef<Path>) -> Result<Grammar, GrammarError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| GrammarError::Io { path: path.display().to_string(), source })?;
    Grammar::from_toml_str(&text)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrammar {
    start: Option<String>,
    #[serde(default)]
    rule: Vec<Spanned<RawRule>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    kind: String,
    head: Option<String>,
    relation: Option<String>,
    #[serde(default)]
    constraints: Vec<RawConstraint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    #[serde(rename = "type")]
    kind: String,
    from: Option<String>,
    to: Option<String>,
    interval: Option<String>,
    side: Option<String>,
    quality: Option<String>,
}

impl RawRule {
    fn validate(self, line: usize) -> Result<GrammarRule, GrammarError> {
        let id = self.id.clone();
        let err = |message: String| GrammarError::Rule { id: id.clone(), line, message };
        let kind = match self.kind.as_str() {
            "binary" => {
                let head = parse_side(self.head.as_deref().ok_or_else(|| err("binary rule needs `head`".into()))?)
                    .map_err(err)?;
                let relation = self.relation.unwrap_or_else(|| self.id.clone());
                let constraints =
                    self.constraints.into_iter().map(|c| c.binary()).collect::<Result<_, _>>().map_err(err)?;
                RuleKind::Binary { head, relation, constraints }
            }
            "termination" => {
                if self.head.is_some() {
                    return Err(err("termination rule cannot have `head`".into()));
                }
                let constraints =
                    self.constraints.into_iter().map(|c| c.terminal()).collect::<Result<_, _>>().map_err(err)?;
                RuleKind::Termination { constraints }
            }
            other => return Err(err(format!("unknown rule kind `{other}`; expected `binary` or `termination`"))),
        };
        Ok(GrammarRule { id: self.id, kind })
    }
}

fn parse_side(s: &str) -> Result<Side, String> {
    match s {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        other => Err(format!("unknown side `{other}`; expected `left` or `right`")),
    }
}

fn parse_quality(s: Option<&str>) -> Result<ChordQuality, String> {
    let s = s.ok_or("constraint needs `quality`")?;
    ChordQuality::from_token(s)
        .ok_or_else(|| format!("unknown quality `{s}`; expected one of {}", ChordQuality::tokens().join(", ")))
}

impl RawConstraint {
    fn reject(&self, fields: &[(&str, bool)]) -> Result<(), String> {
        for (name, present) in fields {
            if *present {
                return Err(format!("field `{name}` is not valid for `{}`", self.kind));
            }
        }
        Ok(())
    }

    fn side(&self) -> Result<Side, String> {
        parse_side(self.side.as_deref().ok_or("constraint needs `side`")?)
    }

    fn binary(self) -> Result<Constraint, String> {
        match self.kind.as_str() {
            "interval_down" => {
                self.reject(&[("side", self.side.is_some()), ("quality", self.quality.is_some())])?;
                let from = parse_side(self.from.as_deref().ok_or("interval_down needs `from`")?)?;
                let to = parse_side(self.to.as_deref().ok_or("interval_down needs `to`")?)?;
                let text = self.interval.as_deref().ok_or("interval_down needs `interval`")?;
                let interval = text.parse().map_err(|e| format!("{e}"))?;
                Ok(Constraint::IntervalDown { from, to, interval })
            }
            "quality_is" | "quality_is_not" => {
                self.reject(&[
                    ("from", self.from.is_some()),
                    ("to", self.to.is_some()),
                    ("interval", self.interval.is_some()),
                ])?;
                let side = self.side()?;
                let quality = parse_quality(self.quality.as_deref())?;
                Ok(if self.kind == "quality_is" {
                    Constraint::QualityIs { side, quality }
                } else {
                    Constraint::QualityIsNot { side, quality }
                })
            }
            "roots_equal" | "qualities_equal" => {
                self.reject(&[
                    ("from", self.from.is_some()),
                    ("to", self.to.is_some()),
                    ("interval", self.interval.is_some()),
                    ("side", self.side.is_some()),
                    ("quality", self.quality.is_some()),
                ])?;
                Ok(if self.kind == "roots_equal" { Constraint::RootsEqual } else { Constraint::QualitiesEqual })
            }
            other => Err(format!("unknown constraint type `{other}`")),
        }
    }

    fn terminal(self) -> Result<TerminalConstraint, String> {
        match self.kind.as_str() {
            "quality_is" | "quality_is_not" => {
                self.reject(&[
                    ("from", self.from.is_some()),
                    ("to", self.to.is_some()),
                    ("interval", self.interval.is_some()),
                    ("side", self.side.is_some()),
                ])?;
                let quality = parse_quality(self.quality.as_deref())?;
                Ok(if self.kind == "quality_is" {
                    TerminalConstraint::QualityIs(quality)
                } else {
                    TerminalConstraint::QualityIsNot(quality)
                })
            }
            other => Err(format!("constraint `{other}` is not allowed on a termination rule")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chord::parse_chord_symbol;

    fn chord(s: &str) -> ChordLabel {
        parse_chord_symbol(s).unwrap()
    }

    const PREP_ONLY: &str = r#"
[[rule]]
id = "descending_fifth"
kind = "binary"
head = "right"
relation = "Prep(Descending5th)"
constraints = [
  { type = "interval_down", from = "left", to = "right", interval = "P5" },
  { type = "quality_is_not", side = "left", quality = "7" },
]
"#;

    #[test]
    fn single_rule_file() {
        let g = Grammar::from_toml_str(PREP_ONLY).unwrap();
        assert_eq!(g.binary_rules().count(), 1);
        assert_eq!(g.termination_rules().count(), 0);
        let r = &g.rules[0];
        assert!(check_rule(r, &chord("Dm7"), &chord("G7")));
        assert!(!check_rule(r, &chord("G7"), &chord("G7")));
        assert!(!check_rule(r, &chord("FM7"), &chord("B%7")));
        assert!(!check_rule(r, &chord("G7"), &chord("CM7")));
        assert_eq!(Grammar::apply(r, &chord("Dm7"), &chord("G7")), Some(chord("G7")));
    }

    #[test]
    fn default_grammar_shape() {
        let g = Grammar::default_grammar();
        assert!(g.binary_rules().count() >= 5);
        assert_eq!(g.termination_rules().count(), 1);
    }

    #[test]
    fn unknown_field_is_rejected_with_line() {
        let text = r#"
[[rule]]
id = "bad"
kind = "binary"
head = "right"
constraints = [ { type = "quality_is", side = "left", quality = "7", tempo = "fast" } ]
"#;
        match Grammar::from_toml_str(text) {
            Err(GrammarError::Syntax { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("tempo"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_side_names_rule() {
        let text = "[[rule]]\nid = \"x\"\nkind = \"binary\"\nhead = \"middle\"\n";
        match Grammar::from_toml_str(text) {
            Err(GrammarError::Rule { id, line, .. }) => {
                assert_eq!(id, "x");
                assert_eq!(line, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn misplaced_field_is_rejected() {
        let text = "[[rule]]\nid = \"x\"\nkind = \"binary\"\nhead = \"left\"\n\
                    constraints = [{ type = \"roots_equal\", side = \"left\" }]\n";
        assert!(matches!(Grammar::from_toml_str(text), Err(GrammarError::Rule { .. })));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = format!("{PREP_ONLY}\n{PREP_ONLY}");
        assert!(matches!(Grammar::from_toml_str(&text), Err(GrammarError::Rule { .. })));
    }
}
