//! Derivation templates (chord-free) and programs (templates with their
//! surface chords attached).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chordlearn_harmony::{check_termination, ChordLabel, Grammar};

use crate::lang::{FnId, Routing, RuleName};

/// A derivation program with anonymous holes. `Hole` is the identity
/// pattern and matches any derivation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Template {
    Hole,
    Pure(RuleName),
    Compose(RuleName, Vec<Template>),
}

impl Template {
    pub fn size(&self) -> usize {
        match self {
            Template::Hole | Template::Pure(_) => 1,
            Template::Compose(_, cs) => 1 + cs.iter().map(Template::size).sum::<usize>(),
        }
    }

    pub fn holes(&self) -> usize {
        match self {
            Template::Hole => 1,
            Template::Pure(_) => 0,
            Template::Compose(_, cs) => cs.iter().map(Template::holes).sum(),
        }
    }

    /// Number of `Pure` leaves, i.e. surface chords the template consumes.
    pub fn terminals(&self) -> usize {
        match self {
            Template::Hole => 0,
            Template::Pure(_) => 1,
            Template::Compose(_, cs) => cs.iter().map(Template::terminals).sum(),
        }
    }

    pub fn non_hole_nodes(&self) -> usize {
        self.size() - self.holes()
    }

    /// Patterns that can never pay for their storage: the identity, a bare
    /// primitive, or a single rule with only holes below it.
    pub fn is_trivial(&self) -> bool {
        self.non_hole_nodes() <= 1
    }

    /// Fills holes in pre-order with `args` routed through `routing`.
    pub fn instantiate(&self, routing: &Routing, args: &[Template]) -> Template {
        fn go(t: &Template, routing: &Routing, args: &[Template], hole: &mut usize) -> Template {
            match t {
                Template::Hole => {
                    let a = args[routing.arg_for_hole(*hole)].clone();
                    *hole += 1;
                    a
                }
                Template::Pure(r) => Template::Pure(r.clone()),
                Template::Compose(r, cs) => {
                    Template::Compose(r.clone(), cs.iter().map(|c| go(c, routing, args, hole)).collect())
                }
            }
        }
        let mut hole = 0;
        go(self, routing, args, &mut hole)
    }

    /// True iff some instantiation of `self` equals `other`.
    pub fn subsumes(&self, other: &Template) -> bool {
        match (self, other) {
            (Template::Hole, _) => true,
            (Template::Pure(a), Template::Pure(b)) => a == b,
            (Template::Compose(a, xs), Template::Compose(b, ys)) => {
                a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.subsumes(y))
            }
            _ => false,
        }
    }

    /// Parses the s-expression form produced by `Display`. A bare symbol is
    /// a `Pure` leaf and `?` is a hole.
    pub fn parse(text: &str) -> Result<Template, String> {
        let tokens: Vec<String> =
            text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect();
        let mut pos = 0;
        let t = parse_tokens(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(format!("trailing input after token {pos}"));
        }
        Ok(t)
    }
}

fn parse_tokens(tokens: &[String], pos: &mut usize) -> Result<Template, String> {
    let tok = tokens.get(*pos).ok_or("unexpected end of input")?;
    *pos += 1;
    match tok.as_str() {
        "?" => Ok(Template::Hole),
        ")" => Err("unexpected `)`".into()),
        "(" => {
            let head = tokens.get(*pos).ok_or("missing rule after `(`")?.clone();
            *pos += 1;
            let mut children = Vec::new();
            while tokens.get(*pos).map(String::as_str) != Some(")") {
                if *pos >= tokens.len() {
                    return Err("unclosed `(`".into());
                }
                children.push(parse_tokens(tokens, pos)?);
            }
            *pos += 1;
            Ok(Template::Compose(head.as_str().into(), children))
        }
        sym => Ok(Template::Pure(sym.into())),
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Template::Hole => f.write_str("?"),
            Template::Pure(r) => f.write_str(r),
            Template::Compose(r, cs) => {
                write!(f, "({r}")?;
                for c in cs {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A derivation with its chords: what extraction produces.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Program {
    Leaf {
        rule: RuleName,
        chord: ChordLabel,
    },
    Compose {
        rule: RuleName,
        children: Vec<Program>,
    },
    /// `terminals` are the chords consumed by the body's own `Pure` leaves,
    /// in pre-order.
    App {
        fun: FnId,
        routing: Routing,
        args: Vec<Program>,
        terminals: Vec<ChordLabel>,
    },
}

impl Program {
    /// Description length: one per node, an application counts its head once.
    pub fn size(&self) -> usize {
        match self {
            Program::Leaf { .. } => 1,
            Program::Compose { children, .. } => 1 + children.iter().map(Program::size).sum::<usize>(),
            Program::App { args, .. } => 1 + args.iter().map(Program::size).sum::<usize>(),
        }
    }

    pub fn is_primitive(&self) -> bool {
        match self {
            Program::Leaf { .. } => true,
            Program::Compose { children, .. } => children.iter().all(Program::is_primitive),
            Program::App { .. } => false,
        }
    }

    /// The chord-free template of a primitive program.
    pub fn template(&self) -> Option<Template> {
        match self {
            Program::Leaf { rule, .. } => Some(Template::Pure(rule.clone())),
            Program::Compose { rule, children } => {
                Some(Template::Compose(rule.clone(), children.iter().map(Program::template).collect::<Option<_>>()?))
            }
            Program::App { .. } => None,
        }
    }

    pub fn uses(&self) -> BTreeSet<FnId> {
        let mut out = BTreeSet::new();
        self.collect_uses(&mut out);
        out
    }

    fn collect_uses(&self, out: &mut BTreeSet<FnId>) {
        match self {
            Program::Leaf { .. } => {}
            Program::Compose { children, .. } => children.iter().for_each(|c| c.collect_uses(out)),
            Program::App { fun, args, .. } => {
                out.insert(*fun);
                args.iter().for_each(|a| a.collect_uses(out));
            }
        }
    }

    /// Inlines every application through the library bodies.
    pub fn expand(&self, library: &BTreeMap<FnId, Template>) -> Result<Program, String> {
        match self {
            Program::Leaf { .. } => Ok(self.clone()),
            Program::Compose { rule, children } => Ok(Program::Compose {
                rule: rule.clone(),
                children: children.iter().map(|c| c.expand(library)).collect::<Result<_, _>>()?,
            }),
            Program::App { fun, routing, args, terminals } => {
                let body = library.get(fun).ok_or_else(|| format!("{fun} is not in the library"))?;
                if body.holes() != routing.holes() || body.terminals() != terminals.len() {
                    return Err(format!("application of {fun} does not fit its body {body}"));
                }
                let args: Vec<Program> = args.iter().map(|a| a.expand(library)).collect::<Result<_, _>>()?;
                let mut state = (0, 0);
                Ok(fill_body(body, routing, &args, terminals, &mut state))
            }
        }
    }

    /// Leaf chords left to right. Only defined on primitive programs.
    pub fn chords(&self) -> Vec<&ChordLabel> {
        let mut out = Vec::new();
        self.collect_chords(&mut out);
        out
    }

    fn collect_chords<'a>(&'a self, out: &mut Vec<&'a ChordLabel>) {
        match self {
            Program::Leaf { chord, .. } => out.push(chord),
            Program::Compose { children, .. } => children.iter().for_each(|c| c.collect_chords(out)),
            Program::App { .. } => panic!("chords() needs an expanded program"),
        }
    }

    /// Checks a primitive program against the grammar and returns its head.
    pub fn head(&self, grammar: &Grammar) -> Result<ChordLabel, String> {
        match self {
            Program::Leaf { rule, chord } => {
                let r = grammar.rule(rule).ok_or_else(|| format!("unknown rule {rule}"))?;
                if check_termination(r, chord) {
                    Ok(chord.clone())
                } else {
                    Err(format!("{rule} does not accept {chord}"))
                }
            }
            Program::Compose { rule, children } => {
                let r = grammar.rule(rule).ok_or_else(|| format!("unknown rule {rule}"))?;
                let [x, y] = children.as_slice() else {
                    return Err(format!("{rule} applied to {} children", children.len()));
                };
                let (hx, hy) = (x.head(grammar)?, y.head(grammar)?);
                Grammar::apply(r, &hx, &hy).ok_or_else(|| format!("{rule} does not relate {hx} and {hy}"))
            }
            Program::App { fun, .. } => Err(format!("unexpanded application of {fun}")),
        }
    }
}

fn fill_body(
    t: &Template,
    routing: &Routing,
    args: &[Program],
    terminals: &[ChordLabel],
    state: &mut (usize, usize),
) -> Program {
    match t {
        Template::Hole => {
            let p = args[routing.arg_for_hole(state.0)].clone();
            state.0 += 1;
            p
        }
        Template::Pure(r) => {
            let chord = terminals[state.1].clone();
            state.1 += 1;
            Program::Leaf { rule: r.clone(), chord }
        }
        Template::Compose(r, cs) => Program::Compose {
            rule: r.clone(),
            children: cs.iter().map(|c| fill_body(c, routing, args, terminals, state)).collect(),
        },
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Leaf { chord, .. } => write!(f, "{chord}"),
            Program::Compose { rule, children } => {
                write!(f, "({rule}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
            Program::App { fun, routing, args, terminals } => {
                if routing.holes() == 0 {
                    write!(f, "({fun} [")?;
                } else {
                    write!(f, "({fun}{routing} [")?;
                }
                for (k, t) in terminals.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing_reconstructs_shared_argument() {
        // ×[f[+[3, 42]], g[42]] from the body ×[f[+[?, ?]], g[?]] and <_ _ 1>.
        let body = Template::parse("(× (f (+ ? ?)) (g ?))").unwrap();
        let (routing, args) =
            Routing::dedup(&[Template::Pure("3".into()), Template::Pure("42".into()), Template::Pure("42".into())]);
        assert_eq!(routing.to_string(), "<_ _ 1>");
        assert_eq!(args.len(), 2);
        let t = body.instantiate(&routing, &args);
        assert_eq!(t.to_string(), "(× (f (+ 3 42)) (g 42))");
    }

    #[test]
    fn parse_round_trip_and_sizes() {
        let t = Template::parse("(dominant (descending_fifth terminate terminate) ?)").unwrap();
        assert_eq!(t.to_string(), "(dominant (descending_fifth terminate terminate) ?)");
        assert_eq!(t.size(), 5);
        assert_eq!(t.holes(), 1);
        assert_eq!(t.terminals(), 2);
        assert!(!t.is_trivial());
        assert!(Template::parse("(dominant ? ?)").unwrap().is_trivial());
        assert!(Template::Hole.is_trivial());
        assert!(Template::parse("(a").is_err());
    }

    #[test]
    fn subsumption() {
        let g = Template::parse("(a ? (b c ?))").unwrap();
        assert!(g.subsumes(&Template::parse("(a x (b c d))").unwrap()));
        assert!(!g.subsumes(&Template::parse("(a x (b d d))").unwrap()));
        assert!(Template::Hole.subsumes(&g));
    }
}
