//! The operator language stored in the e-graph.

use std::fmt;
use std::sync::Arc;

use chordlearn_harmony::ChordLabel;

/// Grammar rule name, shared cheaply between nodes and templates.
pub type RuleName = Arc<str>;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FnId(pub u32);

impl fmt::Display for FnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

/// Maps every hole of an abstraction body, in pre-order, to an argument
/// index. Arguments are numbered by first use, so the routing is canonical
/// and surjective.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Routing(Vec<u16>);

impl Routing {
    /// Deduplicates hole fills. Returns the routing and the distinct
    /// arguments in first-use order.
    pub fn dedup<T: PartialEq + Clone>(fills: &[T]) -> (Routing, Vec<T>) {
        let mut args: Vec<T> = Vec::new();
        let mut routes = Vec::with_capacity(fills.len());
        for fill in fills {
            let idx = match args.iter().position(|a| a == fill) {
                Some(i) => i,
                None => {
                    args.push(fill.clone());
                    args.len() - 1
                }
            };
            routes.push(idx as u16);
        }
        (Routing(routes), args)
    }

    pub fn holes(&self) -> usize {
        self.0.len()
    }

    pub fn arity(&self) -> usize {
        self.0.iter().map(|&r| r as usize + 1).max().unwrap_or(0)
    }

    pub fn arg_for_hole(&self, hole: usize) -> usize {
        self.0[hole] as usize
    }

    /// Hole fills for the given arguments.
    pub fn route<'a, T>(&self, args: &'a [T]) -> Vec<&'a T> {
        self.0.iter().map(|&r| &args[r as usize]).collect()
    }
}

/// Renders as `<_ _ 1>`: `_` takes the next fresh argument, a number reuses
/// an earlier argument by index.
impl fmt::Display for Routing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        let mut next = 0;
        for (k, &r) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            if r as usize == next {
                f.write_str("_")?;
                next += 1;
            } else {
                write!(f, "{r}")?;
            }
        }
        f.write_str(">")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Op {
    /// Position `pos` of piece `piece`. Anchors leaves to their span; never
    /// part of a template.
    Word { piece: u32, pos: u32 },
    /// Canonical key of the derivation class of a span.
    Der { piece: u32, head: ChordLabel, i: u32, j: u32 },
    /// `Pure r` for a termination rule; the single child is the `Word`.
    Leaf(RuleName),
    /// A binary rule applied to two derivation classes.
    Compose(RuleName),
    /// An abstraction applied to its arguments. Children are the arguments
    /// followed by the `Word`s of the terminals the body consumes.
    App { fun: FnId, routing: Routing },
}

impl Op {
    /// Number of leading children that are derivation arguments.
    pub fn template_arity(&self) -> usize {
        match self {
            Op::Word { .. } | Op::Der { .. } | Op::Leaf(_) => 0,
            Op::Compose(_) => 2,
            Op::App { routing, .. } => routing.arity(),
        }
    }

    pub fn is_derivation(&self) -> bool {
        matches!(self, Op::Leaf(_) | Op::Compose(_) | Op::App { .. })
    }

    pub fn is_primitive(&self) -> bool {
        matches!(self, Op::Leaf(_) | Op::Compose(_))
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Word { piece, pos } => write!(f, "w{piece}.{pos}"),
            Op::Der { piece, head, i, j } => write!(f, "Der({piece}, {head}, {i}, {j})"),
            Op::Leaf(r) => write!(f, "Pure {r}"),
            Op::Compose(r) => write!(f, "{r}"),
            Op::App { fun, routing } if routing.holes() == 0 => write!(f, "{fun}"),
            Op::App { fun, routing } => write!(f, "{fun}{routing}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing_dedup_and_render() {
        let (r, args) = Routing::dedup(&[3, 42, 42]);
        assert_eq!(args, vec![3, 42]);
        assert_eq!(r.to_string(), "<_ _ 1>");
        assert_eq!(r.arity(), 2);
        assert_eq!(r.route(&args), vec![&3, &42, &42]);
        let (r, _) = Routing::dedup(&['a', 'b', 'a', 'c']);
        assert_eq!(r.to_string(), "<_ _ 0 _>");
        assert_eq!(Routing::dedup::<u8>(&[]).0.to_string(), "<>");
    }
}
