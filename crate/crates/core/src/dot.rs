//! Graphviz output: refactored derivations as blocks over the surface
//! chords, and the library as a DAG of components.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lang::FnId;
use crate::liblearn::{decompose, Library};
use crate::pipeline::Learned;
use crate::template::{Program, Template};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

struct Builder<'a> {
    out: String,
    next: usize,
    pos: usize,
    bodies: &'a BTreeMap<FnId, Template>,
}

impl Builder<'_> {
    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("n{}", self.next)
    }

    /// Emits `p` and returns its node name.
    fn program(&mut self, p: &Program) -> String {
        let me = self.fresh();
        match p {
            Program::Leaf { .. } => {
                let _ = writeln!(self.out, "  {me} [label=\"*\", shape=circle, width=0.2];");
                let _ = writeln!(self.out, "  {me} -> c{};", self.pos);
                self.pos += 1;
            }
            Program::Compose { rule, children } => {
                let _ = writeln!(self.out, "  {me} [label=\"{}\", shape=ellipse];", escape(rule));
                for c in children {
                    let child = self.program(c);
                    let _ = writeln!(self.out, "  {me} -> {child};");
                }
            }
            Program::App { fun, routing, args, .. } => {
                let label = if routing.holes() == 0 { fun.to_string() } else { format!("{fun}{routing}") };
                let _ = writeln!(
                    self.out,
                    "  {me} [label=\"{}\", shape=box, style=filled, fillcolor=lightblue];",
                    escape(&label)
                );
                // Walk the body so terminals and arguments come out in
                // surface order.
                let body = self.bodies.get(fun).cloned().unwrap_or(Template::Hole);
                let mut hole = 0;
                self.body(&me, &body, routing, args, &mut hole);
            }
        }
        me
    }

    fn body(&mut self, block: &str, t: &Template, routing: &crate::lang::Routing, args: &[Program], hole: &mut usize) {
        match t {
            Template::Hole => {
                let arg = &args[routing.arg_for_hole(*hole)];
                *hole += 1;
                let child = self.program(arg);
                let _ = writeln!(self.out, "  {block} -> {child} [style=dashed];");
            }
            Template::Pure(_) => {
                let _ = writeln!(self.out, "  {block} -> c{};", self.pos);
                self.pos += 1;
            }
            Template::Compose(_, cs) => {
                for c in cs {
                    self.body(block, c, routing, args, hole);
                }
            }
        }
    }
}

/// One refactored derivation with applications drawn as blocks. Every
/// surface chord `c{k}` has exactly one incoming edge.
pub fn piece_dot(title: &str, program: &Program, symbols: &[String], library: &Library) -> String {
    let bodies = library.bodies();
    let mut b = Builder { out: String::new(), next: 0, pos: 0, bodies: &bodies };
    let _ = writeln!(b.out, "digraph \"{}\" {{", escape(title));
    let _ = writeln!(b.out, "  node [fontname=\"Helvetica\"];");
    let _ = writeln!(b.out, "  {{ rank=same;");
    for (k, s) in symbols.iter().enumerate() {
        let _ = writeln!(b.out, "    c{k} [label=\"{}\", shape=plaintext];", escape(s));
    }
    for k in 1..symbols.len() {
        let _ = writeln!(b.out, "    c{} -> c{k} [style=invis];", k - 1);
    }
    let _ = writeln!(b.out, "  }}");
    b.program(program);
    b.out.push_str("}\n");
    b.out
}

/// Library entries with their bodies; an edge `f -> g` means `g`'s body
/// occurs inside `f`'s, taken from the cheapest encoding of `f` over the
/// other entries. Edges always point to strictly smaller bodies.
pub fn library_dot(library: &Library) -> String {
    let mut out = String::from("digraph library {\n  node [shape=box, fontname=\"Helvetica\"];\n");
    for a in &library.entries {
        let _ = writeln!(
            out,
            "  {} [label=\"{} = {}\\nstorage {}\"];",
            a.id,
            a.id,
            escape(&a.body.to_string()),
            library.entry_cost(a.id)
        );
    }
    for a in &library.entries {
        let others: Vec<(FnId, &Template)> =
            library.entries.iter().filter(|b| b.id != a.id).map(|b| (b.id, &b.body)).collect();
        for c in decompose(&a.body, &others).1 {
            let _ = writeln!(out, "  {} -> {};", a.id, c);
        }
    }
    out.push_str("}\n");
    out
}

fn slug(title: &str) -> String {
    let s: String =
        title.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
    if s.is_empty() {
        "piece".into()
    } else {
        s
    }
}

/// Writes one file per piece plus `library.dot` into `dir`. `prefix`
/// separates several runs sharing a directory.
pub fn export_dot(learned: &Learned, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    let io = |path: &Path, source| Error::Io { path: path.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    for outcome in &learned.pieces {
        let piece = &learned.forest.corpus.pieces[outcome.piece as usize];
        let path = dir.join(format!("{prefix}{}.dot", slug(&piece.title)));
        let text = piece_dot(&piece.title, &outcome.program, &piece.symbols, &learned.library);
        std::fs::write(&path, text).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    let path = dir.join(format!("{prefix}library.dot"));
    std::fs::write(&path, library_dot(&learned.library)).map_err(|e| io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liblearn::StorageModel;
    use chordlearn_harmony::parse_chord_symbol;

    #[test]
    fn one_chord_is_one_block() {
        let p = Program::Leaf { rule: "terminate".into(), chord: parse_chord_symbol("C7").unwrap() };
        let lib = Library { entries: vec![], model: StorageModel::Flat };
        let dot = piece_dot("x", &p, &["C7".into()], &lib);
        assert_eq!(dot.matches("-> c0;").count(), 1);
        assert_eq!(dot.matches("shape=circle").count(), 1);
    }
}
