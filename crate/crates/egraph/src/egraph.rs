use std::collections::HashMap;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;

use serde_json::{json, Value as Json};

use crate::unionfind::UnionFind;

/// Handle of an e-class. Resolve through [`EGraph::find`] before comparing.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Id(u32);

impl Id {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for Id {
    fn from(n: usize) -> Id {
        Id(u32::try_from(n).expect("e-class id overflow"))
    }
}

impl Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Operator symbols stored in e-nodes.
pub trait Operator: Clone + Eq + Ord + Hash + Debug + Display {}
impl<T: Clone + Eq + Ord + Hash + Debug + Display> Operator for T {}

/// An operator applied to child e-classes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ENode<O> {
    pub op: O,
    pub children: Vec<Id>,
}

impl<O> ENode<O> {
    pub fn new(op: O, children: Vec<Id>) -> Self {
        ENode { op, children }
    }

    pub fn leaf(op: O) -> Self {
        ENode { op, children: Vec::new() }
    }
}

/// A term to insert. `Class` splices in an existing e-class.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term<O> {
    Node(O, Vec<Term<O>>),
    Class(Id),
}

impl<O> Term<O> {
    pub fn leaf(op: O) -> Self {
        Term::Node(op, Vec::new())
    }
}

/// A per-class analysis whose values form a join-semilattice.
///
/// `merge` must be commutative, associative and idempotent, otherwise the
/// final values would depend on the order in which unions happen.
pub trait Analysis<O: Operator>: Sized {
    type Data: Clone + Debug + PartialEq;

    fn make(egraph: &EGraph<O, Self>, node: &ENode<O>) -> Self::Data;

    /// Joins `b` into `a`, returning whether `a` changed.
    fn merge(&mut self, a: &mut Self::Data, b: Self::Data) -> bool;

    fn describe(&self, _data: &Self::Data) -> Json {
        Json::Null
    }
}

impl<O: Operator> Analysis<O> for () {
    type Data = ();

    fn make(_: &EGraph<O, Self>, _: &ENode<O>) {}

    fn merge(&mut self, _: &mut (), _: ()) -> bool {
        false
    }
}

#[derive(Clone, Debug)]
pub struct EClass<O, D> {
    pub id: Id,
    pub nodes: Vec<ENode<O>>,
    pub data: D,
    parents: Vec<(ENode<O>, Id)>,
}

impl<O, D> EClass<O, D> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ENode<O>> {
        self.nodes.iter()
    }
}

/// Hash-consed e-graph with deferred congruence closure.
///
/// Unions are cheap; congruence and analysis propagation are restored by
/// [`EGraph::rebuild`]. Queries that rely on canonical children must run on
/// a clean graph.
#[derive(Clone)]
pub struct EGraph<O: Operator, N: Analysis<O> = ()> {
    pub analysis: N,
    unionfind: UnionFind,
    memo: HashMap<ENode<O>, Id>,
    classes: Vec<Option<EClass<O, N::Data>>>,
    pending: Vec<(ENode<O>, Id)>,
    analysis_pending: Vec<(ENode<O>, Id)>,
}

impl<O: Operator> Default for EGraph<O, ()> {
    fn default() -> Self {
        EGraph::new(())
    }
}

impl<O: Operator, N: Analysis<O>> EGraph<O, N> {
    pub fn new(analysis: N) -> Self {
        EGraph {
            analysis,
            unionfind: UnionFind::default(),
            memo: HashMap::new(),
            classes: Vec::new(),
            pending: Vec::new(),
            analysis_pending: Vec::new(),
        }
    }

    pub fn find(&self, id: Id) -> Id {
        self.unionfind.find(id)
    }

    pub fn is_clean(&self) -> bool {
        self.pending.is_empty() && self.analysis_pending.is_empty()
    }

    pub fn number_of_classes(&self) -> usize {
        self.classes.iter().flatten().count()
    }

    pub fn total_number_of_nodes(&self) -> usize {
        self.classes.iter().flatten().map(|c| c.nodes.len()).sum()
    }

    /// Live classes in ascending id order.
    pub fn classes(&self) -> impl Iterator<Item = &EClass<O, N::Data>> {
        self.classes.iter().flatten()
    }

    pub fn class_ids(&self) -> Vec<Id> {
        self.classes().map(|c| c.id).collect()
    }

    pub fn class(&self, id: Id) -> &EClass<O, N::Data> {
        let id = self.find(id);
        self.classes[id.index()].as_ref().expect("find returned a dead class")
    }

    pub fn data(&self, id: Id) -> &N::Data {
        &self.class(id).data
    }

    pub fn canonicalize(&self, node: &ENode<O>) -> ENode<O> {
        ENode { op: node.op.clone(), children: node.children.iter().map(|&c| self.find(c)).collect() }
    }

    pub fn lookup(&self, node: &ENode<O>) -> Option<Id> {
        let node = self.canonicalize(node);
        self.memo.get(&node).map(|&id| self.find(id))
    }

    pub fn lookup_term(&self, term: &Term<O>) -> Option<Id> {
        match term {
            Term::Class(id) => Some(self.find(*id)),
            Term::Node(op, children) => {
                let children = children.iter().map(|c| self.lookup_term(c)).collect::<Option<Vec<_>>>()?;
                self.lookup(&ENode::new(op.clone(), children))
            }
        }
    }

    /// Adds a node, returning the class that contains it. Structurally
    /// identical nodes (up to canonical children) share one class.
    pub fn add(&mut self, node: ENode<O>) -> Id {
        let node = self.canonicalize(&node);
        if let Some(&existing) = self.memo.get(&node) {
            return self.unionfind.find_mut(existing);
        }
        let id = self.unionfind.make_set();
        let data = N::make(self, &node);
        for &child in &node.children {
            let child = self.find(child);
            self.classes[child.index()].as_mut().expect("child class must be live").parents.push((node.clone(), id));
        }
        self.classes.push(Some(EClass { id, nodes: vec![node.clone()], data, parents: Vec::new() }));
        debug_assert_eq!(self.classes.len(), self.unionfind.len());
        self.memo.insert(node, id);
        id
    }

    pub fn add_term(&mut self, term: &Term<O>) -> Id {
        match term {
            Term::Class(id) => self.find(*id),
            Term::Node(op, children) => {
                let children = children.iter().map(|c| self.add_term(c)).collect();
                self.add(ENode::new(op.clone(), children))
            }
        }
    }

    /// Merges the classes of `a` and `b`. Returns whether the partition
    /// changed. Congruence is restored lazily by [`EGraph::rebuild`].
    pub fn union(&mut self, a: Id, b: Id) -> bool {
        let a = self.unionfind.find_mut(a);
        let b = self.unionfind.find_mut(b);
        if a == b {
            return false;
        }
        let (root, other) = if a < b { (a, b) } else { (b, a) };
        self.unionfind.union_roots(root, other);

        let other_class = self.classes[other.index()].take().expect("union of a dead class");
        let other_data = other_class.data.clone();
        let root_class = self.classes[root.index()].as_mut().expect("union of a dead class");

        let root_changed = self.analysis.merge(&mut root_class.data, other_class.data);
        let other_changed = root_class.data != other_data;
        if root_changed {
            self.analysis_pending.extend(root_class.parents.iter().cloned());
        }
        if other_changed {
            self.analysis_pending.extend(other_class.parents.iter().cloned());
        }
        self.pending.extend(other_class.parents.iter().cloned());
        root_class.nodes.extend(other_class.nodes);
        root_class.parents.extend(other_class.parents);
        true
    }

    /// Restores congruence and analysis invariants. Returns the number of
    /// unions performed by congruence.
    pub fn rebuild(&mut self) -> usize {
        let mut congruence_unions = 0;
        while !self.pending.is_empty() || !self.analysis_pending.is_empty() {
            while let Some((node, class)) = self.pending.pop() {
                let node = self.canonicalize(&node);
                if let Some(old) = self.memo.insert(node, class) {
                    if self.union(old, class) {
                        congruence_unions += 1;
                    }
                }
            }
            while let Some((node, class)) = self.analysis_pending.pop() {
                let class = self.unionfind.find_mut(class);
                let node = self.canonicalize(&node);
                let fresh = N::make(self, &node);
                let eclass = self.classes[class.index()].as_mut().expect("analysis on a dead class");
                if self.analysis.merge(&mut eclass.data, fresh) {
                    self.analysis_pending.extend(eclass.parents.iter().cloned());
                }
            }
        }
        self.canonicalize_classes();
        congruence_unions
    }

    fn canonicalize_classes(&mut self) {
        let uf = &self.unionfind;
        for class in self.classes.iter_mut().flatten() {
            for node in class.nodes.iter_mut() {
                for child in node.children.iter_mut() {
                    *child = uf.find(*child);
                }
            }
            class.nodes.sort();
            class.nodes.dedup();
        }
        let stale: Vec<ENode<O>> =
            self.memo.keys().filter(|n| n.children.iter().any(|&c| uf.find(c) != c)).cloned().collect();
        for node in stale {
            self.memo.remove(&node);
        }
        for id in self.memo.values_mut() {
            *id = uf.find(*id);
        }
    }

    /// Checks hash-cons uniqueness and canonical children. Only meaningful
    /// on a clean graph; used by tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.is_clean() {
            return Err("graph has pending work".into());
        }
        let mut seen: HashMap<&ENode<O>, Id> = HashMap::new();
        for class in self.classes() {
            if self.find(class.id) != class.id {
                return Err(format!("class {} is not a root", class.id));
            }
            for node in &class.nodes {
                if node.children.iter().any(|&c| self.find(c) != c) {
                    return Err(format!("non-canonical node {:?} in {}", node, class.id));
                }
                if let Some(other) = seen.insert(node, class.id) {
                    return Err(format!("node {:?} stored in both {} and {}", node, other, class.id));
                }
                if self.memo.get(node).map(|&i| self.find(i)) != Some(class.id) {
                    return Err(format!("memo does not map {:?} to {}", node, class.id));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        let classes: Vec<Json> = self
            .classes()
            .map(|class| {
                let nodes: Vec<Json> = class
                    .nodes
                    .iter()
                    .map(|n| {
                        json!({
                            "op": n.op.to_string(),
                            "children": n.children.iter().map(|c| c.0).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({
                    "id": class.id.0,
                    "nodes": nodes,
                    "data": self.analysis.describe(&class.data),
                })
            })
            .collect();
        json!({ "classes": classes })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph egraph {\n  compound=true;\n  clusterrank=local;\n");
        for class in self.classes() {
            out.push_str(&format!(
                "  subgraph cluster_{} {{\n    style=dotted;\n    label=\"{}\";\n",
                class.id, class.id
            ));
            for (i, node) in class.nodes.iter().enumerate() {
                out.push_str(&format!("    n{}_{} [label=\"{}\"];\n", class.id, i, escape(&node.op.to_string())));
            }
            out.push_str("  }\n");
        }
        for class in self.classes() {
            for (i, node) in class.nodes.iter().enumerate() {
                for &child in &node.children {
                    let child = self.find(child);
                    out.push_str(&format!("  n{}_{} -> n{}_0 [lhead=cluster_{}];\n", class.id, i, child, child));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl<O: Operator, N: Analysis<O>> Debug for EGraph<O, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EGraph")
            .field("classes", &self.number_of_classes())
            .field("nodes", &self.total_number_of_nodes())
            .finish()
    }
}
