//! Relational tables living next to an e-graph, and a fixpoint driver for
//! rules that read tables and write facts, nodes and unions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::egraph::{Analysis, EGraph, Id, Operator, Term};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Value {
    Int(i64),
    Sym(Arc<str>),
    Class(Id),
}

impl Value {
    pub fn sym(s: &str) -> Value {
        Value::Sym(Arc::from(s))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_class(&self) -> Option<Id> {
        match self {
            Value::Class(id) => Some(*id),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym(s) => write!(f, "{s:?}"),
            Value::Class(id) => write!(f, "#{id}"),
        }
    }
}

pub type Row = Vec<Value>;

/// A set of rows. Each row remembers the iteration stamp at which it was
/// first inserted, which drives semi-naive evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    rows: BTreeMap<Row, u64>,
}

impl Table {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, row: &[Value]) -> bool {
        self.rows.contains_key(row)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Row> {
        self.rows.keys()
    }

    /// Rows first inserted at or after `stamp`.
    pub fn iter_since(&self, stamp: u64) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |(_, &s)| s >= stamp).map(|(r, _)| r)
    }

    fn insert(&mut self, row: Row, stamp: u64) -> bool {
        use std::collections::btree_map::Entry;
        match self.rows.entry(row) {
            Entry::Vacant(e) => {
                e.insert(stamp);
                true
            }
            Entry::Occupied(_) => false,
        }
    }
}

/// A deferred effect produced by a rule search.
#[derive(Clone, Debug)]
pub enum Action<O> {
    Insert { table: String, row: Row },
    Union(Term<O>, Term<O>),
    Add(Term<O>),
}

pub trait Rule<O: Operator, N: Analysis<O>> {
    fn name(&self) -> &str;

    /// Returns the actions this rule wants to apply. Under semi-naive
    /// evaluation at least one premise must be drawn from rows stamped at or
    /// after `since`; under naive evaluation `since` is always 0.
    fn search(&self, engine: &Engine<O, N>, since: u64) -> Vec<Action<O>>;
}

pub struct Ruleset<O: Operator, N: Analysis<O>> {
    pub name: String,
    pub rules: Vec<Box<dyn Rule<O, N>>>,
}

impl<O: Operator, N: Analysis<O>> Ruleset<O, N> {
    pub fn new(name: impl Into<String>) -> Self {
        Ruleset { name: name.into(), rules: Vec::new() }
    }

    pub fn push(&mut self, rule: impl Rule<O, N> + 'static) -> &mut Self {
        self.rules.push(Box::new(rule));
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    Naive,
    SemiNaive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SaturationReport {
    pub iterations: usize,
    pub new_facts: usize,
    pub saturated: bool,
}

pub const DEFAULT_ITERATION_CAP: usize = 10_000;

/// An e-graph plus named relations.
pub struct Engine<O: Operator, N: Analysis<O> = ()> {
    pub egraph: EGraph<O, N>,
    tables: BTreeMap<String, Table>,
    stamp: u64,
}

impl<O: Operator> Default for Engine<O, ()> {
    fn default() -> Self {
        Engine::new(EGraph::default())
    }
}

impl<O: Operator, N: Analysis<O>> Engine<O, N> {
    pub fn new(egraph: EGraph<O, N>) -> Self {
        Engine { egraph, tables: BTreeMap::new(), stamp: 0 }
    }

    pub fn stamp(&self) -> u64 {
        self.stamp
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.get(name)
    }

    pub fn rows(&self, name: &str) -> impl Iterator<Item = &Row> {
        self.tables.get(name).into_iter().flat_map(|t| t.iter())
    }

    pub fn rows_since(&self, name: &str, since: u64) -> impl Iterator<Item = &Row> {
        self.tables.get(name).into_iter().flat_map(move |t| t.iter_since(since))
    }

    pub fn tables(&self) -> impl Iterator<Item = (&str, &Table)> {
        self.tables.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Inserts a row with the current stamp. Class values are canonicalized.
    pub fn insert(&mut self, table: &str, row: Row) -> bool {
        let row = self.canonical_row(row);
        self.tables.entry(table.to_string()).or_default().insert(row, self.stamp)
    }

    pub fn contains(&self, table: &str, row: &[Value]) -> bool {
        let row = self.canonical_row(row.to_vec());
        self.tables.get(table).is_some_and(|t| t.contains(&row))
    }

    fn canonical_row(&self, row: Row) -> Row {
        row.into_iter()
            .map(|v| match v {
                Value::Class(id) => Value::Class(self.egraph.find(id)),
                other => other,
            })
            .collect()
    }

    /// Rewrites class values after unions. Rows that collapse keep the
    /// earliest stamp.
    fn canonicalize_tables(&mut self) {
        let egraph = &self.egraph;
        for table in self.tables.values_mut() {
            let needs_work =
                table.rows.keys().any(|r| r.iter().any(|v| matches!(v, Value::Class(id) if egraph.find(*id) != *id)));
            if !needs_work {
                continue;
            }
            let old = std::mem::take(&mut table.rows);
            for (row, stamp) in old {
                let row: Row = row
                    .into_iter()
                    .map(|v| match v {
                        Value::Class(id) => Value::Class(egraph.find(id)),
                        other => other,
                    })
                    .collect();
                let slot = table.rows.entry(row).or_insert(stamp);
                *slot = (*slot).min(stamp);
            }
        }
    }

    /// Applies actions and returns how many new facts they produced: new
    /// rows, new e-nodes and effective unions.
    pub fn apply(&mut self, actions: Vec<Action<O>>) -> usize {
        let mut new_facts = 0;
        for action in actions {
            match action {
                Action::Insert { table, row } => {
                    if self.insert(&table, row) {
                        new_facts += 1;
                    }
                }
                Action::Add(term) => {
                    let before = self.egraph.total_number_of_nodes();
                    self.egraph.add_term(&term);
                    new_facts += self.egraph.total_number_of_nodes() - before;
                }
                Action::Union(a, b) => {
                    let before = self.egraph.total_number_of_nodes();
                    let a = self.egraph.add_term(&a);
                    let b = self.egraph.add_term(&b);
                    new_facts += self.egraph.total_number_of_nodes() - before;
                    if self.egraph.union(a, b) {
                        new_facts += 1;
                    }
                }
            }
        }
        new_facts += self.egraph.rebuild();
        self.canonicalize_tables();
        new_facts
    }

    /// Runs the ruleset until no rule produces a new fact or `cap`
    /// iterations have run.
    pub fn run_to_fixpoint(&mut self, ruleset: &Ruleset<O, N>, cap: usize, evaluation: Evaluation) -> SaturationReport {
        self.egraph.rebuild();
        self.canonicalize_tables();
        let mut report = SaturationReport::default();
        // Facts inserted before the run carry stamps <= self.stamp, so the
        // first semi-naive round must see everything.
        let mut since = 0;
        while report.iterations < cap {
            report.iterations += 1;
            let search_since = match evaluation {
                Evaluation::Naive => 0,
                Evaluation::SemiNaive => since,
            };
            let mut actions = Vec::new();
            for rule in &ruleset.rules {
                actions.extend(rule.search(self, search_since));
            }
            self.stamp += 1;
            since = self.stamp;
            let produced = self.apply(actions);
            report.new_facts += produced;
            if produced == 0 {
                report.saturated = true;
                break;
            }
        }
        report
    }
}
