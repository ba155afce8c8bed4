//! Brute-force query evaluation. Nothing here calls into the planner or the
//! executor: patterns are matched by backtracking over in-memory edge lists
//! and every clause of the query is applied in the most literal way.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_edges;
use crate::model::{ColumnSchema, Role};
use crate::query::{CastType, CompareOp, Direction, Expression, PatternClause, QuerySpec};
use crate::value::{compare_values, KgtkValue, Number};

/// One graph held fully in memory.
#[derive(Clone, Debug)]
pub struct OracleGraph {
    pub name: String,
    pub schema: ColumnSchema,
    pub rows: Vec<Vec<KgtkValue>>,
}

impl OracleGraph {
    pub fn load(name: impl Into<String>, path: &Path) -> Result<Self> {
        let (schema, reader) = read_edges(path, true)?;
        let rows = reader.map(|r| r.map(|e| e.cells)).collect::<Result<Vec<_>>>()?;
        Ok(OracleGraph {
            name: name.into(),
            schema,
            rows,
        })
    }

    fn cell(&self, row: usize, role: Role) -> &KgtkValue {
        const EMPTY: &KgtkValue = &KgtkValue::Empty;
        match self.schema.role(role) {
            Some(i) => self.rows[row].get(i).unwrap_or(EMPTY),
            None => EMPTY,
        }
    }
}

/// Loads every input of `spec` under its graph name.
pub fn load_inputs(spec: &QuerySpec) -> Result<Vec<OracleGraph>> {
    spec.inputs
        .iter()
        .map(|i| OracleGraph::load(i.graph_name(), Path::new(&i.path)))
        .collect()
}

/// Expected output of a query. Rows sharing a `block` number compare equal
/// under the order-by keys, so the engine may emit them in any order.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<KgtkValue>>,
    pub blocks: Vec<usize>,
    pub ordered: bool,
    pub limit: Option<u64>,
}

fn render(row: &[KgtkValue]) -> String {
    row.iter().map(ToString::to_string).collect::<Vec<_>>().join("\t")
}

/// Removes `rows` from `pool`, failing on the first row `pool` lacks.
fn take_all<'a>(
    pool: &mut HashMap<&'a [KgtkValue], usize>,
    rows: &'a [Vec<KgtkValue>],
) -> std::result::Result<(), String> {
    for r in rows {
        match pool.get_mut(r.as_slice()) {
            Some(n) if *n > 0 => *n -= 1,
            _ => return Err(format!("unexpected row: {}", render(r))),
        }
    }
    Ok(())
}

fn multiset(rows: &[Vec<KgtkValue>]) -> HashMap<&[KgtkValue], usize> {
    let mut m = HashMap::new();
    for r in rows {
        *m.entry(r.as_slice()).or_insert(0) += 1;
    }
    m
}

impl OracleResult {
    /// Number of rows a correct engine returns.
    pub fn expected_len(&self) -> usize {
        match self.limit {
            Some(n) => self.rows.len().min(n as usize),
            None => self.rows.len(),
        }
    }

    /// Checks an engine result. Describes the first difference on failure.
    pub fn check(&self, columns: &[String], actual: &[Vec<KgtkValue>]) -> std::result::Result<(), String> {
        if columns != self.columns.as_slice() {
            return Err(format!("header {:?}, expected {:?}", columns, self.columns));
        }
        if actual.len() != self.expected_len() {
            return Err(format!("{} rows, expected {}", actual.len(), self.expected_len()));
        }
        if !self.ordered {
            let mut pool = multiset(&self.rows);
            return take_all(&mut pool, actual);
        }
        let mut start = 0;
        let mut offset = 0;
        while offset < actual.len() {
            let block = self.blocks[start];
            let end = start + self.blocks[start..].iter().take_while(|b| **b == block).count();
            let take = (end - start).min(actual.len() - offset);
            let mut pool = multiset(&self.rows[start..end]);
            take_all(&mut pool, &actual[offset..offset + take])
                .map_err(|e| format!("at row {offset}: {e}"))?;
            offset += take;
            start = end;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Term {
    Var(String),
    Const(KgtkValue),
}

/// One edge pattern: terms that must hold on a single edge.
#[derive(Clone, Debug)]
struct Atom {
    graph: usize,
    slots: Vec<(Role, Term)>,
}

type Binding = HashMap<String, KgtkValue>;

struct Matcher<'g> {
    graphs: &'g [OracleGraph],
    lookup: HashMap<(usize, Role), HashMap<KgtkValue, Vec<usize>>>,
    /// Bindings still allowed before giving up.
    budget: usize,
}

impl<'g> Matcher<'g> {
    fn candidates(&mut self, atom: &Atom, binding: &Binding) -> Vec<usize> {
        let graph = &self.graphs[atom.graph];
        for (role, term) in &atom.slots {
            let key = match term {
                Term::Const(c) => Some(c.clone()),
                Term::Var(v) => binding.get(v).cloned(),
            };
            let Some(key) = key else { continue };
            if key.is_empty() {
                return Vec::new();
            }
            let table = self.lookup.entry((atom.graph, *role)).or_insert_with(|| {
                let mut t: HashMap<KgtkValue, Vec<usize>> = HashMap::new();
                for i in 0..graph.rows.len() {
                    t.entry(graph.cell(i, *role).clone()).or_default().push(i);
                }
                t
            });
            return table.get(&key).cloned().unwrap_or_default();
        }
        (0..graph.rows.len()).collect()
    }

    fn extend(&mut self, atoms: &[Atom], binding: &mut Binding, out: &mut Vec<Binding>) {
        let Some((atom, rest)) = atoms.split_first() else {
            self.budget = self.budget.saturating_sub(1);
            out.push(binding.clone());
            return;
        };
        if self.budget == 0 {
            return;
        }
        for edge in self.candidates(atom, binding) {
            let mut added = Vec::new();
            let mut ok = true;
            for (role, term) in &atom.slots {
                let value = self.graphs[atom.graph].cell(edge, *role);
                match term {
                    Term::Const(c) => ok = !value.is_empty() && values_equal(value, c),
                    Term::Var(v) => match binding.get(v) {
                        Some(b) => ok = !b.is_empty() && !value.is_empty() && values_equal(b, value),
                        None => {
                            binding.insert(v.clone(), value.clone());
                            added.push(v.clone());
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.extend(rest, binding, out);
            }
            for v in added {
                binding.remove(&v);
            }
        }
    }
}

fn values_equal(a: &KgtkValue, b: &KgtkValue) -> bool {
    compare_values(a, b) == Ordering::Equal
}

fn atoms(
    clauses: &[PatternClause],
    spec: &QuerySpec,
    graphs: &[OracleGraph],
    hidden: &mut usize,
) -> Result<Vec<Atom>> {
    let mut out = Vec::new();
    let mut previous: Option<String> = None;
    for clause in clauses {
        let name = clause
            .graph
            .clone()
            .or_else(|| previous.clone())
            .or_else(|| spec.inputs.first().map(|i| i.graph_name()))
            .ok_or_else(|| Error::semantic("no graph for clause"))?;
        previous = Some(name.clone());
        let graph = graphs.iter().position(|g| g.name == name).ok_or_else(|| Error::UnknownGraph {
            name: name.clone(),
            available: graphs.iter().map(|g| g.name.clone()).collect(),
        })?;
        let mut nodes: Vec<(Option<String>, Option<KgtkValue>)> =
            clause.nodes().map(|n| (n.variable.clone(), n.anchor.clone())).collect();
        // A path through an unnamed node still has to meet at one value.
        let last = nodes.len() - 1;
        for (i, n) in nodes.iter_mut().enumerate() {
            if n.0.is_none() && i > 0 && i < last {
                n.0 = Some(format!("%hidden{hidden}"));
                *hidden += 1;
            }
        }
        let push = |slots: &mut Vec<(Role, Term)>, role: Role, node: &(Option<String>, Option<KgtkValue>)| {
            if let Some(v) = &node.0 {
                slots.push((role, Term::Var(v.clone())));
            }
            if let Some(a) = &node.1 {
                slots.push((role, Term::Const(a.clone())));
            }
        };
        if clause.steps.is_empty() {
            let mut slots = Vec::new();
            push(&mut slots, Role::Node1, &nodes[0]);
            out.push(Atom { graph, slots });
        }
        for (i, (rel, _)) in clause.steps.iter().enumerate() {
            let (tail, head) = match rel.direction {
                Direction::Forward => (i, i + 1),
                Direction::Backward => (i + 1, i),
            };
            let mut slots = Vec::new();
            push(&mut slots, Role::Node1, &nodes[tail]);
            if let Some(l) = &rel.label {
                slots.push((Role::Label, Term::Const(l.clone())));
            }
            push(&mut slots, Role::Node2, &nodes[head]);
            if let Some(v) = &rel.variable {
                if graphs[graph].schema.role(Role::Id).is_none() {
                    return Err(Error::semantic(format!("graph {name:?} has no id column for {v:?}")));
                }
                slots.push((Role::Id, Term::Var(v.clone())));
            }
            out.push(Atom { graph, slots });
        }
    }
    Ok(out)
}

fn truth(b: bool) -> KgtkValue {
    KgtkValue::int(if b { 1 } else { 0 })
}

fn is_truthy(v: &KgtkValue) -> bool {
    match v.as_number() {
        Some(n) => n.as_f64() != 0.0,
        None => false,
    }
}

fn text_of(v: &KgtkValue) -> Option<String> {
    match v {
        KgtkValue::Empty => None,
        KgtkValue::Symbol(s) | KgtkValue::String(s) => Some(s.clone()),
        KgtkValue::LangString { text, .. } => Some(text.clone()),
        KgtkValue::Number(n) => Some(n.to_string()),
    }
}

fn to_number(v: &KgtkValue) -> Option<Number> {
    match v {
        KgtkValue::Number(n) => Some(*n),
        other => Number::parse(text_of(other)?.trim()),
    }
}

fn do_cast(v: KgtkValue, ty: CastType) -> KgtkValue {
    match ty {
        CastType::Integer => match to_number(&v) {
            Some(n) => match n.as_i64() {
                Some(i) => KgtkValue::int(i),
                None => {
                    let t = n.as_f64().trunc();
                    if (-9.223_372_036_854_776e18..9.223_372_036_854_776e18).contains(&t) {
                        KgtkValue::int(t as i64)
                    } else {
                        KgtkValue::Empty
                    }
                }
            },
            None => KgtkValue::Empty,
        },
        CastType::Float => to_number(&v).map_or(KgtkValue::Empty, KgtkValue::Number),
        CastType::String => text_of(&v).map_or(KgtkValue::Empty, KgtkValue::String),
    }
}

/// Evaluates `expr`. Variables come from `lookup`; counts range over
/// `group` when one is given.
fn eval(
    expr: &Expression,
    lookup: &dyn Fn(&str) -> Result<KgtkValue>,
    group: Option<&[&Binding]>,
) -> Result<KgtkValue> {
    Ok(match expr {
        Expression::Variable(v) => lookup(v)?,
        Expression::Literal(l) => l.clone(),
        Expression::Compare(op, a, b) => {
            let (a, b) = (eval(a, lookup, group)?, eval(b, lookup, group)?);
            if a.is_empty() || b.is_empty() {
                truth(false)
            } else {
                let o = compare_values(&a, &b);
                truth(match op {
                    CompareOp::Lt => o.is_lt(),
                    CompareOp::Le => o.is_le(),
                    CompareOp::Gt => o.is_gt(),
                    CompareOp::Ge => o.is_ge(),
                    CompareOp::Eq => o.is_eq(),
                    CompareOp::Ne => o.is_ne(),
                })
            }
        }
        Expression::And(a, b) => truth(is_truthy(&eval(a, lookup, group)?) && is_truthy(&eval(b, lookup, group)?)),
        Expression::Or(a, b) => truth(is_truthy(&eval(a, lookup, group)?) || is_truthy(&eval(b, lookup, group)?)),
        Expression::Not(a) => truth(!is_truthy(&eval(a, lookup, group)?)),
        Expression::Cast(a, t) => do_cast(eval(a, lookup, group)?, *t),
        Expression::Count { distinct, arg } => {
            let rows = group.ok_or_else(|| Error::semantic("count outside an aggregate"))?;
            let mut seen = BTreeSet::new();
            let mut n = 0i64;
            for b in rows {
                let v = eval(arg, &|name| binding_lookup(b, name), None)?;
                if v.is_empty() {
                    continue;
                }
                if !*distinct || seen.insert(v) {
                    n += 1;
                }
            }
            KgtkValue::int(n)
        }
    })
}

fn binding_lookup(b: &Binding, name: &str) -> Result<KgtkValue> {
    b.get(name)
        .cloned()
        .ok_or_else(|| Error::semantic(format!("unbound variable {name:?}")))
}

fn has_count(e: &Expression) -> bool {
    match e {
        Expression::Count { .. } => true,
        Expression::Variable(_) | Expression::Literal(_) => false,
        Expression::Compare(_, a, b) | Expression::And(a, b) | Expression::Or(a, b) => has_count(a) || has_count(b),
        Expression::Not(a) | Expression::Cast(a, _) => has_count(a),
    }
}

fn variable_outside_count(e: &Expression) -> bool {
    match e {
        Expression::Count { .. } | Expression::Literal(_) => false,
        Expression::Variable(_) => true,
        Expression::Compare(_, a, b) | Expression::And(a, b) | Expression::Or(a, b) => {
            variable_outside_count(a) || variable_outside_count(b)
        }
        Expression::Not(a) | Expression::Cast(a, _) => variable_outside_count(a),
    }
}

/// How an order-by key finds its value for an output row.
enum KeySource {
    Item(usize),
    Expr(Expression),
}

/// Message of the error [`oracle_query_bounded`] returns when a query
/// enumerates more bindings than allowed.
pub const BUDGET_EXCEEDED: &str = "oracle binding budget exceeded";

/// Evaluates `spec` over `graphs` by exhaustive enumeration.
pub fn oracle_query(spec: &QuerySpec, graphs: &[OracleGraph]) -> Result<OracleResult> {
    oracle_query_bounded(spec, graphs, usize::MAX)
}

/// [`oracle_query`] that fails once more than `max_bindings` pattern
/// bindings have been enumerated in total.
pub fn oracle_query_bounded(spec: &QuerySpec, graphs: &[OracleGraph], max_bindings: usize) -> Result<OracleResult> {
    let mut hidden = 0;
    let mandatory = atoms(&spec.match_clauses, spec, graphs, &mut hidden)?;
    let mut matcher = Matcher {
        graphs,
        lookup: HashMap::new(),
        budget: max_bindings,
    };
    let exceeded = |m: &Matcher| if m.budget == 0 { Err(Error::Execution(BUDGET_EXCEEDED.into())) } else { Ok(()) };
    let mut rows = Vec::new();
    matcher.extend(&mandatory, &mut Binding::new(), &mut rows);
    exceeded(&matcher)?;

    for group in &spec.optional_clauses {
        // An optional group inherits its first graph like any other clause
        // list: from its own prefixes, else the first input.
        let group_atoms = atoms(group, spec, graphs, &mut hidden)?;
        let mut group_vars: Vec<String> = Vec::new();
        for a in &group_atoms {
            for (_, t) in &a.slots {
                if let Term::Var(v) = t {
                    if !group_vars.contains(v) {
                        group_vars.push(v.clone());
                    }
                }
            }
        }
        let mut next = Vec::new();
        for mut row in rows {
            let mut found = Vec::new();
            matcher.extend(&group_atoms, &mut row, &mut found);
            exceeded(&matcher)?;
            if found.is_empty() {
                for v in &group_vars {
                    row.entry(v.clone()).or_insert(KgtkValue::Empty);
                }
                next.push(row);
            } else {
                next.extend(found);
            }
        }
        rows = next;
    }

    if let Some(w) = &spec.where_clause {
        if has_count(w) {
            return Err(Error::semantic("count is not allowed in where"));
        }
        let mut kept = Vec::new();
        for b in rows {
            if is_truthy(&eval(w, &|n| binding_lookup(&b, n), None)?) {
                kept.push(b);
            }
        }
        rows = kept;
    }

    let items = &spec.returns.items;
    let aliases: Vec<&str> = items.iter().map(|i| i.alias.as_str()).collect();
    let aggregate = items.iter().any(|i| has_count(&i.expr));
    if aggregate && items.iter().any(|i| has_count(&i.expr) && variable_outside_count(&i.expr)) {
        return Err(Error::semantic("aggregate item uses a variable outside count"));
    }

    // Each output row keeps the binding it came from, if it has exactly one.
    let mut out: Vec<(Vec<KgtkValue>, Option<Binding>)> = Vec::new();
    if aggregate {
        let mut groups: Vec<(Vec<KgtkValue>, Vec<&Binding>)> = Vec::new();
        let mut index: HashMap<Vec<KgtkValue>, usize> = HashMap::new();
        for b in &rows {
            let key = items
                .iter()
                .filter(|i| !has_count(&i.expr))
                .map(|i| eval(&i.expr, &|n| binding_lookup(b, n), None))
                .collect::<Result<Vec<_>>>()?;
            match index.get(&key) {
                Some(g) => groups[*g].1.push(b),
                None => {
                    index.insert(key.clone(), groups.len());
                    groups.push((key, vec![b]));
                }
            }
        }
        if groups.is_empty() && items.iter().all(|i| has_count(&i.expr)) {
            groups.push((Vec::new(), Vec::new()));
        }
        let no_vars = |n: &str| -> Result<KgtkValue> { Err(Error::semantic(format!("variable {n:?} outside count"))) };
        for (key, members) in groups {
            let mut keys = key.into_iter();
            let mut row = Vec::new();
            for i in items {
                row.push(if has_count(&i.expr) {
                    eval(&i.expr, &no_vars, Some(&members))?
                } else {
                    keys.next().expect("one key per plain item")
                });
            }
            out.push((row, None));
        }
    } else {
        for b in rows {
            let row = items
                .iter()
                .map(|i| eval(&i.expr, &|n| binding_lookup(&b, n), None))
                .collect::<Result<Vec<_>>>()?;
            out.push((row, Some(b)));
        }
    }

    let mut sources = Vec::new();
    let mut needs_binding = false;
    for key in &spec.order_by {
        let alias_var = matches!(&key.expr, Expression::Variable(v) if aliases.contains(&v.as_str()));
        if alias_var {
            if let Expression::Variable(v) = &key.expr {
                sources.push(KeySource::Item(aliases.iter().position(|a| a == v).expect("alias")));
            }
            continue;
        }
        if let Some(i) = items.iter().position(|i| i.expr == key.expr) {
            sources.push(KeySource::Item(i));
            continue;
        }
        if has_count(&key.expr) {
            return Err(Error::semantic("order-by uses count without a matching return item"));
        }
        for v in key.expr.variables() {
            let reachable = aliases.contains(&v) || items.iter().any(|i| i.expr == Expression::var(v));
            if !reachable {
                if aggregate {
                    return Err(Error::semantic(format!("order-by variable {v:?} is not grouped")));
                }
                needs_binding = true;
            }
        }
        sources.push(KeySource::Expr(key.expr.clone()));
    }
    if needs_binding && spec.returns.distinct {
        return Err(Error::semantic("distinct order-by needs returned values"));
    }

    if spec.returns.distinct {
        let mut seen = std::collections::HashSet::new();
        out.retain(|(row, _)| seen.insert(row.clone()));
    }

    let mut keyed: Vec<(Vec<KgtkValue>, Vec<KgtkValue>)> = Vec::with_capacity(out.len());
    for (row, binding) in out {
        let lookup = |name: &str| -> Result<KgtkValue> {
            if let Some(p) = aliases.iter().position(|a| *a == name) {
                return Ok(row[p].clone());
            }
            if let Some(p) = items.iter().position(|i| i.expr == Expression::var(name)) {
                return Ok(row[p].clone());
            }
            match &binding {
                Some(b) => binding_lookup(b, name),
                None => Err(Error::semantic(format!("order-by variable {name:?} is not available"))),
            }
        };
        let mut keys = Vec::new();
        for s in &sources {
            keys.push(match s {
                KeySource::Item(i) => row[*i].clone(),
                KeySource::Expr(e) => eval(e, &lookup, None)?,
            });
        }
        keyed.push((keys, row));
    }

    let ordered = !spec.order_by.is_empty();
    let cmp = |a: &[KgtkValue], b: &[KgtkValue]| -> Ordering {
        for ((x, y), key) in a.iter().zip(b).zip(&spec.order_by) {
            let o = compare_values(x, y);
            let o = if key.descending { o.reverse() } else { o };
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    };
    if ordered {
        keyed.sort_by(|a, b| cmp(&a.0, &b.0));
    }
    let mut blocks = Vec::with_capacity(keyed.len());
    let mut block = 0;
    for i in 0..keyed.len() {
        if i > 0 && cmp(&keyed[i - 1].0, &keyed[i].0) != Ordering::Equal {
            block += 1;
        }
        blocks.push(block);
    }

    Ok(OracleResult {
        columns: aliases.iter().map(|a| a.to_string()).collect(),
        rows: keyed.into_iter().map(|(_, r)| r).collect(),
        blocks,
        ordered,
        limit: spec.limit,
    })
}
