//! Compiles a [`QuerySpec`] into a tree of relational operators.

mod explain;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;

use crate::cache::{GraphCache, GraphDescriptor};
use crate::error::{Error, Result};
use crate::model::Role;
use crate::query::{CompareOp, Direction, Expression, InputSpec, NodePattern, PatternClause, QuerySpec, ReturnItem};
use crate::value::KgtkValue;

pub use explain::Raw;

/// One column of one scan, printed as `s3.node2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Field {
    pub scan: usize,
    pub role: Role,
}

impl Field {
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}.{}", self.scan, self.role)
    }
}

/// Variable to scan-column bindings. The first field listed for a variable
/// is its representative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BindingMap {
    entries: IndexMap<String, Vec<Field>>,
}

impl BindingMap {
    fn add(&mut self, variable: &str, field: Field) {
        let fields = self.entries.entry(variable.to_string()).or_default();
        if !fields.contains(&field) {
            fields.push(field);
        }
    }

    pub fn fields(&self, variable: &str) -> &[Field] {
        self.entries.get(variable).map_or(&[], Vec::as_slice)
    }

    pub fn representative(&self, variable: &str) -> Option<Field> {
        self.fields(variable).first().copied()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// First field of `variable` among `available` columns.
    fn resolve(&self, variable: &str, available: &[String]) -> Option<Field> {
        self.fields(variable)
            .iter()
            .copied()
            .find(|f| available.iter().any(|c| *c == f.name()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanNode {
    pub scan: usize,
    pub graph: String,
    /// Output columns, in order.
    pub columns: Vec<Role>,
    /// Columns that must equal a constant.
    pub constraints: Vec<(Role, KgtkValue)>,
    /// Roles this graph's schema lacks; they read as `Empty`.
    pub absent: Vec<Role>,
    pub estimate: u64,
}

impl ScanNode {
    pub fn field(&self, role: Role) -> Field {
        Field { scan: self.scan, role }
    }
}

/// Relational operator tree. Expressions reference the column names of the
/// operator's input: scan fields below the return list, aliases above it.
#[derive(Clone, Debug, PartialEq)]
pub enum LogicalPlan {
    Scan(ScanNode),
    Filter {
        input: Box<LogicalPlan>,
        predicate: Expression,
    },
    /// Inner join; an empty `on` list is a cross join.
    Join {
        left: Box<LogicalPlan>,
        right: Box<LogicalPlan>,
        on: Vec<(Field, Field)>,
    },
    LeftOuterJoin {
        left: Box<LogicalPlan>,
        right: Box<LogicalPlan>,
        on: Vec<(Field, Field)>,
    },
    Project {
        input: Box<LogicalPlan>,
        items: Vec<(String, Expression)>,
    },
    /// Items without `count` are the group keys.
    Aggregate {
        input: Box<LogicalPlan>,
        items: Vec<(String, Expression)>,
    },
    Distinct {
        input: Box<LogicalPlan>,
    },
    Sort {
        input: Box<LogicalPlan>,
        keys: Vec<(Expression, bool)>,
    },
    Limit {
        input: Box<LogicalPlan>,
        count: u64,
    },
}

impl LogicalPlan {
    /// Output column names.
    pub fn columns(&self) -> Vec<String> {
        match self {
            LogicalPlan::Scan(s) => s.columns.iter().map(|r| s.field(*r).name()).collect(),
            LogicalPlan::Filter { input, .. }
            | LogicalPlan::Distinct { input }
            | LogicalPlan::Sort { input, .. }
            | LogicalPlan::Limit { input, .. } => input.columns(),
            LogicalPlan::Join { left, right, .. } | LogicalPlan::LeftOuterJoin { left, right, .. } => {
                let mut c = left.columns();
                c.extend(right.columns());
                c
            }
            LogicalPlan::Project { items, .. } | LogicalPlan::Aggregate { items, .. } => {
                items.iter().map(|(a, _)| a.clone()).collect()
            }
        }
    }

    pub fn children(&self) -> Vec<&LogicalPlan> {
        match self {
            LogicalPlan::Scan(_) => vec![],
            LogicalPlan::Filter { input, .. }
            | LogicalPlan::Distinct { input }
            | LogicalPlan::Sort { input, .. }
            | LogicalPlan::Limit { input, .. }
            | LogicalPlan::Project { input, .. }
            | LogicalPlan::Aggregate { input, .. } => vec![input],
            LogicalPlan::Join { left, right, .. } | LogicalPlan::LeftOuterJoin { left, right, .. } => {
                vec![left, right]
            }
        }
    }

    pub fn scans(&self) -> Vec<&ScanNode> {
        let mut out = Vec::new();
        self.collect_scans(&mut out);
        out
    }

    fn collect_scans<'a>(&'a self, out: &mut Vec<&'a ScanNode>) {
        match self {
            LogicalPlan::Scan(s) => out.push(s),
            other => other.children().into_iter().for_each(|c| c.collect_scans(out)),
        }
    }

    /// Rough output cardinality, from edge counts and constraint counts only
    /// so the plan never depends on whether indexes exist yet.
    pub fn estimate(&self) -> u64 {
        match self {
            LogicalPlan::Scan(s) => s.estimate,
            LogicalPlan::Filter { input, .. } => (input.estimate() / 2).max(1),
            LogicalPlan::Join { left, right, on } if on.is_empty() => left.estimate().saturating_mul(right.estimate()),
            LogicalPlan::Join { left, right, .. } => left.estimate().max(right.estimate()),
            LogicalPlan::LeftOuterJoin { left, right, .. } => left.estimate().max(right.estimate()),
            LogicalPlan::Limit { input, count } => input.estimate().min(*count),
            LogicalPlan::Project { input, .. }
            | LogicalPlan::Aggregate { input, .. }
            | LogicalPlan::Distinct { input }
            | LogicalPlan::Sort { input, .. } => input.estimate(),
        }
    }
}

/// Knobs used by the differential tests; the defaults are what the CLI runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanOptions {
    /// Turn anchors into scan constraints and push where conjuncts down.
    pub pushdown: bool,
    /// Join order for the mandatory scans, by scan number.
    pub join_order: Option<Vec<usize>>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            pushdown: true,
            join_order: None,
        }
    }
}

/// A query whose graph names resolved against the cache.
#[derive(Clone, Debug)]
pub struct BoundQuery {
    pub spec: QuerySpec,
    pub graphs: BTreeMap<String, GraphDescriptor>,
}

#[derive(Clone, Debug)]
pub struct CompiledQuery {
    pub plan: LogicalPlan,
    pub bindings: BindingMap,
    pub warnings: Vec<String>,
    pub graphs: BTreeMap<String, GraphDescriptor>,
}

impl CompiledQuery {
    pub fn required_indexes(&self) -> BTreeSet<(String, String)> {
        required_indexes(&self.plan)
    }

    pub fn output_columns(&self) -> Vec<String> {
        self.plan.columns()
    }
}

/// Resolves every clause's graph against the query inputs and the cache.
pub fn bind_graphs(spec: &QuerySpec, cache: &GraphCache) -> Result<BoundQuery> {
    let input_names: Vec<String> = spec.inputs.iter().map(InputSpec::graph_name).collect();
    let available = || {
        if input_names.is_empty() {
            cache.graphs().map(|d| d.name.clone()).collect()
        } else {
            input_names.clone()
        }
    };
    let mut spec = spec.clone();
    let mut graphs = BTreeMap::new();
    let default = input_names.first().cloned();
    let clauses = spec.match_clauses.iter_mut().chain(spec.optional_clauses.iter_mut().flatten());
    for clause in clauses {
        if clause.graph.is_none() {
            clause.graph = default.clone();
        }
        let name = clause.graph.clone().ok_or_else(|| Error::UnknownGraph {
            name: String::new(),
            available: available(),
        })?;
        let known = input_names.is_empty() || input_names.contains(&name);
        match cache.descriptor(&name) {
            Some(d) if known => {
                graphs.insert(name, d.clone());
            }
            _ => {
                return Err(Error::UnknownGraph {
                    name,
                    available: available(),
                })
            }
        }
    }
    crate::query::check_query(&spec)?;
    Ok(BoundQuery { spec, graphs })
}

/// Every column used by a pushed-down constant or a join, per graph.
pub fn required_indexes(plan: &LogicalPlan) -> BTreeSet<(String, String)> {
    let scans = plan.scans();
    let graph_of = |scan: usize| scans.iter().find(|s| s.scan == scan).copied();
    let mut out = BTreeSet::new();
    let mut add = |scan: &ScanNode, role: Role| {
        if !scan.absent.contains(&role) {
            out.insert((scan.graph.clone(), role.column_name().to_string()));
        }
    };
    for s in &scans {
        for (role, _) in &s.constraints {
            add(s, *role);
        }
    }
    let mut stack = vec![plan];
    while let Some(node) = stack.pop() {
        if let LogicalPlan::Join { on, .. } | LogicalPlan::LeftOuterJoin { on, .. } = node {
            for (a, b) in on {
                for f in [a, b] {
                    if let Some(s) = graph_of(f.scan) {
                        add(s, f.role);
                    }
                }
            }
        }
        stack.extend(node.children());
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Occurrence {
    Var(String),
    Const(KgtkValue),
}

#[derive(Clone, Debug)]
struct ScanDraft {
    scan: usize,
    graph: String,
    occurrences: Vec<(Role, Occurrence)>,
}

impl ScanDraft {
    fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for (_, o) in &self.occurrences {
            if let Occurrence::Var(v) = o {
                if !out.contains(&v.as_str()) {
                    out.push(v.as_str());
                }
            }
        }
        out
    }

    fn constant_count(&self) -> usize {
        self.occurrences.iter().filter(|(_, o)| matches!(o, Occurrence::Const(_))).count()
    }
}

struct Compiler<'a> {
    graphs: &'a BTreeMap<String, GraphDescriptor>,
    options: &'a PlanOptions,
    bindings: BindingMap,
    warnings: Vec<String>,
    anon: usize,
}

/// Compiles a bound query.
pub fn compile(bound: &BoundQuery, options: &PlanOptions) -> Result<CompiledQuery> {
    let mut c = Compiler {
        graphs: &bound.graphs,
        options,
        bindings: BindingMap::default(),
        warnings: Vec::new(),
        anon: 0,
    };
    let spec = &bound.spec;

    let mut next_scan = 0;
    let mandatory = c.drafts(&spec.match_clauses, &mut next_scan)?;
    let groups = spec
        .optional_clauses
        .iter()
        .map(|g| c.drafts(g, &mut next_scan))
        .collect::<Result<Vec<_>>>()?;
    for d in mandatory.iter().chain(groups.iter().flatten()) {
        for (role, o) in &d.occurrences {
            if let Occurrence::Var(v) = o {
                c.bindings.add(v, Field { scan: d.scan, role: *role });
            }
        }
    }

    let mandatory_vars: BTreeSet<&str> = mandatory.iter().flat_map(|d| d.variables()).collect();
    let mut pending: Vec<Expression> = Vec::new();
    let mut top: Vec<Expression> = Vec::new();
    if let Some(w) = &spec.where_clause {
        for conjunct in w.conjuncts() {
            let local = conjunct.variables().iter().all(|v| mandatory_vars.contains(v));
            if options.pushdown && local {
                pending.push(conjunct.clone());
            } else {
                top.push(conjunct.clone());
            }
        }
    }

    let order = match &options.join_order {
        Some(order) => {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..mandatory.len()).collect::<Vec<_>>() {
                return Err(Error::semantic(format!(
                    "join order {order:?} is not a permutation of 0..{}",
                    mandatory.len()
                )));
            }
            order.clone()
        }
        None => c.greedy_order(&mandatory),
    };
    let mut plan = c.join_scans(order.iter().map(|i| &mandatory[*i]), &mut pending)?;
    // Constant conjuncts that matched no scan, and anything left over.
    top.splice(0..0, pending);

    for group in &groups {
        let order = c.greedy_order(group);
        let right = c.join_scans(order.iter().map(|i| &group[*i]), &mut Vec::new())?;
        let on = c.join_pairs(&plan, &right);
        plan = LogicalPlan::LeftOuterJoin {
            left: Box::new(plan),
            right: Box::new(right),
            on,
        };
    }
    if !top.is_empty() {
        plan = c.filter(plan, &top);
    }

    let plan = c.compile_return(spec, plan)?;
    Ok(CompiledQuery {
        plan,
        bindings: c.bindings,
        warnings: c.warnings,
        graphs: bound.graphs.clone(),
    })
}

impl Compiler<'_> {
    fn drafts(&mut self, clauses: &[PatternClause], next_scan: &mut usize) -> Result<Vec<ScanDraft>> {
        let mut out = Vec::new();
        for clause in clauses {
            let graph = clause.graph.clone().ok_or_else(|| Error::semantic("pattern clause has no graph"))?;
            let desc = self.graphs.get(&graph).ok_or_else(|| Error::UnknownGraph {
                name: graph.clone(),
                available: self.graphs.keys().cloned().collect(),
            })?;
            // Interior nodes join the two relations beside them, so an
            // unnamed one gets a hidden variable.
            let mut nodes: Vec<NodePattern> = clause.nodes().cloned().collect();
            let last = nodes.len() - 1;
            for (i, n) in nodes.iter_mut().enumerate() {
                if n.variable.is_none() && i > 0 && i < last {
                    n.variable = Some(format!("#anon{}", self.anon));
                    self.anon += 1;
                }
            }
            let node_occ = |n: &NodePattern, role: Role, occ: &mut Vec<(Role, Occurrence)>| {
                if let Some(v) = &n.variable {
                    occ.push((role, Occurrence::Var(v.clone())));
                }
                if let Some(a) = &n.anchor {
                    occ.push((role, Occurrence::Const(a.clone())));
                }
            };
            if clause.steps.is_empty() {
                let mut occ = Vec::new();
                node_occ(&nodes[0], Role::Node1, &mut occ);
                out.push(ScanDraft {
                    scan: *next_scan,
                    graph: graph.clone(),
                    occurrences: occ,
                });
                *next_scan += 1;
            }
            for (i, (rel, _)) in clause.steps.iter().enumerate() {
                let (from, to) = match rel.direction {
                    Direction::Forward => (&nodes[i], &nodes[i + 1]),
                    Direction::Backward => (&nodes[i + 1], &nodes[i]),
                };
                let mut occ = Vec::new();
                node_occ(from, Role::Node1, &mut occ);
                if let Some(l) = &rel.label {
                    occ.push((Role::Label, Occurrence::Const(l.clone())));
                }
                node_occ(to, Role::Node2, &mut occ);
                if let Some(v) = &rel.variable {
                    if desc.schema.role(Role::Id).is_none() {
                        return Err(Error::semantic(format!(
                            "relation variable {v:?} needs an id column, which graph {graph:?} lacks"
                        )));
                    }
                    occ.push((Role::Id, Occurrence::Var(v.clone())));
                }
                out.push(ScanDraft {
                    scan: *next_scan,
                    graph: graph.clone(),
                    occurrences: occ,
                });
                *next_scan += 1;
            }
        }
        Ok(out)
    }

    fn scan_estimate(&self, d: &ScanDraft) -> u64 {
        let edges = self.graphs[&d.graph].edge_count;
        let divisor = 10u64.saturating_pow(d.constant_count() as u32);
        (edges / divisor).max(1)
    }

    /// Most constants first, then smallest estimate, then scan number; each
    /// later scan must share a variable with those before it when one can.
    fn greedy_order(&mut self, drafts: &[ScanDraft]) -> Vec<usize> {
        let key = |i: usize| (std::cmp::Reverse(drafts[i].constant_count()), self.scan_estimate(&drafts[i]), i);
        let mut remaining: Vec<usize> = (0..drafts.len()).collect();
        let mut order = Vec::new();
        let mut bound: BTreeSet<&str> = BTreeSet::new();
        while !remaining.is_empty() {
            let connected: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|i| drafts[*i].variables().iter().any(|v| bound.contains(v)))
                .collect();
            let pool = if order.is_empty() || connected.is_empty() { &remaining } else { &connected };
            let best = *pool.iter().min_by_key(|i| key(**i)).expect("non-empty pool");
            remaining.retain(|i| *i != best);
            bound.extend(drafts[best].variables());
            order.push(best);
        }
        order
    }

    fn scan_node(&self, d: &ScanDraft) -> (LogicalPlan, Vec<Expression>) {
        let desc = &self.graphs[&d.graph];
        let mut columns = Vec::new();
        let mut constraints = Vec::new();
        let mut filters = Vec::new();
        let mut first_role: BTreeMap<&str, Role> = BTreeMap::new();
        for (role, occ) in &d.occurrences {
            match occ {
                Occurrence::Var(v) => {
                    if !columns.contains(role) {
                        columns.push(*role);
                    }
                    match first_role.get(v.as_str()) {
                        Some(r) if r != role => filters.push(Expression::compare(
                            CompareOp::Eq,
                            Expression::var(Field { scan: d.scan, role: *r }.name()),
                            Expression::var(Field { scan: d.scan, role: *role }.name()),
                        )),
                        Some(_) => {}
                        None => {
                            first_role.insert(v, *role);
                        }
                    }
                }
                Occurrence::Const(value) => {
                    if self.options.pushdown {
                        constraints.push((*role, value.clone()));
                    } else {
                        if !columns.contains(role) {
                            columns.push(*role);
                        }
                        filters.push(Expression::compare(
                            CompareOp::Eq,
                            Expression::var(Field { scan: d.scan, role: *role }.name()),
                            Expression::Literal(value.clone()),
                        ));
                    }
                }
            }
        }
        let absent = [Role::Node1, Role::Label, Role::Node2, Role::Id]
            .into_iter()
            .filter(|r| desc.schema.role(*r).is_none())
            .collect();
        let node = ScanNode {
            scan: d.scan,
            graph: d.graph.clone(),
            columns,
            constraints,
            absent,
            estimate: self.scan_estimate(d),
        };
        (LogicalPlan::Scan(node), filters)
    }

    fn rewrite(&self, expr: &Expression, available: &[String]) -> Expression {
        expr.map_variables(&mut |v| match self.bindings.resolve(v, available) {
            Some(f) => Expression::var(f.name()),
            None => Expression::var(v),
        })
    }

    fn filter(&self, plan: LogicalPlan, conjuncts: &[Expression]) -> LogicalPlan {
        let available = plan.columns();
        let predicate = conjuncts
            .iter()
            .map(|c| self.rewrite(c, &available))
            .reduce(|a, b| Expression::And(Box::new(a), Box::new(b)))
            .expect("at least one conjunct");
        LogicalPlan::Filter {
            input: Box::new(plan),
            predicate,
        }
    }

    fn variables_of(&self, plan: &LogicalPlan) -> BTreeSet<String> {
        let cols = plan.columns();
        self.bindings
            .variables()
            .filter(|v| self.bindings.resolve(v, &cols).is_some())
            .map(str::to_string)
            .collect()
    }

    fn join_pairs(&self, left: &LogicalPlan, right: &LogicalPlan) -> Vec<(Field, Field)> {
        let (lc, rc) = (left.columns(), right.columns());
        let mut on = Vec::new();
        for v in self.bindings.variables() {
            if let (Some(a), Some(b)) = (self.bindings.resolve(v, &lc), self.bindings.resolve(v, &rc)) {
                on.push((a, b));
            }
        }
        on
    }

    /// Joins scans in the given order, placing each pending conjunct at the
    /// lowest point where its variables are all available.
    fn join_scans<'d>(
        &mut self,
        drafts: impl Iterator<Item = &'d ScanDraft>,
        pending: &mut Vec<Expression>,
    ) -> Result<LogicalPlan> {
        let mut plan: Option<LogicalPlan> = None;
        for d in drafts {
            let (mut scan, local) = self.scan_node(d);
            if !local.is_empty() {
                scan = LogicalPlan::Filter {
                    input: Box::new(scan),
                    predicate: local
                        .into_iter()
                        .reduce(|a, b| Expression::And(Box::new(a), Box::new(b)))
                        .expect("non-empty"),
                };
            }
            scan = self.place(scan, pending, plan.is_none());
            plan = Some(match plan {
                None => scan,
                Some(left) => {
                    let on = self.join_pairs(&left, &scan);
                    if on.is_empty() {
                        self.warnings.push(format!(
                            "clause on graph {:?} shares no variable with the clauses before it; planning a cross join",
                            d.graph
                        ));
                    }
                    let joined = LogicalPlan::Join {
                        left: Box::new(left),
                        right: Box::new(scan),
                        on,
                    };
                    self.place(joined, pending, false)
                }
            });
        }
        plan.ok_or_else(|| Error::semantic("empty pattern"))
    }

    fn place(&self, plan: LogicalPlan, pending: &mut Vec<Expression>, first: bool) -> LogicalPlan {
        let vars = self.variables_of(&plan);
        let (ready, rest): (Vec<Expression>, Vec<Expression>) = pending.drain(..).partition(|c| {
            let cv = c.variables();
            if cv.is_empty() {
                first
            } else {
                cv.iter().all(|v| vars.contains(*v))
            }
        });
        *pending = rest;
        if ready.is_empty() {
            plan
        } else {
            self.filter(plan, &ready)
        }
    }

    fn compile_return(&mut self, spec: &QuerySpec, plan: LogicalPlan) -> Result<LogicalPlan> {
        let available = plan.columns();
        let returns = &spec.returns;
        let aggregate = returns.has_aggregate();
        let aliases: Vec<&str> = returns.aliases().collect();
        if aggregate {
            for item in &returns.items {
                if item.expr.contains_count() && !count_args_cover_variables(&item.expr) {
                    return Err(Error::semantic(format!(
                        "return item {:?} mixes count with variables outside it",
                        item.alias
                    )));
                }
            }
        }

        // Order keys over output aliases, plus hidden pass-through columns.
        let mut hidden: Vec<(String, Expression)> = Vec::new();
        let mut keys: Vec<(Expression, bool)> = Vec::new();
        for key in &spec.order_by {
            let expr = match returns.items.iter().find(|i| i.expr == key.expr) {
                Some(item) if !matches!(&key.expr, Expression::Variable(v) if aliases.contains(&v.as_str())) => {
                    Expression::var(item.alias.clone())
                }
                _ => self.order_expression(&key.expr, returns.items.as_slice(), &aliases, aggregate, &mut hidden)?,
            };
            keys.push((expr, key.descending));
        }
        if returns.distinct && !hidden.is_empty() {
            return Err(Error::semantic(
                "with distinct, order-by may only use returned values; add the sort key to the return list",
            ));
        }

        let items: Vec<(String, Expression)> = returns
            .items
            .iter()
            .map(|i| (i.alias.clone(), self.rewrite(&i.expr, &available)))
            .chain(hidden.iter().map(|(n, e)| (n.clone(), self.rewrite(e, &available))))
            .collect();
        let mut plan = if aggregate {
            LogicalPlan::Aggregate {
                input: Box::new(plan),
                items,
            }
        } else {
            LogicalPlan::Project {
                input: Box::new(plan),
                items,
            }
        };
        if returns.distinct {
            plan = LogicalPlan::Distinct { input: Box::new(plan) };
        }
        if !keys.is_empty() {
            plan = LogicalPlan::Sort {
                input: Box::new(plan),
                keys,
            };
        }
        if let Some(n) = spec.limit {
            plan = LogicalPlan::Limit {
                input: Box::new(plan),
                count: n,
            };
        }
        if !hidden.is_empty() {
            plan = LogicalPlan::Project {
                input: Box::new(plan),
                items: aliases.iter().map(|a| (a.to_string(), Expression::var(*a))).collect(),
            };
        }
        Ok(plan)
    }

    fn order_expression(
        &self,
        expr: &Expression,
        items: &[ReturnItem],
        aliases: &[&str],
        aggregate: bool,
        hidden: &mut Vec<(String, Expression)>,
    ) -> Result<Expression> {
        if expr.contains_count() {
            return Err(Error::semantic(format!(
                "order-by expression {expr} uses count; return it under an alias and order by the alias"
            )));
        }
        let mut failure = None;
        let rewritten = expr.map_variables(&mut |v| {
            if aliases.contains(&v) {
                return Expression::var(v);
            }
            if let Some(item) = items.iter().find(|i| i.expr == Expression::var(v)) {
                return Expression::var(item.alias.clone());
            }
            if aggregate {
                failure.get_or_insert_with(|| {
                    Error::semantic(format!("order-by variable {v:?} is neither returned nor grouped"))
                });
                return Expression::var(v);
            }
            let name = format!("#{v}");
            if !hidden.iter().any(|(n, _)| *n == name) {
                hidden.push((name.clone(), Expression::var(v)));
            }
            Expression::var(name)
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(rewritten),
        }
    }
}

/// True when every variable of an aggregate item sits inside a count.
fn count_args_cover_variables(expr: &Expression) -> bool {
    match expr {
        Expression::Count { .. } | Expression::Literal(_) => true,
        Expression::Variable(_) => false,
        Expression::Compare(_, a, b) | Expression::And(a, b) | Expression::Or(a, b) => {
            count_args_cover_variables(a) && count_args_cover_variables(b)
        }
        Expression::Not(a) | Expression::Cast(a, _) => count_args_cover_variables(a),
    }
}
