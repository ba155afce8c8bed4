//! Push-based interpreter for logical plans.

mod eval;

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use rusqlite::{CachedStatement, Connection};

use crate::cache::{GraphCache, GraphDescriptor};
use crate::error::{Error, Result};
use crate::model::Role;
use crate::plan::{CompiledQuery, Field, LogicalPlan, ScanNode};
use crate::value::{compare_values, parse_value, KgtkValue};

use eval::Bound;
pub use eval::{cast, compare, is_true};

pub type Row = Vec<KgtkValue>;

/// Returned by row consumers; `Stop` ends execution early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Physical join choice. `Auto` picks per join from size estimates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JoinStrategy {
    #[default]
    Auto,
    Hash,
    IndexNestedLoop,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExecOptions {
    pub join: JoinStrategy,
}

/// Runs `query`, handing each output row to `sink`. Returns the output
/// column names.
pub fn execute(
    query: &CompiledQuery,
    cache: &GraphCache,
    options: &ExecOptions,
    sink: &mut dyn FnMut(Row) -> Result<Flow>,
) -> Result<Vec<String>> {
    let conn = cache.connection();
    let op = prepare(&query.plan, cache, options)?;
    op.run(conn, sink)?;
    Ok(query.plan.columns())
}

/// Runs `query` and collects its rows.
pub fn execute_to_vec(query: &CompiledQuery, cache: &GraphCache, options: &ExecOptions) -> Result<(Vec<String>, Vec<Row>)> {
    let mut rows = Vec::new();
    let columns = execute(query, cache, options, &mut |r| {
        rows.push(r);
        Ok(Flow::Continue)
    })?;
    Ok((columns, rows))
}

struct PhysScan {
    sql: String,
    /// Constants bound to the leading `?` parameters.
    params: Vec<String>,
    /// Per output column, its position in the SELECT list, or `None` when the
    /// graph lacks the column.
    outputs: Vec<Option<usize>>,
    /// A constraint no row can meet.
    never: bool,
}

enum Op {
    Scan(PhysScan),
    Filter {
        input: Box<Op>,
        predicate: Bound,
    },
    HashJoin {
        left: Box<Op>,
        right: Box<Op>,
        left_keys: Vec<usize>,
        right_keys: Vec<usize>,
        right_width: usize,
        outer: bool,
    },
    IndexJoin {
        left: Box<Op>,
        probe: PhysScan,
        left_keys: Vec<usize>,
        right_filter: Option<Bound>,
        right_width: usize,
        outer: bool,
    },
    Project {
        input: Box<Op>,
        items: Vec<Bound>,
    },
    Aggregate {
        input: Box<Op>,
        /// Per output item: `Some` for group keys, `None` for aggregate items.
        keys: Vec<Option<Bound>>,
        items: Vec<Bound>,
        counts: Vec<(bool, Bound)>,
    },
    Distinct {
        input: Box<Op>,
    },
    Sort {
        input: Box<Op>,
        keys: Vec<(Bound, bool)>,
    },
    Limit {
        input: Box<Op>,
        count: u64,
    },
}

fn descriptor<'a>(cache: &'a GraphCache, graph: &str) -> Result<&'a GraphDescriptor> {
    cache
        .descriptor(graph)
        .ok_or_else(|| Error::Execution(format!("graph {graph:?} is not in the cache")))
}

/// Builds the SQL for a scan, with extra equality probes appended after
/// the constant constraints.
fn physical_scan(scan: &ScanNode, probes: &[Role], cache: &GraphCache) -> Result<PhysScan> {
    let desc = descriptor(cache, &scan.graph)?;
    let mut never = false;
    let mut select = Vec::new();
    let mut outputs = Vec::new();
    for role in &scan.columns {
        match desc.column_sql(role.column_name()) {
            Some(col) if !scan.absent.contains(role) => {
                outputs.push(Some(select.len()));
                select.push(col);
            }
            _ => outputs.push(None),
        }
    }
    let mut conditions = Vec::new();
    let mut params = Vec::new();
    let mut hinted: Option<(u64, String)> = None;
    let mut consider = |column: &str, desc: &GraphDescriptor| {
        if let (Some(distinct), Some(index)) = (desc.indexes.get(column), desc.index_name(column)) {
            if hinted.as_ref().is_none_or(|(d, _)| distinct > d) {
                hinted = Some((*distinct, index));
            }
        }
    };
    for (role, value) in &scan.constraints {
        match desc.column_sql(role.column_name()) {
            Some(col) if !value.is_empty() && !scan.absent.contains(role) => {
                conditions.push(format!("{col} = ?{}", conditions.len() + 1));
                params.push(value.to_string());
                consider(role.column_name(), desc);
            }
            _ => never = true,
        }
    }
    for role in probes {
        match desc.column_sql(role.column_name()) {
            Some(col) if !scan.absent.contains(role) => {
                conditions.push(format!("{col} = ?{}", conditions.len() + 1));
                consider(role.column_name(), desc);
            }
            _ => never = true,
        }
    }
    let mut sql = format!(
        "SELECT {} FROM {}",
        if select.is_empty() { "1".to_string() } else { select.join(", ") },
        desc.table
    );
    if let Some((_, index)) = hinted {
        sql.push_str(&format!(" INDEXED BY {index}"));
    }
    if !conditions.is_empty() {
        sql.push_str(" WHERE ");
        sql.push_str(&conditions.join(" AND "));
    }
    Ok(PhysScan {
        sql,
        params,
        outputs,
        never,
    })
}

fn positions(fields: impl Iterator<Item = Field>, columns: &[String]) -> Result<Vec<usize>> {
    fields
        .map(|f| {
            let name = f.name();
            columns
                .iter()
                .position(|c| *c == name)
                .ok_or_else(|| Error::Execution(format!("join column {name} is not produced below the join")))
        })
        .collect()
}

fn bind_plain(expr: &crate::query::Expression, columns: &[String]) -> Result<Bound> {
    Bound::bind(expr, columns, &mut Vec::new())
}

fn prepare(plan: &LogicalPlan, cache: &GraphCache, options: &ExecOptions) -> Result<Op> {
    Ok(match plan {
        LogicalPlan::Scan(s) => Op::Scan(physical_scan(s, &[], cache)?),
        LogicalPlan::Filter { input, predicate } => Op::Filter {
            predicate: bind_plain(predicate, &input.columns())?,
            input: Box::new(prepare(input, cache, options)?),
        },
        LogicalPlan::Join { left, right, on } | LogicalPlan::LeftOuterJoin { left, right, on } => {
            let outer = matches!(plan, LogicalPlan::LeftOuterJoin { .. });
            let left_keys = positions(on.iter().map(|(a, _)| *a), &left.columns())?;
            let right_cols = right.columns();
            let right_width = right_cols.len();
            let (scan, right_filter) = match right.as_ref() {
                LogicalPlan::Scan(s) => (Some(s), None),
                LogicalPlan::Filter { input, predicate } => match input.as_ref() {
                    LogicalPlan::Scan(s) => (Some(s), Some(predicate)),
                    _ => (None, None),
                },
                _ => (None, None),
            };
            let use_index = match (options.join, scan) {
                (_, None) => false,
                _ if on.is_empty() => false,
                (JoinStrategy::Hash, _) => false,
                (JoinStrategy::IndexNestedLoop, _) => true,
                (JoinStrategy::Auto, Some(s)) => left.estimate().saturating_mul(4) < s.estimate,
            };
            if let (true, Some(s)) = (use_index, scan) {
                let probes: Vec<Role> = on.iter().map(|(_, b)| b.role).collect();
                Op::IndexJoin {
                    left: Box::new(prepare(left, cache, options)?),
                    probe: physical_scan(s, &probes, cache)?,
                    left_keys,
                    right_filter: right_filter.map(|p| bind_plain(p, &right_cols)).transpose()?,
                    right_width,
                    outer,
                }
            } else {
                Op::HashJoin {
                    left: Box::new(prepare(left, cache, options)?),
                    right: Box::new(prepare(right, cache, options)?),
                    left_keys,
                    right_keys: positions(on.iter().map(|(_, b)| *b), &right_cols)?,
                    right_width,
                    outer,
                }
            }
        }
        LogicalPlan::Project { input, items } => {
            let cols = input.columns();
            Op::Project {
                items: items.iter().map(|(_, e)| bind_plain(e, &cols)).collect::<Result<_>>()?,
                input: Box::new(prepare(input, cache, options)?),
            }
        }
        LogicalPlan::Aggregate { input, items } => {
            let cols = input.columns();
            let mut counts = Vec::new();
            let mut keys = Vec::new();
            let mut bound = Vec::new();
            for (_, e) in items {
                let b = Bound::bind(e, &cols, &mut counts)?;
                keys.push((!e.contains_count()).then(|| b.clone()));
                bound.push(b);
            }
            Op::Aggregate {
                input: Box::new(prepare(input, cache, options)?),
                keys,
                items: bound,
                counts,
            }
        }
        LogicalPlan::Distinct { input } => Op::Distinct {
            input: Box::new(prepare(input, cache, options)?),
        },
        LogicalPlan::Sort { input, keys } => {
            let cols = input.columns();
            Op::Sort {
                keys: keys
                    .iter()
                    .map(|(e, d)| Ok((bind_plain(e, &cols)?, *d)))
                    .collect::<Result<_>>()?,
                input: Box::new(prepare(input, cache, options)?),
            }
        }
        LogicalPlan::Limit { input, count } => Op::Limit {
            input: Box::new(prepare(input, cache, options)?),
            count: *count,
        },
    })
}

fn decode(cell: &str) -> Result<KgtkValue> {
    parse_value(cell)
}

impl PhysScan {
    fn emit_rows(
        &self,
        stmt: &mut CachedStatement<'_>,
        params: &[&str],
        sink: &mut dyn FnMut(Row) -> Result<Flow>,
    ) -> Result<Flow> {
        let mut rows = stmt.query(rusqlite::params_from_iter(params.iter()))?;
        while let Some(r) = rows.next()? {
            let mut row = Vec::with_capacity(self.outputs.len());
            for out in &self.outputs {
                row.push(match out {
                    Some(i) => decode(r.get_ref(*i)?.as_str().map_err(|e| Error::Execution(e.to_string()))?)?,
                    None => KgtkValue::Empty,
                });
            }
            if sink(row)? == Flow::Stop {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    }
}

impl Op {
    fn run(&self, conn: &Connection, sink: &mut dyn FnMut(Row) -> Result<Flow>) -> Result<Flow> {
        match self {
            Op::Scan(scan) => {
                if scan.never {
                    return Ok(Flow::Continue);
                }
                let mut stmt = conn.prepare_cached(&scan.sql)?;
                let params: Vec<&str> = scan.params.iter().map(String::as_str).collect();
                scan.emit_rows(&mut stmt, &params, sink)
            }
            Op::Filter { input, predicate } => input.run(conn, &mut |row| {
                if predicate.truthy(&row, &[]) {
                    sink(row)
                } else {
                    Ok(Flow::Continue)
                }
            }),
            Op::HashJoin {
                left,
                right,
                left_keys,
                right_keys,
                right_width,
                outer,
            } => {
                let mut table: HashMap<Vec<KgtkValue>, Vec<Row>> = HashMap::new();
                right.run(conn, &mut |row| {
                    let key: Vec<KgtkValue> = right_keys.iter().map(|i| row[*i].clone()).collect();
                    if !key.iter().any(KgtkValue::is_empty) {
                        table.entry(key).or_default().push(row);
                    }
                    Ok(Flow::Continue)
                })?;
                let mut key = Vec::with_capacity(left_keys.len());
                left.run(conn, &mut |row| {
                    key.clear();
                    key.extend(left_keys.iter().map(|i| row[*i].clone()));
                    let matches = if key.iter().any(KgtkValue::is_empty) { None } else { table.get(&key) };
                    match matches {
                        Some(rs) => {
                            for r in rs {
                                let mut out = row.clone();
                                out.extend(r.iter().cloned());
                                if sink(out)? == Flow::Stop {
                                    return Ok(Flow::Stop);
                                }
                            }
                            Ok(Flow::Continue)
                        }
                        None if *outer => {
                            let mut out = row;
                            out.resize(out.len() + right_width, KgtkValue::Empty);
                            sink(out)
                        }
                        None => Ok(Flow::Continue),
                    }
                })
            }
            Op::IndexJoin {
                left,
                probe,
                left_keys,
                right_filter,
                right_width,
                outer,
            } => {
                let mut stmt = conn.prepare_cached(&probe.sql)?;
                let mut params: Vec<String> = Vec::new();
                left.run(conn, &mut |row| {
                    let keyless = left_keys.iter().any(|i| row[*i].is_empty());
                    let mut matched = false;
                    if !probe.never && !keyless {
                        params.clear();
                        params.extend(probe.params.iter().cloned());
                        params.extend(left_keys.iter().map(|i| row[*i].to_string()));
                        let refs: Vec<&str> = params.iter().map(String::as_str).collect();
                        let flow = probe.emit_rows(&mut stmt, &refs, &mut |r| {
                            if let Some(f) = right_filter {
                                if !f.truthy(&r, &[]) {
                                    return Ok(Flow::Continue);
                                }
                            }
                            matched = true;
                            let mut out = row.clone();
                            out.extend(r);
                            sink(out)
                        })?;
                        if flow == Flow::Stop {
                            return Ok(Flow::Stop);
                        }
                    }
                    if !matched && *outer {
                        let mut out = row;
                        out.resize(out.len() + right_width, KgtkValue::Empty);
                        return sink(out);
                    }
                    Ok(Flow::Continue)
                })
            }
            Op::Project { input, items } => input.run(conn, &mut |row| {
                let out: Row = items.iter().map(|b| b.eval(&row, &[]).into_owned()).collect();
                sink(out)
            }),
            Op::Aggregate {
                input,
                keys,
                items,
                counts,
            } => {
                let group_exprs: Vec<&Bound> = keys.iter().flatten().collect();
                let mut groups: IndexMap<Row, Vec<CountState>> = IndexMap::new();
                let fresh = || counts.iter().map(|(d, _)| CountState::new(*d)).collect::<Vec<_>>();
                input.run(conn, &mut |row| {
                    let key: Row = group_exprs.iter().map(|b| b.eval(&row, &[]).into_owned()).collect();
                    let states = groups.entry(key).or_insert_with(fresh);
                    for ((_, arg), state) in counts.iter().zip(states.iter_mut()) {
                        state.add(&arg.eval(&row, &[]));
                    }
                    Ok(Flow::Continue)
                })?;
                if groups.is_empty() && group_exprs.is_empty() {
                    groups.insert(Vec::new(), fresh());
                }
                for (key, states) in groups {
                    let totals: Vec<u64> = states.iter().map(CountState::total).collect();
                    let mut key_values = key.into_iter();
                    let out: Row = keys
                        .iter()
                        .zip(items)
                        .map(|(k, item)| match k {
                            Some(_) => key_values.next().expect("one value per key"),
                            None => item.eval(&[], &totals).into_owned(),
                        })
                        .collect();
                    if sink(out)? == Flow::Stop {
                        return Ok(Flow::Stop);
                    }
                }
                Ok(Flow::Continue)
            }
            Op::Distinct { input } => {
                let mut seen: HashSet<Row> = HashSet::new();
                input.run(conn, &mut |row| {
                    if seen.contains(&row) {
                        Ok(Flow::Continue)
                    } else {
                        seen.insert(row.clone());
                        sink(row)
                    }
                })
            }
            Op::Sort { input, keys } => {
                let mut rows: Vec<(Row, Row)> = Vec::new();
                input.run(conn, &mut |row| {
                    let k: Row = keys.iter().map(|(b, _)| b.eval(&row, &[]).into_owned()).collect();
                    rows.push((k, row));
                    Ok(Flow::Continue)
                })?;
                rows.sort_by(|(a, _), (b, _)| {
                    for (i, (_, desc)) in keys.iter().enumerate() {
                        let o = compare_values(&a[i], &b[i]);
                        let o = if *desc { o.reverse() } else { o };
                        if o.is_ne() {
                            return o;
                        }
                    }
                    std::cmp::Ordering::Equal
                });
                for (_, row) in rows {
                    if sink(row)? == Flow::Stop {
                        return Ok(Flow::Stop);
                    }
                }
                Ok(Flow::Continue)
            }
            Op::Limit { input, count } => {
                if *count == 0 {
                    return Ok(Flow::Continue);
                }
                let mut emitted = 0u64;
                let mut downstream = Flow::Continue;
                input.run(conn, &mut |row| {
                    emitted += 1;
                    downstream = sink(row)?;
                    if downstream == Flow::Stop || emitted >= *count {
                        Ok(Flow::Stop)
                    } else {
                        Ok(Flow::Continue)
                    }
                })?;
                Ok(downstream)
            }
        }
    }
}

enum CountState {
    All(u64),
    Distinct(HashSet<KgtkValue>),
}

impl CountState {
    fn new(distinct: bool) -> Self {
        if distinct {
            CountState::Distinct(HashSet::new())
        } else {
            CountState::All(0)
        }
    }

    fn add(&mut self, v: &KgtkValue) {
        if v.is_empty() {
            return;
        }
        match self {
            CountState::All(n) => *n += 1,
            CountState::Distinct(set) => {
                if !set.contains(v) {
                    set.insert(v.clone());
                }
            }
        }
    }

    fn total(&self) -> u64 {
        match self {
            CountState::All(n) => *n,
            CountState::Distinct(set) => set.len() as u64,
        }
    }
}
