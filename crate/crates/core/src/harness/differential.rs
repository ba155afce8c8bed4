//! Engine-versus-oracle comparison over random cases.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cache::GraphCache;
use crate::error::{Error, Result};
use crate::exec::{execute_to_vec, ExecOptions, JoinStrategy, Row};
use crate::plan::{bind_graphs, compile, PlanOptions};
use crate::query::QuerySpec;

use super::oracle::{load_inputs, oracle_query_bounded, BUDGET_EXCEEDED};
use super::random::random_case;

/// Imports the inputs of `spec`, compiles it, builds the indexes it needs
/// and runs it.
pub fn run_engine(
    cache: &mut GraphCache,
    spec: &QuerySpec,
    plan: &PlanOptions,
    exec: &ExecOptions,
) -> Result<(Vec<String>, Vec<Row>)> {
    for input in &spec.inputs {
        cache.import_graph(Path::new(&input.path), input.alias.as_deref())?;
    }
    let bound = bind_graphs(spec, cache)?;
    let compiled = compile(&bound, plan)?;
    for (graph, column) in compiled.required_indexes() {
        cache.ensure_index(&graph, &column)?;
    }
    execute_to_vec(&compiled, cache, exec)
}

/// Number of mandatory scans, which is the length of a join order.
pub fn mandatory_scans(spec: &QuerySpec) -> usize {
    spec.match_clauses.iter().map(|c| c.steps.len().max(1)).sum()
}

fn counts(rows: &[Row]) -> HashMap<&Row, usize> {
    let mut m = HashMap::new();
    for r in rows {
        *m.entry(r).or_insert(0) += 1;
    }
    m
}

/// Bindings the oracle may enumerate before a random case is skipped.
pub const ORACLE_BUDGET: usize = 200_000;

/// Engine configurations every case runs under. Join orders are permuted
/// only when `permute` is set, since a bad order over large inputs is a
/// cross product.
pub fn variants(spec: &QuerySpec, seed: u64, permute: bool) -> Vec<(String, PlanOptions, ExecOptions)> {
    let mut out = vec![
        ("default".to_string(), PlanOptions::default(), ExecOptions::default()),
        (
            "no pushdown".to_string(),
            PlanOptions {
                pushdown: false,
                ..PlanOptions::default()
            },
            ExecOptions::default(),
        ),
        (
            "hash joins".to_string(),
            PlanOptions::default(),
            ExecOptions { join: JoinStrategy::Hash },
        ),
        (
            "index joins".to_string(),
            PlanOptions::default(),
            ExecOptions {
                join: JoinStrategy::IndexNestedLoop,
            },
        ),
    ];
    let n = mandatory_scans(spec);
    if permute && n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for k in 0..2 {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            out.push((
                format!("join order {order:?}"),
                PlanOptions {
                    pushdown: k == 0,
                    join_order: Some(order),
                },
                ExecOptions::default(),
            ));
        }
    }
    out
}

/// What a passing case exercised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CaseOutcome {
    /// Rows the oracle expects, or `None` when both sides rejected the query.
    pub rows: Option<usize>,
    pub variants: usize,
    /// The oracle ran out of budget; nothing was compared.
    pub skipped: bool,
}

/// Runs one random case under every variant. `Err` describes the first
/// disagreement.
pub fn check_random_case(seed: u64, dir: &Path) -> std::result::Result<CaseOutcome, String> {
    let case = random_case(seed, dir).map_err(|e| format!("seed {seed}: generator: {e}"))?;
    let fail = |what: String| format!("seed {seed}: {what}\n  query: {}", case.query);
    let spec = case.spec().map_err(|e| fail(format!("assemble: {e}")))?;
    let graphs = load_inputs(&spec).map_err(|e| fail(format!("load: {e}")))?;
    let expected = oracle_query_bounded(&spec, &graphs, ORACLE_BUDGET);
    if matches!(&expected, Err(Error::Execution(m)) if m == BUDGET_EXCEEDED) {
        return Ok(CaseOutcome {
            skipped: true,
            ..CaseOutcome::default()
        });
    }
    let small = graphs.iter().map(|g| g.rows.len()).sum::<usize>() <= 1000;
    let cache_path = dir.join("cache.sqlite3");
    let mut cache = GraphCache::open(&cache_path).map_err(|e| fail(format!("cache: {e}")))?;
    let mut reference: Option<Vec<Row>> = None;
    let variants = variants(&spec, seed, small);
    let outcome = CaseOutcome {
        rows: expected.as_ref().ok().map(|e| e.expected_len()),
        variants: variants.len(),
        skipped: false,
    };
    for (name, plan, exec) in variants {
        let got = run_engine(&mut cache, &spec, &plan, &exec);
        match (&expected, got) {
            (Ok(exp), Ok((columns, rows))) => {
                exp.check(&columns, &rows).map_err(|e| fail(format!("{name}: {e}")))?;
                if spec.limit.is_none() {
                    match &reference {
                        None => reference = Some(rows),
                        Some(r) if counts(r) != counts(&rows) => {
                            return Err(fail(format!("{name}: rows differ from the default plan")))
                        }
                        Some(_) => {}
                    }
                }
            }
            (Err(_), Err(_)) => {}
            (Ok(_), Err(e)) => return Err(fail(format!("{name}: engine failed: {e}"))),
            (Err(e), Ok(_)) => return Err(fail(format!("{name}: engine succeeded, oracle failed: {e}"))),
        }
    }
    Ok(outcome)
}
