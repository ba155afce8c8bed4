//! The outer-join projection law, checked on generated corpora with the
//! spouse query and a variant whose optional group reads first names.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cache::GraphCache;
use crate::exec::{ExecOptions, Row};
use crate::io::read_edges;
use crate::model::Role;
use crate::plan::PlanOptions;
use crate::query::{assemble_query, InputSpec, QueryText};
use crate::value::KgtkValue;

use super::corpus::{generate_corpus, CorpusSpec};
use super::differential::run_engine;
use super::oracle::{load_inputs, oracle_query};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LawOutcome {
    pub rows: usize,
    /// Rows whose optional group did not match.
    pub unmatched: usize,
}

/// Generates a corpus from `seed` in `dir`, runs a spouse-shaped query with
/// and without its optional group and checks that
/// * both agree once projected to the mandatory columns,
/// * the optional column is `Empty` exactly when the spouse has no edge
///   the optional pattern could match, and
/// * the outer-join result equals the oracle's.
pub fn check_optional_law(seed: u64, dir: &Path) -> Result<LawOutcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = CorpusSpec {
        seed,
        persons: rng.gen_range(20..400),
        classes: rng.gen_range(10..40),
        publications: rng.gen_range(0..50),
        noisy_literal_fraction: rng.gen_range(0.0..0.9),
        ..CorpusSpec::default()
    };
    let err = |what: &str, e: crate::error::Error| format!("seed {seed}: {what}: {e}");
    generate_corpus(&spec, dir).map_err(|e| err("generate", e))?;
    let (optional_graph, optional_label) = if rng.gen_bool(0.5) { ("labels", "label") } else { ("items", "P735") };

    let inputs = ["infobox", optional_graph, "p31"]
        .iter()
        .map(|n| InputSpec::new(dir.join(format!("{n}.tsv")).to_string_lossy(), None))
        .collect::<Vec<_>>();
    let match_text = "infobox: (artist)-[:`property:spouse`]->(spouse),
        p31: (spouse)-[]->(:Q5)";
    let optional = format!("{optional_graph}: (spouse)-[:{optional_label}]->(extra)");
    let outer = assemble_query(
        inputs.clone(),
        &QueryText {
            match_text,
            optional: vec![&optional],
            return_text: Some("artist as node1, \"P26\" as label, spouse as node2, extra as `node2;extra`"),
            ..Default::default()
        },
    )
    .map_err(|e| err("assemble", e))?;
    let mandatory = assemble_query(
        inputs,
        &QueryText {
            match_text,
            return_text: Some("artist as node1, \"P26\" as label, spouse as node2"),
            ..Default::default()
        },
    )
    .map_err(|e| err("assemble", e))?;

    let mut cache = GraphCache::open(dir.join("law.sqlite3")).map_err(|e| err("cache", e))?;
    let (columns, outer_rows) = run_engine(&mut cache, &outer, &PlanOptions::default(), &ExecOptions::default())
        .map_err(|e| err("outer query", e))?;
    let (_, mandatory_rows) = run_engine(&mut cache, &mandatory, &PlanOptions::default(), &ExecOptions::default())
        .map_err(|e| err("mandatory query", e))?;

    let projected: BTreeSet<&[KgtkValue]> = outer_rows.iter().map(|r| &r[..3]).collect();
    let plain: BTreeSet<&[KgtkValue]> = mandatory_rows.iter().map(Row::as_slice).collect();
    if projected != plain {
        return Err(format!(
            "seed {seed}: projections differ: {} outer vs {} mandatory",
            projected.len(),
            plain.len()
        ));
    }

    let targets = optional_targets(&dir.join(format!("{optional_graph}.tsv")), optional_label)
        .map_err(|e| err("read optional graph", e))?;
    let mut unmatched = 0;
    for row in &outer_rows {
        let (spouse, extra) = (&row[2], &row[3]);
        match targets.get(spouse) {
            None if *extra == KgtkValue::Empty => unmatched += 1,
            Some(values) if values.contains(extra) => {}
            _ => return Err(format!("seed {seed}: spouse {spouse} has optional value {extra:?}")),
        }
    }
    let matched_spouses: HashSet<&KgtkValue> = outer_rows.iter().map(|r| &r[2]).filter(|s| targets.contains_key(*s)).collect();
    for s in matched_spouses {
        let seen: HashSet<&KgtkValue> = outer_rows.iter().filter(|r| &r[2] == s).map(|r| &r[3]).collect();
        if seen.len() != targets[s].len() {
            return Err(format!("seed {seed}: spouse {s} is missing optional values"));
        }
    }

    let graphs = load_inputs(&outer).map_err(|e| err("load", e))?;
    let expected = oracle_query(&outer, &graphs).map_err(|e| err("oracle", e))?;
    expected
        .check(&columns, &outer_rows)
        .map_err(|e| format!("seed {seed}: oracle: {e}"))?;
    Ok(LawOutcome {
        rows: outer_rows.len(),
        unmatched,
    })
}

/// Non-empty node2 values per node1 over edges carrying `label`.
fn optional_targets(path: &Path, label: &str) -> crate::error::Result<HashMap<KgtkValue, HashSet<KgtkValue>>> {
    let (schema, rows) = read_edges(path, true)?;
    let want = KgtkValue::symbol(label);
    let mut out: HashMap<KgtkValue, HashSet<KgtkValue>> = HashMap::new();
    for row in rows {
        let row = row?;
        if *row.get(&schema, Role::Label) == want && *row.get(&schema, Role::Node2) != KgtkValue::Empty {
            out.entry(row.get(&schema, Role::Node1).clone())
                .or_default()
                .insert(row.get(&schema, Role::Node2).clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_holds_with_unmatched_rows() {
        let mut unmatched = 0;
        for seed in 0..4 {
            let dir = tempfile::tempdir().unwrap();
            unmatched += check_optional_law(seed, dir.path()).unwrap().unmatched;
        }
        assert!(unmatched > 0);
    }
}
