//! Random graphs and queries for differential testing.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::EdgeWriter;
use crate::model::ColumnSchema;
use crate::query::{assemble_query, Expression, InputSpec, QuerySpec, QueryText};
use crate::value::KgtkValue;

/// Query text with owned parts, ready for [`assemble_query`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RandomQuery {
    pub match_text: String,
    pub optional: Vec<String>,
    pub where_text: Option<String>,
    pub return_text: Option<String>,
    pub order_text: Option<String>,
    pub limit: Option<u64>,
}

impl RandomQuery {
    pub fn text(&self) -> QueryText<'_> {
        QueryText {
            match_text: &self.match_text,
            optional: self.optional.iter().map(String::as_str).collect(),
            where_text: self.where_text.as_deref(),
            return_text: self.return_text.as_deref(),
            order_text: self.order_text.as_deref(),
            limit: self.limit,
        }
    }
}

impl fmt::Display for RandomQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "--match '{}'", self.match_text)?;
        for o in &self.optional {
            write!(f, " --opt '{o}'")?;
        }
        if let Some(w) = &self.where_text {
            write!(f, " --where '{w}'")?;
        }
        if let Some(r) = &self.return_text {
            write!(f, " --return '{r}'")?;
        }
        if let Some(o) = &self.order_text {
            write!(f, " --order-by '{o}'")?;
        }
        if let Some(l) = self.limit {
            write!(f, " --limit {l}")?;
        }
        Ok(())
    }
}

/// Shape of a generated graph, kept so queries can use its vocabulary.
#[derive(Clone, Debug)]
pub struct RandomGraph {
    pub name: String,
    pub has_id: bool,
    pub large: bool,
    pub nodes: Vec<KgtkValue>,
    pub labels: Vec<KgtkValue>,
}

/// A generated (graphs, query) pair.
#[derive(Clone, Debug)]
pub struct RandomCase {
    pub graphs: Vec<RandomGraph>,
    pub inputs: Vec<InputSpec>,
    pub query: RandomQuery,
}

impl RandomCase {
    pub fn spec(&self) -> Result<QuerySpec> {
        assemble_query(self.inputs.clone(), &self.query.text())
    }
}

/// Small graphs reuse a handful of literals so that joins on them happen;
/// large graphs keep every value distinct to bound join fan-out.
fn node_value(rng: &mut ChaCha8Rng, i: usize, large: bool) -> KgtkValue {
    let (n, s, w) = if large { (i, i, i) } else { (i % 7, i % 5, i % 4) };
    match i % 9 {
        0 => KgtkValue::int(n as i64),
        1 => KgtkValue::string(format!("s{s}")),
        2 => KgtkValue::lang_string(format!("w{w}"), if rng.gen_bool(0.5) { "en" } else { "de" }),
        _ => KgtkValue::symbol(format!("Q{i}")),
    }
}

/// Writes one random graph. Most graphs are small; about one in twenty
/// approaches ten thousand edges with a proportionally larger vocabulary.
pub fn random_graph(rng: &mut ChaCha8Rng, name: &str, dir: &Path) -> Result<(RandomGraph, InputSpec)> {
    let edges = if rng.gen_bool(0.05) { rng.gen_range(1000..=10_000) } else { rng.gen_range(0..60) };
    let large = edges > 500;
    let node_count = if large { edges / 2 } else { rng.gen_range(3..12) };
    let nodes: Vec<KgtkValue> = (0..node_count).map(|i| node_value(rng, i, large)).collect();
    let labels: Vec<KgtkValue> = (1..=rng.gen_range(1..4)).map(|i| KgtkValue::symbol(format!("P{i}"))).collect();
    let has_id = rng.gen_bool(0.3);
    let mut columns = vec!["node1", "label", "node2"];
    if has_id {
        columns.insert(0, "id");
    }
    if rng.gen_bool(0.2) {
        columns.push("node1;label");
    }
    let schema = ColumnSchema::edges(columns.iter().copied())?;
    let path = dir.join(format!("{name}.tsv"));
    let mut w = EdgeWriter::create(&path, &schema)?;
    for e in 0..edges {
        let mut pick = |empty: f64| -> KgtkValue {
            if rng.gen_bool(empty) {
                KgtkValue::Empty
            } else {
                nodes.choose(rng).expect("nodes").clone()
            }
        };
        // Only node2 may be empty in a well-formed edge.
        let node1 = pick(0.0);
        let node2 = pick(0.05);
        let label = labels.choose(rng).expect("labels").clone();
        let mut row = Vec::with_capacity(columns.len());
        for c in &columns {
            row.push(match *c {
                "id" => KgtkValue::symbol(format!("e{e}")),
                "node1" => node1.clone(),
                "label" => label.clone(),
                "node2" => node2.clone(),
                _ => KgtkValue::string(format!("q{}", e % 3)),
            });
        }
        w.write_row(&row)?;
    }
    w.finish()?;
    let graph = RandomGraph {
        name: name.to_string(),
        has_id,
        large,
        nodes,
        labels,
    };
    Ok((graph, InputSpec::new(path.to_string_lossy().into_owned(), Some(name))))
}

const VARS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

struct QueryGen<'r> {
    rng: &'r mut ChaCha8Rng,
    graphs: &'r [RandomGraph],
    used: Vec<String>,
    rel_vars: usize,
}

impl QueryGen<'_> {
    fn literal(&mut self, g: &RandomGraph) -> String {
        let v = g.nodes.choose(self.rng).expect("nodes").clone();
        Expression::Literal(v).to_string()
    }

    fn var(&mut self, reuse: bool) -> String {
        if reuse && !self.used.is_empty() {
            return self.used.choose(self.rng).expect("used").clone();
        }
        let v = VARS.choose(self.rng).expect("vars").to_string();
        if !self.used.contains(&v) {
            self.used.push(v.clone());
        }
        v
    }

    fn node(&mut self, g: &RandomGraph, reuse: f64) -> String {
        let var = if self.rng.gen_bool(0.85) {
            let r = self.rng.gen_bool(reuse);
            self.var(r)
        } else {
            String::new()
        };
        if self.rng.gen_bool(0.12) {
            format!("({var}:{})", self.literal(g))
        } else {
            format!("({var})")
        }
    }

    /// One clause. `previous` is the graph an unprefixed clause inherits.
    fn clause(&mut self, must_connect: bool, previous: &mut usize) -> String {
        let (gi, prefix) = if self.rng.gen_bool(0.85) {
            let gi = self.rng.gen_range(0..self.graphs.len());
            (gi, format!("{}: ", self.graphs[gi].name))
        } else {
            (*previous, String::new())
        };
        *previous = gi;
        let g = &self.graphs[gi];
        let steps = match self.rng.gen_range(0..10) {
            0 => 0,
            1 | 2 => 2,
            _ => 1,
        };
        let mut text = prefix;
        if (must_connect || g.large) && !self.used.is_empty() {
            // A clause that shares nothing is a cross product; keep those
            // to small graphs.
            let v = self.var(true);
            text.push_str(&format!("({v})"));
        } else {
            text.push_str(&self.node(g, 0.5));
        }
        for _ in 0..steps {
            let mut rel = String::new();
            if g.has_id && self.rng.gen_bool(0.2) {
                rel.push_str(&format!("r{}", self.rel_vars));
                self.used.push(format!("r{}", self.rel_vars));
                self.rel_vars += 1;
            }
            if self.rng.gen_bool(0.6) {
                rel.push(':');
                rel.push_str(&g.labels.choose(self.rng).expect("labels").to_string());
            }
            let forward = self.rng.gen_bool(0.7);
            text.push_str(if forward { "-[" } else { "<-[" });
            text.push_str(&rel);
            text.push_str(if forward { "]->" } else { "]-" });
            text.push_str(&self.node(g, 0.3));
        }
        text
    }

    fn comparison(&mut self) -> String {
        let op = ["<", "<=", ">", ">=", "=", "!="].choose(self.rng).expect("ops");
        let left = self.var(true);
        let right = if self.rng.gen_bool(0.5) {
            self.var(true)
        } else {
            let g = &self.graphs[self.rng.gen_range(0..self.graphs.len())];
            self.literal(g)
        };
        let left = if self.rng.gen_bool(0.1) { format!("cast({left}, integer)") } else { left };
        let base = format!("{left} {op} {right}");
        if self.rng.gen_bool(0.15) {
            format!("not {base}")
        } else {
            base
        }
    }

    fn where_text(&mut self) -> String {
        let mut text = self.comparison();
        for _ in 0..self.rng.gen_range(0..3) {
            let joiner = if self.rng.gen_bool(0.7) { "and" } else { "or" };
            text = format!("{text} {joiner} {}", self.comparison());
        }
        text
    }
}

/// Generates a random query over `graphs`. Every query it returns is
/// expected to compile.
pub fn random_query(rng: &mut ChaCha8Rng, graphs: &[RandomGraph]) -> RandomQuery {
    let mut g = QueryGen {
        rng,
        graphs,
        used: Vec::new(),
        rel_vars: 0,
    };
    let mut previous = 0;
    let mut clauses = vec![g.clause(false, &mut previous)];
    for _ in 0..g.rng.gen_range(0..3) {
        let connect = g.rng.gen_bool(0.9);
        clauses.push(g.clause(connect, &mut previous));
    }
    if g.used.is_empty() {
        let v = g.var(false);
        clauses.push(format!("{}: ({v})-[]->()", graphs[0].name));
    }
    let mut q = RandomQuery {
        match_text: clauses.join(", "),
        ..RandomQuery::default()
    };
    for _ in 0..(if g.rng.gen_bool(0.35) { g.rng.gen_range(1..3) } else { 0 }) {
        let mut previous = 0;
        q.optional.push(g.clause(true, &mut previous));
    }
    if g.rng.gen_bool(0.4) {
        q.where_text = Some(g.where_text());
    }

    let vars = g.used.clone();
    let mut aliases: Vec<String> = Vec::new();
    let mut bare: Vec<String> = Vec::new();
    let aggregate = g.rng.gen_bool(0.3);
    let distinct = g.rng.gen_bool(0.3);
    if g.rng.gen_bool(0.2) && !aggregate {
        aliases = vars.clone();
    } else {
        let mut items = Vec::new();
        let n = g.rng.gen_range(1..=3.min(vars.len()).max(1));
        for (i, v) in vars.choose_multiple(g.rng, n).enumerate() {
            match g.rng.gen_range(0..6) {
                0 => {
                    items.push(format!("cast({v}, string) as o{i}"));
                    aliases.push(format!("o{i}"));
                }
                1 | 2 if !bare.contains(v) && !aliases.contains(v) => {
                    items.push(v.clone());
                    aliases.push(v.clone());
                    bare.push(v.clone());
                }
                _ => {
                    items.push(format!("{v} as o{i}"));
                    aliases.push(format!("o{i}"));
                    bare.push(v.clone());
                }
            }
        }
        if g.rng.gen_bool(0.15) {
            items.push("\"tag\" as lit".into());
            aliases.push("lit".into());
        }
        if aggregate {
            let arg = vars.choose(g.rng).expect("vars").clone();
            let inner = if g.rng.gen_bool(0.4) { format!("count(distinct {arg})") } else { format!("count({arg})") };
            let item = if g.rng.gen_bool(0.2) { format!("cast({inner}, integer)") } else { inner };
            items.push(format!("{item} as n"));
            aliases.push("n".into());
        }
        let d = if distinct { "distinct " } else { "" };
        q.return_text = Some(format!("{d}{}", items.join(", ")));
    }

    if g.rng.gen_bool(0.5) {
        let mut keys = Vec::new();
        for _ in 0..g.rng.gen_range(1..3) {
            // Unreturned variables need a binding per row, which only plain
            // projections keep.
            let key = if !aggregate && !distinct && g.rng.gen_bool(0.3) {
                vars.choose(g.rng).expect("vars").clone()
            } else {
                aliases.choose(g.rng).expect("aliases").clone()
            };
            let dir = if g.rng.gen_bool(0.4) { " desc" } else { "" };
            keys.push(format!("{key}{dir}"));
        }
        q.order_text = Some(keys.join(", "));
    }
    if g.rng.gen_bool(0.3) {
        q.limit = Some(g.rng.gen_range(0..8));
    }
    q
}

/// Graphs plus a query, fully determined by `seed`.
pub fn random_case(seed: u64, dir: &Path) -> Result<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = Vec::new();
    let mut inputs = Vec::new();
    for i in 0..rng.gen_range(1..=3) {
        let (g, input) = random_graph(&mut rng, &format!("g{i}"), dir)?;
        graphs.push(g);
        inputs.push(input);
    }
    let query = random_query(&mut rng, &graphs);
    Ok(RandomCase { graphs, inputs, query })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_queries_assemble() {
        for seed in 0..200 {
            let dir = tempfile::tempdir().unwrap();
            let case = random_case(seed, dir.path()).unwrap();
            if let Err(e) = case.spec() {
                panic!("seed {seed}: {e}\n{}", case.query);
            }
        }
    }

    #[test]
    fn cases_are_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let x = random_case(42, a.path()).unwrap();
        let y = random_case(42, b.path()).unwrap();
        assert_eq!(x.query, y.query);
    }
}
