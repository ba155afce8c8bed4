//! The seven use-case queries, kept in the same layout as their command
//! lines so a side-by-side diff against the originals stays readable.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::ColumnSchema;
use crate::query::{assemble_query, InputSpec, QuerySpec, QueryText};

use super::oracle::{oracle_query, OracleGraph, OracleResult};

#[derive(Clone, Copy, Debug)]
pub struct UseCase {
    pub name: &'static str,
    /// `-i` arguments with their `--as` alias. Bare names refer to corpus
    /// files; `$OUT/...` and `$TEMP/...` to files written by other queries.
    pub inputs: &'static [(&'static str, Option<&'static str>)],
    pub match_text: &'static str,
    pub optional: &'static [&'static str],
    pub where_text: Option<&'static str>,
    pub return_text: &'static str,
    pub order_text: Option<&'static str>,
    pub limit: Option<u64>,
    pub output: Option<&'static str>,
}

pub const FIRST_NAMES: UseCase = UseCase {
    name: "First names",
    inputs: &[("items", None), ("p31", None), ("labels", None)],
    match_text: "
    p31: (person)-[:P31]->(:Q5), # Q5 is person
    items: (person)-[:P735]->(given_name), # P735 is first name
    labels: (given_name)-[:label]->(given_name_label)",
    optional: &[],
    where_text: None,
    return_text: "distinct given_name as node1, count(given_name) as node2,
given_name_label as `node1;label`, \"count_names\" as label",
    order_text: Some("node2 desc"),
    limit: None,
    output: Some("$OUT/given-names.tsv"),
};

pub const CLASS_INSTANCES: UseCase = UseCase {
    name: "Class instances",
    inputs: &[("p31", None), ("p279star", None)],
    match_text: "
    p31: (entity)-[:P31]->(class),
    p279star: (class)-[:P279star]->(super_class)",
    optional: &[],
    where_text: None,
    return_text: "distinct super_class as node1, count(distinct entity) as
    node2, \"entity_count\" as label",
    order_text: Some("node2 desc, node1"),
    limit: None,
    output: Some("$OUT/class.count.tsv.gz"),
};

pub const FILM_INSTANCES: UseCase = UseCase {
    name: "Film instances",
    inputs: &[("p279star", None), ("labels", None), ("$OUT/class.count.tsv.gz", Some("count"))],
    match_text: "
    p279star: (class)-[]->(:Q11424), # Q11424 is film
    count: (class)-[:entity_count]->(count),
    labels: (class)-[:label]->(class_label)",
    optional: &[],
    where_text: None,
    return_text: "class as node1, class_label as `node1;label`, count as node2",
    order_text: Some("cast(count, integer) desc"),
    limit: Some(10),
    output: None,
};

pub const AUTHOR_NETWORK: UseCase = UseCase {
    name: "Author network",
    inputs: &[("p31", None), ("p279star", None), ("items", None), ("time", None), ("labels", None)],
    match_text: "
    p31: (pub)-[:P31]->(class),
    p279star: (class)-[:P279star]->(:Q591041), # node for scientific publication
    items: (pub)-[:P50]->(author1), # P50 is author
    items: (pub)-[:P50]->(author2)",
    optional: &[],
    where_text: Some("author1 > author2"),
    return_text: "distinct author1 as node1, \"Pcoauthor\" as label,
author2 as node2, count(distinct pub) as count_publications",
    order_text: Some("count_publications desc"),
    limit: None,
    output: Some("$TEMP/coauthors.2019.tsv.gz"),
};

/// The original prints `author2 as node1` here although its result header
/// shows `node2`; the alias is corrected.
pub const CANCER_NETWORK: UseCase = UseCase {
    name: "Cancer network",
    inputs: &[("p31", None), ("p279star", None), ("items", None), ("labels", None)],
    match_text: "
    p31: (pub)-[:P31]->(class),
    p279star: (class)-[:P279star]->(:Q591041), # scientific publication
    items: (pub)-[:P50]->(author1),            # P50 is author
    items: (pub)-[:P50]->(author2),
    items: (pub)-[:P921]->(cancer_type),       # P921 is main subject
    p279star: (cancer_type)-[:P279star]->(:Q12078), # Q12078 is cancer
    labels: (author1)-[:label]->(author1_label),
    labels: (author2)-[:label]->(author2_label)",
    optional: &[],
    where_text: Some("author1 > author2"),
    return_text: "
    distinct author1 as node1, \"Pcoauthor\" as label, author2 as node2,
    count(distinct pub) as count_publications,
    author1_label as `node1;label`, author2_label as `node2;label`",
    order_text: Some("count_publications desc"),
    limit: None,
    output: Some("$TEMP/coauthors.cancer.tsv.gz"),
};

pub const ULAN_IDENTIFIERS: UseCase = UseCase {
    name: "ULAN identifiers",
    inputs: &[("items", None), ("external_ids", None), ("labels", None), ("$OUT/ulan.tsv", None)],
    match_text: "
    ulan: (ulan_id)-[]->(),
    # P214 is VIAF ID, P245 is Union List of Artist Names ID
    external_ids: (viaf_id)<-[:P214]-(artist)-[:P245]->(ulan_id),
    labels: (artist)-[]->(artist_label)",
    optional: &[],
    where_text: None,
    return_text: "
    artist as node1, viaf_id as node1;P214, ulan_id as node1;P245,
    artist_label as node1;label",
    order_text: None,
    limit: None,
    output: Some("$OUT/ulan-to-viaf.tsv"),
};

pub const DBPEDIA_SPOUSES: UseCase = UseCase {
    name: "DBpedia spouses",
    inputs: &[("infobox", None), ("p31", None), ("labels", None)],
    match_text: "
    infobox: (artist)-[:`property:spouse`]->(spouse),
    p31: (spouse)-[]->(:Q5)",
    optional: &["labels: (spouse)-[:label]->(spouse_label)"],
    where_text: None,
    return_text: "artist as node1, \"P26\" as label, spouse as node2,
          spouse_label as `node2;label`",
    order_text: None,
    limit: None,
    output: Some("$OUT/spouses.dbpedia.qnodes.tsv"),
};

/// In run order; the film query reads the class-instance output.
pub const USE_CASES: [UseCase; 7] = [
    FIRST_NAMES,
    CLASS_INSTANCES,
    FILM_INSTANCES,
    AUTHOR_NETWORK,
    CANCER_NETWORK,
    ULAN_IDENTIFIERS,
    DBPEDIA_SPOUSES,
];

/// Where `$OUT` and `$TEMP` point, and where bare input names live.
#[derive(Clone, Debug)]
pub struct Layout {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub temp: PathBuf,
}

impl Layout {
    /// Everything in one directory.
    pub fn single(dir: &Path) -> Self {
        Layout {
            corpus: dir.to_path_buf(),
            out: dir.to_path_buf(),
            temp: dir.to_path_buf(),
        }
    }

    pub fn resolve(&self, arg: &str) -> PathBuf {
        if let Some(rest) = arg.strip_prefix("$OUT/") {
            self.out.join(rest)
        } else if let Some(rest) = arg.strip_prefix("$TEMP/") {
            self.temp.join(rest)
        } else {
            self.corpus.join(format!("{arg}.tsv"))
        }
    }
}

impl UseCase {
    pub fn text(&self) -> QueryText<'static> {
        QueryText {
            match_text: self.match_text,
            optional: self.optional.to_vec(),
            where_text: self.where_text,
            return_text: Some(self.return_text),
            order_text: self.order_text,
            limit: self.limit,
        }
    }

    pub fn inputs(&self, layout: &Layout) -> Vec<InputSpec> {
        self.inputs
            .iter()
            .map(|(arg, alias)| InputSpec::new(layout.resolve(arg).to_string_lossy().into_owned(), *alias))
            .collect()
    }

    pub fn spec(&self, layout: &Layout) -> Result<QuerySpec> {
        assemble_query(self.inputs(layout), &self.text())
    }

    pub fn output(&self, layout: &Layout) -> Option<PathBuf> {
        self.output.map(|o| layout.resolve(o))
    }

    /// Command-line arguments for this query, flags in the original order.
    pub fn argv(&self, layout: &Layout) -> Vec<String> {
        let mut args = Vec::new();
        for (input, (_, alias)) in self.inputs(layout).into_iter().zip(self.inputs) {
            args.push("-i".to_string());
            args.push(input.path);
            if let Some(a) = alias {
                args.push("--as".into());
                args.push(a.to_string());
            }
        }
        args.push("--match".into());
        args.push(self.match_text.into());
        for o in self.optional {
            args.push("--opt".into());
            args.push(o.to_string());
        }
        if let Some(w) = self.where_text {
            args.push("--where".into());
            args.push(w.into());
        }
        args.push("--return".into());
        args.push(self.return_text.into());
        if let Some(o) = self.order_text {
            args.push("--order-by".into());
            args.push(o.into());
        }
        if let Some(l) = self.limit {
            args.push("--limit".into());
            args.push(l.to_string());
        }
        if let Some(o) = self.output(layout) {
            args.push("-o".into());
            args.push(o.to_string_lossy().into_owned());
        }
        args
    }
}

/// Oracle results for all seven queries. The film query reads the oracle's
/// own class counts, never a file the engine wrote.
pub fn oracle_usecases(layout: &Layout) -> Result<Vec<OracleResult>> {
    let mut loaded: HashMap<PathBuf, OracleGraph> = HashMap::new();
    let mut class_counts: Option<OracleResult> = None;
    let mut out = Vec::new();
    for case in USE_CASES {
        let spec = case.spec(layout)?;
        let mut graphs = Vec::new();
        for input in &spec.inputs {
            let name = input.graph_name();
            let path = PathBuf::from(&input.path);
            if case.name == FILM_INSTANCES.name && name == "count" {
                let counts = class_counts
                    .as_ref()
                    .ok_or_else(|| Error::semantic("class counts are computed first"))?;
                graphs.push(OracleGraph {
                    name,
                    schema: ColumnSchema::edges(counts.columns.iter().map(String::as_str))?,
                    rows: counts.rows.clone(),
                });
                continue;
            }
            if !loaded.contains_key(&path) {
                loaded.insert(path.clone(), OracleGraph::load(name.clone(), &path)?);
            }
            let mut g = loaded[&path].clone();
            g.name = name;
            graphs.push(g);
        }
        let result = oracle_query(&spec, &graphs)?;
        if case.name == CLASS_INSTANCES.name {
            class_counts = Some(result.clone());
        }
        out.push(result);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_seven_assemble() {
        let layout = Layout::single(Path::new("/corpus"));
        for case in USE_CASES {
            case.spec(&layout).unwrap_or_else(|e| panic!("{}: {e}", case.name));
        }
    }

    #[test]
    fn headers_follow_the_return_aliases() {
        let layout = Layout::single(Path::new("/corpus"));
        let aliases: Vec<String> = ULAN_IDENTIFIERS
            .spec(&layout)
            .unwrap()
            .returns
            .aliases()
            .map(str::to_string)
            .collect();
        assert_eq!(aliases, ["node1", "node1;P214", "node1;P245", "node1;label"]);
        let cancer: Vec<String> = CANCER_NETWORK.spec(&layout).unwrap().returns.aliases().map(str::to_string).collect();
        assert_eq!(
            cancer,
            ["node1", "label", "node2", "count_publications", "node1;label", "node2;label"]
        );
    }

    #[test]
    fn inputs_resolve_against_the_layout() {
        let layout = Layout {
            corpus: "/c".into(),
            out: "/o".into(),
            temp: "/t".into(),
        };
        let argv = FILM_INSTANCES.argv(&layout);
        assert_eq!(argv[..8], ["-i", "/c/p279star.tsv", "-i", "/c/labels.tsv", "-i", "/o/class.count.tsv.gz", "--as", "count"]);
        assert!(AUTHOR_NETWORK.argv(&layout).contains(&"/t/coauthors.2019.tsv.gz".to_string()));
    }
}
