use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::EdgeWriter;
use crate::model::ColumnSchema;
use crate::value::KgtkValue;

use super::closure::closure_p279star;

pub const ENTITY: &str = "Q35120";
pub const HUMAN: &str = "Q5";
pub const SCIENTIFIC_PUBLICATION: &str = "Q591041";
pub const CANCER: &str = "Q12078";
pub const FILM: &str = "Q11424";

/// Size and noise knobs for a synthetic corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub persons: usize,
    pub classes: usize,
    pub publications: usize,
    pub max_authors_per_pub: usize,
    /// Chance that a ULAN id has a VIAF id next to it.
    pub identifier_coverage: f64,
    /// Chance that an infobox spouse value is a literal instead of a Q-node.
    pub noisy_literal_fraction: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 1,
            persons: 1000,
            classes: 100,
            publications: 500,
            max_authors_per_pub: 4,
            identifier_coverage: 0.3,
            noisy_literal_fraction: 0.5,
        }
    }
}

/// File names written by [`generate_corpus`], in order.
pub const CORPUS_FILES: [&str; 9] = [
    "p31.tsv",
    "p279.tsv",
    "p279star.tsv",
    "items.tsv",
    "labels.tsv",
    "external_ids.tsv",
    "infobox.tsv",
    "ulan.tsv",
    "time.tsv",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Family {
    Generic,
    Publication,
    Cancer,
    Film,
}

struct Sink {
    writer: EdgeWriter,
}

impl Sink {
    fn create(path: &Path) -> Result<Self> {
        let schema = ColumnSchema::edges(["node1", "label", "node2"])?;
        Ok(Sink {
            writer: EdgeWriter::create(path, &schema)?,
        })
    }

    fn edge(&mut self, node1: &str, label: &str, node2: KgtkValue) -> Result<()> {
        self.writer
            .write_row(&[KgtkValue::symbol(node1), KgtkValue::symbol(label), node2])
    }

    fn link(&mut self, node1: &str, label: &str, node2: &str) -> Result<()> {
        self.edge(node1, label, KgtkValue::symbol(node2))
    }
}

fn en(text: impl Into<String>) -> KgtkValue {
    KgtkValue::lang_string(text, "en")
}

/// Writes a Wikidata-shaped corpus into `out_dir`. The same spec always
/// yields the same bytes.
pub fn generate_corpus(spec: &CorpusSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let path = |name: &str| out_dir.join(name);

    // Class hierarchy: each generated class hangs below an earlier class of
    // its family, so P279 is a DAG by construction.
    let roots = [
        (ENTITY, "entity", Family::Generic),
        (HUMAN, "human", Family::Generic),
        (SCIENTIFIC_PUBLICATION, "scientific publication", Family::Publication),
        (CANCER, "cancer", Family::Cancer),
        (FILM, "film", Family::Film),
    ];
    let mut classes: Vec<(String, String, Family)> = roots
        .iter()
        .map(|(id, name, fam)| (id.to_string(), name.to_string(), *fam))
        .collect();
    let mut p279 = Sink::create(&path("p279.tsv"))?;
    for (id, _, _) in &roots[1..] {
        p279.link(id, "P279", ENTITY)?;
    }
    let families = [Family::Generic, Family::Publication, Family::Cancer, Family::Film];
    for i in 0..spec.classes {
        let family = families[i % families.len()];
        let id = format!("Q{}", 100_000 + i);
        let kind = match family {
            Family::Generic => "topic",
            Family::Publication => "article type",
            Family::Cancer => "carcinoma",
            Family::Film => "film genre",
        };
        let same: Vec<&String> = classes.iter().filter(|c| c.2 == family).map(|c| &c.0).collect();
        let first = same[rng.gen_range(0..same.len())].clone();
        p279.link(&id, "P279", &first)?;
        if rng.gen_bool(0.2) {
            let other = &classes[rng.gen_range(0..classes.len())].0;
            if *other != first {
                p279.link(&id, "P279", other)?;
            }
        }
        classes.push((id, format!("{kind} {i}"), family));
    }
    p279.writer.finish()?;
    closure_p279star(&path("p279.tsv"), &path("p279star.tsv"))?;

    let of_family = |f: Family| -> Vec<String> { classes.iter().filter(|c| c.2 == f).map(|c| c.0.clone()).collect() };
    let generic = of_family(Family::Generic);
    let pub_classes = of_family(Family::Publication);
    let cancer_classes = of_family(Family::Cancer);
    let film_classes = of_family(Family::Film);

    let persons: Vec<String> = (0..spec.persons).map(|i| format!("Q{}", 1_000_000 + i)).collect();
    let name_count = (spec.persons / 10).max(10);
    let names: Vec<String> = (0..name_count).map(|i| format!("Q{}", 2_000_000 + i)).collect();
    let films: Vec<String> = (0..spec.persons / 5).map(|i| format!("Q{}", 3_000_000 + i)).collect();
    let pubs: Vec<String> = (0..spec.publications).map(|i| format!("Q{}", 4_000_000 + i)).collect();

    let mut p31 = Sink::create(&path("p31.tsv"))?;
    let mut items = Sink::create(&path("items.tsv"))?;
    let mut labels = Sink::create(&path("labels.tsv"))?;
    let mut time = Sink::create(&path("time.tsv"))?;

    for (id, name, _) in &classes {
        labels.edge(id, "label", en(name.clone()))?;
    }
    for (i, n) in names.iter().enumerate() {
        labels.edge(n, "label", en(format!("Name{i}")))?;
    }
    for (i, p) in persons.iter().enumerate() {
        if rng.gen_bool(0.95) {
            p31.link(p, "P31", HUMAN)?;
        } else {
            p31.link(p, "P31", &generic[rng.gen_range(0..generic.len())])?;
        }
        if rng.gen_bool(0.9) {
            // Squaring a uniform draw skews toward popular names.
            let u: f64 = rng.gen();
            let mut picked = vec![(u * u * name_count as f64) as usize];
            if rng.gen_bool(0.1) {
                picked.push(rng.gen_range(0..name_count));
            }
            picked.dedup();
            for k in picked {
                items.link(p, "P735", &names[k])?;
            }
        }
        if rng.gen_bool(0.9) {
            labels.edge(p, "label", en(format!("Person {i}")))?;
        }
    }
    for (i, f) in films.iter().enumerate() {
        let class = if rng.gen_bool(0.2) { FILM } else { &film_classes[rng.gen_range(0..film_classes.len())] };
        p31.link(f, "P31", class)?;
        labels.edge(f, "label", en(format!("Film {i}")))?;
    }

    // Authors come from a smaller pool so that coauthor pairs repeat.
    let researchers = &persons[..(persons.len() / 4).max(persons.len().min(10))];
    for (i, p) in pubs.iter().enumerate() {
        let class = if rng.gen_bool(0.1) {
            generic[rng.gen_range(0..generic.len())].as_str()
        } else if rng.gen_bool(0.3) {
            SCIENTIFIC_PUBLICATION
        } else {
            pub_classes[rng.gen_range(0..pub_classes.len())].as_str()
        };
        p31.link(p, "P31", class)?;
        let n_authors = rng.gen_range(1..=spec.max_authors_per_pub.max(1)).min(researchers.len());
        for a in researchers.choose_multiple(&mut rng, n_authors) {
            items.link(p, "P50", a)?;
        }
        let n_subjects = rng.gen_range(1..=2);
        for _ in 0..n_subjects {
            let subject = if rng.gen_bool(0.5) {
                cancer_classes[rng.gen_range(0..cancer_classes.len())].as_str()
            } else {
                generic[rng.gen_range(0..generic.len())].as_str()
            };
            items.link(p, "P921", subject)?;
        }
        time.edge(p, "P577", KgtkValue::int(rng.gen_range(1990..2021)))?;
        if rng.gen_bool(0.8) {
            labels.edge(p, "label", en(format!("Paper {i}")))?;
        }
    }

    // Artists carry ULAN ids; some also carry VIAF ids.
    let mut external = Sink::create(&path("external_ids.tsv"))?;
    let mut infobox = Sink::create(&path("infobox.tsv"))?;
    let ulan_schema = ColumnSchema::edges(["node1"])?;
    let mut ulan = EdgeWriter::create(&path("ulan.tsv"), &ulan_schema)?;
    let artists: Vec<&String> = persons.iter().step_by(5).collect();
    for (i, artist) in artists.iter().enumerate() {
        let ulan_id = KgtkValue::string(format!("{}", 500_000_000 + i * 7));
        if rng.gen_bool(spec.identifier_coverage) {
            external.edge(artist, "P214", KgtkValue::string(format!("{}", rng.gen_range(10_000_000..99_999_999))))?;
        }
        external.edge(artist, "P245", ulan_id.clone())?;
        ulan.write_row(&[ulan_id])?;

        for _ in 0..rng.gen_range(0..=2) {
            let value = if rng.gen_bool(spec.noisy_literal_fraction) {
                en(format!("Spouse of {i}"))
            } else if rng.gen_bool(0.15) && !films.is_empty() {
                KgtkValue::symbol(films[rng.gen_range(0..films.len())].clone())
            } else {
                KgtkValue::symbol(persons[rng.gen_range(0..persons.len())].clone())
            };
            infobox.edge(artist, "property:spouse", value)?;
        }
        if rng.gen_bool(0.5) {
            infobox.edge(artist, "property:occupation", en("Fashion designer"))?;
        }
        if rng.gen_bool(0.3) {
            infobox.link(artist, "property:almaMater", &generic[rng.gen_range(0..generic.len())])?;
        }
    }

    for sink in [p31, items, labels, time, external, infobox] {
        sink.writer.finish()?;
    }
    ulan.finish()?;
    Ok(CORPUS_FILES.iter().map(|f| path(f)).collect())
}

/// Writes one large edge file for scale tests: `P31` and `P735` edges for
/// persons plus labels for their first names, `edges` rows in total.
/// Streams straight to disk, so memory use does not grow with `edges`.
pub fn generate_scale_file(path: &Path, edges: u64, seed: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (edges / 1000).clamp(10, 100_000);
    let persons = edges.saturating_sub(names) / 2;
    let mut out = BufWriter::with_capacity(1 << 20, fs::File::create(path)?);
    writeln!(out, "node1\tlabel\tnode2")?;
    let mut written = 0u64;
    for k in 0..names {
        writeln!(out, "N{k}\tlabel\t'Name{k}'@en")?;
        written += 1;
    }
    for i in 0..persons {
        let class = if rng.gen_bool(0.9) { "Q5" } else { "Q95074" };
        writeln!(out, "P{i}\tP31\t{class}")?;
        let u: f64 = rng.gen();
        writeln!(out, "P{i}\tP735\tN{}", (u * u * names as f64) as u64)?;
        written += 2;
    }
    while written < edges {
        writeln!(out, "X{written}\tP31\tQ5")?;
        written += 1;
    }
    out.flush()?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::read_edges;

    fn small() -> CorpusSpec {
        CorpusSpec {
            seed: 1,
            persons: 10,
            classes: 8,
            publications: 5,
            ..CorpusSpec::default()
        }
    }

    #[test]
    fn deterministic_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = generate_corpus(&small(), a.path()).unwrap();
        let fb = generate_corpus(&small(), b.path()).unwrap();
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
        }
        let c = tempfile::tempdir().unwrap();
        let fc = generate_corpus(&CorpusSpec { seed: 2, ..small() }, c.path()).unwrap();
        assert_ne!(fs::read(&fa[3]).unwrap(), fs::read(&fc[3]).unwrap());
    }

    #[test]
    fn files_are_readable_edge_files() {
        let dir = tempfile::tempdir().unwrap();
        for f in generate_corpus(&small(), dir.path()).unwrap() {
            let (schema, rows) = read_edges(&f, true).unwrap();
            assert!(schema.validate_edge_roles().is_ok());
            for r in rows {
                r.unwrap();
            }
        }
    }

    #[test]
    fn identifier_coverage_is_binomial() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CorpusSpec {
            persons: 10_000,
            identifier_coverage: 0.3,
            ..CorpusSpec::default()
        };
        generate_corpus(&spec, dir.path()).unwrap();
        let (schema, rows) = read_edges(&dir.path().join("external_ids.tsv"), true).unwrap();
        let (mut viaf, mut ulan) = (0.0f64, 0.0f64);
        for r in rows {
            let r = r.unwrap();
            match r.label(&schema).to_string().as_str() {
                "P214" => viaf += 1.0,
                "P245" => ulan += 1.0,
                _ => {}
            }
        }
        // 2000 trials: four standard deviations is about 0.041.
        let p = viaf / ulan;
        assert_eq!(ulan, 2000.0);
        assert!((p - 0.3).abs() < 0.041, "coverage {p}");
    }

    #[test]
    fn scale_file_has_requested_edges() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("big.tsv");
        assert_eq!(generate_scale_file(&f, 12_345, 3).unwrap(), 12_345);
        let (_, rows) = read_edges(&f, true).unwrap();
        assert_eq!(rows.count(), 12_345);
    }
}
