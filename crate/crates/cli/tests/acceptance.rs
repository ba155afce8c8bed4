//! Acceptance criteria, run in order with one PASS/FAIL line each.
//! `cargo test --test acceptance -- 4 7` runs a subset by number.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use kypher_cli::usecases::{parse_result, run_usecases};
use kypher_core::harness::usecases::{CLASS_INSTANCES, FILM_INSTANCES};
use kypher_core::harness::{
    check_optional_law, check_random_case, generate_corpus, generate_scale_file, load_inputs, oracle_query,
    oracle_usecases, CorpusSpec, Layout, USE_CASES,
};
use kypher_core::io::open_text;
use kypher_core::{assemble_query, bind_graphs, compile, GraphCache, InputSpec, PlanOptions, QueryText};

const BIN: &str = env!("CARGO_BIN_EXE_kypher");

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn(&Path) -> Outcome,
}

const MIN: Duration = Duration::from_secs(60);

const CRITERIA: [Criterion; 8] = [
    Criterion { id: 1, name: "use-case queries parse, bind and compile", limit: Duration::from_secs(1), run: parse_suite },
    Criterion { id: 2, name: "use-case results equal the oracle", limit: Duration::from_secs(120), run: oracle_equivalence },
    Criterion { id: 3, name: "random differential suite", limit: Duration::from_secs(300), run: differential },
    Criterion { id: 4, name: "warm cache at least twice as fast", limit: Duration::from_secs(600), run: warm_cache },
    Criterion { id: 5, name: "appended edge is seen without reload", limit: MIN, run: staleness },
    Criterion { id: 6, name: "chained class and film queries", limit: MIN, run: chaining },
    Criterion { id: 7, name: "ten million edge smoke test", limit: Duration::from_secs(900), run: scale_smoke },
    Criterion { id: 8, name: "optional-match projection law", limit: MIN, run: optional_law },
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for c in &CRITERIA {
            println!("criterion_{}: test", c.id);
        }
        return;
    }
    let wanted: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let dir = tempfile::tempdir().expect("temp dir");
        let started = Instant::now();
        let outcome = (c.run)(dir.path());
        let elapsed = started.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} limit", c.limit)),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {}: {} ({:.1}s) {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn text(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// A finished `kypher` process: exit code, standard error and peak RSS.
struct Run {
    code: i32,
    stderr: String,
    seconds: f64,
    max_rss_kib: i64,
}

impl Run {
    fn counter(&self, name: &str) -> Option<u64> {
        let key = format!("{name}=");
        self.stderr
            .split_whitespace()
            .find_map(|w| w.strip_prefix(&key))
            .and_then(|v| v.parse().ok())
    }

    fn ok(self) -> Result<Run, String> {
        if self.code == 0 {
            Ok(self)
        } else {
            Err(format!("kypher exited with {}: {}", self.code, self.stderr.trim()))
        }
    }
}

fn kypher(args: &[String]) -> Result<Run, String> {
    let started = Instant::now();
    let mut child = Command::new(BIN)
        .args(args)
        .env_remove("KYPHER_CACHE")
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(text)?;
    let mut stderr = String::new();
    child.stderr.take().unwrap().read_to_string(&mut stderr).map_err(text)?;
    let mut status = 0;
    // SAFETY: rusage is plain data and the pid belongs to our child.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let pid = unsafe { libc::wait4(child.id() as libc::pid_t, &mut status, 0, &mut usage) };
    if pid < 0 {
        return Err(std::io::Error::last_os_error().to_string());
    }
    let code = if libc::WIFEXITED(status) { libc::WEXITSTATUS(status) } else { -1 };
    Ok(Run {
        code,
        stderr,
        seconds: started.elapsed().as_secs_f64(),
        max_rss_kib: usage.ru_maxrss,
    })
}

fn strings(args: &[&str]) -> Vec<String> {
    args.iter().map(|s| s.to_string()).collect()
}

fn small_corpus(dir: &Path, persons: usize) -> Result<Layout, String> {
    let spec = CorpusSpec {
        persons,
        classes: 40,
        publications: persons / 2,
        ..CorpusSpec::default()
    };
    generate_corpus(&spec, dir).map_err(text)?;
    Ok(Layout::single(dir))
}

fn parse_suite(dir: &Path) -> Outcome {
    let layout = small_corpus(dir, 50)?;
    // The film query reads the class counts; any file with that shape binds.
    {
        let schema = kypher_core::ColumnSchema::edges(["node1", "label", "node2"]).map_err(text)?;
        let mut w = kypher_core::io::EdgeWriter::create(&dir.join("class.count.tsv.gz"), &schema).map_err(text)?;
        w.write_row(&[
            kypher_core::parse_value("Q11424").map_err(text)?,
            kypher_core::parse_value("entity_count").map_err(text)?,
            kypher_core::parse_value("1").map_err(text)?,
        ])
        .map_err(text)?;
        w.finish().map_err(text)?;
    }
    let mut cache = GraphCache::open(dir.join("cache.sqlite3")).map_err(text)?;
    let mut scans = 0;
    for case in USE_CASES {
        let fail = |e: kypher_core::Error| format!("{}: {e}", case.name);
        let spec = case.spec(&layout).map_err(fail)?;
        for i in &spec.inputs {
            cache.import_graph(Path::new(&i.path), i.alias.as_deref()).map_err(fail)?;
        }
        let compiled = compile(&bind_graphs(&spec, &cache).map_err(fail)?, &PlanOptions::default()).map_err(fail)?;
        scans += compiled.plan.scans().len();
    }
    Ok(format!("7 queries, {scans} scans"))
}

fn oracle_equivalence(dir: &Path) -> Outcome {
    let spec = CorpusSpec::default();
    generate_corpus(&spec, dir).map_err(text)?;
    let layout = Layout {
        corpus: dir.to_path_buf(),
        out: dir.join("out"),
        temp: dir.join("temp"),
    };
    let runs = run_usecases(&layout, &dir.join("cache.sqlite3"))?;
    let mut rows = 0;
    for r in &runs {
        if let Err(e) = &r.oracle {
            return Err(format!("{}: {e}", r.name));
        }
        if !r.identical {
            return Err(format!("{}: warm output differs from cold", r.name));
        }
        rows += r.rows;
    }
    Ok(format!(
        "{} persons, {} classes, {} publications: 7/7 match, {rows} rows",
        spec.persons, spec.classes, spec.publications
    ))
}

fn differential(dir: &Path) -> Outcome {
    let (mut compared, mut skipped, mut nonempty, mut variants) = (0, 0, 0, 0);
    let mut seed = 0u64;
    while compared < 500 {
        if seed >= 1000 {
            return Err(format!("only {compared} comparable cases in {seed} seeds"));
        }
        let case_dir = dir.join(seed.to_string());
        fs::create_dir_all(&case_dir).map_err(text)?;
        let outcome = check_random_case(seed, &case_dir)?;
        let _ = fs::remove_dir_all(&case_dir);
        seed += 1;
        if outcome.skipped {
            skipped += 1;
            continue;
        }
        compared += 1;
        variants += outcome.variants;
        nonempty += usize::from(outcome.rows.is_some_and(|r| r > 0));
    }
    Ok(format!(
        "{compared} cases ({nonempty} non-empty, {variants} engine runs), {skipped} over the oracle budget"
    ))
}

const FIRST_NAMES_SHAPE: [&str; 6] = [
    "--match",
    "g: (p)-[:P31]->(:Q5), g: (p)-[:P735]->(n), g: (n)-[:label]->(l)",
    "--return",
    "distinct n as node1, count(n) as node2, l as `node1;label`",
    "--order-by",
    "node2 desc, node1",
];

fn scale_args(file: &Path, cache: &Path, out: &Path) -> Vec<String> {
    let mut args = strings(&["-i", &file.to_string_lossy(), "--as", "g", "--verbose"]);
    args.extend(strings(&FIRST_NAMES_SHAPE));
    args.extend(strings(&["--cache", &cache.to_string_lossy(), "-o", &out.to_string_lossy()]));
    args
}

fn warm_cache(dir: &Path) -> Outcome {
    let file = dir.join("scale.tsv");
    generate_scale_file(&file, 1_000_000, 11).map_err(text)?;
    let out = dir.join("out.tsv");
    let args = scale_args(&file, &dir.join("cache.sqlite3"), &out);
    let cold = kypher(&args)?.ok()?;
    let cold_bytes = fs::read(&out).map_err(text)?;
    let warm = kypher(&args)?.ok()?;
    let (imports, builds) = (warm.counter("imports"), warm.counter("index_builds"));
    if imports != Some(0) || builds != Some(0) {
        return Err(format!("warm run reported {:?}", warm.stderr.trim()));
    }
    if fs::read(&out).map_err(text)? != cold_bytes {
        return Err("warm output differs from cold".into());
    }
    let ratio = cold.seconds / warm.seconds;
    let detail = format!(
        "cold {:.2}s, warm {:.2}s, ratio {ratio:.2}, warm imports 0, index builds 0",
        cold.seconds, warm.seconds
    );
    if ratio >= 2.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn staleness(dir: &Path) -> Outcome {
    let file = dir.join("people.tsv");
    fs::write(&file, "node1\tlabel\tnode2\na\tP31\tQ5\nb\tP31\tQ6\n").map_err(text)?;
    let out = dir.join("out.tsv");
    let mut args = strings(&["-i", &file.to_string_lossy(), "--match", "(p)-[:P31]->(:Q5)", "--return", "p as node1"]);
    args.extend(strings(&["--verbose", "--cache", &dir.join("c.sqlite3").to_string_lossy(), "-o", &out.to_string_lossy()]));
    kypher(&args)?.ok()?;
    let before = parse_result(&fs::read(&out).map_err(text)?)?.1.len();
    OpenOptions::new()
        .append(true)
        .open(&file)
        .and_then(|mut f| f.write_all(b"c\tP31\tQ5\n"))
        .map_err(text)?;
    let after = kypher(&args)?.ok()?;
    if after.counter("imports") != Some(1) {
        return Err(format!("expected one re-import, got {:?}", after.stderr.trim()));
    }
    let (columns, rows) = parse_result(&fs::read(&out).map_err(text)?)?;
    let spec = assemble_query(
        vec![InputSpec::new(file.to_string_lossy(), None)],
        &QueryText {
            match_text: "(p)-[:P31]->(:Q5)",
            return_text: Some("p as node1"),
            ..Default::default()
        },
    )
    .map_err(text)?;
    let expected = oracle_query(&spec, &load_inputs(&spec).map_err(text)?).map_err(text)?;
    expected.check(&columns, &rows)?;
    Ok(format!("{before} row(s) before the append, {} after, re-imported once", rows.len()))
}

fn chaining(dir: &Path) -> Outcome {
    let layout = small_corpus(dir, 400)?;
    let cache = dir.join("c.sqlite3").to_string_lossy().into_owned();
    let mut class_args = CLASS_INSTANCES.argv(&layout);
    class_args.extend(strings(&["--cache", &cache]));
    kypher(&class_args)?.ok()?;
    let film_out = dir.join("films.tsv");
    let mut film_args = FILM_INSTANCES.argv(&layout);
    film_args.extend(strings(&["--cache", &cache, "-o", &film_out.to_string_lossy()]));
    kypher(&film_args)?.ok()?;
    let (columns, rows) = parse_result(&fs::read(&film_out).map_err(text)?)?;
    let expected = oracle_usecases(&layout).map_err(text)?.swap_remove(2);
    expected.check(&columns, &rows)?;
    if rows.is_empty() {
        return Err("the film query returned nothing".into());
    }
    Ok(format!("{} film classes, equal to the single oracle pass", rows.len()))
}

/// Per-name person counts and labels, read straight from the scale file.
fn scale_oracle(file: &Path) -> Result<HashMap<String, (u64, String)>, String> {
    let mut human: HashMap<String, bool> = HashMap::new();
    let mut given: Vec<(String, String)> = Vec::new();
    let mut labels: HashMap<String, String> = HashMap::new();
    for line in open_text(file).map_err(text)?.lines().skip(1) {
        let line = line.map_err(text)?;
        let mut cells = line.split('\t');
        let (n1, l, n2) = (cells.next().unwrap_or(""), cells.next().unwrap_or(""), cells.next().unwrap_or(""));
        match l {
            "P31" => {
                *human.entry(n1.to_string()).or_default() |= n2 == "Q5";
            }
            "P735" => given.push((n1.to_string(), n2.to_string())),
            "label" => {
                labels.insert(n1.to_string(), n2.to_string());
            }
            _ => {}
        }
    }
    let mut out: HashMap<String, (u64, String)> = HashMap::new();
    for (person, name) in given {
        if human.get(&person).copied().unwrap_or(false) {
            if let Some(label) = labels.get(&name) {
                out.entry(name).or_insert_with(|| (0, label.clone())).0 += 1;
            }
        }
    }
    Ok(out)
}

fn scale_smoke(dir: &Path) -> Outcome {
    const EDGES: u64 = 10_000_000;
    const IMPORT_RSS_MIB: i64 = 512;
    const TOTAL_RSS_MIB: i64 = 16 * 1024;
    let file = dir.join("scale.tsv");
    generate_scale_file(&file, EDGES, 5).map_err(text)?;
    let cache = dir.join("cache.sqlite3");
    let out = dir.join("out.tsv");
    let mut import_args = scale_args(&file, &cache, &out);
    import_args.push("--explain".into());
    let import = kypher(&import_args)?.ok()?;
    let query = kypher(&scale_args(&file, &cache, &out))?.ok()?;
    if query.counter("imports") != Some(0) {
        return Err(format!("query re-imported: {}", query.stderr.trim()));
    }
    let (_, rows) = parse_result(&fs::read(&out).map_err(text)?)?;
    let expected = scale_oracle(&file)?;
    if rows.len() != expected.len() {
        return Err(format!("{} groups, expected {}", rows.len(), expected.len()));
    }
    for row in &rows {
        let name = row[0].to_string();
        let want = expected.get(&name).ok_or_else(|| format!("unexpected name {name}"))?;
        if row[1].to_string() != want.0.to_string() || row[2].to_string() != want.1 {
            return Err(format!("{name}: got {:?}, expected {want:?}", &row[1..]));
        }
    }
    let import_mib = import.max_rss_kib / 1024;
    let total_mib = import_mib.max(query.max_rss_kib / 1024);
    let detail = format!(
        "{EDGES} edges: import {:.1}s at {import_mib} MiB peak, indexes and join {:.1}s at {} MiB peak, {} groups verified",
        import.seconds,
        query.seconds,
        query.max_rss_kib / 1024,
        rows.len()
    );
    if import_mib > IMPORT_RSS_MIB || total_mib > TOTAL_RSS_MIB {
        return Err(format!("{detail}; memory bound exceeded"));
    }
    Ok(detail)
}

fn optional_law(dir: &Path) -> Outcome {
    let (mut rows, mut unmatched) = (0, 0);
    const SEEDS: u64 = 40;
    for seed in 0..SEEDS {
        let d: PathBuf = dir.join(seed.to_string());
        fs::create_dir_all(&d).map_err(text)?;
        let o = check_optional_law(seed, &d)?;
        let _ = fs::remove_dir_all(&d);
        rows += o.rows;
        unmatched += o.unmatched;
    }
    if unmatched == 0 || unmatched == rows {
        return Err(format!("degenerate corpora: {unmatched} of {rows} rows unmatched"));
    }
    Ok(format!("{SEEDS} corpora, {rows} rows, {unmatched} with an unmatched optional group"))
}
