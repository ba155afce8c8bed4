//! The `kypher` command: imports the input files into the graph cache,
//! compiles the query and writes the result as a KGTK edge file.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches, Command};
use kypher_core::io::EdgeWriter;
use kypher_core::{
    assemble_query, bind_graphs, compile, execute, ColumnSchema, Error, ExecOptions, Flow, GraphCache, InputSpec,
    PlanOptions, QueryText,
};

pub mod usecases;

/// Environment variable naming the cache file when `--cache` is absent.
pub const CACHE_ENV: &str = "KYPHER_CACHE";

pub const EXIT_USAGE: i32 = 1;

/// Query flags shared by `kypher` and `kypher-harness oracle`.
pub fn query_args(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("input")
            .short('i')
            .long("input-file")
            .value_name("FILE")
            .action(ArgAction::Append)
            .required(true)
            .help("Input edge file, or a bare graph name"),
    )
    .arg(
        Arg::new("as")
            .long("as")
            .value_name("NAME")
            .action(ArgAction::Append)
            .help("Graph name for the preceding -i"),
    )
    .arg(Arg::new("match").long("match").value_name("PATTERN").required(true))
    .arg(
        Arg::new("opt")
            .long("opt")
            .value_name("PATTERN")
            .action(ArgAction::Append)
            .help("Optional pattern group; repeatable"),
    )
    .arg(Arg::new("where").long("where").value_name("EXPR"))
    .arg(Arg::new("return").long("return").value_name("ITEMS"))
    .arg(Arg::new("order-by").long("order-by").value_name("KEYS"))
    .arg(
        Arg::new("limit")
            .long("limit")
            .value_name("N")
            .value_parser(clap::value_parser!(u64)),
    )
    .arg(
        Arg::new("graph-dir")
            .long("graph-dir")
            .value_name("DIR")
            .value_parser(clap::value_parser!(PathBuf))
            .help("Directory searched for bare input names (NAME.tsv, NAME.tsv.gz)"),
    )
}

fn command() -> Command {
    query_args(Command::new("kypher").about("Cypher-style pattern queries over KGTK edge files"))
        .arg(
            Arg::new("output")
                .short('o')
                .long("output")
                .value_name("FILE")
                .help("Output file; .gz compresses, - or omitted is standard output"),
        )
        .arg(
            Arg::new("cache")
                .long("cache")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("Graph cache file [env: KYPHER_CACHE] [default: ~/.kypher/graph-cache.sqlite3]"),
        )
        .arg(
            Arg::new("explain")
                .long("explain")
                .action(ArgAction::SetTrue)
                .help("Print the plan and the indexes it needs without running it"),
        )
        .arg(
            Arg::new("verbose")
                .long("verbose")
                .action(ArgAction::SetTrue)
                .help("Report imports, index builds and timing on standard error"),
        )
}

/// A parsed query invocation with inputs still unresolved.
#[derive(Clone, Debug)]
pub struct QueryArgs {
    pub inputs: Vec<(String, Option<String>)>,
    pub match_text: String,
    pub optional: Vec<String>,
    pub where_text: Option<String>,
    pub return_text: Option<String>,
    pub order_text: Option<String>,
    pub limit: Option<u64>,
    pub graph_dir: Option<PathBuf>,
}

impl QueryArgs {
    pub fn from_matches(m: &ArgMatches) -> Result<Self, String> {
        let paths: Vec<&String> = m.get_many::<String>("input").into_iter().flatten().collect();
        let path_at: Vec<usize> = m.indices_of("input").into_iter().flatten().collect();
        let mut inputs: Vec<(String, Option<String>)> = paths.iter().map(|p| (p.to_string(), None)).collect();
        let aliases = m.get_many::<String>("as").into_iter().flatten();
        let alias_at = m.indices_of("as").into_iter().flatten();
        for (alias, at) in aliases.zip(alias_at) {
            let Some(k) = path_at.iter().rposition(|&p| p < at) else {
                return Err(format!("--as {alias} does not follow an -i"));
            };
            if inputs[k].1.replace(alias.clone()).is_some() {
                return Err(format!("-i {} has more than one --as", inputs[k].0));
            }
        }
        let text = |id: &str| m.get_one::<String>(id).cloned();
        Ok(QueryArgs {
            inputs,
            match_text: text("match").unwrap_or_default(),
            optional: m.get_many::<String>("opt").into_iter().flatten().cloned().collect(),
            where_text: text("where"),
            return_text: text("return"),
            order_text: text("order-by"),
            limit: m.get_one::<u64>("limit").copied(),
            graph_dir: m.get_one::<PathBuf>("graph-dir").cloned(),
        })
    }

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

    /// Input specs with bare names resolved: an existing path is used as
    /// is; otherwise `NAME` is looked up in the graph directory and then
    /// among the graphs already in `cache`.
    pub fn resolve_inputs(&self, cache: Option<&GraphCache>) -> Vec<InputSpec> {
        self.inputs
            .iter()
            .map(|(arg, alias)| {
                let (path, alias) = resolve(arg, alias.as_deref(), self.graph_dir.as_deref(), cache);
                InputSpec::new(path.to_string_lossy(), alias.as_deref())
            })
            .collect()
    }
}

fn is_bare_name(arg: &str) -> bool {
    !arg.is_empty() && !arg.contains(['/', '\\', '.'])
}

fn resolve(
    arg: &str,
    alias: Option<&str>,
    graph_dir: Option<&Path>,
    cache: Option<&GraphCache>,
) -> (PathBuf, Option<String>) {
    let given = PathBuf::from(arg);
    let alias = alias.map(str::to_string);
    if given.exists() || !is_bare_name(arg) {
        return (given, alias);
    }
    if let Some(dir) = graph_dir {
        for candidate in [format!("{arg}.tsv"), format!("{arg}.tsv.gz"), arg.to_string()] {
            let p = dir.join(candidate);
            if p.is_file() {
                return (p, alias.or_else(|| Some(arg.to_string())));
            }
        }
    }
    if let Some(d) = cache.and_then(|c| c.descriptor(arg)) {
        return (d.source.clone(), alias.or_else(|| Some(arg.to_string())));
    }
    (given, alias)
}

/// Cache location: the flag, then the environment, then the home directory.
pub fn cache_path(flag: Option<&Path>) -> Result<PathBuf, Error> {
    if let Some(p) = flag {
        return Ok(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os(CACHE_ENV).filter(|p| !p.is_empty()) {
        return Ok(PathBuf::from(p));
    }
    let home = std::env::var_os("HOME")
        .or_else(|| std::env::var_os("USERPROFILE"))
        .ok_or_else(|| Error::Io(io::Error::new(io::ErrorKind::NotFound, "no home directory; use --cache")))?;
    Ok(PathBuf::from(home).join(".kypher").join("graph-cache.sqlite3"))
}

/// What one successful invocation did.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub columns: Vec<String>,
    pub rows: u64,
    pub imports: u64,
    pub index_builds: u64,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, or `--help` / `--version` (exit code 0).
    Usage(clap::Error),
    Query(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(e) if !e.use_stderr() => 0,
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Query(e) => e.exit_code(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Query(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Query(Error::Io(e))
    }
}

/// Runs one invocation. Results not sent to a file and the `--explain`
/// report go to `stdout`; `--verbose` counters go to `stderr`.
pub fn invoke<I, T>(args: I, stdout: Box<dyn Write>, stderr: &mut dyn Write) -> Result<Summary, Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let started = Instant::now();
    let m = command().try_get_matches_from(args).map_err(Failure::Usage)?;
    let query = QueryArgs::from_matches(&m)
        .map_err(|msg| Failure::Usage(command().error(clap::error::ErrorKind::ArgumentConflict, msg)))?;
    let cache_file = cache_path(m.get_one::<PathBuf>("cache").map(PathBuf::as_path))?;
    if let Some(parent) = cache_file.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut cache = GraphCache::open(&cache_file)?;
    let spec = assemble_query(query.resolve_inputs(Some(&cache)), &query.text())?;
    for input in &spec.inputs {
        cache.import_graph(Path::new(&input.path), input.alias.as_deref())?;
    }
    let compiled = compile(&bind_graphs(&spec, &cache)?, &PlanOptions::default())?;
    let required = compiled.required_indexes();
    if m.get_flag("explain") {
        let mut text = compiled.plan.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        text.push_str("required indexes:\n");
        for (graph, column) in &required {
            let state = if cache.descriptor(graph).is_some_and(|d| d.has_index(column)) {
                "present"
            } else {
                "missing"
            };
            text.push_str(&format!("  {graph}.{column} ({state})\n"));
        }
        let mut out = stdout;
        out.write_all(text.as_bytes())?;
        out.flush()?;
        return Ok(Summary {
            columns: compiled.output_columns(),
            imports: cache.stats().imports,
            index_builds: cache.stats().index_builds,
            rows: 0,
        });
    }
    for (graph, column) in &required {
        cache.ensure_index(graph, column)?;
    }

    let columns = compiled.output_columns();
    let schema = ColumnSchema::new(columns.iter().map(String::as_str))?;
    let output = m
        .get_one::<String>("output")
        .filter(|o| o.as_str() != "-")
        .map(PathBuf::from);
    let result = write_result(&compiled, &cache, &schema, output.as_deref(), stdout);
    if result.is_err() {
        if let Some(o) = output.as_deref().filter(|o| o.is_file()) {
            let _ = fs::remove_file(o);
        }
    }
    let rows = result?;
    let stats = cache.stats();
    if m.get_flag("verbose") {
        writeln!(
            stderr,
            "kypher: imports={} index_builds={} freshness_checks={} rows={} seconds={:.3}",
            stats.imports,
            stats.index_builds,
            stats.freshness_checks,
            rows,
            started.elapsed().as_secs_f64()
        )?;
    }
    Ok(Summary {
        columns,
        rows,
        imports: stats.imports,
        index_builds: stats.index_builds,
    })
}

fn write_result(
    compiled: &kypher_core::CompiledQuery,
    cache: &GraphCache,
    schema: &ColumnSchema,
    output: Option<&Path>,
    stdout: Box<dyn Write>,
) -> Result<u64, Error> {
    let mut writer = match output {
        Some(path) => EdgeWriter::create(path, schema)?,
        None => EdgeWriter::to_writer(Box::new(BufWriter::new(stdout)), schema)?,
    };
    execute(compiled, cache, &ExecOptions::default(), &mut |row| {
        writer.write_row(&row)?;
        Ok(Flow::Continue)
    })?;
    writer.finish()
}

/// Runs one invocation and prints any failure as a single line on `stderr`.
pub fn run_with<I, T>(args: I, stdout: Box<dyn Write>, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match invoke(args, stdout, stderr) {
        Ok(_) => 0,
        Err(f) => {
            let code = f.exit_code();
            let _ = match &f {
                Failure::Usage(e) if code == 0 => write!(io::stdout(), "{e}"),
                Failure::Usage(e) => write!(stderr, "{}", e.render()),
                Failure::Query(e) => writeln!(stderr, "kypher: error: {}", one_line(&e.to_string())),
            };
            code
        }
    }
}

/// Runs against the process's standard streams; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, Box::new(io::stdout()), &mut io::stderr())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<QueryArgs, String> {
        let m = command()
            .try_get_matches_from(std::iter::once("kypher").chain(args.iter().copied()))
            .map_err(|e| e.to_string())?;
        QueryArgs::from_matches(&m)
    }

    #[test]
    fn alias_binds_to_the_preceding_input() {
        let q = parse(&["-i", "a.tsv", "-i", "b.tsv.gz", "--as", "count", "-i", "c.tsv", "--match", "(x)"]).unwrap();
        assert_eq!(
            q.inputs,
            [
                ("a.tsv".to_string(), None),
                ("b.tsv.gz".to_string(), Some("count".to_string())),
                ("c.tsv".to_string(), None)
            ]
        );
    }

    #[test]
    fn alias_before_any_input_is_rejected() {
        assert!(parse(&["--as", "x", "-i", "a.tsv", "--match", "(x)"]).is_err());
        assert!(parse(&["-i", "a.tsv", "--as", "x", "--as", "y", "--match", "(x)"]).is_err());
    }

    #[test]
    fn bare_names_resolve_against_the_graph_dir() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("items.tsv"), "node1\tlabel\tnode2\n").unwrap();
        let (p, alias) = resolve("items", None, Some(dir.path()), None);
        assert_eq!(p, dir.path().join("items.tsv"));
        assert_eq!(alias.as_deref(), Some("items"));
        let (p, alias) = resolve("missing", None, Some(dir.path()), None);
        assert_eq!(p, PathBuf::from("missing"));
        assert!(alias.is_none());
    }

    #[test]
    fn cache_flag_wins() {
        assert_eq!(cache_path(Some(Path::new("/x/c.db"))).unwrap(), PathBuf::from("/x/c.db"));
    }
}
