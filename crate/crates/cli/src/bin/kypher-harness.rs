//! Corpus generation, subclass closure, the brute-force oracle and the
//! use-case report.

use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use kypher_cli::usecases::{report_table, report_tsv, run_usecases};
use kypher_cli::{query_args, QueryArgs};
use kypher_core::harness::{
    closure_p279star, generate_corpus, generate_scale_file, load_inputs, oracle_query, CorpusSpec, Layout,
};
use kypher_core::io::EdgeWriter;
use kypher_core::{assemble_query, ColumnSchema};

fn corpus_args(cmd: Command) -> Command {
    let d = CorpusSpec::default();
    let num = |name: &'static str, default: String| {
        Arg::new(name)
            .long(name)
            .value_parser(value_parser!(u64))
            .default_value(default)
    };
    let frac = |name: &'static str, default: f64| {
        Arg::new(name)
            .long(name)
            .value_parser(value_parser!(f64))
            .default_value(default.to_string())
    };
    cmd.arg(num("seed", d.seed.to_string()))
        .arg(num("persons", d.persons.to_string()))
        .arg(num("classes", d.classes.to_string()))
        .arg(num("publications", d.publications.to_string()))
        .arg(num("max-authors", d.max_authors_per_pub.to_string()))
        .arg(frac("identifier-coverage", d.identifier_coverage))
        .arg(frac("noisy-literal-fraction", d.noisy_literal_fraction))
}

fn corpus_spec(m: &ArgMatches) -> CorpusSpec {
    let n = |k: &str| *m.get_one::<u64>(k).unwrap();
    let f = |k: &str| *m.get_one::<f64>(k).unwrap();
    CorpusSpec {
        seed: n("seed"),
        persons: n("persons") as usize,
        classes: n("classes") as usize,
        publications: n("publications") as usize,
        max_authors_per_pub: n("max-authors") as usize,
        identifier_coverage: f("identifier-coverage"),
        noisy_literal_fraction: f("noisy-literal-fraction"),
    }
}

fn path_arg(name: &'static str) -> Arg {
    Arg::new(name).value_parser(value_parser!(PathBuf))
}

fn command() -> Command {
    Command::new("kypher-harness")
        .about("Synthetic corpora, closure, oracle and use-case runs")
        .subcommand_required(true)
        .subcommand(
            corpus_args(Command::new("generate").about("Write a synthetic corpus, or one large scale file with --edges"))
                .arg(path_arg("out").long("out").required(true).help("Output directory"))
                .arg(
                    Arg::new("edges")
                        .long("edges")
                        .value_parser(value_parser!(u64))
                        .help("Write OUT/scale.tsv with this many edges instead"),
                ),
        )
        .subcommand(
            Command::new("closure")
                .about("Materialize the reflexive-transitive P279star closure")
                .arg(path_arg("p279").required(true))
                .arg(path_arg("output").required(true)),
        )
        .subcommand(query_args(
            Command::new("oracle").about("Evaluate a query by exhaustive enumeration and print the rows"),
        ))
        .subcommand(
            corpus_args(Command::new("usecases").about("Run the seven use-case queries cold and warm"))
                .arg(path_arg("corpus").long("corpus").required(true))
                .arg(
                    Arg::new("generate")
                        .long("generate")
                        .action(ArgAction::SetTrue)
                        .help("Generate the corpus first"),
                )
                .arg(path_arg("out").long("out").help("Directory for $OUT [default: CORPUS/out]"))
                .arg(path_arg("temp").long("temp").help("Directory for $TEMP [default: CORPUS/temp]"))
                .arg(path_arg("cache").long("cache").help("Cache file [default: CORPUS/cache.sqlite3]"))
                .arg(path_arg("tsv").long("tsv").help("Also write the TSV report here")),
        )
}

fn run(m: &ArgMatches) -> Result<bool, String> {
    match m.subcommand() {
        Some(("generate", m)) => {
            let out = m.get_one::<PathBuf>("out").unwrap();
            if let Some(&edges) = m.get_one::<u64>("edges") {
                std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
                let file = out.join("scale.tsv");
                let seed = *m.get_one::<u64>("seed").unwrap();
                let n = generate_scale_file(&file, edges, seed).map_err(|e| e.to_string())?;
                println!("{}\t{n}", file.display());
            } else {
                for f in generate_corpus(&corpus_spec(m), out).map_err(|e| e.to_string())? {
                    println!("{}", f.display());
                }
            }
            Ok(true)
        }
        Some(("closure", m)) => {
            let n = closure_p279star(m.get_one::<PathBuf>("p279").unwrap(), m.get_one::<PathBuf>("output").unwrap())
                .map_err(|e| e.to_string())?;
            eprintln!("{n} P279star edges");
            Ok(true)
        }
        Some(("oracle", m)) => {
            let q = QueryArgs::from_matches(m)?;
            let spec = assemble_query(q.resolve_inputs(None), &q.text()).map_err(|e| e.to_string())?;
            let graphs = load_inputs(&spec).map_err(|e| e.to_string())?;
            let result = oracle_query(&spec, &graphs).map_err(|e| e.to_string())?;
            let schema = ColumnSchema::new(result.columns.iter().map(String::as_str)).map_err(|e| e.to_string())?;
            let mut w = EdgeWriter::to_writer(Box::new(BufWriter::new(io::stdout())), &schema).map_err(|e| e.to_string())?;
            for row in &result.rows {
                w.write_row(row).map_err(|e| e.to_string())?;
            }
            w.finish().map_err(|e| e.to_string())?;
            Ok(true)
        }
        Some(("usecases", m)) => {
            let corpus = m.get_one::<PathBuf>("corpus").unwrap().clone();
            if m.get_flag("generate") {
                generate_corpus(&corpus_spec(m), &corpus).map_err(|e| e.to_string())?;
            }
            let dir = |k: &str, default: &str| m.get_one::<PathBuf>(k).cloned().unwrap_or_else(|| corpus.join(default));
            let layout = Layout {
                out: dir("out", "out"),
                temp: dir("temp", "temp"),
                corpus: corpus.clone(),
            };
            let runs = run_usecases(&layout, &dir("cache", "cache.sqlite3"))?;
            print!("{}", report_table(&runs));
            let tsv = report_tsv(&runs);
            match m.get_one::<PathBuf>("tsv") {
                Some(p) => std::fs::write(p, tsv).map_err(|e| e.to_string())?,
                None => print!("\n{tsv}"),
            }
            Ok(runs.iter().all(|r| r.passed()))
        }
        _ => unreachable!("subcommand required"),
    }
}

fn main() -> ExitCode {
    let m = command().get_matches();
    match run(&m) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("kypher-harness: error: {e}");
            ExitCode::from(3)
        }
    }
}
