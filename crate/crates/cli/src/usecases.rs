//! Runs the seven use-case queries through the command-line front end,
//! cold and warm, and checks every result against the oracle.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use kypher_core::harness::{oracle_usecases, Layout, USE_CASES};
use kypher_core::io::open_text;
use kypher_core::{parse_value, KgtkValue};

use crate::{invoke, Failure, Summary};

/// A `Write` whose bytes can be read back after it is handed off.
#[derive(Clone, Default)]
pub struct Captured(Arc<Mutex<Vec<u8>>>);

impl Captured {
    pub fn bytes(&self) -> Vec<u8> {
        self.0.lock().unwrap().clone()
    }
}

impl Write for Captured {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Runs `args` (without the program name) with output captured. Returns the
/// summary and the result bytes, read back from `-o` when one was given.
pub fn run_captured(args: &[String], output: Option<&Path>) -> Result<(Summary, Vec<u8>), String> {
    let out = Captured::default();
    let mut err = Vec::new();
    let argv = std::iter::once("kypher".to_string()).chain(args.iter().cloned());
    let summary = invoke(argv, Box::new(out.clone()), &mut err).map_err(|f| match f {
        Failure::Usage(e) => e.to_string(),
        Failure::Query(e) => e.to_string(),
    })?;
    let bytes = match output {
        Some(p) => {
            let mut text = Vec::new();
            open_text(p)
                .and_then(|mut r| Ok(io::copy(&mut r, &mut text)?))
                .map_err(|e| format!("{}: {e}", p.display()))?;
            text
        }
        None => out.bytes(),
    };
    Ok((summary, bytes))
}

/// Header and rows of a TSV result.
pub fn parse_result(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<KgtkValue>>), String> {
    let mut lines = bytes.lines();
    let header = lines.next().ok_or("empty output")?.map_err(|e| e.to_string())?;
    let columns: Vec<String> = header.split('\t').map(str::to_string).collect();
    let mut rows = Vec::new();
    for line in lines {
        let line = line.map_err(|e| e.to_string())?;
        let row = line
            .split('\t')
            .map(parse_value)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        rows.push(row);
    }
    Ok((columns, rows))
}

#[derive(Clone, Debug)]
pub struct UseCaseRun {
    pub name: &'static str,
    pub cold: Duration,
    pub warm: Duration,
    pub rows: u64,
    pub cold_imports: u64,
    pub cold_index_builds: u64,
    pub warm_imports: u64,
    pub warm_index_builds: u64,
    /// Warm output bytes equal the cold ones.
    pub identical: bool,
    /// `Err` holds the first difference from the oracle.
    pub oracle: Result<(), String>,
}

impl UseCaseRun {
    pub fn ratio(&self) -> f64 {
        self.cold.as_secs_f64() / self.warm.as_secs_f64().max(1e-9)
    }

    pub fn passed(&self) -> bool {
        self.oracle.is_ok() && self.identical && self.warm_imports == 0 && self.warm_index_builds == 0
    }
}

/// Runs every use case twice. Each cold run starts from an empty cache at
/// `cache`; the warm run repeats the invocation against the cache the cold
/// run left behind.
pub fn run_usecases(layout: &Layout, cache: &Path) -> Result<Vec<UseCaseRun>, String> {
    fs::create_dir_all(&layout.out).map_err(|e| e.to_string())?;
    fs::create_dir_all(&layout.temp).map_err(|e| e.to_string())?;
    // The ULAN query reads its id list from $OUT, where an earlier step of
    // the original workflow left it.
    let ulan = layout.out.join("ulan.tsv");
    if !ulan.exists() {
        fs::copy(layout.corpus.join("ulan.tsv"), &ulan).map_err(|e| format!("ulan.tsv: {e}"))?;
    }
    let expected = oracle_usecases(layout).map_err(|e| format!("oracle: {e}"))?;
    let mut runs = Vec::new();
    for (case, expected) in USE_CASES.iter().zip(&expected) {
        let _ = fs::remove_file(cache);
        let mut args = case.argv(layout);
        args.push("--cache".into());
        args.push(cache.to_string_lossy().into_owned());
        let output: Option<PathBuf> = case.output(layout);
        let fail = |e: String| format!("{}: {e}", case.name);

        let t = Instant::now();
        let (cold, cold_bytes) = run_captured(&args, output.as_deref()).map_err(fail)?;
        let cold_time = t.elapsed();
        let t = Instant::now();
        let (warm, warm_bytes) = run_captured(&args, output.as_deref()).map_err(fail)?;
        let warm_time = t.elapsed();

        let oracle = parse_result(&cold_bytes).and_then(|(columns, rows)| expected.check(&columns, &rows));
        runs.push(UseCaseRun {
            name: case.name,
            cold: cold_time,
            warm: warm_time,
            rows: cold.rows,
            cold_imports: cold.imports,
            cold_index_builds: cold.index_builds,
            warm_imports: warm.imports,
            warm_index_builds: warm.index_builds,
            identical: cold_bytes == warm_bytes,
            oracle,
        });
    }
    Ok(runs)
}

/// Human-readable table, one row per query.
pub fn report_table(runs: &[UseCaseRun]) -> String {
    let mut s = format!(
        "{:<18} {:>10} {:>10} {:>7} {:>8} {:>8}  {}\n",
        "Query", "Cold (s)", "Warm (s)", "Ratio", "Rows", "Imports", "Oracle"
    );
    for r in runs {
        let _ = writeln!(
            s,
            "{:<18} {:>10.3} {:>10.3} {:>7.2} {:>8} {:>8}  {}",
            r.name,
            r.cold.as_secs_f64(),
            r.warm.as_secs_f64(),
            r.ratio(),
            r.rows,
            format!("{}/{}", r.cold_imports, r.warm_imports),
            match &r.oracle {
                Ok(()) => "match".to_string(),
                Err(e) => format!("MISMATCH: {e}"),
            }
        );
    }
    s
}

/// Machine-readable report: query × configuration × minutes.
pub fn report_tsv(runs: &[UseCaseRun]) -> String {
    let mut s = String::from("query\tconfiguration\tminutes\trows\timports\tindex_builds\toracle\n");
    for r in runs {
        let status = if r.oracle.is_ok() { "match" } else { "mismatch" };
        for (config, time, imports, builds) in [
            ("cold", r.cold, r.cold_imports, r.cold_index_builds),
            ("warm", r.warm, r.warm_imports, r.warm_index_builds),
        ] {
            let _ = writeln!(
                s,
                "{}\t{}\t{:.6}\t{}\t{}\t{}\t{}",
                r.name,
                config,
                time.as_secs_f64() / 60.0,
                r.rows,
                imports,
                builds,
                status
            );
        }
    }
    s
}
