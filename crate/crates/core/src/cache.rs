//! Persistent graph cache: one SQLite file holding a table per imported
//! graph, the catalog of graph descriptors, and lazily built column indexes.
//!
//! Every imported graph is fingerprinted by source size, mtime, and a SHA-256
//! of the raw file bytes. The content hash decides staleness; mtime changes
//! alone only refresh the stored fingerprint.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::time::{Duration, UNIX_EPOCH};

use rusqlite::{params, Connection, OptionalExtension, TransactionBehavior};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::read_edges;
use crate::model::ColumnSchema;

const FORMAT_TAG: &str = "kypher-graph-cache";
const FORMAT_VERSION: &str = "1";
const BUSY_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fingerprint {
    pub size: u64,
    pub mtime_ns: i64,
    /// Hex SHA-256 of the raw (possibly compressed) file bytes.
    pub content_hash: String,
}

impl Fingerprint {
    pub fn of(path: &Path) -> io::Result<Self> {
        let (size, mtime_ns) = stat(path)?;
        Ok(Fingerprint {
            size,
            mtime_ns,
            content_hash: content_hash(path)?,
        })
    }
}

fn stat(path: &Path) -> io::Result<(u64, i64)> {
    let meta = fs::metadata(path)?;
    let mtime = meta
        .modified()?
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as i64)
        .unwrap_or(0);
    Ok((meta.len(), mtime))
}

pub fn content_hash(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// A named graph in the cache.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphDescriptor {
    pub name: String,
    pub source: PathBuf,
    pub fingerprint: Fingerprint,
    pub schema: ColumnSchema,
    /// Indexed columns with their number of distinct values.
    pub indexes: BTreeMap<String, u64>,
    pub edge_count: u64,
    pub(crate) table: String,
}

impl GraphDescriptor {
    pub fn has_index(&self, column: &str) -> bool {
        self.indexes.contains_key(column)
    }

    pub(crate) fn column_sql(&self, column: &str) -> Option<String> {
        self.schema.position(column).map(|i| format!("c{i}"))
    }

    pub(crate) fn index_name(&self, column: &str) -> Option<String> {
        self.schema.position(column).map(|i| format!("{}_c{i}_idx", self.table))
    }
}

/// Work counters for one cache handle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub imports: u64,
    pub index_builds: u64,
    pub freshness_checks: u64,
}

pub struct GraphCache {
    path: PathBuf,
    conn: Connection,
    catalog: BTreeMap<String, GraphDescriptor>,
    stats: CacheStats,
}

impl std::fmt::Debug for GraphCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphCache")
            .field("path", &self.path)
            .field("graphs", &self.catalog.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Graph name derived from a file name: `labels.tsv.gz` becomes `labels`.
pub fn graph_name_from_path(path: &Path) -> String {
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    for ext in [".gz", ".bz2", ".xz"] {
        if let Some(stem) = name.strip_suffix(ext) {
            name = stem.to_string();
            break;
        }
    }
    for ext in [".tsv", ".csv", ".kgtk", ".txt"] {
        if let Some(stem) = name.strip_suffix(ext) {
            name = stem.to_string();
            break;
        }
    }
    name
}

impl GraphCache {
    /// Opens the cache at `path`, creating an empty one when the file does
    /// not exist.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let corrupt = |reason: String| Error::CorruptCache {
            path: path.clone(),
            reason,
        };
        let existing = match fs::metadata(&path) {
            Ok(m) if m.is_dir() => return Err(corrupt("path is a directory".into())),
            Ok(m) => m.len() > 0,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                false
            }
            Err(e) => return Err(e.into()),
        };
        let conn = Connection::open(&path)?;
        conn.busy_timeout(BUSY_TIMEOUT)?;
        if existing {
            let tag: Option<String> = conn
                .query_row("SELECT value FROM kypher_meta WHERE key = 'format'", [], |r| r.get(0))
                .optional()
                .map_err(|e| corrupt(e.to_string()))?;
            if tag.as_deref() != Some(FORMAT_TAG) {
                return Err(corrupt("missing format marker".into()));
            }
            let version: Option<String> = conn
                .query_row("SELECT value FROM kypher_meta WHERE key = 'version'", [], |r| r.get(0))
                .optional()
                .map_err(|e| corrupt(e.to_string()))?;
            if version.as_deref() != Some(FORMAT_VERSION) {
                return Err(corrupt(format!("unsupported cache version {version:?}")));
            }
        } else {
            conn.execute_batch(&format!(
                "BEGIN;
                 CREATE TABLE IF NOT EXISTS kypher_meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
                 CREATE TABLE IF NOT EXISTS kypher_graphs (
                     name TEXT PRIMARY KEY, table_name TEXT NOT NULL, source TEXT NOT NULL,
                     size INTEGER NOT NULL, mtime_ns INTEGER NOT NULL, content_hash TEXT NOT NULL,
                     columns TEXT NOT NULL, edge_count INTEGER NOT NULL);
                 CREATE TABLE IF NOT EXISTS kypher_indexes (
                     graph TEXT NOT NULL, column_name TEXT NOT NULL, distinct_count INTEGER NOT NULL,
                     PRIMARY KEY (graph, column_name));
                 INSERT OR REPLACE INTO kypher_meta VALUES ('format', '{FORMAT_TAG}');
                 INSERT OR REPLACE INTO kypher_meta VALUES ('version', '{FORMAT_VERSION}');
                 INSERT OR IGNORE INTO kypher_meta VALUES ('next_table', '0');
                 COMMIT;"
            ))?;
        }
        conn.execute_batch("PRAGMA synchronous = OFF; PRAGMA cache_size = -262144;")?;
        let mut cache = GraphCache {
            path,
            conn,
            catalog: BTreeMap::new(),
            stats: CacheStats::default(),
        };
        cache.load_catalog()?;
        Ok(cache)
    }

    fn corrupt(&self, reason: impl Into<String>) -> Error {
        Error::CorruptCache {
            path: self.path.clone(),
            reason: reason.into(),
        }
    }

    fn load_catalog(&mut self) -> Result<()> {
        let tables: BTreeSet<String> = {
            let mut stmt = self
                .conn
                .prepare("SELECT name FROM sqlite_master WHERE type = 'table' AND name LIKE 'graph\\_%' ESCAPE '\\'")?;
            let rows = stmt.query_map([], |r| r.get::<_, String>(0))?;
            rows.collect::<rusqlite::Result<_>>()?
        };
        let mut catalog = BTreeMap::new();
        {
            let mut stmt = self.conn.prepare(
                "SELECT name, table_name, source, size, mtime_ns, content_hash, columns, edge_count FROM kypher_graphs",
            )?;
            let mut rows = stmt.query([])?;
            while let Some(row) = rows.next()? {
                let name: String = row.get(0)?;
                let table: String = row.get(1)?;
                let columns: String = row.get(6)?;
                if !tables.contains(&table) {
                    return Err(self.corrupt(format!("graph {name:?} has no backing table {table}")));
                }
                let schema = ColumnSchema::edges(columns.split('\t'))
                    .map_err(|e| self.corrupt(format!("graph {name:?}: {e}")))?;
                let descriptor = GraphDescriptor {
                    name: name.clone(),
                    source: PathBuf::from(row.get::<_, String>(2)?),
                    fingerprint: Fingerprint {
                        size: row.get::<_, i64>(3)? as u64,
                        mtime_ns: row.get(4)?,
                        content_hash: row.get(5)?,
                    },
                    schema,
                    indexes: BTreeMap::new(),
                    edge_count: row.get::<_, i64>(7)? as u64,
                    table,
                };
                catalog.insert(name, descriptor);
            }
        }
        {
            let mut stmt = self
                .conn
                .prepare("SELECT graph, column_name, distinct_count FROM kypher_indexes")?;
            let mut rows = stmt.query([])?;
            while let Some(row) = rows.next()? {
                let graph: String = row.get(0)?;
                let column: String = row.get(1)?;
                let distinct: i64 = row.get(2)?;
                let Some(d) = catalog.get_mut(&graph) else {
                    return Err(self.corrupt(format!("index on unknown graph {graph:?}")));
                };
                if d.schema.position(&column).is_none() {
                    return Err(self.corrupt(format!("index on unknown column {graph}.{column}")));
                }
                d.indexes.insert(column, distinct as u64);
            }
        }
        let referenced: BTreeSet<&String> = catalog.values().map(|d| &d.table).collect();
        let orphans: Vec<&String> = tables.iter().filter(|t| !referenced.contains(t)).collect();
        if !orphans.is_empty() {
            let tx = self.conn.unchecked_transaction()?;
            for t in orphans {
                tx.execute_batch(&format!("DROP TABLE IF EXISTS {t}"))?;
            }
            tx.commit()?;
        }
        self.catalog = catalog;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    pub fn graphs(&self) -> impl Iterator<Item = &GraphDescriptor> {
        self.catalog.values()
    }

    pub fn descriptor(&self, name: &str) -> Option<&GraphDescriptor> {
        self.catalog.get(name)
    }

    pub(crate) fn connection(&self) -> &Connection {
        &self.conn
    }

    /// Imports `file` under `alias` (or its file-name stem). Importing an
    /// unchanged file again is a no-op that returns the stored descriptor.
    pub fn import_graph(&mut self, file: &Path, alias: Option<&str>) -> Result<GraphDescriptor> {
        let name = match alias {
            Some(a) => a.to_string(),
            None => graph_name_from_path(file),
        };
        if name.is_empty() || name.contains(['\t', '\n']) {
            return Err(Error::semantic(format!("invalid graph name {name:?}")));
        }
        let source = fs::canonicalize(file).map_err(|e| Error::Import {
            path: file.to_path_buf(),
            source: Box::new(e.into()),
        })?;
        if let Some(existing) = self.catalog.get(&name) {
            if existing.source != source {
                return Err(Error::NameCollision {
                    name,
                    existing: existing.source.clone(),
                });
            }
            return self.ensure_fresh(&name);
        }
        self.load(&name, &source, &[])
    }

    /// Re-imports `name` when its source content changed, rebuilding the
    /// indexes it had.
    pub fn ensure_fresh(&mut self, name: &str) -> Result<GraphDescriptor> {
        let desc = self.catalog.get(name).cloned().ok_or_else(|| Error::UnknownGraph {
            name: name.to_string(),
            available: self.catalog.keys().cloned().collect(),
        })?;
        self.stats.freshness_checks += 1;
        let stale = |e: io::Error| {
            if e.kind() == io::ErrorKind::NotFound {
                Error::StaleSource {
                    name: name.to_string(),
                    path: desc.source.clone(),
                }
            } else {
                Error::Io(e)
            }
        };
        let (size, mtime_ns) = stat(&desc.source).map_err(stale)?;
        if size == desc.fingerprint.size {
            let hash = content_hash(&desc.source).map_err(stale)?;
            if hash == desc.fingerprint.content_hash {
                if mtime_ns != desc.fingerprint.mtime_ns {
                    self.conn.execute(
                        "UPDATE kypher_graphs SET mtime_ns = ?1 WHERE name = ?2",
                        params![mtime_ns, name],
                    )?;
                    let d = self.catalog.get_mut(name).expect("present");
                    d.fingerprint.mtime_ns = mtime_ns;
                }
                return Ok(self.catalog[name].clone());
            }
        }
        let indexes: Vec<String> = desc.indexes.keys().cloned().collect();
        self.load(name, &desc.source.clone(), &indexes)
    }

    fn load(&mut self, name: &str, source: &Path, indexes: &[String]) -> Result<GraphDescriptor> {
        let wrap = |e: Error| Error::Import {
            path: source.to_path_buf(),
            source: Box::new(e),
        };
        let fingerprint = Fingerprint::of(source).map_err(|e| wrap(e.into()))?;
        let tx = self.conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let next: i64 = tx.query_row("SELECT value FROM kypher_meta WHERE key = 'next_table'", [], |r| {
            r.get::<_, String>(0)
        })?
        .parse()
        .map_err(|_| Error::CorruptCache {
            path: self.path.clone(),
            reason: "bad table counter".into(),
        })?;
        tx.execute(
            "UPDATE kypher_meta SET value = ?1 WHERE key = 'next_table'",
            params![(next + 1).to_string()],
        )?;
        let table = format!("graph_{next}");

        let (schema, records) = read_edges(source, true).map_err(wrap)?;
        let width = schema.len();
        let cols: Vec<String> = (0..width).map(|i| format!("c{i} TEXT NOT NULL")).collect();
        tx.execute_batch(&format!("CREATE TABLE {table} ({})", cols.join(", ")))?;
        let mut edge_count = 0u64;
        {
            let placeholders: Vec<String> = (1..=width).map(|i| format!("?{i}")).collect();
            let mut insert = tx.prepare(&format!("INSERT INTO {table} VALUES ({})", placeholders.join(", ")))?;
            let mut cells: Vec<String> = Vec::with_capacity(width);
            for record in records {
                let record = record.map_err(wrap)?;
                cells.clear();
                cells.extend(record.cells.iter().map(|v| v.to_string()));
                insert.execute(rusqlite::params_from_iter(cells.iter()))?;
                edge_count += 1;
            }
        }
        let previous = self.catalog.get(name).map(|d| d.table.clone());
        if let Some(old) = &previous {
            tx.execute_batch(&format!("DROP TABLE IF EXISTS {old}"))?;
        }
        tx.execute("DELETE FROM kypher_indexes WHERE graph = ?1", params![name])?;
        tx.execute(
            "INSERT OR REPLACE INTO kypher_graphs VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)",
            params![
                name,
                table,
                source.to_string_lossy(),
                fingerprint.size as i64,
                fingerprint.mtime_ns,
                fingerprint.content_hash,
                schema.header_line(),
                edge_count as i64
            ],
        )?;
        let mut descriptor = GraphDescriptor {
            name: name.to_string(),
            source: source.to_path_buf(),
            fingerprint,
            schema,
            indexes: BTreeMap::new(),
            edge_count,
            table,
        };
        let mut builds = 0;
        for column in indexes {
            if descriptor.schema.position(column).is_some() {
                let distinct = build_index(&tx, &descriptor, column)?;
                descriptor.indexes.insert(column.clone(), distinct);
                builds += 1;
            }
        }
        tx.commit()?;
        self.stats.imports += 1;
        self.stats.index_builds += builds;
        self.catalog.insert(name.to_string(), descriptor.clone());
        Ok(descriptor)
    }

    /// Makes sure `column` of graph `name` is indexed. Idempotent.
    pub fn ensure_index(&mut self, name: &str, column: &str) -> Result<()> {
        let desc = self.catalog.get(name).ok_or_else(|| Error::UnknownGraph {
            name: name.to_string(),
            available: self.catalog.keys().cloned().collect(),
        })?;
        if desc.schema.position(column).is_none() {
            return Err(Error::Schema(format!("graph {name:?} has no column {column:?}")));
        }
        if desc.has_index(column) {
            return Ok(());
        }
        let tx = self.conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let distinct = build_index(&tx, desc, column)?;
        tx.commit()?;
        self.stats.index_builds += 1;
        self.catalog
            .get_mut(name)
            .expect("present")
            .indexes
            .insert(column.to_string(), distinct);
        Ok(())
    }
}

fn build_index(conn: &Connection, desc: &GraphDescriptor, column: &str) -> Result<u64> {
    let col = desc.column_sql(column).expect("column checked by caller");
    let index = desc.index_name(column).expect("column checked by caller");
    conn.execute_batch(&format!("CREATE INDEX IF NOT EXISTS {index} ON {} ({col})", desc.table))?;
    let distinct: i64 = conn.query_row(&format!("SELECT COUNT(DISTINCT {col}) FROM {}", desc.table), [], |r| {
        r.get(0)
    })?;
    conn.execute(
        "INSERT OR REPLACE INTO kypher_indexes VALUES (?1, ?2, ?3)",
        params![desc.name, column, distinct],
    )?;
    Ok(distinct as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(path: &Path, text: &str) {
        fs::write(path, text).unwrap();
    }

    #[test]
    fn derives_names_from_file_names() {
        assert_eq!(graph_name_from_path(Path::new("/x/labels.tsv.gz")), "labels");
        assert_eq!(graph_name_from_path(Path::new("p31.tsv")), "p31");
        assert_eq!(graph_name_from_path(Path::new("out/class.count.tsv.gz")), "class.count");
        assert_eq!(graph_name_from_path(Path::new("items")), "items");
    }

    #[test]
    fn fresh_cache_is_empty_and_reopens() {
        let dir = tempfile::tempdir().unwrap();
        let cache_path = dir.path().join("sub/cache.db");
        let p31 = dir.path().join("p31.tsv");
        let labels = dir.path().join("labels.tsv");
        write(&p31, "node1\tlabel\tnode2\nQ1\tP31\tQ5\nQ2\tP31\tQ5\n");
        write(&labels, "node1\tlabel\tnode2\nQ1\tlabel\t'a'@en\n");
        {
            let mut cache = GraphCache::open(&cache_path).unwrap();
            assert_eq!(cache.graphs().count(), 0);
            cache.import_graph(&p31, None).unwrap();
            cache.import_graph(&labels, None).unwrap();
            cache.ensure_index("p31", "node2").unwrap();
        }
        let cache = GraphCache::open(&cache_path).unwrap();
        let names: Vec<_> = cache.graphs().map(|d| (d.name.clone(), d.edge_count)).collect();
        assert_eq!(names, vec![("labels".to_string(), 1), ("p31".to_string(), 2)]);
        assert!(cache.descriptor("p31").unwrap().has_index("node2"));
        assert_eq!(cache.descriptor("p31").unwrap().indexes["node2"], 1);
    }

    #[test]
    fn non_cache_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("notes.txt");
        write(&path, "this is not a cache\n");
        assert!(matches!(GraphCache::open(&path), Err(Error::CorruptCache { .. })));
        assert!(matches!(GraphCache::open(dir.path()), Err(Error::CorruptCache { .. })));
    }

    #[test]
    fn unchanged_reimport_is_a_noop() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p31.tsv");
        write(&file, "node1\tlabel\tnode2\nQ1\tP31\tQ5\n");
        let mut cache = GraphCache::open(dir.path().join("c.db")).unwrap();
        let a = cache.import_graph(&file, None).unwrap();
        let b = cache.import_graph(&file, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.stats().imports, 1);
    }

    #[test]
    fn alias_names_the_graph() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("class.count.tsv.gz");
        let schema = ColumnSchema::edges(["node1", "node2", "label"]).unwrap();
        crate::io::write_edges(&file, &schema, Vec::new()).unwrap();
        let mut cache = GraphCache::open(dir.path().join("c.db")).unwrap();
        let d = cache.import_graph(&file, Some("count")).unwrap();
        assert_eq!(d.name, "count");
        assert_eq!(d.edge_count, 0);
    }

    #[test]
    fn name_collisions_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.tsv");
        let b = dir.path().join("b.tsv");
        write(&a, "node1\tlabel\tnode2\nQ1\tP31\tQ5\n");
        write(&b, "node1\tlabel\tnode2\nQ2\tP31\tQ5\n");
        let mut cache = GraphCache::open(dir.path().join("c.db")).unwrap();
        cache.import_graph(&a, Some("g")).unwrap();
        assert!(matches!(cache.import_graph(&b, Some("g")), Err(Error::NameCollision { .. })));
    }

    #[test]
    fn touch_without_change_does_not_reimport() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p31.tsv");
        write(&file, "node1\tlabel\tnode2\nQ1\tP31\tQ5\n");
        let mut cache = GraphCache::open(dir.path().join("c.db")).unwrap();
        cache.import_graph(&file, None).unwrap();
        let later = std::time::SystemTime::now() + Duration::from_secs(5);
        File::options().write(true).open(&file).unwrap().set_modified(later).unwrap();
        let d = cache.ensure_fresh("p31").unwrap();
        assert_eq!(cache.stats().imports, 1);
        assert_eq!(d.fingerprint.mtime_ns, stat(&file).unwrap().1);
    }

    #[test]
    fn appended_edge_triggers_reimport_and_keeps_indexes() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p31.tsv");
        write(&file, "node1\tlabel\tnode2\nQ1\tP31\tQ5\n");
        let mut cache = GraphCache::open(dir.path().join("c.db")).unwrap();
        cache.import_graph(&file, None).unwrap();
        cache.ensure_index("p31", "node1").unwrap();
        fs::OpenOptions::new()
            .append(true)
            .open(&file)
            .unwrap()
            .write_all(b"Q2\tP31\tQ5\n")
            .unwrap();
        let d = cache.ensure_fresh("p31").unwrap();
        assert_eq!(d.edge_count, 2);
        assert!(d.has_index("node1"));
        assert_eq!(cache.stats().imports, 2);
        assert_eq!(cache.stats().index_builds, 2);
    }

    #[test]
    fn deleted_source_is_stale() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p31.tsv");
        write(&file, "node1\tlabel\tnode2\nQ1\tP31\tQ5\n");
        let mut cache = GraphCache::open(dir.path().join("c.db")).unwrap();
        cache.import_graph(&file, None).unwrap();
        fs::remove_file(&file).unwrap();
        match cache.ensure_fresh("p31") {
            Err(Error::StaleSource { path, .. }) => assert!(path.ends_with("p31.tsv")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ensure_index_is_idempotent_and_checks_columns() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("labels.tsv");
        write(&file, "node1\tlabel\tnode2\nQ1\tlabel\t'a'@en\n");
        let mut cache = GraphCache::open(dir.path().join("c.db")).unwrap();
        cache.import_graph(&file, None).unwrap();
        cache.ensure_index("labels", "node1").unwrap();
        cache.ensure_index("labels", "node1").unwrap();
        assert_eq!(cache.stats().index_builds, 1);
        assert!(matches!(cache.ensure_index("labels", "nope"), Err(Error::Schema(_))));
    }

    #[test]
    fn failed_import_keeps_previous_table() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p31.tsv");
        write(&file, "node1\tlabel\tnode2\nQ1\tP31\tQ5\nQ2\tP31\tQ5\n");
        let cache_path = dir.path().join("c.db");
        let mut cache = GraphCache::open(&cache_path).unwrap();
        let before = cache.import_graph(&file, None).unwrap();
        // truncate mid-row
        write(&file, "node1\tlabel\tnode2\nQ1\tP31\tQ5\nQ2\tP3");
        assert!(matches!(cache.ensure_fresh("p31"), Err(Error::Import { .. })));
        assert_eq!(cache.descriptor("p31").unwrap(), &before);
        drop(cache);
        let reopened = GraphCache::open(&cache_path).unwrap();
        assert_eq!(reopened.descriptor("p31").unwrap(), &before);
        let n: i64 = reopened
            .connection()
            .query_row(&format!("SELECT COUNT(*) FROM {}", before.table), [], |r| r.get(0))
            .unwrap();
        assert_eq!(n, 2);
    }
}
