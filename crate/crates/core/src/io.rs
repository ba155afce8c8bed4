//! Streaming read and write of KGTK TSV edge files, with transparent gzip.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::model::{ColumnSchema, EdgeRecord, Role};
use crate::value::{parse_value, KgtkValue};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];
const READ_BUFFER: usize = 1 << 16;

fn has_gz_suffix(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

/// Opens a file for line reading, decompressing when the path ends in `.gz`
/// or the content starts with the gzip magic bytes.
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let reader = detect_gzip(BufReader::with_capacity(READ_BUFFER, file))?;
    if has_gz_suffix(path) && !reader.1 {
        return Err(Error::Schema(format!("{} is not gzip-compressed", path.display())));
    }
    Ok(reader.0)
}

fn detect_gzip<R: BufRead + 'static>(mut reader: R) -> Result<(Box<dyn BufRead>, bool)> {
    let head = reader.fill_buf()?;
    if head.len() >= 2 && head[..2] == GZIP_MAGIC {
        let decoder = MultiGzDecoder::new(reader);
        Ok((Box::new(BufReader::with_capacity(READ_BUFFER, decoder)), true))
    } else {
        Ok((Box::new(reader), false))
    }
}

/// Reads the header of `path` and returns a record stream positioned after it.
pub fn read_edges(path: &Path, header_expected: bool) -> Result<(ColumnSchema, EdgeReader)> {
    EdgeReader::new(open_text(path)?, header_expected)
}

/// As [`read_edges`], over an arbitrary byte stream.
pub fn read_edges_from<R: Read + 'static>(source: R, header_expected: bool) -> Result<(ColumnSchema, EdgeReader)> {
    let (reader, _) = detect_gzip(BufReader::with_capacity(READ_BUFFER, source))?;
    EdgeReader::new(reader, header_expected)
}

/// Lazily yields one validated [`EdgeRecord`] per data line.
pub struct EdgeReader {
    reader: Box<dyn BufRead>,
    schema: ColumnSchema,
    line: u64,
    buf: String,
    pending: Option<String>,
}

impl EdgeReader {
    fn new(mut reader: Box<dyn BufRead>, header_expected: bool) -> Result<(ColumnSchema, Self)> {
        let mut buf = String::new();
        let mut line = 0;
        let (schema, pending) = if header_expected {
            line += 1;
            if read_line(&mut reader, &mut buf, line)? == 0 {
                return Err(Error::Schema("missing header line".into()));
            }
            (ColumnSchema::edges(trim_eol(&buf).split('\t'))?, None)
        } else {
            // Peek at the first data line to decide between the 3- and 4-column layouts.
            let n = read_line(&mut reader, &mut buf, 1)?;
            let width = if n == 0 { 3 } else { trim_eol(&buf).split('\t').count() };
            let columns: &[&str] = match width {
                1 => &["node1"],
                3 => &["node1", "label", "node2"],
                4 => &["node1", "label", "node2", "id"],
                w => return Err(Error::Schema(format!("cannot infer roles of a headerless {w}-column file"))),
            };
            (ColumnSchema::edges(columns.iter().copied())?, (n > 0).then(|| buf.clone()))
        };
        let edge_reader = EdgeReader {
            reader,
            schema: schema.clone(),
            line,
            buf,
            pending,
        };
        Ok((schema, edge_reader))
    }

    pub fn schema(&self) -> &ColumnSchema {
        &self.schema
    }

    /// 1-based line number of the most recently returned record.
    pub fn line(&self) -> u64 {
        self.line
    }

    fn next_line(&mut self) -> Result<bool> {
        if let Some(p) = self.pending.take() {
            self.buf = p;
            self.line += 1;
            return Ok(true);
        }
        loop {
            self.line += 1;
            if read_line(&mut self.reader, &mut self.buf, self.line)? == 0 {
                return Ok(false);
            }
            if !trim_eol(&self.buf).is_empty() {
                return Ok(true);
            }
        }
    }

    fn parse_current(&self) -> Result<EdgeRecord> {
        let text = trim_eol(&self.buf);
        let width = self.schema.len();
        let found = text.split('\t').count();
        if found != width {
            return Err(self.row_error(format!("expected {width} columns, found {found}")));
        }
        let mut cells = Vec::with_capacity(width);
        for cell in text.split('\t') {
            cells.push(parse_value(cell).map_err(|e| self.row_error(e.to_string()))?);
        }
        let record = EdgeRecord::new(cells);
        for role in [Role::Node1, Role::Label] {
            if self.schema.role(role).is_some() && record.get(&self.schema, role).is_empty() {
                return Err(self.row_error(format!("empty {role} cell")));
            }
        }
        Ok(record)
    }

    fn row_error(&self, message: String) -> Error {
        Error::Row {
            line: self.line,
            message,
        }
    }
}

impl Iterator for EdgeReader {
    type Item = Result<EdgeRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.next_line() {
            Ok(true) => Some(self.parse_current()),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

fn read_line(reader: &mut dyn BufRead, buf: &mut String, line: u64) -> Result<usize> {
    buf.clear();
    reader.read_line(buf).map_err(|e| {
        if e.kind() == io::ErrorKind::InvalidData {
            Error::Row {
                line,
                message: "invalid UTF-8".into(),
            }
        } else {
            Error::Io(e)
        }
    })
}

fn trim_eol(line: &str) -> &str {
    let line = line.strip_suffix('\n').unwrap_or(line);
    line.strip_suffix('\r').unwrap_or(line)
}

enum Sink {
    Plain(Box<dyn Write>),
    Gzip(GzEncoder<BufWriter<File>>),
}

impl Sink {
    fn writer(&mut self) -> &mut dyn Write {
        match self {
            Sink::Plain(w) => w,
            Sink::Gzip(w) => w,
        }
    }
}

/// Writes a header and LF-terminated rows; `finish` returns the row count.
pub struct EdgeWriter {
    sink: Sink,
    width: usize,
    rows: u64,
    line: String,
}

impl EdgeWriter {
    /// Creates `path`, compressing when it ends in `.gz`.
    pub fn create(path: &Path, schema: &ColumnSchema) -> Result<Self> {
        let file = BufWriter::with_capacity(READ_BUFFER, File::create(path)?);
        let sink = if has_gz_suffix(path) {
            Sink::Gzip(GzEncoder::new(file, Compression::fast()))
        } else {
            Sink::Plain(Box::new(file))
        };
        Self::start(sink, schema)
    }

    pub fn to_writer(writer: Box<dyn Write>, schema: &ColumnSchema) -> Result<Self> {
        Self::start(Sink::Plain(writer), schema)
    }

    fn start(mut sink: Sink, schema: &ColumnSchema) -> Result<Self> {
        let w = sink.writer();
        w.write_all(schema.header_line().as_bytes())?;
        w.write_all(b"\n")?;
        Ok(EdgeWriter {
            sink,
            width: schema.len(),
            rows: 0,
            line: String::new(),
        })
    }

    pub fn write_row(&mut self, cells: &[KgtkValue]) -> Result<()> {
        use std::fmt::Write as _;
        if cells.len() != self.width {
            return Err(Error::Schema(format!(
                "row has {} cells, schema has {} columns",
                cells.len(),
                self.width
            )));
        }
        self.line.clear();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.line.push('\t');
            }
            let _ = write!(self.line, "{cell}");
        }
        self.line.push('\n');
        self.sink.writer().write_all(self.line.as_bytes())?;
        self.rows += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<u64> {
        match self.sink {
            Sink::Plain(mut w) => w.flush()?,
            Sink::Gzip(w) => w.finish()?.flush()?,
        }
        Ok(self.rows)
    }
}

/// Writes `rows` to `path` under `schema`, returning the number of rows.
pub fn write_edges<I>(path: &Path, schema: &ColumnSchema, rows: I) -> Result<u64>
where
    I: IntoIterator<Item = EdgeRecord>,
{
    let mut writer = EdgeWriter::create(path, schema)?;
    for row in rows {
        writer.write_row(&row.cells)?;
    }
    writer.finish()
}

/// As [`write_edges`], into an arbitrary byte sink (uncompressed).
pub fn write_edges_to<W, I>(sink: W, schema: &ColumnSchema, rows: I) -> Result<u64>
where
    W: Write + 'static,
    I: IntoIterator<Item = EdgeRecord>,
{
    let mut writer = EdgeWriter::to_writer(Box::new(sink), schema)?;
    for row in rows {
        writer.write_row(&row.cells)?;
    }
    writer.finish()
}
