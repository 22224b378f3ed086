//! On-disk dataset formats.
//!
//! `packed` is a single little-endian binary file:
//!
//! ```text
//! "SATF" | u32 version = 1 | u32 count
//! per record: u32 n | u32 m | u8 label (0 UNSAT, 1 SAT) | u8 option id | u16 reserved = 0 | m*n i8 cells, row-major
//! ```
//!
//! `dimacs-dir` is one `NNNNN.cnf` file per record plus `labels.tsv` with
//! lines `filename<TAB>label<TAB>n<TAB>m`. Both write `manifest.json`.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mix::DatasetRecord;
use crate::cnf::{parse_dimacs, serialize_dimacs, Cnf, DenseEncoding, Label, ParseError, ParseMode};

pub const PACKED_MAGIC: &[u8; 4] = b"SATF";
pub const PACKED_VERSION: u32 = 1;
pub const PACKED_FILE: &str = "dataset.satf";
pub const LABELS_FILE: &str = "labels.tsv";
pub const MANIFEST_FILE: &str = "manifest.json";
/// Option id stored when a record's generator is not known.
pub const UNKNOWN_OPTION: u8 = u8::MAX;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Dimacs { path: PathBuf, source: ParseError },
    #[error("record too large for the packed format: n={n}, m={m}")]
    TooLarge { n: usize, m: usize },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io { path: path.to_path_buf(), source }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    DimacsDir,
    Packed,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::DimacsDir => "dimacs-dir",
            Format::Packed => "packed",
        }
    }
}

/// Record caps applied at export; oversize records are skipped and counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExportCaps {
    pub max_vars: Option<usize>,
    pub max_clauses: Option<usize>,
}

impl ExportCaps {
    pub fn admits(&self, n: usize, m: usize) -> bool {
        self.max_vars.is_none_or(|c| n <= c) && self.max_clauses.is_none_or(|c| m <= c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: Format,
    pub records: usize,
    pub sat: usize,
    pub unsat: usize,
    pub skipped: usize,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest, ExportError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| ExportError::Format { path, msg: e.to_string() })
    }

    fn write(&self, dir: &Path) -> Result<(), ExportError> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))
    }
}

/// A record as stored in a dataset file, without provenance beyond the option id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredRecord {
    pub encoding: DenseEncoding,
    pub label: Label,
    pub option_id: u8,
}

impl StoredRecord {
    pub fn n(&self) -> usize {
        self.encoding.cols()
    }

    pub fn m(&self) -> usize {
        self.encoding.rows()
    }

    pub fn to_cnf(&self) -> Cnf {
        Cnf::from_dense(&self.encoding)
    }
}

impl From<&DatasetRecord> for StoredRecord {
    fn from(r: &DatasetRecord) -> Self {
        StoredRecord { encoding: r.encoding.clone(), label: r.label, option_id: r.option_id }
    }
}

enum Sink {
    Packed { path: PathBuf, out: Option<BufWriter<File>> },
    Dimacs { labels: Option<BufWriter<File>> },
}

/// Streaming dataset writer. Files are created lazily, so an export with no
/// records leaves only the manifest behind.
pub struct Exporter {
    dir: PathBuf,
    format: Format,
    caps: ExportCaps,
    sink: Sink,
    written: usize,
    sat: usize,
    skipped: usize,
    seed: Option<u64>,
    config_hash: Option<String>,
}

impl Exporter {
    pub fn create(dir: &Path, format: Format, caps: ExportCaps) -> Result<Exporter, ExportError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let sink = match format {
            Format::Packed => Sink::Packed { path: dir.join(PACKED_FILE), out: None },
            Format::DimacsDir => Sink::Dimacs { labels: None },
        };
        Ok(Exporter {
            dir: dir.to_path_buf(),
            format,
            caps,
            sink,
            written: 0,
            sat: 0,
            skipped: 0,
            seed: None,
            config_hash: None,
        })
    }

    pub fn with_provenance(mut self, seed: Option<u64>, config_hash: Option<String>) -> Self {
        self.seed = seed;
        self.config_hash = config_hash;
        self
    }

    pub fn push(&mut self, rec: &StoredRecord) -> Result<(), ExportError> {
        let (n, m) = (rec.n(), rec.m());
        if !self.caps.admits(n, m) {
            self.skipped += 1;
            return Ok(());
        }
        match &mut self.sink {
            Sink::Packed { path, out } => {
                let (n32, m32) = match (u32::try_from(n), u32::try_from(m)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => return Err(ExportError::TooLarge { n, m }),
                };
                if out.is_none() {
                    let mut w = BufWriter::new(File::create(&*path).map_err(io_err(path))?);
                    w.write_all(PACKED_MAGIC).map_err(io_err(path))?;
                    w.write_all(&PACKED_VERSION.to_le_bytes()).map_err(io_err(path))?;
                    // count is patched in `finish`
                    w.write_all(&0u32.to_le_bytes()).map_err(io_err(path))?;
                    *out = Some(w);
                }
                let w = out.as_mut().expect("opened above");
                let mut head = [0u8; 12];
                head[0..4].copy_from_slice(&n32.to_le_bytes());
                head[4..8].copy_from_slice(&m32.to_le_bytes());
                head[8] = rec.label.to_byte();
                head[9] = rec.option_id;
                w.write_all(&head).map_err(io_err(path))?;
                let cells: Vec<u8> = rec.encoding.cells().iter().map(|&c| c as u8).collect();
                w.write_all(&cells).map_err(io_err(path))?;
            }
            Sink::Dimacs { labels } => {
                let name = format!("{:05}.cnf", self.written);
                let path = self.dir.join(&name);
                fs::write(&path, serialize_dimacs(&rec.to_cnf())).map_err(io_err(&path))?;
                let lpath = self.dir.join(LABELS_FILE);
                if labels.is_none() {
                    *labels = Some(BufWriter::new(File::create(&lpath).map_err(io_err(&lpath))?));
                }
                let w = labels.as_mut().expect("opened above");
                writeln!(w, "{name}\t{}\t{n}\t{m}", rec.label).map_err(io_err(&lpath))?;
            }
        }
        self.written += 1;
        if rec.label == Label::Sat {
            self.sat += 1;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Manifest, ExportError> {
        match self.sink {
            Sink::Packed { path, out: Some(w) } => {
                let mut f =
                    w.into_inner().map_err(|e| ExportError::Io { path: path.clone(), source: e.into_error() })?;
                let count = u32::try_from(self.written).map_err(|_| ExportError::Format {
                    path: path.clone(),
                    msg: "more than u32::MAX records".into(),
                })?;
                f.seek(SeekFrom::Start(8)).map_err(io_err(&path))?;
                f.write_all(&count.to_le_bytes()).map_err(io_err(&path))?;
                f.flush().map_err(io_err(&path))?;
            }
            Sink::Dimacs { labels: Some(mut w) } => {
                let lpath = self.dir.join(LABELS_FILE);
                w.flush().map_err(io_err(&lpath))?;
            }
            _ => {}
        }
        let manifest = Manifest {
            format: self.format,
            records: self.written,
            sat: self.sat,
            unsat: self.written - self.sat,
            skipped: self.skipped,
            seed: self.seed,
            config_hash: self.config_hash,
        };
        manifest.write(&self.dir)?;
        Ok(manifest)
    }
}

/// Writes `records` to `dir` in one go.
pub fn export_dataset(
    records: &[DatasetRecord],
    dir: &Path,
    format: Format,
    caps: ExportCaps,
) -> Result<Manifest, ExportError> {
    let mut ex = Exporter::create(dir, format, caps)?;
    if let Some(r) = records.first() {
        ex = ex.with_provenance(Some(r.seed), None);
    }
    for r in records {
        ex.push(&r.into())?;
    }
    ex.finish()
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32, ExportError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(io_err(path))?;
    Ok(u32::from_le_bytes(b))
}

/// Reads a whole packed file.
pub fn read_packed(path: &Path) -> Result<Vec<StoredRecord>, ExportError> {
    let mut r = BufReader::new(File::open(path).map_err(io_err(path))?);
    let bad = |msg: String| ExportError::Format { path: path.to_path_buf(), msg };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err(path))?;
    if &magic != PACKED_MAGIC {
        return Err(bad("not a packed dataset (bad magic)".into()));
    }
    let version = read_u32(&mut r, path)?;
    if version != PACKED_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let count = read_u32(&mut r, path)? as usize;
    let mut out = Vec::with_capacity(count.min(1 << 16));
    for i in 0..count {
        let n = read_u32(&mut r, path)? as usize;
        let m = read_u32(&mut r, path)? as usize;
        let mut tail = [0u8; 4];
        r.read_exact(&mut tail).map_err(io_err(path))?;
        let label = Label::from_byte(tail[0]).ok_or_else(|| bad(format!("record {i}: bad label byte {}", tail[0])))?;
        let mut cells = vec![0u8; n * m];
        r.read_exact(&mut cells).map_err(io_err(path))?;
        let cells = cells.into_iter().map(|b| b as i8).collect();
        let encoding = DenseEncoding::from_cells(m, n, cells).map_err(|e| bad(format!("record {i}: {e}")))?;
        out.push(StoredRecord { encoding, label, option_id: tail[1] });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io_err(path))? != 0 {
        return Err(bad("trailing bytes after the last record".into()));
    }
    Ok(out)
}

/// One line of `labels.tsv`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelEntry {
    pub file: String,
    pub label: Label,
    pub n: usize,
    pub m: usize,
}

pub fn read_labels(dir: &Path) -> Result<Vec<LabelEntry>, ExportError> {
    let path = dir.join(LABELS_FILE);
    let file = match File::open(&path) {
        Ok(f) => f,
        // no records were exported
        Err(e) if e.kind() == io::ErrorKind::NotFound && dir.join(MANIFEST_FILE).exists() => return Ok(Vec::new()),
        Err(e) => return Err(ExportError::Io { path, source: e }),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&path))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad =
            || ExportError::Format { path: path.clone(), msg: format!("line {}: expected file, label, n, m", i + 1) };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(bad());
        }
        out.push(LabelEntry {
            file: f[0].to_string(),
            label: Label::from_str(f[1]).map_err(|_| bad())?,
            n: f[2].parse().map_err(|_| bad())?,
            m: f[3].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// Reads a dimacs-dir dataset back, checking each file against its label line.
pub fn read_dimacs_dir(dir: &Path) -> Result<Vec<StoredRecord>, ExportError> {
    read_labels(dir)?
        .into_iter()
        .map(|e| {
            let path = dir.join(&e.file);
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let cnf = parse_dimacs(&text, ParseMode::Strict)
                .map_err(|source| ExportError::Dimacs { path: path.clone(), source })?;
            if (cnf.num_vars(), cnf.num_clauses()) != (e.n, e.m) {
                return Err(ExportError::Format { path, msg: "shape disagrees with labels.tsv".into() });
            }
            Ok(StoredRecord { encoding: cnf.to_dense(), label: e.label, option_id: UNKNOWN_OPTION })
        })
        .collect()
}

/// Reads either format: a packed file, or a directory holding one.
pub fn read_dataset(path: &Path) -> Result<Vec<StoredRecord>, ExportError> {
    if path.is_file() {
        return read_packed(path);
    }
    let packed = path.join(PACKED_FILE);
    if packed.is_file() {
        return read_packed(&packed);
    }
    if path.join(LABELS_FILE).is_file() {
        return read_dimacs_dir(path);
    }
    match Manifest::read(path) {
        Ok(_) => Ok(Vec::new()),
        Err(_) => Err(ExportError::Format { path: path.to_path_buf(), msg: "no dataset found".into() }),
    }
}
