//! Dataset ingestion and metadata profiling.
//!
//! Every downstream stage consumes [`MetadataRecord`]s. A record is built from
//! the header row of a delimited text file, a per-column profile (inferred
//! type and null fraction) and an optional JSON sidecar stored next to the
//! file as `<stem>.meta.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Suffix appended to a dataset's file stem to locate its sidecar.
pub const SIDECAR_SUFFIX: &str = ".meta.json";

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "at", "by", "for", "in", "of", "on", "or", "per", "the", "to", "with",
];

const BOOLEAN_WORDS: &[&str] = &["true", "false", "yes", "no"];

const DATE_FORMATS: &[&str] = &["%Y-%m-%d", "%Y/%m/%d", "%d/%m/%Y", "%m/%d/%Y", "%d-%m-%Y", "%d.%m.%Y"];

const DATETIME_FORMATS: &[&str] = &["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRef {
    pub id: String,
    pub path: PathBuf,
    pub row_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferredType {
    Text,
    Integer,
    Decimal,
    Date,
    Boolean,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDescriptor {
    pub dataset_id: String,
    pub name: String,
    pub norm_tokens: Vec<String>,
    pub inferred_type: InferredType,
    pub null_fraction: f64,
}

impl ColumnDescriptor {
    /// `datasetId.column`
    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.dataset_id, self.name)
    }

    pub fn joined(&self) -> String {
        self.norm_tokens.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetadataKind {
    Administrative,
    Structural,
    Descriptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataRecord {
    pub dataset: DatasetRef,
    pub columns: Vec<ColumnDescriptor>,
    pub kinds: BTreeMap<MetadataKind, Vec<String>>,
    pub domain_tags: BTreeSet<String>,
}

impl MetadataRecord {
    pub fn id(&self) -> &str {
        &self.dataset.id
    }

    /// Concatenated descriptive entries, if any.
    pub fn description(&self) -> Option<String> {
        let entries = self.kinds.get(&MetadataKind::Descriptive)?;
        if entries.is_empty() {
            return None;
        }
        Some(entries.join(" "))
    }
}

/// Optional enrichment document stored beside a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    #[serde(default)]
    pub domain_tags: Vec<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub administrative: Option<String>,
}

impl Sidecar {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Document {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Sidecar location for a dataset file: same directory, same stem, `.meta.json`.
pub fn sidecar_path_for(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{SIDECAR_SUFFIX}"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeOptions {
    pub remove_stopwords: bool,
}

/// Lowercases and splits on every non-alphanumeric character.
///
/// ```
/// assert_eq!(cognate::catalog::normalize_text("Accident_Date"), ["accident", "date"]);
/// ```
pub fn normalize_text(raw: &str) -> Vec<String> {
    normalize_text_with(raw, &NormalizeOptions::default())
}

pub fn normalize_text_with(raw: &str, opts: &NormalizeOptions) -> Vec<String> {
    raw.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|frag| !frag.is_empty())
        .map(str::to_string)
        .filter(|tok| !(opts.remove_stopwords && STOPWORDS.contains(&tok.as_str())))
        .collect()
}

fn classify_cell(cell: &str) -> InferredType {
    if cell.parse::<i64>().is_ok() {
        return InferredType::Integer;
    }
    if cell.bytes().any(|b| b.is_ascii_digit())
        && cell.parse::<f64>().map(f64::is_finite).unwrap_or(false)
    {
        return InferredType::Decimal;
    }
    if DATE_FORMATS
        .iter()
        .any(|f| NaiveDate::parse_from_str(cell, f).is_ok())
        || DATETIME_FORMATS
            .iter()
            .any(|f| NaiveDateTime::parse_from_str(cell, f).is_ok())
    {
        return InferredType::Date;
    }
    if BOOLEAN_WORDS.contains(&cell.to_ascii_lowercase().as_str()) {
        return InferredType::Boolean;
    }
    InferredType::Text
}

/// Infers a column's type by plurality vote over its non-empty cells and
/// reports the fraction of empty cells.
///
/// Each cell is classified by the first parse that succeeds in the order
/// integer, decimal, date, boolean, text. A tie for the top count yields
/// [`InferredType::Unknown`], as does a column without non-empty cells.
pub fn profile_column<S: AsRef<str>>(values: &[S]) -> (InferredType, f64) {
    let total = values.len();
    let mut nulls = 0usize;
    let mut counts: BTreeMap<InferredType, usize> = BTreeMap::new();
    for v in values {
        let cell = v.as_ref().trim();
        if cell.is_empty() {
            nulls += 1;
        } else {
            *counts.entry(classify_cell(cell)).or_default() += 1;
        }
    }
    let null_fraction = if total == 0 {
        0.0
    } else {
        nulls as f64 / total as f64
    };

    let best = counts.values().copied().max().unwrap_or(0);
    let mut leaders = counts.iter().filter(|(_, &n)| n == best);
    let inferred = match (leaders.next(), leaders.next()) {
        (Some((&ty, _)), None) => ty,
        _ => InferredType::Unknown,
    };
    (inferred, null_fraction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub normalize: NormalizeOptions,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            normalize: NormalizeOptions::default(),
        }
    }
}

/// Reads a delimited text file with a header row and profiles it.
///
/// Rows shorter than the header are padded with empty cells. When `sidecar`
/// is given its tags and free-text entries are merged into the record.
pub fn load_dataset(
    path: &Path,
    id: &str,
    sidecar: Option<&Path>,
    opts: &LoadOptions,
) -> Result<MetadataRecord> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .flexible(true)
        .has_headers(true)
        .from_reader(bytes.as_slice());

    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .enumerate()
        .map(|(i, h)| {
            if i == 0 {
                h.trim_start_matches('\u{feff}').to_string()
            } else {
                h.to_string()
            }
        })
        .collect();
    if headers.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }

    let mut seen = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            dups.insert(h.clone());
        }
    }
    if !dups.is_empty() {
        return Err(Error::DuplicateColumns {
            path: path.to_path_buf(),
            names: dups.into_iter().collect(),
        });
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    let mut row_count = 0u64;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        row_count += 1;
        for (i, column) in cells.iter_mut().enumerate() {
            column.push(record.get(i).unwrap_or("").to_string());
        }
    }

    let columns = headers
        .iter()
        .zip(&cells)
        .map(|(name, values)| {
            let (inferred_type, null_fraction) = profile_column(values);
            ColumnDescriptor {
                dataset_id: id.to_string(),
                name: name.clone(),
                norm_tokens: normalize_text_with(name, &opts.normalize),
                inferred_type,
                null_fraction,
            }
        })
        .collect::<Vec<_>>();

    let mut kinds = BTreeMap::new();
    kinds.insert(
        MetadataKind::Structural,
        vec![format!("{} columns, {} rows", columns.len(), row_count)],
    );
    let mut domain_tags = BTreeSet::new();
    if let Some(sidecar_path) = sidecar {
        let sc = Sidecar::load(sidecar_path)?;
        domain_tags.extend(
            sc.domain_tags
                .iter()
                .map(|t| t.trim().to_lowercase())
                .filter(|t| !t.is_empty()),
        );
        if let Some(desc) = sc.description.filter(|d| !d.trim().is_empty()) {
            kinds.insert(MetadataKind::Descriptive, vec![desc]);
        }
        if let Some(admin) = sc.administrative.filter(|d| !d.trim().is_empty()) {
            kinds.insert(MetadataKind::Administrative, vec![admin]);
        }
    }

    Ok(MetadataRecord {
        dataset: DatasetRef {
            id: id.to_string(),
            path: path.to_path_buf(),
            row_count,
        },
        columns,
        kinds,
        domain_tags,
    })
}

/// Default dataset id: the file stem.
pub fn default_dataset_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// A set of metadata records with unique dataset ids, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    records: Vec<MetadataRecord>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, record: MetadataRecord) -> Result<()> {
        if self.get(record.id()).is_some() {
            return Err(Error::DuplicateDataset(record.id().to_string()));
        }
        self.records.push(record);
        Ok(())
    }

    /// Loads `path` under its file stem, picking up a sidecar if one exists.
    pub fn ingest(&mut self, path: &Path, opts: &LoadOptions) -> Result<&MetadataRecord> {
        let id = default_dataset_id(path);
        if self.get(&id).is_some() {
            return Err(Error::DuplicateDataset(id));
        }
        let sidecar = sidecar_path_for(path);
        let sidecar = sidecar.is_file().then_some(sidecar.as_path());
        let record = load_dataset(path, &id, sidecar, opts)?;
        self.records.push(record);
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn get(&self, id: &str) -> Option<&MetadataRecord> {
        self.records.iter().find(|r| r.id() == id)
    }

    pub fn require(&self, id: &str) -> Result<&MetadataRecord> {
        self.get(id)
            .ok_or_else(|| Error::UnknownDataset(id.to_string()))
    }

    pub fn records(&self) -> &[MetadataRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
