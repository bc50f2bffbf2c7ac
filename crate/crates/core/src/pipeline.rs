//! End-to-end orchestration and report files.
//!
//! A run goes: ingest → divide → cluster → centers → pool → traverse, plus
//! pairwise cognate matching between every two datasets. Every stage is a
//! pure function of the catalog and the [`RunConfig`], so the same inputs
//! and seed always produce byte-identical reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, LoadOptions, NormalizeOptions};
use crate::centers::{anneal_medoid_with_rng, AnnealingSchedule, CenterConfig, MetaCenter, DEFAULT_EXACT_THRESHOLD};
use crate::cognate::{cognate_map, ConnectionEvidence, RegressionWeights, SimilarityTriple, DEFAULT_TAU_CONN};
use crate::error::{Error, Result};
use crate::grouping::{
    build_similarity_matrix, nodes_for_record, threshold_cluster, MetaCollection, MetaNode, SimilarityMatrix,
    DEFAULT_TAU,
};
use crate::partition::{assign_bulking_ids, divide, infer_domain_tags, BulkingId, DomainLexicon, SearchSpace};
use crate::pooling::{
    export_graph, pool_centers, record_cycle, traverse, DomainChannel, GraphFormat, LinearPointer, SearchCycleLog,
    VisitGraph, DEFAULT_BIND_THRESHOLD,
};
use crate::Percent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Structured,
    Csv,
    Dot,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structured" | "json" => Ok(Self::Structured),
            "csv" => Ok(Self::Csv),
            "dot" => Ok(Self::Dot),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Every knob of a run. Missing keys in a config file take these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub weights: RegressionWeights,
    pub tau: Percent,
    pub tau_conn: Percent,
    pub bind_threshold: Percent,
    pub seed: u64,
    pub steps: u32,
    pub initial_temp: f64,
    pub cooling: f64,
    pub exact_threshold: usize,
    pub out: PathBuf,
    pub format: ReportFormat,
    pub delimiter: char,
    pub remove_stopwords: bool,
    /// Add one text node per dataset description to the clustered nodes.
    pub include_text: bool,
    pub lexicon: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let schedule = AnnealingSchedule::default();
        Self {
            inputs: Vec::new(),
            weights: RegressionWeights::default(),
            tau: DEFAULT_TAU,
            tau_conn: DEFAULT_TAU_CONN,
            bind_threshold: DEFAULT_BIND_THRESHOLD,
            seed: schedule.seed,
            steps: schedule.steps,
            initial_temp: schedule.initial_temp,
            cooling: schedule.cooling,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            out: PathBuf::from("cognate-out"),
            format: ReportFormat::Structured,
            delimiter: ',',
            remove_stopwords: false,
            include_text: true,
            lexicon: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| Error::Document {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau", self.tau),
            ("tau_conn", self.tau_conn),
            ("bind_threshold", self.bind_threshold),
        ] {
            if v > 100 {
                return Err(Error::Config(format!("{name} must be within 0..=100, got {v}")));
            }
        }
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!(
                "delimiter must be a single ASCII character, got {:?}",
                self.delimiter
            )));
        }
        self.schedule().validate()
    }

    pub fn schedule(&self) -> AnnealingSchedule {
        AnnealingSchedule {
            initial_temp: self.initial_temp,
            cooling: self.cooling,
            steps: self.steps,
            seed: self.seed,
        }
    }

    pub fn center_config(&self) -> CenterConfig {
        CenterConfig {
            exact_threshold: self.exact_threshold,
            schedule: self.schedule(),
        }
    }

    pub fn normalize_options(&self) -> NormalizeOptions {
        NormalizeOptions {
            remove_stopwords: self.remove_stopwords,
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            delimiter: self.delimiter as u8,
            normalize: self.normalize_options(),
        }
    }

    pub fn domain_lexicon(&self) -> Result<DomainLexicon> {
        match &self.lexicon {
            Some(path) => DomainLexicon::load(path),
            None => Ok(DomainLexicon::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestFailure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct IngestOutcome {
    pub catalog: Catalog,
    pub failures: Vec<IngestFailure>,
}

impl IngestOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Loads every path, collecting per-file failures instead of stopping.
pub fn ingest<P: AsRef<Path>>(paths: &[P], opts: &LoadOptions) -> IngestOutcome {
    let mut outcome = IngestOutcome::default();
    for path in paths {
        let path = path.as_ref();
        if let Err(e) = outcome.catalog.ingest(path, opts) {
            outcome.failures.push(IngestFailure {
                path: path.to_path_buf(),
                error: e.to_string(),
            });
        }
    }
    outcome
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    pub row_count: u64,
    pub column_count: usize,
    pub domain_tags: BTreeSet<String>,
    pub has_description: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub datasets: Vec<ManifestEntry>,
    pub failures: Vec<IngestFailure>,
}

pub fn manifest(outcome: &IngestOutcome, lexicon: &DomainLexicon) -> Manifest {
    Manifest {
        datasets: outcome
            .catalog
            .records()
            .iter()
            .map(|r| ManifestEntry {
                id: r.id().to_string(),
                path: r.dataset.path.clone(),
                row_count: r.dataset.row_count,
                column_count: r.columns.len(),
                domain_tags: infer_domain_tags(r, lexicon),
                has_description: r.description().is_some(),
            })
            .collect(),
        failures: outcome.failures.clone(),
    }
}

/// Row-by-column percents between the columns of two datasets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub cells: Vec<Vec<Percent>>,
}

impl CrossMatrix {
    /// Rebuilds the grid from triples in pair order.
    pub fn from_triples(triples: &[SimilarityTriple]) -> Self {
        let mut row_ids: Vec<String> = Vec::new();
        let mut col_ids: Vec<String> = Vec::new();
        for t in triples {
            if !row_ids.contains(&t.source) {
                row_ids.push(t.source.clone());
            }
            if !col_ids.contains(&t.target) {
                col_ids.push(t.target.clone());
            }
        }
        let mut cells = vec![vec![0; col_ids.len()]; row_ids.len()];
        for t in triples {
            let i = row_ids.iter().position(|r| r == &t.source).expect("seen");
            let j = col_ids.iter().position(|c| c == &t.target).expect("seen");
            cells[i][j] = t.percent;
        }
        Self {
            row_ids,
            col_ids,
            cells,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(std::iter::once("").chain(self.col_ids.iter().map(String::as_str)))
            .expect("in-memory write");
        for (id, row) in self.row_ids.iter().zip(&self.cells) {
            wtr.write_record(std::iter::once(id.clone()).chain(row.iter().map(|c| c.to_string())))
                .expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub triples: Vec<SimilarityTriple>,
    pub evidence: ConnectionEvidence,
    pub matrix: CrossMatrix,
}

pub fn match_datasets(catalog: &Catalog, a: &str, b: &str, cfg: &RunConfig) -> Result<MatchReport> {
    let left = catalog.require(a)?;
    let right = catalog.require(b)?;
    let out = cognate_map(left, right, &cfg.weights, cfg.tau_conn)?;
    let matrix = CrossMatrix::from_triples(&out.triples);
    Ok(MatchReport {
        triples: out.triples,
        evidence: out.evidence,
        matrix,
    })
}

/// Cognate matching over every unordered dataset pair, in catalog order.
pub fn pairwise_reports(catalog: &Catalog, cfg: &RunConfig) -> Result<Vec<MatchReport>> {
    let ids: Vec<&str> = catalog.records().iter().map(|r| r.id()).collect();
    let pairs: Vec<(&str, &str)> = ids
        .iter()
        .enumerate()
        .flat_map(|(i, a)| ids[i + 1..].iter().map(move |b| (*a, *b)))
        .collect();
    pairs
        .par_iter()
        .map(|(a, b)| match_datasets(catalog, a, b, cfg))
        .collect()
}

/// How far [`run_pipeline`] goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Cluster,
    Centers,
    Pool,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceMatrix {
    pub space_id: String,
    pub matrix: SimilarityMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub stage: Stage,
    pub spaces: Vec<SearchSpace>,
    pub bulking: Vec<BulkingId>,
    pub matrices: Vec<SpaceMatrix>,
    pub collections: Vec<MetaCollection>,
    pub centers: Vec<MetaCenter>,
    pub channels: Vec<DomainChannel>,
    pub log: SearchCycleLog,
    pub graph: VisitGraph,
    pub pairs: Vec<MatchReport>,
}

impl PipelineReport {
    pub fn evidence(&self) -> Vec<ConnectionEvidence> {
        self.pairs.iter().map(|p| p.evidence.clone()).collect()
    }
}

/// Runs the pipeline up to and including `stage`. Later-stage fields are left
/// empty.
pub fn run_pipeline(catalog: &Catalog, cfg: &RunConfig, stage: Stage) -> Result<PipelineReport> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let lexicon = cfg.domain_lexicon().map_err(|e| e.in_stage("divide"))?;
    let norm = cfg.normalize_options();

    // divide
    let mut nodes: BTreeMap<String, MetaNode> = BTreeMap::new();
    let mut node_tags: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut node_dataset: BTreeMap<String, String> = BTreeMap::new();
    for record in catalog.records() {
        let tags = infer_domain_tags(record, &lexicon);
        for node in nodes_for_record(record, cfg.include_text, &norm) {
            if nodes.contains_key(&node.id) {
                return Err(Error::DuplicateNode(node.id).in_stage("divide"));
            }
            node_tags.insert(node.id.clone(), tags.clone());
            node_dataset.insert(node.id.clone(), node.dataset_id.clone());
            nodes.insert(node.id.clone(), node);
        }
    }
    let spaces = divide(nodes.keys().map(String::as_str), &node_tags).map_err(|e| e.in_stage("divide"))?;
    let bulking = assign_bulking_ids(&spaces, &node_dataset);

    // cluster
    let clustered: Vec<(SpaceMatrix, Vec<MetaCollection>)> = spaces
        .par_iter()
        .map(|space| {
            let members: Vec<MetaNode> = space.members.iter().map(|id| nodes[id].clone()).collect();
            let matrix = build_similarity_matrix(&members, &cfg.weights)?;
            let collections = threshold_cluster(&matrix, u16::from(cfg.tau), &space.id);
            Ok((
                SpaceMatrix {
                    space_id: space.id.clone(),
                    matrix,
                },
                collections,
            ))
        })
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("cluster"))?;
    let mut matrices = Vec::with_capacity(clustered.len());
    let mut collections = Vec::new();
    for (m, cs) in clustered {
        matrices.push(m);
        collections.extend(cs);
    }

    let mut report = PipelineReport {
        stage,
        spaces,
        bulking,
        matrices,
        collections,
        centers: Vec::new(),
        channels: Vec::new(),
        log: SearchCycleLog::new(),
        graph: VisitGraph::default(),
        pairs: Vec::new(),
    };
    if stage == Stage::Cluster {
        return Ok(report);
    }

    // centers: one independent random stream per collection
    let center_cfg = cfg.center_config();
    let matrix_of: BTreeMap<&str, &SimilarityMatrix> =
        report.matrices.iter().map(|m| (m.space_id.as_str(), &m.matrix)).collect();
    report.centers = report
        .collections
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            anneal_medoid_with_rng(c, matrix_of[c.space_id.as_str()], &center_cfg, &mut rng)
        })
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("centers"))?;
    if stage == Stage::Centers {
        return Ok(report);
    }

    // pool + traverse
    let node_domain: BTreeMap<String, String> = report
        .spaces
        .iter()
        .flat_map(|s| s.members.iter().map(move |m| (m.clone(), s.domain_label.clone())))
        .collect();
    report.channels = pool_centers(&report.centers, &node_domain).map_err(|e| e.in_stage("pool"))?;

    let mut jobs = Vec::new();
    for source in &report.channels {
        for target in &report.channels {
            if source.domain_label == target.domain_label {
                continue;
            }
            for center in &source.center_ids {
                jobs.push((source, target, center));
            }
        }
    }
    let traversals: Vec<_> = jobs
        .par_iter()
        .map(|(source, target, center)| {
            let pointer = LinearPointer {
                id: format!("{center}@{}", target.domain_label),
                profile: nodes[*center].payload.clone(),
                bind_threshold: cfg.bind_threshold,
            };
            let visits = traverse(&pointer, target, |profile, node| {
                profile.score(&nodes[node].payload, &cfg.weights)
            });
            (source.domain_label.clone(), target.domain_label.clone(), visits)
        })
        .collect();
    for (source, target, visits) in traversals {
        record_cycle(&mut report.log, &mut report.graph, &source, &target, visits);
    }
    if stage == Stage::Pool {
        return Ok(report);
    }

    report.pairs = pairwise_reports(catalog, cfg).map_err(|e| e.in_stage("match"))?;
    Ok(report)
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.serialize(row).expect("flat record serializes");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Serializes flat records as JSON or CSV depending on `format`.
fn records<T: Serialize>(format: ReportFormat, stem: &str, rows: &[T]) -> (String, String) {
    match format {
        ReportFormat::Csv => (format!("{stem}.csv"), to_csv(rows)),
        _ => (format!("{stem}.json"), to_json(&rows)),
    }
}

/// Writes report files one at a time. Returned paths are relative to `dir`.
pub struct ReportWriter {
    dir: PathBuf,
    format: ReportFormat,
    written: Vec<PathBuf>,
}

impl ReportWriter {
    pub fn new(dir: &Path, format: ReportFormat) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, rel: impl AsRef<Path>, contents: &str) -> Result<()> {
        let rel = rel.as_ref();
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(rel.to_path_buf());
        Ok(())
    }

    pub fn manifest(&mut self, manifest: &Manifest) -> Result<()> {
        self.write("manifest.json", &to_json(manifest))
    }

    /// `<prefix>triples`, `<prefix>evidence` and `<prefix>matrix.csv`.
    pub fn match_report(&mut self, prefix: &str, report: &MatchReport) -> Result<()> {
        let (name, body) = records(self.format, &format!("{prefix}triples"), &report.triples);
        self.write(name, &body)?;
        let (name, body) = records(
            self.format,
            &format!("{prefix}evidence"),
            std::slice::from_ref(&report.evidence),
        );
        self.write(name, &body)?;
        self.write(format!("{prefix}matrix.csv"), &report.matrix.to_csv())
    }

    pub fn pairwise(&mut self, pairs: &[MatchReport]) -> Result<()> {
        let evidence: Vec<ConnectionEvidence> = pairs.iter().map(|p| p.evidence.clone()).collect();
        let (name, body) = records(self.format, "evidence", &evidence);
        self.write(name, &body)?;
        for p in pairs {
            let prefix = format!(
                "pairs/{}__{}.",
                file_safe(&p.evidence.dataset_a),
                file_safe(&p.evidence.dataset_b)
            );
            let (name, body) = records(self.format, &format!("{prefix}triples"), &p.triples);
            self.write(name, &body)?;
            self.write(format!("{prefix}matrix.csv"), &p.matrix.to_csv())?;
        }
        Ok(())
    }

    pub fn pipeline(&mut self, report: &PipelineReport) -> Result<()> {
        self.write("spaces.json", &to_json(&report.spaces))?;
        self.write("bulking.json", &to_json(&report.bulking))?;
        for m in &report.matrices {
            self.write(
                format!("matrices/{}.csv", file_safe(&m.space_id)),
                &m.matrix.to_csv(),
            )?;
        }
        self.write("collections.json", &to_json(&report.collections))?;
        if report.stage >= Stage::Centers {
            let (name, body) = records(self.format, "centers", &report.centers);
            self.write(name, &body)?;
        }
        if report.stage >= Stage::Pool {
            self.write("channels.json", &to_json(&report.channels))?;
            self.write("cycles.json", &to_json(&report.log))?;
            match self.format {
                ReportFormat::Structured => {
                    self.write("graph.json", &export_graph(&report.graph, GraphFormat::Structured))?
                }
                _ => self.write("graph.dot", &export_graph(&report.graph, GraphFormat::Dot))?,
            }
        }
        if report.stage >= Stage::Full {
            self.pairwise(&report.pairs)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Vec<PathBuf> {
        self.written
    }
}
