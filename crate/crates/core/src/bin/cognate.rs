use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use cognate::cognate::RegressionWeights;
use cognate::pipeline::{
    ingest, manifest, match_datasets, pairwise_reports, run_pipeline, IngestOutcome, ReportFormat, ReportWriter,
    RunConfig, Stage,
};

#[derive(Parser)]
#[command(name = "cognate", version, about = "Metadata-only relatedness of tabular datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load datasets and write a manifest.
    Ingest(Common),
    /// Score every column pair of two datasets.
    Match {
        #[command(flatten)]
        common: Common,
        /// Left dataset id (defaults to the first input).
        #[arg(long)]
        left: Option<String>,
        /// Right dataset id (defaults to the second input).
        #[arg(long)]
        right: Option<String>,
    },
    /// Divide by domain and cluster each search space.
    Cluster(Common),
    /// As `cluster`, then compute each collection's center.
    Centers(Common),
    /// As `centers`, then pool centers and run pointer traversals.
    Pool(Common),
    /// Pairwise connection evidence and matrices for every dataset pair.
    Report(Common),
    /// The full pipeline.
    Run(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Delimited text files with a header row.
    inputs: Vec<PathBuf>,
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature weights `jaccard,dice,levenshtein`, summing to 1.
    #[arg(long, value_name = "J,D,L")]
    weights: Option<String>,
    /// Clustering threshold (percent).
    #[arg(long)]
    tau: Option<u8>,
    /// Connection threshold (percent).
    #[arg(long)]
    tau_conn: Option<u8>,
    /// Pointer bind threshold (percent).
    #[arg(long)]
    bind_threshold: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    /// Annealing steps.
    #[arg(long)]
    steps: Option<u32>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// structured, csv or dot.
    #[arg(long)]
    format: Option<String>,
    /// Field delimiter of the inputs.
    #[arg(long)]
    delimiter: Option<char>,
    /// Domain lexicon (JSON object of domain -> keywords).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Drop common stopwords when normalizing names.
    #[arg(long)]
    stopwords: bool,
    /// Cluster column nodes only, without description text nodes.
    #[arg(long)]
    no_text: bool,
}

impl Common {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.inputs.is_empty() {
            cfg.inputs = self.inputs.clone();
        }
        if let Some(w) = &self.weights {
            cfg.weights = w.parse::<RegressionWeights>()?;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.tau_conn {
            cfg.tau_conn = v;
        }
        if let Some(v) = self.bind_threshold {
            cfg.bind_threshold = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = &self.format {
            cfg.format = v.parse::<ReportFormat>()?;
        }
        if let Some(v) = self.delimiter {
            cfg.delimiter = v;
        }
        if let Some(v) = &self.lexicon {
            cfg.lexicon = Some(v.clone());
        }
        if self.stopwords {
            cfg.remove_stopwords = true;
        }
        if self.no_text {
            cfg.include_text = false;
        }
        cfg.validate()?;
        if cfg.inputs.is_empty() {
            bail!("no input files given");
        }
        Ok(cfg)
    }
}

fn load(cfg: &RunConfig) -> IngestOutcome {
    let outcome = ingest(&cfg.inputs, &cfg.load_options());
    for f in &outcome.failures {
        eprintln!("error: {}", f.error);
    }
    outcome
}

fn run(command: Command) -> anyhow::Result<bool> {
    let (common, stage) = match &command {
        Command::Ingest(c) | Command::Report(c) => (c, None),
        Command::Match { common, .. } => (common, None),
        Command::Cluster(c) => (c, Some(Stage::Cluster)),
        Command::Centers(c) => (c, Some(Stage::Centers)),
        Command::Pool(c) => (c, Some(Stage::Pool)),
        Command::Run(c) => (c, Some(Stage::Full)),
    };
    let cfg = common.config()?;
    let outcome = load(&cfg);
    let complete = outcome.is_complete();
    let mut writer = ReportWriter::new(&cfg.out, cfg.format)?;
    writer.manifest(&manifest(&outcome, &cfg.domain_lexicon()?))?;
    let catalog = &outcome.catalog;

    match (&command, stage) {
        (Command::Ingest(_), _) => {
            for r in catalog.records() {
                println!("{}\t{} columns\t{} rows", r.id(), r.columns.len(), r.dataset.row_count);
            }
        }
        (Command::Match { left, right, .. }, _) => {
            let ids: Vec<&str> = catalog.records().iter().map(|r| r.id()).collect();
            let left = left.as_deref().or(ids.first().copied()).context("no left dataset")?;
            let right = right.as_deref().or(ids.get(1).copied()).context("no right dataset")?;
            let report = match_datasets(catalog, left, right, &cfg)?;
            for t in &report.triples {
                println!("({}, {}, {})", t.source, t.target, t.percent);
            }
            let e = &report.evidence;
            println!(
                "{} ~ {}: max {}%, {} strong pairs, connected={}",
                e.dataset_a, e.dataset_b, e.max_percent, e.strong_pairs, e.connected
            );
            writer.match_report("", &report)?;
        }
        (Command::Report(_), _) => {
            let pairs = pairwise_reports(catalog, &cfg)?;
            for p in &pairs {
                let e = &p.evidence;
                println!("{}\t{}\t{}\t{}", e.dataset_a, e.dataset_b, e.max_percent, e.connected);
            }
            writer.pairwise(&pairs)?;
        }
        (_, Some(stage)) => {
            let report = run_pipeline(catalog, &cfg, stage)?;
            println!(
                "{} spaces, {} collections, {} centers, {} channels, {} cycles",
                report.spaces.len(),
                report.collections.len(),
                report.centers.len(),
                report.channels.len(),
                report.log.len()
            );
            writer.pipeline(&report)?;
        }
        _ => unreachable!("every command is handled above"),
    }
    for path in writer.finish() {
        eprintln!("wrote {}", cfg.out.join(path).display());
    }
    Ok(complete)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
