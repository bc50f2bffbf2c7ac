//! Runs every stage on the bundled corpus and writes the reports.
//!
//!     cargo run --example full_pipeline -- [out-dir]

use std::path::{Path, PathBuf};

use cognate::pipeline::{ingest, run_pipeline, ReportFormat, ReportWriter, RunConfig, Stage};

fn main() -> cognate::Result<()> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus");
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cognate-full-pipeline"));

    let cfg = RunConfig {
        inputs: ["transport.csv", "accidents.csv", "labor.csv"].map(|f| corpus.join(f)).to_vec(),
        seed: 11,
        out,
        format: ReportFormat::Structured,
        ..RunConfig::default()
    };
    cfg.validate()?;

    let outcome = ingest(&cfg.inputs, &cfg.load_options());
    let report = run_pipeline(&outcome.catalog, &cfg, Stage::Full)?;

    for s in &report.spaces {
        let n = report.collections.iter().filter(|c| c.space_id == s.id).count();
        println!("{:<10} {:>3} nodes {:>3} collections", s.id, s.members.len(), n);
    }
    for c in &report.channels {
        println!("channel {:<10} {} centers", c.domain_label, c.center_ids.len());
    }
    let binds = report
        .log
        .entries()
        .iter()
        .flat_map(|e| &e.visit_records)
        .filter(|v| v.action == cognate::pooling::VisitAction::Bind)
        .count();
    println!("{} cycles, {} binds, {} edges", report.log.len(), binds, report.graph.edges.len());
    for e in report.evidence() {
        println!("{} ~ {}: max {}% connected={}", e.dataset_a, e.dataset_b, e.max_percent, e.connected);
    }

    let mut w = ReportWriter::new(&cfg.out, cfg.format)?;
    w.pipeline(&report)?;
    let files = w.finish();
    println!("{} files under {}", files.len(), cfg.out.display());
    Ok(())
}
