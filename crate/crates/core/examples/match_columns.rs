//! Score every column pair of two datasets and print the triples as a
//! matrix, strongest pairs first.

use std::path::Path;

use cognate::catalog::LoadOptions;
use cognate::cognate::{cognate_map, RegressionWeights, DEFAULT_TAU_CONN};
use cognate::pipeline::{ingest, CrossMatrix};

fn main() -> cognate::Result<()> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus");
    let outcome = ingest(
        &[corpus.join("transport.csv"), corpus.join("accidents.csv")],
        &LoadOptions::default(),
    );
    let catalog = outcome.catalog;
    let (a, b) = (catalog.require("transport")?, catalog.require("accidents")?);

    let out = cognate_map(a, b, &RegressionWeights::default(), DEFAULT_TAU_CONN)?;

    let mut ranked = out.triples.clone();
    ranked.sort_by(|x, y| y.percent.cmp(&x.percent).then_with(|| x.source.cmp(&y.source)));
    for t in ranked.iter().take(8) {
        println!("({}, {}, {})", t.source, t.target, t.percent);
    }
    println!("...");
    println!(
        "max {}%, {} pairs at or above {}%, connected: {}",
        out.evidence.max_percent, out.evidence.strong_pairs, DEFAULT_TAU_CONN, out.evidence.connected
    );

    // custom weights shift the scores; 0.5/0.35/0.15 leans on token overlap
    let heavy = RegressionWeights::new(0.5, 0.35, 0.15)?;
    let alt = cognate_map(a, b, &heavy, DEFAULT_TAU_CONN)?;
    let date = |ts: &[cognate::cognate::SimilarityTriple]| {
        ts.iter()
            .find(|t| t.source == "transport.Date" && t.target == "accidents.Accident_Date")
            .map(|t| t.percent)
    };
    println!("Date ~ Accident_Date: {:?} default, {:?} with {heavy}", date(&out.triples), date(&alt.triples));

    print!("\n{}", CrossMatrix::from_triples(&out.triples).to_csv());
    Ok(())
}
