//! Threshold clustering over a similarity matrix, in batch and one node at a
//! time. Both give the same collections whatever the arrival order.

use std::path::Path;

use cognate::catalog::{Catalog, LoadOptions, NormalizeOptions};
use cognate::cognate::RegressionWeights;
use cognate::grouping::{build_similarity_matrix, nodes_for_record, threshold_cluster, StreamClusterer, DEFAULT_TAU};

fn main() -> cognate::Result<()> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus");
    let mut catalog = Catalog::new();
    catalog.ingest(&corpus.join("transport.csv"), &LoadOptions::default())?;
    catalog.ingest(&corpus.join("accidents.csv"), &LoadOptions::default())?;

    let nodes: Vec<_> = catalog
        .records()
        .iter()
        .flat_map(|md| nodes_for_record(md, false, &NormalizeOptions::default()))
        .collect();
    let matrix = build_similarity_matrix(&nodes, &RegressionWeights::default())?;

    for tau in [100, DEFAULT_TAU as u16, 40] {
        let batch = threshold_cluster(&matrix, tau, "demo");
        let multi: Vec<_> = batch.iter().filter(|c| c.member_ids.len() > 1).collect();
        println!("tau {tau:>3}: {} collections, {} with more than one node", batch.len(), multi.len());
        for c in multi {
            println!("    {:<10} {:?}", c.id, c.member_ids);
        }
    }

    // reverse arrival order
    let mut stream = StreamClusterer::new(DEFAULT_TAU as u16);
    for i in (0..matrix.len()).rev() {
        stream.insert_from_matrix(&matrix, i)?;
    }
    let same = stream.collections("demo") == threshold_cluster(&matrix, DEFAULT_TAU as u16, "demo");
    println!("stream == batch: {same}");
    Ok(())
}
