//! Profile one delimited file: column types, null fractions, metadata kinds.
//!
//!     cargo run --example profile_dataset [path.csv]

use std::path::PathBuf;

use cognate::catalog::{sidecar_path_for, Catalog, LoadOptions};

fn main() -> cognate::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/corpus/accidents.csv"));

    let mut catalog = Catalog::new();
    let md = catalog.ingest(&path, &LoadOptions::default())?;
    println!("{} ({} rows)", md.id(), md.dataset.row_count);
    if sidecar_path_for(&path).is_file() {
        println!("sidecar: {}", sidecar_path_for(&path).display());
    }

    for c in &md.columns {
        println!(
            "  {:<20} {:<9} null {:>4.0}%  tokens {:?}",
            c.name,
            format!("{:?}", c.inferred_type).to_lowercase(),
            c.null_fraction * 100.0,
            c.norm_tokens
        );
    }
    for (kind, entries) in &md.kinds {
        println!("{kind:?}:");
        for e in entries {
            println!("  {e}");
        }
    }
    println!("tags: {:?}", md.domain_tags);
    Ok(())
}
