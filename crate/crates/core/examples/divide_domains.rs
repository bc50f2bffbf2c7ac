//! Domain tagging, division into search spaces and bulking ids.
//!
//! The bundled files carry sidecar tags. Bare copies fall back to the keyword
//! lexicon, and anything that matches nothing lands in `unclassified`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cognate::catalog::{LoadOptions, NormalizeOptions};
use cognate::grouping::nodes_for_record;
use cognate::partition::{assign_bulking_ids, divide, infer_domain_tags, DomainLexicon};
use cognate::pipeline::ingest;

fn main() -> cognate::Result<()> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus");
    let tmp = std::env::temp_dir().join(format!("cognate-divide-{}", std::process::id()));
    fs::create_dir_all(&tmp).unwrap();

    let bare = tmp.join("roads.csv");
    let odd = tmp.join("misc.csv");
    fs::copy(corpus.join("transport.csv"), &bare).unwrap();
    fs::write(&odd, "alpha,beta,gamma\n1,2,3\n").unwrap();

    let paths = [corpus.join("labor.csv"), corpus.join("accidents.csv"), bare, odd];
    let catalog = ingest(&paths, &LoadOptions::default()).catalog;
    let lexicon = DomainLexicon::default();

    let mut node_tags = BTreeMap::new();
    let mut node_dataset = BTreeMap::new();
    for md in catalog.records() {
        let tags = infer_domain_tags(md, &lexicon);
        println!("{:<10} -> {:?}", md.id(), tags);
        for node in nodes_for_record(md, true, &NormalizeOptions::default()) {
            node_dataset.insert(node.id.clone(), node.dataset_id.clone());
            node_tags.insert(node.id, tags.clone());
        }
    }

    let spaces = divide(node_tags.keys().map(String::as_str), &node_tags)?;
    for s in &spaces {
        println!("space {:<13} {} nodes", s.id, s.members.len());
    }
    for b in assign_bulking_ids(&spaces, &node_dataset) {
        println!("{:<15} {:?}", b.value, b.dataset_ids);
    }

    fs::remove_dir_all(&tmp).ok();
    Ok(())
}
