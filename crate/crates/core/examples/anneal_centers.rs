//! Medoids: exhaustive for small collections, simulated annealing above the
//! threshold. Compares the annealed pick against brute force on a random
//! 60-node collection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cognate::centers::{anneal_medoid, center_cost, exact_medoid_limited, AnnealingSchedule, CenterConfig};
use cognate::grouping::{MetaCollection, SimilarityMatrix};

fn main() -> cognate::Result<()> {
    let n = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ids: Vec<String> = (0..n).map(|i| format!("n{i:02}")).collect();
    let mut rows = vec![vec![100u8; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            rows[i][j] = rng.gen_range(0..=100);
            rows[j][i] = rows[i][j];
        }
    }
    let matrix = SimilarityMatrix::from_rows(ids.clone(), rows)?;
    let collection = MetaCollection {
        id: "demo/X1".into(),
        member_ids: ids.iter().cloned().collect(),
        space_id: "demo".into(),
    };

    let exact = exact_medoid_limited(&collection, &matrix, n)?;
    println!("brute force: {} cost {:.2}", exact.node_id, exact.cost);

    for steps in [50, 500, 2000] {
        let cfg = CenterConfig {
            schedule: AnnealingSchedule { steps, ..AnnealingSchedule::default() },
            ..CenterConfig::default()
        };
        let c = anneal_medoid(&collection, &matrix, &cfg)?;
        println!("{steps:>5} steps: {} cost {:.2} ({:?})", c.node_id, c.cost, c.method);
    }

    // a collection at or under the threshold never anneals
    let small = MetaCollection {
        member_ids: ids.iter().take(5).cloned().collect(),
        ..collection.clone()
    };
    let c = anneal_medoid(&small, &matrix, &CenterConfig::default())?;
    println!("5 members: {} ({:?}), cost {:.2}", c.node_id, c.method, center_cost(&c.node_id, &small, &matrix)?);
    Ok(())
}
