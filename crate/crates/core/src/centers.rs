//! Medoid selection for meta-collections.
//!
//! A center is the member minimizing the summed distance `1 - percent/100`
//! to every other member. Small collections are solved exhaustively; larger
//! ones by seeded simulated annealing over the members.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::{MetaCollection, SimilarityMatrix};

/// Largest collection solved by exhaustive search.
pub const DEFAULT_EXACT_THRESHOLD: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterMethod {
    Exact,
    Annealed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaCenter {
    pub collection_id: String,
    pub node_id: String,
    pub cost: f64,
    pub method: CenterMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub initial_temp: f64,
    pub cooling: f64,
    pub steps: u32,
    pub seed: u64,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        Self {
            initial_temp: 1.0,
            cooling: 0.995,
            steps: 2000,
            seed: 42,
        }
    }
}

impl AnnealingSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temp.is_finite() && self.initial_temp > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "initial_temp must be positive, got {}",
                self.initial_temp
            )));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "cooling must lie in (0, 1), got {}",
                self.cooling
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidSchedule("steps must be positive".into()));
        }
        Ok(())
    }
}

/// Exhaustive/annealed crossover and the annealing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterConfig {
    pub exact_threshold: usize,
    pub schedule: AnnealingSchedule,
}

impl Default for CenterConfig {
    fn default() -> Self {
        Self {
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            schedule: AnnealingSchedule::default(),
        }
    }
}

/// Members of a collection resolved to matrix indices, sorted by node id.
struct Members<'a> {
    ids: Vec<&'a str>,
    index: Vec<usize>,
}

impl<'a> Members<'a> {
    fn resolve(collection: &'a MetaCollection, matrix: &SimilarityMatrix) -> Result<Self> {
        if collection.member_ids.is_empty() {
            return Err(Error::EmptyCollection(collection.id.clone()));
        }
        let mut ids = Vec::with_capacity(collection.member_ids.len());
        let mut index = Vec::with_capacity(collection.member_ids.len());
        for id in &collection.member_ids {
            ids.push(id.as_str());
            index.push(
                matrix
                    .index_of(id)
                    .ok_or_else(|| Error::UnknownNode(id.clone()))?,
            );
        }
        Ok(Self { ids, index })
    }

    /// Cost in hundredths: Σ (100 − cell). Integer, so ties compare exactly.
    fn cost_units(&self, pos: usize, matrix: &SimilarityMatrix) -> u64 {
        let row = matrix.row(self.index[pos]);
        self.index
            .iter()
            .map(|&j| 100 - u64::from(row[j]))
            .sum()
    }
}

fn units_to_cost(units: u64) -> f64 {
    units as f64 / 100.0
}

/// Σ over members `m` of `1 − cell(candidate, m)/100`.
pub fn center_cost(candidate: &str, collection: &MetaCollection, matrix: &SimilarityMatrix) -> Result<f64> {
    let members = Members::resolve(collection, matrix)?;
    let pos = members
        .ids
        .iter()
        .position(|id| *id == candidate)
        .ok_or_else(|| Error::NotAMember {
            node: candidate.to_string(),
            collection: collection.id.clone(),
        })?;
    Ok(units_to_cost(members.cost_units(pos, matrix)))
}

/// Exhaustive medoid; ties go to the smallest node id.
pub fn exact_medoid(collection: &MetaCollection, matrix: &SimilarityMatrix) -> Result<MetaCenter> {
    exact_medoid_limited(collection, matrix, DEFAULT_EXACT_THRESHOLD)
}

pub fn exact_medoid_limited(
    collection: &MetaCollection,
    matrix: &SimilarityMatrix,
    limit: usize,
) -> Result<MetaCenter> {
    let size = collection.member_ids.len();
    if size > limit {
        return Err(Error::OversizeCollection {
            collection: collection.id.clone(),
            size,
            limit,
        });
    }
    let members = Members::resolve(collection, matrix)?;
    // ids are ascending, so min_by_key keeps the first (smallest) on ties
    let (best, units) = (0..members.ids.len())
        .map(|p| (p, members.cost_units(p, matrix)))
        .min_by_key(|&(_, u)| u)
        .expect("nonempty");
    Ok(MetaCenter {
        collection_id: collection.id.clone(),
        node_id: members.ids[best].to_string(),
        cost: units_to_cost(units),
        method: CenterMethod::Exact,
    })
}

/// Medoid by simulated annealing, delegating to [`exact_medoid`] for
/// collections of at most `config.exact_threshold` members.
///
/// The walk starts at the smallest node id. Each step proposes another member
/// uniformly at random and accepts it when the cost does not rise, or else
/// with probability `exp(-Δ/temp)`; the temperature decays geometrically.
/// The best member seen (smallest id among equal costs) is returned.
pub fn anneal_medoid(collection: &MetaCollection, matrix: &SimilarityMatrix, config: &CenterConfig) -> Result<MetaCenter> {
    anneal_medoid_with_rng(
        collection,
        matrix,
        config,
        &mut ChaCha8Rng::seed_from_u64(config.schedule.seed),
    )
}

/// As [`anneal_medoid`], drawing from a caller-supplied generator.
pub fn anneal_medoid_with_rng<R: Rng>(
    collection: &MetaCollection,
    matrix: &SimilarityMatrix,
    config: &CenterConfig,
    rng: &mut R,
) -> Result<MetaCenter> {
    let schedule = &config.schedule;
    schedule.validate()?;
    if collection.member_ids.len() <= config.exact_threshold {
        return exact_medoid_limited(collection, matrix, config.exact_threshold);
    }

    let members = Members::resolve(collection, matrix)?;
    let n = members.ids.len();
    if n == 1 {
        return exact_medoid_limited(collection, matrix, 1);
    }
    let mut cache: Vec<Option<u64>> = vec![None; n];
    let mut cost_of = |p: usize| *cache[p].get_or_insert_with(|| members.cost_units(p, matrix));

    let mut current = 0usize;
    let mut current_units = cost_of(current);
    let (mut best, mut best_units) = (current, current_units);
    let mut temp = schedule.initial_temp;

    for _ in 0..schedule.steps {
        let mut proposal = rng.gen_range(0..n - 1);
        if proposal >= current {
            proposal += 1;
        }
        let units = cost_of(proposal);
        let delta = (units as f64 - current_units as f64) / 100.0;
        let accept = delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp();
        if accept {
            current = proposal;
            current_units = units;
            if units < best_units || (units == best_units && proposal < best) {
                best = proposal;
                best_units = units;
            }
        }
        temp *= schedule.cooling;
    }

    Ok(MetaCenter {
        collection_id: collection.id.clone(),
        node_id: members.ids[best].to_string(),
        cost: units_to_cost(best_units),
        method: CenterMethod::Annealed,
    })
}
