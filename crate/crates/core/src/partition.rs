//! Domain division of the node space and per-domain bulking of datasets.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{normalize_text, MetadataRecord};
use crate::error::{Error, Result};

/// Fallback tag for records and nodes that match no lexicon entry.
pub const UNCLASSIFIED: &str = "unclassified";

/// Domain name to keyword set. Keys and keywords are stored lowercase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainLexicon(BTreeMap<String, BTreeSet<String>>);

impl DomainLexicon {
    pub fn new<I, K, V, W>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        Self(
            entries
                .into_iter()
                .map(|(k, words)| {
                    (
                        k.as_ref().trim().to_lowercase(),
                        words
                            .into_iter()
                            .flat_map(|w| normalize_text(w.as_ref()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    /// Reads a JSON object of `"domain": ["keyword", ...]`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(&text).map_err(|source| Error::Document {
                path: path.to_path_buf(),
                source,
            })?;
        if raw.is_empty() {
            return Err(Error::Config(format!("{}: lexicon is empty", path.display())));
        }
        Ok(Self::new(raw))
    }

    pub fn domains(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Domains whose keyword set intersects `tokens`.
    pub fn matches<'a, I>(&self, tokens: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a String>,
    {
        let tokens: BTreeSet<&str> = tokens.into_iter().map(String::as_str).collect();
        self.0
            .iter()
            .filter(|(_, words)| words.iter().any(|w| tokens.contains(w.as_str())))
            .map(|(domain, _)| domain.clone())
            .collect()
    }
}

impl Default for DomainLexicon {
    fn default() -> Self {
        Self::new([
            (
                "transport",
                vec![
                    "transport", "vehicle", "vehicles", "road", "roads", "traffic", "route", "journey",
                    "bus", "rail", "train", "car", "cars", "speed", "mileage", "km", "fuel", "station",
                    "passenger", "passengers",
                ],
            ),
            (
                "accidents",
                vec![
                    "accident", "accidents", "casualty", "casualties", "collision", "crash", "severity",
                    "injury", "injuries", "fatal", "fatalities", "killed", "hazard",
                ],
            ),
            (
                "labor",
                vec![
                    "labor", "labour", "employment", "employed", "unemployment", "unemployed", "wage",
                    "wages", "salary", "occupation", "workforce", "worker", "workers", "hours", "job",
                    "jobs", "earnings", "industry",
                ],
            ),
            (
                "food",
                vec![
                    "food", "meal", "meals", "recipe", "ingredient", "ingredients", "calories",
                    "nutrition", "restaurant", "cuisine", "dish",
                ],
            ),
            (
                "sports",
                vec![
                    "sport", "sports", "team", "teams", "match", "player", "players", "league", "score",
                    "goals", "season", "stadium",
                ],
            ),
        ])
    }
}

/// Domain tags of a whole record.
///
/// Explicit sidecar tags pass through unchanged. Otherwise the lexicon is
/// matched against the column and description tokens, falling back to
/// `{"unclassified"}`.
pub fn infer_domain_tags(md: &MetadataRecord, lexicon: &DomainLexicon) -> BTreeSet<String> {
    if !md.domain_tags.is_empty() {
        return md.domain_tags.clone();
    }
    let mut tokens: Vec<String> = md
        .columns
        .iter()
        .flat_map(|c| c.norm_tokens.iter().cloned())
        .collect();
    if let Some(desc) = md.description() {
        tokens.extend(normalize_text(&desc));
    }
    let tags = lexicon.matches(&tokens);
    if tags.is_empty() {
        BTreeSet::from([UNCLASSIFIED.to_string()])
    } else {
        tags
    }
}

/// The lexicographically smallest tag.
pub fn primary_tag(tags: &BTreeSet<String>) -> Option<&str> {
    tags.iter().next().map(String::as_str)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub id: String,
    pub domain_label: String,
    pub members: BTreeSet<String>,
}

/// Groups nodes by primary tag into disjoint search spaces, ordered by label.
/// A space's id is its domain label.
pub fn divide<'a, I>(node_ids: I, tags: &BTreeMap<String, BTreeSet<String>>) -> Result<Vec<SearchSpace>>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut by_label: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for id in node_ids {
        let label = tags
            .get(id)
            .and_then(primary_tag)
            .ok_or_else(|| Error::UntaggedNode(id.to_string()))?;
        by_label.entry(label).or_default().insert(id.to_string());
    }
    Ok(by_label
        .into_iter()
        .map(|(label, members)| SearchSpace {
            id: label.to_string(),
            domain_label: label.to_string(),
            members,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BulkingId {
    /// `<domain>-<ordinal>`, the ordinal being the space's 1-based position.
    pub value: String,
    pub dataset_ids: BTreeSet<String>,
}

/// Places each dataset under the space holding most of its nodes (ties go to
/// the smaller space id) and issues one bulking id per space that received
/// at least one dataset.
///
/// `node_dataset` maps node id to dataset id.
pub fn assign_bulking_ids(spaces: &[SearchSpace], node_dataset: &BTreeMap<String, String>) -> Vec<BulkingId> {
    let mut votes: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for space in spaces {
        for node in &space.members {
            if let Some(ds) = node_dataset.get(node) {
                *votes
                    .entry(ds.as_str())
                    .or_default()
                    .entry(space.id.as_str())
                    .or_default() += 1;
            }
        }
    }

    let mut chosen: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for (ds, counts) in votes {
        // space ids ascend; equal counts keep the earlier one
        let winner = counts
            .iter()
            .fold(None::<(&str, usize)>, |best, (&space, &n)| match best {
                Some((_, m)) if m >= n => best,
                _ => Some((space, n)),
            })
            .map(|(space, _)| space)
            .expect("every voting dataset has a space");
        chosen.entry(winner).or_default().insert(ds.to_string());
    }

    let mut ordered: Vec<&SearchSpace> = spaces.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    ordered
        .into_iter()
        .enumerate()
        .filter_map(|(i, space)| {
            chosen.remove(space.id.as_str()).map(|dataset_ids| BulkingId {
                value: format!("{}-{}", space.domain_label, i + 1),
                dataset_ids,
            })
        })
        .collect()
}
