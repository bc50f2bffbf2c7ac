//! The cognate mapper: cross-dataset attribute pairs scored into similarity
//! triples, plus the per-dataset-pair connection evidence derived from them.

mod features;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use features::{normalized_levenshtein, token_jaccard, trigram_dice, FeatureVector};

use crate::catalog::{ColumnDescriptor, MetadataRecord};
use crate::error::{Error, Result};
use crate::Percent;

/// Default connection threshold.
pub const DEFAULT_TAU_CONN: Percent = 70;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Nonnegative feature weights summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionWeights {
    w_jaccard: f64,
    w_dice: f64,
    w_lev: f64,
}

impl RegressionWeights {
    pub fn new(w_jaccard: f64, w_dice: f64, w_lev: f64) -> Result<Self> {
        let all = [w_jaccard, w_dice, w_lev];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and nonnegative, got {w_jaccard},{w_dice},{w_lev}"
            )));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self {
            w_jaccard,
            w_dice,
            w_lev,
        })
    }

    pub fn jaccard(&self) -> f64 {
        self.w_jaccard
    }

    pub fn dice(&self) -> f64 {
        self.w_dice
    }

    pub fn levenshtein(&self) -> f64 {
        self.w_lev
    }
}

impl Default for RegressionWeights {
    fn default() -> Self {
        Self {
            w_jaccard: 0.4,
            w_dice: 0.3,
            w_lev: 0.3,
        }
    }
}

impl<'de> Deserialize<'de> for RegressionWeights {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            w_jaccard: f64,
            w_dice: f64,
            w_lev: f64,
        }
        let raw = Raw::deserialize(de)?;
        RegressionWeights::new(raw.w_jaccard, raw.w_dice, raw.w_lev)
            .map_err(serde::de::Error::custom)
    }
}

/// Parses `j,d,l`.
impl FromStr for RegressionWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidWeights(format!("`{s}`: {e}")))?;
        match parts.as_slice() {
            [j, d, l] => Self::new(*j, *d, *l),
            _ => Err(Error::InvalidWeights(format!(
                "`{s}`: expected three comma-separated numbers"
            ))),
        }
    }
}

impl fmt::Display for RegressionWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.w_jaccard, self.w_dice, self.w_lev)
    }
}

/// Weighted feature sum as an integer percent, rounded half-up.
pub fn regression_similarity(f: &FeatureVector, w: &RegressionWeights) -> Percent {
    let score = w.w_jaccard * f.token_jaccard + w.w_dice * f.trigram_dice + w.w_lev * f.norm_levenshtein;
    // The epsilon absorbs representation error so that e.g. 37.4999999 rounds as 37.5.
    let pct = (100.0 * score + 0.5 + 1e-9).floor();
    pct.clamp(0.0, 100.0) as Percent
}

/// Scores two normalized names given as token lists.
pub fn score_tokens<S: AsRef<str>>(left: &[S], right: &[S], w: &RegressionWeights) -> Percent {
    regression_similarity(&FeatureVector::between(left, right), w)
}

#[derive(Debug, Clone, Copy)]
pub struct AttributePair<'a> {
    pub left: &'a ColumnDescriptor,
    pub right: &'a ColumnDescriptor,
}

impl AttributePair<'_> {
    pub fn features(&self) -> FeatureVector {
        FeatureVector::from_parts(
            &self.left.norm_tokens,
            &self.left.joined(),
            &self.right.norm_tokens,
            &self.right.joined(),
        )
    }
}

/// All column pairs of `a × b`, row-major by column index.
pub fn generate_pairs<'a>(
    a: &'a MetadataRecord,
    b: &'a MetadataRecord,
) -> Result<Vec<AttributePair<'a>>> {
    if a.id() == b.id() {
        return Err(Error::SelfPair(a.id().to_string()));
    }
    Ok(a.columns
        .iter()
        .flat_map(|left| b.columns.iter().map(move |right| AttributePair { left, right }))
        .collect())
}

/// `(source, target, percent)`: `source` of one dataset is `percent`% similar
/// to `target` of the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarityTriple {
    pub source: String,
    pub target: String,
    pub percent: Percent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionEvidence {
    pub dataset_a: String,
    pub dataset_b: String,
    pub max_percent: Percent,
    pub strong_pairs: usize,
    pub connected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CognateOutput {
    pub triples: Vec<SimilarityTriple>,
    pub evidence: ConnectionEvidence,
}

/// Scores every column pair of `a × b` and aggregates the connection evidence.
///
/// Pairs are scored in parallel; the triple order always follows
/// [`generate_pairs`].
pub fn cognate_map(
    a: &MetadataRecord,
    b: &MetadataRecord,
    w: &RegressionWeights,
    tau_conn: Percent,
) -> Result<CognateOutput> {
    let pairs = generate_pairs(a, b)?;
    let triples: Vec<SimilarityTriple> = pairs
        .par_iter()
        .map(|pair| SimilarityTriple {
            source: pair.left.qualified_name(),
            target: pair.right.qualified_name(),
            percent: regression_similarity(&pair.features(), w),
        })
        .collect();
    let evidence = evidence_from(a.id(), b.id(), &triples, tau_conn);
    Ok(CognateOutput { triples, evidence })
}

pub fn evidence_from(
    dataset_a: &str,
    dataset_b: &str,
    triples: &[SimilarityTriple],
    tau_conn: Percent,
) -> ConnectionEvidence {
    let max_percent = triples.iter().map(|t| t.percent).max().unwrap_or(0);
    let strong_pairs = triples.iter().filter(|t| t.percent >= tau_conn).count();
    ConnectionEvidence {
        dataset_a: dataset_a.to_string(),
        dataset_b: dataset_b.to_string(),
        max_percent,
        strong_pairs,
        connected: strong_pairs >= 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{normalize_text, DatasetRef, InferredType};
    use std::collections::{BTreeMap, BTreeSet};

    pub(crate) fn record(id: &str, names: &[&str]) -> MetadataRecord {
        MetadataRecord {
            dataset: DatasetRef {
                id: id.into(),
                path: format!("{id}.csv").into(),
                row_count: 0,
            },
            columns: names
                .iter()
                .map(|n| ColumnDescriptor {
                    dataset_id: id.into(),
                    name: n.to_string(),
                    norm_tokens: normalize_text(n),
                    inferred_type: InferredType::Unknown,
                    null_fraction: 0.0,
                })
                .collect(),
            kinds: BTreeMap::new(),
            domain_tags: BTreeSet::new(),
        }
    }

    #[test]
    fn weights_validation() {
        assert!(RegressionWeights::new(0.5, 0.5, 0.0).is_ok());
        assert!(RegressionWeights::new(0.5, 0.5, 0.1).is_err());
        assert!(RegressionWeights::new(-0.1, 0.6, 0.5).is_err());
        assert!(RegressionWeights::new(f64::NAN, 0.5, 0.5).is_err());
        let w: RegressionWeights = "0.2, 0.3,0.5".parse().unwrap();
        assert_eq!(w.levenshtein(), 0.5);
        assert!("0.5,0.5".parse::<RegressionWeights>().is_err());
        assert!(serde_json::from_str::<RegressionWeights>(
            r#"{"w_jaccard":0.9,"w_dice":0.3,"w_lev":0.3}"#
        )
        .is_err());
    }

    #[test]
    fn regression_examples() {
        let w = RegressionWeights::default();
        let ones = FeatureVector {
            token_jaccard: 1.0,
            trigram_dice: 1.0,
            norm_levenshtein: 1.0,
        };
        assert_eq!(regression_similarity(&ones, &w), 100);
        let odd = RegressionWeights::new(0.1, 0.7, 0.2).unwrap();
        assert_eq!(regression_similarity(&ones, &odd), 100);
        let zeros = FeatureVector {
            token_jaccard: 0.0,
            trigram_dice: 0.0,
            norm_levenshtein: 0.0,
        };
        assert_eq!(regression_similarity(&zeros, &w), 0);
        let f = FeatureVector {
            token_jaccard: 0.6667,
            trigram_dice: 0.5,
            norm_levenshtein: 0.75,
        };
        assert_eq!(regression_similarity(&f, &w), 64);
    }

    #[test]
    fn half_up_rounding() {
        // 0.3*0.5 + 0.3*0.75 = 0.375 -> 37.5 -> 38
        let f = FeatureVector {
            token_jaccard: 0.0,
            trigram_dice: 0.5,
            norm_levenshtein: 0.75,
        };
        assert_eq!(regression_similarity(&f, &RegressionWeights::default()), 38);
    }

    #[test]
    fn pair_counts_and_order() {
        let a = record("a", &["x", "y", "z"]);
        let b = record("b", &["p", "q", "r", "s"]);
        let pairs = generate_pairs(&a, &b).unwrap();
        assert_eq!(pairs.len(), 12);
        assert_eq!(pairs[1].left.name, "x");
        assert_eq!(pairs[1].right.name, "q");
        assert_eq!(pairs[4].left.name, "y");

        let one = record("c", &["k"]);
        let two = record("d", &["k"]);
        assert_eq!(generate_pairs(&one, &two).unwrap().len(), 1);
        assert!(matches!(generate_pairs(&a, &a), Err(Error::SelfPair(_))));
    }

    #[test]
    fn c1_cc1_triple() {
        let a = record("DS1", &["c1"]);
        let b = record("DS2", &["cc1"]);
        let out = cognate_map(&a, &b, &RegressionWeights::default(), DEFAULT_TAU_CONN).unwrap();
        let t = &out.triples[0];
        assert_eq!(t.source, "DS1.c1");
        assert_eq!(t.target, "DS2.cc1");
        // jaccard 0, dice: "c1" short -> 0, lev 1 - 1/3
        assert_eq!(t.percent, 20);
        let json = serde_json::to_string(t).unwrap();
        assert_eq!(json, r#"{"source":"DS1.c1","target":"DS2.cc1","percent":20}"#);
    }

    #[test]
    fn c1_cc1_triple_custom_weights() {
        let a = record("DS1", &["c1"]);
        let b = record("DS2", &["cc1"]);
        // only the Levenshtein feature is nonzero (2/3); 0.15 * 2/3 = 0.10
        let w = RegressionWeights::new(0.5, 0.35, 0.15).unwrap();
        let out = cognate_map(&a, &b, &w, DEFAULT_TAU_CONN).unwrap();
        assert_eq!(
            out.triples[0],
            SimilarityTriple {
                source: "DS1.c1".into(),
                target: "DS2.cc1".into(),
                percent: 10
            }
        );
    }

    #[test]
    fn identity_copy_is_connected() {
        let a = record("a", &["Date", "Vehicle_Type", "Km"]);
        let b = record("b", &["Date", "Vehicle_Type", "Km"]);
        let out = cognate_map(&a, &b, &RegressionWeights::default(), 100).unwrap();
        for i in 0..3 {
            assert_eq!(out.triples[i * 3 + i].percent, 100);
        }
        assert!(out.evidence.connected);
        assert_eq!(out.evidence.max_percent, 100);
        assert_eq!(out.evidence.strong_pairs, 3);
    }

    #[test]
    fn unrelated_names_not_connected() {
        let a = record("a", &["date", "km"]);
        let b = record("b", &["speed", "city"]);
        let out = cognate_map(&a, &b, &RegressionWeights::default(), 80).unwrap();
        assert!(!out.evidence.connected);
        assert_eq!(out.evidence.strong_pairs, 0);
    }

    #[test]
    fn evidence_json_field_names() {
        let e = evidence_from("a", "b", &[], 70);
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(
            json,
            r#"{"dataset_a":"a","dataset_b":"b","max_percent":0,"strong_pairs":0,"connected":false}"#
        );
    }
}
