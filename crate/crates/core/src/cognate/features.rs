//! String-similarity features over normalized names.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Set Jaccard over tokens. Two empty lists are identical (1.0).
pub fn token_jaccard<S: AsRef<str>>(left: &[S], right: &[S]) -> f64 {
    let a: BTreeSet<&str> = left.iter().map(AsRef::as_ref).collect();
    let b: BTreeSet<&str> = right.iter().map(AsRef::as_ref).collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

fn trigrams(s: &str) -> BTreeSet<[char; 3]> {
    let chars: Vec<char> = s.chars().collect();
    chars.windows(3).map(|w| [w[0], w[1], w[2]]).collect()
}

/// Dice coefficient over distinct character trigrams.
///
/// Strings shorter than three characters have no trigrams, so they only
/// match (1.0) when equal.
pub fn trigram_dice(left: &str, right: &str) -> f64 {
    if left.chars().count() < 3 || right.chars().count() < 3 {
        return if left == right { 1.0 } else { 0.0 };
    }
    let a = trigrams(left);
    let b = trigrams(right);
    let shared = a.intersection(&b).count();
    2.0 * shared as f64 / (a.len() + b.len()) as f64
}

/// `1 - edit_distance / max_len`, counted in chars; two empty strings give 1.0.
pub fn normalized_levenshtein(left: &str, right: &str) -> f64 {
    strsim::normalized_levenshtein(left, right)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub token_jaccard: f64,
    pub trigram_dice: f64,
    pub norm_levenshtein: f64,
}

impl FeatureVector {
    /// Features of two normalized names, given as token lists. The string
    /// features use the tokens joined by single spaces.
    pub fn between<S: AsRef<str>>(left: &[S], right: &[S]) -> Self {
        let lj = join(left);
        let rj = join(right);
        Self::from_parts(left, &lj, right, &rj)
    }

    pub(crate) fn from_parts<S: AsRef<str>>(
        left_tokens: &[S],
        left_joined: &str,
        right_tokens: &[S],
        right_joined: &str,
    ) -> Self {
        Self {
            token_jaccard: token_jaccard(left_tokens, right_tokens),
            trigram_dice: trigram_dice(left_joined, right_joined),
            norm_levenshtein: normalized_levenshtein(left_joined, right_joined),
        }
    }
}

fn join<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(" ")
}
