//! Similarity matrices over meta-nodes and single-link threshold clustering.
//!
//! Clustering is the connected components of the graph that has an edge
//! wherever two nodes score at least `tau`. [`threshold_cluster`] computes it
//! in one pass over a matrix; [`StreamClusterer`] maintains the same
//! components while nodes arrive one at a time, and ends in the same
//! partition whatever the arrival order.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{normalize_text_with, MetadataRecord, NormalizeOptions};
use crate::cognate::{regression_similarity, FeatureVector, RegressionWeights};
use crate::error::{Error, Result};
use crate::Percent;

/// Default clustering threshold.
pub const DEFAULT_TAU: Percent = 75;

/// Normalized tokens of a name or text and their space-joined form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    pub tokens: Vec<String>,
    pub joined: String,
}

impl Payload {
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let joined = tokens.join(" ");
        Self { tokens, joined }
    }

    pub fn from_text(raw: &str, opts: &NormalizeOptions) -> Self {
        Self::from_tokens(normalize_text_with(raw, opts))
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn features(&self, other: &Payload) -> FeatureVector {
        FeatureVector::from_parts(&self.tokens, &self.joined, &other.tokens, &other.joined)
    }

    pub fn score(&self, other: &Payload, w: &RegressionWeights) -> Percent {
        regression_similarity(&self.features(other), w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Column,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaNode {
    /// `datasetId.column`, or `datasetId.desc` for a description.
    pub id: String,
    pub dataset_id: String,
    pub kind: NodeKind,
    pub payload: Payload,
}

/// Meta-nodes of one record: one per column, plus one text node for the
/// description when `include_text` is set and a description exists.
pub fn nodes_for_record(md: &MetadataRecord, include_text: bool, opts: &NormalizeOptions) -> Vec<MetaNode> {
    let mut nodes: Vec<MetaNode> = md
        .columns
        .iter()
        .map(|c| MetaNode {
            id: c.qualified_name(),
            dataset_id: md.id().to_string(),
            kind: NodeKind::Column,
            payload: Payload::from_tokens(c.norm_tokens.clone()),
        })
        .collect();
    if include_text {
        if let Some(desc) = md.description() {
            nodes.push(MetaNode {
                id: format!("{}.desc", md.id()),
                dataset_id: md.id().to_string(),
                kind: NodeKind::Text,
                payload: Payload::from_text(&desc, opts),
            });
        }
    }
    nodes
}

/// Symmetric matrix of integer percents indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    node_ids: Vec<String>,
    cells: Vec<Percent>,
}

impl SimilarityMatrix {
    /// Builds a matrix from explicit rows, checking shape, symmetry and range.
    pub fn from_rows(node_ids: Vec<String>, rows: Vec<Vec<Percent>>) -> Result<Self> {
        let n = node_ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("similarity matrix must be {n}x{n}")));
        }
        let mut seen = BTreeSet::new();
        for id in &node_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateNode(id.clone()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] > 100 {
                    return Err(Error::Config(format!("cell ({i},{j}) exceeds 100")));
                }
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Config(format!("cell ({i},{j}) breaks symmetry")));
                }
            }
        }
        Ok(Self {
            node_ids,
            cells: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == id)
    }

    pub fn cell(&self, i: usize, j: usize) -> Percent {
        self.cells[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[Percent] {
        let n = self.len();
        &self.cells[i * n..(i + 1) * n]
    }

    pub fn get(&self, a: &str, b: &str) -> Result<Percent> {
        let i = self.index_of(a).ok_or_else(|| Error::UnknownNode(a.to_string()))?;
        let j = self.index_of(b).ok_or_else(|| Error::UnknownNode(b.to_string()))?;
        Ok(self.cell(i, j))
    }

    /// Delimited text with a header row and a leading id column.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
        let header = std::iter::once("").chain(self.node_ids.iter().map(String::as_str));
        wtr.write_record(header).expect("in-memory write");
        for (i, id) in self.node_ids.iter().enumerate() {
            let row = std::iter::once(id.clone()).chain(self.row(i).iter().map(|c| c.to_string()));
            wtr.write_record(row).expect("in-memory write");
        }
        let bytes = wtr.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("utf-8 input")
    }
}

/// Scores every unordered pair once; cell `(i, j)` equals cell `(j, i)`.
pub fn build_similarity_matrix(nodes: &[MetaNode], w: &RegressionWeights) -> Result<SimilarityMatrix> {
    let n = nodes.len();
    let mut seen = BTreeSet::new();
    for node in nodes {
        if !seen.insert(node.id.as_str()) {
            return Err(Error::DuplicateNode(node.id.clone()));
        }
    }
    let upper: Vec<(usize, usize, Percent)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i..n).map(move |j| (i, j, nodes[i].payload.score(&nodes[j].payload, w)))
        })
        .collect();
    let mut cells = vec![0; n * n];
    for (i, j, s) in upper {
        cells[i * n + j] = s;
        cells[j * n + i] = s;
    }
    Ok(SimilarityMatrix {
        node_ids: nodes.iter().map(|n| n.id.clone()).collect(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaCollection {
    pub id: String,
    pub member_ids: BTreeSet<String>,
    pub space_id: String,
}

#[derive(Debug, Clone)]
struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] = self.rank[a].saturating_add(1);
            }
        }
    }
}

/// Names and orders groups: sorted by smallest member, ids `<space>/X<k>`
/// numbered from 1.
fn label_groups(space_id: &str, groups: impl IntoIterator<Item = BTreeSet<String>>) -> Vec<MetaCollection> {
    let mut groups: Vec<BTreeSet<String>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    groups.sort();
    groups
        .into_iter()
        .enumerate()
        .map(|(k, member_ids)| MetaCollection {
            id: format!("{space_id}/X{}", k + 1),
            member_ids,
            space_id: space_id.to_string(),
        })
        .collect()
}

/// Connected components of the `cell >= tau` graph. `tau > 100` yields
/// singletons; `tau == 0` yields one collection.
pub fn threshold_cluster(matrix: &SimilarityMatrix, tau: u16, space_id: &str) -> Vec<MetaCollection> {
    let n = matrix.len();
    let mut dsu = DisjointSet::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if u16::from(matrix.cell(i, j)) >= tau {
                dsu.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (i, id) in matrix.node_ids().iter().enumerate() {
        groups.entry(dsu.find(i)).or_default().insert(id.clone());
    }
    label_groups(space_id, groups.into_values())
}

/// Incremental single-link clustering.
#[derive(Debug, Clone)]
pub struct StreamClusterer {
    tau: u16,
    groups: Vec<BTreeSet<String>>,
}

impl StreamClusterer {
    pub fn new(tau: u16) -> Self {
        Self {
            tau,
            groups: Vec::new(),
        }
    }

    pub fn contains(&self, node_id: &str) -> bool {
        self.groups.iter().any(|g| g.contains(node_id))
    }

    /// Inserts `node_id` given its scores against previously inserted nodes.
    ///
    /// Every group holding a member scored at or above `tau` merges with the
    /// new node; otherwise the node starts a singleton. Scores for ids that
    /// were never inserted are ignored.
    pub fn insert<'a, I>(&mut self, node_id: &str, scores: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a str, Percent)>,
    {
        if self.contains(node_id) {
            return Err(Error::DuplicateNode(node_id.to_string()));
        }
        let linked: BTreeSet<&str> = scores
            .into_iter()
            .filter(|(_, s)| u16::from(*s) >= self.tau)
            .map(|(id, _)| id)
            .collect();
        let mut merged = BTreeSet::from([node_id.to_string()]);
        let mut kept = Vec::with_capacity(self.groups.len());
        for group in self.groups.drain(..) {
            if group.iter().any(|m| linked.contains(m.as_str())) {
                merged.extend(group);
            } else {
                kept.push(group);
            }
        }
        kept.push(merged);
        self.groups = kept;
        Ok(())
    }

    /// Inserts the matrix node `index` using its row against the nodes
    /// already present.
    pub fn insert_from_matrix(&mut self, matrix: &SimilarityMatrix, index: usize) -> Result<()> {
        let ids = matrix.node_ids();
        let row = matrix.row(index);
        let scores: Vec<(&str, Percent)> = ids
            .iter()
            .zip(row)
            .enumerate()
            .filter(|(j, (id, _))| *j != index && self.contains(id))
            .map(|(_, (id, s))| (id.as_str(), *s))
            .collect();
        self.insert(&ids[index], scores)
    }

    pub fn collections(&self, space_id: &str) -> Vec<MetaCollection> {
        label_groups(space_id, self.groups.iter().cloned())
    }
}

/// Partition as a set of member sets, for order-free comparison.
pub fn as_partition(collections: &[MetaCollection]) -> BTreeSet<BTreeSet<String>> {
    collections.iter().map(|c| c.member_ids.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, name: &str) -> MetaNode {
        MetaNode {
            id: id.into(),
            dataset_id: "d".into(),
            kind: NodeKind::Column,
            payload: Payload::from_text(name, &NormalizeOptions::default()),
        }
    }

    fn abc(ab: Percent, bc: Percent, ac: Percent) -> SimilarityMatrix {
        SimilarityMatrix::from_rows(
            vec!["A".into(), "B".into(), "C".into()],
            vec![vec![100, ab, ac], vec![ab, 100, bc], vec![ac, bc, 100]],
        )
        .unwrap()
    }

    #[test]
    fn single_node_matrix() {
        let m = build_similarity_matrix(&[node("n", "Date")], &RegressionWeights::default()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.cell(0, 0), 100);
    }

    #[test]
    fn date_data_matrix() {
        let m = build_similarity_matrix(
            &[node("a.date", "date"), node("b.data", "data")],
            &RegressionWeights::default(),
        )
        .unwrap();
        assert_eq!(m.cell(0, 1), 38);
        assert_eq!(m.cell(1, 0), 38);
        assert_eq!(m.get("a.date", "b.data").unwrap(), 38);
        assert!(m.get("zz", "a.date").is_err());
    }

    #[test]
    fn duplicate_node_rejected() {
        assert!(build_similarity_matrix(&[node("x", "a"), node("x", "b")], &RegressionWeights::default()).is_err());
    }

    #[test]
    fn from_rows_validation() {
        assert!(SimilarityMatrix::from_rows(vec!["a".into()], vec![vec![101]]).is_err());
        assert!(SimilarityMatrix::from_rows(
            vec!["a".into(), "b".into()],
            vec![vec![100, 1], vec![2, 100]]
        )
        .is_err());
    }

    #[test]
    fn cluster_examples() {
        let m = abc(90, 85, 20);
        let all = threshold_cluster(&m, 80, "s");
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].member_ids.len(), 3);
        assert_eq!(all[0].id, "s/X1");

        assert_eq!(threshold_cluster(&m, 101, "s").len(), 3);
        assert_eq!(threshold_cluster(&abc(0, 0, 0), 0, "s").len(), 1);
    }

    #[test]
    fn stream_examples() {
        let mut s = StreamClusterer::new(80);
        s.insert("A", []).unwrap();
        assert_eq!(s.collections("s").len(), 1);
        s.insert("B", [("A", 10)]).unwrap();
        assert_eq!(s.collections("s").len(), 2);
        // C bridges both
        s.insert("C", [("A", 90), ("B", 90)]).unwrap();
        let cs = s.collections("s");
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].member_ids.len(), 3);
        assert!(matches!(s.insert("C", []), Err(Error::DuplicateNode(_))));
    }

    #[test]
    fn stream_matches_batch_on_fixed_matrix() {
        let m = abc(90, 85, 20);
        let mut s = StreamClusterer::new(80);
        for i in [2, 0, 1] {
            s.insert_from_matrix(&m, i).unwrap();
        }
        assert_eq!(s.collections("s"), threshold_cluster(&m, 80, "s"));
    }

    #[test]
    fn matrix_csv_export() {
        let m = abc(90, 85, 20);
        assert_eq!(m.to_csv(), ",A,B,C\nA,100,90,20\nB,90,100,85\nC,20,85,100\n");
    }
}
