//! Domain channels, linear pointer traversals and their logging.
//!
//! Centers are pooled into one channel per domain. A [`LinearPointer`]
//! walks a channel's centers in order and either binds to a center (score at
//! or above its threshold) or leaves a reference tag. Each traversal is
//! appended to a [`SearchCycleLog`] and its consecutive visits become edges
//! of a [`VisitGraph`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::centers::MetaCenter;
use crate::error::{Error, Result};
use crate::grouping::Payload;
use crate::Percent;

/// Default bind threshold.
pub const DEFAULT_BIND_THRESHOLD: Percent = 80;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainChannel {
    pub domain_label: String,
    pub center_ids: Vec<String>,
}

/// One channel per domain label, channels ordered by label and centers
/// sorted within each channel.
pub fn pool_centers(centers: &[MetaCenter], node_domains: &BTreeMap<String, String>) -> Result<Vec<DomainChannel>> {
    let mut pools: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for center in centers {
        let domain = node_domains
            .get(&center.node_id)
            .ok_or_else(|| Error::UntaggedNode(center.node_id.clone()))?;
        pools
            .entry(domain.as_str())
            .or_default()
            .insert(center.node_id.as_str());
    }
    Ok(pools
        .into_iter()
        .map(|(label, ids)| DomainChannel {
            domain_label: label.to_string(),
            center_ids: ids.into_iter().map(String::from).collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearPointer {
    pub id: String,
    pub profile: Payload,
    pub bind_threshold: Percent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisitAction {
    Bind,
    Tag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub pointer_id: String,
    pub visited_node_id: String,
    pub action: VisitAction,
    pub score: Percent,
    pub sequence_no: u32,
}

/// Visits every center of `channel` in order, scoring each with `scorer`.
pub fn traverse<F>(pointer: &LinearPointer, channel: &DomainChannel, mut scorer: F) -> Vec<VisitRecord>
where
    F: FnMut(&Payload, &str) -> Percent,
{
    channel
        .center_ids
        .iter()
        .zip(1u32..)
        .map(|(center, seq)| {
            let score = scorer(&pointer.profile, center);
            VisitRecord {
                pointer_id: pointer.id.clone(),
                visited_node_id: center.clone(),
                action: if score >= pointer.bind_threshold {
                    VisitAction::Bind
                } else {
                    VisitAction::Tag
                },
                score,
                sequence_no: seq,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VisitEdge {
    pub from: String,
    pub to: String,
    pub pointer_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitGraph {
    pub vertices: BTreeSet<String>,
    pub edges: Vec<VisitEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleEntry {
    pub cycle_no: u64,
    pub source_space_id: String,
    pub target_space_id: String,
    pub visit_records: Vec<VisitRecord>,
}

/// Append-only history of traversals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCycleLog {
    entries: Vec<CycleEntry>,
}

impl SearchCycleLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[CycleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn next_cycle_no(&self) -> u64 {
        self.entries.last().map_or(1, |e| e.cycle_no + 1)
    }
}

/// Appends one traversal to the log and its vertices and consecutive-visit
/// edges to the graph. Returns the new cycle number.
pub fn record_cycle(
    log: &mut SearchCycleLog,
    graph: &mut VisitGraph,
    source_space_id: &str,
    target_space_id: &str,
    visits: Vec<VisitRecord>,
) -> u64 {
    let cycle_no = log.next_cycle_no();
    for visit in &visits {
        graph.vertices.insert(visit.pointer_id.clone());
        graph.vertices.insert(visit.visited_node_id.clone());
    }
    for pair in visits.windows(2) {
        graph.edges.push(VisitEdge {
            from: pair[0].visited_node_id.clone(),
            to: pair[1].visited_node_id.clone(),
            pointer_id: pair[1].pointer_id.clone(),
        });
    }
    log.entries.push(CycleEntry {
        cycle_no,
        source_space_id: source_space_id.to_string(),
        target_space_id: target_space_id.to_string(),
        visit_records: visits,
    });
    cycle_no
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Dot,
    Structured,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "structured" | "json" => Ok(GraphFormat::Structured),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Serializes the graph with vertices and edges sorted, so equal graphs
/// always produce identical text.
pub fn export_graph(graph: &VisitGraph, format: GraphFormat) -> String {
    let mut edges: Vec<&VisitEdge> = graph.edges.iter().collect();
    edges.sort();
    match format {
        GraphFormat::Dot => {
            let mut out = String::from("digraph visits {\n");
            for v in &graph.vertices {
                writeln!(out, "  {};", dot_quote(v)).unwrap();
            }
            for e in edges {
                writeln!(
                    out,
                    "  {} -> {} [label={}];",
                    dot_quote(&e.from),
                    dot_quote(&e.to),
                    dot_quote(&e.pointer_id)
                )
                .unwrap();
            }
            out.push_str("}\n");
            out
        }
        GraphFormat::Structured => {
            let sorted = VisitGraph {
                vertices: graph.vertices.clone(),
                edges: edges.into_iter().cloned().collect(),
            };
            let mut out = serde_json::to_string_pretty(&sorted).expect("graph serializes");
            out.push('\n');
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centers::CenterMethod;
    use crate::cognate::RegressionWeights;
    use crate::catalog::NormalizeOptions;

    fn center(id: &str) -> MetaCenter {
        MetaCenter {
            collection_id: format!("c-{id}"),
            node_id: id.into(),
            cost: 0.0,
            method: CenterMethod::Exact,
        }
    }

    fn pointer(name: &str, bind: Percent) -> LinearPointer {
        LinearPointer {
            id: format!("ptr:{name}"),
            profile: Payload::from_text(name, &NormalizeOptions::default()),
            bind_threshold: bind,
        }
    }

    fn channel(ids: &[&str]) -> DomainChannel {
        DomainChannel {
            domain_label: "transport".into(),
            center_ids: ids.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn name_scorer(profile: &Payload, node: &str) -> Percent {
        let name = node.split_once('.').map_or(node, |(_, n)| n);
        profile.score(
            &Payload::from_text(name, &NormalizeOptions::default()),
            &RegressionWeights::default(),
        )
    }

    #[test]
    fn pooling_examples() {
        let domains: BTreeMap<String, String> = [("t.b", "transport"), ("t.a", "transport"), ("f.x", "food")]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let chans = pool_centers(&[center("t.b"), center("f.x"), center("t.a")], &domains).unwrap();
        assert_eq!(chans.len(), 2);
        assert_eq!(chans[0].domain_label, "food");
        assert_eq!(chans[1].center_ids, ["t.a", "t.b"]);

        let reordered = pool_centers(&[center("t.a"), center("t.b"), center("f.x")], &domains).unwrap();
        assert_eq!(chans, reordered);

        assert!(pool_centers(&[], &domains).unwrap().is_empty());
        assert!(pool_centers(&[center("zz")], &domains).is_err());
    }

    #[test]
    fn traverse_examples() {
        assert!(traverse(&pointer("date", 80), &channel(&[]), name_scorer).is_empty());

        let visits = traverse(
            &pointer("Vehicle_Type", 80),
            &channel(&["a.speed", "b.vehicle_type", "c.zone"]),
            name_scorer,
        );
        assert_eq!(visits.len(), 3);
        assert_eq!(visits.iter().map(|v| v.sequence_no).collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(visits[1].score, 100);
        assert_eq!(visits[1].action, VisitAction::Bind);
        for v in &visits {
            assert_eq!(v.action == VisitAction::Bind, v.score >= 80);
        }

        let mut log = SearchCycleLog::new();
        let mut graph = VisitGraph::default();
        record_cycle(&mut log, &mut graph, "a", "b", visits);
        assert_eq!(graph.edges.len(), 2);
        assert!(graph.vertices.contains("ptr:Vehicle_Type"));
    }

    #[test]
    fn recording_examples() {
        let mut log = SearchCycleLog::new();
        let mut graph = VisitGraph::default();
        let one = traverse(&pointer("x", 80), &channel(&["a.x"]), name_scorer);
        assert_eq!(record_cycle(&mut log, &mut graph, "s", "t", one), 1);
        assert!(graph.edges.is_empty());

        let three = channel(&["a.p", "a.q", "a.r"]);
        let snapshot = log.entries().to_vec();
        record_cycle(&mut log, &mut graph, "s", "t", traverse(&pointer("p", 80), &three, name_scorer));
        assert_eq!(&log.entries()[..1], snapshot.as_slice());
        record_cycle(&mut log, &mut graph, "t", "s", traverse(&pointer("q", 80), &three, name_scorer));
        assert_eq!(graph.edges.len(), 4);
        assert_eq!(log.len(), 3);
        assert_eq!(log.entries()[2].cycle_no, 3);
    }

    #[test]
    fn export_formats() {
        let empty = export_graph(&VisitGraph::default(), GraphFormat::Dot);
        assert_eq!(empty, "digraph visits {\n}\n");
        assert!(!empty.contains("->"));

        let mut log = SearchCycleLog::new();
        let mut graph = VisitGraph::default();
        let visits = traverse(&pointer("x", 80), &channel(&["a.x", "b.\"y\""]), name_scorer);
        record_cycle(&mut log, &mut graph, "s", "t", visits);
        let dot = export_graph(&graph, GraphFormat::Dot);
        assert_eq!(dot.matches("->").count(), 1);
        assert!(dot.contains(r#""a.x" -> "b.\"y\"" [label="ptr:x"];"#));
        assert_eq!(dot, export_graph(&graph, GraphFormat::Dot));

        let json = export_graph(&graph, GraphFormat::Structured);
        let back: VisitGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, graph);

        assert!(matches!("svg".parse::<GraphFormat>(), Err(Error::UnknownFormat(_))));
    }
}
