use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    canonical_label_key, Edge, ElementKind, EndpointLookup, KeySet, LabelSet, Node, PropertyGraph,
};

/// One edge instance's endpoints, by node id and by endpoint label key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointRef {
    pub src: String,
    pub tgt: String,
    pub src_key: String,
    pub tgt_key: String,
}

/// A cluster summarized by the union of its members' labels, keys and
/// endpoint label keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateType {
    pub kind: ElementKind,
    pub labels: LabelSet,
    pub keys: KeySet,
    /// Endpoint label-key pairs; empty for nodes.
    pub endpoints: BTreeSet<(String, String)>,
    pub members: Vec<String>,
    /// Parallel to `members` for edges; empty for nodes.
    pub member_ends: Vec<EndpointRef>,
}

impl CandidateType {
    pub fn is_labeled(&self) -> bool {
        !self.labels.is_empty()
    }

    pub fn label_key(&self) -> String {
        canonical_label_key(&self.labels)
    }
}

pub fn node_representative<'a, I>(nodes: I) -> Result<CandidateType>
where
    I: IntoIterator<Item = &'a Node>,
{
    let mut cand = CandidateType {
        kind: ElementKind::Node,
        labels: LabelSet::new(),
        keys: KeySet::new(),
        endpoints: BTreeSet::new(),
        members: Vec::new(),
        member_ends: Vec::new(),
    };
    for node in nodes {
        cand.labels.extend(node.labels.iter().cloned());
        cand.keys.extend(node.properties.keys().cloned());
        cand.members.push(node.id.clone());
    }
    if cand.members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    Ok(cand)
}

pub fn edge_representative<'a, I, G>(edges: I, lookup: &G) -> Result<CandidateType>
where
    I: IntoIterator<Item = &'a Edge>,
    G: EndpointLookup + ?Sized,
{
    let mut cand = CandidateType {
        kind: ElementKind::Edge,
        labels: LabelSet::new(),
        keys: KeySet::new(),
        endpoints: BTreeSet::new(),
        members: Vec::new(),
        member_ends: Vec::new(),
    };
    for edge in edges {
        let key_of = |id: &String| {
            lookup
                .endpoint_labels(id)
                .map(canonical_label_key)
                .ok_or_else(|| Error::DanglingEndpoint {
                    edge: edge.id.clone(),
                    node: id.clone(),
                })
        };
        let ends = EndpointRef {
            src: edge.src.clone(),
            tgt: edge.tgt.clone(),
            src_key: key_of(&edge.src)?,
            tgt_key: key_of(&edge.tgt)?,
        };
        cand.labels.extend(edge.labels.iter().cloned());
        cand.keys.extend(edge.properties.keys().cloned());
        cand.endpoints
            .insert((ends.src_key.clone(), ends.tgt_key.clone()));
        cand.members.push(edge.id.clone());
        cand.member_ends.push(ends);
    }
    if cand.members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    Ok(cand)
}

/// Representative of a cluster of element ids drawn from `graph`.
pub fn cluster_representative(
    kind: ElementKind,
    cluster: &[String],
    graph: &PropertyGraph,
) -> Result<CandidateType> {
    let missing = |id: &String| {
        Error::InvalidConfig(format!(
            "cluster member `{id}` is not a {} of the graph",
            kind.as_str()
        ))
    };
    match kind {
        ElementKind::Node => {
            let nodes = cluster
                .iter()
                .map(|id| graph.node(id).ok_or_else(|| missing(id)))
                .collect::<Result<Vec<_>>>()?;
            node_representative(nodes)
        }
        ElementKind::Edge => {
            let edges = cluster
                .iter()
                .map(|id| graph.edge(id).ok_or_else(|| missing(id)))
                .collect::<Result<Vec<_>>>()?;
            edge_representative(edges, graph)
        }
    }
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets counting as identical.
pub fn jaccard(a: &KeySet, b: &KeySet) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(items: &[&str]) -> KeySet {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn jaccard_values() {
        let pgb = keys(&["name", "gender", "bday"]);
        assert_eq!(jaccard(&pgb, &pgb), 1.0);
        assert_eq!(jaccard(&keys(&["imgFile"]), &keys(&["content"])), 0.0);
        assert_eq!(jaccard(&keys(&["name", "url"]), &keys(&["name"])), 0.5);
        assert_eq!(jaccard(&keys(&[]), &keys(&[])), 1.0);
        assert_eq!(jaccard(&keys(&["a"]), &keys(&[])), 0.0);
    }

    #[test]
    fn representatives_union_members() {
        let mut g = PropertyGraph::new();
        g.add_node(Node::new(
            "post1",
            ["Post"],
            [("imgFile", "screenshot.png")],
        ))
        .unwrap();
        g.add_node(Node::new("post2", ["Post"], [("content", "bazinga!")]))
            .unwrap();
        g.add_node(Node::new(
            "alice",
            Vec::<String>::new(),
            [
                ("name", "Alice"),
                ("gender", "female"),
                ("bday", "19/12/1999"),
            ],
        ))
        .unwrap();
        let c = cluster_representative(ElementKind::Node, &["post1".into(), "post2".into()], &g)
            .unwrap();
        assert_eq!(c.label_key(), "Post");
        assert_eq!(c.keys, keys(&["imgFile", "content"]));
        let a = cluster_representative(ElementKind::Node, &["alice".into()], &g).unwrap();
        assert!(!a.is_labeled());
        assert_eq!(a.keys, keys(&["name", "gender", "bday"]));
        assert!(matches!(
            cluster_representative(ElementKind::Node, &[], &g),
            Err(Error::EmptyCluster)
        ));
    }

    #[test]
    fn edge_representative_collects_endpoint_keys() {
        let mut g = PropertyGraph::new();
        g.add_node(Node::new("o", ["Org."], Vec::<(&str, &str)>::new()))
            .unwrap();
        g.add_node(Node::new("p", ["Person"], Vec::<(&str, &str)>::new()))
            .unwrap();
        g.add_node(Node::new("pl", ["Place"], Vec::<(&str, &str)>::new()))
            .unwrap();
        g.add_edge(Edge::new(
            "e1",
            ["LOCATED_IN"],
            "o",
            "pl",
            Vec::<(&str, &str)>::new(),
        ))
        .unwrap();
        g.add_edge(Edge::new(
            "e2",
            ["LOCATED_IN"],
            "p",
            "pl",
            [("from", "2025")],
        ))
        .unwrap();
        let c = cluster_representative(ElementKind::Edge, &["e1".into(), "e2".into()], &g).unwrap();
        assert_eq!(c.keys, keys(&["from"]));
        let expected: BTreeSet<(String, String)> = [
            ("Org.".to_string(), "Place".to_string()),
            ("Person".to_string(), "Place".to_string()),
        ]
        .into();
        assert_eq!(c.endpoints, expected);
        assert_eq!(c.member_ends.len(), 2);
    }
}
