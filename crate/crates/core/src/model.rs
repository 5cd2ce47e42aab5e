//! Property graph data model, type patterns and schema elements.
//!
//! Everything here is a plain value type. Property values stay raw strings;
//! typed interpretation only happens during constraint inference.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type LabelSet = BTreeSet<String>;
pub type KeySet = BTreeSet<String>;

/// Separator used when several labels are folded into one label key.
pub const LABEL_KEY_SEPARATOR: &str = "&";

/// Sorted `&`-joined label key; the empty set maps to the empty string.
pub fn canonical_label_key<'a, I>(labels: I) -> String
where
    I: IntoIterator<Item = &'a String>,
{
    let mut sorted: Vec<&str> = labels.into_iter().map(String::as_str).collect();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.join(LABEL_KEY_SEPARATOR)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub labels: LabelSet,
    pub properties: BTreeMap<String, String>,
}

impl Node {
    pub fn new<L, P, K, V>(id: impl Into<String>, labels: L, properties: P) -> Self
    where
        L: IntoIterator,
        L::Item: Into<String>,
        P: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Node {
            id: id.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            properties: properties
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    pub fn label_key(&self) -> String {
        canonical_label_key(&self.labels)
    }

    pub fn keys(&self) -> KeySet {
        self.properties.keys().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub labels: LabelSet,
    pub src: String,
    pub tgt: String,
    pub properties: BTreeMap<String, String>,
}

impl Edge {
    pub fn new<L, P, K, V>(
        id: impl Into<String>,
        labels: L,
        src: impl Into<String>,
        tgt: impl Into<String>,
        properties: P,
    ) -> Self
    where
        L: IntoIterator,
        L::Item: Into<String>,
        P: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Edge {
            id: id.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            src: src.into(),
            tgt: tgt.into(),
            properties: properties
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    pub fn label_key(&self) -> String {
        canonical_label_key(&self.labels)
    }

    pub fn keys(&self) -> KeySet {
        self.properties.keys().cloned().collect()
    }
}

/// Whether an element (or vector, or cluster) describes nodes or edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Node,
    Edge,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Node => "node",
            ElementKind::Edge => "edge",
        }
    }
}

/// Resolves an edge endpoint to the labels of the node it points at.
pub trait EndpointLookup {
    fn endpoint_labels(&self, node_id: &str) -> Option<&LabelSet>;
}

/// Nodes and edges keyed by id, in ingestion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyGraph {
    nodes: IndexMap<String, Node>,
    edges: IndexMap<String, Edge>,
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, node: Node) -> Result<()> {
        if self.nodes.contains_key(&node.id) || self.edges.contains_key(&node.id) {
            return Err(Error::DuplicateId {
                kind: "node",
                id: node.id,
            });
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    /// Adds an edge whose endpoints must already be present.
    pub fn add_edge(&mut self, edge: Edge) -> Result<()> {
        if self.edges.contains_key(&edge.id) || self.nodes.contains_key(&edge.id) {
            return Err(Error::DuplicateId {
                kind: "edge",
                id: edge.id,
            });
        }
        for endpoint in [&edge.src, &edge.tgt] {
            if !self.nodes.contains_key(endpoint) {
                return Err(Error::DanglingEndpoint {
                    edge: edge.id.clone(),
                    node: endpoint.clone(),
                });
            }
        }
        self.edges.insert(edge.id.clone(), edge);
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &Node> + '_ {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &Edge> + '_ {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub(crate) fn nodes_mut(&mut self) -> impl Iterator<Item = &mut Node> + '_ {
        self.nodes.values_mut()
    }

    pub(crate) fn edges_mut(&mut self) -> impl Iterator<Item = &mut Edge> + '_ {
        self.edges.values_mut()
    }

    pub fn into_parts(self) -> (Vec<Node>, Vec<Edge>) {
        (
            self.nodes.into_values().collect(),
            self.edges.into_values().collect(),
        )
    }
}

impl EndpointLookup for PropertyGraph {
    fn endpoint_labels(&self, node_id: &str) -> Option<&LabelSet> {
        self.nodes.get(node_id).map(|n| &n.labels)
    }
}

impl EndpointLookup for HashMap<String, LabelSet> {
    fn endpoint_labels(&self, node_id: &str) -> Option<&LabelSet> {
        self.get(node_id)
    }
}

/// `(L, K)`: the label set and property-key set observed on one node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodePattern {
    pub labels: LabelSet,
    pub keys: KeySet,
}

impl NodePattern {
    pub fn canonical(&self) -> String {
        format!(
            "({}|{})",
            canonical_label_key(&self.labels),
            join(&self.keys)
        )
    }
}

/// `(L, K, (L_s, L_t))`: edge labels, edge keys and endpoint label sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgePattern {
    pub labels: LabelSet,
    pub keys: KeySet,
    pub source_labels: LabelSet,
    pub target_labels: LabelSet,
}

impl EdgePattern {
    pub fn canonical(&self) -> String {
        format!(
            "({}|{}|{}->{})",
            canonical_label_key(&self.labels),
            join(&self.keys),
            canonical_label_key(&self.source_labels),
            canonical_label_key(&self.target_labels)
        )
    }
}

fn join(keys: &KeySet) -> String {
    keys.iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn node_pattern_of(node: &Node) -> NodePattern {
    NodePattern {
        labels: node.labels.clone(),
        keys: node.keys(),
    }
}

pub fn edge_pattern_of(edge: &Edge, graph: &impl EndpointLookup) -> Result<EdgePattern> {
    let resolve = |id: &str| {
        graph
            .endpoint_labels(id)
            .cloned()
            .ok_or_else(|| Error::DanglingEndpoint {
                edge: edge.id.clone(),
                node: id.to_string(),
            })
    };
    Ok(EdgePattern {
        labels: edge.labels.clone(),
        keys: edge.keys(),
        source_labels: resolve(&edge.src)?,
        target_labels: resolve(&edge.tgt)?,
    })
}

/// Property datatypes ordered by the lattice
/// `INTEGER ⊑ FLOAT ⊑ STRING`, `BOOLEAN ⊑ STRING`, `DATE ⊑ DATETIME ⊑ STRING`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Datatype {
    Integer,
    Float,
    Boolean,
    Date,
    Datetime,
    String,
}

impl Datatype {
    pub const ALL: [Datatype; 6] = [
        Datatype::Integer,
        Datatype::Float,
        Datatype::Boolean,
        Datatype::Date,
        Datatype::Datetime,
        Datatype::String,
    ];

    /// Least upper bound in the datatype lattice.
    pub fn join(self, other: Datatype) -> Datatype {
        use Datatype::*;
        match (self, other) {
            (a, b) if a == b => a,
            (Integer, Float) | (Float, Integer) => Float,
            (Date, Datetime) | (Datetime, Date) => Datetime,
            _ => String,
        }
    }

    /// `self ⊑ other`.
    pub fn is_subtype_of(self, other: Datatype) -> bool {
        self.join(other) == other
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Datatype::Integer => "INTEGER",
            Datatype::Float => "FLOAT",
            Datatype::Boolean => "BOOLEAN",
            Datatype::Date => "DATE",
            Datatype::Datetime => "DATETIME",
            Datatype::String => "STRING",
        }
    }

    pub fn parse(s: &str) -> Option<Datatype> {
        Datatype::ALL.into_iter().find(|d| d.as_str() == s)
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Presence {
    Mandatory,
    Optional,
}

/// Per-property annotation; `None` until post-processing has run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySpec {
    pub datatype: Option<Datatype>,
    pub presence: Option<Presence>,
}

impl PropertySpec {
    pub fn is_annotated(&self) -> bool {
        self.datatype.is_some() && self.presence.is_some()
    }

    /// Annotation of a key held by both merged types.
    pub(crate) fn merge_shared(self, other: PropertySpec) -> PropertySpec {
        PropertySpec {
            datatype: match (self.datatype, other.datatype) {
                (Some(a), Some(b)) => Some(a.join(b)),
                _ => None,
            },
            presence: match (self.presence, other.presence) {
                (Some(Presence::Mandatory), Some(Presence::Mandatory)) => Some(Presence::Mandatory),
                (Some(_), Some(_)) => Some(Presence::Optional),
                _ => None,
            },
        }
    }

    /// Annotation of a key held by only one side of a merge.
    pub(crate) fn merge_one_sided(self) -> PropertySpec {
        PropertySpec {
            datatype: self.datatype,
            presence: self.presence.map(|_| Presence::Optional),
        }
    }
}

pub(crate) fn merge_property_maps(
    a: &BTreeMap<String, PropertySpec>,
    b: &BTreeMap<String, PropertySpec>,
) -> BTreeMap<String, PropertySpec> {
    let mut out = BTreeMap::new();
    for (key, spec) in a {
        let merged = match b.get(key) {
            Some(other) => spec.merge_shared(*other),
            None => spec.merge_one_sided(),
        };
        out.insert(key.clone(), merged);
    }
    for (key, spec) in b {
        if !a.contains_key(key) {
            out.insert(key.clone(), spec.merge_one_sided());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeType {
    pub name: String,
    pub labels: LabelSet,
    pub properties: BTreeMap<String, PropertySpec>,
    #[serde(rename = "abstract")]
    pub is_abstract: bool,
}

impl NodeType {
    pub fn keys(&self) -> KeySet {
        self.properties.keys().cloned().collect()
    }

    pub fn label_key(&self) -> String {
        canonical_label_key(&self.labels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Cardinality {
    ZeroOne,
    NToOne,
    OneToN,
    MToN,
    Unset,
}

impl Cardinality {
    /// Classifies the maximum distinct out/in degrees of an edge type.
    ///
    /// Many sources sharing one target reads as N:1.
    pub fn classify(max_out: u64, max_in: u64) -> Cardinality {
        match (max_out, max_in) {
            (0, _) | (_, 0) => Cardinality::Unset,
            (1, 1) => Cardinality::ZeroOne,
            (1, _) => Cardinality::NToOne,
            (_, 1) => Cardinality::OneToN,
            _ => Cardinality::MToN,
        }
    }

    pub fn notation(self) -> Option<&'static str> {
        match self {
            Cardinality::ZeroOne => Some("0:1"),
            Cardinality::NToOne => Some("N:1"),
            Cardinality::OneToN => Some("0:N"),
            Cardinality::MToN => Some("M:N"),
            Cardinality::Unset => None,
        }
    }

    pub fn from_notation(s: &str) -> Option<Cardinality> {
        [
            Cardinality::ZeroOne,
            Cardinality::NToOne,
            Cardinality::OneToN,
            Cardinality::MToN,
        ]
        .into_iter()
        .find(|c| c.notation() == Some(s))
    }
}

/// Observed degree bounds plus their classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityInfo {
    pub class: Cardinality,
    pub max_out: u64,
    pub max_in: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeType {
    pub name: String,
    pub labels: LabelSet,
    pub properties: BTreeMap<String, PropertySpec>,
    pub endpoints: BTreeSet<(String, String)>,
    pub cardinality: Option<CardinalityInfo>,
    #[serde(rename = "abstract")]
    pub is_abstract: bool,
}

impl EdgeType {
    pub fn keys(&self) -> KeySet {
        self.properties.keys().cloned().collect()
    }

    pub fn label_key(&self) -> String {
        canonical_label_key(&self.labels)
    }
}

/// Name of the placeholder node type used for endpoints that never resolve.
pub const UNKNOWN_NODE_TYPE: &str = "UNKNOWN";

/// Node types, edge types and (per run) which element landed in which type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaGraph {
    pub node_types: BTreeMap<String, NodeType>,
    pub edge_types: BTreeMap<String, EdgeType>,
    pub node_assignment: HashMap<String, String>,
    pub edge_assignment: HashMap<String, String>,
}

impl SchemaGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.node_types.is_empty() && self.edge_types.is_empty()
    }

    /// Drops per-run instance bookkeeping, keeping only the types.
    pub fn types_only(&self) -> SchemaGraph {
        SchemaGraph {
            node_types: self.node_types.clone(),
            edge_types: self.edge_types.clone(),
            node_assignment: HashMap::new(),
            edge_assignment: HashMap::new(),
        }
    }

    /// Every edge endpoint names an existing node type.
    pub fn endpoints_resolve(&self) -> bool {
        self.edge_types.values().all(|e| {
            e.endpoints
                .iter()
                .all(|(s, t)| self.node_types.contains_key(s) && self.node_types.contains_key(t))
        })
    }

    pub fn is_postprocessed(&self) -> bool {
        self.node_types
            .values()
            .flat_map(|t| t.properties.values())
            .chain(self.edge_types.values().flat_map(|t| t.properties.values()))
            .all(PropertySpec::is_annotated)
            && self.edge_types.values().all(|e| e.cardinality.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(items: &[&str]) -> LabelSet {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn label_key_sorts_and_joins() {
        assert_eq!(
            canonical_label_key(&labels(&["Student", "Person"])),
            "Person&Student"
        );
        assert_eq!(canonical_label_key(&labels(&["Person"])), "Person");
        assert_eq!(canonical_label_key(&labels(&[])), "");
    }

    fn social() -> PropertyGraph {
        let mut g = PropertyGraph::new();
        g.add_node(Node::new(
            "bob",
            ["Person"],
            [("name", "Bob"), ("gender", "male"), ("bday", "2/5/1980")],
        ))
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
        g.add_node(Node::new(
            "john",
            ["Person"],
            [("name", "John"), ("gender", "male"), ("bday", "24/9/2005")],
        ))
        .unwrap();
        g.add_node(Node::new(
            "org",
            ["Org."],
            [("name", "Example"), ("url", "example.com")],
        ))
        .unwrap();
        g
    }

    #[test]
    fn node_patterns_follow_labels_and_keys() {
        let g = social();
        let bob = node_pattern_of(g.node("bob").unwrap());
        assert_eq!(bob.labels, labels(&["Person"]));
        assert_eq!(bob.keys, labels(&["name", "gender", "bday"]));
        let alice = node_pattern_of(g.node("alice").unwrap());
        assert!(alice.labels.is_empty());
        assert_eq!(alice.keys, bob.keys);
        let bare = node_pattern_of(&Node::new(
            "x",
            Vec::<String>::new(),
            Vec::<(String, String)>::new(),
        ));
        assert!(bare.labels.is_empty() && bare.keys.is_empty());
        assert_ne!(alice, bob);
        assert_eq!(bob, node_pattern_of(g.node("john").unwrap()));
    }

    #[test]
    fn edge_patterns_resolve_endpoint_labels() {
        let g = social();
        let works = Edge::new("e1", ["WORKS_AT"], "bob", "org", [("from", "2000")]);
        let p = edge_pattern_of(&works, &g).unwrap();
        assert_eq!(p.labels, labels(&["WORKS_AT"]));
        assert_eq!(p.keys, labels(&["from"]));
        assert_eq!(p.source_labels, labels(&["Person"]));
        assert_eq!(p.target_labels, labels(&["Org."]));

        let knows = Edge::new(
            "e2",
            ["KNOWS"],
            "alice",
            "john",
            Vec::<(String, String)>::new(),
        );
        let p = edge_pattern_of(&knows, &g).unwrap();
        assert!(p.source_labels.is_empty());
        assert_eq!(p.target_labels, labels(&["Person"]));
        assert!(p.keys.is_empty());

        let dangling = Edge::new(
            "e3",
            ["KNOWS"],
            "alice",
            "nobody",
            Vec::<(String, String)>::new(),
        );
        assert!(matches!(
            edge_pattern_of(&dangling, &g),
            Err(Error::DanglingEndpoint { .. })
        ));
    }

    #[test]
    fn unlabeled_edge_between_unlabeled_nodes() {
        let mut g = PropertyGraph::new();
        g.add_node(Node::new(
            "a",
            Vec::<String>::new(),
            Vec::<(String, String)>::new(),
        ))
        .unwrap();
        g.add_node(Node::new(
            "b",
            Vec::<String>::new(),
            Vec::<(String, String)>::new(),
        ))
        .unwrap();
        let e = Edge::new(
            "e",
            Vec::<String>::new(),
            "a",
            "b",
            Vec::<(String, String)>::new(),
        );
        let p = edge_pattern_of(&e, &g).unwrap();
        assert_eq!(p.canonical(), "(||->)");
    }

    #[test]
    fn graph_rejects_duplicates_and_dangling_edges() {
        let mut g = social();
        assert!(matches!(
            g.add_node(Node::new("bob", ["X"], Vec::<(String, String)>::new())),
            Err(Error::DuplicateId { .. })
        ));
        assert!(g
            .add_edge(Edge::new(
                "bob",
                ["X"],
                "bob",
                "org",
                Vec::<(String, String)>::new()
            ))
            .is_err());
        assert!(g
            .add_edge(Edge::new(
                "e",
                ["X"],
                "bob",
                "ghost",
                Vec::<(String, String)>::new()
            ))
            .is_err());
    }

    #[test]
    fn datatype_lattice_joins() {
        use Datatype::*;
        assert_eq!(Integer.join(Float), Float);
        assert_eq!(Integer.join(String), String);
        assert_eq!(Date.join(Datetime), Datetime);
        assert_eq!(Boolean.join(Integer), String);
        assert_eq!(Date.join(Float), String);
        for a in Datatype::ALL {
            assert_eq!(a.join(a), a);
            assert!(a.is_subtype_of(String));
            for b in Datatype::ALL {
                assert_eq!(a.join(b), b.join(a));
                assert!(a.is_subtype_of(a.join(b)));
            }
        }
    }

    #[test]
    fn cardinality_classes() {
        assert_eq!(Cardinality::classify(1, 1), Cardinality::ZeroOne);
        assert_eq!(Cardinality::classify(1, 2), Cardinality::NToOne);
        assert_eq!(Cardinality::classify(3, 1), Cardinality::OneToN);
        assert_eq!(Cardinality::classify(2, 2), Cardinality::MToN);
        assert_eq!(Cardinality::classify(0, 0), Cardinality::Unset);
        for c in [
            Cardinality::ZeroOne,
            Cardinality::NToOne,
            Cardinality::OneToN,
            Cardinality::MToN,
        ] {
            assert_eq!(Cardinality::from_notation(c.notation().unwrap()), Some(c));
        }
    }
}
