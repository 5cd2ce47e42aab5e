//! Hybrid element vectors: a label embedding followed by binary
//! property-presence indicators.
//!
//! Nodes become `emb(labels) ‖ bits(K)` (length `d + |K|`); edges become
//! `emb(labels) ‖ emb(src labels) ‖ emb(tgt labels) ‖ bits(Q)` (length
//! `3d + |Q|`). Label embeddings are seeded random points on the unit
//! sphere: equal label keys get equal vectors, distinct keys land far apart
//! with overwhelming probability, and the unlabeled key maps to zero.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::hash_str;
use crate::model::{canonical_label_key, Edge, ElementKind, EndpointLookup, Node};

pub const DEFAULT_EMBEDDING_DIM: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    dim: usize,
    seed: u64,
    map: BTreeMap<String, Vec<f64>>,
}

fn embed_key(key: &str, dim: usize, seed: u64) -> Vec<f64> {
    if key.is_empty() {
        return vec![0.0; dim];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ hash_str(key));
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.map.get(key).map(Vec::as_slice)
    }

    /// Adds vectors for keys not yet in the table. Existing entries never
    /// change, since each vector depends only on its key and the seed.
    pub fn extend<'a, I: IntoIterator<Item = &'a str>>(&mut self, keys: I) {
        for key in keys {
            if !self.map.contains_key(key) {
                self.map
                    .insert(key.to_string(), embed_key(key, self.dim, self.seed));
            }
        }
    }

    /// Vector for a label key, computing it on the fly when absent.
    pub fn vector(&self, key: &str) -> Cow<'_, [f64]> {
        match self.map.get(key) {
            Some(v) => Cow::Borrowed(v.as_slice()),
            None => Cow::Owned(embed_key(key, self.dim, self.seed)),
        }
    }
}

pub fn build_embedding_table<'a, I>(label_keys: I, dim: usize, seed: u64) -> Result<EmbeddingTable>
where
    I: IntoIterator<Item = &'a str>,
{
    if dim < 2 {
        return Err(Error::InvalidConfig(format!(
            "embedding dimension must be at least 2, got {dim}"
        )));
    }
    let mut table = EmbeddingTable {
        dim,
        seed,
        map: BTreeMap::new(),
    };
    table.extend(label_keys);
    Ok(table)
}

/// Global, append-only ordering of property keys for one element kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyIndex {
    role: ElementKind,
    keys: Vec<String>,
    positions: HashMap<String, usize>,
}

impl PropertyIndex {
    pub fn new(role: ElementKind) -> Self {
        PropertyIndex {
            role,
            keys: Vec::new(),
            positions: HashMap::new(),
        }
    }

    pub fn with_keys<I, S>(role: ElementKind, keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut idx = Self::new(role);
        idx.extend(keys);
        idx
    }

    pub fn role(&self) -> ElementKind {
        self.role
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn position(&self, key: &str) -> Option<usize> {
        self.positions.get(key).copied()
    }

    /// Appends unseen keys in the order given.
    pub fn extend<I, S>(&mut self, keys: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for key in keys {
            let key = key.as_ref();
            if !self.positions.contains_key(key) {
                self.positions.insert(key.to_string(), self.keys.len());
                self.keys.push(key.to_string());
            }
        }
    }

    fn bits<'a, I: IntoIterator<Item = &'a String>>(&self, present: I) -> Result<Vec<f64>> {
        let mut bits = vec![0.0; self.keys.len()];
        for key in present {
            let pos = self.position(key).ok_or_else(|| Error::UnindexedProperty {
                key: key.clone(),
                role: self.role.as_str(),
            })?;
            bits[pos] = 1.0;
        }
        Ok(bits)
    }

    fn expect_role(&self, role: ElementKind) -> Result<()> {
        if self.role != role {
            return Err(Error::InvalidConfig(format!(
                "a {} property index cannot featurize {}s",
                self.role.as_str(),
                role.as_str()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub owner: String,
    pub kind: ElementKind,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn node_vector(
    node: &Node,
    idx: &PropertyIndex,
    emb: &EmbeddingTable,
) -> Result<FeatureVector> {
    idx.expect_role(ElementKind::Node)?;
    let mut values = Vec::with_capacity(emb.dim() + idx.len());
    values.extend_from_slice(&emb.vector(&canonical_label_key(&node.labels)));
    values.extend(idx.bits(node.properties.keys())?);
    Ok(FeatureVector {
        owner: node.id.clone(),
        kind: ElementKind::Node,
        values,
    })
}

pub fn edge_vector(
    edge: &Edge,
    graph: &(impl EndpointLookup + ?Sized),
    idx: &PropertyIndex,
    emb: &EmbeddingTable,
) -> Result<FeatureVector> {
    idx.expect_role(ElementKind::Edge)?;
    let endpoint = |id: &String| {
        graph
            .endpoint_labels(id)
            .map(canonical_label_key)
            .ok_or_else(|| Error::DanglingEndpoint {
                edge: edge.id.clone(),
                node: id.clone(),
            })
    };
    let src_key = endpoint(&edge.src)?;
    let tgt_key = endpoint(&edge.tgt)?;
    let mut values = Vec::with_capacity(3 * emb.dim() + idx.len());
    values.extend_from_slice(&emb.vector(&canonical_label_key(&edge.labels)));
    values.extend_from_slice(&emb.vector(&src_key));
    values.extend_from_slice(&emb.vector(&tgt_key));
    values.extend(idx.bits(edge.properties.keys())?);
    Ok(FeatureVector {
        owner: edge.id.clone(),
        kind: ElementKind::Edge,
        values,
    })
}

/// Vectorizes nodes in parallel; output order follows input order.
pub fn node_vectors(
    nodes: &[Node],
    idx: &PropertyIndex,
    emb: &EmbeddingTable,
) -> Result<Vec<FeatureVector>> {
    nodes.par_iter().map(|n| node_vector(n, idx, emb)).collect()
}

pub fn edge_vectors<G>(
    edges: &[Edge],
    graph: &G,
    idx: &PropertyIndex,
    emb: &EmbeddingTable,
) -> Result<Vec<FeatureVector>>
where
    G: EndpointLookup + Sync + ?Sized,
{
    edges
        .par_iter()
        .map(|e| edge_vector(e, graph, idx, emb))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PropertyGraph;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn embeddings_are_unit_and_deterministic() {
        let t1 = build_embedding_table(["Person", "Org."], 5, 42).unwrap();
        let t2 = build_embedding_table(["Org.", "Person"], 5, 42).unwrap();
        assert_eq!(t1, t2);
        let p = t1.get("Person").unwrap();
        let o = t1.get("Org.").unwrap();
        assert!((norm(p) - 1.0).abs() < 1e-9);
        assert!((norm(o) - 1.0).abs() < 1e-9);
        let cosine: f64 = p.iter().zip(o).map(|(a, b)| a * b).sum();
        assert!(cosine < 1.0 - 1e-6, "cosine {cosine}");
        assert_eq!(&*t1.vector(""), &[0.0; 5]);
        assert_ne!(
            build_embedding_table(["Person"], 5, 43)
                .unwrap()
                .get("Person"),
            Some(p)
        );
        assert!(build_embedding_table(["x"], 1, 0).is_err());
    }

    fn paper_node_index() -> PropertyIndex {
        PropertyIndex::with_keys(
            ElementKind::Node,
            ["imgFile", "content", "name", "url", "bday", "gender"],
        )
    }

    #[test]
    fn node_vector_layout() {
        let emb = build_embedding_table(["Person"], 5, 1).unwrap();
        let idx = paper_node_index();
        let bob = Node::new(
            "bob",
            ["Person"],
            [("name", "Bob"), ("gender", "m"), ("bday", "x")],
        );
        let v = node_vector(&bob, &idx, &emb).unwrap();
        assert_eq!(v.len(), 5 + 6);
        assert_eq!(&v.values[..5], emb.get("Person").unwrap());
        assert_eq!(&v.values[5..], &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0]);

        let alice = Node::new(
            "alice",
            Vec::<String>::new(),
            [("name", "A"), ("gender", "f"), ("bday", "y")],
        );
        let v = node_vector(&alice, &idx, &emb).unwrap();
        assert_eq!(&v.values[..5], &[0.0; 5]);
        assert_eq!(&v.values[5..], &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0]);

        let bare = Node::new("z", ["Person"], Vec::<(String, String)>::new());
        assert!(node_vector(&bare, &idx, &emb).unwrap().values[5..]
            .iter()
            .all(|x| *x == 0.0));

        let stray = Node::new("s", ["Person"], [("unknown", "1")]);
        assert!(matches!(
            node_vector(&stray, &idx, &emb),
            Err(Error::UnindexedProperty { .. })
        ));
        let edge_idx = PropertyIndex::new(ElementKind::Edge);
        assert!(node_vector(&bob, &edge_idx, &emb).is_err());
    }

    fn small_graph() -> PropertyGraph {
        let mut g = PropertyGraph::new();
        g.add_node(Node::new("bob", ["Person"], [("name", "Bob")]))
            .unwrap();
        g.add_node(Node::new(
            "alice",
            Vec::<String>::new(),
            [("name", "Alice")],
        ))
        .unwrap();
        g.add_node(Node::new("org", ["Org."], [("name", "Example")]))
            .unwrap();
        g.add_node(Node::new(
            "u",
            Vec::<String>::new(),
            Vec::<(String, String)>::new(),
        ))
        .unwrap();
        g
    }

    #[test]
    fn edge_vector_layout() {
        let g = small_graph();
        let emb = build_embedding_table(["Person", "Org.", "WORKS_AT", "KNOWS"], 5, 9).unwrap();
        let idx = PropertyIndex::with_keys(ElementKind::Edge, ["since", "from"]);
        let works = Edge::new("w", ["WORKS_AT"], "bob", "org", [("from", "2000")]);
        let v = edge_vector(&works, &g, &idx, &emb).unwrap();
        assert_eq!(v.len(), 3 * 5 + 2);
        assert_eq!(&v.values[..5], emb.get("WORKS_AT").unwrap());
        assert_eq!(&v.values[5..10], emb.get("Person").unwrap());
        assert_eq!(&v.values[10..15], emb.get("Org.").unwrap());
        assert_eq!(&v.values[15..], &[0.0, 1.0]);

        let knows = Edge::new("k", ["KNOWS"], "alice", "bob", [("since", "2025")]);
        let v = edge_vector(&knows, &g, &idx, &emb).unwrap();
        assert_eq!(&v.values[5..10], &[0.0; 5]);
        assert_eq!(&v.values[10..15], emb.get("Person").unwrap());

        let bare = Edge::new(
            "b",
            Vec::<String>::new(),
            "u",
            "alice",
            Vec::<(String, String)>::new(),
        );
        assert!(edge_vector(&bare, &g, &idx, &emb)
            .unwrap()
            .values
            .iter()
            .all(|x| *x == 0.0));

        let dangling = Edge::new(
            "d",
            ["KNOWS"],
            "bob",
            "ghost",
            Vec::<(String, String)>::new(),
        );
        assert!(matches!(
            edge_vector(&dangling, &g, &idx, &emb),
            Err(Error::DanglingEndpoint { .. })
        ));
    }

    #[test]
    fn property_index_is_append_only() {
        let mut idx = PropertyIndex::with_keys(ElementKind::Node, ["b", "a"]);
        idx.extend(["c", "a", "d"]);
        assert_eq!(idx.keys(), &["b", "a", "c", "d"]);
        assert_eq!(idx.position("a"), Some(1));
    }
}
