//! Seeded synthetic graphs with known types.

use std::collections::BTreeMap;

use rand::distr::Alphanumeric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::derive_seed;
use crate::model::{canonical_label_key, Datatype, Edge, Node, PropertyGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyGen {
    pub key: String,
    pub datatype: Datatype,
    /// Probability that a value is replaced by a non-conforming string.
    #[serde(default)]
    pub outlier_rate: f64,
}

impl PropertyGen {
    pub fn new(key: &str, datatype: Datatype) -> Self {
        PropertyGen {
            key: key.to_string(),
            datatype,
            outlier_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub labels: Vec<String>,
    pub properties: Vec<PropertyGen>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub labels: Vec<String>,
    pub properties: Vec<PropertyGen>,
    /// Label key of the source node spec.
    pub source: String,
    pub target: String,
    pub count: usize,
    /// Edge `i` leaves source node `i / fanout` and enters target `i mod |targets|`.
    pub fanout: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl SyntheticSpec {
    pub fn node_count(&self) -> usize {
        self.nodes.iter().map(|n| n.count).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(|e| e.count).sum()
    }
}

fn value(rng: &mut ChaCha8Rng, p: &PropertyGen) -> String {
    if p.outlier_rate > 0.0 && rng.random_bool(p.outlier_rate.min(1.0)) {
        return format!("n/a-{}", rng.random_range(0..1000));
    }
    match p.datatype {
        Datatype::Integer => rng.random_range(-1000i64..100_000).to_string(),
        // the fraction is never zero, so values never read as integers
        Datatype::Float => format!(
            "{}.{:03}",
            rng.random_range(-500i64..5000),
            rng.random_range(125..=875)
        ),
        Datatype::Boolean => (if rng.random_bool(0.5) {
            "true"
        } else {
            "false"
        })
        .to_string(),
        Datatype::Date => format!(
            "{:04}-{:02}-{:02}",
            rng.random_range(1950..2030),
            rng.random_range(1..=12),
            rng.random_range(1..=28)
        ),
        Datatype::Datetime => format!(
            "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}",
            rng.random_range(1990..2030),
            rng.random_range(1..=12),
            rng.random_range(1..=28),
            rng.random_range(0..24),
            rng.random_range(0..60),
            rng.random_range(0..60)
        ),
        Datatype::String => {
            let len = rng.random_range(4..12);
            let s: String = rng
                .sample_iter(Alphanumeric)
                .take(len)
                .map(char::from)
                .collect();
            format!("s_{s}")
        }
    }
}

/// Builds the graph described by `spec`. Element ids embed the seed.
pub fn gen_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<PropertyGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "synthetic"));
    let mut g = PropertyGraph::new();
    let mut ids: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (t, ns) in spec.nodes.iter().enumerate() {
        let key = canonical_label_key(ns.labels.iter());
        if ids.contains_key(&key) {
            return Err(Error::InvalidConfig(format!(
                "node spec `{key}` appears twice"
            )));
        }
        let mut list = Vec::with_capacity(ns.count);
        for i in 0..ns.count {
            let id = format!("n{seed:x}-{t}-{i}");
            let props: Vec<(String, String)> = ns
                .properties
                .iter()
                .map(|p| (p.key.clone(), value(&mut rng, p)))
                .collect();
            g.add_node(Node::new(id.clone(), ns.labels.iter().cloned(), props))?;
            list.push(id);
        }
        ids.insert(key, list);
    }
    for (t, es) in spec.edges.iter().enumerate() {
        let lookup = |k: &str| {
            ids.get(k).filter(|v| !v.is_empty()).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "edge spec refers to missing or empty node spec `{k}`"
                ))
            })
        };
        let (srcs, tgts) = (lookup(&es.source)?, lookup(&es.target)?);
        if es.fanout == 0 || es.count > es.fanout * srcs.len() {
            return Err(Error::InvalidConfig(format!(
                "{} edges do not fit fanout {} over {} sources",
                es.count,
                es.fanout,
                srcs.len()
            )));
        }
        for i in 0..es.count {
            let props: Vec<(String, String)> = es
                .properties
                .iter()
                .map(|p| (p.key.clone(), value(&mut rng, p)))
                .collect();
            g.add_edge(Edge::new(
                format!("e{seed:x}-{t}-{i}"),
                es.labels.iter().cloned(),
                srcs[i / es.fanout].clone(),
                tgts[i % tgts.len()].clone(),
                props,
            ))?;
        }
    }
    Ok(g)
}

/// The running example: a small social graph with one unlabeled person.
pub fn social_example() -> PropertyGraph {
    let none: Vec<String> = Vec::new();
    let empty: Vec<(&str, &str)> = Vec::new();
    let mut g = PropertyGraph::new();
    for n in [
        Node::new(
            "bob",
            ["Person"],
            [("name", "Bob"), ("gender", "male"), ("bday", "2/5/1980")],
        ),
        Node::new(
            "alice",
            none,
            [
                ("name", "Alice"),
                ("gender", "female"),
                ("bday", "19/12/1999"),
            ],
        ),
        Node::new(
            "john",
            ["Person"],
            [("name", "John"), ("gender", "male"), ("bday", "24/9/2005")],
        ),
        Node::new("post1", ["Post"], [("imgFile", "screenshot.png")]),
        Node::new("post2", ["Post"], [("content", "bazinga!")]),
        Node::new(
            "org",
            ["Org."],
            [("name", "Example"), ("url", "example.com")],
        ),
        Node::new("place", ["Place"], [("name", "Greece")]),
    ] {
        g.add_node(n).expect("fixed ids are distinct");
    }
    for e in [
        Edge::new("k1", ["KNOWS"], "alice", "john", empty.clone()),
        Edge::new("k2", ["KNOWS"], "alice", "bob", [("since", "2025")]),
        Edge::new("l1", ["LIKES"], "bob", "post1", empty.clone()),
        Edge::new("l2", ["LIKES"], "john", "post2", empty.clone()),
        Edge::new("w1", ["WORKS_AT"], "bob", "org", [("from", "2000")]),
        Edge::new("li1", ["LOCATED_IN"], "org", "place", empty.clone()),
        Edge::new("li2", ["LOCATED_IN"], "john", "place", [("from", "2025")]),
    ] {
        g.add_edge(e).expect("fixed endpoints exist");
    }
    g
}

fn props(list: &[(&str, Datatype)]) -> Vec<PropertyGen> {
    list.iter().map(|(k, d)| PropertyGen::new(k, *d)).collect()
}

/// Eight node types whose key sets overlap in at most one key and twelve
/// edge types, scaled to roughly `nodes` nodes and `edges` edges.
pub fn desk_spec(nodes: usize, edges: usize) -> SyntheticSpec {
    use Datatype::*;
    let node_types: [(&str, Vec<PropertyGen>); 8] = [
        (
            "Person",
            props(&[
                ("name", String),
                ("age", Integer),
                ("email", String),
                ("birthday", Date),
                ("score", Float),
            ]),
        ),
        (
            "Organization",
            props(&[
                ("name", String),
                ("url", String),
                ("founded", Date),
                ("employees", Integer),
                ("rating", Float),
            ]),
        ),
        (
            "Post",
            props(&[
                ("content", String),
                ("created", Datetime),
                ("likes", Integer),
                ("lang", String),
                ("pinned", Boolean),
            ]),
        ),
        (
            "Place",
            props(&[
                ("title", String),
                ("lat", Float),
                ("lon", Float),
                ("population", Integer),
                ("code", String),
            ]),
        ),
        (
            "Tag",
            props(&[
                ("tag", String),
                ("weight", Float),
                ("official", Boolean),
                ("since", Date),
            ]),
        ),
        (
            "Product",
            props(&[
                ("sku", String),
                ("price", Float),
                ("stock", Integer),
                ("released", Date),
                ("brand", String),
            ]),
        ),
        (
            "Event",
            props(&[
                ("headline", String),
                ("starts", Datetime),
                ("ends", Datetime),
                ("capacity", Integer),
                ("online", Boolean),
            ]),
        ),
        (
            "Account",
            props(&[
                ("handle", String),
                ("verified", Boolean),
                ("followers", Integer),
                ("joined", Datetime),
                ("balance", Float),
            ]),
        ),
    ];
    let per_node = (nodes / node_types.len()).max(1);
    let spec_nodes: Vec<NodeSpec> = node_types
        .into_iter()
        .map(|(l, p)| NodeSpec {
            labels: vec![l.to_string()],
            properties: p,
            count: per_node,
        })
        .collect();
    let edge_types: [(&str, &str, &str, Vec<PropertyGen>); 12] = [
        ("KNOWS", "Person", "Person", props(&[("since", Date)])),
        (
            "WORKS_AT",
            "Person",
            "Organization",
            props(&[("from", Integer), ("role", String)]),
        ),
        ("LIKES", "Person", "Post", vec![]),
        ("HAS_TAG", "Post", "Tag", vec![]),
        ("LOCATED_IN", "Organization", "Place", vec![]),
        ("LIVES_IN", "Person", "Place", props(&[("moved", Date)])),
        (
            "BOUGHT",
            "Account",
            "Product",
            props(&[("qty", Integer), ("at", Datetime)]),
        ),
        ("ATTENDS", "Person", "Event", props(&[("ticket", String)])),
        ("OWNS", "Person", "Account", vec![]),
        ("POSTED", "Account", "Post", props(&[("at", Datetime)])),
        ("HOSTS", "Organization", "Event", vec![]),
        (
            "SELLS",
            "Organization",
            "Product",
            props(&[("discount", Float)]),
        ),
    ];
    let per_edge = (edges / edge_types.len()).max(1);
    let spec_edges = edge_types
        .into_iter()
        .map(|(l, s, t, p)| EdgeSpec {
            labels: vec![l.to_string()],
            properties: p,
            source: s.to_string(),
            target: t.to_string(),
            count: per_edge,
            fanout: per_edge.div_ceil(per_node),
        })
        .collect();
    SyntheticSpec {
        nodes: spec_nodes,
        edges: spec_edges,
    }
}

/// Fifty properties over five node types: forty-five homogeneous and five
/// integer properties with 3% string outliers (`Metric*.noisy*`).
pub fn datatype_spec(per_type: usize) -> SyntheticSpec {
    let kinds = [
        Datatype::Integer,
        Datatype::Float,
        Datatype::Boolean,
        Datatype::Date,
        Datatype::Datetime,
        Datatype::String,
    ];
    let nodes = (0..5)
        .map(|t| {
            let mut properties: Vec<PropertyGen> = (0..9)
                .map(|k| PropertyGen::new(&format!("p{t}_{k}"), kinds[(t + k) % kinds.len()]))
                .collect();
            properties.push(PropertyGen {
                key: format!("noisy{t}"),
                datatype: Datatype::Integer,
                outlier_rate: 0.03,
            });
            NodeSpec {
                labels: vec![format!("Metric{t}")],
                properties,
                count: per_type,
            }
        })
        .collect();
    SyntheticSpec {
        nodes,
        edges: vec![],
    }
}
