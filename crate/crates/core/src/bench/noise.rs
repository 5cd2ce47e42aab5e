use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::derive_seed;
use crate::model::{ElementKind, PropertyGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NoiseProfile {
    /// Fraction of all property instances to remove.
    pub property_drop_pct: f64,
    /// Fraction of nodes (and, separately, edges) that keep their labels.
    pub label_availability: f64,
    pub seed: u64,
}

impl NoiseProfile {
    pub fn clean(seed: u64) -> Self {
        NoiseProfile {
            property_drop_pct: 0.0,
            label_availability: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("property drop fraction", self.property_drop_pct),
            ("label availability", self.label_availability),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// True type of every element: its label key before any noise.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub nodes: BTreeMap<String, String>,
    pub edges: BTreeMap<String, String>,
}

impl GroundTruth {
    pub fn of(graph: &PropertyGraph) -> Self {
        GroundTruth {
            nodes: graph
                .nodes()
                .map(|n| (n.id.clone(), n.label_key()))
                .collect(),
            edges: graph
                .edges()
                .map(|e| (e.id.clone(), e.label_key()))
                .collect(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["element_id", "kind", "type"])?;
        for (kind, map) in [
            (ElementKind::Node, &self.nodes),
            (ElementKind::Edge, &self.edges),
        ] {
            for (id, ty) in map {
                w.write_record([id.as_str(), kind.as_str(), ty.as_str()])?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf-8 in, utf-8 out"))
    }

    /// Reads `element_id,kind,type` rows (the format of `assignment.csv`).
    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut gt = GroundTruth::default();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |message: String| Error::Parse {
                path: origin.to_string(),
                line: i + 2,
                message,
            };
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let map = match &rec[1] {
                "node" => &mut gt.nodes,
                "edge" => &mut gt.edges,
                other => return Err(bad(format!("unknown element kind `{other}`"))),
            };
            map.insert(rec[0].to_string(), rec[2].to_string());
        }
        Ok(gt)
    }
}

fn exact_count(fraction: f64, total: usize) -> usize {
    // guards against 0.4 * 1000 landing on 399.999...
    ((fraction * total as f64) + 1e-9).floor() as usize
}

/// Removes exactly `floor(pct · total)` property instances and clears labels
/// on exactly `floor((1 - avail) · count)` nodes and, independently, edges.
/// Ids, element counts and endpoints are untouched.
pub fn inject_noise(
    graph: &PropertyGraph,
    profile: &NoiseProfile,
) -> Result<(PropertyGraph, GroundTruth)> {
    profile.validate()?;
    let truth = GroundTruth::of(graph);
    let mut g = graph.clone();

    let mut slots: Vec<(ElementKind, usize, String)> = Vec::new();
    for (i, n) in g.nodes().enumerate() {
        slots.extend(
            n.properties
                .keys()
                .map(|k| (ElementKind::Node, i, k.clone())),
        );
    }
    for (i, e) in g.edges().enumerate() {
        slots.extend(
            e.properties
                .keys()
                .map(|k| (ElementKind::Edge, i, k.clone())),
        );
    }
    let drop = exact_count(profile.property_drop_pct, slots.len());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(profile.seed, "noise-properties"));
    let picked = index::sample(&mut rng, slots.len(), drop);

    let node_clear = exact_count(1.0 - profile.label_availability, g.node_count());
    let edge_clear = exact_count(1.0 - profile.label_availability, g.edge_count());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(profile.seed, "noise-node-labels"));
    let nodes_cleared = index::sample(&mut rng, g.node_count(), node_clear);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(profile.seed, "noise-edge-labels"));
    let edges_cleared = index::sample(&mut rng, g.edge_count(), edge_clear);

    {
        let mut nodes: Vec<_> = g.nodes_mut().collect();
        for i in picked.iter() {
            let (kind, el, key) = &slots[i];
            if *kind == ElementKind::Node {
                nodes[*el].properties.remove(key);
            }
        }
        for i in nodes_cleared.iter() {
            nodes[i].labels.clear();
        }
    }
    {
        let mut edges: Vec<_> = g.edges_mut().collect();
        for i in picked.iter() {
            let (kind, el, key) = &slots[i];
            if *kind == ElementKind::Edge {
                edges[*el].properties.remove(key);
            }
        }
        for i in edges_cleared.iter() {
            edges[i].labels.clear();
        }
    }
    Ok((g, truth))
}
