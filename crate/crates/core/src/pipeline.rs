//! End-to-end discovery: featurize, cluster, extract, post-process.
//!
//! [`Discoverer`] consumes batches and keeps everything needed to continue:
//! the evolving schema with its instance assignment, the node label registry
//! used to resolve edge endpoints across batches, the append-only property
//! indexes, and the statistics used by post-processing.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::AddAssign;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::constraints::{postprocess, InstanceStats};
use crate::dataio::Batch;
use crate::error::{Error, Result};
use crate::featurize::{
    build_embedding_table, edge_vectors, node_vectors, EmbeddingTable, FeatureVector,
    PropertyIndex, DEFAULT_EMBEDDING_DIM,
};
use crate::lsh::{
    edge_tokens, elsh_cluster, estimate_params, minhash_cluster, node_tokens, AdaptiveEstimate,
    Clustering, CollisionRule, LshMethod, LshParams,
};
use crate::model::{
    canonical_label_key, Edge, ElementKind, LabelSet, Node, PropertyGraph, SchemaGraph,
};
use crate::schema::{
    edge_representative, extract_types, node_representative, CandidateType, DEFAULT_THETA,
};

pub const DEFAULT_BUCKET_LENGTH: f64 = 1.0;
pub const DEFAULT_TABLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct DiscoveryConfig {
    pub method: LshMethod,
    pub theta: f64,
    pub dim: usize,
    pub seed: u64,
    pub adaptive: bool,
    /// Overrides the adaptive (or default) bucket length.
    pub bucket_length: Option<f64>,
    /// Overrides the adaptive (or default) table count.
    pub tables: Option<usize>,
    /// Overrides the label-count multiplier of the adaptive bucket length.
    pub alpha: Option<f64>,
    pub collision_rule: CollisionRule,
    pub postprocess: bool,
    pub sample_datatypes: bool,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            method: LshMethod::Elsh,
            theta: DEFAULT_THETA,
            dim: DEFAULT_EMBEDDING_DIM,
            seed: 42,
            adaptive: true,
            bucket_length: None,
            tables: None,
            alpha: None,
            collision_rule: CollisionRule::All,
            postprocess: false,
            sample_datatypes: false,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidConfig(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        if self.dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "embedding dimension must be at least 2, got {}",
                self.dim
            )));
        }
        if let Some(b) = self.bucket_length {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "bucket length must be positive, got {b}"
                )));
            }
        }
        if self.tables == Some(0) {
            return Err(Error::InvalidConfig(
                "number of hash tables must be at least 1".into(),
            ));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "alpha must be positive, got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub load: f64,
    pub featurize: f64,
    pub cluster: f64,
    pub extract: f64,
    pub postprocess: f64,
    pub serialize: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.load + self.featurize + self.cluster + self.extract + self.postprocess + self.serialize
    }
}

impl AddAssign for StageTimings {
    fn add_assign(&mut self, o: StageTimings) {
        self.load += o.load;
        self.featurize += o.featurize;
        self.cluster += o.cluster;
        self.extract += o.extract;
        self.postprocess += o.postprocess;
        self.serialize += o.serialize;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub params: LshParams,
    pub estimate: Option<AdaptiveEstimate>,
    pub elements: usize,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub index: usize,
    pub nodes: usize,
    pub edges: usize,
    /// Edges held back because an endpoint has not been seen yet.
    pub deferred_edges: usize,
    pub node_clustering: Option<ClusteringReport>,
    pub edge_clustering: Option<ClusteringReport>,
    pub node_types: usize,
    pub edge_types: usize,
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub schema: SchemaGraph,
    pub stats: InstanceStats,
    pub timings: StageTimings,
    pub batches: Vec<BatchReport>,
    pub dropped_edges: Vec<String>,
}

fn distinct_labels<'a>(labels: impl Iterator<Item = &'a LabelSet>) -> usize {
    labels.flatten().collect::<BTreeSet<_>>().len()
}

/// Splits every cluster into label-key-homogeneous parts (unlabeled members
/// form one part), so a candidate never carries the union of unrelated label
/// sets. Parts keep member order and are emitted in label-key order.
fn split_by_label_key<F>(clusters: &[Vec<String>], key_of: F) -> Vec<Vec<&str>>
where
    F: Fn(&str) -> String,
{
    let mut out = Vec::with_capacity(clusters.len());
    for c in clusters {
        let mut parts: BTreeMap<String, Vec<&str>> = BTreeMap::new();
        for id in c {
            parts.entry(key_of(id)).or_default().push(id.as_str());
        }
        out.extend(parts.into_values());
    }
    out
}

pub struct Discoverer {
    config: DiscoveryConfig,
    schema: SchemaGraph,
    stats: InstanceStats,
    labels: HashMap<String, LabelSet>,
    edge_ids: HashSet<String>,
    node_index: PropertyIndex,
    edge_index: PropertyIndex,
    embeddings: EmbeddingTable,
    pending: Vec<Edge>,
    timings: StageTimings,
    reports: Vec<BatchReport>,
}

impl Discoverer {
    pub fn new(config: DiscoveryConfig) -> Result<Self> {
        config.validate()?;
        let embeddings = build_embedding_table(std::iter::empty(), config.dim, config.seed)?;
        Ok(Discoverer {
            stats: InstanceStats::new(config.sample_datatypes),
            config,
            schema: SchemaGraph::new(),
            labels: HashMap::new(),
            edge_ids: HashSet::new(),
            node_index: PropertyIndex::new(ElementKind::Node),
            edge_index: PropertyIndex::new(ElementKind::Edge),
            embeddings,
            pending: Vec::new(),
            timings: StageTimings::default(),
            reports: Vec::new(),
        })
    }

    pub fn config(&self) -> &DiscoveryConfig {
        &self.config
    }

    pub fn schema(&self) -> &SchemaGraph {
        &self.schema
    }

    pub fn stats(&self) -> &InstanceStats {
        &self.stats
    }

    pub fn timings(&self) -> StageTimings {
        self.timings
    }

    pub fn add_load_time(&mut self, seconds: f64) {
        self.timings.load += seconds;
    }

    pub fn pending_edges(&self) -> usize {
        self.pending.len()
    }

    fn resolve_params(
        &self,
        vectors: &[FeatureVector],
        kind: ElementKind,
        labels: usize,
    ) -> (LshParams, Option<AdaptiveEstimate>) {
        let c = &self.config;
        let seed = c.seed;
        let estimate = if c.adaptive && (c.bucket_length.is_none() || c.tables.is_none()) {
            match estimate_params(vectors, vectors.len(), labels, kind, c.method, seed) {
                Ok(e) => Some(e),
                Err(e) => {
                    debug!(
                        "adaptive estimation skipped for {} batch: {e}",
                        kind.as_str()
                    );
                    None
                }
            }
        } else {
            None
        };
        let (mut b, mut t) = match &estimate {
            Some(e) => {
                let b = match c.alpha {
                    Some(a) if e.b_base > 0.0 => e.b_base * a,
                    _ => e.resolved.bucket_length,
                };
                (b, e.resolved.num_tables)
            }
            None if c.adaptive => (1.0, 1),
            None => (DEFAULT_BUCKET_LENGTH, DEFAULT_TABLES),
        };
        if let Some(ob) = c.bucket_length {
            b = ob;
        }
        if let Some(ot) = c.tables {
            t = ot;
        }
        (
            LshParams::new(c.method, b, t, seed).with_rule(c.collision_rule),
            estimate,
        )
    }

    fn cluster(
        &self,
        vectors: &[FeatureVector],
        tokens: impl FnOnce() -> Result<Vec<(String, crate::lsh::TokenSet)>>,
        kind: ElementKind,
        labels: usize,
    ) -> Result<(Clustering, ClusteringReport)> {
        let (params, estimate) = self.resolve_params(vectors, kind, labels);
        let clustering = match params.method {
            LshMethod::Elsh => elsh_cluster(vectors, &params)?,
            LshMethod::Minhash => minhash_cluster(&tokens()?, kind, &params)?,
        };
        let report = ClusteringReport {
            params,
            estimate,
            elements: vectors.len(),
            clusters: clustering.len(),
        };
        Ok((clustering, report))
    }

    /// Clusters one batch and folds its types into the schema. Edges whose
    /// endpoints are still unknown wait for a later batch.
    pub fn process_batch(&mut self, batch: Batch) -> Result<BatchReport> {
        let Batch {
            index,
            nodes,
            edges,
        } = batch;
        let mut seen_here = HashSet::new();
        for n in &nodes {
            if self.labels.contains_key(&n.id) || !seen_here.insert(n.id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "node",
                    id: n.id.clone(),
                });
            }
        }
        for e in &edges {
            if self.labels.contains_key(&e.id)
                || seen_here.contains(e.id.as_str())
                || !self.edge_ids.insert(e.id.clone())
            {
                return Err(Error::DuplicateId {
                    kind: "edge",
                    id: e.id.clone(),
                });
            }
        }
        for n in &nodes {
            self.labels.insert(n.id.clone(), n.labels.clone());
        }
        let mut ready = Vec::new();
        let mut still_pending = Vec::new();
        for e in std::mem::take(&mut self.pending).into_iter().chain(edges) {
            if self.labels.contains_key(&e.src) && self.labels.contains_key(&e.tgt) {
                ready.push(e);
            } else {
                still_pending.push(e);
            }
        }
        self.pending = still_pending;
        self.run(index, nodes, ready)
    }

    fn run(&mut self, index: usize, nodes: Vec<Node>, edges: Vec<Edge>) -> Result<BatchReport> {
        let t0 = Instant::now();
        for n in &nodes {
            self.node_index.extend(n.properties.keys());
        }
        for e in &edges {
            self.edge_index.extend(e.properties.keys());
        }
        let mut keys: BTreeSet<String> = nodes.iter().map(Node::label_key).collect();
        keys.extend(edges.iter().map(Edge::label_key));
        keys.extend(
            edges
                .iter()
                .flat_map(|e| [&e.src, &e.tgt])
                .map(|id| canonical_label_key(&self.labels[id])),
        );
        self.embeddings.extend(keys.iter().map(String::as_str));
        let nvecs = node_vectors(&nodes, &self.node_index, &self.embeddings)?;
        let evecs = edge_vectors(&edges, &self.labels, &self.edge_index, &self.embeddings)?;
        let t1 = Instant::now();

        let mut node_report = None;
        let mut edge_report = None;
        let mut node_cands = Vec::new();
        let mut edge_cands = Vec::new();
        if !nodes.is_empty() {
            let (clustering, report) = self.cluster(
                &nvecs,
                || {
                    Ok(nodes
                        .iter()
                        .map(|n| (n.id.clone(), node_tokens(n)))
                        .collect())
                },
                ElementKind::Node,
                distinct_labels(nodes.iter().map(|n| &n.labels)),
            )?;
            let by_id: HashMap<&str, &Node> = nodes.iter().map(|n| (n.id.as_str(), n)).collect();
            node_cands = split_by_label_key(&clustering.clusters, |id| by_id[id].label_key())
                .into_iter()
                .map(|c| node_representative(c.into_iter().map(|id| by_id[id])))
                .collect::<Result<Vec<CandidateType>>>()?;
            node_report = Some(report);
        }
        if !edges.is_empty() {
            let labels = &self.labels;
            let (clustering, report) = self.cluster(
                &evecs,
                || {
                    edges
                        .iter()
                        .map(|e| Ok((e.id.clone(), edge_tokens(e, labels)?)))
                        .collect()
                },
                ElementKind::Edge,
                distinct_labels(edges.iter().map(|e| &e.labels)),
            )?;
            let by_id: HashMap<&str, &Edge> = edges.iter().map(|e| (e.id.as_str(), e)).collect();
            edge_cands = split_by_label_key(&clustering.clusters, |id| by_id[id].label_key())
                .into_iter()
                .map(|c| edge_representative(c.into_iter().map(|id| by_id[id]), &self.labels))
                .collect::<Result<Vec<CandidateType>>>()?;
            edge_report = Some(report);
        }
        let t2 = Instant::now();

        let x = extract_types(&node_cands, &edge_cands, &self.schema, self.config.theta)?;
        self.schema = x.schema;
        self.stats.nodes.apply_renames(&x.node_renames);
        self.stats.edges.apply_renames(&x.edge_renames);
        self.stats.degrees.apply_renames(&x.edge_renames);
        for n in &nodes {
            self.stats
                .nodes
                .observe(&self.schema.node_assignment[&n.id], &n.properties);
        }
        for e in &edges {
            let ty = &self.schema.edge_assignment[&e.id];
            self.stats.edges.observe(ty, &e.properties);
            self.stats.degrees.observe(ty, &e.src, &e.tgt);
        }
        let t3 = Instant::now();

        self.timings.featurize += (t1 - t0).as_secs_f64();
        self.timings.cluster += (t2 - t1).as_secs_f64();
        self.timings.extract += (t3 - t2).as_secs_f64();
        if self.config.postprocess {
            self.postprocess();
        }
        let report = BatchReport {
            index,
            nodes: nodes.len(),
            edges: edges.len(),
            deferred_edges: self.pending.len(),
            node_clustering: node_report,
            edge_clustering: edge_report,
            node_types: self.schema.node_types.len(),
            edge_types: self.schema.edge_types.len(),
        };
        self.reports.push(report.clone());
        Ok(report)
    }

    /// Recomputes presence, datatypes and cardinalities from all instances
    /// seen so far.
    pub fn postprocess(&mut self) {
        let t = Instant::now();
        postprocess(
            &mut self.schema,
            &self.stats,
            self.config.sample_datatypes,
            self.config.seed,
        );
        self.timings.postprocess += t.elapsed().as_secs_f64();
    }

    /// Drops edges whose endpoints never appeared, then post-processes when
    /// `postprocess_final` is set.
    pub fn finish(mut self, postprocess_final: bool) -> Discovery {
        let dropped: Vec<String> = self.pending.drain(..).map(|e| e.id).collect();
        if !dropped.is_empty() {
            warn!(
                "{} edge(s) reference nodes that never appeared and were dropped (first: `{}`)",
                dropped.len(),
                dropped[0]
            );
        }
        if postprocess_final {
            self.postprocess();
        }
        Discovery {
            schema: self.schema,
            stats: self.stats,
            timings: self.timings,
            batches: self.reports,
            dropped_edges: dropped,
        }
    }
}

/// Single-batch discovery over a whole graph.
pub fn discover(graph: &PropertyGraph, config: &DiscoveryConfig) -> Result<Discovery> {
    let mut d = Discoverer::new(config.clone())?;
    let (nodes, edges) = graph.clone().into_parts();
    d.process_batch(Batch {
        index: 0,
        nodes,
        edges,
    })?;
    let post = config.postprocess;
    Ok(d.finish(post))
}

/// Runs the batches in order; the final schema is always post-processed.
/// `on_batch` sees the schema after each batch.
pub fn discover_incremental<I, F>(
    batches: I,
    config: &DiscoveryConfig,
    mut on_batch: F,
) -> Result<Discovery>
where
    I: IntoIterator<Item = Result<Batch>>,
    F: FnMut(&BatchReport, &SchemaGraph) -> Result<()>,
{
    let mut d = Discoverer::new(config.clone())?;
    for batch in batches {
        let t = Instant::now();
        let batch = batch?;
        d.add_load_time(t.elapsed().as_secs_f64());
        let report = d.process_batch(batch)?;
        on_batch(&report, d.schema())?;
    }
    Ok(d.finish(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::social_example as social;
    use crate::dataio::{batches_of, BatchSize};

    #[test]
    fn social_example_inventory() {
        for method in [LshMethod::Elsh, LshMethod::Minhash] {
            let cfg = DiscoveryConfig {
                method,
                postprocess: true,
                ..Default::default()
            };
            let d = discover(&social(), &cfg).unwrap();
            let s = &d.schema;
            assert_eq!(
                s.node_types.keys().collect::<Vec<_>>(),
                ["Org.", "Person", "Place", "Post"]
            );
            assert_eq!(
                s.edge_types.keys().collect::<Vec<_>>(),
                ["KNOWS", "LIKES", "LOCATED_IN", "WORKS_AT"]
            );
            assert_eq!(s.node_assignment["alice"], "Person");
            assert!(s.is_postprocessed());
        }
    }

    #[test]
    fn cross_batch_edges_are_deferred() {
        let g = social();
        let mut d = Discoverer::new(DiscoveryConfig::default()).unwrap();
        let (nodes, edges) = g.into_parts();
        // edges first, nodes afterwards
        let r = d
            .process_batch(Batch {
                index: 0,
                nodes: Vec::new(),
                edges,
            })
            .unwrap();
        assert_eq!(r.deferred_edges, 7);
        let r = d
            .process_batch(Batch {
                index: 1,
                nodes,
                edges: Vec::new(),
            })
            .unwrap();
        assert_eq!(r.deferred_edges, 0);
        assert_eq!(r.edges, 7);
        let out = d.finish(true);
        assert_eq!(out.schema.edge_types.len(), 4);
        assert!(out.dropped_edges.is_empty());
    }

    #[test]
    fn never_resolved_edges_are_dropped() {
        let mut d = Discoverer::new(DiscoveryConfig::default()).unwrap();
        d.process_batch(Batch {
            index: 0,
            nodes: vec![Node::new("a", ["A"], Vec::<(&str, &str)>::new())],
            edges: vec![Edge::new(
                "e",
                ["R"],
                "a",
                "ghost",
                Vec::<(&str, &str)>::new(),
            )],
        })
        .unwrap();
        let out = d.finish(true);
        assert_eq!(out.dropped_edges, vec!["e"]);
        assert!(out.schema.edge_types.is_empty());
    }

    #[test]
    fn duplicate_ids_across_batches() {
        let mut d = Discoverer::new(DiscoveryConfig::default()).unwrap();
        let n = Node::new("a", ["A"], Vec::<(&str, &str)>::new());
        d.process_batch(Batch {
            index: 0,
            nodes: vec![n.clone()],
            edges: Vec::new(),
        })
        .unwrap();
        assert!(matches!(
            d.process_batch(Batch {
                index: 1,
                nodes: vec![n],
                edges: Vec::new()
            }),
            Err(Error::DuplicateId { .. })
        ));
    }

    #[test]
    fn incremental_single_batch_matches_static() {
        let g = social();
        let cfg = DiscoveryConfig {
            postprocess: true,
            ..Default::default()
        };
        let stat = discover(&g, &cfg).unwrap();
        let inc = discover_incremental(
            batches_of(&g, BatchSize::All).into_iter().map(Ok),
            &cfg,
            |_, _| Ok(()),
        )
        .unwrap();
        assert_eq!(stat.schema, inc.schema);
    }
}
