use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{group_signatures, Clustering, LshParams};
use crate::error::{Error, Result};
use crate::hashing::{derive_seed, hash_str, mix64};
use crate::model::{canonical_label_key, Edge, ElementKind, EndpointLookup, Node};

pub type TokenSet = BTreeSet<String>;

/// Label tokens ∪ property keys.
pub fn node_tokens(node: &Node) -> TokenSet {
    labeled_tokens(&node.labels, node.properties.keys())
}

/// Label tokens ∪ property keys ∪ endpoint label keys. Unlabeled endpoints
/// still contribute (`"src:"`), so direction is always encoded.
pub fn edge_tokens(edge: &Edge, graph: &(impl EndpointLookup + ?Sized)) -> Result<TokenSet> {
    let endpoint_key = |id: &str| {
        graph
            .endpoint_labels(id)
            .map(canonical_label_key)
            .ok_or_else(|| Error::DanglingEndpoint {
                edge: edge.id.clone(),
                node: id.to_string(),
            })
    };
    let src = endpoint_key(&edge.src)?;
    let tgt = endpoint_key(&edge.tgt)?;
    let mut tokens = labeled_tokens(&edge.labels, edge.properties.keys());
    tokens.insert(format!("src:{src}"));
    tokens.insert(format!("tgt:{tgt}"));
    Ok(tokens)
}

fn labeled_tokens<'a>(
    labels: &BTreeSet<String>,
    keys: impl Iterator<Item = &'a String>,
) -> TokenSet {
    labels
        .iter()
        .map(|l| format!("label:{l}"))
        .chain(keys.map(|k| format!("key:{k}")))
        .collect()
}

/// `T` seeded hash functions `h_i(x) = mix64(a_i·x + b_i)` (wrapping, `a_i`
/// odd) applied to the FNV-1a hash of each token.
#[derive(Debug, Clone)]
pub struct MinHasher {
    coefficients: Vec<(u64, u64)>,
}

impl MinHasher {
    pub fn new(num_tables: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "minhash"));
        let coefficients = (0..num_tables)
            .map(|_| (rng.random::<u64>() | 1, rng.random::<u64>()))
            .collect();
        MinHasher { coefficients }
    }

    pub fn num_tables(&self) -> usize {
        self.coefficients.len()
    }

    /// `None` for the empty set.
    pub fn signature(&self, tokens: &TokenSet) -> Option<Vec<u64>> {
        if tokens.is_empty() {
            return None;
        }
        let hashes: Vec<u64> = tokens.iter().map(|t| hash_str(t)).collect();
        Some(
            self.coefficients
                .iter()
                .map(|&(a, b)| {
                    hashes
                        .iter()
                        .map(|&x| mix64(a.wrapping_mul(x).wrapping_add(b)))
                        .min()
                        .expect("non-empty token set")
                })
                .collect(),
        )
    }
}

pub fn minhash_signatures(
    elements: &[(String, TokenSet)],
    params: &LshParams,
) -> Result<Vec<Option<Vec<u64>>>> {
    if params.num_tables == 0 {
        return Err(Error::InvalidConfig(
            "number of hash tables must be at least 1".into(),
        ));
    }
    let hasher = MinHasher::new(params.num_tables, params.seed);
    Ok(elements
        .par_iter()
        .map(|(_, t)| hasher.signature(t))
        .collect())
}

/// Elements with empty token sets form one extra cluster of their own.
pub fn minhash_cluster(
    elements: &[(String, TokenSet)],
    kind: ElementKind,
    params: &LshParams,
) -> Result<Clustering> {
    let signatures = minhash_signatures(elements, params)?;
    let mut hashed_idx = Vec::new();
    let mut hashed_sigs = Vec::new();
    let mut empty = Vec::new();
    for (i, sig) in signatures.into_iter().enumerate() {
        match sig {
            Some(s) => {
                hashed_idx.push(i);
                hashed_sigs.push(s);
            }
            None => empty.push(i),
        }
    }
    let mut groups: Vec<Vec<usize>> = group_signatures(&hashed_sigs, params.rule)
        .into_iter()
        .map(|g| g.into_iter().map(|j| hashed_idx[j]).collect())
        .collect();
    if !empty.is_empty() {
        groups.push(empty);
    }
    groups.sort_by_key(|g| g[0]);
    Ok(Clustering {
        kind,
        clusters: groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| elements[i].0.clone()).collect())
            .collect(),
    })
}
