//! Candidate-type clustering with Euclidean (p-stable) LSH or MinHash.
//!
//! Each element gets one hash value per table. How per-table collisions
//! become clusters is governed by [`CollisionRule`]:
//!
//! * [`CollisionRule::All`] (default): elements form a cluster when they agree
//!   in every table, i.e. share the full signature. More tables mean finer
//!   clusters.
//! * [`CollisionRule::Any`]: elements are linked when they agree in at least
//!   one table, and clusters are the connected components of those links.
//!   More tables mean coarser clusters.

mod adaptive;
mod elsh;
mod minhash;
pub mod union_find;

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

pub use adaptive::{
    alpha_for_labels, estimate_params, sample_size_for, tables_for, AdaptiveEstimate,
};
pub use elsh::{elsh_cluster, elsh_signatures, ElshHasher};
pub use minhash::{
    edge_tokens, minhash_cluster, minhash_signatures, node_tokens, MinHasher, TokenSet,
};

use crate::model::ElementKind;
use union_find::DisjointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LshMethod {
    Elsh,
    Minhash,
}

impl LshMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LshMethod::Elsh => "elsh",
            LshMethod::Minhash => "minhash",
        }
    }
}

impl std::fmt::Display for LshMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LshMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "elsh" => Ok(LshMethod::Elsh),
            "minhash" => Ok(LshMethod::Minhash),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown LSH method `{other}` (expected elsh or minhash)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionRule {
    #[default]
    All,
    Any,
}

impl std::str::FromStr for CollisionRule {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(CollisionRule::All),
            "any" => Ok(CollisionRule::Any),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown collision rule `{other}` (expected all or any)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LshParams {
    pub method: LshMethod,
    /// Bucket length `b`; only used by ELSH.
    pub bucket_length: f64,
    pub num_tables: usize,
    pub seed: u64,
    pub rule: CollisionRule,
}

impl LshParams {
    pub fn new(method: LshMethod, bucket_length: f64, num_tables: usize, seed: u64) -> Self {
        LshParams {
            method,
            bucket_length,
            num_tables,
            seed,
            rule: CollisionRule::All,
        }
    }

    pub fn with_rule(mut self, rule: CollisionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.bucket_length > 0.0 && self.bucket_length.is_finite()) {
            return Err(crate::Error::InvalidConfig(format!(
                "bucket length must be positive, got {}",
                self.bucket_length
            )));
        }
        if self.num_tables == 0 {
            return Err(crate::Error::InvalidConfig(
                "number of hash tables must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A partition of element ids; each cluster lists members in input order and
/// clusters are ordered by their first member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub kind: ElementKind,
    pub clusters: Vec<Vec<String>>,
}

impl Clustering {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn element_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// Element id → cluster index.
    pub fn membership(&self) -> HashMap<&str, usize> {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |id| (id.as_str(), i)))
            .collect()
    }
}

/// Groups signature rows (one row per element) into clusters of indices.
pub(crate) fn group_signatures<H: Hash + Eq + Copy>(
    signatures: &[Vec<H>],
    rule: CollisionRule,
) -> Vec<Vec<usize>> {
    match rule {
        CollisionRule::All => {
            let mut slot: HashMap<&[H], usize> = HashMap::with_capacity(signatures.len());
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for (i, sig) in signatures.iter().enumerate() {
                let next = groups.len();
                let s = *slot.entry(sig.as_slice()).or_insert(next);
                if s == next {
                    groups.push(Vec::new());
                }
                groups[s].push(i);
            }
            groups
        }
        CollisionRule::Any => {
            let tables = signatures.first().map_or(0, Vec::len);
            let mut ds = DisjointSet::new(signatures.len());
            for t in 0..tables {
                let mut first_in_bucket: HashMap<H, usize> = HashMap::new();
                for (i, sig) in signatures.iter().enumerate() {
                    match first_in_bucket.get(&sig[t]) {
                        Some(&j) => {
                            ds.union(j, i);
                        }
                        None => {
                            first_in_bucket.insert(sig[t], i);
                        }
                    }
                }
            }
            ds.groups()
        }
    }
}

pub(crate) fn to_clustering(
    kind: ElementKind,
    owners: &[&str],
    groups: Vec<Vec<usize>>,
) -> Clustering {
    Clustering {
        kind,
        clusters: groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| owners[i].to_string()).collect())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_rule_requires_full_agreement() {
        let sigs = vec![vec![1, 2], vec![1, 3], vec![1, 2], vec![4, 3]];
        assert_eq!(
            group_signatures(&sigs, CollisionRule::All),
            vec![vec![0, 2], vec![1], vec![3]]
        );
        // 0~1 via table 0, 1~3 via table 1
        assert_eq!(
            group_signatures(&sigs, CollisionRule::Any),
            vec![vec![0, 1, 2, 3]]
        );
    }

    #[test]
    fn params_validation() {
        assert!(LshParams::new(LshMethod::Elsh, 0.0, 3, 0)
            .validate()
            .is_err());
        assert!(LshParams::new(LshMethod::Elsh, 1.0, 0, 0)
            .validate()
            .is_err());
        assert!(LshParams::new(LshMethod::Elsh, 1.0, 1, 0)
            .validate()
            .is_ok());
        assert_eq!("MinHash".parse::<LshMethod>().unwrap(), LshMethod::Minhash);
        assert!("x".parse::<CollisionRule>().is_err());
    }
}
