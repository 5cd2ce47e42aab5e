use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{group_signatures, to_clustering, Clustering, LshParams};
use crate::error::{Error, Result};
use crate::featurize::FeatureVector;
use crate::hashing::derive_seed;
use crate::model::ElementKind;

/// `T` bucketed random projections `h_i(x) = ⌊(a_i·x + c_i) / b⌋`.
///
/// Tables are drawn sequentially from one seeded stream, so the first `T`
/// tables are identical for any larger table count.
#[derive(Debug, Clone)]
pub struct ElshHasher {
    bucket_length: f64,
    projections: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl ElshHasher {
    pub fn new(dim: usize, bucket_length: f64, num_tables: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "elsh"));
        let mut projections = Vec::with_capacity(num_tables);
        let mut offsets = Vec::with_capacity(num_tables);
        for _ in 0..num_tables {
            projections.push(
                (0..dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            );
            offsets.push(rng.random::<f64>() * bucket_length);
        }
        ElshHasher {
            bucket_length,
            projections,
            offsets,
        }
    }

    pub fn dim(&self) -> usize {
        self.projections.first().map_or(0, Vec::len)
    }

    pub fn hash(&self, x: &[f64]) -> Vec<i64> {
        self.projections
            .iter()
            .zip(&self.offsets)
            .map(|(a, c)| {
                let dot: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
                ((dot + c) / self.bucket_length).floor() as i64
            })
            .collect()
    }
}

fn common_length(vectors: &[FeatureVector]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let expected = first.len();
    match vectors.iter().find(|v| v.len() != expected) {
        Some(v) => Err(Error::MixedVectorLength {
            expected,
            found: v.len(),
        }),
        None => Ok(expected),
    }
}

pub fn elsh_signatures(vectors: &[FeatureVector], params: &LshParams) -> Result<Vec<Vec<i64>>> {
    params.validate()?;
    let dim = common_length(vectors)?;
    let hasher = ElshHasher::new(dim, params.bucket_length, params.num_tables, params.seed);
    Ok(vectors.par_iter().map(|v| hasher.hash(&v.values)).collect())
}

pub fn elsh_cluster(vectors: &[FeatureVector], params: &LshParams) -> Result<Clustering> {
    let kind = vectors.first().map_or(ElementKind::Node, |v| v.kind);
    let signatures = elsh_signatures(vectors, params)?;
    let owners: Vec<&str> = vectors.iter().map(|v| v.owner.as_str()).collect();
    Ok(to_clustering(
        kind,
        &owners,
        group_signatures(&signatures, params.rule),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsh::{CollisionRule, LshMethod};

    fn fv(owner: &str, values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            owner: owner.into(),
            kind: ElementKind::Node,
            values,
        }
    }

    #[test]
    fn identical_vectors_share_a_cluster() {
        let vs = vec![fv("a", vec![0.3, 1.0, 0.0]), fv("b", vec![0.3, 1.0, 0.0])];
        for rule in [CollisionRule::All, CollisionRule::Any] {
            let p = LshParams::new(LshMethod::Elsh, 0.1, 20, 7).with_rule(rule);
            assert_eq!(
                elsh_cluster(&vs, &p).unwrap().clusters,
                vec![vec!["a", "b"]]
            );
        }
    }

    #[test]
    fn single_element_is_a_singleton() {
        let p = LshParams::new(LshMethod::Elsh, 1.0, 4, 7);
        let c = elsh_cluster(&[fv("only", vec![1.0, 2.0])], &p).unwrap();
        assert_eq!(c.clusters, vec![vec!["only"]]);
    }

    #[test]
    fn mixed_lengths_are_rejected() {
        let p = LshParams::new(LshMethod::Elsh, 1.0, 4, 7);
        let vs = vec![fv("a", vec![1.0]), fv("b", vec![1.0, 2.0])];
        assert!(matches!(
            elsh_cluster(&vs, &p),
            Err(Error::MixedVectorLength { .. })
        ));
    }

    #[test]
    fn hash_matches_definition() {
        let h = ElshHasher::new(3, 2.0, 4, 11);
        let x = [0.5, -1.0, 2.0];
        let sig = h.hash(&x);
        assert_eq!(sig.len(), 4);
        for ((s, proj), &off) in sig.iter().zip(&h.projections).zip(&h.offsets) {
            let dot: f64 = proj.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert_eq!(*s, ((dot + off) / 2.0).floor() as i64);
            assert!((0.0..2.0).contains(&off));
        }
        // prefix-consistent table generation
        let bigger = ElshHasher::new(3, 2.0, 6, 11);
        assert_eq!(&bigger.hash(&x)[..4], sig.as_slice());
    }
}
