use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LshMethod, LshParams};
use crate::error::{Error, Result};
use crate::featurize::FeatureVector;
use crate::hashing::derive_seed;
use crate::model::ElementKind;

pub const MIN_SAMPLE: usize = 10_000;
pub const MAX_PAIRS: usize = 100_000;
pub const MAX_TABLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveEstimate {
    pub mu: f64,
    pub b_base: f64,
    pub alpha: f64,
    pub distinct_labels: usize,
    pub element_count: usize,
    pub sample_size: usize,
    pub pair_count: usize,
    pub resolved: LshParams,
}

/// `min(N, max(ceil(N/100), 10000))`.
pub fn sample_size_for(total: usize) -> usize {
    total.min(total.div_ceil(100).max(MIN_SAMPLE))
}

pub fn alpha_for_labels(distinct_labels: usize) -> f64 {
    match distinct_labels {
        0..=3 => 0.8,
        4..=10 => 1.0,
        _ => 1.5,
    }
}

/// Table count from the base bucket width, rounded and clamped to `[1, 64]`.
pub fn tables_for(kind: ElementKind, b_base: f64, alpha: f64, element_count: usize) -> usize {
    let log_n = if element_count == 0 {
        0.0
    } else {
        (element_count as f64).log10()
    };
    let raw = match kind {
        ElementKind::Node => b_base * 5f64.max(alpha * log_n.min(25.0)),
        ElementKind::Edge => b_base * 3f64.max(alpha * log_n.min(20.0)),
    };
    (raw.round().max(1.0) as usize).min(MAX_TABLES)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Mean pairwise distance over the sample; exhaustive when the pair count is
/// within budget, otherwise `MAX_PAIRS` seeded pairs with `i != j`.
fn mean_pairwise_distance(sample: &[&[f64]], rng: &mut ChaCha8Rng) -> (f64, usize) {
    let n = sample.len();
    let all_pairs = n * (n - 1) / 2;
    if all_pairs <= MAX_PAIRS {
        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                total += distance(sample[i], sample[j]);
            }
        }
        return (total / all_pairs as f64, all_pairs);
    }
    let mut total = 0.0;
    for _ in 0..MAX_PAIRS {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        total += distance(sample[i], sample[j]);
    }
    (total / MAX_PAIRS as f64, MAX_PAIRS)
}

/// Derives `b` and `T` from a seeded sample of `vectors`. `element_count` is
/// the population size `N` (or `E`) used in the table formula; it may exceed
/// `vectors.len()` when only part of the population is materialized.
pub fn estimate_params(
    vectors: &[FeatureVector],
    element_count: usize,
    distinct_labels: usize,
    kind: ElementKind,
    method: LshMethod,
    seed: u64,
) -> Result<AdaptiveEstimate> {
    if vectors.len() < 2 {
        return Err(Error::NotEnoughSamples(vectors.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "adaptive"));
    let sample_size = sample_size_for(element_count.max(vectors.len())).clamp(2, vectors.len());
    let mut picked = index::sample(&mut rng, vectors.len(), sample_size).into_vec();
    picked.sort_unstable();
    let sample: Vec<&[f64]> = picked
        .iter()
        .map(|&i| vectors[i].values.as_slice())
        .collect();
    if let Some(v) = sample.iter().find(|v| v.len() != sample[0].len()) {
        return Err(Error::MixedVectorLength {
            expected: sample[0].len(),
            found: v.len(),
        });
    }
    let (mu, pair_count) = mean_pairwise_distance(&sample, &mut rng);

    let b_base = 1.2 * mu;
    let alpha = alpha_for_labels(distinct_labels);
    let (bucket_length, num_tables) = if b_base > 0.0 {
        (
            b_base * alpha,
            tables_for(kind, b_base, alpha, element_count),
        )
    } else {
        (1.0, 1)
    };
    Ok(AdaptiveEstimate {
        mu,
        b_base,
        alpha,
        distinct_labels,
        element_count,
        sample_size,
        pair_count,
        resolved: LshParams::new(method, bucket_length, num_tables, seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            owner: String::new(),
            kind: ElementKind::Node,
            values,
        }
    }

    #[test]
    fn alpha_thresholds() {
        assert_eq!(alpha_for_labels(11), 1.5);
        assert_eq!(alpha_for_labels(10), 1.0);
        assert_eq!(alpha_for_labels(4), 1.0);
        assert_eq!(alpha_for_labels(3), 0.8);
        assert_eq!(alpha_for_labels(0), 0.8);
    }

    #[test]
    fn table_formula() {
        // b_base = 2.4, alpha = 1, N = 1e5: round(2.4 * max(5, 5)) = 12
        assert_eq!(tables_for(ElementKind::Node, 2.4, 1.0, 100_000), 12);
        assert_eq!(tables_for(ElementKind::Edge, 2.4, 1.0, 100), 7);
        assert_eq!(tables_for(ElementKind::Node, 0.01, 1.0, 10), 1);
        assert_eq!(tables_for(ElementKind::Node, 100.0, 1.5, 10), MAX_TABLES);
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(sample_size_for(500), 500);
        assert_eq!(sample_size_for(20_000), 10_000);
        assert_eq!(sample_size_for(2_000_000), 20_000);
    }

    #[test]
    fn degenerate_sample_falls_back() {
        let vs = vec![fv(vec![1.0, 0.0]); 5];
        let est = estimate_params(&vs, 5, 1, ElementKind::Node, LshMethod::Elsh, 3).unwrap();
        assert_eq!(est.mu, 0.0);
        assert_eq!(est.resolved.bucket_length, 1.0);
        assert_eq!(est.resolved.num_tables, 1);
    }

    #[test]
    fn mean_distance_exact_on_small_samples() {
        let vs = vec![fv(vec![0.0, 0.0]), fv(vec![3.0, 4.0]), fv(vec![0.0, 4.0])];
        let est = estimate_params(&vs, 3, 5, ElementKind::Node, LshMethod::Elsh, 3).unwrap();
        assert!((est.mu - 4.0).abs() < 1e-12);
        assert!((est.b_base - 4.8).abs() < 1e-12);
        assert_eq!(est.resolved.bucket_length, est.b_base * est.alpha);
        assert!(estimate_params(&vs[..1], 1, 1, ElementKind::Node, LshMethod::Elsh, 3).is_err());
    }
}
