use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::constraints::{
    classify_value, infer_datatype, property_seed, sample_values, InstanceStats, TypeStats,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TypeScore {
    pub true_type: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct F1Report {
    /// Macro average of per-true-type F1.
    pub f1: f64,
    /// Fraction of elements whose discovered type has their true type as majority.
    pub micro_accuracy: f64,
    pub per_type: Vec<TypeScore>,
}

/// Majority-based F1: every discovered type is tagged with its most frequent
/// true type (ties to the smallest name) and elements count as correct when
/// their true type equals that tag.
pub fn majority_f1<A, T>(assignment: &A, truth: &T) -> Result<F1Report>
where
    A: AssignmentMap,
    T: AssignmentMap,
{
    if assignment.size() != truth.size() {
        return Err(Error::CoverageMismatch(format!(
            "{} assigned elements vs {} ground-truth elements",
            assignment.size(),
            truth.size()
        )));
    }
    // discovered type -> true type -> count
    let mut table: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for (id, found) in assignment.pairs() {
        let t = truth.lookup(id).ok_or_else(|| {
            Error::CoverageMismatch(format!("element `{id}` has no ground truth"))
        })?;
        *table.entry(found).or_default().entry(t).or_default() += 1;
        *totals.entry(t).or_default() += 1;
    }
    let mut tp: BTreeMap<&str, u64> = BTreeMap::new();
    let mut fp: BTreeMap<&str, u64> = BTreeMap::new();
    for counts in table.values() {
        // BTreeMap order makes the first maximum the smallest name
        let (major, &hits) = counts
            .iter()
            .fold(None, |best: Option<(&&str, &u64)>, (k, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((k, c)),
            })
            .expect("non-empty cluster");
        let size: u64 = counts.values().sum();
        *tp.entry(major).or_default() += hits;
        *fp.entry(major).or_default() += size - hits;
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let per_type: Vec<TypeScore> = totals
        .iter()
        .map(|(&t, &total)| {
            let tp_t = tp.get(t).copied().unwrap_or(0);
            let fp_t = fp.get(t).copied().unwrap_or(0);
            let fn_t = total - tp_t;
            let precision = ratio(tp_t, tp_t + fp_t);
            let recall = ratio(tp_t, tp_t + fn_t);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            TypeScore {
                true_type: t.to_string(),
                tp: tp_t,
                fp: fp_t,
                fn_: fn_t,
                precision,
                recall,
                f1,
            }
        })
        .collect();
    let n: u64 = totals.values().sum();
    Ok(F1Report {
        f1: if per_type.is_empty() {
            1.0
        } else {
            per_type.iter().map(|s| s.f1).sum::<f64>() / per_type.len() as f64
        },
        micro_accuracy: if n == 0 {
            1.0
        } else {
            tp.values().sum::<u64>() as f64 / n as f64
        },
        per_type,
    })
}

/// Read access shared by the map types used for assignments and ground truth.
pub trait AssignmentMap {
    fn size(&self) -> usize;
    fn lookup(&self, id: &str) -> Option<&str>;
    fn pairs(&self) -> Box<dyn Iterator<Item = (&str, &str)> + '_>;
}

impl AssignmentMap for HashMap<String, String> {
    fn size(&self) -> usize {
        self.len()
    }
    fn lookup(&self, id: &str) -> Option<&str> {
        self.get(id).map(String::as_str)
    }
    fn pairs(&self) -> Box<dyn Iterator<Item = (&str, &str)> + '_> {
        Box::new(self.iter().map(|(a, b)| (a.as_str(), b.as_str())))
    }
}

impl AssignmentMap for BTreeMap<String, String> {
    fn size(&self) -> usize {
        self.len()
    }
    fn lookup(&self, id: &str) -> Option<&str> {
        self.get(id).map(String::as_str)
    }
    fn pairs(&self) -> Box<dyn Iterator<Item = (&str, &str)> + '_> {
        Box::new(self.iter().map(|(a, b)| (a.as_str(), b.as_str())))
    }
}

/// Fraction of sampled values whose own datatype differs from the datatype
/// of the whole population.
pub fn datatype_sampling_error<P, S>(population: &[P], sample: &[S]) -> Result<f64>
where
    P: AsRef<str>,
    S: AsRef<str>,
{
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let full = infer_datatype(population.iter().map(AsRef::as_ref));
    let wrong = sample
        .iter()
        .filter(|v| classify_value(v.as_ref()) != full)
        .count();
    Ok(wrong as f64 / sample.len() as f64)
}

/// Sampling error of every property the pipeline sampled, keyed
/// `node:Type.key` / `edge:Type.key`. Uses the same per-property samples as
/// datatype inference, so `stats` must have been collected with raw values.
pub fn datatype_errors(stats: &InstanceStats, seed: u64) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (kind, ts) in [("node", &stats.nodes), ("edge", &stats.edges)] {
        collect_errors(kind, ts, seed, &mut out)?;
    }
    Ok(out)
}

fn collect_errors(
    kind: &str,
    stats: &TypeStats,
    seed: u64,
    out: &mut BTreeMap<String, f64>,
) -> Result<()> {
    if !stats.keeps_values() {
        return Err(Error::InvalidConfig(
            "datatype errors need statistics collected with sampled datatypes enabled".into(),
        ));
    }
    for name in stats.type_names() {
        let acc = stats.get(name).expect("listed type exists");
        for (key, p) in &acc.properties {
            let sample = sample_values(&p.values, property_seed(seed, name, key));
            out.insert(
                format!("{kind}:{name}.{key}"),
                datatype_sampling_error(&p.values, &sample)?,
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn mixed_cluster_scores_three_sevenths() {
        let found = map(&[("a", "C"), ("b", "C"), ("c", "C"), ("d", "C")]);
        let truth = map(&[
            ("a", "Person"),
            ("b", "Person"),
            ("c", "Person"),
            ("d", "Org"),
        ]);
        let r = majority_f1(&found, &truth).unwrap();
        assert!((r.f1 - 3.0 / 7.0).abs() < 1e-12);
        let person = r.per_type.iter().find(|s| s.true_type == "Person").unwrap();
        assert!((person.f1 - 6.0 / 7.0).abs() < 1e-12);
        assert!((r.micro_accuracy - 0.75).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_smallest_true_type() {
        let found = map(&[("a", "C"), ("b", "C")]);
        let truth = map(&[("a", "Zed"), ("b", "Amy")]);
        let r = majority_f1(&found, &truth).unwrap();
        let amy = r.per_type.iter().find(|s| s.true_type == "Amy").unwrap();
        assert_eq!((amy.tp, amy.fp), (1, 1));
    }

    #[test]
    fn coverage_is_checked() {
        let found = map(&[("a", "C")]);
        assert!(majority_f1(&found, &map(&[("b", "T")])).is_err());
        assert!(majority_f1(&found, &map(&[("a", "T"), ("b", "T")])).is_err());
    }

    #[test]
    fn sampling_error_values() {
        assert_eq!(
            datatype_sampling_error(&["1", "2", "x"], &["1", "2"]).unwrap(),
            1.0
        );
        assert_eq!(datatype_sampling_error(&["x"], &["x"]).unwrap(), 0.0);
        assert_eq!(datatype_sampling_error(&["4", "5"], &["4"]).unwrap(), 0.0);
        assert!(matches!(
            datatype_sampling_error(&["x"], &[] as &[&str]),
            Err(Error::EmptySample)
        ));
    }
}
