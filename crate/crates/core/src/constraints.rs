//! Post-processing: mandatory/optional properties, datatypes and edge
//! cardinalities, computed from statistics accumulated over instances.

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{NaiveDate, NaiveDateTime};
use log::warn;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hashing::{derive_seed, hash_str};
use crate::model::{Cardinality, CardinalityInfo, Datatype, Presence, PropertySpec, SchemaGraph};

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_float(s: &str) -> bool {
    s.bytes().any(|b| b.is_ascii_digit()) && s.parse::<f64>().is_ok_and(f64::is_finite)
}

fn is_date(s: &str) -> bool {
    // four-digit years only; chrono alone would also take "5-1-1"
    let iso = s.len() == 10 && NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok();
    let dmy = s.rsplit('/').next().is_some_and(|y| y.len() == 4)
        && NaiveDate::parse_from_str(s, "%d/%m/%Y").is_ok();
    iso || dmy
}

fn is_datetime(s: &str) -> bool {
    if chrono::DateTime::parse_from_rfc3339(s).is_ok() {
        return true;
    }
    s.get(..10).is_some_and(is_date)
        && [
            "%Y-%m-%dT%H:%M:%S%.f",
            "%Y-%m-%d %H:%M:%S%.f",
            "%Y-%m-%dT%H:%M",
        ]
        .iter()
        .any(|f| NaiveDateTime::parse_from_str(s, f).is_ok())
}

/// Most specific datatype of one raw value, by priority
/// INTEGER, FLOAT, BOOLEAN, DATE, DATETIME, STRING.
pub fn classify_value(value: &str) -> Datatype {
    if is_integer(value) {
        Datatype::Integer
    } else if is_float(value) {
        Datatype::Float
    } else if value.eq_ignore_ascii_case("true") || value.eq_ignore_ascii_case("false") {
        Datatype::Boolean
    } else if is_date(value) {
        Datatype::Date
    } else if is_datetime(value) {
        Datatype::Datetime
    } else {
        Datatype::String
    }
}

/// Whether `value` is a valid literal of `datatype`.
pub fn accepts(datatype: Datatype, value: &str) -> bool {
    classify_value(value).is_subtype_of(datatype)
}

/// Lattice join of the per-value types; STRING for no values.
pub fn infer_datatype<I, S>(values: I) -> Datatype
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    values
        .into_iter()
        .map(|v| classify_value(v.as_ref()))
        .reduce(Datatype::join)
        .unwrap_or(Datatype::String)
}

/// `min(n, max(ceil(n/10), 1000))`.
pub fn datatype_sample_size(n: usize) -> usize {
    n.min(n.div_ceil(10).max(1000))
}

/// Seeded sample of `values` sized by [`datatype_sample_size`], in original order.
pub fn sample_values(values: &[String], seed: u64) -> Vec<&str> {
    let k = datatype_sample_size(values.len());
    if k == values.len() {
        return values.iter().map(String::as_str).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, values.len(), k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| values[i].as_str()).collect()
}

pub(crate) fn property_seed(seed: u64, type_name: &str, key: &str) -> u64 {
    derive_seed(seed ^ hash_str(type_name).rotate_left(17), key)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PropertyStats {
    pub occurrences: u64,
    /// Join over every observed value.
    pub datatype: Option<Datatype>,
    /// Raw values, retained only when the owning [`TypeStats`] keeps them.
    pub values: Vec<String>,
}

impl PropertyStats {
    fn absorb(&mut self, other: PropertyStats) {
        self.occurrences += other.occurrences;
        self.datatype = match (self.datatype, other.datatype) {
            (Some(a), Some(b)) => Some(a.join(b)),
            (a, b) => a.or(b),
        };
        self.values.extend(other.values);
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeAccumulator {
    pub instances: u64,
    pub properties: BTreeMap<String, PropertyStats>,
}

impl TypeAccumulator {
    fn absorb(&mut self, other: TypeAccumulator) {
        self.instances += other.instances;
        for (k, p) in other.properties {
            self.properties.entry(k).or_default().absorb(p);
        }
    }
}

/// Per-type instance and property counts. Merging is associative, so
/// batches and partitions can be accumulated in any grouping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeStats {
    keep_values: bool,
    types: BTreeMap<String, TypeAccumulator>,
}

impl TypeStats {
    pub fn new(keep_values: bool) -> Self {
        TypeStats {
            keep_values,
            types: BTreeMap::new(),
        }
    }

    pub fn keeps_values(&self) -> bool {
        self.keep_values
    }

    pub fn observe(&mut self, type_name: &str, properties: &BTreeMap<String, String>) {
        let acc = self.types.entry(type_name.to_string()).or_default();
        acc.instances += 1;
        for (k, v) in properties {
            let p = acc.properties.entry(k.clone()).or_default();
            p.occurrences += 1;
            let dt = classify_value(v);
            p.datatype = Some(p.datatype.map_or(dt, |d| d.join(dt)));
            if self.keep_values {
                p.values.push(v.clone());
            }
        }
    }

    pub fn get(&self, type_name: &str) -> Option<&TypeAccumulator> {
        self.types.get(type_name)
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.types.keys().map(String::as_str)
    }

    /// Folds the statistics of `from` into `to`.
    pub fn rename(&mut self, from: &str, to: &str) {
        if from == to {
            return;
        }
        if let Some(acc) = self.types.remove(from) {
            self.types.entry(to.to_string()).or_default().absorb(acc);
        }
    }

    pub fn apply_renames(&mut self, renames: &BTreeMap<String, String>) {
        // collect first: a rename target can itself be renamed in the same map
        let moved: Vec<(String, TypeAccumulator)> = renames
            .keys()
            .filter_map(|from| self.types.remove(from).map(|acc| (from.clone(), acc)))
            .collect();
        for (from, acc) in moved {
            self.types
                .entry(renames[&from].clone())
                .or_default()
                .absorb(acc);
        }
    }

    pub fn merge(&mut self, other: TypeStats) {
        self.keep_values &= other.keep_values;
        for (name, acc) in other.types {
            self.types.entry(name).or_default().absorb(acc);
        }
    }
}

/// Distinct `(source, target)` node pairs per edge type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegreeStats {
    pairs: BTreeMap<String, HashSet<(String, String)>>,
}

impl DegreeStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, edge_type: &str, src: &str, tgt: &str) {
        self.pairs
            .entry(edge_type.to_string())
            .or_default()
            .insert((src.to_string(), tgt.to_string()));
    }

    pub fn rename(&mut self, from: &str, to: &str) {
        if from == to {
            return;
        }
        if let Some(p) = self.pairs.remove(from) {
            self.pairs.entry(to.to_string()).or_default().extend(p);
        }
    }

    pub fn apply_renames(&mut self, renames: &BTreeMap<String, String>) {
        let moved: Vec<(String, HashSet<(String, String)>)> = renames
            .keys()
            .filter_map(|from| self.pairs.remove(from).map(|p| (from.clone(), p)))
            .collect();
        for (from, p) in moved {
            self.pairs
                .entry(renames[&from].clone())
                .or_default()
                .extend(p);
        }
    }

    pub fn merge(&mut self, other: DegreeStats) {
        for (name, p) in other.pairs {
            self.pairs.entry(name).or_default().extend(p);
        }
    }

    /// `(maxOut, maxIn)`: most distinct targets of one source and most
    /// distinct sources of one target.
    pub fn bounds(&self, edge_type: &str) -> Option<(u64, u64)> {
        let pairs = self.pairs.get(edge_type).filter(|p| !p.is_empty())?;
        let mut out: HashMap<&str, u64> = HashMap::new();
        let mut inc: HashMap<&str, u64> = HashMap::new();
        for (s, t) in pairs {
            *out.entry(s).or_default() += 1;
            *inc.entry(t).or_default() += 1;
        }
        Some((
            out.values().copied().max().unwrap_or(0),
            inc.values().copied().max().unwrap_or(0),
        ))
    }
}

fn presence_for(instances: u64, stats: Option<&PropertyStats>) -> Presence {
    match stats {
        Some(p) if instances > 0 && p.occurrences == instances => Presence::Mandatory,
        _ => Presence::Optional,
    }
}

fn annotate_presence(
    kind: &str,
    name: &str,
    props: &mut BTreeMap<String, PropertySpec>,
    stats: &TypeStats,
) {
    let acc = stats.get(name);
    if acc.is_none_or(|a| a.instances == 0) && !props.is_empty() {
        warn!("{kind} type `{name}` has no instances; its properties are marked OPTIONAL");
    }
    let instances = acc.map_or(0, |a| a.instances);
    for (key, spec) in props.iter_mut() {
        spec.presence = Some(presence_for(
            instances,
            acc.and_then(|a| a.properties.get(key)),
        ));
    }
}

/// MANDATORY iff every instance of the type carries the property.
pub fn infer_property_constraints(
    schema: &mut SchemaGraph,
    node_stats: &TypeStats,
    edge_stats: &TypeStats,
) {
    for t in schema.node_types.values_mut() {
        annotate_presence("node", &t.name, &mut t.properties, node_stats);
    }
    for t in schema.edge_types.values_mut() {
        annotate_presence("edge", &t.name, &mut t.properties, edge_stats);
    }
}

fn datatype_for(
    type_name: &str,
    key: &str,
    stats: &TypeStats,
    sampled: bool,
    seed: u64,
) -> Datatype {
    let Some(p) = stats.get(type_name).and_then(|a| a.properties.get(key)) else {
        return Datatype::String;
    };
    if sampled && stats.keeps_values() {
        infer_datatype(sample_values(
            &p.values,
            property_seed(seed, type_name, key),
        ))
    } else {
        p.datatype.unwrap_or(Datatype::String)
    }
}

/// Full-scan datatypes, or per-property seeded samples when `sampled` is set
/// and the statistics kept raw values.
pub fn infer_datatypes_sampled(
    schema: &mut SchemaGraph,
    node_stats: &TypeStats,
    edge_stats: &TypeStats,
    sampled: bool,
    seed: u64,
) {
    for t in schema.node_types.values_mut() {
        for (key, spec) in t.properties.iter_mut() {
            spec.datatype = Some(datatype_for(&t.name, key, node_stats, sampled, seed));
        }
    }
    for t in schema.edge_types.values_mut() {
        for (key, spec) in t.properties.iter_mut() {
            spec.datatype = Some(datatype_for(&t.name, key, edge_stats, sampled, seed));
        }
    }
}

pub fn compute_cardinalities(schema: &mut SchemaGraph, degrees: &DegreeStats) {
    for t in schema.edge_types.values_mut() {
        let (max_out, max_in) = degrees.bounds(&t.name).unwrap_or((0, 0));
        t.cardinality = Some(CardinalityInfo {
            class: Cardinality::classify(max_out, max_in),
            max_out,
            max_in,
        });
    }
}

/// Statistics gathered over every instance that produced a schema.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceStats {
    pub nodes: TypeStats,
    pub edges: TypeStats,
    pub degrees: DegreeStats,
}

impl InstanceStats {
    pub fn new(keep_values: bool) -> Self {
        InstanceStats {
            nodes: TypeStats::new(keep_values),
            edges: TypeStats::new(keep_values),
            degrees: DegreeStats::new(),
        }
    }

    pub fn merge(&mut self, other: InstanceStats) {
        self.nodes.merge(other.nodes);
        self.edges.merge(other.edges);
        self.degrees.merge(other.degrees);
    }
}

/// Presence, datatypes and cardinalities in one pass.
pub fn postprocess(schema: &mut SchemaGraph, stats: &InstanceStats, sampled: bool, seed: u64) {
    infer_property_constraints(schema, &stats.nodes, &stats.edges);
    infer_datatypes_sampled(schema, &stats.nodes, &stats.edges, sampled, seed);
    compute_cardinalities(schema, &stats.degrees);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_classification() {
        assert_eq!(classify_value("42"), Datatype::Integer);
        assert_eq!(classify_value("-7"), Datatype::Integer);
        assert_eq!(classify_value("2.5"), Datatype::Float);
        assert_eq!(classify_value("1e3"), Datatype::Float);
        assert_eq!(classify_value("inf"), Datatype::String);
        assert_eq!(classify_value("NaN"), Datatype::String);
        assert_eq!(classify_value("TRUE"), Datatype::Boolean);
        assert_eq!(classify_value("1"), Datatype::Integer);
        assert_eq!(classify_value("19/12/1999"), Datatype::Date);
        assert_eq!(classify_value("2/5/1980"), Datatype::Date);
        assert_eq!(classify_value("31/2/1980"), Datatype::String);
        assert_eq!(classify_value("2024-03-01"), Datatype::Date);
        assert_eq!(classify_value("2024-03-01T10:00:00"), Datatype::Datetime);
        assert_eq!(classify_value("2024-03-01T10:00:00Z"), Datatype::Datetime);
        assert_eq!(classify_value("2024-03-01 10:00:00.5"), Datatype::Datetime);
        assert_eq!(classify_value(""), Datatype::String);
        assert_eq!(classify_value("screenshot.png"), Datatype::String);
    }

    #[test]
    fn aggregate_datatypes() {
        assert_eq!(infer_datatype(["1", "2", "3"]), Datatype::Integer);
        assert_eq!(infer_datatype(["19/12/1999", "24/9/2005"]), Datatype::Date);
        assert_eq!(infer_datatype(["1", "2.5"]), Datatype::Float);
        assert_eq!(infer_datatype(["1", "x"]), Datatype::String);
        assert_eq!(infer_datatype(Vec::<String>::new()), Datatype::String);
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(datatype_sample_size(500), 500);
        assert_eq!(datatype_sample_size(100_000), 10_000);
        assert_eq!(datatype_sample_size(5_000), 1_000);
        let values: Vec<String> = (0..5000).map(|i| i.to_string()).collect();
        let s = sample_values(&values, 1);
        assert_eq!(s.len(), 1000);
        assert_eq!(s, sample_values(&values, 1));
    }

    #[test]
    fn degree_bounds_dedupe_parallel_edges() {
        let mut d = DegreeStats::new();
        d.observe("W", "p1", "o");
        d.observe("W", "p2", "o");
        d.observe("W", "p2", "o");
        assert_eq!(d.bounds("W"), Some((1, 2)));
        assert_eq!(Cardinality::classify(1, 2), Cardinality::NToOne);
        assert_eq!(d.bounds("missing"), None);
    }

    #[test]
    fn renames_fold_statistics() {
        let mut s = TypeStats::new(false);
        let props: BTreeMap<String, String> = [("a".to_string(), "1".to_string())].into();
        s.observe("X", &props);
        s.observe("Y", &BTreeMap::new());
        s.rename("X", "Y");
        let y = s.get("Y").unwrap();
        assert_eq!(y.instances, 2);
        assert_eq!(y.properties["a"].occurrences, 1);
        assert!(s.get("X").is_none());
    }
}
