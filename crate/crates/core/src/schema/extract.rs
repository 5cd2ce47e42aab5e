//! Type extraction and schema merging.
//!
//! Both operations run the same resolution over a list of drafts (existing
//! types first, then new ones):
//!
//! 1. labeled drafts with equal label keys are merged;
//! 2. each unlabeled draft joins the labeled type with the highest Jaccard
//!    similarity, if that similarity is at least `theta`;
//! 3. the remaining unlabeled drafts are linked pairwise when their Jaccard
//!    similarity is at least `theta`;
//! 4. each linked group becomes one ABSTRACT type.
//!
//! Node keys are compared directly. Edge keys are compared together with
//! `src:`/`tgt:` tokens naming their endpoint node types.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::warn;

use super::candidates::{jaccard, CandidateType};
use crate::error::{Error, Result};
use crate::lsh::union_find::DisjointSet;
use crate::model::{
    canonical_label_key, merge_property_maps, Cardinality, CardinalityInfo, EdgeType, KeySet,
    LabelSet, NodeType, PropertySpec, SchemaGraph, UNKNOWN_NODE_TYPE,
};

pub const DEFAULT_THETA: f64 = 0.9;
pub const ABSTRACT_NODE_PREFIX: &str = "ABSTRACT_";
pub const ABSTRACT_EDGE_PREFIX: &str = "ABSTRACT_EDGE_";

/// Result of integrating new types into a schema, with the names of
/// pre-existing types that were folded into another type.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub schema: SchemaGraph,
    pub node_renames: BTreeMap<String, String>,
    pub edge_renames: BTreeMap<String, String>,
}

/// Labels, keys and properties are unioned. Annotations follow the property
/// merge rules; the name of `t1` is kept.
pub fn merge_node_types(t1: &NodeType, t2: &NodeType) -> NodeType {
    let labels: LabelSet = t1.labels.union(&t2.labels).cloned().collect();
    NodeType {
        name: t1.name.clone(),
        is_abstract: labels.is_empty(),
        labels,
        properties: merge_property_maps(&t1.properties, &t2.properties),
    }
}

/// As [`merge_node_types`], plus endpoint union. Degree bounds combine by
/// maximum and are dropped when either side has none.
pub fn merge_edge_types(t1: &EdgeType, t2: &EdgeType) -> EdgeType {
    let labels: LabelSet = t1.labels.union(&t2.labels).cloned().collect();
    let cardinality = match (t1.cardinality, t2.cardinality) {
        (Some(a), Some(b)) => {
            let (max_out, max_in) = (a.max_out.max(b.max_out), a.max_in.max(b.max_in));
            Some(CardinalityInfo {
                class: Cardinality::classify(max_out, max_in),
                max_out,
                max_in,
            })
        }
        _ => None,
    };
    EdgeType {
        name: t1.name.clone(),
        is_abstract: labels.is_empty(),
        labels,
        properties: merge_property_maps(&t1.properties, &t2.properties),
        endpoints: t1.endpoints.union(&t2.endpoints).cloned().collect(),
        cardinality,
    }
}

struct Draft {
    /// Name of a pre-existing type that must be kept or reported as renamed.
    name: Option<String>,
    labels: LabelSet,
    tokens: KeySet,
}

struct Resolution {
    group_of: Vec<usize>,
    names: Vec<String>,
}

fn abstract_index(name: &str, prefix: &str) -> Option<u64> {
    name.strip_prefix(prefix)?.parse().ok()
}

fn resolve(drafts: &[Draft], theta: f64, prefix: &str) -> Resolution {
    const UNSET: usize = usize::MAX;
    let mut group_of = vec![UNSET; drafts.len()];
    let mut names: Vec<String> = Vec::new();

    // rule 1
    let mut by_key: BTreeMap<String, usize> = BTreeMap::new();
    let mut group_tokens: Vec<KeySet> = Vec::new();
    for (i, d) in drafts
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.labels.is_empty())
    {
        let key = canonical_label_key(&d.labels);
        let g = *by_key.entry(key.clone()).or_insert_with(|| {
            names.push(key);
            group_tokens.push(KeySet::new());
            names.len() - 1
        });
        group_tokens[g].extend(d.tokens.iter().cloned());
        group_of[i] = g;
    }

    // rule 2; candidates compared against post-rule-1 key sets, in name order
    let unlabeled: Vec<usize> = (0..drafts.len())
        .filter(|&i| drafts[i].labels.is_empty())
        .collect();
    let mut rest = Vec::new();
    for &u in &unlabeled {
        let mut best: Option<(f64, usize)> = None;
        for &g in by_key.values() {
            let j = jaccard(&drafts[u].tokens, &group_tokens[g]);
            if j >= theta && best.is_none_or(|(bj, _)| j > bj) {
                best = Some((j, g));
            }
        }
        match best {
            Some((_, g)) => group_of[u] = g,
            None => rest.push(u),
        }
    }

    // rule 3
    let mut ds = DisjointSet::new(rest.len());
    for a in 0..rest.len() {
        for b in a + 1..rest.len() {
            if jaccard(&drafts[rest[a]].tokens, &drafts[rest[b]].tokens) >= theta {
                ds.union(a, b);
            }
        }
    }

    // rule 4; a group holding existing ABSTRACT names keeps the lowest one
    let mut taken: BTreeSet<String> = names.iter().cloned().collect();
    let mut unnamed: Vec<(String, usize, Vec<usize>)> = Vec::new();
    for comp in ds.groups() {
        let members: Vec<usize> = comp.into_iter().map(|k| rest[k]).collect();
        let kept = members
            .iter()
            .filter_map(|&m| drafts[m].name.as_deref())
            .min_by_key(|n| (abstract_index(n, prefix).unwrap_or(u64::MAX), n.to_string()));
        match kept {
            Some(name) => {
                taken.insert(name.to_string());
                names.push(name.to_string());
                for &m in &members {
                    group_of[m] = names.len() - 1;
                }
            }
            None => {
                let tokens: KeySet = members
                    .iter()
                    .flat_map(|&m| drafts[m].tokens.iter().cloned())
                    .collect();
                let canonical = tokens.into_iter().collect::<Vec<_>>().join(",");
                unnamed.push((canonical, members[0], members));
            }
        }
    }
    unnamed.sort();
    let mut next = 0u64;
    for (_, _, members) in unnamed {
        let name = loop {
            let candidate = format!("{prefix}{next}");
            next += 1;
            if !taken.contains(&candidate) {
                break candidate;
            }
        };
        taken.insert(name.clone());
        names.push(name);
        for m in members {
            group_of[m] = names.len() - 1;
        }
    }
    Resolution { group_of, names }
}

fn fresh_node_type(labels: &LabelSet, keys: &KeySet) -> NodeType {
    NodeType {
        name: String::new(),
        labels: labels.clone(),
        properties: keys
            .iter()
            .map(|k| (k.clone(), PropertySpec::default()))
            .collect(),
        is_abstract: labels.is_empty(),
    }
}

fn unknown_node_type() -> NodeType {
    NodeType {
        name: UNKNOWN_NODE_TYPE.to_string(),
        labels: LabelSet::new(),
        properties: BTreeMap::new(),
        is_abstract: true,
    }
}

fn edge_tokens(t: &EdgeType) -> KeySet {
    t.properties
        .keys()
        .map(|k| format!("key:{k}"))
        .chain(
            t.endpoints
                .iter()
                .flat_map(|(s, d)| [format!("src:{s}"), format!("tgt:{d}")]),
        )
        .collect()
}

struct NodeStage {
    node_types: BTreeMap<String, NodeType>,
    assignment: HashMap<String, String>,
    renames: BTreeMap<String, String>,
    /// Final name of each new node draft.
    new_names: Vec<String>,
    has_unknown: bool,
}

fn integrate_nodes(
    existing: &SchemaGraph,
    new: Vec<(NodeType, Vec<String>)>,
    theta: f64,
) -> NodeStage {
    let has_unknown = existing.node_types.contains_key(UNKNOWN_NODE_TYPE);
    let old: Vec<&NodeType> = existing
        .node_types
        .values()
        .filter(|t| t.name != UNKNOWN_NODE_TYPE)
        .collect();
    let drafts: Vec<Draft> = old
        .iter()
        .map(|t| Draft {
            name: Some(t.name.clone()),
            labels: t.labels.clone(),
            tokens: t.keys(),
        })
        .chain(new.iter().map(|(t, _)| Draft {
            name: None,
            labels: t.labels.clone(),
            tokens: t.keys(),
        }))
        .collect();
    let res = resolve(&drafts, theta, ABSTRACT_NODE_PREFIX);

    let mut built: Vec<Option<NodeType>> = vec![None; res.names.len()];
    let types = old
        .iter()
        .map(|t| (*t).clone())
        .chain(new.iter().map(|(t, _)| t.clone()));
    for (i, t) in types.enumerate() {
        let g = res.group_of[i];
        built[g] = Some(match built[g].take() {
            Some(acc) => merge_node_types(&acc, &t),
            None => t,
        });
    }
    let mut node_types: BTreeMap<String, NodeType> = BTreeMap::new();
    for (g, t) in built.into_iter().enumerate() {
        let mut t = t.expect("every group has a member");
        t.name = res.names[g].clone();
        node_types.insert(t.name.clone(), t);
    }

    let mut renames = BTreeMap::new();
    for (i, t) in old.iter().enumerate() {
        let to = &res.names[res.group_of[i]];
        if *to != t.name {
            renames.insert(t.name.clone(), to.clone());
        }
    }
    let mut assignment: HashMap<String, String> = existing
        .node_assignment
        .iter()
        .map(|(id, ty)| (id.clone(), renames.get(ty).unwrap_or(ty).clone()))
        .collect();
    let mut new_names = Vec::with_capacity(new.len());
    for (j, (_, members)) in new.into_iter().enumerate() {
        let name = res.names[res.group_of[old.len() + j]].clone();
        for m in members {
            assignment.insert(m, name.clone());
        }
        new_names.push(name);
    }
    if has_unknown {
        node_types.insert(UNKNOWN_NODE_TYPE.to_string(), unknown_node_type());
    }
    NodeStage {
        node_types,
        assignment,
        renames,
        new_names,
        has_unknown,
    }
}

struct EdgeStage {
    edge_types: BTreeMap<String, EdgeType>,
    assignment: HashMap<String, String>,
    renames: BTreeMap<String, String>,
}

fn integrate_edges(
    existing: &SchemaGraph,
    node_renames: &BTreeMap<String, String>,
    new: Vec<(EdgeType, Vec<String>)>,
    theta: f64,
) -> EdgeStage {
    let rename = |n: &String| node_renames.get(n).unwrap_or(n).clone();
    let old: Vec<EdgeType> = existing
        .edge_types
        .values()
        .map(|t| EdgeType {
            endpoints: t
                .endpoints
                .iter()
                .map(|(s, d)| (rename(s), rename(d)))
                .collect(),
            ..t.clone()
        })
        .collect();
    let drafts: Vec<Draft> = old
        .iter()
        .map(|t| Draft {
            name: Some(t.name.clone()),
            labels: t.labels.clone(),
            tokens: edge_tokens(t),
        })
        .chain(new.iter().map(|(t, _)| Draft {
            name: None,
            labels: t.labels.clone(),
            tokens: edge_tokens(t),
        }))
        .collect();
    let res = resolve(&drafts, theta, ABSTRACT_EDGE_PREFIX);

    let mut built: Vec<Option<EdgeType>> = vec![None; res.names.len()];
    let types = old
        .iter()
        .cloned()
        .chain(new.iter().map(|(t, _)| t.clone()));
    for (i, t) in types.enumerate() {
        let g = res.group_of[i];
        built[g] = Some(match built[g].take() {
            Some(acc) => merge_edge_types(&acc, &t),
            None => t,
        });
    }
    let mut edge_types = BTreeMap::new();
    for (g, t) in built.into_iter().enumerate() {
        let mut t = t.expect("every group has a member");
        t.name = res.names[g].clone();
        edge_types.insert(t.name.clone(), t);
    }

    let mut renames = BTreeMap::new();
    for (i, t) in old.iter().enumerate() {
        let to = &res.names[res.group_of[i]];
        if *to != t.name {
            renames.insert(t.name.clone(), to.clone());
        }
    }
    let mut assignment: HashMap<String, String> = existing
        .edge_assignment
        .iter()
        .map(|(id, ty)| (id.clone(), renames.get(ty).unwrap_or(ty).clone()))
        .collect();
    for (j, (_, members)) in new.into_iter().enumerate() {
        let name = &res.names[res.group_of[old.len() + j]];
        for m in members {
            assignment.insert(m, name.clone());
        }
    }
    EdgeStage {
        edge_types,
        assignment,
        renames,
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "theta must lie in [0, 1], got {theta}"
        )))
    }
}

fn assemble(nodes: NodeStage, edges: EdgeStage, needs_unknown: bool) -> Extraction {
    let mut node_types = nodes.node_types;
    if needs_unknown && !nodes.has_unknown {
        node_types.insert(UNKNOWN_NODE_TYPE.to_string(), unknown_node_type());
    }
    Extraction {
        schema: SchemaGraph {
            node_types,
            edge_types: edges.edge_types,
            node_assignment: nodes.assignment,
            edge_assignment: edges.assignment,
        },
        node_renames: nodes.renames,
        edge_renames: edges.renames,
    }
}

/// Integrates candidate types into `existing`.
///
/// Edge endpoints resolve through the node assignment; an endpoint node that
/// was never assigned falls back to the labeled node type with its label key,
/// then to the `UNKNOWN` node type.
pub fn extract_types(
    node_candidates: &[CandidateType],
    edge_candidates: &[CandidateType],
    existing: &SchemaGraph,
    theta: f64,
) -> Result<Extraction> {
    check_theta(theta)?;
    let new_nodes = node_candidates
        .iter()
        .map(|c| (fresh_node_type(&c.labels, &c.keys), c.members.clone()))
        .collect();
    let nodes = integrate_nodes(existing, new_nodes, theta);

    let mut needs_unknown = false;
    let mut resolve_end = |id: &str, key: &str| -> String {
        if let Some(t) = nodes.assignment.get(id) {
            return t.clone();
        }
        match nodes.node_types.get(key) {
            Some(t) if !key.is_empty() && !t.is_abstract => t.name.clone(),
            _ => {
                warn!("endpoint node `{id}` has no node type; using {UNKNOWN_NODE_TYPE}");
                needs_unknown = true;
                UNKNOWN_NODE_TYPE.to_string()
            }
        }
    };
    let mut new_edges = Vec::with_capacity(edge_candidates.len());
    for c in edge_candidates {
        let endpoints = c
            .member_ends
            .iter()
            .map(|e| {
                (
                    resolve_end(&e.src, &e.src_key),
                    resolve_end(&e.tgt, &e.tgt_key),
                )
            })
            .collect();
        let ty = EdgeType {
            name: String::new(),
            labels: c.labels.clone(),
            properties: c
                .keys
                .iter()
                .map(|k| (k.clone(), PropertySpec::default()))
                .collect(),
            endpoints,
            cardinality: None,
            is_abstract: c.labels.is_empty(),
        };
        new_edges.push((ty, c.members.clone()));
    }
    let edges = integrate_edges(existing, &nodes.renames, new_edges, theta);
    Ok(assemble(nodes, edges, needs_unknown))
}

fn members_by_type(assignment: &HashMap<String, String>) -> HashMap<&str, Vec<String>> {
    let mut out: HashMap<&str, Vec<String>> = HashMap::new();
    for (id, ty) in assignment {
        out.entry(ty.as_str()).or_default().push(id.clone());
    }
    for v in out.values_mut() {
        v.sort_unstable();
    }
    out
}

/// Least general schema covering both inputs. Names of `s1` take precedence;
/// ABSTRACT types of `s2` that match nothing in `s1` get fresh names.
pub fn merge_schemas_detailed(
    s1: &SchemaGraph,
    s2: &SchemaGraph,
    theta: f64,
) -> Result<Extraction> {
    check_theta(theta)?;
    let mut node_members = members_by_type(&s2.node_assignment);
    let s2_nodes: Vec<&NodeType> = s2
        .node_types
        .values()
        .filter(|t| t.name != UNKNOWN_NODE_TYPE)
        .collect();
    let new_nodes = s2_nodes
        .iter()
        .map(|t| {
            (
                (*t).clone(),
                node_members.remove(t.name.as_str()).unwrap_or_default(),
            )
        })
        .collect();
    let mut nodes = integrate_nodes(s1, new_nodes, theta);
    let s2_names: HashMap<&str, &str> = s2_nodes
        .iter()
        .zip(&nodes.new_names)
        .map(|(t, n)| (t.name.as_str(), n.as_str()))
        .collect();
    // members of s2's UNKNOWN type, if any
    for (id, ty) in &s2.node_assignment {
        if ty == UNKNOWN_NODE_TYPE {
            nodes.assignment.insert(id.clone(), ty.clone());
        }
    }

    let mut needs_unknown = s2.node_types.contains_key(UNKNOWN_NODE_TYPE);
    let map_node = |n: &String| -> String {
        s2_names
            .get(n.as_str())
            .map_or_else(|| n.clone(), |m| m.to_string())
    };
    let mut edge_members = members_by_type(&s2.edge_assignment);
    let new_edges: Vec<(EdgeType, Vec<String>)> = s2
        .edge_types
        .values()
        .map(|t| {
            let ty = EdgeType {
                name: String::new(),
                endpoints: t
                    .endpoints
                    .iter()
                    .map(|(s, d)| (map_node(s), map_node(d)))
                    .collect(),
                ..t.clone()
            };
            (ty, edge_members.remove(t.name.as_str()).unwrap_or_default())
        })
        .collect();
    needs_unknown |= new_edges.iter().any(|(t, _)| {
        t.endpoints
            .iter()
            .any(|(s, d)| s == UNKNOWN_NODE_TYPE || d == UNKNOWN_NODE_TYPE)
    });
    let edges = integrate_edges(s1, &nodes.renames, new_edges, theta);
    Ok(assemble(nodes, edges, needs_unknown))
}

pub fn merge_schemas(s1: &SchemaGraph, s2: &SchemaGraph, theta: f64) -> Result<SchemaGraph> {
    merge_schemas_detailed(s1, s2, theta).map(|x| x.schema)
}
