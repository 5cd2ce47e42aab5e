//! Candidate types, type extraction and schema merging.

mod candidates;
mod extract;

pub use candidates::{
    cluster_representative, edge_representative, jaccard, node_representative, CandidateType,
    EndpointRef,
};
pub use extract::{
    extract_types, merge_edge_types, merge_node_types, merge_schemas, merge_schemas_detailed,
    Extraction, ABSTRACT_EDGE_PREFIX, ABSTRACT_NODE_PREFIX, DEFAULT_THETA,
};
