//! Canonical JSON: object keys sorted, types sorted by name, two-space
//! indentation, trailing newline. Instance assignments are not included.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    CardinalityInfo, EdgeType, ElementKind, LabelSet, NodeType, PropertySpec, SchemaGraph,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CardinalityDoc {
    class: crate::model::Cardinality,
    max_out: u64,
    max_in: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeTypeDoc {
    name: String,
    labels: LabelSet,
    #[serde(rename = "abstract")]
    is_abstract: bool,
    properties: BTreeMap<String, PropertySpec>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeTypeDoc {
    name: String,
    labels: LabelSet,
    #[serde(rename = "abstract")]
    is_abstract: bool,
    properties: BTreeMap<String, PropertySpec>,
    endpoints: BTreeSet<(String, String)>,
    cardinality: Option<CardinalityDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SchemaDoc {
    node_types: Vec<NodeTypeDoc>,
    edge_types: Vec<EdgeTypeDoc>,
}

pub fn schema_to_value(schema: &SchemaGraph) -> serde_json::Value {
    let doc = SchemaDoc {
        node_types: schema
            .node_types
            .values()
            .map(|t| NodeTypeDoc {
                name: t.name.clone(),
                labels: t.labels.clone(),
                is_abstract: t.is_abstract,
                properties: t.properties.clone(),
            })
            .collect(),
        edge_types: schema
            .edge_types
            .values()
            .map(|t| EdgeTypeDoc {
                name: t.name.clone(),
                labels: t.labels.clone(),
                is_abstract: t.is_abstract,
                properties: t.properties.clone(),
                endpoints: t.endpoints.clone(),
                cardinality: t.cardinality.map(|c| CardinalityDoc {
                    class: c.class,
                    max_out: c.max_out,
                    max_in: c.max_in,
                }),
            })
            .collect(),
    };
    // serde_json's default map is ordered, so round-tripping through Value sorts keys
    serde_json::to_value(doc).expect("schema documents always serialize")
}

pub fn schema_to_json(schema: &SchemaGraph) -> String {
    let mut s =
        serde_json::to_string_pretty(&schema_to_value(schema)).expect("values always serialize");
    s.push('\n');
    s
}

/// Inverse of [`schema_to_json`]; assignments come back empty.
pub fn schema_from_json(text: &str) -> Result<SchemaGraph> {
    let doc: SchemaDoc = serde_json::from_str(text)?;
    let mut schema = SchemaGraph::new();
    for t in doc.node_types {
        schema.node_types.insert(
            t.name.clone(),
            NodeType {
                name: t.name,
                labels: t.labels,
                properties: t.properties,
                is_abstract: t.is_abstract,
            },
        );
    }
    for t in doc.edge_types {
        schema.edge_types.insert(
            t.name.clone(),
            EdgeType {
                name: t.name,
                labels: t.labels,
                properties: t.properties,
                endpoints: t.endpoints,
                cardinality: t.cardinality.map(|c| CardinalityInfo {
                    class: c.class,
                    max_out: c.max_out,
                    max_in: c.max_in,
                }),
                is_abstract: t.is_abstract,
            },
        );
    }
    if !schema.endpoints_resolve() {
        return Err(Error::InvalidConfig(
            "schema JSON has edge endpoints naming unknown node types".into(),
        ));
    }
    Ok(schema)
}

/// `element_id,kind,type` rows, nodes then edges, each sorted by id.
pub fn assignment_csv(schema: &SchemaGraph) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["element_id", "kind", "type"])?;
    for (kind, map) in [
        (ElementKind::Node, &schema.node_assignment),
        (ElementKind::Edge, &schema.edge_assignment),
    ] {
        let sorted: BTreeMap<&String, &String> = map.iter().collect();
        for (id, ty) in sorted {
            w.write_record([id.as_str(), kind.as_str(), ty.as_str()])?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output of utf-8 input is utf-8"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Datatype, Presence};

    #[test]
    fn keys_sorted_and_round_trip() {
        let mut s = SchemaGraph::new();
        s.node_types.insert(
            "Person".into(),
            NodeType {
                name: "Person".into(),
                labels: ["Person".to_string()].into(),
                properties: [(
                    "name".to_string(),
                    PropertySpec {
                        datatype: Some(Datatype::String),
                        presence: Some(Presence::Mandatory),
                    },
                )]
                .into(),
                is_abstract: false,
            },
        );
        s.node_assignment.insert("bob".into(), "Person".into());
        let text = schema_to_json(&s);
        let edge_pos = text.find("edgeTypes").unwrap();
        assert!(edge_pos < text.find("nodeTypes").unwrap());
        assert!(text.contains("\"datatype\": \"STRING\""));
        assert!(text.contains("\"presence\": \"MANDATORY\""));
        assert!(!text.contains("bob"));
        assert_eq!(schema_from_json(&text).unwrap(), s.types_only());
        assert_eq!(
            assignment_csv(&s).unwrap(),
            "element_id,kind,type\nbob,node,Person\n"
        );
    }
}
