//! PG-Schema (LOOSE/STRICT), XSD and canonical JSON output.

mod json;
mod pgschema;
mod xsd;

pub use json::{assignment_csv, schema_from_json, schema_to_json, schema_to_value, write_text};
pub use pgschema::{
    emit_pg_schema, parse_pg_schema, type_identifiers, ParsedEdgeType, ParsedNodeType,
    ParsedProperty, ParsedSchema, SchemaMode, GRAPH_TYPE_NAME,
};
pub use xsd::{emit_xsd, ncname, xsd_type};
