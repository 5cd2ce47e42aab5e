use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::model::{Datatype, Presence, PropertySpec, SchemaGraph};

pub fn xsd_type(dt: Datatype) -> &'static str {
    match dt {
        Datatype::Integer => "xs:integer",
        Datatype::Float => "xs:double",
        Datatype::Boolean => "xs:boolean",
        Datatype::Date => "xs:date",
        Datatype::Datetime => "xs:dateTime",
        Datatype::String => "xs:string",
    }
}

/// Keeps `[A-Za-z0-9_.-]` and forces a letter or underscore first.
pub fn ncname(s: &str) -> String {
    let mut out: String = s
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        out.insert(0, '_');
    }
    out
}

fn unique_ncnames<'a>(names: impl IntoIterator<Item = &'a String>) -> BTreeMap<&'a str, String> {
    let mut used = BTreeSet::new();
    let mut out = BTreeMap::new();
    for name in names {
        let base = ncname(name);
        let mut candidate = base.clone();
        let mut n = 2;
        while used.contains(&candidate) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        used.insert(candidate.clone());
        out.insert(name.as_str(), candidate);
    }
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn write_type(out: &mut String, name: &str, doc: &str, props: &BTreeMap<String, PropertySpec>) {
    let _ = writeln!(out, "  <xs:complexType name=\"{}\">", escape(name));
    let _ = writeln!(
        out,
        "    <xs:annotation><xs:documentation>{}</xs:documentation></xs:annotation>",
        escape(doc)
    );
    if props.is_empty() {
        out.push_str("    <xs:sequence/>\n");
    } else {
        out.push_str("    <xs:sequence>\n");
        let names = unique_ncnames(props.keys());
        for (key, spec) in props {
            let min = if spec.presence == Some(Presence::Mandatory) {
                ""
            } else {
                " minOccurs=\"0\""
            };
            let _ = writeln!(
                out,
                "      <xs:element name=\"{}\" type=\"{}\"{min}/>",
                escape(&names[key.as_str()]),
                xsd_type(spec.datatype.unwrap_or(Datatype::String))
            );
        }
        out.push_str("    </xs:sequence>\n");
    }
    out.push_str("  </xs:complexType>\n");
}

/// One complexType per node and edge type; properties become elements and
/// non-mandatory ones carry `minOccurs="0"`.
pub fn emit_xsd(schema: &SchemaGraph) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">\n",
    );
    let names = unique_ncnames(schema.node_types.keys().chain(schema.edge_types.keys()));
    for t in schema.node_types.values() {
        let labels: Vec<&str> = t.labels.iter().map(String::as_str).collect();
        let doc = if t.is_abstract {
            "node type ABSTRACT".to_string()
        } else {
            format!("node type labels={}", labels.join("&"))
        };
        write_type(&mut out, &names[t.name.as_str()], &doc, &t.properties);
    }
    for t in schema.edge_types.values() {
        let labels: Vec<&str> = t.labels.iter().map(String::as_str).collect();
        let ends: Vec<String> = t
            .endpoints
            .iter()
            .map(|(s, d)| format!("{s}->{d}"))
            .collect();
        let mut doc = format!(
            "edge type labels={} endpoints={}",
            labels.join("&"),
            ends.join("|")
        );
        if let Some(n) = t.cardinality.and_then(|c| c.class.notation()) {
            let _ = write!(doc, " cardinality={n}");
        }
        write_type(&mut out, &names[t.name.as_str()], &doc, &t.properties);
    }
    out.push_str("</xs:schema>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeType;

    #[test]
    fn empty_schema_is_well_formed() {
        let x = emit_xsd(&SchemaGraph::new());
        let doc = roxmltree::Document::parse(&x).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "schema");
        assert_eq!(
            doc.root_element()
                .children()
                .filter(|n| n.is_element())
                .count(),
            0
        );
    }

    #[test]
    fn optional_properties_get_min_occurs() {
        let mut s = SchemaGraph::new();
        s.node_types.insert(
            "Post".into(),
            NodeType {
                name: "Post".into(),
                labels: ["Post".to_string()].into(),
                properties: [(
                    "imgFile".to_string(),
                    PropertySpec {
                        datatype: Some(Datatype::String),
                        presence: Some(Presence::Optional),
                    },
                )]
                .into(),
                is_abstract: false,
            },
        );
        let x = emit_xsd(&s);
        let doc = roxmltree::Document::parse(&x).unwrap();
        let el = doc
            .descendants()
            .find(|n| n.has_tag_name("element"))
            .unwrap();
        assert_eq!(el.attribute("name"), Some("imgFile"));
        assert_eq!(el.attribute("minOccurs"), Some("0"));
    }

    #[test]
    fn names_become_ncnames() {
        assert_eq!(ncname("Org."), "Org.");
        assert_eq!(ncname("Person&Student"), "PersonStudent");
        assert_eq!(ncname("1st"), "_1st");
        assert_eq!(ncname(""), "_");
    }
}
