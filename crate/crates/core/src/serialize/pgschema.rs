//! PG-Schema text output and a parser for the same grammar.
//!
//! ```text
//! schema := CREATE GRAPH TYPE name (LOOSE | STRICT) '{' [elem (',' elem)*] '}'
//! elem   := [ABSTRACT] (node | edge)
//! node   := '(' ident [':' labels] [props] ')'
//! edge   := '(' ':' ident ')' '-' '[' ident [':' labels] [props] ']' '-' '>' '(' ':' ident ')'
//!           ('|' '(' ':' ident ')' '-' '>' '(' ':' ident ')')* [comment]
//! labels := name ('&' name)*
//! props  := '{' [prop (',' prop)*] '}'
//! prop   := [OPTIONAL] name [datatype]        -- OPTIONAL and datatype only in STRICT
//! ```
//!
//! Names that are not plain identifiers (or collide with a keyword) are
//! wrapped in backticks, with embedded backticks doubled. Cardinalities are
//! carried as `/* N:1 */` comments after the edge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cardinality, Datatype, Presence, PropertySpec, SchemaGraph, UNKNOWN_NODE_TYPE};

pub const GRAPH_TYPE_NAME: &str = "DiscoveredGraph";
const KEYWORDS: [&str; 7] = [
    "CREATE", "GRAPH", "TYPE", "LOOSE", "STRICT", "ABSTRACT", "OPTIONAL",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemaMode {
    Loose,
    Strict,
}

impl SchemaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemaMode::Loose => "LOOSE",
            SchemaMode::Strict => "STRICT",
        }
    }
}

fn is_plain_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
        && Datatype::parse(s).is_none()
}

fn quote(s: &str) -> String {
    if is_plain_identifier(s) {
        s.to_string()
    } else {
        format!("`{}`", s.replace('`', "``"))
    }
}

/// Identifier per type name: non-alphanumeric characters dropped, `Type`
/// appended, collisions resolved with a numeric suffix in name order.
pub fn type_identifiers<'a, I>(names: I) -> BTreeMap<String, String>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut used = BTreeSet::new();
    let mut out = BTreeMap::new();
    for name in names {
        let mut base: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if !base.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
            base.insert(0, '_');
        }
        let mut ident = format!("{base}Type");
        let mut n = 2;
        while used.contains(&ident) {
            ident = format!("{base}_{n}Type");
            n += 1;
        }
        used.insert(ident.clone());
        out.insert(name.to_string(), ident);
    }
    out
}

fn write_labels(out: &mut String, labels: &BTreeSet<String>) {
    if !labels.is_empty() {
        let joined: Vec<String> = labels.iter().map(|l| quote(l)).collect();
        let _ = write!(out, " : {}", joined.join(" & "));
    }
}

fn write_props(out: &mut String, props: &BTreeMap<String, PropertySpec>, mode: SchemaMode) {
    if props.is_empty() {
        return;
    }
    let items: Vec<String> = props
        .iter()
        .map(|(k, spec)| match mode {
            SchemaMode::Loose => quote(k),
            SchemaMode::Strict => {
                let opt = if spec.presence == Some(Presence::Mandatory) {
                    ""
                } else {
                    "OPTIONAL "
                };
                let dt = spec.datatype.unwrap_or(Datatype::String);
                format!("{opt}{} {dt}", quote(k))
            }
        })
        .collect();
    let _ = write!(out, " {{ {} }}", items.join(", "));
}

/// Deterministic PG-Schema text. STRICT requires a post-processed schema.
pub fn emit_pg_schema(schema: &SchemaGraph, mode: SchemaMode) -> Result<String> {
    if mode == SchemaMode::Strict && !schema.is_postprocessed() {
        return Err(Error::NotPostprocessed(
            "STRICT output needs property constraints, datatypes and cardinalities".into(),
        ));
    }
    let ids = type_identifiers(
        schema
            .node_types
            .keys()
            .chain(schema.edge_types.keys())
            .map(String::as_str),
    );
    let unknown_id = type_identifiers([UNKNOWN_NODE_TYPE])
        .remove(UNKNOWN_NODE_TYPE)
        .unwrap_or_default();
    let node_id = |n: &String| ids.get(n).cloned().unwrap_or_else(|| unknown_id.clone());

    let mut elems = Vec::new();
    for t in schema.node_types.values() {
        let mut line = String::new();
        if t.is_abstract {
            line.push_str("ABSTRACT ");
        }
        let _ = write!(line, "({}", ids[&t.name]);
        write_labels(&mut line, &t.labels);
        write_props(&mut line, &t.properties, mode);
        line.push(')');
        elems.push(line);
    }
    for t in schema.edge_types.values() {
        let mut line = String::new();
        if t.is_abstract {
            line.push_str("ABSTRACT ");
        }
        let mut pairs = t.endpoints.iter();
        let (s0, d0) = match pairs.next() {
            Some((s, d)) => (node_id(s), node_id(d)),
            None => (unknown_id.clone(), unknown_id.clone()),
        };
        let _ = write!(line, "(:{s0})-[{}", ids[&t.name]);
        write_labels(&mut line, &t.labels);
        write_props(&mut line, &t.properties, mode);
        let _ = write!(line, "]->(:{d0})");
        for (s, d) in pairs {
            let _ = write!(line, " | (:{})->(:{})", node_id(s), node_id(d));
        }
        if mode == SchemaMode::Strict {
            if let Some(n) = t.cardinality.and_then(|c| c.class.notation()) {
                let _ = write!(line, " /* {n} */");
            }
        }
        elems.push(line);
    }

    let mut out = format!("CREATE GRAPH TYPE {GRAPH_TYPE_NAME} {} {{", mode.as_str());
    if elems.is_empty() {
        out.push_str(" }\n");
    } else {
        out.push('\n');
        out.push_str(
            &elems
                .iter()
                .map(|e| format!("  {e}"))
                .collect::<Vec<_>>()
                .join(",\n"),
        );
        out.push_str("\n}\n");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedProperty {
    pub key: String,
    pub optional: bool,
    pub datatype: Option<Datatype>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedNodeType {
    pub ident: String,
    pub labels: Vec<String>,
    pub properties: Vec<ParsedProperty>,
    pub is_abstract: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedEdgeType {
    pub ident: String,
    pub labels: Vec<String>,
    pub properties: Vec<ParsedProperty>,
    pub endpoints: Vec<(String, String)>,
    pub cardinality: Option<Cardinality>,
    pub is_abstract: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedSchema {
    pub name: String,
    pub mode: SchemaMode,
    pub node_types: Vec<ParsedNodeType>,
    pub edge_types: Vec<ParsedEdgeType>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Quoted(String),
    Punct(char),
    Comment(String),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let err = |line: usize, message: String| Error::Parse {
        path: "<pg-schema>".into(),
        line,
        message,
    };
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut body = String::new();
                loop {
                    match chars.next() {
                        Some('*') if chars.peek() == Some(&'/') => {
                            chars.next();
                            break;
                        }
                        Some(ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            body.push(ch);
                        }
                        None => return Err(err(line, "unterminated comment".into())),
                    }
                }
                toks.push((Tok::Comment(body.trim().to_string()), line));
            }
            '`' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('`') if chars.peek() == Some(&'`') => {
                            chars.next();
                            s.push('`');
                        }
                        Some('`') => break,
                        Some(ch) => s.push(ch),
                        None => return Err(err(line, "unterminated quoted name".into())),
                    }
                }
                toks.push((Tok::Quoted(s), line));
            }
            '(' | ')' | '{' | '}' | '[' | ']' | ':' | ',' | '&' | '|' | '-' | '>' => {
                toks.push((Tok::Punct(c), line))
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut s = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        s.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Word(s), line));
            }
            other => return Err(err(line, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    mode: SchemaMode,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            path: "<pg-schema>".into(),
            line: self.line(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn punct(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            other => self.fail(format!("expected `{c}`, found {other:?}")),
        }
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        if self.at_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{kw}`"))
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Word(w)) | Some(Tok::Quoted(w)) => Ok(w),
            other => self.fail(format!("expected a name, found {other:?}")),
        }
    }

    fn labels(&mut self) -> Result<Vec<String>> {
        let mut labels = Vec::new();
        if self.at_punct(':') {
            self.pos += 1;
            labels.push(self.name()?);
            while self.at_punct('&') {
                self.pos += 1;
                labels.push(self.name()?);
            }
        }
        Ok(labels)
    }

    fn props(&mut self) -> Result<Vec<ParsedProperty>> {
        let mut props = Vec::new();
        if !self.at_punct('{') {
            return Ok(props);
        }
        self.pos += 1;
        if self.at_punct('}') {
            self.pos += 1;
            return Ok(props);
        }
        loop {
            let optional = self.mode == SchemaMode::Strict && self.at_keyword("OPTIONAL");
            if optional {
                self.pos += 1;
            }
            let key = self.name()?;
            let datatype = if self.mode == SchemaMode::Strict {
                match self.next() {
                    Some(Tok::Word(w)) => match Datatype::parse(&w) {
                        Some(d) => Some(d),
                        None => return self.fail(format!("unknown datatype `{w}`")),
                    },
                    other => return self.fail(format!("expected a datatype, found {other:?}")),
                }
            } else {
                None
            };
            props.push(ParsedProperty {
                key,
                optional,
                datatype,
            });
            if self.at_punct(',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.punct('}')?;
        Ok(props)
    }

    fn endpoint(&mut self) -> Result<String> {
        self.punct('(')?;
        self.punct(':')?;
        let id = self.name()?;
        self.punct(')')?;
        Ok(id)
    }

    fn arrow(&mut self) -> Result<()> {
        self.punct('-')?;
        self.punct('>')
    }
}

pub fn parse_pg_schema(text: &str) -> Result<ParsedSchema> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        mode: SchemaMode::Loose,
    };
    p.keyword("CREATE")?;
    p.keyword("GRAPH")?;
    p.keyword("TYPE")?;
    let name = p.name()?;
    p.mode = match p.next() {
        Some(Tok::Word(w)) if w == "LOOSE" => SchemaMode::Loose,
        Some(Tok::Word(w)) if w == "STRICT" => SchemaMode::Strict,
        other => return p.fail(format!("expected LOOSE or STRICT, found {other:?}")),
    };
    p.punct('{')?;
    let mut schema = ParsedSchema {
        name,
        mode: p.mode,
        node_types: Vec::new(),
        edge_types: Vec::new(),
    };
    if p.at_punct('}') {
        p.pos += 1;
    } else {
        loop {
            let is_abstract = p.at_keyword("ABSTRACT");
            if is_abstract {
                p.pos += 1;
            }
            if p.toks.get(p.pos + 1).map(|(t, _)| t) == Some(&Tok::Punct(':')) {
                let src = p.endpoint()?;
                p.punct('-')?;
                p.punct('[')?;
                let ident = p.name()?;
                let labels = p.labels()?;
                let properties = p.props()?;
                p.punct(']')?;
                p.arrow()?;
                let tgt = p.endpoint()?;
                let mut endpoints = vec![(src, tgt)];
                while p.at_punct('|') {
                    p.pos += 1;
                    let s = p.endpoint()?;
                    p.arrow()?;
                    let t = p.endpoint()?;
                    endpoints.push((s, t));
                }
                let cardinality = match p.peek() {
                    Some(Tok::Comment(c)) => {
                        let parsed = Cardinality::from_notation(c);
                        if parsed.is_none() {
                            return p.fail(format!("unknown cardinality `{c}`"));
                        }
                        p.pos += 1;
                        parsed
                    }
                    _ => None,
                };
                schema.edge_types.push(ParsedEdgeType {
                    ident,
                    labels,
                    properties,
                    endpoints,
                    cardinality,
                    is_abstract,
                });
            } else {
                p.punct('(')?;
                let ident = p.name()?;
                let labels = p.labels()?;
                let properties = p.props()?;
                p.punct(')')?;
                schema.node_types.push(ParsedNodeType {
                    ident,
                    labels,
                    properties,
                    is_abstract,
                });
            }
            if p.at_punct(',') {
                p.pos += 1;
            } else {
                break;
            }
        }
        p.punct('}')?;
    }
    if p.pos < p.toks.len() {
        return p.fail("trailing input after schema");
    }
    Ok(schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CardinalityInfo, EdgeType, NodeType};

    fn spec(dt: Datatype, p: Presence) -> PropertySpec {
        PropertySpec {
            datatype: Some(dt),
            presence: Some(p),
        }
    }

    fn sample() -> SchemaGraph {
        let mut s = SchemaGraph::new();
        s.node_types.insert(
            "Person".into(),
            NodeType {
                name: "Person".into(),
                labels: ["Person".to_string()].into(),
                properties: [
                    (
                        "bday".to_string(),
                        spec(Datatype::Date, Presence::Mandatory),
                    ),
                    (
                        "name".to_string(),
                        spec(Datatype::String, Presence::Mandatory),
                    ),
                ]
                .into(),
                is_abstract: false,
            },
        );
        s.node_types.insert(
            "Org.".into(),
            NodeType {
                name: "Org.".into(),
                labels: ["Org.".to_string()].into(),
                properties: [(
                    "url".to_string(),
                    spec(Datatype::String, Presence::Optional),
                )]
                .into(),
                is_abstract: false,
            },
        );
        s.edge_types.insert(
            "WORKS_AT".into(),
            EdgeType {
                name: "WORKS_AT".into(),
                labels: ["WORKS_AT".to_string()].into(),
                properties: [(
                    "from".to_string(),
                    spec(Datatype::Integer, Presence::Mandatory),
                )]
                .into(),
                endpoints: [("Person".to_string(), "Org.".to_string())].into(),
                cardinality: Some(CardinalityInfo {
                    class: Cardinality::NToOne,
                    max_out: 1,
                    max_in: 2,
                }),
                is_abstract: false,
            },
        );
        s
    }

    #[test]
    fn empty_schema() {
        assert_eq!(
            emit_pg_schema(&SchemaGraph::new(), SchemaMode::Loose).unwrap(),
            "CREATE GRAPH TYPE DiscoveredGraph LOOSE { }\n"
        );
        let p = parse_pg_schema("CREATE GRAPH TYPE DiscoveredGraph LOOSE { }").unwrap();
        assert!(p.node_types.is_empty() && p.edge_types.is_empty());
    }

    #[test]
    fn strict_lines() {
        let text = emit_pg_schema(&sample(), SchemaMode::Strict).unwrap();
        assert!(
            text.contains("  (PersonType : Person { bday DATE, name STRING })"),
            "{text}"
        );
        assert!(
            text.contains("  (OrgType : `Org.` { OPTIONAL url STRING })"),
            "{text}"
        );
        assert!(
            text.contains(
                "  (:PersonType)-[WORKS_ATType : WORKS_AT { from INTEGER }]->(:OrgType) /* N:1 */"
            ),
            "{text}"
        );
        let parsed = parse_pg_schema(&text).unwrap();
        assert_eq!(parsed.mode, SchemaMode::Strict);
        assert_eq!(parsed.node_types.len(), 2);
        assert_eq!(parsed.edge_types[0].cardinality, Some(Cardinality::NToOne));
        assert_eq!(
            parsed.edge_types[0].endpoints,
            vec![("PersonType".into(), "OrgType".into())]
        );
    }

    #[test]
    fn loose_lists_keys_only() {
        let text = emit_pg_schema(&sample(), SchemaMode::Loose).unwrap();
        assert!(
            text.contains("(PersonType : Person { bday, name })"),
            "{text}"
        );
        assert!(!text.contains("STRING") && !text.contains("/*"));
        let parsed = parse_pg_schema(&text).unwrap();
        assert!(parsed
            .node_types
            .iter()
            .all(|n| n.properties.iter().all(|p| p.datatype.is_none())));
    }

    #[test]
    fn strict_needs_annotations() {
        let mut s = sample();
        s.node_types
            .get_mut("Person")
            .unwrap()
            .properties
            .get_mut("bday")
            .unwrap()
            .datatype = None;
        assert!(matches!(
            emit_pg_schema(&s, SchemaMode::Strict),
            Err(Error::NotPostprocessed(_))
        ));
    }

    #[test]
    fn identifiers_are_sanitized_and_unique() {
        let ids = type_identifiers(["Org", "Org.", "Person&Student", "9x"]);
        assert_eq!(ids["Org"], "OrgType");
        assert_eq!(ids["Org."], "Org_2Type");
        assert_eq!(ids["Person&Student"], "PersonStudentType");
        assert_eq!(ids["9x"], "_9xType");
    }

    #[test]
    fn quoting_round_trips() {
        assert_eq!(quote("OPTIONAL"), "`OPTIONAL`");
        assert_eq!(quote("a`b"), "`a``b`");
        let text = "CREATE GRAPH TYPE G STRICT {\n  ABSTRACT (XType : `a``b` & `OPTIONAL` { OPTIONAL `STRING` STRING })\n}";
        let p = parse_pg_schema(text).unwrap();
        assert_eq!(p.node_types[0].labels, vec!["a`b", "OPTIONAL"]);
        assert_eq!(p.node_types[0].properties[0].key, "STRING");
        assert!(p.node_types[0].properties[0].optional);
        assert!(parse_pg_schema("CREATE GRAPH TYPE G STRICT { (X { a WHAT }) }").is_err());
        assert!(parse_pg_schema("CREATE GRAPH TYPE G LOOSE { } extra").is_err());
    }
}
