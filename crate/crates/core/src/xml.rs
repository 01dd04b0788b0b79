//! The `.cmx` storage format: a `NewDataSet` of flat `Elements` records.
//!
//! ```xml
//! <?xml version="1.0" standalone="yes" ?>
//! <NewDataSet>
//!   <Elements>
//!     <Id>1</Id>
//!     <Type>Var</Type>
//!     <Name>MyVar</Name>
//!     <Left>100</Left>
//!     <Top>100</Top>
//!     <Width>100</Width>
//!     <Height>50</Height>
//!     <Prev>0</Prev>
//!     <Next>0</Next>
//!     <Description>No Description</Description>
//!   </Elements>
//! </NewDataSet>
//! ```
//!
//! Link fields by record type:
//!
//! * nodes and frames: `Prev` is the owning frame (`0` for top level);
//!   constants use `Next` for their concept.
//! * `TArc` / `RoleArc`: `Prev` is the source, `Next` the target. Role arcs
//!   carry the role's short letter in `Name`.
//! * `Frame`: an optional `<Simple>` field after `Description`.
//!
//! Arcs are members of the frame that owns their source node. Records with
//! all-zero `Width` and `Height` carry no geometry. Unknown child fields are
//! kept verbatim and written back after the known ones.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::frame::{
    Arc, ArcKind, ConceptDef, ConstantNode, ElementId, Frame, Model, PredicateKind,
    PredicateNode, Role, VariableNode, DEFAULT_DESCRIPTION,
};

pub const XML_DECLARATION: &str = r#"<?xml version="1.0" standalone="yes" ?>"#;

/// Default node size for newly placed or synthesized nodes.
pub const DEFAULT_WIDTH: u32 = 100;
pub const DEFAULT_HEIGHT: u32 = 50;

/// On-canvas box of an element, in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Geometry {
    pub left: i64,
    pub top: i64,
    pub width: u32,
    pub height: u32,
}

impl Geometry {
    pub fn new(left: i64, top: i64, width: u32, height: u32) -> Self {
        Self {
            left,
            top,
            width,
            height,
        }
    }

    pub fn at(left: i64, top: i64) -> Self {
        Self::new(left, top, DEFAULT_WIDTH, DEFAULT_HEIGHT)
    }

    pub fn right(&self) -> i64 {
        self.left + i64::from(self.width)
    }

    pub fn bottom(&self) -> i64 {
        self.top + i64::from(self.height)
    }
}

/// One `Elements` record, field for field. This is also the JSON wire shape
/// of a model element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XmlElementRecord {
    pub id: u32,
    #[serde(rename = "type")]
    pub type_tag: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub left: i64,
    #[serde(default)]
    pub top: i64,
    #[serde(default)]
    pub width: u32,
    #[serde(default)]
    pub height: u32,
    #[serde(default)]
    pub prev: u32,
    #[serde(default)]
    pub next: u32,
    #[serde(default = "default_description")]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simple: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<String>,
}

fn default_description() -> String {
    DEFAULT_DESCRIPTION.to_owned()
}

impl XmlElementRecord {
    pub fn geometry(&self) -> Option<Geometry> {
        (self.width != 0 || self.height != 0)
            .then(|| Geometry::new(self.left, self.top, self.width, self.height))
    }
}

pub const TYPE_TAGS: [&str; 9] = [
    "Concept", "Const", "Var", "Event", "Func", "Char", "TArc", "RoleArc", "Frame",
];

fn predicate_tag(kind: PredicateKind) -> &'static str {
    match kind {
        PredicateKind::Event => "Event",
        PredicateKind::Function => "Func",
        PredicateKind::Characteristic => "Char",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum XmlError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("record {id}: unknown element type {tag:?}")]
    UnknownElementType { id: u32, tag: String },
    #[error("record {id}: {message}")]
    InvalidRecord { id: u32, message: String },
}

impl XmlError {
    fn at(doc: &roxmltree::Document<'_>, node: roxmltree::Node<'_, '_>, message: String) -> Self {
        let pos = doc.text_pos_at(node.range().start);
        Self::Parse {
            line: pos.row,
            column: pos.col,
            message,
        }
    }
}

/// Reads the records of a `.cmx` document without interpreting them.
///
/// Text copied out of a browser's XML tree view carries a "- " collapse
/// marker before each expandable tag; such documents are accepted too.
pub fn parse_records(document: &str) -> Result<Vec<XmlElementRecord>, XmlError> {
    match parse_records_strict(document) {
        Err(e) => match strip_viewer_markers(document) {
            Some(cleaned) => parse_records_strict(&cleaned).map_err(|_| e),
            None => Err(e),
        },
        ok => ok,
    }
}

fn strip_viewer_markers(document: &str) -> Option<String> {
    let mut changed = false;
    let cleaned = document
        .split_inclusive('\n')
        .map(|line| {
            let body = line.trim_start();
            match body.strip_prefix("- <") {
                Some(rest) => {
                    changed = true;
                    format!("{}<{rest}", &line[..line.len() - body.len()])
                }
                None => line.to_owned(),
            }
        })
        .collect();
    changed.then_some(cleaned)
}

fn parse_records_strict(document: &str) -> Result<Vec<XmlElementRecord>, XmlError> {
    let doc = roxmltree::Document::parse(document).map_err(|e| {
        let pos = e.pos();
        XmlError::Parse {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "NewDataSet" {
        return Err(XmlError::at(
            &doc,
            root,
            format!("expected root <NewDataSet>, found <{}>", root.tag_name().name()),
        ));
    }
    let mut records = Vec::new();
    for child in root.children() {
        if child.is_text() {
            if child.text().is_some_and(|t| !t.trim().is_empty()) {
                return Err(XmlError::at(&doc, child, "unexpected text in <NewDataSet>".into()));
            }
            continue;
        }
        if !child.is_element() {
            continue;
        }
        if child.tag_name().name() != "Elements" {
            return Err(XmlError::at(
                &doc,
                child,
                format!("unexpected <{}> in <NewDataSet>", child.tag_name().name()),
            ));
        }
        records.push(parse_record(&doc, document, child)?);
    }
    Ok(records)
}

fn parse_record(
    doc: &roxmltree::Document<'_>,
    source: &str,
    node: roxmltree::Node<'_, '_>,
) -> Result<XmlElementRecord, XmlError> {
    let mut fields: BTreeMap<&str, (roxmltree::Node<'_, '_>, String)> = BTreeMap::new();
    let mut extra = Vec::new();
    for child in node.children().filter(|c| c.is_element()) {
        let tag = child.tag_name().name();
        let known = matches!(
            tag,
            "Id" | "Type" | "Name" | "Left" | "Top" | "Width" | "Height" | "Prev" | "Next"
                | "Description" | "Simple"
        );
        if !known || fields.contains_key(tag) {
            extra.push(source[child.range()].to_owned());
            continue;
        }
        let text: String = child
            .descendants()
            .filter(|d| d.is_text())
            .filter_map(|d| d.text())
            .collect();
        fields.insert(tag, (child, text));
    }

    fn number<T: std::str::FromStr>(
        doc: &roxmltree::Document<'_>,
        fields: &BTreeMap<&str, (roxmltree::Node<'_, '_>, String)>,
        tag: &str,
    ) -> Result<Option<T>, XmlError> {
        match fields.get(tag) {
            None => Ok(None),
            Some((n, text)) => text.trim().parse().map(Some).map_err(|_| {
                XmlError::at(doc, *n, format!("<{tag}> is not a valid number: {text:?}"))
            }),
        }
    }

    let id: u32 = number(doc, &fields, "Id")?
        .ok_or_else(|| XmlError::at(doc, node, "record without <Id>".into()))?;
    if id == 0 {
        return Err(XmlError::at(doc, node, "element id 0 is reserved".into()));
    }
    let type_tag = fields
        .get("Type")
        .map(|(_, t)| t.trim().to_owned())
        .ok_or_else(|| XmlError::at(doc, node, format!("record {id} without <Type>")))?;
    let simple = match fields.get("Simple") {
        None => None,
        Some((n, text)) => match text.trim() {
            "true" => Some(true),
            "false" => Some(false),
            other => {
                return Err(XmlError::at(doc, *n, format!("<Simple> must be true or false, got {other:?}")))
            }
        },
    };
    Ok(XmlElementRecord {
        id,
        type_tag,
        name: fields.get("Name").map(|(_, t)| t.clone()).unwrap_or_default(),
        left: number(doc, &fields, "Left")?.unwrap_or(0),
        top: number(doc, &fields, "Top")?.unwrap_or(0),
        width: number(doc, &fields, "Width")?.unwrap_or(0),
        height: number(doc, &fields, "Height")?.unwrap_or(0),
        prev: number(doc, &fields, "Prev")?.unwrap_or(0),
        next: number(doc, &fields, "Next")?.unwrap_or(0),
        description: fields
            .get("Description")
            .map(|(_, t)| t.clone())
            .unwrap_or_else(default_description),
        simple,
        extra,
    })
}

/// Builds a model from records. References to missing elements are kept so
/// that validation can report them.
pub fn records_to_model(records: &[XmlElementRecord]) -> Result<Model, XmlError> {
    let mut m = Model::new();
    let link = |r: &XmlElementRecord, value: u32, what: &str| {
        ElementId::new(value).ok_or_else(|| XmlError::InvalidRecord {
            id: r.id,
            message: format!("{} record needs a non-zero {what}", r.type_tag),
        })
    };
    for r in records {
        let id = ElementId::new(r.id).ok_or_else(|| XmlError::InvalidRecord {
            id: r.id,
            message: "element id 0 is reserved".into(),
        })?;
        match r.type_tag.as_str() {
            "Concept" => m.concepts.push(ConceptDef { id, name: r.name.clone() }),
            "Const" => m.constants.push(ConstantNode {
                id,
                name: r.name.clone(),
                concept: link(r, r.next, "Next (concept)")?,
            }),
            "Var" => m.variables.push(VariableNode { id, name: r.name.clone() }),
            "Event" | "Func" | "Char" => {
                let kind = match r.type_tag.as_str() {
                    "Event" => PredicateKind::Event,
                    "Func" => PredicateKind::Function,
                    _ => PredicateKind::Characteristic,
                };
                m.predicates.push(PredicateNode { id, name: r.name.clone(), kind });
            }
            "TArc" | "RoleArc" => {
                let kind = if r.type_tag == "TArc" {
                    ArcKind::Type
                } else {
                    let role = Role::from_short(r.name.trim()).ok_or_else(|| {
                        XmlError::InvalidRecord {
                            id: r.id,
                            message: format!("unknown role {:?}", r.name),
                        }
                    })?;
                    ArcKind::Role(role)
                };
                m.arcs.push(Arc {
                    id,
                    kind,
                    source: link(r, r.prev, "Prev (source)")?,
                    target: link(r, r.next, "Next (target)")?,
                });
            }
            "Frame" => m.frames.push(Frame {
                id,
                name: r.name.clone(),
                members: Default::default(),
                simple: r.simple.unwrap_or(false),
            }),
            other => {
                return Err(XmlError::UnknownElementType {
                    id: r.id,
                    tag: other.to_owned(),
                })
            }
        }
        if let Some(g) = r.geometry() {
            if g.width == 0 || g.height == 0 {
                return Err(XmlError::InvalidRecord {
                    id: r.id,
                    message: format!("geometry {}x{} must be at least 1x1", g.width, g.height),
                });
            }
            m.geometry.insert(id, g);
        }
        if r.description != DEFAULT_DESCRIPTION {
            m.descriptions.insert(id, r.description.clone());
        }
        if !r.extra.is_empty() {
            m.extra_fields.insert(id, r.extra.clone());
        }
    }

    // Frame membership from owner links.
    let is_arc = |t: &str| t == "TArc" || t == "RoleArc";
    let mut owned: Vec<(ElementId, ElementId)> = Vec::new();
    for r in records.iter().filter(|r| !is_arc(&r.type_tag) && r.prev != 0) {
        let (Some(owner), Some(id)) = (ElementId::new(r.prev), ElementId::new(r.id)) else {
            continue;
        };
        if m.frame(owner).is_some() {
            owned.push((owner, id));
        }
    }
    let node_owner: BTreeMap<ElementId, ElementId> = owned
        .iter()
        .filter(|(_, member)| m.frame(*member).is_none())
        .map(|&(owner, member)| (member, owner))
        .collect();
    for a in &m.arcs {
        if let Some(&owner) = node_owner.get(&a.source) {
            owned.push((owner, a.id));
        }
    }
    for (owner, member) in owned {
        if let Some(f) = m.frames.iter_mut().find(|f| f.id == owner) {
            f.members.insert(member);
        }
    }
    Ok(m)
}

/// Flattens a model into records ordered by id.
pub fn model_to_records(m: &Model) -> Vec<XmlElementRecord> {
    // Owner of a node or frame: the lowest-id frame listing it.
    let mut owner: BTreeMap<ElementId, ElementId> = BTreeMap::new();
    let mut frames: Vec<&Frame> = m.frames.iter().collect();
    frames.sort_by_key(|f| f.id);
    for f in frames {
        for &member in &f.members {
            owner.entry(member).or_insert(f.id);
        }
    }
    let owner_of = |id: ElementId| owner.get(&id).map_or(0, |o| o.get());

    let mut out: Vec<(u8, XmlElementRecord)> = Vec::with_capacity(m.element_count());
    let record = |rank: u8, id: ElementId, tag: &str, name: &str, prev: u32, next: u32| {
        let g = m.geometry.get(&id);
        (
            rank,
            XmlElementRecord {
                id: id.get(),
                type_tag: tag.to_owned(),
                name: name.to_owned(),
                left: g.map_or(0, |g| g.left),
                top: g.map_or(0, |g| g.top),
                width: g.map_or(0, |g| g.width),
                height: g.map_or(0, |g| g.height),
                prev,
                next,
                description: m.description(id).to_owned(),
                simple: None,
                extra: m.extra_fields.get(&id).cloned().unwrap_or_default(),
            },
        )
    };
    for c in &m.concepts {
        out.push(record(0, c.id, "Concept", &c.name, owner_of(c.id), 0));
    }
    for c in &m.constants {
        out.push(record(1, c.id, "Const", &c.name, owner_of(c.id), c.concept.get()));
    }
    for v in &m.variables {
        out.push(record(2, v.id, "Var", &v.name, owner_of(v.id), 0));
    }
    for p in &m.predicates {
        out.push(record(3, p.id, predicate_tag(p.kind), &p.name, owner_of(p.id), 0));
    }
    for a in &m.arcs {
        let (tag, name) = match a.kind {
            ArcKind::Type => ("TArc", "t"),
            ArcKind::Role(role) => ("RoleArc", role.short()),
        };
        out.push(record(4, a.id, tag, name, a.source.get(), a.target.get()));
    }
    for f in &m.frames {
        let mut r = record(5, f.id, "Frame", &f.name, owner_of(f.id), 0);
        r.1.simple = Some(f.simple);
        out.push(r);
    }
    // Stable: duplicated ids keep kind order, then collection order.
    out.sort_by_key(|(rank, r)| (r.id, *rank));
    out.into_iter().map(|(_, r)| r).collect()
}

/// Parses a `.cmx` document.
pub fn parse_model(document: &str) -> Result<Model, XmlError> {
    records_to_model(&parse_records(document)?)
}

/// Writes records in canonical form: two-space indent, LF line endings,
/// fixed field order.
pub fn write_records(records: &[XmlElementRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 320);
    out.push_str(XML_DECLARATION);
    out.push('\n');
    out.push_str("<NewDataSet>\n");
    for r in records {
        out.push_str("  <Elements>\n");
        let mut field = |tag: &str, value: &str| {
            let _ = writeln!(out, "    <{tag}>{}</{tag}>", escape_text(value));
        };
        field("Id", &r.id.to_string());
        field("Type", &r.type_tag);
        field("Name", &r.name);
        field("Left", &r.left.to_string());
        field("Top", &r.top.to_string());
        field("Width", &r.width.to_string());
        field("Height", &r.height.to_string());
        field("Prev", &r.prev.to_string());
        field("Next", &r.next.to_string());
        field("Description", &r.description);
        if let Some(simple) = r.simple {
            field("Simple", if simple { "true" } else { "false" });
        }
        for x in &r.extra {
            out.push_str("    ");
            out.push_str(x);
            out.push('\n');
        }
        out.push_str("  </Elements>\n");
    }
    out.push_str("</NewDataSet>\n");
    out
}

/// Serializes a model to canonical `.cmx` text.
pub fn serialize_model(m: &Model) -> String {
    write_records(&model_to_records(m))
}

pub(crate) fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MYVAR: &str = r#"<?xml version="1.0" standalone="yes" ?>
<NewDataSet>
  <Elements>
    <Id>1</Id>
    <Type>Var</Type>
    <Name>MyVar</Name>
    <Left>100</Left>
    <Top>100</Top>
    <Width>100</Width>
    <Height>50</Height>
    <Prev>0</Prev>
    <Next>0</Next>
    <Description>No Description</Description>
  </Elements>
</NewDataSet>
"#;

    #[test]
    fn accepts_tree_view_markers() {
        let viewed = "<?xml version=\"1.0\" standalone=\"yes\" ?>\n- <NewDataSet>\n- <Elements>\n  <Id>1</Id>\n  <Type>Var</Type>\n</Elements>\n</NewDataSet>\n";
        let records = parse_records(viewed).unwrap();
        assert_eq!((records[0].id, records[0].type_tag.as_str()), (1, "Var"));
        // Errors still point into the original text.
        assert!(matches!(parse_records("- <NewDataSet>\n<oops"), Err(XmlError::Parse { line: 1, .. })));
    }

    #[test]
    fn reads_the_reference_record() {
        let m = parse_model(MYVAR).unwrap();
        assert_eq!(m.variables.len(), 1);
        assert_eq!(m.element_count(), 1);
        let v = &m.variables[0];
        assert_eq!(v.name, "MyVar");
        assert_eq!(m.geometry[&v.id], Geometry::new(100, 100, 100, 50));
        assert_eq!(m.description(v.id), "No Description");
        let records = parse_records(MYVAR).unwrap();
        assert_eq!((records[0].prev, records[0].next), (0, 0));
    }

    #[test]
    fn reference_record_is_canonical() {
        assert_eq!(serialize_model(&parse_model(MYVAR).unwrap()), MYVAR);
    }

    #[test]
    fn empty_dataset() {
        let m = parse_model("<NewDataSet/>").unwrap();
        assert!(m.is_empty());
        assert_eq!(
            serialize_model(&m),
            format!("{XML_DECLARATION}\n<NewDataSet>\n</NewDataSet>\n")
        );
    }

    #[test]
    fn role_arc_record() {
        let doc = r#"<NewDataSet>
          <Elements><Id>1</Id><Type>Concept</Type><Name>C</Name></Elements>
          <Elements><Id>3</Id><Type>Event</Type><Name>e</Name></Elements>
          <Elements><Id>5</Id><Type>Var</Type><Name>v</Name></Elements>
          <Elements><Id>6</Id><Type>RoleArc</Type><Name>a</Name><Prev>3</Prev><Next>5</Next></Elements>
        </NewDataSet>"#;
        let m = parse_model(doc).unwrap();
        let p = &m.predicates[0];
        let roles = crate::frame::roles_of(p, &m);
        assert_eq!(roles.len(), 1);
        assert_eq!(roles[&Role::Agent].get(), 5);
        // Geometry-less records stay geometry-less.
        assert!(m.geometry.is_empty());
    }

    #[test]
    fn malformed_xml_reports_position() {
        let err = parse_model("<NewDataSet>\n  <Elements>\n</NewDataSet>").unwrap_err();
        match err {
            XmlError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_root_and_bad_numbers() {
        assert!(matches!(
            parse_model("<DataSet/>"),
            Err(XmlError::Parse { line: 1, column: 1, .. })
        ));
        let err = parse_model(
            "<NewDataSet>\n<Elements><Id>x</Id><Type>Var</Type></Elements></NewDataSet>",
        )
        .unwrap_err();
        assert!(matches!(err, XmlError::Parse { line: 2, column: 11, .. }), "{err:?}");
    }

    #[test]
    fn unknown_type_tag() {
        let err = parse_model("<NewDataSet><Elements><Id>1</Id><Type>Blob</Type></Elements></NewDataSet>")
            .unwrap_err();
        assert_eq!(
            err,
            XmlError::UnknownElementType {
                id: 1,
                tag: "Blob".into()
            }
        );
    }

    #[test]
    fn dangling_references_load() {
        let doc = "<NewDataSet><Elements><Id>4</Id><Type>TArc</Type><Prev>7</Prev><Next>8</Next></Elements></NewDataSet>";
        let m = parse_model(doc).unwrap();
        assert_eq!(m.arcs.len(), 1);
        let codes: Vec<_> = crate::frame::validate_model(&m).into_iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![crate::frame::DiagnosticCode::DanglingArc]);
    }

    #[test]
    fn unknown_fields_survive() {
        let doc = "<NewDataSet><Elements><Id>2</Id><Type>Concept</Type><Name>C</Name><Color kind=\"x\">red</Color></Elements></NewDataSet>";
        let m = parse_model(doc).unwrap();
        let text = serialize_model(&m);
        assert!(text.contains("    <Description>No Description</Description>\n    <Color kind=\"x\">red</Color>\n"));
        assert_eq!(serialize_model(&parse_model(&text).unwrap()), text);
    }

    #[test]
    fn frames_own_nodes_and_their_arcs() {
        let mut m = Model::new();
        let c = m.add_concept("C");
        let v = m.add_variable("v");
        let t = m.add_arc(ArcKind::Type, v, c);
        let inner = m.add_frame("inner", [v, t], true);
        m.add_frame("outer", [inner], false);
        let text = serialize_model(&m);
        assert!(text.contains("<Simple>true</Simple>"));
        assert_eq!(parse_model(&text).unwrap(), m);
    }

    #[test]
    fn escapes_markup_in_names() {
        let mut m = Model::new();
        let c = m.add_concept("A & <B>");
        m.descriptions.insert(c, "line1\nline2\r".into());
        let text = serialize_model(&m);
        assert!(text.contains("<Name>A &amp; &lt;B&gt;</Name>"));
        assert_eq!(parse_model(&text).unwrap(), m);
    }

    #[test]
    fn const_needs_concept_link() {
        let doc = "<NewDataSet><Elements><Id>2</Id><Type>Const</Type><Name>k</Name></Elements></NewDataSet>";
        assert!(matches!(parse_model(doc), Err(XmlError::InvalidRecord { id: 2, .. })));
    }

    #[test]
    fn degenerate_geometry_rejected() {
        let doc = "<NewDataSet><Elements><Id>2</Id><Type>Var</Type><Width>10</Width><Height>0</Height></Elements></NewDataSet>";
        assert!(matches!(parse_model(doc), Err(XmlError::InvalidRecord { id: 2, .. })));
    }
}
