// SPDX-License-Identifier: Apache-2.0

//! Reading and writing definitions as XML.
//!
//! ```xml
//! <definition version="1">
//!   <objects>
//!     <object typename="Range" typeguid=".." instanceguid=".." name="Range" x="0" y="0">
//!       <inputs>
//!         <port name="Domain" instanceguid="..">
//!           <source idref=".."/>
//!         </port>
//!       </inputs>
//!       <outputs>
//!         <port name="Range" instanceguid=".."/>
//!       </outputs>
//!     </object>
//!   </objects>
//!   <groups>
//!     <group instanceguid=".." name="g" color="ff0000ff"><id ref=".."/></group>
//!   </groups>
//! </definition>
//! ```
//!
//! Links are stored backwards: a port (or primitive component) lists the
//! guids it reads from. A source may name an entity defined later in the
//! file, so the reader creates placeholders and swaps in the real vertex
//! once its definition shows up.

use crate::dataflow::registry::{lookup_component_kind, ComponentClass, PrimitiveKind, GENERIC_PRIMITIVE};
use crate::graph::{EdgeKind, Group, Payload, TypedGraph, Vertex, VertexId, VertexKind};
use crate::param::{Accuracy, ListChoice, ParameterValue, Slider};
use base64::Engine as _;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

/// Type name given to sources that were never defined.
pub const PLACEHOLDER: &str = "Placeholder";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GhxError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("instance guid {0} is defined more than once")]
    DuplicateInstanceGuid(String),
}

fn malformed(msg: impl Into<String>) -> GhxError {
    GhxError::MalformedDocument(msg.into())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Document {
    pub version: u32,
    pub objects: Vec<ObjectChunk>,
    pub groups: Vec<GroupChunk>,
    /// Top-level elements this reader does not understand, verbatim.
    pub raw_unknown: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjectChunk {
    pub type_name: String,
    pub type_guid: String,
    pub instance_guid: String,
    pub name: String,
    pub position: [f64; 2],
    pub state: BTreeMap<String, String>,
    pub settings: BTreeMap<String, String>,
    /// Sources feeding a primitive component directly.
    pub sources: Vec<String>,
    pub inputs: Vec<PortChunk>,
    pub outputs: Vec<PortChunk>,
    pub cluster: Option<Vec<u8>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PortChunk {
    pub name: String,
    pub instance_guid: String,
    pub sources: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupChunk {
    pub instance_guid: String,
    pub name: String,
    pub color: [u8; 4],
    pub members: Vec<String>,
}

/// Parses XML text into a graph. Returns non-fatal warnings alongside.
pub fn parse_document(text: &str) -> Result<(TypedGraph, Vec<String>), GhxError> {
    Document::from_xml(text)?.to_graph()
}

/// Deterministic XML rendering of `graph`; objects are ordered by guid.
pub fn serialize_document(graph: &TypedGraph) -> String {
    Document::from_graph(graph).to_xml()
}

// ---------------------------------------------------------------- reading

fn attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str, GhxError> {
    node.attribute(name)
        .ok_or_else(|| malformed(format!("<{}> lacks attribute {name:?}", node.tag_name().name())))
}

fn attr_f64(node: roxmltree::Node<'_, '_>, name: &str) -> Result<f64, GhxError> {
    let raw = attr(node, name)?;
    raw.trim()
        .parse()
        .map_err(|_| malformed(format!("attribute {name}={raw:?} is not a number")))
}

fn elements<'a, 'i>(node: roxmltree::Node<'a, 'i>) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> {
    node.children().filter(|c| c.is_element())
}

fn sources(node: roxmltree::Node<'_, '_>) -> Result<Vec<String>, GhxError> {
    elements(node)
        .filter(|c| c.has_tag_name("source"))
        .map(|c| attr(c, "idref").map(str::to_string))
        .collect()
}

fn ports(node: roxmltree::Node<'_, '_>) -> Result<Vec<PortChunk>, GhxError> {
    elements(node)
        .filter(|c| c.has_tag_name("port"))
        .map(|p| {
            Ok(PortChunk {
                name: attr(p, "name")?.to_string(),
                instance_guid: attr(p, "instanceguid")?.to_string(),
                sources: sources(p)?,
            })
        })
        .collect()
}

fn parse_color(text: &str) -> Result<[u8; 4], GhxError> {
    let bad = || malformed(format!("color {text:?} is not rrggbbaa"));
    if text.len() != 8 || !text.is_ascii() {
        return Err(bad());
    }
    let mut out = [0u8; 4];
    for (i, b) in out.iter_mut().enumerate() {
        *b = u8::from_str_radix(&text[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
    }
    Ok(out)
}

impl Document {
    pub fn from_xml(text: &str) -> Result<Document, GhxError> {
        let xml = roxmltree::Document::parse(text).map_err(|e| malformed(e.to_string()))?;
        let root = xml.root_element();
        if !root.has_tag_name("definition") {
            return Err(malformed(format!("root element is <{}>", root.tag_name().name())));
        }
        let version = match root.attribute("version") {
            None => FORMAT_VERSION,
            Some(v) => v.trim().parse().map_err(|_| malformed(format!("bad version {v:?}")))?,
        };
        if version != FORMAT_VERSION {
            return Err(malformed(format!("unsupported version {version}")));
        }

        let mut doc = Document {
            version,
            ..Document::default()
        };
        for chunk in elements(root) {
            match chunk.tag_name().name() {
                "objects" => {
                    for o in elements(chunk).filter(|o| o.has_tag_name("object")) {
                        doc.objects.push(Self::object(o)?);
                    }
                }
                "groups" => {
                    for g in elements(chunk).filter(|g| g.has_tag_name("group")) {
                        doc.groups.push(GroupChunk {
                            instance_guid: attr(g, "instanceguid")?.to_string(),
                            name: g.attribute("name").unwrap_or_default().to_string(),
                            color: parse_color(g.attribute("color").unwrap_or("000000ff"))?,
                            members: elements(g)
                                .filter(|m| m.has_tag_name("id"))
                                .map(|m| attr(m, "ref").map(str::to_string))
                                .collect::<Result<_, _>>()?,
                        });
                    }
                }
                _ => doc.raw_unknown.push(text[chunk.range()].to_string()),
            }
        }
        Ok(doc)
    }

    fn object(o: roxmltree::Node<'_, '_>) -> Result<ObjectChunk, GhxError> {
        let mut obj = ObjectChunk {
            type_name: attr(o, "typename")?.to_string(),
            type_guid: o.attribute("typeguid").unwrap_or_default().to_string(),
            instance_guid: attr(o, "instanceguid")?.to_string(),
            name: o.attribute("name").unwrap_or_default().to_string(),
            position: [attr_f64(o, "x")?, attr_f64(o, "y")?],
            ..ObjectChunk::default()
        };
        for c in elements(o) {
            match c.tag_name().name() {
                "state" => {
                    obj.state = c
                        .attributes()
                        .map(|a| (a.name().to_string(), a.value().to_string()))
                        .collect()
                }
                "settings" => {
                    for s in elements(c).filter(|s| s.has_tag_name("setting")) {
                        obj.settings.insert(attr(s, "key")?.to_string(), attr(s, "value")?.to_string());
                    }
                }
                "sources" => obj.sources = sources(c)?,
                "inputs" => obj.inputs = ports(c)?,
                "outputs" => obj.outputs = ports(c)?,
                "cluster" => {
                    let body: String = c.text().unwrap_or_default().split_whitespace().collect();
                    obj.cluster = Some(
                        base64::engine::general_purpose::STANDARD
                            .decode(body)
                            .map_err(|e| malformed(format!("cluster body: {e}")))?,
                    );
                }
                other => log::debug!("ignoring <{other}> in object {}", obj.instance_guid),
            }
        }
        Ok(obj)
    }

    /// Builds the graph, resolving forward references through placeholders.
    /// Fails with `MalformedDocument` if the result breaks a graph invariant.
    pub fn to_graph(&self) -> Result<(TypedGraph, Vec<String>), GhxError> {
        let (graph, warnings) = self.to_graph_unchecked()?;
        let violations = graph.validate();
        if let Some(first) = violations.first() {
            return Err(malformed(format!("{first} ({} violation(s) in total)", violations.len())));
        }
        Ok((graph, warnings))
    }

    /// Like [`to_graph`](Self::to_graph) but returns the graph even when it
    /// is invalid, for diagnostics.
    pub fn to_graph_unchecked(&self) -> Result<(TypedGraph, Vec<String>), GhxError> {
        let mut b = Builder::default();
        for raw in &self.raw_unknown {
            let head: String = raw.chars().take(40).collect();
            b.warn(format!("unrecognized chunk kept verbatim: {head}"));
        }
        for obj in &self.objects {
            b.object(obj)?;
        }
        for g in &self.groups {
            if !b.defined.insert(g.instance_guid.clone()) {
                return Err(GhxError::DuplicateInstanceGuid(g.instance_guid.clone()));
            }
            b.graph.push_group_unchecked(Group {
                id: VertexId::from(g.instance_guid.as_str()),
                name: g.name.clone(),
                color: g.color,
                members: g.members.iter().map(|m| VertexId::from(m.as_str())).collect(),
            });
        }
        let mut unresolved: Vec<&String> = b.placeholders.iter().collect();
        unresolved.sort();
        let unresolved: Vec<String> = unresolved.into_iter().cloned().collect();
        for id in unresolved {
            b.warn(format!("source {id} is never defined; kept as a placeholder"));
        }

        Ok((b.graph, b.warnings))
    }
}

#[derive(Default)]
struct Builder {
    graph: TypedGraph,
    defined: HashSet<String>,
    placeholders: HashSet<String>,
    warnings: Vec<String>,
}

impl Builder {
    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    fn define(&mut self, v: Vertex) -> Result<(), GhxError> {
        let id = v.id.as_str().to_string();
        if !self.defined.insert(id.clone()) {
            return Err(GhxError::DuplicateInstanceGuid(id));
        }
        if self.placeholders.remove(&id) {
            self.graph.replace_vertex_unchecked(v);
        } else {
            self.graph
                .insert_vertex_unchecked(v)
                .map_err(|_| GhxError::DuplicateInstanceGuid(id))?;
        }
        Ok(())
    }

    fn link(&mut self, source: &str, target: &VertexId) {
        if !self.graph.contains(source) {
            let v = Vertex::new(VertexId::from(source), VertexKind::GenericPrimitive, PLACEHOLDER, "");
            self.graph.insert_vertex_unchecked(v).expect("absent id");
            self.placeholders.insert(source.to_string());
        }
        if !self
            .graph
            .insert_edge_unchecked(VertexId::from(source), target.clone(), EdgeKind::Link)
        {
            self.warn(format!("duplicate source {source} on {target} ignored"));
        }
    }

    fn object(&mut self, obj: &ObjectChunk) -> Result<(), GhxError> {
        let id = VertexId::from(obj.instance_guid.as_str());
        let has_ports = !obj.inputs.is_empty() || !obj.outputs.is_empty();
        let known = lookup_component_kind(&obj.type_name).ok();

        let mut v = Vertex::new(id.clone(), VertexKind::GenericPrimitive, obj.type_name.clone(), obj.name.clone());
        v.type_guid = obj.type_guid.clone();
        v.position = obj.position;
        v.settings = obj.settings.clone();

        if let Some(bytes) = &obj.cluster {
            v.payload = Payload::Opaque(bytes.clone());
        } else {
            match known.map(|d| d.class) {
                Some(ComponentClass::Primitive(p)) => {
                    v.kind = VertexKind::PrimitiveComponent;
                    v.payload = state_payload(p, &obj.state)?;
                }
                Some(ComponentClass::Io { .. }) => v.kind = VertexKind::IoComponent,
                None => {
                    if has_ports {
                        v.kind = VertexKind::IoComponent;
                    }
                    if obj.type_name != GENERIC_PRIMITIVE && obj.type_name != PLACEHOLDER {
                        self.warn(format!("unknown component type {:?} ({})", obj.type_name, obj.instance_guid));
                    }
                }
            }
        }
        if has_ports && v.kind != VertexKind::IoComponent {
            return Err(malformed(format!("{} ({}) cannot own ports", obj.instance_guid, obj.type_name)));
        }
        if !obj.sources.is_empty() && v.kind == VertexKind::IoComponent {
            return Err(malformed(format!("{}: sources belong on input ports", obj.instance_guid)));
        }
        self.define(v)?;
        for s in &obj.sources {
            self.link(s, &id);
        }

        for (list, kind) in [(&obj.inputs, VertexKind::InputPort), (&obj.outputs, VertexKind::OutputPort)] {
            for p in list {
                let pid = VertexId::from(p.instance_guid.as_str());
                let mut port = Vertex::new(pid.clone(), kind, format!("{kind:?}"), p.name.clone());
                port.owner = Some(id.clone());
                port.position = obj.position;
                self.define(port)?;
                if kind == VertexKind::InputPort {
                    self.graph.insert_edge_unchecked(pid.clone(), id.clone(), EdgeKind::Structural);
                    for s in &p.sources {
                        self.link(s, &pid);
                    }
                } else {
                    if !p.sources.is_empty() {
                        return Err(malformed(format!("output port {} lists sources", p.instance_guid)));
                    }
                    self.graph.insert_edge_unchecked(id.clone(), pid, EdgeKind::Structural);
                }
            }
        }
        Ok(())
    }
}

fn state_f64(state: &BTreeMap<String, String>, key: &str) -> Result<f64, GhxError> {
    let raw = state.get(key).ok_or_else(|| malformed(format!("state lacks {key:?}")))?;
    raw.trim()
        .parse()
        .map_err(|_| malformed(format!("state {key}={raw:?} is not a number")))
}

fn state_payload(kind: PrimitiveKind, state: &BTreeMap<String, String>) -> Result<Payload, GhxError> {
    if state.is_empty() {
        return Ok(kind.default_payload());
    }
    let get = |k: &str| state.get(k).map(String::as_str);
    Ok(match kind {
        PrimitiveKind::NumberSlider => {
            let accuracy: Accuracy = get("accuracy")
                .unwrap_or("Float")
                .parse()
                .map_err(|_| malformed(format!("unknown accuracy {:?}", get("accuracy"))))?;
            let mut s = Slider::new(
                state_f64(state, "value")?,
                state_f64(state, "min")?,
                state_f64(state, "max")?,
            )
            .with_accuracy(accuracy);
            if state.contains_key("epsilon") {
                s.epsilon = state_f64(state, "epsilon")?;
            }
            if let Some(d) = get("decimals") {
                s.decimals = d.trim().parse().map_err(|_| malformed(format!("bad decimals {d:?}")))?;
            }
            Payload::Parameter(ParameterValue::Slider(s))
        }
        PrimitiveKind::BooleanToggle => match get("value") {
            Some("true") => Payload::Parameter(ParameterValue::Toggle(true)),
            Some("false") => Payload::Parameter(ParameterValue::Toggle(false)),
            other => return Err(malformed(format!("toggle value {other:?}"))),
        },
        PrimitiveKind::Panel => Payload::Panel(get("text").unwrap_or_default().to_string()),
        PrimitiveKind::ListParameter => {
            let selected = get("selected-index").unwrap_or("0");
            Payload::Parameter(ParameterValue::List(ListChoice {
                items: split_items(get("items").unwrap_or_default()),
                selected: selected
                    .trim()
                    .parse()
                    .map_err(|_| malformed(format!("bad selected-index {selected:?}")))?,
            }))
        }
    })
}

/// Splits a pipe-separated list where `\|` and `\\` are escapes.
pub fn split_items(text: &str) -> Vec<String> {
    let mut items = vec![String::new()];
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(next) = chars.next() {
                    items.last_mut().expect("non-empty").push(next);
                }
            }
            '|' => items.push(String::new()),
            c => items.last_mut().expect("non-empty").push(c),
        }
    }
    items
}

pub fn join_items(items: &[String]) -> String {
    items
        .iter()
        .map(|i| i.replace('\\', "\\\\").replace('|', "\\|"))
        .collect::<Vec<_>>()
        .join("|")
}

// ---------------------------------------------------------------- writing

fn payload_state(payload: &Payload) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    match payload {
        Payload::Parameter(ParameterValue::Slider(s)) => {
            put("value", s.value.to_string());
            put("min", s.min.to_string());
            put("max", s.max.to_string());
            put("accuracy", s.accuracy.as_str().to_string());
            put("epsilon", s.epsilon.to_string());
            put("decimals", s.decimals.to_string());
        }
        Payload::Parameter(ParameterValue::Toggle(b)) => put("value", b.to_string()),
        Payload::Parameter(ParameterValue::List(l)) => {
            put("items", join_items(&l.items));
            put("selected-index", l.selected.to_string());
        }
        Payload::Panel(text) => put("text", text.clone()),
        Payload::None | Payload::Opaque(_) => {}
    }
    m
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn open_tag(out: &mut String, indent: usize, name: &str, attrs: &[(&str, &str)], close: bool) {
    out.push_str(&"  ".repeat(indent));
    out.push('<');
    out.push_str(name);
    for (k, v) in attrs {
        let _ = write!(out, " {k}=\"{}\"", escape(v));
    }
    out.push_str(if close { "/>\n" } else { ">\n" });
}

fn close_tag(out: &mut String, indent: usize, name: &str) {
    let _ = writeln!(out, "{}</{name}>", "  ".repeat(indent));
}

fn write_sources(out: &mut String, indent: usize, sources: &[String]) {
    for s in sources {
        open_tag(out, indent, "source", &[("idref", s)], true);
    }
}

impl Document {
    pub fn from_graph(graph: &TypedGraph) -> Document {
        let upstream = |id: &VertexId, owner: Option<&VertexId>| -> Vec<String> {
            graph
                .predecessors(id.as_str())
                .filter(|p| Some(*p) != owner)
                .map(|p| p.as_str().to_string())
                .collect()
        };
        let port_chunks = |list: Vec<&Vertex>| -> Vec<PortChunk> {
            list.into_iter()
                .map(|p| PortChunk {
                    name: p.label.clone(),
                    instance_guid: p.id.as_str().to_string(),
                    sources: if p.kind == VertexKind::InputPort {
                        upstream(&p.id, p.owner.as_ref())
                    } else {
                        Vec::new()
                    },
                })
                .collect()
        };

        let mut objects: Vec<ObjectChunk> = graph
            .vertices()
            .filter(|v| !v.kind.is_port())
            .map(|v| {
                let (inputs, outputs) = graph.ports(v.id.as_str());
                ObjectChunk {
                    type_name: v.type_name.clone(),
                    type_guid: v.type_guid.clone(),
                    instance_guid: v.id.as_str().to_string(),
                    name: v.label.clone(),
                    position: v.position,
                    state: payload_state(&v.payload),
                    settings: v.settings.clone(),
                    sources: if v.kind == VertexKind::IoComponent {
                        Vec::new()
                    } else {
                        upstream(&v.id, None)
                    },
                    inputs: port_chunks(inputs),
                    outputs: port_chunks(outputs),
                    cluster: match &v.payload {
                        Payload::Opaque(bytes) => Some(bytes.clone()),
                        _ => None,
                    },
                }
            })
            .collect();
        objects.sort_by(|a, b| a.instance_guid.cmp(&b.instance_guid));

        let mut groups: Vec<GroupChunk> = graph
            .groups()
            .iter()
            .map(|g| GroupChunk {
                instance_guid: g.id.as_str().to_string(),
                name: g.name.clone(),
                color: g.color,
                members: g.members.iter().map(|m| m.as_str().to_string()).collect(),
            })
            .collect();
        groups.sort_by(|a, b| a.instance_guid.cmp(&b.instance_guid));

        Document {
            version: FORMAT_VERSION,
            objects,
            groups,
            raw_unknown: Vec::new(),
        }
    }

    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(out, "<definition version=\"{}\">", self.version);

        if self.objects.is_empty() {
            open_tag(&mut out, 1, "objects", &[], true);
        } else {
            open_tag(&mut out, 1, "objects", &[], false);
            for o in &self.objects {
                self.write_object(&mut out, o);
            }
            close_tag(&mut out, 1, "objects");
        }

        if !self.groups.is_empty() {
            open_tag(&mut out, 1, "groups", &[], false);
            for g in &self.groups {
                let color: String = g.color.iter().map(|b| format!("{b:02x}")).collect();
                open_tag(
                    &mut out,
                    2,
                    "group",
                    &[("instanceguid", &g.instance_guid), ("name", &g.name), ("color", &color)],
                    false,
                );
                for m in &g.members {
                    open_tag(&mut out, 3, "id", &[("ref", m)], true);
                }
                close_tag(&mut out, 2, "group");
            }
            close_tag(&mut out, 1, "groups");
        }

        for raw in &self.raw_unknown {
            let _ = writeln!(out, "  {raw}");
        }
        out.push_str("</definition>\n");
        out
    }

    fn write_object(&self, out: &mut String, o: &ObjectChunk) {
        let (x, y) = (o.position[0].to_string(), o.position[1].to_string());
        open_tag(
            out,
            2,
            "object",
            &[
                ("typename", &o.type_name),
                ("typeguid", &o.type_guid),
                ("instanceguid", &o.instance_guid),
                ("name", &o.name),
                ("x", &x),
                ("y", &y),
            ],
            false,
        );
        if !o.state.is_empty() {
            let attrs: Vec<(&str, &str)> = o.state.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            open_tag(out, 3, "state", &attrs, true);
        }
        if !o.settings.is_empty() {
            open_tag(out, 3, "settings", &[], false);
            for (k, v) in &o.settings {
                open_tag(out, 4, "setting", &[("key", k), ("value", v)], true);
            }
            close_tag(out, 3, "settings");
        }
        if !o.sources.is_empty() {
            open_tag(out, 3, "sources", &[], false);
            write_sources(out, 4, &o.sources);
            close_tag(out, 3, "sources");
        }
        for (tag, list) in [("inputs", &o.inputs), ("outputs", &o.outputs)] {
            if list.is_empty() {
                continue;
            }
            open_tag(out, 3, tag, &[], false);
            for p in list {
                let attrs = [("name", p.name.as_str()), ("instanceguid", p.instance_guid.as_str())];
                if p.sources.is_empty() {
                    open_tag(out, 4, "port", &attrs, true);
                } else {
                    open_tag(out, 4, "port", &attrs, false);
                    write_sources(out, 5, &p.sources);
                    close_tag(out, 4, "port");
                }
            }
            close_tag(out, 3, tag);
        }
        if let Some(bytes) = &o.cluster {
            let _ = writeln!(
                out,
                "      <cluster>{}</cluster>",
                base64::engine::general_purpose::STANDARD.encode(bytes)
            );
        }
        close_tag(out, 2, "object");
    }
}
