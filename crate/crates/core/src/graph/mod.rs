// SPDX-License-Identifier: Apache-2.0

//! Typed dataflow graphs.
//!
//! A definition is a directed acyclic graph whose vertices are components
//! and their ports. Every vertex maps to one of four vertex types, and an
//! edge `(u, v)` is only allowed when `(type(u), type(v))` is an edge of the
//! fixed [`TypeGraph`]:
//!
//! ```text
//! InputPort  -> IOComponent      (structural)
//! IOComponent -> OutputPort      (structural)
//! OutputPort -> PComponent
//! PComponent -> InputPort
//! OutputPort -> InputPort
//! PComponent -> PComponent
//! ```
//!
//! Structural edges tie a port to its owning component. They are created
//! with the component and removed with it, never by link editing.

mod algo;
mod canonical;
mod validate;

pub use canonical::{CanonicalGraph, CanonicalVertex};
pub use validate::Violation;

use crate::dataflow::registry::{self, ComponentClass, GENERIC_PRIMITIVE};
use crate::param::{ParameterDescriptor, ParameterValue};
use indexmap::IndexMap;
use rustc_hash::{FxBuildHasher, FxHashMap};
use serde::{Deserialize, Serialize};
use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Globally unique vertex (or group) identifier, normally a UUID string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Self {
        VertexId(id.into())
    }

    pub fn random() -> Self {
        VertexId(uuid::Uuid::new_v4().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Deterministic child id, used for the ports of a component.
    pub fn derive(&self, tag: &str) -> VertexId {
        let namespace = uuid::Uuid::parse_str(&self.0)
            .unwrap_or_else(|_| uuid::Uuid::new_v5(&uuid::Uuid::NAMESPACE_OID, self.0.as_bytes()));
        VertexId(uuid::Uuid::new_v5(&namespace, tag.as_bytes()).to_string())
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for VertexId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexKind {
    IoComponent,
    InputPort,
    OutputPort,
    PrimitiveComponent,
    GenericPrimitive,
}

impl VertexKind {
    pub fn vertex_type(self) -> VertexType {
        match self {
            VertexKind::IoComponent => VertexType::IoComponent,
            VertexKind::InputPort => VertexType::InputPort,
            VertexKind::OutputPort => VertexType::OutputPort,
            VertexKind::PrimitiveComponent | VertexKind::GenericPrimitive => VertexType::PComponent,
        }
    }

    pub fn is_port(self) -> bool {
        matches!(self, VertexKind::InputPort | VertexKind::OutputPort)
    }
}

/// The four vertex types of the type graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexType {
    IoComponent,
    InputPort,
    OutputPort,
    PComponent,
}

/// The fixed type graph every definition is typed over.
pub struct TypeGraph;

impl TypeGraph {
    pub const VERTICES: [VertexType; 4] = [
        VertexType::IoComponent,
        VertexType::InputPort,
        VertexType::OutputPort,
        VertexType::PComponent,
    ];

    pub const EDGES: [(VertexType, VertexType); 6] = [
        (VertexType::InputPort, VertexType::IoComponent),
        (VertexType::IoComponent, VertexType::OutputPort),
        (VertexType::OutputPort, VertexType::PComponent),
        (VertexType::PComponent, VertexType::InputPort),
        (VertexType::OutputPort, VertexType::InputPort),
        (VertexType::PComponent, VertexType::PComponent),
    ];

    pub fn allows(from: VertexType, to: VertexType) -> bool {
        Self::EDGES.contains(&(from, to))
    }

    /// Type pairs reserved for port-to-owner edges.
    pub fn is_structural(from: VertexType, to: VertexType) -> bool {
        matches!(
            (from, to),
            (VertexType::InputPort, VertexType::IoComponent) | (VertexType::IoComponent, VertexType::OutputPort)
        )
    }
}

/// Kind-specific vertex state.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Payload {
    #[default]
    None,
    Parameter(ParameterValue),
    Panel(String),
    /// Uninterpreted bytes, e.g. a cluster body.
    Opaque(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub label: String,
    pub kind: VertexKind,
    /// Registry key for components; `InputPort`/`OutputPort` for ports.
    pub type_name: String,
    pub type_guid: String,
    /// Canvas units. Display only.
    pub position: [f64; 2],
    pub owner: Option<VertexId>,
    pub payload: Payload,
    /// Free-form component settings, e.g. fallback values for unconnected
    /// inputs keyed by port name.
    pub settings: BTreeMap<String, String>,
}

impl Vertex {
    pub fn new(id: VertexId, kind: VertexKind, type_name: impl Into<String>, label: impl Into<String>) -> Self {
        Vertex {
            id,
            label: label.into(),
            kind,
            type_name: type_name.into(),
            type_guid: String::new(),
            position: [0.0, 0.0],
            owner: None,
            payload: Payload::None,
            settings: BTreeMap::new(),
        }
    }

    pub fn parameter(&self) -> Option<&ParameterValue> {
        match &self.payload {
            Payload::Parameter(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Structural,
    Link,
}

/// Purely visual grouping of components.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    pub id: VertexId,
    pub name: String,
    pub color: [u8; 4],
    pub members: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error(transparent)]
    UnknownComponentType(#[from] registry::UnknownComponentType),
    #[error("no vertex {0}")]
    NoSuchVertex(VertexId),
    #[error("vertex {0} already exists")]
    DuplicateId(VertexId),
    #[error("{0} is a port; ports follow their component")]
    PortNotRemovable(VertexId),
    #[error("type graph has no edge {from:?} -> {to:?}")]
    TypeRuleViolation { from: VertexType, to: VertexType },
    #[error("port/component edges cannot be edited")]
    StructuralEdgeForbidden,
    #[error("link {0} -> {1} would close a cycle")]
    CycleWouldForm(VertexId, VertexId),
    #[error("link {0} -> {1} already exists")]
    DuplicateLink(VertexId, VertexId),
    #[error("no edge {0} -> {1}")]
    NoSuchEdge(VertexId, VertexId),
    #[error("graph contains a cycle through {0}")]
    Cycle(VertexId),
    #[error("a group needs at least one member")]
    EmptyGroup,
    #[error("{0} cannot be grouped")]
    InvalidGroupMember(VertexId),
    #[error("no group {0}")]
    NoSuchGroup(VertexId),
}

#[derive(Clone, Debug, Default)]
pub struct TypedGraph {
    vertices: IndexMap<VertexId, Vertex, FxBuildHasher>,
    edges: BTreeMap<(VertexId, VertexId), EdgeKind>,
    succ: FxHashMap<VertexId, BTreeMap<VertexId, EdgeKind>>,
    pred: FxHashMap<VertexId, BTreeSet<VertexId>>,
    groups: Vec<Group>,
}

impl TypedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vertices.contains_key(id)
    }

    /// Vertices in insertion order.
    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&VertexId, &VertexId, EdgeKind)> {
        self.edges.iter().map(|((a, b), k)| (a, b, *k))
    }

    pub fn edge_kind(&self, from: &str, to: &str) -> Option<EdgeKind> {
        self.succ.get(from)?.get(to).copied()
    }

    pub fn successors(&self, id: &str) -> impl Iterator<Item = &VertexId> {
        self.succ.get(id).into_iter().flat_map(BTreeMap::keys)
    }

    pub fn predecessors(&self, id: &str) -> impl Iterator<Item = &VertexId> {
        self.pred.get(id).into_iter().flatten()
    }

    pub fn in_degree(&self, id: &str) -> usize {
        self.pred.get(id).map_or(0, BTreeSet::len)
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Input and output ports of a component, each in declaration order.
    pub fn ports(&self, component: &str) -> (Vec<&Vertex>, Vec<&Vertex>) {
        let mut ports: Vec<&Vertex> = self
            .predecessors(component)
            .chain(self.successors(component))
            .filter_map(|id| self.vertices.get(id))
            .filter(|v| v.owner.as_ref().is_some_and(|o| o.as_str() == component))
            .collect();
        ports.sort_by_key(|v| self.vertices.get_index_of(&v.id));
        ports.into_iter().partition(|v| v.kind == VertexKind::InputPort)
    }

    pub fn port_named(&self, component: &str, kind: VertexKind, name: &str) -> Option<&Vertex> {
        let (inputs, outputs) = self.ports(component);
        let list = if kind == VertexKind::InputPort { inputs } else { outputs };
        list.into_iter().find(|p| p.label == name)
    }

    pub fn parameter(&self, id: &str) -> Option<&ParameterValue> {
        self.vertex(id).and_then(Vertex::parameter)
    }

    pub fn parameter_mut(&mut self, id: &str) -> Option<&mut ParameterValue> {
        match &mut self.vertices.get_mut(id)?.payload {
            Payload::Parameter(p) => Some(p),
            _ => None,
        }
    }

    /// All adjustable parameters as shared with clients, in insertion order.
    pub fn parameters(&self) -> Vec<ParameterDescriptor> {
        self.vertices()
            .filter_map(|v| {
                v.parameter().map(|p| ParameterDescriptor {
                    guid: v.id.to_string(),
                    name: v.label.clone(),
                    value: p.clone(),
                })
            })
            .collect()
    }

    pub fn set_payload(&mut self, id: &str, payload: Payload) -> Result<(), GraphError> {
        let v = self.vertices.get_mut(id).ok_or_else(|| GraphError::NoSuchVertex(id.into()))?;
        v.payload = payload;
        Ok(())
    }

    pub fn set_label(&mut self, id: &str, label: impl Into<String>) -> Result<(), GraphError> {
        let v = self.vertices.get_mut(id).ok_or_else(|| GraphError::NoSuchVertex(id.into()))?;
        v.label = label.into();
        Ok(())
    }

    pub fn set_setting(&mut self, id: &str, key: impl Into<String>, value: impl Into<String>) -> Result<(), GraphError> {
        let v = self.vertices.get_mut(id).ok_or_else(|| GraphError::NoSuchVertex(id.into()))?;
        v.settings.insert(key.into(), value.into());
        Ok(())
    }

    /// Adds a component of a registered type, with its ports.
    pub fn add_component(&mut self, type_name: &str, label: &str, position: [f64; 2]) -> Result<VertexId, GraphError> {
        self.add_component_with_id(VertexId::random(), type_name, label, position)
    }

    /// Like [`add_component`](Self::add_component) with a caller-chosen id.
    /// Port ids are derived from the component id and port name.
    pub fn add_component_with_id(
        &mut self,
        id: VertexId,
        type_name: &str,
        label: &str,
        position: [f64; 2],
    ) -> Result<VertexId, GraphError> {
        if self.contains(id.as_str()) {
            return Err(GraphError::DuplicateId(id));
        }
        if type_name == GENERIC_PRIMITIVE {
            let mut v = Vertex::new(id.clone(), VertexKind::GenericPrimitive, GENERIC_PRIMITIVE, label);
            v.position = position;
            self.insert_vertex_unchecked(v)?;
            return Ok(id);
        }
        let desc = registry::lookup_component_kind(type_name)?;
        let kind = match desc.class {
            ComponentClass::Primitive(_) => VertexKind::PrimitiveComponent,
            ComponentClass::Io { .. } => VertexKind::IoComponent,
        };
        let port_ids: Vec<VertexId> = desc
            .inputs()
            .iter()
            .map(|p| id.derive(&format!("in:{}", p.name)))
            .chain(desc.outputs().iter().map(|p| id.derive(&format!("out:{p}"))))
            .collect();
        if let Some(clash) = port_ids.iter().find(|p| self.contains(p.as_str())) {
            return Err(GraphError::DuplicateId(clash.clone()));
        }

        let mut v = Vertex::new(id.clone(), kind, desc.name, label);
        v.type_guid = desc.type_guid.to_string();
        v.position = position;
        if let ComponentClass::Primitive(p) = desc.class {
            v.payload = p.default_payload();
        }
        self.insert_vertex_unchecked(v)?;

        let mut port_ids = port_ids.into_iter();
        for spec in desc.inputs() {
            let pid = port_ids.next().expect("one id per port");
            self.insert_port(&id, pid, VertexKind::InputPort, spec.name, position);
        }
        for name in desc.outputs() {
            let pid = port_ids.next().expect("one id per port");
            self.insert_port(&id, pid, VertexKind::OutputPort, name, position);
        }
        Ok(id)
    }

    fn insert_port(&mut self, owner: &VertexId, id: VertexId, kind: VertexKind, name: &str, position: [f64; 2]) {
        let mut port = Vertex::new(id.clone(), kind, format!("{kind:?}"), name);
        port.owner = Some(owner.clone());
        port.position = position;
        self.vertices.insert(id.clone(), port);
        if kind == VertexKind::InputPort {
            self.insert_edge_unchecked(id, owner.clone(), EdgeKind::Structural);
        } else {
            self.insert_edge_unchecked(owner.clone(), id, EdgeKind::Structural);
        }
    }

    /// Links `from` into the input port `input` of component `to`. The
    /// source is `from`'s first output port when it has one, else `from`.
    pub fn connect(&mut self, from: &str, to: &str, input: &str) -> Result<(), GraphError> {
        if !self.contains(from) {
            return Err(GraphError::NoSuchVertex(from.into()));
        }
        let source = match self.ports(from).1.first() {
            Some(p) => p.id.clone(),
            None => VertexId::from(from),
        };
        let target = self
            .port_named(to, VertexKind::InputPort, input)
            .map(|p| p.id.clone())
            .ok_or_else(|| GraphError::NoSuchVertex(VertexId::new(format!("{to}:{input}"))))?;
        self.add_link(source.as_str(), target.as_str())
    }

    /// Adds a user link. Rejects type-rule violations, port/owner edges,
    /// duplicates and anything that would close a cycle.
    pub fn add_link(&mut self, from: &str, to: &str) -> Result<(), GraphError> {
        let a = self.vertex(from).ok_or_else(|| GraphError::NoSuchVertex(from.into()))?;
        let b = self.vertex(to).ok_or_else(|| GraphError::NoSuchVertex(to.into()))?;
        let (ta, tb) = (a.kind.vertex_type(), b.kind.vertex_type());
        if !TypeGraph::allows(ta, tb) {
            return Err(GraphError::TypeRuleViolation { from: ta, to: tb });
        }
        if TypeGraph::is_structural(ta, tb) || is_owner_pair(a, b) {
            return Err(GraphError::StructuralEdgeForbidden);
        }
        if self.succ.get(from).is_some_and(|s| s.contains_key(to)) {
            return Err(GraphError::DuplicateLink(from.into(), to.into()));
        }
        if self.reaches(to, from) {
            return Err(GraphError::CycleWouldForm(from.into(), to.into()));
        }
        let (from, to) = (a.id.clone(), b.id.clone());
        self.insert_edge_unchecked(from, to, EdgeKind::Link);
        Ok(())
    }

    pub fn remove_link(&mut self, from: &str, to: &str) -> Result<(), GraphError> {
        match self.edge_kind(from, to) {
            None => Err(GraphError::NoSuchEdge(from.into(), to.into())),
            Some(EdgeKind::Structural) => Err(GraphError::StructuralEdgeForbidden),
            Some(EdgeKind::Link) => {
                self.remove_edge_unchecked(from, to);
                Ok(())
            }
        }
    }

    /// Removes a component with its ports and every incident edge. Groups
    /// left without members are deleted.
    pub fn remove_component(&mut self, id: &str) -> Result<Vertex, GraphError> {
        let v = self.vertex(id).ok_or_else(|| GraphError::NoSuchVertex(id.into()))?;
        if v.kind.is_port() {
            return Err(GraphError::PortNotRemovable(v.id.clone()));
        }
        let (inputs, outputs) = self.ports(id);
        let ports: Vec<VertexId> = inputs.into_iter().chain(outputs).map(|p| p.id.clone()).collect();
        for p in &ports {
            self.remove_vertex_unchecked(p.as_str());
        }
        let removed = self.remove_vertex_unchecked(id).expect("checked above");
        for g in &mut self.groups {
            g.members.retain(|m| m.as_str() != id);
        }
        self.groups.retain(|g| !g.members.is_empty());
        Ok(removed)
    }

    pub fn move_component(&mut self, id: &str, position: [f64; 2]) -> Result<(), GraphError> {
        let v = self.vertex(id).ok_or_else(|| GraphError::NoSuchVertex(id.into()))?;
        if v.kind.is_port() {
            return Err(GraphError::PortNotRemovable(v.id.clone()));
        }
        let (inputs, outputs) = self.ports(id);
        let ports: Vec<VertexId> = inputs.into_iter().chain(outputs).map(|p| p.id.clone()).collect();
        for p in ports.iter().map(VertexId::as_str).chain([id]) {
            if let Some(v) = self.vertices.get_mut(p) {
                v.position = position;
            }
        }
        Ok(())
    }

    pub fn create_group(&mut self, members: &[VertexId], name: &str, color: [u8; 4]) -> Result<VertexId, GraphError> {
        if members.is_empty() {
            return Err(GraphError::EmptyGroup);
        }
        let mut unique = Vec::with_capacity(members.len());
        for m in members {
            let v = self.vertex(m.as_str()).ok_or_else(|| GraphError::NoSuchVertex(m.clone()))?;
            if v.kind.is_port() {
                return Err(GraphError::InvalidGroupMember(m.clone()));
            }
            if !unique.contains(m) {
                unique.push(m.clone());
            }
        }
        let id = VertexId::random();
        self.groups.push(Group {
            id: id.clone(),
            name: name.to_string(),
            color,
            members: unique,
        });
        Ok(id)
    }

    pub fn dissolve_group(&mut self, id: &str) -> Result<Group, GraphError> {
        let idx = self
            .groups
            .iter()
            .position(|g| g.id.as_str() == id)
            .ok_or_else(|| GraphError::NoSuchGroup(id.into()))?;
        Ok(self.groups.remove(idx))
    }

    /// Whether `to` is reachable from `from` (a vertex reaches itself).
    pub fn reaches(&self, from: &str, to: &str) -> bool {
        if from == to {
            return true;
        }
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for s in self.successors(v) {
                if s.as_str() == to {
                    return true;
                }
                if seen.insert(s.as_str()) {
                    stack.push(s.as_str());
                }
            }
        }
        false
    }

    // Low-level mutation without invariant checks. Used by the document
    // reader and by tests that need to build invalid graphs.

    #[doc(hidden)]
    pub fn insert_vertex_unchecked(&mut self, v: Vertex) -> Result<(), GraphError> {
        if self.contains(v.id.as_str()) {
            return Err(GraphError::DuplicateId(v.id));
        }
        self.vertices.insert(v.id.clone(), v);
        Ok(())
    }

    /// Replaces a vertex's data, moving it to the end of the insertion order
    /// while keeping its edges.
    #[doc(hidden)]
    pub fn replace_vertex_unchecked(&mut self, v: Vertex) -> Option<Vertex> {
        let old = self.vertices.shift_remove(v.id.as_str());
        self.vertices.insert(v.id.clone(), v);
        old
    }

    #[doc(hidden)]
    pub fn vertex_mut_unchecked(&mut self, id: &str) -> Option<&mut Vertex> {
        self.vertices.get_mut(id)
    }

    #[doc(hidden)]
    pub fn insert_edge_unchecked(&mut self, from: VertexId, to: VertexId, kind: EdgeKind) -> bool {
        let fresh = self.succ.entry(from.clone()).or_default().insert(to.clone(), kind).is_none();
        self.pred.entry(to.clone()).or_default().insert(from.clone());
        self.edges.insert((from, to), kind);
        fresh
    }

    #[doc(hidden)]
    pub fn remove_edge_unchecked(&mut self, from: &str, to: &str) -> Option<EdgeKind> {
        let removed = self.succ.get_mut(from).is_some_and(|s| s.remove(to).is_some());
        if !removed {
            return None;
        }
        if let Some(p) = self.pred.get_mut(to) {
            p.remove(from);
        }
        self.edges.remove(&(VertexId::from(from), VertexId::from(to)))
    }

    #[doc(hidden)]
    pub fn remove_vertex_unchecked(&mut self, id: &str) -> Option<Vertex> {
        let v = self.vertices.shift_remove(id)?;
        for s in self.succ.remove(id).unwrap_or_default().into_keys() {
            if let Some(p) = self.pred.get_mut(&s) {
                p.remove(id);
            }
            self.edges.remove(&(v.id.clone(), s));
        }
        for p in self.pred.remove(id).unwrap_or_default() {
            if let Some(s) = self.succ.get_mut(&p) {
                s.remove(id);
            }
            self.edges.remove(&(p, v.id.clone()));
        }
        Some(v)
    }

    #[doc(hidden)]
    pub fn push_group_unchecked(&mut self, group: Group) {
        self.groups.push(group);
    }
}

fn is_owner_pair(a: &Vertex, b: &Vertex) -> bool {
    a.owner.as_ref() == Some(&b.id) || b.owner.as_ref() == Some(&a.id)
}
