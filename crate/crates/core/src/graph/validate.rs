// SPDX-License-Identifier: Apache-2.0

use super::{EdgeKind, Payload, TypeGraph, TypedGraph, VertexId, VertexKind, VertexType};
use std::fmt;

/// A broken graph invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DanglingEdge { from: VertexId, to: VertexId },
    EdgeType { from: VertexId, to: VertexId, types: (VertexType, VertexType) },
    /// A port/component type pair between a port and something other than
    /// its owner.
    ForeignStructuralEdge { from: VertexId, to: VertexId },
    EdgeKindMismatch { from: VertexId, to: VertexId, kind: EdgeKind },
    Cycle(VertexId),
    PortWithoutOwner(VertexId),
    OwnerMissing { port: VertexId, owner: VertexId },
    OwnerNotIoComponent { port: VertexId, owner: VertexId },
    MissingStructuralEdge(VertexId),
    OwnedNonPort(VertexId),
    EmptyGroup(VertexId),
    BadGroupMember { group: VertexId, member: VertexId },
    InconsistentParameter(VertexId),
    PayloadMismatch(VertexId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEdge { from, to } => write!(f, "edge {from} -> {to} has a missing endpoint"),
            Violation::EdgeType { from, to, types } => {
                write!(f, "edge {from} -> {to} has disallowed types {:?} -> {:?}", types.0, types.1)
            }
            Violation::ForeignStructuralEdge { from, to } => {
                write!(f, "edge {from} -> {to} joins a port to a component that does not own it")
            }
            Violation::EdgeKindMismatch { from, to, kind } => {
                write!(f, "edge {from} -> {to} is flagged {kind:?} but its endpoints say otherwise")
            }
            Violation::Cycle(v) => write!(f, "cycle through {v}"),
            Violation::PortWithoutOwner(p) => write!(f, "port {p} has no owner"),
            Violation::OwnerMissing { port, owner } => write!(f, "port {port} is owned by missing vertex {owner}"),
            Violation::OwnerNotIoComponent { port, owner } => {
                write!(f, "port {port} is owned by {owner}, which is not an IO component")
            }
            Violation::MissingStructuralEdge(p) => write!(f, "port {p} is not connected to its owner"),
            Violation::OwnedNonPort(v) => write!(f, "non-port vertex {v} has an owner"),
            Violation::EmptyGroup(g) => write!(f, "group {g} has no members"),
            Violation::BadGroupMember { group, member } => {
                write!(f, "group {group} lists {member}, which is missing or a port")
            }
            Violation::InconsistentParameter(v) => write!(f, "parameter {v} holds a value outside its constraints"),
            Violation::PayloadMismatch(v) => write!(f, "vertex {v} carries a payload its kind cannot hold"),
        }
    }
}

impl TypedGraph {
    /// Re-checks every graph invariant; empty when the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        for (from, to, kind) in self.edges() {
            let (Some(a), Some(b)) = (self.vertex(from.as_str()), self.vertex(to.as_str())) else {
                out.push(Violation::DanglingEdge { from: from.clone(), to: to.clone() });
                continue;
            };
            let types = (a.kind.vertex_type(), b.kind.vertex_type());
            let owner_pair = a.owner.as_ref() == Some(&b.id) || b.owner.as_ref() == Some(&a.id);
            let expected = if owner_pair { EdgeKind::Structural } else { EdgeKind::Link };
            if !TypeGraph::allows(types.0, types.1) {
                out.push(Violation::EdgeType { from: from.clone(), to: to.clone(), types });
            } else if TypeGraph::is_structural(types.0, types.1) && !owner_pair {
                out.push(Violation::ForeignStructuralEdge { from: from.clone(), to: to.clone() });
            } else if kind != expected {
                out.push(Violation::EdgeKindMismatch { from: from.clone(), to: to.clone(), kind });
            }
        }

        if let Err(super::GraphError::Cycle(v)) = self.topological_order() {
            out.push(Violation::Cycle(v));
        }

        for v in self.vertices() {
            match (&v.owner, v.kind.is_port()) {
                (None, true) => out.push(Violation::PortWithoutOwner(v.id.clone())),
                (Some(_), false) => out.push(Violation::OwnedNonPort(v.id.clone())),
                (Some(owner), true) => match self.vertex(owner.as_str()) {
                    None => out.push(Violation::OwnerMissing { port: v.id.clone(), owner: owner.clone() }),
                    Some(o) if o.kind != VertexKind::IoComponent => out.push(Violation::OwnerNotIoComponent {
                        port: v.id.clone(),
                        owner: owner.clone(),
                    }),
                    Some(_) => {
                        let (a, b) = if v.kind == VertexKind::InputPort { (&v.id, owner) } else { (owner, &v.id) };
                        if self.edge_kind(a.as_str(), b.as_str()).is_none() {
                            out.push(Violation::MissingStructuralEdge(v.id.clone()));
                        }
                    }
                },
                (None, false) => {}
            }

            let payload_ok = match (&v.payload, v.kind) {
                (Payload::None, _) => true,
                (Payload::Parameter(p), VertexKind::PrimitiveComponent) => {
                    if !p.is_consistent() {
                        out.push(Violation::InconsistentParameter(v.id.clone()));
                    }
                    true
                }
                (Payload::Panel(_), VertexKind::PrimitiveComponent) => true,
                (Payload::Opaque(_), VertexKind::GenericPrimitive) => true,
                _ => false,
            };
            if !payload_ok {
                out.push(Violation::PayloadMismatch(v.id.clone()));
            }
        }

        for g in self.groups() {
            if g.members.is_empty() {
                out.push(Violation::EmptyGroup(g.id.clone()));
            }
            for m in &g.members {
                if self.vertex(m.as_str()).is_none_or(|v| v.kind.is_port()) {
                    out.push(Violation::BadGroupMember { group: g.id.clone(), member: m.clone() });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::Violation;

    #[test]
    fn corrupted_edge_type_is_one_violation() {
        let mut g = TypedGraph::new();
        let a = g.add_component("Range", "a", [0.0, 0.0]).unwrap();
        let b = g.add_component("Range", "b", [0.0, 0.0]).unwrap();
        assert!(g.validate().is_empty());
        let oa = g.port_named(a.as_str(), VertexKind::OutputPort, "Range").unwrap().id.clone();
        let ob = g.port_named(b.as_str(), VertexKind::OutputPort, "Range").unwrap().id.clone();
        g.insert_edge_unchecked(oa, ob, EdgeKind::Link);
        let v = g.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(matches!(v[0], Violation::EdgeType { .. }));
    }

    #[test]
    fn orphan_port_is_one_violation() {
        let mut g = TypedGraph::new();
        let a = g.add_component("Range", "a", [0.0, 0.0]).unwrap();
        let mut port = Vertex::new(VertexId::random(), VertexKind::InputPort, "InputPort", "Extra");
        port.owner = Some(a.clone());
        g.insert_vertex_unchecked(port).unwrap();
        let v = g.validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(matches!(v[0], Violation::MissingStructuralEdge(_)));
    }

    #[test]
    fn bad_slider_state_is_reported() {
        let mut g = TypedGraph::new();
        let s = g.add_component("NumberSlider", "s", [0.0, 0.0]).unwrap();
        if let Some(crate::param::ParameterValue::Slider(sl)) = g.parameter_mut(s.as_str()) {
            sl.value = 42.0;
        }
        assert_eq!(g.validate(), vec![Violation::InconsistentParameter(s)]);
    }
}
