// SPDX-License-Identifier: Apache-2.0

use super::{EdgeKind, Payload, TypedGraph, VertexId, VertexKind};
use std::collections::{BTreeMap, BTreeSet};

/// Id-keyed, order-independent view of a graph. Two graphs are isomorphic
/// (by id) exactly when their canonical forms are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalGraph {
    pub vertices: BTreeMap<VertexId, CanonicalVertex>,
    pub edges: BTreeSet<(VertexId, VertexId, EdgeKind)>,
    pub groups: BTreeMap<VertexId, (String, [u8; 4], Vec<VertexId>)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalVertex {
    pub label: String,
    pub kind: VertexKind,
    pub type_name: String,
    pub type_guid: String,
    pub position: [f64; 2],
    pub owner: Option<VertexId>,
    /// Index among the owner's ports of the same direction.
    pub port_rank: Option<usize>,
    pub payload: Payload,
    pub settings: BTreeMap<String, String>,
}

impl TypedGraph {
    pub fn canonical(&self) -> CanonicalGraph {
        let mut ranks: BTreeMap<&VertexId, usize> = BTreeMap::new();
        for v in self.vertices().filter(|v| !v.kind.is_port()) {
            let (inputs, outputs) = self.ports(v.id.as_str());
            for list in [inputs, outputs] {
                for (i, p) in list.into_iter().enumerate() {
                    ranks.insert(&p.id, i);
                }
            }
        }
        CanonicalGraph {
            vertices: self
                .vertices()
                .map(|v| {
                    (
                        v.id.clone(),
                        CanonicalVertex {
                            label: v.label.clone(),
                            kind: v.kind,
                            type_name: v.type_name.clone(),
                            type_guid: v.type_guid.clone(),
                            position: v.position,
                            owner: v.owner.clone(),
                            port_rank: ranks.get(&v.id).copied(),
                            payload: v.payload.clone(),
                            settings: v.settings.clone(),
                        },
                    )
                })
                .collect(),
            edges: self.edges().map(|(a, b, k)| (a.clone(), b.clone(), k)).collect(),
            groups: self
                .groups()
                .iter()
                .map(|g| (g.id.clone(), (g.name.clone(), g.color, g.members.clone())))
                .collect(),
        }
    }

    pub fn is_isomorphic(&self, other: &TypedGraph) -> bool {
        self.canonical() == other.canonical()
    }
}
