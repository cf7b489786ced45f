// SPDX-License-Identifier: Apache-2.0

use super::{GraphError, TypedGraph, VertexId};
use rustc_hash::FxHashMap;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

impl TypedGraph {
    /// Kahn's algorithm; ties are broken by id so isomorphic graphs yield
    /// the same order.
    pub fn topological_order(&self) -> Result<Vec<VertexId>, GraphError> {
        let mut indegree: FxHashMap<&str, usize> = self
            .vertices()
            .map(|v| (v.id.as_str(), self.in_degree(v.id.as_str())))
            .collect();
        let mut ready: BinaryHeap<Reverse<&VertexId>> = self
            .vertices()
            .filter(|v| indegree[v.id.as_str()] == 0)
            .map(|v| Reverse(&v.id))
            .collect();
        let mut order = Vec::with_capacity(self.vertex_count());
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v.clone());
            for s in self.successors(v.as_str()) {
                let d = indegree.get_mut(s.as_str()).expect("edge endpoints exist");
                *d -= 1;
                if *d == 0 {
                    ready.push(Reverse(s));
                }
            }
        }
        if order.len() != self.vertex_count() {
            let stuck = self
                .vertices()
                .find(|v| indegree[v.id.as_str()] > 0)
                .map(|v| v.id.clone())
                .expect("some vertex left over");
            return Err(GraphError::Cycle(stuck));
        }
        Ok(order)
    }

    /// Minimum number of edges from any vertex without incoming edges.
    pub fn depth(&self, id: &str) -> Result<usize, GraphError> {
        if !self.contains(id) {
            return Err(GraphError::NoSuchVertex(id.into()));
        }
        self.depths()
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::Cycle(id.into()))
    }

    /// Depth of every vertex reachable from an in-degree-0 vertex (all of
    /// them, for an acyclic graph).
    pub fn depths(&self) -> HashMap<VertexId, usize> {
        let mut depth: HashMap<VertexId, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for v in self.vertices() {
            if self.in_degree(v.id.as_str()) == 0 {
                depth.insert(v.id.clone(), 0);
                queue.push_back(v.id.clone());
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = depth[&v];
            for s in self.successors(v.as_str()) {
                if !depth.contains_key(s) {
                    depth.insert(s.clone(), d + 1);
                    queue.push_back(s.clone());
                }
            }
        }
        depth
    }
}
