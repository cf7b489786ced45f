// SPDX-License-Identifier: Apache-2.0

use super::registry::{lookup_component_kind, ComponentClass};
use super::value::Value;
use crate::geometry::Mesh;
use crate::graph::{GraphError, Payload, TypedGraph, VertexId, VertexKind};
use crate::param::{ParameterUpdate, TypeMismatch, UpdateValue};
use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

/// Cached evaluation state of one vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum Slot {
    Value(Value),
    /// Component evaluated; its results live on its output ports.
    Done,
    /// Nothing to offer (unconnected port, opaque primitive).
    Empty,
    Failed(String),
    /// Skipped because something upstream failed.
    Unevaluated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexError {
    pub vertex: VertexId,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Solution {
    /// Meshes from every mesh-valued output port with no outgoing link, in
    /// topological order.
    pub meshes: Vec<Mesh>,
    pub sinks: Vec<VertexId>,
    pub errors: Vec<VertexError>,
    /// How many vertices were recomputed by this solve.
    pub recomputed: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UpdateError {
    #[error("no parameter with guid {0}")]
    UnknownGuid(String),
    #[error("parameter {guid}: {source}")]
    TypeMismatch { guid: String, source: TypeMismatch },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppliedUpdate {
    pub guid: String,
    /// Value stored after clamping and snapping.
    pub value: UpdateValue,
    /// Older queued updates for the same guid folded into this one.
    pub superseded: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DrainReport {
    pub applied: Vec<AppliedUpdate>,
    pub dropped: Vec<(ParameterUpdate, UpdateError)>,
}

#[derive(Debug)]
struct Queued {
    update: ParameterUpdate,
    at: Instant,
}

type Queue = Arc<Mutex<VecDeque<Queued>>>;

/// Cloneable handle for queueing parameter updates from other threads.
#[derive(Clone, Debug)]
pub struct UpdateSender {
    queue: Queue,
}

impl UpdateSender {
    pub fn enqueue(&self, update: ParameterUpdate) {
        self.enqueue_at(update, Instant::now());
    }

    pub fn enqueue_at(&self, update: ParameterUpdate, at: Instant) {
        self.queue
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push_back(Queued { update, at });
    }
}

/// Owns a graph and evaluates it incrementally.
///
/// Updates may be queued from any thread through [`UpdateSender`]; they are
/// applied by [`drain`](Self::drain) and take effect on the next
/// [`solve`](Self::solve), both of which run on the owning thread.
#[derive(Debug)]
pub struct EvaluationEngine {
    graph: TypedGraph,
    cache: HashMap<VertexId, Slot>,
    dirty: HashSet<VertexId>,
    full: bool,
    queue: Queue,
    coalesce_window: Duration,
}

impl EvaluationEngine {
    pub const DEFAULT_COALESCE_WINDOW: Duration = Duration::from_millis(50);

    pub fn new(graph: TypedGraph) -> Self {
        EvaluationEngine {
            graph,
            cache: HashMap::new(),
            dirty: HashSet::new(),
            full: true,
            queue: Queue::default(),
            coalesce_window: Self::DEFAULT_COALESCE_WINDOW,
        }
    }

    pub fn with_coalesce_window(mut self, window: Duration) -> Self {
        self.coalesce_window = window;
        self
    }

    pub fn graph(&self) -> &TypedGraph {
        &self.graph
    }

    pub fn into_graph(self) -> TypedGraph {
        self.graph
    }

    /// Structural edit; the next solve recomputes everything.
    pub fn edit<R>(&mut self, f: impl FnOnce(&mut TypedGraph) -> R) -> R {
        self.full = true;
        f(&mut self.graph)
    }

    pub fn invalidate(&mut self, id: &VertexId) {
        self.dirty.insert(id.clone());
    }

    pub fn sender(&self) -> UpdateSender {
        UpdateSender {
            queue: Arc::clone(&self.queue),
        }
    }

    pub fn enqueue_update(&self, update: ParameterUpdate) {
        self.sender().enqueue(update);
    }

    pub fn pending_updates(&self) -> usize {
        self.queue.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    /// Applies one update immediately.
    pub fn set_parameter(&mut self, update: &ParameterUpdate) -> Result<UpdateValue, UpdateError> {
        let param = self
            .graph
            .parameter_mut(&update.guid)
            .ok_or_else(|| UpdateError::UnknownGuid(update.guid.clone()))?;
        let stored = param.apply(&update.value).map_err(|source| UpdateError::TypeMismatch {
            guid: update.guid.clone(),
            source,
        })?;
        self.dirty.insert(VertexId::from(update.guid.as_str()));
        Ok(stored)
    }

    /// Applies queued updates. Updates for one guid that arrive within the
    /// coalesce window of the previous kept one collapse into the newest.
    pub fn drain(&mut self) -> DrainReport {
        let queued: Vec<Queued> = self
            .queue
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .drain(..)
            .collect();

        let mut kept: Vec<(Queued, usize)> = Vec::new();
        let mut latest: HashMap<String, usize> = HashMap::new();
        for q in queued {
            if let Some(&i) = latest.get(&q.update.guid) {
                let prev_at = kept[i].0.at;
                if q.at.saturating_duration_since(prev_at) <= self.coalesce_window {
                    kept[i].0 = q;
                    kept[i].1 += 1;
                    continue;
                }
            }
            latest.insert(q.update.guid.clone(), kept.len());
            kept.push((q, 0));
        }

        let mut report = DrainReport::default();
        for (q, superseded) in kept {
            match self.set_parameter(&q.update) {
                Ok(value) => report.applied.push(AppliedUpdate {
                    guid: q.update.guid,
                    value,
                    superseded,
                }),
                Err(e) => {
                    log::warn!("dropping update: {e}");
                    report.dropped.push((q.update, e));
                }
            }
        }
        report
    }

    pub fn slot(&self, id: &str) -> Option<&Slot> {
        self.cache.get(id)
    }

    pub fn cache(&self) -> &HashMap<VertexId, Slot> {
        &self.cache
    }

    /// Recomputes dirty vertices and everything downstream of them.
    pub fn solve(&mut self) -> Result<Solution, GraphError> {
        let order = self.graph.topological_order()?;
        let affected = self.affected(&order);

        let mut recomputed = 0;
        for id in &order {
            if !affected.contains(id) {
                continue;
            }
            let v = self.graph.vertex(id.as_str()).expect("ordered vertex exists");
            if v.kind == VertexKind::OutputPort {
                // written by the owning component
                continue;
            }
            recomputed += 1;
            let slot = match v.kind {
                VertexKind::PrimitiveComponent => self.primitive_slot(id),
                VertexKind::GenericPrimitive => Slot::Empty,
                VertexKind::InputPort => self.input_slot(id),
                VertexKind::IoComponent => self.component_slot(id),
                VertexKind::OutputPort => unreachable!(),
            };
            self.cache.insert(id.clone(), slot);
        }
        self.dirty.clear();
        self.full = false;

        let mut solution = Solution {
            recomputed,
            ..Solution::default()
        };
        for id in &order {
            match self.cache.get(id) {
                Some(Slot::Failed(message)) => solution.errors.push(VertexError {
                    vertex: id.clone(),
                    message: message.clone(),
                }),
                Some(Slot::Value(Value::Mesh(mesh)))
                    if self.graph.vertex(id.as_str()).map(|v| v.kind) == Some(VertexKind::OutputPort)
                        && self.graph.successors(id.as_str()).next().is_none() =>
                {
                    solution.meshes.push(mesh.clone());
                    solution.sinks.push(id.clone());
                }
                _ => {}
            }
        }
        Ok(solution)
    }

    fn affected(&mut self, order: &[VertexId]) -> HashSet<VertexId> {
        if self.full {
            self.cache.clear();
            return order.iter().cloned().collect();
        }
        self.cache.retain(|id, _| self.graph.contains(id.as_str()));
        let mut seeds: Vec<VertexId> = self
            .dirty
            .iter()
            .filter(|id| self.graph.contains(id.as_str()))
            .cloned()
            .collect();
        seeds.extend(order.iter().filter(|id| !self.cache.contains_key(*id)).cloned());

        let mut affected: HashSet<VertexId> = HashSet::new();
        let mut queue: VecDeque<VertexId> = seeds.into();
        while let Some(v) = queue.pop_front() {
            if !affected.insert(v.clone()) {
                continue;
            }
            let owner = self
                .graph
                .vertex(v.as_str())
                .filter(|x| x.kind == VertexKind::OutputPort)
                .and_then(|x| x.owner.clone());
            queue.extend(owner);
            queue.extend(self.graph.successors(v.as_str()).cloned());
        }
        affected
    }

    /// Slots of data sources feeding `id` (predecessors other than its
    /// owner), merged into one.
    fn incoming(&self, id: &VertexId) -> Slot {
        let owner = self.graph.vertex(id.as_str()).and_then(|v| v.owner.as_ref());
        let mut values = Vec::new();
        for p in self.graph.predecessors(id.as_str()) {
            if Some(p) == owner {
                continue;
            }
            match self.cache.get(p) {
                Some(Slot::Value(v)) => values.push(v.clone()),
                Some(Slot::Failed(_)) | Some(Slot::Unevaluated) => return Slot::Unevaluated,
                _ => {}
            }
        }
        if values.is_empty() {
            return Slot::Empty;
        }
        match Value::merge(values) {
            Ok(v) => Slot::Value(v),
            Err(e) => Slot::Failed(e),
        }
    }

    fn primitive_slot(&self, id: &VertexId) -> Slot {
        let v = self.graph.vertex(id.as_str()).expect("exists");
        match &v.payload {
            Payload::Panel(text) => match self.incoming(id) {
                Slot::Empty => Slot::Value(Value::from_text(text)),
                passthrough => passthrough,
            },
            Payload::Parameter(p) => Slot::Value(match p {
                crate::param::ParameterValue::Toggle(b) => Value::Boolean(*b),
                crate::param::ParameterValue::Slider(s) => Value::Number(s.value),
                crate::param::ParameterValue::List(l) => Value::from_text(l.selected_item().unwrap_or_default()),
            }),
            Payload::None | Payload::Opaque(_) => Slot::Empty,
        }
    }

    fn input_slot(&self, id: &VertexId) -> Slot {
        self.incoming(id)
    }

    fn component_slot(&mut self, id: &VertexId) -> Slot {
        let v = self.graph.vertex(id.as_str()).expect("exists");
        let (inputs, outputs) = self.graph.ports(id.as_str());
        let output_ids: Vec<(VertexId, String)> = outputs.iter().map(|p| (p.id.clone(), p.label.clone())).collect();

        let result = match lookup_component_kind(&v.type_name) {
            Err(e) => Err(Slot::Failed(e.to_string())),
            Ok(desc) => match desc.class {
                ComponentClass::Primitive(_) => Err(Slot::Failed(format!("{} cannot own ports", desc.name))),
                ComponentClass::Io { inputs: specs, outputs: names, eval } => {
                    let mut args = Vec::with_capacity(specs.len());
                    let mut blocked = false;
                    for spec in specs {
                        let port = inputs.iter().find(|p| p.label == spec.name);
                        let slot = port.and_then(|p| self.cache.get(&p.id)).cloned().unwrap_or(Slot::Empty);
                        args.push(match slot {
                            Slot::Value(val) => Some(val),
                            Slot::Failed(_) | Slot::Unevaluated => {
                                blocked = true;
                                None
                            }
                            Slot::Empty | Slot::Done => v
                                .settings
                                .get(spec.name)
                                .map(String::as_str)
                                .or(spec.default)
                                .map(Value::from_text),
                        });
                    }
                    if blocked {
                        Err(Slot::Unevaluated)
                    } else {
                        match eval(&args, &v.settings) {
                            Ok(values) => Ok(names.iter().copied().zip(values).collect::<HashMap<_, _>>()),
                            Err(message) => Err(Slot::Failed(message)),
                        }
                    }
                }
            },
        };

        match result {
            Ok(mut produced) => {
                for (pid, name) in output_ids {
                    let slot = match produced.remove(name.as_str()) {
                        Some(val) => Slot::Value(val),
                        None => Slot::Failed(format!("component produces no output {name:?}")),
                    };
                    self.cache.insert(pid, slot);
                }
                Slot::Done
            }
            Err(slot) => {
                for (pid, _) in output_ids {
                    self.cache.insert(pid, Slot::Unevaluated);
                }
                slot
            }
        }
    }
}

/// One-shot evaluation of a graph from scratch.
pub fn evaluate(graph: &TypedGraph) -> Result<Solution, GraphError> {
    EvaluationEngine::new(graph.clone()).solve()
}
