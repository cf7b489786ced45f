// SPDX-License-Identifier: Apache-2.0

use super::limiter::{Offer, RateLimiter};
use super::{ClientId, RejectReason, Strategy};
use crate::param::{ParameterUpdate, UpdateValue};
use crate::wire::{Component, Control, MeshData, Role, WireMessage};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Duration;

#[derive(Clone, Debug)]
pub struct RelayConfig {
    pub strategy: Strategy,
    pub min_interval: Duration,
    /// Presence frames to a client are dropped once this many messages are
    /// waiting in its outbound queue.
    pub max_presence_queue: usize,
    /// Privilege per client id; absent ids get 0.
    pub privileges: HashMap<ClientId, i32>,
    /// Layer of each parameter guid.
    pub parameter_layers: HashMap<String, String>,
    /// Layers each client id may edit.
    pub client_layers: HashMap<ClientId, BTreeSet<String>>,
}

impl Default for RelayConfig {
    fn default() -> Self {
        RelayConfig {
            strategy: Strategy::Overwrite,
            min_interval: Duration::from_millis(100),
            max_presence_queue: 64,
            privileges: HashMap::new(),
            parameter_layers: HashMap::new(),
            client_layers: HashMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClientInfo {
    pub role: Role,
    pub address: String,
    pub privilege: i32,
    pub joined_at: Duration,
}

/// Something the transport must do.
#[derive(Clone, Debug, PartialEq)]
pub enum Effect {
    Send { to: ClientId, msg: WireMessage },
    /// Apply this update to the engine; `from` is the originating client.
    Engine { from: ClientId, update: ParameterUpdate },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    Accepted,
    /// Rate-limited; the newest value is forwarded later by
    /// [`SessionState::poll`].
    Deferred { deadline: Duration },
    Rejected(RejectReason),
}

#[derive(Debug)]
pub struct SessionState {
    config: RelayConfig,
    next_id: ClientId,
    /// Keyed by id; ids grow with join order, so iteration is oldest first.
    clients: BTreeMap<ClientId, ClientInfo>,
    locks: BTreeMap<String, ClientId>,
    host: Option<ClientId>,
    limiter: RateLimiter,
    components: Vec<Component>,
    /// Set once a component list arrives; updates are checked against it.
    components_known: bool,
    geometry: Option<MeshData>,
    presence_dropped: u64,
}

fn send(to: ClientId, msg: WireMessage) -> Effect {
    Effect::Send { to, msg }
}

fn control(to: ClientId, c: Control) -> Effect {
    send(to, WireMessage::Control(c))
}

impl SessionState {
    pub fn new(config: RelayConfig) -> Self {
        SessionState {
            limiter: RateLimiter::new(config.min_interval),
            config,
            next_id: 1,
            clients: BTreeMap::new(),
            locks: BTreeMap::new(),
            host: None,
            components: Vec::new(),
            components_known: false,
            geometry: None,
            presence_dropped: 0,
        }
    }

    pub fn config(&self) -> &RelayConfig {
        &self.config
    }

    pub fn strategy(&self) -> Strategy {
        self.config.strategy
    }

    pub fn clients(&self) -> &BTreeMap<ClientId, ClientInfo> {
        &self.clients
    }

    pub fn host(&self) -> Option<ClientId> {
        self.host
    }

    pub fn lock_holder(&self, guid: &str) -> Option<ClientId> {
        self.locks.get(guid).copied()
    }

    pub fn locks(&self) -> &BTreeMap<String, ClientId> {
        &self.locks
    }

    pub fn presence_dropped(&self) -> u64 {
        self.presence_dropped
    }

    pub fn pending_updates(&self) -> usize {
        self.limiter.pending_len()
    }

    pub fn next_deadline(&self) -> Option<Duration> {
        self.limiter.next_deadline()
    }

    fn designers(&self) -> impl Iterator<Item = ClientId> + '_ {
        self.clients
            .iter()
            .filter(|(_, c)| c.role == Role::Designer)
            .map(|(id, _)| *id)
    }

    fn is_designer(&self, id: ClientId) -> bool {
        self.clients.get(&id).is_some_and(|c| c.role == Role::Designer)
    }

    fn privilege(&self, id: ClientId) -> i32 {
        self.clients.get(&id).map_or(0, |c| c.privilege)
    }

    /// Registers a client. The first one becomes host; later ones are told
    /// the host's address. Everyone gets the latest geometry, designers also
    /// the shared parameters.
    pub fn on_connect(&mut self, role: Role, address: impl Into<String>, now: Duration) -> (ClientId, Vec<Effect>) {
        let id = self.next_id;
        self.next_id += 1;
        let info = ClientInfo {
            role,
            address: address.into(),
            privilege: self.config.privileges.get(&id).copied().unwrap_or(0),
            joined_at: now,
        };
        let mut out = Vec::new();
        match self.host.and_then(|h| self.clients.get(&h)) {
            Some(host) => out.push(control(
                id,
                Control::HostAssign {
                    you: false,
                    address: host.address.clone(),
                },
            )),
            None => {
                self.host = Some(id);
                out.push(control(
                    id,
                    Control::HostAssign {
                        you: true,
                        address: info.address.clone(),
                    },
                ));
            }
        }
        self.clients.insert(id, info);
        if role == Role::Designer {
            out.push(send(id, WireMessage::components(self.components.clone())));
        }
        if let Some(g) = &self.geometry {
            out.push(send(id, WireMessage::MeshData(g.clone())));
        }
        (id, out)
    }

    /// Drops a client, frees its locks and elects a new host if needed.
    pub fn on_disconnect(&mut self, id: ClientId, _now: Duration) -> Vec<Effect> {
        let mut out = Vec::new();
        if self.clients.remove(&id).is_none() {
            return out;
        }
        self.limiter.forget_client(id);

        let freed: Vec<String> = self
            .locks
            .iter()
            .filter(|(_, h)| **h == id)
            .map(|(g, _)| g.clone())
            .collect();
        for guid in freed {
            self.locks.remove(&guid);
            for d in self.designers() {
                out.push(control(d, Control::LockRelease { guid: guid.clone() }));
            }
        }

        if self.host == Some(id) {
            // earliest join wins; ids are handed out in join order
            self.host = self.clients.keys().next().copied();
            if let Some(h) = self.host {
                let address = self.clients[&h].address.clone();
                for c in self.clients.keys() {
                    out.push(control(
                        *c,
                        Control::HostChanged {
                            address: address.clone(),
                        },
                    ));
                }
            }
        }
        out
    }

    /// Takes `guid`'s lock for `from`, telling `from` and the other
    /// designers. Any update the previous holder still had queued is dropped.
    fn acquire(&mut self, from: ClientId, guid: &str, out: &mut Vec<Effect>) {
        if let Some(prev) = self.locks.insert(guid.to_string(), from) {
            if prev != from {
                self.limiter.discard(prev, guid);
            }
        }
        out.push(control(from, Control::LockGrant { guid: guid.to_string() }));
        let others: Vec<ClientId> = self.designers().filter(|d| *d != from).collect();
        for d in others {
            out.push(control(
                d,
                Control::LockDeny {
                    guid: guid.to_string(),
                    holder: from.to_string(),
                },
            ));
        }
    }

    /// Role, target and strategy checks, acquiring locks where the strategy
    /// says so.
    fn admit(&mut self, from: ClientId, update: &ParameterUpdate, out: &mut Vec<Effect>) -> Result<(), RejectReason> {
        if !self.clients.contains_key(&from) {
            return Err(RejectReason::UnknownClient);
        }
        if !self.is_designer(from) {
            return Err(RejectReason::NotDesigner);
        }
        self.check_target(update)?;
        let guid = update.guid.as_str();
        let holder = self.lock_holder(guid);
        match self.config.strategy {
            Strategy::Overwrite => Ok(()),
            Strategy::ReactiveLock => match holder {
                None => {
                    self.acquire(from, guid, out);
                    Ok(())
                }
                Some(h) if h == from => Ok(()),
                Some(h) => Err(RejectReason::Locked { holder: h }),
            },
            Strategy::PreemptiveLock => match holder {
                Some(h) if h == from => Ok(()),
                Some(h) => Err(RejectReason::Locked { holder: h }),
                None => Err(RejectReason::NoGrant),
            },
            Strategy::Privilege => match holder {
                Some(h) if h == from => Ok(()),
                Some(h) if self.privilege(from) <= self.privilege(h) => Err(RejectReason::Locked { holder: h }),
                _ => {
                    self.acquire(from, guid, out);
                    Ok(())
                }
            },
            Strategy::Layers => {
                let layer = self.config.parameter_layers.get(guid);
                let allowed = self.config.client_layers.get(&from);
                match (layer, allowed) {
                    (Some(l), Some(set)) if set.contains(l) => Ok(()),
                    _ => Err(RejectReason::WrongLayer),
                }
            }
        }
    }

    fn forward(&self, from: ClientId, update: ParameterUpdate, out: &mut Vec<Effect>) {
        for d in self.designers().filter(|d| *d != from) {
            out.push(send(d, WireMessage::ParameterUpdate(update.clone())));
        }
        out.push(Effect::Engine { from, update });
    }

    fn reject(from: ClientId, guid: &str, reason: &RejectReason, out: &mut Vec<Effect>) {
        if *reason != RejectReason::UnknownClient {
            out.push(control(
                from,
                Control::Reject {
                    guid: guid.to_string(),
                    reason: reason.to_string(),
                },
            ));
        }
    }

    pub fn on_parameter_update(
        &mut self,
        from: ClientId,
        update: ParameterUpdate,
        now: Duration,
    ) -> (Decision, Vec<Effect>) {
        let mut out = Vec::new();
        if let Err(reason) = self.admit(from, &update, &mut out) {
            Self::reject(from, &update.guid, &reason, &mut out);
            return (Decision::Rejected(reason), out);
        }
        // Values other clients still have queued for this guid are older.
        self.limiter.discard_others(from, &update.guid);
        match self.limiter.offer(from, update.clone(), now) {
            Offer::Accept => {
                self.forward(from, update, &mut out);
                (Decision::Accepted, out)
            }
            Offer::Defer { deadline } => (Decision::Deferred { deadline }, out),
        }
    }

    /// Flushes rate-limited updates that are due. Each is re-checked against
    /// the strategy, since locks may have moved while it waited.
    pub fn poll(&mut self, now: Duration) -> Vec<Effect> {
        let mut out = Vec::new();
        for (from, update) in self.limiter.take_due(now) {
            match self.admit(from, &update, &mut out) {
                Ok(()) => {
                    self.limiter.mark_sent(from, &update.guid, now);
                    self.forward(from, update, &mut out);
                }
                Err(reason) => Self::reject(from, &update.guid, &reason, &mut out),
            }
        }
        out
    }

    pub fn on_lock_request(&mut self, from: ClientId, guid: &str, _now: Duration) -> Vec<Effect> {
        let mut out = Vec::new();
        if !self.is_designer(from) {
            Self::reject(
                from,
                guid,
                &if self.clients.contains_key(&from) {
                    RejectReason::NotDesigner
                } else {
                    RejectReason::UnknownClient
                },
                &mut out,
            );
            return out;
        }
        match self.lock_holder(guid) {
            None => self.acquire(from, guid, &mut out),
            Some(h) if h == from => out.push(control(from, Control::LockGrant { guid: guid.to_string() })),
            Some(h) if self.config.strategy == Strategy::Privilege && self.privilege(from) > self.privilege(h) => {
                self.acquire(from, guid, &mut out)
            }
            Some(h) => out.push(control(
                from,
                Control::LockDeny {
                    guid: guid.to_string(),
                    holder: h.to_string(),
                },
            )),
        }
        out
    }

    pub fn on_lock_release(&mut self, from: ClientId, guid: &str, _now: Duration) -> Vec<Effect> {
        if self.lock_holder(guid) != Some(from) {
            return Vec::new();
        }
        self.locks.remove(guid);
        self.designers()
            .map(|d| control(d, Control::LockRelease { guid: guid.to_string() }))
            .collect()
    }

    /// Replaces the shared parameter list and sends it to every designer.
    pub fn set_components(&mut self, items: Vec<Component>) -> Vec<Effect> {
        self.store_components(items);
        self.designers()
            .map(|d| send(d, WireMessage::components(self.components.clone())))
            .collect()
    }

    /// Replaces the stored parameter list without notifying anyone; later
    /// joiners receive it.
    pub fn store_components(&mut self, items: Vec<Component>) {
        self.components = items;
        self.components_known = true;
    }

    /// Checks `update` against the known component list, if there is one.
    fn check_target(&self, update: &ParameterUpdate) -> Result<(), RejectReason> {
        if !self.components_known {
            return Ok(());
        }
        let target = self
            .components
            .iter()
            .find(|c| c.guid() == update.guid)
            .ok_or(RejectReason::UnknownParameter)?;
        let fits = match (target, &update.value) {
            (Component::BooleanToggle { .. }, UpdateValue::Boolean(_)) => true,
            (Component::NumberSlider { .. }, UpdateValue::Number(v)) => v.is_finite(),
            (Component::ListParameter { items, .. }, UpdateValue::Index(i)) => (*i as usize) < items.len(),
            _ => false,
        };
        if fits {
            Ok(())
        } else {
            Err(RejectReason::TypeMismatch)
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Stores the latest geometry and sends it to every client.
    pub fn broadcast_geometry(&mut self, mesh: MeshData) -> Vec<Effect> {
        let out = self
            .clients
            .keys()
            .map(|c| send(*c, WireMessage::MeshData(mesh.clone())))
            .collect();
        self.geometry = Some(mesh);
        out
    }

    /// Relays presence data to everyone but the sender, skipping clients
    /// whose outbound queue (as reported by `queue_depth`) is full.
    pub fn forward_presence(
        &mut self,
        from: ClientId,
        data: Vec<u8>,
        queue_depth: &dyn Fn(ClientId) -> usize,
    ) -> Vec<Effect> {
        if !self.clients.contains_key(&from) {
            return Vec::new();
        }
        let mut out = Vec::new();
        for c in self.clients.keys().copied().filter(|c| *c != from) {
            if queue_depth(c) >= self.config.max_presence_queue {
                self.presence_dropped += 1;
                continue;
            }
            out.push(control(c, Control::Presence { data: data.clone() }));
        }
        out
    }

    /// Dispatches a message received from a connected client.
    pub fn handle(
        &mut self,
        from: ClientId,
        msg: WireMessage,
        now: Duration,
        queue_depth: &dyn Fn(ClientId) -> usize,
    ) -> Vec<Effect> {
        match msg {
            WireMessage::ParameterUpdate(u) => self.on_parameter_update(from, u, now).1,
            WireMessage::Control(Control::LockRequest { guid }) => self.on_lock_request(from, &guid, now),
            WireMessage::Control(Control::LockRelease { guid }) => self.on_lock_release(from, &guid, now),
            WireMessage::Control(Control::Presence { data }) => self.forward_presence(from, data, queue_depth),
            other => {
                log::debug!("client {from} sent {other:?}; ignored");
                Vec::new()
            }
        }
    }
}
