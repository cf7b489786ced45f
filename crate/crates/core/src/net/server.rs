// SPDX-License-Identifier: Apache-2.0

use crate::dataflow::{EvaluationEngine, Solution};
use crate::graph::TypedGraph;
use crate::param::ParameterUpdate;
use crate::relay::{ClientId, Effect, RelayConfig, SessionState};
use crate::wire::{self, Component, Control, MeshBody, MeshData, Role, WireMessage};
use std::collections::HashMap;
use std::io::{self, ErrorKind};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub bind: String,
    /// Second listener speaking the same frames over WebSocket.
    pub ws_bind: Option<String>,
    pub relay: RelayConfig,
    /// Sent as the guid of every MeshData message.
    pub definition_id: String,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: "127.0.0.1:0".into(),
            ws_bind: None,
            relay: RelayConfig::default(),
            definition_id: "definition".into(),
        }
    }
}

/// Builds the MeshData message for a solution, in model coordinates.
pub fn geometry_message(definition_id: &str, solution: &Solution) -> MeshData {
    MeshData {
        guid: definition_id.to_string(),
        meshes: solution.meshes.iter().map(MeshBody::from).collect(),
        geo: None,
    }
}

#[derive(Clone)]
struct Outbox {
    tx: Sender<Vec<u8>>,
    depth: Arc<AtomicUsize>,
}

impl Outbox {
    fn new() -> (Outbox, Receiver<Vec<u8>>) {
        let (tx, rx) = mpsc::channel();
        (
            Outbox {
                tx,
                depth: Arc::new(AtomicUsize::new(0)),
            },
            rx,
        )
    }

    fn push(&self, bytes: Vec<u8>) {
        self.depth.fetch_add(1, Ordering::SeqCst);
        if self.tx.send(bytes).is_err() {
            self.depth.fetch_sub(1, Ordering::SeqCst);
        }
    }

    fn sent(&self) {
        self.depth.fetch_sub(1, Ordering::SeqCst);
    }
}

enum Event {
    Join {
        role: Role,
        address: String,
        outbox: Outbox,
        reply: Sender<ClientId>,
    },
    Message {
        from: ClientId,
        msg: WireMessage,
    },
    Leave {
        from: ClientId,
    },
    Geometry(MeshData),
    Parameters(Vec<Component>),
    Shutdown,
}

enum EngineMsg {
    Update(ParameterUpdate),
    Shutdown,
}

/// A running server. Dropping it does not stop it; call
/// [`shutdown`](Self::shutdown).
pub struct ServerHandle {
    addr: SocketAddr,
    ws_addr: Option<SocketAddr>,
    stop: Arc<AtomicBool>,
    events: Sender<Event>,
    engine: Sender<EngineMsg>,
    threads: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn ws_addr(&self) -> Option<SocketAddr> {
        self.ws_addr
    }

    /// Blocks until the server stops (it only stops via `shutdown`).
    pub fn wait(self) {
        for t in self.threads {
            let _ = t.join();
        }
    }

    pub fn shutdown(self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = self.events.send(Event::Shutdown);
        let _ = self.engine.send(EngineMsg::Shutdown);
        // wake blocked accept calls
        let _ = TcpStream::connect(self.addr);
        if let Some(a) = self.ws_addr {
            let _ = TcpStream::connect(a);
        }
        self.wait();
    }
}

/// Evaluates `graph`, binds the listeners and starts serving.
pub fn start(graph: TypedGraph, config: ServerConfig) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(&config.bind)?;
    let addr = listener.local_addr()?;
    let ws_listener = config.ws_bind.as_deref().map(TcpListener::bind).transpose()?;
    let ws_addr = ws_listener.as_ref().map(TcpListener::local_addr).transpose()?;

    let mut engine = EvaluationEngine::new(graph);
    let solution = engine.solve().map_err(|e| io::Error::new(ErrorKind::InvalidData, e))?;
    for e in &solution.errors {
        log::warn!("vertex {}: {}", e.vertex, e.message);
    }

    let stop = Arc::new(AtomicBool::new(false));
    let (events_tx, events_rx) = mpsc::channel();
    let (engine_tx, engine_rx) = mpsc::channel();
    let _ = events_tx.send(Event::Parameters(parameters(&engine)));
    let _ = events_tx.send(Event::Geometry(geometry_message(&config.definition_id, &solution)));

    let mut threads = Vec::new();
    let session = SessionState::new(config.relay.clone());
    let to_engine = engine_tx.clone();
    threads.push(thread::spawn(move || arbiter(session, events_rx, to_engine)));

    let events = events_tx.clone();
    let id = config.definition_id.clone();
    threads.push(thread::spawn(move || engine_loop(engine, engine_rx, events, id)));

    let (events, flag) = (events_tx.clone(), Arc::clone(&stop));
    threads.push(thread::spawn(move || accept_loop(listener, flag, events, tcp_session)));
    if let Some(l) = ws_listener {
        let (events, flag) = (events_tx.clone(), Arc::clone(&stop));
        threads.push(thread::spawn(move || accept_loop(l, flag, events, ws_session)));
    }
    log::info!("serving on {addr}");

    Ok(ServerHandle {
        addr,
        ws_addr,
        stop,
        events: events_tx,
        engine: engine_tx,
        threads,
    })
}

fn parameters(engine: &EvaluationEngine) -> Vec<Component> {
    engine.graph().parameters().iter().map(Component::from).collect()
}

fn arbiter(mut session: SessionState, events: Receiver<Event>, engine: Sender<EngineMsg>) {
    let epoch = Instant::now();
    let mut outboxes: HashMap<ClientId, Outbox> = HashMap::new();
    loop {
        let idle = Duration::from_millis(250);
        let timeout = session
            .next_deadline()
            .map_or(idle, |d| d.saturating_sub(epoch.elapsed()));
        let event = match events.recv_timeout(timeout) {
            Ok(e) => Some(e),
            Err(RecvTimeoutError::Timeout) => None,
            Err(RecvTimeoutError::Disconnected) => break,
        };
        let now = epoch.elapsed();
        let effects = match event {
            None => Vec::new(),
            Some(Event::Shutdown) => break,
            Some(Event::Join {
                role,
                address,
                outbox,
                reply,
            }) => {
                let (id, fx) = session.on_connect(role, address.clone(), now);
                log::info!("client {id} ({role:?}) joined from {address}");
                outboxes.insert(id, outbox);
                let _ = reply.send(id);
                fx
            }
            Some(Event::Message { from, msg }) => {
                let depth = |c: ClientId| outboxes.get(&c).map_or(0, |o| o.depth.load(Ordering::SeqCst));
                session.handle(from, msg, now, &depth)
            }
            Some(Event::Leave { from }) => {
                log::info!("client {from} left");
                outboxes.remove(&from);
                session.on_disconnect(from, now)
            }
            Some(Event::Geometry(mesh)) => session.broadcast_geometry(mesh),
            Some(Event::Parameters(items)) => {
                session.store_components(items);
                Vec::new()
            }
        };
        let flushed = session.poll(epoch.elapsed());
        for fx in effects.into_iter().chain(flushed) {
            match fx {
                Effect::Send { to, msg } => {
                    if let Some(o) = outboxes.get(&to) {
                        o.push(wire::encode(&msg));
                    }
                }
                Effect::Engine { update, .. } => {
                    let _ = engine.send(EngineMsg::Update(update));
                }
            }
        }
    }
    log::debug!("arbiter stopped");
}

fn engine_loop(mut engine: EvaluationEngine, rx: Receiver<EngineMsg>, events: Sender<Event>, definition_id: String) {
    let sender = engine.sender();
    'outer: while let Ok(msg) = rx.recv() {
        match msg {
            EngineMsg::Update(u) => sender.enqueue(u),
            EngineMsg::Shutdown => break,
        }
        loop {
            match rx.try_recv() {
                Ok(EngineMsg::Update(u)) => sender.enqueue(u),
                Ok(EngineMsg::Shutdown) | Err(TryRecvError::Disconnected) => break 'outer,
                Err(TryRecvError::Empty) => break,
            }
        }
        if engine.drain().applied.is_empty() {
            continue;
        }
        match engine.solve() {
            Ok(solution) => {
                for e in &solution.errors {
                    log::warn!("vertex {}: {}", e.vertex, e.message);
                }
                let _ = events.send(Event::Parameters(parameters(&engine)));
                let _ = events.send(Event::Geometry(geometry_message(&definition_id, &solution)));
            }
            Err(e) => log::error!("solve failed: {e}"),
        }
    }
    log::debug!("engine stopped");
}

fn accept_loop(
    listener: TcpListener,
    stop: Arc<AtomicBool>,
    events: Sender<Event>,
    session: fn(TcpStream, Sender<Event>) -> io::Result<()>,
) {
    for conn in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        match conn {
            Ok(stream) => {
                let events = events.clone();
                thread::spawn(move || {
                    if let Err(e) = session(stream, events) {
                        log::debug!("connection ended: {e}");
                    }
                });
            }
            Err(e) => log::warn!("accept failed: {e}"),
        }
    }
}

fn expect_hello(bytes: &[u8]) -> io::Result<Role> {
    match wire::decode(bytes) {
        Ok(WireMessage::Control(Control::Hello { role })) => Ok(role),
        Ok(other) => Err(io::Error::new(ErrorKind::InvalidData, format!("expected Hello, got {other:?}"))),
        Err(e) => Err(io::Error::new(ErrorKind::InvalidData, e)),
    }
}

fn join(events: &Sender<Event>, role: Role, address: String, outbox: Outbox) -> io::Result<ClientId> {
    let (reply, rx) = mpsc::channel();
    events
        .send(Event::Join {
            role,
            address,
            outbox,
            reply,
        })
        .map_err(|_| io::Error::other("server stopping"))?;
    rx.recv().map_err(|_| io::Error::other("server stopping"))
}

fn tcp_session(stream: TcpStream, events: Sender<Event>) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let address = stream.peer_addr()?.to_string();
    let mut reader = stream.try_clone()?;
    let Some(first) = wire::read_frame(&mut reader)? else {
        return Ok(());
    };
    let role = expect_hello(&first)?;

    let (outbox, rx) = Outbox::new();
    let mut writer = stream.try_clone()?;
    let counter = outbox.clone();
    thread::spawn(move || {
        for bytes in rx {
            if wire::write_frame(&mut writer, &bytes).is_err() {
                break;
            }
            counter.sent();
        }
        let _ = writer.shutdown(Shutdown::Both);
    });

    let id = join(&events, role, address, outbox)?;
    loop {
        match wire::read_frame(&mut reader) {
            Ok(Some(bytes)) => match wire::decode(&bytes) {
                Ok(msg) => {
                    if events.send(Event::Message { from: id, msg }).is_err() {
                        break;
                    }
                }
                Err(e) => log::warn!("client {id}: undecodable frame: {e}"),
            },
            Ok(None) | Err(_) => break,
        }
    }
    let _ = events.send(Event::Leave { from: id });
    Ok(())
}

fn unframe(bytes: &[u8]) -> io::Result<&[u8]> {
    let mut r = bytes;
    match wire::read_frame(&mut r)? {
        Some(_) if !r.is_empty() => Err(io::Error::new(ErrorKind::InvalidData, "extra bytes after frame")),
        Some(_) => Ok(&bytes[4..]),
        None => Err(io::Error::new(ErrorKind::InvalidData, "empty message")),
    }
}

fn framed(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 4);
    wire::write_frame(&mut out, payload).expect("writing to a Vec");
    out
}

fn ws_session(stream: TcpStream, events: Sender<Event>) -> io::Result<()> {
    use tungstenite::{Error as WsError, Message};

    stream.set_nodelay(true)?;
    let address = stream.peer_addr()?.to_string();
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
    let role = loop {
        match ws.read() {
            Ok(Message::Binary(b)) => break expect_hello(unframe(&b)?)?,
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => continue,
            Err(e) => return Err(io::Error::other(e.to_string())),
        }
    };
    ws.get_mut().set_read_timeout(Some(Duration::from_millis(5)))?;

    let (outbox, rx) = Outbox::new();
    let counter = outbox.clone();
    let id = join(&events, role, address, outbox)?;
    'session: loop {
        loop {
            match rx.try_recv() {
                Ok(bytes) => {
                    let sent = ws.send(Message::binary(framed(&bytes)));
                    counter.sent();
                    if sent.is_err() {
                        break 'session;
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    break 'session;
                }
            }
        }
        match ws.read() {
            Ok(Message::Binary(b)) => match unframe(&b).map(wire::decode) {
                Ok(Ok(msg)) => {
                    if events.send(Event::Message { from: id, msg }).is_err() {
                        break;
                    }
                }
                Ok(Err(e)) => log::warn!("client {id}: undecodable frame: {e}"),
                Err(e) => log::warn!("client {id}: {e}"),
            },
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(WsError::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(_) => break,
        }
    }
    let _ = events.send(Event::Leave { from: id });
    Ok(())
}
