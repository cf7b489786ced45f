// SPDX-License-Identifier: Apache-2.0

use crate::param::{ParameterUpdate, UpdateValue};
use crate::wire::{self, Control, Role, WireMessage};
use std::io;
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

/// Blocking client for the relay's TCP listener. Incoming messages are
/// decoded on a background thread and queued.
pub struct Client {
    stream: TcpStream,
    inbox: Receiver<WireMessage>,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs, role: Role) -> io::Result<Client> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut reader = stream.try_clone()?;
        let (tx, inbox) = mpsc::channel();
        thread::spawn(move || {
            while let Ok(Some(bytes)) = wire::read_frame(&mut reader) {
                match wire::decode(&bytes) {
                    Ok(msg) => {
                        if tx.send(msg).is_err() {
                            break;
                        }
                    }
                    Err(e) => log::warn!("undecodable frame from server: {e}"),
                }
            }
        });
        let mut client = Client { stream, inbox };
        client.send(&WireMessage::Control(Control::Hello { role }))?;
        Ok(client)
    }

    pub fn send(&mut self, msg: &WireMessage) -> io::Result<()> {
        wire::write_frame(&mut self.stream, &wire::encode(msg))
    }

    pub fn set(&mut self, guid: &str, value: UpdateValue) -> io::Result<()> {
        self.send(&WireMessage::ParameterUpdate(ParameterUpdate::new(guid, value)))
    }

    /// Next message, or `None` on timeout or when the server hung up.
    pub fn recv_timeout(&self, timeout: Duration) -> Option<WireMessage> {
        self.inbox.recv_timeout(timeout).ok()
    }

    /// Waits for a message matching `pred`, handing every message received
    /// meanwhile (the match included) to `seen`.
    pub fn wait_for(
        &self,
        timeout: Duration,
        mut pred: impl FnMut(&WireMessage) -> bool,
        seen: &mut dyn FnMut(&WireMessage),
    ) -> Option<WireMessage> {
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.inbox.recv_timeout(left) {
                Ok(msg) => {
                    seen(&msg);
                    if pred(&msg) {
                        return Some(msg);
                    }
                }
                Err(RecvTimeoutError::Timeout) | Err(RecvTimeoutError::Disconnected) => return None,
            }
        }
    }

    /// Everything already received.
    pub fn drain(&self) -> Vec<WireMessage> {
        self.inbox.try_iter().collect()
    }

    pub fn close(self) {
        let _ = self.stream.shutdown(Shutdown::Both);
    }
}

/// One line of a client script.
#[derive(Clone, Debug, PartialEq)]
pub enum ScriptStep {
    Set(ParameterUpdate),
    Lock(String),
    Release(String),
    Wait(Duration),
    Presence(Vec<u8>),
    /// Block until a message of this kind (`mesh`, `components`, `update`,
    /// `grant`, `deny`, `reject`, `host`) arrives.
    Expect { what: String, timeout: Duration },
}

const EXPECTABLE: [&str; 7] = ["mesh", "components", "update", "grant", "deny", "reject", "host"];

fn matches_kind(what: &str, msg: &WireMessage) -> bool {
    match (what, msg) {
        ("mesh", WireMessage::MeshData(_)) => true,
        ("components", WireMessage::Components { .. }) => true,
        ("update", WireMessage::ParameterUpdate(_)) => true,
        ("grant", WireMessage::Control(Control::LockGrant { .. })) => true,
        ("deny", WireMessage::Control(Control::LockDeny { .. })) => true,
        ("reject", WireMessage::Control(Control::Reject { .. })) => true,
        ("host", WireMessage::Control(Control::HostAssign { .. } | Control::HostChanged { .. })) => true,
        _ => false,
    }
}

fn parse_value(text: &str) -> Result<UpdateValue, String> {
    match text {
        "true" => Ok(UpdateValue::Boolean(true)),
        "false" => Ok(UpdateValue::Boolean(false)),
        _ => match text.strip_prefix('#') {
            Some(i) => i.parse().map(UpdateValue::Index).map_err(|_| format!("bad index {text:?}")),
            None => text
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(UpdateValue::Number)
                .ok_or_else(|| format!("bad value {text:?}")),
        },
    }
}

fn parse_ms(text: &str) -> Result<Duration, String> {
    text.parse().map(Duration::from_millis).map_err(|_| format!("bad milliseconds {text:?}"))
}

/// Parses a script. One step per line; lines starting with `#` are
/// comments.
///
/// ```text
/// set <guid> <true|false|#index|number>
/// lock <guid>
/// release <guid>
/// wait <ms>
/// presence <text>
/// expect <mesh|components|update|grant|deny|reject|host> [timeout-ms]
/// ```
pub fn parse_script(text: &str) -> Result<Vec<ScriptStep>, String> {
    let mut steps = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let err = |m: String| format!("line {}: {m}", n + 1);
        let step = match words.as_slice() {
            ["set", guid, value] => ScriptStep::Set(ParameterUpdate::new(*guid, parse_value(value).map_err(err)?)),
            ["lock", guid] => ScriptStep::Lock(guid.to_string()),
            ["release", guid] => ScriptStep::Release(guid.to_string()),
            ["wait", ms] => ScriptStep::Wait(parse_ms(ms).map_err(err)?),
            ["presence", ..] => ScriptStep::Presence(line["presence".len()..].trim().as_bytes().to_vec()),
            ["expect", what, rest @ ..] if EXPECTABLE.contains(what) && rest.len() <= 1 => ScriptStep::Expect {
                what: what.to_string(),
                timeout: match rest {
                    [ms] => parse_ms(ms).map_err(err)?,
                    _ => Duration::from_secs(5),
                },
            },
            _ => return Err(err(format!("cannot parse {line:?}"))),
        };
        steps.push(step);
    }
    Ok(steps)
}

/// Runs `steps`, reporting every received message to `seen`.
pub fn run_script(client: &mut Client, steps: &[ScriptStep], seen: &mut dyn FnMut(&WireMessage)) -> io::Result<()> {
    for step in steps {
        match step {
            ScriptStep::Set(u) => client.send(&WireMessage::ParameterUpdate(u.clone()))?,
            ScriptStep::Lock(g) => client.send(&WireMessage::Control(Control::LockRequest { guid: g.clone() }))?,
            ScriptStep::Release(g) => client.send(&WireMessage::Control(Control::LockRelease { guid: g.clone() }))?,
            ScriptStep::Presence(data) => client.send(&WireMessage::Control(Control::Presence { data: data.clone() }))?,
            ScriptStep::Wait(d) => {
                let deadline = Instant::now() + *d;
                while let Some(msg) = client.recv_timeout(deadline.saturating_duration_since(Instant::now())) {
                    seen(&msg);
                }
            }
            ScriptStep::Expect { what, timeout } => {
                if client.wait_for(*timeout, |m| matches_kind(what, m), seen).is_none() {
                    return Err(io::Error::new(io::ErrorKind::TimedOut, format!("no {what} message arrived")));
                }
            }
        }
    }
    Ok(())
}

/// One-line summary of a message.
pub fn describe(msg: &WireMessage) -> String {
    match msg {
        WireMessage::Components { items } => {
            let names: Vec<String> = items.iter().map(|c| format!("{}={}", c.name(), c.guid())).collect();
            format!("components [{}]", names.join(", "))
        }
        WireMessage::MeshData(m) => format!(
            "mesh {} meshes, {} vertices, {} triangles",
            m.meshes.len(),
            m.meshes.iter().map(|x| x.vertices.len()).sum::<usize>(),
            m.meshes.iter().map(|x| x.triangles.len()).sum::<usize>()
        ),
        WireMessage::ParameterUpdate(u) => format!("update {} {}", u.guid, u.value),
        WireMessage::Control(Control::Presence { data }) => format!("presence {} bytes", data.len()),
        WireMessage::Control(c) => format!("control {c:?}"),
    }
}
