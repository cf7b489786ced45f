// SPDX-License-Identifier: Apache-2.0

//! Session arbitration between one engine and many clients.
//!
//! [`SessionState`] is a pure state machine: callers pass in the current
//! time and get back the [`Effect`]s to carry out. The networked server in
//! [`crate::net`] drives it from a single arbiter thread; tests drive it
//! directly with a simulated clock.

mod limiter;
mod session;

pub use limiter::{Offer, RateLimiter};
pub use session::{ClientInfo, Decision, Effect, RelayConfig, SessionState};

use std::fmt;
use std::str::FromStr;

pub type ClientId = u64;

/// How concurrent edits of one parameter are arbitrated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Last writer wins.
    #[default]
    Overwrite,
    /// The first editor implicitly locks the parameter.
    ReactiveLock,
    /// Editors must ask for a lock before editing.
    PreemptiveLock,
    /// Reactive locking where a higher privilege takes the lock over.
    Privilege,
    /// Each client may only edit parameters on its layers.
    Layers,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Overwrite,
        Strategy::ReactiveLock,
        Strategy::PreemptiveLock,
        Strategy::Privilege,
        Strategy::Layers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Overwrite => "overwrite",
            Strategy::ReactiveLock => "reactive-lock",
            Strategy::PreemptiveLock => "preemptive-lock",
            Strategy::Privilege => "privilege",
            Strategy::Layers => "layers",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str().replace('-', "") == norm)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

/// Why an update or lock request was refused.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    UnknownClient,
    NotDesigner,
    Locked { holder: ClientId },
    NoGrant,
    WrongLayer,
    /// No shared parameter has this guid.
    UnknownParameter,
    /// The value does not fit the parameter (wrong type, index out of range).
    TypeMismatch,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::UnknownClient => f.write_str("UnknownClient"),
            RejectReason::NotDesigner => f.write_str("NotDesigner"),
            RejectReason::Locked { holder } => write!(f, "Locked{{{holder}}}"),
            RejectReason::NoGrant => f.write_str("NoGrant"),
            RejectReason::WrongLayer => f.write_str("WrongLayer"),
            RejectReason::UnknownParameter => f.write_str("UnknownParameter"),
            RejectReason::TypeMismatch => f.write_str("TypeMismatch"),
        }
    }
}
