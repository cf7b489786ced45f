// SPDX-License-Identifier: Apache-2.0

//! Threaded TCP (and optional WebSocket) transport around the relay, plus a
//! headless client.
//!
//! Every stream carries length-prefixed [`wire`](crate::wire) frames. The
//! first frame a client sends must be `Hello`. On the WebSocket listener
//! each binary message holds exactly one such frame, prefix included.

mod client;
mod server;

pub use client::{describe, parse_script, run_script, Client, ScriptStep};
pub use server::{geometry_message, start, ServerConfig, ServerHandle};
