// SPDX-License-Identifier: Apache-2.0

//! Serve the cube definition on a local port, connect a designer and a
//! viewer, move a slider and watch the new geometry arrive.

use adflow::fixtures;
use adflow::net::{self, describe, Client, ServerConfig};
use adflow::param::UpdateValue;
use adflow::wire::{Role, WireMessage};
use std::time::{Duration, Instant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = net::start(fixtures::cube(), ServerConfig::default())?;
    let addr = server.local_addr();
    println!("listening on {addr}");

    let mut designer = Client::connect(addr, Role::Designer)?;
    let viewer = Client::connect(addr, Role::Viewer)?;
    let wait = Duration::from_secs(2);
    let show = |who: &str, m: &WireMessage| println!("{who} <- {}", describe(m));
    designer.wait_for(wait, |m| matches!(m, WireMessage::MeshData(_)), &mut |m| show("designer", m));
    viewer.wait_for(wait, |m| matches!(m, WireMessage::MeshData(_)), &mut |m| show("viewer", m));

    let sent = Instant::now();
    designer.set(fixtures::CUBE_SIZE, UpdateValue::Number(3.0))?;
    // The cube grows from 1 to 3, so a corner moves out to x = 1.5.
    let grown = |m: &WireMessage| matches!(m, WireMessage::MeshData(d) if d.meshes[0].vertices.iter().any(|v| v[0] >= 1.5));
    match viewer.wait_for(wait, grown, &mut |m| show("viewer", m)) {
        Some(_) => println!("new geometry after {:?}", sent.elapsed()),
        None => println!("no geometry within {wait:?}"),
    }

    designer.close();
    viewer.close();
    server.shutdown();
    Ok(())
}
