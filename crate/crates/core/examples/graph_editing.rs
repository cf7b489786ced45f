// SPDX-License-Identifier: Apache-2.0

//! Build a small definition by hand, then try a few edits the graph refuses.

use adflow::graph::{GraphError, TypedGraph, VertexKind};

fn main() -> Result<(), GraphError> {
    let mut g = TypedGraph::new();
    let size = g.add_component("NumberSlider", "size", [0.0, 0.0])?;
    let cube = g.add_component("Box", "cube", [120.0, 0.0])?;
    g.connect(size.as_str(), cube.as_str(), "Size")?;

    let (inputs, outputs) = g.ports(cube.as_str());
    println!("{} vertices, {} edges", g.vertex_count(), g.edge_count());
    println!("box has {} inputs and {} output", inputs.len(), outputs.len());

    // Feeding the box back into its own size slider would close a loop.
    let out = g.port_named(cube.as_str(), VertexKind::OutputPort, "Box").unwrap().id.clone();
    match g.add_link(out.as_str(), size.as_str()) {
        Err(e) => println!("refused: {e}"),
        Ok(()) => println!("accepted"),
    }

    // A second box fed from the first one's output, then an attempt to close
    // a cycle back into the first.
    let other = g.add_component("Box", "other", [240.0, 0.0])?;
    g.connect(cube.as_str(), other.as_str(), "Center")?;
    let other_out = g.port_named(other.as_str(), VertexKind::OutputPort, "Box").unwrap().id.clone();
    let center = g.port_named(cube.as_str(), VertexKind::InputPort, "Center").unwrap().id.clone();
    if let Err(e) = g.add_link(other_out.as_str(), center.as_str()) {
        println!("refused: {e}");
    }

    for id in g.topological_order()? {
        let v = g.vertex(id.as_str()).unwrap();
        if !v.kind.is_port() {
            println!("depth {} {}", g.depth(id.as_str())?, v.label);
        }
    }

    let group = g.create_group(&[size.clone(), cube.clone()], "inputs", [255, 128, 0, 255])?;
    println!("group {group} has {} members", g.groups()[0].members.len());

    g.remove_component(other.as_str())?;
    println!("after removal: {} vertices, {} violations", g.vertex_count(), g.validate().len());
    Ok(())
}
