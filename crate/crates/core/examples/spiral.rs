// SPDX-License-Identifier: Apache-2.0

//! Evaluate the helix definition and write it as OBJ.

use adflow::dataflow::{EvaluationEngine, Slot, Value};
use adflow::fixtures;
use adflow::geometry::{compute_normals, export_obj, to_render_coords};
use adflow::graph::VertexKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut engine = EvaluationEngine::new(fixtures::spiral());
    let solution = engine.solve()?;
    println!("recomputed {} vertices", solution.recomputed);

    let out = engine
        .graph()
        .port_named(fixtures::SPIRAL_POLYLINE, VertexKind::OutputPort, "Polyline")
        .unwrap()
        .id
        .clone();
    if let Some(Slot::Value(Value::Curve(points))) = engine.slot(out.as_str()) {
        let last = points.last().unwrap();
        println!("polyline: {} points, ends at ({:.4}, {:.4}, {:.4})", points.len(), last[0], last[1], last[2]);
    }

    for m in &solution.meshes {
        println!("pipe: {} vertices, {} triangles", m.vertices.len(), m.triangles.len());
    }

    let path = std::env::temp_dir().join("spiral.obj");
    let render: Vec<_> = solution.meshes.iter().map(|m| compute_normals(&to_render_coords(m)).0).collect();
    std::fs::write(&path, export_obj(&render))?;
    println!("wrote {}", path.display());
    Ok(())
}
