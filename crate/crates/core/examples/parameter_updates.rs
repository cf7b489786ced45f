// SPDX-License-Identifier: Apache-2.0

//! Drive a running engine with a burst of slider updates and watch how
//! many are coalesced and how little gets recomputed.

use adflow::dataflow::EvaluationEngine;
use adflow::fixtures;
use adflow::param::ParameterUpdate;
use std::time::Duration;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut engine = EvaluationEngine::new(fixtures::spiral()).with_coalesce_window(Duration::from_millis(50));
    let full = engine.solve()?;
    println!("initial solve: {} vertices", full.recomputed);

    // A dragged slider: ten values in quick succession.
    let sender = engine.sender();
    for i in 0..10 {
        sender.enqueue(ParameterUpdate::number(fixtures::SPIRAL_RADIUS, 0.1 + 0.05 * i as f64));
    }
    let report = engine.drain();
    for a in &report.applied {
        println!("applied {} = {} ({} superseded)", a.guid, a.value, a.superseded);
    }
    let s = engine.solve()?;
    println!("incremental solve: {} vertices", s.recomputed);

    // Out-of-range and off-grid values are clamped and snapped.
    let v = engine.set_parameter(&ParameterUpdate::number(fixtures::SPIRAL_SIDES, 99.4))?;
    println!("sides set to {v}");
    let v = engine.set_parameter(&ParameterUpdate::number(fixtures::SPIRAL_STEPS, 40.6))?;
    println!("steps set to {v}");
    let s = engine.solve()?;
    println!("pipe now has {} triangles", s.meshes[0].triangles.len());

    match engine.set_parameter(&ParameterUpdate::number("no-such-guid", 1.0)) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
