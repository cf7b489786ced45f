// SPDX-License-Identifier: Apache-2.0

//! Two small reference definitions with fixed ids: a parametric cube and a
//! conical spiral swept into a pipe.

use crate::graph::{GraphError, Payload, TypedGraph, VertexId};
use crate::param::{Accuracy, ParameterValue, Slider};

pub const CUBE_X: &str = "6f0e2c1a-0001-4a00-8000-00000000c001";
pub const CUBE_Y: &str = "6f0e2c1a-0002-4a00-8000-00000000c002";
pub const CUBE_Z: &str = "6f0e2c1a-0003-4a00-8000-00000000c003";
pub const CUBE_SIZE: &str = "6f0e2c1a-0004-4a00-8000-00000000c004";
pub const CUBE_POINT: &str = "6f0e2c1a-0005-4a00-8000-00000000c005";
pub const CUBE_BOX: &str = "6f0e2c1a-0006-4a00-8000-00000000c006";

pub const SPIRAL_DOMAIN: &str = "7a1d3b2c-0001-4b00-8000-00000000d001";
pub const SPIRAL_STEPS: &str = "7a1d3b2c-0002-4b00-8000-00000000d002";
pub const SPIRAL_RANGE: &str = "7a1d3b2c-0003-4b00-8000-00000000d003";
pub const SPIRAL_EVAL_X: &str = "7a1d3b2c-0004-4b00-8000-00000000d004";
pub const SPIRAL_EVAL_Y: &str = "7a1d3b2c-0005-4b00-8000-00000000d005";
pub const SPIRAL_POINT: &str = "7a1d3b2c-0006-4b00-8000-00000000d006";
pub const SPIRAL_POLYLINE: &str = "7a1d3b2c-0007-4b00-8000-00000000d007";
pub const SPIRAL_RADIUS: &str = "7a1d3b2c-0008-4b00-8000-00000000d008";
pub const SPIRAL_SIDES: &str = "7a1d3b2c-0009-4b00-8000-00000000d009";
pub const SPIRAL_PIPE: &str = "7a1d3b2c-000a-4b00-8000-00000000d00a";

/// Upper end of the spiral's parameter domain, six half turns.
pub const SPIRAL_T_MAX: f64 = 6.0 * std::f64::consts::PI;

fn slider(g: &mut TypedGraph, id: &str, label: &str, s: Slider, at: [f64; 2]) -> Result<(), GraphError> {
    g.add_component_with_id(VertexId::new(id), "NumberSlider", label, at)?;
    g.set_payload(id, Payload::Parameter(ParameterValue::Slider(s)))
}

/// Three coordinate sliders feed a point that centres a box whose edge
/// length is a fourth slider.
pub fn cube() -> TypedGraph {
    build_cube().expect("cube fixture is valid")
}

fn build_cube() -> Result<TypedGraph, GraphError> {
    let mut g = TypedGraph::new();
    for (i, (id, label)) in [(CUBE_X, "x"), (CUBE_Y, "y"), (CUBE_Z, "z")].into_iter().enumerate() {
        slider(&mut g, id, label, Slider::new(0.0, -10.0, 10.0), [0.0, 40.0 * i as f64])?;
    }
    slider(&mut g, CUBE_SIZE, "size", Slider::new(1.0, 0.1, 10.0), [0.0, 120.0])?;
    g.add_component_with_id(VertexId::new(CUBE_POINT), "ConstructPoint", "Pt", [200.0, 40.0])?;
    g.add_component_with_id(VertexId::new(CUBE_BOX), "Box", "Box", [400.0, 80.0])?;
    g.connect(CUBE_X, CUBE_POINT, "X")?;
    g.connect(CUBE_Y, CUBE_POINT, "Y")?;
    g.connect(CUBE_Z, CUBE_POINT, "Z")?;
    g.connect(CUBE_POINT, CUBE_BOX, "Center")?;
    g.connect(CUBE_SIZE, CUBE_BOX, "Size")?;
    Ok(g)
}

/// `Range` over `[0, 6π]` in 120 steps drives `t·cos t`, `t·sin t` and `t`
/// as the x, y and z of a polyline, which is swept into an 8-sided pipe.
pub fn spiral() -> TypedGraph {
    build_spiral().expect("spiral fixture is valid")
}

fn build_spiral() -> Result<TypedGraph, GraphError> {
    let mut g = TypedGraph::new();
    g.add_component_with_id(VertexId::new(SPIRAL_DOMAIN), "Panel", "domain", [0.0, 0.0])?;
    g.set_payload(SPIRAL_DOMAIN, Payload::Panel(format!("0, {SPIRAL_T_MAX}")))?;
    slider(
        &mut g,
        SPIRAL_STEPS,
        "steps",
        Slider::new(120.0, 1.0, 500.0).with_accuracy(Accuracy::Integer),
        [0.0, 40.0],
    )?;
    g.add_component_with_id(VertexId::new(SPIRAL_RANGE), "Range", "Range", [200.0, 20.0])?;
    g.connect(SPIRAL_DOMAIN, SPIRAL_RANGE, "Domain")?;
    g.connect(SPIRAL_STEPS, SPIRAL_RANGE, "Steps")?;

    for (id, expr, y) in [(SPIRAL_EVAL_X, "t*cos(t)", 0.0), (SPIRAL_EVAL_Y, "t*sin(t)", 60.0)] {
        g.add_component_with_id(VertexId::new(id), "Evaluate", "Eval", [400.0, y])?;
        g.set_setting(id, "Expression", expr)?;
        g.connect(SPIRAL_RANGE, id, "t")?;
    }

    g.add_component_with_id(VertexId::new(SPIRAL_POINT), "ConstructPoint", "Pt", [600.0, 40.0])?;
    g.connect(SPIRAL_EVAL_X, SPIRAL_POINT, "X")?;
    g.connect(SPIRAL_EVAL_Y, SPIRAL_POINT, "Y")?;
    g.connect(SPIRAL_RANGE, SPIRAL_POINT, "Z")?;

    g.add_component_with_id(VertexId::new(SPIRAL_POLYLINE), "Polyline", "PLine", [800.0, 40.0])?;
    g.connect(SPIRAL_POINT, SPIRAL_POLYLINE, "V")?;

    slider(&mut g, SPIRAL_RADIUS, "radius", Slider::new(0.1, 0.01, 2.0), [800.0, 120.0])?;
    slider(
        &mut g,
        SPIRAL_SIDES,
        "sides",
        Slider::new(8.0, 3.0, 64.0).with_accuracy(Accuracy::Integer),
        [800.0, 160.0],
    )?;
    g.add_component_with_id(VertexId::new(SPIRAL_PIPE), "Pipe", "Pipe", [1000.0, 80.0])?;
    g.connect(SPIRAL_POLYLINE, SPIRAL_PIPE, "Curve")?;
    g.connect(SPIRAL_RADIUS, SPIRAL_PIPE, "Radius")?;
    g.connect(SPIRAL_SIDES, SPIRAL_PIPE, "Sides")?;
    Ok(g)
}
