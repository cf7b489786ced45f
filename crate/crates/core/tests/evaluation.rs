// SPDX-License-Identifier: Apache-2.0

use adflow::dataflow::{evaluate, EvaluationEngine, Slot, Value};
use adflow::fixtures;
use adflow::graph::VertexKind;
use adflow::param::{ParameterUpdate, ParameterValue, UpdateValue};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::PI;

fn output(engine: &EvaluationEngine, component: &str, port: &str) -> Value {
    let id = engine.graph().port_named(component, VertexKind::OutputPort, port).unwrap().id.clone();
    match engine.slot(id.as_str()) {
        Some(Slot::Value(v)) => v.clone(),
        other => panic!("{component}.{port}: {other:?}"),
    }
}

#[test]
fn spiral_points_follow_closed_form() {
    let mut engine = EvaluationEngine::new(fixtures::spiral());
    let solution = engine.solve().unwrap();
    assert!(solution.errors.is_empty(), "{:?}", solution.errors);
    let expect = |i: usize| {
        let t = i as f64 * 6.0 * PI / 120.0;
        [t * t.cos(), t * t.sin(), t]
    };
    let points = output(&engine, fixtures::SPIRAL_POINT, "Point").as_points().unwrap();
    let curve = output(&engine, fixtures::SPIRAL_POLYLINE, "Polyline").as_curve().unwrap();
    assert_eq!(points.len(), 121);
    assert_eq!(curve.len(), 121);
    for (i, (p, c)) in points.iter().zip(&curve).enumerate() {
        let e = expect(i);
        for k in 0..3 {
            assert!((p[k] - e[k]).abs() <= 1e-9, "point {i}: {p:?} vs {e:?}");
            assert!((c[k] - e[k]).abs() <= 1e-9);
        }
    }
    let pipe = &solution.meshes[0];
    assert_eq!(pipe.vertices.len(), 121 * 8);
    assert_eq!(pipe.triangles.len(), 120 * 8 * 2);
}

#[test]
fn cube_has_eight_corners_at_half_size() {
    let mut engine = EvaluationEngine::new(fixtures::cube());
    for size in [1.0, 2.5, 0.1, 10.0] {
        engine.set_parameter(&ParameterUpdate::number(fixtures::CUBE_SIZE, size)).unwrap();
        let s = engine.solve().unwrap();
        assert_eq!(s.meshes.len(), 1);
        let m = &s.meshes[0];
        let corners: BTreeSet<[u32; 3]> = m.vertices.iter().map(|v| v.map(f32::to_bits)).collect();
        assert_eq!(corners.len(), 8);
        let h = (size / 2.0) as f32;
        let expected: BTreeSet<[u32; 3]> = (0..8)
            .map(|i| [i & 1, i & 2, i & 4].map(|b| if b == 0 { -h } else { h }).map(f32::to_bits))
            .collect();
        assert_eq!(corners, expected, "size {size}");
        assert_eq!(m.triangles.len(), 12);
    }
}

fn random_update(engine: &EvaluationEngine, rng: &mut impl Rng) -> ParameterUpdate {
    let params = engine.graph().parameters();
    let p = params.choose(rng).unwrap();
    let value = match &p.value {
        ParameterValue::Slider(s) => {
            // Mostly inside the range, sometimes outside to exercise clamping.
            let span = s.max - s.min;
            UpdateValue::Number(rng.gen_range(s.min - 0.2 * span..=s.max + 0.2 * span))
        }
        ParameterValue::Toggle(_) => UpdateValue::Boolean(rng.gen()),
        ParameterValue::List(l) => UpdateValue::Index(rng.gen_range(0..l.items.len() as u32)),
    };
    ParameterUpdate::new(p.guid.clone(), value)
}

#[test]
fn incremental_solve_equals_fresh_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for graph in [fixtures::spiral(), fixtures::cube()] {
        let mut engine = EvaluationEngine::new(graph);
        engine.solve().unwrap();
        for i in 0..200 {
            let u = random_update(&engine, &mut rng);
            engine.set_parameter(&u).unwrap();
            let inc = engine.solve().unwrap();
            if i % 20 == 19 {
                let mut fresh = EvaluationEngine::new(engine.graph().clone());
                let full = fresh.solve().unwrap();
                assert_eq!(inc.meshes, full.meshes);
                assert_eq!(inc.errors, full.errors);
                assert_eq!(engine.cache(), fresh.cache());
            }
        }
        let full = evaluate(engine.graph()).unwrap();
        assert_eq!(engine.solve().unwrap().meshes, full.meshes);
    }
}
