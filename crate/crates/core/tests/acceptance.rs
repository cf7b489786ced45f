// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use adflow::dataflow::{EvaluationEngine, Slot, Value};
use adflow::fixtures;
use adflow::geo::{from_web_mercator, haversine_distance, to_web_mercator, LatLon, EARTH_RADIUS};
use adflow::geometry::{box_mesh, compute_normals, from_render_coords, parse_obj, pipe_mesh, to_render_coords, Mesh};
use adflow::ghx::{parse_document, serialize_document, Document};
use adflow::graph::{GraphError, TypedGraph, VertexKind};
use adflow::net::Client;
use adflow::param::{ParameterUpdate, ParameterValue, UpdateValue};
use adflow::relay::Strategy;
use adflow::speech::{apply_command, parse_command, parse_number_words, Command};
use adflow::wire::{decode, decode_text, encode, encode_text, MeshData, Role, WireError, WireMessage};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::panic::AssertUnwindSafe;
use std::process::{Command as Process, ExitCode};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn graph_fuzz() -> Outcome {
    const OPS: usize = 100_000;
    const MAX_VERTICES: usize = 200;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a7f);
    let (mut refused, mut structural_refusals, mut done) = (0usize, 0usize, 0usize);
    let mut g = TypedGraph::new();
    while done < OPS {
        if done % 2_000 == 0 {
            let n = rng.gen_range(0..20);
            g = common::random_definition(&mut rng, n);
        }
        let before = (g.vertex_count(), g.edge_count(), g.groups().len());
        let structural = common::structural_edges(&g);
        match common::random_edit(&mut g, &mut rng, MAX_VERTICES) {
            Ok(()) => {}
            Err(e) => {
                refused += 1;
                if e == GraphError::StructuralEdgeForbidden {
                    structural_refusals += 1;
                }
                ensure!(
                    (g.vertex_count(), g.edge_count(), g.groups().len()) == before,
                    "op {done}: refused edit ({e}) changed the graph"
                );
            }
        }
        ensure!(g.vertex_count() <= MAX_VERTICES, "op {done}: {} vertices", g.vertex_count());
        let violations = g.validate();
        ensure!(violations.is_empty(), "op {done}: {}", violations[0]);
        ensure!(!common::has_cycle(&g), "op {done}: DFS found a cycle");
        for (a, b) in &structural {
            if g.contains(a) && g.contains(b) {
                ensure!(g.edge_kind(a, b).is_some(), "op {done}: structural edge {a} -> {b} vanished");
            }
        }
        done += 1;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "{OPS} ops, {refused} refused ({structural_refusals} structural), {:.1} s",
        elapsed.as_secs_f64()
    ))
}

fn file_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e1);
    let (mut groups, mut clusters, mut objects) = (0, 0, 0);
    for i in 0..500 {
        let n = rng.gen_range(0..40);
        let g = common::random_definition(&mut rng, n);
        groups += g.groups().len();
        clusters += g.vertices().filter(|v| v.kind == VertexKind::GenericPrimitive).count();
        let xml = serialize_document(&g);
        let (back, warnings) = parse_document(&xml).map_err(|e| format!("definition {i}: {e}"))?;
        ensure!(warnings.is_empty(), "definition {i}: warnings {warnings:?}");
        ensure!(back.canonical() == g.canonical(), "definition {i}: round trip differs");
        ensure!(serialize_document(&back) == xml, "definition {i}: re-serialization differs");

        let mut doc = Document::from_xml(&xml).map_err(|e| e.to_string())?;
        objects += doc.objects.len();
        doc.objects.shuffle(&mut rng);
        let (permuted, warnings) = parse_document(&doc.to_xml()).map_err(|e| format!("definition {i} permuted: {e}"))?;
        ensure!(warnings.is_empty(), "definition {i} permuted: warnings {warnings:?}");
        ensure!(permuted.canonical() == g.canonical(), "definition {i}: permuted order differs");
    }
    Ok(format!("500 definitions, {objects} objects, {groups} groups, {clusters} clusters; permutations resolved"))
}

fn evaluation_oracle() -> Outcome {
    // Spiral against t cos t, t sin t, t.
    let mut engine = EvaluationEngine::new(fixtures::spiral());
    let s = engine.solve().map_err(|e| e.to_string())?;
    ensure!(s.errors.is_empty(), "spiral errors: {:?}", s.errors);
    let port = engine
        .graph()
        .port_named(fixtures::SPIRAL_POINT, VertexKind::OutputPort, "Point")
        .ok_or("spiral has no Point output")?
        .id
        .clone();
    let points = match engine.slot(port.as_str()) {
        Some(Slot::Value(Value::PointList(p))) => p.clone(),
        other => return Err(format!("Point output holds {other:?}")),
    };
    ensure!(points.len() == 121, "{} samples", points.len());
    let mut worst = 0f64;
    for (i, p) in points.iter().enumerate() {
        let t = i as f64 * 6.0 * PI / 120.0;
        for (got, want) in p.iter().zip([t * t.cos(), t * t.sin(), t]) {
            worst = worst.max((got - want).abs());
        }
    }
    ensure!(worst <= 1e-9, "max deviation {worst:e}");

    // Cube corners.
    let mut cube = EvaluationEngine::new(fixtures::cube());
    for size in [1.0, 0.5, 7.25] {
        cube.set_parameter(&ParameterUpdate::number(fixtures::CUBE_SIZE, size)).map_err(|e| e.to_string())?;
        let m = cube.solve().map_err(|e| e.to_string())?.meshes;
        ensure!(m.len() == 1, "cube produced {} meshes", m.len());
        let corners: BTreeSet<[u32; 3]> = m[0].vertices.iter().map(|v| v.map(f32::to_bits)).collect();
        let h = (size / 2.0) as f32;
        let want: BTreeSet<[u32; 3]> = (0..8u32)
            .map(|i| [i & 1, i & 2, i & 4].map(|b| if b == 0 { -h } else { h }).map(f32::to_bits))
            .collect();
        ensure!(corners == want, "size {size}: corners {:?}", m[0].vertices);
    }

    // Incremental against fresh.
    let mut rng = ChaCha8Rng::seed_from_u64(0x1000);
    let mut checked = 0;
    for graph in [fixtures::spiral(), fixtures::cube()] {
        let mut engine = EvaluationEngine::new(graph);
        engine.solve().map_err(|e| e.to_string())?;
        let params = engine.graph().parameters();
        for i in 0..1000 {
            let p = params.choose(&mut rng).unwrap();
            let value = match &p.value {
                ParameterValue::Slider(s) => {
                    let span = s.max - s.min;
                    UpdateValue::Number(rng.gen_range(s.min - 0.1 * span..=s.max + 0.1 * span))
                }
                ParameterValue::Toggle(_) => UpdateValue::Boolean(rng.gen()),
                ParameterValue::List(l) => UpdateValue::Index(rng.gen_range(0..l.items.len() as u32)),
            };
            engine.set_parameter(&ParameterUpdate::new(p.guid.clone(), value)).map_err(|e| e.to_string())?;
            let inc = engine.solve().map_err(|e| e.to_string())?;
            if i % 10 == 9 {
                let mut fresh = EvaluationEngine::new(engine.graph().clone());
                let full = fresh.solve().map_err(|e| e.to_string())?;
                ensure!(inc.meshes == full.meshes, "update {i}: meshes differ");
                ensure!(engine.cache() == fresh.cache(), "update {i}: cached values differ");
                checked += 1;
            }
        }
    }
    Ok(format!(
        "121 samples within {worst:.1e}; 8 corners at ±size/2; 2×1000 updates, {checked} fresh comparisons equal"
    ))
}

fn geometry() -> Outcome {
    let helix: Vec<[f64; 3]> = (0..60).map(|i| {
        let t = i as f64 * 0.2;
        [2.0 * t.cos(), 2.0 * t.sin(), 0.3 * t]
    }).collect();
    let mut meshes = vec![
        box_mesh([0.0, 0.0, 0.0], 1.0).map_err(|e| e.to_string())?,
        box_mesh([-4.0, 2.5, 9.0], 3.3).map_err(|e| e.to_string())?,
        pipe_mesh(&helix, 0.25, 9).map_err(|e| e.to_string())?,
    ];
    // A closed irregular mesh: tetrahedron with outward winding.
    meshes.push(Mesh::new(
        vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 5.0]],
        vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
    ));
    let mut worst = 0f64;
    for (i, m) in meshes.iter().enumerate() {
        let r = to_render_coords(m);
        ensure!(to_render_coords(&r) == *m && from_render_coords(&r) == *m, "mesh {i}: not an involution");
        if i == 2 {
            continue; // open tube
        }
        let model = common::volume(&m.vertices, &m.triangles);
        let render = -common::volume(&r.vertices, &r.triangles);
        ensure!(model > 0.0, "mesh {i}: model volume {model}");
        worst = worst.max((render - model).abs() / model);
    }
    ensure!(worst <= 1e-6, "volume relative error {worst:e}");

    let tri = Mesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]);
    for n in compute_normals(&tri).0.normals.unwrap() {
        ensure!(
            n[0].abs() <= 1e-6 && n[1].abs() <= 1e-6 && (n[2] - 1.0).abs() <= 1e-6,
            "triangle normal {n:?}"
        );
    }
    let (cube, _) = compute_normals(&box_mesh([0.5, 0.5, 0.5], 1.0).map_err(|e| e.to_string())?);
    let inv = 1.0 / 3f64.sqrt();
    for (v, n) in cube.vertices.iter().zip(cube.normals.as_ref().unwrap()) {
        for k in 0..3 {
            let want = if v[k] > 0.5 { inv } else { -inv };
            ensure!((n[k] as f64 - want).abs() <= 1e-6, "corner {v:?} normal {n:?}");
        }
    }
    Ok(format!("involution on {} meshes; volume rel. error {worst:.1e}; normals within 1e-6", meshes.len()))
}

fn geodesy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4326);
    let mut worst = 0f64;
    for _ in 0..10_000 {
        let p = LatLon::new(rng.gen_range(-85.0..=85.0), rng.gen_range(-180.0..=180.0));
        let back = from_web_mercator(to_web_mercator(p).map_err(|e| e.to_string())?);
        worst = worst.max((back.lat - p.lat).abs()).max((back.lon - p.lon).abs());
    }
    ensure!(worst <= 1e-9, "round trip error {worst:e} deg");

    let y = to_web_mercator(LatLon::new(45.0, 0.0)).map_err(|e| e.to_string())?.y;
    let closed = 6378137.0 * (PI / 4.0 + 45f64.to_radians() / 2.0).tan().ln();
    ensure!((y - closed).abs() <= 0.01, "(45,0): {y} vs {closed}");

    let quarter = haversine_distance(LatLon::new(0.0, 0.0), LatLon::new(0.0, 90.0));
    let want = EARTH_RADIUS * PI / 2.0;
    ensure!((quarter - want).abs() / want <= 1e-6, "quarter meridian {quarter}");

    let mut slack = f64::INFINITY;
    for _ in 0..10_000 {
        let mut p = || LatLon::new(rng.gen_range(-90.0..=90.0), rng.gen_range(-180.0..=180.0));
        let (a, b, c) = (p(), p(), p());
        let ab = haversine_distance(a, b);
        ensure!(ab == haversine_distance(b, a), "asymmetric at {a:?} {b:?}");
        ensure!(haversine_distance(a, a) == 0.0, "d(a,a) != 0");
        let gap = haversine_distance(a, b) + haversine_distance(b, c) - haversine_distance(a, c);
        ensure!(gap >= -1e-6, "triangle inequality fails by {gap} m");
        slack = slack.min(gap);
        let v = common::central_angle_distance(a.lat, a.lon, b.lat, b.lon, EARTH_RADIUS);
        ensure!((ab - v).abs() <= 1e-6, "haversine {ab} vs vector form {v}");
    }
    Ok(format!(
        "1e4 round trips within {worst:.1e} deg; (45,0) off by {:.1e} m; quarter meridian rel. {:.1e}; 1e4 triples, min slack {slack:.1e} m",
        (y - closed).abs(),
        (quarter - want).abs() / want
    ))
}

fn wire() -> Outcome {
    let empty = encode(&WireMessage::components([]));
    ensure!(empty.starts_with(b"PARA\x01\x01"), "header {:02x?}", &empty[..6.min(empty.len())]);
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let mut prefixes = 0usize;
    for i in 0..10_000 {
        let m = common::wire::message(&mut rng);
        let bytes = encode(&m);
        ensure!(decode(&bytes).as_ref() == Ok(&m), "message {i}: binary round trip");
        ensure!(decode_text(&encode_text(&m)).as_ref() == Ok(&m), "message {i}: text round trip");
        for cut in 0..bytes.len() {
            ensure!(decode(&bytes[..cut]) == Err(WireError::Truncated), "message {i}: prefix {cut} not Truncated");
            prefixes += 1;
        }
    }
    Ok(format!("1e4 messages lossless in both codecs; {prefixes} truncations all Truncated"))
}

fn relay() -> Outcome {
    use common::relay::*;
    let start = Instant::now();
    let mut rejected = 0;
    for seed in 0..3 {
        let t = simulate(Strategy::Overwrite, seed, 1000);
        check_last_writer(&t)?;
        check_rate(&t)?;
        check_no_lost_finals(&t)?;
        let t = simulate(Strategy::ReactiveLock, seed, 1000);
        ensure!(t.non_holder_forwards == 0, "{} non-holder forwards", t.non_holder_forwards);
        check_rate(&t)?;
        rejected += t.rejected;
    }
    for seed in 0..100 {
        check_host_departures(seed, 2 + seed as usize % 9)?;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "4 designers × 1000 updates × 6 guids; last writer kept; 0 non-holder forwards ({rejected} rejects); ≤1 per 100 ms; 100 host departure runs; {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn speech() -> Outcome {
    let examples = [
        ("Add slider with value 7", Command::AddSlider { value: 7.0 }),
        ("Add boolean toggle with value true", Command::AddToggle { value: true }),
        ("Add component circle", Command::AddComponent { type_name: "circle".into(), value: None }),
    ];
    for (text, want) in examples {
        let got = parse_command(text).map_err(|e| format!("{text:?}: {e}"))?;
        ensure!(got == want, "{text:?} parsed as {got:?}");
    }
    let sentences = common::speech::sentences();
    ensure!(sentences.len() <= 3000, "{} sentences", sentences.len());
    let mut g = TypedGraph::new();
    for (text, want) in &sentences {
        let cmd = parse_command(text).map_err(|e| format!("{text:?}: {e}"))?;
        ensure!(&cmd == want, "{text:?} parsed as {cmd:?}");
        apply_command(&mut g, &cmd).map_err(|e| format!("{text:?}: {e}"))?;
        if g.vertex_count() > 200 {
            ensure!(g.validate().is_empty(), "invalid graph after {text:?}");
            g = TypedGraph::new();
        }
    }
    ensure!(g.validate().is_empty(), "invalid graph at the end");
    for n in 0..=9999u64 {
        for style in 0..4 {
            let words = common::spell(n, style);
            ensure!(parse_number_words(&words).ok() == Some(n as i64), "{words:?}");
        }
    }
    Ok(format!("3 example commands; {} grammar sentences parsed and applied; 0..=9999 in 4 spellings", sentences.len()))
}

fn end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_adflow");
    let file = common::e2e::fixture("spiral.xml");
    let served = common::e2e::serve(bin, &[&file, "--bind", "127.0.0.1:0"]);
    let mut client = Client::connect(served.addr, Role::Designer).map_err(|e| e.to_string())?;
    let wait = Duration::from_secs(10);
    let is_mesh = |m: &WireMessage| matches!(m, WireMessage::MeshData(_));
    client.wait_for(wait, is_mesh, &mut |_| {}).ok_or("no initial mesh")?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut latencies = Vec::new();
    for (i, radius) in [0.3, 0.75, 1.5, 0.05].into_iter().enumerate() {
        // Stay outside the rate-limit window between edits.
        std::thread::sleep(Duration::from_millis(150));
        let sent = Instant::now();
        client
            .set(fixtures::SPIRAL_RADIUS, UpdateValue::Number(radius))
            .map_err(|e| e.to_string())?;
        let got = client.wait_for(wait, is_mesh, &mut |_| {}).ok_or("no mesh after update")?;
        latencies.push(sent.elapsed());
        let WireMessage::MeshData(got) = got else { unreachable!() };

        let obj = dir.path().join(format!("eval{i}.obj"));
        let out = Process::new(bin)
            .args(["eval", &file, "--set", &format!("{}={radius}", fixtures::SPIRAL_RADIUS), "--out"])
            .arg(&obj)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "eval failed: {}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(&obj).map_err(|e| e.to_string())?;
        let parsed = parse_obj(&text).map_err(|e| e.to_string())?;
        let expected = MeshData {
            guid: got.guid.clone(),
            meshes: parsed.meshes.iter().map(|m| (&from_render_coords(m)).into()).collect(),
            geo: None,
        };
        ensure!(got == expected, "radius {radius}: streamed mesh differs from eval output");
    }
    client.close();
    let worst = *latencies.iter().max().unwrap();
    ensure!(worst < Duration::from_millis(100), "latency {worst:?}");
    Ok(format!(
        "{} slider changes, streamed geometry equals eval; worst latency {:.1} ms",
        latencies.len(),
        worst.as_secs_f64() * 1e3
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("graph validity fuzz", graph_fuzz),
        ("file round trip", file_round_trip),
        ("evaluation oracle", evaluation_oracle),
        ("geometry", geometry),
        ("geodesy", geodesy),
        ("wire", wire),
        ("relay simulation", relay),
        ("speech", speech),
        ("end-to-end", end_to_end),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let outcome = std::panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
