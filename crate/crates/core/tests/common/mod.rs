// SPDX-License-Identifier: Apache-2.0

//! Generators and independent oracles shared by the integration tests.

#![allow(dead_code)]

use adflow::dataflow::{GENERIC_PRIMITIVE, REGISTRY};
use adflow::graph::{EdgeKind, GraphError, Payload, TypedGraph, VertexId, VertexKind};
use adflow::param::{Accuracy, ListChoice, ParameterValue, Slider};
use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashMap;
use std::collections::{HashMap, HashSet, VecDeque};

pub fn type_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|d| d.name).collect()
}

/// Cycle check by iterative three-colour DFS over the raw edge list.
pub fn has_cycle(g: &TypedGraph) -> bool {
    let index: FxHashMap<&str, usize> = g.vertices().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
    let mut adj = vec![Vec::new(); index.len()];
    for (a, b, _) in g.edges() {
        adj[index[a.as_str()]].push(index[b.as_str()]);
    }
    // 0 white, 1 on stack, 2 done
    let mut colour = vec![0u8; adj.len()];
    for start in 0..adj.len() {
        if colour[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        colour[start] = 1;
        while let Some((node, i)) = stack.pop() {
            match adj[node].get(i).copied() {
                None => colour[node] = 2,
                Some(n) => {
                    stack.push((node, i + 1));
                    match colour[n] {
                        1 => return true,
                        2 => {}
                        _ => {
                            colour[n] = 1;
                            stack.push((n, 0));
                        }
                    }
                }
            }
        }
    }
    false
}

/// Multi-source BFS from every in-degree-0 vertex.
pub fn bfs_depths(g: &TypedGraph) -> HashMap<String, usize> {
    let mut indeg: HashMap<&str, usize> = g.vertices().map(|v| (v.id.as_str(), 0)).collect();
    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    for (a, b, _) in g.edges() {
        *indeg.get_mut(b.as_str()).unwrap() += 1;
        adj.entry(a.as_str()).or_default().push(b.as_str());
    }
    let mut dist: HashMap<String, usize> = HashMap::new();
    let mut q = VecDeque::new();
    for (v, d) in &indeg {
        if *d == 0 {
            dist.insert(v.to_string(), 0);
            q.push_back(*v);
        }
    }
    while let Some(v) = q.pop_front() {
        let d = dist[v];
        for n in adj.get(v).into_iter().flatten() {
            if !dist.contains_key(*n) {
                dist.insert(n.to_string(), d + 1);
                q.push_back(n);
            }
        }
    }
    dist
}

/// Snapshot of every port/component edge.
pub fn structural_edges(g: &TypedGraph) -> HashSet<(String, String)> {
    g.edges()
        .filter(|(_, _, k)| *k == EdgeKind::Structural)
        .map(|(a, b, _)| (a.to_string(), b.to_string()))
        .collect()
}

pub fn random_slider(rng: &mut impl Rng) -> Slider {
    let accuracy = *[Accuracy::Float, Accuracy::Integer, Accuracy::Even, Accuracy::Odd]
        .choose(rng)
        .unwrap();
    let min = rng.gen_range(-100i32..50) as f64;
    let max = min + rng.gen_range(4i32..200) as f64;
    let mut s = Slider::new(min, min, max).with_accuracy(accuracy);
    s.decimals = rng.gen_range(0..6);
    s.set(rng.gen_range(min..=max));
    s
}

fn random_text(rng: &mut impl Rng) -> String {
    const ALPHABET: &[char] = &['a', 'Z', '7', ' ', '|', '\\', '<', '>', '&', '"', '\'', '\n', '\t', 'é', '∑', ','];
    let n = rng.gen_range(0..12);
    (0..n).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

fn random_payload(kind: &str, rng: &mut impl Rng) -> Option<Payload> {
    Some(match kind {
        "NumberSlider" => Payload::Parameter(ParameterValue::Slider(random_slider(rng))),
        "BooleanToggle" => Payload::Parameter(ParameterValue::Toggle(rng.gen())),
        "Panel" => Payload::Panel(random_text(rng)),
        "ListParameter" => {
            let n = rng.gen_range(1..5);
            let items: Vec<String> = (0..n).map(|_| random_text(rng)).collect();
            Payload::Parameter(ParameterValue::List(ListChoice {
                selected: rng.gen_range(0..items.len()),
                items,
            }))
        }
        _ => return None,
    })
}

/// Random position on a coarse grid with some fractional values.
fn random_position(rng: &mut impl Rng) -> [f64; 2] {
    [rng.gen_range(-500..500) as f64 * 0.25, rng.gen_range(-500..500) as f64 * 1.5]
}

/// Adds one random component (sometimes an opaque cluster) with random
/// state. Returns its id.
pub fn add_random_component(g: &mut TypedGraph, rng: &mut impl Rng) -> VertexId {
    if rng.gen_bool(0.08) {
        let id = g.add_component(GENERIC_PRIMITIVE, "cluster", random_position(rng)).unwrap();
        let n = rng.gen_range(0..24);
        let bytes: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
        g.set_payload(id.as_str(), Payload::Opaque(bytes)).unwrap();
        return id;
    }
    let names = type_names();
    let name = *names.choose(rng).unwrap();
    let id = g.add_component(name, &random_text(rng), random_position(rng)).unwrap();
    if let Some(p) = random_payload(name, rng) {
        g.set_payload(id.as_str(), p).unwrap();
    }
    if rng.gen_bool(0.2) {
        g.set_setting(id.as_str(), "Expression", random_text(rng)).unwrap();
    }
    id
}

/// Vertices a user link may start from, and those it may end at.
pub fn link_endpoints(g: &TypedGraph) -> (Vec<VertexId>, Vec<VertexId>) {
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    for v in g.vertices() {
        match v.kind {
            VertexKind::OutputPort => sources.push(v.id.clone()),
            VertexKind::InputPort => targets.push(v.id.clone()),
            VertexKind::PrimitiveComponent | VertexKind::GenericPrimitive => {
                sources.push(v.id.clone());
                targets.push(v.id.clone());
            }
            VertexKind::IoComponent => {}
        }
    }
    (sources, targets)
}

/// A random valid definition: components, acyclic links and groups.
pub fn random_definition(rng: &mut impl Rng, components: usize) -> TypedGraph {
    let mut g = TypedGraph::new();
    for _ in 0..components {
        add_random_component(&mut g, rng);
    }
    let (sources, targets) = link_endpoints(&g);
    if !sources.is_empty() && !targets.is_empty() {
        for _ in 0..components * 2 {
            let a = sources.choose(rng).unwrap();
            let b = targets.choose(rng).unwrap();
            let _ = g.add_link(a.as_str(), b.as_str());
        }
    }
    let tops: Vec<VertexId> = g.vertices().filter(|v| !v.kind.is_port()).map(|v| v.id.clone()).collect();
    for _ in 0..rng.gen_range(0..3) {
        if tops.is_empty() {
            break;
        }
        let k = rng.gen_range(1..=tops.len().min(4));
        let members: Vec<VertexId> = tops.choose_multiple(rng, k).cloned().collect();
        g.create_group(&members, &random_text(rng), rng.gen()).unwrap();
    }
    g
}

/// One random edit. Returns the error if the graph refused it.
pub fn random_edit(g: &mut TypedGraph, rng: &mut impl Rng, max_vertices: usize) -> Result<(), GraphError> {
    let all: Vec<VertexId> = g.vertices().map(|v| v.id.clone()).collect();
    let pick = |rng: &mut dyn rand::RngCore| all.choose(rng).cloned();
    match rng.gen_range(0..100) {
        0..=14 => {
            // Pipe is the biggest component: itself plus four ports.
            if g.vertex_count() + 5 > max_vertices {
                return g.remove_component(pick(rng).map(|v| v.to_string()).unwrap_or_default().as_str()).map(|_| ());
            }
            add_random_component(g, rng);
            Ok(())
        }
        15..=54 => {
            let (sources, targets) = link_endpoints(g);
            let a = if rng.gen_bool(0.9) { sources.choose(rng).cloned() } else { pick(rng) };
            let b = if rng.gen_bool(0.9) { targets.choose(rng).cloned() } else { pick(rng) };
            match (a, b) {
                (Some(a), Some(b)) => g.add_link(a.as_str(), b.as_str()),
                _ => Ok(()),
            }
        }
        55..=69 => {
            let edges: Vec<(VertexId, VertexId)> = g.edges().map(|(a, b, _)| (a.clone(), b.clone())).collect();
            match edges.choose(rng) {
                Some((a, b)) => g.remove_link(a.as_str(), b.as_str()),
                None => Ok(()),
            }
        }
        70..=79 => match pick(rng) {
            Some(v) => g.remove_component(v.as_str()).map(|_| ()),
            None => Ok(()),
        },
        80..=87 => match pick(rng) {
            Some(v) => g.move_component(v.as_str(), random_position(rng)),
            None => Ok(()),
        },
        88..=94 => {
            let k = rng.gen_range(0..4).min(all.len());
            let members: Vec<VertexId> = all.choose_multiple(rng, k).cloned().collect();
            g.create_group(&members, "g", [1, 2, 3, 4]).map(|_| ())
        }
        _ => {
            let groups: Vec<VertexId> = g.groups().iter().map(|gr| gr.id.clone()).collect();
            match groups.choose(rng) {
                Some(id) => g.dissolve_group(id.as_str()).map(|_| ()),
                None => Ok(()),
            }
        }
    }
}

/// English spelling of 0..=999_999_999, built top-down from the value; the
/// `and` and hyphen choices vary with `style`.
pub fn spell(n: u64, style: u8) -> String {
    const UNITS: [&str; 20] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
        "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    ];
    const TENS: [&str; 10] = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
    let use_and = style & 1 == 1;
    let hyphen = style & 2 == 2;
    if n == 0 {
        return "zero".into();
    }
    let below_hundred = |n: u64| -> String {
        if n < 20 {
            UNITS[n as usize].to_string()
        } else if n % 10 == 0 {
            TENS[(n / 10) as usize].to_string()
        } else {
            let sep = if hyphen { "-" } else { " " };
            format!("{}{sep}{}", TENS[(n / 10) as usize], UNITS[(n % 10) as usize])
        }
    };
    let below_thousand = |n: u64, words: &mut Vec<String>| {
        let h = n / 100;
        let r = n % 100;
        if h > 0 {
            words.push(UNITS[h as usize].into());
            words.push("hundred".into());
            if r > 0 && use_and {
                words.push("and".into());
            }
        }
        if r > 0 {
            words.push(below_hundred(r));
        }
    };
    let mut words = Vec::new();
    let mut rest = n;
    for (scale, name) in [(1_000_000u64, "million"), (1_000, "thousand")] {
        let q = rest / scale;
        rest %= scale;
        if q > 0 {
            below_thousand(q, &mut words);
            words.push(name.into());
        }
    }
    if rest > 0 {
        if n >= 1000 && rest < 100 && use_and {
            words.push("and".into());
        }
        below_thousand(rest, &mut words);
    }
    words.join(" ")
}

/// Great-circle distance from the spherical law of cosines, computed with
/// unit vectors rather than the haversine formula.
pub fn central_angle_distance(lat1: f64, lon1: f64, lat2: f64, lon2: f64, radius: f64) -> f64 {
    let v = |lat: f64, lon: f64| {
        let (la, lo) = (lat.to_radians(), lon.to_radians());
        [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
    };
    let (a, b) = (v(lat1, lon1), v(lat2, lon2));
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    radius * sin.atan2(cos)
}

/// Signed volume by the divergence theorem, with the orientation sign
/// supplied by the caller (the render frame is left-handed).
pub fn volume(vertices: &[[f32; 3]], triangles: &[[u32; 3]]) -> f64 {
    let p = |i: u32| {
        let v = vertices[i as usize];
        [v[0] as f64, v[1] as f64, v[2] as f64]
    };
    triangles
        .iter()
        .map(|t| {
            let (a, b, c) = (p(t[0]), p(t[1]), p(t[2]));
            (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]))
                / 6.0
        })
        .sum()
}

pub mod wire {
    use adflow::geometry::GeoAnchor;
    use adflow::param::{Accuracy, ParameterUpdate, UpdateValue};
    use adflow::wire::{Component, Control, MeshBody, MeshData, Role, WireMessage};
    use rand::seq::SliceRandom;
    use rand::Rng;

    pub fn string(rng: &mut impl Rng) -> String {
        const POOL: &[char] = &['a', 'B', '0', '-', ' ', '"', '\\', '\n', 'ü', '語', '🙂', '{', '}'];
        (0..rng.gen_range(0..10)).map(|_| *POOL.choose(rng).unwrap()).collect()
    }

    /// Finite floats with a bias towards awkward magnitudes.
    pub fn f64_finite(rng: &mut impl Rng) -> f64 {
        match rng.gen_range(0..5) {
            0 => 0.0,
            1 => -0.0,
            2 => f64::from_bits(rng.gen::<u64>() & !(0x7ffu64 << 52) | (rng.gen_range(1u64..0x7fe) << 52)),
            3 => rng.gen_range(-1e6..1e6),
            _ => f64::MIN_POSITIVE * rng.gen_range(1.0..4.0),
        }
    }

    pub fn f32_finite(rng: &mut impl Rng) -> f32 {
        loop {
            let v = f32::from_bits(rng.gen());
            if v.is_finite() {
                return v;
            }
        }
    }

    fn component(rng: &mut impl Rng) -> Component {
        match rng.gen_range(0..3) {
            0 => Component::BooleanToggle { name: string(rng), guid: string(rng), value: rng.gen() },
            1 => Component::NumberSlider {
                name: string(rng),
                guid: string(rng),
                value: f32_finite(rng),
                accuracy: *[Accuracy::Float, Accuracy::Integer, Accuracy::Even, Accuracy::Odd].choose(rng).unwrap(),
                min: f32_finite(rng),
                max: f32_finite(rng),
                epsilon: f32_finite(rng),
                decimal_places: rng.gen(),
            },
            _ => Component::ListParameter {
                name: string(rng),
                guid: string(rng),
                items: (0..rng.gen_range(0..4)).map(|_| string(rng)).collect(),
                selected: rng.gen(),
            },
        }
    }

    fn control(rng: &mut impl Rng) -> Control {
        match rng.gen_range(0..9) {
            0 => Control::Hello { role: if rng.gen() { Role::Designer } else { Role::Viewer } },
            1 => Control::HostAssign { you: rng.gen(), address: string(rng) },
            2 => Control::HostChanged { address: string(rng) },
            3 => Control::LockRequest { guid: string(rng) },
            4 => Control::LockGrant { guid: string(rng) },
            5 => Control::LockDeny { guid: string(rng), holder: string(rng) },
            6 => Control::LockRelease { guid: string(rng) },
            7 => Control::Reject { guid: string(rng), reason: string(rng) },
            _ => Control::Presence { data: (0..rng.gen_range(0..40)).map(|_| rng.gen()).collect() },
        }
    }

    pub fn message(rng: &mut impl Rng) -> WireMessage {
        match rng.gen_range(0..4) {
            0 => WireMessage::components((0..rng.gen_range(0..5)).map(|_| component(rng)).collect::<Vec<_>>()),
            1 => WireMessage::MeshData(MeshData {
                guid: string(rng),
                meshes: (0..rng.gen_range(0..3))
                    .map(|_| MeshBody {
                        vertices: (0..rng.gen_range(0..6)).map(|_| [f32_finite(rng), f32_finite(rng), f32_finite(rng)]).collect(),
                        triangles: (0..rng.gen_range(0..4)).map(|_| rng.gen()).collect(),
                    })
                    .collect(),
                geo: rng.gen_bool(0.5).then(|| GeoAnchor {
                    lat: f64_finite(rng),
                    lon: f64_finite(rng),
                    heading: f64_finite(rng),
                }),
            }),
            2 => WireMessage::ParameterUpdate(ParameterUpdate::new(
                string(rng),
                match rng.gen_range(0..3) {
                    0 => UpdateValue::Boolean(rng.gen()),
                    1 => UpdateValue::Number(f64_finite(rng)),
                    _ => UpdateValue::Index(rng.gen()),
                },
            )),
            _ => WireMessage::Control(control(rng)),
        }
    }
}

pub mod relay {
    use adflow::param::ParameterUpdate;
    use adflow::relay::{ClientId, Effect, RelayConfig, SessionState, Strategy};
    use adflow::wire::{Control, Role, WireMessage};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeMap, HashMap};
    use std::time::Duration;

    pub const GUIDS: [&str; 6] = ["g0", "g1", "g2", "g3", "g4", "g5"];
    pub const INTERVAL: Duration = Duration::from_millis(100);

    #[derive(Debug, Default)]
    pub struct Trace {
        /// (time, from, guid, value) of everything handed to the engine.
        pub engine: Vec<(Duration, ClientId, String, f64)>,
        /// (time, from, guid, value) of every update a client sent.
        pub sent: Vec<(Duration, ClientId, String, f64)>,
        pub rejected: usize,
        /// Engine forwards from a client that did not hold the lock then.
        pub non_holder_forwards: usize,
    }

    fn record(s: &SessionState, trace: &mut Trace, now: Duration, effects: Vec<Effect>, locking: bool) {
        for e in effects {
            match e {
                Effect::Engine { from, update } => {
                    if locking && s.lock_holder(&update.guid) != Some(from) {
                        trace.non_holder_forwards += 1;
                    }
                    let v = match update.value {
                        adflow::param::UpdateValue::Number(v) => v,
                        _ => unreachable!(),
                    };
                    trace.engine.push((now, from, update.guid, v));
                }
                Effect::Send { msg: WireMessage::Control(Control::Reject { .. }), .. } => trace.rejected += 1,
                Effect::Send { .. } => {}
            }
        }
    }

    fn flush_until(s: &mut SessionState, trace: &mut Trace, t: Duration, locking: bool) {
        while let Some(d) = s.next_deadline().filter(|d| *d <= t) {
            let effects = s.poll(d);
            record(s, trace, d, effects, locking);
        }
    }

    /// Four designers send `updates` numbered values at random to six
    /// parameters on a simulated clock.
    pub fn simulate(strategy: Strategy, seed: u64, updates: usize) -> Trace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let locking = matches!(strategy, Strategy::ReactiveLock | Strategy::PreemptiveLock);
        let mut s = SessionState::new(RelayConfig {
            strategy,
            min_interval: INTERVAL,
            ..RelayConfig::default()
        });
        let clients: Vec<ClientId> = (0..4)
            .map(|i| s.on_connect(Role::Designer, format!("10.0.0.{i}"), Duration::ZERO).0)
            .collect();
        let mut trace = Trace::default();
        let mut now = Duration::ZERO;
        for n in 0..updates {
            now += Duration::from_millis(rng.gen_range(0..40));
            flush_until(&mut s, &mut trace, now, locking);
            let from = *clients.choose(&mut rng).unwrap();
            let guid = *GUIDS.choose(&mut rng).unwrap();
            if locking && rng.gen_bool(0.05) {
                let effects = s.on_lock_release(from, guid, now);
                record(&s, &mut trace, now, effects, locking);
                continue;
            }
            if strategy == Strategy::PreemptiveLock && rng.gen_bool(0.1) {
                let effects = s.on_lock_request(from, guid, now);
                record(&s, &mut trace, now, effects, locking);
            }
            let value = n as f64;
            trace.sent.push((now, from, guid.to_string(), value));
            let (_, effects) = s.on_parameter_update(from, ParameterUpdate::number(guid, value), now);
            record(&s, &mut trace, now, effects, locking);
        }
        flush_until(&mut s, &mut trace, Duration::MAX, locking);
        trace
    }

    /// Last value the engine saw per guid must be the last value sent.
    pub fn check_last_writer(trace: &Trace) -> Result<(), String> {
        let mut last_sent: BTreeMap<&str, f64> = BTreeMap::new();
        for (_, _, g, v) in &trace.sent {
            last_sent.insert(g, *v);
        }
        let mut last_seen: BTreeMap<&str, f64> = BTreeMap::new();
        for (_, _, g, v) in &trace.engine {
            last_seen.insert(g, *v);
        }
        if last_sent == last_seen {
            Ok(())
        } else {
            Err(format!("sent {last_sent:?}, engine ended with {last_seen:?}"))
        }
    }

    /// At most one forward per (client, guid) per interval.
    pub fn check_rate(trace: &Trace) -> Result<(), String> {
        let mut last: HashMap<(ClientId, &str), Duration> = HashMap::new();
        for (t, c, g, _) in &trace.engine {
            if let Some(prev) = last.insert((*c, g), *t) {
                if *t - prev < INTERVAL {
                    return Err(format!("client {c} guid {g}: forwards at {prev:?} and {t:?}"));
                }
            }
        }
        Ok(())
    }

    /// Each client's final value for a guid reaches the engine unless some
    /// other client wrote that guid later.
    pub fn check_no_lost_finals(trace: &Trace) -> Result<(), String> {
        let mut last: HashMap<(ClientId, &str), (usize, f64)> = HashMap::new();
        let mut last_any: HashMap<&str, usize> = HashMap::new();
        for (i, (_, c, g, v)) in trace.sent.iter().enumerate() {
            last.insert((*c, g), (i, *v));
            last_any.insert(g, i);
        }
        for ((c, g), (i, v)) in &last {
            let superseded = trace.sent[*i + 1..].iter().any(|(_, o, og, _)| og == g && o != c);
            if superseded || last_any[g] < *i {
                continue;
            }
            if !trace.engine.iter().any(|(_, ec, eg, ev)| ec == c && eg == g && ev == v) {
                return Err(format!("client {c} guid {g}: final value {v} never forwarded"));
            }
        }
        Ok(())
    }

    /// Clients with mixed roles leave in random order; every departure of
    /// the host must produce exactly one HostChanged per survivor, naming
    /// the earliest-joined survivor, and other departures none.
    pub fn check_host_departures(seed: u64, clients: usize) -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = SessionState::new(RelayConfig::default());
        let mut joined: Vec<(ClientId, String)> = Vec::new();
        for i in 0..clients {
            let role = if rng.gen_bool(0.5) { Role::Designer } else { Role::Viewer };
            let addr = format!("192.168.1.{i}");
            let (id, _) = s.on_connect(role, addr.clone(), Duration::from_millis(i as u64));
            joined.push((id, addr));
        }
        let mut order = joined.clone();
        order.shuffle(&mut rng);
        for (leaving, _) in order {
            let was_host = s.host() == Some(leaving);
            let effects = s.on_disconnect(leaving, Duration::ZERO);
            joined.retain(|(id, _)| *id != leaving);
            let mut per_client: BTreeMap<ClientId, Vec<String>> = BTreeMap::new();
            for e in effects {
                if let Effect::Send { to, msg: WireMessage::Control(Control::HostChanged { address }) } = e {
                    per_client.entry(to).or_default().push(address);
                }
            }
            if !was_host || joined.is_empty() {
                if !per_client.is_empty() {
                    return Err(format!("client {leaving} was not host but HostChanged went out"));
                }
                continue;
            }
            let earliest = joined.iter().min_by_key(|(id, _)| *id).unwrap();
            if s.host() != Some(earliest.0) {
                return Err(format!("host is {:?}, expected {}", s.host(), earliest.0));
            }
            for (id, _) in &joined {
                match per_client.get(id).map(Vec::as_slice) {
                    Some([a]) if *a == earliest.1 => {}
                    other => return Err(format!("client {id} got {other:?} after host {leaving} left")),
                }
            }
            if per_client.len() != joined.len() {
                return Err("HostChanged sent to a departed client".into());
            }
        }
        Ok(())
    }
}

pub mod speech {
    use super::spell;
    use adflow::dataflow::REGISTRY;
    use adflow::speech::{Command, InitialValue};

    fn casings(word: &str) -> Vec<String> {
        vec![word.to_lowercase(), word.to_uppercase(), {
            let mut c = word.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
        }]
    }

    fn numbers() -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = ["0", "7", "42", "3.5", "-2", "1000", "0.125", "-17.25"]
            .iter()
            .map(|s| (s.to_string(), s.parse().unwrap()))
            .collect();
        for (i, n) in [1u64, 13, 20, 99, 100, 305, 1200, 4011, 70_000, 2_000_019].into_iter().enumerate() {
            out.push((spell(n, i as u8 % 4), n as f64));
        }
        out.push(("minus twelve".into(), -12.0));
        out
    }

    /// Sentences the grammar must accept, with the command each denotes.
    pub fn sentences() -> Vec<(String, Command)> {
        let mut out = Vec::new();
        for add in casings("add") {
            for d in REGISTRY {
                for name in std::iter::once(d.name).chain(d.aliases.iter().copied()) {
                    for n in [name.to_string(), name.to_lowercase()] {
                        out.push((
                            format!("{add} component {n}"),
                            Command::AddComponent { type_name: n.clone(), value: None },
                        ));
                        let values: Vec<(String, InitialValue)> = match d.name {
                            "NumberSlider" | "Panel" => {
                                numbers().into_iter().map(|(s, v)| (s, InitialValue::Number(v))).collect()
                            }
                            "BooleanToggle" => vec![
                                ("true".into(), InitialValue::Boolean(true)),
                                ("false".into(), InitialValue::Boolean(false)),
                            ],
                            _ => vec![],
                        };
                        for (s, v) in values {
                            out.push((
                                format!("{add} component {n} with value {s}"),
                                Command::AddComponent { type_name: n.clone(), value: Some(v) },
                            ));
                        }
                    }
                }
            }
            for (s, v) in numbers() {
                for slider in casings("slider") {
                    out.push((format!("{add} {slider} with value {s}"), Command::AddSlider { value: v }));
                }
            }
            for b in [true, false] {
                for toggle in ["boolean toggle", "Boolean Toggle", "BOOLEAN TOGGLE"] {
                    for word in casings(&b.to_string()) {
                        out.push((format!("{add} {toggle} with value {word}"), Command::AddToggle { value: b }));
                    }
                }
            }
            for text in ["hello", "Hello, World", "with value 7", "add panel", "  spaced  out ", "ünïcödé ✓"] {
                out.push((format!("{add} panel with text {text}"), Command::AddPanel { text: text.trim().to_string() }));
            }
        }
        out
    }
}

pub mod e2e {
    use std::io::{BufRead, BufReader};
    use std::net::SocketAddr;
    use std::process::{Child, Command, Stdio};

    /// `adflow serve` child process, killed on drop.
    pub struct Served {
        child: Child,
        pub addr: SocketAddr,
        pub ws_addr: Option<SocketAddr>,
    }

    impl Drop for Served {
        fn drop(&mut self) {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }

    pub fn fixture(name: &str) -> String {
        format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    pub fn serve(bin: &str, args: &[&str]) -> Served {
        let mut child = Command::new(bin)
            .arg("serve")
            .args(args)
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .expect("spawn adflow serve");
        let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
        let mut addr = None;
        let mut ws_addr = None;
        for line in lines.by_ref() {
            let line = line.unwrap();
            if let Some(a) = line.strip_prefix("listening on ") {
                addr = Some(a.parse().unwrap());
            } else if let Some(a) = line.strip_prefix("websocket on ") {
                ws_addr = Some(a.parse().unwrap());
            }
            if addr.is_some() && (ws_addr.is_some() || !args.contains(&"--ws-bind")) {
                break;
            }
        }
        // Keep draining so the child never blocks on a full pipe.
        std::thread::spawn(move || lines.for_each(drop));
        Served {
            child,
            addr: addr.expect("server printed its address"),
            ws_addr,
        }
    }
}
