// SPDX-License-Identifier: Apache-2.0

use adflow::dataflow::EvaluationEngine;
use adflow::geo::{from_web_mercator, haversine_distance, to_web_mercator, LatLon, MercatorXY};
use adflow::geometry::{compute_normals, export_obj, to_render_coords};
use adflow::ghx::{parse_document, serialize_document, Document};
use adflow::graph::TypedGraph;
use adflow::net::{self, Client, ServerConfig};
use adflow::param::ParameterUpdate;
use adflow::relay::{ClientId, RelayConfig, Strategy};
use adflow::speech::{apply_command, parse_command};
use adflow::wire::Role;
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "adflow", version, about = "Headless algorithmic-design engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print vertex, edge and group counts of a definition.
    Parse { file: PathBuf },
    /// List graph invariant violations; exit 2 if there are any.
    Validate { file: PathBuf },
    /// Evaluate a definition and write the resulting meshes as OBJ.
    Eval {
        file: PathBuf,
        /// Parameter override, GUID=VALUE. Repeatable.
        #[arg(long = "set", value_name = "GUID=VALUE")]
        set: Vec<String>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve a definition to remote clients.
    Serve {
        file: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: String,
        /// Also accept WebSocket clients on this address.
        #[arg(long)]
        ws_bind: Option<String>,
        #[arg(long, default_value = "overwrite")]
        strategy: Strategy,
        #[arg(long, default_value_t = 100)]
        rate_limit_ms: u64,
        #[arg(long, default_value_t = 64)]
        max_presence_queue: usize,
        /// Privilege of the N-th client to join, N=LEVEL. Repeatable.
        #[arg(long, value_name = "N=LEVEL")]
        privilege: Vec<String>,
        /// Layer of a parameter, GUID=LAYER. Repeatable.
        #[arg(long, value_name = "GUID=LAYER")]
        layer: Vec<String>,
        /// Layers the N-th client may edit, N=LAYER[,LAYER..]. Repeatable.
        #[arg(long, value_name = "N=LAYERS")]
        client_layers: Vec<String>,
    },
    /// Connect to a server, print what it sends and optionally run a script.
    Client {
        #[arg(long)]
        connect: String,
        #[arg(long, default_value = "designer")]
        role: Role,
        #[arg(long)]
        script: Option<PathBuf>,
        /// Keep printing messages this long after the script ends.
        #[arg(long, default_value_t = 300)]
        linger_ms: u64,
    },
    /// Apply a spoken-style command to a definition file, rewriting it.
    Speech {
        command: String,
        #[arg(long)]
        file: PathBuf,
    },
    /// Coordinate conversions and distances.
    Geo {
        #[command(subcommand)]
        op: GeoOp,
    },
}

#[derive(Subcommand)]
enum GeoOp {
    /// Latitude/longitude in degrees to Web Mercator metres.
    #[command(name = "to3857", allow_negative_numbers = true)]
    To3857 { lat: f64, lon: f64 },
    /// Web Mercator metres to latitude/longitude.
    #[command(name = "to4326", allow_negative_numbers = true)]
    To4326 { x: f64, y: f64 },
    /// Great-circle distance in metres.
    #[command(allow_negative_numbers = true)]
    Dist { lat1: f64, lon1: f64, lat2: f64, lon2: f64 },
}

enum Failure {
    Usage(String),
    Data(String),
    Network(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Network(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Network(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn read(file: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| Failure::Data(format!("{}: {e}", file.display())))
}

fn load(file: &Path) -> Result<TypedGraph, Failure> {
    let (graph, warnings) = parse_document(&read(file)?).map_err(data)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(graph)
}

fn split_pair<'a>(text: &'a str, what: &str) -> Result<(&'a str, &'a str), Failure> {
    text.split_once('=')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| Failure::Usage(format!("{what} expects KEY=VALUE, got {text:?}")))
}

fn parse_cmd(file: &Path) -> Outcome {
    let (graph, warnings) = parse_document(&read(file)?).map_err(data)?;
    println!("vertices {}", graph.vertex_count());
    println!("edges {}", graph.edge_count());
    println!("groups {}", graph.groups().len());
    for w in warnings {
        println!("warning {w}");
    }
    Ok(())
}

fn validate_cmd(file: &Path) -> Outcome {
    let doc = Document::from_xml(&read(file)?).map_err(data)?;
    let (graph, _) = doc.to_graph_unchecked().map_err(data)?;
    let violations = graph.validate();
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("ok");
        Ok(())
    } else {
        Err(Failure::Data(format!("{} violation(s)", violations.len())))
    }
}

fn eval_cmd(file: &Path, set: &[String], out: Option<&Path>) -> Outcome {
    let mut engine = EvaluationEngine::new(load(file)?);
    for s in set {
        let (guid, raw) = split_pair(s, "--set")?;
        let param = engine
            .graph()
            .parameter(guid)
            .ok_or_else(|| Failure::Data(format!("no parameter {guid}")))?;
        let value = param
            .parse_update(raw)
            .ok_or_else(|| Failure::Data(format!("{raw:?} is not a valid {} value", param.kind().type_name())))?;
        engine.set_parameter(&ParameterUpdate::new(guid, value)).map_err(data)?;
    }
    let solution = engine.solve().map_err(data)?;
    for e in &solution.errors {
        eprintln!("error at {}: {}", e.vertex, e.message);
    }
    let meshes: Vec<_> = solution
        .meshes
        .iter()
        .map(|m| compute_normals(&to_render_coords(m)).0)
        .collect();
    let text = export_obj(&meshes);
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {} mesh(es) to {}", meshes.len(), path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn serve_cmd(
    file: &Path,
    bind: String,
    ws_bind: Option<String>,
    strategy: Strategy,
    rate_limit_ms: u64,
    max_presence_queue: usize,
    privilege: &[String],
    layer: &[String],
    client_layers: &[String],
) -> Outcome {
    let graph = load(file)?;
    let mut relay = RelayConfig {
        strategy,
        min_interval: Duration::from_millis(rate_limit_ms),
        max_presence_queue,
        ..RelayConfig::default()
    };
    let client_id = |s: &str| s.parse::<ClientId>().map_err(|_| Failure::Usage(format!("bad client number {s:?}")));
    for p in privilege {
        let (n, level) = split_pair(p, "--privilege")?;
        let level = level.parse().map_err(|_| Failure::Usage(format!("bad privilege {level:?}")))?;
        relay.privileges.insert(client_id(n)?, level);
    }
    for l in layer {
        let (guid, name) = split_pair(l, "--layer")?;
        relay.parameter_layers.insert(guid.to_string(), name.to_string());
    }
    for c in client_layers {
        let (n, names) = split_pair(c, "--client-layers")?;
        relay
            .client_layers
            .insert(client_id(n)?, names.split(',').map(|s| s.trim().to_string()).collect());
    }
    let definition_id = file
        .file_stem()
        .map_or_else(|| "definition".to_string(), |s| s.to_string_lossy().into_owned());
    let server = net::start(
        graph,
        ServerConfig {
            bind,
            ws_bind,
            relay,
            definition_id,
        },
    )
    .map_err(|e| Failure::Network(e.to_string()))?;
    println!("listening on {}", server.local_addr());
    if let Some(ws) = server.ws_addr() {
        println!("websocket on {ws}");
    }
    let _ = std::io::stdout().flush();
    server.wait();
    Ok(())
}

fn client_cmd(connect: &str, role: Role, script: Option<&Path>, linger_ms: u64) -> Outcome {
    let steps = match script {
        Some(p) => net::parse_script(&read(p)?).map_err(Failure::Data)?,
        None => Vec::new(),
    };
    let mut client = Client::connect(connect, role).map_err(|e| Failure::Network(format!("{connect}: {e}")))?;
    let mut print = |m: &adflow::wire::WireMessage| {
        println!("{}", net::describe(m));
        let _ = std::io::stdout().flush();
    };
    if script.is_some() {
        net::run_script(&mut client, &steps, &mut print).map_err(|e| Failure::Network(e.to_string()))?;
        let linger = Duration::from_millis(linger_ms);
        while let Some(m) = client.recv_timeout(linger) {
            print(&m);
        }
    } else {
        while let Some(m) = client.recv_timeout(Duration::from_secs(3600)) {
            print(&m);
        }
    }
    client.close();
    Ok(())
}

fn speech_cmd(command: &str, file: &Path) -> Outcome {
    let mut graph = if file.exists() { load(file)? } else { TypedGraph::new() };
    let cmd = parse_command(command).map_err(data)?;
    let id = apply_command(&mut graph, &cmd).map_err(data)?;
    std::fs::write(file, serialize_document(&graph)).map_err(|e| Failure::Data(format!("{}: {e}", file.display())))?;
    println!("{id}");
    Ok(())
}

fn geo_cmd(op: GeoOp) -> Outcome {
    match op {
        GeoOp::To3857 { lat, lon } => {
            let p = to_web_mercator(LatLon::new(lat, lon)).map_err(data)?;
            println!("{} {}", p.x, p.y);
        }
        GeoOp::To4326 { x, y } => {
            let p = from_web_mercator(MercatorXY { x, y });
            println!("{} {}", p.lat, p.lon);
        }
        GeoOp::Dist { lat1, lon1, lat2, lon2 } => {
            let (a, b) = (LatLon::new(lat1, lon1), LatLon::new(lat2, lon2));
            a.check().map_err(data)?;
            b.check().map_err(data)?;
            println!("{}", haversine_distance(a, b));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Parse { file } => parse_cmd(&file),
        Command::Validate { file } => validate_cmd(&file),
        Command::Eval { file, set, out } => eval_cmd(&file, &set, out.as_deref()),
        Command::Serve {
            file,
            bind,
            ws_bind,
            strategy,
            rate_limit_ms,
            max_presence_queue,
            privilege,
            layer,
            client_layers,
        } => serve_cmd(
            &file,
            bind,
            ws_bind,
            strategy,
            rate_limit_ms,
            max_presence_queue,
            &privilege,
            &layer,
            &client_layers,
        ),
        Command::Client {
            connect,
            role,
            script,
            linger_ms,
        } => client_cmd(&connect, role, script.as_deref(), linger_ms),
        Command::Speech { command, file } => speech_cmd(&command, &file),
        Command::Geo { op } => geo_cmd(op),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ADFLOW_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("adflow: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
