//! threatgraph: build a unified ATT&CK/CAPEC/CWE/CVE knowledge graph, query
//! it, and annotate Threat Dragon diagrams with resolved attack techniques.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use threatgraph_core::ident::{Namespace, NodeId};
use threatgraph_core::ingest::ParseOptions;
use threatgraph_core::kgraph::{KnowledgeGraph, NodePayload};
use threatgraph_core::modeler::{model_diagram, parse_diagram, AnnotationOptions};
use threatgraph_core::pipeline::build_closed_graph;
use threatgraph_core::query::{self, HistogramAxis};
use threatgraph_core::snapshot;
use threatgraph_core::Error as CoreError;

mod render;

#[derive(Parser)]
#[command(
    name = "threatgraph",
    version,
    about = "Unified ATT&CK/CAPEC/CWE/CVE knowledge graph with DFD threat resolution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the three catalogs, run inference, and write a snapshot
    Build {
        /// ATT&CK Enterprise STIX bundle (JSON)
        #[arg(long)]
        attack: PathBuf,
        /// CAPEC catalog (XML)
        #[arg(long)]
        capec: PathBuf,
        /// CWE catalog (XML)
        #[arg(long)]
        cwe: PathBuf,
        /// Snapshot file to write
        #[arg(long, short)]
        output: PathBuf,
        /// Keep revoked/deprecated catalog entries
        #[arg(long)]
        include_deprecated: bool,
        /// Also write a JSON parse report (skipped items and reasons)
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Export a snapshot in an interchange format
    Export {
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Triples)]
        format: ExportFormat,
        /// Output file (standard output when omitted)
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print node, reference, and involvement statistics
    Stats {
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Query the closed graph
    Query {
        #[command(subcommand)]
        query: QueryCommand,
    },
    /// List items usable as diagram labels
    List {
        #[command(subcommand)]
        list: ListCommand,
    },
    /// Resolve techniques for a Threat Dragon diagram and annotate it
    Model {
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        /// Threat Dragon v1 document to process
        #[arg(long, short)]
        diagram: PathBuf,
        /// Annotated document to write
        #[arg(long, short)]
        output: PathBuf,
        /// Also write a JSON report (per-element labels and threat counts)
        #[arg(long)]
        report: Option<PathBuf>,
        /// Overwrite the output file if it exists
        #[arg(long)]
        force: bool,
        /// Severity assigned to generated threat entries
        #[arg(long, default_value = "Medium")]
        severity: String,
        /// Status assigned to generated threat entries
        #[arg(long, default_value = "Open")]
        status: String,
    },
}

#[derive(Subcommand)]
enum QueryCommand {
    /// Incoming and outgoing relations of one node
    Neighbors {
        /// Node id, e.g. T1059, CAPEC-242, CWE-284, or NAMESPACE:local
        id: String,
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Techniques reachable backwards from a CAPEC, CWE, or CVE id
    TechniquesFor {
        id: String,
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Threat counts per data component or restriction
    Histogram {
        #[arg(long, value_enum)]
        by: HistogramBy,
        /// Keep only rows with at least this many threats
        #[arg(long)]
        min_count: Option<usize>,
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum ListCommand {
    /// All restriction concepts
    Restrictions {
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// All data-component concepts
    Datacomponents {
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// All enumeration ids reachable through refToEnum
    Enums {
        /// Graph snapshot to load
        #[arg(long, short)]
        snapshot: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Triples,
}

#[derive(Clone, Copy, ValueEnum)]
enum HistogramBy {
    Datacomponent,
    Restriction,
}

impl From<HistogramBy> for HistogramAxis {
    fn from(by: HistogramBy) -> Self {
        match by {
            HistogramBy::Datacomponent => HistogramAxis::DataComponent,
            HistogramBy::Restriction => HistogramAxis::Restriction,
        }
    }
}

/// Exit codes: 0 success (warnings allowed), 1 input parse failure, 2 unknown
/// id or unresolvable argument, 3 I/O failure.
enum AppError {
    Core(CoreError),
    OutputExists(PathBuf),
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Core(CoreError::UnknownNode { .. })
            | AppError::Core(CoreError::UnsupportedNamespace { .. }) => 2,
            AppError::Core(CoreError::Io(_)) | AppError::OutputExists(_) => 3,
            AppError::Core(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Core(err) => err.fmt(f),
            AppError::OutputExists(path) => {
                write!(f, "{} exists; pass --force to overwrite", path.display())
            }
        }
    }
}

impl From<CoreError> for AppError {
    fn from(err: CoreError) -> Self {
        AppError::Core(err)
    }
}

fn main() {
    // Die quietly when stdout closes early (e.g. piped into `head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Build {
            attack,
            capec,
            cwe,
            output,
            include_deprecated,
            report,
        } => cmd_build(
            &attack,
            &capec,
            &cwe,
            &output,
            include_deprecated,
            report.as_deref(),
        ),
        Command::Export {
            snapshot,
            format,
            output,
        } => cmd_export(&snapshot, format, output.as_deref()),
        Command::Stats { snapshot, json } => cmd_stats(&snapshot, json),
        Command::Query { query } => match query {
            QueryCommand::Neighbors { id, snapshot, json } => cmd_neighbors(&snapshot, &id, json),
            QueryCommand::TechniquesFor { id, snapshot, json } => {
                cmd_techniques_for(&snapshot, &id, json)
            }
            QueryCommand::Histogram {
                by,
                min_count,
                snapshot,
                json,
            } => cmd_histogram(&snapshot, by.into(), min_count.unwrap_or(0), json),
        },
        Command::List { list } => match list {
            ListCommand::Restrictions { snapshot, json } => cmd_list_restrictions(&snapshot, json),
            ListCommand::Datacomponents { snapshot, json } => {
                cmd_list_datacomponents(&snapshot, json)
            }
            ListCommand::Enums { snapshot, json } => cmd_list_enums(&snapshot, json),
        },
        Command::Model {
            snapshot,
            diagram,
            output,
            report,
            force,
            severity,
            status,
        } => cmd_model(
            &snapshot,
            &diagram,
            &output,
            report.as_deref(),
            force,
            AnnotationOptions { severity, status },
        ),
    }
}

fn read_input(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|err| AppError::Core(CoreError::Io(err)))
}

fn load_closed_snapshot(path: &Path) -> Result<KnowledgeGraph, AppError> {
    let graph = snapshot::load(path)?;
    if !graph.metadata.closure_applied {
        return Err(AppError::Core(CoreError::ClosureNotApplied));
    }
    Ok(graph)
}

/// Accepts `NAMESPACE:local`, a bare enumeration/tactic id (shape-inferred),
/// or a data-component/restriction/threat local looked up in the graph.
fn resolve_node_arg(graph: &KnowledgeGraph, raw: &str) -> Result<NodeId, AppError> {
    if let Some((ns, local)) = raw.split_once(':') {
        if let Ok(namespace) = ns.parse::<Namespace>() {
            return Ok(NodeId::new(namespace, local)?);
        }
    }
    for ctor in [
        NodeId::technique,
        NodeId::tactic,
        NodeId::capec,
        NodeId::cwe,
        NodeId::cve,
    ] {
        if let Ok(id) = ctor(raw.to_string()) {
            return Ok(id);
        }
    }
    for namespace in [
        Namespace::DataComponent,
        Namespace::Restriction,
        Namespace::Threat,
    ] {
        if let Ok(id) = NodeId::new(namespace, raw) {
            if graph.contains_node(&id) {
                return Ok(id);
            }
        }
    }
    Err(AppError::Core(CoreError::UnknownNode {
        id: raw.to_string(),
    }))
}

fn cmd_build(
    attack: &Path,
    capec: &Path,
    cwe: &Path,
    output: &Path,
    include_deprecated: bool,
    report_path: Option<&Path>,
) -> Result<(), AppError> {
    let opts = ParseOptions { include_deprecated };
    let outcome = build_closed_graph(
        &read_input(attack)?,
        &read_input(capec)?,
        &read_input(cwe)?,
        &opts,
    )?;
    snapshot::save(&outcome.graph, output)?;
    if let Some(path) = report_path {
        let json = serde_json::to_string_pretty(&outcome.report).expect("report serialization");
        snapshot::write_atomic(path, format!("{json}\n").as_bytes())?;
    }

    let stats = query::stats(&outcome.graph);
    print!("{}", render::stats_tables(&stats));
    println!("snapshot written to {}", output.display());
    let warnings = outcome.report.total_warnings();
    if warnings > 0 {
        eprintln!("{warnings} parse warning(s); rerun with --report for details");
    }
    Ok(())
}

fn cmd_export(
    snapshot_path: &Path,
    format: ExportFormat,
    output: Option<&Path>,
) -> Result<(), AppError> {
    let graph = snapshot::load(snapshot_path)?;
    let rendered = match format {
        ExportFormat::Triples => snapshot::export_triples(&graph),
    };
    match output {
        Some(path) => snapshot::write_atomic(path, rendered.as_bytes())?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_stats(snapshot_path: &Path, json: bool) -> Result<(), AppError> {
    let graph = load_closed_snapshot(snapshot_path)?;
    let stats = query::stats(&graph);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&stats).expect("stats serialization")
        );
    } else {
        print!("{}", render::stats_tables(&stats));
    }
    Ok(())
}

fn cmd_neighbors(snapshot_path: &Path, id: &str, json: bool) -> Result<(), AppError> {
    let graph = load_closed_snapshot(snapshot_path)?;
    let node = resolve_node_arg(&graph, id)?;
    let neighbors = query::neighbors(&graph, &node)?;
    if json {
        let doc = serde_json::json!({
            "id": node,
            "outgoing": neighbors.outgoing,
            "incoming": neighbors.incoming,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serialization")
        );
    } else {
        print!("{}", render::neighbors_table(&node, &neighbors));
    }
    Ok(())
}

fn cmd_techniques_for(snapshot_path: &Path, id: &str, json: bool) -> Result<(), AppError> {
    let graph = load_closed_snapshot(snapshot_path)?;
    let target = resolve_node_arg(&graph, id)?;
    let techniques = query::techniques_for(&graph, &target)?;
    let named: Vec<(NodeId, String)> = techniques
        .into_iter()
        .map(|id| {
            let name = graph
                .node(&id)
                .and_then(NodePayload::name)
                .unwrap_or_default()
                .to_string();
            (id, name)
        })
        .collect();
    if json {
        let rows: Vec<serde_json::Value> = named
            .iter()
            .map(|(id, name)| serde_json::json!({"id": id, "name": name}))
            .collect();
        let doc = serde_json::json!({"target": target, "techniques": rows});
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serialization")
        );
    } else {
        if named.is_empty() {
            println!("no techniques reach {target}");
        }
        for (id, name) in named {
            println!("{}\t{}", id.local(), name);
        }
    }
    Ok(())
}

fn cmd_histogram(
    snapshot_path: &Path,
    axis: HistogramAxis,
    min_count: usize,
    json: bool,
) -> Result<(), AppError> {
    let graph = load_closed_snapshot(snapshot_path)?;
    let rows: Vec<(NodeId, usize)> = query::histogram(&graph, axis)
        .into_iter()
        .filter(|(_, count)| *count >= min_count)
        .collect();
    if json {
        let entries: Vec<serde_json::Value> = rows
            .iter()
            .map(|(id, count)| serde_json::json!({"id": id, "count": count}))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "rows": entries }))
                .expect("serialization")
        );
    } else {
        for (id, count) in rows {
            println!("{}\t{}", id.local(), count);
        }
    }
    Ok(())
}

fn cmd_list_restrictions(snapshot_path: &Path, json: bool) -> Result<(), AppError> {
    let graph = load_closed_snapshot(snapshot_path)?;
    let mut rows = Vec::new();
    for (_, payload) in graph.nodes() {
        if let NodePayload::Restriction(restriction) = payload {
            rows.push(restriction.clone());
        }
    }
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("serialization")
        );
    } else {
        for restriction in rows {
            println!(
                "{}\t{}\t{}",
                restriction.id.local(),
                restriction.category,
                restriction.value
            );
        }
    }
    Ok(())
}

fn cmd_list_datacomponents(snapshot_path: &Path, json: bool) -> Result<(), AppError> {
    let graph = load_closed_snapshot(snapshot_path)?;
    let mut rows = Vec::new();
    for (_, payload) in graph.nodes() {
        if let NodePayload::DataComponent(component) = payload {
            rows.push(serde_json::json!({
                "id": component.id,
                "source_name": component.source_name,
                "component_name": component.component_name,
                "detected_techniques": component.detected_technique_refs.len(),
            }));
        }
    }
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("serialization")
        );
    } else {
        for row in rows {
            println!(
                "{}\t{} / {}",
                row["id"].as_str().unwrap_or_default(),
                row["source_name"].as_str().unwrap_or_default(),
                row["component_name"].as_str().unwrap_or_default()
            );
        }
    }
    Ok(())
}

fn cmd_list_enums(snapshot_path: &Path, json: bool) -> Result<(), AppError> {
    let graph = load_closed_snapshot(snapshot_path)?;
    let targets: std::collections::BTreeSet<NodeId> = graph
        .relation(threatgraph_core::RelationName::RefToEnum)
        .iter()
        .map(|(_, target)| target.clone())
        .collect();
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "enums": targets }))
                .expect("serialization")
        );
    } else {
        for id in targets {
            println!("{id}");
        }
    }
    Ok(())
}

fn cmd_model(
    snapshot_path: &Path,
    diagram_path: &Path,
    output: &Path,
    report_path: Option<&Path>,
    force: bool,
    opts: AnnotationOptions,
) -> Result<(), AppError> {
    if output.exists() && !force {
        return Err(AppError::OutputExists(output.to_path_buf()));
    }
    let graph = load_closed_snapshot(snapshot_path)?;
    let diagram = parse_diagram(&read_input(diagram_path)?)?;
    let (annotated, report) = model_diagram(&graph, &diagram, &opts)?;

    let mut rendered = serde_json::to_string_pretty(&annotated).expect("document serialization");
    rendered.push('\n');
    snapshot::write_atomic(output, rendered.as_bytes())?;

    if let Some(path) = report_path {
        let json = serde_json::to_string_pretty(&report).expect("report serialization");
        snapshot::write_atomic(path, format!("{json}\n").as_bytes())?;
    }

    print!("{}", render::model_summary(&report));
    println!("annotated diagram written to {}", output.display());
    for warning in &report.warnings {
        eprintln!("warning: {}", warning.detail);
    }
    Ok(())
}
