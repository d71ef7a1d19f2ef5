use std::path::PathBuf;

use threatgraph_core::ingest::ParseOptions;
use threatgraph_core::kgraph::KnowledgeGraph;
use threatgraph_core::pipeline::{build_closed_graph, BuildOutcome};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture file")
}

pub fn build_fixture_outcome() -> BuildOutcome {
    build_closed_graph(
        &fixture("attack_bundle.json"),
        &fixture("capec.xml"),
        &fixture("cwe.xml"),
        &ParseOptions::default(),
    )
    .expect("fixture corpus builds")
}

pub fn build_fixture_graph() -> KnowledgeGraph {
    build_fixture_outcome().graph
}
