//! Command-line behavior: exit codes, output contracts, and JSON shapes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use threatgraph_testkit::fixture_path;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_threatgraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn arg(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

/// Builds the fixture snapshot once per test directory.
fn build_snapshot(dir: &Path) -> PathBuf {
    let snapshot = dir.join("snapshot.json");
    let output = run(&[
        "build",
        "--attack",
        &arg(&fixture_path("attack_bundle.json")),
        "--capec",
        &arg(&fixture_path("capec.xml")),
        "--cwe",
        &arg(&fixture_path("cwe.xml")),
        "--output",
        &arg(&snapshot),
    ]);
    assert!(output.status.success(), "build failed: {output:?}");
    snapshot
}

#[test]
fn build_prints_reference_summary() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = dir.path().join("snap.json");
    let report = dir.path().join("report.json");
    let output = run(&[
        "build",
        "--attack",
        &arg(&fixture_path("attack_bundle.json")),
        "--capec",
        &arg(&fixture_path("capec.xml")),
        "--cwe",
        &arg(&fixture_path("cwe.xml")),
        "--output",
        &arg(&snapshot),
        "--report",
        &arg(&report),
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("ATT&CK <-> CAPEC (reasoned)"));
    assert!(text.contains("CWE -> CVE"));
    assert!(snapshot.is_file());

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!(report["attack"]["warnings"].as_array().unwrap().len() >= 2);
    assert_eq!(report["dangling_dropped"]["refToCAPEC"], 1);
}

#[test]
fn empty_but_valid_catalogs_build_a_zero_node_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, content: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, content).unwrap();
        path
    };
    let attack = write("attack.json", r#"{"type":"bundle","objects":[]}"#);
    let capec = write("capec.xml", r#"<Attack_Pattern_Catalog Version="0"/>"#);
    let cwe = write("cwe.xml", r#"<Weakness_Catalog Version="0"/>"#);
    let snapshot = dir.path().join("empty.json");
    let output = run(&[
        "build",
        "--attack",
        &arg(&attack),
        "--capec",
        &arg(&capec),
        "--cwe",
        &arg(&cwe),
        "--output",
        &arg(&snapshot),
    ]);
    assert_eq!(output.status.code(), Some(0));

    let stats = run(&["stats", "--snapshot", &arg(&snapshot), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&stats)).unwrap();
    assert!(doc["node_counts"]
        .as_object()
        .unwrap()
        .values()
        .all(|v| v == 0));
}

#[test]
fn malformed_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"objects\": [oops").unwrap();
    let output = run(&[
        "build",
        "--attack",
        &arg(&bad),
        "--capec",
        &arg(&fixture_path("capec.xml")),
        "--cwe",
        &arg(&fixture_path("cwe.xml")),
        "--output",
        &arg(&dir.path().join("snap.json")),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("JSON parse error"));
    assert!(
        !dir.path().join("snap.json").exists(),
        "partial output written"
    );
}

#[test]
fn missing_snapshot_exits_3() {
    let output = run(&["stats", "--snapshot", "/nonexistent/snapshot.json"]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn unknown_id_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&["query", "neighbors", "T9999", "--snapshot", &arg(&snapshot)]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("T9999"));

    // Tactics exist but are not enumeration targets.
    let output = run(&[
        "query",
        "techniques-for",
        "TA0002",
        "--snapshot",
        &arg(&snapshot),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn neighbors_accepts_bare_and_qualified_ids() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let bare = run(&[
        "query",
        "neighbors",
        "CAPEC-101",
        "--snapshot",
        &arg(&snapshot),
    ]);
    assert!(bare.status.success());
    let qualified = run(&[
        "query",
        "neighbors",
        "capec:CAPEC-101",
        "--snapshot",
        &arg(&snapshot),
    ]);
    assert_eq!(stdout(&bare), stdout(&qualified));
    // Data-component locals resolve through graph lookup.
    let component = run(&[
        "query",
        "neighbors",
        "ProcessCreation",
        "--snapshot",
        &arg(&snapshot),
    ]);
    assert!(component.status.success());
    assert!(stdout(&component).contains("hasDataComponent"));
}

#[test]
fn histogram_filters_by_min_count() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&[
        "query",
        "histogram",
        "--by",
        "restriction",
        "--min-count",
        "2",
        "--snapshot",
        &arg(&snapshot),
    ]);
    let text = stdout(&output);
    assert!(text.contains("Platform_Windows\t4"));
    assert!(!text.contains("ImpactType_Integrity"));

    let json = run(&[
        "query",
        "histogram",
        "--by",
        "datacomponent",
        "--snapshot",
        &arg(&snapshot),
        "--json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows[0]["id"], "DATACOMPONENT:CommandExecution");
    assert_eq!(rows[0]["count"], 3);
}

#[test]
fn stats_json_has_documented_fields() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&["stats", "--snapshot", &arg(&snapshot), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(doc["node_counts"]["ATTCK"], 5);
    assert_eq!(doc["base_pair_counts"]["refToCAPEC"], 3);
    assert_eq!(doc["pair_counts"]["refToCAPEC"], 4);
    assert_eq!(doc["involvement"][0]["percent"], 60);
}

#[test]
fn list_commands_enumerate_labelable_items() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());

    let restrictions = run(&["list", "restrictions", "--snapshot", &arg(&snapshot)]);
    assert!(stdout(&restrictions).contains("Platform_SaaS\tPlatform\tSaaS"));

    let components = run(&["list", "datacomponents", "--snapshot", &arg(&snapshot)]);
    assert!(stdout(&components).contains("ProcessCreation\tProcess / Process Creation"));

    let enums = run(&["list", "enums", "--snapshot", &arg(&snapshot), "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&enums)).unwrap();
    let ids = doc["enums"].as_array().unwrap();
    // 5 techniques + 3 reachable CAPECs + 3 reachable CWEs + 3 CVEs
    // (CAPEC-104 and CWE-13 hang off no technique, so they never fill).
    assert_eq!(ids.len(), 14);
}

#[test]
fn model_refuses_existing_output_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let annotated = dir.path().join("annotated.json");
    std::fs::write(&annotated, "occupied").unwrap();

    let refused = run(&[
        "model",
        "--snapshot",
        &arg(&snapshot),
        "--diagram",
        &arg(&fixture_path("diagram.json")),
        "--output",
        &arg(&annotated),
    ]);
    assert_eq!(refused.status.code(), Some(3));
    assert_eq!(std::fs::read_to_string(&annotated).unwrap(), "occupied");

    let forced = run(&[
        "model",
        "--snapshot",
        &arg(&snapshot),
        "--diagram",
        &arg(&fixture_path("diagram.json")),
        "--output",
        &arg(&annotated),
        "--force",
    ]);
    assert!(forced.status.success());
    // Warnings (the unresolved Ghost label) go to stderr without failing.
    assert!(stderr(&forced).contains("NonexistentComponent"));
    assert!(stdout(&forced).contains("Fetch"));
}

#[test]
fn model_on_unlabeled_diagram_is_structurally_identity() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let unlabeled = dir.path().join("plain.json");
    std::fs::write(
        &unlabeled,
        r#"{"summary":{"title":"plain"},"detail":{"diagrams":[{"title":"Main","diagramJson":{"cells":[
            {"type":"tm.Process","id":"p1","description":"no labels here","attrs":{"text":{"text":"P"}}},
            {"type":"tm.Actor","id":"a1","attrs":{"text":{"text":"A"}}}
        ]}}]}}"#,
    )
    .unwrap();
    let annotated = dir.path().join("plain-out.json");
    let output = run(&[
        "model",
        "--snapshot",
        &arg(&snapshot),
        "--diagram",
        &arg(&unlabeled),
        "--output",
        &arg(&annotated),
    ]);
    assert!(output.status.success());
    let before: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&unlabeled).unwrap()).unwrap();
    let after: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&annotated).unwrap()).unwrap();
    assert_eq!(before, after);
}

#[test]
fn model_report_carries_element_rows() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let annotated = dir.path().join("annotated.json");
    let report = dir.path().join("report.json");
    let output = run(&[
        "model",
        "--snapshot",
        &arg(&snapshot),
        "--diagram",
        &arg(&fixture_path("diagram.json")),
        "--output",
        &arg(&annotated),
        "--report",
        &arg(&report),
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let elements = doc["elements"].as_array().unwrap();
    assert_eq!(elements.len(), 9);
    let audit = elements
        .iter()
        .find(|e| e["name"] == "Audit")
        .expect("audit row");
    assert_eq!(audit["threat_count"], 3);
    assert_eq!(audit["techniques"][0], "T0001");
    assert!(doc["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w["kind"] == "unresolved_label"));
}

#[test]
fn export_writes_sorted_triples_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = build_snapshot(dir.path());
    let output = run(&["export", "--snapshot", &arg(&snapshot)]);
    assert!(output.status.success());
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 92);
    let mut sorted = lines.clone();
    sorted.sort_unstable();
    assert_eq!(lines, sorted);
}
