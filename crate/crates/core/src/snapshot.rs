//! Graph persistence: a canonical JSON snapshot and a line-oriented triple
//! export.
//!
//! The snapshot is deterministic: node entries are sorted by id, pair lists
//! per relation are sorted, and struct fields serialize in a fixed order, so
//! rebuilding from identical inputs produces byte-identical files. The triple
//! export is one `subject<TAB>predicate<TAB>object` line per pair, node ids
//! rendered as `NAMESPACE:local`, all lines sorted lexicographically, LF
//! endings.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ident::NodeId;
use crate::kgraph::{GraphMetadata, KnowledgeGraph, NodePayload, RelationName};

pub const SNAPSHOT_FORMAT: &str = "threatgraph-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SnapshotDoc {
    format: String,
    format_version: u32,
    metadata: GraphMetadata,
    nodes: Vec<NodePayload>,
    relations: BTreeMap<RelationName, Vec<(NodeId, NodeId)>>,
}

/// Renders the graph as its canonical JSON snapshot (trailing newline
/// included).
pub fn to_canonical_json(graph: &KnowledgeGraph) -> String {
    let doc = SnapshotDoc {
        format: SNAPSHOT_FORMAT.to_string(),
        format_version: SNAPSHOT_VERSION,
        metadata: graph.metadata.clone(),
        nodes: graph.nodes().map(|(_, payload)| payload.clone()).collect(),
        relations: graph
            .relations()
            .map(|r| (r.name, r.iter().cloned().collect()))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("snapshot serialization");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<KnowledgeGraph> {
    let doc: SnapshotDoc = serde_json::from_str(text).map_err(|e| Error::from_json(text, &e))?;
    if doc.format != SNAPSHOT_FORMAT {
        return Err(Error::SnapshotFormat(format!(
            "unexpected format marker `{}`",
            doc.format
        )));
    }
    if doc.format_version != SNAPSHOT_VERSION {
        return Err(Error::SnapshotFormat(format!(
            "unsupported format version {}",
            doc.format_version
        )));
    }
    let mut graph = KnowledgeGraph::new();
    graph.metadata = doc.metadata;
    for payload in doc.nodes {
        graph.insert_node(payload)?;
    }
    for (name, pairs) in doc.relations {
        let relation = graph.relation_mut(name);
        for (source, target) in pairs {
            relation.insert(source, target);
        }
    }
    graph.validate()?;
    Ok(graph)
}

/// Writes the snapshot atomically: the file appears only complete.
pub fn save(graph: &KnowledgeGraph, path: &Path) -> Result<()> {
    write_atomic(path, to_canonical_json(graph).as_bytes())
}

pub fn load(path: &Path) -> Result<KnowledgeGraph> {
    from_json(&std::fs::read_to_string(path)?)
}

/// Renders every relation pair as a sorted `subject\tpredicate\tobject` list.
pub fn export_triples(graph: &KnowledgeGraph) -> String {
    let mut lines: Vec<String> = graph
        .relations()
        .flat_map(|relation| {
            relation
                .iter()
                .map(move |(s, t)| format!("{s}\t{}\t{t}", relation.name))
        })
        .collect();
    lines.sort_unstable();
    let mut out = lines.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

/// Write-then-rename, so readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ident::NodeId;
    use crate::ingest::{CapecPattern, Technique};
    use crate::kgraph::{build_graph, CatalogInputs};

    fn sample_graph() -> KnowledgeGraph {
        let mut technique = Technique {
            id: NodeId::technique("T0001").unwrap(),
            stix_id: "attack-pattern--t1".into(),
            name: "Sample".into(),
            tactic_refs: Default::default(),
            capec_refs: Default::default(),
            platforms: ["Windows".to_string()].into(),
            permissions_required: Default::default(),
            effective_permissions: Default::default(),
            impact_types: Default::default(),
            data_component_refs: Default::default(),
            revoked_or_deprecated: false,
        };
        technique
            .capec_refs
            .insert(NodeId::capec("CAPEC-1").unwrap());
        let capec = CapecPattern {
            id: NodeId::capec("CAPEC-1").unwrap(),
            name: "Pattern".into(),
            abstraction: "Standard".into(),
            status: "Stable".into(),
            related_weaknesses: Default::default(),
            attack_taxonomy_refs: Default::default(),
        };
        let mut graph = build_graph(CatalogInputs {
            techniques: vec![technique],
            capecs: vec![capec],
            ..Default::default()
        })
        .unwrap();
        graph.symmetrize_inverses();
        graph.apply_chain_closure();
        graph
    }

    #[test]
    fn snapshot_roundtrip_preserves_graph() {
        let graph = sample_graph();
        let json = to_canonical_json(&graph);
        let loaded = from_json(&json).unwrap();
        // built_at is in-memory only; everything else must survive.
        let mut expected = graph.clone();
        expected.metadata.built_at = None;
        assert_eq!(loaded, expected);
    }

    #[test]
    fn snapshot_serialization_is_stable() {
        let graph = sample_graph();
        let a = to_canonical_json(&graph);
        let b = to_canonical_json(&from_json(&a).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn triples_are_sorted_and_tab_separated() {
        let graph = sample_graph();
        let triples = export_triples(&graph);
        let lines: Vec<&str> = triples.lines().collect();
        assert!(!lines.is_empty());
        let mut sorted = lines.clone();
        sorted.sort_unstable();
        assert_eq!(lines, sorted);
        assert!(lines.iter().all(|line| line.split('\t').count() == 3));
        assert!(triples.contains("THREAT:T0001\trefToATTCK\tATTCK:T0001"));
    }

    #[test]
    fn non_bijective_pairing_is_rejected_on_load() {
        let graph = sample_graph();
        let mut doc: serde_json::Value = serde_json::from_str(&to_canonical_json(&graph)).unwrap();
        // Point the threat at a second technique as well; counts still match
        // but the pairing is no longer one-to-one.
        let second = serde_json::json!({
            "id": "ATTCK:T0002", "kind": "technique", "stix_id": "attack-pattern--t2",
            "name": "Second", "tactic_refs": [], "capec_refs": [], "platforms": [],
            "permissions_required": [], "effective_permissions": [], "impact_types": [],
            "data_component_refs": [], "revoked_or_deprecated": false
        });
        let second_threat = serde_json::json!({
            "id": "THREAT:T0002", "kind": "threat", "technique": "ATTCK:T0002"
        });
        doc["nodes"].as_array_mut().unwrap().push(second);
        doc["nodes"].as_array_mut().unwrap().push(second_threat);
        let pairs = doc["relations"]["refToATTCK"].as_array_mut().unwrap();
        pairs.push(serde_json::json!(["THREAT:T0001", "ATTCK:T0002"]));
        let err = from_json(&serde_json::to_string(&doc).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)));
    }

    #[test]
    fn wrong_format_marker_is_rejected() {
        let err = from_json(r#"{"format":"other","format_version":1,"metadata":{"source_versions":{},"closure_applied":false,"base_pair_counts":{},"dangling_dropped":{}},"nodes":[],"relations":{}}"#)
            .unwrap_err();
        assert!(matches!(err, Error::SnapshotFormat(_)));
    }
}
