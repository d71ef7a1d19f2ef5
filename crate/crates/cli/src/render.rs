//! Human-readable table rendering for standard output.

use std::fmt::Write;

use threatgraph_core::ident::{Namespace, NodeId};
use threatgraph_core::kgraph::RelationName;
use threatgraph_core::modeler::ModelReport;
use threatgraph_core::query::{GraphStats, Neighbors};

fn row(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "  {label:<48} {value}");
}

/// Entity totals, reference counts (source and reasoned), and involvement.
pub fn stats_tables(stats: &GraphStats) -> String {
    let mut out = String::new();
    let nodes = |ns: Namespace| stats.node_counts.get(&ns).copied().unwrap_or(0);
    let base = |r: RelationName| stats.base_pair_counts.get(&r).copied().unwrap_or(0);
    let pairs = |r: RelationName| stats.pair_counts.get(&r).copied().unwrap_or(0);

    out.push_str("Entities\n");
    row(&mut out, "ATT&CK techniques", nodes(Namespace::Attck));
    row(&mut out, "Tactics", nodes(Namespace::Tactic));
    row(&mut out, "CAPEC patterns", nodes(Namespace::Capec));
    row(&mut out, "CWE weaknesses", nodes(Namespace::Cwe));
    row(&mut out, "CVEs", nodes(Namespace::Cve));
    row(&mut out, "Data components", nodes(Namespace::DataComponent));
    row(&mut out, "Restrictions", nodes(Namespace::Restriction));
    row(&mut out, "Threat instances", nodes(Namespace::Threat));

    out.push_str("References\n");
    row(&mut out, "ATT&CK -> CAPEC", base(RelationName::RefToCapec));
    row(
        &mut out,
        "CAPEC -> ATT&CK",
        base(RelationName::IsRefToAttck),
    );
    row(
        &mut out,
        "ATT&CK <-> CAPEC (reasoned)",
        pairs(RelationName::RefToCapec),
    );
    row(&mut out, "CAPEC -> CWE", base(RelationName::RefToCwe));
    row(&mut out, "CWE -> CAPEC", base(RelationName::IsRefToCapec));
    row(
        &mut out,
        "CAPEC <-> CWE (reasoned)",
        pairs(RelationName::RefToCwe),
    );
    row(&mut out, "CWE -> CVE", pairs(RelationName::RefToCve));
    row(
        &mut out,
        "threat -> enumeration (refToEnum)",
        pairs(RelationName::RefToEnum),
    );

    out.push_str("Involvement\n");
    for involvement in &stats.involvement {
        let _ = writeln!(
            out,
            "  {:<48} {}/{} ({} %)",
            involvement.label, involvement.involved, involvement.total, involvement.percent
        );
    }
    out
}

pub fn neighbors_table(node: &NodeId, neighbors: &Neighbors) -> String {
    let mut out = format!("{node}\n");
    for (relation, targets) in &neighbors.outgoing {
        for target in targets {
            let _ = writeln!(out, "  -> {relation} {target}");
        }
    }
    for (relation, sources) in &neighbors.incoming {
        for source in sources {
            let _ = writeln!(out, "  <- {relation} {source}");
        }
    }
    if neighbors.outgoing.is_empty() && neighbors.incoming.is_empty() {
        out.push_str("  (no relations)\n");
    }
    out
}

/// Per-element threat counts, the case-study-style summary.
pub fn model_summary(report: &ModelReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:<8} {:>6} {:>8}",
        "Element", "Kind", "Labels", "Threats"
    );
    for element in &report.elements {
        let name = if element.name.is_empty() {
            element.element_id.as_str()
        } else {
            element.name.as_str()
        };
        let _ = writeln!(
            out,
            "{:<24} {:<8} {:>6} {:>8}",
            name,
            element.kind,
            element.labels.len(),
            element.threat_count
        );
    }
    out
}
