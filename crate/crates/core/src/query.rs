//! Read-only queries over a closed graph: neighborhood lookup, reverse
//! technique resolution, statistics, and histograms.

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ident::{Namespace, NodeId};
use crate::kgraph::{KnowledgeGraph, RelationName};

/// Per-relation outgoing targets and incoming sources of one node. Relations
/// with no pairs touching the node are omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Neighbors {
    pub outgoing: BTreeMap<RelationName, BTreeSet<NodeId>>,
    pub incoming: BTreeMap<RelationName, BTreeSet<NodeId>>,
}

pub fn neighbors(graph: &KnowledgeGraph, node: &NodeId) -> Result<Neighbors> {
    if !graph.contains_node(node) {
        return Err(Error::UnknownNode {
            id: node.to_string(),
        });
    }
    let mut result = Neighbors::default();
    for relation in graph.relations() {
        for (source, target) in relation.iter() {
            if source == node {
                result
                    .outgoing
                    .entry(relation.name)
                    .or_default()
                    .insert(target.clone());
            }
            if target == node {
                result
                    .incoming
                    .entry(relation.name)
                    .or_default()
                    .insert(source.clone());
            }
        }
    }
    Ok(result)
}

/// All techniques whose threat reaches `target` through `refToEnum`.
///
/// `target` may be any enumeration id (CAPEC, CWE, CVE, or a technique,
/// since `refToEnum` contains `refToATTCK`).
pub fn techniques_for(graph: &KnowledgeGraph, target: &NodeId) -> Result<BTreeSet<NodeId>> {
    if !graph.metadata.closure_applied {
        return Err(Error::ClosureNotApplied);
    }
    if !target.namespace().is_enumeration() {
        return Err(Error::UnsupportedNamespace {
            id: target.to_string(),
            namespace: target.namespace().as_str().to_string(),
            context: "techniques_for".to_string(),
        });
    }
    if !graph.contains_node(target) {
        return Err(Error::UnknownNode {
            id: target.to_string(),
        });
    }
    Ok(graph
        .relation(RelationName::RefToEnum)
        .sources_of(target)
        .filter_map(|threat| graph.technique_of_threat(threat))
        .cloned()
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvolvementRow {
    /// Stable key for machine-readable output.
    pub key: &'static str,
    pub label: &'static str,
    pub involved: usize,
    pub total: usize,
    /// `round(100 * involved / total)`, 0 when total is 0.
    pub percent: u32,
}

/// Node, pair, and involvement statistics for a closed graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub node_counts: BTreeMap<Namespace, usize>,
    /// Base relation sizes as built, before symmetrization.
    pub base_pair_counts: BTreeMap<RelationName, usize>,
    /// Current relation sizes (after symmetrization and closure).
    pub pair_counts: BTreeMap<RelationName, usize>,
    pub involvement: Vec<InvolvementRow>,
}

pub fn stats(graph: &KnowledgeGraph) -> GraphStats {
    let mut node_counts: BTreeMap<Namespace, usize> = BTreeMap::new();
    for ns in Namespace::ALL {
        node_counts.insert(ns, graph.nodes_in(ns).count());
    }
    let pair_counts = graph
        .relations()
        .map(|r| (r.name, r.len()))
        .collect::<BTreeMap<_, _>>();

    let involved = |relation: RelationName| graph.relation(relation).source_set().len();
    let total = |ns: Namespace| node_counts[&ns];
    let row = |key, label, involved: usize, total: usize| InvolvementRow {
        key,
        label,
        involved,
        total,
        percent: percent(involved, total),
    };
    let involvement = vec![
        row(
            "techniques_with_capec_relations",
            "ATT&CK techniques that have relations to CAPECs",
            involved(RelationName::RefToCapec),
            total(Namespace::Attck),
        ),
        row(
            "capecs_with_technique_relations",
            "CAPECs that have relations to ATT&CK techniques",
            involved(RelationName::IsRefToAttck),
            total(Namespace::Capec),
        ),
        row(
            "capecs_with_cwe_relations",
            "CAPECs that have relations to CWEs",
            involved(RelationName::RefToCwe),
            total(Namespace::Capec),
        ),
        row(
            "cwes_with_capec_relations",
            "CWEs that have relations to CAPECs",
            involved(RelationName::IsRefToCapec),
            total(Namespace::Cwe),
        ),
        row(
            "cwes_with_cve_relations",
            "CWEs that have relations to CVEs",
            involved(RelationName::RefToCve),
            total(Namespace::Cwe),
        ),
    ];

    GraphStats {
        node_counts,
        base_pair_counts: graph.metadata.base_pair_counts.clone(),
        pair_counts,
        involvement,
    }
}

fn percent(involved: usize, total: usize) -> u32 {
    if total == 0 {
        return 0;
    }
    (100.0 * involved as f64 / total as f64).round() as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistogramAxis {
    DataComponent,
    Restriction,
}

impl HistogramAxis {
    fn namespace(&self) -> Namespace {
        match self {
            HistogramAxis::DataComponent => Namespace::DataComponent,
            HistogramAxis::Restriction => Namespace::Restriction,
        }
    }

    fn relation(&self) -> RelationName {
        match self {
            HistogramAxis::DataComponent => RelationName::HasDataComponent,
            HistogramAxis::Restriction => RelationName::HasRestriction,
        }
    }
}

/// Distinct-threat count per data component or restriction, sorted by count
/// descending with ties broken by id ascending. Zero-count nodes are listed.
pub fn histogram(graph: &KnowledgeGraph, axis: HistogramAxis) -> Vec<(NodeId, usize)> {
    let mut counts: BTreeMap<NodeId, BTreeSet<&NodeId>> = graph
        .nodes_in(axis.namespace())
        .map(|id| (id.clone(), BTreeSet::new()))
        .collect();
    for (threat, target) in graph.relation(axis.relation()).iter() {
        if let Some(set) = counts.get_mut(target) {
            set.insert(threat);
        }
    }
    let mut rows: Vec<(NodeId, usize)> = counts
        .into_iter()
        .map(|(id, threats)| (id, threats.len()))
        .collect();
    rows.sort_by(|(id_a, count_a), (id_b, count_b)| {
        count_b.cmp(count_a).then_with(|| id_a.cmp(id_b))
    });
    rows
}
