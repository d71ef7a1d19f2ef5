//! Brute-force reference computations: nested-loop reverse, nested-loop join,
//! path search, and direct evaluation of the resolution formula.

use std::collections::BTreeSet;

use threatgraph_core::ident::NodeId;
use threatgraph_core::kgraph::{KnowledgeGraph, RelationName};

use crate::PairSet;

pub fn reverse(pairs: &PairSet) -> PairSet {
    let mut out = PairSet::new();
    for (a, b) in pairs {
        out.insert((b.clone(), a.clone()));
    }
    out
}

pub fn union(a: &PairSet, b: &PairSet) -> PairSet {
    let mut out = a.clone();
    for pair in b {
        out.insert(pair.clone());
    }
    out
}

/// Nested-loop relational join: (x, z) iff (x, y) in r1 and (y, z) in r2.
pub fn compose(r1: &PairSet, r2: &PairSet) -> PairSet {
    let mut out = PairSet::new();
    for (x, y1) in r1 {
        for (y2, z) in r2 {
            if y1 == y2 {
                out.insert((x.clone(), z.clone()));
            }
        }
    }
    out
}

/// The base relations of a freshly built (un-symmetrized) graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BaseRelations {
    pub ref_to_attck: PairSet,
    pub ref_to_capec: PairSet,
    pub is_ref_to_attck: PairSet,
    pub ref_to_cwe: PairSet,
    pub is_ref_to_capec: PairSet,
    pub ref_to_cve: PairSet,
    pub has_data_component: PairSet,
    pub has_restriction: PairSet,
}

pub fn base_relations(graph: &KnowledgeGraph) -> BaseRelations {
    let pairs = |name| graph.relation(name).pairs().clone();
    BaseRelations {
        ref_to_attck: pairs(RelationName::RefToAttck),
        ref_to_capec: pairs(RelationName::RefToCapec),
        is_ref_to_attck: pairs(RelationName::IsRefToAttck),
        ref_to_cwe: pairs(RelationName::RefToCwe),
        is_ref_to_capec: pairs(RelationName::IsRefToCapec),
        ref_to_cve: pairs(RelationName::RefToCve),
        has_data_component: pairs(RelationName::HasDataComponent),
        has_restriction: pairs(RelationName::HasRestriction),
    }
}

/// Everything symmetrization and the chain closure are expected to produce.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClosedRelations {
    pub ref_to_capec: PairSet,
    pub is_ref_to_attck: PairSet,
    pub ref_to_cwe: PairSet,
    pub is_ref_to_capec: PairSet,
    pub ref_to_capec_reasoned: PairSet,
    pub ref_to_cwe_reasoned: PairSet,
    pub ref_to_cve_reasoned: PairSet,
    pub ref_to_enum: PairSet,
}

/// Reference closure: symmetrize by reverse-union, then chain by nested-loop
/// joins, then union the super-relation.
pub fn brute_force_closure(base: &BaseRelations) -> ClosedRelations {
    let ref_to_capec = union(&base.ref_to_capec, &reverse(&base.is_ref_to_attck));
    let is_ref_to_attck = reverse(&ref_to_capec);
    let ref_to_cwe = union(&base.ref_to_cwe, &reverse(&base.is_ref_to_capec));
    let is_ref_to_capec = reverse(&ref_to_cwe);

    let ref_to_capec_reasoned = compose(&base.ref_to_attck, &ref_to_capec);
    let ref_to_cwe_reasoned = compose(&ref_to_capec_reasoned, &ref_to_cwe);
    let ref_to_cve_reasoned = compose(&ref_to_cwe_reasoned, &base.ref_to_cve);

    let ref_to_enum = union(
        &union(&base.ref_to_attck, &ref_to_capec_reasoned),
        &union(&ref_to_cwe_reasoned, &ref_to_cve_reasoned),
    );

    ClosedRelations {
        ref_to_capec,
        is_ref_to_attck,
        ref_to_cwe,
        is_ref_to_capec,
        ref_to_capec_reasoned,
        ref_to_cwe_reasoned,
        ref_to_cve_reasoned,
        ref_to_enum,
    }
}

/// Snapshot of the engine's closed relations, for comparing against
/// [`brute_force_closure`].
pub fn closed_relations(graph: &KnowledgeGraph) -> ClosedRelations {
    let pairs = |name| graph.relation(name).pairs().clone();
    ClosedRelations {
        ref_to_capec: pairs(RelationName::RefToCapec),
        is_ref_to_attck: pairs(RelationName::IsRefToAttck),
        ref_to_cwe: pairs(RelationName::RefToCwe),
        is_ref_to_capec: pairs(RelationName::IsRefToCapec),
        ref_to_capec_reasoned: pairs(RelationName::RefToCapecReasoned),
        ref_to_cwe_reasoned: pairs(RelationName::RefToCweReasoned),
        ref_to_cve_reasoned: pairs(RelationName::RefToCveReasoned),
        ref_to_enum: pairs(RelationName::RefToEnum),
    }
}

/// Techniques reachable backwards from `target`, found by a path search over
/// the base relations only (both directions of the inverse pairs are walked,
/// mirroring what symmetrization would allow).
pub fn brute_force_techniques_for(base: &BaseRelations, target: &NodeId) -> BTreeSet<NodeId> {
    let technique_capec = union(&base.ref_to_capec, &reverse(&base.is_ref_to_attck));
    let capec_cwe = union(&base.ref_to_cwe, &reverse(&base.is_ref_to_capec));

    let mut techniques = BTreeSet::new();
    for (_, technique) in &base.ref_to_attck {
        if technique == target {
            techniques.insert(technique.clone());
            continue;
        }
        let capecs: BTreeSet<&NodeId> = technique_capec
            .iter()
            .filter(|(t, _)| t == technique)
            .map(|(_, c)| c)
            .collect();
        if capecs.contains(target) {
            techniques.insert(technique.clone());
            continue;
        }
        let cwes: BTreeSet<&NodeId> = capec_cwe
            .iter()
            .filter(|(c, _)| capecs.contains(c))
            .map(|(_, w)| w)
            .collect();
        if cwes.contains(target) {
            techniques.insert(technique.clone());
            continue;
        }
        let reaches_cve = base
            .ref_to_cve
            .iter()
            .any(|(w, v)| cwes.contains(w) && v == target);
        if reaches_cve {
            techniques.insert(technique.clone());
        }
    }
    techniques
}

/// Direct evaluation of the element-resolution formula.
///
/// `existing` is the set of node ids present in the graph; labels outside it
/// are excluded, mirroring the unresolved-label rule. `restrictions` must
/// already contain any inherited restriction targets.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_resolution(
    all_threats: &BTreeSet<NodeId>,
    existing: &BTreeSet<NodeId>,
    has_data_component: &PairSet,
    ref_to_enum: &PairSet,
    has_restriction: &PairSet,
    data_component_labels: &BTreeSet<NodeId>,
    enum_labels: &BTreeSet<NodeId>,
    restriction_labels: &BTreeSet<NodeId>,
) -> BTreeSet<NodeId> {
    let keep = |labels: &BTreeSet<NodeId>| -> BTreeSet<NodeId> {
        labels
            .iter()
            .filter(|id| existing.contains(*id))
            .cloned()
            .collect()
    };
    let dc = keep(data_component_labels);
    let en = keep(enum_labels);
    let rs = keep(restriction_labels);

    let mut candidates: BTreeSet<NodeId> = BTreeSet::new();
    if dc.is_empty() && en.is_empty() {
        if rs.is_empty() {
            return BTreeSet::new();
        }
        candidates = all_threats.clone();
    } else {
        for d in &dc {
            for (threat, component) in has_data_component {
                if component == d {
                    candidates.insert(threat.clone());
                }
            }
        }
        for e in &en {
            for (threat, enum_target) in ref_to_enum {
                if enum_target == e {
                    candidates.insert(threat.clone());
                }
            }
        }
    }

    for r in &rs {
        let mut next = BTreeSet::new();
        for threat in &candidates {
            if has_restriction.contains(&(threat.clone(), r.clone())) {
                next.insert(threat.clone());
            }
        }
        candidates = next;
    }
    candidates
}
