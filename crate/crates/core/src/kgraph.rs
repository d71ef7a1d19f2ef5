//! The typed knowledge graph and its inference layer.
//!
//! Construction assembles parsed records into nodes and nine base relations.
//! The inference layer is the exact rule fragment the graph needs, run as
//! deterministic set algebra:
//!
//! * inverse symmetrization: `refToCAPEC`/`isRefToATTCK` and
//!   `refToCWE`/`isRefToCAPEC` become exact reversals of each other;
//! * three property chains: `refToCAPECreasoned`, `refToCWEreasoned`, and
//!   `refToCVEreasoned` are relational compositions rooted at `refToATTCK`;
//! * the `refToEnum` super-relation: the union of `refToATTCK` and the three
//!   reasoned relations.
//!
//! After [`KnowledgeGraph::apply_chain_closure`] sets the closure flag the
//! graph is treated as immutable.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ident::{canonicalize_name, NameStyle, Namespace, NodeId};
use crate::ingest::{CapecPattern, CweWeakness, DataComponent, Tactic, Technique};

/// Names of the edge relations, base and derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationName {
    #[serde(rename = "refToATTCK")]
    RefToAttck,
    #[serde(rename = "refToTactic")]
    RefToTactic,
    #[serde(rename = "refToCAPEC")]
    RefToCapec,
    #[serde(rename = "isRefToATTCK")]
    IsRefToAttck,
    #[serde(rename = "refToCWE")]
    RefToCwe,
    #[serde(rename = "isRefToCAPEC")]
    IsRefToCapec,
    #[serde(rename = "refToCVE")]
    RefToCve,
    #[serde(rename = "refToCAPECreasoned")]
    RefToCapecReasoned,
    #[serde(rename = "refToCWEreasoned")]
    RefToCweReasoned,
    #[serde(rename = "refToCVEreasoned")]
    RefToCveReasoned,
    #[serde(rename = "refToEnum")]
    RefToEnum,
    #[serde(rename = "hasDataComponent")]
    HasDataComponent,
    #[serde(rename = "hasRestriction")]
    HasRestriction,
}

impl RelationName {
    pub const ALL: [RelationName; 13] = [
        RelationName::RefToAttck,
        RelationName::RefToTactic,
        RelationName::RefToCapec,
        RelationName::IsRefToAttck,
        RelationName::RefToCwe,
        RelationName::IsRefToCapec,
        RelationName::RefToCve,
        RelationName::RefToCapecReasoned,
        RelationName::RefToCweReasoned,
        RelationName::RefToCveReasoned,
        RelationName::RefToEnum,
        RelationName::HasDataComponent,
        RelationName::HasRestriction,
    ];

    /// Relations populated directly from catalog records.
    pub const BASE: [RelationName; 9] = [
        RelationName::RefToAttck,
        RelationName::RefToTactic,
        RelationName::RefToCapec,
        RelationName::IsRefToAttck,
        RelationName::RefToCwe,
        RelationName::IsRefToCapec,
        RelationName::RefToCve,
        RelationName::HasDataComponent,
        RelationName::HasRestriction,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationName::RefToAttck => "refToATTCK",
            RelationName::RefToTactic => "refToTactic",
            RelationName::RefToCapec => "refToCAPEC",
            RelationName::IsRefToAttck => "isRefToATTCK",
            RelationName::RefToCwe => "refToCWE",
            RelationName::IsRefToCapec => "isRefToCAPEC",
            RelationName::RefToCve => "refToCVE",
            RelationName::RefToCapecReasoned => "refToCAPECreasoned",
            RelationName::RefToCweReasoned => "refToCWEreasoned",
            RelationName::RefToCveReasoned => "refToCVEreasoned",
            RelationName::RefToEnum => "refToEnum",
            RelationName::HasDataComponent => "hasDataComponent",
            RelationName::HasRestriction => "hasRestriction",
        }
    }

    /// Allowed (source, target) namespaces for the relation's pairs.
    pub fn signature(&self) -> (&'static [Namespace], &'static [Namespace]) {
        use Namespace::*;
        match self {
            RelationName::RefToAttck => (&[Threat], &[Attck]),
            RelationName::RefToTactic => (&[Attck], &[Tactic]),
            RelationName::RefToCapec => (&[Attck], &[Capec]),
            RelationName::IsRefToAttck => (&[Capec], &[Attck]),
            RelationName::RefToCwe => (&[Capec], &[Cwe]),
            RelationName::IsRefToCapec => (&[Cwe], &[Capec]),
            RelationName::RefToCve => (&[Cwe], &[Cve]),
            RelationName::RefToCapecReasoned => (&[Threat], &[Capec]),
            RelationName::RefToCweReasoned => (&[Threat], &[Cwe]),
            RelationName::RefToCveReasoned => (&[Threat], &[Cve]),
            RelationName::RefToEnum => (&[Threat], &[Attck, Capec, Cwe, Cve]),
            RelationName::HasDataComponent => (&[Threat], &[DataComponent]),
            RelationName::HasRestriction => (&[Threat], &[Restriction]),
        }
    }
}

impl fmt::Display for RelationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelationName::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidDocument(format!("unknown relation `{s}`")))
    }
}

/// A named set of directed (source, target) pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRelation {
    pub name: RelationName,
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl EdgeRelation {
    pub fn new(name: RelationName) -> Self {
        EdgeRelation {
            name,
            pairs: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, source: NodeId, target: NodeId) -> bool {
        self.pairs.insert((source, target))
    }

    pub fn contains(&self, source: &NodeId, target: &NodeId) -> bool {
        self.pairs.contains(&(source.clone(), target.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(NodeId, NodeId)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.pairs
    }

    pub fn targets_of<'a>(&'a self, source: &'a NodeId) -> impl Iterator<Item = &'a NodeId> {
        self.pairs
            .iter()
            .filter(move |(s, _)| s == source)
            .map(|(_, t)| t)
    }

    pub fn sources_of<'a>(&'a self, target: &'a NodeId) -> impl Iterator<Item = &'a NodeId> {
        self.pairs
            .iter()
            .filter(move |(_, t)| t == target)
            .map(|(s, _)| s)
    }

    /// Distinct sources, for involvement statistics.
    pub fn source_set(&self) -> BTreeSet<&NodeId> {
        self.pairs.iter().map(|(s, _)| s).collect()
    }

    fn reversed_pairs(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.pairs
            .iter()
            .map(|(s, t)| (t.clone(), s.clone()))
            .collect()
    }

    fn replace_pairs(&mut self, pairs: BTreeSet<(NodeId, NodeId)>) {
        self.pairs = pairs;
    }
}

/// Technique applicability attribute used to filter threats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RestrictionCategory {
    Platform,
    PermissionsRequired,
    EffectivePermissions,
    ImpactType,
}

impl RestrictionCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            RestrictionCategory::Platform => "Platform",
            RestrictionCategory::PermissionsRequired => "PermissionsRequired",
            RestrictionCategory::EffectivePermissions => "EffectivePermissions",
            RestrictionCategory::ImpactType => "ImpactType",
        }
    }
}

impl fmt::Display for RestrictionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restriction {
    pub id: NodeId,
    pub category: RestrictionCategory,
    pub value: String,
}

impl Restriction {
    /// `Platform` + `"Office 365"` → id `RESTRICTION:Platform_Office_365`.
    pub fn from_value(category: RestrictionCategory, value: &str) -> Result<Self> {
        let canonical = canonicalize_name(value, NameStyle::Underscored)?;
        Ok(Restriction {
            id: NodeId::restriction(format!("{category}_{canonical}"))?,
            category,
            value: value.to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CveStub {
    pub id: NodeId,
}

/// The threat instance paired with a technique.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatStub {
    pub id: NodeId,
    pub technique: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodePayload {
    Technique(Technique),
    Tactic(Tactic),
    Capec(CapecPattern),
    Cwe(CweWeakness),
    Cve(CveStub),
    DataComponent(DataComponent),
    Restriction(Restriction),
    Threat(ThreatStub),
}

impl NodePayload {
    pub fn id(&self) -> &NodeId {
        match self {
            NodePayload::Technique(t) => &t.id,
            NodePayload::Tactic(t) => &t.id,
            NodePayload::Capec(c) => &c.id,
            NodePayload::Cwe(w) => &w.id,
            NodePayload::Cve(v) => &v.id,
            NodePayload::DataComponent(d) => &d.id,
            NodePayload::Restriction(r) => &r.id,
            NodePayload::Threat(t) => &t.id,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            NodePayload::Technique(t) => Some(&t.name),
            NodePayload::Tactic(t) => Some(&t.name),
            NodePayload::Capec(c) => Some(&c.name),
            NodePayload::Cwe(w) => Some(&w.name),
            NodePayload::DataComponent(d) => Some(&d.component_name),
            NodePayload::Restriction(r) => Some(&r.value),
            NodePayload::Cve(_) | NodePayload::Threat(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMetadata {
    /// Declared version string per source file ("attack", "capec", "cwe").
    pub source_versions: BTreeMap<String, String>,
    pub closure_applied: bool,
    /// Pair counts of the base relations as built, before symmetrization.
    pub base_pair_counts: BTreeMap<RelationName, usize>,
    /// Cross-references dropped because their endpoint is absent.
    pub dangling_dropped: BTreeMap<RelationName, usize>,
    /// Build wall-clock (unix seconds). Not serialized: snapshots must be
    /// byte-identical across rebuilds from identical inputs.
    #[serde(skip)]
    pub built_at: Option<u64>,
}

/// Typed nodes plus the thirteen edge relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeGraph {
    nodes: BTreeMap<NodeId, NodePayload>,
    relations: BTreeMap<RelationName, EdgeRelation>,
    pub metadata: GraphMetadata,
}

impl Default for KnowledgeGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        let relations = RelationName::ALL
            .iter()
            .map(|&name| (name, EdgeRelation::new(name)))
            .collect();
        KnowledgeGraph {
            nodes: BTreeMap::new(),
            relations,
            metadata: GraphMetadata::default(),
        }
    }

    pub fn relation(&self, name: RelationName) -> &EdgeRelation {
        &self.relations[&name]
    }

    pub fn relation_mut(&mut self, name: RelationName) -> &mut EdgeRelation {
        self.relations.get_mut(&name).expect("all relations exist")
    }

    pub fn relations(&self) -> impl Iterator<Item = &EdgeRelation> {
        self.relations.values()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &NodePayload)> {
        self.nodes.iter()
    }

    pub fn node(&self, id: &NodeId) -> Option<&NodePayload> {
        self.nodes.get(id)
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes_in(&self, namespace: Namespace) -> impl Iterator<Item = &NodeId> {
        self.nodes
            .keys()
            .filter(move |id| id.namespace() == namespace)
    }

    pub fn insert_node(&mut self, payload: NodePayload) -> Result<()> {
        let id = payload.id().clone();
        if self.nodes.contains_key(&id) {
            return Err(Error::DuplicateNode { id: id.to_string() });
        }
        self.nodes.insert(id, payload);
        Ok(())
    }

    fn insert_node_if_absent(&mut self, payload: NodePayload) {
        let id = payload.id().clone();
        self.nodes.entry(id).or_insert(payload);
    }

    /// Makes `refToCAPEC`/`isRefToATTCK` and `refToCWE`/`isRefToCAPEC` exact
    /// reversals of each other by unioning each direction with the reverse of
    /// its partner. Idempotent.
    pub fn symmetrize_inverses(&mut self) {
        self.symmetrize_pair(RelationName::RefToCapec, RelationName::IsRefToAttck);
        self.symmetrize_pair(RelationName::RefToCwe, RelationName::IsRefToCapec);
    }

    fn symmetrize_pair(&mut self, forward: RelationName, backward: RelationName) {
        let reversed_backward = self.relations[&backward].reversed_pairs();
        let fwd = self.relation_mut(forward);
        fwd.pairs.extend(reversed_backward);
        let reversed_forward = self.relations[&forward].reversed_pairs();
        self.relation_mut(backward).replace_pairs(reversed_forward);
    }

    /// Materializes the three reasoned relations and the `refToEnum`
    /// super-relation, then sets the closure flag. Recomputes from the base
    /// relations, so re-running changes nothing.
    pub fn apply_chain_closure(&mut self) {
        let capec_reasoned = compose(
            self.relation(RelationName::RefToAttck),
            self.relation(RelationName::RefToCapec),
        );
        let cwe_reasoned = compose_pairs(&capec_reasoned, self.relation(RelationName::RefToCwe));
        let cve_reasoned = compose_pairs(&cwe_reasoned, self.relation(RelationName::RefToCve));

        let mut enum_pairs = self.relation(RelationName::RefToAttck).pairs.clone();
        enum_pairs.extend(capec_reasoned.iter().cloned());
        enum_pairs.extend(cwe_reasoned.iter().cloned());
        enum_pairs.extend(cve_reasoned.iter().cloned());

        self.relation_mut(RelationName::RefToCapecReasoned)
            .replace_pairs(capec_reasoned);
        self.relation_mut(RelationName::RefToCweReasoned)
            .replace_pairs(cwe_reasoned);
        self.relation_mut(RelationName::RefToCveReasoned)
            .replace_pairs(cve_reasoned);
        self.relation_mut(RelationName::RefToEnum)
            .replace_pairs(enum_pairs);
        self.metadata.closure_applied = true;
    }

    /// Technique paired with a threat node through `refToATTCK`.
    pub fn technique_of_threat<'a>(&'a self, threat: &'a NodeId) -> Option<&'a NodeId> {
        self.relation(RelationName::RefToAttck)
            .targets_of(threat)
            .next()
    }

    pub fn threat_of_technique<'a>(&'a self, technique: &'a NodeId) -> Option<&'a NodeId> {
        self.relation(RelationName::RefToAttck)
            .sources_of(technique)
            .next()
    }

    /// Structural invariants: endpoints exist, signatures hold, no self-loops,
    /// and the threat/technique pairing is one-to-one.
    pub fn validate(&self) -> Result<()> {
        for relation in self.relations.values() {
            let (sources, targets) = relation.name.signature();
            for (s, t) in relation.iter() {
                if s == t {
                    return Err(Error::Consistency(format!(
                        "{}: self-loop on {s}",
                        relation.name
                    )));
                }
                if !self.nodes.contains_key(s) || !self.nodes.contains_key(t) {
                    return Err(Error::Consistency(format!(
                        "{}: pair ({s}, {t}) references a missing node",
                        relation.name
                    )));
                }
                if !sources.contains(&s.namespace()) || !targets.contains(&t.namespace()) {
                    return Err(Error::Consistency(format!(
                        "{}: pair ({s}, {t}) violates the relation signature",
                        relation.name
                    )));
                }
            }
        }
        let techniques = self.nodes_in(Namespace::Attck).count();
        let threats = self.nodes_in(Namespace::Threat).count();
        let pairing = self.relation(RelationName::RefToAttck);
        let distinct_sources = pairing.source_set().len();
        let distinct_targets: BTreeSet<&NodeId> = pairing.iter().map(|(_, t)| t).collect();
        if techniques != threats
            || pairing.len() != techniques
            || distinct_sources != threats
            || distinct_targets.len() != techniques
        {
            return Err(Error::Consistency(format!(
                "threat/technique pairing is not one-to-one ({threats} threats, \
                 {techniques} techniques, {} refToATTCK pairs)",
                pairing.len()
            )));
        }
        Ok(())
    }
}

/// Standard relational composition: (x, z) iff some y links x to z.
fn compose(r1: &EdgeRelation, r2: &EdgeRelation) -> BTreeSet<(NodeId, NodeId)> {
    compose_pairs(&r1.pairs, r2)
}

fn compose_pairs(r1: &BTreeSet<(NodeId, NodeId)>, r2: &EdgeRelation) -> BTreeSet<(NodeId, NodeId)> {
    let mut by_source: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for (y, z) in r2.iter() {
        by_source.entry(y).or_default().push(z);
    }
    let mut out = BTreeSet::new();
    for (x, y) in r1 {
        if let Some(zs) = by_source.get(y) {
            for z in zs {
                out.insert((x.clone(), (*z).clone()));
            }
        }
    }
    out
}

/// Record sets a graph is assembled from.
#[derive(Clone, Debug, Default)]
pub struct CatalogInputs {
    pub techniques: Vec<Technique>,
    pub tactics: Vec<Tactic>,
    pub data_components: Vec<DataComponent>,
    pub capecs: Vec<CapecPattern>,
    pub cwes: Vec<CweWeakness>,
    pub source_versions: BTreeMap<String, String>,
}

/// Assembles records into a graph with the base relations populated.
///
/// Creates one threat stub per technique, one restriction node per distinct
/// (category, value) observed across techniques, and one CVE stub per distinct
/// observed CVE. Cross-references naming nodes that do not exist are dropped
/// and counted in `metadata.dangling_dropped`.
pub fn build_graph(inputs: CatalogInputs) -> Result<KnowledgeGraph> {
    let mut graph = KnowledgeGraph::new();
    graph.metadata.source_versions = inputs.source_versions;
    graph.metadata.built_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());

    for tactic in &inputs.tactics {
        graph.insert_node(NodePayload::Tactic(tactic.clone()))?;
    }
    for capec in &inputs.capecs {
        graph.insert_node(NodePayload::Capec(capec.clone()))?;
    }
    for cwe in &inputs.cwes {
        graph.insert_node(NodePayload::Cwe(cwe.clone()))?;
    }
    for component in &inputs.data_components {
        graph.insert_node(NodePayload::DataComponent(component.clone()))?;
    }
    for technique in &inputs.techniques {
        graph.insert_node(NodePayload::Technique(technique.clone()))?;
        let threat = NodeId::threat_of(&technique.id)?;
        graph.insert_node(NodePayload::Threat(ThreatStub {
            id: threat.clone(),
            technique: technique.id.clone(),
        }))?;
        graph
            .relation_mut(RelationName::RefToAttck)
            .insert(threat, technique.id.clone());
    }
    // CVE stubs: only CVEs named by the weakness catalog are materialized.
    for cwe in &inputs.cwes {
        for cve in &cwe.observed_cves {
            graph.insert_node_if_absent(NodePayload::Cve(CveStub { id: cve.clone() }));
        }
    }

    let mut dangling: BTreeMap<RelationName, usize> = BTreeMap::new();
    let mut drop_dangling = |name: RelationName| {
        *dangling.entry(name).or_insert(0) += 1;
    };

    // Restrictions and hasRestriction.
    type AttributeGetter = fn(&Technique) -> &BTreeSet<String>;
    let restriction_sources: [(RestrictionCategory, AttributeGetter); 4] = [
        (RestrictionCategory::Platform, |t| &t.platforms),
        (RestrictionCategory::PermissionsRequired, |t| {
            &t.permissions_required
        }),
        (RestrictionCategory::EffectivePermissions, |t| {
            &t.effective_permissions
        }),
        (RestrictionCategory::ImpactType, |t| &t.impact_types),
    ];
    for technique in &inputs.techniques {
        let threat = NodeId::threat_of(&technique.id)?;
        for (category, values) in &restriction_sources {
            for value in values(technique) {
                let Ok(restriction) = Restriction::from_value(*category, value) else {
                    drop_dangling(RelationName::HasRestriction);
                    continue;
                };
                let id = restriction.id.clone();
                graph.insert_node_if_absent(NodePayload::Restriction(restriction));
                graph
                    .relation_mut(RelationName::HasRestriction)
                    .insert(threat.clone(), id);
            }
        }
    }

    // Base cross-reference relations, dropping dangling endpoints.
    for technique in &inputs.techniques {
        for tactic in &technique.tactic_refs {
            if graph.contains_node(tactic) {
                graph
                    .relation_mut(RelationName::RefToTactic)
                    .insert(technique.id.clone(), tactic.clone());
            } else {
                drop_dangling(RelationName::RefToTactic);
            }
        }
        for capec in &technique.capec_refs {
            if graph.contains_node(capec) {
                graph
                    .relation_mut(RelationName::RefToCapec)
                    .insert(technique.id.clone(), capec.clone());
            } else {
                drop_dangling(RelationName::RefToCapec);
            }
        }
    }
    for capec in &inputs.capecs {
        for technique in &capec.attack_taxonomy_refs {
            if graph.contains_node(technique) {
                graph
                    .relation_mut(RelationName::IsRefToAttck)
                    .insert(capec.id.clone(), technique.clone());
            } else {
                drop_dangling(RelationName::IsRefToAttck);
            }
        }
        for cwe in &capec.related_weaknesses {
            if graph.contains_node(cwe) {
                graph
                    .relation_mut(RelationName::RefToCwe)
                    .insert(capec.id.clone(), cwe.clone());
            } else {
                drop_dangling(RelationName::RefToCwe);
            }
        }
    }
    for cwe in &inputs.cwes {
        for capec in &cwe.related_capecs {
            if graph.contains_node(capec) {
                graph
                    .relation_mut(RelationName::IsRefToCapec)
                    .insert(cwe.id.clone(), capec.clone());
            } else {
                drop_dangling(RelationName::IsRefToCapec);
            }
        }
        for cve in &cwe.observed_cves {
            graph
                .relation_mut(RelationName::RefToCve)
                .insert(cwe.id.clone(), cve.clone());
        }
    }
    // hasDataComponent is the inversion of the detects join.
    for component in &inputs.data_components {
        for technique in &component.detected_technique_refs {
            match graph.threat_of_technique(technique).cloned() {
                Some(threat) => {
                    graph
                        .relation_mut(RelationName::HasDataComponent)
                        .insert(threat, component.id.clone());
                }
                None => drop_dangling(RelationName::HasDataComponent),
            }
        }
    }

    graph.metadata.dangling_dropped = dangling;
    graph.metadata.base_pair_counts = RelationName::BASE
        .iter()
        .map(|&name| (name, graph.relation(name).len()))
        .collect();

    graph.validate()?;
    Ok(graph)
}
