//! Catalog ingestion: ATT&CK STIX bundles, CAPEC XML, and CWE XML are parsed
//! into normalized records carrying every cross-reference the graph needs.
//!
//! Each parser is a pure function of its input text. Revoked and deprecated
//! entries are excluded by default (their count lands in the parse report);
//! pass [`ParseOptions::include_deprecated`] to keep them.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::ident::NodeId;

mod attack;
mod capec;
mod cwe;

pub use attack::{parse_attack_bundle, AttackBundle};
pub use capec::{parse_capec_catalog, CapecCatalog};
pub use cwe::{parse_cwe_catalog, CweCatalog};

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Keep revoked/deprecated entries instead of dropping them.
    pub include_deprecated: bool,
}

/// An ATT&CK technique (sub-techniques are ordinary techniques here).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Technique {
    pub id: NodeId,
    /// Machine-readable STIX identifier (`attack-pattern--<uuid>`).
    pub stix_id: String,
    pub name: String,
    #[serde(default)]
    pub tactic_refs: BTreeSet<NodeId>,
    #[serde(default)]
    pub capec_refs: BTreeSet<NodeId>,
    #[serde(default)]
    pub platforms: BTreeSet<String>,
    #[serde(default)]
    pub permissions_required: BTreeSet<String>,
    #[serde(default)]
    pub effective_permissions: BTreeSet<String>,
    #[serde(default)]
    pub impact_types: BTreeSet<String>,
    #[serde(default)]
    pub data_component_refs: BTreeSet<NodeId>,
    #[serde(default)]
    pub revoked_or_deprecated: bool,
}

/// An ATT&CK tactic (kill-chain phase target).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tactic {
    pub id: NodeId,
    pub stix_id: String,
    pub name: String,
    /// Kill-chain phase name techniques use to reference this tactic.
    pub shortname: String,
}

/// A granular observable under an ATT&CK data source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataComponent {
    pub id: NodeId,
    pub stix_id: String,
    /// Parent data source name, e.g. "Process".
    pub source_name: String,
    /// Original component name, e.g. "Process Creation".
    pub component_name: String,
    #[serde(default)]
    pub detected_technique_refs: BTreeSet<NodeId>,
}

/// A CAPEC attack pattern with its cross-references.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapecPattern {
    pub id: NodeId,
    pub name: String,
    pub abstraction: String,
    pub status: String,
    #[serde(default)]
    pub related_weaknesses: BTreeSet<NodeId>,
    #[serde(default)]
    pub attack_taxonomy_refs: BTreeSet<NodeId>,
}

/// A CWE weakness with its cross-references.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CweWeakness {
    pub id: NodeId,
    pub name: String,
    pub abstraction: String,
    pub status: String,
    #[serde(default)]
    pub related_capecs: BTreeSet<NodeId>,
    #[serde(default)]
    pub observed_cves: BTreeSet<NodeId>,
}
