//! Warnings and exclusion counts produced while parsing and building.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    /// attack-pattern without a usable `mitre-attack` external id.
    MissingAttackId,
    /// External id present but not shaped like a technique id.
    InvalidAttackId,
    /// CAPEC external reference with a malformed id.
    InvalidCapecRef,
    /// Kill-chain phase that resolves to no tactic in the bundle.
    UnknownTactic,
    /// "detects" relationship whose endpoints are not in the bundle.
    UnknownDetectsEndpoint,
    /// Data component without a resolvable parent data source.
    MissingDataSource,
    /// Catalog entry with no usable numeric id.
    MissingEntryId,
    /// ATTACK taxonomy mapping whose entry id is not numeric.
    InvalidTaxonomyEntry,
    /// Related_Weakness / Related_Attack_Pattern with a malformed id.
    InvalidRelatedId,
    /// Observed_Example without a recognizable CVE id.
    UnrecognizedCve,
    /// Diagram cell of a type the modeler does not know.
    UnknownCellType,
    /// Diagram flow missing a source or target endpoint.
    MissingFlowEndpoint,
    /// Label naming an id that is absent from the graph.
    UnresolvedLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub kind: WarningKind,
    pub detail: String,
}

/// Per-source record of what a parser skipped and why.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub warnings: Vec<ParseWarning>,
    /// Entries excluded because they are revoked or deprecated.
    pub excluded_deprecated: usize,
}

impl ParseReport {
    pub fn warn(&mut self, kind: WarningKind, detail: impl Into<String>) {
        self.warnings.push(ParseWarning {
            kind,
            detail: detail.into(),
        });
    }

    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// Combined report for a full catalog build, suitable for `--report` output.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub attack: ParseReport,
    pub capec: ParseReport,
    pub cwe: ParseReport,
    /// Cross-catalog references dropped because the named node does not
    /// exist, keyed by relation name.
    pub dangling_dropped: BTreeMap<String, usize>,
}

impl BuildReport {
    pub fn total_warnings(&self) -> usize {
        self.attack.warnings.len() + self.capec.warnings.len() + self.cwe.warnings.len()
    }
}
