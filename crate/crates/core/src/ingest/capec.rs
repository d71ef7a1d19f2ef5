//! CAPEC catalog (XML) parsing.
//!
//! Each `Attack_Pattern` element becomes a [`CapecPattern`]. CWE references
//! come from `Related_Weakness/@CWE_ID`; technique references come from
//! `Taxonomy_Mappings` entries whose taxonomy name is `ATTACK` (the entry id
//! maps to `T<id>`).

use roxmltree::{Document, Node};

use crate::error::{Error, Result};
use crate::ident::{is_technique_local, NodeId};
use crate::report::{ParseReport, WarningKind};

use super::{CapecPattern, ParseOptions};

#[derive(Clone, Debug)]
pub struct CapecCatalog {
    pub patterns: Vec<CapecPattern>,
    /// Declared catalog version (`Version` attribute of the root element).
    pub version: Option<String>,
    pub report: ParseReport,
}

pub fn parse_capec_catalog(input: &str, opts: &ParseOptions) -> Result<CapecCatalog> {
    let doc = Document::parse(input).map_err(|e| Error::from_xml(&e))?;
    let root = doc.root_element();
    let version = root.attribute("Version").map(str::to_string);

    let mut report = ParseReport::default();
    let mut patterns = Vec::new();

    for node in doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "Attack_Pattern")
    {
        let status = node.attribute("Status").unwrap_or_default().to_string();
        if status == "Deprecated" && !opts.include_deprecated {
            report.excluded_deprecated += 1;
            continue;
        }
        let Some(raw_id) = node.attribute("ID").filter(|v| !v.is_empty()) else {
            report.warn(WarningKind::MissingEntryId, "Attack_Pattern without ID");
            continue;
        };
        let Ok(id) = NodeId::capec(format!("CAPEC-{raw_id}")) else {
            report.warn(
                WarningKind::MissingEntryId,
                format!("Attack_Pattern ID `{raw_id}` is not numeric"),
            );
            continue;
        };

        let mut pattern = CapecPattern {
            id: id.clone(),
            name: node.attribute("Name").unwrap_or_default().to_string(),
            abstraction: node
                .attribute("Abstraction")
                .unwrap_or_default()
                .to_string(),
            status,
            related_weaknesses: Default::default(),
            attack_taxonomy_refs: Default::default(),
        };

        for weakness in elements_named(&node, "Related_Weakness") {
            let raw = weakness.attribute("CWE_ID").unwrap_or_default();
            match NodeId::cwe(format!("CWE-{raw}")) {
                Ok(cwe) => {
                    pattern.related_weaknesses.insert(cwe);
                }
                Err(_) => report.warn(
                    WarningKind::InvalidRelatedId,
                    format!("{id}: Related_Weakness CWE_ID `{raw}` is malformed"),
                ),
            }
        }

        for mapping in elements_named(&node, "Taxonomy_Mapping") {
            if mapping.attribute("Taxonomy_Name") != Some("ATTACK") {
                continue;
            }
            let entry = entry_id(&mapping).unwrap_or_default();
            let candidate = format!("T{entry}");
            if entry.is_empty() || !is_technique_local(&candidate) {
                report.warn(
                    WarningKind::InvalidTaxonomyEntry,
                    format!("{id}: ATTACK taxonomy entry `{entry}` is not a technique number"),
                );
                continue;
            }
            pattern
                .attack_taxonomy_refs
                .insert(NodeId::technique(candidate)?);
        }

        patterns.push(pattern);
    }

    Ok(CapecCatalog {
        patterns,
        version,
        report,
    })
}

/// Entry id of a taxonomy mapping: child `Entry_ID` element, with the
/// attribute form accepted as a fallback.
fn entry_id<'a>(mapping: &Node<'a, '_>) -> Option<&'a str> {
    mapping
        .children()
        .find(|c| c.is_element() && c.tag_name().name() == "Entry_ID")
        .and_then(|c| c.text())
        .or_else(|| mapping.attribute("Entry_ID"))
        .map(str::trim)
}

fn elements_named<'a, 'd>(
    node: &Node<'a, 'd>,
    name: &'static str,
) -> impl Iterator<Item = Node<'a, 'd>> {
    node.descendants()
        .filter(move |n| n.is_element() && n.tag_name().name() == name)
}
