//! CWE catalog (XML) parsing.
//!
//! Each `Weakness` element becomes a [`CweWeakness`]. CAPEC references come
//! from `Related_Attack_Pattern/@CAPEC_ID`; CVE references come from
//! `Observed_Example` entries whose reference text carries a CVE id.

use roxmltree::{Document, Node};

use crate::error::{Error, Result};
use crate::ident::{find_cve_id, NodeId};
use crate::report::{ParseReport, WarningKind};

use super::{CweWeakness, ParseOptions};

#[derive(Clone, Debug)]
pub struct CweCatalog {
    pub weaknesses: Vec<CweWeakness>,
    /// Declared catalog version (`Version` attribute of the root element).
    pub version: Option<String>,
    pub report: ParseReport,
}

pub fn parse_cwe_catalog(input: &str, opts: &ParseOptions) -> Result<CweCatalog> {
    let doc = Document::parse(input).map_err(|e| Error::from_xml(&e))?;
    let root = doc.root_element();
    let version = root.attribute("Version").map(str::to_string);

    let mut report = ParseReport::default();
    let mut weaknesses = Vec::new();

    for node in doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "Weakness")
    {
        let status = node.attribute("Status").unwrap_or_default().to_string();
        if status == "Deprecated" && !opts.include_deprecated {
            report.excluded_deprecated += 1;
            continue;
        }
        let Some(raw_id) = node.attribute("ID").filter(|v| !v.is_empty()) else {
            report.warn(WarningKind::MissingEntryId, "Weakness without ID");
            continue;
        };
        let Ok(id) = NodeId::cwe(format!("CWE-{raw_id}")) else {
            report.warn(
                WarningKind::MissingEntryId,
                format!("Weakness ID `{raw_id}` is not numeric"),
            );
            continue;
        };

        let mut weakness = CweWeakness {
            id: id.clone(),
            name: node.attribute("Name").unwrap_or_default().to_string(),
            abstraction: node
                .attribute("Abstraction")
                .unwrap_or_default()
                .to_string(),
            status,
            related_capecs: Default::default(),
            observed_cves: Default::default(),
        };

        for pattern in elements_named(&node, "Related_Attack_Pattern") {
            let raw = pattern.attribute("CAPEC_ID").unwrap_or_default();
            match NodeId::capec(format!("CAPEC-{raw}")) {
                Ok(capec) => {
                    weakness.related_capecs.insert(capec);
                }
                Err(_) => report.warn(
                    WarningKind::InvalidRelatedId,
                    format!("{id}: Related_Attack_Pattern CAPEC_ID `{raw}` is malformed"),
                ),
            }
        }

        for example in elements_named(&node, "Observed_Example") {
            let reference = example
                .children()
                .find(|c| c.is_element() && c.tag_name().name() == "Reference")
                .and_then(|c| c.text())
                .unwrap_or_default();
            match find_cve_id(reference) {
                Some(cve) => {
                    weakness.observed_cves.insert(NodeId::cve(cve)?);
                }
                None => report.warn(
                    WarningKind::UnrecognizedCve,
                    format!("{id}: Observed_Example `{reference}` carries no CVE id"),
                ),
            }
        }

        weaknesses.push(weakness);
    }

    Ok(CweCatalog {
        weaknesses,
        version,
        report,
    })
}

fn elements_named<'a, 'd>(
    node: &Node<'a, 'd>,
    name: &'static str,
) -> impl Iterator<Item = Node<'a, 'd>> {
    node.descendants()
        .filter(move |n| n.is_element() && n.tag_name().name() == name)
}
