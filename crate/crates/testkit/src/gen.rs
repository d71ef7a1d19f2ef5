//! Randomized catalog inputs for property tests. Generated graphs stay within
//! 50 nodes and 150 base edges.

use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

use threatgraph_core::ident::NodeId;
use threatgraph_core::ingest::{CapecPattern, CweWeakness, DataComponent, Tactic, Technique};
use threatgraph_core::kgraph::CatalogInputs;

const PLATFORMS: [&str; 3] = ["Windows", "Linux", "SaaS"];
const PERMISSIONS: [&str; 2] = ["User", "Administrator"];
const IMPACTS: [&str; 1] = ["Integrity"];

/// Up to `max` distinct picks from `pool`.
pub fn pick<T: Clone>(rng: &mut impl Rng, pool: &[T], max: usize) -> Vec<T> {
    if pool.is_empty() || max == 0 {
        return Vec::new();
    }
    let count = rng.gen_range(0..=max.min(pool.len()));
    pool.choose_multiple(rng, count).cloned().collect()
}

pub fn random_inputs(rng: &mut impl Rng) -> CatalogInputs {
    let n_tech = rng.gen_range(1..=8);
    let n_capec = rng.gen_range(0..=6);
    let n_cwe = rng.gen_range(0..=6);
    let n_cve = rng.gen_range(1..=4);
    let n_tactic = rng.gen_range(0..=2);
    let n_dc = rng.gen_range(0..=3);

    let technique_ids: Vec<NodeId> = (1..=n_tech)
        .map(|i| NodeId::technique(format!("T{i:04}")).unwrap())
        .collect();
    let capec_ids: Vec<NodeId> = (1..=n_capec)
        .map(|i| NodeId::capec(format!("CAPEC-{i}")).unwrap())
        .collect();
    let cwe_ids: Vec<NodeId> = (1..=n_cwe)
        .map(|i| NodeId::cwe(format!("CWE-{i}")).unwrap())
        .collect();
    let cve_ids: Vec<NodeId> = (1..=n_cve)
        .map(|i| NodeId::cve(format!("CVE-2020-{i:04}")).unwrap())
        .collect();
    let tactic_ids: Vec<NodeId> = (1..=n_tactic)
        .map(|i| NodeId::tactic(format!("TA{i:04}")).unwrap())
        .collect();

    // A dangling id per namespace, to exercise the drop-and-count path.
    let dangling_capec = NodeId::capec("CAPEC-99").unwrap();
    let dangling_technique = NodeId::technique("T0099").unwrap();
    let dangling_cwe = NodeId::cwe("CWE-99").unwrap();

    let techniques: Vec<Technique> = technique_ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let mut capec_refs: BTreeSet<NodeId> = pick(rng, &capec_ids, 2).into_iter().collect();
            if rng.gen_bool(0.1) {
                capec_refs.insert(dangling_capec.clone());
            }
            Technique {
                id: id.clone(),
                stix_id: format!("attack-pattern--{i}"),
                name: format!("Technique {}", id.local()),
                tactic_refs: pick(rng, &tactic_ids, 2).into_iter().collect(),
                capec_refs,
                platforms: pick(rng, &PLATFORMS, 2)
                    .into_iter()
                    .map(str::to_string)
                    .collect(),
                permissions_required: pick(rng, &PERMISSIONS, 1)
                    .into_iter()
                    .map(str::to_string)
                    .collect(),
                effective_permissions: Default::default(),
                impact_types: pick(rng, &IMPACTS, 1)
                    .into_iter()
                    .map(str::to_string)
                    .collect(),
                data_component_refs: Default::default(),
                revoked_or_deprecated: false,
            }
        })
        .collect();

    let tactics: Vec<Tactic> = tactic_ids
        .iter()
        .enumerate()
        .map(|(i, id)| Tactic {
            id: id.clone(),
            stix_id: format!("x-mitre-tactic--{i}"),
            name: format!("Tactic {}", id.local()),
            shortname: format!("tactic-{i}"),
        })
        .collect();

    let capecs: Vec<CapecPattern> = capec_ids
        .iter()
        .map(|id| {
            let mut related_weaknesses: BTreeSet<NodeId> =
                pick(rng, &cwe_ids, 2).into_iter().collect();
            if rng.gen_bool(0.1) {
                related_weaknesses.insert(dangling_cwe.clone());
            }
            let mut attack_taxonomy_refs: BTreeSet<NodeId> =
                pick(rng, &technique_ids, 1).into_iter().collect();
            if rng.gen_bool(0.1) {
                attack_taxonomy_refs.insert(dangling_technique.clone());
            }
            CapecPattern {
                id: id.clone(),
                name: format!("Pattern {}", id.local()),
                abstraction: "Standard".into(),
                status: "Stable".into(),
                related_weaknesses,
                attack_taxonomy_refs,
            }
        })
        .collect();

    let cwes: Vec<CweWeakness> = cwe_ids
        .iter()
        .map(|id| CweWeakness {
            id: id.clone(),
            name: format!("Weakness {}", id.local()),
            abstraction: "Base".into(),
            status: "Draft".into(),
            related_capecs: pick(rng, &capec_ids, 1).into_iter().collect(),
            observed_cves: pick(rng, &cve_ids, 2).into_iter().collect(),
        })
        .collect();

    let data_components: Vec<DataComponent> = (1..=n_dc)
        .map(|i| DataComponent {
            id: NodeId::data_component(format!("Component{i}")).unwrap(),
            stix_id: format!("x-mitre-data-component--{i}"),
            source_name: "Source".into(),
            component_name: format!("Component {i}"),
            detected_technique_refs: pick(rng, &technique_ids, 3).into_iter().collect(),
        })
        .collect();

    CatalogInputs {
        techniques,
        tactics,
        data_components,
        capecs,
        cwes,
        source_versions: Default::default(),
    }
}
