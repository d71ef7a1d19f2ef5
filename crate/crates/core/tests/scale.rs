//! Scale smoke: a synthetic corpus at realistic catalog scale flows through
//! build, closure, persistence, and queries within the time budget.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use threatgraph_core::ident::{Namespace, NodeId};
use threatgraph_core::ingest::{CapecPattern, CweWeakness, DataComponent, Tactic, Technique};
use threatgraph_core::kgraph::{build_graph, CatalogInputs, RelationName};
use threatgraph_core::{query, snapshot};

const PLATFORMS: [&str; 10] = [
    "Windows",
    "Linux",
    "macOS",
    "SaaS",
    "IaaS",
    "PRE",
    "Office 365",
    "Google Workspace",
    "Azure AD",
    "Containers",
];

fn synthetic_inputs(rng: &mut ChaCha8Rng) -> CatalogInputs {
    let n_tech = 700;
    let n_capec = 603;
    let n_cwe = 945;
    let n_cve = 1748;

    let tactics: Vec<Tactic> = (1..=14)
        .map(|i| Tactic {
            id: NodeId::tactic(format!("TA{i:04}")).unwrap(),
            stix_id: format!("x-mitre-tactic--{i}"),
            name: format!("Tactic {i}"),
            shortname: format!("tactic-{i}"),
        })
        .collect();

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
        .map(|i| NodeId::cve(format!("CVE-2021-{i:04}")).unwrap())
        .collect();

    let mut techniques: Vec<Technique> = technique_ids
        .iter()
        .enumerate()
        .map(|(i, id)| Technique {
            id: id.clone(),
            stix_id: format!("attack-pattern--{i}"),
            name: format!("Technique {}", id.local()),
            tactic_refs: [tactics[i % tactics.len()].id.clone()].into(),
            capec_refs: Default::default(),
            platforms: (0..rng.gen_range(1..=3))
                .map(|_| PLATFORMS[rng.gen_range(0..PLATFORMS.len())].to_string())
                .collect(),
            permissions_required: if rng.gen_bool(0.4) {
                [["User", "Administrator", "SYSTEM", "root"][rng.gen_range(0..4)].to_string()]
                    .into()
            } else {
                Default::default()
            },
            effective_permissions: Default::default(),
            impact_types: Default::default(),
            data_component_refs: Default::default(),
            revoked_or_deprecated: false,
        })
        .collect();
    // 157 forward technique -> CAPEC references.
    for _ in 0..157 {
        let t = rng.gen_range(0..techniques.len());
        let c = capec_ids[rng.gen_range(0..capec_ids.len())].clone();
        techniques[t].capec_refs.insert(c);
    }

    let mut capecs: Vec<CapecPattern> = capec_ids
        .iter()
        .map(|id| CapecPattern {
            id: id.clone(),
            name: format!("Pattern {}", id.local()),
            abstraction: "Standard".into(),
            status: "Stable".into(),
            related_weaknesses: Default::default(),
            attack_taxonomy_refs: Default::default(),
        })
        .collect();
    // 148 backward mappings and 1145 CAPEC -> CWE references.
    for _ in 0..148 {
        let c = rng.gen_range(0..capecs.len());
        let t = technique_ids[rng.gen_range(0..technique_ids.len())].clone();
        capecs[c].attack_taxonomy_refs.insert(t);
    }
    for _ in 0..1145 {
        let c = rng.gen_range(0..capecs.len());
        let w = cwe_ids[rng.gen_range(0..cwe_ids.len())].clone();
        capecs[c].related_weaknesses.insert(w);
    }

    let mut cwes: Vec<CweWeakness> = cwe_ids
        .iter()
        .map(|id| CweWeakness {
            id: id.clone(),
            name: format!("Weakness {}", id.local()),
            abstraction: "Base".into(),
            status: "Draft".into(),
            related_capecs: Default::default(),
            observed_cves: Default::default(),
        })
        .collect();
    for _ in 0..1153 {
        let w = rng.gen_range(0..cwes.len());
        let c = capec_ids[rng.gen_range(0..capec_ids.len())].clone();
        cwes[w].related_capecs.insert(c);
    }
    for _ in 0..2389 {
        let w = rng.gen_range(0..cwes.len());
        let v = cve_ids[rng.gen_range(0..cve_ids.len())].clone();
        cwes[w].observed_cves.insert(v);
    }

    let data_components: Vec<DataComponent> = (1..=109)
        .map(|i| {
            let detected: BTreeSet<NodeId> = (0..rng.gen_range(5..=40))
                .map(|_| technique_ids[rng.gen_range(0..technique_ids.len())].clone())
                .collect();
            DataComponent {
                id: NodeId::data_component(format!("Component{i}")).unwrap(),
                stix_id: format!("x-mitre-data-component--{i}"),
                source_name: format!("Source{}", i % 30),
                component_name: format!("Component {i}"),
                detected_technique_refs: detected,
            }
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

#[test]
fn catalog_scale_pipeline_stays_fast() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let inputs = synthetic_inputs(&mut rng);

    let started = Instant::now();
    let mut graph = build_graph(inputs).unwrap();
    graph.symmetrize_inverses();
    graph.apply_chain_closure();

    let json = snapshot::to_canonical_json(&graph);
    let reloaded = snapshot::from_json(&json).unwrap();
    let stats = query::stats(&reloaded);
    let histogram = query::histogram(&reloaded, query::HistogramAxis::Restriction);
    let mut lookups = 0;
    let cves: Vec<NodeId> = reloaded.nodes_in(Namespace::Cve).cloned().collect();
    for id in cves.iter().take(200) {
        let _ = query::techniques_for(&reloaded, id).unwrap();
        lookups += 1;
    }
    let elapsed = started.elapsed();

    assert_eq!(stats.node_counts[&Namespace::Attck], 700);
    assert_eq!(stats.node_counts[&Namespace::Cwe], 945);
    assert!(stats.pair_counts[&RelationName::RefToEnum] > 700);
    assert!(!histogram.is_empty());
    assert!(lookups > 0);
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "catalog-scale pipeline took {elapsed:?}"
    );
}
