//! ATT&CK Enterprise STIX bundle parsing.
//!
//! The bundle is a JSON document with an `objects` array mixing
//! `attack-pattern`, `x-mitre-tactic`, `x-mitre-data-source`,
//! `x-mitre-data-component`, and `relationship` objects. Techniques are
//! identified by the external reference whose `source_name` is
//! `mitre-attack`; CAPEC links come from external references with
//! `source_name` `capec`; data components are joined to the techniques they
//! detect through `relationship` objects of type `detects`.

use serde_json::Value;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ident::{is_technique_local, NodeId};
use crate::report::{ParseReport, WarningKind};

use super::{DataComponent, ParseOptions, Tactic, Technique};

#[derive(Clone, Debug)]
pub struct AttackBundle {
    pub techniques: Vec<Technique>,
    pub tactics: Vec<Tactic>,
    pub data_components: Vec<DataComponent>,
    /// Declared bundle version (`x_mitre_version` of the collection object).
    pub version: Option<String>,
    pub report: ParseReport,
}

pub fn parse_attack_bundle(input: &str, opts: &ParseOptions) -> Result<AttackBundle> {
    let doc: Value = serde_json::from_str(input).map_err(|e| Error::from_json(input, &e))?;
    let objects = doc
        .get("objects")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidDocument("STIX bundle has no `objects` array".into()))?;

    let mut report = ParseReport::default();
    let mut version = None;

    // Tactics first: techniques reference them by kill-chain phase shortname.
    let mut tactics = Vec::new();
    let mut tactic_by_shortname: BTreeMap<String, NodeId> = BTreeMap::new();
    // Data sources give components their parent name.
    let mut data_source_names: BTreeMap<String, String> = BTreeMap::new();

    for obj in objects {
        match obj_type(obj) {
            "x-mitre-collection" => {
                if version.is_none() {
                    version = str_field(obj, "x_mitre_version").map(str::to_string);
                }
            }
            "x-mitre-tactic" => {
                if is_revoked(obj) && !opts.include_deprecated {
                    report.excluded_deprecated += 1;
                    continue;
                }
                let stix_id = str_field(obj, "id").unwrap_or_default().to_string();
                let Some(external_id) = mitre_external_id(obj) else {
                    report.warn(
                        WarningKind::MissingAttackId,
                        format!("tactic {stix_id} has no mitre-attack external id"),
                    );
                    continue;
                };
                let Ok(id) = NodeId::tactic(external_id) else {
                    report.warn(
                        WarningKind::InvalidAttackId,
                        format!("tactic {stix_id} external id is not a tactic id"),
                    );
                    continue;
                };
                let shortname = str_field(obj, "x_mitre_shortname")
                    .unwrap_or_default()
                    .to_string();
                if !shortname.is_empty() {
                    tactic_by_shortname.insert(shortname.clone(), id.clone());
                }
                tactics.push(Tactic {
                    id,
                    stix_id,
                    name: str_field(obj, "name").unwrap_or_default().to_string(),
                    shortname,
                });
            }
            "x-mitre-data-source" => {
                if let (Some(stix_id), Some(name)) = (str_field(obj, "id"), str_field(obj, "name"))
                {
                    data_source_names.insert(stix_id.to_string(), name.to_string());
                }
            }
            _ => {}
        }
    }

    let mut techniques = Vec::new();
    let mut technique_by_stix: BTreeMap<String, NodeId> = BTreeMap::new();
    for obj in objects {
        if obj_type(obj) != "attack-pattern" {
            continue;
        }
        let stix_id = str_field(obj, "id").unwrap_or_default().to_string();
        let revoked = is_revoked(obj);
        if revoked && !opts.include_deprecated {
            report.excluded_deprecated += 1;
            continue;
        }
        let Some(external_id) = mitre_external_id(obj) else {
            report.warn(
                WarningKind::MissingAttackId,
                format!("attack-pattern {stix_id} has no mitre-attack external id"),
            );
            continue;
        };
        if !is_technique_local(external_id) {
            report.warn(
                WarningKind::InvalidAttackId,
                format!(
                    "attack-pattern {stix_id} external id `{external_id}` is not a technique id"
                ),
            );
            continue;
        }
        let id = NodeId::technique(external_id)?;

        let mut technique = Technique {
            id: id.clone(),
            stix_id: stix_id.clone(),
            name: str_field(obj, "name").unwrap_or_default().to_string(),
            tactic_refs: Default::default(),
            capec_refs: Default::default(),
            platforms: string_set(obj, "x_mitre_platforms"),
            permissions_required: string_set(obj, "x_mitre_permissions_required"),
            effective_permissions: string_set(obj, "x_mitre_effective_permissions"),
            impact_types: string_set(obj, "x_mitre_impact_type"),
            data_component_refs: Default::default(),
            revoked_or_deprecated: revoked,
        };

        for reference in array_field(obj, "external_references") {
            if str_field(reference, "source_name") != Some("capec") {
                continue;
            }
            let raw = str_field(reference, "external_id").unwrap_or_default();
            match NodeId::capec(raw) {
                Ok(capec) => {
                    technique.capec_refs.insert(capec);
                }
                Err(_) => report.warn(
                    WarningKind::InvalidCapecRef,
                    format!("{id}: capec reference `{raw}` is malformed"),
                ),
            }
        }

        for phase in array_field(obj, "kill_chain_phases") {
            if str_field(phase, "kill_chain_name") != Some("mitre-attack") {
                continue;
            }
            let name = str_field(phase, "phase_name").unwrap_or_default();
            match tactic_by_shortname.get(name) {
                Some(tactic) => {
                    technique.tactic_refs.insert(tactic.clone());
                }
                None => report.warn(
                    WarningKind::UnknownTactic,
                    format!("{id}: kill-chain phase `{name}` matches no tactic"),
                ),
            }
        }

        technique_by_stix.insert(stix_id, id);
        techniques.push(technique);
    }

    let mut data_components = Vec::new();
    let mut component_by_stix: BTreeMap<String, usize> = BTreeMap::new();
    for obj in objects {
        if obj_type(obj) != "x-mitre-data-component" {
            continue;
        }
        if is_revoked(obj) && !opts.include_deprecated {
            report.excluded_deprecated += 1;
            continue;
        }
        let stix_id = str_field(obj, "id").unwrap_or_default().to_string();
        let component_name = str_field(obj, "name").unwrap_or_default().to_string();
        let local = match crate::ident::canonicalize_name(
            &component_name,
            crate::ident::NameStyle::Concatenated,
        ) {
            Ok(local) => local,
            Err(_) => {
                report.warn(
                    WarningKind::MissingEntryId,
                    format!("data component {stix_id} has no usable name"),
                );
                continue;
            }
        };
        let source_name = match str_field(obj, "x_mitre_data_source_ref")
            .and_then(|r| data_source_names.get(r))
        {
            Some(name) => name.clone(),
            None => {
                report.warn(
                    WarningKind::MissingDataSource,
                    format!("data component {stix_id} has no resolvable data source"),
                );
                String::new()
            }
        };
        component_by_stix.insert(stix_id.clone(), data_components.len());
        data_components.push(DataComponent {
            id: NodeId::data_component(local)?,
            stix_id,
            source_name,
            component_name,
            detected_technique_refs: Default::default(),
        });
    }

    for obj in objects {
        if obj_type(obj) != "relationship" || str_field(obj, "relationship_type") != Some("detects")
        {
            continue;
        }
        if is_revoked(obj) && !opts.include_deprecated {
            report.excluded_deprecated += 1;
            continue;
        }
        let source = str_field(obj, "source_ref").unwrap_or_default();
        let target = str_field(obj, "target_ref").unwrap_or_default();
        match (component_by_stix.get(source), technique_by_stix.get(target)) {
            (Some(&idx), Some(technique)) => {
                data_components[idx]
                    .detected_technique_refs
                    .insert(technique.clone());
            }
            _ => report.warn(
                WarningKind::UnknownDetectsEndpoint,
                format!("detects relationship {source} -> {target} references unknown objects"),
            ),
        }
    }

    // Mirror the detects join onto the technique side.
    let mut detected: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for component in &data_components {
        for technique in &component.detected_technique_refs {
            detected
                .entry(technique.clone())
                .or_default()
                .push(component.id.clone());
        }
    }
    for technique in &mut techniques {
        if let Some(components) = detected.remove(&technique.id) {
            technique.data_component_refs.extend(components);
        }
    }

    Ok(AttackBundle {
        techniques,
        tactics,
        data_components,
        version,
        report,
    })
}

fn obj_type(obj: &Value) -> &str {
    str_field(obj, "type").unwrap_or_default()
}

fn str_field<'a>(obj: &'a Value, key: &str) -> Option<&'a str> {
    obj.get(key).and_then(Value::as_str)
}

fn array_field<'a>(obj: &'a Value, key: &str) -> impl Iterator<Item = &'a Value> {
    obj.get(key)
        .and_then(Value::as_array)
        .map(|a| a.iter())
        .unwrap_or_default()
}

fn string_set(obj: &Value, key: &str) -> std::collections::BTreeSet<String> {
    array_field(obj, key)
        .filter_map(Value::as_str)
        .map(str::to_string)
        .collect()
}

fn is_revoked(obj: &Value) -> bool {
    let flag = |key| obj.get(key).and_then(Value::as_bool).unwrap_or(false);
    flag("revoked") || flag("x_mitre_deprecated")
}

/// External id of the reference whose source_name is `mitre-attack`.
fn mitre_external_id(obj: &Value) -> Option<&str> {
    array_field(obj, "external_references")
        .find(|r| str_field(r, "source_name") == Some("mitre-attack"))
        .and_then(|r| str_field(r, "external_id"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_bundle_yields_empty_sets() {
        let bundle =
            parse_attack_bundle(r#"{"type":"bundle","objects":[]}"#, &Default::default()).unwrap();
        assert!(bundle.techniques.is_empty());
        assert!(bundle.tactics.is_empty());
        assert!(bundle.data_components.is_empty());
        assert_eq!(bundle.report.excluded_deprecated, 0);
    }

    #[test]
    fn missing_objects_array_is_fatal() {
        let err = parse_attack_bundle(r#"{"type":"bundle"}"#, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidDocument(_)));
    }

    #[test]
    fn malformed_json_reports_offset() {
        let err = parse_attack_bundle("{\"objects\": [", &Default::default()).unwrap_err();
        assert!(matches!(err, Error::Json { .. }));
    }

    #[test]
    fn capec_refs_come_from_external_references() {
        let input = r#"{"objects":[
            {"type":"attack-pattern","id":"attack-pattern--a","name":"One",
             "external_references":[
                {"source_name":"mitre-attack","external_id":"T0001"},
                {"source_name":"capec","external_id":"CAPEC-242"}]},
            {"type":"attack-pattern","id":"attack-pattern--b","name":"Two",
             "external_references":[{"source_name":"mitre-attack","external_id":"T0002"}]}
        ]}"#;
        let bundle = parse_attack_bundle(input, &Default::default()).unwrap();
        assert_eq!(bundle.techniques.len(), 2);
        let one = &bundle.techniques[0];
        assert_eq!(one.capec_refs.len(), 1);
        assert!(one
            .capec_refs
            .contains(&NodeId::capec("CAPEC-242").unwrap()));
        assert!(bundle.techniques[1].capec_refs.is_empty());
    }

    #[test]
    fn revoked_patterns_are_excluded_and_counted() {
        let input = r#"{"objects":[
            {"type":"attack-pattern","id":"attack-pattern--a","name":"Gone","revoked":true,
             "external_references":[{"source_name":"mitre-attack","external_id":"T0001"}]}
        ]}"#;
        let bundle = parse_attack_bundle(input, &Default::default()).unwrap();
        assert!(bundle.techniques.is_empty());
        assert_eq!(bundle.report.excluded_deprecated, 1);

        let kept = parse_attack_bundle(
            input,
            &ParseOptions {
                include_deprecated: true,
            },
        )
        .unwrap();
        assert_eq!(kept.techniques.len(), 1);
        assert!(kept.techniques[0].revoked_or_deprecated);
    }

    #[test]
    fn detects_relationship_with_unknown_endpoint_warns() {
        let input = r#"{"objects":[
            {"type":"x-mitre-data-source","id":"x-mitre-data-source--s","name":"Process"},
            {"type":"x-mitre-data-component","id":"x-mitre-data-component--c","name":"Process Creation",
             "x_mitre_data_source_ref":"x-mitre-data-source--s"},
            {"type":"relationship","relationship_type":"detects",
             "source_ref":"x-mitre-data-component--c","target_ref":"attack-pattern--missing"}
        ]}"#;
        let bundle = parse_attack_bundle(input, &Default::default()).unwrap();
        assert_eq!(bundle.data_components.len(), 1);
        assert!(bundle.data_components[0].detected_technique_refs.is_empty());
        assert!(bundle
            .report
            .warnings
            .iter()
            .any(|w| w.kind == WarningKind::UnknownDetectsEndpoint));
    }
}
