//! Threat Dragon diagram processing: parse a v1 JSON document, extract
//! `class#` / `restriction#` / `enum#` labels from element descriptions,
//! resolve each element's attack techniques against a closed graph, and write
//! threat annotations back into the document.
//!
//! Resolution semantics: data-component and enum labels each contribute their
//! threat sets to a candidate union; restriction labels intersect it. An
//! element labeled only with restrictions starts from the full threat set.
//! Flows inherit the restriction labels of their target element as additional
//! filters.

use serde::Serialize;
use serde_json::Value;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ident::{is_cve_local, is_tactic_local, is_technique_local, Namespace, NodeId};
use crate::kgraph::{KnowledgeGraph, NodePayload, RelationName};
use crate::report::{ParseWarning, WarningKind};

/// Marker appended to every tool-generated threat description. Re-runs
/// replace only entries carrying it, so human-authored threats survive.
pub const TOOL_MARKER: &str = "[threatgraph:auto]";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LabelKind {
    DataComponent,
    Restriction,
    Enum,
}

/// A parsed `class#` / `restriction#` / `enum#` token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Label {
    pub kind: LabelKind,
    /// The token as written, sigil included.
    pub raw: String,
    /// Normalized graph id the label points at (which may not exist).
    pub target: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ElementKind {
    Process,
    Store,
    Actor,
    Flow,
    /// Cell type the modeler does not know; kept but never resolved.
    Unknown,
}

impl ElementKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ElementKind::Process => "Process",
            ElementKind::Store => "Store",
            ElementKind::Actor => "Actor",
            ElementKind::Flow => "Flow",
            ElementKind::Unknown => "Unknown",
        }
    }

    fn resolvable(&self) -> bool {
        !matches!(self, ElementKind::Unknown)
    }
}

/// One non-boundary diagram cell.
#[derive(Clone, Debug)]
pub struct DiagramElement {
    pub element_id: String,
    pub element_kind: ElementKind,
    pub name: String,
    pub description: String,
    pub labels: Vec<Label>,
    pub source_ref: Option<String>,
    pub target_ref: Option<String>,
}

/// A parsed Threat Dragon document. The original JSON is retained verbatim so
/// annotation can round-trip everything the modeler does not touch.
#[derive(Clone, Debug)]
pub struct Diagram {
    raw: Value,
    pub elements: Vec<DiagramElement>,
    pub warnings: Vec<ParseWarning>,
}

impl Diagram {
    pub fn raw(&self) -> &Value {
        &self.raw
    }

    pub fn element(&self, id: &str) -> Option<&DiagramElement> {
        self.elements.iter().find(|e| e.element_id == id)
    }
}

/// Scans whitespace-separated tokens for labels.
///
/// `restriction#` identifiers are accepted with or without the
/// `HasRestriction_` prefix; `class#` identifiers accept the bare component
/// name, the `HasDataComponent_` prefix form, and the `_DataComponent` suffix
/// form. Tokens that do not match the label grammar are ignored; a label
/// sigil with an empty or untypeable identifier is an error.
pub fn extract_labels(text: &str) -> Result<Vec<Label>> {
    let mut labels = Vec::new();
    for (offset, token) in tokens_with_offsets(text) {
        let Some((sigil, rest)) = token.split_once('#') else {
            continue;
        };
        let kind = match sigil {
            "class" => LabelKind::DataComponent,
            "restriction" => LabelKind::Restriction,
            "enum" => LabelKind::Enum,
            _ => continue,
        };
        if rest.is_empty() {
            return Err(Error::MalformedLabel {
                token: token.to_string(),
                offset,
                reason: "empty identifier after the sigil".to_string(),
            });
        }
        if !rest
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
        {
            // Not a token of the label grammar (prose punctuation, etc.).
            continue;
        }
        let target = match kind {
            LabelKind::DataComponent => {
                let stripped = rest.strip_prefix("HasDataComponent_").unwrap_or(rest);
                let local = stripped.strip_suffix("_DataComponent").unwrap_or(stripped);
                if local.is_empty() {
                    return Err(Error::MalformedLabel {
                        token: token.to_string(),
                        offset,
                        reason: "empty identifier after normalization".to_string(),
                    });
                }
                NodeId::data_component(local)
            }
            LabelKind::Restriction => {
                let local = rest.strip_prefix("HasRestriction_").unwrap_or(rest);
                if local.is_empty() {
                    return Err(Error::MalformedLabel {
                        token: token.to_string(),
                        offset,
                        reason: "empty identifier after normalization".to_string(),
                    });
                }
                NodeId::restriction(local)
            }
            LabelKind::Enum => match enum_target(rest) {
                Some(id) => Ok(id),
                None => {
                    return Err(Error::MalformedLabel {
                        token: token.to_string(),
                        offset,
                        reason: "identifier matches no enumeration id shape".to_string(),
                    })
                }
            },
        };
        let target = target.map_err(|_| Error::MalformedLabel {
            token: token.to_string(),
            offset,
            reason: "identifier is not a valid node id".to_string(),
        })?;
        labels.push(Label {
            kind,
            raw: token.to_string(),
            target,
        });
    }
    Ok(labels)
}

fn enum_target(rest: &str) -> Option<NodeId> {
    // Tactic ids share the T prefix, so test them first.
    if is_tactic_local(rest) {
        return None;
    }
    let namespace = if is_technique_local(rest) {
        Namespace::Attck
    } else if has_numeric_suffix(rest, "CAPEC-") {
        Namespace::Capec
    } else if has_numeric_suffix(rest, "CWE-") {
        Namespace::Cwe
    } else if is_cve_local(rest) {
        Namespace::Cve
    } else {
        return None;
    };
    NodeId::new(namespace, rest).ok()
}

fn has_numeric_suffix(s: &str, prefix: &str) -> bool {
    s.strip_prefix(prefix)
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

fn tokens_with_offsets(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut indices = text.char_indices().peekable();
    std::iter::from_fn(move || {
        while let Some(&(_, ch)) = indices.peek() {
            if ch.is_whitespace() {
                indices.next();
            } else {
                break;
            }
        }
        let (start, _) = *indices.peek()?;
        let mut end = text.len();
        while let Some(&(i, ch)) = indices.peek() {
            if ch.is_whitespace() {
                end = i;
                break;
            }
            indices.next();
        }
        Some((start, &text[start..end]))
    })
}

/// Parses a Threat Dragon v1 document (`detail.diagrams[*].diagramJson.cells`).
///
/// Boundary cells are not elements; unknown cell types are kept, warned
/// about, and excluded from resolution.
pub fn parse_diagram(text: &str) -> Result<Diagram> {
    let raw: Value = serde_json::from_str(text).map_err(|e| Error::from_json(text, &e))?;
    let diagrams = raw
        .get("detail")
        .and_then(|d| d.get("diagrams"))
        .and_then(Value::as_array)
        .ok_or_else(|| {
            Error::InvalidDocument(
                "not a Threat Dragon v1 document: missing detail.diagrams".into(),
            )
        })?;

    let mut elements = Vec::new();
    let mut warnings = Vec::new();
    for diagram in diagrams {
        let cells = diagram
            .get("diagramJson")
            .and_then(|j| j.get("cells"))
            .and_then(Value::as_array);
        for cell in cells.into_iter().flatten() {
            let cell_type = cell.get("type").and_then(Value::as_str).unwrap_or_default();
            if cell_type == "tm.Boundary" {
                continue;
            }
            let kind = match cell_type {
                "tm.Process" => ElementKind::Process,
                "tm.Store" => ElementKind::Store,
                "tm.Actor" => ElementKind::Actor,
                "tm.Flow" => ElementKind::Flow,
                other => {
                    warnings.push(ParseWarning {
                        kind: WarningKind::UnknownCellType,
                        detail: format!("cell type `{other}` is not recognized"),
                    });
                    ElementKind::Unknown
                }
            };
            let Some(element_id) = cell.get("id").and_then(Value::as_str) else {
                warnings.push(ParseWarning {
                    kind: WarningKind::UnknownCellType,
                    detail: format!("{cell_type} cell without an id"),
                });
                continue;
            };
            let description = cell
                .get("description")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            let labels = extract_labels(&description).map_err(|e| match e {
                Error::MalformedLabel {
                    token,
                    offset,
                    reason,
                } => Error::MalformedLabel {
                    token,
                    offset,
                    reason: format!("{reason} (element {element_id})"),
                },
                other => other,
            })?;

            let endpoint = |key: &str| {
                cell.get(key)
                    .and_then(|v| v.get("id"))
                    .and_then(Value::as_str)
                    .map(str::to_string)
            };
            let (source_ref, target_ref) = if kind == ElementKind::Flow {
                let (source, target) = (endpoint("source"), endpoint("target"));
                if source.is_none() || target.is_none() {
                    warnings.push(ParseWarning {
                        kind: WarningKind::MissingFlowEndpoint,
                        detail: format!("flow {element_id} is missing a source or target"),
                    });
                }
                (source, target)
            } else {
                (None, None)
            };

            elements.push(DiagramElement {
                element_id: element_id.to_string(),
                element_kind: kind,
                name: cell_name(cell),
                description,
                labels,
                source_ref,
                target_ref,
            });
        }
    }

    Ok(Diagram {
        raw,
        elements,
        warnings,
    })
}

fn cell_name(cell: &Value) -> String {
    let from_attrs = cell
        .get("attrs")
        .and_then(|a| a.get("text"))
        .and_then(|t| t.get("text"))
        .and_then(Value::as_str);
    let from_labels = cell
        .get("labels")
        .and_then(Value::as_array)
        .and_then(|labels| labels.first())
        .and_then(|l| l.get("attrs"))
        .and_then(|a| a.get("text"))
        .and_then(|t| t.get("text"))
        .and_then(Value::as_str);
    from_attrs.or(from_labels).unwrap_or_default().to_string()
}

/// Resolves one element against the graph.
///
/// Labels whose target is absent from the graph are excluded. Returns the set
/// of THREAT node ids selected by the element's labels plus
/// `inherited_restrictions` (for flows: the restriction labels of the flow's
/// target element).
pub fn resolve_threats(
    graph: &KnowledgeGraph,
    element: &DiagramElement,
    inherited_restrictions: &BTreeSet<NodeId>,
) -> BTreeSet<NodeId> {
    let resolved = |kind: LabelKind| {
        element
            .labels
            .iter()
            .filter(move |l| l.kind == kind && graph.contains_node(&l.target))
            .map(|l| l.target.clone())
    };
    let data_components: BTreeSet<NodeId> = resolved(LabelKind::DataComponent).collect();
    let enums: BTreeSet<NodeId> = resolved(LabelKind::Enum).collect();
    let mut restrictions: BTreeSet<NodeId> = resolved(LabelKind::Restriction).collect();
    restrictions.extend(
        inherited_restrictions
            .iter()
            .filter(|r| graph.contains_node(r))
            .cloned(),
    );

    let mut candidates: BTreeSet<NodeId> = BTreeSet::new();
    if data_components.is_empty() && enums.is_empty() {
        if restrictions.is_empty() {
            return BTreeSet::new();
        }
        candidates.extend(graph.nodes_in(Namespace::Threat).cloned());
    } else {
        for component in &data_components {
            candidates.extend(
                graph
                    .relation(RelationName::HasDataComponent)
                    .sources_of(component)
                    .cloned(),
            );
        }
        for target in &enums {
            candidates.extend(
                graph
                    .relation(RelationName::RefToEnum)
                    .sources_of(target)
                    .cloned(),
            );
        }
    }

    for restriction in &restrictions {
        let allowed: BTreeSet<NodeId> = graph
            .relation(RelationName::HasRestriction)
            .sources_of(restriction)
            .cloned()
            .collect();
        candidates.retain(|threat| allowed.contains(threat));
    }
    candidates
}

/// Resolution outcome for one element, with enough provenance to annotate.
#[derive(Clone, Debug)]
pub struct ElementResolution {
    pub element_id: String,
    /// Selected THREAT ids.
    pub threats: BTreeSet<NodeId>,
    /// Raw label text per selected threat (the labels that selected it).
    pub selecting_labels: BTreeMap<NodeId, Vec<String>>,
    /// Restriction labels applied as filters, inherited ones marked.
    pub restrictions_applied: Vec<String>,
    /// Labels naming ids absent from the graph (kept for reporting).
    pub unresolved: Vec<Label>,
    /// True when the element kind is excluded from resolution.
    pub skipped: bool,
}

/// Resolves every element of the diagram. Flows inherit the restriction
/// labels of their target element.
pub fn resolve_diagram(
    graph: &KnowledgeGraph,
    diagram: &Diagram,
) -> Result<Vec<ElementResolution>> {
    if !graph.metadata.closure_applied {
        return Err(Error::ClosureNotApplied);
    }
    let by_id: BTreeMap<&str, &DiagramElement> = diagram
        .elements
        .iter()
        .map(|e| (e.element_id.as_str(), e))
        .collect();

    let mut resolutions = Vec::with_capacity(diagram.elements.len());
    for element in &diagram.elements {
        let unresolved: Vec<Label> = element
            .labels
            .iter()
            .filter(|l| !graph.contains_node(&l.target))
            .cloned()
            .collect();
        if !element.element_kind.resolvable() {
            resolutions.push(ElementResolution {
                element_id: element.element_id.clone(),
                threats: BTreeSet::new(),
                selecting_labels: BTreeMap::new(),
                restrictions_applied: Vec::new(),
                unresolved,
                skipped: true,
            });
            continue;
        }

        let mut inherited: BTreeSet<NodeId> = BTreeSet::new();
        let mut inherited_raws: BTreeMap<NodeId, String> = BTreeMap::new();
        let mut restrictions_applied: Vec<String> = element
            .labels
            .iter()
            .filter(|l| l.kind == LabelKind::Restriction && graph.contains_node(&l.target))
            .map(|l| l.raw.clone())
            .collect();
        if element.element_kind == ElementKind::Flow {
            if let Some(target) = element.target_ref.as_deref().and_then(|id| by_id.get(id)) {
                for label in &target.labels {
                    if label.kind == LabelKind::Restriction
                        && graph.contains_node(&label.target)
                        && inherited.insert(label.target.clone())
                    {
                        inherited_raws.insert(label.target.clone(), label.raw.clone());
                        restrictions_applied.push(format!("{} (inherited)", label.raw));
                    }
                }
            }
        }

        let threats = resolve_threats(graph, element, &inherited);

        // Provenance: which of the element's own labels selected each threat.
        let mut selecting_labels: BTreeMap<NodeId, Vec<String>> = BTreeMap::new();
        for threat in &threats {
            let mut raws = Vec::new();
            for label in &element.labels {
                if !graph.contains_node(&label.target) {
                    continue;
                }
                let selects = match label.kind {
                    LabelKind::DataComponent => graph
                        .relation(RelationName::HasDataComponent)
                        .contains(threat, &label.target),
                    LabelKind::Enum => graph
                        .relation(RelationName::RefToEnum)
                        .contains(threat, &label.target),
                    LabelKind::Restriction => graph
                        .relation(RelationName::HasRestriction)
                        .contains(threat, &label.target),
                };
                if selects {
                    raws.push(label.raw.clone());
                }
            }
            for restriction in &inherited {
                if graph
                    .relation(RelationName::HasRestriction)
                    .contains(threat, restriction)
                {
                    raws.push(format!("{} (inherited)", inherited_raws[restriction]));
                }
            }
            selecting_labels.insert(threat.clone(), raws);
        }

        resolutions.push(ElementResolution {
            element_id: element.element_id.clone(),
            threats,
            selecting_labels,
            restrictions_applied,
            unresolved,
            skipped: false,
        });
    }
    Ok(resolutions)
}

/// Editor-facing defaults for generated annotations.
#[derive(Clone, Debug)]
pub struct AnnotationOptions {
    pub severity: String,
    pub status: String,
}

impl Default for AnnotationOptions {
    fn default() -> Self {
        AnnotationOptions {
            severity: "Medium".to_string(),
            status: "Open".to_string(),
        }
    }
}

/// A threat entry in the shape Threat Dragon v1 expects.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThreatAnnotation {
    pub status: String,
    pub severity: String,
    pub title: String,
    #[serde(rename = "type")]
    pub threat_type: String,
    pub description: String,
    pub mitigation: String,
    pub technique_id: NodeId,
}

fn build_annotation(
    graph: &KnowledgeGraph,
    threat: &NodeId,
    selecting: &[String],
    opts: &AnnotationOptions,
) -> Option<ThreatAnnotation> {
    let NodePayload::Threat(stub) = graph.node(threat)? else {
        return None;
    };
    let technique = match graph.node(&stub.technique)? {
        NodePayload::Technique(t) => t,
        _ => return None,
    };
    let threat_type = technique
        .tactic_refs
        .iter()
        .next()
        .and_then(|tactic| graph.node(tactic))
        .and_then(NodePayload::name)
        .unwrap_or("Attack technique")
        .to_string();
    let provenance = if selecting.is_empty() {
        "Resolved with no selecting labels".to_string()
    } else {
        format!("Resolved from labels: {}", selecting.join(" "))
    };
    Some(ThreatAnnotation {
        status: opts.status.clone(),
        severity: opts.severity.clone(),
        title: format!("{} {}", technique.id.local(), technique.name),
        threat_type,
        description: format!("{provenance}. {TOOL_MARKER}"),
        mitigation: String::new(),
        technique_id: technique.id.clone(),
    })
}

fn is_tool_generated(entry: &Value) -> bool {
    entry
        .get("description")
        .and_then(Value::as_str)
        .is_some_and(|d| d.contains(TOOL_MARKER))
}

/// Writes resolutions back into a copy of the original document.
///
/// For each resolved element the `threats` array keeps human-authored entries
/// (in their original order) and replaces tool-generated entries with fresh
/// annotations sorted by technique id. Cells that end with no threats and had
/// no `threats` key stay untouched.
pub fn annotate_diagram(
    graph: &KnowledgeGraph,
    diagram: &Diagram,
    resolutions: &[ElementResolution],
    opts: &AnnotationOptions,
) -> Result<Value> {
    let by_id: BTreeMap<&str, &ElementResolution> = resolutions
        .iter()
        .filter(|r| !r.skipped)
        .map(|r| (r.element_id.as_str(), r))
        .collect();

    let mut out = diagram.raw.clone();
    let Some(diagrams) = out
        .get_mut("detail")
        .and_then(|d| d.get_mut("diagrams"))
        .and_then(Value::as_array_mut)
    else {
        return Err(Error::InvalidDocument(
            "not a Threat Dragon v1 document: missing detail.diagrams".into(),
        ));
    };

    for diagram_value in diagrams.iter_mut() {
        let Some(cells) = diagram_value
            .get_mut("diagramJson")
            .and_then(|j| j.get_mut("cells"))
            .and_then(Value::as_array_mut)
        else {
            continue;
        };
        for cell in cells.iter_mut() {
            let Some(resolution) = cell
                .get("id")
                .and_then(Value::as_str)
                .and_then(|id| by_id.get(id))
            else {
                continue;
            };

            let mut kept: Vec<Value> = cell
                .get("threats")
                .and_then(Value::as_array)
                .map(|threats| {
                    threats
                        .iter()
                        .filter(|t| !is_tool_generated(t))
                        .cloned()
                        .collect()
                })
                .unwrap_or_default();

            let mut generated: Vec<ThreatAnnotation> = resolution
                .threats
                .iter()
                .filter_map(|threat| {
                    let empty = Vec::new();
                    let selecting = resolution.selecting_labels.get(threat).unwrap_or(&empty);
                    build_annotation(graph, threat, selecting, opts)
                })
                .collect();
            generated.sort_by(|a, b| a.technique_id.cmp(&b.technique_id));
            kept.extend(
                generated
                    .into_iter()
                    .map(|a| serde_json::to_value(a).expect("annotation serialization")),
            );

            if kept.is_empty() && cell.get("threats").is_none() {
                continue;
            }
            cell.as_object_mut()
                .expect("cells are objects")
                .insert("threats".to_string(), Value::Array(kept));
        }
    }
    Ok(out)
}

/// Full per-element summary, the case-study-style table.
#[derive(Clone, Debug, Serialize)]
pub struct ElementReport {
    pub element_id: String,
    pub name: String,
    pub kind: &'static str,
    pub labels: Vec<String>,
    pub unresolved_labels: Vec<String>,
    pub restrictions_applied: Vec<String>,
    pub threat_count: usize,
    pub techniques: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelReport {
    pub elements: Vec<ElementReport>,
    pub warnings: Vec<ParseWarning>,
}

/// Parse → resolve → annotate, producing the annotated document and a report.
pub fn model_diagram(
    graph: &KnowledgeGraph,
    diagram: &Diagram,
    opts: &AnnotationOptions,
) -> Result<(Value, ModelReport)> {
    let resolutions = resolve_diagram(graph, diagram)?;
    let annotated = annotate_diagram(graph, diagram, &resolutions, opts)?;

    let mut warnings = diagram.warnings.clone();
    let mut elements = Vec::with_capacity(diagram.elements.len());
    for (element, resolution) in diagram.elements.iter().zip(&resolutions) {
        for label in &resolution.unresolved {
            warnings.push(ParseWarning {
                kind: WarningKind::UnresolvedLabel,
                detail: format!(
                    "element {} ({}): label `{}` names no graph node",
                    element.element_id, element.name, label.raw
                ),
            });
        }
        let techniques = resolution
            .threats
            .iter()
            .filter_map(|threat| graph.technique_of_threat(threat))
            .map(|t| t.local().to_string())
            .collect();
        elements.push(ElementReport {
            element_id: element.element_id.clone(),
            name: element.name.clone(),
            kind: element.element_kind.as_str(),
            labels: element.labels.iter().map(|l| l.raw.clone()).collect(),
            unresolved_labels: resolution
                .unresolved
                .iter()
                .map(|l| l.raw.clone())
                .collect(),
            restrictions_applied: resolution.restrictions_applied.clone(),
            threat_count: resolution.threats.len(),
            techniques,
        });
    }
    Ok((annotated, ModelReport { elements, warnings }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_text_has_no_labels() {
        assert!(extract_labels("hello world").unwrap().is_empty());
        assert!(extract_labels("").unwrap().is_empty());
    }

    #[test]
    fn enum_label_resolves_to_cwe() {
        let labels = extract_labels("enum#CWE-284").unwrap();
        assert_eq!(labels.len(), 1);
        assert_eq!(labels[0].kind, LabelKind::Enum);
        assert_eq!(labels[0].target, NodeId::cwe("CWE-284").unwrap());
        assert_eq!(labels[0].raw, "enum#CWE-284");
    }

    #[test]
    fn mixed_labels_extract_in_order() {
        let labels = extract_labels(
            "class#ProcessCreation_DataComponent restriction#HasRestriction_Platform_SaaS",
        )
        .unwrap();
        assert_eq!(labels.len(), 2);
        assert_eq!(
            labels[0].target,
            NodeId::data_component("ProcessCreation").unwrap()
        );
        assert_eq!(
            labels[1].target,
            NodeId::restriction("Platform_SaaS").unwrap()
        );
    }

    #[test]
    fn class_label_accepts_all_three_spellings() {
        for text in [
            "class#ProcessCreation",
            "class#ProcessCreation_DataComponent",
            "class#HasDataComponent_ProcessCreation",
        ] {
            let labels = extract_labels(text).unwrap();
            assert_eq!(
                labels[0].target,
                NodeId::data_component("ProcessCreation").unwrap(),
                "spelling: {text}"
            );
        }
    }

    #[test]
    fn restriction_prefix_is_optional() {
        for text in [
            "restriction#Platform_SaaS",
            "restriction#HasRestriction_Platform_SaaS",
        ] {
            let labels = extract_labels(text).unwrap();
            assert_eq!(
                labels[0].target,
                NodeId::restriction("Platform_SaaS").unwrap()
            );
        }
    }

    #[test]
    fn empty_identifier_is_malformed() {
        let err = extract_labels("fine class# fine").unwrap_err();
        match err {
            Error::MalformedLabel { token, offset, .. } => {
                assert_eq!(token, "class#");
                assert_eq!(offset, 5);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn enum_label_with_unknown_shape_is_malformed() {
        assert!(extract_labels("enum#NotAnId").is_err());
        // Tactic ids are not enumeration targets.
        assert!(extract_labels("enum#TA0002").is_err());
    }

    #[test]
    fn prose_punctuation_is_ignored() {
        // Trailing parenthesis breaks the grammar, so the token is ignored.
        let labels = extract_labels("(see class#ProcessCreation) enum#T1059").unwrap();
        assert_eq!(labels.len(), 1);
        assert_eq!(labels[0].target, NodeId::technique("T1059").unwrap());
    }

    #[test]
    fn technique_enum_labels_are_supported() {
        let labels = extract_labels("enum#T1059.001").unwrap();
        assert_eq!(labels[0].target, NodeId::technique("T1059.001").unwrap());
    }

    #[test]
    fn diagram_without_cells_is_empty() {
        let diagram =
            parse_diagram(r#"{"summary":{"title":"x"},"detail":{"diagrams":[]}}"#).unwrap();
        assert!(diagram.elements.is_empty());
        assert!(diagram.warnings.is_empty());
    }

    #[test]
    fn non_threat_dragon_document_is_rejected() {
        assert!(matches!(
            parse_diagram(r#"{"cells":[]}"#),
            Err(Error::InvalidDocument(_))
        ));
    }

    #[test]
    fn flow_cell_parses_with_labels_and_endpoints() {
        let text = r#"{"detail":{"diagrams":[{"diagramJson":{"cells":[
            {"type":"tm.Flow","id":"f1","source":{"id":"a"},"target":{"id":"b"},
             "labels":[{"attrs":{"text":{"text":"Deploy"}}}],
             "description":"class#ProcessCreation_DataComponent"}
        ]}}]}}"#;
        let diagram = parse_diagram(text).unwrap();
        assert_eq!(diagram.elements.len(), 1);
        let flow = &diagram.elements[0];
        assert_eq!(flow.element_kind, ElementKind::Flow);
        assert_eq!(flow.name, "Deploy");
        assert_eq!(flow.source_ref.as_deref(), Some("a"));
        assert_eq!(flow.target_ref.as_deref(), Some("b"));
        assert_eq!(flow.labels.len(), 1);
    }

    #[test]
    fn boundary_cells_are_not_elements() {
        let text = r#"{"detail":{"diagrams":[{"diagramJson":{"cells":[
            {"type":"tm.Boundary","id":"b1"},
            {"type":"tm.Widget","id":"w1"},
            {"type":"tm.Process","id":"p1","attrs":{"text":{"text":"P"}}}
        ]}}]}}"#;
        let diagram = parse_diagram(text).unwrap();
        assert_eq!(diagram.elements.len(), 2);
        assert_eq!(diagram.elements[0].element_kind, ElementKind::Unknown);
        assert!(diagram
            .warnings
            .iter()
            .any(|w| w.kind == WarningKind::UnknownCellType));
    }
}
