//! Node identity: namespaces, validated identifiers, and name canonicalization.
//!
//! Every node in the graph is addressed by a [`NodeId`]: a namespace plus a
//! local identifier drawn from the charset `[A-Za-z0-9_.-]`. Namespaces with a
//! conventional id shape (techniques, tactics, CAPEC/CWE/CVE entries) get that
//! shape enforced at construction time, so anything holding a `NodeId` can rely
//! on it being well-formed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The kinds of node a graph can hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Namespace {
    #[serde(rename = "ATTCK")]
    Attck,
    #[serde(rename = "TACTIC")]
    Tactic,
    #[serde(rename = "CAPEC")]
    Capec,
    #[serde(rename = "CWE")]
    Cwe,
    #[serde(rename = "CVE")]
    Cve,
    #[serde(rename = "DATACOMPONENT")]
    DataComponent,
    #[serde(rename = "RESTRICTION")]
    Restriction,
    #[serde(rename = "THREAT")]
    Threat,
}

impl Namespace {
    pub const ALL: [Namespace; 8] = [
        Namespace::Attck,
        Namespace::Tactic,
        Namespace::Capec,
        Namespace::Cwe,
        Namespace::Cve,
        Namespace::DataComponent,
        Namespace::Restriction,
        Namespace::Threat,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Namespace::Attck => "ATTCK",
            Namespace::Tactic => "TACTIC",
            Namespace::Capec => "CAPEC",
            Namespace::Cwe => "CWE",
            Namespace::Cve => "CVE",
            Namespace::DataComponent => "DATACOMPONENT",
            Namespace::Restriction => "RESTRICTION",
            Namespace::Threat => "THREAT",
        }
    }

    /// Namespaces whose members can be the target of an `enum#` label and of
    /// the `refToEnum` relation.
    pub fn is_enumeration(&self) -> bool {
        matches!(
            self,
            Namespace::Attck | Namespace::Capec | Namespace::Cwe | Namespace::Cve
        )
    }

    fn local_shape_ok(&self, local: &str) -> bool {
        match self {
            Namespace::Attck => is_technique_local(local),
            Namespace::Tactic => is_tactic_local(local),
            Namespace::Capec => has_numeric_suffix(local, "CAPEC-"),
            Namespace::Cwe => has_numeric_suffix(local, "CWE-"),
            Namespace::Cve => is_cve_local(local),
            // Data components, restrictions, and threats carry derived names;
            // the shared charset check is the only constraint.
            Namespace::DataComponent | Namespace::Restriction | Namespace::Threat => true,
        }
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Namespace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Namespace::ALL
            .iter()
            .copied()
            .find(|ns| ns.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidNodeId {
                namespace: s.to_string(),
                local: String::new(),
                reason: "unknown namespace".to_string(),
            })
    }
}

/// `T1059`, `T1059.001`, ... but not `TA0002`.
pub fn is_technique_local(s: &str) -> bool {
    let Some(rest) = s.strip_prefix('T') else {
        return false;
    };
    match rest.split_once('.') {
        Some((major, minor)) => all_digits(major) && all_digits(minor),
        None => all_digits(rest),
    }
}

/// `TA0002`, `TA0040`, ...
pub fn is_tactic_local(s: &str) -> bool {
    s.strip_prefix("TA").is_some_and(all_digits)
}

/// `CVE-2021-1234` and friends.
pub fn is_cve_local(s: &str) -> bool {
    let Some(rest) = s.strip_prefix("CVE-") else {
        return false;
    };
    match rest.split_once('-') {
        Some((year, seq)) => year.len() == 4 && all_digits(year) && all_digits(seq),
        None => false,
    }
}

fn has_numeric_suffix(s: &str, prefix: &str) -> bool {
    s.strip_prefix(prefix).is_some_and(all_digits)
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn charset_ok(s: &str) -> bool {
    s.bytes()
        .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
}

/// A validated (namespace, local) node identifier.
///
/// Renders as `NAMESPACE:local`, e.g. `ATTCK:T1059` or
/// `RESTRICTION:Platform_SaaS`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    namespace: Namespace,
    local: String,
}

impl NodeId {
    pub fn new(namespace: Namespace, local: impl Into<String>) -> Result<Self> {
        let local = local.into();
        let reason = if local.is_empty() {
            Some("empty local part")
        } else if !charset_ok(&local) {
            Some("local part contains characters outside [A-Za-z0-9_.-]")
        } else if !namespace.local_shape_ok(&local) {
            Some("local part does not match the namespace's id shape")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(Error::InvalidNodeId {
                namespace: namespace.as_str().to_string(),
                local,
                reason: reason.to_string(),
            }),
            None => Ok(NodeId { namespace, local }),
        }
    }

    pub fn technique(local: impl Into<String>) -> Result<Self> {
        NodeId::new(Namespace::Attck, local)
    }

    pub fn tactic(local: impl Into<String>) -> Result<Self> {
        NodeId::new(Namespace::Tactic, local)
    }

    pub fn capec(local: impl Into<String>) -> Result<Self> {
        NodeId::new(Namespace::Capec, local)
    }

    pub fn cwe(local: impl Into<String>) -> Result<Self> {
        NodeId::new(Namespace::Cwe, local)
    }

    pub fn cve(local: impl Into<String>) -> Result<Self> {
        NodeId::new(Namespace::Cve, local)
    }

    pub fn data_component(local: impl Into<String>) -> Result<Self> {
        NodeId::new(Namespace::DataComponent, local)
    }

    pub fn restriction(local: impl Into<String>) -> Result<Self> {
        NodeId::new(Namespace::Restriction, local)
    }

    /// The threat stub paired with a technique shares its local name.
    pub fn threat_of(technique: &NodeId) -> Result<Self> {
        if technique.namespace != Namespace::Attck {
            return Err(Error::UnsupportedNamespace {
                id: technique.to_string(),
                namespace: technique.namespace.as_str().to_string(),
                context: "threat_of".to_string(),
            });
        }
        NodeId::new(Namespace::Threat, technique.local.clone())
    }

    pub fn namespace(&self) -> Namespace {
        self.namespace
    }

    pub fn local(&self) -> &str {
        &self.local
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.namespace, self.local)
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some((ns, local)) = s.split_once(':') else {
            return Err(Error::InvalidNodeId {
                namespace: String::new(),
                local: s.to_string(),
                reason: "expected `NAMESPACE:local`".to_string(),
            });
        };
        NodeId::new(ns.parse()?, local)
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How a raw catalog name is reduced to an identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NameStyle {
    /// Drop every character outside `[A-Za-z0-9]`, concatenating the words:
    /// `"Process Creation"` becomes `ProcessCreation`. Used for data-component
    /// names.
    Concatenated,
    /// Replace each interior run of characters outside `[A-Za-z0-9]` with a
    /// single underscore, dropping leading/trailing runs: `"Office 365"`
    /// becomes `Office_365`. Used for restriction values.
    Underscored,
}

/// Reduces a raw catalog name to the `NodeId` charset.
pub fn canonicalize_name(raw: &str, style: NameStyle) -> Result<String> {
    let mut out = String::with_capacity(raw.len());
    let mut pending_gap = false;
    for ch in raw.chars() {
        if ch.is_ascii_alphanumeric() {
            if pending_gap && !out.is_empty() && style == NameStyle::Underscored {
                out.push('_');
            }
            out.push(ch);
            pending_gap = false;
        } else {
            pending_gap = true;
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyCanonicalName {
            raw: raw.to_string(),
        });
    }
    Ok(out)
}

/// Scans free text for the first `CVE-YYYY-NNNN...` token.
pub fn find_cve_id(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    let mut start = 0usize;
    while let Some(pos) = text[start..].find("CVE-") {
        let begin = start + pos;
        let tail = &bytes[begin + 4..];
        let year_len = tail.iter().take_while(|b| b.is_ascii_digit()).count();
        if year_len == 4 && tail.get(4) == Some(&b'-') {
            let seq_len = tail[5..].iter().take_while(|b| b.is_ascii_digit()).count();
            if seq_len > 0 {
                return Some(text[begin..begin + 4 + 4 + 1 + seq_len].to_string());
            }
        }
        start = begin + 4;
    }
    None
}
