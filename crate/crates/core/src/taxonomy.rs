//! Assessment trees: the document format, structural validation, and
//! traversal helpers.
//!
//! A taxonomy is an ordered forest of domains. Internal nodes (domains,
//! classes, controls) aggregate their children; `issue` leaves carry the
//! scores. Depth is not fixed, so classes may nest to any level.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::TaxonomyError;
use crate::scale::Scale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Domain,
    Class,
    Control,
    Issue,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Domain => "domain",
            NodeKind::Class => "class",
            NodeKind::Control => "control",
            NodeKind::Issue => "issue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomyNode {
    pub id: String,
    pub name: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iso_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TaxonomyNode>,
}

impl TaxonomyNode {
    pub fn issue(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            kind: NodeKind::Issue,
            iso_ref: None,
            children: Vec::new(),
        }
    }

    pub fn branch(
        id: impl Into<String>,
        name: impl Into<String>,
        kind: NodeKind,
        children: Vec<TaxonomyNode>,
    ) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            kind,
            iso_ref: None,
            children,
        }
    }

    pub fn with_iso_ref(mut self, iso_ref: impl Into<String>) -> Self {
        self.iso_ref = Some(iso_ref.into());
        self
    }

    pub fn is_issue(&self) -> bool {
        self.kind == NodeKind::Issue
    }

    /// Pre-order traversal including `self`.
    pub fn walk(&self) -> Walk<'_> {
        Walk { stack: vec![self] }
    }

    /// Issue leaves under this node, in declared order.
    pub fn issues(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.walk().filter(|n| n.is_issue())
    }
}

pub struct Walk<'a> {
    stack: Vec<&'a TaxonomyNode>,
}

impl<'a> Iterator for Walk<'a> {
    type Item = &'a TaxonomyNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Taxonomy {
    pub id: String,
    pub title: String,
    pub version: String,
    #[serde(default)]
    pub scale: Scale,
    pub domains: Vec<TaxonomyNode>,
}

/// Node totals per kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub domains: usize,
    pub classes: usize,
    pub controls: usize,
    pub issues: usize,
}

impl Taxonomy {
    pub fn walk(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.domains.iter().flat_map(TaxonomyNode::walk)
    }

    pub fn issues(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.walk().filter(|n| n.is_issue())
    }

    pub fn find(&self, id: &str) -> Option<&TaxonomyNode> {
        self.walk().find(|n| n.id == id)
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &TaxonomyNode> {
        self.walk().filter(move |n| n.kind == kind)
    }

    pub fn counts(&self) -> LevelCounts {
        let mut c = LevelCounts::default();
        for n in self.walk() {
            match n.kind {
                NodeKind::Domain => c.domains += 1,
                NodeKind::Class => c.classes += 1,
                NodeKind::Control => c.controls += 1,
                NodeKind::Issue => c.issues += 1,
            }
        }
        c
    }

    /// `(domain name, number of controls)` in domain order.
    pub fn controls_per_domain(&self) -> Vec<(&str, usize)> {
        self.domains
            .iter()
            .map(|d| {
                let n = d.walk().filter(|n| n.kind == NodeKind::Control).count();
                (d.name.as_str(), n)
            })
            .collect()
    }

    /// Canonical JSON encoding, the inverse of [`parse_taxonomy`].
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("taxonomy serializes")
    }
}

/// Read a taxonomy document. Rejects syntax and schema violations and
/// duplicate ids; everything else is left to [`validate_taxonomy`].
pub fn parse_taxonomy(document: &[u8]) -> Result<Taxonomy, TaxonomyError> {
    let taxonomy: Taxonomy =
        serde_json::from_slice(document).map_err(|e| TaxonomyError::MalformedDocument {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let mut seen = HashSet::new();
    for node in taxonomy.walk() {
        if !seen.insert(node.id.as_str()) {
            return Err(TaxonomyError::DuplicateId {
                id: node.id.clone(),
            });
        }
    }
    Ok(taxonomy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub code: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }
}

struct Collector(Vec<ValidationIssue>);

impl Collector {
    fn push(&mut self, severity: Severity, code: &str, node: Option<&TaxonomyNode>, message: String) {
        self.0.push(ValidationIssue {
            severity,
            code: code.to_string(),
            node_id: node.map(|n| n.id.clone()),
            message,
        });
    }
}

/// Structural check of a taxonomy. Problems are reported, never thrown.
pub fn validate_taxonomy(t: &Taxonomy) -> ValidationReport {
    let mut out = Collector(Vec::new());

    if t.id.trim().is_empty() {
        out.push(Severity::Error, "EmptyLabel", None, "taxonomy id is empty".into());
    }
    if t.domains.is_empty() {
        out.push(Severity::Error, "NoDomains", None, "taxonomy has no domains".into());
    }
    for d in &t.domains {
        if d.kind != NodeKind::Domain {
            out.push(
                Severity::Error,
                "MisplacedKind",
                Some(d),
                format!("top-level node `{}` is a {}, expected a domain", d.id, d.kind.as_str()),
            );
        }
    }

    let mut seen = HashSet::new();
    for d in &t.domains {
        for node in d.walk() {
            check_node(node, &mut out);
            if !seen.insert(node.id.as_str()) {
                out.push(
                    Severity::Error,
                    "DuplicateId",
                    Some(node),
                    format!("duplicate node id `{}`", node.id),
                );
            }
            if node.kind == NodeKind::Domain && !std::ptr::eq(node, d) {
                out.push(
                    Severity::Error,
                    "MisplacedKind",
                    Some(node),
                    format!("domain `{}` is nested below another node", node.id),
                );
            }
        }
        if d.kind == NodeKind::Domain && d.issues().count() == 1 {
            out.push(
                Severity::Warning,
                "SingleIssueDomain",
                Some(d),
                format!("domain `{}` is assessed by a single issue", d.id),
            );
        }
    }

    let issues = out.0;
    ValidationReport {
        ok: !issues.iter().any(|i| i.severity == Severity::Error),
        issues,
    }
}

fn check_node(node: &TaxonomyNode, out: &mut Collector) {
    if node.id.trim().is_empty() {
        out.push(Severity::Error, "EmptyLabel", Some(node), "node with empty id".into());
    }
    if node.name.trim().is_empty() {
        out.push(
            Severity::Error,
            "EmptyLabel",
            Some(node),
            format!("node `{}` has an empty name", node.id),
        );
    }
    match (node.is_issue(), node.children.is_empty()) {
        (true, false) => out.push(
            Severity::Error,
            "IssueWithChildren",
            Some(node),
            format!("issue `{}` has {} children", node.id, node.children.len()),
        ),
        (false, true) => out.push(
            Severity::Error,
            "EmptyNode",
            Some(node),
            format!("{} `{}` has no children", node.kind.as_str(), node.id),
        ),
        _ => {}
    }
    if node.kind == NodeKind::Control && node.iso_ref.is_none() {
        out.push(
            Severity::Warning,
            "MissingIsoRef",
            Some(node),
            format!("control `{}` has no iso_ref", node.id),
        );
    }
}
