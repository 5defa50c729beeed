//! The bundled ISO 27001 six-domain taxonomy of 21 essential controls.

use std::sync::LazyLock;

use serde::Deserialize;

use crate::taxonomy::{parse_taxonomy, LevelCounts, Taxonomy};

pub const ISO27001_ID: &str = "iso27001";

const ISO27001_JSON: &str = include_str!("../data/iso27001.json");
const ISO27001_MANIFEST: &str = include_str!("../data/iso27001.manifest.json");

static ISO27001: LazyLock<Taxonomy> =
    LazyLock::new(|| parse_taxonomy(ISO27001_JSON.as_bytes()).expect("bundled taxonomy parses"));

/// Dataset manifest shipped next to the bundled document.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub version: String,
    pub file: String,
    pub counts: LevelCounts,
    pub controls_per_domain: serde_json::Map<String, serde_json::Value>,
}

pub fn builtin_iso27001() -> Taxonomy {
    ISO27001.clone()
}

/// Raw bundled document, as shipped.
pub fn builtin_iso27001_document() -> &'static str {
    ISO27001_JSON
}

pub fn builtin_iso27001_manifest() -> Manifest {
    serde_json::from_str(ISO27001_MANIFEST).expect("bundled manifest parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{validate_taxonomy, NodeKind};

    #[test]
    fn six_domains_twenty_one_controls() {
        let t = builtin_iso27001();
        let c = t.counts();
        assert_eq!(c.domains, 6);
        assert_eq!(c.controls, 21);
        let per: Vec<_> = t.controls_per_domain();
        assert_eq!(
            per,
            [
                ("policy", 1),
                ("tools & technology", 5),
                ("organization", 1),
                ("culture", 8),
                ("stakeholder", 3),
                ("knowledge", 3)
            ]
        );
    }

    #[test]
    fn validates_clean() {
        let r = validate_taxonomy(&builtin_iso27001());
        assert!(r.ok);
        assert!(r.issues.is_empty(), "{:?}", r.issues);
    }

    #[test]
    fn manifest_matches_document() {
        let t = builtin_iso27001();
        let m = builtin_iso27001_manifest();
        assert_eq!(m.id, t.id);
        assert_eq!(m.version, t.version);
        assert_eq!(m.counts, t.counts());
        for (d, (name, n)) in t.domains.iter().zip(t.controls_per_domain()) {
            assert_eq!(m.controls_per_domain[&d.id], n as u64, "{name}");
        }
    }

    #[test]
    fn controls_follow_the_clause_mapping() {
        let t = builtin_iso27001();
        let refs = |domain: &str| -> Vec<String> {
            t.find(domain)
                .unwrap()
                .walk()
                .filter(|n| n.kind == NodeKind::Control)
                .map(|n| n.iso_ref.clone().unwrap())
                .collect()
        };
        assert_eq!(refs("policy"), ["5.1.1"]);
        assert_eq!(refs("tools-technology"), ["12.2.1", "12.2.2", "12.2.3", "12.2.4", "12.6.1"]);
        assert_eq!(refs("organization"), ["6.1.3"]);
        assert_eq!(
            refs("culture"),
            ["13.2.1", "13.2.2", "13.2.3", "14.1.1", "14.1.2", "14.1.3", "14.1.4", "14.1.5"]
        );
        assert_eq!(refs("stakeholder"), ["8.2.1", "8.2.2", "8.2.3"]);
        assert_eq!(refs("knowledge"), ["15.1.2", "15.1.3", "15.1.4"]);
        let culture_classes: Vec<_> = t.find("culture").unwrap().children.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            culture_classes,
            ["Information Security Incident Management", "Business Continuity Management"]
        );
    }

    #[test]
    fn every_control_has_issues_and_example_issue_is_present() {
        let t = builtin_iso27001();
        for control in t.nodes_of_kind(NodeKind::Control) {
            assert!(control.issues().count() >= 1, "{}", control.id);
        }
        let org = t.find("6.1.3").unwrap();
        assert!(org
            .issues()
            .any(|q| q.name == "Are assets and security process Cleary Identified?"));
    }
}
