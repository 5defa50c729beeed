//! Recursive mean rollup.
//!
//! A leaf's achievement is its score. Every internal node's achievement is
//! the arithmetic mean of its children's achievements, summed in declared
//! order and divided by the child count. The overall result is a synthetic
//! root whose children are the taxonomy's domains, so a six-domain taxonomy
//! divides by six at the top. Intermediate values are never rounded.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ScoringError;
use crate::scalar::Scalar;
use crate::scale::Scale;
use crate::taxonomy::{validate_taxonomy, NodeKind, Taxonomy, TaxonomyNode};

/// Whether every issue must be scored before evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    /// Unscored issues, and subtrees with nothing scored, are left out of
    /// their parent's mean.
    Partial,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Partial => "partial",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Mode::Strict),
            "partial" => Ok(Mode::Partial),
            other => Err(format!("unknown mode `{other}` (expected strict or partial)")),
        }
    }
}

/// Raw assessment input: issue id to integer score.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreSheet(BTreeMap<String, i64>);

impl ScoreSheet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &str) -> Option<i64> {
        self.0.get(id).copied()
    }

    pub fn insert(&mut self, id: impl Into<String>, score: i64) -> Option<i64> {
        self.0.insert(id.into(), score)
    }

    /// Merge `other` into `self`; entries in `other` win.
    pub fn merge(&mut self, other: &ScoreSheet) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), *v);
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Every issue of `taxonomy` scored `score`.
    pub fn uniform(taxonomy: &Taxonomy, score: i64) -> Self {
        taxonomy.issues().map(|q| (q.id.clone(), score)).collect()
    }
}

impl<K: Into<String>> FromIterator<(K, i64)> for ScoreSheet {
    fn from_iter<I: IntoIterator<Item = (K, i64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResultKind {
    Overall,
    Domain,
    Class,
    Control,
    Issue,
}

impl From<NodeKind> for ResultKind {
    fn from(k: NodeKind) -> Self {
        match k {
            NodeKind::Domain => ResultKind::Domain,
            NodeKind::Class => ResultKind::Class,
            NodeKind::Control => ResultKind::Control,
            NodeKind::Issue => ResultKind::Issue,
        }
    }
}

/// One evaluated node.
///
/// In partial mode `children` lists only the children that contributed to
/// the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeResult<T> {
    pub node_id: String,
    pub name: String,
    pub kind: ResultKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iso_ref: Option<String>,
    pub achievement: T,
    pub priority: T,
    pub percentage: T,
    pub predicate: String,
    pub scored_issues: usize,
    pub total_issues: usize,
    #[serde(default = "Vec::new", skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeResult<T>>,
}

impl<T: Scalar> NodeResult<T> {
    #[allow(clippy::too_many_arguments)]
    fn build(
        node_id: &str,
        name: &str,
        kind: ResultKind,
        iso_ref: Option<&String>,
        achievement: T,
        scale: &Scale,
        counts: (usize, usize),
        children: Vec<NodeResult<T>>,
    ) -> Result<Self, ScoringError> {
        Ok(Self {
            node_id: node_id.to_string(),
            name: name.to_string(),
            kind,
            iso_ref: iso_ref.cloned(),
            achievement,
            priority: priority_of(achievement, scale)?,
            percentage: percentage_of(achievement, scale)?,
            predicate: predicate_of(achievement, scale)?.to_string(),
            scored_issues: counts.0,
            total_issues: counts.1,
            children,
        })
    }

    /// Pre-order traversal including `self`.
    pub fn walk(&self) -> Box<dyn Iterator<Item = &NodeResult<T>> + '_> {
        Box::new(std::iter::once(self).chain(self.children.iter().flat_map(|c| c.walk())))
    }

    pub fn find(&self, id: &str) -> Option<&NodeResult<T>> {
        self.walk().find(|n| n.node_id == id)
    }

    /// Same tree with every scalar converted to `f64`.
    pub fn to_f64(&self) -> NodeResult<f64> {
        NodeResult {
            node_id: self.node_id.clone(),
            name: self.name.clone(),
            kind: self.kind,
            iso_ref: self.iso_ref.clone(),
            achievement: self.achievement.as_f64(),
            priority: self.priority.as_f64(),
            percentage: self.percentage.as_f64(),
            predicate: self.predicate.clone(),
            scored_issues: self.scored_issues,
            total_issues: self.total_issues,
            children: self.children.iter().map(NodeResult::to_f64).collect(),
        }
    }
}

/// A fully evaluated taxonomy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentResult<T> {
    pub taxonomy_id: String,
    pub taxonomy_version: String,
    pub mode: Mode,
    pub evaluated_at: DateTime<Utc>,
    /// Fraction of issues scored.
    pub coverage: f64,
    pub scale: Scale,
    pub overall: NodeResult<T>,
}

impl<T: Scalar> AssessmentResult<T> {
    pub fn domains(&self) -> &[NodeResult<T>] {
        &self.overall.children
    }

    pub fn to_f64(&self) -> AssessmentResult<f64> {
        AssessmentResult {
            taxonomy_id: self.taxonomy_id.clone(),
            taxonomy_version: self.taxonomy_version.clone(),
            mode: self.mode,
            evaluated_at: self.evaluated_at,
            coverage: self.coverage,
            scale: self.scale.clone(),
            overall: self.overall.to_f64(),
        }
    }
}

/// Gap between the ideal (scale maximum) and `achievement`.
pub fn priority_of<T: Scalar>(achievement: T, scale: &Scale) -> Result<T, ScoringError> {
    scale.check_real(achievement)?;
    Ok(T::from_score(scale.max()) - achievement)
}

/// Position of `achievement` on the scale, 0 at the minimum and 100 at the
/// maximum.
pub fn percentage_of<T: Scalar>(achievement: T, scale: &Scale) -> Result<T, ScoringError> {
    scale.check_real(achievement)?;
    Ok((achievement - T::from_score(scale.min())) / T::from_score(scale.span())
        * T::from_score(100))
}

/// Label of the nearest integer step; exact halves round up.
pub fn predicate_of<T: Scalar>(achievement: T, scale: &Scale) -> Result<&str, ScoringError> {
    scale.check_real(achievement)?;
    let offset = (achievement - T::from_score(scale.min())).as_f64();
    let step = ((offset + 0.5).floor() as i64).clamp(0, scale.span());
    Ok(&scale.labels()[step as usize])
}

/// Reject scores outside the scale and ids that are not issues of `taxonomy`.
pub fn check_sheet(taxonomy: &Taxonomy, sheet: &ScoreSheet) -> Result<(), ScoringError> {
    let leaves: HashSet<&str> = taxonomy.issues().map(|n| n.id.as_str()).collect();
    let unknown: Vec<String> = sheet
        .iter()
        .filter(|(id, _)| !leaves.contains(id))
        .map(|(id, _)| id.to_string())
        .collect();
    if !unknown.is_empty() {
        return Err(ScoringError::UnknownLeafId { ids: unknown });
    }
    check_range(sheet.iter(), &taxonomy.scale)
}

fn check_range<'a>(
    mut entries: impl Iterator<Item = (&'a str, i64)>,
    scale: &Scale,
) -> Result<(), ScoringError> {
    match entries.find(|(_, s)| !scale.contains(*s)) {
        Some((id, s)) => Err(ScoringError::OutOfRangeScore {
            leaf_id: Some(id.to_string()),
            value: s as f64,
            min: scale.min(),
            max: scale.max(),
        }),
        None => Ok(()),
    }
}

fn missing_under(node: &TaxonomyNode, sheet: &ScoreSheet) -> Vec<String> {
    node.issues()
        .filter(|q| sheet.get(&q.id).is_none())
        .map(|q| q.id.clone())
        .collect()
}

/// Achievement of a single node. Leaves pass their score through.
pub fn aggregate_node<T: Scalar>(
    node: &TaxonomyNode,
    sheet: &ScoreSheet,
    scale: &Scale,
    mode: Mode,
) -> Result<T, ScoringError> {
    check_range(
        node.issues().filter_map(|q| sheet.get(&q.id).map(|s| (q.id.as_str(), s))),
        scale,
    )?;
    if mode == Mode::Strict {
        let missing = missing_under(node, sheet);
        if !missing.is_empty() {
            return Err(ScoringError::IncompleteAssessment { missing });
        }
    }
    match node_value(node, sheet) {
        Some(v) => Ok(v),
        None if node.is_issue() => Err(ScoringError::IncompleteAssessment {
            missing: vec![node.id.clone()],
        }),
        None => Err(ScoringError::EmptyNode {
            node_id: node.id.clone(),
        }),
    }
}

fn node_value<T: Scalar>(node: &TaxonomyNode, sheet: &ScoreSheet) -> Option<T> {
    if node.is_issue() {
        return sheet.get(&node.id).map(T::from_score);
    }
    let mut sum = T::zero();
    let mut n = 0usize;
    for v in node.children.iter().filter_map(|c| node_value::<T>(c, sheet)) {
        sum = sum + v;
        n += 1;
    }
    (n > 0).then(|| sum / T::from_count(n))
}

/// Evaluate the whole taxonomy, stamping the current time.
pub fn evaluate<T: Scalar>(
    taxonomy: &Taxonomy,
    sheet: &ScoreSheet,
    mode: Mode,
) -> Result<AssessmentResult<T>, ScoringError> {
    evaluate_at(taxonomy, sheet, mode, Utc::now())
}

/// [`evaluate`] with an explicit evaluation timestamp.
pub fn evaluate_at<T: Scalar>(
    taxonomy: &Taxonomy,
    sheet: &ScoreSheet,
    mode: Mode,
    evaluated_at: DateTime<Utc>,
) -> Result<AssessmentResult<T>, ScoringError> {
    let report = validate_taxonomy(taxonomy);
    if !report.ok {
        return Err(ScoringError::InvalidTaxonomy {
            taxonomy_id: taxonomy.id.clone(),
            errors: report.errors().map(|i| i.message.clone()).collect(),
        });
    }
    check_sheet(taxonomy, sheet)?;
    let total = taxonomy.issues().count();
    if mode == Mode::Strict {
        let missing: Vec<String> = taxonomy
            .domains
            .iter()
            .flat_map(|d| missing_under(d, sheet))
            .collect();
        if !missing.is_empty() {
            return Err(ScoringError::IncompleteAssessment { missing });
        }
    }

    let scale = &taxonomy.scale;
    let mut domains = Vec::with_capacity(taxonomy.domains.len());
    for d in &taxonomy.domains {
        if let Some(r) = evaluate_node::<T>(d, sheet, scale)? {
            domains.push(r);
        }
    }
    if domains.is_empty() {
        return Err(ScoringError::EmptyNode {
            node_id: taxonomy.id.clone(),
        });
    }
    let scored: usize = domains.iter().map(|d| d.scored_issues).sum();
    let overall = NodeResult::build(
        &taxonomy.id,
        &taxonomy.title,
        ResultKind::Overall,
        None,
        mean(domains.iter().map(|d| d.achievement)),
        scale,
        (scored, total),
        domains,
    )?;
    Ok(AssessmentResult {
        taxonomy_id: taxonomy.id.clone(),
        taxonomy_version: taxonomy.version.clone(),
        mode,
        evaluated_at,
        coverage: if total == 0 { 0.0 } else { scored as f64 / total as f64 },
        scale: scale.clone(),
        overall,
    })
}

fn mean<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let (sum, n) = values.fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    sum / T::from_count(n)
}

fn evaluate_node<T: Scalar>(
    node: &TaxonomyNode,
    sheet: &ScoreSheet,
    scale: &Scale,
) -> Result<Option<NodeResult<T>>, ScoringError> {
    let kind = ResultKind::from(node.kind);
    if node.is_issue() {
        return match sheet.get(&node.id) {
            Some(s) => NodeResult::build(
                &node.id,
                &node.name,
                kind,
                node.iso_ref.as_ref(),
                T::from_score(s),
                scale,
                (1, 1),
                Vec::new(),
            )
            .map(Some),
            None => Ok(None),
        };
    }
    let mut children = Vec::with_capacity(node.children.len());
    let mut total = 0;
    for c in &node.children {
        total += c.issues().count();
        if let Some(r) = evaluate_node::<T>(c, sheet, scale)? {
            children.push(r);
        }
    }
    if children.is_empty() {
        return Ok(None);
    }
    let scored = children.iter().map(|c| c.scored_issues).sum();
    NodeResult::build(
        &node.id,
        &node.name,
        kind,
        node.iso_ref.as_ref(),
        mean(children.iter().map(|c| c.achievement)),
        scale,
        (scored, total),
        children,
    )
    .map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::builtin_iso27001;
    use crate::scalar::Rational;

    fn issue(id: &str) -> TaxonomyNode {
        TaxonomyNode::issue(id, id)
    }

    fn control(id: &str, issues: &[&str]) -> TaxonomyNode {
        TaxonomyNode::branch(id, id, NodeKind::Control, issues.iter().map(|i| issue(i)).collect())
            .with_iso_ref(id)
    }

    fn sheet(entries: &[(&str, i64)]) -> ScoreSheet {
        entries.iter().map(|(k, v)| (*k, *v)).collect()
    }

    #[test]
    fn leaf_passes_through() {
        let s = Scale::default();
        let v: f64 = aggregate_node(&issue("q"), &sheet(&[("q", 3)]), &s, Mode::Strict).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn control_mean_of_pair() {
        let s = Scale::default();
        let c = control("c", &["a", "b"]);
        let v: f64 = aggregate_node(&c, &sheet(&[("a", 2), ("b", 4)]), &s, Mode::Strict).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn single_path_policy_domain() {
        let s = Scale::default();
        let policy = TaxonomyNode::branch(
            "policy",
            "policy",
            NodeKind::Domain,
            vec![TaxonomyNode::branch(
                "isp",
                "Information Security Policy",
                NodeKind::Class,
                vec![control("5.1.1", &["doc"])],
            )],
        );
        let v: f64 = aggregate_node(&policy, &sheet(&[("doc", 4)]), &s, Mode::Strict).unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn strict_reports_every_missing_leaf() {
        let s = Scale::default();
        let c = control("c", &["a", "b", "x"]);
        let err = aggregate_node::<f64>(&c, &sheet(&[("b", 1)]), &s, Mode::Strict).unwrap_err();
        assert_eq!(
            err,
            ScoringError::IncompleteAssessment {
                missing: vec!["a".into(), "x".into()]
            }
        );
    }

    #[test]
    fn partial_skips_unscored_and_rejects_empty() {
        let s = Scale::default();
        let c = control("c", &["a", "b", "x"]);
        let v: f64 = aggregate_node(&c, &sheet(&[("b", 1), ("x", 4)]), &s, Mode::Partial).unwrap();
        assert_eq!(v, 2.5);
        assert_eq!(
            aggregate_node::<f64>(&c, &ScoreSheet::new(), &s, Mode::Partial),
            Err(ScoringError::EmptyNode { node_id: "c".into() })
        );
        assert!(matches!(
            aggregate_node::<f64>(&issue("q"), &ScoreSheet::new(), &s, Mode::Partial),
            Err(ScoringError::IncompleteAssessment { .. })
        ));
    }

    #[test]
    fn synthetic_root_over_reconstructed_domains() {
        let domains = [4.0, 2.6, 2.0, 2.66, 2.4, 2.33];
        let overall = mean::<f64>(domains.into_iter());
        let oracle = (4.0 + 2.6 + 2.0 + 2.66 + 2.4 + 2.33) / 6.0;
        assert!((overall - oracle).abs() < 1e-12);
        assert!((overall - 2.665).abs() < 5e-4);
    }

    #[test]
    fn indicator_examples() {
        let s = Scale::default();
        assert_eq!(priority_of(4.0, &s).unwrap(), 0.0);
        assert_eq!(priority_of(0.0, &s).unwrap(), 4.0);
        assert!((priority_of(2.6f64, &s).unwrap() - 1.4).abs() < 1e-12);
        assert_eq!(percentage_of(4.0, &s).unwrap(), 100.0);
        assert_eq!(percentage_of(2.0, &s).unwrap(), 50.0);
        assert!((percentage_of(2.66f64, &s).unwrap() - 66.5).abs() < 1e-9);
        assert_eq!(predicate_of(4.0, &s).unwrap(), "excellent");
        assert_eq!(predicate_of(2.66, &s).unwrap(), "above average");
        assert_eq!(predicate_of(2.5, &s).unwrap(), "above average");
        assert_eq!(predicate_of(2.49, &s).unwrap(), "average");
        assert_eq!(predicate_of(0.0, &s).unwrap(), "not implementing");
        assert_eq!(predicate_of(Rational::new(5, 2), &s).unwrap(), "above average");
    }

    #[test]
    fn indicators_reject_out_of_range() {
        let s = Scale::default();
        for bad in [-0.1, 4.01] {
            assert_eq!(priority_of(bad, &s).unwrap_err().code(), "OutOfRangeScore");
            assert_eq!(percentage_of(bad, &s).unwrap_err().code(), "OutOfRangeScore");
            assert_eq!(predicate_of(bad, &s).unwrap_err().code(), "OutOfRangeScore");
        }
    }

    #[test]
    fn evaluate_uniform_sheets() {
        let t = builtin_iso27001();
        for (score, priority) in [(4, 0.0), (0, 4.0)] {
            let r: AssessmentResult<f64> =
                evaluate(&t, &ScoreSheet::uniform(&t, score), Mode::Strict).unwrap();
            assert_eq!(r.overall.achievement, score as f64);
            assert_eq!(r.coverage, 1.0);
            assert!(r.overall.walk().all(|n| n.priority == priority));
        }
    }

    #[test]
    fn evaluate_rejects_bad_sheets() {
        let t = builtin_iso27001();
        let mut s = ScoreSheet::uniform(&t, 2);
        s.insert("5.1.1-q1", 7);
        assert!(matches!(
            evaluate::<f64>(&t, &s, Mode::Strict),
            Err(ScoringError::OutOfRangeScore { leaf_id: Some(ref id), .. }) if id == "5.1.1-q1"
        ));
        let mut s = ScoreSheet::uniform(&t, 2);
        s.insert("5.1.1", 2);
        s.insert("nope", 2);
        assert_eq!(
            evaluate::<f64>(&t, &s, Mode::Strict).unwrap_err(),
            ScoringError::UnknownLeafId {
                ids: vec!["5.1.1".into(), "nope".into()]
            }
        );
        assert_eq!(
            evaluate::<f64>(&t, &ScoreSheet::new(), Mode::Partial).unwrap_err(),
            ScoringError::EmptyNode { node_id: "iso27001".into() }
        );
    }

    #[test]
    fn partial_coverage_and_pruned_children() {
        let t = builtin_iso27001();
        let s: ScoreSheet = t.find("policy").unwrap().issues().map(|q| (q.id.clone(), 3)).collect();
        let r: AssessmentResult<f64> = evaluate(&t, &s, Mode::Partial).unwrap();
        assert_eq!(r.domains().len(), 1);
        assert_eq!(r.overall.achievement, 3.0);
        assert_eq!(r.overall.scored_issues, 4);
        assert_eq!(r.overall.total_issues, t.issues().count());
        assert!((r.coverage - 4.0 / t.issues().count() as f64).abs() < 1e-12);
    }

    #[test]
    fn invalid_taxonomy_rejected() {
        let mut t = builtin_iso27001();
        t.domains[0].children[0].children.clear();
        assert_eq!(
            evaluate::<f64>(&t, &ScoreSheet::new(), Mode::Partial).unwrap_err().code(),
            "InvalidTaxonomy"
        );
    }

    #[test]
    fn rational_and_f64_agree() {
        let t = builtin_iso27001();
        let s: ScoreSheet = t.issues().enumerate().map(|(i, q)| (q.id.clone(), (i % 5) as i64)).collect();
        let exact: AssessmentResult<Rational> = evaluate(&t, &s, Mode::Strict).unwrap();
        let float: AssessmentResult<f64> = evaluate(&t, &s, Mode::Strict).unwrap();
        for (a, b) in exact.overall.walk().zip(float.overall.walk()) {
            assert!((a.achievement.as_f64() - b.achievement).abs() < 1e-12);
            assert_eq!(a.predicate, b.predicate);
        }
        let single: AssessmentResult<f32> = evaluate(&t, &s, Mode::Strict).unwrap();
        assert!((single.overall.achievement as f64 - float.overall.achievement).abs() < 1e-5);
    }
}
