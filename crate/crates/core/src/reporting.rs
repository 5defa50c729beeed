//! Presentations of an evaluated assessment: the summary with advice,
//! achievement/priority histogram series, and CSV/JSON exports.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::scalar::{fmt2, round2, Scalar};
use crate::scale::Scale;
use crate::scoring::{predicate_of, AssessmentResult, NodeResult, ResultKind};

const ADVICE_JSON: &str = include_str!("../data/advice.json");

static BUNDLED_TEMPLATES: LazyLock<AdviceTemplates> =
    LazyLock::new(|| AdviceTemplates::from_json(ADVICE_JSON).expect("bundled advice templates parse"));

/// Sentence templates for [`Advice::text`].
///
/// Placeholders: `{weakest}`, `{strongest}`, `{priority}`, `{score}`,
/// `{max}`, `{predicate}`, `{ranking}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdviceTemplates {
    pub uniform: String,
    pub weakest: String,
    pub strongest: String,
    pub ranking: String,
}

impl AdviceTemplates {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn bundled() -> &'static AdviceTemplates {
        &BUNDLED_TEMPLATES
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDomain {
    pub name: String,
    pub achievement: f64,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advice {
    /// Domains at the maximum achievement, ties included.
    pub strongest: Vec<String>,
    /// Domains at the minimum achievement, ties included.
    pub weakest: Vec<String>,
    /// Domains by priority, highest first.
    pub ranking: Vec<RankedDomain>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub out_of_scale: f64,
    pub scale_max: i64,
    pub out_of_hundred: f64,
    pub predicate: String,
    pub advice: Advice,
}

impl Summary {
    /// One-line form, e.g. `3.00 / 4 — 75.00% — above average`.
    pub fn headline(&self) -> String {
        format!(
            "{} / {} — {}% — {}",
            fmt2(self.out_of_scale),
            self.scale_max,
            fmt2(self.out_of_hundred),
            self.predicate
        )
    }
}

pub fn summarize<T: Scalar>(result: &AssessmentResult<T>) -> Summary {
    summarize_with(result, AdviceTemplates::bundled())
}

pub fn summarize_with<T: Scalar>(result: &AssessmentResult<T>, templates: &AdviceTemplates) -> Summary {
    let overall = &result.overall;
    Summary {
        out_of_scale: round2(overall.achievement.as_f64()),
        scale_max: result.scale.max(),
        out_of_hundred: round2(overall.percentage.as_f64()),
        predicate: overall.predicate.clone(),
        advice: advise_with(result, templates),
    }
}

/// Indices of the maximal and minimal values. Values closer than `1e-9` of
/// the scale span count as tied.
fn extremes(values: &[f64], span: f64) -> (Vec<usize>, Vec<usize>) {
    let tol = 1e-9 * span;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let pick = |target: f64| {
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| (**v - target).abs() <= tol)
            .map(|(i, _)| i)
            .collect()
    };
    (pick(max), pick(min))
}

pub fn advise<T: Scalar>(result: &AssessmentResult<T>) -> Advice {
    advise_with(result, AdviceTemplates::bundled())
}

pub fn advise_with<T: Scalar>(result: &AssessmentResult<T>, templates: &AdviceTemplates) -> Advice {
    let domains = result.domains();
    let achievements: Vec<f64> = domains.iter().map(|d| d.achievement.as_f64()).collect();
    let (top, bottom) = extremes(&achievements, result.scale.span() as f64);
    let names = |idx: &[usize]| -> Vec<String> { idx.iter().map(|&i| domains[i].name.clone()).collect() };
    let strongest = names(&top);
    let weakest = names(&bottom);

    let mut ranking: Vec<RankedDomain> = domains
        .iter()
        .map(|d| RankedDomain {
            name: d.name.clone(),
            achievement: d.achievement.as_f64(),
            priority: d.priority.as_f64(),
        })
        .collect();
    ranking.sort_by(|a, b| b.priority.total_cmp(&a.priority));

    let max = result.scale.max().to_string();
    let fill = |template: &str, value: f64| {
        template
            .replace("{weakest}", &join_names(&weakest))
            .replace("{strongest}", &join_names(&strongest))
            .replace("{max}", &max)
            .replace("{predicate}", &result.overall.predicate)
            .replace("{score}", &fmt2(value))
            .replace("{priority}", &fmt2(result.scale.max() as f64 - value))
            .replace(
                "{ranking}",
                &ranking
                    .iter()
                    .map(|r| format!("{} ({})", r.name, fmt2(r.priority)))
                    .collect::<Vec<_>>()
                    .join(", "),
            )
    };

    let text = if top.len() == domains.len() {
        fill(&templates.uniform, achievements[0])
    } else {
        [
            fill(&templates.weakest, achievements[bottom[0]]),
            fill(&templates.strongest, achievements[top[0]]),
            fill(&templates.ranking, 0.0),
        ]
        .join(" ")
    };

    Advice {
        strongest,
        weakest,
        ranking,
        text,
    }
}

fn join_names(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistogramLevel {
    Domain,
    Control,
}

impl FromStr for HistogramLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "domain" => Ok(HistogramLevel::Domain),
            "control" => Ok(HistogramLevel::Control),
            other => Err(format!("unknown histogram level `{other}` (expected domain or control)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBar {
    pub node_id: String,
    pub name: String,
    pub achievement: f64,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSeries {
    pub level: HistogramLevel,
    pub scale_max: i64,
    pub bars: Vec<HistogramBar>,
}

pub fn histogram_series<T: Scalar>(result: &AssessmentResult<T>, level: HistogramLevel) -> HistogramSeries {
    let bar = |n: &NodeResult<T>| HistogramBar {
        node_id: n.node_id.clone(),
        name: n.name.clone(),
        achievement: n.achievement.as_f64(),
        priority: n.priority.as_f64(),
    };
    let bars = match level {
        HistogramLevel::Domain => result.domains().iter().map(bar).collect(),
        HistogramLevel::Control => result
            .overall
            .walk()
            .filter(|n| n.kind == ResultKind::Control)
            .map(bar)
            .collect(),
    };
    HistogramSeries {
        level,
        scale_max: result.scale.max(),
        bars,
    }
}

/// Plain-text bar chart, one line per bar: achievement as `#`, priority as `.`.
pub fn render_bars(series: &HistogramSeries, scale: &Scale, width: usize) -> String {
    let label_width = series.bars.iter().map(|b| b.name.chars().count()).max().unwrap_or(0);
    let span = scale.span() as f64;
    let mut out = String::new();
    for b in &series.bars {
        let filled = (((b.achievement - scale.min() as f64) / span) * width as f64).round() as usize;
        let filled = filled.min(width);
        let _ = writeln!(
            out,
            "{:<label_width$}  {}{}  {}  (priority {})",
            b.name,
            "#".repeat(filled),
            ".".repeat(width - filled),
            fmt2(b.achievement),
            fmt2(b.priority),
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(format!("unknown export format `{other}` (expected json or csv)")),
        }
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "domain",
    "class",
    "control",
    "iso_ref",
    "control_achievement",
    "class_achievement",
    "domain_achievement",
    "overall",
];

/// Serialize a result. JSON carries the full tree at full precision; CSV has
/// one row per control with two-decimal values at every level.
pub fn export_result<T: Scalar + Serialize>(result: &AssessmentResult<T>, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(result).expect("result serializes");
            out.push(b'\n');
            out
        }
        ExportFormat::Csv => export_csv(result),
    }
}

fn export_csv<T: Scalar>(result: &AssessmentResult<T>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");

    let has_controls = result.overall.walk().any(|n| n.kind == ResultKind::Control);
    let overall = fmt2(result.overall.achievement.as_f64());
    let mut path: Vec<&NodeResult<T>> = Vec::new();
    let mut rows = Vec::new();
    collect_rows(&result.overall, has_controls, &mut path, &mut rows);
    for (row, ancestors) in rows {
        let nearest = |kind: ResultKind| ancestors.iter().rev().find(|n| n.kind == kind).copied();
        let domain = nearest(ResultKind::Domain);
        let class = nearest(ResultKind::Class);
        let value = |n: Option<&NodeResult<T>>| n.map(|n| fmt2(n.achievement.as_f64())).unwrap_or_default();
        let name = |n: Option<&NodeResult<T>>| n.map(|n| n.name.clone()).unwrap_or_default();
        w.write_record([
            name(domain),
            name(class),
            row.name.clone(),
            row.iso_ref.clone().unwrap_or_default(),
            value(Some(row)),
            value(class),
            value(domain),
            overall.clone(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

type Row<'a, T> = (&'a NodeResult<T>, Vec<&'a NodeResult<T>>);

fn collect_rows<'a, T>(
    node: &'a NodeResult<T>,
    has_controls: bool,
    path: &mut Vec<&'a NodeResult<T>>,
    rows: &mut Vec<Row<'a, T>>,
) {
    let is_row = if has_controls {
        node.kind == ResultKind::Control
    } else {
        node.kind != ResultKind::Overall
            && !node.children.is_empty()
            && node.children.iter().all(|c| c.kind == ResultKind::Issue)
    };
    if is_row {
        let mut lineage = path.clone();
        lineage.push(node);
        rows.push((node, lineage));
        return;
    }
    path.push(node);
    for c in &node.children {
        collect_rows(c, has_controls, path, rows);
    }
    path.pop();
}

/// Check that `summary` honours the predicate of its unrounded score.
pub fn summary_predicate_consistent<T: Scalar>(result: &AssessmentResult<T>, summary: &Summary) -> bool {
    predicate_of(result.overall.achievement, &result.scale)
        .map(|p| p == summary.predicate)
        .unwrap_or(false)
}
