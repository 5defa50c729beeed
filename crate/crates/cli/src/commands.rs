use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use isol_core::reporting::render_bars;
use isol_core::{
    builtin_iso27001, evaluate_at, export_result, histogram_series, parse_taxonomy, summarize,
    validate_taxonomy, AssessmentResult, ExportFormat, HistogramLevel, Mode, Severity, Taxonomy,
};
use isol_store::{Catalog, Store};

use crate::sheet::parse_sheet;
use crate::OutFormat;

/// Exit 1 for domain errors, 2 for I/O and usage errors.
#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> std::process::ExitCode {
        match self {
            CliError::Domain(_) => 1.into(),
            CliError::Io(_) => 2.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<isol_store::StoreError> for CliError {
    fn from(e: isol_store::StoreError) -> Self {
        match e {
            isol_store::StoreError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> CliResult {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn load_taxonomy(path: Option<&Path>) -> Result<Taxonomy, CliError> {
    match path {
        None => Ok(builtin_iso27001()),
        Some(p) => parse_taxonomy(&read(p)?).map_err(|e| CliError::Domain(e.to_string())),
    }
}

fn catalog(path: Option<&Path>) -> Result<Catalog, CliError> {
    let mut c = Catalog::with_builtin();
    if let Some(p) = path {
        c.insert(load_taxonomy(Some(p))?)
            .map_err(|errs| CliError::Domain(format!("invalid taxonomy: {}", errs.join("; "))))?;
    }
    Ok(c)
}

pub fn validate(path: Option<&Path>) -> CliResult {
    let t = load_taxonomy(path)?;
    let report = validate_taxonomy(&t);
    let counts = t.counts();
    println!(
        "taxonomy {} v{}: {} domains, {} controls, {} issues",
        t.id, t.version, counts.domains, counts.controls, counts.issues
    );
    for (name, n) in t.controls_per_domain() {
        println!("  {name}: {n} control(s)");
    }
    for i in &report.issues {
        let sev = match i.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &i.node_id {
            Some(id) => println!("{sev} [{}] {id}: {}", i.code, i.message),
            None => println!("{sev} [{}] {}", i.code, i.message),
        }
    }
    if report.ok {
        println!("ok");
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "{} validation error(s)",
            report.errors().count()
        )))
    }
}

fn print_summary(result: &AssessmentResult) {
    let summary = summarize(result);
    println!("{}", summary.headline());
    println!("{}", summary.advice.text);
}

pub fn assess(
    taxonomy: Option<&Path>,
    sheet_path: &Path,
    mode: Mode,
    format: OutFormat,
    out: Option<&Path>,
    at: Option<&str>,
) -> CliResult {
    let t = load_taxonomy(taxonomy)?;
    let at: DateTime<Utc> = match at {
        Some(s) => DateTime::parse_from_rfc3339(s)
            .map_err(|e| CliError::Io(format!("--at {s}: {e}")))?
            .with_timezone(&Utc),
        None => std::fs::metadata(sheet_path)
            .and_then(|m| m.modified())
            .map_err(|e| CliError::Io(format!("{}: {e}", sheet_path.display())))?
            .into(),
    };
    let text = String::from_utf8(read(sheet_path)?)
        .map_err(|_| CliError::Io(format!("{} is not UTF-8", sheet_path.display())))?;
    let sheet = parse_sheet(&text).map_err(CliError::Io)?;
    let result: AssessmentResult = evaluate_at(&t, &sheet, mode, at).map_err(|e| CliError::Domain(e.to_string()))?;
    let export = match format {
        OutFormat::Text => None,
        OutFormat::Json => Some(ExportFormat::Json),
        OutFormat::Csv => Some(ExportFormat::Csv),
    };
    match (export, out) {
        (Some(f), None) => write_out(None, &export_result(&result, f)),
        (Some(f), Some(p)) => {
            write_out(Some(p), &export_result(&result, f))?;
            print_summary(&result);
            Ok(())
        }
        (None, out) => {
            print_summary(&result);
            println!();
            let series = histogram_series(&result, HistogramLevel::Domain);
            print!("{}", render_bars(&series, &result.scale, 20));
            if let Some(p) = out {
                write_out(Some(p), &export_result(&result, ExportFormat::Json))?;
            }
            Ok(())
        }
    }
}

pub fn serve(taxonomy: Option<&Path>, store: &Path, bind: String, static_dir: Option<PathBuf>) -> CliResult {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("ISOL_LOG").unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let config = isol_http::ServerConfig {
        bind,
        store_path: store.to_path_buf(),
        catalog: catalog(taxonomy)?,
        static_dir,
    };
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    rt.block_on(async {
        let bound = isol_http::bind(config).await.map_err(|e| CliError::Domain(e.to_string()))?;
        let addr = bound.local_addr().map_err(|e| CliError::Io(e.to_string()))?;
        println!("listening on http://{addr}");
        let _ = std::io::stdout().flush();
        bound
            .run(isol_http::shutdown_signal())
            .await
            .map_err(|e| CliError::Domain(e.to_string()))
    })
}

pub fn history(taxonomy: Option<&Path>, store_path: &Path, username: &str, taxonomy_id: Option<&str>) -> CliResult {
    let catalog = catalog(taxonomy)?;
    let taxonomy_id = match (taxonomy_id, taxonomy) {
        (Some(id), _) => id.to_string(),
        (None, Some(p)) => load_taxonomy(Some(p))?.id,
        (None, None) => isol_core::ISO27001_ID.to_string(),
    };
    let store = Store::open(store_path, catalog)?;
    let user = store
        .user_by_name(username)
        .ok_or_else(|| CliError::Domain(format!("unknown user `{username}`")))?;
    let view = store.history(&user.id, &taxonomy_id);
    println!("{:>7}  {:<20}  {:>8}  {:>7}  predicate", "attempt", "started", "minutes", "overall");
    for r in &view.rows {
        println!(
            "{:>7}  {:<20}  {:>8.1}  {:>7}  {}",
            r.attempt_number,
            r.started_at.format("%Y-%m-%d %H:%M:%S"),
            r.duration_seconds as f64 / 60.0,
            isol_core::fmt2(r.overall),
            r.predicate
        );
    }
    if !view.rows.is_empty() {
        let trend: Vec<String> = view.trend.iter().map(|v| isol_core::fmt2(*v)).collect();
        println!();
        println!("trend: {}", trend.join(" -> "));
        let scale = view
            .rows
            .first()
            .and_then(|r| store.experiment(&r.experiment_id).ok())
            .and_then(|e| e.result.map(|r| r.scale))
            .unwrap_or_default();
        let ideal = scale.max() as f64;
        let series = isol_core::HistogramSeries {
            level: HistogramLevel::Domain,
            scale_max: scale.max(),
            bars: view
                .rows
                .iter()
                .map(|r| isol_core::reporting::HistogramBar {
                    node_id: r.experiment_id.clone(),
                    name: format!("#{}", r.attempt_number),
                    achievement: r.overall,
                    priority: ideal - r.overall,
                })
                .collect(),
        };
        print!("{}", render_bars(&series, &scale, 20));
    }
    Ok(())
}

pub fn export(
    taxonomy: Option<&Path>,
    store_path: &Path,
    experiment: Option<&str>,
    format: OutFormat,
    out: Option<&Path>,
) -> CliResult {
    let store = Store::open(store_path, catalog(taxonomy)?)?;
    let Some(id) = experiment else {
        return write_out(out, &store.export_json());
    };
    let e = store.experiment(id)?;
    let result = e
        .result
        .ok_or_else(|| CliError::Domain(format!("experiment `{id}` is not finalized")))?;
    let f = match format {
        OutFormat::Csv => ExportFormat::Csv,
        OutFormat::Json | OutFormat::Text => ExportFormat::Json,
    };
    write_out(out, &export_result(&result, f))
}
