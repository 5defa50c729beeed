mod support;

use std::path::Path;
use std::process::{Command, Output};

use isol_core::{builtin_iso27001, Mode, ScoreSheet};
use isol_store::{Catalog, ManualClock, Store};
use support::*;

fn isol(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("ISOL_TAXONOMY")
        .env_remove("ISOL_STORE")
        .env_remove("ISOL_MODE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_sheet(dir: &Path, name: &str, sheet: &ScoreSheet) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(sheet).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_bundled_and_broken_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = isol(&["validate"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("6 domains, 21 controls"));

    let doc = isol_core::builtin::builtin_iso27001_document().replacen("\"12.2.2\"", "\"12.2.1\"", 1);
    std::fs::write(dir.path().join("dup.json"), doc).unwrap();
    let o = isol(&["validate", "--taxonomy", "dup.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("12.2.1"));

    let o = isol(&["validate", "--taxonomy", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let mut t = builtin_iso27001();
    t.domains[0].children[0].children[0].children.clear();
    std::fs::write(dir.path().join("empty.json"), t.to_json()).unwrap();
    let o = isol(&["validate", "--taxonomy", "empty.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("error [EmptyNode] 5.1.1"));
}

#[test]
fn assess_headlines_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let t = builtin_iso27001();
    let all3 = write_sheet(dir.path(), "all3.json", &ScoreSheet::uniform(&t, 3));
    let all4 = write_sheet(dir.path(), "all4.json", &ScoreSheet::uniform(&t, 4));

    let o = isol(&["assess", "--sheet", &all3], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("3.00 / 4 — 75.00% — above average"));
    let o = isol(&["assess", "--sheet", &all4], dir.path());
    assert_eq!(stdout(&o).lines().next(), Some("4.00 / 4 — 100.00% — excellent"));

    let mut missing = ScoreSheet::uniform(&t, 3);
    let mut entries: Vec<(String, i64)> = missing.iter().map(|(k, v)| (k.to_string(), v)).collect();
    let dropped = entries.remove(7).0;
    missing = entries.into_iter().collect();
    let p = write_sheet(dir.path(), "missing.json", &missing);
    let o = isol(&["assess", "--sheet", &p], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&dropped));
    let o = isol(&["assess", "--sheet", &p, "--mode", "partial"], dir.path());
    assert_eq!(o.status.code(), Some(0));

    let mut bad = ScoreSheet::uniform(&t, 3);
    bad.insert("5.1.1-q1", 7);
    let p = write_sheet(dir.path(), "bad.json", &bad);
    assert_eq!(isol(&["assess", "--sheet", &p], dir.path()).status.code(), Some(1));

    std::fs::write(dir.path().join("garbage.csv"), "5.1.1-q1,lots\n").unwrap();
    assert_eq!(isol(&["assess", "--sheet", "garbage.csv"], dir.path()).status.code(), Some(2));
    assert_eq!(isol(&["assess", "--sheet", "absent.json"], dir.path()).status.code(), Some(2));
    assert_eq!(isol(&["assess"], dir.path()).status.code(), Some(2));
}

#[test]
fn assess_is_deterministic_and_accepts_csv() {
    let dir = tempfile::tempdir().unwrap();
    let t = builtin_iso27001();
    let sheet: ScoreSheet = t.issues().enumerate().map(|(i, q)| (q.id.clone(), (i % 5) as i64)).collect();
    let json = write_sheet(dir.path(), "s.json", &sheet);
    let mut csv = String::from("id,score\n");
    for (k, v) in sheet.iter() {
        csv.push_str(&format!("{k},{v}\n"));
    }
    std::fs::write(dir.path().join("s.csv"), csv).unwrap();
    for fmt in ["text", "csv", "json"] {
        let a = isol(&["assess", "--sheet", &json, "--format", fmt], dir.path());
        let b = isol(&["assess", "--sheet", &json, "--format", fmt], dir.path());
        let at = "2026-05-01T08:00:00Z";
        let c = isol(&["assess", "--sheet", "s.csv", "--format", fmt, "--at", at], dir.path());
        let d = isol(&["assess", "--sheet", &json, "--format", fmt, "--at", at], dir.path());
        assert_eq!(c.stdout, d.stdout);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
        if fmt != "json" {
            assert_eq!(a.stdout, c.stdout);
        }
    }
    let o = isol(&["assess", "--sheet", &json, "--format", "csv", "--out", "r.csv"], dir.path());
    assert!(stdout(&o).contains(" / 4 — "));
    let written = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(written.lines().count(), 22);
}

#[test]
fn history_and_export_from_store() {
    use chrono::{Duration, TimeZone, Utc};
    let dir = tempfile::tempdir().unwrap();
    let store_path = dir.path().join("store.jsonl");
    let t = builtin_iso27001();
    let clock = std::sync::Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2026, 5, 1, 8, 0, 0).unwrap()));
    let fid = {
        let s = Store::open_with_clock(&store_path, Catalog::with_builtin(), clock.clone()).unwrap();
        let u = s.register_user("auditor1", "s3cret").unwrap();
        s.register_user("newbie", "s3cret").unwrap();
        let mut last = String::new();
        for score in [1, 2, 3] {
            let e = s.start_experiment(&u.id, "iso27001").unwrap();
            s.record_scores(&e.id, &ScoreSheet::uniform(&t, score)).unwrap();
            clock.advance(Duration::minutes(45));
            s.finalize_experiment(&e.id, Mode::Strict).unwrap();
            last = e.id;
        }
        last
    };
    let store = store_path.to_string_lossy().into_owned();

    let o = isol(&["history", "--user", "newbie", "--store", &store], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);

    let o = isol(&["history", "--user", "auditor1", "--store", &store], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).take(3).collect();
    for (i, r) in rows.iter().enumerate() {
        assert!(r.trim_start().starts_with(&(i + 1).to_string()), "{r}");
        assert!(r.contains("45.0"), "{r}");
    }
    assert!(out.contains("trend: 1.00 -> 2.00 -> 3.00"));

    assert_eq!(isol(&["history", "--user", "ghost", "--store", &store], dir.path()).status.code(), Some(1));

    let o = isol(&["export", "--store", &store, "--experiment", &fid, "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with("3.00,3.00,3.00,3.00"));
    let o = isol(&["export", "--store", &store, "--all"], dir.path());
    let all: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(all.as_array().unwrap().len(), 3);
}

#[test]
fn env_configures_store_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    {
        let s = Store::open(dir.path().join("env.jsonl"), Catalog::with_builtin()).unwrap();
        s.register_user("from-env", "x").unwrap();
    }
    let run = |extra: &[&str]| {
        Command::new(BIN)
            .args(["history", "--user", "from-env"])
            .args(extra)
            .current_dir(dir.path())
            .env("ISOL_STORE", "env.jsonl")
            .output()
            .unwrap()
    };
    assert_eq!(run(&[]).status.code(), Some(0));
    assert_eq!(run(&["--store", "flag.jsonl"]).status.code(), Some(1));
}

#[test]
fn serve_shuts_down_cleanly_on_sigterm() {
    let dir = tempfile::tempdir().unwrap();
    let (mut child, addr) = spawn_server(&dir.path().join("s.jsonl"));
    let (status, body) = http(&addr, "GET", "/api/taxonomies/iso27001", None, None);
    assert_eq!(status, 200);
    assert_eq!(json_field(&body, "id"), "iso27001");
    sigterm(&child);
    assert_eq!(child.wait().unwrap().code(), Some(0));
}

#[test]
fn serve_fails_on_occupied_port() {
    let dir = tempfile::tempdir().unwrap();
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let o = isol(&["serve", "--bind", &addr, "--store", "s.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot bind"));
}
