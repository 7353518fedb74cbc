#![cfg(feature = "server")]

mod common;

use std::process::{Command, Output};

fn flowmap(home: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowmap"))
        .arg("--home")
        .arg(home)
        .args(args)
        .output()
        .unwrap()
}

fn fx(rel: &str) -> String {
    common::fixture(rel).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes_follow_the_outcome() {
    let home = tempfile::tempdir().unwrap();
    let h = home.path();
    let new = flowmap(
        h,
        &["session", "new", &fx("securestore/corpus"), &fx("securestore/securestore.secdfd"),
          "--sources", &fx("securestore/default.sources"), "--sinks", &fx("securestore/default.sinks")],
    );
    assert!(new.status.success(), "{}", String::from_utf8_lossy(&new.stderr));
    let id = stdout(&new).trim().to_string();

    // alarms found
    let check = flowmap(h, &["check", &id, "taint", "--mode", "plain"]);
    assert_eq!(check.status.code(), Some(2));
    assert!(stdout(&check).contains("5 finding(s)"));

    // nothing to report
    let check = flowmap(h, &["check", &id, "design"]);
    assert_eq!(check.status.code(), Some(0), "{}", stdout(&check));

    // errors
    assert_eq!(flowmap(h, &["decide", &id, "e9999", "accept"]).status.code(), Some(1));
    assert_eq!(flowmap(h, &["check", &id, "taint", "--mode", "fully"]).status.code(), Some(1));
    assert_eq!(flowmap(h, &["suggest", "missing"]).status.code(), Some(1));
}

#[test]
fn extract_and_eval() {
    let home = tempfile::tempdir().unwrap();
    let h = home.path();
    let out = h.join("pm.json");
    let o = flowmap(h, &["extract", &fx("vault/corpus"), "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let pm = flowmap::pm::load_pm(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(pm, flowmap::pm::extract_pm_dir(&common::fixture("vault/corpus")).unwrap());

    let new = flowmap(h, &["session", "new", &fx("vault/corpus"), &fx("vault/vault.secdfd")]);
    let id = stdout(&new).trim().to_string();
    let o = flowmap(h, &["--json", "eval", &id, "--ground-truth", &fx("vault/vault.gt.json")]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let gt = common::ground_truth("vault/vault.gt.json").len() as u64;
    assert_eq!(v["tp"].as_u64().unwrap() + v["fn"].as_u64().unwrap(), gt);
}

#[test]
fn inject_reports_every_candidate() {
    let home = tempfile::tempdir().unwrap();
    let h = home.path();
    let new = flowmap(h, &["session", "new", &fx("vault/corpus"), &fx("vault/vault.secdfd"), "--crypto", &fx("vault/crypto.list")]);
    let id = stdout(&new).trim().to_string();
    // heuristic suggestions are pending, so map the ground truth and drop the rest
    for p in common::ground_truth("vault/vault.gt.json") {
        assert!(flowmap(h, &["map", &id, &p.dfd.to_string(), &p.pm]).status.success());
    }
    let s = flowmap::workbench::SessionStore::new(h).open(&id).unwrap();
    let pending: Vec<String> = s
        .state
        .entries
        .iter()
        .filter(|e| e.state == flowmap::mapping::EntryState::Suggested)
        .map(|e| e.id.clone())
        .collect();
    for e in pending {
        let _ = flowmap(h, &["decide", &id, &e, "reject"]);
    }
    let o = flowmap(h, &["--json", "inject", &id]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 14);
    assert_eq!(v["fn"], 0);
}
