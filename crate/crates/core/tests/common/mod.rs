#![allow(dead_code)]

pub mod chain;
pub mod gen;
pub mod oracle;

use flowmap::mapping::{apply_ground_truth, load_ground_truth, GroundTruthPair, MappingState, Workspace};
use flowmap::pm::extract_pm_dir;
use flowmap::secdfd::parse_secdfd;
use std::path::PathBuf;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Corpus `<name>/corpus` plus the given model files.
pub fn workspace(name: &str, models: &[&str]) -> Workspace {
    let pm = extract_pm_dir(&fixture(&format!("{name}/corpus"))).unwrap();
    let models = models
        .iter()
        .map(|m| parse_secdfd(&read(&format!("{name}/{m}"))).unwrap())
        .collect();
    Workspace::new(models, pm)
}

pub fn ground_truth(rel: &str) -> Vec<GroundTruthPair> {
    load_ground_truth(read(rel).as_bytes()).unwrap()
}

/// A state holding exactly the ground-truth mapping.
pub fn mapped(ws: &Workspace, gt_rel: &str) -> MappingState {
    let mut state = MappingState::new(ws);
    apply_ground_truth(ws, &mut state, &ground_truth(gt_rel)).unwrap();
    state
}

use flowmap::mapping::{Decision, EntryState};
use flowmap::taint::TaintMode;
use flowmap::workbench::{CheckKind, CreateSession, SessionStore};
use std::collections::BTreeMap;

pub fn create_request(name: &str) -> CreateSession {
    let crypto = fixture(&format!("{name}/crypto.list"));
    CreateSession {
        corpus: fixture(&format!("{name}/corpus")),
        models: vec![fixture(&format!("{name}/{name}.secdfd"))],
        crypto: crypto.exists().then_some(crypto),
        sources: Some(fixture(&format!("{name}/default.sources"))),
        sinks: Some(fixture(&format!("{name}/default.sinks"))),
    }
}

/// Creates a session, accepts every first-round suggestion, iterates, maps the
/// ground truth by hand, runs every check, and returns the canonical files.
pub fn full_pipeline(root: &std::path::Path, name: &str) -> BTreeMap<String, Vec<u8>> {
    let store = SessionStore::new(root);
    let mut s = store.create_with_id("pipeline", &create_request(name)).unwrap();
    for sug in s.suggestions() {
        if sug.state == EntryState::Suggested {
            s.decide(&sug.entry, Decision::Accept).unwrap();
        }
    }
    s.iterate();
    for p in ground_truth(&format!("{name}/{name}.gt.json")) {
        s.map(&p.dfd.to_string(), &p.pm).unwrap();
    }
    for kind in [CheckKind::Contracts, CheckKind::Crypto, CheckKind::Design] {
        s.check(kind).unwrap();
    }
    for mode in TaintMode::ALL {
        s.check(CheckKind::Taint(mode)).unwrap();
    }
    store.save(&s).unwrap();
    SessionStore::canonical_files()
        .iter()
        .map(|f| (f.to_string(), std::fs::read(root.join("pipeline").join(f)).unwrap()))
        .collect()
}
