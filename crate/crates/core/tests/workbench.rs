mod common;

use flowmap::mapping::{Decision, EntryState};
use flowmap::taint::TaintMode;
use flowmap::workbench::{CheckKind, CryptoEntryInput, ServiceError, SessionStore};

fn store() -> (tempfile::TempDir, SessionStore) {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::new(dir.path());
    (dir, store)
}

#[test]
fn new_session_has_suggestions_and_reloads_identically() {
    let (_d, store) = store();
    let s = store.create(&common::create_request("securestore")).unwrap();
    assert!(!s.suggestions().is_empty());
    let back = store.open(&s.meta.id).unwrap();
    assert_eq!(back.suggestions(), s.suggestions());
    assert_eq!(store.list().unwrap(), vec![back.meta.clone()]);
}

#[test]
fn bad_model_reports_the_offending_file() {
    let (_d, store) = store();
    let mut req = common::create_request("vault");
    req.models.push(common::fixture("vault/crypto.list"));
    match store.create(&req) {
        Err(ServiceError::Parse(files)) => {
            assert_eq!(files.len(), 1);
            assert!(files[0].file.ends_with("crypto.list"), "{files:?}");
        }
        other => panic!("{other:?}"),
    }
    assert!(store.list().unwrap().is_empty());
}

#[test]
fn failed_decision_leaves_the_session_unchanged() {
    let (_d, store) = store();
    let s = store.create(&common::create_request("vault")).unwrap();
    let dir = store.dir(&s.meta.id).unwrap();
    let before = std::fs::read(dir.join("mapping.json")).unwrap();
    let err = store.update(&s.meta.id, |s| s.decide("e9999", Decision::Accept)).unwrap_err();
    assert_eq!(err.code(), "not_found");
    assert_eq!(std::fs::read(dir.join("mapping.json")).unwrap(), before);
    let err = store.update(&s.meta.id, |s| s.map("vault/Client", "type:vault.Record")).unwrap_err();
    assert_eq!(err.code(), "bad_request");
    assert_eq!(std::fs::read(dir.join("mapping.json")).unwrap(), before);
}

#[test]
fn decisions_survive_a_restart() {
    let (_d, store) = store();
    let s = store.create(&common::create_request("vault")).unwrap();
    let first = s.suggestions()[0].entry.clone();
    store.update(&s.meta.id, |s| s.decide(&first, Decision::Accept)).unwrap();
    let back = store.open(&s.meta.id).unwrap();
    assert_eq!(back.state.entry(&first).unwrap().state, EntryState::Accepted);
}

#[test]
fn compliant_fixture_has_no_contract_findings() {
    let (_d, store) = store();
    let mut s = store.create(&common::create_request("vault")).unwrap();
    for p in common::ground_truth("vault/vault.gt.json") {
        s.map(&p.dfd.to_string(), &p.pm).unwrap();
    }
    // drop the heuristic entries so only the ground truth is active
    let pending: Vec<String> = s.state.entries.iter().filter(|e| e.state == EntryState::Suggested).map(|e| e.id.clone()).collect();
    for id in pending {
        let _ = s.decide(&id, Decision::Reject);
    }
    assert!(s.check(CheckKind::Contracts).unwrap().findings.is_empty());
}

#[test]
fn taint_needs_a_mapping_unless_plain() {
    let (_d, store) = store();
    let mut s = store.create(&common::create_request("securestore")).unwrap();
    let err = s.check(CheckKind::Taint(TaintMode::PartlyOpt)).unwrap_err();
    assert_eq!(err.code(), "precondition_failed");
    let r = s.check(CheckKind::Taint(TaintMode::Plain)).unwrap();
    assert_eq!(r.findings.len(), 5);
}

#[test]
fn finding_ids_are_stable_across_reloads() {
    let (_d, store) = store();
    let s = store.create(&common::create_request("securestore")).unwrap();
    let id = s.meta.id.clone();
    let a = store.update(&id, |s| s.check(CheckKind::Taint(TaintMode::Plain))).unwrap();
    let b = store.update(&id, |s| s.check(CheckKind::Taint(TaintMode::Plain))).unwrap();
    assert_eq!(a, b);
    assert_eq!(store.open(&id).unwrap().violations(), a.findings);
}

#[test]
fn crypto_list_updates_are_validated_and_used() {
    let (_d, store) = store();
    let mut s = store.create(&common::create_request("vault")).unwrap();
    for p in common::ground_truth("vault/vault.gt.json") {
        s.map(&p.dfd.to_string(), &p.pm).unwrap();
    }
    let base = s.crypto_list();
    assert_eq!(s.set_crypto_entries(&[]).unwrap(), base);
    let bad = s
        .set_crypto_entries(&[CryptoEntryInput { capability: "enc".into(), pattern: "vault.Crypto.lock(".into() }])
        .unwrap_err();
    assert_eq!(bad.code(), "bad_request");
    assert_eq!(bad.detail()["entry"], 0);
    assert_eq!(s.crypto_list(), base);
    let list = s
        .set_crypto_entries(&[CryptoEntryInput { capability: "both".into(), pattern: "vault.Crypto.unlock(*):*".into() }])
        .unwrap();
    assert_eq!(list.entries.len(), base.entries.len() + 1);
}

#[test]
fn save_is_canonical() {
    let (d, store) = store();
    store.create_with_id("one", &common::create_request("atm")).unwrap();
    let read = |f: &str| std::fs::read(d.path().join("one").join(f)).unwrap();
    let before: Vec<Vec<u8>> = SessionStore::canonical_files().iter().map(|f| read(f)).collect();
    store.save(&store.open("one").unwrap()).unwrap();
    let after: Vec<Vec<u8>> = SessionStore::canonical_files().iter().map(|f| read(f)).collect();
    assert_eq!(before, after);
    assert!(!read("mapping.json").windows(9).any(|w| w == b"createdAt"));
}

#[test]
fn two_pipeline_runs_are_byte_identical() {
    for name in ["securestore", "vault", "atm"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ra = common::full_pipeline(a.path(), name);
        let rb = common::full_pipeline(b.path(), name);
        assert_eq!(ra.keys().collect::<Vec<_>>(), rb.keys().collect::<Vec<_>>());
        for (f, bytes) in &ra {
            assert!(bytes == &rb[f], "{name}: {f} differs");
        }
    }
}

#[test]
fn unknown_session_is_not_found() {
    let (_d, store) = store();
    assert_eq!(store.open("nope").unwrap_err().code(), "not_found");
    assert_eq!(store.open("../etc").unwrap_err().code(), "not_found");
}
