mod common;

use common::gen;
use flowmap::pm::{extract_pm, extract_pm_dir, in_flows, load_pm, out_flows, reachable_bwd, save_pm, FlowKind};
use proptest::prelude::*;
use serde_json::Value;
use std::collections::BTreeSet;

const GET: &str = "def:securestore.SecurePreferences.get(String,String):String";
const GET_PASSWORD: &str =
    "def:securestore.PasswordProvider.getPassword(securestore.PreferencesContainer,boolean):securestore.PasswordExt";

/// Counts declarations and call sites by walking the corpus text line by line.
fn walk_lines(dir: &std::path::Path) -> (usize, usize, usize, usize) {
    let (mut types, mut fields, mut defs, mut calls) = (0, 0, 0, 0);
    let mut files: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    for f in files {
        for line in std::fs::read_to_string(f).unwrap().lines() {
            let t = line.trim();
            if t.starts_with("//") {
                continue;
            }
            if t.starts_with("type ") {
                types += 1;
            } else if t.starts_with("field ") {
                fields += 1;
            } else if t.starts_with("def ") {
                defs += 1;
            } else {
                // `name(` preceded by an identifier character is a call, unless it is `new T(`
                let bytes = t.as_bytes();
                for (i, &b) in bytes.iter().enumerate() {
                    if b == b'(' && i > 0 && (bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'_') {
                        let start = t[..i].rfind(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).map_or(0, |p| p + 1);
                        if !t[..start].trim_end().ends_with("new") {
                            calls += 1;
                        }
                    }
                }
            }
        }
    }
    (types, fields, defs, calls)
}

#[test]
fn securestore_counts_match_manifest() {
    let pm = extract_pm_dir(&common::fixture("securestore/corpus")).unwrap();
    let manifest: Value = serde_json::from_str(&common::read("securestore/counts.json")).unwrap();
    let n = |k: &str| manifest[k].as_u64().unwrap() as usize;
    assert_eq!(pm.types.len(), n("types"));
    assert_eq!(pm.method_names.len(), n("methodNames"));
    assert_eq!(pm.signatures.len(), n("signatures"));
    assert_eq!(pm.definitions.len(), n("definitions"));
    assert_eq!(pm.fields.len(), n("fields"));
    assert_eq!(pm.calls.len(), n("calls"));
    assert_eq!(pm.flows.len(), n("flows"));
    for (kind, name) in [(FlowKind::Intra, "INTRA"), (FlowKind::ParamPass, "PARAM_PASS"), (FlowKind::ReturnFlow, "RETURN_FLOW")] {
        let got = pm.flows.iter().filter(|e| e.kind == kind).count();
        assert_eq!(got, manifest["flowsByKind"][name].as_u64().unwrap() as usize, "{name}");
    }

    // the manifest itself agrees with a plain walk over the source lines
    let (types, fields, defs, calls) = walk_lines(&common::fixture("securestore/corpus"));
    assert_eq!(types, n("declaredTypes"));
    assert_eq!(fields, n("fields"));
    assert_eq!(defs, n("definitions"));
    assert_eq!(calls, n("calls"));
}

#[test]
fn save_load_identity_on_every_fixture() {
    for name in ["securestore", "vault", "atm", "relay"] {
        let pm = extract_pm_dir(&common::fixture(&format!("{name}/corpus"))).unwrap();
        let bytes = save_pm(&pm);
        let back = load_pm(&bytes).unwrap();
        assert_eq!(back, pm, "{name}");
        assert_eq!(save_pm(&back), bytes, "{name}");
    }
}

#[test]
fn truncated_interchange_is_rejected() {
    let pm = extract_pm_dir(&common::fixture("securestore/corpus")).unwrap();
    let bytes = save_pm(&pm);
    assert!(load_pm(&bytes[..bytes.len() / 2]).is_err());
}

#[test]
fn get_receives_the_password_return() {
    let pm = extract_pm_dir(&common::fixture("securestore/corpus")).unwrap();
    let defs = BTreeSet::from([GET.to_string()]);
    let ins = in_flows(&pm, &defs).unwrap();
    assert!(ins.iter().any(|e| e.kind == FlowKind::ReturnFlow && e.from.owner() == Some(GET_PASSWORD)));
    // and its own return leaves towards the plugin
    let outs = out_flows(&pm, &defs).unwrap();
    assert!(outs.iter().any(|e| e.kind == FlowKind::ReturnFlow && e.from.owner() == Some(GET)));
}

#[test]
fn four_definition_fixture_edge_classification() {
    let src = "type T { field s: String;\n\
        def a(x: String): String { let y = b(x); return c(y); }\n\
        def b(x: String): String { return x; }\n\
        def c(x: String): String { this.s = x; return this.s; }\n\
        def d(): void { let r = a(\"\"); } }\n";
    let pm = extract_pm(&[("t.mini".into(), src.into())]).unwrap();
    let a = "def:T.a(String):String";
    let defs = BTreeSet::from([a.to_string()]);
    // brute-force classification over every edge
    let owner_in = |ep: &flowmap::pm::Endpoint| ep.owner() == Some(a);
    let expected_in: BTreeSet<String> = pm
        .flows
        .iter()
        .filter(|e| e.kind != FlowKind::Intra && owner_in(&e.to) && !owner_in(&e.from))
        .map(|e| e.id.clone())
        .collect();
    let expected_out: BTreeSet<String> = pm
        .flows
        .iter()
        .filter(|e| e.kind != FlowKind::Intra && owner_in(&e.from) && !owner_in(&e.to))
        .map(|e| e.id.clone())
        .collect();
    let got_in: BTreeSet<String> = in_flows(&pm, &defs).unwrap().into_iter().map(|e| e.id).collect();
    let got_out: BTreeSet<String> = out_flows(&pm, &defs).unwrap().into_iter().map(|e| e.id).collect();
    assert_eq!(got_in, expected_in);
    assert_eq!(got_out, expected_out);
    // two returns into a, two arguments out of it plus its own return to d
    assert_eq!((got_in.len(), got_out.len()), (2, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn in_and_out_flows_partition_interprocedural_edges(plan in gen::plan(6, 6), pick in any::<u64>()) {
        let pm = extract_pm(&[("gen.mini".into(), gen::render(&plan))]).unwrap();
        let defs: BTreeSet<String> = pm
            .definitions
            .iter()
            .enumerate()
            .filter(|(i, _)| pick >> (i % 64) & 1 == 1)
            .map(|(_, d)| d.id.clone())
            .collect();
        let ins: BTreeSet<String> = in_flows(&pm, &defs).unwrap().into_iter().map(|e| e.id).collect();
        let outs: BTreeSet<String> = out_flows(&pm, &defs).unwrap().into_iter().map(|e| e.id).collect();
        prop_assert!(ins.is_disjoint(&outs));
        for e in pm.flows.iter().filter(|e| e.kind != FlowKind::Intra) {
            let from_in = e.from.owner().is_some_and(|o| defs.contains(o));
            let to_in = e.to.owner().is_some_and(|o| defs.contains(o));
            let crosses = from_in != to_in;
            prop_assert_eq!(crosses, ins.contains(&e.id) || outs.contains(&e.id));
        }
    }

    #[test]
    fn reachable_bwd_is_a_monotone_subset(plan in gen::plan(6, 6), pick in any::<u64>(), extra in any::<u64>()) {
        let pm = extract_pm(&[("gen.mini".into(), gen::render(&plan))]).unwrap();
        let select = |mask: u64| -> BTreeSet<String> {
            pm.definitions.iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, d)| d.id.clone()).collect()
        };
        let small = select(pick);
        let large: BTreeSet<String> = small.union(&select(extra)).cloned().collect();
        let cands = in_flows(&pm, &small).unwrap();
        for t in out_flows(&pm, &small).unwrap() {
            let r = reachable_bwd(&pm, &t, &cands, &small);
            let ids: BTreeSet<&str> = r.iter().map(|e| e.id.as_str()).collect();
            prop_assert!(ids.iter().all(|id| cands.iter().any(|c| c.id == *id)));
            // widening the scope never loses a source
            let wide: BTreeSet<String> = reachable_bwd(&pm, &t, &cands, &large).into_iter().map(|e| e.id).collect();
            prop_assert!(ids.iter().all(|id| wide.contains(*id)));
        }
    }

    #[test]
    fn random_corpora_round_trip(plan in gen::plan(6, 6)) {
        let pm = extract_pm(&[("gen.mini".into(), gen::render(&plan))]).unwrap();
        prop_assert_eq!(load_pm(&save_pm(&pm)).unwrap(), pm);
    }
}
