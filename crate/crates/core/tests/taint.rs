mod common;

use common::{gen, oracle};
use flowmap::mapping::{MappingState, Workspace};
use flowmap::pm::{extract_pm, extract_pm_dir, FlowKind, ProgramModel};
use flowmap::taint::{build_config, compare_configs, run_taint, SigList, TaintConfig, TaintMode, TaintResult};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn sigs(pm: &ProgramModel, rel: &str) -> BTreeSet<String> {
    let (set, unresolved) = SigList::parse(&common::read(rel)).unwrap().resolve(pm);
    assert!(unresolved.is_empty(), "{rel}: {unresolved:?}");
    set
}

fn pairs_for(result: &TaintResult, asset: Option<&str>) -> BTreeSet<(String, String)> {
    result
        .alarms
        .iter()
        .filter(|a| a.asset.as_deref() == asset)
        .map(|a| (a.source.clone(), a.sink.clone()))
        .collect()
}

/// Every run of the configuration agrees with closure reachability.
fn assert_matches_oracle(pm: &ProgramModel, cfg: &TaintConfig) {
    let result = run_taint(pm, cfg);
    if cfg.mode == TaintMode::Plain {
        let want = oracle::reach_alarms(pm, &cfg.default_sources, &cfg.default_sinks);
        assert_eq!(pairs_for(&result, None), want);
    } else {
        for (key, policy) in &cfg.per_asset {
            let want = oracle::reach_alarms(pm, &policy.sources, &policy.sinks);
            assert_eq!(pairs_for(&result, Some(key)), want, "{key}");
        }
    }
    assert_witnesses_are_paths(pm, &result);
}

/// Witness edges chain up and end in an argument passed to the sink.
fn assert_witnesses_are_paths(pm: &ProgramModel, result: &TaintResult) {
    for a in &result.alarms {
        let edges: Vec<_> = a
            .witness
            .iter()
            .map(|id| pm.flows.iter().find(|e| &e.id == id).unwrap())
            .collect();
        let last = edges.last().expect("non-empty witness");
        assert_eq!(last.kind, FlowKind::ParamPass);
        let sink_def = pm
            .definitions
            .iter()
            .find(|d| pm.qualified_signature(&d.id).as_deref() == Some(a.sink.as_str()))
            .unwrap();
        assert_eq!(last.to.owner(), Some(sink_def.id.as_str()));
        for w in edges.windows(2) {
            assert_eq!(w[0].to, w[1].from, "{:?}", a.witness);
        }
    }
}

fn fixture_setup(name: &str) -> (Workspace, MappingState, BTreeSet<String>, BTreeSet<String>) {
    let ws = common::workspace(name, &[&format!("{name}.secdfd")]);
    let st = common::mapped(&ws, &format!("{name}/{name}.gt.json"));
    let src = sigs(&ws.pm, &format!("{name}/default.sources"));
    let snk = sigs(&ws.pm, &format!("{name}/default.sinks"));
    (ws, st, src, snk)
}

#[test]
fn every_mode_matches_reachability_on_fixtures() {
    for name in ["securestore", "vault", "atm"] {
        let (ws, st, src, snk) = fixture_setup(name);
        for mode in TaintMode::ALL {
            assert_matches_oracle(&ws.pm, &build_config(mode, &ws, &st, &src, &snk));
        }
    }
}

#[test]
fn relay_plain_matches_reachability() {
    let pm = extract_pm_dir(&common::fixture("relay/corpus")).unwrap();
    let cfg = TaintConfig {
        mode: TaintMode::Plain,
        default_sources: sigs(&pm, "relay/default.sources"),
        default_sinks: sigs(&pm, "relay/default.sinks"),
        per_asset: Default::default(),
        alarm_cap: 1000,
    };
    let result = run_taint(&pm, &cfg);
    assert!(!result.alarms.is_empty());
    assert_matches_oracle(&pm, &cfg);
}

#[test]
fn fully_optimised_alarms_are_a_subset_of_partly() {
    for name in ["securestore", "vault", "atm"] {
        let (ws, st, src, snk) = fixture_setup(name);
        let partly = build_config(TaintMode::PartlyOpt, &ws, &st, &src, &snk);
        let fully = build_config(TaintMode::FullyOpt, &ws, &st, &src, &snk);
        for (k, p) in &partly.per_asset {
            assert_eq!(p.sources, fully.per_asset[k].sources, "{k}");
        }
        let a = run_taint(&ws.pm, &partly);
        let b = run_taint(&ws.pm, &fully);
        let pa: BTreeSet<_> = a.alarms.iter().map(|x| (&x.asset, &x.source, &x.sink)).collect();
        let pb: BTreeSet<_> = b.alarms.iter().map(|x| (&x.asset, &x.source, &x.sink)).collect();
        assert!(pb.is_subset(&pa), "{name}");
    }
}

#[test]
fn securestore_comparison_reduces_alarms() {
    let (ws, st, src, snk) = fixture_setup("securestore");
    let cfgs: Vec<TaintConfig> = TaintMode::ALL
        .iter()
        .map(|&m| build_config(m, &ws, &st, &src, &snk))
        .collect();
    let report = compare_configs(&ws.pm, &["securestore".to_string()], &cfgs);

    // counts recomputed from the reachability oracle
    let oracle_count = |cfg: &TaintConfig| -> usize {
        if cfg.mode == TaintMode::Plain {
            oracle::reach_alarms(&ws.pm, &cfg.default_sources, &cfg.default_sinks).len()
        } else {
            cfg.per_asset
                .values()
                .flat_map(|p| oracle::reach_alarms(&ws.pm, &p.sources, &p.sinks))
                .collect::<BTreeSet<_>>()
                .len()
        }
    };
    let row = &report.rows[0];
    for cfg in &cfgs {
        assert_eq!(row.counts[&cfg.mode], oracle_count(cfg), "{}", cfg.mode);
    }
    let plain = row.counts[&TaintMode::Plain];
    let fully = row.counts[&TaintMode::FullyOpt];
    assert!(fully < plain, "{plain} -> {fully}");
    assert_eq!(
        (plain, row.counts[&TaintMode::PartlyOpt], fully),
        (5, 4, 2),
        "hand-predicted counts"
    );
    assert!(report.deltas[&TaintMode::FullyOpt].unwrap() < 0.0);
    assert_eq!(cfgs[2].removed_sinks(), 3);
}

#[test]
fn cached_getter_is_a_secret_source() {
    let (ws, st, src, snk) = fixture_setup("securestore");
    let cfg = build_config(TaintMode::PartlyOpt, &ws, &st, &src, &snk);
    let secret = &cfg.per_asset["securestore/secret"];
    assert!(secret.sources.contains("securestore.SecurePreferences.get(String,String):String"));
}

#[test]
fn unresolved_signatures_are_reported() {
    let pm = extract_pm_dir(&common::fixture("relay/corpus")).unwrap();
    let cfg = TaintConfig {
        mode: TaintMode::Plain,
        default_sources: BTreeSet::from(["relay.Nowhere.x():void".to_string()]),
        default_sinks: sigs(&pm, "relay/default.sinks"),
        per_asset: Default::default(),
        alarm_cap: 100,
    };
    let r = run_taint(&pm, &cfg);
    assert!(r.alarms.is_empty());
    assert_eq!(r.unresolved, vec!["relay.Nowhere.x():void".to_string()]);
}

#[test]
fn recursive_source_terminates() {
    let src = "type T {\n  def s(x: String): String { let v = s(x); k(v); return v; }\n  def k(y: String): void { }\n}\n";
    let pm = extract_pm(&[("t.mini".into(), src.into())]).unwrap();
    let cfg = TaintConfig {
        mode: TaintMode::Plain,
        default_sources: BTreeSet::from(["T.s(String):String".to_string()]),
        default_sinks: BTreeSet::from(["T.k(String):void".to_string()]),
        per_asset: Default::default(),
        alarm_cap: 100,
    };
    assert_eq!(run_taint(&pm, &cfg).alarms.len(), 1);
    assert_matches_oracle(&pm, &cfg);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_corpora_match_reachability(plan in gen::plan(6, 6), s in any::<u64>(), k in any::<u64>()) {
        let pm = extract_pm(&[("gen.mini".into(), gen::render(&plan))]).unwrap();
        let all: Vec<String> = pm.definitions.iter().filter_map(|d| pm.qualified_signature(&d.id)).collect();
        let pick = |mask: u64| -> BTreeSet<String> {
            all.iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, q)| q.clone()).collect()
        };
        let cfg = TaintConfig {
            mode: TaintMode::Plain,
            default_sources: pick(s),
            default_sinks: pick(k),
            per_asset: Default::default(),
            alarm_cap: 10_000,
        };
        assert_matches_oracle(&pm, &cfg);
    }
}
