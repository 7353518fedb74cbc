use super::{TaintConfig, TaintMode};
use crate::pm::{Endpoint, FlowKind, ProgramModel};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaintAlarm {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asset: Option<String>,
    pub source: String,
    pub sink: String,
    /// Edge ids from the source to the call into the sink.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaintResult {
    pub alarms: Vec<TaintAlarm>,
    /// Configured signatures with no definition in the program model.
    pub unresolved: Vec<String>,
}

impl TaintResult {
    /// Unique (source, sink) pairs, whatever the asset.
    pub fn unique_pairs(&self) -> BTreeSet<(String, String)> {
        self.alarms
            .iter()
            .map(|a| (a.source.clone(), a.sink.clone()))
            .collect()
    }
}

struct Resolver<'a> {
    by_qsig: BTreeMap<String, &'a str>,
}

impl<'a> Resolver<'a> {
    fn new(pm: &'a ProgramModel) -> Self {
        Resolver {
            by_qsig: pm
                .definitions
                .iter()
                .filter_map(|d| pm.qualified_signature(&d.id).map(|q| (q, d.id.as_str())))
                .collect(),
        }
    }

    fn resolve(&self, sigs: &BTreeSet<String>, unresolved: &mut BTreeSet<String>) -> Vec<(String, &'a str)> {
        let mut out = Vec::new();
        for s in sigs {
            match self.by_qsig.get(s) {
                Some(d) => out.push((s.clone(), *d)),
                None => {
                    unresolved.insert(s.clone());
                }
            }
        }
        out
    }
}

/// Forward propagation from one source definition; returns the first witness
/// found for every sink definition reached through a parameter.
fn from_source(pm: &ProgramModel, source: &str, sinks: &BTreeMap<&str, String>) -> BTreeMap<String, Vec<String>> {
    let mut parent: BTreeMap<Endpoint, Option<(Endpoint, String)>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let arity = pm
        .definition(source)
        .and_then(|d| pm.signature(&d.signature))
        .map_or(0, |s| s.params.len());
    for k in 0..arity {
        let ep = Endpoint::Param(source.to_string(), k as u32);
        parent.insert(ep.clone(), None);
        queue.push_back(ep);
    }
    // a root, so that flowing back into it cannot close a parent cycle
    let ret = Endpoint::Return(source.to_string());
    parent.insert(ret.clone(), None);
    for e in pm.flows_from(&ret).filter(|e| e.kind == FlowKind::ReturnFlow) {
        if !parent.contains_key(&e.to) {
            parent.insert(e.to.clone(), Some((ret.clone(), e.id.clone())));
            queue.push_back(e.to.clone());
        }
    }
    let witness = |parent: &BTreeMap<Endpoint, Option<(Endpoint, String)>>, mut at: Endpoint| {
        let mut path = Vec::new();
        while let Some(Some((prev, edge))) = parent.get(&at) {
            path.push(edge.clone());
            at = prev.clone();
        }
        path.reverse();
        path
    };
    let mut found = BTreeMap::new();
    while let Some(ep) = queue.pop_front() {
        for e in pm.flows_from(&ep) {
            if e.kind == FlowKind::ParamPass {
                if let Some(sink) = e.to.owner().and_then(|o| sinks.get(o)) {
                    if !found.contains_key(sink) {
                        let mut w = witness(&parent, ep.clone());
                        w.push(e.id.clone());
                        found.insert(sink.clone(), w);
                    }
                }
            }
            if !parent.contains_key(&e.to) {
                parent.insert(e.to.clone(), Some((ep.clone(), e.id.clone())));
                queue.push_back(e.to.clone());
            }
        }
    }
    found
}

fn run_one(
    pm: &ProgramModel,
    resolver: &Resolver,
    asset: Option<&str>,
    sources: &BTreeSet<String>,
    sinks: &BTreeSet<String>,
    cap: usize,
    unresolved: &mut BTreeSet<String>,
) -> Vec<TaintAlarm> {
    let srcs = resolver.resolve(sources, unresolved);
    let sink_defs: BTreeMap<&str, String> = resolver
        .resolve(sinks, unresolved)
        .into_iter()
        .map(|(q, d)| (d, q))
        .collect();
    let mut alarms = Vec::new();
    for (q, d) in srcs {
        for (sink, witness) in from_source(pm, d, &sink_defs) {
            alarms.push(TaintAlarm {
                asset: asset.map(str::to_string),
                source: q.clone(),
                sink,
                witness,
            });
        }
    }
    alarms.sort();
    alarms.truncate(cap);
    alarms
}

/// Runs the analysis: one global run for PLAIN, one run per asset otherwise.
/// Alarms are unique per (source, sink) within a run.
pub fn run_taint(pm: &ProgramModel, config: &TaintConfig) -> TaintResult {
    let resolver = Resolver::new(pm);
    let mut unresolved = BTreeSet::new();
    let alarms = if config.mode == TaintMode::Plain {
        run_one(
            pm,
            &resolver,
            None,
            &config.default_sources,
            &config.default_sinks,
            config.alarm_cap,
            &mut unresolved,
        )
    } else {
        let mut all = Vec::new();
        for (asset, policy) in &config.per_asset {
            all.extend(run_one(
                pm,
                &resolver,
                Some(asset),
                &policy.sources,
                &policy.sinks,
                config.alarm_cap,
                &mut unresolved,
            ));
        }
        all
    };
    TaintResult {
        alarms,
        unresolved: unresolved.into_iter().collect(),
    }
}
