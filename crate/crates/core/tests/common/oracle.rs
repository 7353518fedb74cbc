//! Independent reference implementations the library is checked against.

use flowmap::pm::{DataFlowEdge, Endpoint, FlowKind, ProgramModel};
use std::collections::{BTreeMap, BTreeSet};

/// Reflexive-transitive closure of the endpoint graph (Warshall).
pub struct Closure {
    index: BTreeMap<Endpoint, usize>,
    reach: Vec<Vec<bool>>,
}

impl Closure {
    pub fn of(pm: &ProgramModel) -> Self {
        let mut index = BTreeMap::new();
        for e in &pm.flows {
            for ep in [&e.from, &e.to] {
                let n = index.len();
                index.entry(ep.clone()).or_insert(n);
            }
        }
        let n = index.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for e in &pm.flows {
            reach[index[&e.from]][index[&e.to]] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        Closure { index, reach }
    }

    pub fn reaches(&self, a: &Endpoint, b: &Endpoint) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.reach[i][j],
            _ => a == b,
        }
    }
}

fn def_by_qsig(pm: &ProgramModel, q: &str) -> Option<String> {
    pm.definitions
        .iter()
        .find(|d| pm.qualified_signature(&d.id).as_deref() == Some(q))
        .map(|d| d.id.clone())
}

/// Every (source, sink) pair such that a seed of the source reaches an
/// endpoint passing an argument into the sink.
pub fn reach_alarms(pm: &ProgramModel, sources: &BTreeSet<String>, sinks: &BTreeSet<String>) -> BTreeSet<(String, String)> {
    let closure = Closure::of(pm);
    let mut out = BTreeSet::new();
    for s in sources {
        let Some(sd) = def_by_qsig(pm, s) else { continue };
        let arity = pm.definition(&sd).and_then(|d| pm.signature(&d.signature)).unwrap().params.len();
        let mut seeds: Vec<Endpoint> = (0..arity as u32).map(|k| Endpoint::Param(sd.clone(), k)).collect();
        for e in &pm.flows {
            if e.kind == FlowKind::ReturnFlow && e.from == Endpoint::Return(sd.clone()) {
                seeds.push(e.to.clone());
            }
        }
        for k in sinks {
            let Some(kd) = def_by_qsig(pm, k) else { continue };
            let hit = pm.flows.iter().any(|e| {
                e.kind == FlowKind::ParamPass
                    && e.to.owner() == Some(kd.as_str())
                    && seeds.iter().any(|seed| closure.reaches(seed, &e.from))
            });
            if hit {
                out.insert((s.clone(), k.clone()));
            }
        }
    }
    out
}

/// Whether an endpoint belongs to the bodies of `defs` (fields of their declaring types included).
pub fn in_bodies(pm: &ProgramModel, ep: &Endpoint, defs: &BTreeSet<String>) -> bool {
    match ep {
        Endpoint::Field(f) => {
            let ty = &pm.field(f).unwrap().declaring_type;
            defs.iter().any(|d| &pm.definition(d).unwrap().declaring_type == ty)
        }
        other => other.owner().is_some_and(|o| defs.contains(o)),
    }
}

/// Candidates whose delivery point lies on some simple backward path from
/// the target, found by enumerating the paths one by one.
pub fn backward_path_sources(
    pm: &ProgramModel,
    target: &DataFlowEdge,
    candidates: &[DataFlowEdge],
    defs: &BTreeSet<String>,
) -> BTreeSet<String> {
    fn walk(
        pm: &ProgramModel,
        at: &Endpoint,
        defs: &BTreeSet<String>,
        path: &mut Vec<Endpoint>,
        visited_on_some_path: &mut BTreeSet<Endpoint>,
    ) {
        visited_on_some_path.insert(at.clone());
        for e in pm.flows.iter().filter(|e| &e.to == at) {
            if in_bodies(pm, &e.from, defs) && !path.contains(&e.from) {
                path.push(e.from.clone());
                walk(pm, &e.from, defs, path, visited_on_some_path);
                path.pop();
            }
        }
    }
    let mut on_paths = BTreeSet::new();
    if in_bodies(pm, &target.from, defs) {
        let mut path = vec![target.from.clone()];
        walk(pm, &target.from, defs, &mut path, &mut on_paths);
    }
    candidates
        .iter()
        .filter(|c| on_paths.contains(&c.to))
        .map(|c| c.id.clone())
        .collect()
}

/// I-flows of a definition set from first principles: classify every edge,
/// then enumerate backward paths for each leaving edge.
pub fn brute_iflows(pm: &ProgramModel, defs: &BTreeSet<String>, typed: impl Fn(&DataFlowEdge) -> bool) -> BTreeSet<(BTreeSet<String>, String)> {
    let inside = |ep: &Endpoint| ep.owner().is_some_and(|o| defs.contains(o));
    let interproc = |e: &DataFlowEdge| matches!(e.kind, FlowKind::ParamPass | FlowKind::ReturnFlow);
    let ins: Vec<DataFlowEdge> = pm
        .flows
        .iter()
        .filter(|e| interproc(e) && inside(&e.to) && !inside(&e.from) && typed(e))
        .cloned()
        .collect();
    let outs: Vec<&DataFlowEdge> = pm
        .flows
        .iter()
        .filter(|e| interproc(e) && inside(&e.from) && !inside(&e.to) && typed(e))
        .collect();
    outs.into_iter()
        .filter_map(|t| {
            let s = backward_path_sources(pm, t, &ins, defs);
            (!s.is_empty()).then(|| (s, t.id.clone()))
        })
        .collect()
}

/// Every injective assignment of keys to allowed items, by exhaustive search.
pub fn all_assignments<K: Ord + Clone, I: Ord + Clone>(m: &BTreeMap<K, BTreeSet<I>>) -> Vec<BTreeMap<K, I>> {
    fn go<K: Ord + Clone, I: Ord + Clone>(
        keys: &[(&K, &BTreeSet<I>)],
        cur: &mut BTreeMap<K, I>,
        out: &mut Vec<BTreeMap<K, I>>,
    ) {
        let Some(((k, items), rest)) = keys.split_first() else {
            out.push(cur.clone());
            return;
        };
        for i in items.iter() {
            if cur.values().any(|v| v == i) {
                continue;
            }
            cur.insert((*k).clone(), i.clone());
            go(rest, cur, out);
            cur.remove(*k);
        }
    }
    let keys: Vec<(&K, &BTreeSet<I>)> = m.iter().collect();
    let mut out = Vec::new();
    go(&keys, &mut BTreeMap::new(), &mut out);
    out
}
