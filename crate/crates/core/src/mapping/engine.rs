//! Heuristic mapping rules, certainty scores and user decisions.

use super::names::names_correspond;
use super::state::*;
use crate::pm::{Endpoint, FlowKind, PmElementKind, ProgramModel};
use crate::secdfd::NodeKind;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Intermediate definitions allowed on a forwarding path between two processes.
pub const MAX_INTERMEDIATES: usize = 3;

/// One row of the suggestion list shown to the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Suggestion {
    pub entry: String,
    pub dfd_element: DfdRef,
    pub pm_element: String,
    pub kind: MappingKind,
    pub state: EntryState,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

fn simple_name(qualified: &str) -> &str {
    qualified.rsplit('.').next().unwrap_or(qualified)
}

/// Creates name-based entries for processes, assets and data stores.
pub fn match_names(ws: &Workspace, state: &mut MappingState) -> Vec<String> {
    let pm = &ws.pm;
    let mut created = Vec::new();
    for m in &ws.models {
        for a in &m.assets {
            for t in &pm.types {
                let simple = simple_name(&t.qualified_name);
                let q = [names_correspond(&a.name, simple), names_correspond(&a.value_type, simple)]
                    .into_iter()
                    .flatten()
                    .fold(None, |acc: Option<f64>, q| Some(acc.map_or(q, |a| a.max(q))));
                if let Some(q) = q {
                    created.extend(state.propose(DfdRef::new(&m.name, &a.name), &t.id, MappingKind::AssetType, q, BTreeSet::new()));
                }
            }
        }
        for n in &m.nodes {
            let r = DfdRef::new(&m.name, &n.id);
            match n.kind {
                NodeKind::Process => {
                    for mn in &pm.method_names {
                        if let Some(q) = names_correspond(&n.id, &mn.name) {
                            created.extend(state.propose(r.clone(), &mn.id, MappingKind::ProcessName, q, BTreeSet::new()));
                        }
                    }
                }
                NodeKind::DataStore => {
                    for t in &pm.types {
                        if let Some(q) = names_correspond(&n.id, simple_name(&t.qualified_name)) {
                            created.extend(state.propose(r.clone(), &t.id, MappingKind::StoreType, q, BTreeSet::new()));
                        }
                    }
                    for mn in &pm.method_names {
                        if let Some(q) = names_correspond(&n.id, &mn.name) {
                            created.extend(state.propose(r.clone(), &mn.id, MappingKind::StoreMethod, q, BTreeSet::new()));
                        }
                    }
                }
                NodeKind::ExternalEntity => {}
            }
        }
    }
    created
}

/// Live asset-type entries of one model: asset -> [(type, entry id)].
fn asset_type_support(state: &MappingState, model: &str) -> BTreeMap<String, Vec<(String, String)>> {
    let mut out: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for e in state.live() {
        if e.kind == MappingKind::AssetType && e.dfd_element.model == model {
            out.entry(e.dfd_element.element.clone())
                .or_default()
                .push((e.pm_element.clone(), e.id.clone()));
        }
    }
    out
}

/// Extends process/method-name matches to signatures compatible with mapped assets:
/// assets entering the process against parameter types, assets leaving it against
/// the return type.
pub fn extend_to_signatures(ws: &Workspace, state: &mut MappingState) -> Vec<String> {
    let pm = &ws.pm;
    let name_entries: Vec<(DfdRef, String, String)> = state
        .live()
        .filter(|e| e.kind == MappingKind::ProcessName)
        .map(|e| (e.dfd_element.clone(), e.pm_element.clone(), e.id.clone()))
        .collect();
    let mut created = Vec::new();
    for (r, name, entry_id) in name_entries {
        let Some(model) = ws.model(&r.model) else { continue };
        let support = asset_type_support(state, &r.model);
        let ins = model.in_assets(&r.element);
        let outs = model.out_assets(&r.element);
        for sig in pm.signatures_named(&name) {
            let mut used = BTreeSet::new();
            for a in &ins {
                for (ty, id) in support.get(a).into_iter().flatten() {
                    if sig.params.contains(ty) {
                        used.insert(id.clone());
                    }
                }
            }
            for a in &outs {
                for (ty, id) in support.get(a).into_iter().flatten() {
                    if &sig.ret == ty {
                        used.insert(id.clone());
                    }
                }
            }
            if used.is_empty() {
                continue;
            }
            used.insert(entry_id.clone());
            created.extend(state.propose(r.clone(), &sig.id, MappingKind::ProcessSignature, 0.0, used));
        }
    }
    created
}

/// Definitions reachable from `from` by data leaving it, with the number of
/// interprocedural hops needed. Paths never re-enter `from`.
fn data_successors(pm: &ProgramModel, from: &str, max_hops: usize) -> BTreeMap<String, usize> {
    let mut best: BTreeMap<Endpoint, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut reached: BTreeMap<String, usize> = BTreeMap::new();
    for e in &pm.flows {
        let leaves = e.kind != FlowKind::Intra
            && e.from.owner() == Some(from)
            && e.to.owner() != Some(from);
        if leaves && best.get(&e.to).is_none_or(|&h| h > 1) {
            best.insert(e.to.clone(), 1);
            queue.push_back((e.to.clone(), 1usize));
        }
    }
    while let Some((ep, hops)) = queue.pop_front() {
        if best.get(&ep).is_some_and(|&h| h < hops) {
            continue;
        }
        if let Some(owner) = ep.owner() {
            let h = reached.entry(owner.to_string()).or_insert(hops);
            *h = (*h).min(hops);
        }
        for e in pm.flows_from(&ep) {
            if e.to.owner() == Some(from) {
                continue;
            }
            let next = if e.kind == FlowKind::Intra { hops } else { hops + 1 };
            if next > max_hops {
                continue;
            }
            if best.get(&e.to).is_none_or(|&h| h > next) {
                best.insert(e.to.clone(), next);
                queue.push_back((e.to.clone(), next));
            }
        }
    }
    reached
}

/// Signatures currently associated with each process, with the entry supporting them.
fn process_signatures(ws: &Workspace, state: &MappingState) -> BTreeMap<DfdRef, BTreeMap<String, String>> {
    let mut out: BTreeMap<DfdRef, BTreeMap<String, String>> = BTreeMap::new();
    for e in state.live() {
        match e.kind {
            MappingKind::ProcessSignature => {
                out.entry(e.dfd_element.clone())
                    .or_default()
                    .entry(e.pm_element.clone())
                    .or_insert_with(|| e.id.clone());
            }
            MappingKind::ProcessDefinition if e.state.is_active() => {
                if let Some(d) = ws.pm.definition(&e.pm_element) {
                    out.entry(e.dfd_element.clone())
                        .or_default()
                        .entry(d.signature.clone())
                        .or_insert_with(|| e.id.clone());
                }
            }
            _ => {}
        }
    }
    out
}

/// Finds definitions implementing mapped signatures: data flowing between the
/// definitions of two processes connected by a design flow, and definitions of
/// one process's signatures calling each other.
pub fn discover_definitions(ws: &Workspace, state: &mut MappingState) -> Vec<String> {
    let pm = &ws.pm;
    let sigs = process_signatures(ws, state);
    // process -> def -> supporting entry
    let defs_of = |r: &DfdRef| -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (sig, support) in sigs.get(r).into_iter().flatten() {
            for d in pm.definitions_of(sig) {
                out.entry(d.id.clone()).or_insert_with(|| support.clone());
            }
        }
        out
    };
    let mut proposals: Vec<(DfdRef, String, BTreeSet<String>)> = Vec::new();
    let mut succ_cache: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for m in &ws.models {
        for f in m.flows_sorted() {
            let both = m.node_kind(&f.source) == Some(NodeKind::Process)
                && m.node_kind(&f.target) == Some(NodeKind::Process);
            if !both || f.source == f.target {
                continue;
            }
            let p = DfdRef::new(&m.name, &f.source);
            let q = DfdRef::new(&m.name, &f.target);
            let dp = defs_of(&p);
            let dq = defs_of(&q);
            for (a, sa) in &dp {
                let succ = succ_cache
                    .entry(a.clone())
                    .or_insert_with(|| data_successors(pm, a, MAX_INTERMEDIATES + 1));
                for (b, sb) in &dq {
                    if a != b && succ.contains_key(b) {
                        let support: BTreeSet<String> = [sa.clone(), sb.clone()].into();
                        proposals.push((p.clone(), a.clone(), support.clone()));
                        proposals.push((q.clone(), b.clone(), support));
                    }
                }
            }
        }
        for n in m.processes() {
            let p = DfdRef::new(&m.name, &n.id);
            let Some(psigs) = sigs.get(&p) else { continue };
            for (s1, e1) in psigs {
                for (s2, e2) in psigs {
                    if s1 == s2 {
                        continue;
                    }
                    for d1 in pm.definitions_of(s1) {
                        for d2 in pm.definitions_of(s2) {
                            if pm.calls.iter().any(|c| c.caller == d1.id && c.callee == d2.id) {
                                let support: BTreeSet<String> = [e1.clone(), e2.clone()].into();
                                proposals.push((p.clone(), d1.id.clone(), support.clone()));
                                proposals.push((p.clone(), d2.id.clone(), support));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut created = Vec::new();
    for (r, def, support) in proposals {
        // never let an entry derive from itself through an existing entry
        let support: BTreeSet<String> = match state.find(&r, &def) {
            Some(existing) => support
                .into_iter()
                .filter(|s| !closure(state, s).contains(&existing.id) && s != &existing.id)
                .collect(),
            None => support,
        };
        if support.is_empty() {
            continue;
        }
        created.extend(state.propose(r, &def, MappingKind::ProcessDefinition, 0.0, support));
    }
    created
}

/// Transitive `derivedFrom` closure of an entry, excluding the entry itself.
pub fn closure(state: &MappingState, id: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<String> = state
        .entry(id)
        .map(|e| e.derived_from.iter().cloned().collect())
        .unwrap_or_default();
    while let Some(x) = stack.pop() {
        if x == id || !seen.insert(x.clone()) {
            continue;
        }
        if let Some(e) = state.entry(&x) {
            stack.extend(e.derived_from.iter().cloned());
        }
    }
    seen
}

/// Recomputes every entry's certainty score.
pub fn rescore(state: &mut MappingState) {
    let weights = state.weights.clone();
    let scores: Vec<f64> = state
        .entries
        .iter()
        .map(|e| {
            let cl = closure(state, &e.id);
            let mut root_q: Option<f64> = if e.derived_from.is_empty() {
                Some(e.quality)
            } else {
                None
            };
            let (mut acc, mut pend) = (0usize, 0usize);
            for x in &cl {
                let Some(d) = state.entry(x) else { continue };
                if d.state.is_active() {
                    acc += 1;
                } else if d.state.is_pending() {
                    pend += 1;
                }
                if d.derived_from.is_empty() && d.state != EntryState::Rejected {
                    root_q = Some(root_q.map_or(d.quality, |q| q.max(d.quality)));
                }
            }
            root_q.unwrap_or(0.0) + weights.accepted * acc as f64 + weights.suggested * pend as f64
        })
        .collect();
    for (e, s) in state.entries.iter_mut().zip(scores) {
        e.score = s;
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

const EPS: f64 = 1e-9;

/// Rescores and returns, per design element, the entries scoring at least
/// the element's median plus every accepted or user-defined entry.
pub fn score_and_filter(ws: &Workspace, state: &mut MappingState) -> Vec<Suggestion> {
    rescore(state);
    let mut by_el: BTreeMap<&DfdRef, Vec<&MappingEntry>> = BTreeMap::new();
    for e in state.live() {
        by_el.entry(&e.dfd_element).or_default().push(e);
    }
    let mut out = Vec::new();
    for (_, es) in by_el {
        let med = median(es.iter().map(|e| e.score).collect());
        for e in es {
            if e.state.is_active() || e.score + EPS >= med {
                out.push(Suggestion {
                    entry: e.id.clone(),
                    dfd_element: e.dfd_element.clone(),
                    pm_element: e.pm_element.clone(),
                    kind: e.kind,
                    state: e.state,
                    score: e.score,
                    location: ws.pm.definition(&e.pm_element).map(|d| d.loc.to_string()),
                });
            }
        }
    }
    sort_suggestions(&mut out);
    out
}

pub fn sort_suggestions(v: &mut [Suggestion]) {
    v.sort_by(|a, b| {
        a.dfd_element
            .cmp(&b.dfd_element)
            .then(b.score.total_cmp(&a.score))
            .then(a.pm_element.cmp(&b.pm_element))
    });
}

/// One automated step: name matching, signature extension, definition discovery, scoring.
pub fn run_iteration(ws: &Workspace, state: &mut MappingState) -> Vec<Suggestion> {
    match_names(ws, state);
    extend_to_signatures(ws, state);
    discover_definitions(ws, state);
    state.iteration += 1;
    score_and_filter(ws, state)
}

/// Applies a user decision. Rejecting removes every pending entry derived from
/// the rejected one; removed entries may be rediscovered later.
pub fn decide(state: &mut MappingState, id: &str, decision: Decision) -> Result<(), MappingError> {
    let entry = state
        .entry(id)
        .ok_or_else(|| MappingError::UnknownEntry(id.to_string()))?;
    if entry.state == EntryState::Rejected {
        return Err(MappingError::RejectedEntry(id.to_string()));
    }
    match decision {
        Decision::Accept => state.entry_mut(id).expect("checked").state = EntryState::Accepted,
        Decision::Tolerate => state.entry_mut(id).expect("checked").state = EntryState::Tolerated,
        Decision::Reject => {
            state.entry_mut(id).expect("checked").state = EntryState::Rejected;
            let mut gone: BTreeSet<String> = BTreeSet::from([id.to_string()]);
            loop {
                let doomed: Vec<String> = state
                    .entries
                    .iter()
                    .filter(|e| e.state.is_pending() && !gone.contains(&e.id))
                    .filter(|e| e.derived_from.iter().any(|d| gone.contains(d)))
                    .map(|e| e.id.clone())
                    .collect();
                if doomed.is_empty() {
                    break;
                }
                gone.extend(doomed);
            }
            gone.remove(id);
            state.entries.retain(|e| !gone.contains(&e.id));
            for e in &mut state.entries {
                e.derived_from.retain(|d| !gone.contains(d));
            }
        }
    }
    rescore(state);
    Ok(())
}

/// Records a user-defined correspondence and returns its entry id.
pub fn map_manually(ws: &Workspace, state: &mut MappingState, dfd: &DfdRef, pm_element: &str) -> Result<String, MappingError> {
    let dk = ws
        .dfd_kind(dfd)
        .ok_or_else(|| MappingError::UnknownDfdElement(dfd.to_string()))?;
    let pk = ws
        .pm
        .element_kind(pm_element)
        .ok_or_else(|| MappingError::UnknownPmElement(pm_element.to_string()))?;
    let kind = MappingKind::for_pair(dk, pk).ok_or_else(|| MappingError::IllegalPair {
        dfd: dk.to_string(),
        pm: pm_kind_name(pk).to_string(),
    })?;
    let id = match state.entries.iter_mut().find(|e| &e.dfd_element == dfd && e.pm_element == pm_element) {
        Some(e) => {
            e.state = EntryState::UserDefined;
            e.quality = 1.0;
            e.id.clone()
        }
        None => {
            let id = state.alloc_id();
            state.entries.push(MappingEntry {
                id: id.clone(),
                dfd_element: dfd.clone(),
                pm_element: pm_element.to_string(),
                kind,
                state: EntryState::UserDefined,
                quality: 1.0,
                score: 1.0,
                derived_from: BTreeSet::new(),
            });
            id
        }
    };
    rescore(state);
    Ok(id)
}

pub fn pm_kind_name(k: PmElementKind) -> &'static str {
    match k {
        PmElementKind::Type => "type",
        PmElementKind::MethodName => "method name",
        PmElementKind::Signature => "signature",
        PmElementKind::Definition => "definition",
        PmElementKind::Field => "field",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pm::extract_pm;
    use crate::secdfd::parse_secdfd;

    fn ws(dfd: &str, code: &str) -> Workspace {
        Workspace::new(
            vec![parse_secdfd(dfd).unwrap()],
            extract_pm(&[("c.mini".into(), code.into())]).unwrap(),
        )
    }

    const CHAIN_DFD: &str = "model M\nprocess Alpha\nprocess Gamma\nexternal E\n\
        asset item : Item high from E to Gamma\n\
        flow 1 : E -> Alpha carrying item\nflow 2 : Alpha -> Gamma carrying item\n";
    const CHAIN_CODE: &str = "type Item { }\n\
        type S { def alpha(i: Item): void { beta(i); }\n\
        def beta(i: Item): void { gamma(i); }\n\
        def gamma(i: Item): void { } }\n";

    #[test]
    fn empty_pm_gives_no_entries() {
        let w = ws(CHAIN_DFD, "");
        let mut st = MappingState::new(&w);
        assert!(run_iteration(&w, &mut st).is_empty());
        assert_eq!(st.iteration, 1);
    }

    #[test]
    fn chain_maps_endpoints_not_intermediate() {
        let w = ws(CHAIN_DFD, CHAIN_CODE);
        let mut st = MappingState::new(&w);
        run_iteration(&w, &mut st);
        let defs: BTreeSet<(String, String)> = st
            .entries
            .iter()
            .filter(|e| e.kind == MappingKind::ProcessDefinition)
            .map(|e| (e.dfd_element.element.clone(), e.pm_element.clone()))
            .collect();
        assert_eq!(
            defs,
            BTreeSet::from([
                ("Alpha".to_string(), "def:S.alpha(Item):void".to_string()),
                ("Gamma".to_string(), "def:S.gamma(Item):void".to_string()),
            ])
        );
    }

    #[test]
    fn internal_coupling_maps_called_definition() {
        let dfd = "model M\nprocess Get_Passwords_External\nprocess Decrypt\nexternal U\n\
            asset password : PasswordExt high from U to Decrypt\n\
            flow 1 : U -> Get_Passwords_External carrying password\n\
            flow 2 : Get_Passwords_External -> Decrypt carrying password\n";
        let code = "type PasswordExt { }\n\
            type Provider { def getPassword(): PasswordExt { return internalGetPassword(); }\n\
            def internalGetPassword(): PasswordExt { return new PasswordExt(); } }\n";
        let w = ws(dfd, code);
        let mut st = MappingState::new(&w);
        run_iteration(&w, &mut st);
        let gpe: BTreeSet<&str> = st
            .entries
            .iter()
            .filter(|e| e.kind == MappingKind::ProcessDefinition && e.dfd_element.element == "Get_Passwords_External")
            .map(|e| e.pm_element.as_str())
            .collect();
        assert!(gpe.contains("def:Provider.internalGetPassword():PasswordExt"), "{gpe:?}");
        assert!(gpe.contains("def:Provider.getPassword():PasswordExt"));
    }

    #[test]
    fn median_filter() {
        assert_eq!(median(vec![0.4, 0.6, 0.9]), 0.6);
        assert_eq!(median(vec![1.0, 2.0]), 1.5);
    }

    #[test]
    fn reject_removes_derived_entries() {
        let w = ws(CHAIN_DFD, CHAIN_CODE);
        let mut st = MappingState::new(&w);
        run_iteration(&w, &mut st);
        let name = st
            .entries
            .iter()
            .find(|e| e.kind == MappingKind::ProcessName && e.dfd_element.element == "Alpha")
            .unwrap()
            .id
            .clone();
        let derived: Vec<String> = st
            .entries
            .iter()
            .filter(|e| closure(&st, &e.id).contains(&name))
            .map(|e| e.id.clone())
            .collect();
        assert!(!derived.is_empty());
        decide(&mut st, &name, Decision::Reject).unwrap();
        for d in &derived {
            assert!(st.entry(d).is_none(), "{d} survived");
        }
        let again = run_iteration(&w, &mut st);
        assert!(again.iter().all(|s| s.entry != name));
        assert_eq!(st.entry(&name).unwrap().state, EntryState::Rejected);
        assert!(matches!(decide(&mut st, &name, Decision::Accept), Err(MappingError::RejectedEntry(_))));
        assert!(matches!(decide(&mut st, "e9999", Decision::Accept), Err(MappingError::UnknownEntry(_))));
    }

    #[test]
    fn accepting_boosts_dependents() {
        let w = ws(CHAIN_DFD, CHAIN_CODE);
        let mut st = MappingState::new(&w);
        run_iteration(&w, &mut st);
        let sig = st.entries.iter().find(|e| e.kind == MappingKind::ProcessSignature).unwrap().id.clone();
        let dependents: Vec<(String, f64)> = st
            .entries
            .iter()
            .filter(|e| e.derived_from.contains(&sig))
            .map(|e| (e.id.clone(), e.score))
            .collect();
        assert!(!dependents.is_empty());
        let before: Vec<f64> = st.entries.iter().map(|e| e.score).collect();
        decide(&mut st, &sig, Decision::Accept).unwrap();
        for (id, old) in dependents {
            assert!((st.entry(&id).unwrap().score - old - 0.25).abs() < 1e-12);
        }
        for (e, b) in st.entries.iter().zip(before) {
            assert!(e.score + 1e-12 >= b);
        }
    }

    #[test]
    fn manual_mapping_kind_rules() {
        let w = ws(CHAIN_DFD, CHAIN_CODE);
        let mut st = MappingState::new(&w);
        let r = DfdRef::new("M", "item");
        assert!(matches!(
            map_manually(&w, &mut st, &r, "def:S.alpha(Item):void"),
            Err(MappingError::IllegalPair { .. })
        ));
        let id = map_manually(&w, &mut st, &r, "type:Item").unwrap();
        assert_eq!(st.entry(&id).unwrap().kind, MappingKind::AssetType);
        assert_eq!(st.entry(&id).unwrap().state, EntryState::UserDefined);
        assert!(map_manually(&w, &mut st, &DfdRef::new("M", "Nope"), "type:Item").is_err());
    }
}
