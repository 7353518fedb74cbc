//! Per-asset sources, allowed sinks and attacker-zone sinks derived from the
//! mapped design.

use crate::mapping::{ActiveMapping, DfdRef, MappingKind, MappingState, Workspace};
use crate::secdfd::{trace_asset_origin_pairs, NodeKind, SecDfd, ZoneMember};
use std::collections::{BTreeSet, VecDeque};

fn qualified(ws: &Workspace, defs: impl IntoIterator<Item = String>) -> BTreeSet<String> {
    defs.into_iter()
        .filter_map(|d| ws.pm.qualified_signature(&d))
        .collect()
}

/// Store definitions contributing an asset: those mapped through the store's
/// method names, plus those of its mapped types returning one of the asset's types.
fn store_source_defs(ws: &Workspace, am: &ActiveMapping, model: &str, store: &str, asset: &str) -> BTreeSet<String> {
    let pm = &ws.pm;
    let types = am.store_types(model, store);
    let names: BTreeSet<String> = am.entries_of(model, store, MappingKind::StoreMethod);
    let asset_types = am.asset_types(model, asset);
    let mut out = BTreeSet::new();
    for d in &pm.definitions {
        let Some(sig) = pm.signature(&d.signature) else { continue };
        let by_name = names.contains(&sig.name) && (types.is_empty() || types.contains(&d.declaring_type));
        let by_type = types.contains(&d.declaring_type) && asset_types.contains(&sig.ret);
        if by_name || by_type {
            out.insert(d.id.clone());
        }
    }
    out
}

/// Definitions of processes receiving flows from `entity`, preferring flows
/// that carry `asset`.
fn readers_of(am: &ActiveMapping, model: &SecDfd, entity: &str, asset: &str) -> BTreeSet<String> {
    let readers = |carrying: bool| -> BTreeSet<String> {
        model
            .outgoing(entity)
            .filter(|f| !carrying || f.carries(asset))
            .filter(|f| model.node_kind(&f.target) == Some(NodeKind::Process))
            .flat_map(|f| am.process_definitions(&model.name, &f.target))
            .collect()
    };
    let direct = readers(true);
    if direct.is_empty() {
        readers(false)
    } else {
        direct
    }
}

fn node_source_defs(ws: &Workspace, am: &ActiveMapping, model: &SecDfd, node: &str, asset: &str) -> BTreeSet<String> {
    match model.node_kind(node) {
        Some(NodeKind::ExternalEntity) => {
            let mapped = am.node_definitions(&model.name, node);
            if mapped.is_empty() {
                readers_of(am, model, node, asset)
            } else {
                mapped
            }
        }
        Some(NodeKind::DataStore) => store_source_defs(ws, am, &model.name, node, asset),
        Some(NodeKind::Process) => am.process_definitions(&model.name, node),
        None => BTreeSet::new(),
    }
}

/// Qualified signatures where the asset enters the implementation.
pub fn derive_sources(ws: &Workspace, state: &MappingState, model: &SecDfd, asset: &str) -> BTreeSet<String> {
    let am = ActiveMapping::new(ws, state);
    let Some(a) = model.asset(asset) else { return BTreeSet::new() };
    let src = &a.source;
    let produced_by_contract = model.node(src).is_some_and(|n| {
        n.kind == NodeKind::Process && n.contracts.iter().any(|c| c.out_assets.iter().any(|o| o == asset))
    });
    let defs: BTreeSet<String> = if produced_by_contract {
        trace_asset_origin_pairs(model, asset)
            .into_iter()
            .flat_map(|(node, traced)| node_source_defs(ws, &am, model, &node, &traced))
            .collect()
    } else {
        node_source_defs(ws, &am, model, src, asset)
    };
    qualified(ws, defs)
}

/// Definitions where the asset legitimately leaves: those mapped to its
/// targets. An unmapped target is substituted by the nearest mapped processes
/// upstream of it on flows carrying the asset.
pub fn derive_allowed_sinks(ws: &Workspace, state: &MappingState, model: &SecDfd, asset: &str) -> BTreeSet<String> {
    let am = ActiveMapping::new(ws, state);
    let Some(a) = model.asset(asset) else { return BTreeSet::new() };
    let mut defs = BTreeSet::new();
    for t in &a.targets {
        let mapped = am.node_definitions(&model.name, t);
        if !mapped.is_empty() {
            defs.extend(mapped);
            continue;
        }
        let mut seen = BTreeSet::from([t.clone()]);
        let mut queue = VecDeque::from([t.clone()]);
        while let Some(n) = queue.pop_front() {
            for f in model.incoming(&n).filter(|f| f.carries(asset)) {
                if !seen.insert(f.source.clone()) {
                    continue;
                }
                let pd = if model.node_kind(&f.source) == Some(NodeKind::Process) {
                    am.process_definitions(&model.name, &f.source)
                } else {
                    BTreeSet::new()
                };
                if pd.is_empty() {
                    queue.push_back(f.source.clone());
                } else {
                    defs.extend(pd);
                }
            }
        }
    }
    let allowed = qualified(ws, defs);
    let zone = derive_zone_sinks(ws, state, model);
    allowed.difference(&zone).cloned().collect()
}

/// Qualified signatures of definitions mapped to attacker-zone members; a
/// flow member contributes its target node.
pub fn derive_zone_sinks(ws: &Workspace, state: &MappingState, model: &SecDfd) -> BTreeSet<String> {
    let am = ActiveMapping::new(ws, state);
    let mut defs = BTreeSet::new();
    for z in &model.zones {
        for m in &z.members {
            let node = match m {
                ZoneMember::Node(n) => Some(n.clone()),
                ZoneMember::Flow(i) => model.flow(*i).map(|f| f.target.clone()),
            };
            if let Some(n) = node {
                defs.extend(am.node_definitions(&model.name, &n));
            }
        }
    }
    qualified(ws, defs)
}

/// `model/asset` key used for per-asset policies.
pub fn asset_key(model: &str, asset: &str) -> String {
    DfdRef::new(model, asset).to_string()
}
