//! Forward/join contract checking: implemented-flow extraction and matching
//! against the flows the contracts specify.

use super::biunique::{find_biunique, max_assignment};
use super::{ComplianceViolation, ContractError, DFlowKey, IFlow, ViolationKind};
use crate::mapping::{ActiveMapping, MappingState, Workspace};
use crate::pm::{communicated_type, in_flows, out_flows, reachable_bwd, DataFlowEdge};
use crate::secdfd::{DfdNode, SecDfd};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Implemented flows of a process: for every asset-typed edge leaving its
/// definitions, the asset-typed entering edges it is reachable from.
pub fn extract_iflows(ws: &Workspace, state: &MappingState, model: &SecDfd, process: &str) -> Result<Vec<IFlow>, ContractError> {
    let am = ActiveMapping::new(ws, state);
    if model.node(process).is_none() {
        return Err(ContractError::UnknownProcess(process.to_string()));
    }
    let methods = am.process_definitions(&model.name, process);
    if methods.is_empty() {
        return Err(ContractError::UnmappedProcess(process.to_string()));
    }
    let mapped = |e: &DataFlowEdge| !am.assets_of_type(&model.name, communicated_type(e)).is_empty();
    let ins: Vec<DataFlowEdge> = in_flows(&ws.pm, &methods)
        .expect("mapped definitions exist")
        .into_iter()
        .filter(|e| mapped(e))
        .collect();
    let outs: Vec<DataFlowEdge> = out_flows(&ws.pm, &methods)
        .expect("mapped definitions exist")
        .into_iter()
        .filter(|e| mapped(e))
        .collect();
    let mut iflows = Vec::new();
    for target in &outs {
        let sources = reachable_bwd(&ws.pm, target, &ins, &methods);
        if !sources.is_empty() {
            iflows.push(IFlow {
                sources: sources.into_iter().map(|e| e.id).collect(),
                target: target.id.clone(),
            });
        }
    }
    iflows.sort();
    Ok(iflows)
}

/// An expected flow certified by an implemented one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DFlowConvergence {
    pub model: String,
    pub process: String,
    pub dflow: DFlowKey,
    pub iflow: IFlow,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProcessingReport {
    pub convergences: Vec<DFlowConvergence>,
    pub violations: Vec<ComplianceViolation>,
}

fn assets_of(am: &ActiveMapping, model: &str, ws: &Workspace, edge: &str) -> BTreeSet<String> {
    ws.pm
        .flow(edge)
        .map(|e| am.assets_of_type(model, communicated_type(e)))
        .unwrap_or_default()
}

/// Matches a process's implemented flows against its forward and join contracts.
///
/// Implemented flows whose assets all belong to one of the process's
/// encrypt/decrypt contracts are accounted for by that contract and are
/// never reported as unspecified.
pub fn check_processing_contracts(
    ws: &Workspace,
    state: &MappingState,
    model: &SecDfd,
    process: &DfdNode,
    iflows: &[IFlow],
) -> ProcessingReport {
    let am = ActiveMapping::new(ws, state);
    let mut report = ProcessingReport::default();
    let mut order: Vec<DFlowKey> = Vec::new();
    let mut matches: BTreeMap<DFlowKey, BTreeSet<IFlow>> = BTreeMap::new();
    for (ci, c) in process.contracts.iter().enumerate() {
        if !c.kind.is_processing() {
            continue;
        }
        let ins: BTreeSet<&String> = c.in_assets.iter().collect();
        for out in &c.out_assets {
            let key = DFlowKey {
                contract: ci,
                out_asset: out.clone(),
            };
            let flows: BTreeSet<IFlow> = iflows
                .iter()
                .filter(|i| {
                    assets_of(&am, &model.name, ws, &i.target).contains(out)
                        && i.sources
                            .iter()
                            .all(|s| assets_of(&am, &model.name, ws, s).iter().any(|a| ins.contains(a)))
                })
                .cloned()
                .collect();
            if flows.is_empty() {
                let mut v = ComplianceViolation::new(ViolationKind::AbsenceNotImplemented, &model.name, &process.id);
                v.contract = Some(ci);
                v.out_asset = Some(out.clone());
                report.violations.push(v);
            } else if let std::collections::btree_map::Entry::Vacant(slot) = matches.entry(key.clone()) {
                order.push(key);
                slot.insert(flows);
            }
        }
    }

    let solution = match find_biunique(&matches) {
        Some(s) => s,
        None => {
            let partial = max_assignment(&matches, &order);
            let mut v = ComplianceViolation::new(ViolationKind::DivergenceNoBiunique, &model.name, &process.id);
            v.unassigned = order.iter().filter(|k| !partial.contains_key(*k)).cloned().collect();
            report.violations.push(v);
            partial
        }
    };
    for (k, i) in &solution {
        report.convergences.push(DFlowConvergence {
            model: model.name.clone(),
            process: process.id.clone(),
            dflow: k.clone(),
            iflow: i.clone(),
        });
    }

    let used: BTreeSet<&IFlow> = solution.values().collect();
    let crypto_scopes: Vec<BTreeSet<&String>> = process
        .contracts
        .iter()
        .filter(|c| c.kind.is_crypto())
        .map(|c| c.in_assets.iter().chain(&c.out_assets).collect())
        .collect();
    let within = |scope: &BTreeSet<&String>, edge: &str| {
        assets_of(&am, &model.name, ws, edge).iter().any(|a| scope.contains(a))
    };
    for i in iflows {
        if used.contains(i) {
            continue;
        }
        let explained = crypto_scopes
            .iter()
            .any(|s| within(s, &i.target) && i.sources.iter().all(|src| within(s, src)));
        if !explained {
            let mut v = ComplianceViolation::new(ViolationKind::DivergenceNotInDfd, &model.name, &process.id);
            v.iflow = Some(i.clone());
            report.violations.push(v);
        }
    }
    report
}

/// Runs both algorithms for every process that has mapped definitions or
/// forward/join contracts.
pub fn check_all_processing(ws: &Workspace, state: &MappingState) -> ProcessingReport {
    let mut report = ProcessingReport::default();
    for m in &ws.models {
        for p in m.processes() {
            let iflows = match extract_iflows(ws, state, m, &p.id) {
                Ok(i) => i,
                Err(ContractError::UnmappedProcess(_)) => {
                    if !p.contracts.iter().any(|c| c.kind.is_processing()) {
                        continue;
                    }
                    Vec::new()
                }
                Err(ContractError::UnknownProcess(_)) => unreachable!("iterating the model's own processes"),
            };
            let r = check_processing_contracts(ws, state, m, p, &iflows);
            report.convergences.extend(r.convergences);
            report.violations.extend(r.violations);
        }
    }
    report
}
