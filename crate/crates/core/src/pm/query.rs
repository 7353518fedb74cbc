//! Flow queries over a set of definitions, as used by I-Flow extraction.

use super::model::*;
use std::collections::{BTreeSet, VecDeque};

fn check_defs(pm: &ProgramModel, defs: &BTreeSet<String>) -> Result<(), PmError> {
    match defs.iter().find(|d| pm.definition(d).is_none()) {
        Some(d) => Err(PmError::UnknownDefinition(d.clone())),
        None => Ok(()),
    }
}

fn inside(ep: &Endpoint, defs: &BTreeSet<String>) -> bool {
    ep.owner().is_some_and(|d| defs.contains(d))
}

/// Edges entering `defs`: arguments passed into their parameters and values
/// returned into them by called definitions. Edges internal to `defs` are excluded.
pub fn in_flows(pm: &ProgramModel, defs: &BTreeSet<String>) -> Result<Vec<DataFlowEdge>, PmError> {
    check_defs(pm, defs)?;
    Ok(pm
        .flows
        .iter()
        .filter(|e| match e.kind {
            FlowKind::ParamPass | FlowKind::ReturnFlow => inside(&e.to, defs) && !inside(&e.from, defs),
            FlowKind::Intra => false,
        })
        .cloned()
        .collect())
}

/// Edges leaving `defs`: their return values flowing to callers and arguments
/// they pass to callees outside the set.
pub fn out_flows(pm: &ProgramModel, defs: &BTreeSet<String>) -> Result<Vec<DataFlowEdge>, PmError> {
    check_defs(pm, defs)?;
    Ok(pm
        .flows
        .iter()
        .filter(|e| match e.kind {
            FlowKind::ParamPass | FlowKind::ReturnFlow => inside(&e.from, defs) && !inside(&e.to, defs),
            FlowKind::Intra => false,
        })
        .cloned()
        .collect())
}

/// Whether `ep` belongs to the bodies of `defs`. Fields count when their
/// declaring type declares one of the definitions.
fn in_scope(pm: &ProgramModel, ep: &Endpoint, defs: &BTreeSet<String>) -> bool {
    match ep {
        Endpoint::Field(f) => pm.field(f).is_some_and(|f| {
            defs.iter()
                .any(|d| pm.definition(d).is_some_and(|d| d.declaring_type == f.declaring_type))
        }),
        other => inside(other, defs),
    }
}

/// The members of `candidates` from which `target` is reachable by walking
/// edges backward through endpoints inside `defs`.
pub fn reachable_bwd(
    pm: &ProgramModel,
    target: &DataFlowEdge,
    candidates: &[DataFlowEdge],
    defs: &BTreeSet<String>,
) -> Vec<DataFlowEdge> {
    let mut seen: BTreeSet<Endpoint> = BTreeSet::new();
    let mut queue = VecDeque::new();
    if in_scope(pm, &target.from, defs) {
        seen.insert(target.from.clone());
        queue.push_back(target.from.clone());
    }
    while let Some(ep) = queue.pop_front() {
        for e in pm.flows_to(&ep) {
            if in_scope(pm, &e.from, defs) && seen.insert(e.from.clone()) {
                queue.push_back(e.from.clone());
            }
        }
    }
    // a candidate feeds the target if it delivers into a reached endpoint
    candidates
        .iter()
        .filter(|c| seen.contains(&c.to))
        .cloned()
        .collect()
}

pub fn communicated_type(edge: &DataFlowEdge) -> &str {
    &edge.ty
}
