//! Label propagation over the diagram according to process contracts.
//!
//! Propagation starts at each asset's source element with its declared label
//! and follows flows carrying the asset. At a process, an asset named on the
//! output side of a contract takes the label that contract computes (the first
//! such contract in document order wins); every other asset passes through
//! unchanged. Labels only ever rise, so the worklist reaches a fixpoint on
//! cyclic diagrams as well. Occurrences never reached keep the declared label.

use super::model::*;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Label of every (flow index, asset) occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelAssignment {
    pub entries: BTreeMap<(u32, String), Label>,
}

impl LabelAssignment {
    pub fn get(&self, flow: u32, asset: &str) -> Option<Label> {
        self.entries.get(&(flow, asset.to_string())).copied()
    }
}

fn producing_contract<'m>(node: &'m DfdNode, asset: &str) -> Option<&'m ProcessContract> {
    if node.kind != NodeKind::Process {
        return None;
    }
    node.contracts
        .iter()
        .find(|c| c.out_assets.iter().any(|a| a == asset))
}

struct Propagator<'m> {
    model: &'m SecDfd,
    labels: BTreeMap<(u32, String), Label>,
}

impl<'m> Propagator<'m> {
    /// Highest label with which `asset` has arrived at `node` so far.
    fn arrived(&self, node: &str, asset: &str) -> Option<Label> {
        self.model
            .incoming(node)
            .filter(|f| f.carries(asset))
            .filter_map(|f| self.labels.get(&(f.index, asset.to_string())).copied())
            .max()
    }

    fn input_label(&self, node: &str, asset: &str) -> Option<Label> {
        let delivered = self.model.incoming(node).any(|f| f.carries(asset));
        if delivered {
            self.arrived(node, asset)
        } else {
            // an input never delivered by a flow keeps its declared label
            self.model.asset(asset).map(|a| a.label)
        }
    }

    /// Label `asset` has when leaving `node`, if known yet.
    fn emitted(&self, node: &DfdNode, asset: &str) -> Option<Label> {
        if let Some(contract) = producing_contract(node, asset) {
            return match contract.kind {
                ContractKind::EncryptOrHash => Some(Label::Low),
                ContractKind::Decrypt | ContractKind::Forward | ContractKind::Join => contract
                    .in_assets
                    .iter()
                    .filter_map(|a| self.input_label(&node.id, a))
                    .max(),
            };
        }
        let mut label = self.arrived(&node.id, asset);
        if let Some(a) = self.model.asset(asset) {
            if a.source == node.id {
                label = Some(label.map_or(a.label, |l| l.join(a.label)));
            }
        }
        label
    }

    fn run(mut self) -> LabelAssignment {
        let flows = self.model.flows_sorted();
        let mut queue: VecDeque<u32> = flows.iter().map(|f| f.index).collect();
        let mut queued: BTreeSet<u32> = queue.iter().copied().collect();
        while let Some(ix) = queue.pop_front() {
            queued.remove(&ix);
            let flow = self.model.flow(ix).expect("queued flow exists");
            let Some(src) = self.model.node(&flow.source) else {
                continue;
            };
            let mut changed = false;
            for asset in &flow.assets {
                let Some(new) = self.emitted(src, asset) else {
                    continue;
                };
                let key = (ix, asset.clone());
                let old = self.labels.get(&key).copied();
                if old.is_none_or(|o| new > o) {
                    self.labels.insert(key, new);
                    changed = true;
                }
            }
            if changed {
                for next in flows.iter().filter(|f| f.source == flow.target) {
                    if queued.insert(next.index) {
                        queue.push_back(next.index);
                    }
                }
            }
        }
        let mut entries = self.labels;
        for (ix, asset) in self.model.occurrences() {
            let declared = self.model.asset(&asset).map_or(Label::Low, |a| a.label);
            entries.entry((ix, asset)).or_insert(declared);
        }
        LabelAssignment { entries }
    }
}

/// Computes the label of every asset occurrence in a valid model.
pub fn propagate_labels(model: &SecDfd) -> LabelAssignment {
    Propagator {
        model,
        labels: BTreeMap::new(),
    }
    .run()
}
