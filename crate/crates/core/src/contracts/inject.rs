//! Contract-injection harness: add contracts the design does not specify and
//! measure whether the checks report them.

use super::crypto::{check_crypto, CryptoList};
use super::processing::check_all_processing;
use super::{ComplianceViolation, DFlowKey, ViolationKind};
use crate::mapping::{MappingState, Workspace};
use crate::secdfd::{ContractKind, ProcessContract, SecDfd};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InjectionKind {
    Enc,
    Dec,
    Fwd,
    Join,
}

impl InjectionKind {
    pub const ALL: [InjectionKind; 4] = [InjectionKind::Enc, InjectionKind::Dec, InjectionKind::Fwd, InjectionKind::Join];

    pub fn of(kind: ContractKind) -> Self {
        match kind {
            ContractKind::EncryptOrHash => InjectionKind::Enc,
            ContractKind::Decrypt => InjectionKind::Dec,
            ContractKind::Forward => InjectionKind::Fwd,
            ContractKind::Join => InjectionKind::Join,
        }
    }

    /// Parses a comma-separated list such as `enc,dec,fwd,join`.
    pub fn parse_list(s: &str) -> Result<Vec<InjectionKind>, String> {
        let mut v: Vec<InjectionKind> = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        v.sort();
        v.dedup();
        Ok(v)
    }
}

impl FromStr for InjectionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "enc" => Ok(InjectionKind::Enc),
            "dec" => Ok(InjectionKind::Dec),
            "fwd" => Ok(InjectionKind::Fwd),
            "join" => Ok(InjectionKind::Join),
            other => Err(format!("unknown contract kind `{other}`; expected enc, dec, fwd or join")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InjectionError {
    #[error("baseline is not compliant: {0} violation(s) before injection")]
    BaselineNotClean(usize),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
}

fn subsets_of_size_at_least_2(items: &[String]) -> Vec<Vec<String>> {
    let n = items.len();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() >= 2 {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| items[i].clone()).collect());
        }
    }
    out.sort_by(|a: &Vec<String>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Contracts of the requested kinds that could be added to `process` without
/// duplicating an existing one.
pub fn enumerate_injectable_contracts(
    model: &SecDfd,
    process: &str,
    kinds: &[InjectionKind],
) -> Result<Vec<ProcessContract>, InjectionError> {
    let node = model
        .node(process)
        .ok_or_else(|| InjectionError::UnknownProcess(process.to_string()))?;
    let ins: Vec<String> = model.in_assets(process).into_iter().collect();
    let outs: Vec<String> = model.out_assets(process).into_iter().collect();
    let has = |k: ContractKind| node.contracts.iter().any(|c| c.kind == k);
    let mut out: Vec<ProcessContract> = Vec::new();
    let mut push = |c: ProcessContract| {
        if !node.contracts.iter().any(|e| e.equivalent(&c)) && !out.iter().any(|e| e.equivalent(&c)) {
            out.push(c);
        }
    };
    for kind in kinds {
        match kind {
            InjectionKind::Enc | InjectionKind::Dec => {
                let ck = if *kind == InjectionKind::Enc {
                    ContractKind::EncryptOrHash
                } else {
                    ContractKind::Decrypt
                };
                if !has(ck) && !ins.is_empty() && !outs.is_empty() {
                    push(ProcessContract {
                        kind: ck,
                        in_assets: ins.clone(),
                        out_assets: outs.clone(),
                    });
                }
            }
            InjectionKind::Fwd => {
                for i in &ins {
                    for o in &outs {
                        push(ProcessContract {
                            kind: ContractKind::Forward,
                            in_assets: vec![i.clone()],
                            out_assets: vec![o.clone()],
                        });
                    }
                }
            }
            InjectionKind::Join => {
                for subset in subsets_of_size_at_least_2(&ins) {
                    for o in &outs {
                        push(ProcessContract {
                            kind: ContractKind::Join,
                            in_assets: subset.clone(),
                            out_assets: vec![o.clone()],
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A copy of `model` with `contract` appended to `process`.
pub fn inject_contract(model: &SecDfd, process: &str, contract: ProcessContract) -> Result<SecDfd, InjectionError> {
    let mut m = model.clone();
    let node = m
        .nodes
        .iter_mut()
        .find(|n| n.id == process)
        .ok_or_else(|| InjectionError::UnknownProcess(process.to_string()))?;
    node.contracts.push(contract);
    Ok(m)
}

/// Every crypto and processing violation of the workspace, sorted.
pub fn check_all_contracts(ws: &Workspace, state: &MappingState, crypto: &CryptoList) -> Vec<ComplianceViolation> {
    let mut v = check_crypto(ws, state, crypto).violations;
    v.extend(check_all_processing(ws, state).violations);
    v.sort();
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InjectionOutcome {
    pub model: String,
    pub process: String,
    pub contract: ProcessContract,
    pub detected: bool,
    pub false_positives: Vec<ComplianceViolation>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InjectionReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub outcomes: Vec<InjectionOutcome>,
}

impl InjectionReport {
    fn from_outcomes(outcomes: Vec<InjectionOutcome>) -> Self {
        let tp = outcomes.iter().filter(|o| o.detected).count();
        let fn_ = outcomes.len() - tp;
        let fp = outcomes.iter().map(|o| o.false_positives.len()).sum();
        InjectionReport {
            tp,
            fp,
            fn_,
            precision: (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64),
            recall: (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64),
            outcomes,
        }
    }

    /// The same figures restricted to injections of the given kinds.
    pub fn restricted_to(&self, kinds: &[InjectionKind]) -> InjectionReport {
        InjectionReport::from_outcomes(
            self.outcomes
                .iter()
                .filter(|o| kinds.contains(&InjectionKind::of(o.contract.kind)))
                .cloned()
                .collect(),
        )
    }
}

/// Splits post-injection violations into the expected one (if reported) and the rest.
fn classify(
    violations: Vec<ComplianceViolation>,
    model: &str,
    process: &str,
    index: usize,
    contract: &ProcessContract,
) -> (bool, Vec<ComplianceViolation>) {
    let mine = |v: &ComplianceViolation| v.model == model && v.process == process;
    let mut detected = false;
    let mut others = Vec::new();
    for v in violations {
        let hit = mine(&v)
            && match v.kind {
                ViolationKind::CryptoAbsence => contract.kind.is_crypto() && v.contract == Some(index),
                ViolationKind::AbsenceNotImplemented => v.contract == Some(index),
                ViolationKind::DivergenceNoBiunique => v.unassigned.iter().any(|k| k.contract == index),
                ViolationKind::DivergenceNotInDfd => false,
            };
        if hit && !detected {
            detected = true;
            if v.kind == ViolationKind::DivergenceNoBiunique {
                // other expected flows left unassigned are lost convergences
                let lost: Vec<DFlowKey> = v.unassigned.iter().filter(|k| k.contract != index).cloned().collect();
                if !lost.is_empty() {
                    let mut rest = v.clone();
                    rest.unassigned = lost;
                    others.push(rest);
                }
            }
        } else {
            others.push(v);
        }
    }
    (detected, others)
}

/// Injects every enumerable contract of the given kinds, one at a time, and
/// scores the checks' reaction. The unmodified workspace must be compliant.
pub fn run_injection_experiment(
    ws: &Workspace,
    state: &MappingState,
    crypto: &CryptoList,
    kinds: &[InjectionKind],
) -> Result<InjectionReport, InjectionError> {
    let baseline = check_all_contracts(ws, state, crypto);
    if !baseline.is_empty() {
        return Err(InjectionError::BaselineNotClean(baseline.len()));
    }
    let mut outcomes = Vec::new();
    for (mi, m) in ws.models.iter().enumerate() {
        for p in m.processes() {
            for c in enumerate_injectable_contracts(m, &p.id, kinds)? {
                let index = p.contracts.len();
                let mut injected = ws.clone();
                injected.models[mi] = inject_contract(m, &p.id, c.clone())?;
                let after = check_all_contracts(&injected, state, crypto);
                let (detected, false_positives) = classify(after, &m.name, &p.id, index, &c);
                outcomes.push(InjectionOutcome {
                    model: m.name.clone(),
                    process: p.id.clone(),
                    contract: c,
                    detected,
                    false_positives,
                });
            }
        }
    }
    Ok(InjectionReport::from_outcomes(outcomes))
}
