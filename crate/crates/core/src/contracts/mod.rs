//! Verification of SecDFD process contracts against the mapped implementation.

mod biunique;
mod crypto;
mod inject;
mod processing;

pub use biunique::{find_biunique, max_assignment};
pub use crypto::{check_crypto, Capability, CryptoConvergence, CryptoEntry, CryptoList, CryptoListError, CryptoReport};
pub use inject::{
    check_all_contracts, enumerate_injectable_contracts, inject_contract, run_injection_experiment, InjectionError, InjectionKind,
    InjectionOutcome, InjectionReport,
};
pub use processing::{
    check_all_processing, check_processing_contracts, extract_iflows, DFlowConvergence, ProcessingReport,
};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("process `{0}` has no mapped definitions")]
    UnmappedProcess(String),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
}

/// An implemented flow: data entering a process's definitions along `sources`
/// and leaving them along `target` (edge ids).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IFlow {
    pub sources: BTreeSet<String>,
    pub target: String,
}

impl IFlow {
    pub fn is_join(&self) -> bool {
        self.sources.len() > 1
    }
}

/// An expected flow: one outgoing asset of a forward or join contract.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DFlowKey {
    pub contract: usize,
    pub out_asset: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    CryptoAbsence,
    AbsenceNotImplemented,
    DivergenceNoBiunique,
    DivergenceNotInDfd,
}

impl ViolationKind {
    pub fn is_absence(self) -> bool {
        matches!(self, ViolationKind::CryptoAbsence | ViolationKind::AbsenceNotImplemented)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComplianceViolation {
    pub kind: ViolationKind,
    pub model: String,
    pub process: String,
    /// Index of the contract within the process.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_asset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iflow: Option<IFlow>,
    /// Expected flows left without an implementation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unassigned: Vec<DFlowKey>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub definitions: Vec<String>,
}

impl ComplianceViolation {
    pub fn new(kind: ViolationKind, model: &str, process: &str) -> Self {
        ComplianceViolation {
            kind,
            model: model.to_string(),
            process: process.to_string(),
            contract: None,
            out_asset: None,
            iflow: None,
            unassigned: Vec::new(),
            definitions: Vec::new(),
        }
    }

    /// Content hash, stable across runs and reloads.
    pub fn stable_id(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("violation serializes");
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        format!("v-{hex}")
    }
}
