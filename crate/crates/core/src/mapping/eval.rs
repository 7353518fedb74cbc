use super::engine::{map_manually, score_and_filter};
use super::state::{DfdRef, MappingError, MappingState, Workspace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One line of a `.gt.json` file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthPair {
    pub dfd: DfdRef,
    pub pm: String,
}

pub fn load_ground_truth(bytes: &[u8]) -> Result<Vec<GroundTruthPair>, MappingError> {
    serde_json::from_slice(bytes).map_err(|e| MappingError::Invalid(format!("ground truth: {e}")))
}

/// Records every ground-truth pair as a user-defined mapping.
pub fn apply_ground_truth(ws: &Workspace, state: &mut MappingState, gt: &[GroundTruthPair]) -> Result<Vec<String>, MappingError> {
    gt.iter().map(|p| map_manually(ws, state, &p.dfd, &p.pm)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// `None` when nothing was suggested.
    pub precision: Option<f64>,
    /// `None` when the ground truth is empty.
    pub recall: Option<f64>,
}

fn ratio(n: usize, d: usize) -> Option<f64> {
    (d > 0).then(|| n as f64 / d as f64)
}

pub fn evaluate_pairs(suggested: &BTreeSet<(DfdRef, String)>, gt: &BTreeSet<(DfdRef, String)>) -> EvalResult {
    let tp = suggested.intersection(gt).count();
    let fp = suggested.len() - tp;
    let fn_ = gt.len() - tp;
    EvalResult {
        tp,
        fp,
        fn_,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
    }
}

/// Compares the current suggestion list with a ground truth.
pub fn evaluate_against_ground_truth(ws: &Workspace, state: &MappingState, gt: &[GroundTruthPair]) -> EvalResult {
    let mut scratch = state.clone();
    let suggested = score_and_filter(ws, &mut scratch)
        .into_iter()
        .map(|s| (s.dfd_element, s.pm_element))
        .collect();
    let gt = gt.iter().map(|p| (p.dfd.clone(), p.pm.clone())).collect();
    evaluate_pairs(&suggested, &gt)
}
