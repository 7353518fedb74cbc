//! Heuristic, user-steered mapping between SecDFD elements and program model elements.

mod engine;
mod eval;
pub mod names;
mod report;
mod state;

pub use engine::{
    closure, decide, discover_definitions, extend_to_signatures, map_manually, match_names, rescore,
    run_iteration, score_and_filter, sort_suggestions, Suggestion, MAX_INTERMEDIATES,
};
pub use eval::{apply_ground_truth, evaluate_against_ground_truth, evaluate_pairs, load_ground_truth, EvalResult, GroundTruthPair};
pub use names::{names_correspond, split_name, words_equivalent};
pub use report::{compliance_report, Absence, ComplianceReport, Divergence};
pub use state::*;
