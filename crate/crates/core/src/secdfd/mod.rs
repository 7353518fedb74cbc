//! Security data flow diagrams: model, textual syntax, label propagation,
//! attacker-zone leak checking and asset origin tracing.

pub mod dsl;
mod labels;
mod leaks;
mod model;
mod trace;

pub use dsl::{parse_secdfd, print_secdfd, validate, DslError, Pos};
pub use labels::{propagate_labels, LabelAssignment};
pub use leaks::{check_design_leaks, DesignLeak};
pub use model::*;
pub use trace::{trace_asset_origin, trace_asset_origin_pairs};
