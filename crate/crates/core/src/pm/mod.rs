//! Program model: data types, extraction from corpus sources, JSON interchange and flow queries.

pub mod frontend;
mod json;
mod model;
mod query;

pub use frontend::{extract_pm, extract_pm_dir, type_id, FrontendError, BUILTIN_TYPES};
pub use json::{load_pm, save_pm};
pub use model::*;
pub use query::{communicated_type, in_flows, out_flows, reachable_bwd};
