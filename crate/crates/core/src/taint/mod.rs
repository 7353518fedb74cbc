//! Design-derived taint policies and an explicit-flow taint analysis over the program model.

mod compare;
mod derive;
mod run;

pub use compare::{compare_configs, format_delta, ComparisonReport, ComparisonRow};
pub use derive::{asset_key, derive_allowed_sinks, derive_sources, derive_zone_sinks};
pub use run::{run_taint, TaintAlarm, TaintResult};

use crate::mapping::{MappingState, Workspace};
use crate::pattern::{glob, validate_pattern};
use crate::pm::ProgramModel;
use crate::secdfd::Label;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Alarms kept per run.
pub const DEFAULT_ALARM_CAP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaintMode {
    Plain,
    PartlyOpt,
    FullyOpt,
}

impl TaintMode {
    pub const ALL: [TaintMode; 3] = [TaintMode::Plain, TaintMode::PartlyOpt, TaintMode::FullyOpt];
}

impl FromStr for TaintMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(TaintMode::Plain),
            "partly" | "partly_opt" => Ok(TaintMode::PartlyOpt),
            "fully" | "fully_opt" => Ok(TaintMode::FullyOpt),
            other => Err(format!("unknown taint mode `{other}`; expected plain, partly or fully")),
        }
    }
}

impl fmt::Display for TaintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaintMode::Plain => "PLAIN",
            TaintMode::PartlyOpt => "PARTLY_OPT",
            TaintMode::FullyOpt => "FULLY_OPT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SigListError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A `.sources` / `.sinks` file: one signature pattern per line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigList {
    pub patterns: Vec<String>,
}

impl SigList {
    pub fn parse(text: &str) -> Result<Self, SigListError> {
        let mut patterns = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            validate_pattern(t).map_err(|(col, message)| SigListError {
                line: n + 1,
                col,
                message,
            })?;
            patterns.push(t.to_string());
        }
        Ok(SigList { patterns })
    }

    /// Qualified signatures of `pm` matched by the list, and the patterns matching nothing.
    pub fn resolve(&self, pm: &ProgramModel) -> (BTreeSet<String>, Vec<String>) {
        let all: Vec<String> = pm
            .definitions
            .iter()
            .filter_map(|d| pm.qualified_signature(&d.id))
            .collect();
        let mut hit = BTreeSet::new();
        let mut unresolved = Vec::new();
        for p in &self.patterns {
            let mut any = false;
            for q in &all {
                if glob(p.as_bytes(), q.as_bytes()) {
                    hit.insert(q.clone());
                    any = true;
                }
            }
            if !any {
                unresolved.push(p.clone());
            }
        }
        (hit, unresolved)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssetPolicy {
    pub sources: BTreeSet<String>,
    pub sinks: BTreeSet<String>,
    pub allowed_sinks: BTreeSet<String>,
    pub zone_sinks: BTreeSet<String>,
}

/// Sources and sinks for one analysis configuration. Signatures are qualified:
/// `<type>.<method>(<params>):<return>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaintConfig {
    pub mode: TaintMode,
    pub default_sources: BTreeSet<String>,
    pub default_sinks: BTreeSet<String>,
    /// Keyed by `model/asset`; empty for PLAIN.
    pub per_asset: BTreeMap<String, AssetPolicy>,
    pub alarm_cap: usize,
}

impl TaintConfig {
    /// Default sinks excluded from some asset's policy because the asset may exit there.
    pub fn removed_sinks(&self) -> usize {
        self.per_asset
            .values()
            .map(|p| p.allowed_sinks.intersection(&self.default_sinks).count())
            .sum()
    }
}

/// Builds the configuration for `mode`. Per-asset policies cover confidential assets only.
pub fn build_config(
    mode: TaintMode,
    ws: &Workspace,
    state: &MappingState,
    default_sources: &BTreeSet<String>,
    default_sinks: &BTreeSet<String>,
) -> TaintConfig {
    let mut per_asset = BTreeMap::new();
    if mode != TaintMode::Plain {
        for m in &ws.models {
            let zone = derive_zone_sinks(ws, state, m);
            for a in m.assets.iter().filter(|a| a.label == Label::High) {
                let sources = derive_sources(ws, state, m, &a.name);
                let allowed = derive_allowed_sinks(ws, state, m, &a.name);
                let sinks = match mode {
                    TaintMode::FullyOpt => default_sinks
                        .difference(&allowed)
                        .cloned()
                        .chain(zone.iter().cloned())
                        .collect(),
                    _ => default_sinks.clone(),
                };
                per_asset.insert(
                    asset_key(&m.name, &a.name),
                    AssetPolicy {
                        sources,
                        sinks,
                        allowed_sinks: allowed,
                        zone_sinks: zone.clone(),
                    },
                );
            }
        }
    }
    TaintConfig {
        mode,
        default_sources: default_sources.clone(),
        default_sinks: default_sinks.clone(),
        per_asset,
        alarm_cap: DEFAULT_ALARM_CAP,
    }
}
