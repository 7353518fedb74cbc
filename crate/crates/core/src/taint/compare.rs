use super::{run_taint, TaintConfig, TaintMode};
use crate::pm::ProgramModel;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonRow {
    pub model: String,
    /// Unique (source, sink) alarm pairs per mode.
    pub counts: BTreeMap<TaintMode, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub averages: BTreeMap<TaintMode, f64>,
    /// Relative change of each mode's average against PLAIN, in percent.
    pub deltas: BTreeMap<TaintMode, Option<f64>>,
}

/// `↓ 50%`, `↑ 485%`, `± 0%`; `n/a` without a baseline.
pub fn format_delta(delta: Option<f64>) -> String {
    match delta {
        None => "n/a".into(),
        Some(d) => {
            let mag = format!("{:.2}", d.abs());
            let mag = mag.trim_end_matches('0').trim_end_matches('.');
            if d < 0.0 {
                format!("↓ {mag}%")
            } else if d > 0.0 {
                format!("↑ {mag}%")
            } else {
                "± 0%".into()
            }
        }
    }
}

fn rel(x: f64, base: f64) -> Option<f64> {
    (base > 0.0).then(|| (x - base) / base * 100.0)
}

/// Runs every configuration and tabulates alarm counts per model.
/// A PLAIN run is global, so each model gets the same PLAIN count.
pub fn compare_configs(pm: &ProgramModel, models: &[String], configs: &[TaintConfig]) -> ComparisonReport {
    let mut rows: Vec<ComparisonRow> = models
        .iter()
        .map(|m| ComparisonRow {
            model: m.clone(),
            counts: BTreeMap::new(),
        })
        .collect();
    for cfg in configs {
        let result = run_taint(pm, cfg);
        for row in &mut rows {
            let prefix = format!("{}/", row.model);
            let n = result
                .alarms
                .iter()
                .filter(|a| cfg.mode == TaintMode::Plain || a.asset.as_deref().is_some_and(|k| k.starts_with(&prefix)))
                .map(|a| (&a.source, &a.sink))
                .collect::<std::collections::BTreeSet<_>>()
                .len();
            row.counts.insert(cfg.mode, n);
        }
    }
    let mut averages = BTreeMap::new();
    for cfg in configs {
        let sum: usize = rows.iter().map(|r| r.counts[&cfg.mode]).sum();
        let avg = if rows.is_empty() { 0.0 } else { sum as f64 / rows.len() as f64 };
        averages.insert(cfg.mode, avg);
    }
    let deltas = match averages.get(&TaintMode::Plain) {
        Some(&base) => averages
            .iter()
            .filter(|(m, _)| **m != TaintMode::Plain)
            .map(|(m, v)| (*m, rel(*v, base)))
            .collect(),
        None => BTreeMap::new(),
    };
    ComparisonReport { rows, averages, deltas }
}

impl ComparisonReport {
    /// Plain-text table: one row per model, then the averages with relative changes.
    pub fn to_table(&self) -> String {
        let modes: Vec<TaintMode> = self.averages.keys().copied().collect();
        let mut out = String::new();
        let _ = write!(out, "{:<20}", "SecDFD");
        for m in &modes {
            let _ = write!(out, " {:>14}", m.to_string());
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<20}", r.model);
            for m in &modes {
                let _ = write!(out, " {:>14}", r.counts.get(m).copied().unwrap_or(0));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<20}", "average");
        for m in &modes {
            let cell = match self.deltas.get(m) {
                Some(d) => format!("{:.2} ({})", self.averages[m], format_delta(*d)),
                None => format!("{:.2}", self.averages[m]),
            };
            let _ = write!(out, " {cell:>14}");
        }
        out.push('\n');
        out
    }
}
