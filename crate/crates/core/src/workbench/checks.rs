use super::session::Session;
use super::ServiceError;
use crate::contracts::{check_all_processing, check_crypto, ComplianceViolation, ViolationKind};
use crate::secdfd::{check_design_leaks, propagate_labels};
use crate::taint::{build_config, run_taint, TaintMode};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Crypto and processing contracts together.
    Contracts,
    Crypto,
    Design,
    Taint(TaintMode),
}

impl CheckKind {
    /// Key under which the latest report is kept.
    pub fn key(self) -> String {
        match self {
            CheckKind::Contracts => "contracts".into(),
            CheckKind::Crypto => "crypto".into(),
            CheckKind::Design => "design".into(),
            CheckKind::Taint(m) => format!("taint-{}", m.to_string().to_ascii_lowercase()),
        }
    }

    /// `kind` is contracts, crypto, design or taint; `mode` only applies to taint.
    pub fn parse(kind: &str, mode: Option<&str>) -> Result<Self, String> {
        match kind {
            "contracts" => Ok(CheckKind::Contracts),
            "crypto" => Ok(CheckKind::Crypto),
            "design" => Ok(CheckKind::Design),
            "taint" => Ok(CheckKind::Taint(mode.map_or(Ok(TaintMode::Plain), TaintMode::from_str)?)),
            other => Err(format!("unknown check `{other}`; expected contracts, crypto, design or taint")),
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// One reported problem, with an id that is stable across runs and reloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Finding {
    pub id: String,
    pub check: String,
    pub kind: String,
    pub model: String,
    /// Design element the marker attaches to.
    pub element: String,
    pub message: String,
    pub detail: Value,
}

impl Finding {
    fn new(check: &str, kind: &str, model: &str, element: &str, message: String, detail: Value) -> Self {
        let mut h = Sha256::new();
        for part in [check, kind, model, element, &detail.to_string()] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        let id: String = h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect();
        Finding {
            id: format!("f-{id}"),
            check: check.into(),
            kind: kind.into(),
            model: model.into(),
            element: element.into(),
            message,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub check: String,
    pub findings: Vec<Finding>,
    pub summary: Value,
}

fn kind_name(k: ViolationKind) -> &'static str {
    match k {
        ViolationKind::CryptoAbsence => "CRYPTO_ABSENCE",
        ViolationKind::AbsenceNotImplemented => "ABSENCE_NOT_IMPLEMENTED",
        ViolationKind::DivergenceNoBiunique => "DIVERGENCE_NO_BIUNIQUE",
        ViolationKind::DivergenceNotInDfd => "DIVERGENCE_NOT_IN_DFD",
    }
}

fn violation_finding(check: &str, v: &ComplianceViolation) -> Finding {
    let contract = v.contract.map_or(String::new(), |i| format!(" #{i}"));
    let message = match v.kind {
        ViolationKind::CryptoAbsence => {
            format!("{}: contract{contract} calls no listed cryptographic function", v.process)
        }
        ViolationKind::AbsenceNotImplemented => format!(
            "{}: contract{contract} has no implementation for `{}`",
            v.process,
            v.out_asset.as_deref().unwrap_or("?")
        ),
        ViolationKind::DivergenceNoBiunique => format!(
            "{}: {} specified flow(s) cannot be matched one-to-one with implemented flows",
            v.process,
            v.unassigned.len()
        ),
        ViolationKind::DivergenceNotInDfd => format!(
            "{}: implemented flow into `{}` is not specified by any contract",
            v.process,
            v.iflow.as_ref().map_or("?", |f| f.target.as_str())
        ),
    };
    let detail = serde_json::to_value(v).expect("violation serializes");
    Finding::new(check, kind_name(v.kind), &v.model, &v.process, message, detail)
}

pub(super) fn run(session: &Session, kind: CheckKind) -> Result<CheckReport, ServiceError> {
    let ws = &session.ws;
    let st = &session.state;
    let check = kind.key();
    let (findings, summary) = match kind {
        CheckKind::Contracts | CheckKind::Crypto => {
            let crypto = check_crypto(ws, st, &session.crypto_list());
            let mut violations = crypto.violations;
            let mut summary = json!({ "cryptoConvergences": crypto.convergences.len() });
            if kind == CheckKind::Contracts {
                let processing = check_all_processing(ws, st);
                violations.extend(processing.violations);
                summary["flowConvergences"] = json!(processing.convergences.len());
            }
            violations.sort();
            (violations.iter().map(|v| violation_finding(&check, v)).collect(), summary)
        }
        CheckKind::Design => {
            let mut out = Vec::new();
            for m in &ws.models {
                for leak in check_design_leaks(m, &propagate_labels(m)) {
                    let element = leak.element.to_string();
                    let message = format!("confidential `{}` is observable by zone `{}` at {element}", leak.asset, leak.zone);
                    let detail = serde_json::to_value(&leak).expect("leak serializes");
                    out.push(Finding::new(&check, "DESIGN_LEAK", &m.name, &element, message, detail));
                }
            }
            (out, json!({ "models": ws.models.len() }))
        }
        CheckKind::Taint(mode) => {
            if mode != TaintMode::Plain && st.active().next().is_none() {
                return Err(ServiceError::Precondition(format!(
                    "{mode} taint analysis needs at least one accepted or user-defined mapping"
                )));
            }
            let (sources, mut unresolved) = session.config.sources.resolve(&ws.pm);
            let (sinks, unresolved_sinks) = session.config.sinks.resolve(&ws.pm);
            unresolved.extend(unresolved_sinks);
            if sources.is_empty() || sinks.is_empty() {
                return Err(ServiceError::Precondition(
                    "taint analysis needs default sources and sinks that resolve in the program model".into(),
                ));
            }
            let cfg = build_config(mode, ws, st, &sources, &sinks);
            let result = run_taint(&ws.pm, &cfg);
            let findings = result
                .alarms
                .iter()
                .map(|a| {
                    let (model, element) = match a.asset.as_deref().and_then(|k| k.split_once('/')) {
                        Some((m, e)) => (m.to_string(), e.to_string()),
                        None => (String::new(), String::new()),
                    };
                    let message = format!("data from `{}` reaches `{}`", a.source, a.sink);
                    let detail = serde_json::to_value(a).expect("alarm serializes");
                    Finding::new(&check, "TAINT_ALARM", &model, &element, message, detail)
                })
                .collect();
            unresolved.extend(result.unresolved);
            unresolved.sort();
            unresolved.dedup();
            (
                findings,
                json!({ "mode": mode, "removedSinks": cfg.removed_sinks(), "unresolved": unresolved }),
            )
        }
    };
    Ok(CheckReport { check, findings, summary })
}
