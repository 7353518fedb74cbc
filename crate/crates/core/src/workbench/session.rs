use super::checks::{self, CheckKind, CheckReport, Finding};
use super::{FileError, ServiceError};
use crate::contracts::{run_injection_experiment, Capability, CryptoEntry, CryptoList, InjectionKind, InjectionReport};
use crate::mapping::{
    decide, evaluate_against_ground_truth, map_manually, run_iteration, score_and_filter, Decision, DfdRef,
    EvalResult, GroundTruthPair, MappingState, Suggestion, Workspace,
};
use crate::pm::extract_pm_dir;
use crate::secdfd::{parse_secdfd, SecDfd};
use crate::taint::SigList;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionMeta {
    pub id: String,
    pub corpus: String,
    pub models: Vec<String>,
    /// Unix seconds.
    pub created_at: u64,
    pub updated_at: u64,
}

/// Default taint sources and sinks, as signature patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub sources: SigList,
    pub sinks: SigList,
}

/// The crypto list loaded at creation plus entries added at runtime; checks use the union.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionCrypto {
    pub base: CryptoList,
    pub added: CryptoList,
}

/// Inputs of a new session. Paths are read by the service.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreateSession {
    pub corpus: PathBuf,
    pub models: Vec<PathBuf>,
    #[serde(default)]
    pub crypto: Option<PathBuf>,
    #[serde(default)]
    pub sources: Option<PathBuf>,
    #[serde(default)]
    pub sinks: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CryptoEntryInput {
    pub capability: String,
    pub pattern: String,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub meta: SessionMeta,
    pub ws: Workspace,
    pub state: MappingState,
    pub crypto: SessionCrypto,
    pub config: SessionConfig,
    /// Latest report per check key.
    pub reports: BTreeMap<String, CheckReport>,
}

fn read_text(path: &Path, errors: &mut Vec<FileError>) -> Option<String> {
    match std::fs::read_to_string(path) {
        Ok(t) => Some(t),
        Err(e) => {
            errors.push(FileError {
                file: path.display().to_string(),
                message: e.to_string(),
            });
            None
        }
    }
}

fn file_error(path: &Path, message: impl ToString) -> FileError {
    FileError {
        file: path.display().to_string(),
        message: message.to_string(),
    }
}

impl Session {
    /// Loads every input, reporting all failing files at once, then runs iteration 0.
    pub fn build(id: &str, req: &CreateSession, now: u64) -> Result<Session, ServiceError> {
        if req.models.is_empty() {
            return Err(ServiceError::bad_request("at least one SecDFD model is required"));
        }
        let mut errors = Vec::new();
        let pm = match extract_pm_dir(&req.corpus) {
            Ok(pm) => Some(pm),
            Err(e) => {
                errors.push(file_error(&req.corpus, e));
                None
            }
        };
        let mut models: Vec<SecDfd> = Vec::new();
        for path in &req.models {
            if let Some(text) = read_text(path, &mut errors) {
                match parse_secdfd(&text) {
                    Ok(m) if models.iter().any(|x| x.name == m.name) => {
                        errors.push(file_error(path, format!("duplicate model name `{}`", m.name)))
                    }
                    Ok(m) => models.push(m),
                    Err(e) => errors.push(file_error(path, e)),
                }
            }
        }
        let crypto = match &req.crypto {
            Some(p) => read_text(p, &mut errors)
                .and_then(|t| CryptoList::parse(&t).map_err(|e| errors.push(file_error(p, e))).ok())
                .unwrap_or_default(),
            None => CryptoList::default(),
        };
        let mut siglist = |p: &Option<PathBuf>| match p {
            Some(p) => read_text(p, &mut errors)
                .and_then(|t| SigList::parse(&t).map_err(|e| errors.push(file_error(p, e))).ok())
                .unwrap_or_default(),
            None => SigList::default(),
        };
        let sources = siglist(&req.sources);
        let sinks = siglist(&req.sinks);
        let pm = match pm {
            Some(pm) if errors.is_empty() => pm,
            _ => return Err(ServiceError::Parse(errors)),
        };
        let ws = Workspace::new(models, pm);
        let mut state = MappingState::new(&ws);
        run_iteration(&ws, &mut state);
        Ok(Session {
            meta: SessionMeta {
                id: id.to_string(),
                corpus: req.corpus.display().to_string(),
                models: req.models.iter().map(|p| p.display().to_string()).collect(),
                created_at: now,
                updated_at: now,
            },
            ws,
            state,
            crypto: SessionCrypto {
                base: crypto,
                added: CryptoList::default(),
            },
            config: SessionConfig { sources, sinks },
            reports: BTreeMap::new(),
        })
    }

    /// Current filtered suggestions; does not modify the session.
    pub fn suggestions(&self) -> Vec<Suggestion> {
        let mut st = self.state.clone();
        score_and_filter(&self.ws, &mut st)
    }

    /// Applies a decision; on error the session is unchanged.
    pub fn decide(&mut self, entry: &str, decision: Decision) -> Result<Vec<Suggestion>, ServiceError> {
        let mut st = self.state.clone();
        decide(&mut st, entry, decision)?;
        self.state = st;
        Ok(self.suggestions())
    }

    /// Adds a user-defined mapping; returns its entry id.
    pub fn map(&mut self, dfd: &str, pm: &str) -> Result<String, ServiceError> {
        let r: DfdRef = dfd.parse()?;
        let mut st = self.state.clone();
        let id = map_manually(&self.ws, &mut st, &r, pm)?;
        self.state = st;
        Ok(id)
    }

    pub fn iterate(&mut self) -> Vec<Suggestion> {
        run_iteration(&self.ws, &mut self.state)
    }

    pub fn crypto_list(&self) -> CryptoList {
        self.crypto.base.union(&self.crypto.added)
    }

    /// Replaces the runtime additions. Every entry is validated before anything changes.
    pub fn set_crypto_entries(&mut self, entries: &[CryptoEntryInput]) -> Result<CryptoList, ServiceError> {
        let mut added = BTreeSet::new();
        for (i, e) in entries.iter().enumerate() {
            let capability = match e.capability.as_str() {
                "enc" => Capability::Enc,
                "dec" => Capability::Dec,
                "both" => Capability::Both,
                other => {
                    return Err(ServiceError::BadRequest {
                        message: format!("entry {i}: unknown capability `{other}`"),
                        detail: json!({ "entry": i, "field": "capability" }),
                    })
                }
            };
            let entry = CryptoEntry::new(capability, &e.pattern).map_err(|err| ServiceError::BadRequest {
                message: format!("entry {i}: {}", err.message),
                detail: json!({ "entry": i, "field": "pattern", "col": err.col }),
            })?;
            added.insert(entry);
        }
        self.crypto.added = CryptoList { entries: added };
        Ok(self.crypto_list())
    }

    /// Runs a check and records its report.
    pub fn check(&mut self, kind: CheckKind) -> Result<CheckReport, ServiceError> {
        let report = checks::run(self, kind)?;
        self.reports.insert(kind.key(), report.clone());
        Ok(report)
    }

    /// Findings of the latest report of every check, in check-key order.
    pub fn violations(&self) -> Vec<Finding> {
        self.reports.values().flat_map(|r| r.findings.iter().cloned()).collect()
    }

    pub fn evaluate(&self, gt: &[GroundTruthPair]) -> EvalResult {
        evaluate_against_ground_truth(&self.ws, &self.state, gt)
    }

    pub fn inject(&self, kinds: &[InjectionKind]) -> Result<InjectionReport, ServiceError> {
        run_injection_experiment(&self.ws, &self.state, &self.crypto_list(), kinds)
            .map_err(|e| ServiceError::Precondition(e.to_string()))
    }
}
