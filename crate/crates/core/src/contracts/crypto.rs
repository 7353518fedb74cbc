//! Well-known cryptographic signatures and the encrypt/decrypt contract check.

use super::{ComplianceViolation, ViolationKind};
use crate::pattern::{glob, validate_pattern};
use crate::mapping::{ActiveMapping, MappingState, Workspace};
use crate::secdfd::ContractKind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Capability {
    Enc,
    Dec,
    Both,
}

impl Capability {
    pub fn covers(self, kind: ContractKind) -> bool {
        matches!(
            (self, kind),
            (Capability::Both, _) | (Capability::Enc, ContractKind::EncryptOrHash) | (Capability::Dec, ContractKind::Decrypt)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Capability::Enc => "enc",
            Capability::Dec => "dec",
            Capability::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct CryptoListError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A capability-tagged signature pattern, `pkg.Type.method(params):ret`,
/// where `*` matches any run of characters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CryptoEntry {
    pub capability: Capability,
    pub pattern: String,
}

impl CryptoEntry {
    pub fn new(capability: Capability, pattern: &str) -> Result<Self, CryptoListError> {
        validate_pattern(pattern).map_err(|(col, message)| CryptoListError { line: 1, col, message })?;
        Ok(CryptoEntry {
            capability,
            pattern: pattern.to_string(),
        })
    }

    pub fn matches(&self, qualified_signature: &str) -> bool {
        glob(self.pattern.as_bytes(), qualified_signature.as_bytes())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CryptoList {
    pub entries: BTreeSet<CryptoEntry>,
}

impl CryptoList {
    /// Parses `capability<TAB>pattern` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CryptoListError> {
        let mut entries = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let trimmed = raw.trim_end();
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let (cap, pat) = trimmed.split_once('\t').ok_or(CryptoListError {
                line,
                col: 1,
                message: "expected `<enc|dec|both><TAB><pattern>`".into(),
            })?;
            let capability = match cap.trim() {
                "enc" => Capability::Enc,
                "dec" => Capability::Dec,
                "both" => Capability::Both,
                other => {
                    return Err(CryptoListError {
                        line,
                        col: 1,
                        message: format!("unknown capability `{other}`"),
                    })
                }
            };
            let pattern = pat.trim();
            validate_pattern(pattern).map_err(|(col, message)| CryptoListError {
                line,
                col: cap.len() + 1 + col,
                message,
            })?;
            entries.insert(CryptoEntry {
                capability,
                pattern: pattern.to_string(),
            });
        }
        Ok(CryptoList { entries })
    }

    pub fn union(&self, other: &CryptoList) -> CryptoList {
        CryptoList {
            entries: self.entries.union(&other.entries).cloned().collect(),
        }
    }

    pub fn covers(&self, qualified_signature: &str, kind: ContractKind) -> bool {
        self.entries
            .iter()
            .any(|e| e.capability.covers(kind) && e.matches(qualified_signature))
    }
}

impl fmt::Display for CryptoList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{}\t{}", e.capability.as_str(), e.pattern)?;
        }
        Ok(())
    }
}

/// A process whose mapped definitions call a listed cryptographic function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CryptoConvergence {
    pub model: String,
    pub process: String,
    pub kind: ContractKind,
    /// Called definitions matching the list.
    pub callees: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CryptoReport {
    pub convergences: Vec<CryptoConvergence>,
    pub violations: Vec<ComplianceViolation>,
}

/// Checks every process carrying an encrypt/hash or decrypt contract: one of its
/// mapped definitions must call a definition matching a list entry with the
/// corresponding capability.
pub fn check_crypto(ws: &Workspace, state: &MappingState, list: &CryptoList) -> CryptoReport {
    let am = ActiveMapping::new(ws, state);
    let pm = &ws.pm;
    let mut report = CryptoReport::default();
    for m in &ws.models {
        for p in m.processes() {
            let defs = am.process_definitions(&m.name, &p.id);
            for kind in [ContractKind::EncryptOrHash, ContractKind::Decrypt] {
                let Some(index) = p.contracts.iter().position(|c| c.kind == kind) else { continue };
                let callees: BTreeSet<String> = pm
                    .calls
                    .iter()
                    .filter(|c| defs.contains(&c.caller))
                    .filter(|c| pm.qualified_signature(&c.callee).is_some_and(|q| list.covers(&q, kind)))
                    .map(|c| c.callee.clone())
                    .collect();
                if callees.is_empty() {
                    let mut v = ComplianceViolation::new(ViolationKind::CryptoAbsence, &m.name, &p.id);
                    v.contract = Some(index);
                    v.definitions = defs.iter().cloned().collect();
                    report.violations.push(v);
                } else {
                    report.convergences.push(CryptoConvergence {
                        model: m.name.clone(),
                        process: p.id.clone(),
                        kind,
                        callees: callees.into_iter().collect(),
                    });
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_matches() {
        let l = CryptoList::parse("# crypto\nenc\tcrypto.Cipher.encrypt(*):*\n\nboth\t*.process(bytes,boolean):bytes\n").unwrap();
        assert_eq!(l.entries.len(), 2);
        assert!(l.covers("crypto.Cipher.encrypt(String):bytes", ContractKind::EncryptOrHash));
        assert!(!l.covers("crypto.Cipher.encrypt(String):bytes", ContractKind::Decrypt));
        assert!(l.covers("a.B.process(bytes,boolean):bytes", ContractKind::Decrypt));
        assert!(!l.covers("a.B.process(bytes):bytes", ContractKind::Decrypt));
    }

    #[test]
    fn rejects_malformed_with_position() {
        let e = CryptoList::parse("enc\tCipher.encrypt(String:bytes\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.col > 4, "{e}");
        let e = CryptoList::parse("enc\tok.A.b():c\nfoo\tA.b():c\n").unwrap_err();
        assert_eq!((e.line, e.col), (2, 1));
        assert!(CryptoList::parse("enc\tencrypt():c").is_err());
        assert!(CryptoList::parse("enc A.b():c").is_err());
        assert!(CryptoList::parse("enc\tA.b(x):c d").is_err());
    }

    #[test]
    fn display_round_trips() {
        let l = CryptoList::parse("dec\tA.b(c):d\nenc\tA.e():f\n").unwrap();
        assert_eq!(CryptoList::parse(&l.to_string()).unwrap(), l);
    }
}
