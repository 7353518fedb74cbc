//! Line-oriented textual syntax for SecDFD models.
//!
//! ```text
//! model EclipseSecureStorage
//! external Plugin
//! process Get_Value
//! store Cache
//! asset secret : String high from Cache to Plugin
//! flow 1 : Plugin -> Get_Value carrying path
//! contract Decrypt_data decrypt in encr_data, password out secret
//! zone Outside { Plugin, 3 }
//! ```
//!
//! Declarations may appear in any order; references are resolved after the
//! whole text has been read. `#` starts a comment. Numeric zone members refer
//! to flow indices.

use super::model::*;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: reference to undeclared {what} `{name}`")]
    Dangling {
        pos: Pos,
        what: &'static str,
        name: String,
    },
    #[error("{pos}: duplicate {what} `{name}`")]
    Duplicate {
        pos: Pos,
        what: &'static str,
        name: String,
    },
    #[error("{pos}: contract asset `{asset}` is not carried by any flow of process `{process}`")]
    ContractAssetNotCarried {
        pos: Pos,
        process: String,
        asset: String,
    },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
}

impl DslError {
    pub fn pos(&self) -> Pos {
        match self {
            DslError::Syntax { pos, .. }
            | DslError::Dangling { pos, .. }
            | DslError::Duplicate { pos, .. }
            | DslError::ContractAssetNotCarried { pos, .. }
            | DslError::Invalid { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u32),
    Colon,
    Comma,
    Arrow,
    LBrace,
    RBrace,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<(Tok, Pos)>, DslError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos {
            line: line_no,
            col: i + 1,
        };
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            ':' => {
                out.push((Tok::Colon, pos));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, pos));
                i += 1;
            }
            '{' => {
                out.push((Tok::LBrace, pos));
                i += 1;
            }
            '}' => {
                out.push((Tok::RBrace, pos));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                i += 2;
            }
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if word.chars().all(|c| c.is_ascii_digit()) {
                    let n = word.parse::<u32>().map_err(|_| DslError::Syntax {
                        pos,
                        msg: format!("integer `{word}` out of range"),
                    })?;
                    out.push((Tok::Int(n), pos));
                } else {
                    out.push((Tok::Ident(word), pos));
                }
            }
            other => {
                return Err(DslError::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    eol: Pos,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.eol)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn found(&self) -> String {
        self.peek()
            .map(Tok::describe)
            .unwrap_or_else(|| "end of line".into())
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), DslError> {
        match self.toks.get(self.at) {
            Some((Tok::Ident(s), p)) => {
                let r = (s.clone(), *p);
                self.at += 1;
                Ok(r)
            }
            _ => self.err(format!("expected {what}, found {}", self.found())),
        }
    }

    fn int(&mut self, what: &str) -> Result<(u32, Pos), DslError> {
        match self.toks.get(self.at) {
            Some((Tok::Int(n), p)) => {
                let r = (*n, *p);
                self.at += 1;
                Ok(r)
            }
            _ => self.err(format!("expected {what}, found {}", self.found())),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), DslError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {}, found {}", tok.describe(), self.found()))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.at += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`, found {}", self.found())),
        }
    }

    fn ident_list(&mut self, what: &str) -> Result<Vec<(String, Pos)>, DslError> {
        let mut v = vec![self.ident(what)?];
        while self.peek() == Some(&Tok::Comma) {
            self.at += 1;
            v.push(self.ident(what)?);
        }
        Ok(v)
    }

    fn end(&self) -> Result<(), DslError> {
        if self.at < self.toks.len() {
            self.err(format!("unexpected {}", self.found()))
        } else {
            Ok(())
        }
    }
}

/// Source positions of declarations, used to locate validation errors.
#[derive(Debug, Default)]
struct Positions {
    nodes: BTreeMap<String, Pos>,
    assets: BTreeMap<String, Vec<Pos>>,
    flows: BTreeMap<u32, Vec<Pos>>,
    contracts: BTreeMap<(String, usize), Vec<Pos>>,
    zones: BTreeMap<String, Vec<Pos>>,
    contract_lines: BTreeMap<(String, usize), Pos>,
}

/// Parses and validates a SecDFD from its textual form.
pub fn parse_secdfd(text: &str) -> Result<SecDfd, DslError> {
    let mut model = SecDfd::default();
    let mut named = false;
    let mut pos = Positions::default();
    // contracts are attached after all nodes are known
    let mut pending_contracts: Vec<(String, Pos, ProcessContract, Vec<Pos>)> = Vec::new();

    for (ix, raw) in text.lines().enumerate() {
        let line_no = ix + 1;
        let toks = tokenize(raw, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor {
            eol: Pos {
                line: line_no,
                col: raw.chars().count() + 1,
            },
            toks,
            at: 0,
        };
        let (kw, kw_pos) = c.ident("declaration keyword")?;
        match kw.as_str() {
            "model" => {
                let (name, p) = c.ident("model name")?;
                if named {
                    return Err(DslError::Duplicate {
                        pos: p,
                        what: "model declaration",
                        name,
                    });
                }
                model.name = name;
                named = true;
            }
            "process" | "external" | "store" => {
                let kind = match kw.as_str() {
                    "process" => NodeKind::Process,
                    "external" => NodeKind::ExternalEntity,
                    _ => NodeKind::DataStore,
                };
                let (id, p) = c.ident("node identifier")?;
                if pos.nodes.contains_key(&id) {
                    return Err(DslError::Duplicate {
                        pos: p,
                        what: "node",
                        name: id,
                    });
                }
                pos.nodes.insert(id.clone(), p);
                model.nodes.push(DfdNode {
                    id,
                    kind,
                    contracts: Vec::new(),
                });
            }
            "asset" => {
                let (name, p) = c.ident("asset name")?;
                c.expect(Tok::Colon)?;
                let (value_type, _) = c.ident("asset type")?;
                let (lbl, lp) = c.ident("`high` or `low`")?;
                let label = match lbl.as_str() {
                    "high" => Label::High,
                    "low" => Label::Low,
                    _ => {
                        return Err(DslError::Syntax {
                            pos: lp,
                            msg: format!("expected `high` or `low`, found `{lbl}`"),
                        })
                    }
                };
                c.keyword("from")?;
                let (source, sp) = c.ident("source node")?;
                c.keyword("to")?;
                let targets = c.ident_list("target node")?;
                if pos.assets.contains_key(&name) {
                    return Err(DslError::Duplicate {
                        pos: p,
                        what: "asset",
                        name,
                    });
                }
                let mut refs = vec![p, sp];
                refs.extend(targets.iter().map(|(_, p)| *p));
                pos.assets.insert(name.clone(), refs);
                model.assets.push(Asset {
                    name,
                    value_type,
                    label,
                    source,
                    targets: targets.into_iter().map(|(t, _)| t).collect(),
                });
            }
            "flow" => {
                let (index, p) = c.int("flow index")?;
                c.expect(Tok::Colon)?;
                let (source, sp) = c.ident("source node")?;
                c.expect(Tok::Arrow)?;
                let (target, tp) = c.ident("target node")?;
                c.keyword("carrying")?;
                let assets = c.ident_list("asset name")?;
                if pos.flows.contains_key(&index) {
                    return Err(DslError::Duplicate {
                        pos: p,
                        what: "flow index",
                        name: index.to_string(),
                    });
                }
                let mut refs = vec![p, sp, tp];
                refs.extend(assets.iter().map(|(_, p)| *p));
                pos.flows.insert(index, refs);
                model.flows.push(DfdFlow {
                    index,
                    source,
                    target,
                    assets: assets.into_iter().map(|(a, _)| a).collect(),
                });
            }
            "contract" => {
                let (process, pp) = c.ident("process identifier")?;
                let (k, kp) = c.ident("contract kind")?;
                let kind = match k.as_str() {
                    "encrypt" | "hash" => ContractKind::EncryptOrHash,
                    "decrypt" => ContractKind::Decrypt,
                    "forward" => ContractKind::Forward,
                    "join" => ContractKind::Join,
                    _ => {
                        return Err(DslError::Syntax {
                            pos: kp,
                            msg: format!(
                                "expected one of `encrypt`, `hash`, `decrypt`, `forward`, `join`, found `{k}`"
                            ),
                        })
                    }
                };
                c.keyword("in")?;
                let ins = c.ident_list("asset name")?;
                c.keyword("out")?;
                let outs = c.ident_list("asset name")?;
                let mut refs: Vec<Pos> = ins.iter().map(|(_, p)| *p).collect();
                refs.extend(outs.iter().map(|(_, p)| *p));
                pending_contracts.push((
                    process,
                    pp,
                    ProcessContract {
                        kind,
                        in_assets: ins.into_iter().map(|(a, _)| a).collect(),
                        out_assets: outs.into_iter().map(|(a, _)| a).collect(),
                    },
                    refs,
                ));
            }
            "zone" | "boundary" => {
                let (name, p) = c.ident("name")?;
                c.expect(Tok::LBrace)?;
                let mut members: Vec<(ZoneMember, Pos)> = Vec::new();
                if c.peek() != Some(&Tok::RBrace) {
                    loop {
                        let mp = c.pos();
                        match c.peek().cloned() {
                            Some(Tok::Ident(s)) => {
                                c.at += 1;
                                members.push((ZoneMember::Node(s), mp));
                            }
                            Some(Tok::Int(n)) if kw == "zone" => {
                                c.at += 1;
                                members.push((ZoneMember::Flow(n), mp));
                            }
                            _ => return c.err(format!("expected member, found {}", c.found())),
                        }
                        if c.peek() == Some(&Tok::Comma) {
                            c.at += 1;
                        } else {
                            break;
                        }
                    }
                }
                c.expect(Tok::RBrace)?;
                if kw == "zone" {
                    if pos.zones.contains_key(&name) {
                        return Err(DslError::Duplicate {
                            pos: p,
                            what: "zone",
                            name,
                        });
                    }
                    pos.zones
                        .insert(name.clone(), members.iter().map(|(_, p)| *p).collect());
                    model.zones.push(AttackerZone {
                        name,
                        members: members.into_iter().map(|(m, _)| m).collect(),
                    });
                } else {
                    model.boundaries.push(TrustBoundary {
                        name,
                        members: members.into_iter().map(|(m, _)| m.to_string()).collect(),
                    });
                }
            }
            _ => {
                return Err(DslError::Syntax {
                    pos: kw_pos,
                    msg: format!("unknown declaration `{kw}`"),
                })
            }
        }
        c.end()?;
    }

    if !named {
        return Err(DslError::Syntax {
            pos: Pos { line: 1, col: 1 },
            msg: "missing `model <id>` declaration".into(),
        });
    }

    for (process, pp, contract, refs) in pending_contracts {
        let node = model
            .nodes
            .iter_mut()
            .find(|n| n.id == process)
            .ok_or_else(|| DslError::Dangling {
                pos: pp,
                what: "process",
                name: process.clone(),
            })?;
        if node.kind != NodeKind::Process {
            return Err(DslError::Invalid {
                pos: pp,
                msg: format!("contracts may only be attached to processes; `{process}` is not a process"),
            });
        }
        let key = (process.clone(), node.contracts.len());
        pos.contracts.insert(key.clone(), refs);
        pos.contract_lines.insert(key, pp);
        node.contracts.push(contract);
    }

    validate_at(&model, &pos)?;
    Ok(model)
}

/// Checks every structural invariant of a model built without source text.
pub fn validate(model: &SecDfd) -> Result<(), DslError> {
    let mut seen = BTreeSet::new();
    for n in &model.nodes {
        if !seen.insert(n.id.as_str()) {
            return Err(DslError::Duplicate {
                pos: Pos::default(),
                what: "node",
                name: n.id.clone(),
            });
        }
        if n.kind != NodeKind::Process && !n.contracts.is_empty() {
            return Err(DslError::Invalid {
                pos: Pos::default(),
                msg: format!("contracts may only be attached to processes; `{}` is not a process", n.id),
            });
        }
    }
    let mut assets = BTreeSet::new();
    for a in &model.assets {
        if !assets.insert(a.name.as_str()) {
            return Err(DslError::Duplicate {
                pos: Pos::default(),
                what: "asset",
                name: a.name.clone(),
            });
        }
    }
    let mut flows = BTreeSet::new();
    for f in &model.flows {
        if !flows.insert(f.index) {
            return Err(DslError::Duplicate {
                pos: Pos::default(),
                what: "flow index",
                name: f.index.to_string(),
            });
        }
    }
    validate_at(model, &Positions::default())
}

fn at(v: Option<&Vec<Pos>>, i: usize) -> Pos {
    v.and_then(|v| v.get(i)).copied().unwrap_or_default()
}

fn validate_at(model: &SecDfd, pos: &Positions) -> Result<(), DslError> {
    let node_exists = |id: &str| model.nodes.iter().any(|n| n.id == id);
    let asset_exists = |id: &str| model.assets.iter().any(|a| a.name == id);

    for a in &model.assets {
        let p = pos.assets.get(&a.name);
        if !node_exists(&a.source) {
            return Err(DslError::Dangling {
                pos: at(p, 1),
                what: "node",
                name: a.source.clone(),
            });
        }
        if a.targets.is_empty() {
            return Err(DslError::Invalid {
                pos: at(p, 0),
                msg: format!("asset `{}` needs at least one target", a.name),
            });
        }
        for (i, t) in a.targets.iter().enumerate() {
            if !node_exists(t) {
                return Err(DslError::Dangling {
                    pos: at(p, 2 + i),
                    what: "node",
                    name: t.clone(),
                });
            }
        }
    }

    for f in &model.flows {
        let p = pos.flows.get(&f.index);
        if !node_exists(&f.source) {
            return Err(DslError::Dangling {
                pos: at(p, 1),
                what: "node",
                name: f.source.clone(),
            });
        }
        if !node_exists(&f.target) {
            return Err(DslError::Dangling {
                pos: at(p, 2),
                what: "node",
                name: f.target.clone(),
            });
        }
        if f.assets.is_empty() {
            return Err(DslError::Invalid {
                pos: at(p, 0),
                msg: format!("flow {} carries no assets", f.index),
            });
        }
        for (i, a) in f.assets.iter().enumerate() {
            if !asset_exists(a) {
                return Err(DslError::Dangling {
                    pos: at(p, 3 + i),
                    what: "asset",
                    name: a.clone(),
                });
            }
        }
    }

    for n in &model.nodes {
        let touching: BTreeSet<&str> = model
            .flows
            .iter()
            .filter(|f| f.source == n.id || f.target == n.id)
            .flat_map(|f| f.assets.iter().map(String::as_str))
            .collect();
        for (ci, c) in n.contracts.iter().enumerate() {
            let key = (n.id.clone(), ci);
            let p = pos.contracts.get(&key);
            let line = pos.contract_lines.get(&key).copied().unwrap_or_default();
            let (ins, outs) = (c.in_assets.len(), c.out_assets.len());
            let arity_ok = match c.kind {
                ContractKind::Forward => ins == 1 && outs == 1,
                ContractKind::Join => ins >= 2 && outs == 1,
                ContractKind::EncryptOrHash | ContractKind::Decrypt => ins >= 1 && outs >= 1,
            };
            if !arity_ok {
                return Err(DslError::Invalid {
                    pos: line,
                    msg: format!(
                        "{} contract on `{}` has {ins} input and {outs} output assets",
                        c.kind, n.id
                    ),
                });
            }
            for (i, a) in c.in_assets.iter().chain(c.out_assets.iter()).enumerate() {
                if !asset_exists(a) {
                    return Err(DslError::Dangling {
                        pos: at(p, i),
                        what: "asset",
                        name: a.clone(),
                    });
                }
                if !touching.contains(a.as_str()) {
                    return Err(DslError::ContractAssetNotCarried {
                        pos: at(p, i),
                        process: n.id.clone(),
                        asset: a.clone(),
                    });
                }
            }
        }
    }

    for z in &model.zones {
        let p = pos.zones.get(&z.name);
        for (i, m) in z.members.iter().enumerate() {
            let ok = match m {
                ZoneMember::Node(id) => node_exists(id),
                ZoneMember::Flow(ix) => model.flows.iter().any(|f| f.index == *ix),
            };
            if !ok {
                return Err(DslError::Dangling {
                    pos: at(p, i),
                    what: match m {
                        ZoneMember::Node(_) => "node",
                        ZoneMember::Flow(_) => "flow",
                    },
                    name: m.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Prints a model in canonical textual form. `parse_secdfd(print_secdfd(m)) == m`.
pub fn print_secdfd(model: &SecDfd) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", model.name);
    for n in &model.nodes {
        let _ = writeln!(out, "{} {}", n.kind.keyword(), n.id);
    }
    for a in &model.assets {
        let _ = writeln!(
            out,
            "asset {} : {} {} from {} to {}",
            a.name,
            a.value_type,
            a.label,
            a.source,
            a.targets.join(", ")
        );
    }
    for f in &model.flows {
        let _ = writeln!(
            out,
            "flow {} : {} -> {} carrying {}",
            f.index,
            f.source,
            f.target,
            f.assets.join(", ")
        );
    }
    for n in &model.nodes {
        for c in &n.contracts {
            let _ = writeln!(
                out,
                "contract {} {} in {} out {}",
                n.id,
                c.kind.keyword(),
                c.in_assets.join(", "),
                c.out_assets.join(", ")
            );
        }
    }
    for z in &model.zones {
        let members: Vec<String> = z.members.iter().map(ZoneMember::to_string).collect();
        let _ = writeln!(out, "zone {} {{ {} }}", z.name, members.join(", "));
    }
    for b in &model.boundaries {
        let _ = writeln!(out, "boundary {} {{ {} }}", b.name, b.members.join(", "));
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const FIG2_EXCERPT: &str = "\
model EclipseSecureStorageExcerpt
external Plugin
process Get_Value
process Decrypt_data
store Cache
asset secret : String high from Cache to Plugin
asset encr.data : CryptoData low from Cache to Decrypt_data
asset password : PasswordExt high from Plugin to Decrypt_data
flow 6 : Cache -> Get_Value carrying encr.data
flow 7 : Get_Value -> Decrypt_data carrying encr.data
flow 8 : Plugin -> Decrypt_data carrying password
flow 10 : Decrypt_data -> Plugin carrying secret
contract Get_Value forward in encr.data out encr.data
contract Decrypt_data decrypt in encr.data, password out secret
";

    #[test]
    fn empty_body_yields_empty_model() {
        let m = parse_secdfd("model Empty\n").unwrap();
        assert_eq!(m.name, "Empty");
        assert!(m.nodes.is_empty() && m.flows.is_empty() && m.assets.is_empty());
    }

    #[test]
    fn excerpt_counts() {
        let m = parse_secdfd(FIG2_EXCERPT).unwrap();
        let count = |k| m.nodes.iter().filter(|n| n.kind == k).count();
        assert_eq!(count(NodeKind::ExternalEntity), 1);
        assert_eq!(count(NodeKind::Process), 2);
        assert_eq!(count(NodeKind::DataStore), 1);
        assert_eq!(m.asset("secret").unwrap().label, Label::High);
        assert_eq!(m.asset("password").unwrap().label, Label::High);
    }

    #[test]
    fn dangling_flow_endpoint() {
        let err = parse_secdfd("model M\nprocess A\nasset x : T low from A to A\nflow 1 : A -> B carrying x\n")
            .unwrap_err();
        match err {
            DslError::Dangling { pos, what, name } => {
                assert_eq!((pos.line, pos.col), (4, 15));
                assert_eq!(what, "node");
                assert_eq!(name, "B");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_node() {
        let err = parse_secdfd("model M\nprocess A\nstore A\n").unwrap_err();
        assert!(matches!(err, DslError::Duplicate { what: "node", .. }));
        assert_eq!(err.pos().line, 3);
    }

    #[test]
    fn contract_asset_must_be_carried() {
        let text = "model M\nprocess P\nexternal E\nasset a : T high from E to P\nasset b : T low from P to E\n\
                    flow 1 : E -> P carrying a\ncontract P encrypt in a out b\n";
        let err = parse_secdfd(text).unwrap_err();
        assert!(matches!(err, DslError::ContractAssetNotCarried { ref asset, .. } if asset == "b"));
        assert_eq!(err.pos().line, 7);
    }

    #[test]
    fn syntax_error_has_column() {
        let err = parse_secdfd("model M\nflow x : A -> B carrying a\n").unwrap_err();
        assert_eq!(err.pos(), Pos { line: 2, col: 6 });
    }

    #[test]
    fn forward_arity_enforced() {
        let text = "model M\nprocess P\nexternal E\nasset a : T high from E to P\nasset b : T low from E to P\n\
                    flow 1 : E -> P carrying a, b\ncontract P forward in a, b out a\n";
        assert!(matches!(parse_secdfd(text), Err(DslError::Invalid { .. })));
    }

    #[test]
    fn hash_is_encrypt_and_boundaries_are_kept() {
        let text = "model M\nprocess P\nexternal E\nasset a : T high from E to P\nasset h : T low from P to E\n\
                    flow 1 : E -> P carrying a\nflow 2 : P -> E carrying h\ncontract P hash in a out h\n\
                    boundary B { P, E }\nzone Z { E, 2 }\n";
        let m = parse_secdfd(text).unwrap();
        assert_eq!(m.node("P").unwrap().contracts[0].kind, ContractKind::EncryptOrHash);
        assert_eq!(m.boundaries.len(), 1);
        assert_eq!(m.zones[0].members, vec![ZoneMember::Node("E".into()), ZoneMember::Flow(2)]);
        assert_eq!(parse_secdfd(&print_secdfd(&m)).unwrap(), m);
    }

    #[test]
    fn missing_model_line() {
        assert!(matches!(parse_secdfd("process A\n"), Err(DslError::Syntax { .. })));
    }
}
