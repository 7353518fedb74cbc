//! Program-model extraction from the `.mini` corpus language.
//!
//! Intra-procedural flow is flow-insensitive: every local, parameter, field and
//! return value is one endpoint, and each assignment adds edges from all
//! endpoints read on the right-hand side. Calls are resolved statically on the
//! receiver's declared type; dynamic dispatch adds every override declared in
//! a subtype.

mod parse;

pub use parse::Pos;
use parse::*;

use super::model::*;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use thiserror::Error;

pub const BUILTIN_TYPES: &[&str] = &["String", "int", "boolean", "bytes"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{file}:{line}:{col}: parse error: {message}")]
    Parse {
        file: String,
        line: u32,
        col: u32,
        message: String,
    },
    #[error("{file}:{line}:{col}: unresolved {what} `{name}`")]
    Unresolved {
        file: String,
        line: u32,
        col: u32,
        what: &'static str,
        name: String,
    },
    #[error("{file}:{line}:{col}: {message}")]
    Semantic {
        file: String,
        line: u32,
        col: u32,
        message: String,
    },
    #[error("cannot read corpus: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] PmError),
}

pub fn type_id(qualified: &str) -> String {
    format!("type:{qualified}")
}

fn sig_key(name: &str, params: &[String], ret: &str) -> String {
    format!("{name}({}):{ret}", params.join(","))
}

struct TypeInfo {
    file: String,
    package: Option<String>,
    ast: TypeAst,
    supertype: Option<String>,
}

struct DefInfo {
    id: String,
    name: String,
    /// Qualified names of parameter types.
    params: Vec<String>,
    ret: Option<String>,
    declaring: String,
    ast_index: (usize, usize),
}

struct Extractor {
    types: BTreeMap<String, TypeInfo>,
    type_order: Vec<String>,
    simple: HashMap<String, Vec<String>>,
    fields: BTreeMap<(String, String), (String, String)>,
    defs: Vec<DefInfo>,
    defs_by_type: HashMap<String, Vec<usize>>,
    edges: Vec<(FlowKind, Endpoint, Endpoint, String)>,
    edge_seen: BTreeSet<(FlowKind, Endpoint, Endpoint)>,
    calls: BTreeSet<CallEdge>,
    used_builtins: BTreeSet<String>,
}

struct Body<'a> {
    def: &'a DefInfo,
    file: &'a str,
    package: Option<&'a str>,
    env: HashMap<String, (Endpoint, String)>,
    local_types: HashMap<u32, String>,
    next_local: u32,
    next_site: u32,
}

/// Value of an expression: the endpoints it reads and its static type
/// (qualified name; `None` for `null`, `Some(VOID)` for void calls).
struct Value {
    srcs: Vec<Endpoint>,
    ty: Option<String>,
}

impl Extractor {
    fn unresolved(file: &str, pos: Pos, what: &'static str, name: &str) -> FrontendError {
        FrontendError::Unresolved {
            file: file.to_string(),
            line: pos.line,
            col: pos.col,
            what,
            name: name.to_string(),
        }
    }

    fn semantic(file: &str, pos: Pos, message: impl Into<String>) -> FrontendError {
        FrontendError::Semantic {
            file: file.to_string(),
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    /// Resolves a written type name to a qualified name.
    fn resolve_type(&mut self, file: &str, package: Option<&str>, r: &TypeRef) -> Result<String, FrontendError> {
        if BUILTIN_TYPES.contains(&r.name.as_str()) {
            self.used_builtins.insert(r.name.clone());
            return Ok(r.name.clone());
        }
        if r.name.contains('.') {
            if self.types.contains_key(&r.name) {
                return Ok(r.name.clone());
            }
            return Err(Self::unresolved(file, r.pos, "type", &r.name));
        }
        if let Some(pkg) = package {
            let q = format!("{pkg}.{}", r.name);
            if self.types.contains_key(&q) {
                return Ok(q);
            }
        }
        match self.simple.get(&r.name).map(Vec::as_slice) {
            Some([only]) => Ok(only.clone()),
            Some([_, _, ..]) => Err(Self::semantic(
                file,
                r.pos,
                format!("ambiguous type name `{}`; qualify it", r.name),
            )),
            _ => Err(Self::unresolved(file, r.pos, "type", &r.name)),
        }
    }

    fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = Some(sub.to_string());
        let mut steps = 0;
        while let Some(t) = cur {
            if t == sup {
                return true;
            }
            steps += 1;
            if steps > self.types.len() + 1 {
                return false;
            }
            cur = self.types.get(&t).and_then(|i| i.supertype.clone());
        }
        false
    }

    fn chain(&self, ty: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = Some(ty.to_string());
        while let Some(t) = cur {
            if out.contains(&t) {
                break;
            }
            cur = self.types.get(&t).and_then(|i| i.supertype.clone());
            out.push(t);
        }
        out
    }

    fn find_field(&self, ty: &str, name: &str) -> Option<(String, String)> {
        self.chain(ty)
            .into_iter()
            .find_map(|t| self.fields.get(&(t, name.to_string())).cloned())
    }

    fn collect_types(&mut self, files: &[(String, FileAst)]) -> Result<(), FrontendError> {
        for (file, ast) in files {
            for t in &ast.types {
                let qname = match &ast.package {
                    Some(p) => format!("{p}.{}", t.name),
                    None => t.name.clone(),
                };
                if BUILTIN_TYPES.contains(&t.name.as_str()) || t.name == "void" {
                    return Err(Self::semantic(file, t.pos, format!("`{}` is a reserved type name", t.name)));
                }
                if self.types.contains_key(&qname) {
                    return Err(Self::semantic(file, t.pos, format!("duplicate type `{qname}`")));
                }
                self.simple.entry(t.name.clone()).or_default().push(qname.clone());
                self.type_order.push(qname.clone());
                self.types.insert(
                    qname.clone(),
                    TypeInfo {
                        file: file.clone(),
                        package: ast.package.clone(),
                        ast: t.clone(),
                        supertype: None,
                    },
                );
            }
        }
        for q in self.type_order.clone() {
            let (file, package, ext) = {
                let i = &self.types[&q];
                (i.file.clone(), i.package.clone(), i.ast.extends.clone())
            };
            if let Some(ext) = ext {
                let sup = self.resolve_type(&file, package.as_deref(), &ext)?;
                if BUILTIN_TYPES.contains(&sup.as_str()) {
                    return Err(Self::semantic(&file, ext.pos, "cannot extend a builtin type"));
                }
                self.types.get_mut(&q).expect("type exists").supertype = Some(sup);
            }
        }
        for q in &self.type_order {
            let mut seen = BTreeSet::new();
            let mut cur = Some(q.clone());
            while let Some(t) = cur {
                if !seen.insert(t.clone()) {
                    let i = &self.types[q];
                    return Err(Self::semantic(&i.file, i.ast.pos, format!("inheritance cycle through `{q}`")));
                }
                cur = self.types.get(&t).and_then(|i| i.supertype.clone());
            }
        }
        Ok(())
    }

    fn collect_members(&mut self) -> Result<(), FrontendError> {
        for (ti, q) in self.type_order.clone().iter().enumerate() {
            let (file, package, ast) = {
                let i = &self.types[q];
                (i.file.clone(), i.package.clone(), i.ast.clone())
            };
            for f in &ast.fields {
                let ty = self.resolve_type(&file, package.as_deref(), &f.ty)?;
                let key = (q.clone(), f.name.clone());
                if self.fields.contains_key(&key) {
                    return Err(Self::semantic(&file, f.pos, format!("duplicate field `{}`", f.name)));
                }
                self.fields.insert(key, (format!("fld:{q}.{}", f.name), ty));
            }
            let mut keys = BTreeSet::new();
            for (di, d) in ast.defs.iter().enumerate() {
                let params = d
                    .params
                    .iter()
                    .map(|(_, t)| self.resolve_type(&file, package.as_deref(), t))
                    .collect::<Result<Vec<_>, _>>()?;
                let ret = match &d.ret {
                    Some(t) => Some(self.resolve_type(&file, package.as_deref(), t)?),
                    None => None,
                };
                let key = sig_key(&d.name, &params, ret.as_deref().unwrap_or(VOID));
                if !keys.insert(key.clone()) {
                    return Err(Self::semantic(&file, d.pos, format!("duplicate method `{key}`")));
                }
                let mut names = BTreeSet::new();
                for (p, t) in &d.params {
                    if !names.insert(p) {
                        return Err(Self::semantic(&file, t.pos, format!("duplicate parameter `{p}`")));
                    }
                }
                let idx = self.defs.len();
                self.defs.push(DefInfo {
                    id: format!("def:{q}.{key}"),
                    name: d.name.clone(),
                    params,
                    ret,
                    declaring: q.clone(),
                    ast_index: (ti, di),
                });
                self.defs_by_type.entry(q.clone()).or_default().push(idx);
            }
        }
        Ok(())
    }

    fn add_edge(&mut self, kind: FlowKind, from: Endpoint, to: Endpoint, ty: String) {
        if self.edge_seen.insert((kind, from.clone(), to.clone())) {
            self.edges.push((kind, from, to, ty));
        }
    }

    fn endpoint_type(&self, body: &Body, ep: &Endpoint) -> String {
        match ep {
            Endpoint::Param(d, k) => self.def_by_id(d).params[*k as usize].clone(),
            Endpoint::Return(d) => self.def_by_id(d).ret.clone().unwrap_or_else(|| VOID.into()),
            Endpoint::Field(f) => self
                .fields
                .values()
                .find(|(id, _)| id == f)
                .map(|(_, t)| t.clone())
                .unwrap_or_default(),
            Endpoint::Local(_, n) => body.local_types[n].clone(),
        }
    }

    fn def_by_id(&self, id: &str) -> &DefInfo {
        self.defs.iter().find(|d| d.id == id).expect("known definition")
    }

    fn flow_into(&mut self, body: &Body, srcs: &[Endpoint], to: &Endpoint) {
        for s in srcs {
            let ty = self.endpoint_type(body, s);
            self.add_edge(FlowKind::Intra, s.clone(), to.clone(), ty);
        }
    }

    fn new_local(body: &mut Body, ty: String) -> Endpoint {
        let n = body.next_local;
        body.next_local += 1;
        body.local_types.insert(n, ty);
        Endpoint::Local(body.def.id.clone(), n)
    }

    fn lookup_method(&self, ty: &str, name: &str, arg_types: &[Option<String>]) -> Result<Option<usize>, String> {
        for t in self.chain(ty) {
            let cands: Vec<usize> = self
                .defs_by_type
                .get(&t)
                .into_iter()
                .flatten()
                .copied()
                .filter(|&i| self.defs[i].name == name && self.defs[i].params.len() == arg_types.len())
                .collect();
            match cands.len() {
                0 => continue,
                1 => return Ok(Some(cands[0])),
                _ => {
                    let exact: Vec<usize> = cands
                        .iter()
                        .copied()
                        .filter(|&i| {
                            self.defs[i]
                                .params
                                .iter()
                                .zip(arg_types)
                                .all(|(p, a)| a.as_ref().is_none_or(|a| a == p || self.is_subtype(a, p)))
                        })
                        .collect();
                    if exact.len() == 1 {
                        return Ok(Some(exact[0]));
                    }
                    return Err(format!("ambiguous call to overloaded `{name}` on `{t}`"));
                }
            }
        }
        Ok(None)
    }

    fn eval(&mut self, body: &mut Body, e: &Expr) -> Result<Value, FrontendError> {
        match e {
            Expr::Str => {
                self.used_builtins.insert("String".into());
                Ok(Value { srcs: vec![], ty: Some("String".into()) })
            }
            Expr::Int => {
                self.used_builtins.insert("int".into());
                Ok(Value { srcs: vec![], ty: Some("int".into()) })
            }
            Expr::Bool => {
                self.used_builtins.insert("boolean".into());
                Ok(Value { srcs: vec![], ty: Some("boolean".into()) })
            }
            Expr::Null => Ok(Value { srcs: vec![], ty: None }),
            Expr::This => Ok(Value {
                srcs: vec![],
                ty: Some(body.def.declaring.clone()),
            }),
            Expr::New(t) => {
                let q = self.resolve_type(body.file, body.package, t)?;
                Ok(Value { srcs: vec![], ty: Some(q) })
            }
            Expr::Var(name, pos) => match body.env.get(name) {
                Some((ep, ty)) => Ok(Value {
                    srcs: vec![ep.clone()],
                    ty: Some(ty.clone()),
                }),
                None => Err(Self::unresolved(body.file, *pos, "variable", name)),
            },
            Expr::ThisField(f, pos) => match self.find_field(&body.def.declaring, f) {
                Some((id, ty)) => Ok(Value {
                    srcs: vec![Endpoint::Field(id)],
                    ty: Some(ty),
                }),
                None => Err(Self::unresolved(body.file, *pos, "field", f)),
            },
            Expr::Add(l, r) => {
                let l = self.eval(body, l)?;
                let r = self.eval(body, r)?;
                let string = Some("String".to_string());
                let ty = if l.ty == string || r.ty == string { string } else { l.ty };
                let mut srcs = l.srcs;
                srcs.extend(r.srcs);
                Ok(Value { srcs, ty })
            }
            Expr::Call { recv, method, args, pos } => self.eval_call(body, recv, method, args, *pos),
        }
    }

    fn eval_call(
        &mut self,
        body: &mut Body,
        recv: &Receiver,
        method: &str,
        args: &[Expr],
        pos: Pos,
    ) -> Result<Value, FrontendError> {
        // (static receiver type, dispatch over subtypes?)
        let (recv_ty, dynamic) = match recv {
            Receiver::Implicit => (body.def.declaring.clone(), true),
            Receiver::Expr(e) => {
                let v = self.eval(body, e)?;
                match v.ty {
                    Some(t) if t != VOID => (t, true),
                    _ => return Err(Self::semantic(body.file, pos, format!("cannot call `{method}` on a value without type"))),
                }
            }
            Receiver::Path(path) => {
                if path.len() == 1 {
                    if let Some((_, ty)) = body.env.get(&path[0]) {
                        (ty.clone(), true)
                    } else {
                        let r = TypeRef { name: path[0].clone(), pos };
                        (self.resolve_type(body.file, body.package, &r)?, false)
                    }
                } else {
                    let r = TypeRef { name: path.join("."), pos };
                    (self.resolve_type(body.file, body.package, &r)?, false)
                }
            }
        };
        let mut arg_vals = Vec::with_capacity(args.len());
        for a in args {
            arg_vals.push(self.eval(body, a)?);
        }
        let arg_types: Vec<Option<String>> = arg_vals.iter().map(|v| v.ty.clone()).collect();
        let resolved = self
            .lookup_method(&recv_ty, method, &arg_types)
            .map_err(|m| Self::semantic(body.file, pos, m))?
            .ok_or_else(|| Self::unresolved(body.file, pos, "method", &format!("{recv_ty}.{method}/{}", args.len())))?;
        let (name, params, ret) = {
            let d = &self.defs[resolved];
            (d.name.clone(), d.params.clone(), d.ret.clone())
        };
        let mut targets = vec![resolved];
        if dynamic {
            for (i, d) in self.defs.iter().enumerate() {
                if i != resolved
                    && d.name == name
                    && d.params == params
                    && d.ret == ret
                    && d.declaring != recv_ty
                    && self.is_subtype(&d.declaring, &recv_ty)
                {
                    targets.push(i);
                }
            }
        }
        let target_ids: Vec<String> = targets.iter().map(|&i| self.defs[i].id.clone()).collect();
        let site = body.next_site;
        body.next_site += 1;
        for t in &target_ids {
            self.calls.insert(CallEdge {
                caller: body.def.id.clone(),
                callee: t.clone(),
                site,
            });
        }
        for (k, v) in arg_vals.iter().enumerate() {
            for s in &v.srcs {
                for t in &target_ids {
                    self.add_edge(
                        FlowKind::ParamPass,
                        s.clone(),
                        Endpoint::Param(t.clone(), k as u32),
                        params[k].clone(),
                    );
                }
            }
        }
        match ret {
            Some(ret) => {
                let result = Self::new_local(body, ret.clone());
                for t in &target_ids {
                    self.add_edge(FlowKind::ReturnFlow, Endpoint::Return(t.clone()), result.clone(), ret.clone());
                }
                Ok(Value {
                    srcs: vec![result],
                    ty: Some(ret),
                })
            }
            None => Ok(Value {
                srcs: vec![],
                ty: Some(VOID.into()),
            }),
        }
    }

    fn stmt(&mut self, body: &mut Body, s: &Stmt) -> Result<(), FrontendError> {
        match s {
            Stmt::Let { name, ty, init, pos } => {
                if body.env.contains_key(name) {
                    return Err(Self::semantic(body.file, *pos, format!("`{name}` is already declared")));
                }
                let v = self.eval(body, init)?;
                let ty = match ty {
                    Some(t) => self.resolve_type(body.file, body.package, t)?,
                    None => match v.ty.clone() {
                        Some(t) if t != VOID => t,
                        _ => {
                            return Err(Self::semantic(body.file, *pos, format!("cannot infer a type for `{name}`")))
                        }
                    },
                };
                let local = Self::new_local(body, ty.clone());
                body.env.insert(name.clone(), (local.clone(), ty));
                self.flow_into(body, &v.srcs, &local);
            }
            Stmt::Assign { target, value, pos } => {
                let v = self.eval(body, value)?;
                let to = match target {
                    Target::Var(x) => match body.env.get(x) {
                        Some((ep, _)) => ep.clone(),
                        None => return Err(Self::unresolved(body.file, *pos, "variable", x)),
                    },
                    Target::ThisField(f) => match self.find_field(&body.def.declaring, f) {
                        Some((id, _)) => Endpoint::Field(id),
                        None => return Err(Self::unresolved(body.file, *pos, "field", f)),
                    },
                };
                self.flow_into(body, &v.srcs, &to);
            }
            Stmt::Return(value, pos) => {
                if let Some(e) = value {
                    if body.def.ret.is_none() {
                        return Err(Self::semantic(body.file, *pos, "void method returns a value"));
                    }
                    let v = self.eval(body, e)?;
                    let to = Endpoint::Return(body.def.id.clone());
                    self.flow_into(body, &v.srcs, &to);
                }
            }
            Stmt::Expr(e) => {
                self.eval(body, e)?;
            }
        }
        Ok(())
    }

    fn bodies(&mut self) -> Result<(), FrontendError> {
        for di in 0..self.defs.len() {
            let (ti, ai) = self.defs[di].ast_index;
            let q = self.type_order[ti].clone();
            let (file, package, ast) = {
                let info = &self.types[&q];
                (info.file.clone(), info.package.clone(), info.ast.defs[ai].clone())
            };
            // detach the def so the body can borrow it while edges are added
            let def = DefInfo {
                id: self.defs[di].id.clone(),
                name: self.defs[di].name.clone(),
                params: self.defs[di].params.clone(),
                ret: self.defs[di].ret.clone(),
                declaring: self.defs[di].declaring.clone(),
                ast_index: (ti, ai),
            };
            let mut body = Body {
                def: &def,
                file: &file,
                package: package.as_deref(),
                env: HashMap::new(),
                local_types: HashMap::new(),
                next_local: 0,
                next_site: 0,
            };
            for (k, (p, _)) in ast.params.iter().enumerate() {
                body.env.insert(
                    p.clone(),
                    (Endpoint::Param(def.id.clone(), k as u32), def.params[k].clone()),
                );
            }
            for s in &ast.body {
                self.stmt(&mut body, s)?;
            }
        }
        Ok(())
    }

    fn build(self) -> Result<ProgramModel, FrontendError> {
        let mut parts = PmParts::default();
        let mut type_ids: Vec<String> = self.type_order.clone();
        type_ids.extend(self.used_builtins.iter().cloned());
        let mut decls: BTreeMap<String, TypeDecl> = BTreeMap::new();
        for q in &type_ids {
            decls.insert(
                q.clone(),
                TypeDecl {
                    id: type_id(q),
                    qualified_name: q.clone(),
                    supertype: self.types.get(q).and_then(|i| i.supertype.as_deref().map(type_id)),
                    member_fields: vec![],
                    member_defs: vec![],
                },
            );
        }
        for ((decl, name), (id, ty)) in &self.fields {
            decls.get_mut(decl).expect("declared").member_fields.push(id.clone());
            parts.fields.push(FieldDecl {
                id: id.clone(),
                name: name.clone(),
                declaring_type: type_id(decl),
                ty: type_id(ty),
            });
        }
        let mut names = BTreeSet::new();
        let mut sigs = BTreeMap::new();
        for d in &self.defs {
            names.insert(d.name.clone());
            let ret = d.ret.as_deref().map_or_else(|| VOID.to_string(), type_id);
            let key = sig_key(&d.name, &d.params, d.ret.as_deref().unwrap_or(VOID));
            let sid = format!("sig:{key}");
            sigs.entry(sid.clone()).or_insert_with(|| MethodSignature {
                id: sid.clone(),
                name: format!("name:{}", d.name),
                params: d.params.iter().map(|p| type_id(p)).collect(),
                ret,
            });
            decls.get_mut(&d.declaring).expect("declared").member_defs.push(d.id.clone());
            let info = &self.types[&d.declaring];
            let ast = &info.ast.defs[d.ast_index.1];
            parts.definitions.push(MethodDefinition {
                id: d.id.clone(),
                signature: sid,
                declaring_type: type_id(&d.declaring),
                loc: SourceLoc {
                    file: info.file.clone(),
                    start: ast.pos.line,
                    end: ast.end_line,
                },
            });
        }
        parts.types = decls.into_values().collect();
        parts.method_names = names
            .into_iter()
            .map(|n| MethodName {
                id: format!("name:{n}"),
                name: n,
            })
            .collect();
        parts.signatures = sigs.into_values().collect();
        parts.calls = self.calls.into_iter().collect();
        parts.flows = self
            .edges
            .into_iter()
            .enumerate()
            .map(|(i, (kind, from, to, ty))| DataFlowEdge {
                id: format!("flow:{:06}", i + 1),
                kind,
                from,
                to,
                ty: type_id(&ty),
            })
            .collect();
        Ok(ProgramModel::from_parts(parts)?)
    }
}

/// Extracts a program model from `(relative path, source text)` pairs.
///
/// Files are processed in path order, so the result does not depend on the
/// order of `sources`.
pub fn extract_pm(sources: &[(String, String)]) -> Result<ProgramModel, FrontendError> {
    let mut sorted: Vec<&(String, String)> = sources.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut files = Vec::new();
    for (path, text) in sorted {
        files.push((path.clone(), parse_file(path, text)?));
    }
    let mut ex = Extractor {
        types: BTreeMap::new(),
        type_order: vec![],
        simple: HashMap::new(),
        fields: BTreeMap::new(),
        defs: vec![],
        defs_by_type: HashMap::new(),
        edges: vec![],
        edge_seen: BTreeSet::new(),
        calls: BTreeSet::new(),
        used_builtins: BTreeSet::new(),
    };
    ex.collect_types(&files)?;
    ex.collect_members()?;
    ex.bodies()?;
    ex.build()
}

/// Reads every `.mini` file below `root` and extracts the model.
pub fn extract_pm_dir(root: &Path) -> Result<ProgramModel, FrontendError> {
    let mut sources = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| FrontendError::Io(e.to_string()))?;
        if !entry.file_type().is_file() || entry.path().extension().and_then(|e| e.to_str()) != Some("mini") {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        let text = std::fs::read_to_string(entry.path())
            .map_err(|e| FrontendError::Io(format!("{}: {e}", entry.path().display())))?;
        sources.push((rel, text));
    }
    if sources.is_empty() && !root.is_dir() {
        return Err(FrontendError::Io(format!("{} is not a directory", root.display())));
    }
    extract_pm(&sources)
}
