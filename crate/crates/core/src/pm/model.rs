use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Reserved type id for methods without a return value. Never carried by an edge.
pub const VOID: &str = "void";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PmError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("dangling reference to {what} `{id}` in {context}")]
    Dangling {
        what: &'static str,
        id: String,
        context: String,
    },
    #[error("duplicate {what} `{id}`")]
    Duplicate { what: &'static str, id: String },
    #[error("unknown definition `{0}`")]
    UnknownDefinition(String),
    #[error("{0}")]
    Invariant(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub id: String,
    pub qualified_name: String,
    pub supertype: Option<String>,
    pub member_fields: Vec<String>,
    pub member_defs: Vec<String>,
}

impl TypeDecl {
    /// Last dotted segment of the qualified name.
    pub fn simple_name(&self) -> &str {
        self.qualified_name
            .rsplit('.')
            .next()
            .unwrap_or(&self.qualified_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodName {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSignature {
    pub id: String,
    pub name: String,
    pub params: Vec<String>,
    pub ret: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLoc {
    pub file: String,
    pub start: u32,
    pub end: u32,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}", self.file, self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDefinition {
    pub id: String,
    pub signature: String,
    pub declaring_type: String,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub id: String,
    pub name: String,
    pub declaring_type: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CallEdge {
    pub caller: String,
    pub callee: String,
    pub site: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowKind {
    ParamPass,
    ReturnFlow,
    Intra,
}

impl FlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::ParamPass => "PARAM_PASS",
            FlowKind::ReturnFlow => "RETURN_FLOW",
            FlowKind::Intra => "INTRA",
        }
    }
}

impl FromStr for FlowKind {
    type Err = PmError;
    fn from_str(s: &str) -> Result<Self, PmError> {
        match s {
            "PARAM_PASS" => Ok(FlowKind::ParamPass),
            "RETURN_FLOW" => Ok(FlowKind::ReturnFlow),
            "INTRA" => Ok(FlowKind::Intra),
            other => Err(PmError::Schema(format!("unknown flow kind `{other}`"))),
        }
    }
}

/// A place data can be read from or written to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    Param(String, u32),
    Return(String),
    Field(String),
    Local(String, u32),
}

impl Endpoint {
    /// Definition whose body owns this endpoint; fields belong to no definition.
    pub fn owner(&self) -> Option<&str> {
        match self {
            Endpoint::Param(d, _) | Endpoint::Return(d) | Endpoint::Local(d, _) => Some(d),
            Endpoint::Field(_) => None,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Param(d, k) => write!(f, "param:{d}:{k}"),
            Endpoint::Return(d) => write!(f, "return:{d}"),
            Endpoint::Field(x) => write!(f, "field:{x}"),
            Endpoint::Local(d, n) => write!(f, "local:{d}:{n}"),
        }
    }
}

impl FromStr for Endpoint {
    type Err = PmError;
    fn from_str(s: &str) -> Result<Self, PmError> {
        let bad = || PmError::Schema(format!("malformed endpoint `{s}`"));
        let indexed = |rest: &str| -> Result<(String, u32), PmError> {
            let (d, k) = rest.rsplit_once(':').ok_or_else(bad)?;
            let k = k.parse::<u32>().map_err(|_| bad())?;
            if d.is_empty() {
                return Err(bad());
            }
            Ok((d.to_string(), k))
        };
        if let Some(rest) = s.strip_prefix("param:") {
            let (d, k) = indexed(rest)?;
            Ok(Endpoint::Param(d, k))
        } else if let Some(rest) = s.strip_prefix("local:") {
            let (d, k) = indexed(rest)?;
            Ok(Endpoint::Local(d, k))
        } else if let Some(rest) = s.strip_prefix("return:") {
            if rest.is_empty() {
                return Err(bad());
            }
            Ok(Endpoint::Return(rest.to_string()))
        } else if let Some(rest) = s.strip_prefix("field:") {
            if rest.is_empty() {
                return Err(bad());
            }
            Ok(Endpoint::Field(rest.to_string()))
        } else {
            Err(bad())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFlowEdge {
    pub id: String,
    pub kind: FlowKind,
    pub from: Endpoint,
    pub to: Endpoint,
    pub ty: String,
}

/// Lookup tables built once when a model is constructed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Index {
    pub types: BTreeMap<String, usize>,
    pub names: BTreeMap<String, usize>,
    pub sigs: BTreeMap<String, usize>,
    pub defs: BTreeMap<String, usize>,
    pub fields: BTreeMap<String, usize>,
    pub flows: BTreeMap<String, usize>,
    pub flows_from: BTreeMap<Endpoint, Vec<usize>>,
    pub flows_to: BTreeMap<Endpoint, Vec<usize>>,
}

/// Program model: the abstracted code graph all analyses run on.
///
/// Immutable once built; every constructor validates the id invariants.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProgramModel {
    pub types: Vec<TypeDecl>,
    pub method_names: Vec<MethodName>,
    pub signatures: Vec<MethodSignature>,
    pub definitions: Vec<MethodDefinition>,
    pub fields: Vec<FieldDecl>,
    pub calls: Vec<CallEdge>,
    pub flows: Vec<DataFlowEdge>,
    pub(crate) index: Index,
}

/// Kind of element a PM id refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PmElementKind {
    Type,
    MethodName,
    Signature,
    Definition,
    Field,
}

#[derive(Debug, Default)]
pub struct PmParts {
    pub types: Vec<TypeDecl>,
    pub method_names: Vec<MethodName>,
    pub signatures: Vec<MethodSignature>,
    pub definitions: Vec<MethodDefinition>,
    pub fields: Vec<FieldDecl>,
    pub calls: Vec<CallEdge>,
    pub flows: Vec<DataFlowEdge>,
}

fn index_of<T>(items: &[T], what: &'static str, id: impl Fn(&T) -> &str) -> Result<BTreeMap<String, usize>, PmError> {
    let mut map = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        if map.insert(id(item).to_string(), i).is_some() {
            return Err(PmError::Duplicate {
                what,
                id: id(item).to_string(),
            });
        }
    }
    Ok(map)
}

impl ProgramModel {
    /// Sorts every collection into canonical order, builds the index and checks invariants.
    pub fn from_parts(mut parts: PmParts) -> Result<Self, PmError> {
        parts.types.sort_by(|a, b| a.id.cmp(&b.id));
        parts.method_names.sort_by(|a, b| a.id.cmp(&b.id));
        parts.signatures.sort_by(|a, b| a.id.cmp(&b.id));
        parts.definitions.sort_by(|a, b| a.id.cmp(&b.id));
        parts.fields.sort_by(|a, b| a.id.cmp(&b.id));
        parts.calls.sort();
        parts.calls.dedup();
        parts.flows.sort_by(|a, b| a.id.cmp(&b.id));
        for t in &mut parts.types {
            t.member_fields.sort();
            t.member_defs.sort();
        }

        let mut index = Index {
            types: index_of(&parts.types, "type", |t| &t.id)?,
            names: index_of(&parts.method_names, "method name", |n| &n.id)?,
            sigs: index_of(&parts.signatures, "signature", |s| &s.id)?,
            defs: index_of(&parts.definitions, "definition", |d| &d.id)?,
            fields: index_of(&parts.fields, "field", |f| &f.id)?,
            flows: index_of(&parts.flows, "flow", |f| &f.id)?,
            ..Index::default()
        };
        for (i, f) in parts.flows.iter().enumerate() {
            index.flows_from.entry(f.from.clone()).or_default().push(i);
            index.flows_to.entry(f.to.clone()).or_default().push(i);
        }
        let pm = ProgramModel {
            types: parts.types,
            method_names: parts.method_names,
            signatures: parts.signatures,
            definitions: parts.definitions,
            fields: parts.fields,
            calls: parts.calls,
            flows: parts.flows,
            index,
        };
        pm.check()?;
        Ok(pm)
    }

    pub fn into_parts(self) -> PmParts {
        PmParts {
            types: self.types,
            method_names: self.method_names,
            signatures: self.signatures,
            definitions: self.definitions,
            fields: self.fields,
            calls: self.calls,
            flows: self.flows,
        }
    }

    fn check(&self) -> Result<(), PmError> {
        let dangling = |what, id: &str, context: &str| PmError::Dangling {
            what,
            id: id.to_string(),
            context: context.to_string(),
        };
        let mut qualified = BTreeSet::new();
        for t in &self.types {
            if !qualified.insert(t.qualified_name.as_str()) {
                return Err(PmError::Duplicate {
                    what: "qualified type name",
                    id: t.qualified_name.clone(),
                });
            }
            if let Some(s) = &t.supertype {
                if !self.index.types.contains_key(s) {
                    return Err(dangling("type", s, &t.id));
                }
            }
            for f in &t.member_fields {
                if !self.index.fields.contains_key(f) {
                    return Err(dangling("field", f, &t.id));
                }
            }
            for d in &t.member_defs {
                if !self.index.defs.contains_key(d) {
                    return Err(dangling("definition", d, &t.id));
                }
            }
        }
        let mut shapes = BTreeSet::new();
        for s in &self.signatures {
            if !self.index.names.contains_key(&s.name) {
                return Err(dangling("method name", &s.name, &s.id));
            }
            for p in &s.params {
                if !self.index.types.contains_key(p) {
                    return Err(dangling("type", p, &s.id));
                }
            }
            if s.ret != VOID && !self.index.types.contains_key(&s.ret) {
                return Err(dangling("type", &s.ret, &s.id));
            }
            if !shapes.insert((&s.name, &s.params, &s.ret)) {
                return Err(PmError::Duplicate {
                    what: "signature shape",
                    id: s.id.clone(),
                });
            }
        }
        let mut impls = BTreeSet::new();
        for d in &self.definitions {
            if !self.index.sigs.contains_key(&d.signature) {
                return Err(dangling("signature", &d.signature, &d.id));
            }
            if !self.index.types.contains_key(&d.declaring_type) {
                return Err(dangling("type", &d.declaring_type, &d.id));
            }
            if !impls.insert((&d.signature, &d.declaring_type)) {
                return Err(PmError::Duplicate {
                    what: "definition of signature in type",
                    id: d.id.clone(),
                });
            }
        }
        for f in &self.fields {
            if !self.index.types.contains_key(&f.declaring_type) {
                return Err(dangling("type", &f.declaring_type, &f.id));
            }
            if !self.index.types.contains_key(&f.ty) {
                return Err(dangling("type", &f.ty, &f.id));
            }
        }
        for c in &self.calls {
            for d in [&c.caller, &c.callee] {
                if !self.index.defs.contains_key(d) {
                    return Err(dangling("definition", d, "call"));
                }
            }
        }
        for e in &self.flows {
            if e.ty == VOID {
                return Err(PmError::Invariant(format!("flow `{}` carries void", e.id)));
            }
            if !self.index.types.contains_key(&e.ty) {
                return Err(dangling("type", &e.ty, &e.id));
            }
            for ep in [&e.from, &e.to] {
                self.check_endpoint(ep, &e.id)?;
            }
            let ok = match e.kind {
                FlowKind::ParamPass => matches!(e.to, Endpoint::Param(..)),
                FlowKind::ReturnFlow => matches!(e.from, Endpoint::Return(_)),
                FlowKind::Intra => true,
            };
            if !ok {
                return Err(PmError::Invariant(format!(
                    "flow `{}` of kind {} has endpoints {} -> {}",
                    e.id,
                    e.kind.as_str(),
                    e.from,
                    e.to
                )));
            }
        }
        Ok(())
    }

    fn check_endpoint(&self, ep: &Endpoint, context: &str) -> Result<(), PmError> {
        let dangling = |what, id: &str| PmError::Dangling {
            what,
            id: id.to_string(),
            context: context.to_string(),
        };
        match ep {
            Endpoint::Field(f) => {
                if !self.index.fields.contains_key(f) {
                    return Err(dangling("field", f));
                }
            }
            Endpoint::Param(d, k) => {
                let def = self.definition(d).ok_or_else(|| dangling("definition", d))?;
                let arity = self.signature(&def.signature).map_or(0, |s| s.params.len());
                if *k as usize >= arity {
                    return Err(PmError::Invariant(format!(
                        "parameter {k} out of range for `{d}` in {context}"
                    )));
                }
            }
            Endpoint::Return(d) | Endpoint::Local(d, _) => {
                if !self.index.defs.contains_key(d) {
                    return Err(dangling("definition", d));
                }
            }
        }
        Ok(())
    }

    pub fn type_decl(&self, id: &str) -> Option<&TypeDecl> {
        self.index.types.get(id).map(|&i| &self.types[i])
    }

    pub fn method_name(&self, id: &str) -> Option<&MethodName> {
        self.index.names.get(id).map(|&i| &self.method_names[i])
    }

    pub fn signature(&self, id: &str) -> Option<&MethodSignature> {
        self.index.sigs.get(id).map(|&i| &self.signatures[i])
    }

    pub fn definition(&self, id: &str) -> Option<&MethodDefinition> {
        self.index.defs.get(id).map(|&i| &self.definitions[i])
    }

    pub fn field(&self, id: &str) -> Option<&FieldDecl> {
        self.index.fields.get(id).map(|&i| &self.fields[i])
    }

    pub fn flow(&self, id: &str) -> Option<&DataFlowEdge> {
        self.index.flows.get(id).map(|&i| &self.flows[i])
    }

    pub fn flows_from(&self, ep: &Endpoint) -> impl Iterator<Item = &DataFlowEdge> {
        self.index
            .flows_from
            .get(ep)
            .into_iter()
            .flatten()
            .map(|&i| &self.flows[i])
    }

    pub fn flows_to(&self, ep: &Endpoint) -> impl Iterator<Item = &DataFlowEdge> {
        self.index
            .flows_to
            .get(ep)
            .into_iter()
            .flatten()
            .map(|&i| &self.flows[i])
    }

    pub fn element_kind(&self, id: &str) -> Option<PmElementKind> {
        if self.index.types.contains_key(id) {
            Some(PmElementKind::Type)
        } else if self.index.names.contains_key(id) {
            Some(PmElementKind::MethodName)
        } else if self.index.sigs.contains_key(id) {
            Some(PmElementKind::Signature)
        } else if self.index.defs.contains_key(id) {
            Some(PmElementKind::Definition)
        } else if self.index.fields.contains_key(id) {
            Some(PmElementKind::Field)
        } else {
            None
        }
    }

    /// Definitions implementing the given signature.
    pub fn definitions_of(&self, signature: &str) -> impl Iterator<Item = &MethodDefinition> {
        let signature = signature.to_string();
        self.definitions
            .iter()
            .filter(move |d| d.signature == signature)
    }

    /// Signatures carrying the given method name id.
    pub fn signatures_named(&self, name: &str) -> impl Iterator<Item = &MethodSignature> {
        let name = name.to_string();
        self.signatures.iter().filter(move |s| s.name == name)
    }

    /// `<declaring type>.<name>(<params>):<return>` with qualified type names.
    pub fn qualified_signature(&self, def: &str) -> Option<String> {
        let d = self.definition(def)?;
        let sig = self.signature(&d.signature)?;
        let qn = |t: &str| {
            self.type_decl(t)
                .map_or_else(|| t.to_string(), |t| t.qualified_name.clone())
        };
        let name = self.method_name(&sig.name)?;
        let params: Vec<String> = sig.params.iter().map(|p| qn(p)).collect();
        Some(format!(
            "{}.{}({}):{}",
            qn(&d.declaring_type),
            name.name,
            params.join(","),
            qn(&sig.ret)
        ))
    }

    /// Definitions whose qualified signature equals `qsig`.
    pub fn definitions_by_qualified_signature(&self, qsig: &str) -> Vec<&MethodDefinition> {
        self.definitions
            .iter()
            .filter(|d| self.qualified_signature(&d.id).as_deref() == Some(qsig))
            .collect()
    }

    /// Declared type of an endpoint.
    pub fn endpoint_type(&self, ep: &Endpoint) -> Option<String> {
        match ep {
            Endpoint::Param(d, k) => {
                let def = self.definition(d)?;
                self.signature(&def.signature)?.params.get(*k as usize).cloned()
            }
            Endpoint::Return(d) => {
                let def = self.definition(d)?;
                Some(self.signature(&def.signature)?.ret.clone())
            }
            Endpoint::Field(f) => self.field(f).map(|f| f.ty.clone()),
            Endpoint::Local(..) => self
                .flows_to(ep)
                .chain(self.flows_from(ep))
                .map(|e| e.ty.clone())
                .next(),
        }
    }

    /// Every supertype of `ty`, nearest first, excluding `ty` itself.
    pub fn ancestors(&self, ty: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = self.type_decl(ty).and_then(|t| t.supertype.clone());
        while let Some(s) = cur {
            if out.contains(&s) || s == ty {
                break;
            }
            cur = self.type_decl(&s).and_then(|t| t.supertype.clone());
            out.push(s);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
            && self.method_names.is_empty()
            && self.signatures.is_empty()
            && self.definitions.is_empty()
            && self.fields.is_empty()
            && self.calls.is_empty()
            && self.flows.is_empty()
    }
}
