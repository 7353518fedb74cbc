use crate::pm::{PmElementKind, ProgramModel};
use crate::secdfd::{NodeKind, SecDfd};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("unknown mapping entry `{0}`")]
    UnknownEntry(String),
    #[error("mapping entry `{0}` is rejected")]
    RejectedEntry(String),
    #[error("unknown design element `{0}`")]
    UnknownDfdElement(String),
    #[error("unknown program element `{0}`")]
    UnknownPmElement(String),
    #[error("a {dfd} cannot be mapped to a {pm}")]
    IllegalPair { dfd: String, pm: String },
    #[error("malformed design reference `{0}`; expected <model>/<element>")]
    MalformedRef(String),
    #[error("invalid mapping state: {0}")]
    Invalid(String),
}

/// `<model>/<element>` reference to a SecDFD element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DfdRef {
    pub model: String,
    pub element: String,
}

impl DfdRef {
    pub fn new(model: &str, element: &str) -> Self {
        DfdRef {
            model: model.to_string(),
            element: element.to_string(),
        }
    }
}

impl fmt::Display for DfdRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.model, self.element)
    }
}

impl FromStr for DfdRef {
    type Err = MappingError;
    fn from_str(s: &str) -> Result<Self, MappingError> {
        match s.split_once('/') {
            Some((m, e)) if !m.is_empty() && !e.is_empty() => Ok(DfdRef::new(m, e)),
            _ => Err(MappingError::MalformedRef(s.to_string())),
        }
    }
}

impl Serialize for DfdRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DfdRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DfdElementKind {
    Asset,
    Store,
    Process,
    Entity,
}

impl fmt::Display for DfdElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DfdElementKind::Asset => "asset",
            DfdElementKind::Store => "data store",
            DfdElementKind::Process => "process",
            DfdElementKind::Entity => "external entity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MappingKind {
    AssetType,
    StoreType,
    StoreMethod,
    ProcessName,
    ProcessSignature,
    ProcessDefinition,
    /// Only created by manual mapping.
    EntityDefinition,
}

impl MappingKind {
    /// Legal correspondence for a pair of element kinds.
    pub fn for_pair(dfd: DfdElementKind, pm: PmElementKind) -> Option<MappingKind> {
        use DfdElementKind as D;
        use PmElementKind as P;
        match (dfd, pm) {
            (D::Asset, P::Type) => Some(MappingKind::AssetType),
            (D::Store, P::Type) => Some(MappingKind::StoreType),
            (D::Store, P::MethodName) => Some(MappingKind::StoreMethod),
            (D::Process, P::MethodName) => Some(MappingKind::ProcessName),
            (D::Process, P::Signature) => Some(MappingKind::ProcessSignature),
            (D::Process, P::Definition) => Some(MappingKind::ProcessDefinition),
            (D::Entity, P::Definition) => Some(MappingKind::EntityDefinition),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntryState {
    Suggested,
    Accepted,
    Rejected,
    Tolerated,
    UserDefined,
}

impl EntryState {
    /// Confirmed by the user: the only entries checks and taint analysis use.
    pub fn is_active(self) -> bool {
        matches!(self, EntryState::Accepted | EntryState::UserDefined)
    }

    pub fn is_pending(self) -> bool {
        matches!(self, EntryState::Suggested | EntryState::Tolerated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
    Tolerate,
}

impl FromStr for Decision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "accept" => Ok(Decision::Accept),
            "reject" => Ok(Decision::Reject),
            "tolerate" => Ok(Decision::Tolerate),
            other => Err(format!("unknown decision `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MappingEntry {
    pub id: String,
    pub dfd_element: DfdRef,
    pub pm_element: String,
    pub kind: MappingKind,
    pub state: EntryState,
    /// Name-match quality for root entries; 0 for derived ones.
    pub quality: f64,
    pub score: f64,
    pub derived_from: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreWeights {
    pub accepted: f64,
    pub suggested: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            accepted: 0.5,
            suggested: 0.25,
        }
    }
}

/// All correspondence entries of one mapping session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MappingState {
    pub models: Vec<String>,
    pub iteration: u32,
    pub next_id: u32,
    #[serde(default)]
    pub weights: ScoreWeights,
    pub entries: Vec<MappingEntry>,
}

impl MappingState {
    pub fn new(ws: &Workspace) -> Self {
        MappingState {
            models: ws.models.iter().map(|m| m.name.clone()).collect(),
            iteration: 0,
            next_id: 1,
            weights: ScoreWeights::default(),
            entries: Vec::new(),
        }
    }

    pub fn entry(&self, id: &str) -> Option<&MappingEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn entry_mut(&mut self, id: &str) -> Option<&mut MappingEntry> {
        self.entries.iter_mut().find(|e| e.id == id)
    }

    pub fn find(&self, dfd: &DfdRef, pm: &str) -> Option<&MappingEntry> {
        self.entries
            .iter()
            .find(|e| &e.dfd_element == dfd && e.pm_element == pm)
    }

    pub(crate) fn alloc_id(&mut self) -> String {
        let id = format!("e{:04}", self.next_id);
        self.next_id += 1;
        id
    }

    /// Adds a new suggested entry unless the pair already exists in any state.
    pub(crate) fn propose(
        &mut self,
        dfd: DfdRef,
        pm: &str,
        kind: MappingKind,
        quality: f64,
        derived_from: BTreeSet<String>,
    ) -> Option<String> {
        if let Some(existing) = self
            .entries
            .iter_mut()
            .find(|e| e.dfd_element == dfd && e.pm_element == pm)
        {
            if existing.state != EntryState::Rejected && !existing.derived_from.is_empty() {
                existing.derived_from.extend(derived_from);
            }
            return None;
        }
        let id = self.alloc_id();
        self.entries.push(MappingEntry {
            id: id.clone(),
            dfd_element: dfd,
            pm_element: pm.to_string(),
            kind,
            state: EntryState::Suggested,
            quality,
            score: quality,
            derived_from,
        });
        Some(id)
    }

    /// Entries that are not rejected.
    pub fn live(&self) -> impl Iterator<Item = &MappingEntry> {
        self.entries.iter().filter(|e| e.state != EntryState::Rejected)
    }

    /// Active entries: accepted or user-defined.
    pub fn active(&self) -> impl Iterator<Item = &MappingEntry> {
        self.entries.iter().filter(|e| e.state.is_active())
    }

    /// Canonical serialization (`.map.json`).
    pub fn to_json(&self) -> Vec<u8> {
        let mut sorted = self.clone();
        sorted.entries.sort_by(|a, b| a.id.cmp(&b.id));
        let mut out = serde_json::to_vec_pretty(&sorted).expect("state serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, MappingError> {
        let state: MappingState =
            serde_json::from_slice(bytes).map_err(|e| MappingError::Invalid(e.to_string()))?;
        let ids: BTreeSet<&str> = state.entries.iter().map(|e| e.id.as_str()).collect();
        if ids.len() != state.entries.len() {
            return Err(MappingError::Invalid("duplicate entry id".into()));
        }
        let pairs: BTreeSet<(&DfdRef, &str)> = state
            .entries
            .iter()
            .map(|e| (&e.dfd_element, e.pm_element.as_str()))
            .collect();
        if pairs.len() != state.entries.len() {
            return Err(MappingError::Invalid("duplicate (design, program) pair".into()));
        }
        for e in &state.entries {
            if let Some(d) = e.derived_from.iter().find(|d| !ids.contains(d.as_str())) {
                return Err(MappingError::Invalid(format!("entry `{}` derives from unknown `{d}`", e.id)));
            }
        }
        Ok(state)
    }

    /// Checks that every reference resolves against the workspace.
    pub fn validate(&self, ws: &Workspace) -> Result<(), MappingError> {
        for e in &self.entries {
            let dk = ws
                .dfd_kind(&e.dfd_element)
                .ok_or_else(|| MappingError::UnknownDfdElement(e.dfd_element.to_string()))?;
            let pk = ws
                .pm
                .element_kind(&e.pm_element)
                .ok_or_else(|| MappingError::UnknownPmElement(e.pm_element.clone()))?;
            if MappingKind::for_pair(dk, pk) != Some(e.kind) {
                return Err(MappingError::Invalid(format!("entry `{}` has inconsistent kind", e.id)));
            }
        }
        Ok(())
    }
}

/// The design models and program model a mapping session works on.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub models: Vec<SecDfd>,
    pub pm: ProgramModel,
}

impl Workspace {
    pub fn new(models: Vec<SecDfd>, pm: ProgramModel) -> Self {
        Workspace { models, pm }
    }

    pub fn model(&self, name: &str) -> Option<&SecDfd> {
        self.models.iter().find(|m| m.name == name)
    }

    /// Nodes take precedence over assets of the same name.
    pub fn dfd_kind(&self, r: &DfdRef) -> Option<DfdElementKind> {
        let m = self.model(&r.model)?;
        if let Some(n) = m.node(&r.element) {
            return Some(match n.kind {
                NodeKind::Process => DfdElementKind::Process,
                NodeKind::DataStore => DfdElementKind::Store,
                NodeKind::ExternalEntity => DfdElementKind::Entity,
            });
        }
        m.asset(&r.element).map(|_| DfdElementKind::Asset)
    }

    /// Every mappable element, in model/document order.
    pub fn dfd_elements(&self) -> Vec<(DfdRef, DfdElementKind)> {
        let mut out = Vec::new();
        for m in &self.models {
            for a in &m.assets {
                out.push((DfdRef::new(&m.name, &a.name), DfdElementKind::Asset));
            }
            for n in &m.nodes {
                let r = DfdRef::new(&m.name, &n.id);
                if let Some(k) = self.dfd_kind(&r) {
                    out.push((r, k));
                }
            }
        }
        out
    }
}

/// Read-only lookups over the active (accepted or user-defined) entries.
pub struct ActiveMapping<'a> {
    ws: &'a Workspace,
    by_dfd: BTreeMap<&'a DfdRef, Vec<&'a MappingEntry>>,
}

impl<'a> ActiveMapping<'a> {
    pub fn new(ws: &'a Workspace, state: &'a MappingState) -> Self {
        let mut by_dfd: BTreeMap<&DfdRef, Vec<&MappingEntry>> = BTreeMap::new();
        for e in state.active() {
            by_dfd.entry(&e.dfd_element).or_default().push(e);
        }
        ActiveMapping { ws, by_dfd }
    }

    /// Program elements an element is actively mapped to by entries of `kind`.
    pub fn entries_of(&self, model: &str, element: &str, kind: MappingKind) -> BTreeSet<String> {
        let r = DfdRef::new(model, element);
        self.by_dfd
            .get(&r)
            .into_iter()
            .flatten()
            .filter(|e| e.kind == kind)
            .map(|e| e.pm_element.clone())
            .collect()
    }

    /// Types an asset is mapped to.
    pub fn asset_types(&self, model: &str, asset: &str) -> BTreeSet<String> {
        self.entries_of(model, asset, MappingKind::AssetType)
    }

    /// Assets of `model` mapped to the type.
    pub fn assets_of_type(&self, model: &str, ty: &str) -> BTreeSet<String> {
        self.by_dfd
            .iter()
            .filter(|(r, _)| r.model == model)
            .flat_map(|(r, es)| {
                es.iter()
                    .filter(|e| e.kind == MappingKind::AssetType && e.pm_element == ty)
                    .map(move |_| r.element.clone())
            })
            .collect()
    }

    pub fn process_definitions(&self, model: &str, process: &str) -> BTreeSet<String> {
        self.entries_of(model, process, MappingKind::ProcessDefinition)
    }

    /// Definitions a node is mapped to, whatever its kind.
    ///
    /// Stores contribute the definitions of their mapped types, narrowed to
    /// their mapped method names when there are any.
    pub fn node_definitions(&self, model: &str, node: &str) -> BTreeSet<String> {
        let Some(kind) = self.ws.dfd_kind(&DfdRef::new(model, node)) else {
            return BTreeSet::new();
        };
        match kind {
            DfdElementKind::Process => self.process_definitions(model, node),
            DfdElementKind::Entity => self.entries_of(model, node, MappingKind::EntityDefinition),
            DfdElementKind::Asset => BTreeSet::new(),
            DfdElementKind::Store => {
                let types = self.entries_of(model, node, MappingKind::StoreType);
                let names = self.entries_of(model, node, MappingKind::StoreMethod);
                let pm = &self.ws.pm;
                pm.definitions
                    .iter()
                    .filter(|d| {
                        let name = pm.signature(&d.signature).map(|s| s.name.as_str());
                        let by_type = types.contains(&d.declaring_type);
                        let by_name = name.is_some_and(|n| names.contains(n));
                        match (types.is_empty(), names.is_empty()) {
                            (true, true) => false,
                            (false, true) => by_type,
                            (true, false) => by_name,
                            (false, false) => by_type && by_name,
                        }
                    })
                    .map(|d| d.id.clone())
                    .collect()
            }
        }
    }

    pub fn store_types(&self, model: &str, store: &str) -> BTreeSet<String> {
        self.entries_of(model, store, MappingKind::StoreType)
    }

    /// Processes of `model` that a definition is mapped to.
    pub fn processes_of_definition(&self, model: &str, def: &str) -> BTreeSet<String> {
        self.by_dfd
            .iter()
            .filter(|(r, _)| r.model == model)
            .filter(|(_, es)| {
                es.iter()
                    .any(|e| e.kind == MappingKind::ProcessDefinition && e.pm_element == def)
            })
            .map(|(r, _)| r.element.clone())
            .collect()
    }

    pub fn has_any(&self, model: &str, element: &str) -> bool {
        self.by_dfd
            .get(&DfdRef::new(model, element))
            .is_some_and(|v| !v.is_empty())
    }
}
