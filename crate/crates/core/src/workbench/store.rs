use super::session::{CreateSession, Session, SessionConfig, SessionCrypto, SessionMeta};
use super::ServiceError;
use crate::mapping::{MappingState, Workspace};
use crate::pm::{load_pm, save_pm};
use crate::secdfd::SecDfd;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const HOME_ENV: &str = "FLOWMAP_HOME";
pub const DEFAULT_HOME: &str = ".flowmap";

const META: &str = "meta.json";
const PM: &str = "pm.json";
const MODELS: &str = "models.json";
const MAPPING: &str = "mapping.json";
const CRYPTO: &str = "crypto.json";
const CONFIG: &str = "config.json";
const REPORTS: &str = "reports.json";

/// Sessions live in `<root>/<id>/`, one canonical JSON file per artifact.
/// Only `meta.json` carries timestamps.
#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn canonical<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("session data serializes");
    v.push(b'\n');
    v
}

/// Writes through a temporary sibling and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
    let tmp = path.with_extension("json.tmp");
    let mut f = std::fs::File::create(&tmp).map_err(|e| ServiceError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| ServiceError::io(&tmp, e))?;
    f.sync_all().map_err(|e| ServiceError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| ServiceError::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>, ServiceError> {
    std::fs::read(path).map_err(|e| ServiceError::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ServiceError> {
    serde_json::from_slice(&read(path)?).map_err(|e| ServiceError::Corrupt {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl SessionStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        SessionStore { root: root.into() }
    }

    /// `$FLOWMAP_HOME`, or `./.flowmap`.
    pub fn from_env() -> Self {
        SessionStore::new(std::env::var_os(HOME_ENV).map_or_else(|| PathBuf::from(DEFAULT_HOME), PathBuf::from))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir(&self, id: &str) -> Result<PathBuf, ServiceError> {
        if !valid_id(id) {
            return Err(ServiceError::NotFound(format!("session `{id}`")));
        }
        Ok(self.root.join(id))
    }

    pub fn exists(&self, id: &str) -> bool {
        self.dir(id).is_ok_and(|d| d.join(META).is_file())
    }

    /// Metadata of every stored session, ordered by id.
    pub fn list(&self) -> Result<Vec<SessionMeta>, ServiceError> {
        let rd = match std::fs::read_dir(&self.root) {
            Ok(rd) => rd,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(ServiceError::io(&self.root, e)),
        };
        let mut out = Vec::new();
        for entry in rd {
            let entry = entry.map_err(|e| ServiceError::io(&self.root, e))?;
            let meta = entry.path().join(META);
            if meta.is_file() {
                out.push(read_json::<SessionMeta>(&meta)?);
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    /// Builds a session under a fresh id, runs the first iteration and persists it.
    pub fn create(&self, req: &CreateSession) -> Result<Session, ServiceError> {
        self.create_with_id(&uuid::Uuid::new_v4().simple().to_string(), req)
    }

    pub fn create_with_id(&self, id: &str, req: &CreateSession) -> Result<Session, ServiceError> {
        let dir = self.dir(id)?;
        if dir.join(META).exists() {
            return Err(ServiceError::bad_request(format!("session `{id}` already exists")));
        }
        let t = now();
        let session = Session::build(id, req, t)?;
        self.save(&session)?;
        Ok(session)
    }

    pub fn open(&self, id: &str) -> Result<Session, ServiceError> {
        let dir = self.dir(id)?;
        if !dir.join(META).is_file() {
            return Err(ServiceError::NotFound(format!("session `{id}`")));
        }
        let meta: SessionMeta = read_json(&dir.join(META))?;
        let pm_path = dir.join(PM);
        let pm = load_pm(&read(&pm_path)?).map_err(|e| ServiceError::Corrupt {
            path: pm_path.display().to_string(),
            message: e.to_string(),
        })?;
        let models: Vec<SecDfd> = read_json(&dir.join(MODELS))?;
        let map_path = dir.join(MAPPING);
        let state = MappingState::from_json(&read(&map_path)?).map_err(|e| ServiceError::Corrupt {
            path: map_path.display().to_string(),
            message: e.to_string(),
        })?;
        let crypto: SessionCrypto = read_json(&dir.join(CRYPTO))?;
        let config: SessionConfig = read_json(&dir.join(CONFIG))?;
        let reports = read_json(&dir.join(REPORTS))?;
        let ws = Workspace::new(models, pm);
        state.validate(&ws).map_err(|e| ServiceError::Corrupt {
            path: map_path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(Session {
            meta,
            ws,
            state,
            crypto,
            config,
            reports,
        })
    }

    /// Writes every artifact; `meta.json` goes last so a session only becomes
    /// visible once complete.
    pub fn save(&self, session: &Session) -> Result<(), ServiceError> {
        let dir = self.dir(&session.meta.id)?;
        std::fs::create_dir_all(&dir).map_err(|e| ServiceError::io(&dir, e))?;
        write_atomic(&dir.join(PM), &save_pm(&session.ws.pm))?;
        write_atomic(&dir.join(MODELS), &canonical(&session.ws.models))?;
        write_atomic(&dir.join(MAPPING), &session.state.to_json())?;
        write_atomic(&dir.join(CRYPTO), &canonical(&session.crypto))?;
        write_atomic(&dir.join(CONFIG), &canonical(&session.config))?;
        write_atomic(&dir.join(REPORTS), &canonical(&session.reports))?;
        let mut meta = session.meta.clone();
        meta.updated_at = now().max(meta.created_at);
        write_atomic(&dir.join(META), &canonical(&meta))
    }

    /// Loads, applies `f`, and persists only if `f` succeeds.
    pub fn update<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let mut session = self.open(id)?;
        let out = f(&mut session)?;
        self.save(&session)?;
        Ok(out)
    }

    /// File names of the canonical (timestamp-free) artifacts.
    pub fn canonical_files() -> &'static [&'static str] {
        &[PM, MODELS, MAPPING, CRYPTO, CONFIG, REPORTS]
    }
}
