//! Document storage keyed by project id.
//!
//! The file store keeps one directory per project holding `project.json`
//! (latest document) and `audit.jsonl` (one record per line). The log line
//! is flushed before the document is replaced, so a crash between the two
//! leaves a log that replays to the newer state.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::audit::AuditRecord;
use crate::error::StoreError;
use crate::workflow::Project;

type StoreResult<T> = std::result::Result<T, StoreError>;

/// What a bearer token grants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grant {
    pub project_id: String,
    pub decision_maker_id: String,
}

/// Token digest -> grant. Raw tokens are never stored.
pub type Credentials = BTreeMap<String, Grant>;

pub trait DocumentStore: Send + Sync {
    fn project_ids(&self) -> StoreResult<Vec<String>>;
    fn load(&self, id: &str) -> StoreResult<Option<Project>>;
    /// Appends `record` to the project's log and replaces its document.
    fn commit(&self, project: &Project, record: &AuditRecord) -> StoreResult<()>;
    fn audit_log(&self, id: &str) -> StoreResult<Vec<AuditRecord>>;
    fn credentials(&self) -> StoreResult<Credentials>;
    fn put_credential(&self, digest: String, grant: Grant) -> StoreResult<()>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    projects: RwLock<HashMap<String, (Project, Vec<AuditRecord>)>>,
    credentials: RwLock<Credentials>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl DocumentStore for MemoryStore {
    fn project_ids(&self) -> StoreResult<Vec<String>> {
        let mut ids: Vec<String> = self.projects.read().keys().cloned().collect();
        ids.sort();
        Ok(ids)
    }

    fn load(&self, id: &str) -> StoreResult<Option<Project>> {
        Ok(self.projects.read().get(id).map(|(p, _)| p.clone()))
    }

    fn commit(&self, project: &Project, record: &AuditRecord) -> StoreResult<()> {
        let mut g = self.projects.write();
        let entry = g.entry(project.id.clone()).or_insert_with(|| (project.clone(), Vec::new()));
        entry.0 = project.clone();
        entry.1.push(record.clone());
        Ok(())
    }

    fn audit_log(&self, id: &str) -> StoreResult<Vec<AuditRecord>> {
        Ok(self.projects.read().get(id).map(|(_, log)| log.clone()).unwrap_or_default())
    }

    fn credentials(&self) -> StoreResult<Credentials> {
        Ok(self.credentials.read().clone())
    }

    fn put_credential(&self, digest: String, grant: Grant) -> StoreResult<()> {
        self.credentials.write().insert(digest, grant);
        Ok(())
    }
}

#[derive(Debug)]
pub struct FileStore {
    root: PathBuf,
    credentials: RwLock<()>,
}

const PROJECT_FILE: &str = "project.json";
const AUDIT_FILE: &str = "audit.jsonl";
const CREDENTIALS_FILE: &str = "credentials.json";

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> StoreResult<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("projects"))?;
        Ok(Self { root, credentials: RwLock::new(()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn project_dir(&self, id: &str) -> StoreResult<PathBuf> {
        let ok = !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
        if !ok {
            return Err(StoreError::InvalidId(id.to_owned()));
        }
        Ok(self.root.join("projects").join(id))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> StoreResult<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl DocumentStore for FileStore {
    fn project_ids(&self) -> StoreResult<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(self.root.join("projects"))? {
            let entry = entry?;
            if entry.path().join(PROJECT_FILE).is_file() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    fn load(&self, id: &str) -> StoreResult<Option<Project>> {
        let path = match self.project_dir(id) {
            Ok(dir) => dir.join(PROJECT_FILE),
            Err(_) => return Ok(None),
        };
        match fs::read(&path) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn commit(&self, project: &Project, record: &AuditRecord) -> StoreResult<()> {
        let dir = self.project_dir(&project.id)?;
        fs::create_dir_all(&dir)?;
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut log = OpenOptions::new().create(true).append(true).open(dir.join(AUDIT_FILE))?;
        log.write_all(&line)?;
        log.sync_data()?;
        write_atomic(&dir.join(PROJECT_FILE), &serde_json::to_vec_pretty(project)?)
    }

    fn audit_log(&self, id: &str) -> StoreResult<Vec<AuditRecord>> {
        let path = match self.project_dir(id) {
            Ok(dir) => dir.join(AUDIT_FILE),
            Err(_) => return Ok(Vec::new()),
        };
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line)?);
            }
        }
        Ok(out)
    }

    fn credentials(&self) -> StoreResult<Credentials> {
        let _g = self.credentials.read();
        match fs::read(self.root.join(CREDENTIALS_FILE)) {
            Ok(bytes) => Ok(serde_json::from_slice(&bytes)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Credentials::new()),
            Err(e) => Err(e.into()),
        }
    }

    fn put_credential(&self, digest: String, grant: Grant) -> StoreResult<()> {
        let _g = self.credentials.write();
        let path = self.root.join(CREDENTIALS_FILE);
        let mut all: Credentials = match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Credentials::new(),
            Err(e) => return Err(e.into()),
        };
        all.insert(digest, grant);
        write_atomic(&path, &serde_json::to_vec_pretty(&all)?)
    }
}
