use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::agent::{emit_snapshot_document, parse_snapshot_document, StructuralSnapshot};
use crate::compare::{apply_filter, diff_runtime, diff_structures, merge_comparison, ComparisonModel, FilterMode};
use crate::layout::{layout_city, CityLayout};
use crate::model::{is_commit_hash, validate_application, CommitRef};
use crate::trace::{IngestError, IngestOutcome, SpanDoc, SpanStore, SpansDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreOutcome {
    Created,
    /// An identical document was already stored.
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommitSummary {
    pub commit: String,
    pub branch: String,
    pub received_at_ms: i64,
    pub has_runtime: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonRequest {
    pub base: String,
    pub target: String,
    pub base_window: Option<u64>,
    pub target_window: Option<u64>,
    pub filter: FilterMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResponse {
    pub model: ComparisonModel,
    pub layout: CityLayout,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CommitMeta {
    received_at_ms: i64,
}

struct StoredCommit {
    snapshot: Arc<StructuralSnapshot>,
    received_at_ms: i64,
}

/// File-backed store for structure documents and span logs.
///
/// ```text
/// {root}/{app}/structure/{commit}.json        canonical structure document
/// {root}/{app}/structure/{commit}.meta.json   receipt time
/// {root}/{app}/spans/{commit}/{window}.jsonl  one span per line, append only
/// ```
pub struct ReviewStore {
    root: PathBuf,
    commits: RwLock<BTreeMap<String, BTreeMap<String, StoredCommit>>>,
    span_scopes: RwLock<BTreeSet<(String, String)>>,
    spans: SpanStore,
    write: Mutex<i64>,
}

fn canonical_without_time(s: &StructuralSnapshot) -> Vec<u8> {
    let mut copy = s.clone();
    copy.analyzed_at_ms = 0;
    emit_snapshot_document(&copy)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| ServiceError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| ServiceError::io(path, e))
}

fn now_ms() -> i64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_millis() as i64).unwrap_or(0)
}

impl ReviewStore {
    /// Opens (creating if needed) a store and reloads everything on disk.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| ServiceError::io(&root, e))?;
        let store = ReviewStore {
            root,
            commits: RwLock::default(),
            span_scopes: RwLock::default(),
            spans: SpanStore::new(),
            write: Mutex::new(0),
        };
        store.reload()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn reload(&self) -> Result<(), ServiceError> {
        let mut last = 0;
        let dir = fs::read_dir(&self.root).map_err(|e| ServiceError::io(&self.root, e))?;
        for app_entry in dir {
            let app_entry = app_entry.map_err(|e| ServiceError::io(&self.root, e))?;
            let app = app_entry.file_name().to_string_lossy().into_owned();
            if validate_application(&app).is_err() || !app_entry.path().is_dir() {
                continue;
            }
            let sdir = app_entry.path().join("structure");
            if sdir.is_dir() {
                for f in fs::read_dir(&sdir).map_err(|e| ServiceError::io(&sdir, e))? {
                    let path = f.map_err(|e| ServiceError::io(&sdir, e))?.path();
                    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                    let Some(commit) = name.strip_suffix(".json").filter(|c| is_commit_hash(c)) else { continue };
                    let bytes = fs::read(&path).map_err(|e| ServiceError::io(&path, e))?;
                    let snapshot = parse_snapshot_document(&bytes)
                        .map_err(|e| ServiceError::Invalid(format!("{}: {e}", path.display())))?;
                    let meta_path = sdir.join(format!("{commit}.meta.json"));
                    let received_at_ms = fs::read(&meta_path)
                        .ok()
                        .and_then(|b| serde_json::from_slice::<CommitMeta>(&b).ok())
                        .map_or(0, |m| m.received_at_ms);
                    last = last.max(received_at_ms);
                    self.commits
                        .write()
                        .expect("store lock poisoned")
                        .entry(app.clone())
                        .or_default()
                        .insert(commit.to_string(), StoredCommit { snapshot: Arc::new(snapshot), received_at_ms });
                }
            }
            let spdir = app_entry.path().join("spans");
            if spdir.is_dir() {
                for c in fs::read_dir(&spdir).map_err(|e| ServiceError::io(&spdir, e))? {
                    let cdir = c.map_err(|e| ServiceError::io(&spdir, e))?.path();
                    let commit = cdir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                    if !is_commit_hash(&commit) {
                        continue;
                    }
                    for w in fs::read_dir(&cdir).map_err(|e| ServiceError::io(&cdir, e))? {
                        let path = w.map_err(|e| ServiceError::io(&cdir, e))?.path();
                        if path.extension().is_some_and(|e| e == "jsonl") {
                            self.reload_span_log(&app, &commit, &path)?;
                        }
                    }
                }
            }
        }
        *self.write.lock().expect("store lock poisoned") = last;
        Ok(())
    }

    fn reload_span_log(&self, app: &str, commit: &str, path: &Path) -> Result<(), ServiceError> {
        let file = fs::File::open(path).map_err(|e| ServiceError::io(path, e))?;
        let mut docs = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| ServiceError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<SpanDoc>(&line) {
                Ok(d) => docs.push(d),
                // a torn final line from an interrupted append
                Err(e) => log::warn!("{}:{}: skipping unreadable span: {e}", path.display(), n + 1),
            }
        }
        if docs.is_empty() {
            return Ok(());
        }
        let doc = SpansDocument {
            schema: crate::trace::SPANS_SCHEMA.to_string(),
            application: Some(app.to_string()),
            commit: Some(commit.to_string()),
            spans: docs,
        };
        let records = doc.into_records().map_err(|e| ServiceError::Invalid(e.to_string()))?;
        self.spans.ingest(records).map_err(|e| ServiceError::Invalid(e.to_string()))?;
        self.span_scopes.write().expect("store lock poisoned").insert((app.to_string(), commit.to_string()));
        Ok(())
    }

    /// Stores a structure document. Re-posting a document that differs only
    /// in its analysis timestamp is a no-op; any other difference for a
    /// stored commit is a conflict.
    pub fn store_structure(&self, bytes: &[u8]) -> Result<(CommitRef, StoreOutcome), ServiceError> {
        let snapshot = parse_snapshot_document(bytes).map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let cref = snapshot.commit_ref.clone();
        let mut last = self.write.lock().expect("store lock poisoned");
        if let Some(existing) = self.commits.read().expect("store lock poisoned").get(&cref.application).and_then(|c| c.get(&cref.commit)) {
            if canonical_without_time(&existing.snapshot) == canonical_without_time(&snapshot) {
                return Ok((existing.snapshot.commit_ref.clone(), StoreOutcome::Unchanged));
            }
            return Err(ServiceError::Conflict(format!(
                "{}@{} is already stored with different content",
                cref.application, cref.commit
            )));
        }
        let dir = self.root.join(&cref.application).join("structure");
        fs::create_dir_all(&dir).map_err(|e| ServiceError::io(&dir, e))?;
        let received_at_ms = now_ms().max(*last + 1);
        write_atomic(&dir.join(format!("{}.meta.json", cref.commit)), &serde_json::to_vec(&CommitMeta { received_at_ms }).expect("meta serializes"))?;
        write_atomic(&dir.join(format!("{}.json", cref.commit)), &emit_snapshot_document(&snapshot))?;
        *last = received_at_ms;
        self.commits
            .write()
            .expect("store lock poisoned")
            .entry(cref.application.clone())
            .or_default()
            .insert(cref.commit.clone(), StoredCommit { snapshot: Arc::new(snapshot), received_at_ms });
        Ok((cref, StoreOutcome::Created))
    }

    /// Ingests a span batch and appends the newly stored spans to their
    /// window logs.
    pub fn ingest_spans(&self, bytes: &[u8]) -> Result<IngestOutcome, ServiceError> {
        let doc = SpansDocument::parse(bytes).map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let app = doc.application.clone().ok_or_else(|| ServiceError::Invalid("missing application".into()))?;
        let commit = doc.commit.clone().ok_or_else(|| ServiceError::Invalid("missing commit".into()))?;
        validate_application(&app).map_err(|e| ServiceError::Invalid(e.to_string()))?;
        if !is_commit_hash(&commit) {
            return Err(ServiceError::Invalid(format!("malformed commit {commit:?}")));
        }
        let records = doc.into_records().map_err(|e| ServiceError::Invalid(e.to_string()))?;
        if records.is_empty() {
            return Ok(IngestOutcome::default());
        }
        let _guard = self.write.lock().expect("store lock poisoned");
        let outcome = self.spans.ingest(records).map_err(|e| match e {
            IngestError::EmptyBatch | IngestError::MixedBatch { .. } => ServiceError::Invalid(e.to_string()),
        })?;
        let mut by_window: BTreeMap<u64, Vec<&crate::trace::SpanRecord>> = BTreeMap::new();
        for r in &outcome.inserted {
            by_window.entry(r.window()).or_default().push(r);
        }
        if !by_window.is_empty() {
            let dir = self.root.join(&app).join("spans").join(&commit);
            fs::create_dir_all(&dir).map_err(|e| ServiceError::io(&dir, e))?;
            for (w, spans) in by_window {
                let path = dir.join(format!("{w}.jsonl"));
                let lines = SpansDocument::from_records(&app, &commit, &spans.into_iter().cloned().collect::<Vec<_>>()).spans;
                let mut buf = Vec::new();
                for l in lines {
                    serde_json::to_writer(&mut buf, &l).expect("span serializes");
                    buf.push(b'\n');
                }
                let mut f = fs::OpenOptions::new().create(true).append(true).open(&path).map_err(|e| ServiceError::io(&path, e))?;
                f.write_all(&buf).and_then(|_| f.sync_data()).map_err(|e| ServiceError::io(&path, e))?;
            }
            self.span_scopes.write().expect("store lock poisoned").insert((app, commit));
        }
        Ok(outcome)
    }

    pub fn applications(&self) -> Vec<String> {
        let mut apps: BTreeSet<String> = self.commits.read().expect("store lock poisoned").keys().cloned().collect();
        apps.extend(self.span_scopes.read().expect("store lock poisoned").iter().map(|(a, _)| a.clone()));
        apps.into_iter().collect()
    }

    /// Stored commits ordered by receipt.
    pub fn commits(&self, application: &str) -> Result<Vec<CommitSummary>, ServiceError> {
        let commits = self.commits.read().expect("store lock poisoned");
        let app = commits.get(application).ok_or_else(|| ServiceError::NotFound(format!("application {application}")))?;
        let mut out: Vec<CommitSummary> = app
            .iter()
            .map(|(c, s)| CommitSummary {
                commit: c.clone(),
                branch: s.snapshot.commit_ref.branch.clone(),
                received_at_ms: s.received_at_ms,
                has_runtime: !self.spans.is_empty(application, c),
            })
            .collect();
        out.sort_by(|a, b| (a.received_at_ms, &a.commit).cmp(&(b.received_at_ms, &b.commit)));
        Ok(out)
    }

    pub fn windows(&self, application: &str, commit: &str) -> Vec<u64> {
        self.spans.windows(application, commit)
    }

    pub fn span_count(&self, application: &str, commit: &str) -> usize {
        self.spans.len(application, commit)
    }

    pub fn span_store(&self) -> &SpanStore {
        &self.spans
    }

    pub fn snapshot(&self, application: &str, commit: &str) -> Result<Arc<StructuralSnapshot>, ServiceError> {
        self.commits
            .read()
            .expect("store lock poisoned")
            .get(application)
            .and_then(|c| c.get(commit))
            .map(|s| s.snapshot.clone())
            .ok_or_else(|| ServiceError::NotFound(format!("commit {commit} of application {application}")))
    }

    /// Most recently received commit; equal receipt times go to the smaller
    /// hash.
    pub fn latest_commit(&self, application: &str) -> Result<CommitRef, ServiceError> {
        let commits = self.commits.read().expect("store lock poisoned");
        commits
            .get(application)
            .and_then(|c| c.values().max_by(|a, b| {
                a.received_at_ms.cmp(&b.received_at_ms).then_with(|| b.snapshot.commit_ref.commit.cmp(&a.snapshot.commit_ref.commit))
            }))
            .map(|s| s.snapshot.commit_ref.clone())
            .ok_or_else(|| ServiceError::NotFound(format!("application {application}")))
    }

    /// Computes the filtered comparison and its layout on demand.
    pub fn get_comparison(&self, application: &str, req: &ComparisonRequest) -> Result<ComparisonResponse, ServiceError> {
        req.filter.validate()?;
        let base = self.snapshot(application, &req.base)?;
        let target = self.snapshot(application, &req.target)?;
        let mut warnings = Vec::new();
        let mut side = |label: &str, commit: &str, window: Option<u64>| {
            let w = window?;
            let rs = self.spans.runtime_snapshot(application, commit, w);
            if rs.is_none() {
                warnings.push(format!("no spans recorded for {label} window {w}"));
            }
            rs
        };
        let base_rs = side("base", &req.base, req.base_window);
        let target_rs = side("target", &req.target, req.target_window);
        let structural = diff_structures(&base, &target)?;
        let runtime = match (&base_rs, &target_rs) {
            (None, None) => None,
            (b, t) => Some(diff_runtime(b.as_ref(), t.as_ref())?),
        };
        let merged = merge_comparison(
            &structural,
            runtime.as_ref(),
            &base.commit_ref,
            &target.commit_ref,
            req.base_window,
            req.target_window,
        );
        let model = apply_filter(&merged, &req.filter)?;
        let (layout, layout_warnings) = layout_city(&model);
        warnings.extend(layout_warnings);
        Ok(ComparisonResponse { model, layout, warnings })
    }
}
