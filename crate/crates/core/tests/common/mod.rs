#![allow(dead_code)]

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::routing::get;
use axum::{Json, Router};
use codecity::agent::{analyze_tree, StructuralSnapshot, DEFAULT_GLOB};
use codecity::model::{ClassKind, ClassUnit, CommitRef, LocMetrics, MethodDecl, PackageNode};
use codecity::service::{router, ReviewStore};
use codecity::trace::{EdgeKey, RuntimeSnapshot, SpanAttrs, SpanRecord, WINDOW_NS};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

pub const APP: &str = "petclinic";
pub const BASE_COMMIT: &str = "1a2b3c4d5e6f7a8b9c0d1e2f3a4b5c6d7e8f9a0b";
pub const TARGET_COMMIT: &str = "9f8e7d6c5b4a39281706f5e4d3c2b1a098765432";
pub const BASE_WINDOW: u64 = 3;
pub const TARGET_WINDOW: u64 = 5;
pub const GOLDEN_ANALYZED_AT_MS: i64 = 1_700_000_000_000;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn petclinic(part: &str) -> PathBuf {
    fixtures().join("petclinic").join(part)
}

pub fn analyze_fixture(tree: &str, commit: &str) -> StructuralSnapshot {
    let cref = CommitRef::new(APP, "main", commit, None).unwrap();
    analyze_tree(&petclinic(tree), &[DEFAULT_GLOB.to_string()], cref).unwrap().snapshot
}

pub struct TestServer {
    pub url: String,
    pub store: Arc<ReviewStore>,
    pub dir: TempDir,
}

/// Review service on an ephemeral port, backed by a fresh temp dir.
pub async fn spawn_service() -> TestServer {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(ReviewStore::open(dir.path()).unwrap());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let app = router(store.clone());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    TestServer { url, store, dir }
}

#[derive(Debug, Default)]
pub struct GhsState {
    pub description: String,
    pub token: String,
    pub project: String,
    pub cr: String,
    pub puts: usize,
    pub fail_status: Option<u16>,
}

pub struct MockGhs {
    pub url: String,
    pub state: Arc<Mutex<GhsState>>,
}

impl MockGhs {
    pub fn description(&self) -> String {
        self.state.lock().unwrap().description.clone()
    }
}

type Ghs = Arc<Mutex<GhsState>>;

fn ghs_check(s: &GhsState, headers: &HeaderMap, project: &str, cr: &str) -> Result<(), StatusCode> {
    if let Some(code) = s.fail_status {
        return Err(StatusCode::from_u16(code).unwrap());
    }
    if headers.get("PRIVATE-TOKEN").and_then(|v| v.to_str().ok()) != Some(s.token.as_str()) {
        return Err(StatusCode::UNAUTHORIZED);
    }
    if project != s.project || cr != s.cr {
        return Err(StatusCode::NOT_FOUND);
    }
    Ok(())
}

async fn ghs_get(
    State(st): State<Ghs>,
    headers: HeaderMap,
    Path((project, cr)): Path<(String, String)>,
) -> Result<Json<serde_json::Value>, StatusCode> {
    let s = st.lock().unwrap();
    ghs_check(&s, &headers, &project, &cr)?;
    Ok(Json(serde_json::json!({ "iid": cr, "description": s.description })))
}

async fn ghs_put(
    State(st): State<Ghs>,
    headers: HeaderMap,
    Path((project, cr)): Path<(String, String)>,
    Json(body): Json<serde_json::Value>,
) -> Result<Json<serde_json::Value>, StatusCode> {
    let mut s = st.lock().unwrap();
    ghs_check(&s, &headers, &project, &cr)?;
    s.description = body["description"].as_str().ok_or(StatusCode::BAD_REQUEST)?.to_string();
    s.puts += 1;
    Ok(Json(serde_json::json!({ "iid": cr, "description": s.description })))
}

/// Merge request endpoints of a hosting service holding one change request.
pub async fn spawn_mock_ghs(token: &str, project: &str, cr: &str, description: &str) -> MockGhs {
    let state = Arc::new(Mutex::new(GhsState {
        description: description.to_string(),
        token: token.to_string(),
        project: project.to_string(),
        cr: cr.to_string(),
        ..Default::default()
    }));
    let app = Router::new()
        .route("/api/v4/projects/:project/merge_requests/:cr", get(ghs_get).put(ghs_put))
        .with_state(state.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    MockGhs { url, state }
}

// ---- random structures ----

const PACKAGES: &[&str] = &["app", "app.core", "app.core.model", "app.web", "lib", "lib.util", "tools"];
const METHOD_NAMES: &[&str] = &["get", "set", "run", "apply", "load"];
const TYPES: &[&str] = &["int", "long", "String", "List<String>", "Map<String,Integer>"];
const MODIFIERS: &[&str] = &["public", "static", "final", "synchronized"];

/// A class placed in a package, with nested classes inside.
#[derive(Debug, Clone)]
pub struct Placed {
    pub package: String,
    pub class: ClassUnit,
}

fn loc(rng: &mut ChaCha8Rng) -> LocMetrics {
    LocMetrics { code_lines: rng.gen_range(1..12), comment_lines: rng.gen_range(0..3), blank_lines: rng.gen_range(0..3) }
}

fn method(rng: &mut ChaCha8Rng) -> MethodDecl {
    let params = (0..rng.gen_range(0..3)).map(|_| TYPES.choose(rng).unwrap().to_string()).collect();
    let modifiers = MODIFIERS.iter().filter(|_| rng.gen_bool(0.3)).map(|m| m.to_string()).collect();
    MethodDecl {
        name: METHOD_NAMES.choose(rng).unwrap().to_string(),
        param_types: params,
        return_type: ["void", "int", "String"].choose(rng).unwrap().to_string(),
        modifiers,
        loc: loc(rng),
    }
}

fn methods(rng: &mut ChaCha8Rng, max: usize) -> Vec<MethodDecl> {
    let mut out: Vec<MethodDecl> = Vec::new();
    for _ in 0..rng.gen_range(0..=max) {
        let m = method(rng);
        if !out.iter().any(|o| o.signature() == m.signature()) {
            out.push(m);
        }
    }
    out
}

fn class(rng: &mut ChaCha8Rng, fqn: String, name: String, max_methods: usize) -> ClassUnit {
    ClassUnit {
        name,
        file_path: format!("{}.java", fqn.replace('.', "/")),
        fqn,
        kind: *[ClassKind::Class, ClassKind::Class, ClassKind::Abstract, ClassKind::Interface, ClassKind::Enum].choose(rng).unwrap(),
        super_class: rng.gen_bool(0.3).then(|| "lib.Base".to_string()),
        interfaces: ["Runnable", "Serializable", "Comparable<T>"].iter().filter(|_| rng.gen_bool(0.3)).map(|s| s.to_string()).collect(),
        methods: methods(rng, max_methods),
        nested_classes: Vec::new(),
        loc: loc(rng),
    }
}

/// Up to `max_classes` classes (nested ones included) over a fixed package
/// pool; names are unique within their package.
pub fn random_classes(rng: &mut ChaCha8Rng, max_classes: usize, max_methods: usize) -> Vec<Placed> {
    let n = rng.gen_range(0..=max_classes);
    let mut out: Vec<Placed> = Vec::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut counter = 0;
    while used.len() < n {
        counter += 1;
        let package = PACKAGES.choose(rng).unwrap().to_string();
        let tops: Vec<usize> = (0..out.len()).filter(|&i| out[i].package == package).collect();
        if !tops.is_empty() && rng.gen_bool(0.15) {
            let i = *tops.choose(rng).unwrap();
            let name = format!("N{counter}");
            let fqn = format!("{}.{name}", out[i].class.fqn);
            used.insert(fqn.clone());
            let c = class(rng, fqn, name, max_methods);
            out[i].class.nested_classes.push(c);
        } else {
            let name = format!("C{counter}");
            let fqn = format!("{package}.{name}");
            used.insert(fqn.clone());
            out.push(Placed { package, class: class(rng, fqn, name, max_methods) });
        }
    }
    out
}

fn mutate_class(rng: &mut ChaCha8Rng, c: &mut ClassUnit, max_methods: usize) {
    match rng.gen_range(0..6) {
        0 => c.loc.code_lines += 1,
        1 => c.loc.comment_lines += 1,
        2 if !c.methods.is_empty() => {
            let i = rng.gen_range(0..c.methods.len());
            c.methods[i].loc.code_lines += 1;
        }
        3 if !c.methods.is_empty() => {
            let i = rng.gen_range(0..c.methods.len());
            c.methods.remove(i);
        }
        4 if c.methods.len() < max_methods => {
            let m = method(rng);
            if !c.methods.iter().any(|o| o.signature() == m.signature()) {
                c.methods.push(m);
            }
        }
        _ => c.super_class = if c.super_class.is_some() { None } else { Some("lib.Other".into()) },
    }
    for n in &mut c.nested_classes {
        if rng.gen_bool(0.2) {
            mutate_class(rng, n, max_methods);
        }
    }
    if !c.nested_classes.is_empty() && rng.gen_bool(0.1) {
        c.nested_classes.pop();
    }
}

/// A plausible next commit: most classes kept, some changed, removed or
/// added.
pub fn mutate(rng: &mut ChaCha8Rng, base: &[Placed], max_classes: usize, max_methods: usize) -> Vec<Placed> {
    let mut out = Vec::new();
    for p in base {
        let roll: f64 = rng.gen();
        if roll < 0.1 {
            continue;
        }
        let mut p = p.clone();
        if roll < 0.35 {
            mutate_class(rng, &mut p.class, max_methods);
        }
        out.push(p);
    }
    let count = |v: &[Placed]| v.iter().map(|p| { let mut n = 0; p.class.walk(&mut |_| n += 1); n }).sum::<usize>();
    for k in 0..rng.gen_range(0..4) {
        if count(&out) >= max_classes {
            break;
        }
        let package = ["app.extra", "app.core", "lib"].choose(rng).unwrap().to_string();
        let name = format!("Added{k}");
        let fqn = format!("{package}.{name}");
        if !out.iter().any(|p| p.class.fqn == fqn) {
            out.push(Placed { package, class: class(rng, fqn, name, max_methods) });
        }
    }
    out
}

fn insert(root: &mut Vec<PackageNode>, path: &[&str], c: ClassUnit) {
    let i = match root.iter().position(|p| p.name == path[0]) {
        Some(i) => i,
        None => {
            root.push(PackageNode::new(path[0]));
            root.len() - 1
        }
    };
    if path.len() == 1 {
        root[i].classes.push(c);
    } else {
        insert(&mut root[i].subpackages, &path[1..], c);
    }
}

pub fn snapshot_of(app: &str, commit: &str, classes: &[Placed]) -> StructuralSnapshot {
    let mut roots = Vec::new();
    for p in classes {
        let segs: Vec<&str> = p.package.split('.').collect();
        insert(&mut roots, &segs, p.class.clone());
    }
    StructuralSnapshot {
        commit_ref: CommitRef::new(app, "main", commit, None).unwrap(),
        root_packages: roots,
        files: Vec::new(),
        warnings: Vec::new(),
        analyzed_at_ms: 0,
    }
}

pub fn commit(rng: &mut ChaCha8Rng) -> String {
    (0..40).map(|_| char::from_digit(rng.gen_range(0..16), 16).unwrap()).collect()
}

/// A runtime window mentioning some of `classes` plus a few library classes
/// that never appear in source.
pub fn random_runtime(rng: &mut ChaCha8Rng, app: &str, commit: &str, window: u64, classes: &[Placed]) -> RuntimeSnapshot {
    let mut fqns: Vec<String> = Vec::new();
    for p in classes {
        p.class.walk(&mut |c| fqns.push(c.fqn.clone()));
    }
    for i in 0..rng.gen_range(0..3) {
        fqns.push(format!("ext.pool.Lib{i}"));
    }
    let picked: Vec<String> = fqns.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    let mut class_instances = BTreeMap::new();
    let mut method_calls = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for c in &picked {
        class_instances.insert(c.clone(), rng.gen_range(0..20));
        method_calls.insert((c.clone(), METHOD_NAMES.choose(rng).unwrap().to_string()), rng.gen_range(1..50));
    }
    for _ in 0..picked.len() {
        if picked.len() < 2 {
            break;
        }
        let a = picked.choose(rng).unwrap();
        let b = picked.choose(rng).unwrap();
        if a != b {
            edges.insert(EdgeKey::new(a, "run", b, "get"), rng.gen_range(1..30));
        }
    }
    RuntimeSnapshot {
        application: app.to_string(),
        commit: commit.to_string(),
        window_index: window,
        window_ns: WINDOW_NS,
        class_instances,
        method_calls,
        edges,
    }
}

// ---- random spans ----

pub fn span_id(n: u64) -> String {
    format!("{n:016x}")
}

pub fn trace_id(n: u64) -> String {
    format!("{n:032x}")
}

const SPAN_CLASSES: &[&str] = &["p.A", "p.B", "p.q.C", "lib.D", "p.A$Inner"];
const SPAN_METHODS: &[&str] = &["f", "g", "h"];

/// One trace forest of `n` spans. Parents always precede children in the
/// returned order; every fourth trace starts exactly on a window boundary.
pub fn random_trace(rng: &mut ChaCha8Rng, trace: u64, n: usize, windows: u64, first_span: u64) -> Vec<SpanRecord> {
    let mut out: Vec<SpanRecord> = Vec::with_capacity(n);
    let base_window = rng.gen_range(0..windows) as i64;
    for i in 0..n {
        let parent = if i == 0 || rng.gen_bool(0.15) { None } else { Some(rng.gen_range(0..i)) };
        let start = match parent {
            None if trace.is_multiple_of(4) && i == 0 => base_window * WINDOW_NS,
            None => base_window * WINDOW_NS + rng.gen_range(0..WINDOW_NS),
            Some(p) => {
                let ps: i64 = out[p].start_ns;
                // occasionally spill into the next window
                ps + if rng.gen_bool(0.1) { WINDOW_NS - ps.rem_euclid(WINDOW_NS) } else { rng.gen_range(0..1_000_000) }
            }
        };
        out.push(SpanRecord {
            trace_id: trace_id(trace),
            span_id: span_id(first_span + i as u64),
            parent_span_id: parent.map(|p| span_id(first_span + p as u64)),
            start_ns: start,
            end_ns: start + rng.gen_range(0..5_000_000),
            attrs: SpanAttrs {
                class: SPAN_CLASSES.choose(rng).unwrap().to_string(),
                method: SPAN_METHODS.choose(rng).unwrap().to_string(),
                instance_id: rng.gen_bool(0.7).then(|| format!("i{}", rng.gen_range(0..6))),
            },
            application: "app".into(),
            commit: "c".repeat(40),
        });
    }
    out
}

/// A merged comparison of a random pair with runtime windows 0 and 1.
pub fn random_model(rng: &mut ChaCha8Rng, max_classes: usize, max_methods: usize) -> codecity::compare::ComparisonModel {
    use codecity::compare::{diff_runtime, diff_structures, merge_comparison};
    let b = random_classes(rng, max_classes, max_methods);
    let t = mutate(rng, &b, max_classes, max_methods);
    let (bc, tc) = (commit(rng), commit(rng));
    let bs = snapshot_of("app", &bc, &b);
    let ts = snapshot_of("app", &tc, &t);
    let rb = random_runtime(rng, "app", &bc, 0, &b);
    let rt = random_runtime(rng, "app", &tc, 1, &t);
    let sd = diff_structures(&bs, &ts).unwrap();
    let rd = diff_runtime(Some(&rb), Some(&rt)).unwrap();
    merge_comparison(&sd, Some(&rd), &bs.commit_ref, &ts.commit_ref, Some(0), Some(1))
}

pub fn ctx(api_url: &str, commit: &str) -> codecity::ci::CiContext {
    let flags = codecity::ci::CiFlags {
        application: APP.into(),
        commit: Some(commit.into()),
        branch: Some("main".into()),
        api_url: Some(api_url.into()),
    };
    codecity::ci::CiContext::resolve(&flags, |_| None).unwrap()
}

/// Pushes both petclinic trees and both span fixtures through the CI jobs.
pub async fn push_scenario(client: &reqwest::Client, api_url: &str) {
    use codecity::ci::{run_analyze_job, run_trace_replay};
    for (tree, spans, commit) in [("base", "spans-base.json", BASE_COMMIT), ("target", "spans-target.json", TARGET_COMMIT)] {
        let c = ctx(api_url, commit);
        run_analyze_job(client, &c, &petclinic(tree)).await.unwrap();
        run_trace_replay(client, &c, &petclinic(spans), 1.0).await.unwrap();
    }
}

pub fn scenario_request(filter: codecity::compare::FilterMode) -> codecity::service::ComparisonRequest {
    codecity::service::ComparisonRequest {
        base: BASE_COMMIT.into(),
        target: TARGET_COMMIT.into(),
        base_window: Some(BASE_WINDOW),
        target_window: Some(TARGET_WINDOW),
        filter,
    }
}
