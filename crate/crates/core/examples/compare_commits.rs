//! Diff the two petclinic commits, fuse in their runtime windows and print
//! every changed entity.

use std::path::{Path, PathBuf};

use codecity::agent::{analyze_tree, StructuralSnapshot, DEFAULT_GLOB};
use codecity::compare::{apply_filter, diff_runtime, diff_structures, merge_comparison, ChangeStatus, FilterMode};
use codecity::model::CommitRef;
use codecity::trace::{RuntimeSnapshot, SpanStore, SpansDocument};

const BASE: &str = "1a2b3c4d5e6f7a8b9c0d1e2f3a4b5c6d7e8f9a0b";
const TARGET: &str = "9f8e7d6c5b4a39281706f5e4d3c2b1a098765432";

fn snapshot(dir: &Path, commit: &str) -> Result<StructuralSnapshot, Box<dyn std::error::Error>> {
    let cref = CommitRef::new("petclinic", "main", commit, None)?;
    Ok(analyze_tree(dir, &[DEFAULT_GLOB.to_string()], cref)?.snapshot)
}

fn runtime(file: &Path, commit: &str, window: u64) -> Result<RuntimeSnapshot, Box<dyn std::error::Error>> {
    let mut doc = SpansDocument::parse(&std::fs::read(file)?)?;
    doc.application = Some("petclinic".into());
    doc.commit = Some(commit.into());
    let store = SpanStore::new();
    store.ingest(doc.into_records()?)?;
    Ok(store.runtime_snapshot("petclinic", commit, window).ok_or("window has no spans")?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/petclinic");
    let base = snapshot(&fx.join("base"), BASE)?;
    let target = snapshot(&fx.join("target"), TARGET)?;
    let rb = runtime(&fx.join("spans-base.json"), BASE, 3)?;
    let rt = runtime(&fx.join("spans-target.json"), TARGET, 5)?;

    let structural = diff_structures(&base, &target)?;
    let rd = diff_runtime(Some(&rb), Some(&rt))?;
    let merged = merge_comparison(&structural, Some(&rd), &base.commit_ref, &target.commit_ref, Some(3), Some(5));
    let changes = apply_filter(&merged, &FilterMode { diff_only: true, ..Default::default() })?;

    for e in changes.flatten() {
        if e.status != ChangeStatus::Unchanged {
            let tags = format!("{:?} {:?} {:?}", e.status, e.entity_kind, e.origin);
            println!("{tags:<26} {}", e.fqn);
        }
    }
    for e in &changes.edges {
        println!("edge {:?}: {} ({:?} -> {:?})", e.status, e.key, e.base_count, e.target_count);
    }
    Ok(())
}
