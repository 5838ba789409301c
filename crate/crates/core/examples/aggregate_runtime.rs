//! Ingest a span fixture and print the runtime snapshot of every window.

use std::path::PathBuf;

use codecity::trace::{reconstruct_trace, SpanStore, SpansDocument};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/petclinic/spans-target.json");
    let mut doc = SpansDocument::parse(&std::fs::read(path)?)?;
    doc.application = Some("petclinic".into());
    doc.commit = Some("9f8e7d6c5b4a39281706f5e4d3c2b1a098765432".into());
    let spans = doc.into_records()?;

    let first_trace: Vec<_> = spans.iter().filter(|s| s.trace_id == spans[0].trace_id).cloned().collect();
    let tree = reconstruct_trace(&first_trace)?;
    println!("trace {}: {} spans, depth {}", tree.trace_id, tree.node_count(), tree.depth());

    let store = SpanStore::new();
    let out = store.ingest(spans)?;
    println!("accepted {}, rejected {}", out.accepted, out.rejected.len());
    let (app, commit) = ("petclinic", "9f8e7d6c5b4a39281706f5e4d3c2b1a098765432");
    for w in store.windows(app, commit) {
        let rs = store.runtime_snapshot(app, commit, w).expect("window has spans");
        println!("window {w}: {} calls", rs.total_calls());
        for (class, n) in &rs.class_instances {
            println!("  {class:<45} {n} instances");
        }
        for (edge, n) in &rs.edges {
            println!("  {edge}  x{n}");
        }
    }
    Ok(())
}
