//! Analyze a Java source tree and print its structure document.
//!
//! cargo run --example analyze_tree -- [ROOT]

use std::path::PathBuf;

use codecity::agent::{analyze_tree, emit_snapshot_document, DEFAULT_GLOB};
use codecity::model::CommitRef;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/petclinic/base")
    });
    let cref = CommitRef::new("petclinic", "main", "1a2b3c4d5e6f7a8b9c0d1e2f3a4b5c6d7e8f9a0b", None)?;
    let analysis = analyze_tree(&root, &[DEFAULT_GLOB.to_string()], cref)?;
    let s = &analysis.snapshot;
    eprintln!(
        "{} files, {} packages, {} classes, {} methods, {} warnings",
        s.files.len(),
        s.package_paths().len(),
        s.class_count(),
        s.method_count(),
        s.warnings.len()
    );
    for c in s.classes() {
        eprintln!("  {:<45} {:<9} {:>3} loc  {} methods", c.fqn, c.kind.as_str(), c.loc.code_lines, c.methods.len());
    }
    println!("{}", String::from_utf8(emit_snapshot_document(s))?);
    Ok(())
}
