//! Lay out a comparison as a city and dump the geometry as JSON.

use std::path::PathBuf;

use codecity::agent::{analyze_tree, DEFAULT_GLOB};
use codecity::compare::{diff_structures, merge_comparison, EntityKind};
use codecity::layout::layout_city;
use codecity::model::CommitRef;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/petclinic");
    let snap = |tree: &str, commit: &str| -> Result<_, Box<dyn std::error::Error>> {
        let cref = CommitRef::new("petclinic", "main", commit, None)?;
        Ok(analyze_tree(&fx.join(tree), &[DEFAULT_GLOB.to_string()], cref)?.snapshot)
    };
    let base = snap("base", "1a2b3c4d5e6f7a8b9c0d1e2f3a4b5c6d7e8f9a0b")?;
    let target = snap("target", "9f8e7d6c5b4a39281706f5e4d3c2b1a098765432")?;
    let model = merge_comparison(&diff_structures(&base, &target)?, None, &base.commit_ref, &target.commit_ref, None, None);

    let (city, warnings) = layout_city(&model);
    for w in warnings {
        eprintln!("warning: {w}");
    }
    for it in &city.items {
        let tag = if it.entity_kind == EntityKind::Package { "district" } else { "building" };
        eprintln!(
            "{tag:<8} {:<40} x={:>5.2} z={:>5.2} {:>5.2}x{:<5.2} y={:.1} h={:.2}",
            it.fqn, it.rect.x, it.rect.z, it.rect.width, it.rect.depth, it.base_y, it.height
        );
    }
    println!("{}", serde_json::to_string_pretty(&city)?);
    Ok(())
}
