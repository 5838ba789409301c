//! Build a review deep link and refresh it inside a change request text.

use codecity::service::{build_deep_link, upsert_marker_block};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = "1a2b3c4d5e6f7a8b9c0d1e2f3a4b5c6d7e8f9a0b";
    let target = "9f8e7d6c5b4a39281706f5e4d3c2b1a098765432";
    let first = build_deep_link("https://city.example.test/", "pet clinic", base, target, None, None)?;
    let second = build_deep_link("https://city.example.test", "pet clinic", base, target, Some(3), Some(5))?;
    println!("{first}\n{second}\n");

    let once = upsert_marker_block("Adds invoicing.", &first);
    let twice = upsert_marker_block(&once, &second);
    assert_eq!(upsert_marker_block(&twice, &second), twice);
    println!("{twice}");

    if let Err(e) = build_deep_link("city.example.test", "petclinic", base, target, None, None) {
        println!("\nrelative frontend url: {e}");
    }
    Ok(())
}
