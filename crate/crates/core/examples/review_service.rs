//! Run the review service in-process, upload both petclinic commits and
//! their spans, then fetch a filtered comparison over HTTP.

use std::path::PathBuf;
use std::sync::Arc;

use codecity::agent::{analyze_tree, emit_snapshot_document, DEFAULT_GLOB};
use codecity::model::CommitRef;
use codecity::service::{router, ReviewStore};
use codecity::trace::SpansDocument;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/petclinic");
    let data = std::env::temp_dir().join(format!("codecity-example-{}", std::process::id()));
    let store = Arc::new(ReviewStore::open(&data)?);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let api = format!("http://{}/api/v1", listener.local_addr()?);
    tokio::spawn(async move { axum::serve(listener, router(store)).await });

    let http = reqwest::Client::new();
    let commits = [("base", "spans-base.json", "1a2b3c4d5e6f7a8b9c0d1e2f3a4b5c6d7e8f9a0b"), ("target", "spans-target.json", "9f8e7d6c5b4a39281706f5e4d3c2b1a098765432")];
    for (tree, spans, commit) in commits {
        let cref = CommitRef::new("petclinic", "main", commit, None)?;
        let snap = analyze_tree(&fx.join(tree), &[DEFAULT_GLOB.to_string()], cref)?.snapshot;
        let r = http.post(format!("{api}/structure")).body(emit_snapshot_document(&snap)).send().await?;
        println!("structure {commit}: {}", r.status());

        let mut doc = SpansDocument::parse(&std::fs::read(fx.join(spans))?)?;
        doc.application = Some("petclinic".into());
        doc.commit = Some(commit.into());
        let r: serde_json::Value = http.post(format!("{api}/spans")).json(&doc).send().await?.json().await?;
        println!("spans {commit}: {r}");
    }

    let commits: serde_json::Value = http.get(format!("{api}/applications/petclinic/commits")).send().await?.json().await?;
    println!("commits: {commits}");
    let url = format!(
        "{api}/applications/petclinic/comparison?base={}&target={}&baseWindow=3&targetWindow=5&diffOnly=true",
        commits[0]["commit"].as_str().unwrap_or_default(),
        commits[1]["commit"].as_str().unwrap_or_default()
    );
    let cmp: serde_json::Value = http.get(url).send().await?.json().await?;
    println!("{} layout items, {} edges, warnings {}", cmp["layout"]["items"].as_array().map_or(0, Vec::len), cmp["model"]["edges"].as_array().map_or(0, Vec::len), cmp["warnings"]);

    std::fs::remove_dir_all(&data)?;
    Ok(())
}
