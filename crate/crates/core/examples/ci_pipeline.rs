//! The CI jobs a pipeline would run per commit: analyze and push, replay a
//! load-test fixture, then compute the link a change request would carry.

use std::path::PathBuf;
use std::sync::Arc;

use codecity::ci::{run_analyze_job, run_trace_replay, CiContext, CiFlags};
use codecity::service::{build_deep_link, router, upsert_marker_block, ReviewStore};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/petclinic");
    let data = tempdir();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let api = format!("http://{}", listener.local_addr()?);
    let store = Arc::new(ReviewStore::open(&data)?);
    tokio::spawn(async move { axum::serve(listener, router(store)).await });

    let client = reqwest::Client::new();
    let runs = [
        ("base", "spans-base.json", "1a2b3c4d5e6f7a8b9c0d1e2f3a4b5c6d7e8f9a0b"),
        ("target", "spans-target.json", "9f8e7d6c5b4a39281706f5e4d3c2b1a098765432"),
    ];
    for (tree, spans, sha) in runs {
        // a pipeline gets these from CI_COMMIT_SHA and CODECITY_API_URL
        let env = |k: &str| match k {
            "CI_COMMIT_SHA" => Some(sha.to_string()),
            "CODECITY_API_URL" => Some(api.clone()),
            _ => None,
        };
        let ctx = CiContext::resolve(&CiFlags { application: "petclinic".into(), ..Default::default() }, env)?;
        let analyzed = run_analyze_job(&client, &ctx, &fx.join(tree)).await?;
        let replayed = run_trace_replay(&client, &ctx, &fx.join(spans), 1.0).await?;
        println!("{}: {} classes, {} spans in {} batches", analyzed.commit_ref, analyzed.classes, replayed.spans, replayed.batches);
    }

    let link = build_deep_link("https://city.example.test", "petclinic", runs[0].2, runs[1].2, Some(3), Some(5))?;
    println!("\n{}", upsert_marker_block("Adds invoicing to visits.", &link));
    std::fs::remove_dir_all(&data)?;
    Ok(())
}

fn tempdir() -> PathBuf {
    std::env::temp_dir().join(format!("codecity-ci-example-{}", std::process::id()))
}
