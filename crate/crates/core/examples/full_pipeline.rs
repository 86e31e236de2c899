//! Every pipeline stage on the bundled league, written to an output
//! directory (default `target/fandom-report`).
//!
//! ```text
//! cargo run --example full_pipeline -- /tmp/report
//! ```

use std::path::{Path, PathBuf};

use fandom_emotions::pipeline::{cmd_report, tree_digests, Manifest, PipelineConfig};

fn main() -> fandom_emotions::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("target/fandom-report"));
    let cfg = PipelineConfig {
        posts: Some(data.join("posts.csv")),
        metadata: Some(data.join("metadata.csv")),
        out_dir: out.clone(),
        seed: 7,
        ..PipelineConfig::default()
    };
    cmd_report(&cfg)?;

    for (rel, digest) in tree_digests(&out)? {
        println!("{}  {rel}", &digest[..12]);
    }
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(out.join("manifest.json"))?)?;
    println!(
        "\nconfig hash {} (seed {})",
        manifest.config_hash, manifest.seed
    );
    Ok(())
}
