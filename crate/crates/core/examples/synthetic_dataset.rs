//! Writes the seeded synthetic league as `posts.csv` and `metadata.csv`.
//!
//! ```text
//! cargo run --example synthetic_dataset -- fixtures/synthetic [seed]
//! ```

use std::fs::File;
use std::path::PathBuf;

use fandom_emotions::synthetic::{
    generate, write_metadata_csv, write_posts_csv, SyntheticSpec, FIXTURE_SEED,
};

fn main() -> fandom_emotions::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".into()));
    let seed = args
        .next()
        .map(|s| s.parse().expect("seed must be an integer"))
        .unwrap_or(FIXTURE_SEED);

    let data = generate(&SyntheticSpec {
        seed,
        ..SyntheticSpec::default()
    });
    std::fs::create_dir_all(&dir)?;
    write_posts_csv(&data.posts, File::create(dir.join("posts.csv"))?)?;
    write_metadata_csv(&data.teams, File::create(dir.join("metadata.csv"))?)?;
    println!(
        "{} teams, {} posts -> {}",
        data.teams.len(),
        data.posts.len(),
        dir.display()
    );
    for t in &data.teams {
        println!(
            "  {} league {} {:<6} joy pattern {:?}",
            t.team_id, t.league, t.geo, t.pattern
        );
    }
    Ok(())
}
