//! DTW clustering of the bundled league's daily joy series: hierarchical
//! clustering under each linkage, k-means with DBA centroids, and profiles.

use std::path::Path;

use fandom_emotions::clustering::{
    cut_dendrogram, dtw_path, hierarchical_cluster, kmeans_dtw, pairwise_distances,
    profile_clusters, KMeansConfig, Linkage,
};
use fandom_emotions::ingest::{aggregate_daily, apply_median_threshold, load_metadata, load_posts};
use fandom_emotions::model::{Emotion, EmotionalSeries};

fn main() -> fandom_emotions::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let by_team = load_posts(std::fs::File::open(dir.join("posts.csv"))?)?;
    let meta = load_metadata(std::fs::File::open(dir.join("metadata.csv"))?)?;

    let mut labels = Vec::new();
    let mut joy = Vec::new();
    for (team, posts) in &by_team {
        let (kept, _) = apply_median_threshold(posts)?;
        labels.push(team.clone());
        joy.push(aggregate_daily(&EmotionalSeries::from_posts(&kept)?)?.signal(Emotion::Joy));
    }

    let (cost, path) = dtw_path(&joy[0], &joy[1])?;
    println!(
        "{} vs {}: DTW {cost:.3} over a {}-step alignment",
        labels[0],
        labels[1],
        path.len()
    );

    let dm = pairwise_distances(&labels, &joy)?;
    for linkage in Linkage::ALL {
        let dg = hierarchical_cluster(&dm, linkage);
        let Some(h) = dg.height_for_k(3) else {
            println!("{linkage:>8}: no cut gives 3 clusters");
            continue;
        };
        let p = cut_dendrogram(&dg, h)?;
        let groups: Vec<String> = (1..=p.k()).map(|c| p.members(c).join(" ")).collect();
        println!("{linkage:>8} cut {h:.3}: [{}]", groups.join("] ["));
    }

    let out = kmeans_dtw(&labels, &joy, &KMeansConfig::new(3, 7))?;
    println!("\nk-means (best of restarts, cost {:.3}):", out.cost);
    for c in 1..=out.partition.k() {
        println!("  cluster {c}: {}", out.partition.members(c).join(" "));
    }

    println!("\nprofiles:");
    for p in profile_clusters(&out.partition, &meta)? {
        println!(
            "  cluster {} (n={}): geo {:?}, league {:?}, median final rank {}",
            p.cluster, p.size, p.geo, p.league, p.final_rank.median
        );
    }
    Ok(())
}
