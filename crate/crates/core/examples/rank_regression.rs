//! Regression of final rank on heritage, income, market value, welfare and
//! joy burstiness, and the ablation that drops joy burstiness.

use std::path::Path;

use fandom_emotions::ingest::{
    apply_median_threshold, binarize, extract_inter_event, load_metadata, load_posts,
};
use fandom_emotions::model::{Emotion, EmotionalSeries};
use fandom_emotions::regression::{ablation_compare, build_full_model};
use fandom_emotions::temporal::report_from_taus;

fn main() -> fandom_emotions::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let by_team = load_posts(std::fs::File::open(dir.join("posts.csv"))?)?;
    let meta = load_metadata(std::fs::File::open(dir.join("metadata.csv"))?)?;

    let mut reports = Vec::new();
    for (team, posts) in &by_team {
        let (kept, _) = apply_median_threshold(posts)?;
        let events = binarize(&EmotionalSeries::from_posts(&kept)?, Emotion::Joy);
        if let Ok(taus) = extract_inter_event(&events) {
            reports.push(report_from_taus(team, Emotion::Joy, &taus, 1)?);
        }
    }

    let build = build_full_model(&meta, &reports)?;
    for ex in &build.excluded {
        println!("excluded {} ({} undefined)", ex.team_id, ex.predictor);
    }
    let ab = ablation_compare(&build.design, "b_joy")?;

    println!("{:<10} {:>14} {:>14}", "term", "estimate", "standardized");
    for c in &ab.full.coefficients {
        println!(
            "{:<10} {:>14.6e} {:>14.4}",
            c.name, c.estimate, c.standardized
        );
    }
    let r2 = |v: Option<f64>| v.map_or("undefined".into(), |x| format!("{x:.3}"));
    println!(
        "\nfull:    R2 {}  RMSE {:.3}",
        r2(ab.full.r_squared),
        ab.full.rmse
    );
    println!(
        "reduced: R2 {}  RMSE {:.3}",
        r2(ab.reduced.r_squared),
        ab.reduced.rmse
    );
    println!(
        "dropping {}: R2 {}% lower, RMSE {}% higher",
        ab.dropped,
        r2(ab.delta_r2_pct),
        r2(ab.delta_rmse_pct)
    );

    println!(
        "\n{:<6} {:>6} {:>9} {:>9}",
        "team", "rank", "full", "reduced"
    );
    for i in 0..ab.full.rows.len() {
        println!(
            "{:<6} {:>6} {:>9.2} {:>9.2}",
            ab.full.rows[i], ab.full.response[i], ab.full.fitted[i], ab.reduced.fitted[i]
        );
    }
    Ok(())
}
