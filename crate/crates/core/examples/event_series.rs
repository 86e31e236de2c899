//! From raw posts to an event series: comment threshold, daily aggregation,
//! binarization and inter-event times.

use fandom_emotions::ingest::{
    aggregate_daily, apply_median_threshold, binarize, extract_inter_event, load_posts,
};
use fandom_emotions::model::{Emotion, EmotionalSeries};

const POSTS: &str = "\
team_id,timestamp,n_comments,joy,anger,sadness,fear
lions,2023-03-01T09:00:00Z,40,70,10,10,10
lions,2023-03-01T21:30:00Z,2,10,60,20,10
lions,2023-03-02T12:00:00Z,55,30,30,20,20
lions,2023-03-04T08:15:00Z,61,20,50,15,15
lions,2023-03-04T18:45:00Z,33,55,15,15,15
lions,2023-03-07T10:00:00Z,90,40,20,30,10
";

fn main() -> fandom_emotions::Result<()> {
    // Shares are given in percent; the unit is detected from the whole file.
    let by_team = load_posts(POSTS.as_bytes())?;
    let posts = &by_team["lions"];

    let (retained, stats) = apply_median_threshold(posts)?;
    println!(
        "{}: {} posts, median comments {}, {} retained",
        stats.team_id, stats.total_posts, stats.median_comments, stats.retained_posts
    );

    let series = EmotionalSeries::from_posts(&retained)?;
    let daily = aggregate_daily(&series)?;
    println!("\ndaily joy:");
    for o in daily.observations() {
        println!(
            "  {}  {:.3}",
            o.timestamp.date_naive(),
            o.dist.get(Emotion::Joy)
        );
    }

    for emotion in [Emotion::Joy, Emotion::Anger] {
        let events = binarize(&series, emotion);
        let bits: String = events.bits().iter().map(|b| char::from(b'0' + b)).collect();
        print!("\n{:<6} events {bits}", emotion.name());
        // Ties count as events for every tied emotion.
        match extract_inter_event(&events) {
            Ok(taus) => print!(
                "  tau (h): {:?}",
                taus.as_slice()
                    .iter()
                    .map(|t| t / 3600.0)
                    .collect::<Vec<_>>()
            ),
            Err(e) => print!("  ({e})"),
        }
    }
    println!();
    Ok(())
}
