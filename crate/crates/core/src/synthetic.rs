//! Seeded generator for a small league dataset in the `posts.csv` /
//! `metadata.csv` formats, used as the bundled fixture and in examples.

use std::collections::BTreeSet;
use std::io::Write;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::ingest::{METADATA_HEADER, POSTS_HEADER};
use crate::model::{Geo, League};
use crate::simulate::{derive_seed, rng_from_seed};

/// Seed of the committed fixture under `fixtures/synthetic`.
pub const FIXTURE_SEED: u64 = 2022;

/// Shape of a team's daily joy level over the season.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoyPattern {
    Rising,
    Falling,
    Weekly,
}

impl JoyPattern {
    fn level(self, day: usize, days: usize) -> f64 {
        let t = day as f64 / (days - 1).max(1) as f64;
        match self {
            JoyPattern::Rising => 0.15 + 0.5 * t,
            JoyPattern::Falling => 0.65 - 0.5 * t,
            JoyPattern::Weekly => {
                0.4 + 0.25 * (2.0 * std::f64::consts::PI * day as f64 / 7.0).sin()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPost {
    pub team_id: String,
    pub timestamp: DateTime<Utc>,
    pub n_comments: u64,
    /// joy, anger, sadness, fear as fractions rounded to four decimals.
    pub shares: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTeam {
    pub team_id: String,
    pub league: League,
    pub geo: Geo,
    pub pattern: JoyPattern,
    pub pci: f64,
    pub unemployment: f64,
    pub welfare: f64,
    pub market_value: f64,
    pub heritage_rank: u32,
    pub final_rank: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub teams: Vec<SyntheticTeam>,
    pub posts: Vec<SyntheticPost>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub teams_per_league: usize,
    pub days: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            teams_per_league: 4,
            days: 45,
            seed: FIXTURE_SEED,
        }
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn shares(joy: f64, rng: &mut impl Rng) -> [f64; 4] {
    let joy = round4(joy.clamp(0.02, 0.9));
    let w: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.1..1.0));
    let total: f64 = w.iter().sum();
    let rest = 1.0 - joy;
    let anger = round4(rest * w[0] / total);
    let sadness = round4(rest * w[1] / total);
    let fear = round4(1.0 - joy - anger - sadness);
    [joy, anger, sadness, fear]
}

/// Generates teams and posts. The last team posts once a day at 18:00 with
/// joy on even days and anger on odd days, so its joy events are periodic.
pub fn generate(spec: &SyntheticSpec) -> SyntheticDataset {
    let leagues = [League::A, League::B, League::C];
    let geos = [
        Geo::North,
        Geo::North,
        Geo::Center,
        Geo::South,
        Geo::North,
        Geo::Center,
    ];
    let patterns = [JoyPattern::Rising, JoyPattern::Falling, JoyPattern::Weekly];
    let n = spec.teams_per_league * leagues.len();
    let start = Utc.with_ymd_and_hms(2022, 8, 13, 0, 0, 0).unwrap();

    let mut meta_rng = rng_from_seed(derive_seed(spec.seed, 0));
    let mut heritage: Vec<u32> = (1..=n as u32).collect();
    heritage.shuffle(&mut meta_rng);
    let mut teams = Vec::with_capacity(n);
    for (l, league) in leagues.iter().enumerate() {
        let mut ranks: Vec<u32> = (1..=spec.teams_per_league as u32).collect();
        ranks.shuffle(&mut meta_rng);
        for (j, rank) in ranks.into_iter().enumerate() {
            let i = l * spec.teams_per_league + j;
            teams.push(SyntheticTeam {
                team_id: format!("t{:02}", i + 1),
                league: *league,
                geo: geos[i % geos.len()],
                pattern: patterns[i % patterns.len()],
                pci: (meta_rng.random_range(14_000.0..32_000.0f64)).round(),
                unemployment: round4(meta_rng.random_range(0.04..0.2)),
                welfare: (meta_rng.random_range(80.0..250.0f64) * 10.0).round() / 10.0,
                market_value: (meta_rng.random_range(5.0..400.0f64) * 10.0).round() * 1e5,
                heritage_rank: heritage[i],
                final_rank: rank,
            });
        }
    }

    let noise = Normal::new(0.0, 0.08).expect("valid sd");
    let mut posts = Vec::new();
    for (i, team) in teams.iter().enumerate() {
        let mut rng = rng_from_seed(derive_seed(spec.seed, 1 + i as u64));
        if i + 1 == n {
            for day in 0..spec.days {
                let s = if day % 2 == 0 {
                    shares(0.6, &mut rng)
                } else {
                    [0.15, 0.55, 0.15, 0.15]
                };
                posts.push(SyntheticPost {
                    team_id: team.team_id.clone(),
                    timestamp: start + Duration::days(day as i64) + Duration::hours(18),
                    n_comments: 50,
                    shares: s,
                });
            }
            continue;
        }
        let max_per_day = 1 + i % 4;
        let comment_scale = 20 + 40 * (i % 5) as u64;
        let mut seen = BTreeSet::new();
        for day in 0..spec.days {
            let level = team.pattern.level(day, spec.days);
            for _ in 0..rng.random_range(0..=max_per_day) {
                let mut second = rng.random_range(0..86_400);
                while !seen.insert((day, second)) {
                    second = rng.random_range(0..86_400);
                }
                posts.push(SyntheticPost {
                    team_id: team.team_id.clone(),
                    timestamp: start + Duration::days(day as i64) + Duration::seconds(second),
                    n_comments: rng.random_range(0..=comment_scale),
                    shares: shares(level + noise.sample(&mut rng), &mut rng),
                });
            }
        }
    }
    posts.sort_by(|a, b| (&a.team_id, a.timestamp).cmp(&(&b.team_id, b.timestamp)));
    SyntheticDataset { teams, posts }
}

pub fn write_posts_csv<W: Write>(posts: &[SyntheticPost], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POSTS_HEADER)?;
    for p in posts {
        let mut rec = vec![
            p.team_id.clone(),
            p.timestamp.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            p.n_comments.to_string(),
        ];
        rec.extend(p.shares.iter().map(|s| format!("{s:.4}")));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metadata_csv<W: Write>(teams: &[SyntheticTeam], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METADATA_HEADER)?;
    for t in teams {
        w.write_record([
            t.team_id.clone(),
            t.league.to_string(),
            t.geo.to_string(),
            t.pci.to_string(),
            t.unemployment.to_string(),
            t.welfare.to_string(),
            t.market_value.to_string(),
            t.heritage_rank.to_string(),
            t.final_rank.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_metadata, load_posts};

    #[test]
    fn generated_files_load() {
        let data = generate(&SyntheticSpec::default());
        let mut posts = Vec::new();
        write_posts_csv(&data.posts, &mut posts).unwrap();
        let mut meta = Vec::new();
        write_metadata_csv(&data.teams, &mut meta).unwrap();
        let by_team = load_posts(posts.as_slice()).unwrap();
        assert_eq!(by_team.len(), 12);
        let meta = load_metadata(meta.as_slice()).unwrap();
        assert_eq!(meta.len(), 12);
        assert_eq!(data, generate(&SyntheticSpec::default()));
    }
}
