//! Post ingestion, per-account comment threshold, daily aggregation and the
//! event-based (binary) representation of emotional series.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    assign_expected_ranks, BinaryEvent, BinaryEventSeries, Emotion, EmotionDistribution,
    EmotionalSeries, InterEventTimes, Observation, PostRecord, TeamMetadata,
};

pub const POSTS_HEADER: [&str; 7] = [
    "team_id",
    "timestamp",
    "n_comments",
    "joy",
    "anger",
    "sadness",
    "fear",
];

pub const METADATA_HEADER: [&str; 9] = [
    "team_id",
    "league",
    "geo",
    "pci",
    "unemployment",
    "welfare",
    "market_value",
    "heritage_rank",
    "final_rank",
];

/// Emotion columns whose maximum exceeds this are read as percentages.
pub const PERCENT_DETECTION_THRESHOLD: f64 = 1.5;

/// Accepted deviation of a row's emotion sum from one, after unit scaling.
pub const ROW_SUM_TOLERANCE: f64 = 1e-3;

/// One parsed line of `posts.csv`, before unit scaling and validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPostRow {
    pub row: usize,
    pub team_id: String,
    pub timestamp: DateTime<Utc>,
    pub n_comments: u64,
    pub shares: [f64; 4],
    pub seq: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostsPerDay {
    pub min: usize,
    pub median: f64,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestStats {
    pub team_id: String,
    pub total_posts: usize,
    pub retained_posts: usize,
    pub median_comments: u64,
    /// Posts per active calendar day, over all of the team's posts.
    pub posts_per_day: PostsPerDay,
}

/// Posts grouped by team, each group sorted by timestamp.
pub type PostsByTeam = BTreeMap<String, Vec<PostRecord>>;

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::parse(0, name, "missing column in header"))
}

/// Parses an ISO-8601 timestamp. Naive timestamps are taken as UTC; the
/// result is truncated to whole seconds.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    let dt = if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        dt.with_timezone(&Utc)
    } else {
        let naive = [
            "%Y-%m-%dT%H:%M:%S%.f",
            "%Y-%m-%d %H:%M:%S%.f",
            "%Y-%m-%dT%H:%M",
            "%Y-%m-%d %H:%M",
        ]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })?;
        Utc.from_utc_datetime(&naive)
    };
    Utc.timestamp_opt(dt.timestamp(), 0).single()
}

fn parse_field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
    row: usize,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec
        .get(idx)
        .ok_or_else(|| Error::parse(row, name, "missing value"))?;
    raw.trim()
        .parse::<T>()
        .map_err(|e| Error::parse(row, name, format!("cannot parse `{raw}`: {e}")))
}

/// Reads `posts.csv` rows without unit scaling. Rows are numbered from 1.
pub fn read_raw_posts<R: Read>(source: R) -> Result<Vec<RawPostRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = POSTS_HEADER
        .iter()
        .map(|name| column_index(&headers, name))
        .collect::<Result<_>>()?;
    let seq_idx = headers.iter().position(|h| h.trim() == "seq");

    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let team_id: String = parse_field(&rec, idx[0], "team_id", row)?;
        if team_id.is_empty() {
            return Err(Error::parse(row, "team_id", "empty team id"));
        }
        let ts_raw = rec.get(idx[1]).unwrap_or_default();
        let timestamp = parse_timestamp(ts_raw).ok_or_else(|| {
            Error::parse(
                row,
                "timestamp",
                format!("not an ISO-8601 timestamp: `{ts_raw}`"),
            )
        })?;
        let n_comments: u64 = parse_field(&rec, idx[2], "n_comments", row)?;
        let mut shares = [0.0; 4];
        for (k, e) in Emotion::ALL.iter().enumerate() {
            let v: f64 = parse_field(&rec, idx[3 + k], e.name(), row)?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::parse(
                    row,
                    e.name(),
                    format!("share must be non-negative, got {v}"),
                ));
            }
            shares[k] = v;
        }
        let seq = match seq_idx {
            Some(s) => Some(parse_field::<i64>(&rec, s, "seq", row)?),
            None => None,
        };
        rows.push(RawPostRow {
            row,
            team_id,
            timestamp,
            n_comments,
            shares,
            seq,
        });
    }
    Ok(rows)
}

/// Parses `posts.csv` into per-team, time-sorted post lists.
///
/// Shares may be fractions or percentages; percentages are detected when
/// any emotion value in the file exceeds [`PERCENT_DETECTION_THRESHOLD`].
pub fn load_posts<R: Read>(source: R) -> Result<PostsByTeam> {
    let rows = read_raw_posts(source)?;
    let max = rows.iter().flat_map(|r| r.shares).fold(0.0_f64, f64::max);
    let scale = if max > PERCENT_DETECTION_THRESHOLD {
        100.0
    } else {
        1.0
    };

    let mut grouped: BTreeMap<String, Vec<(Option<i64>, usize, PostRecord)>> = BTreeMap::new();
    for r in rows {
        let shares = r.shares.map(|v| v / scale);
        let sum: f64 = shares.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::parse(
                r.row,
                "joy,anger,sadness,fear",
                format!("emotion shares sum to {sum:.6}, expected 1"),
            ));
        }
        let dist = EmotionDistribution::from_weights(shares)
            .map_err(|e| Error::parse(r.row, "joy,anger,sadness,fear", e.to_string()))?;
        grouped.entry(r.team_id.clone()).or_default().push((
            r.seq,
            r.row,
            PostRecord {
                team_id: r.team_id,
                timestamp: r.timestamp,
                n_comments: r.n_comments,
                dist,
            },
        ));
    }

    let mut out = BTreeMap::new();
    for (team, mut posts) in grouped {
        posts.sort_by(|a, b| {
            a.2.timestamp
                .cmp(&b.2.timestamp)
                .then(a.0.cmp(&b.0))
                .then(a.1.cmp(&b.1))
        });
        for w in posts.windows(2) {
            let same_time = w[0].2.timestamp == w[1].2.timestamp;
            if same_time && (w[0].0.is_none() || w[0].0 == w[1].0) {
                return Err(Error::DuplicateTimestamp {
                    team,
                    timestamp: w[1].2.timestamp.to_rfc3339(),
                });
            }
        }
        out.insert(team, posts.into_iter().map(|p| p.2).collect());
    }
    Ok(out)
}

/// Parses `metadata.csv` and derives the league-scoped expected ranks.
pub fn load_metadata<R: Read>(source: R) -> Result<Vec<TeamMetadata>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = METADATA_HEADER
        .iter()
        .map(|name| column_index(&headers, name))
        .collect::<Result<_>>()?;

    let mut teams = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let positive_rank = |k: usize, name: &str| -> Result<u32> {
            let v: u32 = parse_field(&rec, idx[k], name, row)?;
            if v == 0 {
                return Err(Error::parse(row, name, "ranks start at 1"));
            }
            Ok(v)
        };
        let finite = |k: usize, name: &str| -> Result<f64> {
            let v: f64 = parse_field(&rec, idx[k], name, row)?;
            if !v.is_finite() {
                return Err(Error::parse(row, name, "value must be finite"));
            }
            Ok(v)
        };
        teams.push(TeamMetadata {
            team_id: parse_field(&rec, idx[0], "team_id", row)?,
            league: parse_field(&rec, idx[1], "league", row)?,
            geo: parse_field(&rec, idx[2], "geo", row)?,
            pci: finite(3, "pci")?,
            unemployment: finite(4, "unemployment")?,
            welfare: finite(5, "welfare")?,
            market_value: finite(6, "market_value")?,
            heritage_rank: positive_rank(7, "heritage_rank")?,
            final_rank: positive_rank(8, "final_rank")?,
            mv_rank: 0,
            pci_rank: 0,
        });
    }

    let mut seen_team = BTreeSet::new();
    let mut seen_rank = BTreeSet::new();
    for (i, t) in teams.iter().enumerate() {
        if !seen_team.insert(t.team_id.clone()) {
            return Err(Error::parse(
                i + 1,
                "team_id",
                format!("duplicate team `{}`", t.team_id),
            ));
        }
        if !seen_rank.insert((t.league, t.final_rank)) {
            return Err(Error::parse(
                i + 1,
                "final_rank",
                format!(
                    "final rank {} repeated within league {}",
                    t.final_rank, t.league
                ),
            ));
        }
    }
    assign_expected_ranks(&mut teams);
    Ok(teams)
}

/// Lower-middle median, so the threshold is always an attained count.
pub fn lower_median(values: &[u64]) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    Some(v[(v.len() - 1) / 2])
}

/// Keeps posts with at least `threshold` comments, and never a post with none.
pub fn retain_at_least(posts: &[PostRecord], threshold: u64) -> Vec<PostRecord> {
    posts
        .iter()
        .filter(|p| p.n_comments >= threshold.max(1))
        .cloned()
        .collect()
}

fn posts_per_day(posts: &[PostRecord]) -> PostsPerDay {
    let mut per_day: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for p in posts {
        *per_day.entry(p.timestamp.date_naive()).or_default() += 1;
    }
    let mut counts: Vec<usize> = per_day.into_values().collect();
    counts.sort_unstable();
    let n = counts.len();
    let median = if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
    };
    PostsPerDay {
        min: counts[0],
        median,
        max: counts[n - 1],
    }
}

/// Keeps the team's posts whose comment count reaches the team's median.
pub fn apply_median_threshold(posts: &[PostRecord]) -> Result<(Vec<PostRecord>, IngestStats)> {
    let counts: Vec<u64> = posts.iter().map(|p| p.n_comments).collect();
    let median = lower_median(&counts).ok_or(Error::EmptyInput("no posts to threshold"))?;
    let retained = retain_at_least(posts, median);
    let stats = IngestStats {
        team_id: posts[0].team_id.clone(),
        total_posts: posts.len(),
        retained_posts: retained.len(),
        median_comments: median,
        posts_per_day: posts_per_day(posts),
    };
    Ok((retained, stats))
}

/// One observation per calendar day (UTC) holding the mean distribution of
/// that day's posts, stamped at midnight. Days without posts are skipped.
pub fn aggregate_daily(series: &EmotionalSeries) -> Result<EmotionalSeries> {
    let mut days: BTreeMap<NaiveDate, Vec<EmotionDistribution>> = BTreeMap::new();
    for o in series.observations() {
        days.entry(o.timestamp.date_naive())
            .or_default()
            .push(o.dist);
    }
    let observations = days
        .into_iter()
        .map(|(day, dists)| {
            let midnight = day.and_hms_opt(0, 0, 0).expect("midnight exists");
            Ok(Observation {
                timestamp: Utc.from_utc_datetime(&midnight),
                dist: EmotionDistribution::mean(&dists)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EmotionalSeries::new(series.team_id(), observations)
}

/// Marks each observation where `emotion` holds the maximal share.
pub fn binarize(series: &EmotionalSeries, emotion: Emotion) -> BinaryEventSeries {
    BinaryEventSeries {
        team_id: series.team_id().to_string(),
        emotion,
        events: series
            .observations()
            .iter()
            .map(|o| BinaryEvent {
                timestamp: o.timestamp,
                active: o.dist.is_maximal(emotion),
            })
            .collect(),
    }
}

/// Waiting times, in seconds, between consecutive active events.
pub fn extract_inter_event(series: &BinaryEventSeries) -> Result<InterEventTimes> {
    let times: Vec<i64> = series
        .events
        .iter()
        .filter(|e| e.active)
        .map(|e| e.timestamp.timestamp())
        .collect();
    if times.len() < 2 {
        return Err(Error::InsufficientEvents {
            needed: 2,
            found: times.len(),
        });
    }
    InterEventTimes::new(times.windows(2).map(|w| (w[1] - w[0]) as f64).collect())
}
