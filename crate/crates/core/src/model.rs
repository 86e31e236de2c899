//! Domain types shared by every stage of the pipeline.
//!
//! Emotion shares are stored as fractions in `[0, 1]`. A post never carries
//! comment text, only the aggregated distribution over the four emotions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ pct = 1` for a constructed distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Joy,
    Anger,
    Sadness,
    Fear,
}

impl Emotion {
    pub const ALL: [Emotion; 4] = [
        Emotion::Joy,
        Emotion::Anger,
        Emotion::Sadness,
        Emotion::Fear,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Joy => "joy",
            Emotion::Anger => "anger",
            Emotion::Sadness => "sadness",
            Emotion::Fear => "fear",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "joy" => Ok(Emotion::Joy),
            "anger" => Ok(Emotion::Anger),
            "sadness" => Ok(Emotion::Sadness),
            "fear" => Ok(Emotion::Fear),
            other => Err(Error::InvalidParameter(format!(
                "unknown emotion `{other}`"
            ))),
        }
    }
}

/// Share of a post's classified comments falling into each emotion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct EmotionDistribution {
    pct: [f64; 4],
}

impl EmotionDistribution {
    /// Builds a distribution from fractions that already sum to one.
    pub fn new(joy: f64, anger: f64, sadness: f64, fear: f64) -> Result<Self> {
        let pct = [joy, anger, sadness, fear];
        for (e, v) in Emotion::ALL.iter().zip(pct) {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidDistribution(format!(
                    "{e} = {v} is outside [0, 1]"
                )));
            }
        }
        let sum: f64 = pct.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "shares sum to {sum}, expected 1"
            )));
        }
        Ok(Self { pct })
    }

    /// Normalizes non-negative weights (counts, percentages, averages) to sum to one.
    pub fn from_weights(weights: [f64; 4]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weights must be finite and non-negative, got {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self {
            pct: weights.map(|w| w / sum),
        })
    }

    pub fn get(&self, emotion: Emotion) -> f64 {
        self.pct[emotion.index()]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.pct
    }

    pub fn max_share(&self) -> f64 {
        self.pct.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when `emotion` holds the maximal share. Ties make every tied emotion maximal.
    pub fn is_maximal(&self, emotion: Emotion) -> bool {
        self.get(emotion) == self.max_share()
    }

    /// Emotions holding the maximal share; never empty.
    pub fn argmax(&self) -> Vec<Emotion> {
        Emotion::ALL
            .into_iter()
            .filter(|e| self.is_maximal(*e))
            .collect()
    }

    /// Arithmetic mean of several distributions, renormalized to sum to one.
    pub fn mean<'a>(dists: impl IntoIterator<Item = &'a EmotionDistribution>) -> Result<Self> {
        let mut acc = [0.0; 4];
        let mut n = 0usize;
        for d in dists {
            for (a, v) in acc.iter_mut().zip(d.pct) {
                *a += v;
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::EmptyInput("cannot average zero distributions"));
        }
        Self::from_weights(acc.map(|a| a / n as f64))
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    joy: f64,
    anger: f64,
    sadness: f64,
    fear: f64,
}

impl TryFrom<DistributionRepr> for EmotionDistribution {
    type Error = Error;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        EmotionDistribution::new(r.joy, r.anger, r.sadness, r.fear)
    }
}

impl From<EmotionDistribution> for DistributionRepr {
    fn from(d: EmotionDistribution) -> Self {
        let [joy, anger, sadness, fear] = d.pct;
        DistributionRepr {
            joy,
            anger,
            sadness,
            fear,
        }
    }
}

/// One team post with the emotion distribution of its comments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub team_id: String,
    pub timestamp: DateTime<Utc>,
    pub n_comments: u64,
    pub dist: EmotionDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub timestamp: DateTime<Utc>,
    #[serde(flatten)]
    pub dist: EmotionDistribution,
}

/// Time-ordered emotion distributions for one team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct EmotionalSeries {
    team_id: String,
    observations: Vec<Observation>,
}

impl EmotionalSeries {
    pub fn new(team_id: impl Into<String>, observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyInput(
                "an emotional series needs at least one observation",
            ));
        }
        let team_id = team_id.into();
        if let Some(w) = observations
            .windows(2)
            .find(|w| w[1].timestamp <= w[0].timestamp)
        {
            return Err(Error::DuplicateTimestamp {
                team: team_id,
                timestamp: w[1].timestamp.to_rfc3339(),
            });
        }
        Ok(Self {
            team_id,
            observations,
        })
    }

    /// Builds a series from one team's time-sorted posts.
    ///
    /// Posts sharing a timestamp (only possible when the input carried a
    /// `seq` column) are collapsed into their mean distribution.
    pub fn from_posts(posts: &[PostRecord]) -> Result<Self> {
        let first = posts.first().ok_or(Error::EmptyInput(
            "an emotional series needs at least one post",
        ))?;
        let mut observations: Vec<Observation> = Vec::with_capacity(posts.len());
        let mut i = 0;
        while i < posts.len() {
            let ts = posts[i].timestamp;
            let mut j = i + 1;
            while j < posts.len() && posts[j].timestamp == ts {
                j += 1;
            }
            let dist = if j - i == 1 {
                posts[i].dist
            } else {
                EmotionDistribution::mean(posts[i..j].iter().map(|p| &p.dist))?
            };
            observations.push(Observation {
                timestamp: ts,
                dist,
            });
            i = j;
        }
        Self::new(first.team_id.clone(), observations)
    }

    pub fn team_id(&self) -> &str {
        &self.team_id
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// The real-valued signal of one emotion.
    pub fn signal(&self, emotion: Emotion) -> Vec<f64> {
        self.observations
            .iter()
            .map(|o| o.dist.get(emotion))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    team_id: String,
    observations: Vec<Observation>,
}

impl TryFrom<SeriesRepr> for EmotionalSeries {
    type Error = Error;

    fn try_from(r: SeriesRepr) -> Result<Self> {
        EmotionalSeries::new(r.team_id, r.observations)
    }
}

impl From<EmotionalSeries> for SeriesRepr {
    fn from(s: EmotionalSeries) -> Self {
        SeriesRepr {
            team_id: s.team_id,
            observations: s.observations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryEvent {
    pub timestamp: DateTime<Utc>,
    pub active: bool,
}

/// Binary signal marking the observations where one emotion is maximal.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryEventSeries {
    pub team_id: String,
    pub emotion: Emotion,
    pub events: Vec<BinaryEvent>,
}

impl BinaryEventSeries {
    pub fn active_count(&self) -> usize {
        self.events.iter().filter(|e| e.active).count()
    }

    pub fn bits(&self) -> Vec<u8> {
        self.events.iter().map(|e| u8::from(e.active)).collect()
    }
}

/// Strictly positive waiting times between consecutive events, in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct InterEventTimes {
    taus: Vec<f64>,
}

impl InterEventTimes {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if let Some(t) = taus.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "inter-event times must be finite and positive, got {t}"
            )));
        }
        Ok(Self { taus })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.taus
    }

    pub fn n_tau(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut taus = self.taus.clone();
        taus.reverse();
        Self { taus }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.taus.iter().map(|t| t * factor).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum League {
    A,
    B,
    C,
}

impl FromStr for League {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" | "SERIE A" => Ok(League::A),
            "B" | "SERIE B" => Ok(League::B),
            "C" | "LEGA PRO" => Ok(League::C),
            other => Err(Error::InvalidParameter(format!("unknown league `{other}`"))),
        }
    }
}

impl fmt::Display for League {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            League::A => "A",
            League::B => "B",
            League::C => "C",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Geo {
    North,
    Center,
    South,
}

impl FromStr for Geo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "north" | "n" => Ok(Geo::North),
            "center" | "centre" | "c" => Ok(Geo::Center),
            "south" | "s" => Ok(Geo::South),
            other => Err(Error::InvalidParameter(format!("unknown geo `{other}`"))),
        }
    }
}

impl fmt::Display for Geo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geo::North => "North",
            Geo::Center => "Center",
            Geo::South => "South",
        })
    }
}

/// Static attributes of a team and its season outcome.
///
/// `mv_rank` and `pci_rank` are expected ranks within the league: the
/// highest market value (or per-capita income) is expected to finish first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamMetadata {
    pub team_id: String,
    pub league: League,
    pub geo: Geo,
    pub pci: f64,
    pub unemployment: f64,
    pub welfare: f64,
    pub market_value: f64,
    pub heritage_rank: u32,
    pub final_rank: u32,
    pub mv_rank: u32,
    pub pci_rank: u32,
}

impl TeamMetadata {
    pub fn delta_mv(&self) -> i64 {
        delta_rank(self.mv_rank, self.final_rank)
    }

    pub fn delta_pci(&self) -> i64 {
        delta_rank(self.pci_rank, self.final_rank)
    }
}

/// Assigns `mv_rank` and `pci_rank` within each league (descending value,
/// ties broken by team id).
pub fn assign_expected_ranks(teams: &mut [TeamMetadata]) {
    let mut by_league: BTreeMap<League, Vec<usize>> = BTreeMap::new();
    for (i, t) in teams.iter().enumerate() {
        by_league.entry(t.league).or_default().push(i);
    }
    for idx in by_league.values() {
        let mut order = idx.clone();
        order.sort_by(|&a, &b| {
            teams[b]
                .market_value
                .total_cmp(&teams[a].market_value)
                .then_with(|| teams[a].team_id.cmp(&teams[b].team_id))
        });
        for (rank, &i) in order.iter().enumerate() {
            teams[i].mv_rank = rank as u32 + 1;
        }
        let mut order = idx.clone();
        order.sort_by(|&a, &b| {
            teams[b]
                .pci
                .total_cmp(&teams[a].pci)
                .then_with(|| teams[a].team_id.cmp(&teams[b].team_id))
        });
        for (rank, &i) in order.iter().enumerate() {
            teams[i].pci_rank = rank as u32 + 1;
        }
    }
}

/// Expected minus final rank. Positive means the team finished better than expected.
pub fn delta_rank(expected_rank: u32, final_rank: u32) -> i64 {
    i64::from(expected_rank) - i64::from(final_rank)
}

/// Burstiness and memory statistics for one (team, emotion) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstinessReport {
    pub team_id: String,
    pub emotion: Emotion,
    pub n_tau: usize,
    pub mu_tau: f64,
    pub sigma_tau: f64,
    pub r: f64,
    pub b: f64,
    pub b_n: f64,
    /// `None` when either memory window has zero variance.
    pub memory: Option<f64>,
    pub lag: usize,
}
