use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Partition;
use crate::error::{Error, Result};
use crate::model::{Geo, League, TeamMetadata};

/// Min, quartiles and max with linear interpolation between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub(crate) fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Categorical and continuous feature summary of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster: usize,
    pub size: usize,
    pub teams: Vec<String>,
    pub geo: BTreeMap<String, usize>,
    pub league: BTreeMap<String, usize>,
    pub pci_tertile: BTreeMap<String, usize>,
    pub mv_tertile: BTreeMap<String, usize>,
    pub final_rank: FiveNumber,
    pub delta_pci: FiveNumber,
    pub delta_mv: FiveNumber,
}

/// Cut points at the 1/3 and 2/3 quantiles.
pub fn tertile_cutpoints(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some((quantile(&v, 1.0 / 3.0), quantile(&v, 2.0 / 3.0)))
}

fn tertile(v: f64, (c1, c2): (f64, f64)) -> &'static str {
    if v <= c1 {
        "Q1"
    } else if v <= c2 {
        "Q2"
    } else {
        "Q3"
    }
}

fn zeroed(keys: &[String]) -> BTreeMap<String, usize> {
    keys.iter().map(|k| (k.clone(), 0)).collect()
}

/// Per-cluster feature distributions. PCI and MV tertiles are computed over
/// all partitioned teams before splitting by cluster.
pub fn profile_clusters(p: &Partition, meta: &[TeamMetadata]) -> Result<Vec<ClusterProfile>> {
    let by_id: BTreeMap<&str, &TeamMetadata> =
        meta.iter().map(|m| (m.team_id.as_str(), m)).collect();
    let teams: Vec<&TeamMetadata> = p
        .labels()
        .iter()
        .map(|l| {
            by_id
                .get(l.as_str())
                .copied()
                .ok_or_else(|| Error::MissingMetadata(l.clone()))
        })
        .collect::<Result<_>>()?;

    let pci: Vec<f64> = teams.iter().map(|m| m.pci).collect();
    let mv: Vec<f64> = teams.iter().map(|m| m.market_value).collect();
    let (Some(pci_cuts), Some(mv_cuts)) = (tertile_cutpoints(&pci), tertile_cutpoints(&mv)) else {
        return Ok(Vec::new());
    };

    let geo_keys: Vec<String> = [Geo::North, Geo::Center, Geo::South]
        .iter()
        .map(Geo::to_string)
        .collect();
    let league_keys: Vec<String> = [League::A, League::B, League::C]
        .iter()
        .map(League::to_string)
        .collect();
    let tertile_keys: Vec<String> = ["Q1", "Q2", "Q3"].iter().map(|s| s.to_string()).collect();

    let mut out = Vec::with_capacity(p.k());
    for c in 1..=p.k() {
        let members: Vec<&TeamMetadata> = teams
            .iter()
            .zip(p.assignment())
            .filter(|(_, &a)| a == c)
            .map(|(m, _)| *m)
            .collect();
        let mut geo = zeroed(&geo_keys);
        let mut league = zeroed(&league_keys);
        let mut pci_tertile = zeroed(&tertile_keys);
        let mut mv_tertile = zeroed(&tertile_keys);
        for m in &members {
            *geo.get_mut(&m.geo.to_string()).expect("all geos listed") += 1;
            *league
                .get_mut(&m.league.to_string())
                .expect("all leagues listed") += 1;
            *pci_tertile
                .get_mut(tertile(m.pci, pci_cuts))
                .expect("tertile key") += 1;
            *mv_tertile
                .get_mut(tertile(m.market_value, mv_cuts))
                .expect("tertile key") += 1;
        }
        let summary = |f: &dyn Fn(&TeamMetadata) -> f64| {
            FiveNumber::of(&members.iter().map(|m| f(m)).collect::<Vec<_>>())
                .expect("clusters are non-empty")
        };
        out.push(ClusterProfile {
            cluster: c,
            size: members.len(),
            teams: members.iter().map(|m| m.team_id.clone()).collect(),
            geo,
            league,
            pci_tertile,
            mv_tertile,
            final_rank: summary(&|m| f64::from(m.final_rank)),
            delta_pci: summary(&|m| m.delta_pci() as f64),
            delta_mv: summary(&|m| m.delta_mv() as f64),
        });
    }
    Ok(out)
}
