use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{cut_dendrogram, hierarchical_cluster, DistanceMatrix, Linkage};
use crate::error::{Error, Result};
use crate::model::{Geo, TeamMetadata};

/// A reference cluster composition by geography, with per-category slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoTarget {
    pub north: usize,
    pub center: usize,
    pub south: usize,
    pub tolerance: usize,
}

impl GeoTarget {
    fn deviation(&self, counts: [usize; 3]) -> usize {
        [self.north, self.center, self.south]
            .iter()
            .zip(counts)
            .map(|(t, c)| t.abs_diff(c))
            .max()
            .expect("three categories")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageAttempt {
    pub linkage: Linkage,
    /// Height yielding exactly `k` clusters, if one exists.
    pub cut_height: Option<f64>,
    /// `[north, center, south]` counts per cluster, in cluster-label order.
    pub cluster_geo: Vec<[usize; 3]>,
    pub cluster_sizes: Vec<usize>,
    /// Cluster label closest to the target and its largest per-category deviation.
    pub closest_cluster: Option<usize>,
    pub max_deviation: Option<usize>,
    pub matched: bool,
}

/// Outcome of searching linkage conventions for a reference composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionReport {
    pub k: usize,
    pub target: GeoTarget,
    pub attempts: Vec<LinkageAttempt>,
    pub matched_linkages: Vec<Linkage>,
    pub conclusion: String,
}

/// Cuts the dendrogram of every linkage at `k` clusters and looks for a
/// cluster whose geographic mix is within the target's tolerance.
pub fn sweep_linkages(
    dm: &DistanceMatrix,
    meta: &[TeamMetadata],
    k: usize,
    target: GeoTarget,
) -> Result<ConventionReport> {
    let geo: BTreeMap<&str, Geo> = meta.iter().map(|m| (m.team_id.as_str(), m.geo)).collect();
    let geos: Vec<Geo> = dm
        .labels()
        .iter()
        .map(|l| {
            geo.get(l.as_str())
                .copied()
                .ok_or_else(|| Error::MissingMetadata(l.clone()))
        })
        .collect::<Result<_>>()?;

    let mut attempts = Vec::with_capacity(Linkage::ALL.len());
    for linkage in Linkage::ALL {
        let dg = hierarchical_cluster(dm, linkage);
        let Some(height) = dg.height_for_k(k) else {
            attempts.push(LinkageAttempt {
                linkage,
                cut_height: None,
                cluster_geo: Vec::new(),
                cluster_sizes: Vec::new(),
                closest_cluster: None,
                max_deviation: None,
                matched: false,
            });
            continue;
        };
        let p = cut_dendrogram(&dg, height)?;
        let mut counts = vec![[0usize; 3]; p.k()];
        for (&c, g) in p.assignment().iter().zip(&geos) {
            let slot = match g {
                Geo::North => 0,
                Geo::Center => 1,
                Geo::South => 2,
            };
            counts[c - 1][slot] += 1;
        }
        let (closest, deviation) = counts
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1, target.deviation(*c)))
            .min_by_key(|&(i, d)| (d, i))
            .expect("k >= 1");
        attempts.push(LinkageAttempt {
            linkage,
            cut_height: Some(height),
            cluster_sizes: counts.iter().map(|c| c.iter().sum()).collect(),
            cluster_geo: counts,
            closest_cluster: Some(closest),
            max_deviation: Some(deviation),
            matched: deviation <= target.tolerance,
        });
    }

    let matched_linkages: Vec<Linkage> = attempts
        .iter()
        .filter(|a| a.matched)
        .map(|a| a.linkage)
        .collect();
    let conclusion = if matched_linkages.is_empty() {
        format!(
            "convention mismatch: no linkage in {{single, complete, average}} yields a {k}-cluster cut \
             containing a cluster within ±{} of North/Center/South = {}/{}/{}; the reference partition \
             likely used a different DTW cost, normalization or linkage",
            target.tolerance, target.north, target.center, target.south
        )
    } else {
        let names: Vec<String> = matched_linkages.iter().map(Linkage::to_string).collect();
        format!(
            "reference composition reproduced under: {}",
            names.join(", ")
        )
    };
    Ok(ConventionReport {
        k,
        target,
        attempts,
        matched_linkages,
        conclusion,
    })
}
