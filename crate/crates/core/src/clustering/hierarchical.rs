use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DistanceMatrix, Partition};
use crate::error::{Error, Result};

/// Inter-cluster distance rule used during agglomeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl Linkage {
    pub const ALL: [Linkage; 3] = [Linkage::Single, Linkage::Complete, Linkage::Average];
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::InvalidParameter(format!(
                "unknown linkage `{other}`"
            ))),
        }
    }
}

/// One agglomeration step. Leaves are ids `0..n`; the cluster created at
/// step `s` gets id `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub steps: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    /// A cut height producing exactly `k` clusters, halfway between the
    /// two merges that bracket it. `None` if tied merge heights make `k`
    /// unreachable.
    pub fn height_for_k(&self, k: usize) -> Option<f64> {
        let n = self.n_leaves();
        if k == 0 || k > n {
            return None;
        }
        if k == n {
            return self.steps.first().map(|m| m.distance / 2.0).or(Some(0.0));
        }
        let below = self.steps[n - k - 1].distance;
        match self.steps.get(n - k) {
            None => Some(below + 1.0),
            Some(next) if next.distance > below => Some((below + next.distance) / 2.0),
            Some(_) => None,
        }
    }

    /// Writes the merge list as CSV `step,left,right,distance,size`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "left", "right", "distance", "size"])?;
        for (s, m) in self.steps.iter().enumerate() {
            w.write_record([
                (s + 1).to_string(),
                m.left.to_string(),
                m.right.to_string(),
                m.distance.to_string(),
                m.size.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Agglomerative clustering with Lance–Williams updates.
///
/// Ties between equally close pairs are broken by the lowest slot indices,
/// which makes the merge order deterministic.
pub fn hierarchical_cluster(dm: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = dm.len();
    let mut d: Vec<f64> = dm.as_slice().to_vec();
    let mut active = vec![true; n];
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut steps = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                if d[i * n + j] < best.0 {
                    best = (d[i * n + j], i, j);
                }
            }
        }
        let (dist, a, b) = best;
        let (na, nb) = (sizes[a], sizes[b]);
        for k in (0..n).filter(|&k| active[k] && k != a && k != b) {
            let (da, db) = (d[a * n + k], d[b * n + k]);
            let merged = match linkage {
                Linkage::Single => da.min(db),
                Linkage::Complete => da.max(db),
                Linkage::Average => (na as f64 * da + nb as f64 * db) / (na + nb) as f64,
            };
            d[a * n + k] = merged;
            d[k * n + a] = merged;
        }
        let (left, right) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
        steps.push(Merge {
            left,
            right,
            distance: dist,
            size: na + nb,
        });
        active[b] = false;
        ids[a] = n + step;
        sizes[a] = na + nb;
    }

    Dendrogram {
        labels: dm.labels().to_vec(),
        steps,
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Flat clusters formed by every merge at or below `height`.
pub fn cut_dendrogram(dg: &Dendrogram, height: f64) -> Result<Partition> {
    if height.is_nan() || height < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cut height must be non-negative, got {height}"
        )));
    }
    let n = dg.n_leaves();
    let mut parent: Vec<usize> = (0..n).collect();
    // Any leaf of each cluster id stands in for the whole cluster.
    let mut rep: Vec<usize> = (0..n).collect();
    for m in &dg.steps {
        let (a, b) = (rep[m.left], rep[m.right]);
        rep.push(a);
        if m.distance <= height {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[rb] = ra;
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Ok(Partition::from_keys(dg.labels.clone(), &roots))
}
