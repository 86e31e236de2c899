//! Clustering of daily emotion signals under dynamic time warping.

mod dtw;
mod hierarchical;
mod kmeans;
mod profile;
mod replicate;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dtw::{dtw_distance, dtw_distance_windowed, dtw_path, pairwise_distances};
pub use hierarchical::{cut_dendrogram, hierarchical_cluster, Dendrogram, Linkage, Merge};
pub use kmeans::{dba_update, kmeans_dtw, KMeansConfig, KMeansOutcome};
pub use profile::{profile_clusters, tertile_cutpoints, ClusterProfile, FiveNumber};
pub use replicate::{sweep_linkages, ConventionReport, GeoTarget, LinkageAttempt};

/// Symmetric matrix of non-negative dissimilarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// `d` is row-major, `labels.len()²` entries.
    pub fn new(labels: Vec<String>, d: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if d.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "distance matrix for {n} labels needs {} entries, got {}",
                n * n,
                d.len()
            )));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("non-zero diagonal at {i}")));
            }
            for j in i + 1..n {
                let v = d[i * n + j];
                if !(v.is_finite() && v >= 0.0) || v != d[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) must be finite, non-negative and symmetric"
                    )));
                }
            }
        }
        Ok(Self { labels, d })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.labels.len() + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    /// CSV with a header row and a header column of labels.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        let n = self.len();
        for i in 0..n {
            let mut row = vec![self.labels[i].clone()];
            row.extend((0..n).map(|j| self.get(i, j).to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(source);
        let labels: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut d = Vec::with_capacity(labels.len() * labels.len());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.get(0) != labels.get(i).map(String::as_str) {
                return Err(Error::parse(
                    i + 1,
                    "label",
                    "row label does not match header order",
                ));
            }
            for (j, v) in rec.iter().skip(1).enumerate() {
                d.push(v.parse::<f64>().map_err(|e| {
                    Error::parse(
                        i + 1,
                        labels.get(j).cloned().unwrap_or_default(),
                        e.to_string(),
                    )
                })?);
            }
        }
        Self::new(labels, d)
    }
}

/// Hard assignment of every team to one cluster labelled `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<String>,
    assignment: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        let p = Self { labels, assignment };
        p.validate()?;
        Ok(p)
    }

    /// Relabels arbitrary cluster keys as `1..=k` in order of first appearance.
    pub fn from_keys(labels: Vec<String>, keys: &[usize]) -> Self {
        let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
        let assignment = keys
            .iter()
            .map(|key| {
                let next = relabel.len() + 1;
                *relabel.entry(*key).or_insert(next)
            })
            .collect();
        Self { labels, assignment }
    }

    /// Checks that every team has exactly one cluster and labels cover `1..=k`.
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.assignment.len() {
            return Err(Error::InvalidParameter(
                "one cluster per team is required".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &self.labels {
            if !seen.insert(l) {
                return Err(Error::InvalidParameter(format!(
                    "team `{l}` assigned twice"
                )));
            }
        }
        let k = self.k();
        let mut used = vec![false; k];
        for &c in &self.assignment {
            if c == 0 || c > k {
                return Err(Error::InvalidParameter(format!(
                    "cluster label {c} outside 1..={k}"
                )));
            }
            used[c - 1] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidParameter(
                "cluster labels are not contiguous".into(),
            ));
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn k(&self) -> usize {
        self.assignment.iter().copied().max().unwrap_or(0)
    }

    pub fn cluster_of(&self, team: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == team)
            .map(|i| self.assignment[i])
    }

    /// Team ids in cluster `c`, in input order.
    pub fn members(&self, c: usize) -> Vec<&str> {
        self.labels
            .iter()
            .zip(&self.assignment)
            .filter(|(_, &a)| a == c)
            .map(|(l, _)| l.as_str())
            .collect()
    }

    /// CSV `team_id,cluster`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["team_id", "cluster"])?;
        for (l, c) in self.labels.iter().zip(&self.assignment) {
            w.write_record([l.as_str(), &c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(source);
        let mut labels = Vec::new();
        let mut assignment = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            labels.push(rec.get(0).unwrap_or_default().to_string());
            let c = rec.get(1).unwrap_or_default();
            assignment.push(
                c.parse().map_err(|_| {
                    Error::parse(i + 1, "cluster", format!("not an integer: `{c}`"))
                })?,
            );
        }
        Self::new(labels, assignment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_validation() {
        let l = vec!["a".to_string(), "b".to_string()];
        assert!(DistanceMatrix::new(l.clone(), vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(l.clone(), vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(l.clone(), vec![0.0, -1.0, -1.0, 0.0]).is_err());
        let dm = DistanceMatrix::new(l, vec![0.0, 0.25, 0.25, 0.0]).unwrap();
        let mut buf = Vec::new();
        dm.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            ",a,b\na,0,0.25\nb,0.25,0\n"
        );
        assert_eq!(DistanceMatrix::read_csv(buf.as_slice()).unwrap(), dm);
    }

    #[test]
    fn partition_relabels_by_first_appearance() {
        let labels: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let p = Partition::from_keys(labels, &[7, 3, 7, 9]);
        assert_eq!(p.assignment(), &[1, 2, 1, 3]);
        assert_eq!(p.members(1), vec!["a", "c"]);
        assert_eq!(p.cluster_of("d"), Some(3));
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(Partition::read_csv(buf.as_slice()).unwrap(), p);
    }

    #[test]
    fn partition_rejects_gaps_and_duplicates() {
        let l = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(Partition::new(l(&["a", "b"]), vec![1, 3]).is_err());
        assert!(Partition::new(l(&["a", "a"]), vec![1, 2]).is_err());
        assert!(Partition::new(l(&["a"]), vec![0]).is_err());
    }
}
