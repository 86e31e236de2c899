use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dtw_distance, dtw_path, Partition};
use crate::error::{Error, Result};
use crate::simulate::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
    pub dba_iterations: usize,
    pub tolerance: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            restarts: 10,
            max_iterations: 100,
            dba_iterations: 30,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansOutcome {
    pub partition: Partition,
    /// Centroids ordered by cluster label.
    pub centroids: Vec<Vec<f64>>,
    /// Total within-cluster DTW distance.
    pub cost: f64,
    /// Cost after every assignment step of the winning restart.
    pub cost_history: Vec<f64>,
    pub restart: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn summed_distance(centroid: &[f64], members: &[&[f64]]) -> Result<f64> {
    members.iter().map(|m| dtw_distance(m, centroid)).sum()
}

/// DTW barycenter averaging under absolute-difference cost.
///
/// Each centroid point moves to the median of the member values aligned
/// with it, which minimizes the summed cost of the fixed alignments; a
/// step is kept only if the summed DTW distance does not grow.
pub fn dba_update(
    centroid: &[f64],
    members: &[&[f64]],
    iterations: usize,
    tolerance: f64,
) -> Result<Vec<f64>> {
    if members.is_empty() {
        return Ok(centroid.to_vec());
    }
    let mut current = centroid.to_vec();
    let mut cost = summed_distance(&current, members)?;
    for _ in 0..iterations {
        let mut aligned: Vec<Vec<f64>> = vec![Vec::new(); current.len()];
        for m in members {
            let (_, path) = dtw_path(m, &current)?;
            for (i, j) in path {
                aligned[j].push(m[i]);
            }
        }
        let candidate: Vec<f64> = aligned.iter_mut().map(|v| median(v)).collect();
        let new_cost = summed_distance(&candidate, members)?;
        if new_cost > cost {
            break;
        }
        let improvement = cost - new_cost;
        current = candidate;
        cost = new_cost;
        if improvement < tolerance {
            break;
        }
    }
    Ok(current)
}

struct Run {
    assignment: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    cost: f64,
    history: Vec<f64>,
}

fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut assignment = Vec::with_capacity(data.len());
    let mut dists = Vec::with_capacity(data.len());
    for x in data {
        let mut best = (f64::INFINITY, 0);
        for (c, centroid) in centroids.iter().enumerate() {
            let d = dtw_distance(x, centroid)?;
            if d < best.0 {
                best = (d, c);
            }
        }
        assignment.push(best.1);
        dists.push(best.0);
    }
    Ok((assignment, dists))
}

/// k-means++ seeding with DTW distances as sampling weights.
fn seed_centroids(data: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Result<Vec<Vec<f64>>> {
    let n = data.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = data
        .iter()
        .map(|x| dtw_distance(x, &data[chosen[0]]))
        .collect::<Result<_>>()?;
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, x) in data.iter().enumerate() {
            nearest[i] = nearest[i].min(dtw_distance(x, &data[next])?);
        }
    }
    Ok(chosen.into_iter().map(|i| data[i].clone()).collect())
}

fn run_once(data: &[Vec<f64>], cfg: &KMeansConfig, seed: u64) -> Result<Run> {
    let mut rng = rng_from_seed(seed);
    let mut centroids = seed_centroids(data, cfg.k, &mut rng)?;
    let (mut assignment, mut dists) = assign(data, &centroids)?;
    let mut history = vec![dists.iter().sum::<f64>()];

    for _ in 0..cfg.max_iterations {
        // An empty cluster takes over the point farthest from its centroid,
        // drawn from a cluster that can spare a member.
        loop {
            let mut counts = vec![0usize; cfg.k];
            for &a in &assignment {
                counts[a] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let far = (0..data.len())
                .filter(|&i| counts[assignment[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                .expect("k <= n leaves a cluster with several members");
            centroids[empty] = data[far].clone();
            let (a, d) = assign(data, &centroids)?;
            assignment = a;
            dists = d;
            if !assignment.contains(&empty) {
                // Zero-distance tie with an earlier centroid.
                assignment[far] = empty;
                dists[far] = 0.0;
            }
            history.push(dists.iter().sum());
        }

        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&[f64]> = data
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == c)
                .map(|(x, _)| x.as_slice())
                .collect();
            *centroid = dba_update(centroid, &members, cfg.dba_iterations, cfg.tolerance)?;
        }
        let (a, d) = assign(data, &centroids)?;
        let cost: f64 = d.iter().sum();
        let previous = *history.last().expect("history starts non-empty");
        let unchanged = a == assignment;
        assignment = a;
        dists = d;
        history.push(cost);
        if unchanged && previous - cost < cfg.tolerance {
            break;
        }
    }
    let cost = dists.iter().sum();
    Ok(Run {
        assignment,
        centroids,
        cost,
        history,
    })
}

/// DTW k-means with barycenter-averaged centroids.
///
/// Restart `r` draws its seed with [`derive_seed`]`(seed, r)`; restarts run
/// in parallel and the lowest-cost run wins (earliest restart on ties).
pub fn kmeans_dtw(
    labels: &[String],
    data: &[Vec<f64>],
    cfg: &KMeansConfig,
) -> Result<KMeansOutcome> {
    if labels.len() != data.len() {
        return Err(Error::InvalidParameter(
            "one label per series is required".into(),
        ));
    }
    if cfg.k == 0 || cfg.k > data.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {} must lie in 1..={}",
            cfg.k,
            data.len()
        )));
    }
    if data.iter().any(Vec::is_empty) {
        return Err(Error::EmptyInput("k-means series must be non-empty"));
    }
    let restarts = cfg.restarts.max(1);
    let runs = (0..restarts)
        .into_par_iter()
        .map(|r| run_once(data, cfg, derive_seed(cfg.seed, r as u64)))
        .collect::<Result<Vec<Run>>>()?;
    let (restart, best) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.cost.total_cmp(&b.cost).then(ia.cmp(ib)))
        .expect("at least one restart");

    let partition = Partition::from_keys(labels.to_vec(), &best.assignment);
    let mut centroids = vec![Vec::new(); cfg.k];
    for (raw, &label) in best.assignment.iter().zip(partition.assignment()) {
        centroids[label - 1] = best.centroids[*raw].clone();
    }
    Ok(KMeansOutcome {
        partition,
        centroids,
        cost: best.cost,
        cost_history: best.history,
        restart,
    })
}
