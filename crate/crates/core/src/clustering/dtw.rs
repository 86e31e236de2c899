use rayon::prelude::*;

use super::DistanceMatrix;
use crate::error::{Error, Result};

fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput("DTW needs two non-empty sequences"));
    }
    Ok(())
}

/// Dynamic time warping distance with absolute-difference local cost.
///
/// Warping paths run from `(0, 0)` to `(|x|−1, |y|−1)` with unit steps
/// right, down or diagonal; the result is the minimal summed cost.
pub fn dtw_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    dtw_distance_windowed(x, y, None)
}

/// DTW restricted to a Sakoe–Chiba band of half-width `window` (widened to
/// the length difference so a path always exists). `None` is unconstrained.
pub fn dtw_distance_windowed(x: &[f64], y: &[f64], window: Option<usize>) -> Result<f64> {
    check_inputs(x, y)?;
    let (n, m) = (x.len(), y.len());
    let w = window.map_or(usize::MAX, |w| w.max(n.abs_diff(m)));
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        curr.fill(f64::INFINITY);
        let lo = if w == usize::MAX {
            1
        } else {
            i.saturating_sub(w).max(1)
        };
        let hi = if w == usize::MAX { m } else { (i + w).min(m) };
        for j in lo..=hi {
            let cost = (x[i - 1] - y[j - 1]).abs();
            curr[j] = cost + prev[j - 1].min(prev[j]).min(curr[j - 1]);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

/// Optimal warping path and its cost. Ties prefer the diagonal step.
pub fn dtw_path(x: &[f64], y: &[f64]) -> Result<(f64, Vec<(usize, usize)>)> {
    check_inputs(x, y)?;
    let (n, m) = (x.len(), y.len());
    let width = m + 1;
    let mut acc = vec![f64::INFINITY; (n + 1) * width];
    acc[0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            let cost = (x[i - 1] - y[j - 1]).abs();
            let best = acc[(i - 1) * width + j - 1]
                .min(acc[(i - 1) * width + j])
                .min(acc[i * width + j - 1]);
            acc[i * width + j] = cost + best;
        }
    }
    let mut path = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    loop {
        path.push((i - 1, j - 1));
        if i == 1 && j == 1 {
            break;
        }
        let diag = acc[(i - 1) * width + j - 1];
        let up = acc[(i - 1) * width + j];
        let left = acc[i * width + j - 1];
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    path.reverse();
    Ok((acc[n * width + m], path))
}

/// All pairwise DTW distances between labelled series.
pub fn pairwise_distances(labels: &[String], series: &[Vec<f64>]) -> Result<DistanceMatrix> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "pairwise distances need at least 2 series, got {}",
            series.len()
        )));
    }
    if labels.len() != series.len() {
        return Err(Error::InvalidParameter(
            "one label per series is required".into(),
        ));
    }
    let n = series.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| dtw_distance(&series[i], &series[j]))
        .collect::<Result<Vec<f64>>>()?;
    let mut d = vec![0.0; n * n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        d[i * n + j] = v;
        d[j * n + i] = v;
    }
    DistanceMatrix::new(labels.to_vec(), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let x = [0.3, 0.5, 0.1];
        assert_eq!(dtw_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(
            dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        assert_eq!(dtw_distance(&[0.0], &[1.0]).unwrap(), 1.0);
        assert!(dtw_distance(&[], &[1.0]).is_err());
    }

    #[test]
    fn path_cost_matches_distance() {
        let x = [0.0, 1.0, 1.0, 0.5, 0.2];
        let y = [0.1, 0.9, 0.4, 0.3];
        let (cost, path) = dtw_path(&x, &y).unwrap();
        assert_eq!(cost, dtw_distance(&x, &y).unwrap());
        assert_eq!(path.first(), Some(&(0, 0)));
        assert_eq!(path.last(), Some(&(4, 3)));
        let along: f64 = path.iter().map(|&(i, j)| (x[i] - y[j]).abs()).sum();
        assert!((along - cost).abs() < 1e-12);
    }

    #[test]
    fn window_never_beats_unconstrained() {
        let x = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let y = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let free = dtw_distance(&x, &y).unwrap();
        assert_eq!(free, 0.0);
        assert_eq!(dtw_distance_windowed(&x, &y, Some(0)).unwrap(), 2.0);
        assert_eq!(dtw_distance_windowed(&x, &y, Some(10)).unwrap(), free);
    }

    #[test]
    fn pairwise_examples() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let s = vec![vec![0.1, 0.2], vec![0.5, 0.5, 0.4], vec![0.1, 0.2]];
        let dm = pairwise_distances(&labels, &s).unwrap();
        assert_eq!(dm.get(0, 2), 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(dm.get(i, j), dm.get(j, i));
                assert_eq!(dm.get(i, j), dtw_distance(&s[i], &s[j]).unwrap());
            }
        }
        assert!(pairwise_distances(&labels[..1], &s[..1]).is_err());
    }

    fn seq() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..20)
    }

    proptest! {
        #[test]
        fn symmetric_and_non_negative(x in seq(), y in seq()) {
            let a = dtw_distance(&x, &y).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert_eq!(a, dtw_distance(&y, &x).unwrap());
            prop_assert_eq!(dtw_distance(&x, &x).unwrap(), 0.0);
        }

        #[test]
        fn bounded_by_diagonal_path(pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..30)) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let lockstep: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!(dtw_distance(&x, &y).unwrap() <= lockstep + 1e-12);
        }
    }
}
