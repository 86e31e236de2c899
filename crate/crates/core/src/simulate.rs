//! Synthetic inter-event processes used as statistical oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InterEventTimes;

/// Derives the seed of task `stream` from a master seed.
///
/// SplitMix64 applied to `master + (stream + 1)·γ` (γ the golden-ratio
/// increment), so every task seed depends only on its counter and parallel
/// runs match serial ones.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProcessKind {
    /// Constant gap `interval`.
    Periodic { interval: f64 },
    /// Exponential gaps with the given `rate`.
    Poisson { rate: f64 },
    /// Pareto gaps with tail `shape` (> 2, finite variance) and minimum `scale`.
    Pareto { shape: f64, scale: f64 },
    /// Two-state chain alternating short and long exponential gaps. The
    /// `leave_*` probabilities are per-gap switching probabilities; small
    /// values give positively correlated consecutive gaps.
    Markov {
        short_mean: f64,
        long_mean: f64,
        leave_short: f64,
        leave_long: f64,
    },
}

impl ProcessKind {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        let probability = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )))
            }
        };
        match *self {
            ProcessKind::Periodic { interval } => positive("interval", interval),
            ProcessKind::Poisson { rate } => positive("rate", rate),
            ProcessKind::Pareto { shape, scale } => {
                positive("scale", scale)?;
                if !(shape.is_finite() && shape > 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "pareto shape must exceed 2 for a finite variance, got {shape}"
                    )));
                }
                Ok(())
            }
            ProcessKind::Markov {
                short_mean,
                long_mean,
                leave_short,
                leave_long,
            } => {
                positive("short_mean", short_mean)?;
                positive("long_mean", long_mean)?;
                probability("leave_short", leave_short)?;
                probability("leave_long", leave_long)
            }
        }
    }
}

/// Draws `n_tau` inter-event times.
pub fn inter_event_times(kind: &ProcessKind, n_tau: usize, seed: u64) -> Result<InterEventTimes> {
    kind.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut taus = Vec::with_capacity(n_tau);
    match *kind {
        ProcessKind::Periodic { interval } => taus.resize(n_tau, interval),
        ProcessKind::Poisson { rate } => {
            let exp = Exp::new(rate).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            taus.extend((0..n_tau).map(|_| positive_draw(&mut rng, &exp)));
        }
        ProcessKind::Pareto { shape, scale } => {
            let pareto =
                Pareto::new(scale, shape).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            taus.extend((0..n_tau).map(|_| pareto.sample(&mut rng)));
        }
        ProcessKind::Markov {
            short_mean,
            long_mean,
            leave_short,
            leave_long,
        } => {
            let short =
                Exp::new(1.0 / short_mean).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let long =
                Exp::new(1.0 / long_mean).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            // Start from the stationary distribution of the two-state chain.
            let p_long = leave_short / (leave_short + leave_long);
            let mut in_long = rng.random::<f64>() < p_long;
            for _ in 0..n_tau {
                let tau = if in_long {
                    positive_draw(&mut rng, &long)
                } else {
                    positive_draw(&mut rng, &short)
                };
                taus.push(tau);
                let leave = if in_long { leave_long } else { leave_short };
                if rng.random::<f64>() < leave {
                    in_long = !in_long;
                }
            }
        }
    }
    InterEventTimes::new(taus)
}

fn positive_draw<R: Rng>(rng: &mut R, d: &Exp<f64>) -> f64 {
    loop {
        let x = d.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
}

/// Event timestamps in seconds, starting at 0.
pub fn event_times(kind: &ProcessKind, n_events: usize, seed: u64) -> Result<Vec<f64>> {
    if n_events == 0 {
        return Ok(Vec::new());
    }
    let taus = inter_event_times(kind, n_events - 1, seed)?;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(n_events);
    out.push(0.0);
    for tau in taus.as_slice() {
        t += tau;
        out.push(t);
    }
    Ok(out)
}

/// Writes event times as CSV `event,time`.
pub fn write_event_csv<W: std::io::Write>(times: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["event", "time"])?;
    for (i, t) in times.iter().enumerate() {
        w.write_record([i.to_string(), t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
