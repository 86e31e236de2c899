//! Burstiness and memory of inter-event times.
//!
//! All standard deviations are population (divisor `n`) deviations.

use crate::error::{Error, Result};
use crate::ingest::extract_inter_event;
use crate::model::{BinaryEventSeries, BurstinessReport, Emotion, InterEventTimes};

/// Denominators closer to zero than this make the finite-size burstiness degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Population mean and standard deviation.
///
/// Values are shifted by the first element before summing, so a constant
/// sequence yields exactly its value and a zero deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let shift = values[0];
    let mean_dev = values.iter().map(|v| v - shift).sum::<f64>() / n;
    let var = values
        .iter()
        .map(|v| {
            let d = (v - shift) - mean_dev;
            d * d
        })
        .sum::<f64>()
        / n;
    (shift + mean_dev, var.sqrt())
}

fn require_nonempty(taus: &InterEventTimes) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::InsufficientEvents {
            needed: 1,
            found: 0,
        });
    }
    Ok(())
}

/// `σ_τ / μ_τ`.
pub fn coefficient_of_variation(taus: &InterEventTimes) -> Result<f64> {
    require_nonempty(taus)?;
    let (mu, sigma) = mean_std(taus.as_slice());
    Ok(sigma / mu)
}

/// Burstiness from a coefficient of variation: `(r − 1) / (r + 1)`.
pub fn burstiness_from_r(r: f64) -> f64 {
    (r - 1.0) / (r + 1.0)
}

/// Burstiness `B ∈ [−1, 1)`: −1 periodic, 0 Poissonian, towards 1 bursty.
pub fn burstiness(taus: &InterEventTimes) -> Result<f64> {
    coefficient_of_variation(taus).map(burstiness_from_r)
}

/// Sequence size entering the finite-size correction.
///
/// This is the number of inter-event times, which makes the maximal
/// attainable `r = √(n − 1)` map to `B_n = 1`.
pub fn finite_size_count(taus: &InterEventTimes) -> usize {
    taus.n_tau()
}

/// Finite-size burstiness for a sequence of size `n` with variation `r`.
pub fn burstiness_finite_from(r: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InsufficientEvents {
            needed: 2,
            found: n,
        });
    }
    let n = n as f64;
    let (sp, sm) = ((n + 1.0).sqrt(), (n - 1.0).sqrt());
    let denominator = (sp - 2.0) * r + sm;
    if denominator.abs() < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateSequence(format!(
            "finite-size burstiness denominator vanishes at r = {r}, n = {n}"
        )));
    }
    Ok((sp * r - sm) / denominator)
}

/// Burstiness corrected for the finite number of inter-event times.
pub fn burstiness_finite(taus: &InterEventTimes) -> Result<f64> {
    let n = finite_size_count(taus);
    if n < 2 {
        return Err(Error::InsufficientEvents {
            needed: 2,
            found: n,
        });
    }
    burstiness_finite_from(coefficient_of_variation(taus)?, n)
}

/// Memory coefficient: correlation between `τ_i` and `τ_{i+lag}`.
///
/// Returns `Ok(None)` when either window has zero variance.
pub fn memory(taus: &InterEventTimes, lag: usize) -> Result<Option<f64>> {
    if lag == 0 {
        return Err(Error::InvalidParameter(
            "memory lag must be at least 1".into(),
        ));
    }
    let t = taus.as_slice();
    if t.len() <= lag {
        return Err(Error::InsufficientEvents {
            needed: lag + 1,
            found: t.len(),
        });
    }
    let m = t.len() - lag;
    let (head, tail) = (&t[..m], &t[lag..]);
    let (mu1, s1) = mean_std(head);
    let (mu2, s2) = mean_std(tail);
    if s1 == 0.0 || s2 == 0.0 {
        return Ok(None);
    }
    let sum: f64 = head
        .iter()
        .zip(tail)
        .map(|(a, b)| (a - mu1) * (b - mu2))
        .sum();
    Ok(Some((sum / (m as f64 * s1 * s2)).clamp(-1.0, 1.0)))
}

/// Bundles every statistic for one sequence of inter-event times (memory at `lag`).
pub fn report_from_taus(
    team_id: &str,
    emotion: Emotion,
    taus: &InterEventTimes,
    lag: usize,
) -> Result<BurstinessReport> {
    let n_tau = taus.n_tau();
    if n_tau < 2 {
        return Err(Error::InsufficientEvents {
            needed: 2,
            found: n_tau,
        });
    }
    let (mu_tau, sigma_tau) = mean_std(taus.as_slice());
    let r = sigma_tau / mu_tau;
    Ok(BurstinessReport {
        team_id: team_id.to_string(),
        emotion,
        n_tau,
        mu_tau,
        sigma_tau,
        r,
        b: burstiness_from_r(r),
        b_n: burstiness_finite_from(r, finite_size_count(taus))?,
        memory: memory(taus, lag)?,
        lag,
    })
}

/// Burstiness report for a binary event series, with memory at lag 1.
pub fn report(series: &BinaryEventSeries) -> Result<BurstinessReport> {
    let taus = extract_inter_event(series)?;
    report_from_taus(&series.team_id, series.emotion, &taus, 1)
}

/// Column order of the burstiness report CSV.
pub const REPORT_HEADER: [&str; 10] = [
    "team_id", "emotion", "n_tau", "mu", "sigma", "r", "B", "B_n", "M", "lag",
];

/// Writes reports as CSV; an undefined memory is an empty `M` cell.
pub fn write_reports_csv<W: std::io::Write>(reports: &[BurstinessReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.team_id.clone(),
            r.emotion.to_string(),
            r.n_tau.to_string(),
            r.mu_tau.to_string(),
            r.sigma_tau.to_string(),
            r.r.to_string(),
            r.b.to_string(),
            r.b_n.to_string(),
            r.memory.map(|m| m.to_string()).unwrap_or_default(),
            r.lag.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_reports_csv<R: std::io::Read>(source: R) -> Result<Vec<BurstinessReport>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let idx = REPORT_HEADER
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::parse(0, *name, "missing column"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let cell = |c: usize| rec.get(idx[c]).unwrap_or("");
        let num = |c: usize| -> Result<f64> {
            cell(c)
                .parse::<f64>()
                .map_err(|e| Error::parse(row, REPORT_HEADER[c], e.to_string()))
        };
        let int = |c: usize| -> Result<usize> {
            cell(c)
                .parse::<usize>()
                .map_err(|e| Error::parse(row, REPORT_HEADER[c], e.to_string()))
        };
        let memory = match cell(8) {
            "" => None,
            _ => Some(num(8)?),
        };
        out.push(BurstinessReport {
            team_id: cell(0).to_string(),
            emotion: cell(1).parse().map_err(|_| {
                Error::parse(row, "emotion", format!("unknown emotion `{}`", cell(1)))
            })?,
            n_tau: int(2)?,
            mu_tau: num(3)?,
            sigma_tau: num(4)?,
            r: num(5)?,
            b: num(6)?,
            b_n: num(7)?,
            memory,
            lag: int(9)?,
        });
    }
    Ok(out)
}
