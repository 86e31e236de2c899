//! Burstiness `B`, finite-size burstiness `B_n` and memory `M` for a few
//! hand-made and simulated inter-event sequences.

use fandom_emotions::model::{Emotion, InterEventTimes};
use fandom_emotions::simulate::{inter_event_times, ProcessKind};
use fandom_emotions::temporal::report_from_taus;

fn row(name: &str, taus: &InterEventTimes) -> fandom_emotions::Result<()> {
    let r = report_from_taus(name, Emotion::Joy, taus, 1)?;
    let m = r
        .memory
        .map_or("undefined".to_string(), |m| format!("{m:+.3}"));
    println!(
        "{name:<22} {:>6} {:>7.3} {:>7.3} {:>7.3} {:>10}",
        r.n_tau, r.r, r.b, r.b_n, m
    );
    Ok(())
}

fn main() -> fandom_emotions::Result<()> {
    println!(
        "{:<22} {:>6} {:>7} {:>7} {:>7} {:>10}",
        "sequence", "n_tau", "r", "B", "B_n", "M"
    );
    row("periodic", &InterEventTimes::new(vec![3600.0; 12])?)?;
    row(
        "alternating 1,3",
        &InterEventTimes::new(vec![1.0, 3.0, 1.0, 3.0, 1.0])?,
    )?;
    row(
        "one long gap",
        &InterEventTimes::new(vec![1.0, 1.0, 1.0, 1.0, 50.0])?,
    )?;

    let processes = [
        ("poisson", ProcessKind::Poisson { rate: 1.0 }),
        (
            "pareto shape 2.2",
            ProcessKind::Pareto {
                shape: 2.2,
                scale: 1.0,
            },
        ),
        (
            "two-state markov",
            ProcessKind::Markov {
                short_mean: 1.0,
                long_mean: 20.0,
                leave_short: 0.05,
                leave_long: 0.05,
            },
        ),
    ];
    for n_tau in [20, 2000] {
        for (name, kind) in &processes {
            row(
                &format!("{name} ({n_tau})"),
                &inter_event_times(kind, n_tau, 11)?,
            )?;
        }
    }
    Ok(())
}
