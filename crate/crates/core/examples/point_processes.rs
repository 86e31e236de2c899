//! Seeded point-process simulators and the ensemble bias of `B` versus `B_n`
//! on short Poisson sequences.

use fandom_emotions::simulate::{
    derive_seed, event_times, inter_event_times, write_event_csv, ProcessKind,
};
use fandom_emotions::temporal::{burstiness, burstiness_finite, memory};

fn main() -> fandom_emotions::Result<()> {
    let periodic = event_times(&ProcessKind::Periodic { interval: 2.0 }, 5, 0)?;
    println!("periodic events: {periodic:?}");

    println!("\nfirst Poisson events as CSV:");
    let poisson = event_times(&ProcessKind::Poisson { rate: 0.5 }, 4, 42)?;
    write_event_csv(&poisson, std::io::stdout())?;

    let kinds = [
        ProcessKind::Poisson { rate: 2.0 },
        ProcessKind::Pareto {
            shape: 3.0,
            scale: 1.0,
        },
        ProcessKind::Markov {
            short_mean: 1.0,
            long_mean: 10.0,
            leave_short: 0.1,
            leave_long: 0.1,
        },
    ];
    println!("\nlong sequences (n_tau = 100000):");
    for kind in &kinds {
        let t = inter_event_times(kind, 100_000, 5)?;
        let mean = t.as_slice().iter().sum::<f64>() / t.n_tau() as f64;
        println!(
            "  {:<8} mean tau {mean:>7.3}  B {:+.3}  M {:+.3}",
            format!("{kind:?}").split_whitespace().next().unwrap_or(""),
            burstiness(&t)?,
            memory(&t, 1)?.unwrap_or(f64::NAN)
        );
    }

    let ensembles = 500;
    let (mut b, mut b_n) = (0.0, 0.0);
    for i in 0..ensembles {
        let t = inter_event_times(&kinds[0], 20, derive_seed(99, i))?;
        b += burstiness(&t)?;
        b_n += burstiness_finite(&t)?;
    }
    println!(
        "\nPoisson, n_tau = 20, {ensembles} ensembles: mean B {:+.4}, mean B_n {:+.4}",
        b / ensembles as f64,
        b_n / ensembles as f64
    );
    Ok(())
}
