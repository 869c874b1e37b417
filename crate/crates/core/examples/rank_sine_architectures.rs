//! Rank LSTM widths on the 1 Hz sine wave by random-weight MAE sampling.
//!
//! ```bash
//! cargo run --release -p mae-sampling --example rank_sine_architectures -- 40 100
//! ```
//! Arguments: largest cell count (default 40) and samples per architecture
//! (default 100).

use mae_sampling::rnn::{ArchitectureSpec, OutputActivation};
use mae_sampling::sampling::{mae_random_sampling, rank_architectures, SamplingConfig};
use mae_sampling::timeseries::{generate_sine, window, SineParams, Splits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let max_nc: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(40);
    let samples: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let lb = 30;

    let series = generate_sine(&SineParams::default())?;
    let splits = Splits::new(&window(&series, lb)?, 0.8)?;
    let cfg = SamplingConfig {
        max_samples: samples,
        threshold: 0.01,
        seed: 42,
        ..SamplingConfig::default()
    };

    let started = std::time::Instant::now();
    let mut outcomes = Vec::new();
    for nc in 1..=max_nc {
        let arch = ArchitectureSpec::new(nc, lb, 1, 1, OutputActivation::Tanh)?;
        let mut out = mae_random_sampling(&arch, &splits, &cfg)?;
        out.arch_id = nc - 1;
        outcomes.push(out);
    }
    println!("sampled {max_nc} architectures in {:.1?}", started.elapsed());

    println!("{:>4} {:>4} {:>8} {:>8} {:>10} {:>8} {:>6}", "rank", "nc", "mu", "sigma", "log p", "best", "decile");
    for r in rank_architectures(&outcomes)? {
        let o = &outcomes[r.index];
        println!(
            "{:>4} {:>4} {:>8.4} {:>8.4} {:>10.3} {:>8.4} {:>6}",
            r.rank, r.nc, o.fit.mu, o.fit.sigma, r.log_p_t, o.best_mae, r.decile
        );
    }
    Ok(())
}
