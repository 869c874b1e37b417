//! Fit a truncated normal to sampled MAEs and read off p_t at a few
//! thresholds.
//!
//! ```bash
//! cargo run --release -p mae-sampling --example fit_truncated_normal -- 8 300
//! ```
//! Arguments: cell count (default 8) and number of draws (default 300).

use mae_sampling::rnn::{ArchitectureSpec, OutputActivation};
use mae_sampling::sampling::{mae_random_sampling, SamplingConfig};
use mae_sampling::stats::truncnorm_cdf;
use mae_sampling::timeseries::{generate_sine, window, SineParams, Splits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let nc: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    let samples: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300);

    let series = generate_sine(&SineParams::default())?;
    let splits = Splits::new(&window(&series, 30)?, 0.8)?;
    let arch = ArchitectureSpec::new(nc, 30, 1, 1, OutputActivation::Tanh)?;
    let cfg = SamplingConfig {
        max_samples: samples,
        seed: 1,
        ..SamplingConfig::default()
    };
    let out = mae_random_sampling(&arch, &splits, &cfg)?;
    let fit = &out.fit;
    println!(
        "{} draws on [{}, {}]: raw mean {:.4} sd {:.4}; fitted mu {:.4} sigma {:.4} (converged: {})",
        out.maes.len(),
        fit.lower,
        fit.upper,
        out.mean_raw,
        out.sd_raw,
        fit.mu,
        fit.sigma,
        fit.converged
    );

    let mut sorted = out.maes.clone();
    sorted.sort_by(f64::total_cmp);
    println!("{:>10} {:>12} {:>12}", "threshold", "fitted cdf", "empirical");
    for t in [0.01, 0.1, sorted[sorted.len() / 4], sorted[sorted.len() / 2], 1.0, 2.0] {
        let empirical = sorted.partition_point(|m| *m <= t) as f64 / sorted.len() as f64;
        println!("{t:>10.4} {:>12.4e} {empirical:>12.4}", truncnorm_cdf(t, fit)?);
    }
    println!("ln p_0.01 = {:.4}", out.log_p_t);
    Ok(())
}
