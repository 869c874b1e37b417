//! Use the best random draw found while sampling as the starting point for
//! Adam, and compare with a fresh initialization.
//!
//! ```bash
//! cargo run --release -p mae-sampling --example warm_start -- 12 30
//! ```
//! Arguments: cell count (default 12) and epochs (default 30).

use mae_sampling::rnn::{ArchitectureSpec, OutputActivation, WeightSet};
use mae_sampling::sampling::{mae_random_sampling, SamplingConfig};
use mae_sampling::timeseries::{generate_sine, window, SineParams, Splits};
use mae_sampling::trainer::{train, AdamConfig, Init};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let nc: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12);
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(30);

    let series = generate_sine(&SineParams::default())?;
    let splits = Splits::new(&window(&series, 30)?, 0.8)?;
    let arch = ArchitectureSpec::new(nc, 30, 1, 1, OutputActivation::Tanh)?;
    let outcome = mae_random_sampling(
        &arch,
        &splits,
        &SamplingConfig {
            max_samples: 200,
            seed: 5,
            ..SamplingConfig::default()
        },
    )?;
    println!("best of 200 draws: MAE {:.4}", outcome.best_mae);

    // Round-trip through a weight file, as the CLI does.
    let path = std::env::temp_dir().join(format!("best_nc{nc}.w"));
    outcome.best_weights().save(&path)?;
    let best = WeightSet::load(&path)?;

    let cfg = AdamConfig {
        epochs,
        seed: 5,
        ..AdamConfig::default()
    };
    let warm = train(&arch, &splits.train, &splits.test, &cfg, Init::Weights(best))?;
    let fresh = train(&arch, &splits.train, &splits.test, &cfg, Init::Fresh)?;
    println!("{:>8} {:>10} {:>10}", "init", "start", "end");
    println!("{:>8} {:>10.4} {:>10.4}", "sampled", warm.initial_test_mae, warm.test_mae);
    println!("{:>8} {:>10.4} {:>10.4}", "glorot", fresh.initial_test_mae, fresh.test_mae);
    Ok(())
}
