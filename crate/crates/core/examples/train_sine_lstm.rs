//! Train one LSTM on the 1 Hz sine wave with Adam and print the MAE curve.
//!
//! ```bash
//! cargo run --release -p mae-sampling --example train_sine_lstm -- 16 100
//! ```
//! Arguments: cell count (default 16) and epochs (default 100).

use mae_sampling::rnn::{ArchitectureSpec, OutputActivation};
use mae_sampling::timeseries::{generate_sine, window, SineParams, Splits};
use mae_sampling::trainer::{train, AdamConfig, Init};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let nc: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(16);
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let lb = 30;

    let series = generate_sine(&SineParams::default())?;
    let splits = Splits::new(&window(&series, lb)?, 0.8)?;
    let arch = ArchitectureSpec::new(nc, lb, 1, 1, OutputActivation::Tanh)?;
    let cfg = AdamConfig {
        epochs,
        seed: 7,
        ..AdamConfig::default()
    };

    let started = std::time::Instant::now();
    let run = train(&arch, &splits.train, &splits.test, &cfg, Init::Fresh)?;
    println!("trained nc={nc} for {epochs} epochs in {:.1?}", started.elapsed());
    println!("initial train MAE {:.4}", run.initial_train_mae);
    for (e, m) in run.train_mae_history.iter().enumerate() {
        if (e + 1) % 10 == 0 || e == 0 {
            println!("epoch {:>4}  train MAE {m:.4}", e + 1);
        }
    }
    println!("test MAE {:.4}", run.test_mae);
    Ok(())
}
