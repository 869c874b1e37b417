//! Generate the 1 Hz and 3 Hz sine waves, window them and show the split sizes.
//!
//! ```bash
//! cargo run -p mae-sampling --example sine_windows -- /tmp/sine.csv
//! ```
//! With a path argument the 1 Hz wave is also written there as CSV.

use mae_sampling::timeseries::{generate_sine, minmax_scale, window, SineParams, Splits};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let slow = SineParams::default();
    let fast = SineParams {
        frequency: 3.0,
        t_end: 10.0,
        ..SineParams::default()
    };

    for (label, p) in [("f=1, t in [0,100)", slow), ("f=3, t in [0,10)", fast)] {
        let series = generate_sine(&p)?;
        let ds = window(&series, 30)?;
        let splits = Splits::new(&ds, 0.8)?;
        println!(
            "{label}: {} samples -> {} windows of 30 -> {} train / {} test",
            series.len(),
            ds.len(),
            splits.train.len(),
            splits.test.len()
        );
    }

    let series = generate_sine(&slow)?;
    let (scaled, table) = minmax_scale(&series);
    let col = scaled.column(0);
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("min-max scaled range [{lo}, {hi}], ranges {:?}", table.ranges);

    if let Some(path) = std::env::args().nth(1) {
        series.write_csv(std::path::Path::new(&path))?;
        println!("wrote {path}");
    }
    Ok(())
}
