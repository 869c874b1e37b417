//! Run the full validation pipeline from a plan file and print the
//! correlation table and model-evaluation summary.
//!
//! ```bash
//! RUST_LOG=info cargo run --release -p mae-sampling --example desk_experiment -- \
//!     crates/core/plans/desk_sine.json /tmp/desk
//! ```
//! The second argument is optional; when given, the report is written there.

use std::path::Path;

use mae_sampling::experiment::{run_experiment, PlanFile};

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:+.3}")).unwrap_or_else(|| "  n/a".into())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let plan_path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/plans/desk_sine.json").into());
    let out_dir = args.next();

    let text = std::fs::read_to_string(&plan_path)?;
    let (plan, series) = PlanFile::from_json(&text)?.resolve(Path::new(&plan_path).parent())?;
    println!("{}", plan.grid_label);

    let started = std::time::Instant::now();
    let report = run_experiment(&plan, &series)?;
    println!("finished in {:.1?}\n", started.elapsed());

    println!("{:>6} {:>6} {:>6} {:>6} {:>6} {:>8}", "epochs", "nc", "lb", "mean", "sd", "log p");
    for c in &report.correlations {
        println!(
            "{:>6} {:>6} {:>6} {:>6} {:>6} {:>8}",
            c.epochs,
            fmt(c.nc),
            fmt(c.lb),
            fmt(c.mean_fit),
            fmt(c.sd_fit),
            fmt(c.log_p_t)
        );
    }
    let s = &report.model_eval_summary;
    println!(
        "\nlinear model on {:?}: {} repetitions used, {} skipped",
        s.feature_names, s.n_evaluated, s.n_skipped
    );
    println!("  mean spearman rho        {}", fmt(s.mean_spearman_rho));
    println!("  mean within one decile   {}", fmt(s.mean_within_one_decile));
    println!("  mean prediction RMSE     {}", fmt(s.mean_prediction_rmse));

    if let Some(dir) = out_dir {
        for p in report.write_all(Path::new(&dir))? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}
