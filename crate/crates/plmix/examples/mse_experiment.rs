//! Runs a small synthetic accuracy study: draws random ground truths, samples
//! datasets of growing size under two data settings, fits each one, and
//! tabulates the squared parameter error.
//!
//! Run with `cargo run --release --example mse_experiment`.

use plmix::bench::{median, write_aggregates_csv, Setting};
use plmix::{run_experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Five trials per cell keep this example quick; the full study uses 50.
    let config = ExperimentConfig {
        settings: vec![Setting::Top2TwoWay, Setting::LinearTop2TwoWay],
        n_grid: vec![1_000, 10_000],
        trials: 5,
        seed: 3,
        ..ExperimentConfig::new(10)
    };
    let result = run_experiment(&config)?;

    println!(
        "{:<20} {:>7} {:>12} {:>24} {:>12}",
        "setting", "n", "mean MSE", "95% CI", "median MSE"
    );
    for agg in &result.aggregates {
        let cell: Vec<f64> = result
            .trials
            .iter()
            .filter(|t| t.setting == agg.setting && t.n == agg.n)
            .map(|t| t.mse)
            .collect();
        println!(
            "{:<20} {:>7} {:>12.4} {:>24} {:>12.4}",
            agg.setting.to_string(),
            agg.n,
            agg.mean_mse,
            format!("[{:.4}, {:.4}]", agg.ci_low, agg.ci_high),
            median(&cell)
        );
    }

    // Full rankings carry strictly more information than projected pairs,
    // so the linear setting should never lag at equal n.
    let mean = |s: Setting, n: u64| {
        result
            .aggregates
            .iter()
            .find(|a| a.setting == s && a.n == n)
            .map(|a| a.mean_mse)
            .unwrap()
    };
    println!(
        "\nat n = 10_000: linear mean {:.4} vs partial mean {:.4}",
        mean(Setting::LinearTop2TwoWay, 10_000),
        mean(Setting::Top2TwoWay, 10_000)
    );

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("aggregates.csv");
    write_aggregates_csv(std::fs::File::create(&path)?, &result.aggregates)?;
    println!("\naggregate table written to {}:", path.display());
    print!("{}", std::fs::read_to_string(&path)?);
    Ok(())
}
