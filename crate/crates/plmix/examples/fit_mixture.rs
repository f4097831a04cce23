//! Fits a two-component mixture to sampled partial-order data by matching
//! empirical event frequencies, then compares the estimate against the
//! sampling truth.
//!
//! Run with `cargo run --example fit_mixture`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plmix::sample::derive_seed;
use plmix::types::{MixtureParams, PLParams};
use plmix::{fit, sample_profile, setup_top2_2way, FitConfig, Selector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 4;
    let truth = MixtureParams::new(
        vec![0.3, 0.7],
        vec![
            PLParams::new(vec![0.55, 0.25, 0.15, 0.05])?,
            PLParams::new(vec![0.05, 0.15, 0.3, 0.5])?,
        ],
    )?
    .with_phi(setup_top2_2way(m)?);

    let n = 50_000;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(11, 0));
    let profile = sample_profile(&truth, n, &mut rng)?;

    let config = FitConfig { seed: derive_seed(11, 1), ..FitConfig::default() };
    let report = fit(&profile, Selector::Top2TwoWay, &config)?.with_reference(&truth)?;

    println!("fitted {n} orders in {:.1} ms", report.runtime_ms);
    println!("objective at estimate: {:.3e}", report.objective);
    println!("squared parameter error vs truth: {:.5}", report.mse.unwrap());

    println!("\nper-start objectives (best wins, ties to the lowest index):");
    for s in &report.starts {
        println!("  start {:>2}: {:.6e}  ({} iterations)", s.start, s.objective, s.iterations);
    }

    // Component labels are arbitrary, so align by weight before eyeballing.
    let est = &report.estimate;
    println!("\n{:<12} {:<33} estimate", "", "truth");
    let order: Vec<usize> = if est.alpha()[0] <= est.alpha()[1] { vec![0, 1] } else { vec![1, 0] };
    for (r, &e) in order.iter().enumerate() {
        println!(
            "alpha[{r}]     {:<33.3} {:.3}",
            truth.alpha()[r],
            est.alpha()[e]
        );
    }
    for (r, &e) in order.iter().enumerate() {
        let want = format!("{:.3?}", truth.component(r).theta());
        let got = format!("{:.3?}", est.component(e).theta());
        println!("theta[{r}]     {want:<33} {got}");
    }

    assert!(report.mse.unwrap() < 0.05, "estimate strayed from the truth");
    Ok(())
}
