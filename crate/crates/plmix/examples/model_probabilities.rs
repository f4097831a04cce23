//! Evaluates marginal and model probabilities of the three partial-order
//! shapes under a small two-component mixture, then cross-checks every
//! closed form against enumeration over all full rankings.
//!
//! Run with `cargo run --example model_probabilities`.

use plmix::prob::brute_force_mixture_prob;
use plmix::types::{MixtureParams, PLParams, PartialOrder, StructureDistribution, StructureId};
use plmix::{mixture_partial_prob, model_partial_prob};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two components over four alternatives, with a structure
    // distribution covering one instance of each order shape.
    let mix = MixtureParams::new(
        vec![0.2, 0.8],
        vec![
            PLParams::new(vec![0.1, 0.2, 0.3, 0.4])?,
            PLParams::new(vec![0.2, 0.2, 0.3, 0.3])?,
        ],
    )?
    .with_phi(StructureDistribution::from_entries([
        (StructureId::Top { l: 3 }, 0.2),
        (StructureId::Top { l: 2 }, 0.1),
        (StructureId::way(vec![1, 3, 4])?, 0.3),
        (StructureId::choice(vec![1, 2, 3])?, 0.4),
    ])?);

    let orders = [
        PartialOrder::top(vec![2, 3, 4])?,
        PartialOrder::top(vec![4, 3])?,
        PartialOrder::way(vec![3, 4, 1])?,
        PartialOrder::choice(vec![1, 2, 3], 3)?,
    ];

    println!("{:<22} {:>12} {:>12} {:>12}", "order", "marginal", "model", "brute force");
    for o in &orders {
        let marginal = mixture_partial_prob(&mix, o)?;
        let model = model_partial_prob(&mix, o)?;
        let brute = brute_force_mixture_prob(&mix, o)?;
        println!("{:<22} {:>12.7} {:>12.7} {:>12.7}", o.to_string(), marginal, model, brute);
        assert!((marginal - brute).abs() < 1e-12, "closed form disagrees with enumeration");
    }

    // The model probability is the marginal weighted by the structure's
    // frequency, so orders outside the structure set have no model
    // probability at all.
    let outside = PartialOrder::top(vec![2])?;
    println!("\ntop-1 orders are outside this structure set:");
    println!("  marginal: {:.7}", mixture_partial_prob(&mix, &outside)?);
    println!("  model:    {}", model_partial_prob(&mix, &outside).unwrap_err());
    Ok(())
}
