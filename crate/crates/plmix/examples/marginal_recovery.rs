//! Rebuilds richer preference probabilities from poorer ones: a two-position
//! event from two choice probabilities, and a full prefix event from ranked
//! prefixes and subset rankings, verified against direct enumeration.
//!
//! Run with `cargo run --example marginal_recovery`.

use plmix::ident::{choice_to_top2, prefix_event_prob_brute, recover_prefix_event};
use plmix::types::{MixtureParams, PLParams, PartialOrder};
use plmix::{mixture_partial_prob, pl_partial_prob};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mix = MixtureParams::new(
        vec![0.35, 0.65],
        vec![
            PLParams::new(vec![0.4, 0.3, 0.2, 0.1])?,
            PLParams::new(vec![0.1, 0.15, 0.25, 0.5])?,
        ],
    )?;

    // Choosing 2 from {2,3,4} but not from {1,2,3,4} happens exactly when
    // alternative 1 is ranked first and 2 second, so the difference of the
    // two choice probabilities recovers that two-position event.
    let without_first = mixture_partial_prob(&mix, &PartialOrder::choice(vec![2, 3, 4], 2)?)?;
    let with_first = mixture_partial_prob(&mix, &PartialOrder::choice(vec![1, 2, 3, 4], 2)?)?;
    let recovered = choice_to_top2(without_first, with_first, 1e-12)?;
    let direct: f64 = mix
        .alpha()
        .iter()
        .zip(mix.components())
        .map(|(a, c)| a * pl_partial_prob(c, &PartialOrder::top(vec![1, 2]).unwrap()).unwrap())
        .sum();
    println!("choice difference:    {recovered:.7}");
    println!("ranked top-2 direct:  {direct:.7}");
    assert!((recovered - direct).abs() < 1e-12);

    // Prefix events assemble the same way from ranked prefixes and subset
    // rankings alone, which is what makes mixtures over those poorer order
    // types learnable.
    println!("\n{:<14} {:>12} {:>12}", "prefix", "recovered", "enumerated");
    for prefix in [vec![1], vec![1, 2], vec![2, 4, 3], vec![3, 1, 4, 2]] {
        let rec = recover_prefix_event(&mix, &prefix)?;
        let brute = prefix_event_prob_brute(&mix, &prefix)?;
        println!("{:<14} {:>12.7} {:>12.7}", format!("{prefix:?}"), rec, brute);
        assert!((rec - brute).abs() < 1e-12);
    }
    Ok(())
}
