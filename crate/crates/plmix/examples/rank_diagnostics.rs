//! Checks whether a set of moment events can separate mixture components by
//! computing the numerical rank of the event-by-component probability
//! matrix: full column rank means the events identify the components.
//!
//! Run with `cargo run --example rank_diagnostics`.

use plmix::ident::{line_component, moment_matrix, numerical_rank, peaked_component};
use plmix::Selector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let events = Selector::Top2TwoWay.moments(4)?.orders();
    println!("{} ranked top-2 and 2-way events over 4 alternatives\n", events.len());

    // Distinct peaked components: one alternative carries weight e, the
    // rest split the remainder evenly.
    let peaks = [0.1, 0.3, 0.55, 0.8];
    let separated: Vec<_> =
        peaks.iter().map(|&e| peaked_component(4, e)).collect::<Result<_, _>>()?;
    let mat = moment_matrix(&separated, &events)?;
    let sv = mat.clone().singular_values();
    println!("separated peaks {peaks:?}");
    println!("  singular values: {:.4?}", sv.as_slice());
    println!("  numerical rank:  {}", numerical_rank(&mat, 1e-9));

    // A shared-slope family stays full rank as long as the anchor weights
    // differ...
    let lines: Vec<_> =
        peaks.iter().map(|&e| line_component(e, -0.3, -0.25)).collect::<Result<_, _>>()?;
    let mat = moment_matrix(&lines, &events)?;
    println!("\nshared-slope components at the same anchors");
    println!("  numerical rank:  {}", numerical_rank(&mat, 1e-9));

    // ...but duplicated components collapse the rank, one lost dimension
    // per collision.
    let twin = peaked_component(4, 0.3)?;
    let collided = vec![twin.clone(), twin.clone(), separated[2].clone(), separated[3].clone()];
    let mat = moment_matrix(&collided, &events)?;
    let sv = mat.clone().singular_values();
    println!("\ntwo components collided at e = 0.3");
    println!("  singular values: {:.4?}", sv.as_slice());
    println!("  numerical rank:  {}", numerical_rank(&mat, 1e-9));
    assert_eq!(numerical_rank(&mat, 1e-9), 3);
    Ok(())
}
