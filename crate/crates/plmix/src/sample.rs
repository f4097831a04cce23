//! Seeded sampling of rankings, their projections onto structures, and the
//! two standard synthetic-study structure distributions.
//!
//! The generative model behind a profile: draw a mixture component, draw a
//! full ranking from it by sequential choice, independently draw a
//! structure, and keep only the ranking's projection onto that structure.

use rand::Rng;

use crate::types::{
    LinearOrder, MixtureParams, ModelError, PLParams, PartialOrder, Profile,
    StructureDistribution, StructureId,
};
use thiserror::Error;

/// Error raised by samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    /// Profile sampling needs a structure distribution on the mixture.
    #[error("mixture has no structure distribution attached")]
    MissingPhi,
    /// Invalid construction input.
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ====== seed derivation ======

/// Derives an independent stream seed from a master seed, by one SplitMix64
/// scramble of the pair. The rule is fixed so that per-trial and per-start
/// seeds are reproducible across runs and platforms.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ====== sampling ======

/// Draws a full ranking from the mixture: pick a component by weight, then
/// rank by sequential choice proportional to the component's weights.
pub fn sample_linear<R: Rng + ?Sized>(mix: &MixtureParams, rng: &mut R) -> LinearOrder {
    let r = pick_cumulative(mix.alpha().iter().copied(), rng);
    let params = mix.component(r);
    let m = params.m();
    let mut pool: Vec<usize> = (1..=m).collect();
    let mut remaining: f64 = params.theta().iter().sum();
    let mut ranking = Vec::with_capacity(m);
    for _ in 0..m {
        let u = rng.random::<f64>() * remaining;
        let mut acc = 0.0;
        let mut pick = pool.len() - 1;
        for (i, &a) in pool.iter().enumerate() {
            acc += params.get(a);
            if u < acc {
                pick = i;
                break;
            }
        }
        let a = pool.remove(pick);
        remaining -= params.get(a);
        ranking.push(a);
    }
    LinearOrder::new(ranking).expect("sampled ranking is a permutation")
}

/// Walks a cumulative sum and returns the index of the first weight whose
/// cumulative total exceeds a uniform draw. Weights must sum to about 1.
fn pick_cumulative<R: Rng + ?Sized>(
    weights: impl IntoIterator<Item = f64>,
    rng: &mut R,
) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.into_iter().enumerate() {
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Projects a full ranking onto a structure: keep the top-`l` prefix, the
/// subset's induced ranking, or the subset's best member.
pub fn project(r: &LinearOrder, structure: &StructureId) -> PartialOrder {
    match structure {
        StructureId::Top { l } => PartialOrder::Top { ranked: r.ranking()[..*l].to_vec() },
        StructureId::Way { subset } => PartialOrder::Way {
            ranked: r
                .ranking()
                .iter()
                .copied()
                .filter(|a| subset.binary_search(a).is_ok())
                .collect(),
        },
        StructureId::Choice { subset } => {
            let chosen = *r
                .ranking()
                .iter()
                .find(|a| subset.binary_search(a).is_ok())
                .expect("subset is nonempty");
            PartialOrder::Choice { subset: subset.clone(), chosen }
        }
    }
}

/// Samples `n` observations: each is an independent ranking draw projected
/// onto an independent structure draw from the mixture's structure
/// distribution.
pub fn sample_profile<R: Rng + ?Sized>(
    mix: &MixtureParams,
    n: usize,
    rng: &mut R,
) -> Result<Profile, SampleError> {
    let phi = mix.phi().ok_or(SampleError::MissingPhi)?;
    let structures: Vec<(&StructureId, f64)> = phi.entries().collect();
    let mut orders = Vec::with_capacity(n);
    for _ in 0..n {
        let r = sample_linear(mix, rng);
        let s = structures[pick_cumulative(structures.iter().map(|&(_, p)| p), rng)].0;
        orders.push(project(&r, s));
    }
    Ok(Profile::new(mix.m(), orders)?)
}

/// Samples `n` full rankings as a profile of `m`-way orders, the
/// linear-order observation mode of the benchmark.
pub fn sample_linear_profile<R: Rng + ?Sized>(
    mix: &MixtureParams,
    n: usize,
    rng: &mut R,
) -> Profile {
    let orders = (0..n)
        .map(|_| PartialOrder::Way { ranked: sample_linear(mix, rng).ranking().to_vec() })
        .collect();
    Profile::new(mix.m(), orders).expect("sampled rankings are valid orders")
}

/// Draws mixture parameters with every coordinate uniform in (0, 1) and
/// each block normalized to sum to one; the ground-truth generator for
/// synthetic experiments.
pub fn random_mixture<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> MixtureParams {
    let alpha = random_simplex_point(k, rng);
    let components = (0..k)
        .map(|_| PLParams::new(random_simplex_point(m, rng)).expect("normalized weights are valid"))
        .collect();
    MixtureParams::new(alpha, components).expect("normalized weights are valid")
}

fn random_simplex_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let sum: f64 = v.iter().sum();
        if v.iter().all(|&x| x > 0.0) && sum > 0.0 {
            return v.iter().map(|x| x / sum).collect();
        }
    }
}

// ====== synthetic-study structure distributions ======

/// The ranked-top-2 plus pairwise setup: half the mass on ranked top-2
/// orders, the other half spread evenly over all `m(m-1)/2` two-element
/// subsets as 2-way orders. Requires `m >= 4`.
pub fn setup_top2_2way(m: usize) -> Result<StructureDistribution, ModelError> {
    if m < 4 {
        return Err(ModelError::TooFewAlternatives { m });
    }
    let pair_mass = 1.0 / (m * (m - 1)) as f64;
    let mut entries = vec![(StructureId::Top { l: 2 }, 0.5)];
    for i in 1..=m {
        for j in (i + 1)..=m {
            entries.push((StructureId::Way { subset: vec![i, j] }, pair_mass));
        }
    }
    StructureDistribution::from_entries(entries)
}

/// The covering groups of four alternatives used by the choice-based
/// setup and its moment selector: group `t` is `{a_1}` plus the next three
/// alternatives, except that the last group is the final three alternatives
/// plus `a_1` (overlapping its predecessor when `m - 1` is not a multiple
/// of three). Requires `m >= 4`.
pub fn choice_groups(m: usize) -> Result<Vec<[usize; 4]>, ModelError> {
    if m < 4 {
        return Err(ModelError::TooFewAlternatives { m });
    }
    let c = (m - 1).div_ceil(3);
    let mut groups = Vec::with_capacity(c);
    for t in 1..c {
        groups.push([1, 3 * t - 1, 3 * t, 3 * t + 1]);
    }
    groups.push([1, m - 2, m - 1, m]);
    Ok(groups)
}

/// The choice-only setup: groups of four containing `a_1` cover the
/// alternatives; within each group, mass is split over the choice-4 event,
/// the four choice-3 subsets, and the six choice-2 subsets in proportions
/// 4:3:1 per subset, then everything is normalized to sum to one across
/// `ceil((m-1)/3)` equally weighted groups. Requires `m >= 4`.
pub fn setup_choice234(m: usize) -> Result<StructureDistribution, ModelError> {
    let groups = choice_groups(m)?;
    let group_mass = 1.0 / groups.len() as f64;
    // Per group: 4 for the quad, 3 for each of 4 triples, 1 for each of 6
    // pairs; total 22.
    let unit = group_mass / 22.0;
    let mut entries = Vec::new();
    for g in &groups {
        let mut quad = g.to_vec();
        quad.sort_unstable();
        entries.push((StructureId::Choice { subset: quad.clone() }, 4.0 * unit));
        for skip in 0..4 {
            let triple: Vec<usize> =
                quad.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &a)| a).collect();
            entries.push((StructureId::Choice { subset: triple }, 3.0 * unit));
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                entries.push((StructureId::Choice { subset: vec![quad[i], quad[j]] }, unit));
            }
        }
    }
    StructureDistribution::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{model_partial_prob, orders_with_structure, pl_linear_prob};
    use crate::types::validate_structure_set;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn example_mixture() -> MixtureParams {
        let c1 = PLParams::new(vec![0.1, 0.2, 0.3, 0.4]).expect("valid params");
        let c2 = PLParams::new(vec![0.2, 0.2, 0.3, 0.3]).expect("valid params");
        MixtureParams::new(vec![0.2, 0.8], vec![c1, c2]).expect("valid mixture")
    }

    fn example_phi() -> StructureDistribution {
        StructureDistribution::from_entries([
            (StructureId::Top { l: 3 }, 0.2),
            (StructureId::Top { l: 2 }, 0.1),
            (StructureId::way(vec![1, 3, 4]).expect("valid"), 0.3),
            (StructureId::choice(vec![1, 2, 3]).expect("valid"), 0.4),
        ])
        .expect("valid distribution")
    }

    #[test]
    fn setup_top2_2way_shape() {
        let phi = setup_top2_2way(4).expect("m=4 is enough");
        assert_eq!(phi.len(), 7);
        assert_abs_diff_eq!(phi.get(&StructureId::Top { l: 2 }).expect("present"), 0.5);
        assert_abs_diff_eq!(
            phi.get(&StructureId::Way { subset: vec![1, 2] }).expect("present"),
            1.0 / 12.0
        );
        let total: f64 = phi.entries().map(|(_, p)| p).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(validate_structure_set(&phi, 4).is_ok());
        assert!(validate_structure_set(&setup_top2_2way(10).expect("valid"), 10).is_ok());
        assert!(setup_top2_2way(3).is_err());
    }

    #[test]
    fn choice_groups_cover_and_overlap() {
        assert_eq!(choice_groups(4).expect("valid"), vec![[1, 2, 3, 4]]);
        assert_eq!(choice_groups(10).expect("valid"), vec![
            [1, 2, 3, 4],
            [1, 5, 6, 7],
            [1, 8, 9, 10],
        ]);
        // With (m-1) % 3 != 0 the last group re-uses earlier alternatives.
        assert_eq!(choice_groups(6).expect("valid"), vec![[1, 2, 3, 4], [1, 4, 5, 6]]);
        for m in 4..=12 {
            let groups = choice_groups(m).expect("valid");
            let mut covered: Vec<bool> = vec![false; m];
            for g in &groups {
                assert!(g.contains(&1));
                for &a in g {
                    covered[a - 1] = true;
                }
            }
            assert!(covered.iter().all(|&c| c), "m={m} not covered");
        }
    }

    #[test]
    fn setup_choice234_shape() {
        let phi = setup_choice234(4).expect("m=4 is enough");
        assert_eq!(phi.len(), 11);
        assert_abs_diff_eq!(
            phi.get(&StructureId::Choice { subset: vec![1, 2, 3, 4] }).expect("present"),
            4.0 / 22.0
        );
        assert_abs_diff_eq!(
            phi.get(&StructureId::Choice { subset: vec![1, 2, 3] }).expect("present"),
            3.0 / 22.0
        );
        assert_abs_diff_eq!(
            phi.get(&StructureId::Choice { subset: vec![3, 4] }).expect("present"),
            1.0 / 22.0
        );
        let total: f64 = phi.entries().map(|(_, p)| p).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(validate_structure_set(&phi, 4).is_ok());

        // Overlapping groups merge shared structures; mass still sums to 1.
        let phi6 = setup_choice234(6).expect("m=6 is enough");
        assert_eq!(phi6.len(), 21);
        assert_abs_diff_eq!(
            phi6.get(&StructureId::Choice { subset: vec![1, 4] }).expect("shared pair"),
            2.0 / 44.0
        );
        let total: f64 = phi6.entries().map(|(_, p)| p).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(validate_structure_set(&phi6, 6).is_ok());

        let phi10 = setup_choice234(10).expect("m=10 is enough");
        assert_eq!(phi10.len(), 33);
        assert!(validate_structure_set(&phi10, 10).is_ok());
    }

    #[test]
    fn projection_is_consistent_with_the_ranking() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mix = example_mixture();
        let structures = crate::prob::all_structures(4).expect("enumerates");
        for _ in 0..50 {
            let r = sample_linear(&mix, &mut rng);
            for s in &structures {
                let o = project(&r, s);
                assert!(o.validate(4).is_ok() || matches!(s, StructureId::Top { l } if *l >= 4));
                assert!(r.extends(&o), "projection must be consistent: {r} vs {o}");
            }
        }
    }

    #[test]
    fn sampled_ranking_frequencies_match_the_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c1 = PLParams::new(vec![0.1, 0.2, 0.3, 0.4]).expect("valid params");
        let mix = MixtureParams::new(vec![1.0], vec![c1.clone()]).expect("valid mixture");
        let target = LinearOrder::new(vec![2, 3, 4, 1]).expect("valid ranking");
        let n = 60_000;
        let mut hits = 0usize;
        for _ in 0..n {
            if sample_linear(&mix, &mut rng) == target {
                hits += 1;
            }
        }
        let p = pl_linear_prob(&c1, &target).expect("evaluates");
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            ((hits as f64 / n as f64) - p).abs() <= 3.0 * sd,
            "empirical {} vs exact {p}",
            hits as f64 / n as f64
        );
    }

    #[test]
    fn sampling_is_reproducible_from_the_seed() {
        let mix = example_mixture().with_phi(example_phi());
        let mut r1 = ChaCha8Rng::seed_from_u64(derive_seed(7, 0));
        let mut r2 = ChaCha8Rng::seed_from_u64(derive_seed(7, 0));
        let p1 = sample_profile(&mix, 500, &mut r1).expect("samples");
        let p2 = sample_profile(&mix, 500, &mut r2).expect("samples");
        assert_eq!(p1, p2);
        let mut r3 = ChaCha8Rng::seed_from_u64(derive_seed(7, 1));
        let p3 = sample_profile(&mix, 500, &mut r3).expect("samples");
        assert_ne!(p1, p3);
    }

    #[test]
    fn profile_frequencies_pass_goodness_of_fit() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let mix = example_mixture().with_phi(example_phi());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 100_000;
        let profile = sample_profile(&mix, n, &mut rng).expect("samples");
        let mut counts: HashMap<PartialOrder, usize> = HashMap::new();
        for o in profile.orders() {
            *counts.entry(o.clone()).or_insert(0) += 1;
        }
        // Every order the model can emit is a cell.
        let mut chi2 = 0.0;
        let mut cells = 0usize;
        for (s, _) in example_phi().entries() {
            for o in orders_with_structure(4, s).expect("enumerates") {
                let p = model_partial_prob(&mix, &o).expect("evaluates");
                let expected = p * n as f64;
                let observed = counts.get(&o).copied().unwrap_or(0) as f64;
                chi2 += (observed - expected).powi(2) / expected;
                cells += 1;
            }
        }
        assert_eq!(cells, 24 + 12 + 6 + 3);
        let dist = ChiSquared::new((cells - 1) as f64).expect("valid dof");
        let critical = dist.inverse_cdf(0.999);
        assert!(chi2 <= critical, "chi2 {chi2} exceeds {critical}");
    }

    #[test]
    fn random_mixture_is_valid_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mix = random_mixture(10, 2, &mut rng);
        assert_eq!(mix.m(), 10);
        assert_eq!(mix.k(), 2);
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(mix, random_mixture(10, 2, &mut rng2));
    }
}
