//! Randomized invariants: closed forms against enumeration, projection
//! consistency, serialization round-trips, error-metric symmetries, and
//! simplex decoding, each over generated inputs.

use proptest::prelude::*;

use plmix::estimate::mse;
use plmix::io::{params_from_doc, params_to_doc, read_profile, write_profile};
use plmix::optim::SimplexBlocks;
use plmix::prob::pl_partial_ln_prob;
use plmix::sample::project;
use plmix::types::{
    LinearOrder, MixtureParams, PLParams, Profile, StructureDistribution,
    StructureId,
};
use plmix::{brute_force_partial_prob, pl_partial_prob};

fn arb_weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, len).prop_map(|v| {
        let total: f64 = v.iter().sum();
        v.into_iter().map(|x| x / total).collect()
    })
}

fn arb_theta(m: usize) -> impl Strategy<Value = PLParams> {
    arb_weights(m).prop_map(|w| PLParams::new(w).expect("normalized weights"))
}

fn arb_mixture(m: usize, k: usize) -> impl Strategy<Value = MixtureParams> {
    (arb_weights(k), prop::collection::vec(arb_theta(m), k))
        .prop_map(|(alpha, components)| MixtureParams::new(alpha, components).expect("valid"))
}

fn arb_ranking(m: usize) -> impl Strategy<Value = LinearOrder> {
    Just((1..=m).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|r| LinearOrder::new(r).expect("permutation"))
}

/// A structure drawn from the three shapes, sized to fit `m`.
fn arb_structure(m: usize) -> impl Strategy<Value = StructureId> {
    (0..3u8, 1..=m, Just((1..=m).collect::<Vec<usize>>()).prop_shuffle()).prop_map(
        move |(kind, l, pool)| match kind {
            0 => StructureId::Top { l: l.clamp(1, m - 1) },
            1 => StructureId::way(pool[..l].to_vec()).expect("distinct"),
            _ => StructureId::choice(pool[..l.max(2)].to_vec()).expect("distinct"),
        },
    )
}

fn arb_case() -> impl Strategy<Value = (usize, PLParams, LinearOrder, StructureId)> {
    (3usize..=6).prop_flat_map(|m| {
        (Just(m), arb_theta(m), arb_ranking(m), arb_structure(m))
    })
}

fn arb_profile() -> impl Strategy<Value = Profile> {
    (3usize..=6).prop_flat_map(|m| {
        prop::collection::vec(
            (arb_ranking(m), arb_structure(m)).prop_map(|(r, s)| project(&r, &s)),
            1..40,
        )
        .prop_map(move |orders| Profile::new(m, orders).expect("valid orders"))
    })
}

proptest! {
    #[test]
    fn projections_have_the_requested_structure((m, _, ranking, structure) in arb_case()) {
        let order = project(&ranking, &structure);
        prop_assert_eq!(order.structure(), structure);
        prop_assert!(order.validate(m).is_ok());
        prop_assert!(ranking.extends(&order));
    }

    #[test]
    fn closed_forms_match_enumeration((_, theta, ranking, structure) in arb_case()) {
        let order = project(&ranking, &structure);
        let exact = pl_partial_prob(&theta, &order).expect("evaluates");
        let brute = brute_force_partial_prob(&theta, &order).expect("enumerates");
        prop_assert!((exact - brute).abs() <= 1e-12, "exact {exact} vs brute {brute}");
        prop_assert!((0.0..=1.0 + 1e-12).contains(&exact));
    }

    #[test]
    fn log_probabilities_agree_with_probabilities((_, theta, ranking, structure) in arb_case()) {
        let order = project(&ranking, &structure);
        let p = pl_partial_prob(&theta, &order).expect("evaluates");
        let lp = pl_partial_ln_prob(&theta, &order).expect("evaluates");
        prop_assert!((lp - p.ln()).abs() <= 1e-9 * lp.abs().max(1.0), "ln {lp} vs {}", p.ln());
    }

    #[test]
    fn profiles_round_trip_through_the_line_format(profile in arb_profile()) {
        let mut bytes = Vec::new();
        write_profile(&mut bytes, &profile).expect("writes");
        let back = read_profile(bytes.as_slice()).expect("reads");
        prop_assert_eq!(back.m(), profile.m());
        prop_assert_eq!(back.orders(), profile.orders());
    }

    #[test]
    fn params_round_trip_through_documents(mix in (3usize..=6).prop_flat_map(|m| arb_mixture(m, 3))) {
        let back = params_from_doc(&params_to_doc(&mix)).expect("valid document");
        prop_assert_eq!(back.alpha(), mix.alpha());
        for (a, b) in back.components().iter().zip(mix.components()) {
            prop_assert_eq!(a.theta(), b.theta());
        }
    }

    #[test]
    fn squared_error_is_a_symmetric_pseudometric(
        (a, b) in (3usize..=5).prop_flat_map(|m| (arb_mixture(m, 2), arb_mixture(m, 2)))
    ) {
        prop_assert!(mse(&a, &a).expect("same shape") <= 1e-15);
        let ab = mse(&a, &b).expect("same shape");
        let ba = mse(&b, &a).expect("same shape");
        prop_assert!((ab - ba).abs() <= 1e-12, "asymmetry: {ab} vs {ba}");
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn squared_error_ignores_component_labels(
        (a, b) in (3usize..=5).prop_flat_map(|m| (arb_mixture(m, 2), arb_mixture(m, 2)))
    ) {
        let swapped = MixtureParams::new(
            vec![a.alpha()[1], a.alpha()[0]],
            vec![a.component(1).clone(), a.component(0).clone()],
        ).expect("valid");
        let direct = mse(&a, &b).expect("same shape");
        let relabeled = mse(&swapped, &b).expect("same shape");
        prop_assert!((direct - relabeled).abs() <= 1e-12, "{direct} vs {relabeled}");
    }

    #[test]
    fn decoded_blocks_always_land_on_their_simplexes(
        z in prop::collection::vec(-60.0f64..60.0, 7)
    ) {
        // Blocks sized like a two-component fit over four alternatives;
        // each block pins one logit, leaving size-1 free coordinates.
        let codec = SimplexBlocks::new(vec![2, 4, 4], 1e-6);
        prop_assert_eq!(codec.dim(), 7);
        for block in codec.decode(&z) {
            let total: f64 = block.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12, "sum {total}");
            for &p in &block {
                prop_assert!((1e-6 - 1e-15..1.0).contains(&p), "entry {p} off the floored simplex");
            }
        }
    }

    #[test]
    fn duplicate_structure_entries_accumulate(
        (s, w1, w2) in (3usize..=6).prop_flat_map(|m| (arb_structure(m), 0.01f64..0.5, 0.01f64..0.5))
    ) {
        let rest = 1.0 - w1 - w2;
        prop_assume!(rest > 0.01);
        let filler = if matches!(s, StructureId::Top { l: 1 }) {
            StructureId::Top { l: 2 }
        } else {
            StructureId::Top { l: 1 }
        };
        let phi = StructureDistribution::from_entries([
            (s.clone(), w1),
            (s.clone(), w2),
            (filler, rest),
        ]).expect("valid distribution");
        let got = phi.get(&s).expect("present");
        prop_assert!((got - (w1 + w2)).abs() <= 1e-12);
    }
}
