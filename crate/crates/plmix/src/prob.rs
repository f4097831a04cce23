//! Exact marginal probabilities of partial orders under Plackett-Luce
//! models and their mixtures.
//!
//! A Plackett-Luce model ranks alternatives by repeatedly choosing the next
//! best with probability proportional to its weight among those not yet
//! placed. Each supported partial-order shape has a closed-form marginal:
//!
//! * ranked top-`l`: product over the prefix of `theta / (remaining total)`,
//!   where the remaining total is over all `m` alternatives not yet placed,
//! * `l`-way: the same product restricted to the subset, because a
//!   Plackett-Luce ranking restricted to a subset is a Plackett-Luce ranking
//!   under the subset's weights,
//! * choice-`l`: the chosen weight over the subset's total.
//!
//! [`brute_force_partial_prob`] recomputes any of these by enumerating all
//! `m!` full rankings and summing those consistent with the order; it is the
//! oracle the closed forms are tested against.

use itertools::Itertools;

use crate::types::{
    LinearOrder, MixtureParams, ModelError, PLParams, PartialOrder, StructureId,
};
use thiserror::Error;

/// Largest `m` for which enumeration over all `m!` rankings is permitted.
pub const MAX_ENUM_M: usize = 8;

/// Prefix length beyond which marginals are evaluated in log space to
/// avoid underflow of long ratio products.
const LOG_SPACE_MIN_L: usize = 31;

/// Error raised by probability evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    /// The order is malformed or incompatible with the model's `m`.
    #[error("order incompatible with model: {0}")]
    InvalidOrder(#[from] ModelError),
    /// The order's structure is not in the model's structure distribution.
    #[error("structure {structure} not in the model's structure distribution")]
    UnknownStructure {
        /// The structure of the queried order.
        structure: StructureId,
    },
    /// The model carries no structure distribution.
    #[error("model has no structure distribution attached")]
    MissingPhi,
    /// Enumeration was requested for an alternative set too large to
    /// enumerate.
    #[error("enumeration limited to m <= {max}, got {m}")]
    TooLarge {
        /// Requested size.
        m: usize,
        /// The enumeration limit.
        max: usize,
    },
}

// ====== single-model marginals ======

/// Probability of a full ranking under a single Plackett-Luce model.
pub fn pl_linear_prob(params: &PLParams, r: &LinearOrder) -> Result<f64, ProbError> {
    if r.m() != params.m() {
        return Err(ProbError::InvalidOrder(ModelError::LengthMismatch {
            expected: params.m(),
            got: r.m(),
        }));
    }
    let mut remaining: f64 = params.theta().iter().sum();
    let mut p = 1.0;
    // The final position is forced, so its factor is 1.
    for &a in &r.ranking()[..r.m() - 1] {
        let t = params.get(a);
        p *= t / remaining;
        remaining -= t;
    }
    Ok(p)
}

/// Marginal probability of a partial order under a single Plackett-Luce
/// model, in closed form.
pub fn pl_partial_prob(params: &PLParams, order: &PartialOrder) -> Result<f64, ProbError> {
    order.validate(params.m())?;
    if order.l() >= LOG_SPACE_MIN_L {
        return Ok(pl_partial_ln_prob(params, order)?.exp());
    }
    Ok(match order {
        PartialOrder::Top { ranked } => {
            let mut remaining: f64 = params.theta().iter().sum();
            let mut p = 1.0;
            for &a in ranked {
                let t = params.get(a);
                p *= t / remaining;
                remaining -= t;
            }
            p
        }
        PartialOrder::Way { ranked } => {
            let mut remaining: f64 = ranked.iter().map(|&a| params.get(a)).sum();
            let mut p = 1.0;
            // The last subset member is forced once the others are placed.
            for &a in &ranked[..ranked.len() - 1] {
                let t = params.get(a);
                p *= t / remaining;
                remaining -= t;
            }
            p
        }
        PartialOrder::Choice { subset, chosen } => {
            let total: f64 = subset.iter().map(|&a| params.get(a)).sum();
            params.get(*chosen) / total
        }
    })
}

/// Log marginal probability of a partial order under a single
/// Plackett-Luce model. Exact for any prefix length; [`pl_partial_prob`]
/// delegates here for long prefixes whose ratio products would underflow.
pub fn pl_partial_ln_prob(params: &PLParams, order: &PartialOrder) -> Result<f64, ProbError> {
    order.validate(params.m())?;
    Ok(match order {
        PartialOrder::Top { ranked } => {
            let mut remaining: f64 = params.theta().iter().sum();
            let mut lp = 0.0;
            for &a in ranked {
                let t = params.get(a);
                lp += t.ln() - remaining.ln();
                remaining -= t;
            }
            lp
        }
        PartialOrder::Way { ranked } => {
            let mut remaining: f64 = ranked.iter().map(|&a| params.get(a)).sum();
            let mut lp = 0.0;
            for &a in &ranked[..ranked.len() - 1] {
                let t = params.get(a);
                lp += t.ln() - remaining.ln();
                remaining -= t;
            }
            lp
        }
        PartialOrder::Choice { subset, chosen } => {
            let total: f64 = subset.iter().map(|&a| params.get(a)).sum();
            params.get(*chosen).ln() - total.ln()
        }
    })
}

// ====== mixture marginals ======

/// Marginal probability of a partial order under a mixture: the
/// component-weighted combination of per-component marginals, summed in
/// component order.
pub fn mixture_partial_prob(mix: &MixtureParams, order: &PartialOrder) -> Result<f64, ProbError> {
    let mut p = 0.0;
    for (a, c) in mix.alpha().iter().zip(mix.components()) {
        p += a * pl_partial_prob(c, order)?;
    }
    Ok(p)
}

/// Probability that the model emits exactly this order: the structure's
/// probability times the mixture marginal. Requires the mixture to carry a
/// structure distribution containing the order's structure.
pub fn model_partial_prob(mix: &MixtureParams, order: &PartialOrder) -> Result<f64, ProbError> {
    let phi = mix.phi().ok_or(ProbError::MissingPhi)?;
    let structure = order.structure();
    let weight = phi
        .get(&structure)
        .ok_or(ProbError::UnknownStructure { structure })?;
    Ok(weight * mixture_partial_prob(mix, order)?)
}

// ====== enumeration oracle ======

/// Marginal probability by brute force: enumerate all `m!` full rankings,
/// keep those consistent with the order, sum their probabilities. Only for
/// `m <= `[`MAX_ENUM_M`]; this is the oracle for the closed forms above.
pub fn brute_force_partial_prob(params: &PLParams, order: &PartialOrder) -> Result<f64, ProbError> {
    let m = params.m();
    if m > MAX_ENUM_M {
        return Err(ProbError::TooLarge { m, max: MAX_ENUM_M });
    }
    order.validate(m)?;
    let mut p = 0.0;
    for r in all_linear_orders(m)? {
        if r.extends(order) {
            p += pl_linear_prob(params, &r)?;
        }
    }
    Ok(p)
}

/// Mixture marginal by brute force, via linearity over components.
pub fn brute_force_mixture_prob(
    mix: &MixtureParams,
    order: &PartialOrder,
) -> Result<f64, ProbError> {
    let mut p = 0.0;
    for (a, c) in mix.alpha().iter().zip(mix.components()) {
        p += a * brute_force_partial_prob(c, order)?;
    }
    Ok(p)
}

// ====== order and structure enumeration ======

/// All `m!` full rankings, in lexicographic order. Only for
/// `m <= `[`MAX_ENUM_M`].
pub fn all_linear_orders(m: usize) -> Result<Vec<LinearOrder>, ProbError> {
    if m > MAX_ENUM_M {
        return Err(ProbError::TooLarge { m, max: MAX_ENUM_M });
    }
    if m < 2 {
        return Err(ProbError::InvalidOrder(ModelError::TooFewAlternatives { m }));
    }
    Ok((1..=m)
        .permutations(m)
        .map(|ranking| LinearOrder::new(ranking).expect("permutation is a valid ranking"))
        .collect())
}

/// Every order instantiating a structure, in lexicographic order of the
/// ranked sequence (or of the chosen alternative). Subset sizes are capped
/// at [`MAX_ENUM_M`].
pub fn orders_with_structure(
    m: usize,
    structure: &StructureId,
) -> Result<Vec<PartialOrder>, ProbError> {
    structure.validate(m)?;
    if structure.l() > MAX_ENUM_M {
        return Err(ProbError::TooLarge { m: structure.l(), max: MAX_ENUM_M });
    }
    Ok(match structure {
        StructureId::Top { l } => (1..=m)
            .permutations(*l)
            .map(|ranked| PartialOrder::Top { ranked })
            .collect(),
        StructureId::Way { subset } => subset
            .iter()
            .copied()
            .permutations(subset.len())
            .map(|ranked| PartialOrder::Way { ranked })
            .collect(),
        StructureId::Choice { subset } => subset
            .iter()
            .map(|&chosen| PartialOrder::Choice { subset: subset.clone(), chosen })
            .collect(),
    })
}

/// Every valid structure over `m` alternatives: all top-`l`, and every
/// nonempty subset as both a way and a choice structure. Only for
/// `m <= `[`MAX_ENUM_M`].
pub fn all_structures(m: usize) -> Result<Vec<StructureId>, ProbError> {
    if m > MAX_ENUM_M {
        return Err(ProbError::TooLarge { m, max: MAX_ENUM_M });
    }
    if m < 2 {
        return Err(ProbError::InvalidOrder(ModelError::TooFewAlternatives { m }));
    }
    let mut out = Vec::new();
    for l in 1..m {
        out.push(StructureId::Top { l });
    }
    for mask in 1u32..(1 << m) {
        let subset: Vec<usize> = (1..=m).filter(|a| mask & (1 << (a - 1)) != 0).collect();
        out.push(StructureId::Way { subset: subset.clone() });
        out.push(StructureId::Choice { subset });
    }
    Ok(out)
}
