//! Identifiability diagnostics for mixtures observed through partial
//! orders.
//!
//! Three tools answer "can these marginal families tell mixtures apart":
//!
//! * explicit witness pairs: two distinct mixtures built in closed form
//!   that agree exactly on every ranked top-`l1` and `l2`-way marginal
//!   (and hence on the implied choice marginals), proving those families
//!   are insufficient whenever `2k >= l1 + l2 + 1`,
//! * moment matrices and their numerical rank: the matrix of event
//!   probabilities across candidate components, whose full column rank
//!   over `2k` components certifies that a moment family separates
//!   `k`-component mixtures,
//! * marginal-recovery identities: exact reassembly of richer marginals
//!   from poorer families (top-2 events from choice events, prefix-set
//!   events from shorter prefixes plus subset rankings), which transfers
//!   identifiability across data shapes.

use itertools::Itertools;
use nalgebra::DMatrix;
use thiserror::Error;

use crate::prob::{
    all_linear_orders, mixture_partial_prob, pl_linear_prob, pl_partial_prob, ProbError,
    MAX_ENUM_M,
};
use crate::types::{MixtureParams, ModelError, PLParams, PartialOrder};

/// Relative tolerance for the internal check that the positive and
/// negative witness weights balance.
const WITNESS_BALANCE_TOL: f64 = 1e-9;

/// Error raised by the diagnostics in this module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentError {
    /// A witness needs `2k` peaked components, hence `m >= 2k`.
    #[error("witness construction needs m >= 2k: m={m}, k={k}")]
    TooFewAlternatives {
        /// Alternative-set size.
        m: usize,
        /// Mixture size per side.
        k: usize,
    },
    /// The requested families are rich enough to identify `k`-component
    /// mixtures, so no witness can exist.
    #[error("witness construction needs 2k >= l1 + l2 + 1: k={k}, l1={l1}, l2={l2}")]
    FamiliesTooRich {
        /// Mixture size per side.
        k: usize,
        /// Largest ranked-prefix length to agree on.
        l1: usize,
        /// Largest subset-ranking size to agree on.
        l2: usize,
    },
    /// Ranked top-`l1` orders require `l1 <= m - 1`.
    #[error("ranked-prefix family needs l1 <= m - 1: l1={l1}, m={m}")]
    PrefixFamilyTooLong {
        /// Largest ranked-prefix length to agree on.
        l1: usize,
        /// Alternative-set size.
        m: usize,
    },
    /// `l2`-way orders require `1 <= l2 <= m`.
    #[error("subset-ranking family needs 1 <= l2 <= m: l2={l2}, m={m}")]
    SubsetFamilyOutOfRange {
        /// Largest subset-ranking size to agree on.
        l2: usize,
        /// Alternative-set size.
        m: usize,
    },
    /// Witness nodes must be `2k` distinct values in the open unit
    /// interval.
    #[error("need exactly {expected} distinct nodes in (0, 1)")]
    BadNodes {
        /// Required node count.
        expected: usize,
    },
    /// The nodes are so close together that the witness weights lost all
    /// precision.
    #[error("witness weights lost precision: sides imbalanced by {imbalance:e}")]
    IllConditioned {
        /// Relative gap between the positive and negative weight totals.
        imbalance: f64,
    },
    /// Exhaustive enumeration is limited to small alternative sets.
    #[error("enumeration supports m <= {max}, got {m}")]
    TooLarge {
        /// Requested size.
        m: usize,
        /// Supported maximum.
        max: usize,
    },
    /// A marginal difference that is a probability came out negative.
    #[error("marginal difference {value} is below -{tol}")]
    NegativeProbability {
        /// The offending difference.
        value: f64,
        /// Tolerance it was checked against.
        tol: f64,
    },
    /// Invalid model construction input.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Probability evaluation failed.
    #[error(transparent)]
    Prob(#[from] ProbError),
}

// ====== component families ======

/// The single-peaked component: alternative 1 carries weight `e`, every
/// other alternative `(1 - e) / (m - 1)`.
pub fn peaked_component(m: usize, e: f64) -> Result<PLParams, IdentError> {
    if m < 2 {
        return Err(IdentError::Model(ModelError::TooFewAlternatives { m }));
    }
    let rest = (1.0 - e) / (m - 1) as f64;
    let mut theta = vec![rest; m];
    theta[0] = e;
    Ok(PLParams::new(theta)?)
}

/// A component on four alternatives whose weights are affine in a single
/// scalar: `[e, p2 (e - 1), p3 (e - 1), (1 + p2 + p3)(1 - e)]`. The family
/// with `p2, p3` in `(-1, 0)` and `p2 + p3 > -1` is the hardest case for
/// the rank diagnostics; `p2 = p3 = -1/3` recovers the peaked component.
pub fn line_component(e: f64, p2: f64, p3: f64) -> Result<PLParams, IdentError> {
    let theta = vec![e, p2 * (e - 1.0), p3 * (e - 1.0), (1.0 + p2 + p3) * (1.0 - e)];
    Ok(PLParams::new(theta)?)
}

// ====== witness pairs ======

/// Signed combination weights over `2k` peaked components that annihilate
/// every ranked top-`l1` and `l2`-way marginal:
///
/// ```text
///             prod_{p=1}^{l1-1} (p e_r + m - 1 - p)
///               * prod_{p=0}^{l2-2} ((m - l2 + p) e_r + l2 - 1 - p)
/// beta_r  =  -----------------------------------------------------
///                      prod_{q != r} (e_r - e_q)
/// ```
///
/// The numerator is positive and of degree `l1 + l2 - 2 < 2k - 1` in
/// `e_r`, so the weights sum to zero by the divided-difference identity;
/// for ascending nodes the signs alternate, giving `k` positive and `k`
/// negative entries.
pub fn beta_weights(
    m: usize,
    k: usize,
    l1: usize,
    l2: usize,
    nodes: &[f64],
) -> Result<Vec<f64>, IdentError> {
    validate_witness_shape(m, k, l1, l2)?;
    validate_nodes(k, nodes)?;
    let beta = nodes
        .iter()
        .map(|&e| {
            let mut num = 1.0;
            for p in 1..l1 {
                num *= p as f64 * e + (m - 1 - p) as f64;
            }
            for p in 0..l2.saturating_sub(1) {
                num *= (m - l2 + p) as f64 * e + (l2 - 1 - p) as f64;
            }
            let den: f64 = nodes.iter().filter(|&&q| q != e).map(|&q| e - q).product();
            num / den
        })
        .collect();
    Ok(beta)
}

fn validate_witness_shape(m: usize, k: usize, l1: usize, l2: usize) -> Result<(), IdentError> {
    if l1 + 1 > m {
        return Err(IdentError::PrefixFamilyTooLong { l1, m });
    }
    if l2 < 1 || l2 > m {
        return Err(IdentError::SubsetFamilyOutOfRange { l2, m });
    }
    if 2 * k < l1 + l2 + 1 {
        return Err(IdentError::FamiliesTooRich { k, l1, l2 });
    }
    if m < 2 * k {
        return Err(IdentError::TooFewAlternatives { m, k });
    }
    Ok(())
}

fn validate_nodes(k: usize, nodes: &[f64]) -> Result<(), IdentError> {
    let expected = 2 * k;
    let distinct = nodes.iter().all(|&e| e > 0.0 && e < 1.0)
        && nodes.iter().tuple_windows().all(|(a, b)| a < b);
    if nodes.len() != expected || !distinct {
        return Err(IdentError::BadNodes { expected });
    }
    Ok(())
}

/// A pair of distinct `k`-component mixtures with identical ranked
/// top-`l1` and `l2`-way marginals.
#[derive(Debug, Clone)]
pub struct Witness {
    /// Alternative-set size.
    pub m: usize,
    /// Components per mixture.
    pub k: usize,
    /// Largest ranked-prefix length the pair agrees on.
    pub l1: usize,
    /// Largest subset-ranking size the pair agrees on.
    pub l2: usize,
    /// The `2k` peak weights, ascending.
    pub nodes: Vec<f64>,
    /// Signed combination weights aligned with `nodes`; they alternate in
    /// sign and sum to zero.
    pub beta: Vec<f64>,
    /// The mixture built from the positive-weight nodes.
    pub mixture_a: MixtureParams,
    /// The mixture built from the negative-weight nodes.
    pub mixture_b: MixtureParams,
}

/// Builds a witness pair over `m` alternatives. `nodes` supplies the `2k`
/// peak weights (they are sorted ascending); by default they are evenly
/// spaced across `[0.1, 0.9]`.
pub fn build_witness(
    m: usize,
    k: usize,
    l1: usize,
    l2: usize,
    nodes: Option<&[f64]>,
) -> Result<Witness, IdentError> {
    validate_witness_shape(m, k, l1, l2)?;
    let mut nodes: Vec<f64> = match nodes {
        Some(e) => e.to_vec(),
        None => (0..2 * k)
            .map(|r| 0.1 + 0.8 * r as f64 / (2 * k - 1) as f64)
            .collect(),
    };
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("nodes must not be NaN"));
    let beta = beta_weights(m, k, l1, l2, &nodes)?;
    for (r, &b) in beta.iter().enumerate() {
        assert!(
            (b > 0.0) == (r % 2 == 1),
            "weights over sorted nodes must alternate in sign starting negative"
        );
    }
    let z_pos: f64 = beta.iter().filter(|&&b| b > 0.0).sum();
    let z_neg: f64 = -beta.iter().filter(|&&b| b < 0.0).sum::<f64>();
    let imbalance = (z_pos - z_neg).abs() / z_pos.max(z_neg);
    if imbalance > WITNESS_BALANCE_TOL {
        return Err(IdentError::IllConditioned { imbalance });
    }
    let side = |want_positive: bool, z: f64| -> Result<MixtureParams, IdentError> {
        let mut alpha = Vec::with_capacity(k);
        let mut components = Vec::with_capacity(k);
        for (&e, &b) in nodes.iter().zip(&beta) {
            if (b > 0.0) == want_positive {
                alpha.push(b.abs() / z);
                components.push(peaked_component(m, e)?);
            }
        }
        Ok(MixtureParams::new(alpha, components)?)
    };
    let mixture_a = side(true, z_pos)?;
    let mixture_b = side(false, z_neg)?;
    Ok(Witness { m, k, l1, l2, nodes, beta, mixture_a, mixture_b })
}

/// Largest absolute probability gap between the witness mixtures across
/// every marginal the pair is constructed to agree on: ranked top-`l` for
/// `l <= l1`, `l`-way for `l <= l2`, and the choice marginals the latter
/// imply.
pub fn witness_agreement(w: &Witness) -> Result<f64, IdentError> {
    guard_enum(w.m)?;
    let mut worst = 0.0f64;
    let mut check = |event: PartialOrder| -> Result<(), IdentError> {
        let gap = (mixture_partial_prob(&w.mixture_a, &event)?
            - mixture_partial_prob(&w.mixture_b, &event)?)
        .abs();
        worst = worst.max(gap);
        Ok(())
    };
    for l in 1..=w.l1 {
        for ranked in (1..=w.m).permutations(l) {
            check(PartialOrder::Top { ranked })?;
        }
    }
    for l in 1..=w.l2 {
        for ranked in (1..=w.m).permutations(l) {
            check(PartialOrder::Way { ranked })?;
        }
        for subset in (1..=w.m).combinations(l) {
            for &chosen in &subset {
                check(PartialOrder::Choice { subset: subset.clone(), chosen })?;
            }
        }
    }
    Ok(worst)
}

/// Searches the next marginal families up (ranked top-`(l1+1)`,
/// `(l2+1)`-way, choice-`(l2+1)`) for the event on which the witness
/// mixtures differ most, returning it with its gap. A decisively positive
/// gap shows the pair is a genuine counterexample, not one model written
/// two ways.
pub fn witness_separation(w: &Witness) -> Result<(PartialOrder, f64), IdentError> {
    guard_enum(w.m)?;
    let mut best: Option<(PartialOrder, f64)> = None;
    let mut check = |event: PartialOrder| -> Result<(), IdentError> {
        let gap = (mixture_partial_prob(&w.mixture_a, &event)?
            - mixture_partial_prob(&w.mixture_b, &event)?)
        .abs();
        if best.as_ref().is_none_or(|(_, g)| gap > *g) {
            best = Some((event, gap));
        }
        Ok(())
    };
    if w.l1 < w.m - 1 {
        for ranked in (1..=w.m).permutations(w.l1 + 1) {
            check(PartialOrder::Top { ranked })?;
        }
    }
    if w.l2 < w.m {
        for ranked in (1..=w.m).permutations(w.l2 + 1) {
            check(PartialOrder::Way { ranked })?;
        }
        for subset in (1..=w.m).combinations(w.l2 + 1) {
            for &chosen in &subset {
                check(PartialOrder::Choice { subset: subset.clone(), chosen })?;
            }
        }
    }
    best.ok_or(IdentError::FamiliesTooRich { k: w.k, l1: w.l1, l2: w.l2 })
}

fn guard_enum(m: usize) -> Result<(), IdentError> {
    if m > MAX_ENUM_M {
        return Err(IdentError::TooLarge { m, max: MAX_ENUM_M });
    }
    Ok(())
}

// ====== moment matrices and rank ======

/// The matrix of event probabilities across components: entry `(i, r)` is
/// the probability of `events[i]` under `components[r]`. Full column rank
/// over `2k` candidate components certifies the events separate
/// `k`-component mixtures.
pub fn moment_matrix(
    components: &[PLParams],
    events: &[PartialOrder],
) -> Result<DMatrix<f64>, IdentError> {
    let m = match components.first() {
        Some(c) => c.m(),
        None => return Err(IdentError::Model(ModelError::EmptyMixture)),
    };
    for c in components {
        if c.m() != m {
            return Err(IdentError::Model(ModelError::LengthMismatch {
                expected: m,
                got: c.m(),
            }));
        }
    }
    for e in events {
        e.validate(m)?;
    }
    let mut mat = DMatrix::zeros(events.len(), components.len());
    for (i, e) in events.iter().enumerate() {
        for (r, c) in components.iter().enumerate() {
            mat[(i, r)] = pl_partial_prob(c, e)?;
        }
    }
    Ok(mat)
}

/// Rank by singular-value thresholding: the number of singular values
/// exceeding `tol` times the largest one.
pub fn numerical_rank(matrix: &DMatrix<f64>, tol: f64) -> usize {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return 0;
    }
    let sv = matrix.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

// ====== marginal recovery ======

/// Rebuilds a two-position event probability from two choice
/// probabilities: the probability that `a` is ranked first and `b` second
/// within a subset equals the probability of choosing `b` from the subset
/// without `a`, minus that of choosing `b` from the full subset. Arguments
/// are those two choice probabilities, in that order. Differences below
/// `-tol` are rejected; tiny negatives inside the tolerance are clamped
/// to zero.
pub fn choice_to_top2(
    choice_without_first: f64,
    choice_with_first: f64,
    tol: f64,
) -> Result<f64, IdentError> {
    let diff = choice_without_first - choice_with_first;
    if diff < -tol {
        return Err(IdentError::NegativeProbability { value: diff, tol });
    }
    Ok(diff.max(0.0))
}

/// Exact probability that every member of `prefix[..prefix.len()-1]` is
/// ranked above the last entry of `prefix`, which in turn is ranked above
/// everything else, assembled purely from ranked top-`i`
/// (`i < prefix.len()`) and `(m - prefix.len() + 1)`-way marginals:
///
/// the pivot beats the whole complement if and only if everything above
/// the pivot comes from the preceding prefix members, so subtracting the
/// events that place the pivot higher leaves exactly this event. For
/// prefixes of length 1 or 2 it is the ranked top-1 or top-2 probability.
pub fn recover_prefix_event(
    mixture: &MixtureParams,
    prefix: &[usize],
) -> Result<f64, IdentError> {
    let m = mixture.m();
    guard_enum(m)?;
    let probe = PartialOrder::way(prefix.to_vec())?;
    probe.validate(m)?;
    let u = prefix.len();
    let pivot = prefix[u - 1];
    let above: Vec<usize> = prefix[..u - 1].to_vec();
    let below: Vec<usize> =
        (1..=m).filter(|a| !prefix.contains(a)).collect();

    let mut total = 0.0;
    for tail in below.iter().copied().permutations(below.len()) {
        let mut ranked = Vec::with_capacity(below.len() + 1);
        ranked.push(pivot);
        ranked.extend(tail);
        total += mixture_partial_prob(mixture, &PartialOrder::Way { ranked })?;
    }
    for i in 1..u {
        for head in above.iter().copied().permutations(i - 1) {
            let mut ranked = head;
            ranked.push(pivot);
            total -= mixture_partial_prob(mixture, &PartialOrder::Top { ranked })?;
        }
    }
    Ok(total)
}

/// Brute-force probability of the same composite event, for cross-checks:
/// sums full-ranking probabilities over every ranking that places all of
/// `prefix[..prefix.len()-1]` above the last prefix entry and that entry
/// above the rest.
pub fn prefix_event_prob_brute(
    mixture: &MixtureParams,
    prefix: &[usize],
) -> Result<f64, IdentError> {
    let m = mixture.m();
    let probe = PartialOrder::way(prefix.to_vec())?;
    probe.validate(m)?;
    let u = prefix.len();
    let pivot = prefix[u - 1];
    let mut total = 0.0;
    for order in all_linear_orders(m)? {
        let pos = order.positions();
        let pivot_pos = pos[pivot - 1];
        let ok = prefix[..u - 1].iter().all(|&a| pos[a - 1] < pivot_pos)
            && (1..=m)
                .filter(|a| !prefix.contains(a))
                .all(|a| pos[a - 1] > pivot_pos);
        if ok {
            for (alpha, c) in mixture.alpha().iter().zip(mixture.components()) {
                total += alpha * pl_linear_prob(c, &order)?;
            }
        }
    }
    Ok(total)
}
