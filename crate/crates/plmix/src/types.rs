//! Core domain types: orders, structures, parameters, profiles.
//!
//! Alternatives are identified by 1-based indices `1..=m`; the alternative
//! set itself is fully described by its size `m`. All types validate their
//! invariants on construction and keep a canonical internal form (choice
//! subsets sorted ascending), so equality and hashing of orders coincide
//! with semantic equality.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Tolerance for "sums to one" checks on probability vectors.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Invariant violation raised by the constructors in this module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A ranking or subset contained no alternatives.
    #[error("order contains no alternatives")]
    EmptyOrder,
    /// An alternative appeared twice in a ranking or subset.
    #[error("duplicate alternative a{index}")]
    DuplicateAlternative {
        /// The repeated 1-based alternative index.
        index: usize,
    },
    /// An index fell outside `1..=m`.
    #[error("alternative a{index} out of range for m={m}")]
    AlternativeOutOfRange {
        /// The offending 1-based index.
        index: usize,
        /// The alternative-set size it was checked against.
        m: usize,
    },
    /// A ranked top-`l` order must leave at least one alternative unranked.
    #[error("ranked top-{l} order invalid for m={m}: l must be in 1..={}", m - 1)]
    PrefixTooLong {
        /// Length of the ranked prefix.
        l: usize,
        /// The alternative-set size.
        m: usize,
    },
    /// The chosen alternative of a choice order must belong to its subset.
    #[error("chosen alternative a{chosen} is not in the choice subset")]
    ChosenNotInSubset {
        /// The offending 1-based index.
        chosen: usize,
    },
    /// Alternative sets need at least two alternatives.
    #[error("alternative count m={m} must be at least 2")]
    TooFewAlternatives {
        /// The offending size.
        m: usize,
    },
    /// A probability or weight fell outside its permitted range.
    #[error("weight {value} outside the open interval (0, 1]")]
    WeightOutOfRange {
        /// The offending value.
        value: f64,
    },
    /// A probability vector failed to sum to one.
    #[error("weights sum to {sum}, expected 1 within {PROB_SUM_TOL:e}")]
    WeightSumDeviation {
        /// The observed sum.
        sum: f64,
    },
    /// Two parallel vectors disagreed in length.
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch {
        /// Required length.
        expected: usize,
        /// Observed length.
        got: usize,
    },
    /// A distribution had no entries.
    #[error("distribution has no entries")]
    EmptyDistribution,
    /// A mixture had no components.
    #[error("mixture has no components")]
    EmptyMixture,
    /// A ranking was not a permutation of `1..=m`.
    #[error("ranking is not a permutation of 1..={m}")]
    NotAPermutation {
        /// The alternative-set size.
        m: usize,
    },
}

// ====== linear orders ======

/// A full ranking of all `m` alternatives, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearOrder {
    ranking: Vec<usize>,
}

impl LinearOrder {
    /// Builds a linear order from a permutation of `1..=ranking.len()`.
    pub fn new(ranking: Vec<usize>) -> Result<Self, ModelError> {
        let m = ranking.len();
        if m < 2 {
            return Err(ModelError::TooFewAlternatives { m });
        }
        let mut seen = vec![false; m];
        for &a in &ranking {
            if a < 1 || a > m {
                return Err(ModelError::NotAPermutation { m });
            }
            if seen[a - 1] {
                return Err(ModelError::DuplicateAlternative { index: a });
            }
            seen[a - 1] = true;
        }
        Ok(Self { ranking })
    }

    /// Number of alternatives.
    pub fn m(&self) -> usize {
        self.ranking.len()
    }

    /// The ranking, most preferred first.
    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    /// Position lookup: entry `a - 1` is the 0-based rank of alternative `a`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.ranking.len()];
        for (p, &a) in self.ranking.iter().enumerate() {
            pos[a - 1] = p;
        }
        pos
    }

    /// Whether this full ranking is consistent with (extends) `order`.
    pub fn extends(&self, order: &PartialOrder) -> bool {
        order.extended_by_positions(&self.positions())
    }
}

impl fmt::Display for LinearOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ranking(f, &self.ranking)
    }
}

fn write_ranking(f: &mut fmt::Formatter<'_>, ranked: &[usize]) -> fmt::Result {
    for (i, a) in ranked.iter().enumerate() {
        if i > 0 {
            write!(f, ">")?;
        }
        write!(f, "a{a}")?;
    }
    Ok(())
}

// ====== partial orders ======

/// A structured partial order over the alternative set.
///
/// The three shapes are the observation types this crate supports. Fields
/// hold 1-based alternative indices; `Choice::subset` is kept sorted
/// ascending by every constructor in this crate, which makes derived
/// equality semantic equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartialOrder {
    /// Ranked top-`l`: the `l` best alternatives in order, everything else
    /// tied below them. Requires `1 <= l <= m - 1`.
    Top {
        /// The ranked prefix, most preferred first.
        ranked: Vec<usize>,
    },
    /// An `l`-way order: a full ranking of an `l`-element subset, silent
    /// about alternatives outside the subset. Requires `1 <= l <= m`.
    Way {
        /// The subset members, most preferred first.
        ranked: Vec<usize>,
    },
    /// A choice: the single best alternative of a subset. Requires
    /// `1 <= subset.len() <= m`.
    Choice {
        /// Subset offered, sorted ascending.
        subset: Vec<usize>,
        /// The alternative chosen from `subset`.
        chosen: usize,
    },
}

fn check_distinct_positive(entries: &[usize]) -> Result<(), ModelError> {
    if entries.is_empty() {
        return Err(ModelError::EmptyOrder);
    }
    let mut sorted: Vec<usize> = entries.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(ModelError::DuplicateAlternative { index: w[0] });
        }
    }
    if sorted[0] < 1 {
        return Err(ModelError::AlternativeOutOfRange { index: sorted[0], m: 0 });
    }
    Ok(())
}

impl PartialOrder {
    /// Builds a ranked top-`l` order from the ranked prefix.
    pub fn top(ranked: Vec<usize>) -> Result<Self, ModelError> {
        check_distinct_positive(&ranked)?;
        Ok(Self::Top { ranked })
    }

    /// Builds an `l`-way order from the subset ranking.
    pub fn way(ranked: Vec<usize>) -> Result<Self, ModelError> {
        check_distinct_positive(&ranked)?;
        Ok(Self::Way { ranked })
    }

    /// Builds a choice order; the subset is sorted into canonical form.
    pub fn choice(mut subset: Vec<usize>, chosen: usize) -> Result<Self, ModelError> {
        check_distinct_positive(&subset)?;
        if !subset.contains(&chosen) {
            return Err(ModelError::ChosenNotInSubset { chosen });
        }
        subset.sort_unstable();
        Ok(Self::Choice { subset, chosen })
    }

    /// The order's size parameter `l` (prefix length or subset size).
    pub fn l(&self) -> usize {
        match self {
            Self::Top { ranked } | Self::Way { ranked } => ranked.len(),
            Self::Choice { subset, .. } => subset.len(),
        }
    }

    /// Checks the order against an alternative-set size `m`.
    pub fn validate(&self, m: usize) -> Result<(), ModelError> {
        if m < 2 {
            return Err(ModelError::TooFewAlternatives { m });
        }
        let entries: &[usize] = match self {
            Self::Top { ranked } | Self::Way { ranked } => ranked,
            Self::Choice { subset, .. } => subset,
        };
        for &a in entries {
            if a < 1 || a > m {
                return Err(ModelError::AlternativeOutOfRange { index: a, m });
            }
        }
        match self {
            Self::Top { ranked } if ranked.len() > m - 1 => {
                Err(ModelError::PrefixTooLong { l: ranked.len(), m })
            }
            _ => Ok(()),
        }
    }

    /// The structure (shape plus subset) this order instantiates.
    pub fn structure(&self) -> StructureId {
        match self {
            Self::Top { ranked } => StructureId::Top { l: ranked.len() },
            Self::Way { ranked } => {
                let mut subset = ranked.clone();
                subset.sort_unstable();
                StructureId::Way { subset }
            }
            Self::Choice { subset, .. } => StructureId::Choice { subset: subset.clone() },
        }
    }

    /// `extends` check against a precomputed position table (see
    /// [`LinearOrder::positions`]); useful when one ranking is tested
    /// against many orders.
    pub fn extended_by_positions(&self, pos: &[usize]) -> bool {
        match self {
            Self::Top { ranked } => ranked
                .iter()
                .enumerate()
                .all(|(p, &a)| pos.get(a - 1) == Some(&p)),
            Self::Way { ranked } => ranked
                .windows(2)
                .all(|w| pos[w[0] - 1] < pos[w[1] - 1]),
            Self::Choice { subset, chosen } => {
                let c = pos[chosen - 1];
                subset.iter().all(|&a| a == *chosen || c < pos[a - 1])
            }
        }
    }
}

impl fmt::Display for PartialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Top { ranked } => {
                write!(f, "top(")?;
                write_ranking(f, ranked)?;
                write!(f, ">rest)")
            }
            Self::Way { ranked } => {
                write!(f, "{}-way(", ranked.len())?;
                write_ranking(f, ranked)?;
                write!(f, ")")
            }
            Self::Choice { subset, chosen } => {
                write!(f, "choice({{")?;
                for (i, a) in subset.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "a{a}")?;
                }
                write!(f, "}}->a{chosen})")
            }
        }
    }
}

// ====== structures ======

/// A structure: the shape of an observation, independent of its outcome.
///
/// Two orders share a structure exactly when they could have been produced
/// by projecting onto the same shape and subset. Subsets are sorted
/// ascending; the derived ordering makes map iteration deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructureId {
    /// Ranked top-`l` over the full alternative set.
    Top {
        /// Prefix length.
        l: usize,
    },
    /// Full ranking of a subset.
    Way {
        /// Subset members, sorted ascending.
        subset: Vec<usize>,
    },
    /// Single choice from a subset.
    Choice {
        /// Subset members, sorted ascending.
        subset: Vec<usize>,
    },
}

impl StructureId {
    /// Builds an `l`-way structure, sorting the subset.
    pub fn way(mut subset: Vec<usize>) -> Result<Self, ModelError> {
        check_distinct_positive(&subset)?;
        subset.sort_unstable();
        Ok(Self::Way { subset })
    }

    /// Builds a choice structure, sorting the subset.
    pub fn choice(mut subset: Vec<usize>) -> Result<Self, ModelError> {
        check_distinct_positive(&subset)?;
        subset.sort_unstable();
        Ok(Self::Choice { subset })
    }

    /// The structure's size parameter `l`.
    pub fn l(&self) -> usize {
        match self {
            Self::Top { l } => *l,
            Self::Way { subset } | Self::Choice { subset } => subset.len(),
        }
    }

    /// Checks the structure against an alternative-set size `m`.
    pub fn validate(&self, m: usize) -> Result<(), ModelError> {
        if m < 2 {
            return Err(ModelError::TooFewAlternatives { m });
        }
        match self {
            Self::Top { l } => {
                if *l < 1 || *l > m - 1 {
                    return Err(ModelError::PrefixTooLong { l: *l, m });
                }
            }
            Self::Way { subset } | Self::Choice { subset } => {
                check_distinct_positive(subset)?;
                for &a in subset {
                    if a > m {
                        return Err(ModelError::AlternativeOutOfRange { index: a, m });
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for StructureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Top { l } => write!(f, "top-{l}"),
            Self::Way { subset } => {
                write!(f, "{}-way{{", subset.len())?;
                write_subset(f, subset)?;
                write!(f, "}}")
            }
            Self::Choice { subset } => {
                write!(f, "choice-{}{{", subset.len())?;
                write_subset(f, subset)?;
                write!(f, "}}")
            }
        }
    }
}

fn write_subset(f: &mut fmt::Formatter<'_>, subset: &[usize]) -> fmt::Result {
    for (i, a) in subset.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "a{a}")?;
    }
    Ok(())
}

// ====== structure distributions ======

/// A probability distribution over structures: which observation shape a
/// datum takes, drawn independently of the ranking itself.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureDistribution {
    entries: BTreeMap<StructureId, f64>,
}

impl StructureDistribution {
    /// Builds a distribution; entries must be positive and sum to one
    /// within [`PROB_SUM_TOL`]. Structure-vs-model compatibility (index
    /// ranges, overlap rules) is checked separately by
    /// [`validate_structure_set`].
    pub fn new(entries: BTreeMap<StructureId, f64>) -> Result<Self, ModelError> {
        if entries.is_empty() {
            return Err(ModelError::EmptyDistribution);
        }
        let mut sum = 0.0;
        for &p in entries.values() {
            if !p.is_finite() || p <= 0.0 || p > 1.0 {
                return Err(ModelError::WeightOutOfRange { value: p });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(ModelError::WeightSumDeviation { sum });
        }
        Ok(Self { entries })
    }

    /// Builds a distribution from `(structure, probability)` pairs,
    /// accumulating the probability of repeated structures.
    pub fn from_entries(
        pairs: impl IntoIterator<Item = (StructureId, f64)>,
    ) -> Result<Self, ModelError> {
        let mut entries: BTreeMap<StructureId, f64> = BTreeMap::new();
        for (s, p) in pairs {
            *entries.entry(s).or_insert(0.0) += p;
        }
        Self::new(entries)
    }

    /// Iterates entries in the deterministic structure order.
    pub fn entries(&self) -> impl Iterator<Item = (&StructureId, f64)> {
        self.entries.iter().map(|(s, &p)| (s, p))
    }

    /// Probability of a structure, if present.
    pub fn get(&self, s: &StructureId) -> Option<f64> {
        self.entries.get(s).copied()
    }

    /// Number of structures in the support.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether the support is empty (never true for a constructed value).
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One rule violated by a structure distribution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureSetViolation {
    /// Two structures carry the same information about the same subset and
    /// may not coexist: ranked top-(m-1) with the full m-way order, or a
    /// 2-way order with the choice over the same pair.
    #[error("overlapping structures {first} and {second}")]
    Overlap {
        /// First structure of the overlapping pair.
        first: StructureId,
        /// Second structure of the overlapping pair.
        second: StructureId,
    },
    /// An entry's probability was outside `(0, 1]`.
    #[error("structure {structure} has non-positive probability {prob}")]
    NonPositive {
        /// The offending structure.
        structure: StructureId,
        /// Its probability.
        prob: f64,
    },
    /// The probabilities did not sum to one.
    #[error("probabilities sum to {sum}, expected 1 within {PROB_SUM_TOL:e}")]
    SumDeviation {
        /// The observed sum.
        sum: f64,
    },
    /// A structure was malformed for the given alternative-set size.
    #[error("structure {structure} invalid: {source}")]
    BadStructure {
        /// The offending structure.
        structure: StructureId,
        /// The underlying shape error.
        source: ModelError,
    },
}

/// All rules violated by a structure distribution, reported together.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid structure set: {}", violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct StructureSetError {
    /// Every violated rule, in detection order.
    pub violations: Vec<StructureSetViolation>,
}

/// Checks a structure distribution against the full model rules for an
/// alternative set of size `m`: every structure well-formed, probabilities
/// positive and summing to one, and no pair of structures that would carry
/// identical information (ranked top-(m-1) alongside the full m-way order,
/// or a 2-way order alongside the choice over the same pair). Every
/// violated rule is reported, not just the first.
pub fn validate_structure_set(
    phi: &StructureDistribution,
    m: usize,
) -> Result<(), StructureSetError> {
    let mut violations = Vec::new();
    let mut sum = 0.0;
    for (s, p) in phi.entries() {
        if !p.is_finite() || p <= 0.0 || p > 1.0 {
            violations.push(StructureSetViolation::NonPositive { structure: s.clone(), prob: p });
        }
        sum += p;
        if let Err(source) = s.validate(m) {
            violations.push(StructureSetViolation::BadStructure { structure: s.clone(), source });
        }
    }
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        violations.push(StructureSetViolation::SumDeviation { sum });
    }
    // Overlap rule 1: ranked top-(m-1) and the full m-way order.
    let top_m1 = StructureId::Top { l: m.saturating_sub(1) };
    let full_way = StructureId::Way { subset: (1..=m).collect() };
    if phi.get(&top_m1).is_some() && phi.get(&full_way).is_some() {
        violations.push(StructureSetViolation::Overlap { first: top_m1, second: full_way });
    }
    // Overlap rule 2: a 2-way order and the choice over the same pair.
    for (s, _) in phi.entries() {
        if let StructureId::Way { subset } = s {
            if subset.len() == 2 {
                let twin = StructureId::Choice { subset: subset.clone() };
                if phi.get(&twin).is_some() {
                    violations.push(StructureSetViolation::Overlap {
                        first: s.clone(),
                        second: twin,
                    });
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(StructureSetError { violations })
    }
}

// ====== model parameters ======

/// Parameters of a single Plackett-Luce model: one positive weight per
/// alternative, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PLParams {
    theta: Vec<f64>,
}

impl PLParams {
    /// Builds parameters from weights in `(0, 1)` summing to one within
    /// [`PROB_SUM_TOL`].
    pub fn new(theta: Vec<f64>) -> Result<Self, ModelError> {
        if theta.len() < 2 {
            return Err(ModelError::TooFewAlternatives { m: theta.len() });
        }
        let mut sum = 0.0;
        for &t in &theta {
            if !t.is_finite() || t <= 0.0 || t >= 1.0 {
                return Err(ModelError::WeightOutOfRange { value: t });
            }
            sum += t;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(ModelError::WeightSumDeviation { sum });
        }
        Ok(Self { theta })
    }

    /// Number of alternatives.
    pub fn m(&self) -> usize {
        self.theta.len()
    }

    /// All weights, indexed by alternative minus one.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Weight of alternative `a` (1-based).
    pub fn get(&self, a: usize) -> f64 {
        self.theta[a - 1]
    }
}

/// Parameters of a `k`-component Plackett-Luce mixture, optionally paired
/// with the structure distribution that governs how observations are
/// projected.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    alpha: Vec<f64>,
    components: Vec<PLParams>,
    phi: Option<StructureDistribution>,
}

impl MixtureParams {
    /// Builds a mixture from positive component weights summing to one and
    /// equally sized components.
    pub fn new(alpha: Vec<f64>, components: Vec<PLParams>) -> Result<Self, ModelError> {
        if components.is_empty() {
            return Err(ModelError::EmptyMixture);
        }
        if alpha.len() != components.len() {
            return Err(ModelError::LengthMismatch {
                expected: components.len(),
                got: alpha.len(),
            });
        }
        let mut sum = 0.0;
        for &a in &alpha {
            if !a.is_finite() || a <= 0.0 || a > 1.0 {
                return Err(ModelError::WeightOutOfRange { value: a });
            }
            sum += a;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(ModelError::WeightSumDeviation { sum });
        }
        let m = components[0].m();
        for c in &components[1..] {
            if c.m() != m {
                return Err(ModelError::LengthMismatch { expected: m, got: c.m() });
            }
        }
        Ok(Self { alpha, components, phi: None })
    }

    /// Attaches a structure distribution.
    pub fn with_phi(mut self, phi: StructureDistribution) -> Self {
        self.phi = Some(phi);
        self
    }

    /// Number of mixture components.
    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    /// Number of alternatives.
    pub fn m(&self) -> usize {
        self.components[0].m()
    }

    /// Component weights.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// All component parameters.
    pub fn components(&self) -> &[PLParams] {
        &self.components
    }

    /// Parameters of component `r` (0-based).
    pub fn component(&self, r: usize) -> &PLParams {
        &self.components[r]
    }

    /// The attached structure distribution, if any.
    pub fn phi(&self) -> Option<&StructureDistribution> {
        self.phi.as_ref()
    }
}

// ====== profiles ======

/// A dataset: partial orders observed over a common alternative set.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    m: usize,
    orders: Vec<PartialOrder>,
}

impl Profile {
    /// Builds a profile, validating every order against `m`.
    pub fn new(m: usize, orders: Vec<PartialOrder>) -> Result<Self, ModelError> {
        if m < 2 {
            return Err(ModelError::TooFewAlternatives { m });
        }
        for o in &orders {
            o.validate(m)?;
        }
        Ok(Self { m, orders })
    }

    /// Number of alternatives.
    pub fn m(&self) -> usize {
        self.m
    }

    /// The observed orders.
    pub fn orders(&self) -> &[PartialOrder] {
        &self.orders
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.orders.len()
    }

    /// Whether the profile has no observations.
    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn top(ranked: &[usize]) -> PartialOrder {
        PartialOrder::top(ranked.to_vec()).expect("valid top order")
    }

    fn way(ranked: &[usize]) -> PartialOrder {
        PartialOrder::way(ranked.to_vec()).expect("valid way order")
    }

    fn choice(subset: &[usize], chosen: usize) -> PartialOrder {
        PartialOrder::choice(subset.to_vec(), chosen).expect("valid choice order")
    }

    #[test]
    fn linear_order_must_be_permutation() {
        assert!(LinearOrder::new(vec![2, 3, 4, 1]).is_ok());
        assert_eq!(
            LinearOrder::new(vec![1, 2, 2, 4]),
            Err(ModelError::DuplicateAlternative { index: 2 })
        );
        assert_eq!(LinearOrder::new(vec![1, 2, 5, 4]), Err(ModelError::NotAPermutation { m: 4 }));
    }

    #[test]
    fn order_constructors_enforce_shape() {
        assert_eq!(
            PartialOrder::way(vec![3, 3, 1]),
            Err(ModelError::DuplicateAlternative { index: 3 })
        );
        assert_eq!(
            PartialOrder::choice(vec![1, 2, 3], 4),
            Err(ModelError::ChosenNotInSubset { chosen: 4 })
        );
        // Choice subsets are canonicalized, so equality is semantic.
        assert_eq!(choice(&[3, 1, 2], 3), choice(&[1, 2, 3], 3));
    }

    #[test]
    fn validation_against_m() {
        // A ranked prefix covering all m alternatives is not a top order.
        assert_eq!(
            top(&[2, 3, 4, 1]).validate(4),
            Err(ModelError::PrefixTooLong { l: 4, m: 4 })
        );
        assert!(top(&[2, 3, 4]).validate(4).is_ok());
        assert_eq!(
            way(&[5, 1]).validate(4),
            Err(ModelError::AlternativeOutOfRange { index: 5, m: 4 })
        );
        // A top order with l = m - 1 is stored as given, not canonicalized
        // into anything else.
        let o = top(&[2, 3, 4]);
        assert_eq!(o, PartialOrder::Top { ranked: vec![2, 3, 4] });
    }

    #[test]
    fn extends_matches_each_shape() {
        let r = LinearOrder::new(vec![2, 3, 4, 1]).expect("valid ranking");
        assert!(r.extends(&top(&[2, 3])));
        assert!(!r.extends(&top(&[3, 2])));
        assert!(!r.extends(&top(&[2, 4])));
        assert!(r.extends(&way(&[3, 4, 1])));
        assert!(!r.extends(&way(&[3, 1, 4])));
        assert!(r.extends(&choice(&[1, 3, 4], 3)));
        assert!(!r.extends(&choice(&[1, 3, 4], 4)));
    }

    #[test]
    fn structures_of_orders() {
        assert_eq!(top(&[2, 3]).structure(), StructureId::Top { l: 2 });
        assert_eq!(way(&[3, 4, 1]).structure(), StructureId::Way { subset: vec![1, 3, 4] });
        assert_eq!(
            choice(&[1, 2, 3], 3).structure(),
            StructureId::Choice { subset: vec![1, 2, 3] }
        );
    }

    #[test]
    fn structure_distribution_validates_probabilities() {
        let entries = BTreeMap::from([
            (StructureId::Top { l: 2 }, 0.5),
            (StructureId::Top { l: 3 }, 0.6),
        ]);
        assert!(matches!(
            StructureDistribution::new(entries),
            Err(ModelError::WeightSumDeviation { .. })
        ));
        let entries = BTreeMap::from([
            (StructureId::Top { l: 2 }, 0.5),
            (StructureId::Top { l: 3 }, 0.5),
        ]);
        assert!(StructureDistribution::new(entries).is_ok());
    }

    #[test]
    fn overlap_rules_are_rejected_with_full_reports() {
        // Ranked top-(m-1) plus the full m-way order.
        let phi = StructureDistribution::from_entries([
            (StructureId::Top { l: 3 }, 0.5),
            (StructureId::Way { subset: vec![1, 2, 3, 4] }, 0.5),
        ])
        .expect("probabilities are valid");
        let err = validate_structure_set(&phi, 4).expect_err("overlap must be rejected");
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, StructureSetViolation::Overlap { .. })));

        // 2-way plus choice-2 on the same pair.
        let phi = StructureDistribution::from_entries([
            (StructureId::Way { subset: vec![1, 2] }, 0.5),
            (StructureId::Choice { subset: vec![1, 2] }, 0.5),
        ])
        .expect("probabilities are valid");
        let err = validate_structure_set(&phi, 4).expect_err("overlap must be rejected");
        assert_eq!(err.violations.len(), 1);

        // Same pair, different shapes that do not overlap.
        let phi = StructureDistribution::from_entries([
            (StructureId::Top { l: 1 }, 0.5),
            (StructureId::Way { subset: vec![1, 2] }, 0.5),
        ])
        .expect("probabilities are valid");
        assert!(validate_structure_set(&phi, 4).is_ok());
    }

    #[test]
    fn validate_reports_every_violation() {
        let phi = StructureDistribution {
            entries: BTreeMap::from([
                (StructureId::Way { subset: vec![1, 2] }, 0.4),
                (StructureId::Choice { subset: vec![1, 2] }, 0.4),
                (StructureId::Top { l: 9 }, 0.4),
            ]),
        };
        let err = validate_structure_set(&phi, 4).expect_err("multiple violations");
        assert!(err.violations.len() >= 3);
    }

    #[test]
    fn pl_params_validate_weights() {
        assert!(PLParams::new(vec![0.1, 0.2, 0.3, 0.4]).is_ok());
        assert!(matches!(
            PLParams::new(vec![0.5, 0.5, 0.1]),
            Err(ModelError::WeightSumDeviation { .. })
        ));
        assert!(matches!(
            PLParams::new(vec![0.0, 0.5, 0.5]),
            Err(ModelError::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn mixture_params_validate_shape() {
        let c1 = PLParams::new(vec![0.1, 0.2, 0.3, 0.4]).expect("valid params");
        let c2 = PLParams::new(vec![0.2, 0.2, 0.3, 0.3]).expect("valid params");
        let mix = MixtureParams::new(vec![0.2, 0.8], vec![c1.clone(), c2]).expect("valid mixture");
        assert_eq!(mix.k(), 2);
        assert_eq!(mix.m(), 4);
        let c3 = PLParams::new(vec![0.5, 0.5]).expect("valid params");
        assert!(matches!(
            MixtureParams::new(vec![0.2, 0.8], vec![c1, c3]),
            Err(ModelError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn profile_validates_orders() {
        let orders = vec![top(&[2, 3]), choice(&[1, 2, 3], 3)];
        assert!(Profile::new(4, orders.clone()).is_ok());
        // Both orders happen to fit m = 3 as well; m = 2 breaks both.
        assert!(Profile::new(3, orders.clone()).is_ok());
        assert!(matches!(
            Profile::new(2, orders),
            Err(ModelError::AlternativeOutOfRange { index: 3, m: 2 })
        ));
    }
}
