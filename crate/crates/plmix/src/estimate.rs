//! Two-stage method-of-moments estimation of a two-component mixture.
//!
//! Stage 1 makes a single pass over the data, simultaneously estimating the
//! structure distribution by empirical frequency and counting how often
//! each selected moment event occurs. Stage 2 minimizes a weighted
//! least-squares criterion over the mixture parameters: for each moment
//! event, the squared gap between the candidate's marginal probability and
//! the observed frequency rescaled by the event's structure frequency.
//!
//! Two moment selectors are provided, one per synthetic-study setup
//! (ranked top-2 plus pairwise events, and choice events over covering
//! groups of four), plus a ranked top-3 selector that serves as the
//! classical baseline when fitting from full rankings. When the data are
//! full rankings, each ranking counts toward every event it extends and
//! the structure rescaling is bypassed.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::optim::{NelderMead, SimplexBlocks};
use crate::prob::{mixture_partial_prob, ProbError};
use crate::sample::derive_seed;
use crate::types::{
    MixtureParams, ModelError, PLParams, PartialOrder, Profile, StructureDistribution,
    StructureId,
};
use thiserror::Error;

/// Number of mixture components the fitter estimates.
pub const FIT_K: usize = 2;

/// Error raised by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    /// The profile contained no observations.
    #[error("profile is empty")]
    EmptyProfile,
    /// Every moment event's structure was unobserved, leaving no usable
    /// moment conditions.
    #[error("no moment event's structure appears in the data")]
    NoMomentData,
    /// The selector requires a larger alternative set.
    #[error("selector requires m >= 4, got {m}")]
    TooFewAlternatives {
        /// The offending size.
        m: usize,
    },
    /// Linear-order mode requires every observation to determine a full
    /// ranking.
    #[error("observation #{index} does not determine a full ranking")]
    NotFullRanking {
        /// 0-based index of the offending observation.
        index: u64,
    },
    /// Mismatched alternative-set sizes or component counts.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Required value.
        expected: usize,
        /// Observed value.
        got: usize,
    },
    /// Invalid model construction input.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Probability evaluation failed.
    #[error(transparent)]
    Prob(#[from] ProbError),
}

// ====== moment selection ======

/// A moment condition: one partial order whose model probability is matched
/// against its observed frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEvent {
    /// The order whose probability is matched.
    pub event: PartialOrder,
    /// The event's structure, whose empirical frequency rescales the
    /// condition.
    pub structure: StructureId,
    /// Occurrences of exactly this order in the data (or of rankings
    /// extending it, in linear mode). Zero until counted.
    pub empirical_count: u64,
    /// Rescaling weight, the reciprocal of the structure's empirical
    /// frequency (1 in linear mode). One until counted.
    pub weight: f64,
}

impl MomentEvent {
    fn new(event: PartialOrder) -> Self {
        let structure = event.structure();
        Self { event, structure, empirical_count: 0, weight: 1.0 }
    }
}

/// The moment events a fit matches, in a fixed selector-defined order with
/// no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    /// The selector that produced this set.
    pub selector: Selector,
    /// Alternative-set size the events are defined over.
    pub m: usize,
    /// The events, in selector order.
    pub events: Vec<MomentEvent>,
}

impl MomentSet {
    /// The bare events, in selector order.
    pub fn orders(&self) -> Vec<PartialOrder> {
        self.events.iter().map(|e| e.event.clone()).collect()
    }
}

/// Built-in moment selectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    /// All ranked top-2 events except the lexicographically last, plus one
    /// direction of every pairwise event.
    Top2TwoWay,
    /// Choice events over the covering groups of four: per group, every
    /// choice event on a subset of the group except those choosing the
    /// subset's largest member.
    Choice4,
    /// Every ranked top-3 event; the classical baseline selector for
    /// full-ranking data.
    Top3,
}

impl Selector {
    /// Builds this selector's moment set over `m` alternatives.
    pub fn moments(self, m: usize) -> Result<MomentSet, FitError> {
        match self {
            Self::Top2TwoWay => select_moments_top2_2way(m),
            Self::Choice4 => select_moments_choice4(m),
            Self::Top3 => select_moments_top3(m),
        }
    }

    /// Stable identifier used in configs, reports, and file names.
    pub fn name(self) -> &'static str {
        match self {
            Self::Top2TwoWay => "top2_2way",
            Self::Choice4 => "choice4",
            Self::Top3 => "top3",
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top2_2way" => Ok(Self::Top2TwoWay),
            "choice4" => Ok(Self::Choice4),
            "top3" => Ok(Self::Top3),
            other => Err(format!("unknown selector {other:?}")),
        }
    }
}

/// Ranked top-2 events for every ordered pair except the lexicographically
/// last one (which is determined by the others), then one 2-way event per
/// unordered pair, ranked ascending. `m(m-1) - 1 + m(m-1)/2` events.
pub fn select_moments_top2_2way(m: usize) -> Result<MomentSet, FitError> {
    if m < 4 {
        return Err(FitError::TooFewAlternatives { m });
    }
    let mut events = Vec::with_capacity(m * (m - 1) - 1 + m * (m - 1) / 2);
    for i in 1..=m {
        for j in 1..=m {
            if i != j && !(i == m && j == m - 1) {
                events.push(MomentEvent::new(PartialOrder::Top { ranked: vec![i, j] }));
            }
        }
    }
    for i in 1..=m {
        for j in (i + 1)..=m {
            events.push(MomentEvent::new(PartialOrder::Way { ranked: vec![i, j] }));
        }
    }
    Ok(MomentSet { selector: Selector::Top2TwoWay, m, events })
}

/// Choice events over the covering groups of four: per group, the choice
/// events on the group itself, its triples, and its pairs, skipping in each
/// subset the event that chooses the largest member (it is determined by
/// the others). 17 events per group before cross-group deduplication.
pub fn select_moments_choice4(m: usize) -> Result<MomentSet, FitError> {
    let groups = crate::sample::choice_groups(m)?;
    let mut events = Vec::new();
    let mut seen: HashMap<PartialOrder, ()> = HashMap::new();
    let mut push = |subset: Vec<usize>, events: &mut Vec<MomentEvent>| {
        // All but the largest member as chosen outcomes.
        for &chosen in &subset[..subset.len() - 1] {
            let e = PartialOrder::Choice { subset: subset.clone(), chosen };
            if seen.insert(e.clone(), ()).is_none() {
                events.push(MomentEvent::new(e));
            }
        }
    };
    for g in &groups {
        let mut quad = g.to_vec();
        quad.sort_unstable();
        push(quad.clone(), &mut events);
        for skip in (0..4).rev() {
            // Triples in ascending lexicographic order: drop the largest
            // index first.
            let triple: Vec<usize> =
                quad.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &a)| a).collect();
            push(triple, &mut events);
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                push(vec![quad[i], quad[j]], &mut events);
            }
        }
    }
    Ok(MomentSet { selector: Selector::Choice4, m, events })
}

/// Every ranked top-3 event, in lexicographic order.
pub fn select_moments_top3(m: usize) -> Result<MomentSet, FitError> {
    if m < 4 {
        return Err(FitError::TooFewAlternatives { m });
    }
    let events = (1..=m)
        .permutations(3)
        .map(|ranked| MomentEvent::new(PartialOrder::Top { ranked }))
        .collect();
    Ok(MomentSet { selector: Selector::Top3, m, events })
}

// ====== stage 1: counting ======

/// How observations relate to moment events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    /// Observations are partial orders: an observation counts toward the
    /// event it equals, and conditions are rescaled by structure
    /// frequencies.
    Partial,
    /// Observations are full rankings (as m-way orders or ranked
    /// top-(m-1)): each counts toward every event it extends, with unit
    /// weights.
    Linear,
}

impl fmt::Display for DataMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Partial => "partial",
            Self::Linear => "linear",
        })
    }
}

impl FromStr for DataMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "partial" => Ok(Self::Partial),
            "linear" => Ok(Self::Linear),
            other => Err(format!("unknown data mode {other:?}")),
        }
    }
}

/// Output of the single counting pass: events with counts and weights
/// filled in, events whose structure never occurred, and the empirical
/// structure distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CountedMoments {
    /// Selector that produced the events.
    pub selector: Selector,
    /// Alternative-set size.
    pub m: usize,
    /// Observation count.
    pub n: u64,
    /// How the observations were counted.
    pub mode: DataMode,
    /// Usable moment events, in selector order, with `empirical_count` and
    /// `weight` populated.
    pub events: Vec<MomentEvent>,
    /// Events dropped because their structure was never observed (their
    /// condition would divide by zero).
    pub dropped: Vec<MomentEvent>,
    /// Empirical structure distribution (partial mode only).
    pub phi: Option<StructureDistribution>,
}

/// Estimates the structure distribution by empirical frequency.
pub fn estimate_phi(profile: &Profile) -> Result<StructureDistribution, FitError> {
    if profile.is_empty() {
        return Err(FitError::EmptyProfile);
    }
    let n = profile.len() as f64;
    let mut counts: BTreeMap<StructureId, u64> = BTreeMap::new();
    for o in profile.orders() {
        *counts.entry(o.structure()).or_insert(0) += 1;
    }
    Ok(StructureDistribution::from_entries(
        counts.into_iter().map(|(s, c)| (s, c as f64 / n)),
    )?)
}

/// Runs stage 1 in one pass over an order stream: counts observations,
/// structure frequencies, and event occurrences simultaneously. The stream
/// is consumed exactly once and nothing is buffered.
pub fn count_stream<I>(
    moments: &MomentSet,
    orders: I,
    mode: DataMode,
) -> Result<CountedMoments, FitError>
where
    I: IntoIterator,
    I::Item: Borrow<PartialOrder>,
{
    let m = moments.m;
    let index: HashMap<PartialOrder, usize> = moments
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.event.clone(), i))
        .collect();
    let mut counts = vec![0u64; moments.events.len()];
    let mut structure_counts: BTreeMap<StructureId, u64> = BTreeMap::new();
    let mut n = 0u64;
    for item in orders {
        let order = item.borrow();
        match mode {
            DataMode::Partial => {
                *structure_counts.entry(order.structure()).or_insert(0) += 1;
                if let Some(&i) = index.get(order) {
                    counts[i] += 1;
                }
            }
            DataMode::Linear => {
                let ranking = full_ranking(order, m)
                    .ok_or(FitError::NotFullRanking { index: n })?;
                let mut pos = vec![0usize; m];
                for (p, &a) in ranking.iter().enumerate() {
                    pos[a - 1] = p;
                }
                for (i, e) in moments.events.iter().enumerate() {
                    if e.event.extended_by_positions(&pos) {
                        counts[i] += 1;
                    }
                }
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(FitError::EmptyProfile);
    }

    let mut events = Vec::with_capacity(moments.events.len());
    let mut dropped = Vec::new();
    match mode {
        DataMode::Partial => {
            for (e, &c) in moments.events.iter().zip(&counts) {
                let mut e = e.clone();
                e.empirical_count = c;
                match structure_counts.get(&e.structure) {
                    Some(&sc) if sc > 0 => {
                        e.weight = n as f64 / sc as f64;
                        events.push(e);
                    }
                    _ => dropped.push(e),
                }
            }
            let phi = StructureDistribution::from_entries(
                structure_counts.into_iter().map(|(s, c)| (s, c as f64 / n as f64)),
            )?;
            Ok(CountedMoments {
                selector: moments.selector,
                m,
                n,
                mode,
                events,
                dropped,
                phi: Some(phi),
            })
        }
        DataMode::Linear => {
            for (e, &c) in moments.events.iter().zip(&counts) {
                let mut e = e.clone();
                e.empirical_count = c;
                e.weight = 1.0;
                events.push(e);
            }
            Ok(CountedMoments {
                selector: moments.selector,
                m,
                n,
                mode,
                events,
                dropped,
                phi: None,
            })
        }
    }
}

/// The full ranking an observation determines, if any: an m-way order is
/// one directly, a ranked top-(m-1) order pins the last place.
fn full_ranking(order: &PartialOrder, m: usize) -> Option<Vec<usize>> {
    match order {
        PartialOrder::Way { ranked } if ranked.len() == m => Some(ranked.clone()),
        PartialOrder::Top { ranked } if ranked.len() == m - 1 => {
            let mut present = vec![false; m];
            for &a in ranked {
                present[a - 1] = true;
            }
            let last = (1..=m).find(|&a| !present[a - 1])?;
            let mut full = ranked.clone();
            full.push(last);
            Some(full)
        }
        _ => None,
    }
}

// ====== stage 2: the objective and the fit ======

/// The weighted least-squares criterion at a candidate: over retained
/// events, the squared gap between the candidate's marginal probability of
/// the event and the rescaled empirical frequency
/// `count / (n * structure frequency)` (plain `count / n` in linear mode).
pub fn gmm_objective(
    candidate: &MixtureParams,
    counted: &CountedMoments,
) -> Result<f64, FitError> {
    if candidate.m() != counted.m {
        return Err(FitError::DimensionMismatch { expected: counted.m, got: candidate.m() });
    }
    let targets = prepare_targets(counted)?;
    Ok(eval_objective(candidate, &targets))
}

fn prepare_targets(counted: &CountedMoments) -> Result<Vec<(PartialOrder, f64)>, FitError> {
    if counted.events.is_empty() {
        return Err(FitError::NoMomentData);
    }
    Ok(counted
        .events
        .iter()
        .map(|e| {
            let target = (e.empirical_count as f64 / counted.n as f64) * e.weight;
            (e.event.clone(), target)
        })
        .collect())
}

fn eval_objective(candidate: &MixtureParams, targets: &[(PartialOrder, f64)]) -> f64 {
    let mut total = 0.0;
    for (event, target) in targets {
        let p = mixture_partial_prob(candidate, event)
            .expect("moment events are valid for the model's m");
        let gap = p - target;
        total += gap * gap;
    }
    total
}

/// Configuration of the stage-2 search.
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Independent random starts; the best final objective wins, ties going
    /// to the lowest start index.
    pub starts: usize,
    /// Floor mixed into every decoded weight, keeping estimates strictly
    /// inside their simplexes.
    pub epsilon: f64,
    /// Iteration budget per start.
    pub max_iters: usize,
    /// Per-start convergence threshold on the objective spread.
    pub tol: f64,
    /// Master seed; per-start seeds are derived from it.
    pub seed: u64,
    /// How observations are counted.
    pub mode: DataMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            starts: 10,
            epsilon: 1e-6,
            max_iters: 2000,
            tol: 1e-10,
            seed: 0,
            mode: DataMode::Partial,
        }
    }
}

/// One start's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct StartReport {
    /// Start index.
    pub start: usize,
    /// Final objective reached from this start.
    pub objective: f64,
    /// Iterations spent.
    pub iterations: usize,
}

/// Everything a fit produces.
#[derive(Debug, Clone)]
pub struct FitReport {
    /// The winning parameter estimate, with the empirical structure
    /// distribution attached in partial mode.
    pub estimate: MixtureParams,
    /// Objective value at the estimate.
    pub objective: f64,
    /// Per-start outcomes, in start order.
    pub starts: Vec<StartReport>,
    /// Wall-clock time of the whole fit, milliseconds.
    pub runtime_ms: f64,
    /// Master seed the search used.
    pub seed: u64,
    /// Observation count.
    pub n: u64,
    /// Moment events dropped because their structure was unobserved; a
    /// nonzero value flags a data/selector mismatch worth inspecting.
    pub dropped_events: usize,
    /// Squared parameter error against a reference, if one was supplied.
    pub mse: Option<f64>,
}

impl FitReport {
    /// Attaches the squared parameter error against a reference mixture.
    pub fn with_reference(mut self, truth: &MixtureParams) -> Result<Self, FitError> {
        self.mse = Some(mse(&self.estimate, truth)?);
        Ok(self)
    }
}

/// Fits a two-component mixture to a profile.
pub fn fit(profile: &Profile, selector: Selector, config: &FitConfig) -> Result<FitReport, FitError> {
    fit_stream(profile.m(), profile.orders().iter(), selector, config)
}

/// Fits a two-component mixture from an order stream, consuming it in a
/// single pass.
pub fn fit_stream<I>(
    m: usize,
    orders: I,
    selector: Selector,
    config: &FitConfig,
) -> Result<FitReport, FitError>
where
    I: IntoIterator,
    I::Item: Borrow<PartialOrder>,
{
    let started = Instant::now();
    let moments = selector.moments(m)?;
    let counted = count_stream(&moments, orders, config.mode)?;
    let targets = prepare_targets(&counted)?;

    let codec = SimplexBlocks::new(
        std::iter::once(FIT_K)
            .chain(std::iter::repeat_n(m, FIT_K))
            .collect(),
        config.epsilon,
    );
    let dim = codec.dim();
    let nm = NelderMead { max_iters: config.max_iters, tol: config.tol, step: 0.5 };
    let objective = |z: &[f64]| {
        let mix = decode_mixture(&codec, z);
        eval_objective(&mix, &targets)
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut starts = Vec::with_capacity(config.starts);
    for start in 0..config.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, start as u64));
        let z0: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let local = nm.minimize(objective, &z0);
        starts.push(StartReport { start, objective: local.value, iterations: local.iterations });
        let better = match &best {
            Some((v, _)) => local.value < *v,
            None => true,
        };
        if better {
            best = Some((local.value, local.x));
        }
    }
    let (objective_value, z) = best.expect("at least one start ran");
    let mut estimate = decode_mixture(&codec, &z);
    if let Some(phi) = &counted.phi {
        estimate = estimate.with_phi(phi.clone());
    }

    Ok(FitReport {
        estimate,
        objective: objective_value,
        starts,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        seed: config.seed,
        n: counted.n,
        dropped_events: counted.dropped.len(),
        mse: None,
    })
}

fn decode_mixture(codec: &SimplexBlocks, z: &[f64]) -> MixtureParams {
    let mut blocks = codec.decode(z).into_iter();
    let alpha = blocks.next().expect("alpha block");
    let components = blocks
        .map(|theta| PLParams::new(theta).expect("decoded weights lie in the simplex"))
        .collect();
    MixtureParams::new(alpha, components).expect("decoded weights lie in the simplex")
}

// ====== parameter error ======

/// Squared parameter distance between mixtures, minimized over component
/// relabelings: component weights and component parameters enter, any
/// attached structure distribution does not.
pub fn mse(estimate: &MixtureParams, truth: &MixtureParams) -> Result<f64, FitError> {
    if estimate.m() != truth.m() {
        return Err(FitError::DimensionMismatch { expected: truth.m(), got: estimate.m() });
    }
    if estimate.k() != truth.k() {
        return Err(FitError::DimensionMismatch { expected: truth.k(), got: estimate.k() });
    }
    let k = truth.k();
    let mut best = f64::INFINITY;
    for perm in (0..k).permutations(k) {
        let mut d = 0.0;
        for (r, &p) in perm.iter().enumerate() {
            let da = estimate.alpha()[p] - truth.alpha()[r];
            d += da * da;
            for (a, b) in estimate.component(p).theta().iter().zip(truth.component(r).theta()) {
                let dt = a - b;
                d += dt * dt;
            }
        }
        best = best.min(d);
    }
    Ok(best)
}
