//! Mixtures of Plackett-Luce models over structured partial orders.
//!
//! A Plackett-Luce model over `m` alternatives assigns each alternative a
//! positive weight; the weights sum to one and the probability of a full
//! ranking is the product of sequential-choice probabilities. This crate
//! works with mixtures of `k` such models observed through three kinds of
//! structured partial orders rather than full rankings:
//!
//! * ranked top-`l` orders: the best `l` alternatives in order, the rest
//!   unranked below them,
//! * `l`-way orders: a full ranking of an `l`-element subset, silent about
//!   everything outside the subset,
//! * choice-`l` orders: the single best alternative of an `l`-element
//!   subset.
//!
//! A dataset mixes those shapes according to a distribution over
//! "structures" (shape plus subset), and the generative model first draws a
//! full ranking from the mixture, then projects it onto an independently
//! drawn structure.
//!
//! The crate provides:
//!
//! * exact marginal probabilities for every order shape, with a
//!   brute-force enumeration oracle for cross-checking ([`prob`]),
//! * seeded samplers and the two standard synthetic-study structure
//!   distributions ([`sample`]),
//! * a two-stage generalized-method-of-moments estimator for `k = 2`
//!   mixtures, built on a single counting pass over the data
//!   ([`estimate`]),
//! * identifiability diagnostics: explicit witness pairs of mixtures that
//!   agree on all low-order marginals, moment-matrix rank checks, and
//!   marginal-recovery identities ([`ident`]),
//! * a benchmark harness measuring estimation error against sample size
//!   ([`bench`]),
//! * JSON-Lines profile serialization and report formats ([`io`]).
//!
//! The `plmix` binary exposes the same capabilities as subcommands; the
//! `examples/` directory demonstrates each capability as a small runnable
//! program.

#![warn(missing_docs)]

pub mod bench;
pub mod estimate;
pub mod ident;
pub mod io;
pub mod optim;
pub mod prob;
pub mod sample;
pub mod types;

pub use bench::{run_experiment, ExperimentConfig, Setting};
pub use estimate::{fit, mse, DataMode, FitConfig, FitReport, MomentSet, Selector};
pub use ident::{build_witness, witness_agreement, witness_separation, Witness};
pub use prob::{brute_force_partial_prob, mixture_partial_prob, model_partial_prob, pl_partial_prob};
pub use sample::{sample_linear, sample_profile, setup_choice234, setup_top2_2way};
pub use types::{
    LinearOrder, MixtureParams, ModelError, PartialOrder, PLParams, Profile, StructureDistribution,
    StructureId,
};
