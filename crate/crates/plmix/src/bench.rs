//! Synthetic-study harness: estimation error against sample size.
//!
//! Each trial draws a fresh random two-component ground truth, samples a
//! dataset of the trial's size under its setting, fits the matching
//! selector, and records the squared parameter error. Trials run in
//! parallel but every seed is derived from the experiment's master seed
//! and the trial's coordinates, so results are independent of scheduling.
//!
//! Settings pair a data shape with a selector: the two partial-order
//! setups fit the selector they were designed for, and the linear
//! settings fit the same selectors (plus a full top-3 baseline) from
//! complete rankings, which bounds how much the structured data give up.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::estimate::{fit, mse, DataMode, FitConfig, FitError, Selector};
use crate::sample::{
    derive_seed, random_mixture, sample_linear_profile, sample_profile, setup_choice234,
    setup_top2_2way, SampleError,
};

/// Error raised by the harness.
#[derive(Debug, Error)]
pub enum BenchError {
    /// A trial's fit failed.
    #[error("setting {setting}, n={n}, trial {trial}: {source}")]
    Trial {
        /// Setting name.
        setting: Setting,
        /// Sample size.
        n: u64,
        /// Trial index.
        trial: usize,
        /// The underlying failure.
        #[source]
        source: FitError,
    },
    /// Sampling failed.
    #[error(transparent)]
    Sample(#[from] SampleError),
    /// The experiment grid was empty.
    #[error("experiment needs at least one setting, one sample size, and one trial")]
    EmptyGrid,
    /// Output could not be written.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

/// A data-generation arm of the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Setting {
    /// Partial orders from the ranked-top-2 plus pairwise setup, fitted
    /// with the matching selector.
    Top2TwoWay,
    /// Partial orders from the choice-group setup, fitted with the choice
    /// selector.
    Choice234,
    /// Full rankings fitted with the ranked-top-2 plus pairwise selector.
    LinearTop2TwoWay,
    /// Full rankings fitted with the choice selector.
    LinearChoice234,
    /// Full rankings fitted with the all-top-3 baseline selector.
    LinearTop3,
}

impl Setting {
    /// Every setting, in canonical order.
    pub fn all() -> [Setting; 5] {
        [
            Self::Top2TwoWay,
            Self::Choice234,
            Self::LinearTop2TwoWay,
            Self::LinearChoice234,
            Self::LinearTop3,
        ]
    }

    /// Stable identifier used in configs and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Self::Top2TwoWay => "top2_2way",
            Self::Choice234 => "choice234",
            Self::LinearTop2TwoWay => "linear_top2_2way",
            Self::LinearChoice234 => "linear_choice234",
            Self::LinearTop3 => "linear_top3",
        }
    }

    /// The selector this setting fits with.
    pub fn selector(self) -> Selector {
        match self {
            Self::Top2TwoWay | Self::LinearTop2TwoWay => Selector::Top2TwoWay,
            Self::Choice234 | Self::LinearChoice234 => Selector::Choice4,
            Self::LinearTop3 => Selector::Top3,
        }
    }

    /// How this setting's data are counted.
    pub fn mode(self) -> DataMode {
        match self {
            Self::Top2TwoWay | Self::Choice234 => DataMode::Partial,
            _ => DataMode::Linear,
        }
    }

    /// Stable id mixed into per-trial seeds; independent of which settings
    /// an experiment happens to include.
    fn id(self) -> u64 {
        match self {
            Self::Top2TwoWay => 0,
            Self::Choice234 => 1,
            Self::LinearTop2TwoWay => 2,
            Self::LinearChoice234 => 3,
            Self::LinearTop3 => 4,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Setting::all()
            .into_iter()
            .find(|setting| setting.name() == s)
            .ok_or_else(|| format!("unknown setting {s:?}"))
    }
}

/// Experiment grid: every listed setting runs at every sample size for
/// the given number of trials.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Alternative-set size of the ground truths.
    pub m: usize,
    /// Settings to run.
    pub settings: Vec<Setting>,
    /// Sample sizes to run.
    pub n_grid: Vec<u64>,
    /// Trials per (setting, n) cell.
    pub trials: usize,
    /// Master seed; every trial's seed derives from it and the trial's
    /// coordinates.
    pub seed: u64,
    /// Fit template; its `seed` and `mode` fields are overridden per
    /// trial.
    pub fit: FitConfig,
}

impl ExperimentConfig {
    /// A small default grid over all settings.
    pub fn new(m: usize) -> Self {
        Self {
            m,
            settings: Setting::all().to_vec(),
            n_grid: vec![1_000, 10_000, 100_000],
            trials: 50,
            seed: 0,
            fit: FitConfig::default(),
        }
    }
}

/// One trial's outcome.
#[derive(Debug, Clone)]
pub struct TrialRow {
    /// The setting.
    pub setting: Setting,
    /// Sample size.
    pub n: u64,
    /// Trial index within the cell.
    pub trial: usize,
    /// Squared parameter error of the fit against the trial's truth.
    pub mse: f64,
    /// Fit wall-clock time, milliseconds.
    pub fit_runtime_ms: f64,
    /// Objective at the estimate.
    pub objective: f64,
    /// The trial's derived seed.
    pub seed: u64,
}

/// One (setting, n) cell's summary.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    /// The setting.
    pub setting: Setting,
    /// Sample size.
    pub n: u64,
    /// Mean squared parameter error over trials.
    pub mean_mse: f64,
    /// Lower edge of the 95% normal-approximation interval on the mean.
    pub ci_low: f64,
    /// Upper edge of the interval.
    pub ci_high: f64,
    /// Mean fit time, milliseconds.
    pub mean_runtime_ms: f64,
}

/// Full experiment output: per-trial rows and per-cell aggregates, both
/// sorted by (setting, n, trial).
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Every trial, sorted.
    pub trials: Vec<TrialRow>,
    /// Cell summaries, sorted.
    pub aggregates: Vec<AggregateRow>,
}

fn trial_seed(master: u64, setting: Setting, n: u64, trial: usize) -> u64 {
    let s = derive_seed(master, setting.id());
    let s = derive_seed(s, n);
    derive_seed(s, trial as u64)
}

fn run_trial(
    config: &ExperimentConfig,
    setting: Setting,
    n: u64,
    trial: usize,
) -> Result<TrialRow, BenchError> {
    let seed = trial_seed(config.seed, setting, n, trial);
    let wrap = |source: FitError| BenchError::Trial { setting, n, trial, source };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let truth = random_mixture(config.m, 2, &mut rng);
    let profile = match setting.mode() {
        DataMode::Partial => {
            let phi = match setting {
                Setting::Top2TwoWay => setup_top2_2way(config.m),
                Setting::Choice234 => setup_choice234(config.m),
                _ => unreachable!("only the two partial settings reach here"),
            }
            .map_err(|e| wrap(FitError::Model(e)))?;
            sample_profile(&truth.clone().with_phi(phi), n as usize, &mut rng)?
        }
        DataMode::Linear => sample_linear_profile(&truth, n as usize, &mut rng),
    };
    let fit_config = FitConfig {
        seed: derive_seed(seed, 1),
        mode: setting.mode(),
        ..config.fit.clone()
    };
    let report = fit(&profile, setting.selector(), &fit_config).map_err(wrap)?;
    let mse = mse(&report.estimate, &truth).map_err(wrap)?;
    Ok(TrialRow {
        setting,
        n,
        trial,
        mse,
        fit_runtime_ms: report.runtime_ms,
        objective: report.objective,
        seed,
    })
}

/// Runs the whole grid, parallelizing over trials. Output is
/// deterministic for a fixed config (runtimes aside).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, BenchError> {
    if config.settings.is_empty() || config.n_grid.is_empty() || config.trials == 0 {
        return Err(BenchError::EmptyGrid);
    }
    let mut tasks = Vec::new();
    for &setting in &config.settings {
        for &n in &config.n_grid {
            for trial in 0..config.trials {
                tasks.push((setting, n, trial));
            }
        }
    }
    let mut trials: Vec<TrialRow> = tasks
        .par_iter()
        .map(|&(setting, n, trial)| run_trial(config, setting, n, trial))
        .collect::<Result<_, _>>()?;
    trials.sort_by_key(|r| (r.setting, r.n, r.trial));

    let mut cells: BTreeMap<(Setting, u64), Vec<&TrialRow>> = BTreeMap::new();
    for row in &trials {
        cells.entry((row.setting, row.n)).or_default().push(row);
    }
    let aggregates = cells
        .into_iter()
        .map(|((setting, n), rows)| {
            let mses: Vec<f64> = rows.iter().map(|r| r.mse).collect();
            let mean_mse = mean(&mses);
            let half = 1.96 * standard_error(&mses);
            let mean_runtime_ms = mean(&rows.iter().map(|r| r.fit_runtime_ms).collect::<Vec<_>>());
            AggregateRow {
                setting,
                n,
                mean_mse,
                ci_low: mean_mse - half,
                ci_high: mean_mse + half,
                mean_runtime_ms,
            }
        })
        .collect();
    Ok(ExperimentResult { trials, aggregates })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error of the mean (zero for fewer than two values).
fn standard_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Median of a sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("values must not be NaN"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// Writes per-trial rows as CSV.
pub fn write_trials_csv<W: Write>(mut w: W, rows: &[TrialRow]) -> Result<(), BenchError> {
    writeln!(w, "setting,n,trial,mse,fit_runtime_ms,objective,seed")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.setting, r.n, r.trial, r.mse, r.fit_runtime_ms, r.objective, r.seed
        )?;
    }
    Ok(())
}

/// Writes aggregate rows as CSV.
pub fn write_aggregates_csv<W: Write>(mut w: W, rows: &[AggregateRow]) -> Result<(), BenchError> {
    writeln!(w, "setting,n,mean_mse,ci_low,ci_high,mean_runtime_ms")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.setting, r.n, r.mean_mse, r.ci_low, r.ci_high, r.mean_runtime_ms
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{count_stream, select_moments_top2_2way};
    use std::time::Instant;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            m: 4,
            settings: vec![Setting::Top2TwoWay, Setting::LinearTop3],
            n_grid: vec![500],
            trials: 2,
            seed: 11,
            fit: FitConfig { starts: 2, max_iters: 400, ..FitConfig::default() },
        }
    }

    #[test]
    fn experiment_rows_are_sorted_and_deterministic() {
        let config = tiny_config();
        let a = run_experiment(&config).expect("runs");
        let b = run_experiment(&config).expect("runs");
        assert_eq!(a.trials.len(), 4);
        assert_eq!(a.aggregates.len(), 2);
        let keys: Vec<_> = a.trials.iter().map(|r| (r.setting, r.n, r.trial)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for (x, y) in a.trials.iter().zip(&b.trials) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.mse.to_bits(), y.mse.to_bits());
            assert_eq!(x.objective.to_bits(), y.objective.to_bits());
        }
    }

    #[test]
    fn trial_seeds_depend_on_every_coordinate_but_not_the_grid() {
        let s1 = trial_seed(9, Setting::Top2TwoWay, 1000, 3);
        assert_ne!(s1, trial_seed(9, Setting::Choice234, 1000, 3));
        assert_ne!(s1, trial_seed(9, Setting::Top2TwoWay, 2000, 3));
        assert_ne!(s1, trial_seed(9, Setting::Top2TwoWay, 1000, 4));
        assert_ne!(s1, trial_seed(10, Setting::Top2TwoWay, 1000, 3));
        // Same coordinates give the same seed regardless of what else runs.
        assert_eq!(s1, trial_seed(9, Setting::Top2TwoWay, 1000, 3));
    }

    #[test]
    fn csv_output_matches_the_frozen_layout() {
        let rows = vec![TrialRow {
            setting: Setting::Top2TwoWay,
            n: 1000,
            trial: 0,
            mse: 0.25,
            fit_runtime_ms: 12.5,
            objective: 1e-6,
            seed: 42,
        }];
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &rows).expect("writes");
        assert_eq!(
            String::from_utf8(buf).expect("utf8"),
            "setting,n,trial,mse,fit_runtime_ms,objective,seed\n\
             top2_2way,1000,0,0.25,12.5,0.000001,42\n"
        );
        let aggs = vec![AggregateRow {
            setting: Setting::LinearTop3,
            n: 1000,
            mean_mse: 0.5,
            ci_low: 0.4,
            ci_high: 0.6,
            mean_runtime_ms: 20.0,
        }];
        let mut buf = Vec::new();
        write_aggregates_csv(&mut buf, &aggs).expect("writes");
        assert_eq!(
            String::from_utf8(buf).expect("utf8"),
            "setting,n,mean_mse,ci_low,ci_high,mean_runtime_ms\n\
             linear_top3,1000,0.5,0.4,0.6,20\n"
        );
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn setting_names_round_trip() {
        for s in Setting::all() {
            assert_eq!(s.name().parse::<Setting>().expect("parses"), s);
        }
        assert!("nope".parse::<Setting>().is_err());
    }

    #[test]
    fn empty_grids_are_rejected() {
        let mut config = tiny_config();
        config.trials = 0;
        assert!(matches!(run_experiment(&config), Err(BenchError::EmptyGrid)));
    }

    #[test]
    fn counting_pass_time_grows_linearly_in_the_stream_length() {
        use rand::SeedableRng;
        let phi = setup_top2_2way(6).expect("valid");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = random_mixture(6, 2, &mut rng).with_phi(phi);
        let big = sample_profile(&truth, 1_000_000, &mut rng).expect("samples");
        let moments = select_moments_top2_2way(6).expect("valid");
        let time_at = |n: usize| -> f64 {
            let slice = &big.orders()[..n];
            // Minimum of several repetitions to suppress scheduling noise.
            (0..5)
                .map(|_| {
                    let t = Instant::now();
                    let counted = count_stream(&moments, slice.iter(), DataMode::Partial)
                        .expect("counts");
                    assert_eq!(counted.n, n as u64);
                    t.elapsed().as_secs_f64()
                })
                .fold(f64::INFINITY, f64::min)
        };
        let t_small = time_at(10_000);
        let t_large = time_at(1_000_000);
        let slope = (t_large / t_small).ln() / 100f64.ln();
        assert!(
            (0.8..=1.3).contains(&slope),
            "counting should scale linearly; log-log slope was {slope:.3} \
             ({t_small:.6}s at 1e4, {t_large:.6}s at 1e6)"
        );
    }
}
