//! Command-line front end: sampling, fitting, probability queries,
//! identifiability witnesses, the synthetic study, and file validation.
//!
//! Exit codes: 0 on success, 2 on usage errors, 3 on data or model errors.

use std::error::Error;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use plmix::bench::{
    run_experiment, write_aggregates_csv, write_trials_csv, ExperimentConfig, Setting,
};
use plmix::estimate::{fit, DataMode, FitConfig, Selector};
use plmix::ident::{build_witness, witness_agreement, witness_separation};
use plmix::io::{
    params_to_doc, parse_order, read_params_file, read_profile, read_profile_file,
    report_to_doc, write_json_file, write_params_file, write_profile, write_profile_file,
    ParamsDoc,
};
use plmix::prob::{mixture_partial_prob, model_partial_prob, ProbError};
use plmix::sample::{
    derive_seed, random_mixture, sample_linear_profile, sample_profile, setup_choice234,
    setup_top2_2way,
};
use plmix::types::{validate_structure_set, Profile};

#[derive(Parser)]
#[command(
    name = "plmix",
    version,
    about = "Mixtures of Plackett-Luce models over structured partial orders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a profile of partial orders (or full rankings) from a model.
    Sample(SampleArgs),
    /// Fit a two-component mixture to a profile.
    Fit(FitArgs),
    /// Evaluate an order's probability under a model.
    Prob(ProbArgs),
    /// Build a pair of distinct mixtures with identical low-order
    /// marginals.
    Witness(WitnessArgs),
    /// Run the estimation-error-versus-sample-size study.
    Bench(BenchArgs),
    /// Validate a parameter or profile file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Number of observations.
    #[arg(long)]
    n: usize,
    /// Master seed (truth and data streams derive from it).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model to sample from; omit to draw a random ground truth.
    #[arg(long)]
    params_file: Option<PathBuf>,
    /// Alternative count for a random ground truth.
    #[arg(long)]
    m: Option<usize>,
    /// Component count for a random ground truth.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Structure distribution governing projections: top2_2way, choice234,
    /// or linear for unprojected full rankings. Defaults to the model's
    /// own distribution.
    #[arg(long)]
    setting: Option<String>,
    /// Write the ground-truth parameters here.
    #[arg(long)]
    truth_out: Option<PathBuf>,
    /// Profile destination (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Profile to fit (stdin if omitted).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Moment selector: top2_2way, choice4, or top3.
    #[arg(long, default_value = "top2_2way")]
    selector: Selector,
    /// Treat observations as full rankings, counting every event they
    /// extend.
    #[arg(long)]
    linear: bool,
    /// Independent optimizer starts.
    #[arg(long, default_value_t = 10)]
    starts: usize,
    /// Weight floor keeping estimates inside their simplexes.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Iteration budget per start.
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    /// Convergence threshold on the per-start objective spread.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Master seed for the optimizer starts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reference parameters; adds a squared-error field to the report.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Report destination (stdout if omitted).
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbArgs {
    /// Model parameters.
    #[arg(long)]
    params_file: PathBuf,
    /// One order in the profile line format, for example
    /// {"kind":"top","m":4,"ranked":[2,3]}.
    #[arg(long)]
    order: String,
}

#[derive(Args)]
struct WitnessArgs {
    /// Alternative count.
    #[arg(long)]
    m: usize,
    /// Components per mixture.
    #[arg(long)]
    k: usize,
    /// Largest ranked-prefix length the pair must agree on.
    #[arg(long)]
    l1: usize,
    /// Largest subset-ranking size the pair must agree on.
    #[arg(long)]
    l2: usize,
    /// Peak weights of the 2k components (evenly spaced by default).
    #[arg(long, num_args = 1.., value_name = "E")]
    e: Option<Vec<f64>>,
    /// Output destination (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment configuration (JSON); flags below override its fields.
    #[arg(long)]
    config_file: Option<PathBuf>,
    /// Alternative count.
    #[arg(long)]
    m: Option<usize>,
    /// Settings to run (comma separated).
    #[arg(long, value_delimiter = ',')]
    settings: Option<Vec<Setting>>,
    /// Sample sizes to run (comma separated).
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<u64>>,
    /// Trials per cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Per-trial CSV destination.
    #[arg(long)]
    trials_out: Option<PathBuf>,
    /// Aggregate CSV destination (stdout if omitted).
    #[arg(long)]
    aggregates_out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Parameter file to validate (including its structure distribution).
    #[arg(long)]
    params_file: Option<PathBuf>,
    /// Profile file to validate.
    #[arg(long)]
    profile: Option<PathBuf>,
}

/// Experiment configuration document accepted by `bench --config-file`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchConfigDoc {
    m: usize,
    settings: Vec<String>,
    n_grid: Vec<u64>,
    trials: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_starts")]
    starts: usize,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_tol")]
    tol: f64,
}

fn default_starts() -> usize {
    10
}
fn default_epsilon() -> f64 {
    1e-6
}
fn default_max_iters() -> usize {
    2000
}
fn default_tol() -> f64 {
    1e-10
}

type CliResult = Result<(), Box<dyn Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => run_sample(args),
        Command::Fit(args) => run_fit(args),
        Command::Prob(args) => run_prob(args),
        Command::Witness(args) => run_witness(args),
        Command::Bench(args) => run_bench(args),
        Command::Validate(args) => run_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprint!(": {s}");
                source = s.source();
            }
            eprintln!();
            ExitCode::from(3)
        }
    }
}

fn run_sample(args: SampleArgs) -> CliResult {
    let mut truth = match &args.params_file {
        Some(path) => read_params_file(path)?,
        None => {
            let m = args
                .m
                .ok_or("either --params-file or --m is required to define the model")?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, 0));
            random_mixture(m, args.k, &mut rng)
        }
    };
    let m = truth.m();
    let mut linear = false;
    match args.setting.as_deref() {
        Some("top2_2way") => truth = truth.with_phi(setup_top2_2way(m)?),
        Some("choice234") => truth = truth.with_phi(setup_choice234(m)?),
        Some("linear") => linear = true,
        Some(other) => {
            return Err(format!(
                "unknown setting {other:?}: expected top2_2way, choice234, or linear"
            )
            .into())
        }
        None => {}
    }
    if let Some(path) = &args.truth_out {
        write_params_file(path, &truth)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, 1));
    let profile = if linear {
        sample_linear_profile(&truth, args.n, &mut rng)
    } else {
        sample_profile(&truth, args.n, &mut rng)?
    };
    match &args.out {
        Some(path) => write_profile_file(path, &profile)?,
        None => {
            let stdout = io::stdout();
            write_profile(BufWriter::new(stdout.lock()), &profile)?;
        }
    }
    Ok(())
}

fn run_fit(args: FitArgs) -> CliResult {
    let profile = read_profile_arg(&args.input)?;
    let mode = if args.linear { DataMode::Linear } else { DataMode::Partial };
    let config = FitConfig {
        starts: args.starts,
        epsilon: args.epsilon,
        max_iters: args.max_iters,
        tol: args.tol,
        seed: args.seed,
        mode,
    };
    let mut report = fit(&profile, args.selector, &config)?;
    if let Some(path) = &args.truth {
        let truth = read_params_file(path)?;
        report = report.with_reference(&truth)?;
    }
    let doc = report_to_doc(&report, args.selector, mode);
    emit_json(&args.report_out, &doc)
}

fn read_profile_arg(input: &Option<PathBuf>) -> Result<Profile, Box<dyn Error>> {
    match input {
        Some(path) => Ok(read_profile_file(path)?),
        None => {
            let stdin = io::stdin();
            Ok(read_profile(BufReader::new(stdin.lock()))?)
        }
    }
}

#[derive(Serialize)]
struct ProbOutput {
    /// Marginal probability under the mixture alone.
    marginal: f64,
    /// Structure-weighted model probability, when the model carries a
    /// structure distribution covering the order's structure.
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<f64>,
}

fn run_prob(args: ProbArgs) -> CliResult {
    let mix = read_params_file(&args.params_file)?;
    let order = parse_order(&args.order, mix.m())?;
    let marginal = mixture_partial_prob(&mix, &order)?;
    let model = match model_partial_prob(&mix, &order) {
        Ok(p) => Some(p),
        Err(ProbError::MissingPhi | ProbError::UnknownStructure { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    println!("{}", serde_json::to_string_pretty(&ProbOutput { marginal, model })?);
    Ok(())
}

#[derive(Serialize)]
struct WitnessOutput {
    m: usize,
    k: usize,
    l1: usize,
    l2: usize,
    nodes: Vec<f64>,
    beta: Vec<f64>,
    mixture_a: ParamsDoc,
    mixture_b: ParamsDoc,
    /// Largest gap across the marginals the pair agrees on (requires
    /// enumeration; omitted for large m).
    #[serde(skip_serializing_if = "Option::is_none")]
    agreement_gap: Option<f64>,
    /// A maximally separating higher-order event and its gap.
    #[serde(skip_serializing_if = "Option::is_none")]
    separation: Option<SeparationOutput>,
}

#[derive(Serialize)]
struct SeparationOutput {
    event: String,
    gap: f64,
}

fn run_witness(args: WitnessArgs) -> CliResult {
    let witness = build_witness(args.m, args.k, args.l1, args.l2, args.e.as_deref())?;
    let (agreement_gap, separation) = if args.m <= plmix::prob::MAX_ENUM_M {
        let gap = witness_agreement(&witness)?;
        let (event, sep) = witness_separation(&witness)?;
        (Some(gap), Some(SeparationOutput { event: event.to_string(), gap: sep }))
    } else {
        (None, None)
    };
    let out = WitnessOutput {
        m: witness.m,
        k: witness.k,
        l1: witness.l1,
        l2: witness.l2,
        nodes: witness.nodes.clone(),
        beta: witness.beta.clone(),
        mixture_a: params_to_doc(&witness.mixture_a),
        mixture_b: params_to_doc(&witness.mixture_b),
        agreement_gap,
        separation,
    };
    emit_json(&args.out, &out)
}

fn run_bench(args: BenchArgs) -> CliResult {
    let mut config = match &args.config_file {
        Some(path) => {
            let mut text = String::new();
            BufReader::new(File::open(path)?).read_to_string(&mut text)?;
            let doc: BenchConfigDoc = serde_json::from_str(&text)?;
            let settings = doc
                .settings
                .iter()
                .map(|s| s.parse::<Setting>())
                .collect::<Result<Vec<_>, _>>()?;
            ExperimentConfig {
                m: doc.m,
                settings,
                n_grid: doc.n_grid,
                trials: doc.trials,
                seed: doc.seed,
                fit: FitConfig {
                    starts: doc.starts,
                    epsilon: doc.epsilon,
                    max_iters: doc.max_iters,
                    tol: doc.tol,
                    ..FitConfig::default()
                },
            }
        }
        None => {
            let m = args.m.ok_or("either --config-file or --m is required")?;
            ExperimentConfig::new(m)
        }
    };
    if let Some(m) = args.m {
        config.m = m;
    }
    if let Some(settings) = args.settings {
        config.settings = settings;
    }
    if let Some(n_grid) = args.n_grid {
        config.n_grid = n_grid;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let result = run_experiment(&config)?;
    if let Some(path) = &args.trials_out {
        write_trials_csv(BufWriter::new(File::create(path)?), &result.trials)?;
    }
    match &args.aggregates_out {
        Some(path) => {
            write_aggregates_csv(BufWriter::new(File::create(path)?), &result.aggregates)?
        }
        None => {
            let stdout = io::stdout();
            write_aggregates_csv(BufWriter::new(stdout.lock()), &result.aggregates)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidateOutput {
    ok: bool,
    checked: Vec<String>,
    violations: Vec<String>,
}

fn run_validate(args: ValidateArgs) -> CliResult {
    if args.params_file.is_none() && args.profile.is_none() {
        return Err("nothing to validate: pass --params-file and/or --profile".into());
    }
    let mut checked = Vec::new();
    let mut violations = Vec::new();
    if let Some(path) = &args.params_file {
        match read_params_file(path) {
            Ok(mix) => {
                checked.push(format!("params {}: m={}, k={}", path.display(), mix.m(), mix.k()));
                if let Some(phi) = mix.phi() {
                    match validate_structure_set(phi, mix.m()) {
                        Ok(()) => checked
                            .push(format!("structure distribution: {} entries", phi.len())),
                        Err(e) => {
                            for v in e.violations {
                                violations.push(v.to_string());
                            }
                        }
                    }
                }
            }
            Err(e) => violations.push(format!("params {}: {e}", path.display())),
        }
    }
    if let Some(path) = &args.profile {
        match read_profile_file(path) {
            Ok(profile) => checked.push(format!(
                "profile {}: m={}, {} orders",
                path.display(),
                profile.m(),
                profile.len()
            )),
            Err(e) => violations.push(format!("profile {}: {e}", path.display())),
        }
    }
    let ok = violations.is_empty();
    println!(
        "{}",
        serde_json::to_string_pretty(&ValidateOutput { ok, checked, violations })?
    );
    if ok {
        Ok(())
    } else {
        Err("validation failed".into())
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, doc: &T) -> CliResult {
    match out {
        Some(path) => write_json_file(path, doc)?,
        None => println!("{}", serde_json::to_string_pretty(doc)?),
    }
    Ok(())
}
