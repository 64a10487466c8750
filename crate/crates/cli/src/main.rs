use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sgd_nonconv::bounds::{constant_d, nonconvergence_lower_bound, LowerBoundInputs};
use sgd_nonconv::experiment::csv::fmt_f64;
use sgd_nonconv::experiment::{
    lower_bound_for, run_experiment, ExperimentConfig, ExperimentError, RunOptions,
};
use sgd_nonconv::parallel::{with_threads, Execution};
use sgd_nonconv::prob_lab::lab_config::LabConfig;
use sgd_nonconv::prob_lab::suite::run_suite;

#[derive(Parser)]
#[command(name = "sgd-nonconv", version, about = "Adaptive SGD non-convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and write the full report.
    Simulate(RunArgs),
    /// Simulate trajectories and certify the configured a priori bound.
    CertifyBounds(RunArgs),
    /// Run the randomized exact conditional-expectation suite.
    ProbLab(ProbLabArgs),
    /// Print D and the non-convergence lower bound.
    LowerBound(LowerBoundArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; never changes results.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ProbLabArgs {
    /// Check a user-supplied space instead of the random suite.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct LowerBoundArgs {
    /// Take every constant from an Adam experiment config.
    #[arg(long, conflicts_with_all = ["eta", "rho", "c", "alpha", "beta", "epsilon", "gamma", "variance"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    eta: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    rho: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    c: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, required_unless_present = "config")]
    beta: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    epsilon: Option<f64>,
    /// liminf of the learning rates.
    #[arg(long, required_unless_present = "config")]
    gamma: Option<f64>,
    /// sup of the learning rates, defaults to `--gamma`.
    #[arg(long)]
    sup_gamma: Option<f64>,
    /// inf over theta of the per-sample gradient variance.
    #[arg(long, required_unless_present = "config")]
    variance: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    batch: f64,
    /// E[max{1, |theta_0|}].
    #[arg(long, default_value_t = 1.0)]
    initial_scale: f64,
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, ExperimentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(args: &RunArgs, certify_only: bool) -> Result<i32, ExperimentError> {
    let setup = load(&args.config, args.seed)?.setup()?;
    if certify_only && setup.config.certify.is_none() {
        return Err(ExperimentError::Config(
            "certify-bounds needs a `certify` section in the config".into(),
        ));
    }
    for w in &setup.warnings {
        eprintln!("warning: {w}");
    }
    let options = RunOptions {
        estimates: !certify_only,
        certify: true,
        execution: Execution::default(),
    };
    let (report, dumps) = with_threads(args.threads, || run_experiment(&setup, options))?;
    if let Some(dir) = &args.out {
        report.write(dir, &dumps)?;
    }
    print!("{}", report.summary());
    Ok(report.exit_code())
}

fn prob_lab(args: &ProbLabArgs) -> Result<i32, ExperimentError> {
    if let Some(path) = &args.config {
        return prob_lab_config(path, args.out.as_deref());
    }
    let report = with_threads(args.threads, || run_suite(args.seed, args.instances))
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let csv = report.to_csv();
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("prob_lab.csv"), &csv)?;
    }
    print!("{csv}");
    println!("instances: {}", report.instances);
    println!("inequality failures: {}", report.inequality_failures);
    println!("verdict: {}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(if report.passed() { 0 } else { 1 })
}

fn prob_lab_config(path: &Path, out: Option<&Path>) -> Result<i32, ExperimentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
    let report = LabConfig::from_json(&text)
        .and_then(|c| c.run())
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let checks = report.checks_csv();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("prob_lab_values.csv"), &report.values_csv)?;
        std::fs::write(dir.join("prob_lab.csv"), &checks)?;
    }
    print!("{}{checks}", report.values_csv);
    println!("verdict: {}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(if report.passed() { 0 } else { 1 })
}

fn lower_bound(args: &LowerBoundArgs) -> Result<i32, ExperimentError> {
    let (d, bounds) = match &args.config {
        Some(path) => {
            let setup = load(path, None)?.setup()?;
            let (d, _, bounds) = lower_bound_for(&setup)?;
            (d, bounds)
        }
        None => {
            // clap guarantees presence
            let eta = args.eta.unwrap();
            let rho = args.rho.unwrap();
            let c = args.c.unwrap();
            let d = constant_d(rho, args.epsilon.unwrap(), c, args.alpha, args.beta.unwrap(), eta)
                .map_err(ExperimentError::Hypothesis)?;
            let gamma = args.gamma.unwrap();
            let b = nonconvergence_lower_bound(&LowerBoundInputs {
                liminf_gamma: gamma,
                inf_variance: args.variance.unwrap(),
                d,
                limsup_batch: args.batch,
                sup_gamma: args.sup_gamma.unwrap_or(gamma),
                initial_scale: args.initial_scale,
            });
            (d, vec![b])
        }
    };
    println!("D: {}", fmt_f64(d));
    for (i, b) in bounds.iter().enumerate() {
        println!("lower bound [coord {i}]: {}", fmt_f64(b.value));
        if let Some(flag) = b.vacuous {
            println!("flag [coord {i}]: {flag}");
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Simulate(a) => run(a, false),
        Command::CertifyBounds(a) => run(a, true),
        Command::LowerBound(a) => lower_bound(a),
        Command::ProbLab(a) => prob_lab(a),
    };
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
