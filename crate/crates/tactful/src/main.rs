//! Command-line pipeline: forward predictions, fitting, ablation
//! comparison, bootstrap intervals, synthetic data, parameter recovery, and
//! figure-data export.
//!
//! Exit codes: 0 success, 1 usage, 2 unreadable/invalid input,
//! 3 numerical non-convergence or unreliable results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tactful::{
    bootstrap, compare_models, choice_distribution, export_figure_data, fit, read_params,
    simulate_dataset, utility_terms, write_params, write_params_string, Ablation,
    BootstrapStatistic, CounterfactualMode, Dataset, Error, FitConfig, FitResult, Group,
    ModelConfig, ParamSet, Scenario, Utterance,
};

#[derive(Parser)]
#[command(
    name = "tactful",
    version,
    about = "Model a doctor who weighs a patient's understanding against anticipated regret",
    after_help = "Exit codes: 0 success, 1 usage, 2 bad input, 3 non-convergence/unreliable."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Tactful,
    Candid,
}

impl From<GroupArg> for Group {
    fn from(g: GroupArg) -> Group {
        match g {
            GroupArg::Tactful => Group::Tactful,
            GroupArg::Candid => Group::Candid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CfModeArg {
    Twin,
    Interventional,
}

impl From<CfModeArg> for CounterfactualMode {
    fn from(m: CfModeArg) -> CounterfactualMode {
        match m {
            CfModeArg::Twin => CounterfactualMode::Twin,
            CfModeArg::Interventional => CounterfactualMode::Interventional,
        }
    }
}

/// Flags shared by every command that evaluates the model.
#[derive(Args)]
struct ModelArgs {
    /// Parameter file; omitted means the built-in defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override the likelihood epsilon (no-factor sickness probability).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Counterfactual reading used by the regret term.
    #[arg(long = "cf-mode", value_enum, default_value = "twin")]
    cf_mode: CfModeArg,
}

impl ModelArgs {
    fn params(&self) -> Result<ParamSet, CliError> {
        let mut params = match &self.params {
            Some(path) => read_params(path)?,
            None => ParamSet::default(),
        };
        if let Some(eps) = self.epsilon {
            params.epsilon = eps;
        }
        params.validate()?;
        Ok(params)
    }

    fn model_config(&self) -> ModelConfig {
        ModelConfig { counterfactual: self.cf_mode.into(), ..Default::default() }
    }
}

/// Flags shared by every command that runs the optimizer.
#[derive(Args)]
struct FitArgs {
    /// Seed for all randomized work. Required: reproducibility is the point.
    #[arg(long)]
    seed: u64,
    /// Random restarts per fit.
    #[arg(long, default_value_t = 20)]
    restarts: u32,
    /// L1 penalty weight on the four utility weights.
    #[arg(long = "l1", default_value_t = 0.005)]
    l1_lambda: f64,
    /// Iteration cap per restart.
    #[arg(long, default_value_t = 5000)]
    max_iterations: u32,
}

impl FitArgs {
    fn config(&self, model: ModelConfig, epsilon: Option<f64>) -> Result<FitConfig, CliError> {
        if self.restarts == 0 {
            return Err(CliError::Usage("--restarts must be at least 1".into()));
        }
        if self.l1_lambda.is_nan() || self.l1_lambda < 0.0 {
            return Err(CliError::Usage("--l1 must be nonnegative".into()));
        }
        let config = FitConfig {
            l1_lambda: self.l1_lambda,
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            seed: self.seed,
            model,
            epsilon: epsilon.unwrap_or(0.001),
            ..Default::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print utility terms and choice probabilities for one scenario.
    Predict {
        #[command(flatten)]
        model: ModelArgs,
        /// Scenario label, e.g. insecure:11 (temperament:excess-bit virus-bit).
        #[arg(long)]
        scenario: String,
    },
    /// Fit the model to one group's responses and write a parameter file.
    Fit {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        opt: FitArgs,
        /// Response CSV.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        group: GroupArg,
        /// Output parameter file; a sidecar `<out>.report.json` is written too.
        #[arg(long)]
        out: PathBuf,
        /// Pin utility weights to zero, e.g. --ablate regret+latents.
        #[arg(long = "ablate")]
        ablate: Option<String>,
    },
    /// Fit the full model plus requested ablations and report LRTs.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        opt: FitArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        group: GroupArg,
        /// Ablations to test; repeat the flag, join terms with `+`.
        #[arg(long = "ablate")]
        ablate: Vec<String>,
    },
    /// Bootstrap a confidence interval by resampling participants.
    Bootstrap {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        opt: FitArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        group: GroupArg,
        /// r2 or one of the six parameter names.
        #[arg(long)]
        stat: String,
        /// Bootstrap replicates (at least 10).
        #[arg(long)]
        reps: u32,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        /// File receiving one line per replicate for auditing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic response CSV sampled from the model.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Participants to simulate; each answers all six scenarios.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "tactful")]
        group: GroupArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate from known parameters, refit, and report the recovery.
    Recover {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        opt: FitArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "tactful")]
        group: GroupArg,
    },
    /// Write the figure-data CSV (empirical vs model per cell).
    #[command(name = "export-fig")]
    ExportFig {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        group: GroupArg,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

fn lib_exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_)
        | Error::Invariant(_)
        | Error::Parse { .. }
        | Error::ParamFile { .. }
        | Error::Io(_) => 2,
        Error::Numeric(_) | Error::Unreliable(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            eprintln!("run `tactful --help` for details");
            ExitCode::from(1)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(lib_exit_code(&e))
        }
    }
}

fn load_group(data_path: &Path, group: Group) -> Result<Dataset, CliError> {
    let data = Dataset::from_csv_path(data_path)?;
    let subset = data.filter_group(group);
    if subset.is_empty() {
        return Err(CliError::Lib(Error::Domain(format!(
            "group `{group}` is absent from {}",
            data_path.display()
        ))));
    }
    Ok(subset)
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Predict { model, scenario } => cmd_predict(model, &scenario),
        Command::Fit { model, opt, data, group, out, ablate } => {
            cmd_fit(model, opt, &data, group.into(), &out, ablate.as_deref())
        }
        Command::Compare { model, opt, data, group, ablate } => {
            cmd_compare(model, opt, &data, group.into(), &ablate)
        }
        Command::Bootstrap { model, opt, data, group, stat, reps, confidence, out } => {
            cmd_bootstrap(model, opt, &data, group.into(), &stat, reps, confidence, &out)
        }
        Command::Simulate { model, n, seed, group, out } => {
            cmd_simulate(model, n, seed, group.into(), &out)
        }
        Command::Recover { model, opt, n, group } => cmd_recover(model, opt, n, group.into()),
        Command::ExportFig { model, data, group, out } => {
            cmd_export_fig(model, &data, group.into(), &out)
        }
    }
}

fn cmd_predict(model: ModelArgs, scenario_label: &str) -> Result<ExitCode, CliError> {
    let scenario = Scenario::from_label(scenario_label)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let params = model.params()?;
    let cfg = model.model_config();

    let dist = choice_distribution(&params, &cfg, &scenario)?;
    println!("scenario {}", scenario.label());
    println!(
        "{:<9} {:>14} {:>11} {:>12} {:>10} {:>12}",
        "utterance", "v_explanandum", "v_latents", "social_cost", "utility", "probability"
    );
    for u in Utterance::ALL {
        let terms = utility_terms(&params, &cfg, &scenario, u)?;
        let utility = terms.combined(&params, scenario.temperament);
        println!(
            "{:<9} {:>14.6} {:>11.6} {:>12.6} {:>10.6} {:>12.6}",
            u.label(),
            terms.v_explanandum,
            terms.v_latents,
            terms.social_cost,
            utility,
            dist.prob(u)
        );
    }
    println!("argmax: {}", dist.argmax().label());
    Ok(ExitCode::SUCCESS)
}

fn parse_ablation(text: &str) -> Result<Ablation, CliError> {
    Ablation::parse(text).map_err(|e| CliError::Usage(e.to_string()))
}

fn fit_report_json(
    result: &FitResult,
    config: &FitConfig,
    group: Group,
    data: &Dataset,
) -> serde_json::Value {
    serde_json::json!({
        "group": group.as_str(),
        "n_records": data.len(),
        "n_participants": data.participants().len(),
        "seed": config.seed,
        "restarts": config.restarts,
        "l1_lambda": config.l1_lambda,
        "max_iterations": config.max_iterations,
        "epsilon": config.epsilon,
        "temperature": config.temperature,
        "cf_mode": match config.model.counterfactual {
            CounterfactualMode::Twin => "twin",
            CounterfactualMode::Interventional => "interventional",
        },
        "ablation": config.ablation.label(),
        "nll": result.nll,
        "penalized_objective": result.penalized_objective,
        "converged": result.converged,
        "restart_index": result.restart_index,
        "iterations": result.iterations,
    })
}

fn cmd_fit(
    model: ModelArgs,
    opt: FitArgs,
    data_path: &Path,
    group: Group,
    out: &Path,
    ablate: Option<&str>,
) -> Result<ExitCode, CliError> {
    let mut config = opt.config(model.model_config(), model.epsilon)?;
    if let Some(text) = ablate {
        config.ablation = parse_ablation(text)?;
    }
    let data = load_group(data_path, group)?;
    let result = fit(&data, &config)?;

    write_params(&result.params, out)?;
    let report_path = sidecar_path(out);
    fs::write(
        &report_path,
        serde_json::to_string_pretty(&fit_report_json(&result, &config, group, &data))
            .expect("report serializes")
            + "\n",
    )
    .map_err(Error::from)?;

    println!(
        "fit {}: nll={:.6} penalized={:.6} converged={} restart={} iterations={}",
        group,
        result.nll,
        result.penalized_objective,
        result.converged,
        result.restart_index,
        result.iterations
    );
    println!("params -> {}", out.display());
    println!("report -> {}", report_path.display());

    if !result.converged {
        eprintln!("warning: no restart met the convergence tolerance");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".report.json");
    out.with_file_name(name)
}

fn cmd_compare(
    model: ModelArgs,
    opt: FitArgs,
    data_path: &Path,
    group: Group,
    ablate: &[String],
) -> Result<ExitCode, CliError> {
    let config = opt.config(model.model_config(), model.epsilon)?;
    let data = load_group(data_path, group)?;

    let mut ablations = Vec::new();
    for text in ablate {
        let a = parse_ablation(text)?;
        if a.is_empty() {
            return Err(CliError::Usage("--ablate needs at least one term".into()));
        }
        ablations.push(a);
    }
    if ablations.is_empty() {
        println!("no ablations requested; nothing to compare");
        return Ok(ExitCode::SUCCESS);
    }

    let comparison = compare_models(&data, &config, &ablations)?;
    println!(
        "full model: nll={:.6} penalized={:.6} converged={}",
        comparison.full.nll, comparison.full.penalized_objective, comparison.full.converged
    );
    println!("{:<20} {:>12} {:>12} {:>4} {:>12}", "ablation", "nll", "lrt", "df", "p_value");
    let mut all_converged = comparison.full.converged;
    for entry in &comparison.ablations {
        all_converged &= entry.fit.converged;
        println!(
            "{:<20} {:>12.6} {:>12.6} {:>4} {:>12.6}",
            entry.ablation.label(),
            entry.fit.nll,
            entry.lrt.statistic,
            entry.lrt.df,
            entry.lrt.p_value
        );
    }
    if !all_converged {
        eprintln!("warning: at least one fit did not converge");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bootstrap(
    model: ModelArgs,
    opt: FitArgs,
    data_path: &Path,
    group: Group,
    stat: &str,
    reps: u32,
    confidence: f64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    if reps < 10 {
        return Err(CliError::Usage(format!("--reps must be at least 10, got {reps}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(CliError::Usage(format!("--confidence must lie in (0, 1), got {confidence}")));
    }
    let statistic = BootstrapStatistic::parse(stat).map_err(|e| CliError::Usage(e.to_string()))?;
    let config = opt.config(model.model_config(), model.epsilon)?;
    let data = load_group(data_path, group)?;

    let outcome = bootstrap(&data, &config, statistic, reps, confidence, opt.seed)?;
    let mut audit = String::from("replicate,value\n");
    for (i, value) in outcome.replicate_values.iter().enumerate() {
        match value {
            Some(v) => writeln!(audit, "{i},{v}").expect("string write"),
            None => writeln!(audit, "{i},NA").expect("string write"),
        }
    }
    fs::write(out, audit).map_err(Error::from)?;

    let report = &outcome.report;
    println!(
        "bootstrap {} ({} reps, {:.0}% CI, seed {}): point={:.6} ci=[{:.6}, {:.6}] failed={}",
        report.statistic.label(),
        report.replicates,
        report.confidence_level * 100.0,
        report.seed,
        report.point_estimate,
        report.lower,
        report.upper,
        report.failed_replicates
    );
    println!("replicates -> {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    model: ModelArgs,
    n: usize,
    seed: u64,
    group: Group,
    out: &Path,
) -> Result<ExitCode, CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let params = model.params()?;
    let cfg = model.model_config();
    let data = simulate_dataset(&params, &cfg, n, group, seed)?;
    let mut buf = Vec::new();
    data.write_responses_csv(&mut buf)?;
    fs::write(out, buf).map_err(Error::from)?;
    println!(
        "simulated {} participants x 6 scenarios ({} rows, group {}) -> {}",
        n,
        data.len(),
        group,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_recover(
    model: ModelArgs,
    opt: FitArgs,
    n: usize,
    group: Group,
) -> Result<ExitCode, CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let generating = model.params()?;
    let cfg = model.model_config();
    let data = simulate_dataset(&generating, &cfg, n, group, opt.seed)?;

    let mut config = opt.config(cfg, model.epsilon)?;
    // Keep the fit's restart streams distinct from the simulation streams.
    config.seed = tactful_recover_seed(opt.seed);
    let result = fit(&data, &config)?;

    let r2 = tactful::model_agreement_r_squared(&generating.clone(), &result.params, &cfg)?;
    println!("generating parameters:");
    print!("{}", write_params_string(&generating)?);
    println!("recovered parameters:");
    print!("{}", write_params_string(&result.params)?);
    println!(
        "recovery: r2={:.6} nll={:.6} converged={} (n={}, seed={})",
        r2,
        result.nll,
        result.converged,
        n,
        opt.seed
    );
    if !result.converged {
        eprintln!("warning: refit did not converge");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn tactful_recover_seed(seed: u64) -> u64 {
    // splitmix-style decorrelation of the simulate and refit streams.
    seed ^ 0x9E37_79B9_7F4A_7C15
}

fn cmd_export_fig(
    model: ModelArgs,
    data_path: &Path,
    group: Group,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let params = model.params()?;
    let cfg = model.model_config();
    let data = load_group(data_path, group)?;
    let mut buf = Vec::new();
    export_figure_data(&params, &cfg, &data, group, &mut buf)?;
    fs::write(out, buf).map_err(Error::from)?;
    println!("figure data -> {}", out.display());
    Ok(ExitCode::SUCCESS)
}
