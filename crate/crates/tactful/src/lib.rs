//! A computational model of *tactful explanation*: a doctor choosing what to
//! tell a sick patient, weighing how well the explanation resolves the
//! patient's surprise against the regret it may induce about the patient's
//! own past choices.
//!
//! The crate has four layers:
//!
//! * [`causal`] — the discrete structural causal model: latent worlds,
//!   beliefs, Bayesian updates (with explaining away), and twin-network
//!   counterfactuals with a monotone noise coupling.
//! * [`explainer`] — the agent: per-utterance utility terms and the softmax
//!   choice distribution over the four candidate utterances.
//! * [`fit`] / [`stats`] — L1-penalized maximum-likelihood fitting with
//!   random restarts, likelihood-ratio tests against nested ablations,
//!   r² summaries, participant-level bootstrap intervals, and a pooled
//!   two-proportion test.
//! * [`data`] — the response CSV schema, parameter files, synthetic-data
//!   generation, and plot-ready exports.
//!
//! Every operation is a pure function over immutable values, and every
//! randomized procedure takes an explicit seed, so whole pipelines replay
//! bit-identically. The `tactful` binary exposes the pipeline as
//! subcommands; see the book under `book/` for a guided tour.
//!
//! ```
//! use tactful::{choice_distribution, ModelConfig, ParamSet, Scenario, Utterance};
//!
//! let params = ParamSet::default(); // a regret-averse explainer
//! let scenario = Scenario::from_label("insecure:11")?;
//! let choice = choice_distribution(&params, &ModelConfig::default(), &scenario)?;
//! // For an insecure patient with both factors, mentioning only the virus
//! // spares them the regret of knowing their drinking contributed.
//! assert_eq!(choice.argmax(), Utterance::new(false, true));
//! # Ok::<(), tactful::Error>(())
//! ```

pub mod causal;
pub mod data;
mod error;
pub mod explainer;
pub mod fit;
pub mod guide;
mod seeding;
pub mod special;
pub mod stats;

pub use causal::{
    condition_on_sick, counterfactual_sick_given_world, expected_regret,
    expected_regret_with_mode, independent_prior, prob_sick, restrict, BeliefState,
    CounterfactualMode, FactorState, LikelihoodTable, Utterance,
};
pub use data::{
    empirical_proportions, export_figure_data, figure_cells, read_params, read_params_str,
    simulate_dataset, write_params, write_params_string, CausalStructure, Dataset, FigureCell,
    Group, ProportionRow, ResponseRecord,
};
pub use error::{Error, Result};
pub use explainer::{
    choice_distribution, social_cost, softmax, total_utility, utility_terms, v_explanandum,
    v_latents, ChoiceDistribution, ModelConfig, ParamSet, Scenario, Temperament, TermTable,
    UtilityTerms,
};
pub use fit::{
    fit, gradient, negative_log_likelihood, penalized_objective, Ablation, FitConfig, FitResult,
    StepRule,
};
pub use stats::{
    bootstrap, bootstrap_ci, chi_square_sf, compare_models, likelihood_ratio_test,
    model_agreement_r_squared, model_fit_r_squared, r_squared, two_proportion_test,
    AblationComparison, BootstrapOutcome, BootstrapReport, BootstrapStatistic, LrtReport,
    ModelComparison,
};
