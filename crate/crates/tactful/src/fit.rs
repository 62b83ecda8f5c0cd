//! Maximum-likelihood fitting of the explainer's parameters to response
//! data.
//!
//! The six free parameters are the two prior marginals and the four utility
//! weights. Priors are optimized through a logistic transform so they stay
//! strictly inside (0, 1); the weights live in plain coordinates. The
//! objective is the negative log-likelihood of the observed utterances plus
//! an L1 penalty on the weights (priors are not penalized — shrinking a
//! weight to zero recovers an ablated model, shrinking a probability means
//! nothing of the sort).
//!
//! Optimization is proximal gradient descent: a central finite-difference
//! gradient of the smooth part, a soft-thresholding step for the penalty,
//! and (by default) a backtracking line search on the penalized objective.
//! Multiple random restarts guard against local optima; each restart draws
//! its initial point from its own `(seed, restart_index)` stream, so results
//! do not depend on evaluation order.

use crate::causal::Utterance;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::explainer::{ModelConfig, ParamSet, Scenario, TermTable};
use crate::seeding::stream_rng;
use rand::Rng;

/// Number of free parameters / unconstrained coordinates.
pub const N_PARAMS: usize = 6;

/// Which utility weights are pinned to zero during fitting.
///
/// `regret` pins both temperament-specific social weights, so it removes two
/// parameters; the other terms remove one each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Ablation {
    pub regret: bool,
    pub latents: bool,
    pub explanandum: bool,
}

impl Ablation {
    pub const NONE: Ablation = Ablation { regret: false, latents: false, explanandum: false };
    pub const REGRET: Ablation = Ablation { regret: true, latents: false, explanandum: false };
    pub const LATENTS: Ablation = Ablation { regret: false, latents: true, explanandum: false };
    pub const EXPLANANDUM: Ablation = Ablation { regret: false, latents: false, explanandum: true };
    pub const REGRET_AND_LATENTS: Ablation =
        Ablation { regret: true, latents: true, explanandum: false };

    /// Parse a `+`-joined term list, e.g. `regret` or `regret+latents`.
    pub fn parse(text: &str) -> Result<Ablation> {
        let mut ablation = Ablation::default();
        for term in text.split('+') {
            match term.trim() {
                "regret" => ablation.regret = true,
                "latents" => ablation.latents = true,
                "explanandum" => ablation.explanandum = true,
                other => {
                    return Err(Error::Domain(format!(
                        "unknown ablation term `{other}` (expected regret, latents, or explanandum)"
                    )))
                }
            }
        }
        Ok(ablation)
    }

    pub fn label(&self) -> String {
        let mut terms = Vec::new();
        if self.regret {
            terms.push("regret");
        }
        if self.latents {
            terms.push("latents");
        }
        if self.explanandum {
            terms.push("explanandum");
        }
        if terms.is_empty() {
            "none".to_string()
        } else {
            terms.join("+")
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.regret || self.latents || self.explanandum)
    }

    /// Number of parameters pinned to zero; the degrees of freedom of the
    /// likelihood-ratio test against the full model.
    pub fn pinned_parameter_count(&self) -> u32 {
        2 * self.regret as u32 + self.latents as u32 + self.explanandum as u32
    }

    /// Is unconstrained coordinate `i` pinned? Coordinate order:
    /// `[logit prior_excess, logit prior_virus, α_explanandum, α_latents,
    /// α_social_confident, α_social_insecure]`.
    pub fn pins(&self, coordinate: usize) -> bool {
        match coordinate {
            2 => self.explanandum,
            3 => self.latents,
            4 | 5 => self.regret,
            _ => false,
        }
    }
}

/// Step-size policy for the descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Constant step size, accepted unconditionally.
    Fixed { step: f64 },
    /// Backtracking line search on the penalized objective, starting from
    /// `initial_step` and growing modestly after clean accepts.
    Adaptive { initial_step: f64 },
}

impl StepRule {
    fn step_size(&self) -> f64 {
        match self {
            StepRule::Fixed { step } => *step,
            StepRule::Adaptive { initial_step } => *initial_step,
        }
    }
}

/// Everything that controls one fit.
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// L1 penalty weight on the four utility weights.
    pub l1_lambda: f64,
    /// Number of random initializations.
    pub restarts: u32,
    pub max_iterations: u32,
    /// Convergence threshold on the absolute change in penalized objective.
    pub convergence_tol: f64,
    pub step_rule: StepRule,
    pub seed: u64,
    pub ablation: Ablation,
    /// Central-difference half-width for the gradient.
    pub finite_difference_h: f64,
    /// Structural model switches (counterfactual mode, latent conditioning).
    pub model: ModelConfig,
    /// Fixed likelihood epsilon for the fitted parameter set.
    pub epsilon: f64,
    /// Fixed softmax temperature for the fitted parameter set.
    pub temperature: f64,
    /// Extra deterministic starting points (e.g. an ablated model's optimum
    /// when guaranteeing nested-model comparisons). Appended after the
    /// random restarts.
    pub warm_starts: Vec<ParamSet>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            l1_lambda: 0.005,
            restarts: 20,
            max_iterations: 5000,
            convergence_tol: 1e-8,
            step_rule: StepRule::Adaptive { initial_step: 0.5 },
            seed: 0,
            ablation: Ablation::NONE,
            finite_difference_h: 1e-5,
            model: ModelConfig::default(),
            epsilon: 0.001,
            temperature: 1.0,
        warm_starts: Vec::new(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.l1_lambda.is_finite() || self.l1_lambda < 0.0 {
            return Err(Error::Domain(format!("l1_lambda = {} must be nonnegative", self.l1_lambda)));
        }
        if self.restarts == 0 {
            return Err(Error::Domain("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be at least 1".into()));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::Domain(format!(
                "convergence_tol = {} must be positive",
                self.convergence_tol
            )));
        }
        let step = self.step_rule.step_size();
        if step.is_nan() || step <= 0.0 {
            return Err(Error::Domain("step size must be positive".into()));
        }
        if self.finite_difference_h.is_nan() || self.finite_difference_h <= 0.0 {
            return Err(Error::Domain(format!(
                "finite_difference_h = {} must be positive",
                self.finite_difference_h
            )));
        }
        // Epsilon and temperature ranges are checked through a ParamSet.
        ParamSet { epsilon: self.epsilon, temperature: self.temperature, ..Default::default() }
            .validate()?;
        for (i, p) in self.warm_starts.iter().enumerate() {
            p.validate()
                .map_err(|e| Error::Domain(format!("warm start {i} is invalid: {e}")))?;
        }
        Ok(())
    }
}

/// Outcome of one fit: the winning parameters and bookkeeping about the
/// winning restart.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ParamSet,
    /// Unpenalized negative log-likelihood at the optimum.
    pub nll: f64,
    /// `nll + l1_lambda * Σ|α|` at the optimum.
    pub penalized_objective: f64,
    /// Whether the winning restart met the convergence tolerance.
    pub converged: bool,
    /// Index of the winning initialization. Random restarts come first;
    /// warm starts follow.
    pub restart_index: u32,
    /// Iterations spent by the winning restart.
    pub iterations: u32,
}

impl FitResult {
    /// Maximized log-likelihood, the quantity likelihood-ratio tests compare.
    pub fn log_likelihood(&self) -> f64 {
        -self.nll
    }
}

/// Response counts per (scenario, utterance) cell. Collapsing records to
/// counts leaves the likelihood unchanged and makes its cost independent of
/// the number of participants.
#[derive(Debug, Clone)]
pub(crate) struct CountTable {
    counts: [[f64; 4]; 6],
}

impl CountTable {
    pub(crate) fn from_dataset(data: &Dataset) -> Result<CountTable> {
        if data.is_empty() {
            return Err(Error::Domain("dataset is empty".into()));
        }
        let mut counts = [[0.0; 4]; 6];
        for r in &data.records {
            let idx = r.scenario().index().ok_or_else(|| {
                Error::Domain(format!(
                    "record for participant `{}` has unmodeled scenario {:?}",
                    r.participant_id,
                    r.scenario()
                ))
            })?;
            counts[idx][r.utterance.index()] += 1.0;
        }
        Ok(CountTable { counts })
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

// The logistic map saturates to exactly 0/1 in double precision near
// |x| ≈ 37; keep prior coordinates inside the representable interior.
const PRIOR_COORD_LIMIT: f64 = 30.0;

/// Unconstrained coordinates of a parameter set:
/// `[logit prior_excess, logit prior_virus, α_explanandum, α_latents,
/// α_social_confident, α_social_insecure]`.
pub fn to_unconstrained(params: &ParamSet) -> [f64; N_PARAMS] {
    [
        logit(params.prior_excess),
        logit(params.prior_virus),
        params.alpha_explanandum,
        params.alpha_latents,
        params.alpha_social_confident,
        params.alpha_social_insecure,
    ]
}

/// Rebuild a parameter set from unconstrained coordinates, with the fixed
/// epsilon and temperature supplied separately.
pub fn from_unconstrained(theta: &[f64; N_PARAMS], epsilon: f64, temperature: f64) -> ParamSet {
    let clamp = |x: f64| x.clamp(-PRIOR_COORD_LIMIT, PRIOR_COORD_LIMIT);
    ParamSet {
        prior_excess: sigmoid(clamp(theta[0])),
        prior_virus: sigmoid(clamp(theta[1])),
        alpha_explanandum: theta[2],
        alpha_latents: theta[3],
        alpha_social_confident: theta[4],
        alpha_social_insecure: theta[5],
        epsilon,
        temperature,
    }
}

/// Negative log-likelihood of the dataset under the model:
/// `−Σ_records ln Pr(chosen utterance | scenario)`.
pub fn negative_log_likelihood(params: &ParamSet, model: &ModelConfig, data: &Dataset) -> Result<f64> {
    params.validate()?;
    let counts = CountTable::from_dataset(data)?;
    let nll = nll_from_counts(params, model, &counts);
    if !nll.is_finite() {
        return Err(Error::Numeric(format!(
            "negative log-likelihood is not finite at {params:?}"
        )));
    }
    Ok(nll)
}

/// The L1 penalty: `l1_lambda` times the sum of absolute utility weights.
/// Priors are not penalized.
pub fn l1_penalty(params: &ParamSet, l1_lambda: f64) -> f64 {
    l1_lambda
        * (params.alpha_explanandum.abs()
            + params.alpha_latents.abs()
            + params.alpha_social_confident.abs()
            + params.alpha_social_insecure.abs())
}

/// `negative_log_likelihood + l1_penalty`; the quantity the optimizer
/// descends.
pub fn penalized_objective(params: &ParamSet, data: &Dataset, config: &FitConfig) -> Result<f64> {
    config.validate()?;
    Ok(negative_log_likelihood(params, &config.model, data)? + l1_penalty(params, config.l1_lambda))
}

fn nll_from_counts(params: &ParamSet, model: &ModelConfig, counts: &CountTable) -> f64 {
    let table = match TermTable::compute(params, model) {
        Ok(t) => t,
        Err(_) => return f64::INFINITY,
    };
    let mut nll = 0.0;
    for (idx, scenario) in Scenario::MODELED.iter().enumerate() {
        let row = &counts.counts[idx];
        if row.iter().all(|c| *c == 0.0) {
            continue;
        }
        let dist = match table.choice_distribution(params, scenario) {
            Ok(d) => d,
            Err(_) => return f64::INFINITY,
        };
        for u in Utterance::ALL {
            let c = row[u.index()];
            if c > 0.0 {
                nll -= c * dist.prob(u).ln();
            }
        }
    }
    nll
}

struct Objective<'a> {
    counts: &'a CountTable,
    model: ModelConfig,
    epsilon: f64,
    temperature: f64,
    l1_lambda: f64,
}

impl Objective<'_> {
    fn params(&self, theta: &[f64; N_PARAMS]) -> ParamSet {
        from_unconstrained(theta, self.epsilon, self.temperature)
    }

    /// Smooth part (NLL); `+inf` when the point is numerically unusable.
    fn smooth(&self, theta: &[f64; N_PARAMS]) -> f64 {
        nll_from_counts(&self.params(theta), &self.model, self.counts)
    }

    fn penalty(&self, theta: &[f64; N_PARAMS]) -> f64 {
        self.l1_lambda * theta[2..].iter().map(|a| a.abs()).sum::<f64>()
    }
}

fn central_difference(
    objective: &Objective<'_>,
    theta: &[f64; N_PARAMS],
    h: f64,
    ablation: &Ablation,
) -> Result<[f64; N_PARAMS]> {
    let mut grad = [0.0; N_PARAMS];
    for i in 0..N_PARAMS {
        if ablation.pins(i) {
            continue;
        }
        let mut plus = *theta;
        let mut minus = *theta;
        plus[i] += h;
        minus[i] -= h;
        let (f_plus, f_minus) = (objective.smooth(&plus), objective.smooth(&minus));
        if !f_plus.is_finite() || !f_minus.is_finite() {
            return Err(Error::Numeric(format!(
                "objective is not finite near coordinate {i} of {theta:?}"
            )));
        }
        grad[i] = (f_plus - f_minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Central finite-difference gradient of the smooth objective (the NLL, not
/// the penalty) in unconstrained coordinates. Coordinates pinned by the
/// configured ablation are reported as zero.
pub fn gradient(params: &ParamSet, data: &Dataset, config: &FitConfig) -> Result<[f64; N_PARAMS]> {
    config.validate()?;
    params.validate()?;
    let counts = CountTable::from_dataset(data)?;
    let objective = Objective {
        counts: &counts,
        model: config.model,
        epsilon: params.epsilon,
        temperature: params.temperature,
        l1_lambda: config.l1_lambda,
    };
    central_difference(&objective, &to_unconstrained(params), config.finite_difference_h, &config.ablation)
}

fn soft_threshold(x: f64, threshold: f64) -> f64 {
    if x > threshold {
        x - threshold
    } else if x < -threshold {
        x + threshold
    } else {
        0.0
    }
}

/// One proximal step from `theta` along `-grad` with the given step size:
/// gradient move, then soft-thresholding of the weight coordinates.
fn prox_step(
    theta: &[f64; N_PARAMS],
    grad: &[f64; N_PARAMS],
    step: f64,
    l1_lambda: f64,
    ablation: &Ablation,
) -> [f64; N_PARAMS] {
    let mut out = [0.0; N_PARAMS];
    for i in 0..N_PARAMS {
        if ablation.pins(i) {
            continue;
        }
        let moved = theta[i] - step * grad[i];
        out[i] = if i >= 2 { soft_threshold(moved, step * l1_lambda) } else { moved };
    }
    out
}

struct Descent {
    theta: [f64; N_PARAMS],
    nll: f64,
    penalized: f64,
    converged: bool,
    iterations: u32,
}

const MAX_BACKTRACKS: u32 = 60;

fn descend(
    objective: &Objective<'_>,
    mut theta: [f64; N_PARAMS],
    config: &FitConfig,
) -> Result<Descent> {
    for (i, slot) in theta.iter_mut().enumerate() {
        if config.ablation.pins(i) {
            *slot = 0.0;
        }
    }
    let mut nll = objective.smooth(&theta);
    if !nll.is_finite() {
        return Err(Error::Numeric("objective is not finite at the starting point".into()));
    }
    let mut penalized = nll + objective.penalty(&theta);
    let initial_step = config.step_rule.step_size();
    let mut step = initial_step;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iterations {
        iterations += 1;
        let grad = central_difference(objective, &theta, config.finite_difference_h, &config.ablation)?;

        match config.step_rule {
            StepRule::Fixed { step } => {
                let candidate = prox_step(&theta, &grad, step, config.l1_lambda, &config.ablation);
                let nll_new = objective.smooth(&candidate);
                if !nll_new.is_finite() {
                    return Err(Error::Numeric(
                        "fixed-step descent left the numerically valid region".into(),
                    ));
                }
                let penalized_new = nll_new + objective.penalty(&candidate);
                let delta = (penalized - penalized_new).abs();
                theta = candidate;
                nll = nll_new;
                penalized = penalized_new;
                if delta < config.convergence_tol {
                    converged = true;
                    break;
                }
            }
            StepRule::Adaptive { .. } => {
                let mut accepted = false;
                let mut trial = step;
                for backtrack in 0..MAX_BACKTRACKS {
                    let candidate =
                        prox_step(&theta, &grad, trial, config.l1_lambda, &config.ablation);
                    let nll_new = objective.smooth(&candidate);
                    let penalized_new = nll_new + objective.penalty(&candidate);
                    if penalized_new.is_finite() && penalized_new <= penalized {
                        let delta = penalized - penalized_new;
                        theta = candidate;
                        nll = nll_new;
                        penalized = penalized_new;
                        accepted = true;
                        if backtrack == 0 {
                            step = (trial * 1.5).min(initial_step * 16.0);
                        } else {
                            step = trial;
                        }
                        if delta < config.convergence_tol {
                            converged = true;
                        }
                        break;
                    }
                    trial *= 0.5;
                }
                if !accepted {
                    // No step of any size improves the objective: stationary
                    // to machine precision.
                    converged = true;
                }
                if converged {
                    break;
                }
            }
        }
    }

    Ok(Descent { theta, nll, penalized, converged, iterations })
}

/// The initial unconstrained point for one restart; pinned coordinates start
/// (and stay) at zero. Exposed so callers can audit reproducibility.
pub fn initial_point(config: &FitConfig, restart_index: u32) -> [f64; N_PARAMS] {
    let mut rng = stream_rng(config.seed, restart_index as u64);
    let mut theta = [0.0; N_PARAMS];
    theta[0] = rng.random_range(-3.0..3.0);
    theta[1] = rng.random_range(-3.0..3.0);
    for slot in theta.iter_mut().skip(2) {
        *slot = rng.random_range(-2.0..2.0);
    }
    for (i, slot) in theta.iter_mut().enumerate() {
        if config.ablation.pins(i) {
            *slot = 0.0;
        }
    }
    theta
}

/// Fit the model to a single group's responses.
///
/// Runs `config.restarts` random initializations (plus any warm starts),
/// descends each, and returns the lowest penalized objective; ties go to the
/// lowest restart index. Deterministic given `config.seed`.
///
/// Never fails just because optimization stalled: if no restart met the
/// convergence tolerance the best point is still returned with
/// `converged = false`.
pub fn fit(data: &Dataset, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Domain("cannot fit an empty dataset".into()));
    }
    let groups = data.groups_present();
    if groups.len() > 1 {
        return Err(Error::Domain(format!(
            "dataset mixes participant groups {groups:?}; fit one group at a time"
        )));
    }
    let counts = CountTable::from_dataset(data)?;
    let objective = Objective {
        counts: &counts,
        model: config.model,
        epsilon: config.epsilon,
        temperature: config.temperature,
        l1_lambda: config.l1_lambda,
    };

    let mut best: Option<(u32, Descent)> = None;
    let total = config.restarts as usize + config.warm_starts.len();
    for index in 0..total {
        let theta0 = if index < config.restarts as usize {
            initial_point(config, index as u32)
        } else {
            to_unconstrained(&config.warm_starts[index - config.restarts as usize])
        };
        let outcome = descend(&objective, theta0, config)?;
        let better = match &best {
            None => true,
            Some((_, b)) => outcome.penalized < b.penalized,
        };
        if better {
            best = Some((index as u32, outcome));
        }
    }

    let (restart_index, descent) = best.expect("at least one restart ran");
    Ok(FitResult {
        params: objective.params(&descent.theta),
        nll: descent.nll,
        penalized_objective: descent.penalized,
        converged: descent.converged,
        restart_index,
        iterations: descent.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{simulate_dataset, Group};

    fn small_data(seed: u64) -> Dataset {
        simulate_dataset(&ParamSet::default(), &ModelConfig::default(), 25, Group::Tactful, seed)
            .unwrap()
    }

    fn quick_config() -> FitConfig {
        FitConfig { restarts: 4, max_iterations: 600, seed: 11, ..Default::default() }
    }

    #[test]
    fn nll_uniform_choice() {
        let params = ParamSet {
            alpha_explanandum: 0.0,
            alpha_latents: 0.0,
            alpha_social_confident: 0.0,
            alpha_social_insecure: 0.0,
            ..Default::default()
        };
        let data = Dataset::parse_responses_csv(
            "participant_id,group,structure,temperament,truth_excess,truth_virus,said_excess,said_virus\n\
             p1,tactful,conjunctive,insecure,1,1,0,1\n"
                .as_bytes(),
        )
        .unwrap();
        let nll = negative_log_likelihood(&params, &ModelConfig::default(), &data).unwrap();
        assert!((nll - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn nll_additive_under_duplication() {
        let data = small_data(1);
        let mut doubled = data.clone();
        doubled.records.extend(data.records.iter().cloned());
        let params = ParamSet::default();
        let cfg = ModelConfig::default();
        let one = negative_log_likelihood(&params, &cfg, &data).unwrap();
        let two = negative_log_likelihood(&params, &cfg, &doubled).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-9);
    }

    #[test]
    fn nll_frozen_count_example() {
        // One scenario observed 10 times with the utterance whose softmax
        // probability is e/(e+3): utilities (1, 0, 0, 0).
        let probs = crate::explainer::softmax(&[1.0, 0.0, 0.0, 0.0], 1.0);
        let expected = -10.0 * probs.prob(Utterance::new(true, true)).ln();
        assert!((expected - 7.436_683_806_286_79).abs() < 1e-10);
    }

    #[test]
    fn penalty_arithmetic() {
        let params = ParamSet {
            alpha_explanandum: 1.0,
            alpha_latents: 1.0,
            alpha_social_confident: 0.0,
            alpha_social_insecure: 5.0,
            ..Default::default()
        };
        assert!((l1_penalty(&params, 0.005) - 0.035).abs() < 1e-15);
        assert_eq!(l1_penalty(&params, 0.0), 0.0);

        let data = small_data(2);
        let config = FitConfig::default();
        let pen = penalized_objective(&params, &data, &config).unwrap();
        let nll = negative_log_likelihood(&params, &config.model, &data).unwrap();
        assert!((pen - nll - 0.035).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_round_trip() {
        let params = ParamSet { prior_excess: 0.07, prior_virus: 0.42, ..Default::default() };
        let theta = to_unconstrained(&params);
        let back = from_unconstrained(&theta, params.epsilon, params.temperature);
        assert!((back.prior_excess - 0.07).abs() < 1e-14);
        assert!((back.prior_virus - 0.42).abs() < 1e-14);
        assert_eq!(back.alpha_social_insecure, params.alpha_social_insecure);
    }

    #[test]
    fn gradient_matches_directional_difference() {
        let data = small_data(3);
        let config = FitConfig::default();
        let params = ParamSet { prior_excess: 0.2, prior_virus: 0.15, ..Default::default() };
        let g = gradient(&params, &data, &config).unwrap();
        let theta = to_unconstrained(&params);
        let h = 1e-4;
        for i in 0..N_PARAMS {
            let mut plus = theta;
            let mut minus = theta;
            plus[i] += h;
            minus[i] -= h;
            let f = |t: &[f64; N_PARAMS]| {
                negative_log_likelihood(
                    &from_unconstrained(t, params.epsilon, params.temperature),
                    &config.model,
                    &data,
                )
                .unwrap()
            };
            let approx = (f(&plus) - f(&minus)) / (2.0 * h);
            let scale = approx.abs().max(g[i].abs()).max(1e-6);
            assert!(
                (approx - g[i]).abs() / scale < 1e-4,
                "coordinate {i}: {approx} vs {}",
                g[i]
            );
        }
    }

    #[test]
    fn fully_ablated_model_is_uniform() {
        let data = small_data(4);
        let config = FitConfig {
            ablation: Ablation { regret: true, latents: true, explanandum: true },
            restarts: 2,
            max_iterations: 200,
            ..Default::default()
        };
        let result = fit(&data, &config).unwrap();
        assert_eq!(result.params.alpha_explanandum, 0.0);
        assert_eq!(result.params.alpha_latents, 0.0);
        assert_eq!(result.params.alpha_social_confident, 0.0);
        assert_eq!(result.params.alpha_social_insecure, 0.0);
        let expected = data.len() as f64 * 4.0f64.ln();
        assert!((result.nll - expected).abs() < 1e-9);
    }

    #[test]
    fn fit_is_deterministic() {
        let data = small_data(5);
        let config = quick_config();
        let a = fit(&data, &config).unwrap();
        let b = fit(&data, &config).unwrap();
        assert_eq!(a, b);
        assert!(a.converged);
    }

    #[test]
    fn fit_beats_every_initialization() {
        let data = small_data(6);
        let config = quick_config();
        let result = fit(&data, &config).unwrap();
        for r in 0..config.restarts {
            let theta0 = initial_point(&config, r);
            let at_init = penalized_objective(
                &from_unconstrained(&theta0, config.epsilon, config.temperature),
                &data,
                &config,
            )
            .unwrap();
            assert!(result.penalized_objective <= at_init + 1e-9);
        }
        // Priors came back strictly interior.
        assert!(result.params.prior_excess > 0.0 && result.params.prior_excess < 1.0);
        assert!(result.params.prior_virus > 0.0 && result.params.prior_virus < 1.0);
    }

    #[test]
    fn mixed_groups_rejected() {
        let mut data = small_data(7);
        let mut extra =
            simulate_dataset(&ParamSet::default(), &ModelConfig::default(), 2, Group::Candid, 8)
                .unwrap();
        data.records.append(&mut extra.records);
        assert!(matches!(fit(&data, &quick_config()), Err(Error::Domain(_))));
    }

    #[test]
    fn ablation_parsing() {
        assert_eq!(Ablation::parse("regret").unwrap(), Ablation::REGRET);
        assert_eq!(Ablation::parse("regret+latents").unwrap(), Ablation::REGRET_AND_LATENTS);
        assert_eq!(Ablation::REGRET_AND_LATENTS.pinned_parameter_count(), 3);
        assert_eq!(Ablation::REGRET.label(), "regret");
        assert_eq!(Ablation::NONE.label(), "none");
        assert!(Ablation::parse("social").is_err());
    }

    #[test]
    fn stationarity_at_unpenalized_optimum() {
        let data = small_data(9);
        let config = FitConfig {
            l1_lambda: 0.0,
            restarts: 3,
            max_iterations: 4000,
            convergence_tol: 1e-12,
            seed: 21,
            ..Default::default()
        };
        let result = fit(&data, &config).unwrap();
        let g = gradient(&result.params, &data, &config).unwrap();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 1e-4, "gradient norm at optimum: {norm}");
    }
}
