//! The doctor agent: utility terms per candidate utterance and the softmax
//! choice rule over them.
//!
//! For a scenario (true world + patient temperament) and an utterance `u`,
//! the doctor weighs three quantities computed on the patient's updated
//! belief:
//!
//! * `v_explanandum` — how unsurprising the sickness now is, `Pr(S | u)`;
//! * `v_latents` — the posterior the patient assigns to the *true* world,
//!   which penalizes lying by omission (a partial utterance can explain away
//!   the unmentioned factor);
//! * `social_cost` — the anticipated regret appraisal, built on the
//!   counterfactual "would I have gotten sick had I not drunk?".
//!
//! Total utility is a linear combination; the regret weight depends on the
//! patient's temperament. Choice probabilities are a softmax over the four
//! utterances.

use crate::causal::{
    condition_on_sick, expected_regret_with_mode, independent_prior, prob_sick, restrict,
    BeliefState, CounterfactualMode, FactorState, LikelihoodTable, Utterance,
};
use crate::error::{Error, Result};

/// Whether the patient is comfortable with their past choices or prone to
/// second-guessing them. Selects which regret weight applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Temperament {
    Confident,
    Insecure,
}

impl Temperament {
    pub fn as_str(self) -> &'static str {
        match self {
            Temperament::Confident => "confident",
            Temperament::Insecure => "insecure",
        }
    }

    pub fn from_str_strict(s: &str) -> Result<Self> {
        match s {
            "confident" => Ok(Temperament::Confident),
            "insecure" => Ok(Temperament::Insecure),
            other => Err(Error::Domain(format!(
                "unknown temperament `{other}` (expected confident or insecure)"
            ))),
        }
    }
}

impl std::fmt::Display for Temperament {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The doctor's private information: which factors are actually present and
/// the patient's temperament.
///
/// A sick patient has at least one factor, so `truth != (0, 0)` for every
/// modeled scenario; data ingestion enforces it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    pub truth: FactorState,
    pub temperament: Temperament,
}

impl Scenario {
    /// The six modeled scenarios: both temperaments crossed with the three
    /// possible sick worlds, in canonical order.
    pub const MODELED: [Scenario; 6] = [
        Scenario { truth: FactorState::new(true, false), temperament: Temperament::Confident },
        Scenario { truth: FactorState::new(false, true), temperament: Temperament::Confident },
        Scenario { truth: FactorState::new(true, true), temperament: Temperament::Confident },
        Scenario { truth: FactorState::new(true, false), temperament: Temperament::Insecure },
        Scenario { truth: FactorState::new(false, true), temperament: Temperament::Insecure },
        Scenario { truth: FactorState::new(true, true), temperament: Temperament::Insecure },
    ];

    pub const fn new(truth: FactorState, temperament: Temperament) -> Self {
        Scenario { truth, temperament }
    }

    /// Position in [`Scenario::MODELED`], or `None` for the unmodeled
    /// no-factor truths.
    pub fn index(&self) -> Option<usize> {
        Scenario::MODELED.iter().position(|s| s == self)
    }

    /// Label of the form `<temperament>:<excess bit><virus bit>`, e.g.
    /// `insecure:11`.
    pub fn label(&self) -> String {
        format!("{}:{}", self.temperament, self.truth.bits())
    }

    pub fn from_label(label: &str) -> Result<Self> {
        let err = || {
            Error::Domain(format!(
                "bad scenario label `{label}`; expected <temperament>:<EV bits>, e.g. insecure:11"
            ))
        };
        let (temperament, bits) = label.split_once(':').ok_or_else(err)?;
        let temperament = Temperament::from_str_strict(temperament)?;
        let bits: Vec<char> = bits.chars().collect();
        let (excess, virus) = match bits.as_slice() {
            [e @ ('0' | '1'), v @ ('0' | '1')] => (*e == '1', *v == '1'),
            _ => return Err(err()),
        };
        let scenario = Scenario::new(FactorState::new(excess, virus), temperament);
        if scenario.index().is_none() {
            return Err(Error::Domain(format!(
                "scenario `{label}` is not modeled: a sick patient has at least one factor"
            )));
        }
        Ok(scenario)
    }
}

/// The model's parameters: two prior marginals, four utility weights, and
/// the fixed (not fitted) likelihood epsilon and softmax temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    pub prior_excess: f64,
    pub prior_virus: f64,
    pub alpha_explanandum: f64,
    pub alpha_latents: f64,
    pub alpha_social_confident: f64,
    pub alpha_social_insecure: f64,
    /// `Pr(S = 1)` with neither factor present. Fixed configuration.
    pub epsilon: f64,
    /// Softmax sharpness. Fixed configuration; per-term weights absorb scale.
    pub temperature: f64,
}

impl Default for ParamSet {
    /// A regret-averse tactful explainer; also the generator used by the
    /// simulation and recovery tooling.
    fn default() -> Self {
        ParamSet {
            prior_excess: 0.1,
            prior_virus: 0.1,
            alpha_explanandum: 1.0,
            alpha_latents: 1.0,
            alpha_social_confident: 0.0,
            alpha_social_insecure: 5.0,
            epsilon: 0.001,
            temperature: 1.0,
        }
    }
}

impl ParamSet {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("prior_excess", self.prior_excess), ("prior_virus", self.prior_virus)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain(format!(
                    "{name} = {p} must lie strictly inside (0, 1)"
                )));
            }
        }
        for (name, a) in self.named_alphas() {
            if !a.is_finite() {
                return Err(Error::Domain(format!("{name} = {a} must be finite")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.125) {
            return Err(Error::Domain(format!(
                "epsilon = {} must lie in (0, 0.125) so that explaining away points the right way",
                self.epsilon
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Domain(format!(
                "temperature = {} must be a positive real",
                self.temperature
            )));
        }
        Ok(())
    }

    pub fn named_alphas(&self) -> [(&'static str, f64); 4] {
        [
            ("alpha_explanandum", self.alpha_explanandum),
            ("alpha_latents", self.alpha_latents),
            ("alpha_social_confident", self.alpha_social_confident),
            ("alpha_social_insecure", self.alpha_social_insecure),
        ]
    }

    /// The regret weight that applies to a patient of this temperament.
    pub fn alpha_social(&self, temperament: Temperament) -> f64 {
        match temperament {
            Temperament::Confident => self.alpha_social_confident,
            Temperament::Insecure => self.alpha_social_insecure,
        }
    }

    /// The likelihood table induced by this parameter set.
    pub fn likelihood_table(&self) -> Result<LikelihoodTable> {
        LikelihoodTable::from_epsilon(self.epsilon)
    }

    /// The patient's prior belief induced by this parameter set.
    pub fn prior(&self) -> Result<BeliefState> {
        independent_prior(self.prior_excess, self.prior_virus)
    }
}

/// Structural switches that are not parameters: how the counterfactual is
/// read and whether the latent posterior conditions on the sickness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub counterfactual: CounterfactualMode,
    /// When true (default), `v_latents` is the patient's posterior over the
    /// true world given both the utterance and `S = 1`, so partial
    /// disclosures are penalized through explaining away. When false the
    /// sickness is not conditioned on.
    pub latents_given_sickness: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            counterfactual: CounterfactualMode::Twin,
            latents_given_sickness: true,
        }
    }
}

/// Choice probabilities over the four utterances, in [`Utterance::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceDistribution {
    probs: [f64; 4],
}

impl ChoiceDistribution {
    pub fn from_probs(probs: [f64; 4]) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || total <= 0.0 {
            return Err(Error::Domain(format!(
                "choice probabilities {probs:?} must be nonnegative with positive total"
            )));
        }
        Ok(ChoiceDistribution {
            probs: probs.map(|p| p / total),
        })
    }

    pub fn prob(&self, utterance: Utterance) -> f64 {
        self.probs[utterance.index()]
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    /// The most probable utterance; earlier entries of [`Utterance::ALL`]
    /// win exact ties.
    pub fn argmax(&self) -> Utterance {
        let mut best = Utterance::ALL[0];
        for u in Utterance::ALL {
            if self.prob(u) > self.prob(best) {
                best = u;
            }
        }
        best
    }

    /// Draw an utterance by inverse transform on one uniform variate.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Utterance {
        let x: f64 = rng.random();
        let mut cumulative = 0.0;
        for u in Utterance::ALL {
            cumulative += self.prob(u);
            if x < cumulative {
                return u;
            }
        }
        Utterance::ALL[3]
    }
}

/// The patient's belief after hearing the utterance (before any sickness
/// conditioning).
fn belief_after(params: &ParamSet, scenario: &Scenario, u: Utterance) -> Result<BeliefState> {
    restrict(&params.prior()?, scenario.truth, u)
}

/// Understanding of the explanandum: `Pr(S | u)` under the patient's
/// utterance-updated belief. Not conditioned on the sickness itself — it
/// measures how unsurprising the sickness has become.
pub fn v_explanandum(params: &ParamSet, _cfg: &ModelConfig, scenario: &Scenario, u: Utterance) -> Result<f64> {
    params.validate()?;
    let table = params.likelihood_table()?;
    Ok(prob_sick(&belief_after(params, scenario, u)?, &table))
}

/// Accuracy about the latent factors: the posterior probability the patient
/// assigns to the true world after the utterance (and, by default, after
/// conditioning on being sick).
pub fn v_latents(params: &ParamSet, cfg: &ModelConfig, scenario: &Scenario, u: Utterance) -> Result<f64> {
    params.validate()?;
    let table = params.likelihood_table()?;
    let belief = belief_after(params, scenario, u)?;
    let posterior = if cfg.latents_given_sickness {
        condition_on_sick(&belief, &table)?
    } else {
        belief
    };
    Ok(posterior.weight(scenario.truth))
}

/// The regret appraisal the utterance induces, per the configured
/// counterfactual mode.
pub fn social_cost(params: &ParamSet, cfg: &ModelConfig, scenario: &Scenario, u: Utterance) -> Result<f64> {
    params.validate()?;
    let table = params.likelihood_table()?;
    let belief = belief_after(params, scenario, u)?;
    expected_regret_with_mode(&belief, &table, cfg.counterfactual)
}

/// The three utility terms for one (scenario truth, utterance) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityTerms {
    pub v_explanandum: f64,
    pub v_latents: f64,
    pub social_cost: f64,
}

impl UtilityTerms {
    /// Linear combination with the weights for the given temperament.
    pub fn combined(&self, params: &ParamSet, temperament: Temperament) -> f64 {
        params.alpha_explanandum * self.v_explanandum
            + params.alpha_latents * self.v_latents
            - params.alpha_social(temperament) * self.social_cost
    }
}

/// Total utility of an utterance:
/// `α_explanandum · v_explanandum + α_latents · v_latents − α_social^R · social_cost`.
pub fn total_utility(params: &ParamSet, cfg: &ModelConfig, scenario: &Scenario, u: Utterance) -> Result<f64> {
    Ok(utility_terms(params, cfg, scenario, u)?.combined(params, scenario.temperament))
}

/// All three terms at once; what [`total_utility`] and the fitting fast path
/// are built on.
pub fn utility_terms(params: &ParamSet, cfg: &ModelConfig, scenario: &Scenario, u: Utterance) -> Result<UtilityTerms> {
    Ok(UtilityTerms {
        v_explanandum: v_explanandum(params, cfg, scenario, u)?,
        v_latents: v_latents(params, cfg, scenario, u)?,
        social_cost: social_cost(params, cfg, scenario, u)?,
    })
}

/// Softmax over the four utterances' total utilities,
/// `Pr(u) ∝ exp(temperature · utility(u))`, computed with max subtraction.
pub fn choice_distribution(params: &ParamSet, cfg: &ModelConfig, scenario: &Scenario) -> Result<ChoiceDistribution> {
    let mut utilities = [0.0; 4];
    for u in Utterance::ALL {
        utilities[u.index()] = total_utility(params, cfg, scenario, u)?;
    }
    Ok(softmax(&utilities, params.temperature))
}

/// Stable softmax of `temperature * utilities`.
pub fn softmax(utilities: &[f64; 4], temperature: f64) -> ChoiceDistribution {
    let max = utilities.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps = utilities.map(|v| (temperature * (v - max)).exp());
    let total: f64 = exps.iter().sum();
    ChoiceDistribution {
        probs: exps.map(|e| e / total),
    }
}

/// Precomputed utility terms for every (truth, utterance) cell.
///
/// The terms depend on the priors, epsilon, and model switches but not on
/// the alpha weights or temperament, so a fitting loop can rebuild utilities
/// from one table while it varies the weights.
#[derive(Debug, Clone, Copy)]
pub struct TermTable {
    terms: [[UtilityTerms; 4]; 3],
}

/// The three sick truths, in [`Scenario::MODELED`] truth order.
pub const SICK_TRUTHS: [FactorState; 3] = [
    FactorState::new(true, false),
    FactorState::new(false, true),
    FactorState::new(true, true),
];

pub(crate) fn sick_truth_index(truth: FactorState) -> Option<usize> {
    SICK_TRUTHS.iter().position(|t| *t == truth)
}

impl TermTable {
    pub fn compute(params: &ParamSet, cfg: &ModelConfig) -> Result<TermTable> {
        let mut terms = [[UtilityTerms { v_explanandum: 0.0, v_latents: 0.0, social_cost: 0.0 }; 4]; 3];
        for (ti, truth) in SICK_TRUTHS.iter().enumerate() {
            // Temperament does not enter the terms; pick one arbitrarily.
            let scenario = Scenario::new(*truth, Temperament::Confident);
            for u in Utterance::ALL {
                terms[ti][u.index()] = utility_terms(params, cfg, &scenario, u)?;
            }
        }
        Ok(TermTable { terms })
    }

    pub fn terms(&self, truth: FactorState, u: Utterance) -> Result<&UtilityTerms> {
        let ti = sick_truth_index(truth).ok_or_else(|| {
            Error::Domain(format!("truth {truth:?} is not a modeled sick world"))
        })?;
        Ok(&self.terms[ti][u.index()])
    }

    /// Choice distribution for a scenario, rebuilt from the cached terms with
    /// the given weights.
    pub fn choice_distribution(&self, params: &ParamSet, scenario: &Scenario) -> Result<ChoiceDistribution> {
        let ti = sick_truth_index(scenario.truth).ok_or_else(|| {
            Error::Domain(format!("truth {:?} is not a modeled sick world", scenario.truth))
        })?;
        let mut utilities = [0.0; 4];
        for u in Utterance::ALL {
            utilities[u.index()] = self.terms[ti][u.index()].combined(params, scenario.temperament);
        }
        Ok(softmax(&utilities, params.temperature))
    }
}
