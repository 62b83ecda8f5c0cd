//! The discrete structural causal model underlying the explanation setting.
//!
//! A patient is sick (`S = 1`) and the sickness has two candidate causes:
//! drinking past a personal threshold (`excess`) and a virus (`virus`).
//! The four joint settings of those binary factors are the *latent worlds*.
//! A [`BeliefState`] is a distribution over the worlds; a [`LikelihoodTable`]
//! maps each world to `Pr(S = 1)`.
//!
//! Everything here is a pure function over immutable values:
//!
//! * Bayesian updates: restricting a belief to what an utterance reveals
//!   ([`restrict`]) and conditioning on the observed sickness
//!   ([`condition_on_sick`]), which produces the classic explaining-away
//!   effect in this collider structure.
//! * Counterfactuals: `Pr(S = 1 | do(excess := 0))` computed through a twin
//!   network with a single shared uniform noise variable
//!   ([`counterfactual_sick_given_world`]), and the regret appraisal built
//!   on it ([`expected_regret`]).

use crate::error::{Error, Result};

/// Tolerance for "weights sum to one" checks.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// One latent world: did the patient drink past their threshold, and do they
/// have the virus?
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorState {
    /// Drinking exceeded the patient's personal threshold.
    pub excess: bool,
    /// The patient carries the virus.
    pub virus: bool,
}

impl FactorState {
    /// All four worlds, in index order `(0,0), (0,1), (1,0), (1,1)`.
    pub const ALL: [FactorState; 4] = [
        FactorState { excess: false, virus: false },
        FactorState { excess: false, virus: true },
        FactorState { excess: true, virus: false },
        FactorState { excess: true, virus: true },
    ];

    pub const fn new(excess: bool, virus: bool) -> Self {
        FactorState { excess, virus }
    }

    /// Position of this world in [`FactorState::ALL`].
    pub const fn index(self) -> usize {
        (self.excess as usize) * 2 + self.virus as usize
    }

    /// Two-character form used in scenario labels, e.g. `11` for both factors.
    pub fn bits(self) -> String {
        format!("{}{}", self.excess as u8, self.virus as u8)
    }
}

/// `Pr(S = 1 | excess, virus)` for each of the four worlds.
///
/// `p00` plays the role of the background rate when neither factor is
/// present. The table must be monotone in each factor; the monotone
/// counterfactual coupling below relies on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodTable {
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
    pub p11: f64,
}

impl LikelihoodTable {
    pub fn new(p00: f64, p10: f64, p01: f64, p11: f64) -> Result<Self> {
        for (name, p) in [("p00", p00), ("p10", p10), ("p01", p01), ("p11", p11)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::Domain(format!(
                    "likelihood entry {name} = {p} is outside [0, 1]"
                )));
            }
        }
        if !(p00 <= p10 && p10 <= p11 && p00 <= p01 && p01 <= p11) {
            return Err(Error::Domain(format!(
                "likelihood table ({p00}, {p10}, {p01}, {p11}) is not monotone in each factor"
            )));
        }
        Ok(LikelihoodTable { p00, p10, p01, p11 })
    }

    /// The factor-counting table used throughout: `epsilon` with no factors,
    /// 0.25 with one factor, 0.5 with both.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.25) {
            return Err(Error::Domain(format!(
                "epsilon = {epsilon} must lie in (0, 0.25) for the factor-counting table"
            )));
        }
        LikelihoodTable::new(epsilon, 0.25, 0.25, 0.5)
    }

    /// `Pr(S = 1)` in the given world.
    pub fn probability(&self, world: FactorState) -> f64 {
        match (world.excess, world.virus) {
            (false, false) => self.p00,
            (true, false) => self.p10,
            (false, true) => self.p01,
            (true, true) => self.p11,
        }
    }
}

/// A distribution over the four latent worlds.
///
/// Weights are kept nonnegative and normalized to sum to one within
/// [`NORMALIZATION_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefState {
    weights: [f64; 4],
}

impl BeliefState {
    /// Build a belief from raw nonnegative weights, normalizing them.
    pub fn from_weights(weights: [f64; 4]) -> Result<Self> {
        let mut total = 0.0;
        for (world, w) in FactorState::ALL.iter().zip(weights) {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!(
                    "belief weight for world {world:?} is {w}; weights must be finite and nonnegative"
                )));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::Invariant(
                "belief state has zero total weight".into(),
            ));
        }
        Ok(BeliefState {
            weights: weights.map(|w| w / total),
        })
    }

    /// All mass on a single world.
    pub fn point_mass(world: FactorState) -> Self {
        let mut weights = [0.0; 4];
        weights[world.index()] = 1.0;
        BeliefState { weights }
    }

    pub fn weight(&self, world: FactorState) -> f64 {
        self.weights[world.index()]
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    /// `Pr(excess = 1)` under this belief.
    pub fn marginal_excess(&self) -> f64 {
        FactorState::ALL
            .iter()
            .filter(|w| w.excess)
            .map(|w| self.weight(*w))
            .sum()
    }

    /// `Pr(virus = 1)` under this belief.
    pub fn marginal_virus(&self) -> f64 {
        FactorState::ALL
            .iter()
            .filter(|w| w.virus)
            .map(|w| self.weight(*w))
            .sum()
    }
}

/// What the doctor chooses to reveal: any subset of the two true factor
/// values, including nothing at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Utterance {
    pub reveal_excess: bool,
    pub reveal_virus: bool,
}

impl Utterance {
    /// Canonical order used everywhere a distribution or table is indexed:
    /// both factors, excess only, virus only, nothing.
    pub const ALL: [Utterance; 4] = [
        Utterance { reveal_excess: true, reveal_virus: true },
        Utterance { reveal_excess: true, reveal_virus: false },
        Utterance { reveal_excess: false, reveal_virus: true },
        Utterance { reveal_excess: false, reveal_virus: false },
    ];

    pub const fn new(reveal_excess: bool, reveal_virus: bool) -> Self {
        Utterance { reveal_excess, reveal_virus }
    }

    /// Position of this utterance in [`Utterance::ALL`].
    pub fn index(self) -> usize {
        match (self.reveal_excess, self.reveal_virus) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
    }

    /// Short label used in exported tables: `TV`, `T`, `V`, or `none`.
    pub fn label(self) -> &'static str {
        match (self.reveal_excess, self.reveal_virus) {
            (true, true) => "TV",
            (true, false) => "T",
            (false, true) => "V",
            (false, false) => "none",
        }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        match label {
            "TV" => Ok(Utterance::new(true, true)),
            "T" => Ok(Utterance::new(true, false)),
            "V" => Ok(Utterance::new(false, true)),
            "none" => Ok(Utterance::new(false, false)),
            other => Err(Error::Domain(format!(
                "unknown utterance label `{other}` (expected TV, T, V, or none)"
            ))),
        }
    }
}

/// How `Pr(S = 1 | do(excess := 0))` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CounterfactualMode {
    /// Twin network: abduct the shared noise variable from the observed
    /// sickness, intervene, and re-predict. The default.
    #[default]
    Twin,
    /// Plain intervention with no abduction: neither the noise variable nor
    /// the world belief is conditioned on the sickness.
    Interventional,
}

/// Independent prior over the worlds with the given factor marginals.
///
/// Both marginals must be strictly inside (0, 1); degenerate priors are
/// rejected rather than clamped so that configuration mistakes surface.
pub fn independent_prior(prior_excess: f64, prior_virus: f64) -> Result<BeliefState> {
    for (name, p) in [("prior_excess", prior_excess), ("prior_virus", prior_virus)] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "{name} = {p} must lie strictly inside (0, 1)"
            )));
        }
    }
    let mut weights = [0.0; 4];
    for world in FactorState::ALL {
        let pe = if world.excess { prior_excess } else { 1.0 - prior_excess };
        let pv = if world.virus { prior_virus } else { 1.0 - prior_virus };
        weights[world.index()] = pe * pv;
    }
    BeliefState::from_weights(weights)
}

/// Update a belief on a truthful utterance: worlds inconsistent with any
/// revealed factor's true value are eliminated and the rest renormalized.
///
/// Revealing nothing returns the input belief unchanged.
pub fn restrict(belief: &BeliefState, truth: FactorState, utterance: Utterance) -> Result<BeliefState> {
    if !utterance.reveal_excess && !utterance.reveal_virus {
        return Ok(*belief);
    }
    let mut weights = [0.0; 4];
    let mut eliminated_mass = false;
    for world in FactorState::ALL {
        let consistent = (!utterance.reveal_excess || world.excess == truth.excess)
            && (!utterance.reveal_virus || world.virus == truth.virus);
        if consistent {
            weights[world.index()] = belief.weight(world);
        } else if belief.weight(world) > 0.0 {
            eliminated_mass = true;
        }
    }
    if !eliminated_mass {
        // Nothing to renormalize; returning the input keeps restriction
        // exactly idempotent.
        return Ok(*belief);
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Invariant(
            "utterance eliminated all belief mass; truthful utterances cannot do this under an interior prior"
                .into(),
        ));
    }
    BeliefState::from_weights(weights)
}

/// Marginal probability of sickness under a belief: `Σ_w Pr(w) · Pr(S=1 | w)`.
pub fn prob_sick(belief: &BeliefState, table: &LikelihoodTable) -> f64 {
    FactorState::ALL
        .iter()
        .map(|w| belief.weight(*w) * table.probability(*w))
        .sum()
}

/// Bayesian update on the observation `S = 1`.
///
/// In this collider structure the update produces explaining away: once one
/// cause is known to be present, the posterior on the other drops.
pub fn condition_on_sick(belief: &BeliefState, table: &LikelihoodTable) -> Result<BeliefState> {
    let mut weights = [0.0; 4];
    for world in FactorState::ALL {
        weights[world.index()] = belief.weight(world) * table.probability(world);
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Domain(
            "belief assigns zero probability to sickness; cannot condition on S = 1".into(),
        ));
    }
    BeliefState::from_weights(weights)
}

/// Counterfactual sickness probability for one world under the twin network:
/// given that this world produced `S = 1`, what is `Pr(S = 1 | do(excess := 0))`?
///
/// The table is realized by a single shared uniform noise variable
/// (`S = 1 iff U <= Pr(S=1 | world)`), so abducting `U` from the observed
/// sickness and replaying it under the intervention gives
/// `table(0, virus) / table(excess, virus)`. When `excess = 0` the
/// intervention is a no-op and the result is exactly 1.
pub fn counterfactual_sick_given_world(table: &LikelihoodTable, world: FactorState) -> Result<f64> {
    let factual = table.probability(world);
    if factual <= 0.0 {
        return Err(Error::Domain(format!(
            "world {world:?} has Pr(S=1) = 0; cannot abduct from an impossible observation"
        )));
    }
    if !world.excess {
        return Ok(1.0);
    }
    let intervened = table.probability(FactorState::new(false, world.virus));
    Ok(intervened / factual)
}

/// Regret appraisal under the default twin-network reading; see
/// [`expected_regret_with_mode`].
pub fn expected_regret(belief: &BeliefState, table: &LikelihoodTable) -> Result<f64> {
    expected_regret_with_mode(belief, table, CounterfactualMode::Twin)
}

/// Expected regret of a sick patient holding `belief` over the worlds.
///
/// Regret is high when abstaining would likely have avoided the disease:
/// `1 − E[Pr(S = 1 | do(excess := 0))]`.
///
/// * [`CounterfactualMode::Twin`]: the expectation runs over the patient's
///   `S = 1`-conditioned posterior, with per-world counterfactuals from
///   [`counterfactual_sick_given_world`].
/// * [`CounterfactualMode::Interventional`]: no abduction at all; the
///   expectation runs over `belief` as given and each world contributes
///   `Pr(S = 1 | excess := 0, virus)` directly.
pub fn expected_regret_with_mode(
    belief: &BeliefState,
    table: &LikelihoodTable,
    mode: CounterfactualMode,
) -> Result<f64> {
    let expected_counterfactual = match mode {
        CounterfactualMode::Twin => {
            let posterior = condition_on_sick(belief, table)?;
            let mut acc = 0.0;
            for world in FactorState::ALL {
                let w = posterior.weight(world);
                if w > 0.0 {
                    acc += w * counterfactual_sick_given_world(table, world)?;
                }
            }
            acc
        }
        CounterfactualMode::Interventional => FactorState::ALL
            .iter()
            .map(|world| {
                belief.weight(*world)
                    * table.probability(FactorState::new(false, world.virus))
            })
            .sum(),
    };
    Ok(1.0 - expected_counterfactual)
}
