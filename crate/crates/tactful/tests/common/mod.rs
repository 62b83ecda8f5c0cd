//! A brute-force oracle, independent of the library's implementation path.
//!
//! Everything is recomputed from first principles: explicit four-world
//! enumeration with fresh arithmetic, counterfactuals by numerically
//! measuring sets of the shared uniform noise variable (never by the
//! library's ratio formula), and a naive softmax without max subtraction.

#![allow(dead_code)]

use rand::Rng;
use tactful::{ParamSet, Scenario, Temperament, Utterance};

pub const WORLDS: [(bool, bool); 4] =
    [(false, false), (false, true), (true, false), (true, true)];

/// The factor-counting sickness table, written out by cases.
pub fn sick_probability(epsilon: f64, excess: bool, virus: bool) -> f64 {
    match (excess, virus) {
        (false, false) => epsilon,
        (true, true) => 0.5,
        _ => 0.25,
    }
}

/// Measure of `{u in (0,1) : included(u)}` for a predicate that is true on
/// an initial segment, found by bisection on the boundary. This is how the
/// oracle integrates over the shared noise variable: it only ever evaluates
/// the mechanism, never probability arithmetic.
pub fn noise_measure(included: impl Fn(f64) -> bool) -> f64 {
    if included(1.0) {
        return 1.0;
    }
    if !included(f64::MIN_POSITIVE) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if included(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Twin-network counterfactual for one world, by noise integration: the
/// mechanism is `S = 1 iff U <= p(world)`, the observation constrains `U`,
/// and the intervention replays the same `U` with the drinking factor
/// forced off.
pub fn oracle_counterfactual(epsilon: f64, excess: bool, virus: bool) -> f64 {
    let mech = |u: f64, e: bool, v: bool| u <= sick_probability(epsilon, e, v);
    let consistent = noise_measure(|u| mech(u, excess, virus));
    let also_counterfactually_sick = noise_measure(|u| mech(u, excess, virus) && mech(u, false, virus));
    also_counterfactually_sick / consistent
}

/// Prior weight of one world under independent factor marginals.
fn prior_weight(params: &ParamSet, excess: bool, virus: bool) -> f64 {
    let pe = if excess { params.prior_excess } else { 1.0 - params.prior_excess };
    let pv = if virus { params.prior_virus } else { 1.0 - params.prior_virus };
    pe * pv
}

fn normalized(weights: [f64; 4]) -> [f64; 4] {
    let total: f64 = weights.iter().sum();
    weights.map(|w| w / total)
}

/// Belief after a truthful utterance, by prior enumeration and masking.
pub fn oracle_restricted(params: &ParamSet, truth: (bool, bool), u: Utterance) -> [f64; 4] {
    let mut weights = [0.0; 4];
    for (i, (e, v)) in WORLDS.iter().enumerate() {
        let ok = (!u.reveal_excess || *e == truth.0) && (!u.reveal_virus || *v == truth.1);
        if ok {
            weights[i] = prior_weight(params, *e, *v);
        }
    }
    normalized(weights)
}

/// Sickness-conditioned posterior over worlds.
pub fn oracle_posterior(epsilon: f64, belief: [f64; 4]) -> [f64; 4] {
    let mut weights = [0.0; 4];
    for (i, (e, v)) in WORLDS.iter().enumerate() {
        weights[i] = belief[i] * sick_probability(epsilon, *e, *v);
    }
    normalized(weights)
}

/// The three utility terms for one (truth, utterance) pair, recomputed from
/// scratch (twin counterfactual reading).
pub fn oracle_terms(params: &ParamSet, truth: (bool, bool), u: Utterance) -> (f64, f64, f64) {
    let eps = params.epsilon;
    let belief = oracle_restricted(params, truth, u);

    let v_explanandum: f64 = WORLDS
        .iter()
        .enumerate()
        .map(|(i, (e, v))| belief[i] * sick_probability(eps, *e, *v))
        .sum();

    let posterior = oracle_posterior(eps, belief);
    let truth_index = WORLDS.iter().position(|w| *w == truth).unwrap();
    let v_latents = posterior[truth_index];

    let mut expected_cf = 0.0;
    for (i, (e, v)) in WORLDS.iter().enumerate() {
        if posterior[i] > 0.0 {
            expected_cf += posterior[i] * oracle_counterfactual(eps, *e, *v);
        }
    }
    (v_explanandum, v_latents, 1.0 - expected_cf)
}

/// Choice probabilities by enumeration plus a naive softmax.
pub fn oracle_choice(params: &ParamSet, scenario: &Scenario) -> [f64; 4] {
    let truth = (scenario.truth.excess, scenario.truth.virus);
    let alpha_social = match scenario.temperament {
        Temperament::Confident => params.alpha_social_confident,
        Temperament::Insecure => params.alpha_social_insecure,
    };
    let mut exps = [0.0; 4];
    for u in Utterance::ALL {
        let (ve, vl, cs) = oracle_terms(params, truth, u);
        let utility =
            params.alpha_explanandum * ve + params.alpha_latents * vl - alpha_social * cs;
        exps[u.index()] = (params.temperature * utility).exp();
    }
    let total: f64 = exps.iter().sum();
    exps.map(|e| e / total)
}

/// A random valid parameter set for oracle sweeps.
pub fn random_params<R: Rng>(rng: &mut R) -> ParamSet {
    ParamSet {
        prior_excess: rng.random_range(0.02..0.98),
        prior_virus: rng.random_range(0.02..0.98),
        alpha_explanandum: rng.random_range(-2.0..2.0),
        alpha_latents: rng.random_range(-2.0..2.0),
        alpha_social_confident: rng.random_range(-2.0..2.0),
        alpha_social_insecure: rng.random_range(-2.0..2.0),
        epsilon: rng.random_range(0.0002..0.12),
        temperature: rng.random_range(0.5..2.0),
    }
}
