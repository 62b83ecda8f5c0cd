//! Model-comparison statistics: χ² tail probabilities, likelihood-ratio
//! tests for the nested ablations, r² between model and empirical choice
//! frequencies, participant-level bootstrap confidence intervals, and the
//! pooled two-proportion z-test.

use crate::causal::Utterance;
use crate::data::{figure_cells, Dataset, Group};
use crate::error::{Error, Result};
use crate::explainer::{choice_distribution, ModelConfig, ParamSet, Scenario};
use crate::fit::{fit, Ablation, FitConfig, FitResult};
use crate::seeding::{derive_seed, stream_rng};
use crate::special::{reg_gamma_upper, standard_normal_sf};
use rand::Rng;

/// Upper-tail probability of the χ² distribution with `df` degrees of
/// freedom, via the regularized upper incomplete gamma function
/// `Q(df/2, x/2)`.
pub fn chi_square_sf(x: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::Domain("chi-square degrees of freedom must be positive".into()));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("chi-square statistic x = {x} must be nonnegative")));
    }
    reg_gamma_upper(df as f64 / 2.0, x / 2.0)
}

/// A likelihood-ratio test of an ablated (nested) model against the full one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrtReport {
    /// `max(0, 2 · (LL_full − LL_ablated))`; tiny negative values from
    /// optimizer noise are clamped to zero.
    pub statistic: f64,
    /// Number of pinned parameters.
    pub df: u32,
    pub p_value: f64,
}

/// Compare maximized log-likelihoods (not penalized objectives) of nested
/// models fitted to identical data.
pub fn likelihood_ratio_test(ll_full: f64, ll_ablated: f64, df: u32) -> Result<LrtReport> {
    if df == 0 {
        return Err(Error::Domain("likelihood-ratio test needs at least one pinned parameter".into()));
    }
    let statistic = (2.0 * (ll_full - ll_ablated)).max(0.0);
    let p_value = chi_square_sf(statistic, df)?;
    Ok(LrtReport { statistic, df, p_value })
}

/// Squared Pearson correlation between model probabilities and empirical
/// proportions across scenario × utterance cells.
///
/// Errors if the vectors differ in length, have fewer than three cells, or
/// either is constant (correlation undefined).
pub fn r_squared(model: &[f64], empirical: &[f64]) -> Result<f64> {
    if model.len() != empirical.len() {
        return Err(Error::Domain(format!(
            "vector lengths differ: {} vs {}",
            model.len(),
            empirical.len()
        )));
    }
    if model.len() < 3 {
        return Err(Error::Domain("r² needs at least 3 cells".into()));
    }
    for (name, xs) in [("model", model), ("empirical", empirical)] {
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("{name} vector contains a non-finite value")));
        }
        if xs.iter().all(|x| *x == xs[0]) {
            return Err(Error::Domain(format!(
                "{name} vector is constant; correlation is undefined"
            )));
        }
    }
    let n = model.len() as f64;
    let mean_x: f64 = model.iter().sum::<f64>() / n;
    let mean_y: f64 = empirical.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in model.iter().zip(empirical) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::Domain("zero variance; correlation is undefined".into()));
    }
    Ok(((sxy * sxy) / (sxx * syy)).min(1.0))
}

/// r² between a fitted model's choice probabilities and a group's observed
/// proportions, across every observed scenario × utterance cell.
pub fn model_fit_r_squared(
    params: &ParamSet,
    cfg: &ModelConfig,
    data: &Dataset,
    group: Group,
) -> Result<f64> {
    let cells = figure_cells(params, cfg, data, group)?;
    let model: Vec<f64> = cells.iter().map(|c| c.model).collect();
    let empirical: Vec<f64> = cells.iter().map(|c| c.empirical).collect();
    r_squared(&model, &empirical)
}

/// r² between two parameter sets' choice probabilities over all 24
/// scenario × utterance cells. Used by the recovery harness to score how
/// well a refit reproduces its generator.
pub fn model_agreement_r_squared(a: &ParamSet, b: &ParamSet, cfg: &ModelConfig) -> Result<f64> {
    let mut xs = Vec::with_capacity(24);
    let mut ys = Vec::with_capacity(24);
    for scenario in &Scenario::MODELED {
        let da = choice_distribution(a, cfg, scenario)?;
        let db = choice_distribution(b, cfg, scenario)?;
        for u in Utterance::ALL {
            xs.push(da.prob(u));
            ys.push(db.prob(u));
        }
    }
    r_squared(&xs, &ys)
}

/// Pooled two-proportion z-test, two-sided.
///
/// Degenerate pooled proportions (all successes or all failures) return
/// p = 1 by convention: no evidence of a difference.
pub fn two_proportion_test(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<f64> {
    for (k, n) in [(k1, n1), (k2, n2)] {
        if n == 0 {
            return Err(Error::Domain("two-proportion test needs n > 0 in both samples".into()));
        }
        if k > n {
            return Err(Error::Domain(format!("count k = {k} exceeds sample size n = {n}")));
        }
    }
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    if pooled <= 0.0 || pooled >= 1.0 {
        return Ok(1.0);
    }
    let p1 = k1 as f64 / n1 as f64;
    let p2 = k2 as f64 / n2 as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = (p1 - p2) / se;
    Ok((2.0 * standard_normal_sf(z.abs())).min(1.0))
}

/// What a bootstrap run resamples and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapStatistic {
    /// r² between refitted model probabilities and the replicate's
    /// empirical proportions.
    RSquared,
    PriorExcess,
    PriorVirus,
    AlphaExplanandum,
    AlphaLatents,
    AlphaSocialConfident,
    AlphaSocialInsecure,
}

impl BootstrapStatistic {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "r2" | "r_squared" => Ok(BootstrapStatistic::RSquared),
            "prior_excess" => Ok(BootstrapStatistic::PriorExcess),
            "prior_virus" => Ok(BootstrapStatistic::PriorVirus),
            "alpha_explanandum" => Ok(BootstrapStatistic::AlphaExplanandum),
            "alpha_latents" => Ok(BootstrapStatistic::AlphaLatents),
            "alpha_social_confident" => Ok(BootstrapStatistic::AlphaSocialConfident),
            "alpha_social_insecure" => Ok(BootstrapStatistic::AlphaSocialInsecure),
            other => Err(Error::Domain(format!(
                "unknown statistic `{other}` (expected r2 or a parameter name)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BootstrapStatistic::RSquared => "r2",
            BootstrapStatistic::PriorExcess => "prior_excess",
            BootstrapStatistic::PriorVirus => "prior_virus",
            BootstrapStatistic::AlphaExplanandum => "alpha_explanandum",
            BootstrapStatistic::AlphaLatents => "alpha_latents",
            BootstrapStatistic::AlphaSocialConfident => "alpha_social_confident",
            BootstrapStatistic::AlphaSocialInsecure => "alpha_social_insecure",
        }
    }

    fn evaluate(&self, result: &FitResult, data: &Dataset, config: &FitConfig) -> Result<f64> {
        match self {
            BootstrapStatistic::RSquared => {
                let group = data.groups_present()[0];
                model_fit_r_squared(&result.params, &config.model, data, group)
            }
            BootstrapStatistic::PriorExcess => Ok(result.params.prior_excess),
            BootstrapStatistic::PriorVirus => Ok(result.params.prior_virus),
            BootstrapStatistic::AlphaExplanandum => Ok(result.params.alpha_explanandum),
            BootstrapStatistic::AlphaLatents => Ok(result.params.alpha_latents),
            BootstrapStatistic::AlphaSocialConfident => Ok(result.params.alpha_social_confident),
            BootstrapStatistic::AlphaSocialInsecure => Ok(result.params.alpha_social_insecure),
        }
    }
}

/// A percentile bootstrap confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapReport {
    pub statistic: BootstrapStatistic,
    /// The statistic on the full dataset.
    pub point_estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub replicates: u32,
    pub confidence_level: f64,
    pub seed: u64,
    /// Replicates whose refit did not converge; excluded from the interval.
    pub failed_replicates: u32,
}

/// A bootstrap report plus the per-replicate values (`None` marks a failed
/// replicate), for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOutcome {
    pub report: BootstrapReport,
    pub replicate_values: Vec<Option<f64>>,
}

/// Linear-interpolation percentile of a sorted sample.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Participant-level bootstrap: resample whole participants with
/// replacement (each keeps all of their responses), refit per replicate,
/// and return the percentile interval of the statistic.
///
/// Deterministic given `seed`: replicate `r` resamples from stream
/// `(seed, r)` and refits with a seed derived from `(seed, r)`. Replicates
/// whose refit fails to converge are excluded; more than 20% failures is an
/// error because the interval would be untrustworthy.
pub fn bootstrap(
    data: &Dataset,
    config: &FitConfig,
    statistic: BootstrapStatistic,
    replicates: u32,
    confidence_level: f64,
    seed: u64,
) -> Result<BootstrapOutcome> {
    if replicates == 0 {
        return Err(Error::Domain("bootstrap needs at least one replicate".into()));
    }
    if !(confidence_level > 0.0 && confidence_level < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level {confidence_level} must lie in (0, 1)"
        )));
    }
    let participants: Vec<String> =
        data.participants().into_iter().map(str::to_string).collect();
    if participants.len() < 2 {
        return Err(Error::Domain(format!(
            "bootstrap needs at least 2 participants, got {}",
            participants.len()
        )));
    }

    let point_fit = fit(data, config)?;
    let point_estimate = statistic.evaluate(&point_fit, data, config)?;

    let mut replicate_values: Vec<Option<f64>> = Vec::with_capacity(replicates as usize);
    for r in 0..replicates {
        let mut rng = stream_rng(seed, r as u64);
        let mut records = Vec::with_capacity(data.len());
        for _ in 0..participants.len() {
            let pick = rng.random_range(0..participants.len());
            for rec in data.records_of(&participants[pick]) {
                records.push(rec.clone());
            }
        }
        let resampled = Dataset::new(records, format!("bootstrap replicate {r} of {seed}"));
        let mut replicate_config = config.clone();
        replicate_config.seed = derive_seed(seed, r as u64);
        let value = match fit(&resampled, &replicate_config) {
            Ok(result) if result.converged => {
                statistic.evaluate(&result, &resampled, &replicate_config).ok()
            }
            _ => None,
        };
        replicate_values.push(value);
    }

    let successes: Vec<f64> = replicate_values.iter().flatten().copied().collect();
    let failed = replicates - successes.len() as u32;
    if (failed as f64) > 0.2 * replicates as f64 {
        return Err(Error::Unreliable(format!(
            "{failed} of {replicates} bootstrap replicates failed to converge (> 20%)"
        )));
    }

    let mut sorted = successes;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let alpha = 1.0 - confidence_level;
    let report = BootstrapReport {
        statistic,
        point_estimate,
        lower: percentile(&sorted, alpha / 2.0),
        upper: percentile(&sorted, 1.0 - alpha / 2.0),
        replicates,
        confidence_level,
        seed,
        failed_replicates: failed,
    };
    Ok(BootstrapOutcome { report, replicate_values })
}

/// [`bootstrap`], reporting only the interval.
pub fn bootstrap_ci(
    data: &Dataset,
    config: &FitConfig,
    statistic: BootstrapStatistic,
    replicates: u32,
    confidence_level: f64,
    seed: u64,
) -> Result<BootstrapReport> {
    Ok(bootstrap(data, config, statistic, replicates, confidence_level, seed)?.report)
}

/// One ablated model fitted and tested against the full model.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationComparison {
    pub ablation: Ablation,
    pub fit: FitResult,
    pub lrt: LrtReport,
}

/// The full model alongside every requested ablation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub full: FitResult,
    pub ablations: Vec<AblationComparison>,
}

/// Fit the full model and each requested ablation on the same data and run
/// the likelihood-ratio tests.
///
/// The full model's restarts are augmented with warm starts at each ablated
/// optimum, so the nesting inequality (full penalized objective ≤ ablated)
/// holds by construction rather than by luck.
pub fn compare_models(
    data: &Dataset,
    config: &FitConfig,
    ablations: &[Ablation],
) -> Result<ModelComparison> {
    if !config.ablation.is_empty() {
        return Err(Error::Domain(
            "compare_models requires a full-model config (empty ablation set)".into(),
        ));
    }
    let mut ablation_fits = Vec::with_capacity(ablations.len());
    for ablation in ablations {
        if ablation.is_empty() {
            return Err(Error::Domain("cannot compare the full model against itself".into()));
        }
        let ablated_config = FitConfig { ablation: *ablation, ..config.clone() };
        ablation_fits.push(fit(data, &ablated_config)?);
    }

    let mut full_config = config.clone();
    full_config
        .warm_starts
        .extend(ablation_fits.iter().map(|f| f.params));
    let full = fit(data, &full_config)?;

    let mut comparisons = Vec::with_capacity(ablations.len());
    for (ablation, ablated) in ablations.iter().zip(ablation_fits) {
        let lrt = likelihood_ratio_test(
            full.log_likelihood(),
            ablated.log_likelihood(),
            ablation.pinned_parameter_count(),
        )?;
        comparisons.push(AblationComparison { ablation: *ablation, fit: ablated, lrt });
    }
    Ok(ModelComparison { full, ablations: comparisons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::simulate_dataset;

    #[test]
    fn chi_square_closed_forms() {
        // df = 2 is exactly e^{−x/2}.
        let x = 2.0 * 2.0f64.ln();
        assert!((chi_square_sf(x, 2).unwrap() - 0.5).abs() < 1e-12);
        for x in [0.1, 1.0, 5.0, 20.0] {
            assert!((chi_square_sf(x, 2).unwrap() - (-x / 2.0).exp()).abs() < 1e-12);
            // df = 4: e^{−x/2} (1 + x/2).
            let expected = (-x / 2.0).exp() * (1.0 + x / 2.0);
            assert!((chi_square_sf(x, 4).unwrap() - expected).abs() < 1e-12);
        }
        assert_eq!(chi_square_sf(0.0, 3).unwrap(), 1.0);
        assert!((chi_square_sf(3.841, 1).unwrap() - 0.05).abs() < 5e-4);
        assert!(chi_square_sf(1.0, 0).is_err());
        assert!(chi_square_sf(-1.0, 1).is_err());
    }

    #[test]
    fn chi_square_decreasing_in_x() {
        for df in [1u32, 2, 5, 10] {
            let mut prev = 1.0;
            for i in 1..=50 {
                let x = i as f64 * 0.8;
                let p = chi_square_sf(x, df).unwrap();
                assert!(p < prev, "sf must strictly decrease (df={df}, x={x})");
                prev = p;
            }
        }
    }

    #[test]
    fn lrt_examples() {
        let same = likelihood_ratio_test(-10.0, -10.0, 2).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);

        let sig = likelihood_ratio_test(-10.0, -10.0 - 3.841 / 2.0, 1).unwrap();
        assert!((sig.p_value - 0.05).abs() < 5e-4);

        let noisy = likelihood_ratio_test(-10.0 - 1e-12, -10.0, 1).unwrap();
        assert_eq!(noisy.statistic, 0.0);

        assert!(likelihood_ratio_test(-1.0, -2.0, 0).is_err());
    }

    #[test]
    fn r_squared_examples() {
        let xs = [0.3, 0.5, 0.9, 0.1];
        assert!((r_squared(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);

        // Frozen from a hand Pearson computation: exactly 121/124.
        let got = r_squared(&[0.1, 0.2, 0.7], &[0.2, 0.2, 0.6]).unwrap();
        assert!((got - 121.0 / 124.0).abs() < 1e-12);

        assert!(r_squared(&[0.5, 0.5, 0.5], &[0.1, 0.2, 0.3]).is_err());
        assert!(r_squared(&[0.1, 0.2, 0.3], &[0.5, 0.5, 0.5]).is_err());
        assert!(r_squared(&[0.1, 0.2], &[0.3, 0.4]).is_err());
        assert!(r_squared(&[0.1, 0.2, 0.3], &[0.3, 0.4]).is_err());
    }

    #[test]
    fn r_squared_affine_invariance() {
        let xs = [0.12, 0.4, 0.33, 0.9, 0.05];
        let ys = [0.3, 0.1, 0.55, 0.8, 0.2];
        let base = r_squared(&xs, &ys).unwrap();
        let mapped: Vec<f64> = xs.iter().map(|x| -3.0 * x + 7.0).collect();
        assert!((r_squared(&mapped, &ys).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn two_proportion_examples() {
        // Equal proportions, large n.
        let p = two_proportion_test(500, 1000, 500, 1000).unwrap();
        assert!((p - 1.0).abs() < 1e-12);

        // The headline contrast at illustrative counts.
        let p = two_proportion_test(566, 1000, 843, 1000).unwrap();
        assert!(p < 0.001);

        // Small-sample band, checked against an exact binomial enumeration
        // in the integration suite.
        let p = two_proportion_test(9, 10, 1, 10).unwrap();
        assert!(p > 0.0003 && p < 0.001, "p = {p}");

        assert_eq!(two_proportion_test(0, 10, 0, 10).unwrap(), 1.0);
        assert_eq!(two_proportion_test(10, 10, 10, 10).unwrap(), 1.0);
        assert!(two_proportion_test(1, 0, 1, 2).is_err());
        assert!(two_proportion_test(3, 2, 1, 2).is_err());
    }

    #[test]
    fn percentile_interpolation() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&xs, 0.0), 1.0);
        assert_eq!(percentile(&xs, 1.0), 4.0);
        assert_eq!(percentile(&xs, 0.5), 2.5);
        assert_eq!(percentile(&[7.0], 0.25), 7.0);
    }

    #[test]
    fn bootstrap_determinism_and_range() {
        let data = simulate_dataset(
            &ParamSet::default(),
            &ModelConfig::default(),
            20,
            Group::Tactful,
            42,
        )
        .unwrap();
        let config = FitConfig { restarts: 2, max_iterations: 400, seed: 1, ..Default::default() };
        let a = bootstrap(&data, &config, BootstrapStatistic::RSquared, 12, 0.95, 7).unwrap();
        let b = bootstrap(&data, &config, BootstrapStatistic::RSquared, 12, 0.95, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.report.lower <= a.report.upper);
        assert!(a.report.lower >= 0.0 && a.report.upper <= 1.0);
        assert_eq!(a.replicate_values.len(), 12);
    }

    #[test]
    fn bootstrap_requires_two_participants() {
        let data = simulate_dataset(
            &ParamSet::default(),
            &ModelConfig::default(),
            1,
            Group::Tactful,
            42,
        )
        .unwrap();
        let config = FitConfig { restarts: 2, ..Default::default() };
        assert!(bootstrap(&data, &config, BootstrapStatistic::RSquared, 10, 0.95, 1).is_err());
    }

    #[test]
    fn statistic_parsing() {
        assert_eq!(BootstrapStatistic::parse("r2").unwrap(), BootstrapStatistic::RSquared);
        assert_eq!(
            BootstrapStatistic::parse("alpha_social_insecure").unwrap(),
            BootstrapStatistic::AlphaSocialInsecure
        );
        assert!(BootstrapStatistic::parse("alpha").is_err());
        for s in [
            "r2",
            "prior_excess",
            "prior_virus",
            "alpha_explanandum",
            "alpha_latents",
            "alpha_social_confident",
            "alpha_social_insecure",
        ] {
            assert_eq!(BootstrapStatistic::parse(s).unwrap().label(), s);
        }
    }
}
