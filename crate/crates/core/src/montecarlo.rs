//! Seeded measurement simulation, concentration estimators and the empirical
//! Cramér–Rao check.
//!
//! Trials are drawn in fixed chunks of [`CHUNK`]. Chunk `k` uses a ChaCha8
//! stream seeded from the plan seed with stream number `k`, so results do not
//! depend on the number of worker threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    balanced_distribution, birefringence_state_fock, build_probe_fock, dichroism_state_fock,
    intensity_distribution,
};
use crate::metrology::{
    balanced_detection_stats, dichroism_concentration_variance, dichroism_stats, BirefringenceModel,
    DichroismModel, BRIGHT_LIMIT_FACTOR,
};

pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OutcomeModel {
    /// Normal draws with the bright-limit mean and variance.
    GaussianBright,
    /// Draws from the exact truncated number-state distribution.
    ExactFock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Scheme {
    /// Balanced detection of `Ŝ` after a waveplate rotation `ξ`.
    Balanced { model: BirefringenceModel, xi: f64 },
    /// Intensities of the two circular arms, combined through their ratio.
    IntensityRatio { model: DichroismModel, pooling: Pooling },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pooling {
    /// Counts summed over all trials before the ratio is taken.
    Summed,
    /// Mean of the per-trial ratio estimates.
    PerTrial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentPlan {
    pub scheme: Scheme,
    pub trials: usize,
    pub seed: Option<u64>,
    pub outcome_model: OutcomeModel,
}

impl ExperimentPlan {
    pub fn new(scheme: Scheme, trials: usize, seed: u64) -> Self {
        Self {
            scheme,
            trials,
            seed: Some(seed),
            outcome_model: OutcomeModel::GaussianBright,
        }
    }

    pub fn with_outcome_model(mut self, model: OutcomeModel) -> Self {
        self.outcome_model = model;
        self
    }

    fn check(&self) -> Result<u64> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "need at least one trial".into(),
            });
        }
        let seed = self.seed.ok_or(Error::Unseeded)?;
        if self.outcome_model == OutcomeModel::GaussianBright {
            let (probe, eta) = match &self.scheme {
                Scheme::Balanced { model, .. } => (model.probe, model.sample.efficiency),
                Scheme::IntensityRatio { model, .. } => (model.probe, model.sample.efficiency),
            };
            let floor = BRIGHT_LIMIT_FACTOR * (2.0 * probe.squeezing()).sinh().powi(2);
            if eta * probe.alpha.norm_sqr() < floor {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    reason: format!("|α|² below the bright-limit threshold {floor}"),
                });
            }
        }
        Ok(seed)
    }

    /// True concentration of the simulated sample.
    pub fn concentration(&self) -> f64 {
        match &self.scheme {
            Scheme::Balanced { model, .. } => model.sample.concentration,
            Scheme::IntensityRatio { model, .. } => model.sample.concentration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Outcomes {
    /// One `Ŝ` value per trial.
    Balanced(Vec<f64>),
    /// `(n_L, n_R)` per trial.
    Intensities(Vec<(f64, f64)>),
}

impl Outcomes {
    pub fn len(&self) -> usize {
        match self {
            Outcomes::Balanced(v) => v.len(),
            Outcomes::Intensities(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Draws `trials` values chunk by chunk; `draw` receives the chunk's generator.
fn chunked<T, F>(seed: u64, trials: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let n = CHUNK.min(trials - k * CHUNK);
            (0..n).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

fn normal(mean: f64, variance: f64) -> Result<Normal<f64>> {
    Normal::new(mean, variance.sqrt()).map_err(|e| Error::InvalidParameter {
        name: "variance",
        reason: e.to_string(),
    })
}

fn weighted<K: Clone>(probs: &std::collections::BTreeMap<K, f64>) -> Result<(Vec<K>, WeightedIndex<f64>)> {
    let keys: Vec<K> = probs.keys().cloned().collect();
    let index = WeightedIndex::new(probs.values().cloned()).map_err(|e| Error::InvalidParameter {
        name: "distribution",
        reason: e.to_string(),
    })?;
    Ok((keys, index))
}

pub fn sample_outcomes(plan: &ExperimentPlan) -> Result<Outcomes> {
    let seed = plan.check()?;
    match (&plan.scheme, plan.outcome_model) {
        (Scheme::Balanced { model, xi }, OutcomeModel::GaussianBright) => {
            let stats = balanced_detection_stats(model, *xi);
            let law = normal(stats.mean, stats.variance)?;
            Ok(Outcomes::Balanced(chunked(seed, plan.trials, |rng| {
                law.sample(rng)
            })))
        }
        (Scheme::Balanced { model, xi }, OutcomeModel::ExactFock) => {
            let probe = build_probe_fock(&model.probe, None)?;
            let rho = birefringence_state_fock(model, &probe, model.sample.concentration)?;
            let (keys, index) = weighted(&balanced_distribution(&rho, *xi)?.probs)?;
            Ok(Outcomes::Balanced(chunked(seed, plan.trials, |rng| {
                keys[index.sample(rng)] as f64
            })))
        }
        (Scheme::IntensityRatio { model, .. }, OutcomeModel::GaussianBright) => {
            let stats = dichroism_stats(model);
            let left = normal(stats.left.mean, stats.left.variance)?;
            let right = normal(stats.right.mean, stats.right.variance)?;
            Ok(Outcomes::Intensities(chunked(seed, plan.trials, |rng| {
                (left.sample(rng), right.sample(rng))
            })))
        }
        (Scheme::IntensityRatio { model, .. }, OutcomeModel::ExactFock) => {
            let probe = build_probe_fock(&model.probe, None)?;
            let rho = dichroism_state_fock(model, &probe, model.sample.concentration)?;
            let (keys, index) = weighted(&intensity_distribution(&rho).probs)?;
            Ok(Outcomes::Intensities(chunked(seed, plan.trials, |rng| {
                let (nl, nr) = keys[index.sample(rng)];
                (nl as f64, nr as f64)
            })))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationResult {
    /// Per-trial estimates.
    pub estimates: Vec<f64>,
    /// Estimate from all `ν` trials.
    pub estimate: f64,
    pub empirical_mean: f64,
    /// Sample variance of the per-trial estimates.
    pub single_shot_variance: f64,
    /// Variance of the `ν`-trial estimator, `single_shot_variance / ν`.
    pub empirical_variance: f64,
    /// Standard error of `empirical_variance`.
    pub variance_se: f64,
    pub bias: f64,
    pub bias_se: f64,
    /// Error-propagation prediction for the `ν`-trial estimator.
    pub predicted_variance: f64,
    pub crb: f64,
    pub qcrb: f64,
    pub trials: usize,
}

/// Local linearization of `⟨Ŝ⟩(C)` about the operating point `C0`:
/// `Ĉ = C0 + (S - ⟨Ŝ⟩(C0)) / ∂⟨Ŝ⟩/∂C`.
fn balanced_inverter(model: &BirefringenceModel, xi: f64) -> Result<impl Fn(f64) -> f64> {
    let stats = balanced_detection_stats(model, xi);
    let arg0 = model.delta_phi() - 2.0 * xi;
    if arg0.sin().abs() < 1e-12 || stats.dmean_dc == 0.0 {
        return Err(Error::NonInvertible(arg0));
    }
    let c0 = model.sample.concentration;
    Ok(move |s: f64| c0 + (s - stats.mean) / stats.dmean_dc)
}

fn ratio_estimate(model: &DichroismModel, n_left: f64, n_right: f64) -> f64 {
    -(n_left / n_right).log10() / (model.sample.delta_eps() * model.sample.path_length.cm())
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

pub fn estimate_concentration(outcomes: &Outcomes, plan: &ExperimentPlan) -> Result<EstimationResult> {
    plan.check()?;
    let nu = outcomes.len();
    if nu == 0 {
        return Err(Error::InvalidParameter {
            name: "outcomes",
            reason: "no trials".into(),
        });
    }
    let (estimates, pooled, single_shot_prediction, cfi, qfi) = match (&plan.scheme, outcomes) {
        (Scheme::Balanced { model, xi }, Outcomes::Balanced(values)) => {
            let invert = balanced_inverter(model, *xi)?;
            let estimates: Vec<f64> = values.iter().map(|&s| invert(s)).collect();
            let stats = balanced_detection_stats(model, *xi);
            let (mean, _) = mean_and_variance(&estimates);
            (
                estimates,
                mean,
                stats.propagated_variance,
                stats.cfi_gaussian,
                model.qfi()?,
            )
        }
        (Scheme::IntensityRatio { model, pooling }, Outcomes::Intensities(values)) => {
            if model.sample.delta_eps() == 0.0 {
                return Err(Error::EstimationImpossible("Δε = 0".into()));
            }
            let (sum_l, sum_r) = values.iter().fold((0.0, 0.0), |(a, b), &(l, r)| (a + l, b + r));
            if sum_l <= 0.0 {
                return Err(Error::ZeroCount(0));
            }
            if sum_r <= 0.0 {
                return Err(Error::ZeroCount(1));
            }
            let estimates = values
                .iter()
                .map(|&(l, r)| {
                    if l <= 0.0 {
                        Err(Error::ZeroCount(0))
                    } else if r <= 0.0 {
                        Err(Error::ZeroCount(1))
                    } else {
                        Ok(ratio_estimate(model, l, r))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let predicted = dichroism_concentration_variance(model)?;
            let pooled = match pooling {
                Pooling::Summed => ratio_estimate(model, sum_l, sum_r),
                Pooling::PerTrial => mean_and_variance(&estimates).0,
            };
            (estimates, pooled, predicted, 1.0 / predicted, model.qfi()?)
        }
        _ => {
            return Err(Error::Unsupported(
                "outcomes do not belong to the plan's scheme".into(),
            ))
        }
    };
    let n = nu as f64;
    let (empirical_mean, single_shot_variance) = mean_and_variance(&estimates);
    let empirical_variance = single_shot_variance / n;
    let variance_se = if nu > 1 {
        empirical_variance * (2.0 / (n - 1.0)).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(EstimationResult {
        estimate: pooled,
        empirical_mean,
        single_shot_variance,
        empirical_variance,
        variance_se,
        bias: pooled - plan.concentration(),
        bias_se: empirical_variance.sqrt(),
        predicted_variance: single_shot_prediction / n,
        crb: 1.0 / (n * cfi),
        qcrb: 1.0 / (n * qfi),
        trials: nu,
        estimates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Empirical variance more than three standard errors below the QCRB.
    Violated,
    /// Within [`SATURATION_TOL`] of the QCRB: the whole chain is tight.
    Saturated,
    Respected,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Violated => "QCRB violated",
            Verdict::Saturated => "CRB saturated within 5%",
            Verdict::Respected => "bound respected, not saturated",
        }
    }

    pub fn bound_respected(&self) -> bool {
        *self != Verdict::Violated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrbVerdict {
    pub verdict: Verdict,
    /// `(empirical - qcrb) / variance_se`.
    pub z_qcrb: f64,
    /// Within tolerance of the classical bound of the chosen measurement.
    pub crb_saturated: bool,
    /// Within tolerance of the quantum bound.
    pub qcrb_saturated: bool,
}

pub const SATURATION_TOL: f64 = 0.05;

/// Checks `Δ²C ≥ 1/(νF) ≥ 1/(νQ)` against the empirical variance.
pub fn crb_verdict(result: &EstimationResult) -> CrbVerdict {
    let emp = result.empirical_variance;
    let se_rel = result.variance_se / emp;
    let violated = emp < result.qcrb * (1.0 - 3.0 * se_rel);
    let crb_saturated = (emp / result.crb - 1.0).abs() <= SATURATION_TOL;
    let qcrb_saturated = (emp / result.qcrb - 1.0).abs() <= SATURATION_TOL;
    let verdict = if violated {
        log::error!("empirical variance {emp} falls below the QCRB {}", result.qcrb);
        Verdict::Violated
    } else if qcrb_saturated {
        Verdict::Saturated
    } else {
        Verdict::Respected
    };
    CrbVerdict {
        verdict,
        z_qcrb: (emp - result.qcrb) / result.variance_se,
        crb_saturated,
        qcrb_saturated,
    }
}

/// Draws and estimates in one step.
pub fn run_plan(plan: &ExperimentPlan) -> Result<(EstimationResult, CrbVerdict)> {
    let outcomes = sample_outcomes(plan)?;
    let result = estimate_concentration(&outcomes, plan)?;
    let verdict = crb_verdict(&result);
    Ok((result, verdict))
}
