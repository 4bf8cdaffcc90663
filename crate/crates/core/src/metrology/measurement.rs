//! Moments of the two detection schemes and error propagation to `C`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrology::{BirefringenceModel, DichroismModel};

/// Bright-limit warning threshold: `|α|² >= BRIGHT_LIMIT_FACTOR · sinh²(2s)`.
pub const BRIGHT_LIMIT_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementStats {
    pub mean: f64,
    pub variance: f64,
    pub dmean_dc: f64,
    /// `dmean_dc² / variance`.
    pub cfi_gaussian: f64,
    /// `variance / dmean_dc²`; infinite at a stationary point of the mean.
    pub propagated_variance: f64,
}

impl MeasurementStats {
    pub fn new(mean: f64, variance: f64, dmean_dc: f64) -> Self {
        let slope_sq = dmean_dc * dmean_dc;
        let propagated_variance = if slope_sq == 0.0 {
            f64::INFINITY
        } else {
            variance / slope_sq
        };
        Self {
            mean,
            variance,
            dmean_dc,
            cfi_gaussian: slope_sq / variance,
            propagated_variance,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.propagated_variance.is_infinite()
    }
}

/// Waveplate rotation `ξ = (2Δφ - π)/4` that maximizes the mean slope.
pub fn optimal_waveplate_angle(delta_phi: f64) -> f64 {
    (2.0 * delta_phi - std::f64::consts::PI) / 4.0
}

fn warn_if_dim(alpha_sq: f64, s: f64) {
    let floor = BRIGHT_LIMIT_FACTOR * (2.0 * s).sinh().powi(2);
    if alpha_sq < floor {
        log::warn!("|α|² = {alpha_sq} is below the bright-limit threshold {floor}");
    }
}

/// Bright-limit statistics of `Ŝ = n̂_b1 - n̂_b2` after a waveplate rotation `ξ`.
///
/// `mean = η|α|² cos(Δφ - 2ξ)` and
/// `variance = η|α|² (1 - η + η(cosh 2s - cos θ_eff sinh 2s))` where
/// `θ_eff = θ - 2 arg α` is unchanged by the passive optics.
pub fn balanced_detection_stats(model: &BirefringenceModel, xi: f64) -> MeasurementStats {
    let alpha_sq = model.probe.alpha.norm_sqr();
    let s = model.probe.squeezing();
    warn_if_dim(alpha_sq, s);
    let eta = model.sample.efficiency;
    let theta_eff = model.probe.relative_squeezing_angle();
    let arg = model.delta_phi() - 2.0 * xi;
    let mean = eta * alpha_sq * arg.cos();
    let variance =
        eta * alpha_sq * (1.0 - eta + eta * ((2.0 * s).cosh() - theta_eff.cos() * (2.0 * s).sinh()));
    let dmean_dc = -eta * alpha_sq * arg.sin() * model.phase_slope();
    MeasurementStats::new(mean, variance, dmean_dc)
}

/// Exact variance of `Ŝ`, including the squeezed-vacuum noise that the bright
/// limit drops: each detected mode adds `n0² + n0 + |m|²/4`, where
/// `n0 = (1-η+η cosh2s - 1)/2` and `|m| = η sinh 2s`.
pub fn balanced_detection_exact_variance(model: &BirefringenceModel, xi: f64) -> f64 {
    let s = model.probe.squeezing();
    let eta = model.sample.efficiency;
    let n0 = eta * ((2.0 * s).cosh() - 1.0) / 2.0;
    let m = eta * (2.0 * s).sinh();
    balanced_detection_stats(model, xi).variance + 2.0 * (n0 * n0 + n0 + m * m / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DichroismStats {
    pub left: MeasurementStats,
    pub right: MeasurementStats,
}

/// Per-arm intensity statistics with `t_i = η T_i`:
/// `mean = t(|α|² + sinh² s)`, `variance = |α|² t (1 + 2t sinh² s - t cos θ_eff sinh 2s)`.
pub fn dichroism_stats(model: &DichroismModel) -> DichroismStats {
    let alpha_sq = model.probe.alpha.norm_sqr();
    let s = model.probe.squeezing();
    let theta_eff = model.probe.relative_squeezing_angle();
    let (tl, tr) = model.transmissions_at(model.sample.concentration);
    let l = model.sample.path_length.cm();
    let sh2 = s.sinh().powi(2);
    let arm = |t: f64, eps: f64| {
        let mean = t * (alpha_sq + sh2);
        let variance = alpha_sq * t * (1.0 + 2.0 * t * sh2 - t * theta_eff.cos() * (2.0 * s).sinh());
        let dmean_dc = -mean * std::f64::consts::LN_10 * eps * l;
        MeasurementStats::new(mean, variance, dmean_dc)
    };
    DichroismStats {
        left: arm(tl, model.sample.eps_left),
        right: arm(tr, model.sample.eps_right),
    }
}

/// `β = (|α| Δε l ln 10)^{-2}` with `l` in cm.
pub fn dichroism_beta(alpha_sq: f64, delta_eps: f64, path_cm: f64) -> f64 {
    let k = delta_eps * path_cm * std::f64::consts::LN_10;
    1.0 / (alpha_sq * k * k)
}

/// `β Σ_i (1 + 2t_i sinh² s - t_i cos θ_eff sinh 2s) / t_i`.
///
/// At `θ_eff = 0` this is `β [2(e^{-2s} - 1) + 1/t_L + 1/t_R]`.
pub fn dichroism_concentration_variance(model: &DichroismModel) -> Result<f64> {
    let delta_eps = model.sample.delta_eps();
    if delta_eps == 0.0 {
        return Err(Error::EstimationImpossible(
            "Δε = 0: the intensity ratio carries no information on C".into(),
        ));
    }
    let alpha_sq = model.probe.alpha.norm_sqr();
    let s = model.probe.squeezing();
    let theta_eff = model.probe.relative_squeezing_angle();
    let (tl, tr) = model.transmissions_at(model.sample.concentration);
    if tl == 0.0 || tr == 0.0 {
        return Ok(f64::INFINITY);
    }
    let sh2 = s.sinh().powi(2);
    let term = |t: f64| (1.0 + 2.0 * t * sh2 - t * theta_eff.cos() * (2.0 * s).sinh()) / t;
    let beta = dichroism_beta(alpha_sq, delta_eps, model.sample.path_length.cm());
    Ok(beta * (term(tl) + term(tr)))
}

/// `Δ²C / β = 2(e^{-2s} - 1) + 1/t_L + 1/t_R`.
pub fn dichroism_variance_over_beta(s: f64, t_left: f64, t_right: f64) -> f64 {
    2.0 * ((-2.0 * s).exp() - 1.0) + 1.0 / t_left + 1.0 / t_right
}

/// Coherent-to-squeezed precision ratio `sqrt(Δ²C(s=0) / Δ²C(s))`.
pub fn dichroism_precision_ratio(s: f64, t_left: f64, t_right: f64) -> f64 {
    (dichroism_variance_over_beta(0.0, t_left, t_right) / dichroism_variance_over_beta(s, t_left, t_right))
        .sqrt()
}

/// Error propagation through `Ĉ = -log10(n_L / n_R) / (Δε l)` with
/// independent arms: `(Δε l ln10)^{-2} Σ_i var_i / mean_i²`.
pub fn ratio_propagated_variance(stats: &DichroismStats, delta_eps: f64, path_cm: f64) -> f64 {
    let k = delta_eps * path_cm * std::f64::consts::LN_10;
    let rel = |m: &MeasurementStats| m.variance / (m.mean * m.mean);
    (rel(&stats.left) + rel(&stats.right)) / (k * k)
}
