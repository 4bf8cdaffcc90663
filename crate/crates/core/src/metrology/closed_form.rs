//! Closed-form QFI expressions for the polarization-squeezed probe under
//! birefringence, all at the optimal squeezing angle.
//!
//! `slope` below is `∂Δφ/∂C = l δγ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrology::BirefringenceModel;

/// Vacuum (covariance) contribution with loss:
/// `4η² slope² sinh²2s / (1 - η + η² + (1-η)η cosh 2s)`.
pub fn vacuum_covariance_term(s: f64, eta: f64, slope: f64) -> f64 {
    let sh = (2.0 * s).sinh();
    4.0 * eta * eta * slope * slope * sh * sh / (1.0 - eta + eta * eta + (1.0 - eta) * eta * (2.0 * s).cosh())
}

/// Displacement contribution with loss, `2 ḋ† σ⁻¹ ḋ` evaluated for the
/// amplitude-aligned probe:
/// `η|α|² slope² (c + η|sinΔφ| sinh2s) / (c² - η² sinh²2s)`, `c = 1 - η + η cosh 2s`.
///
/// Reduces to the lossless bright term `|α|² slope² (cosh 2s + |sinΔφ| sinh 2s)`.
pub fn lossy_displacement_qfi(alpha_sq: f64, s: f64, eta: f64, delta_phi: f64, slope: f64) -> f64 {
    let c = 1.0 - eta + eta * (2.0 * s).cosh();
    let sh = eta * (2.0 * s).sinh();
    eta * alpha_sq * slope * slope * (c + delta_phi.sin().abs() * sh) / (c * c - sh * sh)
}

/// The lossy displacement term in the form `η|α|⁴ slope² (1-η+η cosh2s+η|sinΔφ| sinh2s)`.
///
/// Kept for comparison only; it does not reduce to the lossless bright term.
pub fn lossy_displacement_product_form(alpha_sq: f64, s: f64, eta: f64, delta_phi: f64, slope: f64) -> f64 {
    eta * alpha_sq
        * alpha_sq
        * slope
        * slope
        * (1.0 - eta + eta * (2.0 * s).cosh() + eta * delta_phi.sin().abs() * (2.0 * s).sinh())
}

/// Lossless total `4 slope² sinh²2s + |α|² slope² (cosh 2s + |sinΔφ| sinh 2s)`.
pub fn lossless_closed_form_qfi(alpha_sq: f64, s: f64, delta_phi: f64, slope: f64) -> f64 {
    let sh = (2.0 * s).sinh();
    4.0 * slope * slope * sh * sh + alpha_sq * slope * slope * ((2.0 * s).cosh() + delta_phi.sin().abs() * sh)
}

/// Balanced-detection variance `(|α| slope e^s)^{-2}`.
pub fn amplitude_squeezed_balanced_variance(alpha_sq: f64, s: f64, slope: f64) -> f64 {
    1.0 / (alpha_sq * slope * slope * (2.0 * s).exp())
}

/// Inputs of the closed-form expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormQfi {
    pub alpha_sq: f64,
    pub s: f64,
    pub eta: f64,
    pub delta_phi: f64,
    pub slope: f64,
}

impl ClosedFormQfi {
    pub fn from_model(model: &BirefringenceModel) -> Self {
        Self {
            alpha_sq: model.probe.alpha.norm_sqr(),
            s: model.probe.squeezing(),
            eta: model.sample.efficiency,
            delta_phi: model.delta_phi(),
            slope: model.phase_slope(),
        }
    }

    pub fn vacuum_term(&self) -> f64 {
        vacuum_covariance_term(self.s, self.eta, self.slope)
    }

    pub fn bright_term(&self) -> f64 {
        lossy_displacement_qfi(self.alpha_sq, self.s, self.eta, self.delta_phi, self.slope)
    }

    pub fn total(&self) -> f64 {
        self.vacuum_term() + self.bright_term()
    }

    /// `η |α|² slope²`.
    pub fn sql(&self) -> f64 {
        self.eta * self.alpha_sq * self.slope * self.slope
    }

    pub fn displacement_product_form(&self) -> f64 {
        lossy_displacement_product_form(self.alpha_sq, self.s, self.eta, self.delta_phi, self.slope)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiReport {
    /// General two-mode formula at the probe's actual squeezing angle.
    pub qfi_numerical: f64,
    pub qfi_closed_form: f64,
    pub vacuum_term: f64,
    pub bright_term: f64,
    pub sql: f64,
    /// `qfi_closed_form / sql`.
    pub advantage_qfi: f64,
    pub advantage_precision: f64,
    /// `qfi_numerical / sql`.
    pub advantage_numerical: f64,
    /// `1 / (ν qfi_numerical)`.
    pub qcrb_variance: f64,
    pub trials: u64,
}

impl QfiReport {
    pub fn new(qfi_numerical: f64, closed: &ClosedFormQfi, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "need at least one trial".into(),
            });
        }
        let sql = closed.sql();
        let total = closed.total();
        Ok(Self {
            qfi_numerical,
            qfi_closed_form: total,
            vacuum_term: closed.vacuum_term(),
            bright_term: closed.bright_term(),
            sql,
            advantage_qfi: total / sql,
            advantage_precision: (total / sql).sqrt(),
            advantage_numerical: qfi_numerical / sql,
            qcrb_variance: 1.0 / (trials as f64 * qfi_numerical),
            trials,
        })
    }
}

/// Closed-form decomposition plus the numerical QFI of the same model.
pub fn qfi_closed_form_birefringence(model: &BirefringenceModel, trials: u64) -> Result<QfiReport> {
    let eta = model.sample.efficiency;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "efficiency",
            reason: format!("closed form needs η in (0, 1], got {eta}"),
        });
    }
    QfiReport::new(model.qfi()?, &ClosedFormQfi::from_model(model), trials)
}
