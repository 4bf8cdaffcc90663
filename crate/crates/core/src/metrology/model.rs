//! Parameterized state families `C -> ρ(C)` for the two chiral channels.

use nalgebra::{Matrix2, Vector2};

use crate::channels::{
    apply_mode_losses, apply_mode_map, birefringence_mode_matrix, BirefringencePhases, ChiralSample,
    ConcentrationUnit,
};
use crate::error::{Error, Result};
use crate::gaussian::{assemble_blocks, GaussianState, ModeLabels};
use crate::metrology::derivative::{central_difference, default_step};
use crate::metrology::{qfi_two_mode_gaussian, DerivativeMethod, ParamDerivative};
use crate::probe::{ProbeFamily, ProbeSpec};
use crate::C64;

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Probe through a circularly birefringent sample, then external loss η.
///
/// The common phase `φ_L + φ_R` is held fixed at `2 * common_phase`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BirefringenceModel {
    pub probe: ProbeSpec,
    pub sample: ChiralSample,
    pub common_phase: f64,
}

impl BirefringenceModel {
    pub fn new(probe: ProbeSpec, sample: ChiralSample) -> Result<Self> {
        Self::with_common_phase(probe, sample, 0.0)
    }

    pub fn with_common_phase(probe: ProbeSpec, sample: ChiralSample, common_phase: f64) -> Result<Self> {
        sample.check()?;
        if sample.unit != ConcentrationUnit::GramsPerCubicCentimetre {
            return Err(Error::UnitMismatch {
                found: sample.unit.symbol(),
                context: "circular birefringence (needs g/cm3)",
            });
        }
        if probe.family == ProbeFamily::TwinAmplitudeSqueezed {
            return Err(Error::Unsupported(
                "birefringence model expects an H/V probe".into(),
            ));
        }
        probe.state()?;
        Ok(Self {
            probe,
            sample,
            common_phase,
        })
    }

    /// `∂Δφ/∂C = δγ l`.
    pub fn phase_slope(&self) -> f64 {
        self.sample.phase_per_concentration()
    }

    pub fn phases_at(&self, c: f64) -> BirefringencePhases {
        BirefringencePhases::from_delta(self.phase_slope() * c, self.common_phase)
    }

    pub fn delta_phi(&self) -> f64 {
        self.phase_slope() * self.sample.concentration
    }

    /// Output state at concentration `c`; defined for any real `c`.
    pub fn state_at(&self, c: f64) -> Result<GaussianState> {
        let input = self.probe.state()?;
        let rotated = apply_mode_map(&input, &birefringence_mode_matrix(&self.phases_at(c)));
        let eta = self.sample.efficiency;
        Ok(apply_mode_losses(&rotated, eta, eta))
    }

    pub fn state(&self) -> Result<GaussianState> {
        self.state_at(self.sample.concentration)
    }

    pub fn analytic_derivative(&self) -> Result<ParamDerivative> {
        let input = self.probe.state()?;
        let b = birefringence_mode_matrix(&self.phases_at(self.sample.concentration));
        let generator = Matrix2::new(real(0.0), real(-0.5), real(0.5), real(0.0));
        let b_dot = generator * b * real(self.phase_slope());
        let eta = self.sample.efficiency;
        let d0 = input.amplitudes();
        let n0 = input.n_block();
        let m0 = input.m_block();
        let d_dot = b_dot * d0 * real(eta.sqrt());
        let n_dot = (b_dot * n0 * b.adjoint() + b * n0 * b_dot.adjoint()) * real(eta);
        let m_dot = (b_dot * m0 * b.transpose() + b * m0 * b_dot.transpose()) * real(eta);
        let (d_dot, sigma_dot) = assemble_blocks(&d_dot, &n_dot, &m_dot);
        Ok(ParamDerivative {
            d_dot,
            sigma_dot,
            method: DerivativeMethod::Analytic,
        })
    }

    pub fn numeric_derivative(&self, h: Option<f64>) -> Result<ParamDerivative> {
        let c = self.sample.concentration;
        central_difference(|x| self.state_at(x), c, h.unwrap_or_else(|| default_step(c)))
    }

    /// QFI from the general two-mode formula with the analytic derivative.
    pub fn qfi(&self) -> Result<f64> {
        qfi_two_mode_gaussian(&self.state()?, &self.analytic_derivative()?)
    }
}

/// `∂_C` of the birefringence family at the sample's concentration, with the
/// common phase fixed at zero.
pub fn analytic_derivatives_birefringence(probe: ProbeSpec, sample: ChiralSample) -> Result<ParamDerivative> {
    BirefringenceModel::new(probe, sample)?.analytic_derivative()
}

/// Twin probe through a circularly dichroic sample; each arm then sees η.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DichroismModel {
    pub probe: ProbeSpec,
    pub sample: ChiralSample,
}

impl DichroismModel {
    pub fn new(probe: ProbeSpec, sample: ChiralSample) -> Result<Self> {
        sample.check()?;
        if sample.unit != ConcentrationUnit::MolesPerLitre {
            return Err(Error::UnitMismatch {
                found: sample.unit.symbol(),
                context: "circular dichroism (needs mol/L)",
            });
        }
        if probe.state()?.labels() != ModeLabels::CircularLR {
            return Err(Error::Unsupported(
                "dichroism model expects the twin L/R probe".into(),
            ));
        }
        Ok(Self { probe, sample })
    }

    /// Per-arm intensity transmissions `η T_i(c)` for `(L, R)`.
    pub fn transmissions_at(&self, c: f64) -> (f64, f64) {
        let l = self.sample.path_length.cm();
        let eta = self.sample.efficiency;
        (
            eta * 10f64.powf(-self.sample.eps_left * c * l),
            eta * 10f64.powf(-self.sample.eps_right * c * l),
        )
    }

    pub fn state_at(&self, c: f64) -> Result<GaussianState> {
        let (tl, tr) = self.transmissions_at(c);
        Ok(apply_mode_losses(&self.probe.state()?, tl, tr))
    }

    pub fn state(&self) -> Result<GaussianState> {
        self.state_at(self.sample.concentration)
    }

    pub fn analytic_derivative(&self) -> Result<ParamDerivative> {
        let input = self.probe.state()?;
        let (tl, tr) = self.transmissions_at(self.sample.concentration);
        let l = self.sample.path_length.cm();
        let ln10 = std::f64::consts::LN_10;
        let x = Vector2::new(tl.sqrt(), tr.sqrt());
        let x_dot = Vector2::new(
            -x[0] * ln10 * self.sample.eps_left * l / 2.0,
            -x[1] * ln10 * self.sample.eps_right * l / 2.0,
        );
        let d0 = input.amplitudes();
        let n0 = input.n_block();
        let m0 = input.m_block();
        let d_dot = Vector2::new(d0[0] * x_dot[0], d0[1] * x_dot[1]);
        let mut n_dot = Matrix2::zeros();
        let mut m_dot = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let w = x_dot[i] * x[j] + x[i] * x_dot[j];
                n_dot[(i, j)] = n0[(i, j)] * w;
                m_dot[(i, j)] = m0[(i, j)] * w;
            }
            n_dot[(i, i)] -= real(2.0 * x[i] * x_dot[i]);
        }
        let (d_dot, sigma_dot) = assemble_blocks(&d_dot, &n_dot, &m_dot);
        Ok(ParamDerivative {
            d_dot,
            sigma_dot,
            method: DerivativeMethod::Analytic,
        })
    }

    pub fn numeric_derivative(&self, h: Option<f64>) -> Result<ParamDerivative> {
        let c = self.sample.concentration;
        central_difference(|x| self.state_at(x), c, h.unwrap_or_else(|| default_step(c)))
    }

    pub fn qfi(&self) -> Result<f64> {
        qfi_two_mode_gaussian(&self.state()?, &self.analytic_derivative()?)
    }
}
