use serde::Serialize;

use crate::error::Result;
use crate::gaussian::{make_polarization_squeezed_probe, make_twin_amplitude_squeezed_probe, GaussianState};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeFamily {
    /// `|α_H, 0_V>`; the polarization-squeezed probe at `s = 0`.
    Coherent,
    /// Displaced H mode, both H and V squeezed identically.
    PolarizationSqueezed,
    /// Both circular modes displaced by `α` and squeezed identically.
    TwinAmplitudeSqueezed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSpec {
    pub family: ProbeFamily,
    pub alpha: C64,
    pub s: f64,
    pub theta: f64,
}

impl ProbeSpec {
    pub fn coherent(alpha: C64) -> Self {
        Self {
            family: ProbeFamily::Coherent,
            alpha,
            s: 0.0,
            theta: 0.0,
        }
    }

    pub fn polarization_squeezed(alpha: C64, s: f64, theta: f64) -> Self {
        Self {
            family: ProbeFamily::PolarizationSqueezed,
            alpha,
            s,
            theta,
        }
    }

    pub fn twin_amplitude_squeezed(alpha: C64, s: f64, theta: f64) -> Self {
        Self {
            family: ProbeFamily::TwinAmplitudeSqueezed,
            alpha,
            s,
            theta,
        }
    }

    /// Squeezing factor actually applied (zero for the coherent family).
    pub fn squeezing(&self) -> f64 {
        match self.family {
            ProbeFamily::Coherent => 0.0,
            _ => self.s,
        }
    }

    /// Squeezing angle measured from the displacement direction, `θ - 2 arg α`.
    ///
    /// Passive channels rotate the displacement and the squeezing ellipse
    /// together, so this is the angle every downstream quadrature sees.
    /// `0` is amplitude squeezing.
    pub fn relative_squeezing_angle(&self) -> f64 {
        self.theta - 2.0 * self.alpha.arg()
    }

    pub fn state(&self) -> Result<GaussianState> {
        match self.family {
            ProbeFamily::Coherent => make_polarization_squeezed_probe(self.alpha, 0.0, 0.0),
            ProbeFamily::PolarizationSqueezed => {
                make_polarization_squeezed_probe(self.alpha, self.s, self.theta)
            }
            ProbeFamily::TwinAmplitudeSqueezed => {
                make_twin_amplitude_squeezed_probe(self.alpha, self.s, self.theta)
            }
        }
    }
}

/// Squeezing angle that makes the probe amplitude-squeezed (`θ = 2 arg α`).
pub fn amplitude_squeezing_angle(alpha: C64) -> f64 {
    2.0 * alpha.arg()
}

/// The angle `θ = π - φ_L - φ_R` used with the closed-form QFI.
pub fn closed_form_angle(phi_l: f64, phi_r: f64) -> f64 {
    std::f64::consts::PI - phi_l - phi_r
}
