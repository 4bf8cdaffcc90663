//! Sample model and the Gaussian channels it induces.
//!
//! Unit contract:
//!
//! - birefringence: `Δφ [rad] = δγ [rad cm³ g⁻¹ dm⁻¹] · C [g/cm³] · l [dm]`
//! - dichroism: `A_i = ε_i [L mol⁻¹ cm⁻¹] · C [mol/L] · l [cm]`, `T_i = 10^(-A_i)`
//!
//! Circular basis: `a_L = (a_H - i a_V)/√2`, `a_R = (a_H + i a_V)/√2`. With this
//! choice an H-polarized amplitude `α` leaves the medium as
//! `d_H = α cos(Δφ/2) e^{i(φ_L+φ_R)/2}`, `d_V = α sin(Δφ/2) e^{i(φ_L+φ_R)/2}`.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::gaussian::{GaussianState, ModeLabels};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConcentrationUnit {
    /// g/cm³ (equivalently g/mL); used with the optical rotatory power.
    GramsPerCubicCentimetre,
    /// mol/L; used with molar extinction coefficients.
    MolesPerLitre,
}

impl ConcentrationUnit {
    pub fn symbol(&self) -> &'static str {
        match self {
            Self::GramsPerCubicCentimetre => "g/cm3",
            Self::MolesPerLitre => "mol/L",
        }
    }
}

/// Path length stored in decimetres.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct PathLength {
    dm: f64,
}

impl PathLength {
    pub fn from_dm(dm: f64) -> Self {
        Self { dm }
    }

    pub fn from_cm(cm: f64) -> Self {
        Self { dm: cm / 10.0 }
    }

    pub fn from_mm(mm: f64) -> Self {
        Self { dm: mm / 100.0 }
    }

    pub fn dm(&self) -> f64 {
        self.dm
    }

    pub fn cm(&self) -> f64 {
        self.dm * 10.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiralSample {
    pub concentration: f64,
    pub unit: ConcentrationUnit,
    pub path_length: PathLength,
    /// Optical rotatory power δγ in rad cm³ g⁻¹ dm⁻¹.
    pub rotatory_power: f64,
    /// Molar extinction coefficients in L mol⁻¹ cm⁻¹.
    pub eps_left: f64,
    pub eps_right: f64,
    /// External efficiency η (transmission plus detection), equal on both arms.
    pub efficiency: f64,
}

impl ChiralSample {
    pub fn birefringent(concentration: f64, path_length: PathLength, rotatory_power: f64) -> Self {
        Self {
            concentration,
            unit: ConcentrationUnit::GramsPerCubicCentimetre,
            path_length,
            rotatory_power,
            eps_left: 0.0,
            eps_right: 0.0,
            efficiency: 1.0,
        }
    }

    pub fn dichroic(concentration: f64, path_length: PathLength, eps_left: f64, eps_right: f64) -> Self {
        Self {
            concentration,
            unit: ConcentrationUnit::MolesPerLitre,
            path_length,
            rotatory_power: 0.0,
            eps_left,
            eps_right,
            efficiency: 1.0,
        }
    }

    pub fn with_efficiency(mut self, eta: f64) -> Self {
        self.efficiency = eta;
        self
    }

    pub fn with_concentration(mut self, c: f64) -> Self {
        self.concentration = c;
        self
    }

    pub fn check(&self) -> Result<()> {
        ensure_finite("concentration", self.concentration)?;
        ensure_finite("path_length", self.path_length.dm)?;
        ensure_finite("rotatory_power", self.rotatory_power)?;
        ensure_finite("eps_left", self.eps_left)?;
        ensure_finite("eps_right", self.eps_right)?;
        ensure_finite("efficiency", self.efficiency)?;
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.concentration < 0.0 {
            return bad("concentration", "must be >= 0");
        }
        if self.path_length.dm <= 0.0 {
            return bad("path_length", "must be > 0");
        }
        if self.eps_left < 0.0 || self.eps_right < 0.0 {
            return bad("eps", "extinction coefficients must be >= 0");
        }
        check_efficiency(self.efficiency)
    }

    /// `Δε = ε_L - ε_R`; may be negative.
    pub fn delta_eps(&self) -> f64 {
        self.eps_left - self.eps_right
    }

    /// `∂Δφ/∂C = δγ l` in rad per (g/cm³).
    pub fn phase_per_concentration(&self) -> f64 {
        self.rotatory_power * self.path_length.dm()
    }
}

fn check_efficiency(eta: f64) -> Result<()> {
    ensure_finite("efficiency", eta)?;
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "efficiency",
            reason: format!("must lie in [0, 1], got {eta}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirefringencePhases {
    pub phi_l: f64,
    pub phi_r: f64,
}

impl BirefringencePhases {
    pub fn from_delta(delta_phi: f64, common_phase: f64) -> Self {
        Self {
            phi_l: common_phase - delta_phi / 2.0,
            phi_r: common_phase + delta_phi / 2.0,
        }
    }

    /// `Δφ = φ_R - φ_L`.
    pub fn delta(&self) -> f64 {
        self.phi_r - self.phi_l
    }

    /// `φ_L + φ_R`.
    pub fn sum(&self) -> f64 {
        self.phi_l + self.phi_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DichroismTransmissions {
    pub t_left: f64,
    pub t_right: f64,
    pub absorbance_left: f64,
    pub absorbance_right: f64,
}

impl DichroismTransmissions {
    pub fn from_absorbances(absorbance_left: f64, absorbance_right: f64) -> Self {
        Self {
            t_left: 10f64.powf(-absorbance_left),
            t_right: 10f64.powf(-absorbance_right),
            absorbance_left,
            absorbance_right,
        }
    }

    /// `ΔA = A_L - A_R`.
    pub fn delta_absorbance(&self) -> f64 {
        self.absorbance_left - self.absorbance_right
    }

    /// True when either transmission has underflowed to zero (or is otherwise
    /// outside `(0, 1]`).
    pub fn is_degenerate(&self) -> bool {
        !valid_transmission(self.t_left) || !valid_transmission(self.t_right)
    }
}

fn valid_transmission(t: f64) -> bool {
    t > 0.0 && t <= 1.0
}

pub fn phases_from_sample(sample: &ChiralSample, common_phase: f64) -> Result<BirefringencePhases> {
    if sample.unit != ConcentrationUnit::GramsPerCubicCentimetre {
        return Err(Error::UnitMismatch {
            found: sample.unit.symbol(),
            context: "circular birefringence (needs g/cm3)",
        });
    }
    Ok(BirefringencePhases::from_delta(
        sample.phase_per_concentration() * sample.concentration,
        common_phase,
    ))
}

pub fn transmissions_from_sample(sample: &ChiralSample) -> Result<DichroismTransmissions> {
    if sample.unit != ConcentrationUnit::MolesPerLitre {
        return Err(Error::UnitMismatch {
            found: sample.unit.symbol(),
            context: "circular dichroism (needs mol/L)",
        });
    }
    let path_cm = sample.path_length.cm();
    let trans = DichroismTransmissions::from_absorbances(
        sample.eps_left * sample.concentration * path_cm,
        sample.eps_right * sample.concentration * path_cm,
    );
    if trans.is_degenerate() {
        log::warn!(
            "absorbances ({}, {}) leave a degenerate transmission",
            trans.absorbance_left,
            trans.absorbance_right
        );
    }
    Ok(trans)
}

/// H/V-basis mode matrix of the birefringent medium: amplitudes map as `β -> B β`.
pub fn birefringence_mode_matrix(phases: &BirefringencePhases) -> Matrix2<C64> {
    let half = phases.delta() / 2.0;
    let global = C64::from_polar(1.0, phases.sum() / 2.0);
    let (sin, cos) = half.sin_cos();
    Matrix2::new(global * cos, global * -sin, global * sin, global * cos)
}

/// Change of basis from H/V amplitudes to L/R amplitudes.
pub fn linear_to_circular() -> Matrix2<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Matrix2::new(
        C64::new(r, 0.0),
        C64::new(0.0, -r),
        C64::new(r, 0.0),
        C64::new(0.0, r),
    )
}

/// Passive linear map `a -> B a` acting on a state: `d -> B d`, `N -> B N B†`,
/// `M -> B M Bᵀ`.
pub fn apply_mode_map(state: &GaussianState, b: &Matrix2<C64>) -> GaussianState {
    GaussianState::from_blocks(
        b * state.amplitudes(),
        b * state.n_block() * b.adjoint(),
        b * state.m_block() * b.transpose(),
        state.labels(),
    )
}

pub fn apply_birefringence(state: &GaussianState, phases: &BirefringencePhases) -> Result<GaussianState> {
    state.require_labels(ModeLabels::LinearHV)?;
    Ok(apply_mode_map(state, &birefringence_mode_matrix(phases)))
}

/// Independent pure-loss channels with intensity transmissions `t1`, `t2`.
pub(crate) fn apply_mode_losses(state: &GaussianState, t1: f64, t2: f64) -> GaussianState {
    let x = Vector2::new(t1.sqrt(), t2.sqrt());
    let amps = state.amplitudes();
    let n = state.n_block();
    let m = state.m_block();
    let mut n_out = Matrix2::zeros();
    let mut m_out = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let scale = x[i] * x[j];
            n_out[(i, j)] = n[(i, j)] * scale;
            m_out[(i, j)] = m[(i, j)] * scale;
        }
        n_out[(i, i)] += C64::new(1.0 - x[i] * x[i], 0.0);
    }
    GaussianState::from_blocks(
        Vector2::new(amps[0] * x[0], amps[1] * x[1]),
        n_out,
        m_out,
        state.labels(),
    )
}

pub fn apply_dichroism(state: &GaussianState, trans: &DichroismTransmissions) -> Result<GaussianState> {
    state.require_labels(ModeLabels::CircularLR)?;
    for t in [trans.t_left, trans.t_right] {
        if !valid_transmission(t) {
            return Err(Error::DegenerateTransmission(t));
        }
    }
    Ok(apply_mode_losses(state, trans.t_left, trans.t_right))
}

pub fn apply_external_loss(state: &GaussianState, eta: f64) -> Result<GaussianState> {
    check_efficiency(eta)?;
    Ok(apply_mode_losses(state, eta, eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::make_polarization_squeezed_probe;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn sucrose_phase() {
        let sample = ChiralSample::birefringent(0.01, PathLength::from_cm(1.0), 1.16);
        let ph = phases_from_sample(&sample, 0.0).unwrap();
        assert!((ph.delta() - 1.16e-3).abs() < 1e-15);
        assert_eq!(ph.sum(), 0.0);
        let zero = phases_from_sample(&sample.with_concentration(0.0), 0.3).unwrap();
        assert_eq!(zero.delta(), 0.0);
        let unit = ChiralSample::birefringent(1.0, PathLength::from_dm(1.0), 1.0);
        assert_eq!(phases_from_sample(&unit, 0.0).unwrap().delta(), 1.0);
    }

    #[test]
    fn birefringence_rejects_molar_units() {
        let sample = ChiralSample::dichroic(1.0, PathLength::from_cm(1.0), 1.0, 1.0);
        assert!(matches!(
            phases_from_sample(&sample, 0.0),
            Err(Error::UnitMismatch { .. })
        ));
        let sample = ChiralSample::birefringent(1.0, PathLength::from_cm(1.0), 1.0);
        assert!(transmissions_from_sample(&sample).is_err());
    }

    #[test]
    fn beer_lambert() {
        let sample = ChiralSample::dichroic(1.0, PathLength::from_cm(1.0), 1.0, 1.0);
        let t = transmissions_from_sample(&sample).unwrap();
        assert!((t.t_left - 0.1).abs() < 1e-15);
        let t0 = transmissions_from_sample(&sample.with_concentration(0.0)).unwrap();
        assert_eq!((t0.t_left, t0.t_right), (1.0, 1.0));

        let t = DichroismTransmissions::from_absorbances(0.0503, 0.05);
        assert!((t.t_right - 0.89125).abs() < 1e-5);
        assert!((t.t_left - 0.89064).abs() < 1e-5);
        assert!((t.delta_absorbance() - 3e-4).abs() < 1e-15);
    }

    #[test]
    fn huge_absorbance_is_degenerate() {
        let t = DichroismTransmissions::from_absorbances(400.0, 0.1);
        assert!(t.is_degenerate());
        let st = crate::gaussian::make_twin_amplitude_squeezed_probe(c(1.0), 0.0, 0.0).unwrap();
        assert!(matches!(
            apply_dichroism(&st, &t),
            Err(Error::DegenerateTransmission(_))
        ));
    }

    #[test]
    fn mode_matrix_matches_circular_phases() {
        let ph = BirefringencePhases {
            phi_l: 0.37,
            phi_r: -1.1,
        };
        let u = linear_to_circular();
        let diag = Matrix2::new(
            C64::from_polar(1.0, ph.phi_l),
            c(0.0),
            c(0.0),
            C64::from_polar(1.0, ph.phi_r),
        );
        let via_basis = u.adjoint() * diag * u;
        let direct = birefringence_mode_matrix(&ph);
        assert!((via_basis - direct).norm() < 1e-14);
    }

    #[test]
    fn full_rotation_moves_light_to_v() {
        let st = make_polarization_squeezed_probe(c(2.0), 0.0, 0.0).unwrap();
        let out =
            apply_birefringence(&st, &BirefringencePhases::from_delta(std::f64::consts::PI, 0.0)).unwrap();
        assert!(out.d()[0].norm() < 1e-15);
        assert!((out.d()[1].norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_phases_are_identity() {
        let st = make_polarization_squeezed_probe(C64::new(1.0, 0.4), 0.7, 0.2).unwrap();
        let out = apply_birefringence(
            &st,
            &BirefringencePhases {
                phi_l: 0.0,
                phi_r: 0.0,
            },
        )
        .unwrap();
        assert_eq!(out, st);
    }

    #[test]
    fn reproduces_closed_form_post_channel_moments() {
        let (alpha, s, theta) = (100.0, 1.0, 0.4);
        let ph = BirefringencePhases::from_delta(1.16e-3, 0.25);
        let st = make_polarization_squeezed_probe(c(alpha), s, theta).unwrap();
        let out = apply_birefringence(&st, &ph).unwrap();
        let half_sum = C64::from_polar(1.0, ph.sum() / 2.0);
        let d_h = half_sum * alpha * (ph.delta() / 2.0).cos();
        let d_v = half_sum * alpha * (ph.delta() / 2.0).sin();
        assert!((out.d()[0] - d_h).norm() < 1e-12);
        assert!((out.d()[1] - d_v).norm() < 1e-12);
        let off = -C64::from_polar((2.0 * s).sinh(), theta + ph.sum());
        for i in 0..4 {
            assert!((out.sigma()[(i, i)] - c((2.0 * s).cosh())).norm() < 1e-12);
        }
        assert!((out.sigma()[(0, 2)] - off).norm() < 1e-12);
        assert!((out.sigma()[(1, 3)] - off).norm() < 1e-12);
        assert!((out.sigma()[(2, 0)] - off.conj()).norm() < 1e-12);
        assert!(out.sigma()[(0, 1)].norm() < 1e-12);
        assert!(out.sigma()[(0, 3)].norm() < 1e-12);
    }

    #[test]
    fn label_mismatch_is_rejected() {
        let st = make_polarization_squeezed_probe(c(1.0), 0.1, 0.0).unwrap();
        let t = DichroismTransmissions::from_absorbances(0.1, 0.1);
        assert!(matches!(
            apply_dichroism(&st, &t),
            Err(Error::LabelMismatch { .. })
        ));
    }

    #[test]
    fn external_loss_edges() {
        let st = make_polarization_squeezed_probe(c(2.0), 0.5, 0.0).unwrap();
        assert_eq!(apply_external_loss(&st, 1.0).unwrap(), st);
        assert_eq!(
            apply_external_loss(&st, 0.0).unwrap(),
            GaussianState::vacuum(ModeLabels::LinearHV)
        );
        let lossy = apply_external_loss(&st, 0.7).unwrap();
        let expected = 1.0 - 0.7 + 0.7 * 1.0_f64.cosh();
        assert!((lossy.sigma()[(0, 0)].re - expected).abs() < 1e-15);
        assert!((lossy.sigma()[(0, 0)].re - 1.38016).abs() < 1e-5);
        assert!(apply_external_loss(&st, 1.2).is_err());
    }

    #[test]
    fn lossy_symplectic_eigenvalues() {
        let st = make_polarization_squeezed_probe(c(1.0), 0.5, 0.0).unwrap();
        let lossy = apply_external_loss(&st, 0.5).unwrap();
        let spec = lossy.symplectic_eigenvalues();
        assert!(spec.lambda2 > 1.0 && spec.lambda1 < 1.0_f64.cosh());
        let expected = (0.5 * (1.0 + 1.0_f64.cosh())).sqrt();
        assert!((spec.lambda1 - expected).abs() < 1e-10);
        assert!((spec.lambda2 - expected).abs() < 1e-10);
    }

    #[test]
    fn coherent_stays_poissonian_under_dichroism() {
        let st = crate::gaussian::make_twin_amplitude_squeezed_probe(c(3.0), 0.0, 0.0).unwrap();
        let t = DichroismTransmissions {
            t_left: 0.5,
            t_right: 1.0,
            absorbance_left: 0.5f64.log10().abs(),
            absorbance_right: 0.0,
        };
        let out = apply_dichroism(&st, &t).unwrap();
        assert!((out.mode_mean_photons(0) - 4.5).abs() < 1e-12);
        // A coherent state keeps Σ = I, hence Poissonian counts.
        assert!((out.sigma() - nalgebra::Matrix4::identity()).norm() < 1e-15);
    }
}
