//! Quantum Fisher information of two-mode Gaussian states.
//!
//! The mixed-state expression is the standard two-mode result in terms of
//! `A = kσ`:
//!
//! ```text
//! Q = 1/(2(|A|-1)) { |A| tr[(A⁻¹Ȧ)²] + sqrt|1+A²| tr[((1+A²)⁻¹Ȧ)²]
//!                    + 4(λ1²-λ2²)((∂λ2)²/(λ2⁴-1) - (∂λ1)²/(λ1⁴-1)) }
//!     + 2 ḋ† σ⁻¹ ḋ
//! ```
//!
//! It is 0/0 when a symplectic eigenvalue equals one. Such states are evaluated
//! after rescaling `σ -> fσ` so that `λ2 = 1 + PURITY_REGULARIZATION`.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, SymplecticForm};
use crate::metrology::ParamDerivative;
use crate::C64;

/// Offset applied to the smallest symplectic eigenvalue of (near-)pure states.
pub const PURITY_REGULARIZATION: f64 = 1e-7;

const SINGULAR_DET: f64 = 1e-12;
const EIGEN_GAP_TOL: f64 = 1e-6;

fn inverse(sigma: &Matrix4<C64>) -> Result<Matrix4<C64>> {
    let det = sigma.determinant();
    if det.norm() < SINGULAR_DET {
        return Err(Error::SingularCovariance(det.norm()));
    }
    sigma.try_inverse().ok_or(Error::SingularCovariance(det.norm()))
}

/// `2 ḋ† σ⁻¹ ḋ`.
pub fn displacement_term(sigma: &Matrix4<C64>, d_dot: &Vector4<C64>) -> Result<f64> {
    let inv = inverse(sigma)?;
    Ok(2.0 * (d_dot.adjoint() * inv * d_dot)[(0, 0)].re)
}

fn trace_of_square(m: &Matrix4<C64>) -> f64 {
    (m * m).trace().re
}

/// Covariance part of the mixed-state formula; requires `|A| > 1`.
fn mixed_covariance_term(
    sigma: &Matrix4<C64>,
    sigma_dot: &Matrix4<C64>,
    l1sq: f64,
    l2sq: f64,
) -> Result<f64> {
    let k = SymplecticForm;
    let a = k.apply_left(sigma);
    let a_dot = k.apply_left(sigma_dot);
    let det_a = a.determinant().re;
    let a_inv = inverse(&a)?;
    let a_inv_dot = a_inv * a_dot;

    let term_a = det_a * trace_of_square(&a_inv_dot);

    let b = Matrix4::identity() + a * a;
    let b_inv = b
        .try_inverse()
        .ok_or(Error::SingularCovariance(b.determinant().norm()))?;
    let term_b = b.determinant().norm().sqrt() * trace_of_square(&(b_inv * a_dot));

    // λ1², λ2² are the roots of x² - p x + q with p = tr(A²)/2, q = |A|, so
    // ∂λ1² + ∂λ2² = ṗ and (λ1² - λ2²)(∂λ1² - ∂λ2²) = Ḋ/2 with D = p² - 4q.
    // The eigenvalue term carries a factor λ1² - λ2² and bounded derivatives,
    // so it is dropped once the gap is below numerical resolution.
    let p = (a * a).trace().re / 2.0;
    let q = det_a;
    let p_dot = (a * a_dot).trace().re;
    let q_dot = q * a_inv_dot.trace().re;
    let gap = l1sq - l2sq;
    let term_l = if gap > EIGEN_GAP_TOL * p {
        let d_dot = 2.0 * p * p_dot - 4.0 * q_dot;
        let split = d_dot / (2.0 * gap);
        let dl1 = (p_dot + split) / 2.0 / (2.0 * l1sq.sqrt());
        let dl2 = (p_dot - split) / 2.0 / (2.0 * l2sq.sqrt());
        4.0 * gap * (dl2 * dl2 / (l2sq * l2sq - 1.0) - dl1 * dl1 / (l1sq * l1sq - 1.0))
    } else {
        0.0
    };

    Ok((term_a + term_b + term_l) / (2.0 * (det_a - 1.0)))
}

/// QFI of a two-mode Gaussian family from its state and parameter derivative.
///
/// States with `λ2 < 1 + PURITY_REGULARIZATION` are rescaled before the
/// covariance part is evaluated; the displacement part always uses the
/// unmodified covariance.
pub fn qfi_two_mode_gaussian(state: &GaussianState, deriv: &ParamDerivative) -> Result<f64> {
    let sigma = state.sigma();
    let disp = displacement_term(sigma, &deriv.d_dot)?;
    let spectrum = state.symplectic_eigenvalues();
    let floor = 1.0 + PURITY_REGULARIZATION;
    let scale = if spectrum.lambda2 < floor {
        floor / spectrum.lambda2.max(f64::MIN_POSITIVE)
    } else {
        1.0
    };
    let scale_c = C64::new(scale, 0.0);
    let (l1, l2) = (spectrum.lambda1 * scale, spectrum.lambda2 * scale);
    let cov = mixed_covariance_term(&(sigma * scale_c), &(deriv.sigma_dot * scale_c), l1 * l1, l2 * l2)?;
    Ok(cov + disp)
}

/// Pure-state QFI, `tr[(σ⁻¹σ̇)²]/4 + 2 ḋ†σ⁻¹ḋ`. Only meaningful when the
/// family stays pure.
pub fn qfi_pure_gaussian(state: &GaussianState, deriv: &ParamDerivative) -> Result<f64> {
    let sigma = state.sigma();
    let inv = inverse(sigma)?;
    let cov = trace_of_square(&(inv * deriv.sigma_dot)) / 4.0;
    Ok(cov + displacement_term(sigma, &deriv.d_dot)?)
}
