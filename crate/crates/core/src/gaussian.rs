//! Two-mode Gaussian states in the complex mode ordering.
//!
//! Every vector and matrix in this crate is indexed against the single ordering
//! `A = (a1, a2, a1†, a2†)`. The covariance is
//! `Σ_ij = <A_i A_j† + A_j† A_i> - 2 <A_i><A_j†>`, so the vacuum has `Σ = I`.
//!
//! With this ordering a state is fully determined by three blocks:
//! the mode amplitudes `d[0..2]`, the Hermitian block `N = Σ[0..2, 0..2]` and
//! the symmetric block `M = Σ[0..2, 2..4]`. The remaining entries follow by
//! conjugation, and [`GaussianState::from_blocks`] fills them in so that the
//! symmetry holds bit for bit.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::C64;

/// Tolerance on `λ >= 1` for the physicality check.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Which physical polarization modes the two slots of the ordering refer to.
///
/// The index layout is the same for both; the tag only records whether slot 0/1
/// are the linear (H, V) or circular (L, R) modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeLabels {
    /// Horizontal and vertical linear polarization (birefringence scenarios).
    LinearHV,
    /// Left and right circular polarization (dichroism scenarios).
    CircularLR,
}

/// The symplectic form `k = diag(1, 1, -1, -1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SymplecticForm;

impl SymplecticForm {
    pub fn matrix(&self) -> Matrix4<C64> {
        Matrix4::from_diagonal(&Vector4::new(
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(-1.0, 0.0),
        ))
    }

    /// `k * m`: flips the sign of the conjugate rows.
    pub fn apply_left(&self, m: &Matrix4<C64>) -> Matrix4<C64> {
        let mut out = *m;
        for j in 0..4 {
            out[(2, j)] = -out[(2, j)];
            out[(3, j)] = -out[(3, j)];
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    d: Vector4<C64>,
    sigma: Matrix4<C64>,
    labels: ModeLabels,
}

/// Symplectic eigenvalues `λ1 >= λ2` of a state, with the physicality flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SymplecticSpectrum {
    pub fn is_physical(&self) -> bool {
        self.lambda2 >= 1.0 - PHYSICALITY_TOL
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.lambda1 - 1.0).abs() <= tol && (self.lambda2 - 1.0).abs() <= tol
    }
}

impl GaussianState {
    /// Builds a state from its independent blocks; all mirrored entries are the
    /// exact conjugates of the supplied ones.
    pub fn from_blocks(
        amplitudes: Vector2<C64>,
        n: Matrix2<C64>,
        m: Matrix2<C64>,
        labels: ModeLabels,
    ) -> Self {
        let (d, sigma) = assemble_blocks(&amplitudes, &n, &m);
        Self { d, sigma, labels }
    }

    /// Builds a state from a full displacement vector and covariance matrix,
    /// rejecting inputs that break the conjugation symmetry by more than `1e-12`
    /// relative to the largest entry.
    pub fn from_full(d: Vector4<C64>, sigma: Matrix4<C64>, labels: ModeLabels) -> Result<Self> {
        let state = Self { d, sigma, labels };
        let scale = sigma.iter().map(|z| z.norm()).fold(1.0, f64::max)
            + d.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let defect = state.conjugation_defect();
        if defect > 1e-12 * scale {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("conjugation symmetry broken by {defect:e}"),
            });
        }
        Ok(state)
    }

    pub fn vacuum(labels: ModeLabels) -> Self {
        Self::from_blocks(Vector2::zeros(), Matrix2::identity(), Matrix2::zeros(), labels)
    }

    pub fn d(&self) -> &Vector4<C64> {
        &self.d
    }

    pub fn sigma(&self) -> &Matrix4<C64> {
        &self.sigma
    }

    pub fn labels(&self) -> ModeLabels {
        self.labels
    }

    pub fn amplitudes(&self) -> Vector2<C64> {
        Vector2::new(self.d[0], self.d[1])
    }

    /// The Hermitian block `<a_i a_j† + a_j† a_i> - 2 <a_i><a_j>*`.
    pub fn n_block(&self) -> Matrix2<C64> {
        self.sigma.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// The symmetric block `<a_i a_j + a_j a_i> - 2 <a_i><a_j>`.
    pub fn m_block(&self) -> Matrix2<C64> {
        self.sigma.fixed_view::<2, 2>(0, 2).into_owned()
    }

    pub(crate) fn require_labels(&self, expected: ModeLabels) -> Result<()> {
        if self.labels == expected {
            Ok(())
        } else {
            Err(Error::LabelMismatch {
                expected,
                found: self.labels,
            })
        }
    }

    /// Largest absolute deviation from the conjugation symmetry of the ordering.
    pub fn conjugation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            worst = worst.max((self.d[i + 2] - self.d[i].conj()).norm());
            for j in 0..2 {
                worst = worst.max((self.sigma[(i + 2, j + 2)] - self.sigma[(i, j)].conj()).norm());
                worst = worst.max((self.sigma[(i, j + 2)] - self.sigma[(i + 2, j)].conj()).norm());
            }
        }
        worst
    }

    /// Bit-level symmetry check; holds for everything built via [`Self::from_blocks`].
    pub fn is_conjugation_symmetric(&self) -> bool {
        (0..2).all(|i| {
            self.d[i + 2] == self.d[i].conj()
                && (0..2).all(|j| {
                    self.sigma[(i + 2, j + 2)] == self.sigma[(i, j)].conj()
                        && self.sigma[(i, j + 2)] == self.sigma[(i + 2, j)].conj()
                })
        })
    }

    /// For positive-definite `Σ` the values are read off the Hermitian matrix
    /// `Σ^½ k Σ^½` (spectrum `±λ1, ±λ2`), which stays accurate when `λ1 = λ2`.
    /// Otherwise the trace/determinant route is used.
    pub fn symplectic_eigenvalues(&self) -> SymplecticSpectrum {
        let herm = (self.sigma + self.sigma.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        if eig.eigenvalues.iter().all(|&v| v > 0.0) {
            let root = eig.eigenvectors.map(|z| z)
                * Matrix4::from_diagonal(&eig.eigenvalues.map(|v| C64::new(v.sqrt(), 0.0)))
                * eig.eigenvectors.adjoint();
            let h = root * SymplecticForm.apply_left(&root);
            let h = (h + h.adjoint()) * C64::new(0.5, 0.0);
            let mut mags: Vec<f64> = h.symmetric_eigenvalues().iter().map(|v| v.abs()).collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            return SymplecticSpectrum {
                lambda1: (mags[0] + mags[1]) / 2.0,
                lambda2: (mags[2] + mags[3]) / 2.0,
            };
        }
        let (l1sq, l2sq) = symplectic_squares(&self.sigma);
        SymplecticSpectrum {
            lambda1: l1sq.max(0.0).sqrt(),
            lambda2: l2sq.max(0.0).sqrt(),
        }
    }

    pub fn is_physical(&self) -> bool {
        self.symplectic_eigenvalues().is_physical()
    }

    /// Total mean photon number over both modes.
    pub fn mean_photons(&self) -> f64 {
        (0..2)
            .map(|i| self.d[i].norm_sqr() + (self.sigma[(i, i)].re - 1.0) / 2.0)
            .sum()
    }

    /// Mean photon number of a single mode (0 or 1).
    pub fn mode_mean_photons(&self, mode: usize) -> f64 {
        self.d[mode].norm_sqr() + (self.sigma[(mode, mode)].re - 1.0) / 2.0
    }
}

/// Expands `(amplitudes, N, M)` into the full ordering. Also used for
/// parameter derivatives, which obey the same conjugation pattern.
pub(crate) fn assemble_blocks(
    amplitudes: &Vector2<C64>,
    n: &Matrix2<C64>,
    m: &Matrix2<C64>,
) -> (Vector4<C64>, Matrix4<C64>) {
    let d = Vector4::new(
        amplitudes[0],
        amplitudes[1],
        amplitudes[0].conj(),
        amplitudes[1].conj(),
    );
    let mut sigma = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            sigma[(i, j)] = n[(i, j)];
            sigma[(i, j + 2)] = m[(i, j)];
            sigma[(i + 2, j)] = m[(i, j)].conj();
            sigma[(i + 2, j + 2)] = n[(i, j)].conj();
        }
    }
    (d, sigma)
}

/// Squares of the symplectic eigenvalues, `(λ1², λ2²)` with `λ1 >= λ2`.
///
/// The eigenvalues of `k Σ` are `±λ1, ±λ2`, so `tr((kΣ)²) = 2(λ1² + λ2²)` and
/// `det(kΣ) = λ1² λ2²` fix them through a quadratic.
pub(crate) fn symplectic_squares(sigma: &Matrix4<C64>) -> (f64, f64) {
    let a = SymplecticForm.apply_left(sigma);
    let p = (a * a).trace().re / 2.0;
    let q = a.determinant().re;
    let disc = (p * p - 4.0 * q).max(0.0).sqrt();
    ((p + disc) / 2.0, (p - disc) / 2.0)
}

/// Single-mode squeezing block: `N = cosh(2s) I`, `M = -sinh(2s) e^{iθ} I`.
fn squeezed_blocks(s: f64, theta: f64) -> (Matrix2<C64>, Matrix2<C64>) {
    let c = (2.0 * s).cosh();
    let off = -C64::from_polar((2.0 * s).sinh(), theta);
    (
        Matrix2::from_diagonal_element(C64::new(c, 0.0)),
        Matrix2::from_diagonal_element(off),
    )
}

fn check_probe_inputs(alpha: C64, s: f64, theta: f64) -> Result<()> {
    ensure_finite("alpha", alpha.re)?;
    ensure_finite("alpha", alpha.im)?;
    ensure_finite("s", s)?;
    ensure_finite("theta", theta)?;
    if s < 0.0 {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("squeezing factor must be >= 0, got {s}"),
        });
    }
    Ok(())
}

/// `D_H(α) S_H(s, θ) S_V(s, θ) |0, 0>` in H/V labels (before any channel).
pub fn make_polarization_squeezed_probe(alpha: C64, s: f64, theta: f64) -> Result<GaussianState> {
    check_probe_inputs(alpha, s, theta)?;
    let (n, m) = squeezed_blocks(s, theta);
    Ok(GaussianState::from_blocks(
        Vector2::new(alpha, C64::new(0.0, 0.0)),
        n,
        m,
        ModeLabels::LinearHV,
    ))
}

/// `D_L(α) D_R(α) S_L(s, θ) S_R(s, θ) |0, 0>` in L/R labels.
pub fn make_twin_amplitude_squeezed_probe(alpha: C64, s: f64, theta: f64) -> Result<GaussianState> {
    check_probe_inputs(alpha, s, theta)?;
    let (n, m) = squeezed_blocks(s, theta);
    Ok(GaussianState::from_blocks(
        Vector2::new(alpha, alpha),
        n,
        m,
        ModeLabels::CircularLR,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn vacuum_is_identity() {
        let v = GaussianState::vacuum(ModeLabels::LinearHV);
        assert_eq!(*v.sigma(), Matrix4::identity());
        assert_eq!(*v.d(), Vector4::zeros());
        let spec = v.symplectic_eigenvalues();
        assert_eq!((spec.lambda1, spec.lambda2), (1.0, 1.0));
        assert_eq!(v.mean_photons(), 0.0);
    }

    #[test]
    fn zero_squeezing_is_exactly_coherent() {
        let st = make_polarization_squeezed_probe(c(3.0), 0.0, 0.0).unwrap();
        assert_eq!(*st.sigma(), Matrix4::identity());
        assert_eq!(*st.d(), Vector4::new(c(3.0), c(0.0), c(3.0), c(0.0)));
        assert_eq!(st.mean_photons(), 9.0);
    }

    #[test]
    fn squeezed_vacuum_entries() {
        let st = make_polarization_squeezed_probe(c(0.0), 0.5, 0.0).unwrap();
        for i in 0..4 {
            assert!((st.sigma()[(i, i)].re - 1.0_f64.cosh()).abs() < 1e-15);
        }
        assert!((st.sigma()[(0, 2)].re + 1.0_f64.sinh()).abs() < 1e-15);
        assert!((st.sigma()[(0, 2)].re + 1.175201).abs() < 1e-6);
        assert!((st.sigma()[(0, 0)].re - 1.543081).abs() < 1e-6);
    }

    #[test]
    fn squeezed_probe_is_pure() {
        let st = make_polarization_squeezed_probe(c(2.0), 0.3, std::f64::consts::FRAC_PI_2).unwrap();
        let spec = st.symplectic_eigenvalues();
        assert!(st.is_physical());
        assert!((spec.lambda1 - 1.0).abs() < 1e-12 && (spec.lambda2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn twin_probe_photons() {
        let vac = make_twin_amplitude_squeezed_probe(c(0.0), 0.0, 0.0).unwrap();
        assert_eq!(vac, GaussianState::vacuum(ModeLabels::CircularLR));
        let coh = make_twin_amplitude_squeezed_probe(c(5.0), 0.0, 0.0).unwrap();
        assert_eq!(coh.mean_photons(), 50.0);
        let sq = make_twin_amplitude_squeezed_probe(c(5.0), 0.4, 0.0).unwrap();
        let expected = 25.0 + 0.4_f64.sinh().powi(2);
        assert!((sq.mode_mean_photons(0) - expected).abs() < 1e-12);
        assert!((sq.mode_mean_photons(0) - 25.168_717).abs() < 1e-6);
    }

    #[test]
    fn squeezed_vacuum_photons() {
        let st = make_polarization_squeezed_probe(c(0.0), 1.0, 0.0).unwrap();
        assert!((st.mean_photons() - 2.0 * 1.0_f64.sinh().powi(2)).abs() < 1e-12);
        assert!((st.mean_photons() - 2.76220).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_polarization_squeezed_probe(c(1.0), -0.1, 0.0).is_err());
        assert!(make_polarization_squeezed_probe(c(f64::NAN), 0.1, 0.0).is_err());
        assert!(make_twin_amplitude_squeezed_probe(c(1.0), f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn from_full_rejects_broken_symmetry() {
        let mut sigma = Matrix4::identity();
        sigma[(0, 2)] = c(0.5);
        assert!(GaussianState::from_full(Vector4::zeros(), sigma, ModeLabels::LinearHV).is_err());
        sigma[(2, 0)] = c(0.5);
        assert!(GaussianState::from_full(Vector4::zeros(), sigma, ModeLabels::LinearHV).is_ok());
    }

    #[test]
    fn flags_unphysical_without_failing() {
        let st = GaussianState::from_blocks(
            Vector2::zeros(),
            Matrix2::from_diagonal_element(c(0.5)),
            Matrix2::zeros(),
            ModeLabels::LinearHV,
        );
        let spec = st.symplectic_eigenvalues();
        assert!(!spec.is_physical());
        assert!((spec.lambda1 - 0.5).abs() < 1e-12);
    }
}
