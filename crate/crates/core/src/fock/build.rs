use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{FockDensity, FockSpace};
use crate::probe::{ProbeFamily, ProbeSpec};
use crate::C64;

/// Largest accepted probability mass outside the truncated space.
pub const LEAK_TOL: f64 = 1e-8;

/// Extra single-mode levels used while exponentiating generators.
const EXP_MARGIN: usize = 40;

/// `ceil(8 n̄ + 20)` with `n̄` the total mean photon number of the probe.
pub fn auto_cutoff(probe: &ProbeSpec) -> usize {
    let a2 = probe.alpha.norm_sqr();
    let sq = probe.squeezing().sinh().powi(2);
    let total = match probe.family {
        ProbeFamily::Coherent => a2,
        ProbeFamily::PolarizationSqueezed => a2 + 2.0 * sq,
        ProbeFamily::TwinAmplitudeSqueezed => 2.0 * (a2 + sq),
    };
    (8.0 * total + 20.0).ceil() as usize
}

fn annihilation(nb: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(nb, nb);
    for n in 1..nb {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `exp(K)` for anti-Hermitian `K`, through the Hermitian `H = iK`.
pub(crate) fn exp_anti_hermitian(k: &DMatrix<C64>) -> DMatrix<C64> {
    let h = k * C64::i();
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, -l));
    let u = &eig.eigenvectors;
    u * DMatrix::from_diagonal(&phases) * u.adjoint()
}

/// `D(α) S(s, θ) |0>` in an `nb`-level truncation, with
/// `S = exp(s(e^{-iθ} a² - e^{iθ} a†²)/2)` and `D = exp(α a† - α* a)`.
pub fn single_mode_state(alpha: C64, s: f64, theta: f64, nb: usize) -> DVector<C64> {
    let a = annihilation(nb);
    let ad = a.adjoint();
    let mut psi = DVector::zeros(nb);
    psi[0] = C64::new(1.0, 0.0);
    if s != 0.0 {
        let k = (&a * &a * C64::from_polar(1.0, -theta) - &ad * &ad * C64::from_polar(1.0, theta))
            * C64::new(s / 2.0, 0.0);
        psi = exp_anti_hermitian(&k) * psi;
    }
    if alpha != C64::new(0.0, 0.0) {
        let k = &ad * alpha - &a * alpha.conj();
        psi = exp_anti_hermitian(&k) * psi;
    }
    psi
}

/// Closed-form squeezed vacuum amplitudes
/// `c_2n = (-e^{iθ} tanh s)^n sqrt((2n)!) / (2^n n!) / sqrt(cosh s)`.
pub fn squeezed_vacuum_amplitudes(s: f64, theta: f64, n_max: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
    let ratio = -C64::from_polar(s.tanh(), theta);
    let mut coeff = C64::new(1.0 / s.cosh().sqrt(), 0.0);
    for n in 0.. {
        if 2 * n > n_max {
            break;
        }
        out[2 * n] = coeff;
        // c_{2n+2} / c_{2n} = ratio * sqrt((2n+1)(2n+2)) / (2(n+1))
        let m = n as f64;
        coeff *= ratio * ((2.0 * m + 1.0) * (2.0 * m + 2.0)).sqrt() / (2.0 * (m + 1.0));
    }
    out
}

/// Probe state in the truncated space, in the probe's own mode labels.
pub fn build_probe_fock(probe: &ProbeSpec, cutoff: Option<usize>) -> Result<FockDensity> {
    let cutoff = cutoff.unwrap_or_else(|| auto_cutoff(probe));
    let space = FockSpace::new(cutoff);
    let nb = cutoff + EXP_MARGIN;
    let s = probe.squeezing();
    let (a1, a2) = match probe.family {
        ProbeFamily::TwinAmplitudeSqueezed => (probe.alpha, probe.alpha),
        _ => (probe.alpha, C64::new(0.0, 0.0)),
    };
    let psi1 = single_mode_state(a1, s, probe.theta, nb);
    let psi2 = if a2 == a1 {
        psi1.clone()
    } else {
        single_mode_state(a2, s, probe.theta, nb)
    };
    let mut psi = DVector::zeros(space.dim());
    for (i, (n1, n2)) in space.states().enumerate() {
        psi[i] = psi1[n1] * psi2[n2];
    }
    let leak = (1.0 - psi.norm_squared()).max(0.0);
    if leak > LEAK_TOL {
        return Err(Error::TruncationLeak {
            leak,
            tol: LEAK_TOL,
            cutoff,
        });
    }
    let labels = probe.state()?.labels();
    Ok(FockDensity::pure(space, psi, leak, labels))
}
