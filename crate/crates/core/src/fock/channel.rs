use nalgebra::{DMatrix, Matrix2};

use crate::channels::{linear_to_circular, BirefringencePhases};
use crate::error::{Error, Result};
use crate::fock::build::exp_anti_hermitian;
use crate::fock::{FockDensity, FockSpace};
use crate::gaussian::ModeLabels;
use crate::metrology::{BirefringenceModel, DichroismModel};
use crate::C64;

/// Ensemble members lighter than this are dropped (their weight goes to `leak`).
const PRUNE: f64 = 1e-15;

/// `h` with `e^{iĜ}`, `Ĝ = Σ h_ij a_i† a_j`, realizing the circular phases
/// `e^{i(φ_L n̂_L + φ_R n̂_R)}` on H/V modes.
pub fn birefringence_generator(phases: &BirefringencePhases) -> Matrix2<C64> {
    let l = linear_to_circular();
    let phi = Matrix2::from_diagonal(&nalgebra::Vector2::new(
        C64::new(phases.phi_l, 0.0),
        C64::new(phases.phi_r, 0.0),
    ));
    l.adjoint() * phi * l
}

/// Half-waveplate at `ξ` followed by the H/V split: amplitudes map through the
/// reflection `R = [[cos ξ, sin ξ], [sin ξ, -cos ξ]]`, generated by `π(I - R)/2`.
pub fn waveplate_generator(xi: f64) -> Matrix2<C64> {
    let (s, c) = xi.sin_cos();
    let r = Matrix2::new(c, s, s, -c).map(|x| C64::new(x, 0.0));
    (Matrix2::identity() - r) * C64::new(std::f64::consts::FRAC_PI_2, 0.0)
}

/// `ρ -> e^{iĜ} ρ e^{-iĜ}` for Hermitian `h`; coherent amplitudes map as `β -> e^{ih} β`.
pub fn apply_mode_unitary_fock(rho: &FockDensity, h: &Matrix2<C64>) -> FockDensity {
    let space = rho.space();
    let mut out = rho.ensemble().clone();
    for n in 1..=space.cutoff {
        let size = n + 1;
        let mut g = DMatrix::<C64>::zeros(size, size);
        for n2 in 0..=n {
            let n1 = n - n2;
            g[(n2, n2)] = h[(0, 0)] * n1 as f64 + h[(1, 1)] * n2 as f64;
            if n2 > 0 {
                g[(n2 - 1, n2)] = h[(0, 1)] * (((n1 + 1) * n2) as f64).sqrt();
            }
            if n1 > 0 {
                g[(n2 + 1, n2)] = h[(1, 0)] * ((n1 * (n2 + 1)) as f64).sqrt();
            }
        }
        let u = exp_anti_hermitian(&(g * C64::i()));
        let start = space.sector_start(n);
        let block = out.rows(start, size).clone_owned();
        out.rows_mut(start, size).copy_from(&(u * block));
    }
    FockDensity::from_ensemble(space, out, rho.leak(), rho.labels())
}

pub fn apply_birefringence_fock(rho: &FockDensity, phases: &BirefringencePhases) -> Result<FockDensity> {
    if rho.labels() != ModeLabels::LinearHV {
        return Err(Error::LabelMismatch {
            expected: ModeLabels::LinearHV,
            found: rho.labels(),
        });
    }
    Ok(apply_mode_unitary_fock(rho, &birefringence_generator(phases)))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// `coef[n][k] = sqrt(C(n, k) t^{n-k} (1-t)^k)`.
fn kraus_coefficients(cutoff: usize, t: f64) -> Vec<Vec<f64>> {
    let lf = ln_factorials(cutoff);
    (0..=cutoff)
        .map(|n| {
            (0..=n)
                .map(|k| {
                    if t == 0.0 {
                        return if k == n { 1.0 } else { 0.0 };
                    }
                    if t == 1.0 {
                        return if k == 0 { 1.0 } else { 0.0 };
                    }
                    let ln = lf[n] - lf[k] - lf[n - k] + (n - k) as f64 * t.ln() + k as f64 * (1.0 - t).ln();
                    (0.5 * ln).exp()
                })
                .collect()
        })
        .collect()
}

#[allow(clippy::needless_range_loop)]
fn single_mode_loss(space: FockSpace, v: &DMatrix<C64>, mode: usize, t: f64) -> (DMatrix<C64>, f64) {
    if t == 1.0 {
        return (v.clone(), 0.0);
    }
    let coef = kraus_coefficients(space.cutoff, t);
    let states: Vec<(usize, usize)> = space.states().collect();
    let mut columns = Vec::new();
    let mut pruned = 0.0;
    for col in v.column_iter() {
        for k in 0..=space.cutoff {
            let mut w = nalgebra::DVector::<C64>::zeros(space.dim());
            let mut any = false;
            for (i, &(n1, n2)) in states.iter().enumerate() {
                let n = if mode == 0 { n1 } else { n2 };
                if n < k || col[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                let target = if mode == 0 {
                    space.index(n1 - k, n2)
                } else {
                    space.index(n1, n2 - k)
                };
                w[target] += col[i] * coef[n][k];
                any = true;
            }
            if !any {
                continue;
            }
            let weight = w.norm_squared();
            if weight < PRUNE {
                pruned += weight;
            } else {
                columns.push(w);
            }
        }
    }
    let m = if columns.is_empty() {
        DMatrix::zeros(space.dim(), 1)
    } else {
        DMatrix::from_columns(&columns)
    };
    (m, pruned)
}

/// Re-expresses `V V†` with orthogonal columns, dropping directions of weight
/// below `PRUNE`. Returns the dropped weight.
fn compress(v: DMatrix<C64>) -> (DMatrix<C64>, f64) {
    if v.ncols() <= 1 {
        return (v, 0.0);
    }
    let gram = v.adjoint() * &v;
    let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let eig = gram.symmetric_eigen();
    let mut keep = Vec::new();
    let mut dropped = 0.0;
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        if l > PRUNE {
            keep.push(&v * eig.eigenvectors.column(j));
        } else {
            dropped += l.max(0.0);
        }
    }
    if keep.is_empty() {
        return (DMatrix::zeros(v.nrows(), 1), dropped);
    }
    (DMatrix::from_columns(&keep), dropped)
}

/// Independent pure-loss channels with intensity transmissions `t1`, `t2`,
/// through the complete set of Kraus operators
/// `E_k |n> = sqrt(C(n,k) t^{n-k} (1-t)^k) |n-k>`.
pub fn apply_loss_fock(rho: &FockDensity, t1: f64, t2: f64) -> Result<FockDensity> {
    for t in [t1, t2] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter {
                name: "transmission",
                reason: format!("must lie in [0, 1], got {t}"),
            });
        }
    }
    let space = rho.space();
    let (v, p1) = single_mode_loss(space, rho.ensemble(), 0, t1);
    let (v, c1) = compress(v);
    let (v, p2) = single_mode_loss(space, &v, 1, t2);
    let (v, c2) = compress(v);
    Ok(FockDensity::from_ensemble(
        space,
        v,
        rho.leak() + p1 + c1 + p2 + c2,
        rho.labels(),
    ))
}

/// Fock counterpart of [`BirefringenceModel::state_at`], starting from the
/// probe built once by [`crate::fock::build_probe_fock`].
pub fn birefringence_state_fock(
    model: &BirefringenceModel,
    probe: &FockDensity,
    c: f64,
) -> Result<FockDensity> {
    let rotated = apply_birefringence_fock(probe, &model.phases_at(c))?;
    let eta = model.sample.efficiency;
    apply_loss_fock(&rotated, eta, eta)
}

pub fn dichroism_state_fock(model: &DichroismModel, probe: &FockDensity, c: f64) -> Result<FockDensity> {
    let (tl, tr) = model.transmissions_at(c);
    apply_loss_fock(probe, tl, tr)
}
