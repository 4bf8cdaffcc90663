//! Quantum Fisher information from the symmetric logarithmic derivative,
//! `Q = 2 Σ_{jk} |⟨j|∂ρ|k⟩|² / (p_j + p_k)` over pairs with `p_j + p_k` above
//! the spectral floor.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::fock::{birefringence_state_fock, build_probe_fock, dichroism_state_fock, FockDensity};
use crate::metrology::{BirefringenceModel, DichroismModel};
use crate::C64;

/// Relative spectral floor: eigenvalues below `SLD_FLOOR · p_max` count as zero.
pub const SLD_FLOOR: f64 = 1e-12;

/// A parameterized family `C -> ρ(C)`.
pub trait FockFamily {
    fn state_at(&self, c: f64) -> Result<FockDensity>;
}

impl<F> FockFamily for F
where
    F: Fn(f64) -> Result<FockDensity>,
{
    fn state_at(&self, c: f64) -> Result<FockDensity> {
        self(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SldOptions {
    /// Outer central-difference step; defaults to `1e-4 · max(|C|, 1)`.
    pub step: Option<f64>,
    pub floor: f64,
}

impl Default for SldOptions {
    fn default() -> Self {
        Self {
            step: None,
            floor: SLD_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SldReport {
    pub qfi: f64,
    /// Same computation with the floor raised a hundredfold.
    pub qfi_floor_x100: f64,
    pub support_rank: usize,
    pub cutoff: usize,
    /// Largest truncation leak among the evaluated states.
    pub leak: f64,
    pub step: f64,
}

impl SldReport {
    pub fn floor_sensitivity(&self) -> f64 {
        (self.qfi - self.qfi_floor_x100).abs() / self.qfi.abs().max(f64::MIN_POSITIVE)
    }
}

/// `∂ρ · U` from factored neighbours: `(V₊V₊†U - V₋V₋†U) / (2h)`.
fn derivative_times(plus: &DMatrix<C64>, minus: &DMatrix<C64>, u: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
    (plus * (plus.adjoint() * u) - minus * (minus.adjoint() * u)) * C64::new(1.0 / (2.0 * h), 0.0)
}

struct Spectrum {
    probs: DVector<f64>,
    vectors: DMatrix<C64>,
}

/// Eigenpairs of `V V†` with eigenvalue above `floor · p_max`, from the Gram matrix.
fn support(v: &DMatrix<C64>, floor: f64) -> Spectrum {
    let gram = v.adjoint() * v;
    let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let eig = gram.symmetric_eigen();
    let p_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut probs = Vec::new();
    let mut vectors = Vec::new();
    for (j, &p) in eig.eigenvalues.iter().enumerate() {
        if p > floor * p_max {
            probs.push(p);
            vectors.push(v * eig.eigenvectors.column(j) * C64::new(1.0 / p.sqrt(), 0.0));
        }
    }
    Spectrum {
        probs: DVector::from_vec(probs),
        vectors: DMatrix::from_columns(&vectors),
    }
}

fn sld_sum(spec: &Spectrum, d_u: &DMatrix<C64>) -> f64 {
    let u = &spec.vectors;
    let p = &spec.probs;
    let inner = u.adjoint() * d_u;
    let mut q = 0.0;
    for j in 0..p.len() {
        for k in 0..p.len() {
            q += 2.0 * inner[(j, k)].norm_sqr() / (p[j] + p[k]);
        }
    }
    // Support-kernel pairs: both orderings, each 2|·|²/p_j.
    let outside = d_u - u * inner;
    for j in 0..p.len() {
        q += 4.0 * outside.column(j).norm_squared() / p[j];
    }
    q
}

pub fn qfi_sld<F: FockFamily>(family: &F, c: f64, opts: SldOptions) -> Result<SldReport> {
    let h = opts.step.unwrap_or(1e-4 * c.abs().max(1.0));
    let center = family.state_at(c)?;
    let states = [
        family.state_at(c + h)?,
        family.state_at(c - h)?,
        family.state_at(c + h / 2.0)?,
        family.state_at(c - h / 2.0)?,
    ];
    let leak = states.iter().map(|s| s.leak()).fold(center.leak(), f64::max);
    let evaluate = |floor: f64| {
        let spec = support(center.ensemble(), floor);
        let u = &spec.vectors;
        let d1 = derivative_times(states[0].ensemble(), states[1].ensemble(), u, h);
        let d2 = derivative_times(states[2].ensemble(), states[3].ensemble(), u, h / 2.0);
        let d_u = (d2 * C64::new(4.0, 0.0) - d1) * C64::new(1.0 / 3.0, 0.0);
        (sld_sum(&spec, &d_u), spec.probs.len())
    };
    let (qfi, support_rank) = evaluate(opts.floor);
    let (qfi_floor_x100, _) = evaluate(opts.floor * 100.0);
    if (qfi - qfi_floor_x100).abs() > 1e-6 * qfi.abs() {
        log::warn!("SLD QFI moves from {qfi} to {qfi_floor_x100} when the floor is raised 100x");
    }
    Ok(SldReport {
        qfi,
        qfi_floor_x100,
        support_rank,
        cutoff: center.cutoff(),
        leak,
        step: h,
    })
}

/// Oracle QFI of a birefringence model at its configured concentration.
pub fn birefringence_qfi_fock(model: &BirefringenceModel, cutoff: Option<usize>) -> Result<SldReport> {
    let probe = build_probe_fock(&model.probe, cutoff)?;
    let family = |c: f64| birefringence_state_fock(model, &probe, c);
    qfi_sld(&family, model.sample.concentration, SldOptions::default())
}

pub fn dichroism_qfi_fock(model: &DichroismModel, cutoff: Option<usize>) -> Result<SldReport> {
    let probe = build_probe_fock(&model.probe, cutoff)?;
    let family = |c: f64| dichroism_state_fock(model, &probe, c);
    qfi_sld(&family, model.sample.concentration, SldOptions::default())
}
