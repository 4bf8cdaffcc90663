//! Truncated two-mode number-state oracle.
//!
//! States live in the span of `|n1, n2>` with `n1 + n2 <= cutoff`. A density
//! matrix is stored as an ensemble `ρ = V V†` whose columns are unnormalized
//! pure states, which keeps lossy states of a few hundred photons tractable.
//! Probability mass pushed past the cutoff or pruned from the ensemble is
//! tracked as `leak`.

mod build;
mod channel;
mod measure;
mod sld;

use nalgebra::{DMatrix, DVector};

use crate::gaussian::ModeLabels;
use crate::C64;

pub use build::{auto_cutoff, build_probe_fock, single_mode_state, squeezed_vacuum_amplitudes, LEAK_TOL};
pub use channel::{
    apply_birefringence_fock, apply_loss_fock, apply_mode_unitary_fock, birefringence_generator,
    birefringence_state_fock, dichroism_state_fock, waveplate_generator,
};
pub use measure::{
    balanced_distribution, cfi_of_distributions, fidelity_with_pure, intensity_distribution, moments,
    Distribution,
};
pub use sld::{
    birefringence_qfi_fock, dichroism_qfi_fock, qfi_sld, FockFamily, SldOptions, SldReport, SLD_FLOOR,
};

/// Basis `|n1, n2>` with `n1 + n2 <= cutoff`, ordered by total photon number
/// and then by `n2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    pub cutoff: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff }
    }

    pub fn dim(&self) -> usize {
        (self.cutoff + 1) * (self.cutoff + 2) / 2
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        let n = n1 + n2;
        n * (n + 1) / 2 + n2
    }

    /// Offset of the first state with total photon number `n`.
    pub fn sector_start(&self, n: usize) -> usize {
        n * (n + 1) / 2
    }

    /// `(n1, n2)` pairs in index order.
    pub fn states(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.cutoff).flat_map(|n| (0..=n).map(move |n2| (n - n2, n2)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    space: FockSpace,
    ensemble: DMatrix<C64>,
    leak: f64,
    labels: ModeLabels,
}

impl FockDensity {
    pub(crate) fn from_ensemble(
        space: FockSpace,
        ensemble: DMatrix<C64>,
        leak: f64,
        labels: ModeLabels,
    ) -> Self {
        debug_assert_eq!(ensemble.nrows(), space.dim());
        Self {
            space,
            ensemble,
            leak,
            labels,
        }
    }

    pub fn pure(space: FockSpace, psi: DVector<C64>, leak: f64, labels: ModeLabels) -> Self {
        let n = psi.len();
        Self::from_ensemble(
            space,
            DMatrix::from_column_slice(n, 1, psi.as_slice()),
            leak,
            labels,
        )
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn cutoff(&self) -> usize {
        self.space.cutoff
    }

    pub fn ensemble(&self) -> &DMatrix<C64> {
        &self.ensemble
    }

    pub fn labels(&self) -> ModeLabels {
        self.labels
    }

    /// Probability mass lost to truncation and pruning.
    pub fn leak(&self) -> f64 {
        self.leak
    }

    pub fn rank(&self) -> usize {
        self.ensemble.ncols()
    }

    pub fn trace(&self) -> f64 {
        self.ensemble.norm_squared()
    }

    /// Dense `ρ`; only for small cutoffs.
    pub fn matrix(&self) -> DMatrix<C64> {
        &self.ensemble * self.ensemble.adjoint()
    }

    pub fn purity(&self) -> f64 {
        let gram = self.ensemble.adjoint() * &self.ensemble;
        gram.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Photon-number distribution `P(n1, n2)` in index order.
    pub fn diagonal(&self) -> Vec<f64> {
        self.ensemble
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }
}
