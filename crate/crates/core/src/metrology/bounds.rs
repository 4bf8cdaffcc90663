use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrology::{MeasurementStats, QfiReport};

/// Relative slack allowed in `1/(νF) >= 1/(νQ)`.
pub const CHAIN_TOL: f64 = 1e-6;

/// `Δ²C >= 1/(νF) >= 1/(νQ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundChain {
    pub crb: f64,
    pub qcrb: f64,
    pub trials: u64,
    /// False when the classical bound falls below the quantum one beyond
    /// `CHAIN_TOL`; such a chain is an inconsistency, not a result.
    pub ordered: bool,
}

impl BoundChain {
    pub fn from_information(cfi: f64, qfi: f64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter {
                name: "trials",
                reason: "need at least one trial".into(),
            });
        }
        let nu = trials as f64;
        let crb = 1.0 / (nu * cfi);
        let qcrb = 1.0 / (nu * qfi);
        let ordered = crb >= qcrb * (1.0 - CHAIN_TOL);
        if !ordered {
            log::error!("bound chain violated: CRB {crb} < QCRB {qcrb}");
        }
        Ok(Self {
            crb,
            qcrb,
            trials,
            ordered,
        })
    }

    /// `crb / qcrb`; one when the measurement is optimal.
    pub fn efficiency_gap(&self) -> f64 {
        self.crb / self.qcrb
    }
}

pub fn crb_chain(qfi: &QfiReport, cfi: &MeasurementStats, trials: u64) -> Result<BoundChain> {
    BoundChain::from_information(cfi.cfi_gaussian, qfi.qfi_numerical, trials)
}
