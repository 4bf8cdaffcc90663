use std::collections::BTreeMap;

use nalgebra::{DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::fock::{apply_mode_unitary_fock, waveplate_generator, FockDensity, FockSpace};
use crate::gaussian::{GaussianState, ModeLabels};
use crate::C64;

/// Exact finite outcome distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<K: Ord> {
    pub probs: BTreeMap<K, f64>,
}

impl<K: Ord + Clone> Distribution<K> {
    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn get(&self, k: &K) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }
}

impl Distribution<i64> {
    pub fn mean(&self) -> f64 {
        self.probs.iter().map(|(&k, &p)| k as f64 * p).sum::<f64>() / self.total()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .map(|(&k, &p)| (k as f64 - m).powi(2) * p)
            .sum::<f64>()
            / self.total()
    }
}

impl Distribution<(usize, usize)> {
    pub fn marginal(&self, mode: usize) -> Distribution<i64> {
        let mut probs = BTreeMap::new();
        for (&(n1, n2), &p) in &self.probs {
            let k = if mode == 0 { n1 } else { n2 } as i64;
            *probs.entry(k).or_insert(0.0) += p;
        }
        Distribution { probs }
    }
}

/// Photon counts of the two modes, `P(n1, n2)`.
pub fn intensity_distribution(rho: &FockDensity) -> Distribution<(usize, usize)> {
    let diag = rho.diagonal();
    let probs = rho.space().states().zip(diag).collect();
    Distribution { probs }
}

/// Outcomes of `Ŝ = n̂_b1 - n̂_b2` after a waveplate rotation `ξ` on H/V modes.
pub fn balanced_distribution(rho: &FockDensity, xi: f64) -> Result<Distribution<i64>> {
    if rho.labels() != ModeLabels::LinearHV {
        return Err(Error::LabelMismatch {
            expected: ModeLabels::LinearHV,
            found: rho.labels(),
        });
    }
    let rotated = apply_mode_unitary_fock(rho, &waveplate_generator(xi));
    let mut probs = BTreeMap::new();
    for ((n1, n2), p) in rotated.space().states().zip(rotated.diagonal()) {
        *probs.entry(n1 as i64 - n2 as i64).or_insert(0.0) += p;
    }
    Ok(Distribution { probs })
}

/// Classical Fisher information `Σ (∂p)² / p` of a distribution family, with a
/// Richardson-extrapolated central difference of outer step `h`.
pub fn cfi_of_distributions<K, F>(family: F, c: f64, h: f64) -> Result<f64>
where
    K: Ord + Clone,
    F: Fn(f64) -> Result<Distribution<K>>,
{
    let center = family(c)?;
    let (p1, m1) = (family(c + h)?, family(c - h)?);
    let (p2, m2) = (family(c + h / 2.0)?, family(c - h / 2.0)?);
    let p_max = center.probs.values().cloned().fold(0.0, f64::max);
    let mut keys: Vec<K> = center.probs.keys().cloned().collect();
    for d in [&p1, &m1, &p2, &m2] {
        keys.extend(d.probs.keys().cloned());
    }
    keys.sort();
    keys.dedup();
    let mut fisher = 0.0;
    for k in keys {
        let p = center.get(&k);
        if p <= 1e-14 * p_max {
            continue;
        }
        let d1 = (p1.get(&k) - m1.get(&k)) / (2.0 * h);
        let d2 = (p2.get(&k) - m2.get(&k)) / h;
        let dp = (4.0 * d2 - d1) / 3.0;
        fisher += dp * dp / p;
    }
    Ok(fisher)
}

fn lower(space: FockSpace, v: &DVector<C64>, mode: usize) -> DVector<C64> {
    let mut out = DVector::zeros(v.len());
    for (i, (n1, n2)) in space.states().enumerate() {
        let n = if mode == 0 { n1 } else { n2 };
        if n == 0 {
            continue;
        }
        let target = if mode == 0 {
            space.index(n1 - 1, n2)
        } else {
            space.index(n1, n2 - 1)
        };
        out[target] = v[i] * (n as f64).sqrt();
    }
    out
}

/// First and second moments of `ρ` (normalized by its trace), as a Gaussian
/// state in the same convention as [`GaussianState`].
pub fn moments(rho: &FockDensity) -> GaussianState {
    let space = rho.space();
    let trace = rho.trace();
    let mut d = Vector2::<C64>::zeros();
    let mut ad_a = Matrix2::<C64>::zeros();
    let mut a_a = Matrix2::<C64>::zeros();
    for col in rho.ensemble().column_iter() {
        let v: DVector<C64> = col.clone_owned();
        let lowered = [lower(space, &v, 0), lower(space, &v, 1)];
        for i in 0..2 {
            d[i] += v.dotc(&lowered[i]);
            for j in 0..2 {
                // ⟨a_j† a_i⟩ and ⟨a_i a_j⟩
                ad_a[(i, j)] += lowered[j].dotc(&lowered[i]);
                a_a[(i, j)] += v.dotc(&lower(space, &lowered[j], i));
            }
        }
    }
    let scale = C64::new(1.0 / trace, 0.0);
    d *= scale;
    ad_a *= scale;
    a_a *= scale;
    let two = C64::new(2.0, 0.0);
    let mut n = Matrix2::zeros();
    let mut m = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            n[(i, j)] = two * ad_a[(i, j)] - two * d[i] * d[j].conj();
            m[(i, j)] = two * a_a[(i, j)] - two * d[i] * d[j];
        }
        n[(i, i)] += C64::new(1.0, 0.0);
    }
    GaussianState::from_blocks(d, n, m, rho.labels())
}

/// `⟨ψ|ρ|ψ⟩` for a normalized pure state `ψ` in the same space.
pub fn fidelity_with_pure(rho: &FockDensity, psi: &DVector<C64>) -> f64 {
    let overlaps = psi.adjoint() * rho.ensemble();
    overlaps.iter().map(|z| z.norm_sqr()).sum()
}
