//! Projective Z-basis measurement sampling.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::state::{QuantumState, R};
use crate::error::{Error, Result};

/// Outcome counts of repeated measurements. Bitstrings are in atom order
/// (atom 0 first) with g → '0' and h → '1'; shots that find any atom in |r⟩
/// are counted in `leakage`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotResult {
    pub counts: BTreeMap<String, u64>,
    #[serde(rename = "leakage")]
    pub leakage_count: u64,
}

impl ShotResult {
    pub fn total(&self) -> u64 {
        self.counts.values().sum::<u64>() + self.leakage_count
    }

    pub fn count(&self, bitstring: &str) -> u64 {
        self.counts.get(bitstring).copied().unwrap_or(0)
    }

    /// Fraction of shots with every atom measured 0.
    pub fn zero_frequency(&self, n_atoms: usize) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.count(&"0".repeat(n_atoms)) as f64 / total as f64
    }
}

/// Outcome probabilities aggregated per digital label, plus the leaked mass.
pub fn outcome_distribution(state: &QuantumState) -> (BTreeMap<String, f64>, f64) {
    let mut dist = BTreeMap::new();
    let mut leaked = 0.0;
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        let levels: Vec<usize> = (0..state.n_atoms()).map(|a| state.level_of(idx, a)).collect();
        if levels.contains(&R) {
            leaked += p;
            continue;
        }
        let label: String = levels.iter().map(|&l| if l == 0 { '0' } else { '1' }).collect();
        *dist.entry(label).or_insert(0.0) += p;
    }
    (dist, leaked)
}

/// Draws `shots` measurement outcomes; deterministic for a fixed seed.
pub fn sample(state: &QuantumState, shots: u64, seed: u64) -> Result<ShotResult> {
    sample_with(state, shots, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// Multinomial draw as a chain of conditional binomials over outcomes in
/// label order (leakage last).
pub fn sample_with<G: rand::Rng + ?Sized>(state: &QuantumState, shots: u64, rng: &mut G) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    let (dist, leaked) = outcome_distribution(state);
    let total_p: f64 = dist.values().sum::<f64>() + leaked;
    if !(total_p > 0.0 && total_p.is_finite()) {
        return Err(Error::Domain("state has zero norm".into()));
    }
    let mut remaining = shots;
    let mut mass_left = 1.0;
    let mut result = ShotResult::default();
    for (label, p) in dist {
        if remaining == 0 {
            break;
        }
        let p = p / total_p;
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 1.0 };
        let k = Binomial::new(remaining, q)
            .map_err(|e| Error::Domain(format!("bad outcome probability: {e}")))?
            .sample(rng);
        if k > 0 {
            result.counts.insert(label, k);
        }
        remaining -= k;
        mass_left -= p;
    }
    result.leakage_count = remaining;
    Ok(result)
}
