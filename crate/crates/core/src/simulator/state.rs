use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Level index of the ground state |g⟩ (digital 0).
pub const G: usize = 0;
/// Level index of the hyperfine state |h⟩ (digital 1).
pub const H: usize = 1;
/// Level index of the Rydberg state |r⟩.
pub const R: usize = 2;

/// Amplitude vector over `levels^n_atoms` basis states in lexicographic
/// order with atom 0 as the most significant digit.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    n_atoms: usize,
    levels: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// |g…g⟩ with 2 levels per atom ({g, h}) or 3 ({g, h, r}).
    pub fn ground(n_atoms: usize, levels: usize) -> Result<Self> {
        if !(levels == 2 || levels == 3) {
            return Err(Error::Domain(format!("levels must be 2 or 3, got {levels}")));
        }
        let dim = levels
            .checked_pow(n_atoms as u32)
            .filter(|&d| d <= 1 << 24)
            .ok_or_else(|| Error::Size(format!("{n_atoms} atoms is too many to simulate")))?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n_atoms, levels, amps })
    }

    pub fn from_amplitudes(n_atoms: usize, levels: usize, amps: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::ground(n_atoms, levels)?;
        if amps.len() != state.amps.len() {
            return Err(Error::Size(format!("expected {} amplitudes, got {}", state.amps.len(), amps.len())));
        }
        state.amps = amps;
        Ok(state)
    }

    /// Product state with atom `i` in level `config[i]`.
    pub fn basis(levels: usize, config: &[usize]) -> Result<Self> {
        let mut state = Self::ground(config.len(), levels)?;
        if config.iter().any(|&l| l >= levels) {
            return Err(Error::Domain(format!("level out of range in {config:?}")));
        }
        let idx = config.iter().fold(0, |acc, &l| acc * levels + l);
        state.amps[0] = Complex64::new(0.0, 0.0);
        state.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Stride of atom `atom` in the flat index.
    pub fn stride(&self, atom: usize) -> usize {
        self.levels.pow((self.n_atoms - 1 - atom) as u32)
    }

    /// Level of `atom` in basis state `index`.
    pub fn level_of(&self, index: usize, atom: usize) -> usize {
        (index / self.stride(atom)) % self.levels
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Size("states have different dimensions".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Probability that every atom is measured in |g⟩ (digital 0). Rydberg
    /// population never counts as 0.
    pub fn zero_probability(&self) -> f64 {
        self.amps[0].norm_sqr()
    }

    /// Probability of ending with at least one atom in |r⟩.
    pub fn leakage(&self) -> f64 {
        if self.levels == 2 {
            return 0.0;
        }
        (0..self.dim())
            .filter(|&i| (0..self.n_atoms).any(|a| self.level_of(i, a) == R))
            .map(|i| self.amps[i].norm_sqr())
            .sum()
    }

    /// Projects a 3-level state onto the digital {g, h} subspace (no
    /// renormalization). Two-level states are returned unchanged.
    pub fn digital(&self) -> QuantumState {
        if self.levels == 2 {
            return self.clone();
        }
        let dim = 1usize << self.n_atoms;
        let amps = (0..dim)
            .map(|bits| {
                let idx = (0..self.n_atoms).fold(0, |acc, a| acc * 3 + ((bits >> (self.n_atoms - 1 - a)) & 1));
                self.amps[idx]
            })
            .collect();
        QuantumState { n_atoms: self.n_atoms, levels: 2, amps }
    }

    /// Debug dump: `[re, im]` pairs in basis order.
    pub fn dump(&self) -> Vec<[f64; 2]> {
        self.amps.iter().map(|a| [a.re, a.im]).collect()
    }
}

impl Serialize for QuantumState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.dump().serialize(serializer)
    }
}
