//! Device models, register geometry, lattice generation and Rydberg-blockade
//! math.
//!
//! Units used throughout: angular frequencies in rad/µs, lengths in µm and
//! times in ns.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular reading of the GHz unit: 1 GHz ≡ 10³ rad/µs.
pub const GHZ_TO_RAD_PER_US: f64 = 1.0e3;

/// C6/ħ of the Chadoq2 device, as quoted in GHz·µm⁶.
pub const CHADOQ2_C6_GHZ_UM6: f64 = 5008.0;

/// Amplitude used for the Rydberg 2π pulse of a CX by default, in rad/µs.
pub const DEFAULT_TWO_PI_AMPLITUDE: f64 = 5.42;

/// Conservative blockade radius used when deriving the 2π amplitude, in µm.
pub const DEFAULT_SAFETY_RADIUS: f64 = 10.0;

/// Default upper bound on the size of generated lattices.
pub const DEFAULT_LATTICE_CAP: usize = 10_000;

/// How a coefficient quoted in GHz·µm⁶ is turned into rad·µs⁻¹·µm⁶.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C6Convention {
    /// 1 GHz ≡ 10³ rad/µs.
    #[default]
    Angular,
    /// 1 GHz ≡ 2π·10³ rad/µs.
    Cyclic,
}

impl C6Convention {
    pub fn ghz_factor(self) -> f64 {
        match self {
            C6Convention::Angular => GHZ_TO_RAD_PER_US,
            C6Convention::Cyclic => 2.0 * std::f64::consts::PI * GHZ_TO_RAD_PER_US,
        }
    }
}

/// Physical constants and channel limits of a neutral-atom device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub name: String,
    /// Maximum Rabi frequency of the local channels [rad/µs].
    pub omega_max_local: f64,
    /// Maximum |detuning| [rad/µs].
    pub detuning_max: f64,
    /// Minimum idle time before a local channel may address a new atom [ns].
    pub retarget_min_ns: u64,
    /// Interaction coefficient C6/ħ [rad·µs⁻¹·µm⁶].
    pub c6_over_hbar: f64,
    pub max_atoms: usize,
    /// [µm]
    pub min_pair_distance: f64,
    /// [µm]
    pub max_radius_from_origin: f64,
    /// 2 for planar devices, 3 otherwise.
    pub dimensions_allowed: u8,
    /// [ns]
    pub clock_period_ns: u64,
}

impl Device {
    /// The Chadoq2 preset with the angular reading of its C6 coefficient.
    pub fn chadoq2() -> Self {
        Self::chadoq2_with(C6Convention::Angular)
    }

    pub fn chadoq2_with(convention: C6Convention) -> Self {
        Device {
            name: "Chadoq2".to_string(),
            omega_max_local: 62.83,
            detuning_max: 125.7,
            retarget_min_ns: 220,
            c6_over_hbar: CHADOQ2_C6_GHZ_UM6 * convention.ghz_factor(),
            max_atoms: 100,
            min_pair_distance: 4.0,
            max_radius_from_origin: 50.0,
            dimensions_allowed: 2,
            clock_period_ns: 1,
        }
    }

    /// Looks up a preset by name (case-insensitive).
    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "chadoq2" => Ok(Self::chadoq2()),
            _ => Err(Error::Domain(format!("unknown device preset '{name}'"))),
        }
    }

    /// Checks that every physical quantity is strictly positive.
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("omega_max_local", self.omega_max_local),
            ("detuning_max", self.detuning_max),
            ("c6_over_hbar", self.c6_over_hbar),
            ("min_pair_distance", self.min_pair_distance),
            ("max_radius_from_origin", self.max_radius_from_origin),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!("device {field} must be positive, got {value}")));
            }
        }
        if self.retarget_min_ns == 0 || self.clock_period_ns == 0 || self.max_atoms == 0 {
            return Err(Error::Domain("device integer limits must be positive".into()));
        }
        if !(self.dimensions_allowed == 2 || self.dimensions_allowed == 3) {
            return Err(Error::Domain(format!(
                "dimensions_allowed must be 2 or 3, got {}",
                self.dimensions_allowed
            )));
        }
        Ok(())
    }
}

/// A named atom position [µm].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    pub pos: [f64; 3],
}

impl Atom {
    pub fn new(name: impl Into<String>, pos: [f64; 3]) -> Self {
        Atom { name: name.into(), pos }
    }
}

/// Ordered set of uniquely named atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegisterRepr")]
pub struct Register {
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RegisterRepr {
    atoms: Vec<Atom>,
}

impl TryFrom<RegisterRepr> for Register {
    type Error = Error;

    fn try_from(repr: RegisterRepr) -> Result<Self> {
        Register::new(repr.atoms)
    }
}

impl Register {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let mut seen = HashSet::new();
        for atom in &atoms {
            if !seen.insert(atom.name.as_str()) {
                return Err(Error::Data(format!("duplicate atom name '{}'", atom.name)));
            }
            if atom.pos.iter().any(|c| !c.is_finite()) {
                return Err(Error::Data(format!("atom '{}' has a non-finite coordinate", atom.name)));
            }
        }
        Ok(Register { atoms })
    }

    /// Builds a register from planar coordinates, naming atoms `q0, q1, ...`.
    pub fn from_planar(coords: &[[f64; 2]]) -> Result<Self> {
        Self::new(
            coords
                .iter()
                .enumerate()
                .map(|(i, &[x, y])| Atom::new(format!("q{i}"), [x, y, 0.0]))
                .collect(),
        )
    }

    /// The three-atom triangle used for the QKE experiment:
    /// q0 = (0, 0), q1 = (4, 0), q2 = (2, 4).
    pub fn triangle() -> Self {
        Self::from_planar(&[[0.0, 0.0], [4.0, 0.0], [2.0, 4.0]]).expect("static register")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(&self.atoms[i].pos, &self.atoms[j].pos)
    }

    /// Pairwise distance matrix.
    pub fn distances(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| (0..self.len()).map(|j| self.distance(i, j)).collect()).collect()
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A single violated placement constraint.
#[derive(Clone, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MaxAtoms { count: usize, max: usize },
    MinPairDistance { a: String, b: String, distance: f64, min: f64 },
    MaxRadius { atom: String, radius: f64, max: f64 },
    NonPlanar { atom: String, z: f64 },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::MaxAtoms { .. } => "max_atoms",
            Violation::MinPairDistance { .. } => "min_pair_distance",
            Violation::MaxRadius { .. } => "max_radius_from_origin",
            Violation::NonPlanar { .. } => "planar",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MaxAtoms { count, max } => write!(f, "max_atoms: {count} atoms > {max}"),
            Violation::MinPairDistance { a, b, distance, min } => {
                write!(f, "min_pair_distance: |{a}-{b}| = {distance:.4} µm < {min} µm")
            }
            Violation::MaxRadius { atom, radius, max } => {
                write!(f, "max_radius_from_origin: |{atom}| = {radius:.4} µm > {max} µm")
            }
            Violation::NonPlanar { atom, z } => write!(f, "planar: atom {atom} has z = {z}"),
        }
    }
}

/// Every constraint the register violates on a device; empty means placeable.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let lines: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", lines.join("; "))
    }
}

/// Checks a register against the placement limits of a device.
///
/// Violations are sorted and pairs are named in lexicographic order, so the
/// report does not depend on the order of the atoms.
pub fn validate_register(register: &Register, device: &Device) -> ValidationReport {
    let atoms = register.atoms();
    let mut violations = Vec::new();

    if atoms.len() > device.max_atoms {
        violations.push(Violation::MaxAtoms { count: atoms.len(), max: device.max_atoms });
    }
    for atom in atoms {
        let radius = distance(&atom.pos, &[0.0; 3]);
        if radius > device.max_radius_from_origin {
            violations.push(Violation::MaxRadius {
                atom: atom.name.clone(),
                radius,
                max: device.max_radius_from_origin,
            });
        }
        if device.dimensions_allowed == 2 && atom.pos[2] != 0.0 {
            violations.push(Violation::NonPlanar { atom: atom.name.clone(), z: atom.pos[2] });
        }
    }
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let d = distance(&atoms[i].pos, &atoms[j].pos);
            if d < device.min_pair_distance {
                let (a, b) = if atoms[i].name <= atoms[j].name { (i, j) } else { (j, i) };
                violations.push(Violation::MinPairDistance {
                    a: atoms[a].name.clone(),
                    b: atoms[b].name.clone(),
                    distance: d,
                    min: device.min_pair_distance,
                });
            }
        }
    }
    violations.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ValidationReport { violations }
}

/// Rydberg blockade radius R_b = (C6/(ħ Ω))^(1/6) in µm.
pub fn blockade_radius(omega_max: f64, device: &Device) -> Result<f64> {
    if !(omega_max.is_finite() && omega_max > 0.0) {
        return Err(Error::Domain(format!("Rabi frequency must be positive, got {omega_max}")));
    }
    Ok((device.c6_over_hbar / omega_max).powf(1.0 / 6.0))
}

/// Largest Rabi frequency whose blockade radius is `radius`: C6/(ħ R⁶).
pub fn max_rabi_for_radius(radius: f64, device: &Device) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    Ok(device.c6_over_hbar / radius.powi(6))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    /// Simple cubic arrangement where each interior atom has 6 neighbours at d.
    FaceCenters6,
    /// Simple cubic arrangement where each interior atom has 26 neighbours
    /// at d, d√2 and d√3.
    Cube26,
    /// The planar three-atom triangle, scaled by d/4.
    Triangle3,
}

impl LatticeKind {
    /// Radius that captures exactly the pattern's neighbour shell.
    pub fn neighbor_radius(self, spacing: f64) -> f64 {
        match self {
            LatticeKind::FaceCenters6 => spacing,
            LatticeKind::Cube26 => spacing * 3f64.sqrt(),
            LatticeKind::Triangle3 => spacing * 1.25f64.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePattern {
    pub kind: LatticeKind,
    /// Spacing d [µm].
    pub spacing: f64,
    /// Atom count along x, y, z. Ignored by `Triangle3`.
    pub extent: [usize; 3],
}

impl LatticePattern {
    pub fn new(kind: LatticeKind, spacing: f64, extent: [usize; 3]) -> Self {
        LatticePattern { kind, spacing, extent }
    }

    pub fn generate(&self) -> Result<Register> {
        generate_lattice(self, DEFAULT_LATTICE_CAP)
    }

    /// Whether the atom at grid index `idx` has its full neighbour shell
    /// inside the extent.
    pub fn is_interior(&self, idx: [usize; 3]) -> bool {
        match self.kind {
            LatticeKind::Triangle3 => false,
            _ => idx.iter().zip(&self.extent).all(|(&i, &n)| i >= 1 && i + 1 < n),
        }
    }

    /// Grid index of the i-th generated atom.
    pub fn grid_index(&self, i: usize) -> [usize; 3] {
        let [nx, ny, _] = self.extent;
        [i % nx, (i / nx) % ny, i / (nx * ny)]
    }
}

/// Generates the register of a lattice pattern, failing if it would contain
/// more than `cap` atoms. Atoms are ordered x-fastest.
pub fn generate_lattice(pattern: &LatticePattern, cap: usize) -> Result<Register> {
    let d = pattern.spacing;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Domain(format!("lattice spacing must be positive, got {d}")));
    }
    if pattern.kind == LatticeKind::Triangle3 {
        let s = d / 4.0;
        return Register::from_planar(&[[0.0, 0.0], [4.0 * s, 0.0], [2.0 * s, 4.0 * s]]);
    }
    if pattern.extent.iter().any(|&n| n == 0) {
        return Err(Error::Domain("lattice extent must be at least 1 per axis".into()));
    }
    let count = pattern
        .extent
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .filter(|&c| c <= cap)
        .ok_or_else(|| Error::Size(format!("lattice extent {:?} exceeds {cap} atoms", pattern.extent)))?;

    let atoms = (0..count)
        .map(|i| {
            let [ix, iy, iz] = pattern.grid_index(i);
            Atom::new(format!("q{i}"), [ix as f64 * d, iy as f64 * d, iz as f64 * d])
        })
        .collect();
    Register::new(atoms)
}

/// Adjacency lists of the graph with an edge between every pair of distinct
/// atoms at distance ≤ `interaction_radius`.
pub fn connectivity_graph(register: &Register, interaction_radius: f64) -> Result<Vec<Vec<usize>>> {
    if !(interaction_radius > 0.0) {
        return Err(Error::Domain(format!(
            "interaction radius must be positive, got {interaction_radius}"
        )));
    }
    let n = register.len();
    Ok((0..n)
        .map(|i| (0..n).filter(|&j| j != i && register.distance(i, j) <= interaction_radius).collect())
        .collect())
}
