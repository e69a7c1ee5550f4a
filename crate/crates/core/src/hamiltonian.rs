//! Rotating-frame and lab-frame Hamiltonians of the gradient-field Ising chain.
//!
//! Lab frame, with rectangular pulses `p`:
//!
//! ```text
//! ℋ(t) = -Σ_k (ω_k I^z_k + 2 Σ_{n>k} J_kn I^z_k I^z_n)
//!        - ½ Σ_p Θ_p(t) Ω_p Σ_k (e^{-iν_p t - iφ_p} I^-_k + e^{iν_p t + iφ_p} I^+_k)
//! ```
//!
//! Rotating frame of a single pulse (`ω_k = a k`, `δ_k = ω_k - ν`):
//!
//! ```text
//! H = Σ_k [-δ_k I^z_k + Ω (sin φ I^y_k - cos φ I^x_k)] - 2 Σ_{n>k} J_kn I^z_k I^z_n
//! ```
//!
//! which is `Σ_k [-δ_k I^z_k + Ω I^y_k] - ...` at the standard phase φ = π/2.

use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{spin_of, ChainSpec, HermitianMatrix, C64, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    /// `J_{k,k+1} = J`, all other pairs zero.
    NnConstant,
    /// Independent random `J_{k,k+1}`.
    NnRandom,
    /// Independent random `J_{k,n}` for every pair.
    AllRandom,
}

impl CouplingKind {
    pub fn is_random(self) -> bool {
        !matches!(self, CouplingKind::NnConstant)
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn-constant" => Ok(CouplingKind::NnConstant),
            "nn-random" => Ok(CouplingKind::NnRandom),
            "all-random" => Ok(CouplingKind::AllRandom),
            other => Err(Error::arg(format!(
                "unknown coupling kind `{other}` (expected nn-constant, nn-random or all-random)"
            ))),
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingKind::NnConstant => "nn-constant",
            CouplingKind::NnRandom => "nn-random",
            CouplingKind::AllRandom => "all-random",
        })
    }
}

/// Distribution of random couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingDistribution {
    /// Uniform on `[-J, J]`.
    #[default]
    Symmetric,
    /// Uniform on `[0, J]`.
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingSpec {
    kind: CouplingKind,
    scale: f64,
    seed: Option<u64>,
    distribution: CouplingDistribution,
}

impl CouplingSpec {
    /// A seed is required for the random kinds and rejected for `nn-constant`.
    pub fn new(kind: CouplingKind, scale: f64, seed: Option<u64>) -> Result<Self> {
        if !scale.is_finite() || scale < 0.0 {
            return Err(Error::arg(format!(
                "coupling scale must be finite and >= 0, got {scale}"
            )));
        }
        match (kind.is_random(), seed) {
            (true, None) => Err(Error::arg(format!("coupling kind {kind} requires a seed"))),
            (false, Some(_)) => Err(Error::arg(format!("coupling kind {kind} takes no seed"))),
            _ => Ok(Self {
                kind,
                scale,
                seed,
                distribution: CouplingDistribution::Symmetric,
            }),
        }
    }

    pub fn constant(scale: f64) -> Result<Self> {
        Self::new(CouplingKind::NnConstant, scale, None)
    }

    pub fn with_distribution(mut self, distribution: CouplingDistribution) -> Self {
        self.distribution = distribution;
        self
    }

    /// Same kind and distribution with a different scale and seed. The seed is
    /// dropped for deterministic kinds.
    pub fn with_scale_and_seed(&self, scale: f64, seed: u64) -> Result<Self> {
        let seed = self.kind.is_random().then_some(seed);
        Ok(Self::new(self.kind, scale, seed)?.with_distribution(self.distribution))
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn distribution(&self) -> CouplingDistribution {
        self.distribution
    }
}

/// Realized `J_{k,n}` for `n > k`, packed row by row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingMatrix {
    qubits: usize,
    values: Vec<f64>,
}

impl CouplingMatrix {
    pub fn zeros(qubits: usize) -> Self {
        Self {
            qubits,
            values: vec![0.0; qubits * qubits.saturating_sub(1) / 2],
        }
    }

    fn offset(&self, k: usize, n: usize) -> usize {
        debug_assert!(k < n && n < self.qubits);
        // rows 0..k hold (L-1) + (L-2) + ... + (L-k) entries
        k * (2 * self.qubits - k - 1) / 2 + (n - k - 1)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    /// `J_{k,n}`, symmetric in its arguments; zero on the diagonal.
    pub fn get(&self, k: usize, n: usize) -> f64 {
        match k.cmp(&n) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.values[self.offset(k, n)],
            std::cmp::Ordering::Greater => self.values[self.offset(n, k)],
        }
    }

    pub fn set(&mut self, k: usize, n: usize, value: f64) {
        let (lo, hi) = if k < n { (k, n) } else { (n, k) };
        assert!(lo != hi, "diagonal couplings are not stored");
        let i = self.offset(lo, hi);
        self.values[i] = value;
    }

    /// Nonzero pairs `(k, n, J_kn)` with `k < n`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.qubits)
            .flat_map(move |k| ((k + 1)..self.qubits).map(move |n| (k, n, self.get(k, n))))
            .filter(|&(_, _, j)| j != 0.0)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|j| j * j).sum()
    }
}

/// Draws the coupling matrix. Random kinds are a pure function of
/// `(kind, scale, distribution, seed, qubits)`.
pub fn sample_couplings(cs: &CouplingSpec, qubits: usize) -> Result<CouplingMatrix> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(Error::arg(format!(
            "qubit count {qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    let mut cm = CouplingMatrix::zeros(qubits);
    let j = cs.scale;
    match cs.kind {
        CouplingKind::NnConstant => {
            for k in 0..qubits.saturating_sub(1) {
                cm.set(k, k + 1, j);
            }
        }
        CouplingKind::NnRandom | CouplingKind::AllRandom => {
            let seed = cs
                .seed
                .ok_or_else(|| Error::arg("random coupling kind without seed"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lo = match cs.distribution {
                CouplingDistribution::Symmetric => -j,
                CouplingDistribution::Positive => 0.0,
            };
            let dist = Uniform::new_inclusive(lo, j)
                .map_err(|e| Error::arg(format!("coupling distribution: {e}")))?;
            for k in 0..qubits {
                for n in (k + 1)..qubits {
                    if cs.kind == CouplingKind::NnRandom && n != k + 1 {
                        continue;
                    }
                    cm.set(k, n, dist.sample(&mut rng));
                }
            }
        }
    }
    Ok(cm)
}

/// Detuning `δ_k = a k - ν`.
pub fn site_detuning(spec: &ChainSpec, k: usize) -> Result<f64> {
    if k >= spec.qubits() {
        return Err(Error::arg(format!(
            "site {k} out of range for {} qubits",
            spec.qubits()
        )));
    }
    Ok(spec.site_frequency(k) - spec.nu())
}

fn check_couplings(spec: &ChainSpec, cm: &CouplingMatrix) -> Result<()> {
    if cm.qubits() != spec.qubits() {
        return Err(Error::arg(format!(
            "coupling matrix has {} sites, chain has {}",
            cm.qubits(),
            spec.qubits()
        )));
    }
    Ok(())
}

fn ising_energy(cm: &CouplingMatrix, n: usize) -> f64 {
    cm.pairs()
        .map(|(k, q, j)| -2.0 * j * spin_of(n, k) * spin_of(n, q))
        .sum()
}

fn diagonal_with(fields: &[f64], cm: &CouplingMatrix, n: usize) -> f64 {
    let zeeman: f64 = fields
        .iter()
        .enumerate()
        .map(|(k, f)| -f * spin_of(n, k))
        .sum();
    zeeman + ising_energy(cm, n)
}

/// Rotating-frame energy of basis state `n` with the drive switched off:
/// `-Σ_k δ_k m_k - 2 Σ_{q>k} J_kq m_k m_q`.
pub fn diagonal_energy(spec: &ChainSpec, cm: &CouplingMatrix, n: usize) -> Result<f64> {
    check_couplings(spec, cm)?;
    if n >= spec.dim() {
        return Err(Error::arg(format!("basis index {n} out of range")));
    }
    let detunings: Vec<f64> = (0..spec.qubits())
        .map(|k| spec.site_frequency(k) - spec.nu())
        .collect();
    Ok(diagonal_with(&detunings, cm, n))
}

/// All rotating-frame diagonal energies, indexed by basis state.
pub fn diagonal_energies(spec: &ChainSpec, cm: &CouplingMatrix) -> Result<Vec<f64>> {
    check_couplings(spec, cm)?;
    let detunings: Vec<f64> = (0..spec.qubits())
        .map(|k| spec.site_frequency(k) - spec.nu())
        .collect();
    Ok((0..spec.dim())
        .map(|n| diagonal_with(&detunings, cm, n))
        .collect())
}

fn fill_transverse(entries: &mut [C64], dim: usize, qubits: usize, coupling: C64) {
    // ⟨up|T|down⟩ on every site, upper triangle only (up has the smaller index)
    for x in 0..dim {
        for k in 0..qubits {
            let mask = 1 << k;
            if x & mask == 0 {
                entries[x * dim + (x | mask)] += coupling;
            }
        }
    }
}

/// Stationary single-pulse Hamiltonian in the frame rotating at `ν`.
pub fn build_rotating(spec: &ChainSpec, cm: &CouplingMatrix) -> Result<HermitianMatrix> {
    check_couplings(spec, cm)?;
    let dim = spec.dim();
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for (n, e) in diagonal_energies(spec, cm)?.into_iter().enumerate() {
        entries[n * dim + n] = C64::new(e, 0.0);
    }
    if spec.rabi() != 0.0 {
        // Ω(sin φ I^y - cos φ I^x) has ⟨up|·|down⟩ = -(Ω/2) e^{iφ}
        let coupling = -0.5 * spec.rabi() * C64::from_polar(1.0, spec.phase());
        fill_transverse(&mut entries, dim, spec.qubits(), coupling);
    }
    Ok(HermitianMatrix::from_upper(dim, entries))
}

/// `tr(H²)` of [`build_rotating`] in closed form:
/// `N [¼ Σ_k δ_k² + (L/4) Ω² + ¼ Σ_{n>k} J_kn²]`.
pub fn rotating_trace_of_square(spec: &ChainSpec, cm: &CouplingMatrix) -> Result<f64> {
    check_couplings(spec, cm)?;
    let detuning_sq: f64 = (0..spec.qubits())
        .map(|k| (spec.site_frequency(k) - spec.nu()).powi(2))
        .sum();
    let per_state = 0.25 * detuning_sq
        + 0.25 * spec.qubits() as f64 * spec.rabi().powi(2)
        + 0.25 * cm.sum_of_squares();
    Ok(spec.dim() as f64 * per_state)
}

/// One rectangular pulse, active on `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSpec {
    pub rabi: f64,
    pub frequency: f64,
    pub phase: f64,
    pub duration: f64,
    pub start: f64,
}

impl PulseSpec {
    pub fn new(rabi: f64, frequency: f64, phase: f64, duration: f64, start: f64) -> Result<Self> {
        for (name, v) in [
            ("rabi", rabi),
            ("frequency", frequency),
            ("phase", phase),
            ("duration", duration),
            ("start", start),
        ] {
            if !v.is_finite() {
                return Err(Error::arg(format!("pulse {name} must be finite, got {v}")));
            }
        }
        if rabi <= 0.0 {
            return Err(Error::arg(format!(
                "pulse Rabi frequency must be > 0, got {rabi}"
            )));
        }
        if duration <= 0.0 {
            return Err(Error::arg(format!(
                "pulse duration must be > 0, got {duration}"
            )));
        }
        Ok(Self {
            rabi,
            frequency,
            phase,
            duration,
            start,
        })
    }

    /// The chain's own drive (`Ω`, `ν`, `φ`) switched on at `start`.
    pub fn from_chain(spec: &ChainSpec, duration: f64, start: f64) -> Result<Self> {
        Self::new(spec.rabi(), spec.nu(), spec.phase(), duration, start)
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// `Θ_p(t)`.
    pub fn is_active(&self, t: f64) -> bool {
        t >= self.start && t < self.end()
    }
}

/// Pulses must be time-ordered and non-overlapping.
pub fn validate_schedule(pulses: &[PulseSpec]) -> Result<()> {
    for w in pulses.windows(2) {
        if w[1].start < w[0].end() {
            return Err(Error::arg(format!(
                "pulses overlap or are out of order: [{}, {}) then start {}",
                w[0].start,
                w[0].end(),
                w[1].start
            )));
        }
    }
    Ok(())
}

/// Lab-frame Hamiltonian at time `t`.
pub fn build_lab(
    spec: &ChainSpec,
    cm: &CouplingMatrix,
    pulses: &[PulseSpec],
    t: f64,
) -> Result<HermitianMatrix> {
    check_couplings(spec, cm)?;
    validate_schedule(pulses)?;
    let dim = spec.dim();
    let larmor: Vec<f64> = (0..spec.qubits()).map(|k| spec.site_frequency(k)).collect();
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for n in 0..dim {
        entries[n * dim + n] = C64::new(diagonal_with(&larmor, cm, n), 0.0);
    }
    for p in pulses.iter().filter(|p| p.is_active(t)) {
        // ⟨up|I^+|down⟩ = 1 carries -(Ω/2) e^{i(νt + φ)}; the I^- part is its mirror
        let coupling = -0.5 * p.rabi * C64::from_polar(1.0, p.frequency * t + p.phase);
        fill_transverse(&mut entries, dim, spec.qubits(), coupling);
    }
    Ok(HermitianMatrix::from_upper(dim, entries))
}

/// Delocalization border `J_cr ≈ 4a²/Ω`, independent of the chain length.
pub fn predicted_border(spec: &ChainSpec) -> Result<f64> {
    spec.require_drive()?;
    Ok(4.0 * spec.gradient().powi(2) / spec.rabi())
}
