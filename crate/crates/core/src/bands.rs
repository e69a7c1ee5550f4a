//! Energy bands of the driven chain.
//!
//! Two measures are provided. [`band_partition`] clusters a sorted spectrum by
//! large gaps and [`band_merge_fraction`] compares the cluster count with and
//! without the drive. [`band_overlap_fraction`] instead labels each eigenstate
//! by its spin projection on the drive axis: with a strong drive the spectrum
//! is a ladder of `L + 1` such bands spaced by Ω, and the measure reports how
//! much of the spectrum falls inside the energy range of a foreign band.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_rotating, diagonal_energies, CouplingMatrix};
use crate::numeric::median;
use crate::spectrum::{diagonalize, eigenvalues, Spectrum};
use crate::state::{ChainSpec, C64};

pub const DEFAULT_GAP_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandPartition {
    ranges: Vec<Range<usize>>,
    threshold: f64,
}

impl BandPartition {
    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.ranges.iter().map(|r| r.len()).collect()
    }
}

/// Splits sorted `values` wherever a gap exceeds `gap_factor` times the median
/// gap. Gaps below `1e-9` of the spectral width never split, so a spectrum of
/// exact degeneracies stays in one band.
pub fn band_partition(values: &[f64], gap_factor: f64) -> Result<BandPartition> {
    if values.len() < 2 {
        return Err(Error::arg("band partition needs at least two levels"));
    }
    if !(gap_factor > 1.0) {
        return Err(Error::arg(format!(
            "gap factor must exceed 1, got {gap_factor}"
        )));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::arg("levels must be sorted ascending"));
    }
    let gaps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let width = values[values.len() - 1] - values[0];
    let threshold = (gap_factor * median(&gaps)).max(1e-9 * width);
    let mut ranges = Vec::new();
    let mut start = 0;
    for (i, g) in gaps.iter().enumerate() {
        if *g > threshold {
            ranges.push(start..i + 1);
            start = i + 1;
        }
    }
    ranges.push(start..values.len());
    Ok(BandPartition { ranges, threshold })
}

/// `1 - bands(Ω) / bands(0)` clamped to `[0, 1]`, with bands from gap
/// clustering of the rotating-frame spectrum.
pub fn band_merge_fraction(spec: &ChainSpec, cm: &CouplingMatrix, gap_factor: f64) -> Result<f64> {
    let mut bare = diagonal_energies(spec, cm)?;
    bare.sort_by(f64::total_cmp);
    let unperturbed = band_partition(&bare, gap_factor)?;
    if spec.rabi() == 0.0 {
        return Ok(0.0);
    }
    let dressed = band_partition(&eigenvalues(&build_rotating(spec, cm)?)?, gap_factor)?;
    let f = 1.0 - dressed.len() as f64 / unperturbed.len() as f64;
    Ok(f.clamp(0.0, 1.0))
}

/// Expectation of the total spin along the drive axis.
///
/// The drive term is `Ω (sin φ I^y − cos φ I^x)`, so the axis is
/// `(−cos φ, sin φ, 0)`.
pub fn drive_projection(spec: &ChainSpec, v: &[C64]) -> Result<f64> {
    if v.len() != spec.dim() {
        return Err(Error::arg(format!(
            "vector length {} does not match dimension {}",
            v.len(),
            spec.dim()
        )));
    }
    let (s, c) = spec.phase().sin_cos();
    let mut total = 0.0;
    for k in 0..spec.qubits() {
        let bit = 1usize << k;
        for x in (0..v.len()).filter(|x| x & bit == 0) {
            // <I^x> = Re z, <I^y> = Im z for the up/down pair
            let z = v[x].conj() * v[x | bit];
            total += s * z.im - c * z.re;
        }
    }
    Ok(total)
}

/// Fraction of eigenstates whose energy lies inside the energy range of a
/// drive-ladder band other than their own. Zero without a drive.
pub fn band_overlap_fraction(spec: &ChainSpec, cm: &CouplingMatrix) -> Result<f64> {
    if spec.rabi() == 0.0 {
        return Ok(0.0);
    }
    band_overlap_from_spectrum(spec, &diagonalize(&build_rotating(spec, cm)?)?)
}

/// [`band_overlap_fraction`] for an already diagonalized rotating Hamiltonian.
pub fn band_overlap_from_spectrum(spec: &ChainSpec, sp: &Spectrum) -> Result<f64> {
    if spec.rabi() == 0.0 {
        return Ok(0.0);
    }
    if sp.dim() != spec.dim() {
        return Err(Error::arg("spectrum does not match the chain dimension"));
    }
    let l = spec.qubits();
    let mut label = Vec::with_capacity(sp.dim());
    let mut lo = vec![f64::INFINITY; l + 1];
    let mut hi = vec![f64::NEG_INFINITY; l + 1];
    for (i, &e) in sp.values().iter().enumerate() {
        let m = drive_projection(spec, sp.vector(i))?;
        let b = (m + 0.5 * l as f64).round().clamp(0.0, l as f64) as usize;
        lo[b] = lo[b].min(e);
        hi[b] = hi[b].max(e);
        label.push(b);
    }
    let inside = sp
        .values()
        .iter()
        .zip(&label)
        .filter(|(e, b)| (0..=l).any(|o| o != **b && lo[o] <= **e && **e <= hi[o]))
        .count();
    Ok(inside as f64 / sp.dim() as f64)
}
