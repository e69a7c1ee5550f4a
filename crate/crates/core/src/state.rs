//! Spin-basis encoding, state vectors and dense Hermitian matrices.
//!
//! Basis index `n` runs over `0..2^L`. Bit `k` of `n` (qubit 0 is the least
//! significant bit) is 0 when spin `k` points up (`m_k = +1/2`) and 1 when it
//! points down (`m_k = -1/2`). With this convention the all-up state has index
//! 0 and `I^z` is diagonal.
//!
//! Single-spin operators are `I^{x,y,z} = σ^{x,y,z}/2` with
//! `σ^y = [[0, -i], [i, 0]]` in the (up, down) ordering, and
//! `I^± = I^x ± i I^y`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported chain length.
pub const MAX_QUBITS: usize = 24;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Static chain and drive parameters. Frequencies are angular, `ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainSpec {
    qubits: usize,
    gradient: f64,
    rabi: f64,
    nu: f64,
    phase: f64,
}

impl ChainSpec {
    /// `rabi = 0` is accepted so that the unperturbed (diagonal) problem can be
    /// built from the same spec; operations that need a drive check for it.
    pub fn new(qubits: usize, gradient: f64, rabi: f64, nu: f64, phase: f64) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::arg(format!(
                "qubit count {qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        for (name, v) in [
            ("gradient", gradient),
            ("rabi", rabi),
            ("nu", nu),
            ("phase", phase),
        ] {
            if !v.is_finite() {
                return Err(Error::arg(format!("{name} must be finite, got {v}")));
            }
        }
        if gradient < 0.0 {
            return Err(Error::arg(format!("gradient must be >= 0, got {gradient}")));
        }
        if rabi < 0.0 {
            return Err(Error::arg(format!(
                "Rabi frequency must be >= 0, got {rabi}"
            )));
        }
        Ok(Self {
            qubits,
            gradient,
            rabi,
            nu,
            phase,
        })
    }

    /// Drive tuned to the middle of the frequency ladder, `ν = a(L-1)/2`,
    /// with pulse phase π/2.
    pub fn centered(qubits: usize, gradient: f64, rabi: f64) -> Result<Self> {
        let nu = centered_drive(qubits, gradient);
        Self::new(qubits, gradient, rabi, nu, FRAC_PI_2)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn gradient(&self) -> f64 {
        self.gradient
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Larmor frequency `ω_k = a k`.
    pub fn site_frequency(&self, k: usize) -> f64 {
        self.gradient * k as f64
    }

    pub fn with_rabi(&self, rabi: f64) -> Result<Self> {
        Self::new(self.qubits, self.gradient, rabi, self.nu, self.phase)
    }

    pub(crate) fn require_drive(&self) -> Result<()> {
        if self.rabi > 0.0 {
            Ok(())
        } else {
            Err(Error::arg("operation requires a Rabi frequency > 0"))
        }
    }
}

/// `ν = a(L-1)/2`, the centre of the Larmor ladder.
pub fn centered_drive(qubits: usize, gradient: f64) -> f64 {
    gradient * (qubits.saturating_sub(1)) as f64 / 2.0
}

/// Spin projection of site `k` in basis state `n`, without range checks.
#[inline]
pub fn spin_of(n: usize, k: usize) -> f64 {
    if (n >> k) & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Total `M = Σ_k m_k(n)`.
#[inline]
pub fn total_spin(n: usize, qubits: usize) -> f64 {
    let down = (n & ((1 << qubits) - 1)).count_ones() as f64;
    0.5 * (qubits as f64 - 2.0 * down)
}

/// Checked spin projection `m_k(n)` for a chain of `qubits` sites.
pub fn basis_spin(qubits: usize, n: usize, k: usize) -> Result<f64> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(Error::arg(format!(
            "qubit count {qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    if n >= 1 << qubits {
        return Err(Error::arg(format!(
            "basis index {n} out of range for {qubits} qubits"
        )));
    }
    if k >= qubits {
        return Err(Error::arg(format!(
            "site {k} out of range for {qubits} qubits"
        )));
    }
    Ok(spin_of(n, k))
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::arg(format!(
            "dimension {dim} is not 2^L with L >= 1"
        )));
    }
    let l = dim.trailing_zeros() as usize;
    if l > MAX_QUBITS {
        return Err(Error::arg(format!(
            "dimension 2^{l} exceeds limit 2^{MAX_QUBITS}"
        )));
    }
    Ok(l)
}

/// Complex amplitudes over the `2^L` spin basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amps.len())?;
        Ok(Self { amps })
    }

    pub fn basis(qubits: usize, n: usize) -> Result<Self> {
        let dim = 1usize
            .checked_shl(qubits as u32)
            .filter(|_| (1..=MAX_QUBITS).contains(&qubits))
            .ok_or_else(|| Error::arg(format!("qubit count {qubits} outside 1..={MAX_QUBITS}")))?;
        if n >= dim {
            return Err(Error::arg(format!(
                "basis index {n} out of range for {qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// Equal-weight superposition `ψ_n = 1/√N`.
    pub fn uniform(qubits: usize) -> Result<Self> {
        let mut s = Self::basis(qubits, 0)?;
        let a = 1.0 / (s.dim() as f64).sqrt();
        s.amps.iter_mut().for_each(|z| *z = C64::new(a, 0.0));
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::arg("cannot normalize a zero or non-finite vector"));
        }
        self.amps.iter_mut().for_each(|z| *z /= norm);
        Ok(self)
    }

    /// Largest componentwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `Σ_n conj(ψ_n) χ_n`.
pub fn inner_product(psi: &StateVector, chi: &StateVector) -> Result<C64> {
    if psi.dim() != chi.dim() {
        return Err(Error::arg(format!(
            "dimension mismatch: {} vs {}",
            psi.dim(),
            chi.dim()
        )));
    }
    Ok(psi
        .amps
        .iter()
        .zip(&chi.amps)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinOp {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl FromStr for SpinOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(SpinOp::X),
            "y" => Ok(SpinOp::Y),
            "z" => Ok(SpinOp::Z),
            "plus" | "+" => Ok(SpinOp::Plus),
            "minus" | "-" => Ok(SpinOp::Minus),
            other => Err(Error::arg(format!("unknown spin operator `{other}`"))),
        }
    }
}

impl fmt::Display for SpinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpinOp::X => "x",
            SpinOp::Y => "y",
            SpinOp::Z => "z",
            SpinOp::Plus => "plus",
            SpinOp::Minus => "minus",
        })
    }
}

/// Image of `psi` under a single-site operator. The result is not normalized.
pub fn apply_single_spin(op: SpinOp, k: usize, psi: &StateVector) -> Result<StateVector> {
    let qubits = psi.qubits();
    if k >= qubits {
        return Err(Error::arg(format!(
            "site {k} out of range for {qubits} qubits"
        )));
    }
    let mask = 1usize << k;
    let half = C64::new(0.5, 0.0);
    let mut out = vec![ZERO; psi.dim()];
    for (n, &amp) in psi.amps.iter().enumerate() {
        if amp == ZERO {
            continue;
        }
        let up = n & mask == 0;
        let flipped = n ^ mask;
        match op {
            SpinOp::Z => out[n] += amp * spin_of(n, k),
            SpinOp::X => out[flipped] += amp * half,
            // σ^y|up> = i|down>, σ^y|down> = -i|up>
            SpinOp::Y => {
                let factor = if up {
                    C64::new(0.0, 0.5)
                } else {
                    C64::new(0.0, -0.5)
                };
                out[flipped] += amp * factor;
            }
            SpinOp::Plus => {
                if !up {
                    out[flipped] += amp;
                }
            }
            SpinOp::Minus => {
                if up {
                    out[flipped] += amp;
                }
            }
        }
    }
    Ok(StateVector { amps: out })
}

/// Dense complex Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl HermitianMatrix {
    /// Rejects input unless `entries[i][j] == conj(entries[j][i])` exactly.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::arg(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let m = Self { dim, entries };
        for i in 0..dim {
            for j in i..dim {
                if m.get(i, j) != m.get(j, i).conj() {
                    return Err(Error::arg(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate"
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Builders fill the upper triangle and diagonal; the lower triangle is
    /// mirrored so the result is Hermitian by construction.
    pub(crate) fn from_upper(dim: usize, mut entries: Vec<C64>) -> Self {
        for i in 0..dim {
            let d = &mut entries[i * dim + i];
            d.im = 0.0;
            for j in (i + 1)..dim {
                entries[j * dim + i] = entries[i * dim + j].conj();
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// `tr(H²) = Σ_ij |H_ij|²` for Hermitian `H`.
    pub fn trace_of_square(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |H - H†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == ZERO))
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim {
            return Err(Error::arg(format!(
                "dimension mismatch: matrix {} vs state {}",
                self.dim,
                psi.dim()
            )));
        }
        let amps = (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(psi.amplitudes())
                    .map(|(h, a)| h * a)
                    .sum()
            })
            .collect();
        Ok(StateVector { amps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_spin_examples() {
        assert_eq!(basis_spin(3, 0, 0).unwrap(), 0.5);
        assert_eq!(basis_spin(3, 1, 0).unwrap(), -0.5);
        assert_eq!(basis_spin(3, 5, 1).unwrap(), 0.5);
        assert!(basis_spin(3, 8, 0).is_err());
        assert!(basis_spin(3, 0, 3).is_err());
    }

    #[test]
    fn single_spin_examples() {
        let up = StateVector::basis(1, 0).unwrap();
        let z = apply_single_spin(SpinOp::Z, 0, &up).unwrap();
        assert_eq!(z.amplitudes(), &[c(0.5, 0.0), c(0.0, 0.0)]);

        let plus = apply_single_spin(SpinOp::Plus, 0, &up).unwrap();
        assert!(plus.amplitudes().iter().all(|a| *a == ZERO));

        let y = apply_single_spin(SpinOp::Y, 0, &up).unwrap();
        assert_eq!(y.amplitudes(), &[c(0.0, 0.0), c(0.0, 0.5)]);
    }

    #[test]
    fn sigma_y_matches_matrix_oracle() {
        // (σ^y / 2) as an explicit 2x2 matrix in (up, down) order
        let iy = [[c(0.0, 0.0), c(0.0, -0.5)], [c(0.0, 0.5), c(0.0, 0.0)]];
        for col in 0..2 {
            let psi = StateVector::basis(1, col).unwrap();
            let out = apply_single_spin(SpinOp::Y, 0, &psi).unwrap();
            for row in 0..2 {
                assert_eq!(out.amplitudes()[row], iy[row][col]);
            }
        }
    }

    #[test]
    fn unknown_op_tag_rejected() {
        assert!("w".parse::<SpinOp>().is_err());
        assert_eq!("plus".parse::<SpinOp>().unwrap(), SpinOp::Plus);
    }

    #[test]
    fn site_out_of_range() {
        let psi = StateVector::basis(2, 0).unwrap();
        assert!(apply_single_spin(SpinOp::X, 2, &psi).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let uni = StateVector::uniform(2).unwrap();
        assert!((inner_product(&uni, &uni).unwrap() - 1.0).norm() < 1e-15);
        let b0 = StateVector::basis(2, 0).unwrap();
        let b1 = StateVector::basis(2, 1).unwrap();
        assert_eq!(inner_product(&b0, &b1).unwrap(), ZERO);
        assert!((inner_product(&uni, &b0).unwrap() - 0.5).norm() < 1e-15);
        let b3 = StateVector::basis(3, 0).unwrap();
        assert!(inner_product(&b0, &b3).is_err());
    }

    #[test]
    fn z_consistent_with_basis_spin_exhaustive() {
        for l in 1..=4 {
            for n in 0..(1 << l) {
                let psi = StateVector::basis(l, n).unwrap();
                for k in 0..l {
                    let out = apply_single_spin(SpinOp::Z, k, &psi).unwrap();
                    let m = basis_spin(l, n, k).unwrap();
                    let mut expect = vec![ZERO; 1 << l];
                    expect[n] = c(m, 0.0);
                    assert_eq!(out.amplitudes(), &expect[..]);
                }
            }
        }
    }

    #[test]
    fn chain_spec_limits() {
        assert!(ChainSpec::centered(25, 1.0, 1.0).is_err());
        assert!(ChainSpec::centered(0, 1.0, 1.0).is_err());
        assert!(ChainSpec::centered(4, -1.0, 1.0).is_err());
        assert!(ChainSpec::centered(4, 1.0, -1.0).is_err());
        let s = ChainSpec::centered(10, 1.0, 1.0).unwrap();
        assert_eq!(s.nu(), 4.5);
        assert_eq!(s.dim(), 1024);
    }

    #[test]
    fn total_spin_counts() {
        assert_eq!(total_spin(0, 3), 1.5);
        assert_eq!(total_spin(0b111, 3), -1.5);
        assert_eq!(total_spin(0b010, 3), 0.5);
    }

    #[test]
    fn hermitian_constructor_checks_conjugate_symmetry() {
        let ok = vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(2.0, 0.0)];
        assert!(HermitianMatrix::new(2, ok).is_ok());
        let bad = vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(2.0, 0.0)];
        assert!(HermitianMatrix::new(2, bad).is_err());
    }
}
