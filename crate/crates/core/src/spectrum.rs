//! Full eigendecomposition of dense Hermitian matrices.
//!
//! Many Hamiltonians here are real symmetric up to a diagonal phase change of
//! basis: with `d_n` unit phases, `A_xy = conj(d_x) H_xy d_y` is real. The
//! rotating-frame drive `Ω I^y` becomes `Ω I^x` this way. When such a gauge
//! exists the real problem is solved instead (roughly 2.5x faster for
//! eigenvectors) and the eigenvectors are mapped back as `v = D u`.

use std::collections::VecDeque;
use std::hash::{DefaultHasher, Hash, Hasher};

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors, EvdError};
use faer::{Mat, Par};

use crate::error::{Error, Result};
use crate::state::{HermitianMatrix, StateVector, C64};

/// Relative tolerance on the imaginary residue of a gauge-transformed entry.
const GAUGE_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    // column-major: vector i occupies vectors[i*dim..(i+1)*dim]
    vectors: Vec<C64>,
    gauge: Option<Vec<C64>>,
}

impl Spectrum {
    /// Assemble a spectrum from explicit eigenpairs (e.g. synthetic ensembles).
    pub fn from_parts(values: Vec<f64>, vectors: Vec<Vec<C64>>) -> Result<Self> {
        let dim = values.len();
        if vectors.len() != dim || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::arg("spectrum needs N vectors of length N"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::arg("spectrum values must be ascending"));
        }
        Ok(Self {
            values,
            vectors: vectors.into_iter().flatten().collect(),
            gauge: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, i: usize) -> &[C64] {
        let n = self.dim();
        &self.vectors[i * n..(i + 1) * n]
    }

    /// Diagonal phases `d_n` used to solve a real problem, if any.
    pub fn gauge(&self) -> Option<&[C64]> {
        self.gauge.as_deref()
    }

    /// Components of eigenvector `i` as real numbers. With a gauge this undoes
    /// the phase change exactly; otherwise the global phase is rotated so the
    /// real part carries maximal weight, which is exact for vectors that are
    /// real up to a global phase.
    pub fn real_components(&self, i: usize) -> Vec<f64> {
        let v = self.vector(i);
        match &self.gauge {
            Some(d) => v.iter().zip(d).map(|(c, g)| (g.conj() * c).re).collect(),
            None => real_form(v),
        }
    }

    /// `max_i ‖H v_i − λ_i v_i‖`.
    pub fn max_residual(&self, h: &HermitianMatrix) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let v = self.vector(i);
                (0..n)
                    .map(|r| {
                        let hv: C64 = h.row(r).iter().zip(v).map(|(a, b)| a * b).sum();
                        (hv - self.values[i] * v[r]).norm_sqr()
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max_ij |⟨v_i|v_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let ip: C64 = self
                    .vector(i)
                    .iter()
                    .zip(self.vector(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }

    /// Coefficients `V† ψ` of a state in the eigenbasis.
    pub fn project(&self, psi: &StateVector) -> Result<Vec<C64>> {
        if psi.dim() != self.dim() {
            return Err(Error::arg(format!(
                "dimension mismatch: spectrum {} vs state {}",
                self.dim(),
                psi.dim()
            )));
        }
        Ok((0..self.dim())
            .map(|i| {
                self.vector(i)
                    .iter()
                    .zip(psi.amplitudes())
                    .map(|(v, a)| v.conj() * a)
                    .sum()
            })
            .collect())
    }

    /// `Σ_i c_i v_i`.
    pub fn combine(&self, coeffs: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, c) in coeffs.iter().enumerate() {
            if *c == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.vector(i)) {
                *o += c * v;
            }
        }
        out
    }
}

fn real_form(v: &[C64]) -> Vec<f64> {
    // rotating by e^{-iθ} with θ = arg(Σ v²)/2 maximizes Σ Re(v)²
    let s: C64 = v.iter().map(|z| z * z).sum();
    let rot = C64::from_polar(1.0, -0.5 * s.arg());
    v.iter().map(|z| (rot * z).re).collect()
}

/// Looks for unit phases `d` making `conj(d_x) H_xy d_y` real for all entries.
/// Phases are fixed along a breadth-first spanning forest of the nonzero
/// pattern, then every entry is verified.
pub fn real_gauge(h: &HermitianMatrix) -> Option<Vec<C64>> {
    let n = h.dim();
    let scale = h.max_abs();
    let mut d: Vec<Option<C64>> = vec![None; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if d[root].is_some() {
            continue;
        }
        d[root] = Some(C64::new(1.0, 0.0));
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            let dx = d[x].expect("queued nodes are assigned");
            for (y, hxy) in h.row(x).iter().enumerate() {
                if y == x || d[y].is_some() || *hxy == C64::new(0.0, 0.0) {
                    continue;
                }
                // makes conj(d_x) H_xy d_y = |H_xy|
                d[y] = Some(dx * hxy.conj() / hxy.norm());
                queue.push_back(y);
            }
        }
    }
    let d: Vec<C64> = d
        .into_iter()
        .map(|p| p.expect("all nodes visited"))
        .collect();
    for x in 0..n {
        for (y, hxy) in h.row(x).iter().enumerate().skip(x + 1) {
            let a = d[x].conj() * hxy * d[y];
            if a.im.abs() > GAUGE_TOL * scale {
                return None;
            }
        }
    }
    Some(d)
}

fn fingerprint(h: &HermitianMatrix) -> String {
    let mut hasher = DefaultHasher::new();
    h.dim().hash(&mut hasher);
    for z in h.entries() {
        z.re.to_bits().hash(&mut hasher);
        z.im.to_bits().hash(&mut hasher);
    }
    format!("dim={} fingerprint={:016x}", h.dim(), hasher.finish())
}

fn no_convergence(h: &HermitianMatrix, e: EvdError) -> Error {
    Error::Numeric(format!(
        "eigensolver did not converge ({e:?}) for matrix {}",
        fingerprint(h)
    ))
}

/// Runs the dense self-adjoint solver sequentially so results are
/// bit-reproducible regardless of thread pools.
fn solve<T: faer::traits::ComplexField>(
    a: &Mat<T>,
    vectors: bool,
    real_part: impl Fn(&T) -> f64,
) -> std::result::Result<(Vec<f64>, Option<Mat<T>>), EvdError> {
    let n = a.nrows();
    let par = Par::Seq;
    let mut s = Diag::<T>::zeros(n);
    let mut u = vectors.then(|| Mat::<T>::zeros(n, n));
    let compute = if vectors {
        ComputeEigenvectors::Yes
    } else {
        ComputeEigenvectors::No
    };
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<T>(
        n,
        compute,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a.as_ref(),
        s.as_mut(),
        u.as_mut().map(|u| u.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )?;
    let values = s.column_vector().iter().map(real_part).collect();
    Ok((values, u))
}

fn gauged_real(h: &HermitianMatrix, d: &[C64]) -> Mat<f64> {
    let n = h.dim();
    Mat::from_fn(n, n, |i, j| (d[i].conj() * h.get(i, j) * d[j]).re)
}

/// Eigenvalues and eigenvectors of `h`.
pub fn diagonalize(h: &HermitianMatrix) -> Result<Spectrum> {
    let n = h.dim();
    if let Some(d) = real_gauge(h) {
        let a = gauged_real(h, &d);
        let (values, u) = solve(&a, true, |x: &f64| *x).map_err(|e| no_convergence(h, e))?;
        let u = u.expect("eigenvectors requested");
        let mut vectors = Vec::with_capacity(n * n);
        for i in 0..n {
            vectors.extend((0..n).map(|r| d[r] * u[(r, i)]));
        }
        Ok(Spectrum {
            values,
            vectors,
            gauge: Some(d),
        })
    } else {
        let a = Mat::<C64>::from_fn(n, n, |i, j| h.get(i, j));
        let (values, u) = solve(&a, true, |x: &C64| x.re).map_err(|e| no_convergence(h, e))?;
        let u = u.expect("eigenvectors requested");
        let mut vectors = Vec::with_capacity(n * n);
        for i in 0..n {
            vectors.extend((0..n).map(|r| u[(r, i)]));
        }
        Ok(Spectrum {
            values,
            vectors,
            gauge: None,
        })
    }
}

/// Ascending eigenvalues only.
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let n = h.dim();
    if let Some(d) = real_gauge(h) {
        solve(&gauged_real(h, &d), false, |x: &f64| *x)
            .map(|(v, _)| v)
            .map_err(|e| no_convergence(h, e))
    } else {
        let a = Mat::<C64>::from_fn(n, n, |i, j| h.get(i, j));
        solve(&a, false, |x: &C64| x.re)
            .map(|(v, _)| v)
            .map_err(|e| no_convergence(h, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{
        build_rotating, diagonal_energies, sample_couplings, CouplingKind, CouplingSpec,
    };
    use crate::state::ChainSpec;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn single_spin_levels() {
        let s = ChainSpec::new(1, 0.0, 1.0, 0.0, FRAC_PI_2).unwrap();
        let h = build_rotating(&s, &crate::hamiltonian::CouplingMatrix::zeros(1)).unwrap();
        let sp = diagonalize(&h).unwrap();
        assert!((sp.values()[0] + 0.5).abs() < 1e-14);
        assert!((sp.values()[1] - 0.5).abs() < 1e-14);
        assert!(sp.gauge().is_some());
    }

    #[test]
    fn diagonal_case_returns_sorted_diagonal() {
        let s = ChainSpec::centered(4, 0.7, 0.0).unwrap();
        let cs = CouplingSpec::new(CouplingKind::AllRandom, 0.3, Some(8)).unwrap();
        let cm = sample_couplings(&cs, 4).unwrap();
        let h = build_rotating(&s, &cm).unwrap();
        let mut diag = diagonal_energies(&s, &cm).unwrap();
        diag.sort_by(f64::total_cmp);
        let vals = eigenvalues(&h).unwrap();
        for (a, b) in vals.iter().zip(&diag) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn trace_identities_l4() {
        let s = ChainSpec::centered(4, 1.1, 0.8).unwrap();
        let cs = CouplingSpec::new(CouplingKind::AllRandom, 0.9, Some(21)).unwrap();
        let cm = sample_couplings(&cs, 4).unwrap();
        let h = build_rotating(&s, &cm).unwrap();
        let sp = diagonalize(&h).unwrap();
        let sum: f64 = sp.values().iter().sum();
        let sum_sq: f64 = sp.values().iter().map(|x| x * x).sum();
        assert!(sum.abs() < 1e-10);
        assert!((sum_sq - h.trace_of_square()).abs() < 1e-9);
        assert!(sp.max_residual(&h) < 1e-12 * h.max_abs().max(1.0) * 16.0);
        assert!(sp.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn complex_path_for_non_gaugeable_matrix() {
        // a triangle with a net flux cannot be made real by diagonal phases
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let h = HermitianMatrix::new(3, vec![z, one, i, one, z, one, -i, one, z]).unwrap();
        assert!(real_gauge(&h).is_none());
        let sp = diagonalize(&h).unwrap();
        assert!(sp.gauge().is_none());
        assert!(sp.max_residual(&h) < 1e-13);
        assert!(sp.orthonormality_defect() < 1e-13);
        let sum: f64 = sp.values().iter().sum();
        assert!(sum.abs() < 1e-13);
    }

    #[test]
    fn real_components_undo_gauge() {
        let s = ChainSpec::centered(3, 1.0, 0.9).unwrap();
        let cm = sample_couplings(&CouplingSpec::constant(0.4).unwrap(), 3).unwrap();
        let sp = diagonalize(&build_rotating(&s, &cm).unwrap()).unwrap();
        for i in 0..sp.dim() {
            let r = sp.real_components(i);
            let norm: f64 = r.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn real_form_recovers_phase_rotated_vector() {
        let v = [0.6, -0.8, 0.0];
        let ph = C64::from_polar(1.0, 1.1);
        let z: Vec<C64> = v.iter().map(|x| ph * x).collect();
        let r = real_form(&z);
        let sign = r[0].signum();
        for (a, b) in r.iter().zip(&v) {
            assert!((a * sign - b).abs() < 1e-14);
        }
    }
}
