//! Eigenstate structure: participation ratios, component statistics and the
//! numerical delocalization border.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_rotating, predicted_border, sample_couplings, CouplingSpec};
use crate::numeric::mean;
use crate::spectrum::{diagonalize, Spectrum};
use crate::state::{ChainSpec, C64};
use crate::sweep::{run_sweep, ExperimentKind, GridAxis, SweepOptions, SweepTask};

pub const DEFAULT_WINDOW: f64 = 0.5;
pub const DEFAULT_BORDER_FACTOR: f64 = 2.0;
/// Fewest states a moment window may select.
pub const MIN_WINDOW_STATES: usize = 10;

const NORM_TOL: f64 = 1e-10;

/// How delocalization of a vector over the natural basis is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelocalizationMeasure {
    /// `1 / Σ |v_n|⁴`.
    #[default]
    ParticipationRatio,
    /// `exp(−Σ |v_n|² ln |v_n|²)`.
    Shannon,
}

impl FromStr for DelocalizationMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "participation-ratio" | "pr" => Ok(DelocalizationMeasure::ParticipationRatio),
            "shannon" => Ok(DelocalizationMeasure::Shannon),
            other => Err(Error::arg(format!(
                "unknown delocalization measure `{other}`"
            ))),
        }
    }
}

impl fmt::Display for DelocalizationMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DelocalizationMeasure::ParticipationRatio => "participation-ratio",
            DelocalizationMeasure::Shannon => "shannon",
        })
    }
}

fn check_norm(v: &[C64]) -> Result<()> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::arg(format!(
            "vector is not normalized (norm {norm})"
        )));
    }
    Ok(())
}

pub fn participation_ratio(v: &[C64]) -> Result<f64> {
    check_norm(v)?;
    Ok(1.0 / v.iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>())
}

/// Number of principal components from the Shannon entropy of `|v_n|²`.
pub fn shannon_components(v: &[C64]) -> Result<f64> {
    check_norm(v)?;
    let h: f64 = v
        .iter()
        .map(|c| c.norm_sqr())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Ok(h.exp())
}

impl DelocalizationMeasure {
    pub fn eval(self, v: &[C64]) -> Result<f64> {
        match self {
            DelocalizationMeasure::ParticipationRatio => participation_ratio(v),
            DelocalizationMeasure::Shannon => shannon_components(v),
        }
    }
}

/// Index range of the central `window` fraction of `n` states.
pub fn central_window(n: usize, window: f64) -> Result<std::ops::Range<usize>> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::arg(format!(
            "window must lie in (0, 1], got {window}"
        )));
    }
    let count = ((window * n as f64).round() as usize).clamp(1, n);
    let start = (n - count) / 2;
    Ok(start..start + count)
}

/// Mean of `measure` over the central `window` of eigenstates.
pub fn mean_delocalization(
    sp: &Spectrum,
    window: f64,
    measure: DelocalizationMeasure,
) -> Result<f64> {
    let range = central_window(sp.dim(), window)?;
    let vals = range
        .map(|i| measure.eval(sp.vector(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&vals))
}

/// Variance and excess kurtosis of a sample.
pub fn sample_moments(x: &[f64]) -> (f64, f64) {
    let m = mean(x);
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in x {
        let d = (v - m).powi(2);
        m2 += d;
        m4 += d * d;
    }
    let n = x.len() as f64;
    m2 /= n;
    m4 /= n;
    (m2, m4 / (m2 * m2) - 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentMoments {
    pub first_state: usize,
    pub variance: Vec<f64>,
    pub excess_kurtosis: Vec<f64>,
    /// Mean excess kurtosis over the window.
    pub aggregate_kurtosis: f64,
}

/// Moments of the real eigenvector components over the central `window`.
/// Kurtosis is scale free, so the unit-variance rescaling is implicit.
pub fn component_moments(sp: &Spectrum, window: f64) -> Result<ComponentMoments> {
    let range = central_window(sp.dim(), window)?;
    if range.len() < MIN_WINDOW_STATES {
        return Err(Error::Statistics(format!(
            "window selects {} states, need at least {MIN_WINDOW_STATES}",
            range.len()
        )));
    }
    let first_state = range.start;
    let (variance, excess_kurtosis): (Vec<f64>, Vec<f64>) = range
        .map(|i| sample_moments(&sp.real_components(i)))
        .unzip();
    let aggregate_kurtosis = mean(&excess_kurtosis);
    Ok(ComponentMoments {
        first_state,
        variance,
        excess_kurtosis,
        aggregate_kurtosis,
    })
}

/// Settings of a border scan besides the physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BorderOptions {
    pub window: f64,
    pub factor: f64,
    pub measure: DelocalizationMeasure,
}

impl Default for BorderOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            factor: DEFAULT_BORDER_FACTOR,
            measure: DelocalizationMeasure::default(),
        }
    }
}

/// Mean delocalization of the central eigenstates for one coupling draw.
pub fn border_cell(spec: &ChainSpec, cs: &CouplingSpec, opts: &BorderOptions) -> Result<f64> {
    let cm = sample_couplings(cs, spec.qubits())?;
    let sp = diagonalize(&build_rotating(spec, &cm)?)?;
    mean_delocalization(&sp, opts.window, opts.measure)
}

/// Smallest grid value whose mean reaches `factor` times the first one.
pub fn estimate_border(grid: &[f64], means: &[f64], factor: f64) -> Option<f64> {
    let base = *means.first()?;
    grid.iter()
        .zip(means)
        .find(|(_, m)| **m >= factor * base)
        .map(|(j, _)| *j)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorderScanResult {
    pub grid: Vec<f64>,
    pub mean_pr: Vec<f64>,
    pub stderr_pr: Vec<f64>,
    pub border: Option<f64>,
    pub predicted: f64,
    pub realizations: usize,
    pub master_seed: u64,
    pub options: BorderOptions,
}

/// Scans the coupling scale over `grid` (strictly increasing), averaging the
/// central-window delocalization over `realizations` coupling draws.
pub fn delocalization_scan(
    spec: &ChainSpec,
    coupling: &CouplingSpec,
    grid: &[f64],
    realizations: usize,
    master_seed: u64,
    opts: BorderOptions,
    workers: usize,
) -> Result<BorderScanResult> {
    let predicted = predicted_border(spec)?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("border scan grid must be strictly increasing"));
    }
    let task = SweepTask::new(
        ExperimentKind::BorderScan,
        *spec,
        *coupling,
        GridAxis::J,
        grid.to_vec(),
        realizations,
        master_seed,
        workers,
    )?
    .with_options(SweepOptions {
        border: opts,
        ..SweepOptions::default()
    });
    let res = run_sweep(&task)?;
    let mean_pr: Vec<f64> = res.points.iter().map(|p| p.mean[0]).collect();
    Ok(BorderScanResult {
        border: estimate_border(grid, &mean_pr, opts.factor),
        grid: grid.to_vec(),
        stderr_pr: res.points.iter().map(|p| p.stderr[0]).collect(),
        mean_pr,
        predicted,
        realizations,
        master_seed,
        options: opts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::CouplingKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pr_examples() {
        assert_eq!(participation_ratio(&[c(0.0), c(1.0), c(0.0)]).unwrap(), 1.0);
        let n = 16;
        let u = vec![c(1.0 / (n as f64).sqrt()); n];
        assert!((participation_ratio(&u).unwrap() - n as f64).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((participation_ratio(&[c(h), c(h), c(0.0), c(0.0)]).unwrap() - 2.0).abs() < 1e-12);
        assert!(participation_ratio(&[c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_components(&[c(1.0), c(0.0)]).unwrap(), 1.0);
        let u = vec![c(0.5); 4];
        assert!((shannon_components(&u).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn window_selection() {
        assert_eq!(central_window(16, 0.5).unwrap(), 4..12);
        assert_eq!(central_window(16, 1.0).unwrap(), 0..16);
        assert!(central_window(16, 0.0).is_err());
        assert!(central_window(16, 1.5).is_err());
    }

    /// Single unit component among N: with p = 1/N, q = 1 − p the excess
    /// kurtosis is (1 − 6pq)/(pq).
    #[test]
    fn basis_eigenvectors_are_maximally_peaked() {
        let spec = ChainSpec::centered(6, 1.0, 0.0).unwrap();
        let cm = sample_couplings(&CouplingSpec::constant(0.1).unwrap(), 6).unwrap();
        let sp = diagonalize(&build_rotating(&spec, &cm).unwrap()).unwrap();
        let m = component_moments(&sp, 1.0).unwrap();
        let p = 1.0 / 64.0;
        let pq = p * (1.0 - p);
        let expect = (1.0 - 6.0 * pq) / pq;
        assert!((m.aggregate_kurtosis - expect).abs() < 1e-9 * expect);
        assert!(m.aggregate_kurtosis > 50.0);
    }

    fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.into_iter().map(|v| c(v / norm)).collect()
    }

    fn basis_vector(n: usize, i: usize) -> Vec<C64> {
        let mut v = vec![c(0.0); n];
        v[i] = c(1.0);
        v
    }

    #[test]
    fn gaussian_ensemble_has_zero_kurtosis() {
        let n = 1024;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vectors: Vec<Vec<C64>> = (0..n).map(|_| gaussian_vector(&mut rng, n)).collect();
        let values: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let sp = Spectrum::from_parts(values, vectors).unwrap();
        let k = component_moments(&sp, 0.05).unwrap().aggregate_kurtosis;
        assert!(k.abs() < 0.2, "{k}");
    }

    #[test]
    fn mixture_lies_between() {
        let n = 256;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vectors: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    gaussian_vector(&mut rng, n)
                } else {
                    basis_vector(n, i)
                }
            })
            .collect();
        let sp = Spectrum::from_parts((0..n).map(|i| i as f64).collect(), vectors).unwrap();
        let k = component_moments(&sp, 1.0).unwrap().aggregate_kurtosis;
        let p = 1.0 / n as f64;
        let peak = (1.0 - 6.0 * p * (1.0 - p)) / (p * (1.0 - p));
        assert!(k > 0.5 && k < peak, "{k}");
    }

    #[test]
    fn small_window_rejected() {
        let n = 16;
        let sp = Spectrum::from_parts(
            (0..n).map(|i| i as f64).collect(),
            (0..n).map(|i| basis_vector(n, i)).collect(),
        )
        .unwrap();
        assert!(matches!(
            component_moments(&sp, 0.5),
            Err(Error::Statistics(_))
        ));
    }

    #[test]
    fn border_estimator() {
        let grid = [0.1, 0.3, 1.0, 3.0];
        assert_eq!(
            estimate_border(&grid, &[2.0, 3.0, 4.5, 9.0], 2.0),
            Some(1.0)
        );
        assert_eq!(estimate_border(&grid, &[2.0, 2.0, 2.0, 2.0], 2.0), None);
        assert_eq!(estimate_border(&[], &[], 2.0), None);
    }

    #[test]
    fn zero_coupling_scan_has_no_border() {
        let spec = ChainSpec::centered(5, 1.0, 2.0).unwrap();
        let cs = CouplingSpec::constant(0.0).unwrap();
        let r = delocalization_scan(&spec, &cs, &[0.0], 1, 7, BorderOptions::default(), 1).unwrap();
        assert_eq!(r.border, None);
        assert!(r.mean_pr[0] >= 1.0 && r.mean_pr[0] < 32.0);
        assert_eq!(r.predicted, 2.0);
    }

    #[test]
    fn scan_is_deterministic() {
        let spec = ChainSpec::centered(5, 1.0, 2.0).unwrap();
        let cs = CouplingSpec::new(CouplingKind::NnRandom, 1.0, Some(1)).unwrap();
        let grid = [0.5, 1.0, 2.0];
        let a = delocalization_scan(&spec, &cs, &grid, 3, 11, BorderOptions::default(), 1).unwrap();
        let b = delocalization_scan(&spec, &cs, &grid, 3, 11, BorderOptions::default(), 2).unwrap();
        assert_eq!(a, b);
        assert!(a.mean_pr.iter().all(|&m| (1.0..=32.0).contains(&m)));
        assert!(a.stderr_pr.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn scan_requires_drive() {
        let spec = ChainSpec::centered(4, 1.0, 0.0).unwrap();
        let cs = CouplingSpec::constant(1.0).unwrap();
        assert!(
            delocalization_scan(&spec, &cs, &[1.0], 1, 0, BorderOptions::default(), 1).is_err()
        );
    }
}
