//! Single-pulse dynamics and the error of the prepared uniform superposition.
//!
//! The rotating frame is reached by `ψ_rot = exp(i s ν t M) ψ_lab` with
//! `M_n = Σ_k m_k(n)` and `s = FRAME_SIGN`. With `s = −1` the lab diagonal
//! `−Σ ω_k m_k` turns into the rotating `−Σ δ_k m_k`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bands::band_overlap_from_spectrum;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_lab, build_rotating, site_detuning, CouplingMatrix, PulseSpec};
use crate::numeric::linear_fit;
use crate::spectrum::{diagonalize, Spectrum};
use crate::state::{total_spin, ChainSpec, StateVector, C64};

pub const FRAME_SIGN: f64 = -1.0;
/// Final norm drift above which a stepped evolution carries a warning.
pub const NORM_DRIFT_WARNING: f64 = 1e-8;
/// Step scale of the default stepper `dt`. At 0.01 halving the step still
/// moved amplitudes by up to 3.5e-6 for a = 1 chains; 0.004 keeps that
/// below 1e-6.
pub const DT_SCALE: f64 = 0.004;
/// Overlap fraction from which a scan point counts as band-overlapping.
pub const OVERLAP_REGIME: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionMethod {
    #[default]
    Spectral,
    Stepped,
}

impl FromStr for EvolutionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(EvolutionMethod::Spectral),
            "stepped" => Ok(EvolutionMethod::Stepped),
            other => Err(Error::arg(format!("unknown evolution method `{other}`"))),
        }
    }
}

/// Pulse length, either tied to the Rabi frequency or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PulseDuration {
    /// `π/(2Ω)`: a quarter turn of each spin, giving the uniform superposition.
    #[default]
    QuarterTurn,
    /// `π/Ω`.
    HalfTurn,
    Fixed(f64),
}

impl PulseDuration {
    pub fn resolve(self, rabi: f64) -> Result<f64> {
        let t = match self {
            PulseDuration::Fixed(t) => t,
            _ if !(rabi > 0.0) => {
                return Err(Error::arg(
                    "a Rabi-tied pulse duration needs a Rabi frequency > 0",
                ))
            }
            PulseDuration::QuarterTurn => PI / (2.0 * rabi),
            PulseDuration::HalfTurn => PI / rabi,
        };
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::arg(format!(
                "pulse duration must be finite and >= 0, got {t}"
            )));
        }
        Ok(t)
    }
}

impl FromStr for PulseDuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi/2omega" => Ok(PulseDuration::QuarterTurn),
            "pi/omega" => Ok(PulseDuration::HalfTurn),
            other => other.parse::<f64>().map(PulseDuration::Fixed).map_err(|_| {
                Error::arg(format!(
                    "duration must be `pi/2omega`, `pi/omega` or a number, got `{other}`"
                ))
            }),
        }
    }
}

impl fmt::Display for PulseDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PulseDuration::QuarterTurn => f.write_str("pi/2omega"),
            PulseDuration::HalfTurn => f.write_str("pi/omega"),
            PulseDuration::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl Serialize for PulseDuration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PulseDuration::Fixed(t) => s.serialize_f64(*t),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for PulseDuration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Name(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(t) => Ok(PulseDuration::Fixed(t)),
            Repr::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub method: EvolutionMethod,
    /// Step for the stepped method; `None` picks [`default_dt`].
    pub dt: Option<f64>,
    pub duration: PulseDuration,
}

impl EvolutionConfig {
    pub fn validate(&self, rabi: f64) -> Result<f64> {
        let tau = self.duration.resolve(rabi)?;
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::arg(format!("dt must be > 0, got {dt}")));
            }
            if self.method == EvolutionMethod::Stepped && dt > tau && tau > 0.0 {
                return Err(Error::arg(format!("dt {dt} exceeds duration {tau}")));
            }
        }
        Ok(tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricFrame {
    #[default]
    Rotating,
    Lab,
}

/// Per-component phase: literal `arctan(Im/Re)` or the two-argument angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseFormula {
    #[default]
    Arctan,
    Atan2,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricOptions {
    pub frame: MetricFrame,
    pub phase: PhaseFormula,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseErrorMetrics {
    /// Mean of `||ψ_n| − 1/√N|`.
    pub eta: f64,
    /// Mean per-component phase.
    pub phi: f64,
    pub max_amplitude_error: f64,
    pub max_abs_phase: f64,
    /// Target modulus `1/√N`.
    pub reference: f64,
}

fn component_phase(z: C64, formula: PhaseFormula) -> f64 {
    match formula {
        PhaseFormula::Atan2 => z.im.atan2(z.re),
        PhaseFormula::Arctan if z.re.abs() < 1e-300 => {
            if z.im > 0.0 {
                PI / 2.0
            } else if z.im < 0.0 {
                -PI / 2.0
            } else {
                0.0
            }
        }
        PhaseFormula::Arctan => (z.im / z.re).atan(),
    }
}

pub fn error_metrics_with(psi: &StateVector, formula: PhaseFormula) -> PulseErrorMetrics {
    let n = psi.dim() as f64;
    let reference = 1.0 / n.sqrt();
    let (mut eta, mut phi, mut max_amp, mut max_phase) = (0.0, 0.0, 0.0f64, 0.0f64);
    for z in psi.amplitudes() {
        let e = (z.norm() - reference).abs();
        let p = component_phase(*z, formula);
        eta += e;
        phi += p;
        max_amp = max_amp.max(e);
        max_phase = max_phase.max(p.abs());
    }
    PulseErrorMetrics {
        eta: eta / n,
        phi: phi / n,
        max_amplitude_error: max_amp,
        max_abs_phase: max_phase,
        reference,
    }
}

pub fn error_metrics(psi: &StateVector) -> PulseErrorMetrics {
    error_metrics_with(psi, PhaseFormula::Arctan)
}

/// `V exp(−iΛt) V† ψ0`.
pub fn evolve_spectral(sp: &Spectrum, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if t == 0.0 && psi0.dim() == sp.dim() {
        return Ok(psi0.clone());
    }
    let mut coeffs = sp.project(psi0)?;
    for (c, l) in coeffs.iter_mut().zip(sp.values()) {
        *c *= C64::from_polar(1.0, -l * t);
    }
    StateVector::from_amplitudes(sp.combine(&coeffs))
}

/// Multiplies component `n` by `exp(i s ν t M_n)`.
pub fn frame_transform(psi: &StateVector, t: f64, nu: f64) -> StateVector {
    let qubits = psi.qubits();
    let mut out = psi.clone();
    for (n, a) in out.amplitudes_mut().iter_mut().enumerate() {
        *a *= C64::from_polar(1.0, FRAME_SIGN * nu * t * total_spin(n, qubits));
    }
    out
}

#[derive(Debug, Clone)]
pub struct SteppedEvolution {
    pub state: StateVector,
    pub steps: usize,
    pub dt: f64,
    pub norm_drift: f64,
    pub warnings: Vec<String>,
}

/// `min(c/Ω, c/max|δ_k|)` over the chain and the pulses present, with
/// `c = DT_SCALE`.
pub fn default_dt(spec: &ChainSpec, pulses: &[PulseSpec]) -> Result<f64> {
    let max_rabi = pulses.iter().map(|p| p.rabi).fold(spec.rabi(), f64::max);
    let mut max_detuning = 0.0f64;
    for k in 0..spec.qubits() {
        max_detuning = max_detuning.max(site_detuning(spec, k)?.abs());
    }
    let dt = [max_rabi, max_detuning]
        .iter()
        .filter(|r| **r > 0.0)
        .map(|r| DT_SCALE / r)
        .fold(f64::INFINITY, f64::min);
    Ok(if dt.is_finite() { dt } else { DT_SCALE })
}

/// Lab-frame propagation over `[0, τ]` with `τ` from `cfg`. Each step applies
/// the exact exponential of the Hamiltonian at the step midpoint; steps never
/// straddle a pulse edge.
pub fn evolve_lab_stepper(
    spec: &ChainSpec,
    cm: &CouplingMatrix,
    pulses: &[PulseSpec],
    psi0: &StateVector,
    cfg: &EvolutionConfig,
) -> Result<SteppedEvolution> {
    let total = cfg.validate(spec.rabi())?;
    if psi0.dim() != spec.dim() {
        return Err(Error::arg(
            "initial state does not match the chain dimension",
        ));
    }
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => default_dt(spec, pulses)?,
    };
    let mut edges = vec![0.0, total];
    for p in pulses {
        edges.extend(
            [p.start, p.end()]
                .into_iter()
                .filter(|t| *t > 0.0 && *t < total),
        );
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut psi = psi0.clone();
    let mut steps = 0;
    for w in edges.windows(2) {
        let span = w[1] - w[0];
        if span <= 0.0 {
            continue;
        }
        let n = (span / dt).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for i in 0..n {
            let mid = w[0] + (i as f64 + 0.5) * h;
            let ham = build_lab(spec, cm, pulses, mid)?;
            psi = if ham.is_diagonal() {
                let mut out = psi;
                for (r, a) in out.amplitudes_mut().iter_mut().enumerate() {
                    *a *= C64::from_polar(1.0, -ham.get(r, r).re * h);
                }
                out
            } else {
                evolve_spectral(&diagonalize(&ham)?, &psi, h)?
            };
        }
        steps += n;
    }
    let norm_drift = (psi.norm() - psi0.norm()).abs();
    let mut warnings = Vec::new();
    if norm_drift > NORM_DRIFT_WARNING {
        warnings.push(format!(
            "norm drift {norm_drift:.3e} exceeds {NORM_DRIFT_WARNING:e}; reduce dt"
        ));
    }
    Ok(SteppedEvolution {
        state: psi,
        steps,
        dt,
        norm_drift,
        warnings,
    })
}

/// One pulse from the all-up state with its error metrics.
#[derive(Debug, Clone)]
pub struct PulseOutcome {
    pub omega: f64,
    pub duration: f64,
    pub rotating: StateVector,
    pub lab: StateVector,
    pub metrics: PulseErrorMetrics,
    /// Metrics in the frame not selected, for comparison.
    pub other_frame: PulseErrorMetrics,
    pub band_overlap: f64,
    pub warnings: Vec<String>,
}

pub fn run_pulse(
    spec: &ChainSpec,
    cm: &CouplingMatrix,
    cfg: &EvolutionConfig,
    opts: &MetricOptions,
) -> Result<PulseOutcome> {
    spec.require_drive()?;
    let tau = cfg.validate(spec.rabi())?;
    let psi0 = StateVector::basis(spec.qubits(), 0)?;
    let sp = diagonalize(&build_rotating(spec, cm)?)?;
    let band_overlap = band_overlap_from_spectrum(spec, &sp)?;
    let mut warnings = Vec::new();
    let (rotating, lab) = match cfg.method {
        EvolutionMethod::Spectral => {
            let rot = evolve_spectral(&sp, &psi0, tau)?;
            let lab = frame_transform(&rot, -tau, spec.nu());
            (rot, lab)
        }
        EvolutionMethod::Stepped => {
            let pulse = PulseSpec::from_chain(spec, tau, 0.0)?;
            let run = evolve_lab_stepper(spec, cm, &[pulse], &psi0, cfg)?;
            warnings.extend(run.warnings);
            (frame_transform(&run.state, tau, spec.nu()), run.state)
        }
    };
    let (selected, other) = match opts.frame {
        MetricFrame::Rotating => (&rotating, &lab),
        MetricFrame::Lab => (&lab, &rotating),
    };
    Ok(PulseOutcome {
        omega: spec.rabi(),
        duration: tau,
        metrics: error_metrics_with(selected, opts.phase),
        other_frame: error_metrics_with(other, opts.phase),
        rotating,
        lab,
        band_overlap,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulsePoint {
    pub omega: f64,
    pub eta: f64,
    pub phi: f64,
    pub band_overlap: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseScan {
    pub points: Vec<PulsePoint>,
    pub eta_slope: Option<f64>,
    pub phi_slope: Option<f64>,
    /// Some point has band overlap at or above [`OVERLAP_REGIME`].
    pub overlap_flag: bool,
}

/// Least-squares slope of `log|y|` against `log Ω`; absent when any `y` is 0.
pub fn log_slope(omega: &[f64], y: &[f64]) -> Option<f64> {
    if y.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = omega.iter().map(|o| o.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    linear_fit(&lx, &ly).map(|(_, s)| s)
}

impl PulseScan {
    pub fn from_points(points: Vec<PulsePoint>) -> Self {
        let omega: Vec<f64> = points.iter().map(|p| p.omega).collect();
        let eta: Vec<f64> = points.iter().map(|p| p.eta).collect();
        let phi: Vec<f64> = points.iter().map(|p| p.phi).collect();
        Self {
            eta_slope: log_slope(&omega, &eta),
            phi_slope: log_slope(&omega, &phi),
            overlap_flag: points.iter().any(|p| p.band_overlap >= OVERLAP_REGIME),
            points,
        }
    }
}

/// Runs one pulse per Rabi frequency in `grid` on fixed couplings.
pub fn pulse_error_scan(
    template: &ChainSpec,
    cm: &CouplingMatrix,
    grid: &[f64],
    cfg: &EvolutionConfig,
    opts: &MetricOptions,
) -> Result<PulseScan> {
    let points = grid
        .iter()
        .map(|&omega| {
            let out = run_pulse(&template.with_rabi(omega)?, cm, cfg, opts)?;
            Ok(PulsePoint {
                omega,
                eta: out.metrics.eta,
                phi: out.metrics.phi,
                band_overlap: out.band_overlap,
                duration: out.duration,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PulseScan::from_points(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{sample_couplings, CouplingSpec};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn chain(l: usize, a: f64, rabi: f64, nu: f64) -> ChainSpec {
        ChainSpec::new(l, a, rabi, nu, FRAC_PI_2).unwrap()
    }

    #[test]
    fn metrics_examples() {
        let u = StateVector::uniform(3).unwrap();
        let m = error_metrics(&u);
        assert!(m.eta < 1e-15 && m.phi.abs() < 1e-15);

        let rot = C64::from_polar(1.0, PI / 6.0);
        let amps: Vec<C64> = u.amplitudes().iter().map(|a| a * rot).collect();
        let m = error_metrics(&StateVector::from_amplitudes(amps).unwrap());
        assert!(m.eta < 1e-15 && (m.phi - PI / 6.0).abs() < 1e-14);

        let m = error_metrics(&StateVector::basis(2, 0).unwrap());
        assert!((m.eta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn arctan_branch_for_imaginary_components() {
        let amps = vec![
            C64::new(0.0, 0.5),
            C64::new(0.0, -0.5),
            C64::new(0.5, 0.0),
            C64::new(-0.5, 0.0),
        ];
        let m = error_metrics(&StateVector::from_amplitudes(amps.clone()).unwrap());
        assert!(m.phi.abs() < 1e-15);
        let m2 = error_metrics_with(
            &StateVector::from_amplitudes(amps).unwrap(),
            PhaseFormula::Atan2,
        );
        assert!((m2.phi - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn single_spin_quarter_turn() {
        let spec = chain(1, 0.0, 1.0, 0.0);
        let sp = diagonalize(&build_rotating(&spec, &CouplingMatrix::zeros(1)).unwrap()).unwrap();
        let psi0 = StateVector::basis(1, 0).unwrap();
        assert_eq!(
            evolve_spectral(&sp, &psi0, 0.0)
                .unwrap()
                .max_abs_diff(&psi0),
            0.0
        );
        let psi = evolve_spectral(&sp, &psi0, FRAC_PI_2).unwrap();
        for a in psi.amplitudes() {
            assert!((a.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
        }
        // exp(−i θ σ^y / 2) with θ = π/2 maps up to (up + down)/√2
        let ratio = psi.amplitudes()[1] / psi.amplitudes()[0];
        assert!((ratio - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn spectral_evolution_is_unitary() {
        let spec = chain(5, 1.0, 0.7, 1.3);
        let cm = sample_couplings(&CouplingSpec::constant(0.3).unwrap(), 5).unwrap();
        let sp = diagonalize(&build_rotating(&spec, &cm).unwrap()).unwrap();
        let psi0 = StateVector::basis(5, 3).unwrap();
        for t in [0.1, 1.0, 17.0, 250.0] {
            assert!((evolve_spectral(&sp, &psi0, t).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_transform_examples() {
        let psi = StateVector::from_amplitudes(vec![
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(frame_transform(&psi, 0.0, 3.0), psi);
        let out = frame_transform(&psi, 1.7, 2.3);
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_schedule_gives_diagonal_phases() {
        let spec = chain(3, 1.0, 1.0, 1.0);
        let cm = sample_couplings(&CouplingSpec::constant(0.2).unwrap(), 3).unwrap();
        let psi0 = StateVector::uniform(3).unwrap();
        let cfg = EvolutionConfig {
            method: EvolutionMethod::Stepped,
            dt: Some(0.1),
            duration: PulseDuration::Fixed(1.0),
        };
        let run = evolve_lab_stepper(&spec, &cm, &[], &psi0, &cfg).unwrap();
        for (a, b) in run.state.amplitudes().iter().zip(psi0.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn stepper_uniform_superposition_without_field_or_coupling() {
        let spec = chain(4, 0.0, 1.0, 0.0);
        let cfg = EvolutionConfig {
            method: EvolutionMethod::Stepped,
            ..Default::default()
        };
        let out = run_pulse(
            &spec,
            &CouplingMatrix::zeros(4),
            &cfg,
            &MetricOptions::default(),
        )
        .unwrap();
        assert!(out.metrics.max_amplitude_error < 1e-8);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn stepper_self_convergence() {
        let cases = [
            (3, 1.0, 0.5, 1.0),
            (4, 1.0, 0.5, 1.5),
            (6, 1.0, 0.5, 2.5),
            (4, 0.1, 2.0, 0.15),
        ];
        for (l, a, rabi, nu) in cases {
            let spec = chain(l, a, rabi, nu);
            let cm = sample_couplings(&CouplingSpec::constant(0.1).unwrap(), l).unwrap();
            let psi0 = StateVector::basis(l, 0).unwrap();
            let tau = PI / (2.0 * rabi);
            let pulse = PulseSpec::from_chain(&spec, tau, 0.0).unwrap();
            let dt = default_dt(&spec, &[pulse]).unwrap();
            let run = |dt| {
                let cfg = EvolutionConfig {
                    method: EvolutionMethod::Stepped,
                    dt: Some(dt),
                    duration: PulseDuration::Fixed(tau),
                };
                evolve_lab_stepper(&spec, &cm, &[pulse], &psi0, &cfg).unwrap()
            };
            let coarse = run(dt);
            let fine = run(dt / 2.0);
            let d = coarse.state.max_abs_diff(&fine.state);
            assert!(d < 1e-6, "L={l} a={a} Ω={rabi} ν={nu}: {d}");
            assert!(coarse.norm_drift < 1e-10);
        }
    }

    #[test]
    fn stepped_matches_spectral_in_rotating_frame() {
        let spec = chain(3, 1.0, 0.5, 1.0);
        let cm = sample_couplings(&CouplingSpec::constant(0.1).unwrap(), 3).unwrap();
        let spectral = EvolutionConfig::default();
        let stepped = EvolutionConfig {
            method: EvolutionMethod::Stepped,
            dt: Some(1e-3),
            ..Default::default()
        };
        let opts = MetricOptions::default();
        let a = run_pulse(&spec, &cm, &spectral, &opts).unwrap();
        let b = run_pulse(&spec, &cm, &stepped, &opts).unwrap();
        assert!(a.rotating.max_abs_diff(&b.rotating) < 1e-6);
        assert!(a.lab.max_abs_diff(&b.lab) < 1e-6);
    }

    #[test]
    fn scan_without_field_or_coupling() {
        let spec = chain(3, 0.0, 1.0, 0.0);
        let cm = CouplingMatrix::zeros(3);
        let cfg = EvolutionConfig::default();
        let opts = MetricOptions::default();
        let s = pulse_error_scan(&spec, &cm, &[1.0, 2.0, 4.0], &cfg, &opts).unwrap();
        assert!(s.points.iter().all(|p| p.eta < 1e-12));
        let doubled = pulse_error_scan(&spec, &cm, &[2.0, 4.0, 8.0], &cfg, &opts).unwrap();
        assert!(doubled.points.iter().all(|p| p.eta < 1e-12));
    }

    #[test]
    fn slopes_absent_for_exact_zero() {
        assert_eq!(log_slope(&[1.0, 2.0], &[0.0, 0.0]), None);
        let s = log_slope(&[1.0, 2.0, 4.0], &[1.0, 0.25, 0.0625]).unwrap();
        assert!((s + 2.0).abs() < 1e-12);
    }

    #[test]
    fn duration_parsing() {
        assert_eq!(
            "pi/2omega".parse::<PulseDuration>().unwrap(),
            PulseDuration::QuarterTurn
        );
        assert_eq!(
            "pi/omega".parse::<PulseDuration>().unwrap(),
            PulseDuration::HalfTurn
        );
        assert_eq!(
            "0.5".parse::<PulseDuration>().unwrap(),
            PulseDuration::Fixed(0.5)
        );
        assert!("forever".parse::<PulseDuration>().is_err());
        assert!((PulseDuration::HalfTurn.resolve(2.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(PulseDuration::QuarterTurn.resolve(0.0).is_err());
    }
}
