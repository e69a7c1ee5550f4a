//! TOML run configuration.
//!
//! ```toml
//! [chain]
//! qubits = 10
//! gradient = 1.0
//! rabi = 1.0
//! # nu defaults to gradient * (qubits - 1) / 2, phase to π/2
//!
//! [coupling]
//! kind = "nn-random"
//! j = 0.5
//! seed = 7            # required for random kinds; master seed of sweeps
//!
//! [sweep]
//! grid = [0.1, 0.3, 1.0, 3.0]
//! realizations = 10
//! ```
//!
//! Every table and key is optional. Unknown keys are rejected.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eigenstates::{BorderOptions, DelocalizationMeasure};
use crate::error::{ConfigError, Error, Result};
use crate::hamiltonian::{CouplingDistribution, CouplingKind, CouplingSpec};
use crate::pulse::{
    EvolutionConfig, EvolutionMethod, MetricFrame, MetricOptions, PhaseFormula, PulseDuration,
};
use crate::spacing::SpacingOptions;
use crate::state::{centered_drive, ChainSpec, MAX_QUBITS};
use crate::sweep::GridAxis;

pub const DEFAULT_QUBITS: usize = 10;
pub const DEFAULT_GRADIENT: f64 = 1.0;
pub const DEFAULT_RABI: f64 = 1.0;
pub const DEFAULT_COUPLING: f64 = 1.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub qubits: Option<usize>,
    pub gradient: Option<f64>,
    pub rabi: Option<f64>,
    pub nu: Option<f64>,
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub kind: Option<CouplingKind>,
    pub j: Option<f64>,
    pub seed: Option<u64>,
    pub distribution: Option<CouplingDistribution>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub method: Option<EvolutionMethod>,
    pub dt: Option<f64>,
    pub duration: Option<PulseDuration>,
    pub frame: Option<MetricFrame>,
    pub phase: Option<PhaseFormula>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Option<GridAxis>,
    pub grid: Option<Vec<f64>>,
    pub realizations: Option<usize>,
    pub workers: Option<usize>,
    pub aggregate: Option<Aggregate>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsSection {
    pub degree: Option<usize>,
    pub trim: Option<f64>,
    pub per_band: Option<bool>,
    pub gap_factor: Option<f64>,
    pub bins: Option<usize>,
    pub s_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenstatesSection {
    pub window: Option<f64>,
    pub factor: Option<f64>,
    pub measure: Option<DelocalizationMeasure>,
}

/// The document as written, before defaults and validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub stats: StatsSection,
    #[serde(default)]
    pub eigenstates: EigenstatesSection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub axis: Option<GridAxis>,
    pub grid: Option<Vec<f64>>,
    pub realizations: usize,
    pub workers: usize,
    pub aggregate: Aggregate,
}

/// Validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub chain: ChainSpec,
    pub coupling: CouplingSpec,
    pub evolution: EvolutionConfig,
    pub metrics: MetricOptions,
    pub sweep: SweepSettings,
    pub stats: SpacingOptions,
    pub eigenstates: BorderOptions,
}

impl RunConfig {
    /// Master seed of sweeps: the coupling seed, or 0 for deterministic kinds.
    pub fn master_seed(&self) -> u64 {
        self.coupling.seed().unwrap_or(0)
    }
}

fn classify(e: toml::de::Error) -> ConfigError {
    let msg = e.message().to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some(end) = rest.find('`') {
            return ConfigError::UnknownKey(rest[..end].to_string());
        }
    }
    ConfigError::Syntax(e.to_string().trim_end().to_string())
}

pub fn parse_raw(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| Error::Config(classify(e)))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_raw(text)?.resolve()
}

pub fn load_raw(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(ConfigError::Syntax(format!(
            "cannot read config {}: {e}",
            path.display()
        )))
    })?;
    parse_raw(&text)
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::constraint(key, format!("must be finite, got {v}")))
    }
}

fn nonneg(key: &str, v: f64) -> Result<f64> {
    if finite(key, v)? < 0.0 {
        return Err(Error::constraint(key, format!("must be >= 0, got {v}")));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if !(finite(key, v)? > 0.0) {
        return Err(Error::constraint(key, format!("must be > 0, got {v}")));
    }
    Ok(v)
}

impl RawConfig {
    pub fn resolve(&self) -> Result<RunConfig> {
        let c = &self.chain;
        let qubits = c.qubits.unwrap_or(DEFAULT_QUBITS);
        if qubits > MAX_QUBITS {
            return Err(Error::constraint(
                "chain.qubits",
                format!("L exceeds limit {MAX_QUBITS}"),
            ));
        }
        if qubits == 0 {
            return Err(Error::constraint("chain.qubits", "L must be >= 1"));
        }
        let gradient = nonneg("chain.gradient", c.gradient.unwrap_or(DEFAULT_GRADIENT))?;
        let rabi = nonneg("chain.rabi", c.rabi.unwrap_or(DEFAULT_RABI))?;
        let nu = finite(
            "chain.nu",
            c.nu.unwrap_or_else(|| centered_drive(qubits, gradient)),
        )?;
        let phase = finite("chain.phase", c.phase.unwrap_or(FRAC_PI_2))?;
        let chain = ChainSpec::new(qubits, gradient, rabi, nu, phase)
            .map_err(|e| Error::constraint("chain", e.to_string()))?;

        let cp = &self.coupling;
        let kind = cp.kind.unwrap_or(CouplingKind::NnConstant);
        let j = nonneg("coupling.j", cp.j.unwrap_or(DEFAULT_COUPLING))?;
        if kind.is_random() && cp.seed.is_none() {
            return Err(Error::constraint(
                "coupling.seed",
                format!("required for coupling kind {kind}"),
            ));
        }
        let seed = if kind.is_random() { cp.seed } else { None };
        let coupling = CouplingSpec::new(kind, j, seed)
            .map_err(|e| Error::constraint("coupling", e.to_string()))?
            .with_distribution(cp.distribution.unwrap_or_default());

        let ev = &self.evolution;
        if let Some(dt) = ev.dt {
            positive("evolution.dt", dt)?;
        }
        if let Some(PulseDuration::Fixed(t)) = ev.duration {
            nonneg("evolution.duration", t)?;
        }
        let evolution = EvolutionConfig {
            method: ev.method.unwrap_or_default(),
            dt: ev.dt,
            duration: ev.duration.unwrap_or_default(),
        };
        let metrics = MetricOptions {
            frame: ev.frame.unwrap_or_default(),
            phase: ev.phase.unwrap_or_default(),
        };

        let sw = &self.sweep;
        if let Some(grid) = &sw.grid {
            if grid.is_empty() {
                return Err(Error::constraint("sweep.grid", "must not be empty"));
            }
            for v in grid {
                nonneg("sweep.grid", *v)?;
            }
            let rising = grid.windows(2).all(|w| w[1] > w[0]);
            let falling = grid.windows(2).all(|w| w[1] < w[0]);
            if !(rising || falling) {
                return Err(Error::constraint(
                    "sweep.grid",
                    "values must be strictly monotone",
                ));
            }
        }
        let realizations = sw.realizations.unwrap_or(1);
        if realizations == 0 {
            return Err(Error::constraint("sweep.realizations", "must be >= 1"));
        }
        let workers = sw.workers.unwrap_or(1);
        if workers == 0 {
            return Err(Error::constraint("sweep.workers", "must be >= 1"));
        }
        let sweep = SweepSettings {
            axis: sw.axis,
            grid: sw.grid.clone(),
            realizations,
            workers,
            aggregate: sw.aggregate.unwrap_or_default(),
        };

        let st = &self.stats;
        let d = SpacingOptions::default();
        let stats = SpacingOptions {
            degree: st.degree.unwrap_or(d.degree),
            trim: st.trim.unwrap_or(d.trim),
            per_band: st.per_band.unwrap_or(d.per_band),
            gap_factor: st.gap_factor.unwrap_or(d.gap_factor),
            bins: st.bins.unwrap_or(d.bins),
            s_max: st.s_max.unwrap_or(d.s_max),
        };
        if !(0.0..0.5).contains(&stats.trim) {
            return Err(Error::constraint("stats.trim", "must lie in [0, 0.5)"));
        }
        if !(stats.gap_factor > 1.0) {
            return Err(Error::constraint("stats.gap_factor", "must exceed 1"));
        }
        if stats.bins == 0 {
            return Err(Error::constraint("stats.bins", "must be >= 1"));
        }
        positive("stats.s_max", stats.s_max)?;

        let es = &self.eigenstates;
        let d = BorderOptions::default();
        let eigenstates = BorderOptions {
            window: es.window.unwrap_or(d.window),
            factor: es.factor.unwrap_or(d.factor),
            measure: es.measure.unwrap_or(d.measure),
        };
        if !(eigenstates.window > 0.0 && eigenstates.window <= 1.0) {
            return Err(Error::constraint(
                "eigenstates.window",
                "must lie in (0, 1]",
            ));
        }
        if !(eigenstates.factor > 1.0) {
            return Err(Error::constraint("eigenstates.factor", "must exceed 1"));
        }

        Ok(RunConfig {
            chain,
            coupling,
            evolution,
            metrics,
            sweep,
            stats,
            eigenstates,
        })
    }
}
