//! Seeded parameter sweeps over a grid and disorder realizations.
//!
//! A sweep is a set of cells `(grid index, realization index)`. Each cell is a
//! pure function of its grid value and a seed derived from the master seed,
//! and cells are aggregated in index order, so results do not depend on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{band_merge_fraction, band_overlap_fraction};
use crate::eigenstates::{border_cell, BorderOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_rotating, sample_couplings, CouplingSpec};
use crate::numeric::{mean, median, sample_std};
use crate::pulse::{run_pulse, EvolutionConfig, MetricOptions};
use crate::spacing::{ks_distance, level_spacings, SpacingModel, SpacingOptions};
use crate::spectrum::eigenvalues;
use crate::state::ChainSpec;

/// Largest fraction of failed cells a sweep tolerates.
pub const MAX_FAILED_FRACTION: f64 = 0.1;

const GRID_MIX: u64 = 0x9E37_79B9_7F4A_7C15;
const REALIZATION_MIX: u64 = 0xC2B2_AE3D_27D4_EB4F;

/// splitmix64 output finalizer (xor-shift-multiply, constants
/// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). It is a bijection on u64.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_stream_seed(master: u64, grid_index: usize, realization: usize) -> u64 {
    mix(master
        ^ (grid_index as u64).wrapping_mul(GRID_MIX)
        ^ (realization as u64).wrapping_mul(REALIZATION_MIX))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Spacings,
    BorderScan,
    PulseScan,
    Bands,
}

impl ExperimentKind {
    pub fn observables(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Spacings => &["ks_poisson", "ks_wigner_dyson", "mean_spacing"],
            ExperimentKind::BorderScan => &["mean_pr"],
            ExperimentKind::PulseScan => &["eta", "phi", "band_overlap", "duration"],
            ExperimentKind::Bands => &["band_overlap", "band_merge"],
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spacings" => Ok(ExperimentKind::Spacings),
            "border-scan" => Ok(ExperimentKind::BorderScan),
            "pulse-scan" => Ok(ExperimentKind::PulseScan),
            "bands" => Ok(ExperimentKind::Bands),
            other => Err(Error::arg(format!("unknown experiment kind `{other}`"))),
        }
    }
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridAxis {
    /// Coupling scale.
    J,
    /// Rabi frequency.
    Omega,
}

impl FromStr for GridAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "j" | "J" => Ok(GridAxis::J),
            "omega" => Ok(GridAxis::Omega),
            other => Err(Error::arg(format!(
                "unknown grid axis `{other}` (expected j or omega)"
            ))),
        }
    }
}

impl fmt::Display for GridAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridAxis::J => "J",
            GridAxis::Omega => "omega",
        })
    }
}

/// Per-experiment settings carried by a task.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub spacing: SpacingOptions,
    pub border: BorderOptions,
    pub evolution: EvolutionConfig,
    pub metrics: MetricOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTask {
    kind: ExperimentKind,
    chain: ChainSpec,
    coupling: CouplingSpec,
    axis: GridAxis,
    grid: Vec<f64>,
    realizations: usize,
    master_seed: u64,
    workers: usize,
    options: SweepOptions,
}

impl SweepTask {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: ExperimentKind,
        chain: ChainSpec,
        coupling: CouplingSpec,
        axis: GridAxis,
        grid: Vec<f64>,
        realizations: usize,
        master_seed: u64,
        workers: usize,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::arg("sweep grid is empty"));
        }
        if grid.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::arg("grid values must be finite and >= 0"));
        }
        let rising = grid.windows(2).all(|w| w[1] > w[0]);
        let falling = grid.windows(2).all(|w| w[1] < w[0]);
        if !(rising || falling) {
            return Err(Error::arg("grid values must be strictly monotone"));
        }
        if realizations == 0 {
            return Err(Error::arg("realizations must be >= 1"));
        }
        if workers == 0 {
            return Err(Error::arg("workers must be >= 1"));
        }
        let needs_drive = matches!(kind, ExperimentKind::BorderScan | ExperimentKind::PulseScan);
        let drive_ok = match axis {
            GridAxis::Omega => grid.iter().all(|v| *v > 0.0),
            GridAxis::J => chain.rabi() > 0.0,
        };
        if needs_drive && !drive_ok {
            return Err(Error::arg(format!(
                "{kind:?} needs a Rabi frequency > 0 at every grid point"
            )));
        }
        Ok(Self {
            kind,
            chain,
            coupling,
            axis,
            grid,
            realizations,
            master_seed,
            workers,
            options: SweepOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SweepOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::arg("workers must be >= 1"));
        }
        self.workers = workers;
        Ok(self)
    }

    pub fn kind(&self) -> ExperimentKind {
        self.kind
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn coupling(&self) -> &CouplingSpec {
        &self.coupling
    }

    pub fn axis(&self) -> GridAxis {
        self.axis
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn realizations(&self) -> usize {
        self.realizations
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn options(&self) -> &SweepOptions {
        &self.options
    }

    /// Chain and coupling parameters of one cell.
    pub fn cell_parameters(
        &self,
        grid_index: usize,
        seed: u64,
    ) -> Result<(ChainSpec, CouplingSpec)> {
        let v = self.grid[grid_index];
        match self.axis {
            GridAxis::J => Ok((self.chain, self.coupling.with_scale_and_seed(v, seed)?)),
            GridAxis::Omega => Ok((
                self.chain.with_rabi(v)?,
                self.coupling
                    .with_scale_and_seed(self.coupling.scale(), seed)?,
            )),
        }
    }

    fn run_cell(&self, grid_index: usize, realization: usize) -> Result<CellOutput> {
        let seed = derive_stream_seed(self.master_seed, grid_index, realization);
        let (spec, cs) = self.cell_parameters(grid_index, seed)?;
        let opts = &self.options;
        match self.kind {
            ExperimentKind::BorderScan => Ok(CellOutput::values(vec![border_cell(
                &spec,
                &cs,
                &opts.border,
            )?])),
            ExperimentKind::Spacings => {
                let cm = sample_couplings(&cs, spec.qubits())?;
                let levels = eigenvalues(&build_rotating(&spec, &cm)?)?;
                let s = level_spacings(&levels, &opts.spacing)?;
                Ok(CellOutput {
                    values: vec![
                        ks_distance(&s, SpacingModel::Poisson)?,
                        ks_distance(&s, SpacingModel::WignerDyson)?,
                        mean(&s),
                    ],
                    samples: s,
                })
            }
            ExperimentKind::PulseScan => {
                let cm = sample_couplings(&cs, spec.qubits())?;
                let out = run_pulse(&spec, &cm, &opts.evolution, &opts.metrics)?;
                Ok(CellOutput::values(vec![
                    out.metrics.eta,
                    out.metrics.phi,
                    out.band_overlap,
                    out.duration,
                ]))
            }
            ExperimentKind::Bands => {
                let cm = sample_couplings(&cs, spec.qubits())?;
                Ok(CellOutput::values(vec![
                    band_overlap_fraction(&spec, &cm)?,
                    band_merge_fraction(&spec, &cm, opts.spacing.gap_factor)?,
                ]))
            }
        }
    }
}

#[derive(Debug, Clone)]
struct CellOutput {
    values: Vec<f64>,
    samples: Vec<f64>,
}

impl CellOutput {
    fn values(values: Vec<f64>) -> Self {
        Self {
            values,
            samples: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub realization: usize,
    pub message: String,
}

/// Aggregates of every observable at one grid value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAggregate {
    pub value: f64,
    pub mean: Vec<f64>,
    /// Sample standard deviation over `√count`; zero for a single sample.
    pub stderr: Vec<f64>,
    pub median: Vec<f64>,
    pub count: usize,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: String,
    pub timestamp: u64,
    pub frame_sign: f64,
}

impl Provenance {
    pub fn now() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            frame_sign: crate::pulse::FRAME_SIGN,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub task: SweepTask,
    pub observables: Vec<String>,
    pub points: Vec<PointAggregate>,
    /// Raw samples pooled over realizations (spacings experiments only).
    #[serde(skip)]
    pub pooled: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl SweepResult {
    /// JSON of everything except the timestamp.
    pub fn payload(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or(serde_json::Value::Null);
        if let Some(p) = v.get_mut("provenance").and_then(|p| p.as_object_mut()) {
            p.remove("timestamp");
        }
        v
    }

    /// Bitwise equality of results, ignoring the timestamp and worker count.
    pub fn same_payload(&self, other: &SweepResult) -> bool {
        let strip = |r: &SweepResult| {
            let mut v = r.payload();
            if let Some(t) = v.get_mut("task").and_then(|t| t.as_object_mut()) {
                t.remove("workers");
            }
            v.to_string()
        };
        let bits = |r: &SweepResult| -> Vec<Vec<u64>> {
            r.pooled
                .iter()
                .map(|p| p.iter().map(|x| x.to_bits()).collect())
                .collect()
        };
        strip(self) == strip(other) && bits(self) == bits(other)
    }
}

/// Runs every cell of `task` on `task.workers()` threads.
///
/// Couplings of the `nn-constant` kind do not depend on the seed, so such
/// tasks evaluate one cell per grid point and repeat it for each realization.
pub fn run_sweep(task: &SweepTask) -> Result<SweepResult> {
    let distinct = if task.coupling.kind().is_random() {
        task.realizations
    } else {
        1
    };
    let cells: Vec<(usize, usize)> = (0..task.grid.len())
        .flat_map(|g| (0..distinct).map(move |r| (g, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(task.workers)
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<std::result::Result<CellOutput, String>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(g, r)| task.run_cell(g, r).map_err(|e| e.to_string()))
            .collect()
    });

    let total = task.grid.len() * task.realizations;
    let failed = outcomes.iter().filter(|o| o.is_err()).count() * (task.realizations / distinct);
    if failed as f64 > MAX_FAILED_FRACTION * total as f64 {
        let first = outcomes
            .iter()
            .find_map(|o| o.as_ref().err())
            .cloned()
            .unwrap_or_default();
        return Err(Error::Numeric(format!(
            "{failed} of {total} sweep cells failed (first: {first})"
        )));
    }

    let observables = task.kind.observables();
    let mut points = Vec::with_capacity(task.grid.len());
    let mut pooled = Vec::with_capacity(task.grid.len());
    for (g, &value) in task.grid.iter().enumerate() {
        let mut per_obs: Vec<Vec<f64>> = vec![Vec::new(); observables.len()];
        let mut samples = Vec::new();
        let mut failures = Vec::new();
        for r in 0..task.realizations {
            match &outcomes[g * distinct + r % distinct] {
                Ok(out) => {
                    for (col, v) in per_obs.iter_mut().zip(&out.values) {
                        col.push(*v);
                    }
                    samples.extend_from_slice(&out.samples);
                }
                Err(message) => failures.push(CellFailure {
                    realization: r,
                    message: message.clone(),
                }),
            }
        }
        let count = per_obs[0].len();
        let agg = |f: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
            per_obs
                .iter()
                .map(|c| if c.is_empty() { f64::NAN } else { f(c) })
                .collect()
        };
        points.push(PointAggregate {
            value,
            mean: agg(&mean),
            stderr: agg(&|c| sample_std(c) / (c.len() as f64).sqrt()),
            median: agg(&median),
            count,
            failures,
        });
        pooled.push(samples);
    }
    Ok(SweepResult {
        task: task.clone(),
        observables: observables.iter().map(|s| s.to_string()).collect(),
        points,
        pooled,
        provenance: Provenance::now(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::CouplingKind;
    use std::collections::HashSet;

    #[test]
    fn seeds_are_deterministic_and_ordered() {
        assert_eq!(derive_stream_seed(5, 2, 3), derive_stream_seed(5, 2, 3));
        assert_ne!(derive_stream_seed(5, 2, 3), derive_stream_seed(5, 3, 2));
        assert_ne!(derive_stream_seed(5, 0, 0), derive_stream_seed(6, 0, 0));
    }

    #[test]
    fn no_collisions_across_realization_index() {
        let mut m = 0x1234_5678_9ABC_DEF0u64;
        for _ in 0..1_000_000 {
            m = mix(m.wrapping_add(1));
            assert_ne!(derive_stream_seed(m, 0, 0), derive_stream_seed(m, 0, 1));
        }
    }

    #[test]
    fn transposed_indices_differ() {
        let mut seen = HashSet::new();
        for i in 0..1000 {
            for j in 0..1000 {
                if i != j {
                    assert_ne!(derive_stream_seed(99, i, j), derive_stream_seed(99, j, i));
                }
                assert!(seen.insert(derive_stream_seed(99, i, j)));
            }
        }
    }

    fn bands_task(kind: CouplingKind, realizations: usize, workers: usize) -> SweepTask {
        let seed = kind.is_random().then_some(1);
        SweepTask::new(
            ExperimentKind::Bands,
            ChainSpec::centered(4, 0.5, 1.0).unwrap(),
            CouplingSpec::new(kind, 0.3, seed).unwrap(),
            GridAxis::Omega,
            vec![0.05, 0.2, 1.0],
            realizations,
            42,
            workers,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_kind_single_realization() {
        let r = run_sweep(&bands_task(CouplingKind::NnConstant, 1, 1)).unwrap();
        for p in &r.points {
            assert_eq!(p.count, 1);
            assert!(p.stderr.iter().all(|s| *s == 0.0));
            assert_eq!(p.mean, p.median);
        }
    }

    #[test]
    fn worker_count_does_not_change_payload() {
        let a = run_sweep(&bands_task(CouplingKind::AllRandom, 6, 1)).unwrap();
        let b = run_sweep(&bands_task(CouplingKind::AllRandom, 6, 4)).unwrap();
        assert!(a.same_payload(&b));
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn invalid_tasks_rejected() {
        let spec = ChainSpec::centered(4, 1.0, 1.0).unwrap();
        let cs = CouplingSpec::constant(1.0).unwrap();
        let mk = |grid: Vec<f64>, r| {
            SweepTask::new(ExperimentKind::Bands, spec, cs, GridAxis::J, grid, r, 0, 1)
        };
        assert!(mk(vec![], 1).is_err());
        assert!(mk(vec![1.0, 1.0], 1).is_err());
        assert!(mk(vec![1.0, 3.0, 2.0], 1).is_err());
        assert!(mk(vec![1.0], 0).is_err());
        assert!(mk(vec![3.0, 2.0], 1).is_ok());
        let pulse = SweepTask::new(
            ExperimentKind::PulseScan,
            spec,
            cs,
            GridAxis::Omega,
            vec![0.0, 1.0],
            1,
            0,
            1,
        );
        assert!(pulse.is_err());
    }

    #[test]
    fn failures_abort_above_threshold() {
        // two qubits leave too few levels to unfold in every cell
        let task = SweepTask::new(
            ExperimentKind::Spacings,
            ChainSpec::centered(2, 1.0, 1.0).unwrap(),
            CouplingSpec::constant(1.0).unwrap(),
            GridAxis::J,
            vec![1.0],
            3,
            0,
            1,
        )
        .unwrap();
        let err = run_sweep(&task).unwrap_err();
        assert!(err.to_string().contains("3 of 3"), "{err}");
    }
}
