//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{load_raw, Aggregate, RawConfig, RunConfig};
use crate::eigenstates::{
    central_window, component_moments, estimate_border, participation_ratio, sample_moments,
    shannon_components,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_rotating, predicted_border, sample_couplings, CouplingKind};
use crate::output::{write_table, Format, Table};
use crate::pulse::{run_pulse, EvolutionMethod, PulseDuration, PulsePoint, PulseScan};
use crate::spacing::{ks_distance, SpacingHistogram, SpacingModel};
use crate::spectrum::{diagonalize, eigenvalues};
use crate::sweep::{
    run_sweep, ExperimentKind, GridAxis, PointAggregate, Provenance, SweepOptions, SweepResult,
    SweepTask,
};

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "ISING_CHAOS_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "ising-chaos",
    version,
    about = "Chaos diagnostics and pulse errors for a driven Ising qubit chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the rotating-frame Hamiltonian.
    Spectrum,
    /// Histogram of unfolded nearest-neighbour spacings, pooled over realizations.
    Spacings,
    /// Per-eigenstate participation ratio and component moments.
    Eigenstates,
    /// Mean participation ratio against the coupling scale.
    ChaosScan,
    /// Band overlap measures over a grid.
    Bands,
    /// One pulse from the all-up state and its error metrics.
    Pulse,
    /// Pulse errors over a grid of Rabi frequencies, with fitted slopes.
    PulseScan,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Spacings => "spacings",
            Command::Eigenstates => "eigenstates",
            Command::ChaosScan => "chaos-scan",
            Command::Bands => "bands",
            Command::Pulse => "pulse",
            Command::PulseScan => "pulse-scan",
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub qubits: Option<usize>,
    /// Field gradient a (ω_k = a k).
    #[arg(long, global = true)]
    pub gradient: Option<f64>,
    /// Rabi frequency Ω.
    #[arg(long, global = true)]
    pub rabi: Option<f64>,
    /// Drive frequency ν.
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    /// Drive phase φ.
    #[arg(long, global = true)]
    pub phase: Option<f64>,
    /// nn-constant, nn-random or all-random.
    #[arg(long, global = true)]
    pub coupling: Option<CouplingKind>,
    /// Coupling scale J.
    #[arg(long, global = true)]
    pub j: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Grid values: `v1,v2,...`, `log:lo:hi:n` or `lin:lo:hi:n`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// spectral or stepped.
    #[arg(long, global = true)]
    pub method: Option<EvolutionMethod>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// pi/2omega, pi/omega or a number.
    #[arg(long, global = true)]
    pub duration: Option<PulseDuration>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    pub format: Format,
}

/// Parses `log:lo:hi:n`, `lin:lo:hi:n` or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::arg(format!("cannot parse grid `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [kind @ ("log" | "lin"), lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            if n == 1 {
                return Ok(vec![lo]);
            }
            let f = |i: usize| i as f64 / (n - 1) as f64;
            if *kind == "log" {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(Error::arg("log grid bounds must be > 0"));
                }
                Ok((0..n)
                    .map(|i| (lo.ln() + f(i) * (hi / lo).ln()).exp())
                    .collect())
            } else {
                Ok((0..n).map(|i| lo + f(i) * (hi - lo)).collect())
            }
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

impl CommonArgs {
    /// Applies flags and the worker override on top of `raw`.
    pub fn overlay(&self, raw: &mut RawConfig, env_workers: Option<usize>) -> Result<()> {
        let c = &mut raw.chain;
        c.qubits = self.qubits.or(c.qubits);
        c.gradient = self.gradient.or(c.gradient);
        c.rabi = self.rabi.or(c.rabi);
        c.nu = self.nu.or(c.nu);
        c.phase = self.phase.or(c.phase);
        let cp = &mut raw.coupling;
        cp.kind = self.coupling.or(cp.kind);
        cp.j = self.j.or(cp.j);
        cp.seed = self.seed.or(cp.seed);
        let sw = &mut raw.sweep;
        sw.realizations = self.realizations.or(sw.realizations);
        sw.workers = self.workers.or(env_workers).or(sw.workers);
        if let Some(g) = &self.grid {
            sw.grid = Some(parse_grid(g)?);
        }
        let ev = &mut raw.evolution;
        ev.method = self.method.or(ev.method);
        ev.dt = self.dt.or(ev.dt);
        ev.duration = self.duration.or(ev.duration);
        Ok(())
    }
}

fn env_workers() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Error::arg(format!(
                "{WORKERS_ENV} must be a positive integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(None),
    }
}

fn provenance(cfg: &RunConfig, command: &str, summary: serde_json::Value) -> serde_json::Value {
    let p = Provenance::now();
    json!({
        "command": command,
        "version": p.version,
        "timestamp": p.timestamp,
        "frame_sign": p.frame_sign,
        "config": cfg,
        "master_seed": cfg.master_seed(),
        "summary": summary,
    })
}

fn central(p: &PointAggregate, obs: usize, how: Aggregate) -> f64 {
    match how {
        Aggregate::Mean => p.mean[obs],
        Aggregate::Median => p.median[obs],
    }
}

fn sweep_task(
    cfg: &RunConfig,
    kind: ExperimentKind,
    axis: GridAxis,
    grid: Vec<f64>,
) -> Result<SweepTask> {
    Ok(SweepTask::new(
        kind,
        cfg.chain,
        cfg.coupling,
        axis,
        grid,
        cfg.sweep.realizations,
        cfg.master_seed(),
        cfg.sweep.workers,
    )?
    .with_options(SweepOptions {
        spacing: cfg.stats,
        border: cfg.eigenstates,
        evolution: cfg.evolution,
        metrics: cfg.metrics,
    }))
}

fn failures_summary(res: &SweepResult) -> serde_json::Value {
    let list: Vec<_> = res
        .points
        .iter()
        .flat_map(|p| p.failures.iter().map(move |f| json!({"grid_value": p.value, "realization": f.realization, "message": f.message})))
        .collect();
    json!(list)
}

fn report_failures(res: &SweepResult) {
    for p in &res.points {
        for f in &p.failures {
            eprintln!(
                "warning: cell at {} realization {} failed: {}",
                p.value, f.realization, f.message
            );
        }
    }
}

fn run_spectrum(cfg: &RunConfig) -> Result<Table> {
    let cm = sample_couplings(&cfg.coupling, cfg.chain.qubits())?;
    let values = eigenvalues(&build_rotating(&cfg.chain, &cm)?)?;
    let mut t = Table::new("spectrum", &["index", "eigenvalue"]);
    for (i, v) in values.iter().enumerate() {
        t.push(vec![i.into(), (*v).into()]);
    }
    t.provenance = provenance(cfg, "spectrum", json!({"dim": values.len()}));
    Ok(t)
}

fn run_spacings(cfg: &RunConfig) -> Result<Table> {
    let task = sweep_task(
        cfg,
        ExperimentKind::Spacings,
        GridAxis::J,
        vec![cfg.coupling.scale()],
    )?;
    let res = run_sweep(&task)?;
    report_failures(&res);
    let pooled = &res.pooled[0];
    let h = SpacingHistogram::new(pooled, cfg.stats.bins, cfg.stats.s_max)?;
    let mut t = Table::new("spacings", &["s_bin_lo", "s_bin_hi", "density", "count"]);
    for i in 0..h.counts.len() {
        t.push(vec![
            h.edges[i].into(),
            h.edges[i + 1].into(),
            h.densities[i].into(),
            (h.counts[i] as usize).into(),
        ]);
    }
    let ks_p = ks_distance(pooled, SpacingModel::Poisson)?;
    let ks_w = ks_distance(pooled, SpacingModel::WignerDyson)?;
    eprintln!(
        "KS distance: poisson {ks_p:.4}, wigner-dyson {ks_w:.4} over {} spacings",
        pooled.len()
    );
    t.provenance = provenance(
        cfg,
        "spacings",
        json!({
            "ks_poisson": ks_p,
            "ks_wigner_dyson": ks_w,
            "sample_count": h.sample_count,
            "overflow": h.overflow,
            "mean_spacing": h.mean_spacing,
            "per_realization": res.points[0],
            "failures": failures_summary(&res),
        }),
    );
    Ok(t)
}

fn run_eigenstates(cfg: &RunConfig) -> Result<Table> {
    let cm = sample_couplings(&cfg.coupling, cfg.chain.qubits())?;
    let sp = diagonalize(&build_rotating(&cfg.chain, &cm)?)?;
    let mut t = Table::new(
        "eigenstates",
        &[
            "index",
            "eigenvalue",
            "participation_ratio",
            "shannon",
            "variance",
            "excess_kurtosis",
        ],
    );
    let mut prs = Vec::with_capacity(sp.dim());
    for i in 0..sp.dim() {
        let pr = participation_ratio(sp.vector(i))?;
        let (var, kurt) = sample_moments(&sp.real_components(i));
        prs.push(pr);
        t.push(vec![
            i.into(),
            sp.values()[i].into(),
            pr.into(),
            shannon_components(sp.vector(i))?.into(),
            var.into(),
            kurt.into(),
        ]);
    }
    let window = central_window(sp.dim(), cfg.eigenstates.window)?;
    let mean_pr = prs[window.clone()].iter().sum::<f64>() / window.len() as f64;
    let kurtosis = component_moments(&sp, cfg.eigenstates.window)
        .ok()
        .map(|m| m.aggregate_kurtosis);
    let predicted = predicted_border(&cfg.chain).ok();
    t.provenance = provenance(
        cfg,
        "eigenstates",
        json!({
            "window": [window.start, window.end],
            "mean_pr": mean_pr,
            "aggregate_kurtosis": kurtosis,
            "predicted_jcr": predicted,
        }),
    );
    Ok(t)
}

fn run_chaos_scan(cfg: &RunConfig) -> Result<Table> {
    let predicted = predicted_border(&cfg.chain)?;
    let grid = match &cfg.sweep.grid {
        Some(g) => g.clone(),
        None => parse_grid("log:0.1:10:13")?,
    };
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::constraint(
            "sweep.grid",
            "chaos-scan needs an increasing grid",
        ));
    }
    let task = sweep_task(cfg, ExperimentKind::BorderScan, GridAxis::J, grid.clone())?;
    let res = run_sweep(&task)?;
    report_failures(&res);
    let values: Vec<f64> = res
        .points
        .iter()
        .map(|p| central(p, 0, cfg.sweep.aggregate))
        .collect();
    let border = estimate_border(&grid, &values, cfg.eigenstates.factor);
    let mut t = Table::new(
        "chaos-scan",
        &["J", "mean_pr", "stderr_pr", "predicted_jcr", "realizations"],
    );
    for (p, v) in res.points.iter().zip(&values) {
        t.push(vec![
            p.value.into(),
            (*v).into(),
            p.stderr[0].into(),
            predicted.into(),
            p.count.into(),
        ]);
    }
    match border {
        Some(b) => eprintln!("estimated border J = {b} (predicted {predicted})"),
        None => eprintln!("no border found on the grid (predicted {predicted})"),
    }
    t.provenance = provenance(
        cfg,
        "chaos-scan",
        json!({
            "estimated_border": border,
            "predicted_jcr": predicted,
            "aggregate": cfg.sweep.aggregate,
            "failures": failures_summary(&res),
        }),
    );
    Ok(t)
}

fn run_bands(cfg: &RunConfig) -> Result<Table> {
    let axis = cfg.sweep.axis.unwrap_or(GridAxis::Omega);
    let grid = match (&cfg.sweep.grid, axis) {
        (Some(g), _) => g.clone(),
        (None, GridAxis::Omega) => vec![cfg.chain.rabi()],
        (None, GridAxis::J) => vec![cfg.coupling.scale()],
    };
    let task = sweep_task(cfg, ExperimentKind::Bands, axis, grid)?;
    let res = run_sweep(&task)?;
    report_failures(&res);
    let name = axis.to_string();
    let mut t = Table::new("bands", &[name.as_str(), "band_overlap", "band_merge"]);
    for p in &res.points {
        let agg = cfg.sweep.aggregate;
        t.push(vec![
            p.value.into(),
            central(p, 0, agg).into(),
            central(p, 1, agg).into(),
        ]);
    }
    t.provenance = provenance(
        cfg,
        "bands",
        json!({"aggregate": cfg.sweep.aggregate, "failures": failures_summary(&res)}),
    );
    Ok(t)
}

const PULSE_COLUMNS: [&str; 5] = ["omega", "eta", "phi", "band_overlap", "duration"];

fn run_single_pulse(cfg: &RunConfig) -> Result<Table> {
    let cm = sample_couplings(&cfg.coupling, cfg.chain.qubits())?;
    let out = run_pulse(&cfg.chain, &cm, &cfg.evolution, &cfg.metrics)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let mut t = Table::new("pulse", &PULSE_COLUMNS);
    t.push(vec![
        out.omega.into(),
        out.metrics.eta.into(),
        out.metrics.phi.into(),
        out.band_overlap.into(),
        out.duration.into(),
    ]);
    t.provenance = provenance(
        cfg,
        "pulse",
        json!({
            "metrics": out.metrics,
            "other_frame": out.other_frame,
            "frame": cfg.metrics.frame,
            "warnings": out.warnings,
        }),
    );
    Ok(t)
}

fn run_pulse_scan(cfg: &RunConfig) -> Result<Table> {
    let grid = match &cfg.sweep.grid {
        Some(g) => g.clone(),
        None => parse_grid("log:0.5:8:9")?,
    };
    let task = sweep_task(cfg, ExperimentKind::PulseScan, GridAxis::Omega, grid)?;
    let res = run_sweep(&task)?;
    report_failures(&res);
    let agg = cfg.sweep.aggregate;
    let points: Vec<PulsePoint> = res
        .points
        .iter()
        .map(|p| PulsePoint {
            omega: p.value,
            eta: central(p, 0, agg),
            phi: central(p, 1, agg),
            band_overlap: central(p, 2, agg),
            duration: central(p, 3, agg),
        })
        .collect();
    let scan = PulseScan::from_points(points);
    let mut t = Table::new("pulse-scan", &PULSE_COLUMNS);
    for p in &scan.points {
        t.push(vec![
            p.omega.into(),
            p.eta.into(),
            p.phi.into(),
            p.band_overlap.into(),
            p.duration.into(),
        ]);
    }
    let fmt = |s: Option<f64>| s.map_or("absent".to_string(), |v| format!("{v:.4}"));
    eprintln!(
        "slope eta {}, slope phi {}",
        fmt(scan.eta_slope),
        fmt(scan.phi_slope)
    );
    if scan.overlap_flag {
        eprintln!("warning: some grid points have overlapping bands");
    }
    t.provenance = provenance(
        cfg,
        "pulse-scan",
        json!({
            "eta_slope": scan.eta_slope,
            "phi_slope": scan.phi_slope,
            "overlap_flag": scan.overlap_flag,
            "aggregate": agg,
            "failures": failures_summary(&res),
        }),
    );
    Ok(t)
}

/// Loads the configuration, applies flags and runs `cli.command`.
pub fn execute(cli: &Cli) -> Result<Table> {
    let mut raw = match &cli.common.config {
        Some(p) => load_raw(p)?,
        None => RawConfig::default(),
    };
    cli.common.overlay(&mut raw, env_workers()?)?;
    let cfg = raw.resolve()?;
    if cfg.evolution.method == EvolutionMethod::Stepped && matches!(cli.command, Command::PulseScan)
    {
        eprintln!("note: stepped evolution diagonalizes once per step; pulse-scan may be slow");
    }
    match cli.command {
        Command::Spectrum => run_spectrum(&cfg),
        Command::Spacings => run_spacings(&cfg),
        Command::Eigenstates => run_eigenstates(&cfg),
        Command::ChaosScan => run_chaos_scan(&cfg),
        Command::Bands => run_bands(&cfg),
        Command::Pulse => run_single_pulse(&cfg),
        Command::PulseScan => run_pulse_scan(&cfg),
    }
}

/// Entry point: returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result =
        execute(&cli).and_then(|t| write_table(&t, cli.common.format, cli.common.out.as_deref()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error ({}): {e}", cli.command.name());
            e.exit_code()
        }
    }
}
