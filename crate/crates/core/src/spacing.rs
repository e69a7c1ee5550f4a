//! Unfolding and nearest-neighbour spacing statistics.
//!
//! Reference laws are the Poisson density `e^{-s}` (uncorrelated levels) and
//! the GOE Wigner surmise `(π/2) s e^{-πs²/4}` (level repulsion).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bands::{band_partition, DEFAULT_GAP_FACTOR};
use crate::error::{Error, Result};
use crate::numeric::LegendreFit;

pub const DEFAULT_UNFOLD_DEGREE: usize = 7;
pub const DEFAULT_TRIM: f64 = 0.1;
/// Minimum number of levels left after trimming.
pub const MIN_UNFOLD_LEVELS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingModel {
    Poisson,
    WignerDyson,
}

impl SpacingModel {
    pub fn density(self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match self {
            SpacingModel::Poisson => (-s).exp(),
            SpacingModel::WignerDyson => 0.5 * PI * s * (-0.25 * PI * s * s).exp(),
        }
    }

    pub fn cdf(self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            SpacingModel::Poisson => -(-s).exp_m1(),
            SpacingModel::WignerDyson => -(-0.25 * PI * s * s).exp_m1(),
        }
    }

    /// Inverse CDF, for `u` in `[0, 1)`.
    pub fn quantile(self, u: f64) -> f64 {
        let tail = -(-u).ln_1p();
        match self {
            SpacingModel::Poisson => tail,
            SpacingModel::WignerDyson => (4.0 * tail / PI).sqrt(),
        }
    }
}

impl FromStr for SpacingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson" => Ok(SpacingModel::Poisson),
            "wigner-dyson" | "wd" | "goe" => Ok(SpacingModel::WignerDyson),
            other => Err(Error::arg(format!("unknown spacing model `{other}`"))),
        }
    }
}

impl fmt::Display for SpacingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpacingModel::Poisson => "poisson",
            SpacingModel::WignerDyson => "wigner-dyson",
        })
    }
}

pub fn reference_density(model: SpacingModel, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::arg(format!("spacing must be >= 0, got {s}")));
    }
    Ok(model.density(s))
}

/// Maps sorted levels to a unit-mean-spacing scale by fitting the cumulative
/// level count with a polynomial of `degree`, dropping a fraction `trim` of
/// levels at each edge. The output is made nondecreasing.
pub fn unfold(values: &[f64], degree: usize, trim: f64) -> Result<Vec<f64>> {
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::arg(format!(
            "trim fraction must lie in [0, 0.5), got {trim}"
        )));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::arg("levels must be sorted ascending"));
    }
    let n = values.len();
    let cut = (trim * n as f64).floor() as usize;
    let kept = n.saturating_sub(2 * cut);
    if kept < MIN_UNFOLD_LEVELS {
        return Err(Error::Statistics(format!(
            "unfolding needs at least {MIN_UNFOLD_LEVELS} levels after trimming, got {kept}"
        )));
    }
    let staircase: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
    let fit = LegendreFit::fit(values, &staircase, degree)?;
    let mut out: Vec<f64> = values[cut..n - cut].iter().map(|&e| fit.eval(e)).collect();
    for i in 1..out.len() {
        if out[i] < out[i - 1] {
            out[i] = out[i - 1];
        }
    }
    Ok(out)
}

/// How a raw spectrum is turned into spacings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpacingOptions {
    pub degree: usize,
    pub trim: f64,
    /// Unfold each gap-separated band on its own and pool the spacings.
    pub per_band: bool,
    pub gap_factor: f64,
    pub bins: usize,
    pub s_max: f64,
}

impl Default for SpacingOptions {
    fn default() -> Self {
        Self {
            degree: DEFAULT_UNFOLD_DEGREE,
            trim: DEFAULT_TRIM,
            per_band: false,
            gap_factor: DEFAULT_GAP_FACTOR,
            bins: 40,
            s_max: 4.0,
        }
    }
}

/// Unfolded spacings of sorted `values`. In per-band mode bands too small to
/// unfold are skipped; it is an error if none remains.
pub fn level_spacings(values: &[f64], opts: &SpacingOptions) -> Result<Vec<f64>> {
    if !opts.per_band {
        return spacings(&unfold(values, opts.degree, opts.trim)?);
    }
    let mut out = Vec::new();
    for r in band_partition(values, opts.gap_factor)?.ranges() {
        match unfold(&values[r.clone()], opts.degree, opts.trim) {
            Ok(u) => out.extend(spacings(&u)?),
            Err(Error::Statistics(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::Statistics(
            "no band has enough levels to unfold".into(),
        ));
    }
    Ok(out)
}

/// Consecutive differences of (unfolded) levels.
pub fn spacings(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::Statistics(
            "spacings need at least two levels".into(),
        ));
    }
    Ok(levels.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance_with(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Statistics("KS distance of an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    Ok(d)
}

pub fn ks_distance(samples: &[f64], model: SpacingModel) -> Result<f64> {
    ks_distance_with(samples, |s| model.cdf(s))
}

/// Binned `P(s)` over `[0, s_max)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub densities: Vec<f64>,
    pub sample_count: usize,
    /// Samples at or beyond the last edge.
    pub overflow: usize,
    pub mean_spacing: f64,
}

impl SpacingHistogram {
    pub fn new(samples: &[f64], bins: usize, s_max: f64) -> Result<Self> {
        if bins == 0 || !(s_max > 0.0) {
            return Err(Error::arg("histogram needs bins > 0 and s_max > 0"));
        }
        if samples.is_empty() {
            return Err(Error::Statistics("histogram of an empty sample".into()));
        }
        let width = s_max / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        let mut overflow = 0;
        for &s in samples {
            if s < 0.0 {
                return Err(Error::arg(format!("negative spacing {s}")));
            }
            let b = (s / width) as usize;
            if b < bins {
                counts[b] += 1;
            } else {
                overflow += 1;
            }
        }
        let inside = (samples.len() - overflow) as f64;
        let densities = counts
            .iter()
            .map(|&c| {
                if inside > 0.0 {
                    c as f64 / (inside * width)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            edges,
            counts,
            densities,
            sample_count: samples.len(),
            overflow,
            mean_spacing: samples.iter().sum::<f64>() / samples.len() as f64,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn integral(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }
}
