//! Spectral detector: reject the null when the largest top eigenvalue over
//! all channels exceeds a threshold calibrated on null draws.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::linalg::{top_eigenvalue, Matrix};
use crate::models::{ModelSpec, SynchObservation};
use crate::rng::derive_seed_path;

/// How per-channel top eigenvalues are combined into one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    MaxOverFrequencies,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Significance level `α ∈ (0, 1)`.
    pub alpha: f64,
    /// Null calibration draws, at least 50.
    pub trials: usize,
    pub tol: f64,
    pub aggregation: Aggregation,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            trials: 200,
            tol: 1e-8,
            aggregation: Aggregation::MaxOverFrequencies,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("α must lie in (0, 1), got {}", self.alpha)));
        }
        if self.trials < 50 {
            return Err(invalid(format!("need at least 50 calibration trials, got {}", self.trials)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("eigen-solver tolerance must be positive"));
        }
        Ok(())
    }
}

/// `P`: planted (signal present). `Q`: null.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    P,
    Q,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::P => "p",
            Label::Q => "q",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionVerdict {
    pub label: Label,
    pub top_eigenvalues: Vec<f64>,
    pub statistic: f64,
    pub threshold: f64,
}

/// Top eigenvalue of every channel, in channel order.
pub fn channel_top_eigenvalues(obs: &SynchObservation, tol: f64) -> Result<Vec<f64>> {
    if !obs.hermitian {
        return Err(invalid(
            "observation is not Hermitian; pass it through `hermitian_part` before spectral detection",
        ));
    }
    obs.channels.iter().map(|c| top_eigenvalue(&c.matrix, tol)).collect()
}

fn aggregate(tops: &[f64], rule: Aggregation) -> f64 {
    match rule {
        Aggregation::MaxOverFrequencies => tops.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// `(Y + Y*)/√2` per channel. For a matrix with independent unit-variance
/// entries this is again a Wigner matrix with unit off-diagonal variance;
/// the spike picks up a factor `√2`.
pub fn hermitian_part(obs: &SynchObservation) -> SynchObservation {
    let mut out = obs.clone();
    let s = core::f64::consts::FRAC_1_SQRT_2;
    for c in &mut out.channels {
        c.matrix = match &c.matrix {
            Matrix::Real(m) => Matrix::Real((m + m.transpose()) * s),
            Matrix::Complex(m) => Matrix::Complex((m + m.adjoint()) * nalgebra::Complex::new(s, 0.0)),
        };
    }
    out.hermitian = true;
    out
}

/// Label `p` iff the aggregated top eigenvalue is strictly above `threshold`.
pub fn detect(obs: &SynchObservation, threshold: f64, config: &DetectorConfig) -> Result<DetectionVerdict> {
    let tops = channel_top_eigenvalues(obs, config.tol)?;
    if tops.is_empty() {
        return Err(invalid("observation has no channels"));
    }
    let statistic = aggregate(&tops, config.aggregation);
    Ok(DetectionVerdict {
        label: if statistic > threshold { Label::P } else { Label::Q },
        top_eigenvalues: tops,
        statistic,
        threshold,
    })
}

/// Seed of calibration draw `t`.
pub fn calibration_seed(seed: u64, t: usize) -> u64 {
    derive_seed_path(seed, &[0, t as u64])
}

/// Seed of trial `t` at grid point `i` of a power curve; the null rate uses
/// its own stream of trials.
pub fn power_seed(seed: u64, grid_index: usize, t: usize) -> u64 {
    derive_seed_path(seed, &[1, grid_index as u64, t as u64])
}

pub fn type1_seed(seed: u64, t: usize) -> u64 {
    derive_seed_path(seed, &[2, t as u64])
}

/// Aggregated statistic on one draw of `model` (strengths as given).
pub fn statistic(model: &ModelSpec, n: usize, seed: u64, config: &DetectorConfig) -> Result<f64> {
    let obs = model.sample(n, seed)?;
    let tops = channel_top_eigenvalues(&obs, config.tol)?;
    Ok(aggregate(&tops, config.aggregation))
}

/// `⌈(1−α)M⌉`-th smallest of `M` null statistics.
pub fn threshold_from_null(null: &[f64], alpha: f64) -> Result<f64> {
    if null.is_empty() {
        return Err(invalid("empty null sample"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("α must lie in (0, 1), got {alpha}")));
    }
    let mut v = null.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    let rank = (libm::ceil((1.0 - alpha) * m as f64 - 1e-9) as usize).clamp(1, m);
    Ok(v[rank - 1])
}

/// Null statistics for calibration draws `0..config.trials`.
pub fn null_statistics(model: &ModelSpec, n: usize, config: &DetectorConfig, seed: u64) -> Result<Vec<f64>> {
    config.validate()?;
    let null = model.with_lambda(0.0);
    (0..config.trials)
        .map(|t| statistic(&null, n, calibration_seed(seed, t), config))
        .collect()
}

/// `(1−α)` empirical quantile of the statistic with every strength set to 0.
pub fn calibrate_threshold(model: &ModelSpec, n: usize, config: &DetectorConfig, seed: u64) -> Result<f64> {
    threshold_from_null(&null_statistics(model, n, config, seed)?, config.alpha)
}

/// 95% Wilson score interval for `k` successes in `m` trials.
pub fn wilson_interval(k: usize, m: usize) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let mf = m as f64;
    let p = k as f64 / mf;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / mf;
    let centre = (p + z2 / (2.0 * mf)) / denom;
    let half = Z * libm::sqrt(p * (1.0 - p) / mf + z2 / (4.0 * mf * mf)) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub hits: usize,
    pub trials: usize,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Rate {
    pub fn new(hits: usize, trials: usize) -> Self {
        let (lo, hi) = wilson_interval(hits, trials);
        Self {
            hits,
            trials,
            rate: if trials == 0 { 0.0 } else { hits as f64 / trials as f64 },
            lo,
            hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub lambda: f64,
    pub power: Rate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerTable {
    pub n: usize,
    pub threshold: f64,
    /// Rejection rate on fresh null draws, when requested.
    pub type1: Option<Rate>,
    pub rows: Vec<PowerRow>,
}

/// Empirical power at each `λ` in `grid` from `trials` draws each, and the
/// type-I rate from `null_trials` fresh null draws (skipped when 0), against
/// a threshold calibrated with `config`.
pub fn power_curve(
    model: &ModelSpec,
    n: usize,
    grid: &[f64],
    trials: usize,
    null_trials: usize,
    config: &DetectorConfig,
    seed: u64,
) -> Result<PowerTable> {
    if grid.is_empty() {
        return Err(invalid("empty λ grid"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let threshold = calibrate_threshold(model, n, config, seed)?;
    let null = model.with_lambda(0.0);
    let mut false_alarms = 0;
    for t in 0..null_trials {
        false_alarms += (statistic(&null, n, type1_seed(seed, t), config)? > threshold) as usize;
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &lam) in grid.iter().enumerate() {
        let m = model.with_lambda(lam);
        let mut hits = 0;
        for t in 0..trials {
            hits += (statistic(&m, n, power_seed(seed, i, t), config)? > threshold) as usize;
        }
        rows.push(PowerRow {
            lambda: lam,
            power: Rate::new(hits, trials),
        });
    }
    Ok(PowerTable {
        n,
        threshold,
        type1: (null_trials > 0).then(|| Rate::new(false_alarms, null_trials)),
        rows,
    })
}
