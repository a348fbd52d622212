//! Parallel drivers over independent trials. Every trial's seed is derived
//! from its index, and results are collected in index order, so the output
//! matches the sequential routines in `gsynch_core::detect` bit for bit.

use gsynch_core::detect::{
    calibration_seed, power_seed, statistic, threshold_from_null, type1_seed, DetectorConfig, PowerRow, PowerTable,
    Rate,
};
use gsynch_core::ensembles::McEstimate;
use gsynch_core::models::ModelSpec;
use rayon::prelude::*;

use crate::error::Result;

fn statistics(model: &ModelSpec, n: usize, config: &DetectorConfig, seeds: impl Fn(usize) -> u64 + Sync, trials: usize) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|t| statistic(model, n, seeds(t), config).map_err(Into::into))
        .collect()
}

pub fn null_statistics(model: &ModelSpec, n: usize, config: &DetectorConfig, seed: u64) -> Result<Vec<f64>> {
    config.validate()?;
    statistics(&model.with_lambda(0.0), n, config, |t| calibration_seed(seed, t), config.trials)
}

pub fn calibrate_threshold(model: &ModelSpec, n: usize, config: &DetectorConfig, seed: u64) -> Result<f64> {
    Ok(threshold_from_null(&null_statistics(model, n, config, seed)?, config.alpha)?)
}

/// Power table plus the mean statistic at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweep {
    pub table: PowerTable,
    pub mean_statistic: Vec<McEstimate>,
}

/// Same seeds and threshold rule as `gsynch_core::detect::power_curve`.
pub fn power_curve(
    model: &ModelSpec,
    n: usize,
    grid: &[f64],
    trials: usize,
    null_trials: usize,
    config: &DetectorConfig,
    seed: u64,
) -> Result<PowerSweep> {
    if grid.is_empty() {
        return Err(crate::Error::config("lambda", "empty λ grid"));
    }
    if trials == 0 {
        return Err(crate::Error::config("trials", "need at least one trial"));
    }
    let threshold = calibrate_threshold(model, n, config, seed)?;
    let type1 = if null_trials > 0 {
        let s = statistics(&model.with_lambda(0.0), n, config, |t| type1_seed(seed, t), null_trials)?;
        Some(Rate::new(s.iter().filter(|&&x| x > threshold).count(), null_trials))
    } else {
        None
    };
    let mut rows = Vec::with_capacity(grid.len());
    let mut means = Vec::with_capacity(grid.len());
    for (i, &lam) in grid.iter().enumerate() {
        let s = statistics(&model.with_lambda(lam), n, config, |t| power_seed(seed, i, t), trials)?;
        rows.push(PowerRow {
            lambda: lam,
            power: Rate::new(s.iter().filter(|&&x| x > threshold).count(), trials),
        });
        means.push(McEstimate::from_samples(&s));
    }
    Ok(PowerSweep {
        table: PowerTable {
            n,
            threshold,
            type1,
            rows,
        },
        mean_statistic: means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_sequential_driver() {
        let m = ModelSpec::Cyclic { l: 3, lambdas: vec![0.0] };
        let cfg = DetectorConfig {
            trials: 50,
            ..DetectorConfig::default()
        };
        let par = power_curve(&m, 40, &[0.5, 2.5], 12, 8, &cfg, 5).unwrap();
        let seq = gsynch_core::detect::power_curve(&m, 40, &[0.5, 2.5], 12, 8, &cfg, 5).unwrap();
        assert_eq!(par.table, seq);
        assert_eq!(par.mean_statistic.len(), 2);
    }
}
