//! Phase-diagram data over `(L, λ)`: LDLR norm of the cyclic model,
//! spectral detection power and the two analytic threshold markers.

use gsynch_core::detect::DetectorConfig;
use gsynch_core::ldlr::{ldlr_from_moments, moments_enumeration, moments_sequential, Arithmetic, Budget, Method};
use gsynch_core::models::ModelSpec;
use gsynch_core::rng::derive_seed;
use gsynch_core::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::DegreeRule;
use crate::error::Result;
use crate::report::ResultRow;

/// `√(2(L−1) log(L−1) / (L(L−2)))` for `L > 2`; 1 for `L = 2`.
pub fn marker_lower(l: usize) -> Option<f64> {
    match l {
        0 | 1 => None,
        2 => Some(1.0),
        _ => {
            let lf = l as f64;
            Some((2.0 * (lf - 1.0) * (lf - 1.0).ln() / (lf * (lf - 2.0))).sqrt())
        }
    }
}

/// `√(4 log L / (L−1))` for `L ≥ 2`.
pub fn marker_upper(l: usize) -> Option<f64> {
    (l >= 2).then(|| {
        let lf = l as f64;
        (4.0 * lf.ln() / (lf - 1.0)).sqrt()
    })
}

/// Smallest `L ≥ 2` with `marker_upper(L) < 1`, searching up to `max_l`.
pub fn first_upper_below_one(max_l: usize) -> Option<usize> {
    (2..=max_l).find(|&l| marker_upper(l).is_some_and(|u| u < 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseParams {
    #[serde(rename = "L")]
    pub l_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub n: usize,
    #[serde(rename = "D")]
    pub degree: DegreeRule,
    /// Detection trials per grid point; 0 skips the power columns.
    pub trials: usize,
    pub calib_trials: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl PhaseParams {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("params serialize");
        Sha256::digest(&bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// One row per `(L, λ)`, in grid order.
pub fn phase_diagram(p: &PhaseParams, budget: &Budget) -> Result<Vec<ResultRow>> {
    if p.l_grid.is_empty() {
        return Err(crate::Error::config("L", "grid is empty"));
    }
    if p.lambda_grid.is_empty() {
        return Err(crate::Error::config("lambda", "grid is empty"));
    }
    let hash = p.hash();
    let d = p.degree.degree(p.n);
    let per_l: Vec<Result<Vec<ResultRow>>> = p
        .l_grid
        .par_iter()
        .map(|&l| {
            let (table, method) = match moments_enumeration(l, p.n, d, Arithmetic::Float, budget) {
                Ok(t) => (Some(t), Method::ExactMultinomial.name()),
                Err(CoreError::ResourceLimit { .. }) => match moments_sequential(l, p.n, d, Arithmetic::Float, budget) {
                    Ok(t) => (Some(t), Method::SequentialBinomial.name()),
                    Err(CoreError::ResourceLimit { .. }) => (None, "resource-limit"),
                    Err(e) => return Err(e.into()),
                },
                Err(e) => return Err(e.into()),
            };
            let power = if p.trials > 0 && l >= 2 {
                let cfg = DetectorConfig {
                    alpha: p.alpha,
                    trials: p.calib_trials,
                    ..DetectorConfig::default()
                };
                let model = ModelSpec::Cyclic { l, lambdas: vec![0.0] };
                Some(crate::pool::power_curve(&model, p.n, &p.lambda_grid, p.trials, 0, &cfg, derive_seed(p.seed, l as u64))?)
            } else {
                None
            };
            let mut rows = Vec::with_capacity(p.lambda_grid.len());
            for (i, &lam) in p.lambda_grid.iter().enumerate() {
                let cumulative = match &table {
                    Some(t) => Some(ldlr_from_moments(t, lam, Method::ExactMultinomial, String::new())?.cumulative()),
                    None => None,
                };
                let mut row = ResultRow::new(&hash, p.seed)
                    .set("L", l)
                    .set("lambda", lam)
                    .set("n", p.n)
                    .set("D", d)
                    .set("ldlr_method", method)
                    .set("ldlr_cumulative", fmt_opt(cumulative));
                row = match &power {
                    Some(s) => {
                        let r = &s.table.rows[i].power;
                        row.set("threshold", s.table.threshold)
                            .set("power", r.rate)
                            .set("power_lo", r.lo)
                            .set("power_hi", r.hi)
                    }
                    None => row.set("threshold", "").set("power", "").set("power_lo", "").set("power_hi", ""),
                };
                let ub = marker_upper(l);
                rows.push(
                    row.set("marker_lb", fmt_opt(marker_lower(l)))
                        .set("marker_ub", fmt_opt(ub))
                        .set("ub_below_one", ub.is_some_and(|u| u < 1.0)),
                );
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_l {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markers() {
        assert_eq!(first_upper_below_one(100), Some(11));
        assert!(marker_upper(10).unwrap() > 1.0);
        assert!((marker_upper(11).unwrap() - 0.979_366).abs() < 1e-6);
        assert!((marker_lower(3).unwrap() - (4.0 * 2f64.ln() / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(marker_lower(2), Some(1.0));
        assert_eq!(marker_lower(1), None);
    }

    #[test]
    fn small_diagram() {
        let p = PhaseParams {
            l_grid: vec![2, 3],
            lambda_grid: vec![0.5, 1.5],
            n: 30,
            degree: DegreeRule::Fixed(3),
            trials: 0,
            calib_trials: 50,
            alpha: 0.05,
            seed: 1,
        };
        let rows = phase_diagram(&p, &Budget::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].get("L"), Some("2"));
        assert_eq!(rows[3].get("lambda"), Some("1.5"));
        let lo: f64 = rows[2].get("ldlr_cumulative").unwrap().parse().unwrap();
        let hi: f64 = rows[3].get("ldlr_cumulative").unwrap().parse().unwrap();
        assert!(hi > lo);
        assert_eq!(rows[0].get("power"), Some(""));
    }
}
