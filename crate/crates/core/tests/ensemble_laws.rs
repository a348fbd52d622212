//! Entry laws of the noise ensembles, checked with a Kolmogorov-Smirnov test.

use gsynch_core::ensembles::{sample, Ensemble, EnsembleKind};
use statrs::distribution::{ContinuousCDF, Normal};

/// Asymptotic critical value of `√N·D` at level 0.01.
const KS_CRIT_01: f64 = 1.628;

fn ks_statistic(mut xs: Vec<f64>, law: &Normal) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Real parts of the strictly upper off-diagonal entries, at least 10⁴.
fn off_diagonal_real_parts(e: Ensemble, seed: u64) -> Vec<f64> {
    let n = 150;
    let m = sample(EnsembleKind::new(e, n).unwrap(), seed).entries;
    let dim = m.dim();
    let mut xs = Vec::new();
    for j in 0..dim {
        for i in 0..j {
            // Inside a GSE 2x2 block the off-diagonal pair is not independent
            // of its mirror; only take entries from distinct blocks.
            if e == Ensemble::Gse && i / 2 == j / 2 {
                continue;
            }
            xs.push(m.get(i, j).re);
        }
    }
    assert!(xs.len() >= 10_000, "{}", xs.len());
    xs.truncate(10_000);
    xs
}

/// One rerun with a fresh seed is allowed before the test fails.
fn passes_ks(e: Ensemble, sd: f64) -> bool {
    let law = Normal::new(0.0, sd).unwrap();
    (0..2u64).any(|attempt| {
        let xs = off_diagonal_real_parts(e, 1000 + attempt);
        ks_statistic(xs, &law) * 100.0 < KS_CRIT_01
    })
}

#[test]
fn goe_off_diagonal_is_standard_normal() {
    assert!(passes_ks(Ensemble::Goe, 1.0));
}

#[test]
fn gue_off_diagonal_real_part_has_variance_half() {
    assert!(passes_ks(Ensemble::Gue, std::f64::consts::FRAC_1_SQRT_2));
}

#[test]
fn gse_off_diagonal_real_part_has_variance_quarter() {
    assert!(passes_ks(Ensemble::Gse, 0.5));
}

#[test]
fn ks_rejects_the_wrong_scale() {
    let law = Normal::new(0.0, 1.3).unwrap();
    assert!(ks_statistic(off_diagonal_real_parts(Ensemble::Goe, 1), &law) * 100.0 > KS_CRIT_01);
}
