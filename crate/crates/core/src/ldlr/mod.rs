//! Second moment of the low-degree likelihood ratio, `‖L^{≤D}‖²`.
//!
//! For the cyclic and finite-group models
//! `‖L^{≤D}‖² = Σ_{d≤D} λ^{2d}/(n^d d!) · E S_L^d`, where
//! `S_L = (L/2) Σ_ℓ (n_ℓ − n/L)²` over multinomial counts with cell
//! probability `1/L`. The moments are computed by enumerating count vectors,
//! by a sequential-binomial recursion, by enumerating signals outright, and by
//! counting index tuples; the circle model is reached through tuple counting
//! and Monte Carlo.

mod bounds;
mod md;
mod mc;
mod moments;

pub use bounds::{
    bound_polylog, bound_polylog_partial, check_clt_moment_bound, check_l3_moment_bound, check_t_recursion,
    l3_bound, polylog_neg, CltDistribution, L3Row, MomentBoundCheck, PolylogBound, TRecursionCheck,
};
pub use md::{ldlr_from_md, md_count, FrequencySet, MdPrior};
pub use mc::{ldlr_montecarlo_overlap, overlap_sample, pearson_mean, McOptions};
pub use moments::{
    ldlr_bruteforce_group, ldlr_bruteforce_signals, ldlr_exact_multinomial, ldlr_sequential, moments_bruteforce,
    moments_enumeration, moments_sequential, multinomial_support_size,
};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::numeric::{ksum, LogFactorials};

/// How a report was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ExactMultinomial,
    SequentialBinomial,
    BruteForce,
    MdCount,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ExactMultinomial => "exact-multinomial",
            Method::SequentialBinomial => "sequential-binomial",
            Method::BruteForce => "brute-force",
            Method::MdCount => "md-count",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arithmetic {
    /// Compensated floating point with log-space weights.
    Float,
    /// Exact big-integer / big-rational arithmetic.
    Rational,
}

/// Work limits, checked before an enumeration allocates or starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// Count vectors visited by the multinomial enumeration.
    pub enumeration: f64,
    /// Signal assignments `L^n` visited by brute force.
    pub brute_force: f64,
    /// Index tuples `Σ_d (|F| n²)^d` visited by tuple counting.
    pub md_tuples: f64,
    /// Inner steps `L·n²/2·(D+1)²` of the sequential recursion.
    pub sequential: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            enumeration: 1e7,
            brute_force: 1e7,
            md_tuples: 1e8,
            sequential: 1e10,
        }
    }
}

pub(crate) fn check_budget(what: &'static str, required: f64, budget: f64) -> Result<()> {
    if required > budget {
        return Err(Error::ResourceLimit { what, required, budget });
    }
    Ok(())
}

/// `E S_L^d` for `d = 0..=D`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub l: usize,
    pub n: usize,
    pub moments: Vec<f64>,
    /// Present when computed in exact arithmetic.
    pub exact: Option<Vec<BigRational>>,
}

impl MomentTable {
    pub fn max_degree(&self) -> usize {
        self.moments.len() - 1
    }

    pub(crate) fn from_exact(l: usize, n: usize, exact: Vec<BigRational>) -> Self {
        let moments = exact.iter().map(ratio_to_f64).collect();
        Self {
            l,
            n,
            moments,
            exact: Some(exact),
        }
    }
}

/// Nearest `f64` to a big rational, robust to operands beyond `f64` range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let (num, den) = (r.numer(), r.denom());
    let shift = num.bits() as i64 - den.bits() as i64;
    // Scale so the quotient keeps ~64 significant bits.
    let k = 64 - shift;
    let q: BigInt = if k >= 0 { (num << k as usize) / den } else { num / (den << (-k) as usize) };
    let mant = q.to_f64().unwrap_or(f64::NAN);
    mant * libm::exp2(-(k as f64))
}

/// Report on `‖L^{≤D}‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdlrReport {
    pub method: Method,
    pub model: String,
    pub l: usize,
    pub n: usize,
    pub lambda: f64,
    pub degree: usize,
    /// `t_0..t_D`.
    pub terms: Vec<f64>,
    /// Exact terms when the method ran in rational arithmetic.
    pub exact_terms: Option<Vec<BigRational>>,
    /// Monte Carlo standard error of the cumulative value.
    pub stderr: Option<f64>,
    /// Monte Carlo standard error of each term.
    pub term_stderr: Option<Vec<f64>>,
}

impl LdlrReport {
    /// `Σ_{d≤D} t_d`.
    pub fn cumulative(&self) -> f64 {
        ksum(self.terms.iter().copied())
    }

    /// `Σ_{d≤k} t_d` for every `k ≤ D`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut acc = crate::numeric::KahanSum::new();
        self.terms
            .iter()
            .map(|&t| {
                acc.add(t);
                acc.value()
            })
            .collect()
    }

    pub fn exact_cumulative(&self) -> Option<BigRational> {
        self.exact_terms
            .as_ref()
            .map(|t| t.iter().fold(BigRational::zero(), |a, b| a + b))
    }
}

/// `S_L = (L/2) Σ_ℓ (n_ℓ − n/L)²`, evaluated as `Σ (L n_ℓ − n)² / (2L)` with
/// an exact integer numerator.
pub fn s_stat(counts: &[u64], n: u64) -> Result<f64> {
    let twice = s_stat_scaled(counts, n)?;
    Ok(twice as f64 / (2 * counts.len()) as f64)
}

/// `2L·S_L = Σ_ℓ (L n_ℓ − n)²`, an integer.
pub fn s_stat_scaled(counts: &[u64], n: u64) -> Result<u128> {
    if counts.is_empty() {
        return Err(invalid("need at least one count"));
    }
    let total: u64 = counts.iter().sum();
    if total != n {
        return Err(invalid(format!("counts sum to {total}, expected {n}")));
    }
    Ok(scaled_unchecked(counts, n))
}

pub(crate) fn scaled_unchecked<C: Copy + Into<u64>>(counts: &[C], n: u64) -> u128 {
    let l = counts.len() as i128;
    counts
        .iter()
        .map(|&c| {
            let v = l * c.into() as i128 - n as i128;
            (v * v) as u128
        })
        .sum()
}

/// `S_L` in exact rational arithmetic, via the pairwise form
/// `((L−1)/2) Σ n_ℓ² − ½ Σ_{ℓ≠k} n_ℓ n_k`.
pub fn s_stat_pairwise_rational(counts: &[u64]) -> BigRational {
    let l = counts.len() as i64;
    let mut diag = BigInt::zero();
    let mut cross = BigInt::zero();
    for (i, &a) in counts.iter().enumerate() {
        diag += BigInt::from(a) * BigInt::from(a);
        for (j, &b) in counts.iter().enumerate() {
            if i != j {
                cross += BigInt::from(a) * BigInt::from(b);
            }
        }
    }
    BigRational::new(BigInt::from(l - 1) * diag - cross, BigInt::from(2))
}

/// `ln(λ^{2d} / (n^d d!))`, or `None` when `λ = 0` and `d > 0`.
fn ln_coefficient(lambda: f64, n: usize, d: usize, lf: &LogFactorials) -> Option<f64> {
    if d == 0 {
        return Some(0.0);
    }
    if lambda == 0.0 {
        return None;
    }
    Some(2.0 * d as f64 * libm::log(lambda) - d as f64 * libm::log(n as f64) - lf.ln_fact(d))
}

/// Builds the report `t_d = λ^{2d}/(n^d d!) · E S^d` from a moment table.
pub fn ldlr_from_moments(table: &MomentTable, lambda: f64, method: Method, model: String) -> Result<LdlrReport> {
    check_lambda(lambda)?;
    let dmax = table.max_degree();
    let lf = LogFactorials::new(dmax.max(1));
    let mut terms = Vec::with_capacity(dmax + 1);
    for d in 0..=dmax {
        let t = match ln_coefficient(lambda, table.n, d, &lf) {
            // E S^0 = 1 by definition; float tables only reach it up to rounding.
            Some(_) if d == 0 => 1.0,
            Some(lc) if table.moments[d] > 0.0 => libm::exp(lc + libm::log(table.moments[d])),
            _ => 0.0,
        };
        if !t.is_finite() {
            return Err(Error::NumericalOverflow(format!(
                "term d={d} is not finite; use rational arithmetic"
            )));
        }
        terms.push(t);
    }
    let exact_terms = match &table.exact {
        Some(ex) => Some(exact_terms(ex, lambda, table.n)?),
        None => None,
    };
    if let Some(ex) = &exact_terms {
        terms = ex.iter().map(ratio_to_f64).collect();
    }
    Ok(LdlrReport {
        method,
        model,
        l: table.l,
        n: table.n,
        lambda,
        degree: dmax,
        terms,
        exact_terms,
        stderr: None,
        term_stderr: None,
    })
}

fn exact_terms(moments: &[BigRational], lambda: f64, n: usize) -> Result<Vec<BigRational>> {
    let lam = BigRational::from_float(lambda).ok_or_else(|| invalid("λ is not finite"))?;
    let step = &lam * &lam / BigRational::from_integer(BigInt::from(n));
    let mut coef = BigRational::from_integer(BigInt::from(1));
    let mut out = Vec::with_capacity(moments.len());
    for (d, m) in moments.iter().enumerate() {
        if d > 0 {
            coef = coef * &step / BigRational::from_integer(BigInt::from(d));
        }
        out.push(&coef * m);
    }
    Ok(out)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid(format!("λ must be finite and ≥ 0, got {lambda}")));
    }
    Ok(())
}

/// Default degree rule `D = ⌊n^c⌋`.
pub fn degree_rule(n: usize, c: f64) -> usize {
    libm::floor(libm::pow(n as f64, c) + 1e-12) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn s_stat_examples() {
        assert_eq!(s_stat(&[3, 3, 3], 9).unwrap(), 0.0);
        assert_eq!(s_stat(&[10, 0], 10).unwrap(), 50.0);
        assert_eq!(s_stat(&[3, 0, 0], 3).unwrap(), 9.0);
        assert!(s_stat(&[1, 2], 4).is_err());
    }

    #[test]
    fn ratio_conversion() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(ratio_to_f64(&r), 1.0 / 3.0);
        let big = BigRational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(398) * 4);
        assert!((ratio_to_f64(&big) - 25.0).abs() < 1e-13);
    }

    #[test]
    fn degree_rule_values() {
        assert_eq!(degree_rule(50, 0.3), 3);
        assert_eq!(degree_rule(100, 0.3), 3);
        assert_eq!(degree_rule(200, 0.3), 4);
        assert_eq!(degree_rule(400, 0.3), 6);
    }

    proptest! {
        #[test]
        fn s_stat_matches_pairwise_form(counts in proptest::collection::vec(0u64..50, 1..8)) {
            let n: u64 = counts.iter().sum();
            let scaled = s_stat_scaled(&counts, n).unwrap();
            let l = counts.len() as i64;
            let exact = BigRational::new(BigInt::from(scaled), BigInt::from(2 * l));
            prop_assert_eq!(exact, s_stat_pairwise_rational(&counts));
        }

        #[test]
        fn s_stat_is_nonnegative_and_shift_invariant(counts in proptest::collection::vec(0u64..40, 2..7), k in 0u64..5) {
            let n: u64 = counts.iter().sum();
            let s = s_stat(&counts, n).unwrap();
            prop_assert!(s >= 0.0);
            let shifted: Vec<u64> = counts.iter().map(|c| c + k).collect();
            let s2 = s_stat(&shifted, n + k * counts.len() as u64).unwrap();
            prop_assert_eq!(s, s2);
        }
    }
}
