//! Numerical checks of the moment bounds behind the low-degree estimates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_budget, moments_enumeration, moments_sequential, multinomial_support_size, Arithmetic, Budget};
use crate::error::{invalid, Error, Result};
use crate::numeric::{abs_pow, ln_gamma, KahanSum, LogFactorials};

/// Relative slack granted to floating-point comparisons `lhs ≤ rhs`.
const CMP_SLACK: f64 = 1e-12;

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + CMP_SLACK)
}

/// `Li_{−s}(z) = Σ_{k≥1} k^s z^k` for `0 ≤ z < 1`.
pub fn polylog_neg(s: u32, z: f64) -> Result<f64> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(invalid(format!("polylogarithm argument must be in [0, 1), got {z}")));
    }
    if z >= 1.0 {
        return Err(Error::DivergentSeries(format!("Li_-{s}({z}) diverges for z ≥ 1")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let lz = libm::log(z);
    // Terms increase up to k ≈ s/|ln z| and decrease afterwards.
    let peak = s as f64 / -lz;
    let mut acc = KahanSum::new();
    const MAX_TERMS: u64 = 100_000_000;
    for k in 1..=MAX_TERMS {
        let kf = k as f64;
        let t = libm::exp(s as f64 * libm::log(kf) + kf * lz);
        acc.add(t);
        if kf > peak && t < 1e-16 * acc.value() {
            return Ok(acc.value());
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_TERMS as usize,
        residual: f64::NAN,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylogBound {
    /// `Σ_{d=0}^{D} λ^{2d} d^{2L}`.
    pub partial: f64,
    /// `Li_{−2L}(λ²)`.
    pub limit: f64,
}

/// `Σ_{d=0}^{D} λ^{2d} d^{2L}`, any `λ ≥ 0`.
pub fn bound_polylog_partial(l: usize, lambda: f64, degree: usize) -> Result<f64> {
    if l < 1 {
        return Err(invalid("need L ≥ 1"));
    }
    super::check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let ll = libm::log(lambda);
    Ok(crate::numeric::ksum((1..=degree).map(|d| {
        let df = d as f64;
        libm::exp(2.0 * df * ll + 2.0 * l as f64 * libm::log(df))
    })))
}

/// Partial sum and its `D → ∞` limit; the limit needs `λ < 1`.
pub fn bound_polylog(l: usize, lambda: f64, degree: usize) -> Result<PolylogBound> {
    let partial = bound_polylog_partial(l, lambda, degree)?;
    let limit = polylog_neg(2 * l as u32, lambda * lambda)?;
    Ok(PolylogBound { partial, limit })
}

/// Outcome of comparing an exact left-hand side with a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl MomentBoundCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: leq(lhs, rhs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CltDistribution {
    /// `±1` with probability ½.
    Rademacher,
    /// `B − p` with `B ~ Bernoulli(p)`.
    Bernoulli(f64),
}

impl CltDistribution {
    fn variance(self) -> f64 {
        match self {
            CltDistribution::Rademacher => 1.0,
            CltDistribution::Bernoulli(p) => p * (1.0 - p),
        }
    }
}

/// `ln E|Σ_{i≤m} (B_i − p)|^{2α}` for `B_i ~ Bernoulli(p)`, summed over the
/// binomial support. `scale` multiplies the centred sum.
fn ln_centered_binomial_moment(m: usize, p: f64, alpha: f64, scale: f64, lf: &LogFactorials) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let mp = m as f64 * p;
    let logs: Vec<f64> = (0..=m)
        .filter_map(|k| {
            let v = scale * (k as f64 - mp);
            if v == 0.0 {
                return None;
            }
            Some(lf.ln_binomial_pmf(m, k, p) + 2.0 * alpha * libm::log(v.abs()))
        })
        .filter(|x| x.is_finite())
        .collect();
    log_sum_exp(&logs)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + libm::log(crate::numeric::ksum(xs.iter().map(|x| libm::exp(x - top))))
}

/// `E|Σ_{i≤n} X_i|^{2α} ≤ 4·2^α Γ(2α+1) σ^{2α} n^α`, left side exact.
pub fn check_clt_moment_bound(dist: CltDistribution, n: usize, alpha: f64) -> Result<MomentBoundCheck> {
    if !(alpha.is_finite() && (0.0..=10.0).contains(&alpha)) {
        return Err(invalid(format!("need 0 ≤ α ≤ 10, got {alpha}")));
    }
    if n > 10_000 {
        return Err(invalid(format!("need n ≤ 10⁴, got {n}")));
    }
    let (p, scale) = match dist {
        CltDistribution::Rademacher => (0.5, 2.0),
        CltDistribution::Bernoulli(p) if p > 0.0 && p < 1.0 => (p, 1.0),
        CltDistribution::Bernoulli(p) => return Err(invalid(format!("need 0 < p < 1, got {p}"))),
    };
    let lf = LogFactorials::new(n);
    let ln_lhs = if n == 0 {
        if alpha == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        ln_centered_binomial_moment(n, p, alpha, scale, &lf)
    };
    let sigma2 = dist.variance();
    let ln_rhs = libm::log(4.0)
        + alpha * core::f64::consts::LN_2
        + ln_gamma(2.0 * alpha + 1.0)
        + alpha * libm::log(sigma2)
        + alpha * libm::log(n as f64);
    Ok(MomentBoundCheck::new(libm::exp(ln_lhs), libm::exp(ln_rhs)))
}

/// Worst case of the one-step conditional moment recursion over every
/// reachable conditioning tuple `(n_1, …, n_{k−1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TRecursionCheck {
    pub l: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: Vec<f64>,
    pub gamma: f64,
    pub tuples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen (0 when every lhs vanishes).
    pub worst_ratio: f64,
    pub worst_lhs: f64,
    pub worst_rhs: f64,
    /// Conditioning tuple attaining `worst_ratio`.
    pub witness: Vec<usize>,
    pub holds: bool,
}

/// `T_{k,α} = Π_{ℓ≤k} |m_ℓ/(L−ℓ+1) − n_ℓ|^{2α_ℓ}` with
/// `m_ℓ = n − Σ_{j<ℓ} n_j`.
fn t_value(l: usize, n: usize, counts: &[usize], alpha: &[f64]) -> f64 {
    let mut m = n;
    let mut prod = 1.0;
    for (i, (&c, &a)) in counts.iter().zip(alpha).enumerate() {
        let base = m as f64 / (l - i) as f64 - c as f64;
        prod *= abs_pow(base, 2.0 * a);
        m -= c;
    }
    prod
}

/// Checks, for every `(n_1, …, n_{k−1})`,
///
/// `E[T_{k,α} m^γ | n_{<k}] ≤ 2^{α_k} Γ(α_k+1) σ_k^{2α_k}
///   Σ_{β=0}^{c} C(c,β) ((L−k+1)/(L−k+2))^{c−β} m′^{c−β} T_{k−1,(…,α_{k−1}+β/2)}`
///
/// with `c = ⌈α_k+γ⌉`, `σ_k² = (L−k)/(L−k+1)²`, `m = n − Σ_{j<k} n_j`,
/// `m′ = n − Σ_{j<k−1} n_j`. For `k = 1` there is no earlier count to expand
/// against and the right side is `2^{α_1} Γ(α_1+1) σ_1^{2α_1} n^{α_1+γ}`.
pub fn check_t_recursion(l: usize, n: usize, k: usize, alpha: &[f64], gamma: f64, budget: &Budget) -> Result<TRecursionCheck> {
    if l <= 2 {
        return Err(invalid("need L > 2"));
    }
    if !(1..l).contains(&k) {
        return Err(invalid(format!("need 1 ≤ k < L, got k={k}, L={l}")));
    }
    if alpha.len() != k {
        return Err(invalid(format!("α has {} entries, expected k={k}", alpha.len())));
    }
    if alpha.iter().chain([&gamma]).any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(invalid("α and γ must be finite and ≥ 0"));
    }
    let tuples = if k == 1 { 1.0 } else { multinomial_support_size(k, n) };
    check_budget("conditioning tuples", tuples * (n + 1) as f64, budget.enumeration)?;

    let lf = LogFactorials::new(n);
    let ak = alpha[k - 1];
    let bins = (l - k + 1) as f64;
    let p = 1.0 / bins;
    let sigma2 = (l - k) as f64 / (bins * bins);
    let pre = libm::exp(ak * core::f64::consts::LN_2 + ln_gamma(ak + 1.0)) * libm::pow(sigma2, ak);
    let c = libm::ceil(ak + gamma) as usize;
    let ratio = bins / (bins + 1.0);

    let mut out = TRecursionCheck {
        l,
        n,
        k,
        alpha: alpha.to_vec(),
        gamma,
        tuples: 0,
        violations: 0,
        worst_ratio: 0.0,
        worst_lhs: 0.0,
        worst_rhs: 0.0,
        witness: Vec::new(),
        holds: true,
    };
    let mut prefix = vec![0usize; k - 1];
    let mut shifted = alpha[..k - 1].to_vec();
    loop {
        let used: usize = prefix.iter().sum();
        if used <= n {
            let m = n - used;
            let t_prev = t_value(l, n, &prefix, &alpha[..k - 1]);
            let inner = if ak == 0.0 {
                1.0
            } else {
                let mut s = KahanSum::new();
                for nk in 0..=m {
                    let w = libm::exp(lf.ln_binomial_pmf(m, nk, p));
                    s.add(w * abs_pow(m as f64 / bins - nk as f64, 2.0 * ak));
                }
                s.value()
            };
            let lhs = t_prev * abs_pow(m as f64, gamma) * inner;
            let rhs = if k == 1 {
                pre * abs_pow(n as f64, ak + gamma)
            } else {
                let m_prime = m + prefix[k - 2];
                let mut s = KahanSum::new();
                let mut binom = 1.0;
                for beta in 0..=c {
                    shifted[k - 2] = alpha[k - 2] + beta as f64 / 2.0;
                    let t = t_value(l, n, &prefix, &shifted);
                    let e = (c - beta) as f64;
                    s.add(binom * libm::pow(ratio, e) * abs_pow(m_prime as f64, e) * t);
                    binom = binom * (c - beta) as f64 / (beta + 1) as f64;
                }
                pre * s.value()
            };
            out.tuples += 1;
            if !leq(lhs, rhs) {
                out.violations += 1;
            }
            let r = if lhs == 0.0 { 0.0 } else if rhs == 0.0 { f64::INFINITY } else { lhs / rhs };
            if r > out.worst_ratio || out.witness.is_empty() && out.tuples == 1 {
                out.worst_ratio = r;
                out.worst_lhs = lhs;
                out.worst_rhs = rhs;
                out.witness = prefix.clone();
            }
        }
        if !advance(&mut prefix, n) {
            break;
        }
    }
    out.holds = out.violations == 0;
    Ok(out)
}

/// Next tuple with coordinate sum ≤ `n`, odometer order.
fn advance(prefix: &mut [usize], n: usize) -> bool {
    for i in (0..prefix.len()).rev() {
        prefix[i] += 1;
        if prefix.iter().sum::<usize>() <= n {
            return true;
        }
        prefix[i] = 0;
    }
    false
}

/// `8 n^d d² d!`.
pub fn l3_bound(n: usize, d: usize) -> f64 {
    let df = d as f64;
    (1..=d).fold(8.0 * df * df, |acc, j| acc * n as f64 * j as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L3Row {
    pub d: usize,
    pub moment: f64,
    pub bound: f64,
    pub holds: bool,
    /// `d³ ≤ n`, the regime the bound is meant for.
    pub in_regime: bool,
}

/// `E S_3^d ≤ 8 n^d d² d!` for `1 ≤ d ≤ dmax` (`d = 0` is vacuous).
pub fn check_l3_moment_bound(n: usize, dmax: usize, budget: &Budget) -> Result<Vec<L3Row>> {
    let table = match moments_enumeration(3, n, dmax, Arithmetic::Float, budget) {
        Ok(t) => t,
        Err(Error::ResourceLimit { .. }) => moments_sequential(3, n, dmax, Arithmetic::Float, budget)?,
        Err(e) => return Err(e),
    };
    Ok((1..=dmax)
        .map(|d| {
            let bound = l3_bound(n, d);
            let moment = table.moments[d];
            L3Row {
                d,
                moment,
                bound,
                holds: leq(moment, bound),
                in_regime: d * d * d <= n,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polylog_closed_forms() {
        assert!((polylog_neg(2, 0.5).unwrap() - 6.0).abs() < 1e-13);
        for z in [0.1, 0.3, 0.81, 0.95] {
            let li1 = z / ((1.0 - z) * (1.0 - z));
            assert!((polylog_neg(1, z).unwrap() - li1).abs() < 1e-12 * li1);
            let li0 = z / (1.0 - z);
            assert!((polylog_neg(0, z).unwrap() - li0).abs() < 1e-12 * li0);
        }
        assert_eq!(polylog_neg(6, 0.0).unwrap(), 0.0);
        assert!(matches!(polylog_neg(2, 1.0), Err(Error::DivergentSeries(_))));
        assert!(matches!(bound_polylog(3, 1.2, 5), Err(Error::DivergentSeries(_))));
        assert!(bound_polylog_partial(3, 1.2, 5).unwrap() > 0.0);
    }

    #[test]
    fn polylog_partials_converge() {
        let b = bound_polylog(3, 0.9, 10).unwrap();
        let mut prev = 0.0;
        for d in 1..400 {
            let p = bound_polylog_partial(3, 0.9, d).unwrap();
            assert!(if d < 100 { p > prev } else { p >= prev });
            prev = p;
        }
        assert!((prev - b.limit).abs() < 1e-10 * b.limit);
        assert_eq!(bound_polylog(3, 0.0, 8).unwrap(), PolylogBound { partial: 0.0, limit: 0.0 });
    }

    #[test]
    fn clt_examples() {
        let c = check_clt_moment_bound(CltDistribution::Rademacher, 100, 1.0).unwrap();
        assert!((c.lhs - 100.0).abs() < 1e-9);
        assert!((c.rhs - 1600.0).abs() < 1e-9);
        assert!(c.holds);
        let c = check_clt_moment_bound(CltDistribution::Bernoulli(1.0 / 3.0), 50, 2.0).unwrap();
        // E S⁴ = nμ₄ + 3n(n−1)σ⁴ for centred Bernoulli.
        let (p, q) = (1.0 / 3.0, 2.0 / 3.0);
        let mu4 = p * q * (1.0 - 3.0 * p * q);
        let want = 50.0 * mu4 + 3.0 * 50.0 * 49.0 * (p * q) * (p * q);
        assert!((c.lhs - want).abs() < 1e-9 * want);
        assert!(c.holds);
        let c = check_clt_moment_bound(CltDistribution::Rademacher, 7, 0.0).unwrap();
        assert_eq!((c.lhs, c.rhs), (1.0, 4.0));
    }

    #[test]
    fn tuple_walk_covers_simplex() {
        for (k, n) in [(1usize, 3usize), (2, 4), (3, 5)] {
            let mut v = vec![0; k];
            let mut seen = 1;
            while advance(&mut v, n) {
                assert!(v.iter().sum::<usize>() <= n);
                seen += 1;
            }
            assert_eq!(seen as f64, multinomial_support_size(k + 1, n));
        }
        let mut empty: [usize; 0] = [];
        assert!(!advance(&mut empty, 3));
    }

    #[test]
    fn t_recursion_examples() {
        let b = Budget::default();
        let c = check_t_recursion(5, 10, 3, &[0.0, 0.0, 0.0], 0.0, &b).unwrap();
        assert!(c.holds);
        assert_eq!(c.worst_lhs, 1.0);
        let c = check_t_recursion(3, 30, 2, &[1.0, 1.0], 0.0, &b).unwrap();
        assert!(c.holds, "{c:?}");
        assert_eq!(c.tuples, 31);
        let c = check_t_recursion(4, 20, 3, &[0.0, 1.0, 2.0], 1.0, &b).unwrap();
        assert!(c.holds, "{c:?}");
        assert!(check_t_recursion(2, 5, 1, &[1.0], 0.0, &b).is_err());
        assert!(check_t_recursion(4, 5, 4, &[1.0; 4], 0.0, &b).is_err());
    }

    #[test]
    fn t_recursion_lhs_is_conditional_expectation() {
        // k = 1, α = 1: E|n/L − n_1|² = n p (1−p).
        let c = check_t_recursion(4, 12, 1, &[1.0], 0.0, &Budget::default()).unwrap();
        assert!((c.worst_lhs - 12.0 * 0.25 * 0.75).abs() < 1e-12);
    }

    #[test]
    fn l3_small() {
        let rows = check_l3_moment_bound(1000, 2, &Budget::default()).unwrap();
        assert!((rows[0].moment - 1000.0).abs() < 1e-8);
        assert_eq!(rows[0].bound, 8000.0);
        assert!(rows.iter().all(|r| r.holds && r.in_regime));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn polylog_matches_direct_sum(s in 0u32..7, z in 0.0f64..0.7) {
            let direct: f64 = (1..2000).map(|k| libm::pow(k as f64, s as f64) * libm::pow(z, k as f64)).sum();
            let v = polylog_neg(s, z).unwrap();
            prop_assert!((v - direct).abs() <= 1e-11 * direct.max(1e-300));
        }

        #[test]
        fn clt_holds_on_random_points(p in 0.05f64..0.95, n in 1usize..400, alpha in 0.0f64..6.0) {
            prop_assert!(check_clt_moment_bound(CltDistribution::Bernoulli(p), n, alpha).unwrap().holds);
        }
    }
}
