//! Moments `E S_L^d` of the multinomial statistic, by three routes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{
    check_budget, check_lambda, ldlr_from_moments, scaled_unchecked, Arithmetic, Budget, LdlrReport, Method,
    MomentTable,
};
use crate::error::{invalid, Result};
use crate::group::{FiniteGroup, IrrepList};
use crate::numeric::{KahanSum, LogFactorials};

/// Number of count vectors of `n` balls in `l` bins, `C(n+l−1, l−1)`.
pub fn multinomial_support_size(l: usize, n: usize) -> f64 {
    let lf = LogFactorials::new(n + l);
    libm::rint(libm::exp(lf.ln_binomial(n + l - 1, l - 1)))
}



fn check_shape(l: usize, n: usize) -> Result<()> {
    if l < 1 {
        return Err(invalid("need L ≥ 1"));
    }
    if n < 1 {
        return Err(invalid("need n ≥ 1"));
    }
    Ok(())
}

/// Moments `E S_L^d`, `d ≤ dmax`, by enumerating every count vector and
/// weighting it by its multinomial probability.
pub fn moments_enumeration(l: usize, n: usize, dmax: usize, arith: Arithmetic, budget: &Budget) -> Result<MomentTable> {
    check_shape(l, n)?;
    check_budget("multinomial enumeration", multinomial_support_size(l, n), budget.enumeration)?;
    let mut counts = vec![0u64; l];
    match arith {
        Arithmetic::Float => {
            let lf = LogFactorials::new(n);
            let base = lf.ln_fact(n) - n as f64 * libm::log(l as f64);
            let mut sums = vec![KahanSum::new(); dmax + 1];
            enumerate_float(0, n, base, &lf, &mut counts, &mut |c, lw| {
                let w = libm::exp(lw);
                let s = scaled_unchecked(c, n as u64) as f64 / (2 * l) as f64;
                let mut p = w;
                for acc in sums.iter_mut() {
                    acc.add(p);
                    p *= s;
                }
            });
            Ok(MomentTable {
                l,
                n,
                moments: sums.iter().map(KahanSum::value).collect(),
                exact: None,
            })
        }
        Arithmetic::Rational => {
            let mut sums = vec![BigUint::zero(); dmax + 1];
            enumerate_exact(0, n, &BigUint::one(), &mut counts, &mut |c, coef| {
                let v = BigUint::from(scaled_unchecked(c, n as u64));
                let mut p = coef.clone();
                for acc in sums.iter_mut() {
                    *acc += &p;
                    p *= &v;
                }
            });
            Ok(MomentTable::from_exact(l, n, normalise_scaled(sums, l, n)))
        }
    }
}

fn enumerate_float(
    depth: usize,
    rem: usize,
    lw: f64,
    lf: &LogFactorials,
    counts: &mut [u64],
    leaf: &mut impl FnMut(&[u64], f64),
) {
    if depth + 1 == counts.len() {
        counts[depth] = rem as u64;
        leaf(counts, lw - lf.ln_fact(rem));
        return;
    }
    for c in 0..=rem {
        counts[depth] = c as u64;
        enumerate_float(depth + 1, rem - c, lw - lf.ln_fact(c), lf, counts, leaf);
    }
}

fn enumerate_exact(depth: usize, rem: usize, coef: &BigUint, counts: &mut [u64], leaf: &mut impl FnMut(&[u64], &BigUint)) {
    if depth + 1 == counts.len() {
        counts[depth] = rem as u64;
        leaf(counts, coef);
        return;
    }
    let mut b = BigUint::one();
    for c in 0..=rem {
        counts[depth] = c as u64;
        enumerate_exact(depth + 1, rem - c, &(coef * &b), counts, leaf);
        b = b * BigUint::from(rem - c) / BigUint::from(c + 1);
    }
}

/// `Σ_x mult(x)·(2L S(x))^d` → `E S^d = sum / (L^n (2L)^d)`.
fn normalise_scaled(sums: Vec<BigUint>, l: usize, n: usize) -> Vec<BigRational> {
    let total = BigUint::from(l).pow(n as u32);
    let two_l = BigUint::from(2 * l);
    let mut den = total;
    sums.into_iter()
        .map(|s| {
            let r = BigRational::new(BigInt::from(s), BigInt::from(den.clone()));
            den *= &two_l;
            r
        })
        .collect()
}

/// Moments via the sequential-binomial recursion: bin `k` receives
/// `Bin(m, 1/(L−k+1))` of the `m` remaining balls, and the moments of the
/// partial sum `Σ_{j≤k} (L n_j − n)²` are carried per remaining count.
/// Cost `≈ L·n²/2·(dmax+1)²`.
pub fn moments_sequential(l: usize, n: usize, dmax: usize, arith: Arithmetic, budget: &Budget) -> Result<MomentTable> {
    check_shape(l, n)?;
    let work = l as f64 * (n as f64 + 1.0) * (n as f64 + 2.0) / 2.0 * ((dmax + 1) * (dmax + 1)) as f64;
    check_budget("sequential recursion", work, budget.sequential)?;
    let binom_small = binomial_rows(dmax);
    match arith {
        Arithmetic::Float => {
            let lf = LogFactorials::new(n);
            let mut cur = vec![vec![0.0f64; dmax + 1]; n + 1];
            cur[n][0] = 1.0;
            let mut spow = vec![0.0f64; dmax + 1];
            let mut val = vec![0.0f64; dmax + 1];
            for k in 1..=l {
                let mut next = vec![vec![KahanSum::new(); dmax + 1]; n + 1];
                let p = 1.0 / (l - k + 1) as f64;
                for m in 0..=n {
                    if cur[m].iter().all(|&x| x == 0.0) {
                        continue;
                    }
                    let range = if k == l { m..=m } else { 0..=m };
                    for c in range {
                        let w = if k == l { 1.0 } else { libm::exp(lf.ln_binomial_pmf(m, c, p)) };
                        if w == 0.0 {
                            continue;
                        }
                        let dv = (l * c) as f64 - n as f64;
                        let s = dv * dv / (2 * l) as f64;
                        spow[0] = 1.0;
                        for e in 1..=dmax {
                            spow[e] = spow[e - 1] * s;
                        }
                        for q in 0..=dmax {
                            let mut acc = 0.0;
                            for r in 0..=q {
                                acc += binom_small[q][r] * cur[m][r] * spow[q - r];
                            }
                            val[q] = acc;
                        }
                        for q in 0..=dmax {
                            next[m - c][q].add(w * val[q]);
                        }
                    }
                }
                cur = next.into_iter().map(|row| row.iter().map(KahanSum::value).collect()).collect();
            }
            Ok(MomentTable {
                l,
                n,
                moments: cur[0].clone(),
                exact: None,
            })
        }
        Arithmetic::Rational => {
            let bin_big: Vec<Vec<BigUint>> = binom_small
                .iter()
                .map(|row| row.iter().map(|&x| BigUint::from(x as u64)).collect())
                .collect();
            let mut cur = vec![vec![BigUint::zero(); dmax + 1]; n + 1];
            cur[n][0] = BigUint::one();
            for k in 1..=l {
                let mut next = vec![vec![BigUint::zero(); dmax + 1]; n + 1];
                for m in 0..=n {
                    if cur[m].iter().all(Zero::is_zero) {
                        continue;
                    }
                    let mut b = BigUint::one();
                    for c in 0..=m {
                        if k < l || c == m {
                            let dv = (l * c) as i128 - n as i128;
                            let q = BigUint::from((dv * dv) as u128);
                            let mut qpow = vec![BigUint::one(); dmax + 1];
                            for e in 1..=dmax {
                                qpow[e] = &qpow[e - 1] * &q;
                            }
                            let weight = if k == l { BigUint::one() } else { b.clone() };
                            for p in 0..=dmax {
                                let mut acc = BigUint::zero();
                                for r in 0..=p {
                                    if !cur[m][r].is_zero() {
                                        acc += &bin_big[p][r] * &cur[m][r] * &qpow[p - r];
                                    }
                                }
                                next[m - c][p] += &weight * acc;
                            }
                        }
                        b = b * BigUint::from(m - c) / BigUint::from(c + 1);
                    }
                }
                cur = next;
            }
            let sums = core::mem::take(&mut cur[0]);
            Ok(MomentTable::from_exact(l, n, normalise_scaled(sums, l, n)))
        }
    }
}

fn binomial_rows(dmax: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0f64]];
    for p in 1..=dmax {
        let prev = &rows[p - 1];
        let mut row = vec![1.0f64; p + 1];
        for r in 1..p {
            row[r] = prev[r - 1] + prev[r];
        }
        rows.push(row);
    }
    rows
}

/// Moments by visiting every signal in `[L]^n` and tallying the exact
/// integer `2L·S_L` of its count vector.
pub fn moments_bruteforce(l: usize, n: usize, dmax: usize, budget: &Budget) -> Result<MomentTable> {
    check_shape(l, n)?;
    check_budget("signal enumeration", libm::pow(l as f64, n as f64), budget.brute_force)?;
    let mut tally: BTreeMap<u128, u64> = BTreeMap::new();
    for_each_signal_counts(l, n, |counts| {
        *tally.entry(scaled_unchecked(counts, n as u64)).or_insert(0) += 1;
    });
    let mut sums = vec![BigUint::zero(); dmax + 1];
    for (v, c) in tally {
        let v = BigUint::from(v);
        let mut p = BigUint::from(c);
        for acc in sums.iter_mut() {
            *acc += &p;
            p *= &v;
        }
    }
    Ok(MomentTable::from_exact(l, n, normalise_scaled(sums, l, n)))
}

/// Odometer over `[L]^n`, calling `f` with the running count vector.
fn for_each_signal_counts(l: usize, n: usize, mut f: impl FnMut(&[u32])) {
    let mut digits = vec![0usize; n];
    let mut counts = vec![0u32; l];
    counts[0] = n as u32;
    loop {
        f(&counts);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            counts[digits[i]] -= 1;
            digits[i] += 1;
            if digits[i] == l {
                digits[i] = 0;
                counts[0] += 1;
                i += 1;
            } else {
                counts[digits[i]] += 1;
                break;
            }
        }
    }
}

fn cyclic_name(l: usize) -> alloc::string::String {
    format!("cyclic(L={l})")
}

/// `‖L^{≤D}‖²` for the cyclic / finite-group model by count-vector enumeration.
pub fn ldlr_exact_multinomial(
    l: usize,
    n: usize,
    lambda: f64,
    degree: usize,
    arith: Arithmetic,
    budget: &Budget,
) -> Result<LdlrReport> {
    check_lambda(lambda)?;
    let table = moments_enumeration(l, n, degree, arith, budget)?;
    ldlr_from_moments(&table, lambda, Method::ExactMultinomial, cyclic_name(l))
}

/// Same quantity through [`moments_sequential`]; feasible where the
/// enumeration is not (large `L` or `n`).
pub fn ldlr_sequential(
    l: usize,
    n: usize,
    lambda: f64,
    degree: usize,
    arith: Arithmetic,
    budget: &Budget,
) -> Result<LdlrReport> {
    check_lambda(lambda)?;
    let table = moments_sequential(l, n, degree, arith, budget)?;
    ldlr_from_moments(&table, lambda, Method::SequentialBinomial, cyclic_name(l))
}

/// Brute-force oracle: averages `S_L^d` over all `L^n` signals, exactly.
pub fn ldlr_bruteforce_signals(l: usize, n: usize, lambda: f64, degree: usize, budget: &Budget) -> Result<LdlrReport> {
    check_lambda(lambda)?;
    let table = moments_bruteforce(l, n, degree, budget)?;
    ldlr_from_moments(&table, lambda, Method::BruteForce, cyclic_name(l))
}

/// Brute-force oracle through the representations themselves: for every
/// signal in `G^n`, the overlap `Σ_ρ w_ρ ‖Σ_g n_g ρ(g)‖²_F` with the
/// channel weights of [`super::mc::channel_weight`]. Floating point.
pub fn ldlr_bruteforce_group(
    group: &FiniteGroup,
    irreps: &IrrepList,
    n: usize,
    lambda: f64,
    degree: usize,
    budget: &Budget,
) -> Result<LdlrReport> {
    check_lambda(lambda)?;
    let l = group.order();
    check_shape(l, n)?;
    check_budget("signal enumeration", libm::pow(l as f64, n as f64), budget.brute_force)?;
    let mut tally: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for_each_signal_counts(l, n, |counts| {
        *tally.entry(counts.to_vec()).or_insert(0) += 1;
    });
    let total = libm::pow(l as f64, n as f64);
    let mut sums = vec![KahanSum::new(); degree + 1];
    for (counts, c) in tally {
        let counts: Vec<u64> = counts.into_iter().map(u64::from).collect();
        let s = super::mc::irrep_overlap(irreps, &counts);
        let mut p = c as f64 / total;
        for acc in sums.iter_mut() {
            acc.add(p);
            p *= s;
        }
    }
    let table = MomentTable {
        l,
        n,
        moments: sums.iter().map(KahanSum::value).collect(),
        exact: None,
    };
    ldlr_from_moments(&table, lambda, Method::BruteForce, format!("group(order={l})"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_catalog, CatalogGroup};
    use proptest::prelude::*;

    fn budget() -> Budget {
        Budget::default()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn first_moment_closed_form() {
        for l in 1..=6usize {
            for n in 1..=12usize {
                let t = moments_enumeration(l, n, 1, Arithmetic::Rational, &budget()).unwrap();
                let want = rat((n * (l - 1)) as i64, 2);
                assert_eq!(t.exact.as_ref().unwrap()[1], want, "L={l} n={n}");
            }
        }
    }

    #[test]
    fn two_by_two_example() {
        let t = moments_bruteforce(2, 2, 1, &budget()).unwrap();
        assert_eq!(t.exact.unwrap()[1], rat(1, 1));
    }

    #[test]
    fn single_coordinate() {
        // n = 1: counts are a basis vector, S = (L/2)((1−1/L)² + (L−1)/L²) = (L−1)/2.
        for l in 2..=6usize {
            let t = moments_bruteforce(l, 1, 4, &budget()).unwrap();
            for (d, m) in t.exact.unwrap().iter().enumerate() {
                assert_eq!(*m, rat((l - 1) as i64, 2).pow(d as i32));
            }
        }
    }

    #[test]
    fn three_routes_agree_exactly() {
        for l in 2..=4usize {
            for n in 1..=7usize {
                let a = moments_enumeration(l, n, 4, Arithmetic::Rational, &budget()).unwrap();
                let b = moments_bruteforce(l, n, 4, &budget()).unwrap();
                let c = moments_sequential(l, n, 4, Arithmetic::Rational, &budget()).unwrap();
                assert_eq!(a.exact, b.exact, "L={l} n={n}");
                assert_eq!(a.exact, c.exact, "L={l} n={n}");
            }
        }
    }

    #[test]
    fn float_routes_track_exact() {
        for (l, n) in [(3, 40), (4, 25), (5, 12)] {
            let ex = moments_enumeration(l, n, 5, Arithmetic::Rational, &budget()).unwrap();
            let fe = moments_enumeration(l, n, 5, Arithmetic::Float, &budget()).unwrap();
            let fs = moments_sequential(l, n, 5, Arithmetic::Float, &budget()).unwrap();
            for d in 0..=5 {
                let e = ex.moments[d];
                assert!(((fe.moments[d] - e) / e).abs() < 1e-12, "enum L={l} n={n} d={d}");
                assert!(((fs.moments[d] - e) / e).abs() < 1e-12, "seq L={l} n={n} d={d}");
            }
        }
    }

    #[test]
    fn ldlr_examples() {
        let r = ldlr_exact_multinomial(3, 9, 0.0, 4, Arithmetic::Float, &budget()).unwrap();
        assert_eq!(r.cumulative(), 1.0);
        for n in [3, 10, 30] {
            let r = ldlr_exact_multinomial(3, n, 0.7, 1, Arithmetic::Rational, &budget()).unwrap();
            assert!((r.cumulative() - (1.0 + 0.49)).abs() < 1e-15);
        }
        let a = ldlr_exact_multinomial(3, 4, 0.9, 3, Arithmetic::Float, &budget()).unwrap();
        let b = ldlr_bruteforce_signals(3, 4, 0.9, 3, &budget()).unwrap();
        assert!((a.cumulative() - b.cumulative()).abs() < 1e-9);
    }

    #[test]
    fn budgets_are_enforced() {
        let tight = Budget {
            enumeration: 10.0,
            brute_force: 10.0,
            md_tuples: 10.0,
            sequential: 10.0,
        };
        assert!(matches!(
            moments_enumeration(3, 10, 2, Arithmetic::Float, &tight),
            Err(crate::Error::ResourceLimit { .. })
        ));
        assert!(matches!(moments_bruteforce(2, 5, 2, &tight), Err(crate::Error::ResourceLimit { .. })));
        assert!(matches!(
            moments_sequential(2, 5, 2, Arithmetic::Float, &tight),
            Err(crate::Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn group_bruteforce_matches_counts() {
        for c in [CatalogGroup::Cyclic(3), CatalogGroup::Cyclic(4), CatalogGroup::Dihedral(3), CatalogGroup::Quaternion8] {
            let (g, full) = build_catalog(c).unwrap();
            let nr = full.nonredundant();
            let n = if g.order() > 4 { 4 } else { 6 };
            let a = ldlr_bruteforce_group(&g, &nr, n, 0.8, 4, &budget()).unwrap();
            let b = ldlr_exact_multinomial(g.order(), n, 0.8, 4, Arithmetic::Rational, &budget()).unwrap();
            for d in 0..=4 {
                assert!((a.terms[d] - b.terms[d]).abs() <= 1e-12 * b.terms[d].max(1.0), "{} d={d}", c.name());
            }
        }
    }

    #[test]
    fn support_size() {
        assert_eq!(multinomial_support_size(3, 1000), 501_501.0);
        assert_eq!(multinomial_support_size(1, 5), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn reports_are_monotone(l in 2usize..5, n in 1usize..12, lam in 0.0f64..1.5, dmax in 0usize..6) {
            let r = ldlr_exact_multinomial(l, n, lam, dmax, Arithmetic::Float, &budget()).unwrap();
            prop_assert_eq!(r.terms[0], 1.0);
            prop_assert!(r.terms.iter().all(|t| *t >= 0.0));
            let ps = r.partial_sums();
            prop_assert!(ps.windows(2).all(|w| w[1] >= w[0]));
            let r2 = ldlr_exact_multinomial(l, n, lam + 0.1, dmax, Arithmetic::Float, &budget()).unwrap();
            prop_assert!(r2.cumulative() >= r.cumulative());
        }
    }
}
