//! Counting index tuples `(ℓ, a, b)` with `Σ_j ℓ_j (e_{a_j} − e_{b_j}) = 0`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use super::{check_budget, check_lambda, ldlr_from_moments, Budget, LdlrReport, Method, MomentTable};
use crate::error::{invalid, Result};

/// Prior on the signal entries: continuous angles or `L`-th roots of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdPrior {
    Circle,
    Cyclic,
}

/// Which frequencies `ℓ` a tuple may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencySet {
    /// `ℓ ∈ {1..L}`, each with weight one. The circle model's overlap, and
    /// the set on which circle tuples embed into cyclic ones.
    All,
    /// `ℓ ∈ {1..L−1}` with weight ½ each (cyclic prior only). This is the
    /// weighted set whose moments are `E S_L^d`.
    Nonredundant,
}

impl FrequencySet {
    fn frequencies(self, prior: MdPrior, l: usize) -> Result<Vec<i64>> {
        match (self, prior) {
            (FrequencySet::All, _) => Ok((1..=l as i64).collect()),
            (FrequencySet::Nonredundant, MdPrior::Cyclic) => Ok((1..l as i64).collect()),
            (FrequencySet::Nonredundant, MdPrior::Circle) => {
                Err(invalid("the nonredundant frequency set applies to the cyclic prior only"))
            }
        }
    }
}

/// `|M_d|`: number of tuples `(ℓ_j, a_j, b_j)_{j≤d}` with frequencies from
/// `freqs`, `a_j, b_j ∈ [n]`, whose signed frequency vector vanishes
/// (exactly for the circle prior, mod `L` for the cyclic one).
///
/// The tuples are folded one position at a time into a table of partial
/// vectors. Coordinates are exchangeable, so a partial vector is kept only
/// as its sorted nonzero entries and the untouched coordinates form a single
/// class. The count stays exact; the budget is still charged at the nominal
/// `(|freqs|·n²)^d` tuples it covers.
pub fn md_count(prior: MdPrior, freqs: FrequencySet, l: usize, n: usize, d: usize, budget: &Budget) -> Result<BigUint> {
    if l < 1 || n < 1 {
        return Err(invalid("need L ≥ 1 and n ≥ 1"));
    }
    let fs = freqs.frequencies(prior, l)?;
    let nominal = libm::pow((fs.len() * n * n) as f64, d as f64);
    check_budget("index tuples", nominal, budget.md_tuples)?;
    let reduce = |v: i64| match prior {
        MdPrior::Circle => v,
        MdPrior::Cyclic => v.rem_euclid(l as i64),
    };
    let mut states: BTreeMap<Vec<i64>, BigUint> = BTreeMap::new();
    states.insert(Vec::new(), BigUint::one());
    for _ in 0..d {
        let mut next: BTreeMap<Vec<i64>, BigUint> = BTreeMap::new();
        let mut push = |mut w: Vec<i64>, c: &BigUint, mult: u64| {
            if mult == 0 {
                return;
            }
            w.retain(|&x| x != 0);
            w.sort_unstable();
            *next.entry(w).or_default() += c * mult;
        };
        for (v, c) in &states {
            let k = v.len();
            let z = (n - k) as u64;
            for &ell in &fs {
                // a = b leaves the vector unchanged.
                push(v.clone(), c, n as u64);
                // Indices 0..k are the nonzero coordinates, k stands for any
                // untouched one.
                for ia in 0..=k {
                    for ib in 0..=k {
                        let mult = match (ia == k, ib == k) {
                            (true, true) => z * z.saturating_sub(1),
                            (true, false) | (false, true) => z,
                            (false, false) if ia == ib => 0,
                            (false, false) => 1,
                        };
                        let mut w = v.clone();
                        if ia == k {
                            w.push(reduce(ell));
                        } else {
                            w[ia] = reduce(w[ia] + ell);
                        }
                        if ib == k {
                            w.push(reduce(-ell));
                        } else {
                            w[ib] = reduce(w[ib] - ell);
                        }
                        push(w, c, mult);
                    }
                }
            }
        }
        states = next;
    }
    Ok(states.remove(&Vec::new()).unwrap_or_default())
}

/// `t_d = λ^{2d}/(n^d d!) · |M_d| · c^d` with `c = 1` for
/// [`FrequencySet::All`] and `c = ½` for [`FrequencySet::Nonredundant`].
pub fn ldlr_from_md(
    prior: MdPrior,
    freqs: FrequencySet,
    l: usize,
    n: usize,
    lambda: f64,
    degree: usize,
    budget: &Budget,
) -> Result<LdlrReport> {
    check_lambda(lambda)?;
    let half = match freqs {
        FrequencySet::All => BigRational::one(),
        FrequencySet::Nonredundant => BigRational::new(1.into(), 2.into()),
    };
    let mut exact = Vec::with_capacity(degree + 1);
    let mut scale = BigRational::one();
    for d in 0..=degree {
        let m = md_count(prior, freqs, l, n, d, budget)?;
        exact.push(BigRational::from_integer(m.into()) * &scale);
        scale *= &half;
    }
    let table = MomentTable::from_exact(l, n, exact);
    let tag = match prior {
        MdPrior::Circle => format!("circle(L={l})"),
        MdPrior::Cyclic => format!("cyclic(L={l})"),
    };
    ldlr_from_moments(&table, lambda, Method::MdCount, tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::ldlr::{ldlr_bruteforce_signals, moments_bruteforce};
    use num_bigint::BigUint;

    fn b() -> Budget {
        Budget::default()
    }

    /// Literal enumeration of every tuple.
    fn md_literal(prior: MdPrior, fs: &[i64], l: usize, n: usize, d: usize) -> u64 {
        let per = fs.len() * n * n;
        let total = per.pow(d as u32);
        let mut count = 0;
        for mut code in 0..total {
            let mut v = vec![0i64; n];
            for _ in 0..d {
                let t = code % per;
                code /= per;
                let (ell, a, bb) = (fs[t / (n * n)], (t / n) % n, t % n);
                v[a] += ell;
                v[bb] -= ell;
            }
            let zero = match prior {
                MdPrior::Circle => v.iter().all(|&x| x == 0),
                MdPrior::Cyclic => v.iter().all(|&x| x.rem_euclid(l as i64) == 0),
            };
            count += zero as u64;
        }
        count
    }

    #[test]
    fn matches_literal_enumeration() {
        for l in 2..=4usize {
            for n in 1..=3usize {
                for d in 0..=3usize {
                    let all: Vec<i64> = (1..=l as i64).collect();
                    let nr: Vec<i64> = (1..l as i64).collect();
                    for (prior, set, fs) in [
                        (MdPrior::Circle, FrequencySet::All, &all),
                        (MdPrior::Cyclic, FrequencySet::All, &all),
                        (MdPrior::Cyclic, FrequencySet::Nonredundant, &nr),
                    ] {
                        let got = md_count(prior, set, l, n, d, &b()).unwrap();
                        assert_eq!(got, BigUint::from(md_literal(prior, fs, l, n, d)), "{prior:?} {set:?} L={l} n={n} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn small_cases() {
        for (l, n) in [(2, 2), (3, 5), (5, 4)] {
            assert_eq!(md_count(MdPrior::Circle, FrequencySet::All, l, n, 0, &b()).unwrap(), BigUint::one());
            assert_eq!(
                md_count(MdPrior::Circle, FrequencySet::All, l, n, 1, &b()).unwrap(),
                BigUint::from(l * n)
            );
        }
        let circ = md_count(MdPrior::Circle, FrequencySet::All, 2, 2, 1, &b()).unwrap();
        let cyc = md_count(MdPrior::Cyclic, FrequencySet::All, 2, 2, 1, &b()).unwrap();
        assert!(circ <= cyc);
        assert!(md_count(MdPrior::Circle, FrequencySet::Nonredundant, 3, 2, 1, &b()).is_err());
    }

    #[test]
    fn circle_degree_one() {
        let r = ldlr_from_md(MdPrior::Circle, FrequencySet::All, 4, 3, 0.6, 1, &b()).unwrap();
        assert!((r.cumulative() - (1.0 + 0.36 * 4.0)).abs() < 1e-14);
        let r = ldlr_from_md(MdPrior::Cyclic, FrequencySet::Nonredundant, 4, 3, 0.0, 3, &b()).unwrap();
        assert_eq!(r.cumulative(), 1.0);
    }

    #[test]
    fn nonredundant_counts_are_moments() {
        for l in 2..=4usize {
            for n in 1..=4usize {
                let m = moments_bruteforce(l, n, 3, &b()).unwrap();
                for d in 0..=3 {
                    let c = md_count(MdPrior::Cyclic, FrequencySet::Nonredundant, l, n, d, &b()).unwrap();
                    let want = &m.exact.as_ref().unwrap()[d] * BigRational::from_integer(2u32.pow(d as u32).into());
                    assert_eq!(BigRational::from_integer(c.into()), want);
                }
            }
        }
        let a = ldlr_from_md(MdPrior::Cyclic, FrequencySet::Nonredundant, 3, 3, 0.8, 2, &b()).unwrap();
        let s = ldlr_bruteforce_signals(3, 3, 0.8, 2, &b()).unwrap();
        assert!((a.cumulative() - s.cumulative()).abs() < 1e-9);
    }

    #[test]
    fn circle_is_dominated() {
        for l in 2..=4usize {
            for n in 1..=4usize {
                for d in 0..=3usize {
                    let c = md_count(MdPrior::Circle, FrequencySet::All, l, n, d, &b()).unwrap();
                    let z = md_count(MdPrior::Cyclic, FrequencySet::All, l, n, d, &b()).unwrap();
                    assert!(c <= z);
                }
            }
        }
    }

    #[test]
    fn budget() {
        let tight = Budget {
            md_tuples: 100.0,
            ..Budget::default()
        };
        assert!(matches!(
            md_count(MdPrior::Circle, FrequencySet::All, 3, 4, 2, &tight),
            Err(crate::Error::ResourceLimit { .. })
        ));
    }
}
