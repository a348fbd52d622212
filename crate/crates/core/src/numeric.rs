//! Small numeric helpers: compensated summation and log-factorials.

use alloc::vec::Vec;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Table of `ln k!` for `k = 0..=max`, built by compensated summation of `ln k`.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = KahanSum::new();
        table.push(0.0);
        for k in 1..=max {
            acc.add(libm::log(k as f64));
            table.push(acc.value());
        }
        Self { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_fact(&self, k: usize) -> f64 {
        self.table[k]
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.table[n] - self.table[k] - self.table[n - k]
    }

    /// `ln P(Bin(n, p) = k)`.
    pub fn ln_binomial_pmf(&self, n: usize, k: usize, p: f64) -> f64 {
        let mut v = self.ln_binomial(n, k);
        if k > 0 {
            v += k as f64 * libm::log(p);
        }
        if n > k {
            v += (n - k) as f64 * libm::log1p(-p);
        }
        v
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `|x|^p` with the convention `0^0 = 1`.
pub fn abs_pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        libm::pow(x.abs(), p)
    }
}
