//! Monte Carlo over signal pairs, reduced to one random signal against the
//! all-identity signal.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{check_lambda, LdlrReport, Method};
use crate::error::{invalid, Error, Result};
use crate::group::{IrrepList, IrrepType};
use crate::linalg::C64;
use crate::models::ModelSpec;
use crate::numeric::{KahanSum, LogFactorials};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
    pub bootstrap: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            bootstrap: 200,
        }
    }
}

/// Overlap weight of a channel, `β_ρ d_ρ / 2` with `d_ρ` the model
/// dimension: `d/2` for real, `d` for complex, `d/2` (complex dimension) for
/// quaternionic irreps.
pub(crate) fn channel_weight(kind: IrrepType, complex_dim: usize) -> f64 {
    match kind {
        IrrepType::Real | IrrepType::Quaternionic => complex_dim as f64 / 2.0,
        IrrepType::Complex => complex_dim as f64,
    }
}

fn weighted_overlap(irreps: &IrrepList, counts: &[u64], lambdas: Option<&[f64]>) -> f64 {
    let mut acc = KahanSum::new();
    for (i, r) in irreps.iter().enumerate() {
        let d = r.complex_dim();
        let mut norm = 0.0;
        for a in 0..d {
            for b in 0..d {
                let mut z = C64::new(0.0, 0.0);
                for (g, &c) in counts.iter().enumerate() {
                    if c != 0 {
                        z += r.matrix(g)[(a, b)] * c as f64;
                    }
                }
                norm += z.norm_sqr();
            }
        }
        let lam2 = lambdas.map_or(1.0, |l| l[i] * l[i]);
        acc.add(lam2 * channel_weight(r.kind(), d) * norm);
    }
    acc.value()
}

/// `Σ_ρ w_ρ ‖Σ_g n_g ρ(g)‖²_F` over a nonredundant irrep list.
pub(crate) fn irrep_overlap(irreps: &IrrepList, counts: &[u64]) -> f64 {
    weighted_overlap(irreps, counts, None)
}

/// `n` times the overlap `(1/n)Σ_ρ λ_ρ² w_ρ ‖Σ_j ρ(g_j)‖²` of one random
/// signal against the all-identity signal. Frequency `ℓ` of the circle model
/// has weight 1; for the cyclic model `ℓ < L/2` has weight 1 and `ℓ = L/2`
/// weight ½.
fn raw_overlap<R: Rng + ?Sized>(model: &ModelSpec, n: usize, lambdas: &[f64], rng: &mut R) -> f64 {
    match model {
        ModelSpec::Circle { l, .. } => {
            let mut sums = vec![C64::new(0.0, 0.0); *l];
            for _ in 0..n {
                let theta = core::f64::consts::TAU * rng.random::<f64>();
                for (k, s) in sums.iter_mut().enumerate() {
                    let a = (k + 1) as f64 * theta;
                    *s += C64::new(libm::cos(a), libm::sin(a));
                }
            }
            crate::numeric::ksum(sums.iter().zip(lambdas).map(|(s, lam)| lam * lam * s.norm_sqr()))
        }
        ModelSpec::Cyclic { l, .. } => {
            let mut counts = vec![0u64; *l];
            for _ in 0..n {
                counts[rng.random_range(0..*l)] += 1;
            }
            let terms = (1..=l / 2).zip(lambdas).map(|(ell, lam)| {
                let mut z = C64::new(0.0, 0.0);
                for (g, &c) in counts.iter().enumerate() {
                    if c != 0 {
                        z += crate::group::root_of_unity((ell * g) as i64, *l) * c as f64;
                    }
                }
                let w = if 2 * ell == *l { 0.5 } else { 1.0 };
                w * lam * lam * z.norm_sqr()
            });
            crate::numeric::ksum(terms)
        }
        ModelSpec::Group { group, irreps, .. } => {
            let order = group.order();
            let mut counts = vec![0u64; order];
            for _ in 0..n {
                counts[rng.random_range(0..order)] += 1;
            }
            weighted_overlap(irreps, &counts, Some(lambdas))
        }
    }
}

/// `samples` i.i.d. draws of the overlap `(1/n) Σ_ρ λ_ρ² w_ρ ‖X_ρ* X′_ρ‖²_F`,
/// using the model's own per-channel strengths. Draws use stream 0 of `seed`.
pub fn overlap_sample(model: &ModelSpec, n: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(invalid("need n ≥ 1"));
    }
    let k = model.channel_count();
    let lambdas = match model.lambdas().len() {
        1 => vec![model.lambdas()[0]; k],
        m if m == k => model.lambdas().to_vec(),
        m => return Err(invalid(format!("{m} signal strengths given for {k} channels"))),
    };
    for &lam in &lambdas {
        check_lambda(lam)?;
    }
    let mut rng = stream_rng(seed, 0);
    Ok((0..samples)
        .map(|_| raw_overlap(model, n, &lambdas, &mut rng) / n as f64)
        .collect())
}

fn terms_of(overlaps: &[f64], idx: Option<&[usize]>, degree: usize, lf: &LogFactorials) -> Vec<f64> {
    let mut sums = vec![KahanSum::new(); degree + 1];
    let m = idx.map_or(overlaps.len(), <[usize]>::len);
    for i in 0..m {
        let o = match idx {
            Some(ix) => overlaps[ix[i]],
            None => overlaps[i],
        };
        let mut p = 1.0;
        for s in sums.iter_mut() {
            s.add(p);
            p *= o;
        }
    }
    sums.iter()
        .enumerate()
        .map(|(d, s)| s.value() / m as f64 * libm::exp(-lf.ln_fact(d)))
        .collect()
}

/// Monte Carlo estimate of `‖L^{≤D}‖² = E Σ_{d≤D} O^d / d!` with every
/// channel at strength `lambda`. Standard errors come from `bootstrap`
/// resamples drawn on stream 1 of the seed.
pub fn ldlr_montecarlo_overlap(model: &ModelSpec, n: usize, lambda: f64, degree: usize, opts: McOptions) -> Result<LdlrReport> {
    check_lambda(lambda)?;
    if opts.samples < 100 {
        return Err(invalid(format!("need at least 100 samples, got {}", opts.samples)));
    }
    if opts.bootstrap < 2 {
        return Err(invalid("need at least 2 bootstrap resamples"));
    }
    let model = model.with_lambda(lambda);
    let overlaps = overlap_sample(&model, n, opts.samples, opts.seed)?;
    let lf = LogFactorials::new(degree.max(1));
    let terms = terms_of(&overlaps, None, degree, &lf);
    if let Some(d) = terms.iter().position(|t| !t.is_finite()) {
        return Err(Error::NumericalOverflow(format!("Monte Carlo term d={d} is not finite")));
    }
    let mut rng = stream_rng(opts.seed, 1);
    let m = overlaps.len();
    let mut idx = vec![0usize; m];
    let mut boot_terms: Vec<Vec<f64>> = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        for i in idx.iter_mut() {
            *i = rng.random_range(0..m);
        }
        boot_terms.push(terms_of(&overlaps, Some(&idx), degree, &lf));
    }
    let sd = |xs: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = xs.collect();
        let mean = crate::numeric::ksum(v.iter().copied()) / v.len() as f64;
        let var = crate::numeric::ksum(v.iter().map(|x| (x - mean) * (x - mean))) / (v.len() - 1) as f64;
        libm::sqrt(var)
    };
    let term_stderr: Vec<f64> = (0..=degree).map(|d| sd(&mut boot_terms.iter().map(|t| t[d]))).collect();
    let stderr = sd(&mut boot_terms.iter().map(|t| crate::numeric::ksum(t.iter().copied())));
    let l = match &model {
        ModelSpec::Circle { l, .. } | ModelSpec::Cyclic { l, .. } => *l,
        ModelSpec::Group { group, .. } => group.order(),
    };
    Ok(LdlrReport {
        method: Method::MonteCarlo,
        model: model.name(),
        l,
        n,
        lambda,
        degree,
        terms,
        exact_terms: None,
        stderr: Some(stderr),
        term_stderr: Some(term_stderr),
    })
}

/// Mean of `(2/n)·S_L` over `draws` multinomial count vectors, each drawn
/// as a chain of binomials on stream 0 of `seed`. Tends to `L − 1`.
pub fn pearson_mean(l: usize, n: usize, draws: usize, seed: u64) -> Result<crate::ensembles::McEstimate> {
    if l < 1 || n < 1 || draws < 2 {
        return Err(invalid("need L ≥ 1, n ≥ 1 and at least two draws"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut counts = vec![0u64; l];
    let mut xs = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mut rem = n as u64;
        for (k, c) in counts.iter_mut().enumerate() {
            let bins = (l - k) as f64;
            *c = if k + 1 == l || rem == 0 {
                rem
            } else {
                Binomial::new(rem, 1.0 / bins).map_err(|e| invalid(format!("{e}")))?.sample(&mut rng)
            };
            rem -= *c;
        }
        let s = super::scaled_unchecked(&counts, n as u64) as f64 / (2 * l) as f64;
        xs.push(2.0 * s / n as f64);
    }
    Ok(crate::ensembles::McEstimate::from_samples(&xs))
}
