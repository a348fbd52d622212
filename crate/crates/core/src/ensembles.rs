//! Gaussian orthogonal, unitary and symplectic noise matrices.
//!
//! All three are sampled by drawing the upper triangle (blocks, for GSE) and
//! mirroring, so Hermiticity is exact.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{top_eigenvalue, Matrix, C64};
use crate::numeric::KahanSum;
use crate::rng::{derive_seed, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ensemble {
    Goe,
    Gue,
    Gse,
}

impl Ensemble {
    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Goe => "GOE",
            Ensemble::Gue => "GUE",
            Ensemble::Gse => "GSE",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GOE" => Ok(Ensemble::Goe),
            "GUE" => Ok(Ensemble::Gue),
            "GSE" => Ok(Ensemble::Gse),
            _ => Err(invalid(alloc::format!("unknown ensemble '{s}'"))),
        }
    }
}

/// Ensemble and size parameter `n`. GSE(n) is a `2n × 2n` complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnsembleKind {
    pub ensemble: Ensemble,
    pub n: usize,
}

impl EnsembleKind {
    pub fn new(ensemble: Ensemble, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("ensemble size must be at least 1"));
        }
        Ok(Self { ensemble, n })
    }

    /// Size of the sampled matrix.
    pub fn matrix_dim(&self) -> usize {
        match self.ensemble {
            Ensemble::Gse => 2 * self.n,
            _ => self.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMatrix {
    pub entries: Matrix,
    pub kind: EnsembleKind,
    pub seed: u64,
}

/// Draws a noise matrix from stream 0 of `seed`.
pub fn sample(kind: EnsembleKind, seed: u64) -> NoiseMatrix {
    let mut rng = stream_rng(seed, 0);
    NoiseMatrix {
        entries: sample_with(kind, &mut rng),
        kind,
        seed,
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws a noise matrix from an existing generator. Entries are consumed in
/// column-major order of the upper triangle.
pub fn sample_with<R: Rng + ?Sized>(kind: EnsembleKind, rng: &mut R) -> Matrix {
    let n = kind.n;
    match kind.ensemble {
        Ensemble::Goe => {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                for i in 0..j {
                    let x = normal(rng);
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
                m[(j, j)] = core::f64::consts::SQRT_2 * normal(rng);
            }
            Matrix::Real(m)
        }
        Ensemble::Gue => {
            let h = core::f64::consts::FRAC_1_SQRT_2;
            let mut m = DMatrix::<C64>::zeros(n, n);
            for j in 0..n {
                for i in 0..j {
                    let z = C64::new(h * normal(rng), h * normal(rng));
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
                m[(j, j)] = C64::new(normal(rng), 0.0);
            }
            Matrix::Complex(m)
        }
        Ensemble::Gse => {
            let mut m = DMatrix::<C64>::zeros(2 * n, 2 * n);
            for q in 0..n {
                for p in 0..q {
                    let [a, b, c, d] = [0; 4].map(|_| 0.5 * normal(rng));
                    let block = quaternion_block(a, b, c, d);
                    for (r, s) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        let z = block[r][s];
                        m[(2 * p + r, 2 * q + s)] = z;
                        m[(2 * q + s, 2 * p + r)] = z.conj();
                    }
                }
                let a = core::f64::consts::FRAC_1_SQRT_2 * normal(rng);
                m[(2 * q, 2 * q)] = C64::new(a, 0.0);
                m[(2 * q + 1, 2 * q + 1)] = C64::new(a, 0.0);
            }
            Matrix::Complex(m)
        }
    }
}

/// `[[a+bi, c+di], [−c+di, a−bi]]`.
pub fn quaternion_block(a: f64, b: f64, c: f64, d: f64) -> [[C64; 2]; 2] {
    [
        [C64::new(a, b), C64::new(c, d)],
        [C64::new(-c, d), C64::new(a, -b)],
    ]
}

/// Monte Carlo mean and standard error of a statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let m = xs.len();
        let mean = xs.iter().copied().collect::<KahanSum>().value() / m as f64;
        let var = if m > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).collect::<KahanSum>().value() / (m - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            stderr: libm::sqrt(var / m as f64),
            trials: m,
        }
    }
}

/// Mean and standard error of `λ_max(W)/√n` over `trials` independent
/// matrices. Trial `t` uses seed `derive_seed(seed, t)`.
pub fn spectral_edge_check(kind: EnsembleKind, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let scale = libm::sqrt(kind.n as f64);
    let tops = (0..trials)
        .map(|t| {
            let w = sample(kind, derive_seed(seed, t as u64));
            top_eigenvalue(&w.entries, 1e-9).map(|x| x / scale)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(McEstimate::from_samples(&tops))
}

/// Largest gap within the Kramers pairs of a sorted spectrum:
/// `max_i |λ_{2i} − λ_{2i+1}|`.
pub fn kramers_pairing_defect(sorted: &[f64]) -> f64 {
    sorted
        .chunks(2)
        .map(|p| if p.len() == 2 { (p[1] - p[0]).abs() } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::has_quaternionic_blocks;
    use crate::linalg::hermitian_eigenvalues;

    fn kind(e: Ensemble, n: usize) -> EnsembleKind {
        EnsembleKind::new(e, n).unwrap()
    }

    #[test]
    fn exact_hermiticity_and_structure() {
        for e in [Ensemble::Goe, Ensemble::Gue, Ensemble::Gse] {
            for n in [1, 2, 7, 30] {
                let w = sample(kind(e, n), 5 + n as u64);
                assert!(w.entries.is_exactly_hermitian(), "{} n={n}", e.name());
                assert_eq!(w.entries.dim(), kind(e, n).matrix_dim());
            }
        }
        assert!(sample(kind(Ensemble::Goe, 5), 1).entries.is_real());
        let Matrix::Complex(g) = sample(kind(Ensemble::Gse, 6), 2).entries else { panic!() };
        assert!(has_quaternionic_blocks(&g));
        for q in 0..6 {
            assert_eq!(g[(2 * q, 2 * q + 1)], C64::new(0.0, 0.0));
            assert_eq!(g[(2 * q, 2 * q)], g[(2 * q + 1, 2 * q + 1)]);
        }
    }

    #[test]
    fn gse_block_entry_relation() {
        let Matrix::Complex(g) = sample(kind(Ensemble::Gse, 3), 9).entries else { panic!() };
        // Block (1,2) of the quaternion matrix: rows 0..2, cols 2..4.
        assert_eq!(g[(1, 2)], -g[(0, 3)].conj());
    }

    #[test]
    fn deterministic_given_seed() {
        let k = kind(Ensemble::Gue, 20);
        assert_eq!(sample(k, 3), sample(k, 3));
        assert_ne!(sample(k, 3).entries, sample(k, 4).entries);
    }

    #[test]
    fn kramers_pairs() {
        for seed in 0..3 {
            let w = sample(kind(Ensemble::Gse, 40), seed);
            let ev = hermitian_eigenvalues(&w.entries).unwrap();
            assert!(kramers_pairing_defect(&ev) < 1e-8);
        }
    }

    #[test]
    fn entry_variances() {
        let trials = 10_000;
        let mut goe_diag = Vec::new();
        let mut gue_off = KahanSum::new();
        let mut gse_diag = Vec::new();
        for t in 0..trials {
            let seed = derive_seed(77, t);
            goe_diag.push(sample(kind(Ensemble::Goe, 2), seed).entries.get(0, 0).re);
            gue_off.add(sample(kind(Ensemble::Gue, 2), seed).entries.get(0, 1).norm_sqr());
            gse_diag.push(sample(kind(Ensemble::Gse, 1), seed).entries.get(0, 0).re);
        }
        let var = |xs: &[f64]| xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((var(&goe_diag) - 2.0).abs() < 0.1);
        assert!((gue_off.value() / trials as f64 - 1.0).abs() < 0.05);
        assert!((var(&gse_diag) - 0.5).abs() < 0.03);
    }

    #[test]
    fn single_entry_gue_edge() {
        let est = spectral_edge_check(kind(Ensemble::Gue, 1), 10_000, 1).unwrap();
        assert!(est.mean.abs() < 0.1);
    }

    #[test]
    fn gse_edge_near_two() {
        let est = spectral_edge_check(kind(Ensemble::Gse, 150), 5, 4).unwrap();
        assert!((est.mean - 2.0).abs() < 0.15, "{}", est.mean);
    }
}
