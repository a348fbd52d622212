//! Samplers for the synchronization models and the noisy-indicator view.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensembles::{sample_with, Ensemble, EnsembleKind};
use crate::error::{invalid, Result};
use crate::group::{
    block_layout, regular_rep_unitary, root_of_unity, Convention, FiniteGroup, Irrep, IrrepList,
    IrrepType,
};
use crate::linalg::{Matrix, C64};
use crate::rng::stream_rng;

/// Prior on the hidden signal coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prior {
    UniformCircle,
    Cyclic(usize),
    /// Uniform over the elements of a finite group of the given order.
    HaarFinite(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalValues {
    /// Angles `θ_k ∈ [0, 2π)`; the coordinate is `e^{iθ_k}`.
    Angles(Vec<f64>),
    /// Element indices.
    Elements(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    pub prior: Prior,
    pub values: SignalValues,
}

impl SignalVector {
    pub fn len(&self) -> usize {
        match &self.values {
            SignalValues::Angles(a) => a.len(),
            SignalValues::Elements(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entrywise `ℓ`-th power `x^{(ℓ)}` of the unit-modulus representation.
    /// Group-valued signals use the character `g ↦ e^{2πi ℓ g/L}` of ℤ_L.
    pub fn power(&self, ell: i64) -> Result<Vec<C64>> {
        match (&self.values, self.prior) {
            (SignalValues::Angles(a), _) => Ok(a
                .iter()
                .map(|&t| {
                    let x = ell as f64 * t;
                    C64::new(libm::cos(x), libm::sin(x))
                })
                .collect()),
            (SignalValues::Elements(e), Prior::Cyclic(l)) => {
                Ok(e.iter().map(|&g| root_of_unity(ell * g as i64, l)).collect())
            }
            _ => Err(invalid("entrywise powers need a circle or cyclic signal")),
        }
    }

    pub fn elements(&self) -> Option<&[usize]> {
        match &self.values {
            SignalValues::Elements(e) => Some(e),
            SignalValues::Angles(_) => None,
        }
    }

    /// Count of coordinates equal to each element (finite priors).
    pub fn counts(&self, order: usize) -> Option<Vec<u64>> {
        let e = self.elements()?;
        let mut c = alloc::vec![0u64; order];
        for &g in e {
            c[g] += 1;
        }
        Some(c)
    }
}

/// I.i.d. draw from `prior`, generated from stream 0 of `seed`.
pub fn sample_signal(prior: Prior, n: usize, seed: u64) -> Result<SignalVector> {
    if n == 0 {
        return Err(invalid("signal length must be at least 1"));
    }
    let mut rng = stream_rng(seed, 0);
    let values = match prior {
        Prior::UniformCircle => SignalValues::Angles(
            (0..n)
                .map(|_| rng.random::<f64>() * core::f64::consts::TAU)
                .collect(),
        ),
        Prior::Cyclic(l) | Prior::HaarFinite(l) => {
            if l == 0 {
                return Err(invalid("finite prior needs a positive order"));
            }
            SignalValues::Elements((0..n).map(|_| rng.random_range(0..l)).collect())
        }
    };
    Ok(SignalVector { prior, values })
}

/// One observed frequency / irrep channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: String,
    pub lambda: f64,
    pub kind: IrrepType,
    /// `d_ρ` in the noise scaling (quaternionic dimension for quaternionic type).
    pub model_dim: usize,
    pub ensemble: Ensemble,
    /// Factor applied to the ensemble matrix, `1/√(n d_ρ)`.
    pub noise_scale: f64,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynchObservation {
    pub model: String,
    pub n: usize,
    pub seed: u64,
    /// False only for observations assembled from independent indicator
    /// scores, where `z_kj` and `z_jk` are not tied together.
    pub hermitian: bool,
    pub channels: Vec<Channel>,
}

/// A synchronization model ready to be sampled at any `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Frequencies `ℓ = 1..L`, GUE noise.
    Circle { l: usize, lambdas: Vec<f64> },
    /// Frequencies `ℓ = 1..⌊L/2⌋`; `ℓ = L/2` is real with GOE noise.
    Cyclic { l: usize, lambdas: Vec<f64> },
    /// One channel per irrep in a nonredundant list.
    Group {
        name: String,
        group: FiniteGroup,
        irreps: IrrepList,
        lambdas: Vec<f64>,
    },
}

fn broadcast(lambdas: &[f64], count: usize) -> Result<Vec<f64>> {
    if let Some(bad) = lambdas.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(invalid(format!("signal strength must be finite and ≥ 0, got {bad}")));
    }
    match lambdas.len() {
        1 => Ok(alloc::vec![lambdas[0]; count]),
        k if k == count => Ok(lambdas.to_vec()),
        k => Err(invalid(format!("{k} signal strengths given for {count} channels"))),
    }
}

impl ModelSpec {
    pub fn channel_count(&self) -> usize {
        match self {
            ModelSpec::Circle { l, .. } => *l,
            ModelSpec::Cyclic { l, .. } => l / 2,
            ModelSpec::Group { irreps, .. } => irreps.len(),
        }
    }

    pub fn lambdas(&self) -> &[f64] {
        match self {
            ModelSpec::Circle { lambdas, .. }
            | ModelSpec::Cyclic { lambdas, .. }
            | ModelSpec::Group { lambdas, .. } => lambdas,
        }
    }

    /// Same model with every channel at strength `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut m = self.clone();
        let k = self.channel_count();
        match &mut m {
            ModelSpec::Circle { lambdas, .. }
            | ModelSpec::Cyclic { lambdas, .. }
            | ModelSpec::Group { lambdas, .. } => *lambdas = alloc::vec![lambda; k],
        }
        m
    }

    pub fn name(&self) -> String {
        match self {
            ModelSpec::Circle { l, .. } => format!("circle(L={l})"),
            ModelSpec::Cyclic { l, .. } => format!("cyclic(L={l})"),
            ModelSpec::Group { name, .. } => format!("group({name})"),
        }
    }

    /// Ensemble and noise scale of each channel, in channel order.
    pub fn noise_layout(&self, n: usize) -> Vec<(EnsembleKind, f64)> {
        let s = 1.0 / libm::sqrt(n as f64);
        match self {
            ModelSpec::Circle { l, .. } => alloc::vec![(EnsembleKind { ensemble: Ensemble::Gue, n }, s); *l],
            ModelSpec::Cyclic { l, .. } => (1..=l / 2)
                .map(|ell| {
                    let e = if 2 * ell == *l { Ensemble::Goe } else { Ensemble::Gue };
                    (EnsembleKind { ensemble: e, n }, s)
                })
                .collect(),
            ModelSpec::Group { irreps, .. } => irreps
                .iter()
                .map(|r| {
                    let d = r.model_dim();
                    (
                        EnsembleKind {
                            ensemble: ensemble_for(r.kind()),
                            n: n * d,
                        },
                        1.0 / libm::sqrt((n * d) as f64),
                    )
                })
                .collect(),
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<SynchObservation> {
        match self {
            ModelSpec::Circle { l, lambdas } => sample_gsynch_circle(*l, lambdas, n, seed),
            ModelSpec::Cyclic { l, lambdas } => sample_gsynch_cyclic(*l, lambdas, n, seed),
            ModelSpec::Group {
                name,
                group,
                irreps,
                lambdas,
            } => {
                let mut obs = sample_gsynch_group(group, irreps, lambdas, n, seed)?;
                obs.model = format!("group({name})");
                Ok(obs)
            }
        }
    }
}

pub fn ensemble_for(kind: IrrepType) -> Ensemble {
    match kind {
        IrrepType::Real => Ensemble::Goe,
        IrrepType::Complex => Ensemble::Gue,
        IrrepType::Quaternionic => Ensemble::Gse,
    }
}

/// `Y = signal + scale·W`, computed on the upper triangle and mirrored.
fn assemble(signal: impl Fn(usize, usize) -> C64, noise: &Matrix, scale: f64, real: bool) -> Matrix {
    let n = noise.dim();
    if real {
        let Matrix::Real(w) = noise else { unreachable!("real channel with complex noise") };
        let mut y = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = signal(i, j).re + w[(i, j)] * scale;
                y[(i, j)] = v;
                y[(j, i)] = v;
            }
        }
        Matrix::Real(y)
    } else {
        let mut y = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            for i in 0..j {
                let v = signal(i, j) + noise.get(i, j) * scale;
                y[(i, j)] = v;
                y[(j, i)] = v.conj();
            }
            y[(j, j)] = C64::new(signal(j, j).re + noise.get(j, j).re * scale, 0.0);
        }
        Matrix::Complex(y)
    }
}

fn rank_one_channel(
    label: String,
    lambda: f64,
    x: &[C64],
    kind: IrrepType,
    ensemble: Ensemble,
    seed: u64,
    stream: u64,
) -> Channel {
    let n = x.len();
    let noise = sample_with(EnsembleKind { ensemble, n }, &mut stream_rng(seed, stream));
    let scale = 1.0 / libm::sqrt(n as f64);
    let c = lambda / n as f64;
    let matrix = assemble(|i, j| (x[i] * x[j].conj()) * c, &noise, scale, ensemble == Ensemble::Goe);
    Channel {
        label,
        lambda,
        kind,
        model_dim: 1,
        ensemble,
        noise_scale: scale,
        matrix,
    }
}

/// Circle model: `Y_ℓ = (λ_ℓ/n) x^{(ℓ)} x^{(ℓ)*} + W_ℓ/√n`, `ℓ = 1..L`.
/// Signal from stream 0, noise of channel `c` from stream `c + 1`.
pub fn sample_gsynch_circle(l: usize, lambdas: &[f64], n: usize, seed: u64) -> Result<SynchObservation> {
    if l == 0 {
        return Err(invalid("circle model needs L ≥ 1"));
    }
    let lambdas = broadcast(lambdas, l)?;
    let x = sample_signal(Prior::UniformCircle, n, seed)?;
    let channels = (1..=l)
        .map(|ell| {
            let xl = x.power(ell as i64)?;
            Ok(rank_one_channel(
                format!("l={ell}"),
                lambdas[ell - 1],
                &xl,
                IrrepType::Complex,
                Ensemble::Gue,
                seed,
                ell as u64,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynchObservation {
        model: format!("circle(L={l})"),
        n,
        seed,
        hermitian: true,
        channels,
    })
}

/// Cyclic model over ℤ_L with frequencies `ℓ = 1..⌊L/2⌋`.
pub fn sample_gsynch_cyclic(l: usize, lambdas: &[f64], n: usize, seed: u64) -> Result<SynchObservation> {
    if l < 2 {
        return Err(invalid(format!("cyclic model needs L ≥ 2, got {l}")));
    }
    let lambdas = broadcast(lambdas, l / 2)?;
    let x = sample_signal(Prior::Cyclic(l), n, seed)?;
    let channels = (1..=l / 2)
        .map(|ell| {
            let xl = x.power(ell as i64)?;
            let (kind, ens) = if 2 * ell == l {
                (IrrepType::Real, Ensemble::Goe)
            } else {
                (IrrepType::Complex, Ensemble::Gue)
            };
            Ok(rank_one_channel(format!("k={ell}"), lambdas[ell - 1], &xl, kind, ens, seed, ell as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynchObservation {
        model: format!("cyclic(L={l})"),
        n,
        seed,
        hermitian: true,
        channels,
    })
}

/// Block `(k, j)` of `X X*`: `ρ(u_k) ρ(u_j)*`, entry `(r, s)`.
fn block_entry(a: &DMatrix<C64>, b: &DMatrix<C64>, r: usize, s: usize) -> C64 {
    let d = a.ncols();
    let mut acc = a[(r, 0)] * b[(s, 0)].conj();
    for t in 1..d {
        acc += a[(r, t)] * b[(s, t)].conj();
    }
    acc
}

/// Finite-group model: per irrep `ρ`,
/// `Y_ρ = (λ_ρ/n) X_ρ X_ρ* + W_ρ/√(n d_ρ)`, with the ensemble matching the
/// irrep type.
pub fn sample_gsynch_group(
    group: &FiniteGroup,
    irreps: &IrrepList,
    lambdas: &[f64],
    n: usize,
    seed: u64,
) -> Result<SynchObservation> {
    if irreps.convention() != Convention::Nonredundant {
        return Err(invalid("the group model takes a nonredundant irrep list"));
    }
    if irreps.iter().any(|r| r.matrices().len() != group.order()) {
        return Err(invalid("irrep list does not belong to this group"));
    }
    let lambdas = broadcast(lambdas, irreps.len())?;
    let u = sample_signal(Prior::HaarFinite(group.order()), n, seed)?;
    let u = u.elements().expect("finite prior");
    let channels = irreps
        .iter()
        .enumerate()
        .map(|(c, r)| group_channel(r, lambdas[c], u, seed, c as u64 + 1))
        .collect();
    Ok(SynchObservation {
        model: format!("group(order={})", group.order()),
        n,
        seed,
        hermitian: true,
        channels,
    })
}

fn group_channel(r: &Irrep, lambda: f64, u: &[usize], seed: u64, stream: u64) -> Channel {
    let n = u.len();
    let dc = r.complex_dim();
    let d = r.model_dim();
    let ensemble = ensemble_for(r.kind());
    let noise = sample_with(EnsembleKind { ensemble, n: n * d }, &mut stream_rng(seed, stream));
    let scale = 1.0 / libm::sqrt((n * d) as f64);
    let c = lambda / n as f64;
    let real = ensemble == Ensemble::Goe && r.is_real_valued();
    let noise = if ensemble == Ensemble::Goe && !real {
        Matrix::Complex(noise.to_complex())
    } else {
        noise
    };
    let signal = |i: usize, j: usize| {
        let (k, a) = (i / dc, i % dc);
        let (l, b) = (j / dc, j % dc);
        block_entry(r.matrix(u[k]), r.matrix(u[l]), a, b) * c
    };
    Channel {
        label: String::from(r.label()),
        lambda,
        kind: r.kind(),
        model_dim: d,
        ensemble,
        noise_scale: scale,
        matrix: assemble(signal, &noise, scale, real),
    }
}

/// Scores `z_kj(g)` for every ordered pair `(k, j)`, diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorObservation {
    pub n: usize,
    pub order: usize,
    pub gamma: f64,
    pub seed: u64,
    /// Planted elements `g_k*`.
    pub signal: Vec<usize>,
    /// `z[(k·n + j)·order + g]`.
    pub scores: Vec<C64>,
}

impl IndicatorObservation {
    pub fn score(&self, k: usize, j: usize, g: usize) -> C64 {
        self.scores[(k * self.n + j) * self.order + g]
    }
}

/// `z_kj(g) = γ·1{g = g_k g_j⁻¹} + w_kj(g)` with independent standard complex
/// Gaussian `w` (`E|w|² = 1`). Signal from stream 0, noise from stream 1.
pub fn sample_indicator(group: &FiniteGroup, n: usize, gamma: f64, seed: u64) -> Result<IndicatorObservation> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(invalid("γ must be finite and ≥ 0"));
    }
    let l = group.order();
    let signal = sample_signal(Prior::HaarFinite(l), n, seed)?;
    let signal = signal.elements().expect("finite prior").to_vec();
    let mut rng = stream_rng(seed, 1);
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut scores = Vec::with_capacity(n * n * l);
    for k in 0..n {
        for j in 0..n {
            let rel = group.mul(signal[k], group.inv(signal[j]));
            for g in 0..l {
                let w = C64::new(h * rng.sample::<f64, _>(StandardNormal), h * rng.sample::<f64, _>(StandardNormal));
                scores.push(if g == rel { w + gamma } else { w });
            }
        }
    }
    Ok(IndicatorObservation {
        n,
        order: l,
        gamma,
        seed,
        signal,
        scores,
    })
}

/// Noise-free scores `z_kj(g) = γ·1{g = g_k g_j⁻¹}` with the same planted
/// elements [`sample_indicator`] draws for `seed`.
pub fn indicator_noise_free(group: &FiniteGroup, n: usize, gamma: f64, seed: u64) -> Result<IndicatorObservation> {
    let mut obs = sample_indicator(group, n, gamma, seed)?;
    let l = group.order();
    for k in 0..n {
        for j in 0..n {
            let rel = group.mul(obs.signal[k], group.inv(obs.signal[j]));
            for g in 0..l {
                obs.scores[(k * n + j) * l + g] = C64::new(if g == rel { gamma } else { 0.0 }, 0.0);
            }
        }
    }
    Ok(obs)
}

/// Maps indicator scores to the canonical per-irrep observation.
///
/// For each pair, `Ỹ_kj(t, s) = z_kj(t s⁻¹)` is conjugated by the Peter–Weyl
/// unitary `U`; the first diagonal copy of each irrep block, multiplied by
/// `1/√(nL)`, becomes block `(k, j)` of `Y_ρ`. With `γ = λ√(L/n)` the signal
/// part is `(λ/n) ρ(g_k) ρ(g_j)⁻¹` and the noise entries have variance
/// `1/(n d)` with `d` the complex dimension. Channels follow the
/// nonredundant selection of `irreps`. Since `z_kj` and `z_jk` are
/// independent the result is not Hermitian.
pub fn indicator_to_canonical(
    obs: &IndicatorObservation,
    group: &FiniteGroup,
    irreps: &IrrepList,
) -> Result<SynchObservation> {
    let l = group.order();
    if obs.order != l || obs.scores.len() != obs.n * obs.n * l {
        return Err(invalid("indicator observation does not match the group"));
    }
    let u = regular_rep_unitary(group, irreps)?;
    let layout = block_layout(irreps.entries());
    let keep = irreps.nonredundant_indices();
    let n = obs.n;
    let scale = 1.0 / libm::sqrt((n * l) as f64);
    let mut mats: Vec<DMatrix<C64>> = keep
        .iter()
        .map(|&i| {
            let d = irreps.entries()[i].complex_dim();
            DMatrix::zeros(n * d, n * d)
        })
        .collect();
    let mut ytilde = DMatrix::<C64>::zeros(l, l);
    for k in 0..n {
        for j in 0..n {
            for t in 0..l {
                for s in 0..l {
                    ytilde[(t, s)] = obs.score(k, j, group.mul(t, group.inv(s)));
                }
            }
            let b = &u * &ytilde * u.adjoint();
            for (m, &i) in mats.iter_mut().zip(&keep) {
                let d = irreps.entries()[i].complex_dim();
                let off = layout.copy_offset(i, 0);
                for bs in 0..d {
                    for br in 0..d {
                        m[(k * d + br, j * d + bs)] = b[(off + br, off + bs)] * scale;
                    }
                }
            }
        }
    }
    let lambda = obs.gamma * libm::sqrt(n as f64 / l as f64);
    let channels = keep
        .iter()
        .zip(mats)
        .map(|(&i, m)| {
            let r = &irreps.entries()[i];
            Channel {
                label: String::from(r.label()),
                lambda,
                kind: r.kind(),
                model_dim: r.model_dim(),
                ensemble: ensemble_for(r.kind()),
                noise_scale: scale,
                matrix: Matrix::Complex(m),
            }
        })
        .collect();
    Ok(SynchObservation {
        model: format!("indicator(order={l})"),
        n,
        seed: obs.seed,
        hermitian: false,
        channels,
    })
}

/// Noise-free canonical signal `(λ/n) X_ρ X_ρ*` for a given planted vector.
pub fn canonical_signal(irrep: &Irrep, lambda: f64, u: &[usize]) -> DMatrix<C64> {
    let dc = irrep.complex_dim();
    let n = u.len();
    let c = lambda / n as f64;
    DMatrix::from_fn(n * dc, n * dc, |i, j| {
        block_entry(irrep.matrix(u[i / dc]), irrep.matrix(u[j / dc]), i % dc, j % dc) * c
    })
}
