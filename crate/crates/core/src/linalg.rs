//! Dense matrices with a real/complex split and Hermitian eigenvalue routines.

use alloc::vec::Vec;

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use num_traits::Zero;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

pub type C64 = Complex<f64>;

/// A dense square matrix. Real-type channels keep real storage; both variants
/// are used through the same complex interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl Matrix {
    pub fn dim(&self) -> usize {
        match self {
            Matrix::Real(m) => m.nrows(),
            Matrix::Complex(m) => m.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Matrix::Real(_))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self {
            Matrix::Real(m) => C64::new(m[(i, j)], 0.0),
            Matrix::Complex(m) => m[(i, j)],
        }
    }

    pub fn to_complex(&self) -> DMatrix<C64> {
        match self {
            Matrix::Real(m) => m.map(|x| C64::new(x, 0.0)),
            Matrix::Complex(m) => m.clone(),
        }
    }

    /// `max |H_ij - conj(H_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        match self {
            Matrix::Real(m) => {
                for j in 0..n {
                    for i in j..n {
                        worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
                    }
                }
            }
            Matrix::Complex(m) => {
                for j in 0..n {
                    for i in j..n {
                        worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// True when the matrix equals its conjugate transpose bit for bit.
    pub fn is_exactly_hermitian(&self) -> bool {
        self.hermitian_defect() == 0.0
    }

    pub fn scale(&mut self, s: f64) {
        match self {
            Matrix::Real(m) => *m *= s,
            Matrix::Complex(m) => m.iter_mut().for_each(|z| *z *= s),
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        let n = self.dim();
        assert_eq!(n, other.dim());
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((self.get(i, j) - other.get(i, j)).norm());
            }
        }
        worst
    }
}

/// All eigenvalues of a Hermitian matrix, ascending. Dense `O(n^3)`.
pub fn hermitian_eigenvalues(h: &Matrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let mut ev: Vec<f64> = match h {
        Matrix::Real(m) => SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect(),
        Matrix::Complex(m) => SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect(),
    };
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

const HERMITIAN_TOL: f64 = 1e-8;
const DENSE_CUTOFF: usize = 48;
/// Seed of the fixed Lanczos start vector.
const START_SEED: u64 = 0x1a2c_05ee_d000_0001;

fn check_hermitian(h: &Matrix) -> Result<()> {
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(invalid(alloc::format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Options for [`top_eigenvalue_with`].
#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Target accuracy on the eigenvalue, relative to `max(1, |λ|)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 600,
        }
    }
}

/// Largest eigenvalue of a Hermitian matrix to within `tol`.
pub fn top_eigenvalue(h: &Matrix, tol: f64) -> Result<f64> {
    top_eigenvalue_with(
        h,
        EigenOptions {
            tol,
            ..EigenOptions::default()
        },
    )
}

/// Largest eigenvalue by Lanczos with full reorthogonalisation; small matrices
/// go through the dense solver. The start vector is a fixed pseudo-random
/// vector, so the result is a deterministic function of the input.
pub fn top_eigenvalue_with(h: &Matrix, opts: EigenOptions) -> Result<f64> {
    check_hermitian(h)?;
    let n = h.dim();
    if n == 0 {
        return Err(invalid("empty matrix"));
    }
    if n <= DENSE_CUTOFF {
        let ev = hermitian_eigenvalues(h)?;
        return Ok(ev[n - 1]);
    }
    match h {
        Matrix::Real(m) => {
            let mut rng = stream_rng(START_SEED, 0);
            let v0 = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            lanczos_top(m, v0, opts)
        }
        Matrix::Complex(m) => {
            let mut rng = stream_rng(START_SEED, 0);
            let v0 = DVector::from_fn(n, |_, _| {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            lanczos_top(m, v0, opts)
        }
    }
}

fn lanczos_top<T>(a: &DMatrix<T>, v0: DVector<T>, opts: EigenOptions) -> Result<f64>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = a.nrows();
    let max_iter = opts.max_iter.min(n).max(2);
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(max_iter + 1);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_iter);
    let mut beta: Vec<f64> = Vec::with_capacity(max_iter);

    let norm0 = v0.norm();
    basis.push(v0.unscale(norm0));
    let mut w = DVector::<T>::zeros(n);
    let mut last = (f64::NAN, f64::INFINITY);

    for k in 0..max_iter {
        w.gemv(T::one(), a, &basis[k], T::zero());
        let ak = basis[k].dotc(&w).real();
        alpha.push(ak);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w.axpy(-c, q, T::one());
            }
        }
        let bk = w.norm();
        beta.push(bk);

        let m = k + 1;
        let check = m == max_iter || m % 4 == 0 || bk <= f64::EPSILON * 64.0 * ak.abs().max(1.0);
        if m >= 2 && check {
            let (theta, err) = ritz_top(&alpha, &beta);
            last = (theta, err);
            if err <= opts.tol * theta.abs().max(1.0) {
                return Ok(theta);
            }
        }
        if bk <= f64::EPSILON * 64.0 * ak.abs().max(1.0) || m == n {
            // Invariant subspace: the Ritz values are exact.
            let (theta, _) = ritz_top(&alpha, &beta);
            return Ok(theta);
        }
        if m == max_iter {
            break;
        }
        basis.push(w.unscale(bk));
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: last.1,
    })
}

/// Top Ritz value of the Lanczos tridiagonal and an error bound for it:
/// the smaller of the residual and the gap-based bound `r^2 / gap`.
fn ritz_top(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (mut top, mut second) = (0usize, None::<usize>);
    for i in 1..m {
        if eig.eigenvalues[i] > eig.eigenvalues[top] {
            second = Some(top);
            top = i;
        } else if second.is_none_or(|s| eig.eigenvalues[i] > eig.eigenvalues[s]) {
            second = Some(i);
        }
    }
    let theta = eig.eigenvalues[top];
    let resid = (beta[m - 1] * eig.eigenvectors[(m - 1, top)]).abs();
    let gap = second.map_or(f64::INFINITY, |s| theta - eig.eigenvalues[s]);
    let bound = if gap > resid { resid.min(resid * resid / gap) } else { resid };
    (theta, bound)
}

/// Rayleigh quotient `x* H x / ‖x‖²`.
pub fn rayleigh_quotient(h: &Matrix, x: &[C64]) -> f64 {
    let n = h.dim();
    let mut num = C64::zero();
    let mut den = 0.0;
    for i in 0..n {
        let mut hx = C64::zero();
        for j in 0..n {
            hx += h.get(i, j) * x[j];
        }
        num += x[i].conj() * hx;
        den += x[i].norm_sqr();
    }
    num.re / den
}
