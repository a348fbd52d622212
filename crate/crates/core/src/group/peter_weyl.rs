//! Regular representation and its block diagonalisation.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{Convention, FiniteGroup, Irrep, IrrepList, STRUCT_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg::C64;

/// Left regular representation: `ρ_reg(h)[t, s] = 1` iff `t = h·s`.
pub fn regular_rep(group: &FiniteGroup, h: usize) -> DMatrix<f64> {
    let l = group.order();
    let mut m = DMatrix::zeros(l, l);
    for s in 0..l {
        m[(group.mul(h, s), s)] = 1.0;
    }
    m
}

/// Where each irrep's copies sit on the diagonal of `U ρ_reg U*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    /// `(offset, complex dim)` per irrep; the irrep's `d` copies start at
    /// `offset + c·d` for `c = 0..d`.
    pub blocks: Vec<(usize, usize)>,
}

impl BlockLayout {
    pub fn copy_offset(&self, irrep: usize, copy: usize) -> usize {
        let (off, d) = self.blocks[irrep];
        off + copy * d
    }

    /// Dimensions of every diagonal block, copies included.
    pub fn diagonal_dims(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|&(_, d)| core::iter::repeat_n(d, d)).collect()
    }
}

pub fn block_layout(irreps: &[Irrep]) -> BlockLayout {
    let mut off = 0;
    let blocks = irreps
        .iter()
        .map(|r| {
            let d = r.complex_dim();
            let b = (off, d);
            off += d * d;
            b
        })
        .collect();
    BlockLayout { blocks }
}

fn coefficient_rows(group: &FiniteGroup, irreps: &[Irrep]) -> DMatrix<C64> {
    let l = group.order();
    let rows: usize = irreps.iter().map(|r| r.complex_dim().pow(2)).sum();
    let mut u = DMatrix::<C64>::zeros(rows, l);
    let mut row = 0;
    for r in irreps {
        let d = r.complex_dim();
        let scale = libm::sqrt(d as f64 / l as f64);
        for j in 0..d {
            for i in 0..d {
                for g in 0..l {
                    u[(row, g)] = r.matrix(g)[(i, j)] * scale;
                }
                row += 1;
            }
        }
    }
    u
}

/// Unitary `U` whose rows are the scaled matrix coefficients
/// `√(d/L)·ρ(g)_{ij}`, ordered by irrep, then column `j`, then row `i`.
/// With this order `U ρ_reg(h) U*` is block diagonal with `ρ(h)` repeated
/// `d` times, laid out as in [`block_layout`].
pub fn regular_rep_unitary(group: &FiniteGroup, irreps: &IrrepList) -> Result<DMatrix<C64>> {
    if irreps.convention() != Convention::Full {
        return Err(invalid("regular_rep_unitary needs the full irrep list"));
    }
    let u = coefficient_rows(group, irreps.entries());
    let l = group.order();
    let defect = max_identity_defect(&(&u * u.adjoint()));
    if u.nrows() != l || defect > STRUCT_TOL {
        return Err(Error::NumericalInconsistency(format!(
            "Peter–Weyl matrix is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(u)
}

/// Largest deviation of the scaled matrix coefficients from orthonormality
/// in `L²(G)` with normalised counting measure. Works on partial lists.
pub fn peter_weyl_orthogonality_check(group: &FiniteGroup, irreps: &[Irrep]) -> f64 {
    let u = coefficient_rows(group, irreps);
    max_identity_defect(&(&u * u.adjoint()))
}

fn max_identity_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_catalog, build_cyclic, build_dihedral, build_quaternion8, CatalogGroup};

    fn conjugate(u: &DMatrix<C64>, m: &DMatrix<f64>) -> DMatrix<C64> {
        u * m.map(|x| C64::new(x, 0.0)) * u.adjoint()
    }

    #[test]
    fn regular_rep_is_homomorphism() {
        let (g, _) = build_dihedral(4).unwrap();
        for a in 0..g.order() {
            for b in 0..g.order() {
                assert_eq!(regular_rep(&g, a) * regular_rep(&g, b), regular_rep(&g, g.mul(a, b)));
            }
        }
    }

    #[test]
    fn cyclic_unitary_is_dft() {
        let l = 7;
        let (g, full) = build_cyclic(l).unwrap();
        let u = regular_rep_unitary(&g, &full).unwrap();
        for k in 0..l {
            for x in 0..l {
                let dft = crate::group::root_of_unity((k * x) as i64, l) / (l as f64).sqrt();
                assert!((u[(k, x)] - dft).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn block_diagonal_for_all_catalog_groups() {
        let mut cases = alloc::vec![CatalogGroup::Quaternion8, CatalogGroup::Cyclic(5)];
        cases.extend((3..=6).map(CatalogGroup::Dihedral));
        for c in cases {
            let (g, full) = build_catalog(c).unwrap();
            let u = regular_rep_unitary(&g, &full).unwrap();
            let layout = block_layout(full.entries());
            for h in 0..g.order() {
                let b = conjugate(&u, &regular_rep(&g, h));
                let mut expected = DMatrix::<C64>::zeros(g.order(), g.order());
                for (ri, r) in full.iter().enumerate() {
                    let d = r.complex_dim();
                    for copy in 0..d {
                        let off = layout.copy_offset(ri, copy);
                        expected.view_mut((off, off), (d, d)).copy_from(r.matrix(h));
                    }
                }
                let err = b.iter().zip(expected.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                assert!(err < 1e-10, "{} h={h}: {err}", c.name());
            }
        }
    }

    #[test]
    fn identity_conjugates_to_identity() {
        let (g, full) = build_quaternion8();
        let u = regular_rep_unitary(&g, &full).unwrap();
        let b = conjugate(&u, &regular_rep(&g, g.identity()));
        assert!(max_identity_defect(&b) < 1e-12);
    }

    #[test]
    fn s3_block_pattern() {
        let (_, full) = build_dihedral(3).unwrap();
        assert_eq!(block_layout(full.entries()).diagonal_dims(), alloc::vec![1, 1, 2, 2]);
    }

    #[test]
    fn orthogonality_examples() {
        let (g5, f5) = build_cyclic(5).unwrap();
        assert!(peter_weyl_orthogonality_check(&g5, f5.entries()) < 1e-12);
        let (q, fq) = build_quaternion8();
        assert!(peter_weyl_orthogonality_check(&q, fq.entries()) < 1e-10);
        let (d, fd) = build_dihedral(5).unwrap();
        assert!(peter_weyl_orthogonality_check(&d, &fd.entries()[..1]) < 1e-15);
    }

    #[test]
    fn nonredundant_list_is_refused() {
        let (g, full) = build_cyclic(4).unwrap();
        assert!(regular_rep_unitary(&g, &full.nonredundant()).is_err());
    }
}
