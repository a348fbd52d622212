//! Finite groups given by multiplication tables, together with unitary
//! irreducible representations.

mod catalog;
mod peter_weyl;

pub use catalog::{build_catalog, build_cyclic, build_dihedral, build_quaternion8, root_of_unity, CatalogGroup};
pub use peter_weyl::{
    block_layout, peter_weyl_orthogonality_check, regular_rep, regular_rep_unitary, BlockLayout,
};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::C64;

/// Tolerance for structural checks on representation matrices.
pub const STRUCT_TOL: f64 = 1e-10;

/// A finite group stored as a row-major multiplication table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl FiniteGroup {
    /// Validates the table: Latin square, identity, inverses and
    /// associativity (exhaustive up to order 256).
    pub fn from_table(order: usize, mul: Vec<usize>, labels: Option<Vec<String>>) -> Result<Self> {
        if order == 0 {
            return Err(invalid("group order must be positive"));
        }
        if mul.len() != order * order {
            return Err(invalid(format!(
                "multiplication table has {} entries, expected {}",
                mul.len(),
                order * order
            )));
        }
        if let Some(l) = &labels {
            if l.len() != order {
                return Err(invalid("label count does not match group order"));
            }
        }
        let at = |a: usize, b: usize| mul[a * order + b];
        let mut seen = alloc::vec![false; order];
        for a in 0..order {
            for (axis, name) in [(0, "row"), (1, "column")] {
                seen.iter_mut().for_each(|s| *s = false);
                for b in 0..order {
                    let v = if axis == 0 { at(a, b) } else { at(b, a) };
                    if v >= order || seen[v] {
                        return Err(invalid(format!("{name} {a} of the table is not a permutation")));
                    }
                    seen[v] = true;
                }
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| invalid("table has no identity element"))?;
        if order <= 256 {
            for a in 0..order {
                for b in 0..order {
                    let ab = at(a, b);
                    for c in 0..order {
                        if at(ab, c) != at(a, at(b, c)) {
                            return Err(invalid(format!("associativity fails at ({a},{b},{c})")));
                        }
                    }
                }
            }
        }
        // In a Latin square with identity, each row contains e exactly once.
        let inverse = (0..order)
            .map(|g| (0..order).find(|&h| at(g, h) == identity).unwrap())
            .collect::<Vec<_>>();
        for g in 0..order {
            if at(inverse[g], g) != identity {
                return Err(invalid(format!("element {g} has no two-sided inverse")));
            }
        }
        Ok(Self {
            order,
            mul,
            identity,
            inverse,
            labels,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[usize] {
        &self.mul
    }

    pub fn label(&self, g: usize) -> String {
        match &self.labels {
            Some(l) => l[g].clone(),
            None => format!("{g}"),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

/// Frobenius–Schur type of an irreducible representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IrrepType {
    Real,
    Complex,
    Quaternionic,
}

impl IrrepType {
    pub fn from_indicator(ind: i8) -> Self {
        match ind {
            1 => IrrepType::Real,
            0 => IrrepType::Complex,
            _ => IrrepType::Quaternionic,
        }
    }

    pub fn indicator(self) -> i8 {
        match self {
            IrrepType::Real => 1,
            IrrepType::Complex => 0,
            IrrepType::Quaternionic => -1,
        }
    }

    /// Dyson index: 1, 2, 4.
    pub fn dyson_beta(self) -> u32 {
        match self {
            IrrepType::Real => 1,
            IrrepType::Complex => 2,
            IrrepType::Quaternionic => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IrrepType::Real => "real",
            IrrepType::Complex => "complex",
            IrrepType::Quaternionic => "quaternionic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(IrrepType::Real),
            "complex" => Ok(IrrepType::Complex),
            "quaternionic" => Ok(IrrepType::Quaternionic),
            _ => Err(invalid(format!("unknown irrep type '{s}'"))),
        }
    }
}

/// A unitary irreducible representation, one matrix per group element.
///
/// Matrices are stored over ℂ. For quaternionic type the stored size is twice
/// the quaternionic dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    label: String,
    kind: IrrepType,
    matrices: Vec<DMatrix<C64>>,
}

impl Irrep {
    /// Builds and validates an irrep against `group`: square unitary
    /// matrices, homomorphism, declared type matching the Frobenius–Schur
    /// indicator, and the 2×2 quaternionic block pattern when applicable.
    pub fn new(
        group: &FiniteGroup,
        label: impl Into<String>,
        kind: IrrepType,
        matrices: Vec<DMatrix<C64>>,
    ) -> Result<Self> {
        let irrep = Self {
            label: label.into(),
            kind,
            matrices,
        };
        irrep.validate(group)?;
        Ok(irrep)
    }

    fn validate(&self, group: &FiniteGroup) -> Result<()> {
        let l = group.order();
        if self.matrices.len() != l {
            return Err(invalid(format!(
                "irrep '{}' has {} matrices for a group of order {l}",
                self.label,
                self.matrices.len()
            )));
        }
        let d = self.matrices[0].nrows();
        if d == 0 || self.matrices.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(invalid(format!("irrep '{}' matrices are not all d×d", self.label)));
        }
        let eye = DMatrix::<C64>::identity(d, d);
        for (g, m) in self.matrices.iter().enumerate() {
            if max_entry_diff(&(m * m.adjoint()), &eye) > STRUCT_TOL {
                return Err(invalid(format!("irrep '{}' is not unitary at element {g}", self.label)));
            }
        }
        for a in 0..l {
            for b in 0..l {
                let lhs = &self.matrices[a] * &self.matrices[b];
                if max_entry_diff(&lhs, &self.matrices[group.mul(a, b)]) > STRUCT_TOL {
                    return Err(invalid(format!(
                        "irrep '{}' is not a homomorphism at ({a},{b})",
                        self.label
                    )));
                }
            }
        }
        let norm: f64 = (0..l).map(|g| self.character(g).norm_sqr()).sum::<f64>() / l as f64;
        if (norm - 1.0).abs() > 1e-8 {
            return Err(invalid(format!(
                "irrep '{}' is reducible (character norm {norm})",
                self.label
            )));
        }
        let ind = frobenius_schur(group, self)?;
        if IrrepType::from_indicator(ind) != self.kind {
            return Err(invalid(format!(
                "irrep '{}' declared {} but Frobenius–Schur indicator is {ind}",
                self.label,
                self.kind.name()
            )));
        }
        if self.kind == IrrepType::Quaternionic {
            if d % 2 != 0 {
                return Err(invalid(format!("quaternionic irrep '{}' has odd dimension", self.label)));
            }
            for (g, m) in self.matrices.iter().enumerate() {
                if !has_quaternionic_blocks(m) {
                    return Err(invalid(format!(
                        "irrep '{}' breaks the quaternionic 2×2 block pattern at element {g}",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> IrrepType {
        self.kind
    }

    /// Size of the stored matrices.
    pub fn complex_dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    /// Dimension used in the model's noise scaling: the quaternionic
    /// dimension for quaternionic type, the complex one otherwise.
    pub fn model_dim(&self) -> usize {
        match self.kind {
            IrrepType::Quaternionic => self.complex_dim() / 2,
            _ => self.complex_dim(),
        }
    }

    pub fn matrix(&self, g: usize) -> &DMatrix<C64> {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.matrices
    }

    pub fn character(&self, g: usize) -> C64 {
        self.matrices[g].trace()
    }

    pub fn is_trivial(&self) -> bool {
        self.complex_dim() == 1 && self.matrices.iter().all(|m| m[(0, 0)] == C64::new(1.0, 0.0))
    }

    /// True when every matrix is real (imaginary parts exactly zero).
    pub fn is_real_valued(&self) -> bool {
        self.matrices.iter().all(|m| m.iter().all(|z| z.im == 0.0))
    }

    /// Character of the complex-conjugate representation equals ours, up to
    /// `STRUCT_TOL`.
    pub fn is_conjugate_of(&self, other: &Irrep) -> bool {
        self.matrices.len() == other.matrices.len()
            && (0..self.matrices.len())
                .all(|g| (self.character(g) - other.character(g).conj()).norm() <= 1e-8)
    }
}

fn max_entry_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Each 2×2 block has the form `[[a+bi, c+di], [−c+di, a−bi]]`.
pub fn has_quaternionic_blocks(m: &DMatrix<C64>) -> bool {
    let n = m.nrows();
    if n % 2 != 0 {
        return false;
    }
    for bj in (0..n).step_by(2) {
        for bi in (0..n).step_by(2) {
            let p = m[(bi, bj)];
            let q = m[(bi, bj + 1)];
            let r = m[(bi + 1, bj)];
            let s = m[(bi + 1, bj + 1)];
            if (s - p.conj()).norm() > STRUCT_TOL || (r + q.conj()).norm() > STRUCT_TOL {
                return false;
            }
        }
    }
    true
}

/// Frobenius–Schur indicator `(1/|G|) Σ_g χ(g²)`, rounded to −1, 0 or 1.
pub fn frobenius_schur(group: &FiniteGroup, irrep: &Irrep) -> Result<i8> {
    let l = group.order();
    let sum: C64 = (0..l).map(|g| irrep.character(group.mul(g, g))).sum();
    let raw = sum / l as f64;
    let rounded = libm::round(raw.re);
    let dist = (raw - C64::new(rounded, 0.0)).norm();
    if !(-1.0..=1.0).contains(&rounded) || dist > 1e-4 {
        return Err(Error::NumericalInconsistency(format!(
            "Frobenius–Schur sum {:.6}{:+.6}i is not close to -1, 0 or 1",
            raw.re, raw.im
        )));
    }
    Ok(rounded as i8)
}

/// Whether a list holds every irrep, or only the channels of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Full,
    /// Trivial irrep dropped and one representative per conjugate pair.
    Nonredundant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrrepList {
    entries: Vec<Irrep>,
    convention: Convention,
}

impl IrrepList {
    /// A complete list: `Σ (complex dim)² = |G|`, pairwise inequivalent.
    pub fn full(group: &FiniteGroup, entries: Vec<Irrep>) -> Result<Self> {
        let total: usize = entries.iter().map(|r| r.complex_dim().pow(2)).sum();
        if total != group.order() {
            return Err(invalid(format!(
                "irrep dimensions give Σd² = {total}, group order is {}",
                group.order()
            )));
        }
        check_inequivalent(group, &entries)?;
        Ok(Self {
            entries,
            convention: Convention::Full,
        })
    }

    /// A model channel list supplied directly; must not contain the trivial
    /// irrep or a conjugate pair.
    pub fn nonredundant_from(group: &FiniteGroup, entries: Vec<Irrep>) -> Result<Self> {
        check_inequivalent(group, &entries)?;
        for (i, r) in entries.iter().enumerate() {
            if r.is_trivial() {
                return Err(invalid("nonredundant list contains the trivial irrep"));
            }
            for s in &entries[i + 1..] {
                if r.is_conjugate_of(s) {
                    return Err(invalid(format!(
                        "nonredundant list contains the conjugate pair '{}', '{}'",
                        r.label(),
                        s.label()
                    )));
                }
            }
        }
        Ok(Self {
            entries,
            convention: Convention::Nonredundant,
        })
    }

    /// Drops the trivial irrep and, from each conjugate pair, keeps the
    /// member whose first non-real character value (in element order) has
    /// positive imaginary part.
    pub fn nonredundant(&self) -> IrrepList {
        if self.convention == Convention::Nonredundant {
            return self.clone();
        }
        let entries = self
            .nonredundant_indices()
            .into_iter()
            .map(|i| self.entries[i].clone())
            .collect();
        IrrepList {
            entries,
            convention: Convention::Nonredundant,
        }
    }

    /// Positions in this list of the entries [`IrrepList::nonredundant`] keeps.
    pub fn nonredundant_indices(&self) -> Vec<usize> {
        if self.convention == Convention::Nonredundant {
            return (0..self.entries.len()).collect();
        }
        (0..self.entries.len())
            .filter(|&i| {
                let r = &self.entries[i];
                if r.is_trivial() {
                    return false;
                }
                if r.kind() != IrrepType::Complex {
                    return true;
                }
                let first = (0..r.matrices().len())
                    .map(|g| r.character(g))
                    .find(|c| c.im.abs() > 1e-9);
                first.is_none_or(|c| c.im > 0.0)
            })
            .collect()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn entries(&self) -> &[Irrep] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Irrep> {
        self.entries.iter()
    }
}

fn check_inequivalent(group: &FiniteGroup, entries: &[Irrep]) -> Result<()> {
    let l = group.order() as f64;
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            let ip: C64 = (0..group.order())
                .map(|g| a.character(g) * b.character(g).conj())
                .sum::<C64>()
                / l;
            if ip.norm() > 1e-8 {
                return Err(invalid(format!(
                    "irreps '{}' and '{}' are equivalent",
                    a.label(),
                    b.label()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_latin_table() {
        assert!(FiniteGroup::from_table(2, alloc::vec![0, 1, 1, 1], None).is_err());
    }

    #[test]
    fn rejects_non_associative_loop() {
        // A Latin square with identity that is not a group (order 5 loop).
        let t = alloc::vec![
            0, 1, 2, 3, 4, //
            1, 0, 3, 4, 2, //
            2, 4, 0, 1, 3, //
            3, 2, 4, 0, 1, //
            4, 3, 1, 2, 0,
        ];
        assert!(FiniteGroup::from_table(5, t, None).is_err());
    }

    #[test]
    fn fs_indicator_cyclic_rule() {
        for l in 2..=24usize {
            let (g, irreps) = build_cyclic(l).unwrap();
            for (k, r) in irreps.iter().enumerate() {
                let expected = if (2 * k) % l == 0 { 1 } else { 0 };
                assert_eq!(frobenius_schur(&g, r).unwrap(), expected, "L={l} k={k}");
            }
        }
    }

    #[test]
    fn fs_indicator_examples() {
        let (g3, i3) = build_cyclic(3).unwrap();
        assert_eq!(frobenius_schur(&g3, &i3.entries()[1]).unwrap(), 0);
        let (g4, i4) = build_cyclic(4).unwrap();
        assert_eq!(frobenius_schur(&g4, &i4.entries()[2]).unwrap(), 1);
        let (q, iq) = build_quaternion8();
        let two = iq.iter().find(|r| r.complex_dim() == 2).unwrap();
        assert_eq!(frobenius_schur(&q, two).unwrap(), -1);
    }

    #[test]
    fn mislabelled_type_is_rejected() {
        let (g, irreps) = build_cyclic(3).unwrap();
        let r = &irreps.entries()[1];
        assert!(Irrep::new(&g, "bad", IrrepType::Real, r.matrices().to_vec()).is_err());
    }

    #[test]
    fn reducible_input_is_rejected() {
        let (g, _) = build_cyclic(2).unwrap();
        let m = alloc::vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2)];
        assert!(Irrep::new(&g, "2·trivial", IrrepType::Real, m).is_err());
    }

    #[test]
    fn nonredundant_cyclic_counts() {
        for l in 2..=12usize {
            let (_, full) = build_cyclic(l).unwrap();
            let nr = full.nonredundant();
            assert_eq!(nr.len(), l / 2);
            for (i, r) in nr.iter().enumerate() {
                assert_eq!(r.label(), format!("k={}", i + 1));
                let expected = if 2 * (i + 1) == l { IrrepType::Real } else { IrrepType::Complex };
                assert_eq!(r.kind(), expected);
            }
        }
    }

    #[test]
    fn nonredundant_list_rejects_pairs() {
        let (g, full) = build_cyclic(5).unwrap();
        let e = full.entries();
        assert!(IrrepList::nonredundant_from(&g, alloc::vec![e[1].clone(), e[4].clone()]).is_err());
        assert!(IrrepList::nonredundant_from(&g, alloc::vec![e[0].clone()]).is_err());
        assert!(IrrepList::nonredundant_from(&g, alloc::vec![e[1].clone(), e[2].clone()]).is_ok());
    }
}
