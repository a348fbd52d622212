//! Built-in groups with hard-coded irreducible representations.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{FiniteGroup, Irrep, IrrepList, IrrepType};
use crate::error::{invalid, Result};
use crate::linalg::C64;

/// `e^{2πi k / l}`, exact at multiples of a quarter turn and conjugate
/// symmetric: `root_of_unity(-k, l) == conj(root_of_unity(k, l))`.
pub fn root_of_unity(k: i64, l: usize) -> C64 {
    let li = l as i64;
    let r = k.rem_euclid(li);
    if (4 * r) % li == 0 {
        return match 4 * r / li {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    if 2 * r > li {
        return root_of_unity(li - r, l).conj();
    }
    let theta = core::f64::consts::TAU * r as f64 / l as f64;
    C64::new(libm::cos(theta), libm::sin(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogGroup {
    Cyclic(usize),
    Dihedral(usize),
    Quaternion8,
}

impl CatalogGroup {
    /// Accepts `cyclic(L)`, `ZL`, `dihedral(m)`, `Dm`, `S3`, `quaternion8`, `Q8`.
    pub fn parse(name: &str) -> Result<Self> {
        let s = name.trim();
        let lower = s.to_ascii_lowercase();
        let arg = |prefix: &str| -> Option<usize> {
            lower
                .strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.trim().parse().ok())
        };
        if let Some(l) = arg("cyclic") {
            return Ok(CatalogGroup::Cyclic(l));
        }
        if let Some(m) = arg("dihedral") {
            return Ok(CatalogGroup::Dihedral(m));
        }
        match lower.as_str() {
            "quaternion8" | "q8" => return Ok(CatalogGroup::Quaternion8),
            "s3" => return Ok(CatalogGroup::Dihedral(3)),
            _ => {}
        }
        if let Some(rest) = lower.strip_prefix('z') {
            if let Ok(l) = rest.parse() {
                return Ok(CatalogGroup::Cyclic(l));
            }
        }
        if let Some(rest) = lower.strip_prefix('d') {
            if let Ok(m) = rest.parse() {
                return Ok(CatalogGroup::Dihedral(m));
            }
        }
        Err(invalid(format!("unknown catalog group '{s}'")))
    }

    pub fn name(&self) -> String {
        match self {
            CatalogGroup::Cyclic(l) => format!("cyclic({l})"),
            CatalogGroup::Dihedral(m) => format!("dihedral({m})"),
            CatalogGroup::Quaternion8 => "quaternion8".to_string(),
        }
    }
}

/// Group and its full irrep list.
pub fn build_catalog(which: CatalogGroup) -> Result<(FiniteGroup, IrrepList)> {
    match which {
        CatalogGroup::Cyclic(l) => build_cyclic(l),
        CatalogGroup::Dihedral(m) => build_dihedral(m),
        CatalogGroup::Quaternion8 => Ok(build_quaternion8()),
    }
}

fn scalar(z: C64) -> DMatrix<C64> {
    DMatrix::from_element(1, 1, z)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// ℤ_L with the characters `g ↦ e^{2πi kg/L}`, `k = 0..L−1`, in that order.
pub fn build_cyclic(l: usize) -> Result<(FiniteGroup, IrrepList)> {
    if l < 2 {
        return Err(invalid(format!("cyclic group needs L ≥ 2, got {l}")));
    }
    let mul = (0..l * l).map(|i| (i / l + i % l) % l).collect();
    let group = FiniteGroup::from_table(l, mul, None)?;
    let irreps = (0..l)
        .map(|k| {
            let kind = if (2 * k) % l == 0 { IrrepType::Real } else { IrrepType::Complex };
            let mats = (0..l).map(|g| scalar(root_of_unity((k * g) as i64, l))).collect();
            Irrep::new(&group, format!("k={k}"), kind, mats)
        })
        .collect::<Result<Vec<_>>>()?;
    let list = IrrepList::full(&group, irreps)?;
    Ok((group, list))
}

/// Dihedral group of order `2m`. Element `k` is `r^k`, element `m + k` is
/// `s·r^k`, with `r s = s r^{-1}`.
pub fn build_dihedral(m: usize) -> Result<(FiniteGroup, IrrepList)> {
    if m < 3 {
        return Err(invalid(format!("dihedral group needs m ≥ 3, got {m}")));
    }
    let order = 2 * m;
    let split = |g: usize| (g >= m, g % m);
    let mut mul = Vec::with_capacity(order * order);
    for a in 0..order {
        for b in 0..order {
            let (sa, ka) = split(a);
            let (sb, kb) = split(b);
            // r^ka s^sb = s^sb r^{±ka}
            let k = if sb { (kb + m - ka) % m } else { (ka + kb) % m };
            mul.push(if sa ^ sb { m + k } else { k });
        }
    }
    let labels = (0..order)
        .map(|g| {
            let (s, k) = split(g);
            match (s, k) {
                (false, 0) => "e".to_string(),
                (false, 1) => "r".to_string(),
                (false, k) => format!("r^{k}"),
                (true, 0) => "s".to_string(),
                (true, 1) => "sr".to_string(),
                (true, k) => format!("sr^{k}"),
            }
        })
        .collect();
    let group = FiniteGroup::from_table(order, mul, Some(labels))?;

    let one_dim = |label: &str, r_val: f64, s_val: f64| {
        let mats = (0..order)
            .map(|g| {
                let (s, k) = split(g);
                let v = if k % 2 == 1 { r_val } else { 1.0 } * if s { s_val } else { 1.0 };
                scalar(real(v))
            })
            .collect();
        Irrep::new(&group, label, IrrepType::Real, mats)
    };
    let mut irreps = alloc::vec![one_dim("trivial", 1.0, 1.0)?, one_dim("sign", 1.0, -1.0)?];
    if m % 2 == 0 {
        irreps.push(one_dim("r=-1,s=1", -1.0, 1.0)?);
        irreps.push(one_dim("r=-1,s=-1", -1.0, -1.0)?);
    }
    for h in 1..=(m - 1) / 2 {
        let mats = (0..order)
            .map(|g| {
                let (s, k) = split(g);
                let z = root_of_unity((h * k) as i64, m);
                let (c, sn) = (z.re, z.im);
                let sign = if s { -1.0 } else { 1.0 };
                DMatrix::from_row_slice(2, 2, &[real(c), real(-sn), real(sign * sn), real(sign * c)])
            })
            .collect();
        irreps.push(Irrep::new(&group, format!("rho_{h}"), IrrepType::Real, mats)?);
    }
    let list = IrrepList::full(&group, irreps)?;
    Ok((group, list))
}

/// Quaternion group `{±1, ±i, ±j, ±k}` in that element order, with four
/// 1-dim irreps and the 2-dim quaternionic irrep.
pub fn build_quaternion8() -> (FiniteGroup, IrrepList) {
    let z = C64::new(0.0, 0.0);
    let one = real(1.0);
    let i = C64::new(0.0, 1.0);
    let units = [
        DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        DMatrix::from_row_slice(2, 2, &[i, z, z, -i]),
        DMatrix::from_row_slice(2, 2, &[z, one, -one, z]),
        DMatrix::from_row_slice(2, 2, &[z, i, i, z]),
    ];
    let faithful: Vec<DMatrix<C64>> = units
        .iter()
        .flat_map(|u| [u.clone(), -u.clone()])
        .collect();
    let find = |m: &DMatrix<C64>| faithful.iter().position(|f| f == m).expect("closed under products");
    let mut mul = Vec::with_capacity(64);
    for a in &faithful {
        for b in &faithful {
            mul.push(find(&(a * b)));
        }
    }
    let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].iter().map(|s| s.to_string()).collect();
    let group = FiniteGroup::from_table(8, mul, Some(labels)).expect("Q8 table is a group");

    // Values on (1, i, j, k); sign of the quaternion does not matter.
    let chars: [(&str, [f64; 4]); 4] = [
        ("trivial", [1.0, 1.0, 1.0, 1.0]),
        ("chi_i", [1.0, 1.0, -1.0, -1.0]),
        ("chi_j", [1.0, -1.0, 1.0, -1.0]),
        ("chi_k", [1.0, -1.0, -1.0, 1.0]),
    ];
    let mut irreps: Vec<Irrep> = chars
        .iter()
        .map(|(label, v)| {
            let mats = (0..8).map(|g| scalar(real(v[g / 2]))).collect();
            Irrep::new(&group, *label, IrrepType::Real, mats).expect("valid character")
        })
        .collect();
    irreps.push(Irrep::new(&group, "quat", IrrepType::Quaternionic, faithful).expect("valid irrep"));
    let list = IrrepList::full(&group, irreps).expect("complete list");
    (group, list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_are_exact_on_quarter_turns() {
        assert_eq!(root_of_unity(3, 6), C64::new(-1.0, 0.0));
        assert_eq!(root_of_unity(1, 4), C64::new(0.0, 1.0));
        assert_eq!(root_of_unity(-1, 4), C64::new(0.0, -1.0));
        for l in 2..20usize {
            for k in 0..l as i64 {
                assert_eq!(root_of_unity(-k, l), root_of_unity(k, l).conj());
                let z = root_of_unity(k, l);
                assert!((z.norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cyclic_examples() {
        assert!(build_cyclic(1).is_err());
        let (_, full) = build_cyclic(6).unwrap();
        assert_eq!(full.entries()[1].matrix(3)[(0, 0)], C64::new(-1.0, 0.0));
        let (_, full4) = build_cyclic(4).unwrap();
        let nr = full4.nonredundant();
        assert_eq!(nr.len(), 2);
        assert_eq!(nr.entries()[1].kind(), IrrepType::Real);
        assert!(nr.entries()[1].is_real_valued());
    }

    #[test]
    fn q8_has_one_quaternionic_irrep() {
        let (_, irreps) = build_quaternion8();
        let q: Vec<_> = irreps.iter().filter(|r| r.kind() == IrrepType::Quaternionic).collect();
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].complex_dim(), 2);
        assert_eq!(q[0].model_dim(), 1);
        let (g, _) = build_quaternion8();
        assert!(!g.is_abelian());
    }

    #[test]
    fn dihedral_three_nonredundant_dims() {
        let (_, full) = build_dihedral(3).unwrap();
        let dims: Vec<usize> = full.nonredundant().iter().map(|r| r.complex_dim()).collect();
        assert_eq!(dims, alloc::vec![1, 2]);
    }

    #[test]
    fn dihedral_identity_maps_to_identity() {
        for m in 3..=8 {
            let (g, full) = build_dihedral(m).unwrap();
            for r in full.iter() {
                let d = r.complex_dim();
                assert_eq!(r.matrix(g.identity()), &DMatrix::<C64>::identity(d, d));
            }
        }
        assert!(build_dihedral(2).is_err());
    }

    #[test]
    fn dimension_count_for_catalog() {
        let mut all = alloc::vec![CatalogGroup::Quaternion8];
        all.extend((2..=12).map(CatalogGroup::Cyclic));
        all.extend((3..=10).map(CatalogGroup::Dihedral));
        for c in all {
            let (g, full) = build_catalog(c).unwrap();
            let total: usize = full.iter().map(|r| r.complex_dim().pow(2)).sum();
            assert_eq!(total, g.order(), "{}", c.name());
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(CatalogGroup::parse("Q8").unwrap(), CatalogGroup::Quaternion8);
        assert_eq!(CatalogGroup::parse("dihedral(4)").unwrap(), CatalogGroup::Dihedral(4));
        assert_eq!(CatalogGroup::parse("S3").unwrap(), CatalogGroup::Dihedral(3));
        assert_eq!(CatalogGroup::parse("Z5").unwrap(), CatalogGroup::Cyclic(5));
        assert!(CatalogGroup::parse("icosahedral").is_err());
    }
}
