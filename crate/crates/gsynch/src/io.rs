//! JSON formats for groups, matrices and observations, plus a binary
//! observation container (JSON header followed by column-major `f64` data).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use gsynch_core::ensembles::Ensemble;
use gsynch_core::group::{build_catalog, CatalogGroup, FiniteGroup, Irrep, IrrepList, IrrepType};
use gsynch_core::models::{Channel, ModelSpec, SynchObservation};
use gsynch_core::nalgebra::DMatrix;
use gsynch_core::{Matrix, C64};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BIN_MAGIC: &[u8; 8] = b"GSYNCHB1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrepFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub dim: usize,
    #[serde(rename = "type")]
    pub kind: String,
    /// One matrix per group element, entries `[re, im]` in row-major order.
    pub matrices: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub order: usize,
    /// Multiplication table, `mul[a * order + b] = a·b`.
    pub mul: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub irreps: Vec<IrrepFile>,
}

impl GroupFile {
    pub fn from_parts(name: &str, group: &FiniteGroup, irreps: &IrrepList) -> Self {
        let irreps = irreps
            .iter()
            .map(|r| IrrepFile {
                label: Some(r.label().to_string()),
                dim: r.complex_dim(),
                kind: r.kind().name().to_string(),
                matrices: r
                    .matrices()
                    .iter()
                    .map(|m| {
                        let d = m.nrows();
                        (0..d * d).map(|k| {
                            let z = m[(k / d, k % d)];
                            [z.re, z.im]
                        })
                        .collect()
                    })
                    .collect(),
            })
            .collect();
        GroupFile {
            name: Some(name.to_string()),
            order: group.order(),
            mul: group.table().to_vec(),
            labels: group.labels().map(<[String]>::to_vec),
            irreps,
        }
    }

    pub fn from_catalog(which: CatalogGroup) -> Result<Self> {
        let (g, irreps) = build_catalog(which)?;
        Ok(Self::from_parts(&which.name(), &g, &irreps))
    }

    /// Validates the table and every irrep. A list whose dimensions satisfy
    /// `Σ d² = |G|` is taken as complete; anything else must already be a
    /// nonredundant channel list.
    pub fn build(&self) -> Result<(FiniteGroup, IrrepList)> {
        let group = FiniteGroup::from_table(self.order, self.mul.clone(), self.labels.clone())?;
        let mut entries = Vec::with_capacity(self.irreps.len());
        for (i, r) in self.irreps.iter().enumerate() {
            let path = format!("irreps[{i}]");
            let kind = IrrepType::parse(&r.kind).map_err(|e| Error::config(format!("{path}.type"), e.to_string()))?;
            if r.matrices.len() != self.order {
                return Err(Error::config(
                    format!("{path}.matrices"),
                    format!("{} matrices for a group of order {}", r.matrices.len(), self.order),
                ));
            }
            let mats = r
                .matrices
                .iter()
                .enumerate()
                .map(|(g, m)| {
                    if m.len() != r.dim * r.dim {
                        return Err(Error::config(
                            format!("{path}.matrices[{g}]"),
                            format!("{} entries for dimension {}", m.len(), r.dim),
                        ));
                    }
                    Ok(DMatrix::from_row_iterator(r.dim, r.dim, m.iter().map(|[a, b]| C64::new(*a, *b))))
                })
                .collect::<Result<Vec<_>>>()?;
            let label = r.label.clone().unwrap_or_else(|| format!("irrep{i}"));
            entries.push(Irrep::new(&group, label, kind, mats)?);
        }
        let total: usize = entries.iter().map(|r| r.complex_dim().pow(2)).sum();
        let list = if total == self.order {
            IrrepList::full(&group, entries)?
        } else {
            IrrepList::nonredundant_from(&group, entries)?
        };
        Ok((group, list))
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes` next to `path` and renames over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_group_file(path: &Path) -> Result<GroupFile> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

/// A catalog name (`S3`, `Z5`, `dihedral(4)`, `Q8`, …) or a path to a
/// group file. Returns the display name, the group and its irrep list.
pub fn resolve_group(spec: &str) -> Result<(String, FiniteGroup, IrrepList)> {
    let p = Path::new(spec);
    if p.extension().is_some_and(|e| e == "json") || p.is_file() {
        let file = read_group_file(p)?;
        let (g, list) = file.build()?;
        let name = file.name.unwrap_or_else(|| spec.to_string());
        return Ok((name, g, list));
    }
    let which = CatalogGroup::parse(spec).map_err(|e| Error::config("group", e.to_string()))?;
    let (g, list) = build_catalog(which)?;
    Ok((which.name(), g, list))
}

/// `circle`, `cyclic` (both need `l`) or `group:<catalog name or file>`.
pub fn model_from_name(name: &str, l: usize, lambdas: Vec<f64>) -> Result<ModelSpec> {
    match name {
        "circle" => Ok(ModelSpec::Circle { l, lambdas }),
        "cyclic" => Ok(ModelSpec::Cyclic { l, lambdas }),
        other => {
            let spec = other
                .strip_prefix("group:")
                .ok_or_else(|| Error::config("model", format!("unknown model '{other}'; use circle, cyclic or group:<name>")))?;
            let (name, group, irreps) = resolve_group(spec)?;
            Ok(ModelSpec::Group {
                name,
                group,
                irreps: irreps.nonredundant(),
                lambdas,
            })
        }
    }
}

/// Rebuilds the model an observation was sampled from, from its `model` tag
/// (`circle(L=3)`, `cyclic(L=4)`, `group(<name>)`).
pub fn model_of_observation(obs: &SynchObservation) -> Result<ModelSpec> {
    let tag = obs.model.as_str();
    let inner = |prefix: &str| tag.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
    let lambdas: Vec<f64> = obs.channels.iter().map(|c| c.lambda).collect();
    if let Some(l) = inner("circle(L=") {
        return model_from_name("circle", parse_usize(l, "model")?, lambdas);
    }
    if let Some(l) = inner("cyclic(L=") {
        return model_from_name("cyclic", parse_usize(l, "model")?, lambdas);
    }
    if let Some(g) = inner("group(") {
        return model_from_name(&format!("group:{g}"), 0, lambdas);
    }
    Err(Error::config("model", format!("cannot rebuild a null model for '{tag}'")))
}

fn parse_usize(s: &str, path: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::config(path, format!("expected an integer, got '{s}'")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub real: bool,
    /// `[re, im]` row-major; empty in binary headers.
    #[serde(default)]
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &Matrix) -> Self {
        let d = m.dim();
        let entries = (0..d * d)
            .map(|k| {
                let z = m.get(k / d, k % d);
                [z.re, z.im]
            })
            .collect();
        MatrixFile {
            rows: d,
            cols: d,
            real: m.is_real(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Format(format!("matrix is {}x{}, expected square", self.rows, self.cols)));
        }
        let d = self.rows;
        if self.entries.len() != d * d {
            return Err(Error::Format(format!("{} entries for a {d}x{d} matrix", self.entries.len())));
        }
        Ok(if self.real {
            if let Some(bad) = self.entries.iter().find(|e| e[1] != 0.0) {
                return Err(Error::Format(format!("real matrix has imaginary part {}", bad[1])));
            }
            Matrix::Real(DMatrix::from_row_iterator(d, d, self.entries.iter().map(|e| e[0])))
        } else {
            Matrix::Complex(DMatrix::from_row_iterator(d, d, self.entries.iter().map(|e| C64::new(e[0], e[1]))))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub label: String,
    pub lambda: f64,
    #[serde(rename = "type")]
    pub kind: String,
    pub model_dim: usize,
    pub ensemble: String,
    pub noise_scale: f64,
    pub matrix: MatrixFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationFile {
    pub model: String,
    pub n: usize,
    pub seed: u64,
    pub hermitian: bool,
    pub channels: Vec<ChannelFile>,
}

impl ObservationFile {
    pub fn from_observation(obs: &SynchObservation) -> Self {
        ObservationFile {
            model: obs.model.clone(),
            n: obs.n,
            seed: obs.seed,
            hermitian: obs.hermitian,
            channels: obs
                .channels
                .iter()
                .map(|c| ChannelFile {
                    label: c.label.clone(),
                    lambda: c.lambda,
                    kind: c.kind.name().to_string(),
                    model_dim: c.model_dim,
                    ensemble: c.ensemble.name().to_string(),
                    noise_scale: c.noise_scale,
                    matrix: MatrixFile::from_matrix(&c.matrix),
                })
                .collect(),
        }
    }

    pub fn to_observation(&self) -> Result<SynchObservation> {
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let path = format!("channels[{i}]");
                Ok(Channel {
                    label: c.label.clone(),
                    lambda: c.lambda,
                    kind: IrrepType::parse(&c.kind).map_err(|e| Error::config(format!("{path}.type"), e.to_string()))?,
                    model_dim: c.model_dim,
                    ensemble: Ensemble::parse(&c.ensemble)
                        .map_err(|e| Error::config(format!("{path}.ensemble"), e.to_string()))?,
                    noise_scale: c.noise_scale,
                    matrix: c.matrix.to_matrix()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SynchObservation {
            model: self.model.clone(),
            n: self.n,
            seed: self.seed,
            hermitian: self.hermitian,
            channels,
        })
    }
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// `GSYNCHB1`, little-endian `u64` header length, JSON header (matrices
/// without entries), then each channel column-major: one `f64` per entry for
/// real channels, `re, im` pairs for complex ones.
pub fn observation_to_binary(obs: &SynchObservation) -> Result<Vec<u8>> {
    let mut header = ObservationFile::from_observation(obs);
    for c in &mut header.channels {
        c.matrix.entries.clear();
    }
    let h = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(16 + h.len());
    out.extend_from_slice(BIN_MAGIC);
    out.extend_from_slice(&(h.len() as u64).to_le_bytes());
    out.extend_from_slice(&h);
    for c in &obs.channels {
        match &c.matrix {
            Matrix::Real(m) => m.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Matrix::Complex(m) => m.iter().for_each(|z| {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }),
        }
    }
    Ok(out)
}

pub fn observation_from_binary(bytes: &[u8]) -> Result<SynchObservation> {
    let bad = |m: &str| Error::Format(format!("binary observation: {m}"));
    if bytes.len() < 16 || &bytes[..8] != BIN_MAGIC {
        return Err(bad("missing magic"));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(16..16 + hlen).ok_or_else(|| bad("truncated header"))?;
    let mut header: ObservationFile = serde_json::from_slice(body)?;
    let mut data = &bytes[16 + hlen..];
    let mut next = || -> Result<f64> {
        let mut b = [0u8; 8];
        data.read_exact(&mut b).map_err(|_| bad("truncated data"))?;
        Ok(f64::from_le_bytes(b))
    };
    let mut mats = Vec::with_capacity(header.channels.len());
    for c in &header.channels {
        let d = c.matrix.rows;
        mats.push(if c.matrix.real {
            let v = (0..d * d).map(|_| next()).collect::<Result<Vec<_>>>()?;
            Matrix::Real(DMatrix::from_vec(d, d, v))
        } else {
            let v = (0..d * d).map(|_| Ok(C64::new(next()?, next()?))).collect::<Result<Vec<_>>>()?;
            Matrix::Complex(DMatrix::from_vec(d, d, v))
        });
    }
    if !data.is_empty() {
        return Err(bad("trailing bytes"));
    }
    for (c, m) in header.channels.iter_mut().zip(&mats) {
        c.matrix = MatrixFile::from_matrix(m);
    }
    header.to_observation()
}

/// JSON, or the binary container when the extension is `.bin`.
pub fn write_observation(path: &Path, obs: &SynchObservation) -> Result<()> {
    let bytes = if is_binary(path) {
        observation_to_binary(obs)?
    } else {
        serde_json::to_vec(&ObservationFile::from_observation(obs))?
    };
    write_atomic(path, &bytes)
}

pub fn read_observation(path: &Path) -> Result<SynchObservation> {
    if is_binary(path) {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        observation_from_binary(&bytes)
    } else {
        let file: ObservationFile = serde_json::from_str(&read_text(path)?)?;
        file.to_observation()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_round_trip() {
        for c in [CatalogGroup::Cyclic(5), CatalogGroup::Dihedral(3), CatalogGroup::Quaternion8] {
            let f = GroupFile::from_catalog(c).unwrap();
            let text = serde_json::to_string(&f).unwrap();
            let back: GroupFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, f);
            let (g, list) = back.build().unwrap();
            assert_eq!(g.order(), f.order);
            assert_eq!(list.len(), f.irreps.len());
        }
    }

    #[test]
    fn broken_group_files_name_the_field() {
        let mut f = GroupFile::from_catalog(CatalogGroup::Dihedral(3)).unwrap();
        f.irreps[1].kind = "octonionic".into();
        match f.build() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "irreps[1].type"),
            other => panic!("{other:?}"),
        }
        let mut f = GroupFile::from_catalog(CatalogGroup::Cyclic(3)).unwrap();
        f.irreps[0].matrices.pop();
        assert!(matches!(f.build(), Err(Error::Config { .. })));
        let mut f = GroupFile::from_catalog(CatalogGroup::Cyclic(3)).unwrap();
        f.mul.swap(4, 5);
        assert!(f.build().is_err());
    }

    #[test]
    fn observation_formats_round_trip() {
        let m = ModelSpec::Cyclic { l: 4, lambdas: vec![1.1] };
        let obs = m.sample(7, 3).unwrap();
        let j = ObservationFile::from_observation(&obs).to_observation().unwrap();
        assert_eq!(j, obs);
        let b = observation_from_binary(&observation_to_binary(&obs).unwrap()).unwrap();
        assert_eq!(b, obs);
        let bytes = observation_to_binary(&obs).unwrap();
        assert!(observation_from_binary(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn models_by_name() {
        assert!(matches!(model_from_name("circle", 3, vec![1.0]), Ok(ModelSpec::Circle { l: 3, .. })));
        let g = model_from_name("group:S3", 0, vec![1.0]).unwrap();
        assert_eq!(g.channel_count(), 2);
        assert!(model_from_name("torus", 3, vec![1.0]).is_err());
        let obs = g.with_lambda(0.5).sample(4, 1).unwrap();
        assert_eq!(model_of_observation(&obs).unwrap().channel_count(), 2);
    }
}
