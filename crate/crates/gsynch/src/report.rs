//! Result rows, CSV emission and the LDLR report formats.

use std::fmt::Display;

use gsynch_core::ldlr::LdlrReport;
use serde::Serialize;

use crate::error::Result;

/// Flat record; column order is insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    cells: Vec<(String, String)>,
}

impl ResultRow {
    pub fn new(config_hash: &str, seed: u64) -> Self {
        ResultRow {
            cells: vec![("config_hash".into(), config_hash.into()), ("seed".into(), seed.to_string())],
        }
    }

    pub fn set(mut self, key: &str, value: impl Display) -> Self {
        let v = value.to_string();
        match self.cells.iter_mut().find(|(k, _)| k == key) {
            Some(cell) => cell.1 = v,
            None => self.cells.push((key.to_string(), v)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.cells.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.cells.iter().map(|(k, _)| k.as_str())
    }
}

/// RFC 4180 CSV. The header is the union of keys in order of first
/// appearance; missing cells are empty.
pub fn rows_to_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut header: Vec<&str> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !header.contains(&k) {
                header.push(k);
            }
        }
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(header.iter().map(|k| r.get(k).unwrap_or("")))?;
    }
    w.into_inner().map_err(|e| crate::Error::Format(e.to_string()))
}

/// Joins floats with `;` for a single CSV cell.
pub fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone, Serialize)]
pub struct LdlrParams {
    pub model: String,
    pub method: &'static str,
    #[serde(rename = "L")]
    pub l: usize,
    pub n: usize,
    pub lambda: f64,
    #[serde(rename = "D")]
    pub degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LdlrJson {
    pub params: LdlrParams,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub cumulative: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term_stderr: Option<Vec<f64>>,
    /// Exact terms as `p/q` strings, rational mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_terms: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_cumulative: Option<String>,
}

impl From<&LdlrReport> for LdlrJson {
    fn from(r: &LdlrReport) -> Self {
        LdlrJson {
            params: LdlrParams {
                model: r.model.clone(),
                method: r.method.name(),
                l: r.l,
                n: r.n,
                lambda: r.lambda,
                degree: r.degree,
            },
            terms: r.terms.clone(),
            partial_sums: r.partial_sums(),
            cumulative: r.cumulative(),
            stderr: r.stderr,
            term_stderr: r.term_stderr.clone(),
            exact_terms: r.exact_terms.as_ref().map(|t| t.iter().map(ToString::to_string).collect()),
            exact_cumulative: r.exact_cumulative().map(|c| c.to_string()),
        }
    }
}

/// One row per degree: `d, term, partial_sum[, term_stderr][, exact_term]`.
pub fn ldlr_terms_csv(r: &LdlrReport) -> Result<Vec<u8>> {
    let ps = r.partial_sums();
    let rows: Vec<ResultRow> = (0..r.terms.len())
        .map(|d| {
            let mut row = ResultRow { cells: Vec::new() }
                .set("model", &r.model)
                .set("method", r.method.name())
                .set("L", r.l)
                .set("n", r.n)
                .set("lambda", r.lambda)
                .set("d", d)
                .set("term", r.terms[d])
                .set("partial_sum", ps[d]);
            if let Some(se) = &r.term_stderr {
                row = row.set("term_stderr", se[d]);
            }
            if let Some(ex) = &r.exact_terms {
                row = row.set("exact_term", &ex[d]);
            }
            row
        })
        .collect();
    rows_to_csv(&rows)
}
