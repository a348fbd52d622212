//! Experiment configuration: JSON file, defaults, validation and hashing.

use std::path::{Path, PathBuf};

use gsynch_core::ldlr::Budget;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LdlrSweep,
    PowerSweep,
    OracleSuite,
    BoundSuite,
    EquivalenceSuite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::LdlrSweep,
        ExperimentKind::PowerSweep,
        ExperimentKind::OracleSuite,
        ExperimentKind::BoundSuite,
        ExperimentKind::EquivalenceSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LdlrSweep => "ldlr-sweep",
            ExperimentKind::PowerSweep => "power-sweep",
            ExperimentKind::OracleSuite => "oracle-suite",
            ExperimentKind::BoundSuite => "bound-suite",
            ExperimentKind::EquivalenceSuite => "equivalence-suite",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().trim_end_matches("-suite") == s)
            .ok_or_else(|| Error::config("kind", format!("unknown experiment kind '{s}'")))
    }

    /// Suites assert; sweeps only measure.
    pub fn is_suite(self) -> bool {
        !matches!(self, ExperimentKind::LdlrSweep | ExperimentKind::PowerSweep)
    }
}

/// How the degree `D` follows from `n`. Configs may write `3`,
/// `"power:0.3"` or `{"fixed": 3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", try_from = "DegreeRepr")]
pub enum DegreeRule {
    Fixed(usize),
    /// `D = ⌊n^c⌋`.
    Power(f64),
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum TaggedDegree {
    Fixed(usize),
    Power(f64),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DegreeRepr {
    Number(usize),
    Text(String),
    Tagged(TaggedDegree),
}

impl TryFrom<DegreeRepr> for DegreeRule {
    type Error = String;

    fn try_from(r: DegreeRepr) -> std::result::Result<Self, String> {
        match r {
            DegreeRepr::Number(d) => Ok(DegreeRule::Fixed(d)),
            DegreeRepr::Text(s) => DegreeRule::parse(&s).map_err(|e| e.to_string()),
            DegreeRepr::Tagged(TaggedDegree::Fixed(d)) => Ok(DegreeRule::Fixed(d)),
            DegreeRepr::Tagged(TaggedDegree::Power(c)) => Ok(DegreeRule::Power(c)),
        }
    }
}

impl Default for DegreeRule {
    fn default() -> Self {
        DegreeRule::Power(0.3)
    }
}

impl DegreeRule {
    pub fn degree(self, n: usize) -> usize {
        match self {
            DegreeRule::Fixed(d) => d,
            DegreeRule::Power(c) => gsynch_core::ldlr::degree_rule(n, c),
        }
    }

    /// `4`, `fixed:4`, `power:0.3` or `n^0.3`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config("D", format!("cannot parse degree rule '{s}'"));
        if let Some(c) = s.strip_prefix("power:").or_else(|| s.strip_prefix("n^")) {
            return Ok(DegreeRule::Power(c.parse().map_err(|_| bad())?));
        }
        let d = s.strip_prefix("fixed:").unwrap_or(s);
        Ok(DegreeRule::Fixed(d.parse().map_err(|_| bad())?))
    }

    fn validate(self, path: &str) -> Result<()> {
        if let DegreeRule::Power(c) = self {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::config(path, format!("exponent must lie in (0, 1), got {c}")));
            }
        }
        Ok(())
    }
}

/// Parameter grids; anything left out takes the experiment's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<DegreeRule>,
    /// `circle`, `cyclic` or `group:<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// `exact`, `seq`, `brute`, `md` or `mc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calib_trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub enumeration: f64,
    pub brute_force: f64,
    pub md_tuples: f64,
    pub sequential: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let b = Budget::default();
        BudgetConfig {
            enumeration: b.enumeration,
            brute_force: b.brute_force,
            md_tuples: b.md_tuples,
            sequential: b.sequential,
        }
    }
}

/// Environment variables that override budget fields.
pub const BUDGET_ENV: [(&str, &str); 4] = [
    ("GSYNCH_BUDGET_ENUMERATION", "enumeration"),
    ("GSYNCH_BUDGET_BRUTE_FORCE", "brute_force"),
    ("GSYNCH_BUDGET_MD_TUPLES", "md_tuples"),
    ("GSYNCH_BUDGET_SEQUENTIAL", "sequential"),
];

impl BudgetConfig {
    pub fn to_core(self) -> Budget {
        Budget {
            enumeration: self.enumeration,
            brute_force: self.brute_force,
            md_tuples: self.md_tuples,
            sequential: self.sequential,
        }
    }

    fn field(&mut self, name: &str) -> &mut f64 {
        match name {
            "enumeration" => &mut self.enumeration,
            "brute_force" => &mut self.brute_force,
            "md_tuples" => &mut self.md_tuples,
            _ => &mut self.sequential,
        }
    }

    /// Applies overrides from `lookup` (normally the process environment).
    pub fn apply_env_with(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        for (var, field) in BUDGET_ENV {
            if let Some(v) = lookup(var) {
                let x: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(var, format!("expected a number, got '{v}'")))?;
                *self.field(field) = x;
            }
        }
        Ok(())
    }

    pub fn apply_env(&mut self) -> Result<()> {
        self.apply_env_with(|k| std::env::var(k).ok())
    }

    pub fn validate(&self) -> Result<()> {
        for (_, field) in BUDGET_ENV {
            let v = *self.clone().field(field);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("budgets.{field}"), format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub budgets: BudgetConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Pulls the offending field out of a serde message like
/// "missing field `seed` at line 1 column 20".
fn serde_path(msg: &str) -> String {
    msg.split('`').nth(1).map_or_else(|| "config".to_string(), str::to_string)
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            seed,
            grids: Grids::default(),
            budgets: BudgetConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            Error::config(serde_path(&msg), msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grids;
        fn nonempty<T>(v: &Option<Vec<T>>, path: &str) -> Result<()> {
            match v {
                Some(v) if v.is_empty() => Err(Error::config(path, "grid is empty")),
                _ => Ok(()),
            }
        }
        nonempty(&g.l, "grids.L")?;
        nonempty(&g.n, "grids.n")?;
        nonempty(&g.lambda, "grids.lambda")?;
        if let Some(ls) = &g.l {
            if ls.contains(&0) {
                return Err(Error::config("grids.L", "L must be ≥ 1"));
            }
        }
        if let Some(ns) = &g.n {
            if ns.contains(&0) {
                return Err(Error::config("grids.n", "n must be ≥ 1"));
            }
        }
        if let Some(lams) = &g.lambda {
            if let Some(bad) = lams.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::config("grids.lambda", format!("λ must be finite and ≥ 0, got {bad}")));
            }
        }
        if let Some(d) = g.degree {
            d.validate("grids.D")?;
        }
        if let Some(m) = &g.model {
            if !(m == "circle" || m == "cyclic" || m.starts_with("group:")) {
                return Err(Error::config("grids.model", format!("unknown model '{m}'")));
            }
        }
        if let Some(m) = &g.method {
            if !["exact", "seq", "brute", "md", "mc"].contains(&m.as_str()) {
                return Err(Error::config("grids.method", format!("unknown method '{m}'")));
            }
        }
        if g.samples.is_some_and(|s| s < 100) {
            return Err(Error::config("grids.samples", "need at least 100 samples"));
        }
        if g.trials == Some(0) {
            return Err(Error::config("grids.trials", "need at least one trial"));
        }
        if let Some(a) = g.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::config("grids.alpha", format!("α must lie in (0, 1), got {a}")));
            }
        }
        if g.calib_trials.is_some_and(|m| m < 50) {
            return Err(Error::config("grids.calib_trials", "need at least 50 calibration trials"));
        }
        self.budgets.validate()
    }

    /// SHA-256 over the canonical JSON of everything that determines the
    /// rows (kind, seed, grids, budgets), first 16 hex digits.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            kind: ExperimentKind,
            seed: u64,
            grids: &'a Grids,
            budgets: &'a BudgetConfig,
        }
        let key = Key {
            kind: self.kind,
            seed: self.seed,
            grids: &self.grids,
            budgets: &self.budgets,
        };
        let bytes = serde_json::to_vec(&key).expect("config serializes");
        Sha256::digest(&bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(r: Result<ExperimentConfig>) -> String {
        match r {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config() {
        let c = ExperimentConfig::from_json(r#"{"kind": "oracle-suite", "seed": 7}"#).unwrap();
        assert_eq!(c.kind, ExperimentKind::OracleSuite);
        assert_eq!(c.budgets, BudgetConfig::default());
    }

    #[test]
    fn errors_name_fields() {
        assert_eq!(path_of(ExperimentConfig::from_json(r#"{"kind": "oracle-suite"}"#)), "seed");
        assert_eq!(
            path_of(ExperimentConfig::from_json(r#"{"kind": "ldlr-sweep", "seed": 1, "grids": {"n": []}}"#)),
            "grids.n"
        );
        assert_eq!(
            path_of(ExperimentConfig::from_json(r#"{"kind": "ldlr-sweep", "seed": 1, "grids": {"nn": [1]}}"#)),
            "nn"
        );
        assert_eq!(
            path_of(ExperimentConfig::from_json(
                r#"{"kind": "ldlr-sweep", "seed": 1, "budgets": {"enumeration": 0}}"#
            )),
            "budgets.enumeration"
        );
        assert_eq!(
            path_of(ExperimentConfig::from_json(r#"{"kind": "ldlr-sweep", "seed": 1, "grids": {"D": {"power": 2.0}}}"#)),
            "grids.D"
        );
    }

    #[test]
    fn degree_rules() {
        assert_eq!(DegreeRule::parse("4").unwrap(), DegreeRule::Fixed(4));
        assert_eq!(DegreeRule::parse("n^0.3").unwrap(), DegreeRule::Power(0.3));
        assert_eq!(DegreeRule::parse("power:0.25").unwrap(), DegreeRule::Power(0.25));
        assert_eq!(DegreeRule::Power(0.3).degree(400), 6);
        assert!(DegreeRule::parse("x").is_err());
        let c = ExperimentConfig::from_json(r#"{"kind": "ldlr-sweep", "seed": 1, "grids": {"D": {"fixed": 3}}}"#).unwrap();
        for text in ["3", r#""fixed:3""#] {
            let other = ExperimentConfig::from_json(&format!(r#"{{"kind": "ldlr-sweep", "seed": 1, "grids": {{"D": {text}}}}}"#)).unwrap();
            assert_eq!(other.grids.degree, c.grids.degree);
        }
        let p = ExperimentConfig::from_json(r#"{"kind": "ldlr-sweep", "seed": 1, "grids": {"D": "n^0.25"}}"#).unwrap();
        assert_eq!(p.grids.degree, Some(DegreeRule::Power(0.25)));
        assert_eq!(c.grids.degree, Some(DegreeRule::Fixed(3)));
    }

    #[test]
    fn hash_ignores_output_paths() {
        let mut a = ExperimentConfig::new(ExperimentKind::BoundSuite, 3);
        let h = a.hash();
        a.output.csv = Some("x.csv".into());
        assert_eq!(a.hash(), h);
        a.seed = 4;
        assert_ne!(a.hash(), h);
        assert_eq!(h.len(), 16);
    }

    #[test]
    fn env_overrides() {
        let mut b = BudgetConfig::default();
        b.apply_env_with(|k| (k == "GSYNCH_BUDGET_SEQUENTIAL").then(|| "12".to_string())).unwrap();
        assert_eq!(b.sequential, 12.0);
        assert!(b.apply_env_with(|_| Some("lots".into())).is_err());
    }

    #[test]
    fn kinds_parse() {
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::parse(k.name()).unwrap(), k);
        }
        assert_eq!(ExperimentKind::parse("oracle").unwrap(), ExperimentKind::OracleSuite);
        assert!(ExperimentKind::parse("nope").is_err());
    }
}
