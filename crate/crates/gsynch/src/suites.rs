//! Experiment runner: sweeps that measure and suites that assert.
//!
//! Every experiment expands into independent tasks executed on the rayon
//! pool; rows come back in task order, so the CSV depends only on the
//! configuration. Wall-clock times go to the manifest, never to the rows.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use gsynch_core::detect::DetectorConfig;
use gsynch_core::ensembles::{kramers_pairing_defect, sample, spectral_edge_check, Ensemble, EnsembleKind};
use gsynch_core::group::{build_catalog, CatalogGroup};
use gsynch_core::ldlr::{
    check_clt_moment_bound, check_l3_moment_bound, check_t_recursion, ldlr_bruteforce_signals,
    ldlr_exact_multinomial, ldlr_from_md, ldlr_from_moments, ldlr_montecarlo_overlap, ldlr_sequential, md_count,
    moments_bruteforce, moments_enumeration, moments_sequential, multinomial_support_size, pearson_mean,
    polylog_neg, ratio_to_f64, Arithmetic, Budget, CltDistribution, FrequencySet, LdlrReport, McOptions, MdPrior,
    Method,
};
use gsynch_core::linalg::hermitian_eigenvalues;
use gsynch_core::models::{canonical_signal, indicator_noise_free, indicator_to_canonical, sample_indicator, ModelSpec};
use gsynch_core::rng::{derive_seed, derive_seed_path};
use gsynch_core::{Error as CoreError, Matrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{DegreeRule, ExperimentConfig, ExperimentKind, Grids};
use crate::error::{Error, Result};
use crate::io::{model_from_name, write_atomic};
use crate::report::{join, rows_to_csv, ResultRow};

/// Shared, read-only state handed to every task.
pub struct Ctx {
    pub hash: String,
    pub seed: u64,
    pub budget: Budget,
    pub grids: Grids,
}

impl Ctx {
    fn row(&self, check: &str) -> ResultRow {
        ResultRow::new(&self.hash, self.seed).set("check", check)
    }
}

type TaskFn = Box<dyn Fn(&Ctx) -> Result<Vec<ResultRow>> + Send + Sync>;

struct Task {
    label: String,
    run: TaskFn,
}

fn task(label: impl Into<String>, f: impl Fn(&Ctx) -> Result<Vec<ResultRow>> + Send + Sync + 'static) -> Task {
    Task {
        label: label.into(),
        run: Box::new(f),
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskRecord {
    pub index: usize,
    pub label: String,
    pub seconds: f64,
    pub rows: usize,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub started_unix_s: f64,
    pub wall_seconds: f64,
    pub threads: usize,
    pub tasks: Vec<TaskRecord>,
    pub rows: usize,
    pub failures: Vec<String>,
    pub resource_limits: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub manifest: Manifest,
}

impl RunOutput {
    /// 0 when every assertion held, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.manifest.passed {
            0
        } else {
            1
        }
    }

    pub fn csv(&self) -> Result<Vec<u8>> {
        rows_to_csv(&self.rows)
    }

    /// Writes the CSV and the manifest, each atomically.
    pub fn write(&self, csv: &Path, manifest: &Path) -> Result<()> {
        write_atomic(csv, &self.csv()?)?;
        write_atomic(manifest, &serde_json::to_vec_pretty(&self.manifest)?)
    }
}

fn describe(row: &ResultRow) -> String {
    row.keys()
        .filter(|k| !matches!(*k, "config_hash" | "seed"))
        .map(|k| format!("{k}={}", row.get(k).unwrap_or("")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let ctx = Ctx {
        hash: config.hash(),
        seed: config.seed,
        budget: config.budgets.to_core(),
        grids: config.grids.clone(),
    };
    let tasks = match config.kind {
        ExperimentKind::OracleSuite => oracle_tasks(&ctx.grids),
        ExperimentKind::BoundSuite => bound_tasks(&ctx.grids),
        ExperimentKind::EquivalenceSuite => equivalence_tasks(&ctx.grids),
        ExperimentKind::LdlrSweep => ldlr_sweep_tasks(&ctx.grids)?,
        ExperimentKind::PowerSweep => power_sweep_tasks(&ctx.grids)?,
    };
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let t0 = Instant::now();
    let results: Vec<(Result<Vec<ResultRow>>, f64)> = tasks
        .par_iter()
        .map(|t| {
            let s = Instant::now();
            let r = (t.run)(&ctx);
            (r, s.elapsed().as_secs_f64())
        })
        .collect();
    let wall = t0.elapsed().as_secs_f64();

    let mut rows = Vec::new();
    let mut records = Vec::with_capacity(tasks.len());
    let mut failures = Vec::new();
    let mut limits = Vec::new();
    for (i, (t, (res, secs))) in tasks.iter().zip(results).enumerate() {
        let (task_rows, st) = match res {
            Ok(r) => {
                let mut st = "ok";
                for row in &r {
                    match row.get("status") {
                        Some("fail") | Some("error") => {
                            failures.push(format!("{}: {}", t.label, describe(row)));
                            st = "fail";
                        }
                        Some("resource-limit") => limits.push(format!("{}: {}", t.label, describe(row))),
                        _ => {}
                    }
                }
                (r, st)
            }
            Err(Error::Core(e @ CoreError::ResourceLimit { .. })) => {
                let row = ctx.row(&t.label).set("status", "resource-limit").set("detail", &e);
                limits.push(format!("{}: {e}", t.label));
                (vec![row], "resource-limit")
            }
            Err(e) => {
                let row = ctx.row(&t.label).set("status", "error").set("detail", &e);
                failures.push(format!("{}: {e}", t.label));
                (vec![row], "error")
            }
        };
        records.push(TaskRecord {
            index: i,
            label: t.label.clone(),
            seconds: secs,
            rows: task_rows.len(),
            status: st.to_string(),
        });
        rows.extend(task_rows);
    }
    let passed = failures.is_empty() && !(config.kind.is_suite() && !limits.is_empty());
    let manifest = Manifest {
        tool: "gsynch",
        version: env!("CARGO_PKG_VERSION"),
        kind: config.kind.name(),
        config: config.clone(),
        config_hash: ctx.hash.clone(),
        seed: config.seed,
        started_unix_s: started,
        wall_seconds: wall,
        threads: rayon::current_num_threads(),
        tasks: records,
        rows: rows.len(),
        failures,
        resource_limits: limits,
        passed,
    };
    Ok(RunOutput { rows, manifest })
}

// ---------------------------------------------------------------- oracle

const ORACLE_LAMBDAS: [f64; 3] = [0.5, 0.9, 1.3];

fn oracle_tasks(g: &Grids) -> Vec<Task> {
    let ls = g.l.clone().unwrap_or_else(|| vec![2, 3, 4]);
    let lams = g.lambda.clone().unwrap_or_else(|| ORACLE_LAMBDAS.to_vec());
    let mut tasks = Vec::new();
    for &l in &ls {
        let ns: Vec<usize> = g.n.clone().unwrap_or_else(|| (1..=10).collect());
        let lams = lams.clone();
        let degree = g.degree.unwrap_or(DegreeRule::Fixed(4));
        tasks.push(task(format!("exact-vs-brute L={l}"), move |c| {
            let mut rows = Vec::new();
            for &n in ns.iter().filter(|&&n| (l as f64).powi(n as i32) <= 1e5) {
                let d = degree.degree(n);
                let ex = moments_enumeration(l, n, d, Arithmetic::Rational, &c.budget)?;
                let br = moments_bruteforce(l, n, d, &c.budget)?;
                let same = ex.exact == br.exact;
                for &lam in &lams {
                    let a = ldlr_from_moments(&ex, lam, Method::ExactMultinomial, String::new())?;
                    let b = ldlr_from_moments(&br, lam, Method::BruteForce, String::new())?;
                    let diff = ratio_to_f64(&(a.exact_cumulative().unwrap() - b.exact_cumulative().unwrap()));
                    let ok = same && diff.abs() <= 1e-12;
                    rows.push(
                        c.row("exact-vs-brute")
                            .set("L", l)
                            .set("n", n)
                            .set("lambda", lam)
                            .set("D", d)
                            .set("lhs", a.cumulative())
                            .set("rhs", b.cumulative())
                            .set("abs_diff", diff.abs())
                            .set("tol", 1e-12)
                            .set("status", status(ok)),
                    );
                }
            }
            Ok(rows)
        }));
    }
    for &l in &ls {
        let lams = lams.clone();
        let ns: Vec<usize> = g.n.clone().map_or_else(|| (1..=5).collect(), |v| v.into_iter().filter(|&n| n <= 5).collect());
        tasks.push(task(format!("md-vs-multinomial L={l}"), move |c| {
            let mut rows = Vec::new();
            for &n in &ns {
                for &lam in &lams {
                    let md = ldlr_from_md(MdPrior::Cyclic, FrequencySet::Nonredundant, l, n, lam, 3, &c.budget)?;
                    let mu = ldlr_exact_multinomial(l, n, lam, 3, Arithmetic::Rational, &c.budget)?;
                    let diff = (md.cumulative() - mu.cumulative()).abs();
                    rows.push(
                        c.row("md-vs-multinomial")
                            .set("L", l)
                            .set("n", n)
                            .set("lambda", lam)
                            .set("D", 3)
                            .set("lhs", md.cumulative())
                            .set("rhs", mu.cumulative())
                            .set("abs_diff", diff)
                            .set("tol", 1e-9)
                            .set("status", status(diff <= 1e-9)),
                    );
                }
                for d in 0..=3 {
                    let circ = md_count(MdPrior::Circle, FrequencySet::All, l, n, d, &c.budget)?;
                    let cyc = md_count(MdPrior::Cyclic, FrequencySet::All, l, n, d, &c.budget)?;
                    rows.push(
                        c.row("md-containment")
                            .set("L", l)
                            .set("n", n)
                            .set("d", d)
                            .set("lhs", &circ)
                            .set("rhs", &cyc)
                            .set("status", status(circ <= cyc)),
                    );
                }
            }
            Ok(rows)
        }));
    }
    for l in 2..=8usize {
        for n in [10usize, 100, 1000] {
            tasks.push(task(format!("first-moment L={l} n={n}"), move |c| Ok(vec![first_moment_row(c, l, n)?])));
        }
    }
    let samples = g.samples.unwrap_or(100_000);
    tasks.push(task("mc-vs-exact", move |c| {
        let opts = McOptions {
            samples,
            seed: c.seed,
            bootstrap: 200,
        };
        let cyc = ModelSpec::Cyclic { l: 3, lambdas: vec![1.0] };
        let mc = ldlr_montecarlo_overlap(&cyc, 20, 0.8, 3, opts)?;
        let ex = ldlr_exact_multinomial(3, 20, 0.8, 3, Arithmetic::Rational, &c.budget)?;
        let circ = ModelSpec::Circle { l: 2, lambdas: vec![1.0] };
        let mc2 = ldlr_montecarlo_overlap(&circ, 50, 0.5, 2, McOptions { seed: derive_seed(c.seed, 1), ..opts })?;
        let md = ldlr_from_md(MdPrior::Circle, FrequencySet::All, 2, 50, 0.5, 2, &c.budget)?;
        Ok([("cyclic(L=3)", 20, 0.8, 3, mc, ex), ("circle(L=2)", 50, 0.5, 2, mc2, md)]
            .into_iter()
            .map(|(model, n, lam, d, mc, ex): (&str, usize, f64, usize, LdlrReport, LdlrReport)| {
                let se = mc.stderr.unwrap_or(0.0);
                let z = (mc.cumulative() - ex.cumulative()).abs() / se;
                c.row("mc-vs-exact")
                    .set("model", model)
                    .set("n", n)
                    .set("lambda", lam)
                    .set("D", d)
                    .set("lhs", mc.cumulative())
                    .set("rhs", ex.cumulative())
                    .set("stderr", se)
                    .set("z", z)
                    .set("status", status(z <= 3.0))
            })
            .collect())
    }));
    tasks.push(task("pearson", |c| {
        let mut rows = Vec::new();
        for l in [3usize, 5] {
            let e = pearson_mean(l, 100_000, 10_000, derive_seed(c.seed, l as u64))?;
            let target = (l - 1) as f64;
            let rel = (e.mean - target).abs() / target;
            rows.push(
                c.row("pearson")
                    .set("L", l)
                    .set("n", 100_000)
                    .set("draws", 10_000)
                    .set("lhs", e.mean)
                    .set("rhs", target)
                    .set("stderr", e.stderr)
                    .set("rel_err", rel)
                    .set("status", status(rel <= 0.02)),
            );
        }
        Ok(rows)
    }));
    tasks
}

/// `E S_L = n(L−1)/2`: exact rational enumeration when the support fits the
/// budget, compensated-float sequential recursion otherwise.
pub fn first_moment_row(c: &Ctx, l: usize, n: usize) -> Result<ResultRow> {
    let target = (n * (l - 1)) as f64 / 2.0;
    let (method, value, ok) = if multinomial_support_size(l, n) <= c.budget.enumeration {
        let t = moments_enumeration(l, n, 1, Arithmetic::Rational, &c.budget)?;
        let exact = &t.exact.as_ref().expect("rational mode")[1];
        let num = n * (l - 1);
        let want = if num % 2 == 0 { (num / 2).to_string() } else { format!("{num}/2") };
        ("rational-enumeration", t.moments[1], exact.to_string() == want)
    } else {
        let t = moments_sequential(l, n, 1, Arithmetic::Float, &c.budget)?;
        let v = t.moments[1];
        ("float-sequential", v, ((v - target) / target).abs() <= 1e-9)
    };
    Ok(c.row("first-moment")
        .set("L", l)
        .set("n", n)
        .set("method", method)
        .set("lhs", value)
        .set("rhs", target)
        .set("status", status(ok)))
}

// ---------------------------------------------------------------- bounds

pub const CLT_N: [usize; 10] = [1, 2, 5, 10, 30, 100, 300, 1000, 3000, 10_000];
pub const CLT_ALPHA: [f64; 11] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0];
pub const T_GAMMA: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];
pub const T_N: [usize; 8] = [1, 2, 3, 5, 8, 13, 20, 30];

pub fn clt_distributions() -> Vec<(String, CltDistribution)> {
    let mut v = vec![("rademacher".to_string(), CltDistribution::Rademacher)];
    for q in 2..=5u32 {
        v.push((format!("bernoulli(1/{q})"), CltDistribution::Bernoulli(1.0 / f64::from(q))));
    }
    v
}

/// Every `α ∈ ℕ^k` with `‖α‖₁ ≤ max`, lexicographic.
pub fn integer_vectors(k: usize, max: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=max {
        for mut rest in integer_vectors(k - 1, max - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn bound_tasks(g: &Grids) -> Vec<Task> {
    let mut tasks = Vec::new();
    for (name, dist) in clt_distributions() {
        tasks.push(task(format!("clt {name}"), move |c| {
            let mut rows = Vec::new();
            for n in CLT_N {
                for a in CLT_ALPHA {
                    let r = check_clt_moment_bound(dist, n, a)?;
                    rows.push(
                        c.row("clt")
                            .set("distribution", &name)
                            .set("n", n)
                            .set("alpha", a)
                            .set("lhs", r.lhs)
                            .set("rhs", r.rhs)
                            .set("status", status(r.holds)),
                    );
                }
            }
            Ok(rows)
        }));
    }
    let ls = g.l.clone().unwrap_or_else(|| vec![3, 4, 5]);
    let ns = g.n.clone().unwrap_or_else(|| T_N.to_vec());
    for &l in ls.iter().filter(|&&l| l > 2) {
        for &n in &ns {
            tasks.push(task(format!("t-recursion L={l} n={n}"), move |c| {
                let mut rows = Vec::new();
                for k in 1..l {
                    for alpha in integer_vectors(k, 4) {
                        let af: Vec<f64> = alpha.iter().map(|&a| a as f64).collect();
                        for gamma in T_GAMMA {
                            let r = check_t_recursion(l, n, k, &af, gamma, &c.budget)?;
                            rows.push(
                                c.row("t-recursion")
                                    .set("L", l)
                                    .set("n", n)
                                    .set("k", k)
                                    .set("alpha", join(&af))
                                    .set("gamma", gamma)
                                    .set("tuples", r.tuples)
                                    .set("violations", r.violations)
                                    .set("worst_ratio", r.worst_ratio)
                                    .set("lhs", r.worst_lhs)
                                    .set("rhs", r.worst_rhs)
                                    .set("witness", r.witness.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"))
                                    .set("status", status(r.holds)),
                            );
                        }
                    }
                }
                Ok(rows)
            }));
        }
    }
    tasks.push(task("l3", |c| {
        Ok(check_l3_moment_bound(1000, 9, &c.budget)?
            .into_iter()
            .map(|r| {
                c.row("l3")
                    .set("n", 1000)
                    .set("d", r.d)
                    .set("lhs", r.moment)
                    .set("rhs", r.bound)
                    .set("in_regime", r.in_regime)
                    .set("status", status(r.holds))
            })
            .collect())
    }));
    tasks.push(task("polylog-boundedness", |c| {
        let limit = polylog_neg(6, 0.81)?;
        let mut rows = Vec::new();
        for n in [50usize, 100, 200, 400] {
            let r = boundedness_report(n, &c.budget)?;
            let cum = r.cumulative();
            let last = *r.terms.last().expect("terms");
            rows.push(
                c.row("polylog-boundedness")
                    .set("L", 3)
                    .set("n", n)
                    .set("lambda", 0.9)
                    .set("D", r.degree)
                    .set("lhs", cum)
                    .set("rhs", limit)
                    .set("plateau_ratio", last / cum)
                    .set("status", status(cum <= limit)),
            );
        }
        Ok(rows)
    }));
    tasks
}

/// `‖L^{≤D}‖²` for `L = 3`, `λ = 0.9`, `D = ⌊n^{0.3}⌋`, exact.
pub fn boundedness_report(n: usize, budget: &Budget) -> Result<LdlrReport> {
    let d = DegreeRule::Power(0.3).degree(n);
    Ok(ldlr_exact_multinomial(3, n, 0.9, d, Arithmetic::Rational, budget)?)
}

// ----------------------------------------------------------- equivalence

pub const EQUIV_GROUPS: [CatalogGroup; 3] = [CatalogGroup::Cyclic(3), CatalogGroup::Cyclic(4), CatalogGroup::Dihedral(3)];

/// Largest entry error between the noise-free indicator transform and the
/// canonical signal blocks.
pub fn indicator_signal_error(which: CatalogGroup, n: usize, lambda: f64, seed: u64) -> Result<f64> {
    let (g, full) = build_catalog(which)?;
    let gamma = lambda * (g.order() as f64 / n as f64).sqrt();
    let obs = indicator_noise_free(&g, n, gamma, seed)?;
    let can = indicator_to_canonical(&obs, &g, &full)?;
    let mut err: f64 = 0.0;
    for (ch, r) in can.channels.iter().zip(full.nonredundant().iter()) {
        let want = canonical_signal(r, lambda, &obs.signal);
        let Matrix::Complex(got) = &ch.matrix else {
            return Err(Error::Format("indicator channels are complex".into()));
        };
        err = err.max((got - want).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(err)
}

/// Mean `|y|²` over all entries of each channel for `γ = 0`, with the
/// target `1/(n d)` and the channel label.
pub fn indicator_noise_variance(which: CatalogGroup, n: usize, draws: usize, seed: u64) -> Result<Vec<(String, f64, f64)>> {
    let (g, full) = build_catalog(which)?;
    let nr = full.nonredundant();
    let mut acc = vec![0.0f64; nr.len()];
    let mut count = vec![0usize; nr.len()];
    for t in 0..draws {
        let obs = sample_indicator(&g, n, 0.0, derive_seed(seed, t as u64))?;
        let can = indicator_to_canonical(&obs, &g, &full)?;
        for (i, ch) in can.channels.iter().enumerate() {
            let d = ch.matrix.dim();
            for p in 0..d {
                for q in 0..d {
                    acc[i] += ch.matrix.get(p, q).norm_sqr();
                }
            }
            count[i] += d * d;
        }
    }
    Ok(nr
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let target = 1.0 / (n * r.complex_dim()) as f64;
            (r.label().to_string(), acc[i] / count[i] as f64, target)
        })
        .collect())
}

fn equivalence_tasks(g: &Grids) -> Vec<Task> {
    let mut tasks = Vec::new();
    let ns = g.n.clone().unwrap_or_else(|| vec![1, 2, 5, 10, 20]);
    for (gi, which) in EQUIV_GROUPS.into_iter().enumerate() {
        let ns = ns.clone();
        tasks.push(task(format!("indicator-signal {}", which.name()), move |c| {
            let mut rows = Vec::new();
            for &n in &ns {
                let err = indicator_signal_error(which, n, 1.3, derive_seed_path(c.seed, &[gi as u64, n as u64]))?;
                rows.push(
                    c.row("indicator-signal")
                        .set("group", which.name())
                        .set("n", n)
                        .set("lambda", 1.3)
                        .set("lhs", err)
                        .set("rhs", 1e-10)
                        .set("status", status(err <= 1e-10)),
                );
            }
            Ok(rows)
        }));
        tasks.push(task(format!("indicator-variance {}", which.name()), move |c| {
            let n = 5;
            let seed = derive_seed_path(c.seed, &[100 + gi as u64]);
            Ok(indicator_noise_variance(which, n, 200, seed)?
                .into_iter()
                .map(|(label, v, target)| {
                    let rel = (v - target).abs() / target;
                    c.row("indicator-variance")
                        .set("group", which.name())
                        .set("irrep", label)
                        .set("n", n)
                        .set("draws", 200)
                        .set("lhs", v)
                        .set("rhs", target)
                        .set("rel_err", rel)
                        .set("status", status(rel <= 0.05))
                })
                .collect())
        }));
    }
    tasks.push(task("ensemble-structure", |c| {
        let mut rows = Vec::new();
        for (i, e) in [Ensemble::Goe, Ensemble::Gue, Ensemble::Gse].into_iter().enumerate() {
            let mut hermitian = true;
            let mut kramers: f64 = 0.0;
            for t in 0..10u64 {
                let m = sample(EnsembleKind { ensemble: e, n: 40 }, derive_seed_path(c.seed, &[200 + i as u64, t]));
                hermitian &= m.entries.is_exactly_hermitian();
                if e == Ensemble::Gse {
                    kramers = kramers.max(kramers_pairing_defect(&hermitian_eigenvalues(&m.entries)?));
                }
            }
            rows.push(c.row("ensemble-hermitian").set("ensemble", e.name()).set("n", 40).set("status", status(hermitian)));
            if e == Ensemble::Gse {
                rows.push(
                    c.row("ensemble-kramers")
                        .set("ensemble", e.name())
                        .set("n", 40)
                        .set("lhs", kramers)
                        .set("rhs", 1e-8)
                        .set("status", status(kramers <= 1e-8)),
                );
            }
        }
        Ok(rows)
    }));
    for (i, e) in [Ensemble::Goe, Ensemble::Gue].into_iter().enumerate() {
        tasks.push(task(format!("ensemble-edge {}", e.name()), move |c| {
            let est = spectral_edge_check(EnsembleKind { ensemble: e, n: 1000 }, 50, derive_seed(c.seed, 300 + i as u64))?;
            let ok = (est.mean - 2.0).abs() <= 0.06;
            Ok(vec![c
                .row("ensemble-edge")
                .set("ensemble", e.name())
                .set("n", 1000)
                .set("trials", 50)
                .set("lhs", est.mean)
                .set("stderr", est.stderr)
                .set("rhs", 2.0)
                .set("status", status(ok))])
        }));
    }
    tasks
}

// ---------------------------------------------------------------- sweeps

/// Routes one LDLR evaluation by model and method name; also returns the
/// number of signal cells `L` (the group order for group models).
#[allow(clippy::too_many_arguments)]
pub fn ldlr_by_method(
    model: &str,
    method: &str,
    l: usize,
    n: usize,
    lam: f64,
    d: usize,
    rational: bool,
    samples: usize,
    seed: u64,
    budget: &Budget,
) -> Result<(LdlrReport, usize)> {
    let arith = if rational { Arithmetic::Rational } else { Arithmetic::Float };
    let spec = model_from_name(model, l, vec![1.0])?;
    // Finite-group models reduce to the multinomial on |G| cells.
    let cells = match &spec {
        ModelSpec::Group { group, .. } => group.order(),
        _ => l,
    };
    let circle = matches!(spec, ModelSpec::Circle { .. });
    let r = match (method, circle) {
        ("mc", _) => ldlr_montecarlo_overlap(
            &spec,
            n,
            lam,
            d,
            McOptions {
                samples,
                seed,
                bootstrap: 200,
            },
        )?,
        ("md", true) => ldlr_from_md(MdPrior::Circle, FrequencySet::All, l, n, lam, d, budget)?,
        ("md", false) => ldlr_from_md(MdPrior::Cyclic, FrequencySet::Nonredundant, cells, n, lam, d, budget)?,
        (_, true) => {
            return Err(Error::config("method", "the circle model supports the md and mc methods only"));
        }
        ("seq", _) => ldlr_sequential(cells, n, lam, d, arith, budget)?,
        ("brute", _) => ldlr_bruteforce_signals(cells, n, lam, d, budget)?,
        ("exact", _) => ldlr_exact_multinomial(cells, n, lam, d, arith, budget)?,
        (other, _) => return Err(Error::config("method", format!("unknown method '{other}'"))),
    };
    Ok((r, cells))
}

fn ldlr_sweep_tasks(g: &Grids) -> Result<Vec<Task>> {
    let model = g.model.clone().unwrap_or_else(|| "cyclic".into());
    let method = g.method.clone().unwrap_or_else(|| "exact".into());
    let rational = g.rational.unwrap_or(false);
    let samples = g.samples.unwrap_or(10_000);
    let degree = g.degree.unwrap_or_default();
    let lams = g.lambda.clone().unwrap_or_else(|| vec![0.9]);
    let mut tasks = Vec::new();
    for l in g.l.clone().unwrap_or_else(|| vec![3]) {
        for n in g.n.clone().unwrap_or_else(|| vec![50, 100, 200, 400]) {
            let (model, method, lams) = (model.clone(), method.clone(), lams.clone());
            tasks.push(task(format!("ldlr {model} L={l} n={n}"), move |c| {
                let d = degree.degree(n);
                let mut rows = Vec::new();
                for &lam in &lams {
                    let row = c.row("ldlr").set("model", &model).set("method", &method).set("L", l).set("n", n).set("lambda", lam).set("D", d);
                    match ldlr_by_method(&model, &method, l, n, lam, d, rational, samples, derive_seed_path(c.seed, &[l as u64, n as u64]), &c.budget) {
                        Ok((r, cells)) => {
                            let limit = if lam < 1.0 { polylog_neg(2 * cells as u32, lam * lam).ok() } else { None };
                            rows.push(
                                row.set("cumulative", r.cumulative())
                                    .set("last_term", r.terms.last().copied().unwrap_or(1.0))
                                    .set("terms", join(&r.terms))
                                    .set("stderr", r.stderr.map_or_else(String::new, |s| s.to_string()))
                                    .set("polylog_limit", limit.map_or_else(String::new, |v| v.to_string()))
                                    .set("status", "ok"),
                            );
                        }
                        Err(Error::Core(e @ CoreError::ResourceLimit { .. })) => {
                            rows.push(row.set("status", "resource-limit").set("detail", e));
                        }
                        Err(e) => return Err(e),
                    }
                }
                Ok(rows)
            }));
        }
    }
    Ok(tasks)
}

fn power_sweep_tasks(g: &Grids) -> Result<Vec<Task>> {
    let model = g.model.clone().unwrap_or_else(|| "circle".into());
    let lams = g.lambda.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0, 1.3, 1.5, 2.0]);
    let trials = g.trials.unwrap_or(100);
    let cfg = DetectorConfig {
        alpha: g.alpha.unwrap_or(0.05),
        trials: g.calib_trials.unwrap_or(100),
        ..DetectorConfig::default()
    };
    let mut tasks = Vec::new();
    for l in g.l.clone().unwrap_or_else(|| vec![1]) {
        for n in g.n.clone().unwrap_or_else(|| vec![500]) {
            let (model, lams) = (model.clone(), lams.clone());
            let spec = model_from_name(&model, l, vec![0.0])?;
            tasks.push(task(format!("power {model} L={l} n={n}"), move |c| {
                let seed = derive_seed_path(c.seed, &[l as u64, n as u64]);
                let sweep = crate::pool::power_curve(&spec, n, &lams, trials, trials, &cfg, seed)?;
                let t1 = sweep.table.type1.expect("null trials requested");
                Ok(sweep
                    .table
                    .rows
                    .iter()
                    .zip(&sweep.mean_statistic)
                    .map(|(r, m)| {
                        c.row("power")
                            .set("model", &model)
                            .set("L", l)
                            .set("n", n)
                            .set("lambda", r.lambda)
                            .set("alpha", cfg.alpha)
                            .set("threshold", sweep.table.threshold)
                            .set("power", r.power.rate)
                            .set("power_lo", r.power.lo)
                            .set("power_hi", r.power.hi)
                            .set("mean_top", m.mean)
                            .set("mean_top_stderr", m.stderr)
                            .set("type1", t1.rate)
                            .set("status", "ok")
                    })
                    .collect())
            }));
        }
    }
    Ok(tasks)
}
