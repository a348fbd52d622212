use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gsynch::config::{BudgetConfig, DegreeRule, ExperimentConfig, ExperimentKind};
use gsynch::io::{model_from_name, model_of_observation, read_observation, write_atomic, write_observation, MatrixFile};
use gsynch::phase::{phase_diagram, PhaseParams};
use gsynch::report::{ldlr_terms_csv, rows_to_csv, LdlrJson, ResultRow};
use gsynch::{pool, suites, Error, Result};
use gsynch_core::detect::{detect, hermitian_part, DetectorConfig};
use gsynch_core::ensembles::{sample, Ensemble, EnsembleKind};
use gsynch_core::ldlr::{
    bound_polylog, check_clt_moment_bound, check_l3_moment_bound, check_t_recursion, md_count, Budget,
    CltDistribution, FrequencySet, MdPrior,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gsynch", version, about = "Gaussian group synchronization: sampling, low-degree bounds, detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an observation and write it as JSON (or binary for `.bin`).
    Simulate {
        #[arg(long, default_value = "cyclic")]
        model: String,
        #[arg(long = "L", default_value_t = 3)]
        l: usize,
        #[arg(long)]
        n: usize,
        /// One value for every channel, or one per channel.
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw one GOE/GUE/GSE matrix.
    SampleEnsemble {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Low-degree likelihood ratio norm `‖L^{≤D}‖²`.
    Ldlr {
        #[arg(long, default_value = "exact")]
        method: String,
        #[arg(long, default_value = "cyclic")]
        model: String,
        #[arg(long = "L", default_value_t = 3)]
        l: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "D")]
        degree: String,
        #[arg(long)]
        rational: bool,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the per-degree term table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the calibrated spectral test on a stored observation.
    Detect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        calib_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Power of the spectral test over a grid of signal strengths.
    Power {
        #[arg(long, default_value = "circle")]
        model: String,
        #[arg(long = "L", default_value_t = 1)]
        l: usize,
        #[arg(long)]
        n: usize,
        /// `a:b:step` or a comma list.
        #[arg(long, default_value = "0:2:0.5")]
        lambda_grid: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 200)]
        calib_trials: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count the index tuples whose frequency-weighted sum vanishes.
    MdCount {
        #[arg(long, value_enum, default_value = "cyclic")]
        prior: PriorArg,
        #[arg(long, value_enum, default_value = "all")]
        freqs: FreqArg,
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Check one of the moment inequalities.
    Bounds {
        #[command(subcommand)]
        which: BoundCmd,
    },
    /// Run a configured experiment or suite.
    Suite {
        /// JSON config file.
        #[arg(long, conflicts_with = "kind")]
        config: Option<PathBuf>,
        /// Experiment kind with default grids, e.g. `oracle-suite`.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for `<kind>.csv` and `<kind>.manifest.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LDLR values, detection power and the analytic markers over `(L, λ)`.
    PhaseDiagram {
        #[arg(long = "L-grid", value_delimiter = ',', default_value = "2,3,4,5,8,11")]
        l_grid: Vec<usize>,
        #[arg(long, default_value = "0.2:2:0.2")]
        lambda_grid: String,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long = "D", default_value = "power:0.3")]
        degree: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        calib_trials: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BoundCmd {
    /// `E|Σ(X−μ)|^{2α}` against its Gaussian-moment bound.
    Clt {
        /// `rademacher` or `bernoulli:<p>`.
        #[arg(long, default_value = "rademacher")]
        dist: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
    },
    /// One step of the T-recursion over all tuples.
    TRecursion {
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
    },
    /// `E S_3^d ≤ 8 n^d d² d!`.
    L3 {
        #[arg(long)]
        n: usize,
        #[arg(long = "D")]
        dmax: usize,
    },
    /// Polylogarithm bound on the cyclic LDLR for `λ < 1`.
    Polylog {
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "D")]
        degree: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    Circle,
    Cyclic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FreqArg {
    All,
    Nonredundant,
}

/// `a:b:step` (inclusive) or `x,y,z`.
fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::config("lambda-grid", format!("cannot parse '{s}'"));
    if let Some((a, rest)) = s.split_once(':') {
        let (b, step) = rest.split_once(':').ok_or_else(bad)?;
        let (a, b, step): (f64, f64, f64) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
        );
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        // Round away accumulated error so 0:2:0.1 yields 0.3, not 0.30000000000000004.
        return Ok((0..=count).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn budget() -> Result<Budget> {
    let mut b = BudgetConfig::default();
    b.apply_env()?;
    b.validate()?;
    Ok(b.to_core())
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn emit_csv(rows: &[ResultRow], out: Option<&Path>) -> Result<()> {
    let bytes = rows_to_csv(rows)?;
    match out {
        Some(p) => write_atomic(p, &bytes),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

fn verdict(holds: bool) -> ExitCode {
    if holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            model,
            l,
            n,
            lambda,
            seed,
            out,
        } => {
            let obs = model_from_name(&model, l, lambda)?.sample(n, seed)?;
            write_observation(&out, &obs)?;
        }
        Command::SampleEnsemble { kind, n, seed, out } => {
            let kind = EnsembleKind::new(Ensemble::parse(&kind).map_err(|e| Error::config("kind", e.to_string()))?, n)?;
            let m = sample(kind, seed);
            let file = MatrixFile::from_matrix(&m.entries);
            match out {
                Some(p) => write_atomic(&p, &serde_json::to_vec_pretty(&file)?)?,
                None => print_json(&file)?,
            }
        }
        Command::Ldlr {
            method,
            model,
            l,
            n,
            lambda,
            degree,
            rational,
            samples,
            seed,
            csv,
        } => {
            let d = DegreeRule::parse(&degree)?.degree(n);
            let (r, _) = suites::ldlr_by_method(&model, &method, l, n, lambda, d, rational, samples, seed, &budget()?)?;
            if let Some(p) = csv {
                write_atomic(&p, &ldlr_terms_csv(&r)?)?;
            }
            print_json(&LdlrJson::from(&r))?;
        }
        Command::Detect {
            input,
            alpha,
            calib_trials,
            seed,
        } => {
            let obs = read_observation(&input)?;
            let obs = if obs.hermitian { obs } else { hermitian_part(&obs) };
            let cfg = DetectorConfig {
                alpha,
                trials: calib_trials,
                ..DetectorConfig::default()
            };
            cfg.validate()?;
            let null = model_of_observation(&obs)?.with_lambda(0.0);
            let threshold = pool::calibrate_threshold(&null, obs.n, &cfg, seed)?;
            let v = detect(&obs, threshold, &cfg)?;
            print_json(&json!({
                "model": obs.model,
                "n": obs.n,
                "label": v.label.name(),
                "statistic": v.statistic,
                "threshold": v.threshold,
                "top_eigenvalues": v.top_eigenvalues,
                "alpha": alpha,
                "calib_trials": calib_trials,
                "seed": seed,
            }))?;
        }
        Command::Power {
            model,
            l,
            n,
            lambda_grid,
            trials,
            calib_trials,
            alpha,
            seed,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::PowerSweep, seed);
            cfg.grids.model = Some(model);
            cfg.grids.l = Some(vec![l]);
            cfg.grids.n = Some(vec![n]);
            cfg.grids.lambda = Some(parse_grid(&lambda_grid)?);
            cfg.grids.trials = Some(trials);
            cfg.grids.calib_trials = Some(calib_trials);
            cfg.grids.alpha = Some(alpha);
            cfg.budgets.apply_env()?;
            let res = suites::run(&cfg)?;
            emit_csv(&res.rows, out.as_deref())?;
            return Ok(verdict(res.manifest.passed));
        }
        Command::MdCount { prior, freqs, l, n, d } => {
            let prior = match prior {
                PriorArg::Circle => MdPrior::Circle,
                PriorArg::Cyclic => MdPrior::Cyclic,
            };
            let freqs = match freqs {
                FreqArg::All => FrequencySet::All,
                FreqArg::Nonredundant => FrequencySet::Nonredundant,
            };
            println!("{}", md_count(prior, freqs, l, n, d, &budget()?)?);
        }
        Command::Bounds { which } => return bounds(which),
        Command::Suite { config, kind, seed, out } => {
            let mut cfg = match (config, kind) {
                (Some(p), _) => ExperimentConfig::load(&p)?,
                (None, Some(k)) => ExperimentConfig::new(ExperimentKind::parse(&k)?, seed.unwrap_or(0)),
                (None, None) => return Err(Error::config("suite", "pass --config <file> or --kind <name>")),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.budgets.apply_env()?;
            let name = cfg.kind.name();
            let dir = out.unwrap_or_else(|| PathBuf::from("."));
            let csv = cfg.output.csv.clone().unwrap_or_else(|| dir.join(format!("{name}.csv")));
            let manifest = cfg.output.manifest.clone().unwrap_or_else(|| dir.join(format!("{name}.manifest.json")));
            let res = suites::run(&cfg)?;
            res.write(&csv, &manifest)?;
            for f in &res.manifest.failures {
                eprintln!("FAIL {f}");
            }
            for f in &res.manifest.resource_limits {
                eprintln!("RESOURCE-LIMIT {f}");
            }
            eprintln!(
                "{name}: {} rows, {} failures, {} resource limits, {:.1}s",
                res.manifest.rows,
                res.manifest.failures.len(),
                res.manifest.resource_limits.len(),
                res.manifest.wall_seconds
            );
            return Ok(verdict(res.manifest.passed));
        }
        Command::PhaseDiagram {
            l_grid,
            lambda_grid,
            n,
            degree,
            trials,
            calib_trials,
            alpha,
            seed,
            out,
        } => {
            let p = PhaseParams {
                l_grid,
                lambda_grid: parse_grid(&lambda_grid)?,
                n,
                degree: DegreeRule::parse(&degree)?,
                trials,
                calib_trials,
                alpha,
                seed,
            };
            emit_csv(&phase_diagram(&p, &budget()?)?, out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_dist(s: &str) -> Result<CltDistribution> {
    if s == "rademacher" {
        return Ok(CltDistribution::Rademacher);
    }
    s.strip_prefix("bernoulli:")
        .and_then(|p| p.parse().ok())
        .map(CltDistribution::Bernoulli)
        .ok_or_else(|| Error::config("dist", format!("expected rademacher or bernoulli:<p>, got '{s}'")))
}

fn bounds(which: BoundCmd) -> Result<ExitCode> {
    let holds = match which {
        BoundCmd::Clt { dist, n, alpha } => {
            let r = check_clt_moment_bound(parse_dist(&dist)?, n, alpha)?;
            print_json(&json!({"distribution": dist, "n": n, "alpha": alpha, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds}))?;
            r.holds
        }
        BoundCmd::TRecursion { l, n, k, alpha, gamma } => {
            let r = check_t_recursion(l, n, k, &alpha, gamma, &budget()?)?;
            print_json(&json!({
                "L": r.l, "n": r.n, "k": r.k, "alpha": r.alpha, "gamma": r.gamma,
                "tuples": r.tuples, "violations": r.violations, "worst_ratio": r.worst_ratio,
                "worst_lhs": r.worst_lhs, "worst_rhs": r.worst_rhs, "witness": r.witness, "holds": r.holds,
            }))?;
            r.holds
        }
        BoundCmd::L3 { n, dmax } => {
            let rows = check_l3_moment_bound(n, dmax, &budget()?)?;
            let v: Vec<_> = rows
                .iter()
                .map(|r| json!({"d": r.d, "moment": r.moment, "bound": r.bound, "holds": r.holds, "in_regime": r.in_regime}))
                .collect();
            print_json(&v)?;
            rows.iter().all(|r| r.holds)
        }
        BoundCmd::Polylog { l, lambda, degree } => {
            let b = bound_polylog(l, lambda, degree)?;
            print_json(&json!({"L": l, "lambda": lambda, "D": degree, "partial": b.partial, "limit": b.limit}))?;
            true
        }
    };
    Ok(verdict(holds))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
