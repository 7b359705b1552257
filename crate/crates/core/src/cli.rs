//! The `envlab` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::complement::{
    is_one_complemented, min_projection_norm, parse_grid, pushout, scan_c2, screen_pushout, SearchConfig,
};
use crate::ergodic::{
    cesaro_projection, ergodic_projection, mean_ergodic_value, spectral_report, ContractionOperator,
    DEFAULT_MAX_ITER, DEFAULT_TOL_ERGODIC,
};
use crate::error::{Error, Result};
use crate::isometry::{algebraic_envelope, isometric_envelope, SignedPermutation};
use crate::linalg::matrix_from_rows;
use crate::lpspace::Space;
use crate::partition::{conditional_envelope, generated_partition, Partition, LEVEL_TOL};
use crate::report::RunReport;
use crate::subspace::{Subspace, SubspaceFile, DEFAULT_TOL};
use crate::suites::{run_suite, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "envlab", version, about = "Envelopes, contractive projections and projection constants in ℓ_p^n(μ)")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "ENVLAB_SEED", default_value_t = 42)]
    pub seed: u64,

    /// Numerical tolerance (command-specific default when omitted).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Report path (for `c2`: the CSV path; the report goes beside it).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All envelopes of a subspace and how they compare.
    Env {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        /// Override the exponent of the space file.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Run a property suite over seeded random instances.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// List the available suites.
    Suites,
    /// Tabulate the Hilbertian projection constant over a grid of exponents.
    C2 {
        /// start:stop:step
        #[arg(long)]
        grid: String,
    },
    /// Minimal norm of a projection onto a subspace.
    Proj {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 2)]
        restarts: usize,
        #[arg(long, default_value_t = 150)]
        iterations: usize,
    },
    /// Glue two copies of X along Y; without inputs, screen ℓ₁ⁿ for a
    /// badly complemented Y first.
    Pushout {
        #[arg(long, requires = "subspace")]
        space: Option<PathBuf>,
        #[arg(long, requires = "space")]
        subspace: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        /// Candidates per dimension when screening.
        #[arg(long, default_value_t = 60)]
        candidates: usize,
        /// Screening threshold on λ(Y, X).
        #[arg(long, default_value_t = 1.01)]
        threshold: f64,
    },
    /// Mean-ergodic projection of a contraction.
    Ergodic {
        #[arg(long)]
        space: PathBuf,
        /// JSON: {"matrix": rows} | {"combination": [{"weight", "perm", "signs"}]} | {"partition": blocks}
        #[arg(long)]
        operator: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Also report the limit of the averages at this vector (JSON array).
        #[arg(long)]
        vector: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Spectral projection when it validates, Cesàro otherwise.
    Auto,
    Cesaro,
    Spectral,
}

#[derive(Debug, Deserialize)]
struct WeightedElement {
    weight: f64,
    #[serde(flatten)]
    element: SignedPermutation,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum OperatorFile {
    Matrix(Vec<Vec<f64>>),
    Combination(Vec<WeightedElement>),
    Partition(Vec<Vec<usize>>),
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_space(path: &Path, p: Option<f64>) -> Result<Space> {
    let s: Space = read_json(path)?;
    match p {
        Some(p) => s.with_exponent(p),
        None => Ok(s),
    }
}

fn load_subspace(space: &Space, path: &Path) -> Result<Subspace> {
    let f: SubspaceFile = read_json(path)?;
    Subspace::load(space, &f)
}

fn load_operator(space: &Space, path: &Path) -> Result<ContractionOperator> {
    match read_json::<OperatorFile>(path)? {
        OperatorFile::Matrix(matrix) => {
            let m = matrix_from_rows(&matrix).ok_or_else(|| Error::Parse("ragged operator matrix".into()))?;
            ContractionOperator::from_matrix(space, m)
        }
        OperatorFile::Combination(combination) => {
            let (w, g): (Vec<f64>, Vec<SignedPermutation>) = combination.into_iter().map(|e| (e.weight, e.element)).unzip();
            ContractionOperator::convex_combination(space, &w, &g)
        }
        OperatorFile::Partition(partition) => {
            let p: Partition = serde_json::from_value(json!({ "blocks": partition }))?;
            ContractionOperator::conditional_expectation(space, &p)
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn tolerances(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Output of one command: the report and whether its checks passed.
struct Outcome {
    report: RunReport,
    passed: bool,
    csv: Option<(PathBuf, String)>,
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let start = Instant::now();
    let seed = cli.seed;
    let elapsed = |s: Instant| s.elapsed().as_millis() as u64;
    let outcome = match &cli.command {
        Command::Env { space, subspace, p } => {
            let sp = load_space(space, *p)?;
            let y = load_subspace(&sp, subspace)?;
            let tol = cli.tol.unwrap_or(DEFAULT_TOL);
            let outputs = envelopes(&sp, &y, tol)?;
            let inputs = json!({ "space": sp, "subspace": y.to_file() });
            Outcome { report: RunReport::new("env", inputs, outputs, seed, tolerances(&[("rank", tol), ("level_set", LEVEL_TOL)]), elapsed(start)), passed: true, csv: None }
        }
        Command::Verify { suite, trials } => {
            let r = run_suite(suite, *trials, seed)?;
            let passed = r.ok();
            let inputs = json!({ "suite": suite, "trials": r.trials });
            Outcome {
                report: RunReport::new("verify", inputs, to_value(&r)?, seed, tolerances(&[("subspace_equality", crate::suites::SUBSPACE_TOL)]), elapsed(start)),
                passed,
                csv: None,
            }
        }
        Command::Suites => {
            Outcome { report: RunReport::new("suites", json!({}), to_value(&SUITES)?, seed, BTreeMap::new(), elapsed(start)), passed: true, csv: None }
        }
        Command::C2 { grid } => {
            let g = parse_grid(grid)?;
            let table = scan_c2(&g)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            let csv = String::from_utf8(buf).expect("ascii csv");
            let outputs = json!({ "rows": table.rows.len(), "all_monotone": table.all_monotone, "table": table.rows });
            let path = cli.out.clone();
            Outcome {
                report: RunReport::new("c2", json!({ "grid": grid }), outputs, seed, BTreeMap::new(), elapsed(start)),
                passed: true,
                csv: Some((path.unwrap_or_default(), csv)),
            }
        }
        Command::Proj { space, subspace, p, restarts, iterations } => {
            let sp = load_space(space, *p)?;
            let y = load_subspace(&sp, subspace)?;
            let tol = cli.tol.unwrap_or(1e-6);
            let config = SearchConfig { seed, restarts: *restarts, iterations: *iterations, ..Default::default() };
            let r = min_projection_norm(&y, &config)?;
            let mut outputs = to_value(&r)?;
            if sp.p().is_finite() {
                outputs["verdict"] = to_value(&is_one_complemented(&y, tol, &config)?)?;
            }
            let inputs = json!({ "space": sp, "subspace": y.to_file(), "restarts": restarts, "iterations": iterations });
            Outcome { report: RunReport::new("proj", inputs, outputs, seed, tolerances(&[("one_complemented", tol)]), elapsed(start)), passed: true, csv: None }
        }
        Command::Pushout { space, subspace, p, candidates, threshold } => {
            let (inputs, outputs, passed) = match (space, subspace) {
                (Some(space), Some(subspace)) => {
                    let sp = load_space(space, *p)?;
                    let y = load_subspace(&sp, subspace)?;
                    let (_, r) = pushout(&sp, &y, seed)?;
                    let ok = r.copies_one_complemented && r.copies_meet_in_diagonal;
                    (json!({ "space": sp, "subspace": y.to_file() }), to_value(&r)?, ok)
                }
                _ => {
                    let s = screen_pushout(seed, *candidates, *threshold)?;
                    let ok = s.report.copies_one_complemented && s.report.lambda_in_w.is_some_and(|l| l > 1.0);
                    (json!({ "candidates": candidates, "threshold": threshold }), to_value(&s)?, ok)
                }
            };
            Outcome { report: RunReport::new("pushout", inputs, outputs, seed, tolerances(&[("embedding", 1e-9), ("contraction", 1e-6)]), elapsed(start)), passed, csv: None }
        }
        Command::Ergodic { space, operator, p, max_iter, method, vector } => {
            let sp = load_space(space, *p)?;
            let t = load_operator(&sp, operator)?;
            let tol = cli.tol.unwrap_or(DEFAULT_TOL_ERGODIC);
            let report = match method {
                Method::Auto => ergodic_projection(&t, tol, *max_iter)?,
                Method::Cesaro => cesaro_projection(&t, tol, *max_iter)?,
                Method::Spectral => spectral_report(&t)?,
            };
            let mut outputs = to_value(&report)?;
            outputs["certification"] = to_value(&t.certification())?;
            if let Some(v) = vector {
                let x: Vec<f64> = serde_json::from_str(v)?;
                outputs["mean_value"] = to_value(&mean_ergodic_value(&t, &x, tol, *max_iter)?)?;
            }
            let inputs = json!({ "space": sp, "operator": crate::linalg::matrix_rows(t.matrix()), "method": format!("{method:?}").to_lowercase() });
            Outcome { report: RunReport::new("ergodic", inputs, outputs, seed, tolerances(&[("cesaro", tol)]), elapsed(start)), passed: true, csv: None }
        }
    };
    Ok(outcome)
}

/// Envelopes of `y` with pairwise equality and chain-inclusion flags.
pub fn envelopes(space: &Space, y: &Subspace, tol: f64) -> Result<Value> {
    let eqtol = 1e-7;
    let iso = isometric_envelope(space, y, tol)?;
    let alg = algebraic_envelope(space, y, tol)?;
    let cond = conditional_envelope(y, LEVEL_TOL)?;
    let lat = y.lattice_closure()?;
    let unital = y.is_unital(tol);
    let describe = |s: &Subspace| json!({ "dim": s.dim(), "basis": s.basis() });
    let named = [("isometric", &iso.envelope), ("algebraic", &alg), ("conditional", &cond), ("lattice", &lat)];
    let mut equal = serde_json::Map::new();
    for (i, (a, x)) in named.iter().enumerate() {
        for (b, z) in &named[i + 1..] {
            equal.insert(format!("{a}={b}"), json!(x.equal(z, eqtol)?));
        }
    }
    let mut out = json!({
        "n": space.n(),
        "p": if space.p().is_finite() { json!(space.p()) } else { json!("inf") },
        "dim": y.dim(),
        "unital": unital,
        "isometric": describe(&iso.envelope),
        "algebraic": describe(&alg),
        "conditional": describe(&cond),
        "lattice": describe(&lat),
        "generated_partition": generated_partition(y, LEVEL_TOL),
        "equal": equal,
        "note": iso.note,
    });
    if unital {
        // the minimal envelope of a unital subspace is its conditional envelope
        out["minimal"] = describe(&cond);
        out["chain"] = json!({
            "minimal_in_isometric": iso.envelope.contains_subspace(&cond, eqtol)?,
            "isometric_in_algebraic": alg.contains_subspace(&iso.envelope, eqtol)?,
            "minimal_strict": !cond.equal(&iso.envelope, eqtol)?,
            "isometric_strict": !iso.envelope.equal(&alg, eqtol)?,
        });
    }
    Ok(out)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Parse(_) | Error::Domain(_) | Error::Dimension { .. } | Error::Io(_) => EXIT_USAGE,
        Error::Convergence(_) => EXIT_NO_CONVERGENCE,
        _ => EXIT_FAILED,
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    let json = outcome.report.to_json()?;
    match (&outcome.csv, &cli.out) {
        (Some((path, csv)), Some(_)) => {
            std::fs::write(path, csv)?;
            let mut beside = path.clone().into_os_string();
            beside.push(".report.json");
            outcome.report.write(Path::new(&beside))?;
        }
        (Some((_, csv)), None) => {
            let _ = write!(std::io::stdout(), "{csv}");
        }
        (None, Some(path)) => outcome.report.write(path)?,
        (None, None) => {}
    }
    if outcome.csv.is_none() || cli.out.is_some() {
        let _ = writeln!(std::io::stdout(), "{json}");
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.tol {
        if t.is_nan() || t <= 0.0 {
            eprintln!("error: --tol must be positive");
            return EXIT_USAGE;
        }
    }
    match execute(&cli).and_then(|o| emit(&cli, &o).map(|_| o)) {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => EXIT_FAILED,
        Err(e) => {
            if let Error::Convergence(r) = &e {
                if let Ok(s) = serde_json::to_string_pretty(r.as_ref()) {
                    println!("{s}");
                }
            }
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
