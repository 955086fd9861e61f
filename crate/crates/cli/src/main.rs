//! `lcp-atlas`: solve, analyze and classify LCPs, sweep parameters, and study
//! the two-transistor circuit.
//!
//! Exit codes: 0 ok, 2 input error, 3 numeric or solver error, 4 unsupported dimension.

mod output;
mod problem;
mod report;
mod svg;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lcp_atlas::analysis::{degree, is_r0};
use lcp_atlas::circuit::{circuit_mhat, circuit_model, gamma, CircuitParams};
use lcp_atlas::classify::{classify_2d, LINE_TOL};
use lcp_atlas::equivalence::normal_form_2d;
use lcp_atlas::lcp::{solve_enumerate, DEFAULT_TOL};
use lcp_atlas::lcs::{equilibria, simulate, LcsModel, RSchedule};
use lcp_atlas::lemke::solve_lemke;
use lcp_atlas::linalg::rows_of;
use lcp_atlas::stability::{stability_margin, stability_report, STABILITY_TOL};
use lcp_atlas::sweep::{linspace, sweep_1d, sweep_2d_circuit};
use lcp_atlas::{Error, Vector};
use serde::Serialize;
use thiserror::Error;

use problem::{Problem, ProblemFile};
use report::{AnalyzeReport, CircuitInfo, ClassifyReport, GammaSample, SolveReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(Error),
    #[error("{0}")]
    Unsupported(String),
}

impl CliError {
    /// A library error raised while validating input.
    pub fn input(e: Error) -> Self {
        match e {
            Error::DimensionExceeded { .. } | Error::DimensionUnsupported { .. } => CliError::Unsupported(e.to_string()),
            other => CliError::Parse(other.to_string()),
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionExceeded { .. } | Error::DimensionUnsupported { .. } => CliError::Unsupported(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

#[derive(Parser)]
#[command(name = "lcp-atlas", version, about = "Geometric analysis of linear complementarity problems and systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Enumerate,
    Lemke,
}

#[derive(Subcommand)]
enum Command {
    /// List every solution of the LCP in a problem file.
    Solve {
        file: PathBuf,
        /// Relative sign tolerance for accepting a solution.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::Enumerate)]
        method: Method,
        #[arg(long)]
        json: bool,
    },
    /// R0 property, degeneracy, stability, margin and degree.
    ///
    /// Without --margin or --degree both are reported.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        margin: bool,
        #[arg(long)]
        degree: bool,
        /// Seed for the degree probe.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tolerance for the weak-degeneracy test.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Equivalence class of a 2x2 LCP matrix.
    Classify2d {
        file: PathBuf,
        /// Distance in radians below which a normal form counts as on an unstable line.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Solutions along q0 + lambda * dir.
    Sweep {
        file: PathBuf,
        /// Start point, comma separated (defaults to the file's q).
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        /// Direction, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        dir: String,
        /// Grid as start:end:count.
        #[arg(long, allow_hyphen_values = true, default_value = "-1:1:21")]
        lambda: String,
        /// CSV output path, `-` for stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Two-transistor circuit (or any LCS file for equilibria and simulate).
    Circuit {
        #[command(subcommand)]
        action: CircuitCommand,
    },
}

#[derive(Subcommand)]
enum CircuitCommand {
    /// Pivoted matrix and the sign of gamma over a grid of R2.
    Info {
        file: Option<PathBuf>,
        /// R2 grid as start:end:count.
        #[arg(long, default_value = "1:1000:21")]
        r2_grid: String,
        #[arg(long)]
        json: bool,
    },
    /// Equilibria at the file's (or the given) R2 and r.
    Equilibria {
        file: Option<PathBuf>,
        #[arg(long)]
        r2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        r: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Equilibrium count over an (R2, r) grid.
    Sweep2d {
        file: Option<PathBuf>,
        #[arg(long, default_value = "1:250:50")]
        r2: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0.5:2.5:50")]
        r: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Fixed-step trajectory under a piecewise-constant input.
    Simulate {
        file: Option<PathBuf>,
        #[arg(long)]
        r2: Option<f64>,
        /// Initial state, comma separated (default zero).
        #[arg(long, allow_hyphen_values = true)]
        xi0: Option<String>,
        /// Input schedule `t:r,t:r,...`; vector inputs separate components with `/`.
        #[arg(long, allow_hyphen_values = true)]
        schedule: Option<String>,
        #[arg(long, default_value_t = 3.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        /// Keep every k-th step.
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| CliError::Usage(format!("{what}: `{s}` is not a finite number")))
}

fn parse_vector(s: &str, what: &str) -> Result<Vector, CliError> {
    let xs = s.split(',').map(|p| parse_f64(p, what)).collect::<Result<Vec<_>, _>>()?;
    Ok(Vector::from_vec(xs))
}

fn parse_grid(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(CliError::Usage(format!("{what}: expected start:end:count, got `{s}`")));
    };
    let n: usize = n.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| CliError::Usage(format!("{what}: count must be a positive integer")))?;
    Ok(linspace(parse_f64(a, what)?, parse_f64(b, what)?, n))
}

fn parse_schedule(s: &str, l: usize) -> Result<RSchedule, CliError> {
    let mut breakpoints = vec![];
    for entry in s.split(',') {
        let (t, r) = entry.split_once(':').ok_or_else(|| CliError::Usage(format!("--schedule: expected t:r, got `{entry}`")))?;
        let r = r.split('/').map(|x| parse_f64(x, "--schedule")).collect::<Result<Vec<_>, _>>()?;
        if r.len() != l {
            return Err(CliError::Usage(format!("--schedule: input has {} components, expected {l}", r.len())));
        }
        breakpoints.push((parse_f64(t, "--schedule")?, r));
    }
    if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CliError::Usage("--schedule: times must increase".into()));
    }
    Ok(RSchedule { breakpoints })
}

fn emit(path: &Path, content: &str) -> Result<(), CliError> {
    if path == Path::new("-") {
        std::io::stdout().write_all(content.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
    } else {
        fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

fn print_json<T: Serialize>(x: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(x).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn circuit_problem(file: Option<&Path>) -> Result<Option<ProblemFile>, CliError> {
    file.map(problem::load).transpose()
}

fn circuit_params(file: Option<&Path>) -> Result<CircuitParams, CliError> {
    match circuit_problem(file)? {
        None => Ok(CircuitParams::default()),
        Some(ProblemFile { problem: Problem::Circuit(p), .. }) => Ok(p),
        Some(_) => Err(CliError::Parse("expected a problem file of kind `circuit`".into())),
    }
}

/// Model, input and diode voltage of a circuit or LCS file.
fn dynamics(file: Option<&Path>, r2: Option<f64>, r: Option<&str>) -> Result<(LcsModel, Vector, Vector), CliError> {
    let (model, r0, s) = match circuit_problem(file)? {
        Some(ProblemFile { problem: Problem::Lcs { model, r, s }, .. }) => {
            if r2.is_some() {
                return Err(CliError::Usage("--r2 applies to circuit files only".into()));
            }
            (model, r, s)
        }
        other => {
            let mut p = match other {
                None => CircuitParams::default(),
                Some(ProblemFile { problem: Problem::Circuit(p), .. }) => p,
                Some(_) => return Err(CliError::Parse("expected a problem file of kind `circuit` or `lcs`".into())),
            };
            if let Some(r2) = r2 {
                p = p.with_r2(r2);
                p.validate().map_err(CliError::input)?;
            }
            (circuit_model(&p)?, Vector::from_element(1, p.r), Vector::from_element(1, p.s))
        }
    };
    let r = match r {
        Some(text) => parse_vector(text, "--r")?,
        None => r0,
    };
    if r.len() != s.len() {
        return Err(CliError::Usage(format!("--r: expected {} components", s.len())));
    }
    Ok((model, r, s))
}

fn bisect_gamma(p: &CircuitParams, mut a: f64, mut b: f64) -> Result<f64, CliError> {
    let mut ga = gamma(&p.with_r2(a))?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= 1e-12 * b.abs().max(1.0) {
            break;
        }
        let gm = gamma(&p.with_r2(mid))?;
        if (gm > 0.0) == (ga > 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { file, tol, method, json } => {
            let pf = problem::load(&file)?;
            let inst = pf.lcp()?;
            let tol = tol.or(pf.tol).unwrap_or(DEFAULT_TOL);
            let report = match method {
                Method::Enumerate => SolveReport::Enumerate { name: pf.name.clone(), solutions: solve_enumerate(&inst, tol)? },
                Method::Lemke => SolveReport::Lemke { name: pf.name.clone(), outcome: solve_lemke(&inst, tol.min(1e-10), 10_000)? },
            };
            if json {
                print_json(&report)
            } else {
                print!("{}", report.text(&inst));
                Ok(())
            }
        }
        Command::Analyze { file, margin, degree: want_degree, seed, tol, json } => {
            let pf = problem::load(&file)?;
            let m = pf.lcp()?.m;
            let all = !margin && !want_degree;
            let tol = tol.or(pf.tol).unwrap_or(STABILITY_TOL);
            let r0 = is_r0(&m)?;
            let st = stability_report(&m, tol)?;
            let report = AnalyzeReport {
                name: pf.name.clone(),
                degenerate_alphas: st.degenerate_alphas,
                weak_witness: st.weak_witness,
                is_stable: st.is_stable,
                margin: if all || margin { Some(stability_margin(&m)?) } else { None },
                degree: if (all || want_degree) && r0.is_r0 { Some(degree(&m, seed, DEFAULT_TOL)?) } else { None },
                r0,
            };
            if json {
                print_json(&report)
            } else {
                print!("{}", report.text());
                Ok(())
            }
        }
        Command::Classify2d { file, tol, json } => {
            let pf = problem::load(&file)?;
            let m = pf.lcp()?.m;
            let report =
                ClassifyReport { name: pf.name.clone(), normal_form: normal_form_2d(&m)?, class: classify_2d(&m, tol.or(pf.tol).unwrap_or(LINE_TOL))? };
            if json {
                print_json(&report)
            } else {
                print!("{}", report.text());
                Ok(())
            }
        }
        Command::Sweep { file, q0, dir, lambda, out, svg, json } => {
            let pf = problem::load(&file)?;
            let inst = pf.lcp()?;
            let q0 = match q0 {
                Some(text) => parse_vector(&text, "--q0")?,
                None => inst.q.clone(),
            };
            let dir = parse_vector(&dir, "--dir")?;
            if q0.len() != inst.dim() || dir.len() != inst.dim() {
                return Err(CliError::Usage(format!("--q0 and --dir need {} components", inst.dim())));
            }
            let lambdas = parse_grid(&lambda, "--lambda")?;
            let diagram = sweep_1d(&inst.m, &q0, &dir, &lambdas)?;
            if let Some(path) = &out {
                emit(path, &output::sweep_csv(&diagram, &q0, &dir)?)?;
            }
            if let Some(path) = &svg {
                emit(path, &output::sweep_svg(&diagram, pf.name.as_deref().unwrap_or("bifurcation diagram")))?;
            }
            if json {
                print_json(&diagram)
            } else {
                if out.as_deref() != Some(Path::new("-")) {
                    print!("{}", report::sweep_text(&diagram));
                }
                Ok(())
            }
        }
        Command::Circuit { action } => run_circuit(action),
    }
}

fn run_circuit(action: CircuitCommand) -> Result<(), CliError> {
    match action {
        CircuitCommand::Info { file, r2_grid, json } => {
            let p = circuit_params(file.as_deref())?;
            let grid = parse_grid(&r2_grid, "--r2-grid")?;
            if grid.iter().any(|&r2| r2 <= 0.0) {
                return Err(CliError::Usage("--r2-grid: values must be positive".into()));
            }
            let samples = grid.iter().map(|&r2| Ok(GammaSample { r2, gamma: gamma(&p.with_r2(r2))? })).collect::<Result<Vec<_>, CliError>>()?;
            let sign_change = samples.windows(2).find(|w| (w[0].gamma > 0.0) != (w[1].gamma > 0.0)).map(|w| [w[0].r2, w[1].r2]);
            let root = sign_change.map(|[a, b]| bisect_gamma(&p, a, b)).transpose()?;
            let info = CircuitInfo { mhat: rows_of(&circuit_mhat(&p)?), gamma: gamma(&p)?, params: p, samples, sign_change, root };
            if json {
                print_json(&info)
            } else {
                print!("{}", info.text());
                Ok(())
            }
        }
        CircuitCommand::Equilibria { file, r2, r, json } => {
            let (model, r, s) = dynamics(file.as_deref(), r2, r.as_deref())?;
            let set = equilibria(&model, &r, &s)?;
            if json {
                print_json(&set)
            } else {
                print!("{}", report::equilibria_text(&set));
                Ok(())
            }
        }
        CircuitCommand::Sweep2d { file, r2, r, out, svg, json } => {
            let p = circuit_params(file.as_deref())?;
            let (r2_grid, r_grid) = (parse_grid(&r2, "--r2")?, parse_grid(&r, "--r")?);
            let diagram = sweep_2d_circuit(&p, &r2_grid, &r_grid)?;
            if let Some(path) = &out {
                emit(path, &output::grid_csv(&diagram)?)?;
            }
            if let Some(path) = &svg {
                emit(path, &output::grid_svg(&diagram, &r2_grid, &r_grid))?;
            }
            if json {
                print_json(&diagram)
            } else {
                if out.as_deref() != Some(Path::new("-")) {
                    print!("{}", report::grid_text(&diagram));
                }
                Ok(())
            }
        }
        CircuitCommand::Simulate { file, r2, xi0, schedule, t_end, dt, sample_every, out, svg, json } => {
            let (model, r, s) = dynamics(file.as_deref(), r2, None)?;
            let n = model.dims().0;
            let xi0 = match xi0 {
                Some(text) => parse_vector(&text, "--xi0")?,
                None => Vector::zeros(n),
            };
            if xi0.len() != n {
                return Err(CliError::Usage(format!("--xi0: expected {n} components")));
            }
            let schedule = match schedule {
                Some(text) => parse_schedule(&text, s.len())?,
                None => RSchedule::constant(&r),
            };
            if !(dt > 0.0 && t_end > 0.0 && sample_every > 0) {
                return Err(CliError::Usage("--dt, --t-end and --sample-every must be positive".into()));
            }
            let traj = simulate(&model, &xi0, &schedule, &s, dt, t_end, sample_every)?;
            if let Some(path) = &out {
                emit(path, &output::trajectory_csv(&traj)?)?;
            }
            if let Some(path) = &svg {
                emit(path, &output::trajectory_svg(&traj))?;
            }
            if json {
                print_json(&traj)
            } else {
                if out.as_deref() != Some(Path::new("-")) {
                    println!("samples: {}", traj.times.len());
                    println!("final xi = {}", report::vec_text(traj.final_state()));
                }
                Ok(())
            }
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("LCP_ATLAS_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| CliError::Usage(format!("LCP_ATLAS_THREADS: `{value}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
