//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 on a model-level failure (the
//! report is still written), 2 on input or parse errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{intrinsic_distance, DistanceOptions, DistanceResult};
use crate::harness::{assemble_cusp_report, convergence_experiment, CuspOptions, SequenceSpec, DEFAULT_SEED};
use crate::horoconvex::{is_horoconvex, FunctionSource, HoroconvexityOptions, PeriodicFunction};
use crate::planar::Vec2;
use crate::polyhedral::{cone_metric, comparison_replace, is_cbb, CbbReport, ConeMetric, TorusTriangulation};
use crate::quotient::{distance_matrix, quotient_distance, uniform_sample};
use crate::report::to_json_string;

#[derive(Debug, Parser)]
#[command(name = "horocusp", version, about = "Horoconvex cusp boundaries: checks, distances, torus metrics")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub numeric: NumericOptions,
}

#[derive(Debug, Clone, Args)]
pub struct NumericOptions {
    /// RNG seed for sampled pairs.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "HOROCUSP_JOBS")]
    pub jobs: Option<usize>,
    /// Search grid step (default: cell diameter / 128).
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub quad_tol: f64,
    /// Local refinement sweeps on the finest level.
    #[arg(long, global = true, default_value_t = 20)]
    pub refine_iters: usize,
    /// Sample grid size (k x k points).
    #[arg(long, global = true, default_value_t = 8)]
    pub k: usize,
    /// Length of the approximating sequence.
    #[arg(long, global = true, default_value_t = 16)]
    pub n_max: usize,
    /// Horoconvexity tolerance override.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Horoconvexity check of a function file.
    Check(Io),
    /// Intrinsic distance between two points.
    Dist {
        #[command(flatten)]
        io: Io,
        /// Start point `x1,x2`.
        #[arg(long, value_parser = parse_point)]
        from: Vec2,
        /// End point `x1,x2`.
        #[arg(long, value_parser = parse_point)]
        to: Vec2,
        /// Minimize over lattice translates of the end point.
        #[arg(long)]
        quotient: bool,
        /// Write the witness curve as CSV.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Torus distance matrix on a k x k sample.
    Matrix {
        #[command(flatten)]
        io: Io,
        /// Also write the matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Cone metric of a triangulation file, or of the comparison
    /// triangulation of a function file (`--from-function`).
    Polyhedral {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        from_function: bool,
        /// Require strictly positive curvature.
        #[arg(long)]
        strict: bool,
    },
    /// Convergence experiment from a `{"function": .., "sequence": ..}` file.
    Converge {
        #[command(flatten)]
        io: Io,
        /// Write the series as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// End-to-end cusp report.
    Report {
        #[command(flatten)]
        io: Io,
        /// Include the cone-vs-torus refinement series.
        #[arg(long)]
        refinement: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Io {
    /// Input JSON file.
    pub input: PathBuf,
    /// Output JSON file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_point(s: &str) -> std::result::Result<Vec2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected x1,x2, got '{s}'"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(Vec2::new(x, y))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    ModelFailure = 1,
    InputError = 2,
}

impl NumericOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("--quad-tol", Some(self.quad_tol)),
            ("--grid-step", self.grid_step),
            ("--tolerance", self.tolerance),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Input(format!("{name} must be positive, got {v}")));
                }
            }
        }
        for (name, v) in [("--k", self.k), ("--n-max", self.n_max), ("--jobs", self.jobs.unwrap_or(1))] {
            if v == 0 {
                return Err(Error::Input(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn distance(&self) -> DistanceOptions {
        DistanceOptions { grid_step: self.grid_step, refine_iters: self.refine_iters, quad_tol: self.quad_tol }
    }

    pub fn horoconvexity(&self) -> HoroconvexityOptions {
        HoroconvexityOptions { tolerance: self.tolerance, ..Default::default() }
    }
}

/// Parses arguments, runs, prints errors to stderr, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::InputError as i32 } else { 0 };
        }
    };
    match run(&config) {
        Ok(s) => s as i32,
        Err(e) => {
            eprintln!("horocusp: {e}");
            if e.is_input_error() { Status::InputError as i32 } else { Status::ModelFailure as i32 }
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Status> {
    config.numeric.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = config.numeric.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&config.command, &config.numeric))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Prefixes an error with the file it came from; JSON errors keep their
/// line and column.
fn at(path: &Path, e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
        Error::Json(e) => Error::Input(format!("{}: {e}", path.display())),
        other => other,
    }
}

fn load_function(path: &Path) -> Result<PeriodicFunction> {
    let text = read(path)?;
    FunctionSource::from_json_str(&text).and_then(|s| s.build()).map_err(|e| at(path, e))
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = to_json_string(value)?;
    match output {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn status(pass: bool) -> Status {
    if pass { Status::Pass } else { Status::ModelFailure }
}

#[derive(Serialize)]
struct DistOutput<'a> {
    from: Vec2,
    to: Vec2,
    quotient: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    translate: Option<[i64; 2]>,
    result: &'a DistanceResult,
}

#[derive(Serialize)]
struct PolyhedralOutput<'a> {
    cone: &'a ConeMetric,
    cbb: &'a CbbReport,
    gauss_bonnet: bool,
}

/// Input of `converge`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergeInput {
    function: serde_json::Value,
    #[serde(default)]
    sequence: SequenceSpec,
}

fn dispatch(command: &Command, num: &NumericOptions) -> Result<Status> {
    let dopts = num.distance();
    match command {
        Command::Check(io) => {
            let u = load_function(&io.input)?;
            let r = is_horoconvex(&u, &num.horoconvexity());
            emit(&r, io.output.as_deref())?;
            Ok(status(r.passed))
        }
        Command::Dist { io, from, to, quotient, witness } => {
            let u = load_function(&io.input)?;
            let (result, translate) = if *quotient {
                let q = quotient_distance(&u, *from, *to, &dopts)?;
                (q.distance, Some(q.translate.coeffs))
            } else {
                (intrinsic_distance(&u, *from, *to, &dopts)?, None)
            };
            if let Some(path) = witness {
                result.witness.write_csv(&u, dopts.quad_tol, fs::File::create(path)?)?;
            }
            emit(&DistOutput { from: *from, to: *to, quotient: *quotient, translate, result: &result }, io.output.as_deref())?;
            Ok(Status::Pass)
        }
        Command::Matrix { io, csv } => {
            let u = load_function(&io.input)?;
            let m = distance_matrix(&u, &uniform_sample(u.lattice(), num.k), &dopts)?;
            emit(&m, io.output.as_deref())?;
            if let Some(path) = csv {
                m.write_csv(fs::File::create(path)?)?;
            }
            Ok(status(m.meta.validation.passed()))
        }
        Command::Polyhedral { io, from_function, strict } => {
            let t = if *from_function {
                let u = load_function(&io.input)?;
                comparison_replace(&u, num.k, &dopts)?
            } else {
                let text = read(&io.input)?;
                serde_json::from_str::<TorusTriangulation>(&text).map_err(|e| at(&io.input, e.into()))?
            };
            let cone = cone_metric(&t)?;
            let cbb = is_cbb(&cone, *strict);
            let gb = cone.satisfies_gauss_bonnet();
            emit(&PolyhedralOutput { cone: &cone, cbb: &cbb, gauss_bonnet: gb }, io.output.as_deref())?;
            Ok(status(cbb.is_cbb && gb))
        }
        Command::Converge { io, csv } => {
            let text = read(&io.input)?;
            let input: ConvergeInput = serde_json::from_str(&text).map_err(|e| at(&io.input, e.into()))?;
            let u = FunctionSource::from_json_str(&input.function.to_string())
                .and_then(|s| s.build())
                .map_err(|e| at(&io.input, e))?;
            let out = convergence_experiment(&u, &input.sequence, num.k, num.n_max, &dopts)?;
            emit(&out.report, io.output.as_deref())?;
            if let Some(path) = csv {
                out.report.write_series_csv(fs::File::create(path)?)?;
            }
            Ok(status(out.report.passed()))
        }
        Command::Report { io, refinement } => {
            let u = load_function(&io.input)?;
            let opts = CuspOptions {
                k: num.k,
                distance: dopts,
                horoconvexity: num.horoconvexity(),
                seed: num.seed,
                refinement: *refinement,
                ..Default::default()
            };
            let a = assemble_cusp_report(&u, &opts)?;
            emit(&a, io.output.as_deref())?;
            Ok(status(a.report.passed()))
        }
    }
}
