//! Command-line driver: argument parsing, file I/O, audit dispatch and report output.
//!
//! Exit codes: 0 when every asserted check passes, 1 when a check fails (the report
//! is still written), 2 for invalid input or configuration.

pub mod config;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};
use serde::Serialize;
use shearlet_core::experiments::{self as ex, AuditReport, Direction, EmbedParams, FadingParams};
use shearlet_core::lattice::System;
use shearlet_core::spaces::{Family, NormContext, NormOptions, SStarParams, SpaceParams};
use shearlet_core::Frame;

use config::{Options, RunConfig, DEFAULT_GRID};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Output(String),
    Core(shearlet_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Output(m) => write!(f, "cannot write output: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<shearlet_core::Error> for CliError {
    fn from(e: shearlet_core::Error) -> CliError {
        CliError::Core(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "shearlet", version, about = "Shearlet frames, anisotropic function-space norms and numerical audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frame construction reports
    Frame {
        #[command(subcommand)]
        action: FrameCommand,
    },
    /// Analysis and synthesis operators
    Transform {
        #[command(subcommand)]
        action: TransformCommand,
    },
    /// Function-space norm of a grid file
    Norm(Options),
    /// Numerical audits of the frame and norm estimates
    Experiment {
        #[command(subcommand)]
        audit: ExperimentCommand,
    },
}

#[derive(Subcommand, Debug)]
enum FrameCommand {
    /// Partition-of-unity residual
    Check(Options),
    /// Support overlap counts of horizontal bands
    Overlap(Options),
}

#[derive(Subcommand, Debug)]
enum TransformCommand {
    /// Grid file to coefficient JSON
    Analyze(Options),
    /// Coefficient JSON to grid file
    Synthesize(Options),
    /// Reconstruction error on seeded random signals
    Roundtrip(Options),
}

#[derive(Subcommand, Debug)]
enum ExperimentCommand {
    /// Sharp lower bound of sheared dilation stretch
    Lemma71(Options),
    /// Almost-orthogonality constants
    Orth(Options),
    /// Shearlet-wavelet integral height and decay
    Decay(Options),
    /// Analysis/synthesis norm ratios under grid refinement
    Bounds(Options),
    /// Embedding ratios between dyadic and anisotropic spaces
    Embed(Options),
    /// Fading rates of normalized single atoms
    Fading(Options),
    /// Peetre maximal function constants
    Peetre(Options),
    /// s* sequence majorant
    Sstar(Options),
    /// Vector-valued maximal inequality constants
    Fs(Options),
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("shearlet: {e}");
            2
        }
    }
}

/// Caps the rayon pool at `SHEARLET_THREADS` when set.
fn init_threads() {
    if let Some(n) = std::env::var("SHEARLET_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn write_output(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Output(e.to_string())),
    }
}

fn emit(mut report: AuditReport, cfg: &RunConfig) -> Result<bool, CliError> {
    for (k, v) in &cfg.tolerance {
        report.retune(k, *v)?;
    }
    let bytes = report::render(&report, cfg.format)?;
    write_output(&bytes, cfg.options.output.as_deref())?;
    Ok(report.pass)
}

fn emit_record<T: Serialize>(value: &T, cfg: &RunConfig) -> Result<bool, CliError> {
    if cfg.format != report::Format::Json {
        return Err(CliError::Input(format!("'{}' only writes JSON", cfg.command)));
    }
    write_output(&report::to_json(value)?, cfg.options.output.as_deref())?;
    Ok(true)
}

fn require_input(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.options.input.as_deref().ok_or_else(|| CliError::Input(format!("'{}' needs --input", cfg.command)))
}

/// Largest scale whose raw band fits the grid.
fn resolvable_scale(cfg: &RunConfig) -> u32 {
    let mut j = 0;
    while 4usize.pow(j + 1) <= cfg.grid.n() && j < cfg.j_max {
        j += 1;
    }
    j
}

#[derive(Serialize)]
struct NormRecord {
    family: Family,
    system: System,
    alpha: f64,
    p: f64,
    q: f64,
    grid: usize,
    j_max: u32,
    value: f64,
}

fn dispatch(command: Command) -> Result<bool, CliError> {
    use System::{ConeProjected as Cone, SmoothParseval as Smooth};
    let resolve = |name: &str, o: Options, grid: usize, system: System| RunConfig::resolve(name, o, grid, system);
    match command {
        Command::Frame { action } => match action {
            FrameCommand::Check(o) => {
                let cfg = resolve("frame check", o, DEFAULT_GRID, Smooth)?;
                emit(ex::audit_frame_check(cfg.system, cfg.grid, Some(cfg.j_max))?, &cfg)
            }
            FrameCommand::Overlap(o) => {
                let cfg = resolve("frame overlap", o, DEFAULT_GRID, Cone)?;
                emit(ex::audit_overlap(cfg.grid, cfg.j_max)?, &cfg)
            }
        },
        Command::Transform { action } => match action {
            TransformCommand::Analyze(o) => {
                let cfg = resolve("transform analyze", o, DEFAULT_GRID, Smooth)?;
                let f = io::load_signal(require_input(&cfg)?)?;
                let j_max = cfg.options.jmax.unwrap_or(f.grid().j_max());
                let c = Frame::new(cfg.system, f.grid(), j_max)?.analyze(&f)?;
                emit_record(&io::coefficient_records(&c), &cfg)
            }
            TransformCommand::Synthesize(o) => {
                let cfg = resolve("transform synthesize", o, DEFAULT_GRID, Smooth)?;
                let path = require_input(&cfg)?;
                let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let records: Vec<io::CoefficientRecord> =
                    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let c = io::coefficient_map(&records, cfg.system, cfg.options.jmax)?;
                if c.j_max > cfg.grid.j_max() {
                    return Err(CliError::Input(format!("scale {} does not fit grid {}", c.j_max, cfg.grid.n())));
                }
                let f = Frame::new(c.system, cfg.grid, c.j_max)?.synthesize(&c)?;
                let out = cfg.options.output.as_deref().ok_or_else(|| CliError::Input("synthesize needs --output".into()))?;
                io::save_signal(&f, out)?;
                Ok(true)
            }
            TransformCommand::Roundtrip(o) => {
                let cfg = resolve("transform roundtrip", o, DEFAULT_GRID, Smooth)?;
                emit(ex::audit_roundtrip(cfg.system, cfg.grid, cfg.seed, cfg.count(10))?, &cfg)
            }
        },
        Command::Norm(o) => {
            let cfg = resolve("norm", o, DEFAULT_GRID, Smooth)?;
            let space = cfg.space((0.0, 2.0, 2.0), Family::AbShear)?;
            let f = io::load_signal(require_input(&cfg)?)?;
            let ctx = NormContext::new(space.family, cfg.system, f.grid())?;
            let value = ctx.norm(&f, &space, NormOptions::default())?;
            let rec = NormRecord {
                family: space.family,
                system: cfg.system,
                alpha: space.alpha,
                p: space.p,
                q: space.q,
                grid: f.n(),
                j_max: f.grid().j_max(),
                value,
            };
            emit_record(&rec, &cfg)
        }
        Command::Experiment { audit } => experiment(audit),
    }
}

fn experiment(audit: ExperimentCommand) -> Result<bool, CliError> {
    use System::{ConeProjected as Cone, SmoothParseval as Smooth};
    match audit {
        ExperimentCommand::Lemma71(o) => {
            let cfg = RunConfig::resolve("experiment lemma71", o, DEFAULT_GRID, Smooth)?;
            emit(ex::audit_lemma71(cfg.j_max)?, &cfg)
        }
        ExperimentCommand::Orth(o) => {
            let cfg = RunConfig::resolve("experiment orth", o, 256, Cone)?;
            let js: Vec<u32> = (1..=resolvable_scale(&cfg)).collect();
            emit(ex::audit_almost_orthogonality(cfg.grid, cfg.system, &js, &[3.0, 5.0], 64)?, &cfg)
        }
        ExperimentCommand::Decay(o) => {
            let cfg = RunConfig::resolve("experiment decay", o, 256, Cone)?;
            let mut top = 1;
            while 2 * 4usize.pow(top + 1) <= cfg.grid.n() / 2 && top < cfg.j_max {
                top += 1;
            }
            let js: Vec<u32> = (1..=top).collect();
            emit(ex::audit_shearlet_wavelet_decay(cfg.grid, cfg.system, &js, 3.0)?, &cfg)
        }
        ExperimentCommand::Bounds(o) => {
            let cfg = RunConfig::resolve("experiment bounds", o, 64, Smooth)?;
            let o = &cfg.options;
            let params = if o.alpha.is_some() || o.p.is_some() || o.q.is_some() {
                vec![cfg.space((0.3, 2.0, 2.0), Family::AbShear)?]
            } else {
                vec![
                    SpaceParams::new(0.3, 2.0, 2.0, Family::AbShear)?,
                    SpaceParams::new(0.1, 1.5, 4.0, Family::AbShear)?,
                ]
            };
            emit(ex::audit_operator_bounds(cfg.grid.n(), cfg.system, &params, cfg.seed, cfg.count(10))?, &cfg)
        }
        ExperimentCommand::Embed(o) => {
            let cfg = RunConfig::resolve("experiment embed", o, DEFAULT_GRID, Cone)?;
            let o = &cfg.options;
            let direction = o.direction.unwrap_or(Direction::AbToDyadic);
            let (a1, a2, lambda) = match direction {
                Direction::DyadicToAb => (3.5, 0.0, 2.5),
                Direction::AbToDyadic => (0.5, 0.5, 0.0),
            };
            let params = EmbedParams {
                direction,
                alpha1: o.alpha1.unwrap_or(a1),
                alpha2: o.alpha2.unwrap_or(a2),
                p: o.p.unwrap_or(2.0),
                q: o.q.unwrap_or(2.0),
                lambda: o.lambda.unwrap_or(lambda),
            };
            emit(ex::audit_embeddings(cfg.grid, cfg.system, params, cfg.seed, cfg.count(4))?, &cfg)
        }
        ExperimentCommand::Fading(o) => {
            let cfg = RunConfig::resolve("experiment fading", o, 256, Cone)?;
            let o = &cfg.options;
            let direction = o.direction.unwrap_or(Direction::AbToDyadic);
            let (a1, a2) = match direction {
                Direction::AbToDyadic => (0.0, 1.0),
                Direction::DyadicToAb => (2.0, 0.0),
            };
            let params = FadingParams {
                direction,
                alpha1: o.alpha1.unwrap_or(a1),
                alpha2: o.alpha2.unwrap_or(a2),
                p1: o.p1.unwrap_or(2.0),
                p2: o.p2.unwrap_or(2.0),
                q1: o.q1.unwrap_or(2.0),
                q2: o.q2.unwrap_or(2.0),
            };
            let top = resolvable_scale(&cfg);
            emit(ex::audit_fading(cfg.grid, cfg.system, params, (1, top))?, &cfg)
        }
        ExperimentCommand::Peetre(o) => {
            let cfg = RunConfig::resolve("experiment peetre", o, 32, Smooth)?;
            let lambdas = match cfg.options.lambda {
                Some(l) => vec![l],
                None => vec![1.0, 2.0],
            };
            emit(ex::audit_peetre(cfg.grid.n(), cfg.system, &lambdas, cfg.seed, cfg.count(3))?, &cfg)
        }
        ExperimentCommand::Sstar(o) => {
            let cfg = RunConfig::resolve("experiment sstar", o, 64, Smooth)?;
            let space = cfg.space((0.3, 2.0, 2.0), Family::AbShear)?;
            let star = SStarParams { r: 1.0, decay: cfg.options.lambda.unwrap_or(4.0) };
            let grids = [cfg.grid.n(), 2 * cfg.grid.n()];
            emit(ex::audit_s_star(&grids, cfg.system, space, star, 0.9, cfg.seed, cfg.count(20))?, &cfg)
        }
        ExperimentCommand::Fs(o) => {
            let cfg = RunConfig::resolve("experiment fs", o, 32, Smooth)?;
            let exps = match (cfg.options.p, cfg.options.q) {
                (Some(p), Some(q)) if p == q => vec![p],
                (None, None) => vec![1.5, 2.0, 4.0],
                _ => return Err(CliError::Input("fs takes either no exponents or --p equal to --q".into())),
            };
            emit(ex::audit_fefferman_stein(cfg.grid.n(), &exps, cfg.seed, cfg.count(3))?, &cfg)
        }
    }
}
