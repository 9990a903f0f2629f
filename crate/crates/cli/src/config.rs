//! Flags, JSON config overrides and the resolved run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use shearlet_core::experiments::Direction;
use shearlet_core::lattice::System;
use shearlet_core::spaces::{Family, SpaceParams};
use shearlet_core::FrequencyGrid;

use crate::report::Format;
use crate::CliError;

fn parse_system(s: &str) -> Result<System, String> {
    s.parse().map_err(|e: shearlet_core::Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: shearlet_core::Error| e.to_string())
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: shearlet_core::Error| e.to_string())
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let v: f64 = v.parse().map_err(|_| format!("tolerance '{k}' is not a number"))?;
    Ok((k.to_string(), v))
}

/// Options shared by every subcommand; a JSON config file may override any of them.
#[derive(Args, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Grid size N (power of two)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Finest scale
    #[arg(long)]
    pub jmax: Option<u32>,
    /// Frame system: smooth or cone
    #[arg(long, value_parser = parse_system)]
    pub system: Option<System>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random signals or sequences
    #[arg(long)]
    pub count: Option<usize>,
    /// Norm family: ab or dyadic
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Embedding or fading direction: ab-to-dyadic or dyadic-to-ab
    #[arg(long, value_parser = parse_direction)]
    pub direction: Option<Direction>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub q1: Option<f64>,
    #[arg(long)]
    pub q2: Option<f64>,
    /// Peetre exponent
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Input file (grid file or coefficient JSON)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (stdout when absent, except for grid files)
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON config file whose entries override flags
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Tolerance override KEY=VALUE (repeatable)
    #[arg(long = "tol", value_parser = parse_tolerance)]
    #[serde(skip)]
    pub tol: Vec<(String, f64)>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub grid: FrequencyGrid,
    pub j_max: u32,
    pub system: System,
    pub seed: u64,
    pub format: Format,
    pub tolerance: BTreeMap<String, f64>,
    pub options: Options,
}

pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_SEED: u64 = 42;

impl RunConfig {
    /// Merges the optional config file over the flags and validates.
    ///
    /// `default_grid` lets audits with quartic cost choose a smaller grid.
    pub fn resolve(command: &str, flags: Options, default_grid: usize, default_system: System) -> Result<RunConfig, CliError> {
        let mut opts = flags.clone();
        let mut tolerance: BTreeMap<String, f64> = flags.tol.iter().cloned().collect();
        if let Some(path) = &flags.config {
            let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let (file, tol) = parse_config(&text)?;
            overlay!(
                opts, file, grid, jmax, system, seed, count, family, alpha, p, q, direction, alpha1, alpha2, p1, p2, q1,
                q2, lambda, input, output, format
            );
            tolerance.extend(tol);
        }
        let grid = FrequencyGrid::new(opts.grid.unwrap_or(default_grid))?;
        let j_max = opts.jmax.unwrap_or(grid.j_max());
        if j_max > grid.j_max() {
            return Err(CliError::Input(format!("j_max {j_max} exceeds the grid's finest scale {}", grid.j_max())));
        }
        for (k, v) in &tolerance {
            if !v.is_finite() || *v < 0.0 {
                return Err(CliError::Input(format!("tolerance '{k}' must be finite and nonnegative")));
            }
        }
        if opts.count == Some(0) {
            return Err(CliError::Input("count must be positive".into()));
        }
        Ok(RunConfig {
            command: command.into(),
            grid,
            j_max,
            system: opts.system.unwrap_or(default_system),
            seed: opts.seed.unwrap_or(DEFAULT_SEED),
            format: opts.format.unwrap_or(Format::Json),
            tolerance,
            options: opts,
        })
    }

    /// Smoothness parameters from `--alpha --p --q --family`, validated.
    pub fn space(&self, default: (f64, f64, f64), family: Family) -> Result<SpaceParams, CliError> {
        let o = &self.options;
        Ok(SpaceParams::new(
            o.alpha.unwrap_or(default.0),
            o.p.unwrap_or(default.1),
            o.q.unwrap_or(default.2),
            o.family.unwrap_or(family),
        )?)
    }

    pub fn count(&self, default: usize) -> usize {
        self.options.count.unwrap_or(default)
    }
}

/// Splits a config document into option overrides and tolerance overrides.
pub fn parse_config(text: &str) -> Result<(Options, BTreeMap<String, f64>), CliError> {
    let mut doc: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))?;
    let tol = match doc.remove("tolerance") {
        Some(v) => serde_json::from_value(v).map_err(|e| CliError::Input(format!("config tolerance: {e}")))?,
        None => BTreeMap::new(),
    };
    let opts: Options =
        serde_json::from_value(serde_json::Value::Object(doc)).map_err(|e| CliError::Input(format!("config: {e}")))?;
    Ok((opts, tol))
}
