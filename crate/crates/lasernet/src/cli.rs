//! `lasernet-sweep` argument parsing and driver.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, ValueEnum};

use lasernet_core::link::RateModel;
use lasernet_core::sweep::{run_sweep_detailed, LensMode, Placement, SweepSpec};
use lasernet_core::Error;

use crate::config::{load_scene, ConfigError};
use crate::output::{dump_channel, dump_precoder, emit_outputs, OutputError, RunInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LensArg {
    On,
    Off,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementArg {
    OnAxis,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateModelArg {
    Shannon,
    Ook,
}

/// Sweep the emitter beam waist with and without the micro lens and write
/// sum-rate and energy-efficiency tables.
#[derive(Debug, Parser)]
#[command(name = "lasernet-sweep", version)]
pub struct Args {
    /// Scene configuration (TOML). Must set `safety.mpe`.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// First beam waist in m.
    #[arg(long, value_name = "M", default_value_t = 1e-6)]
    pub waist_start: f64,
    /// Last beam waist in m.
    #[arg(long, value_name = "M", default_value_t = 8e-6)]
    pub waist_end: f64,
    #[arg(long, value_name = "N", default_value_t = 8)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = LensArg::Both)]
    pub lens: LensArg,
    /// User-placement seeds, e.g. `0,1,2` or `0..8`.
    #[arg(long, value_name = "LIST", value_parser = parse_seeds, default_value = "0")]
    pub seeds: SeedList,
    /// Users per point. Defaults to the number of users in the config.
    #[arg(long, value_name = "N")]
    pub users: Option<usize>,
    /// Defaults to `simulation.placement` from the config.
    #[arg(long, value_enum)]
    pub placement: Option<PlacementArg>,
    #[arg(long, value_enum, default_value_t = RateModelArg::Shannon)]
    pub rate_model: RateModelArg,
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Also write the channel matrix of every point.
    #[arg(long)]
    pub dump_channel: bool,
    /// Also write the precoder of every point.
    #[arg(long)]
    pub dump_precoder: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|e| format!("`{part}`: {e}"))?;
            let b: u64 = b.trim().parse().map_err(|e| format!("`{part}`: {e}"))?;
            if a >= b {
                return Err(format!("`{part}`: empty range"));
            }
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().map_err(|e| format!("`{part}`: {e}"))?);
        }
    }
    if seeds.is_empty() {
        return Err("at least one seed is required".into());
    }
    Ok(SeedList(seeds))
}

/// Bad flag values that clap cannot see.
#[derive(Debug, thiserror::Error)]
#[error("invalid arguments: {0}")]
pub struct UsageError(pub Error);

pub mod exit {
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const VALIDATION: u8 = 4;
    pub const NUMERICAL: u8 = 5;
    pub const IO: u8 = 6;
}

/// Process exit code for a failed run, by error category.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return exit::USAGE;
        }
        if let Some(c) = cause.downcast_ref::<ConfigError>() {
            return match c {
                ConfigError::Parse { .. } => exit::PARSE,
                ConfigError::Invalid(e) => core_code(e),
                ConfigError::Serialize(_) => exit::IO,
            };
        }
        if cause.is::<OutputError>() || cause.is::<std::io::Error>() {
            return exit::IO;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
    }
    1
}

fn core_code(e: &Error) -> u8 {
    match e.root() {
        Error::Invalid { .. } | Error::Infeasible { .. } => exit::VALIDATION,
        _ => exit::NUMERICAL,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

pub fn sweep_spec(args: &Args, default_users: usize, default_placement: Placement) -> SweepSpec {
    SweepSpec {
        waist_start: args.waist_start,
        waist_end: args.waist_end,
        steps: args.steps,
        lens_modes: match args.lens {
            LensArg::On => vec![LensMode::On],
            LensArg::Off => vec![LensMode::Off],
            LensArg::Both => vec![LensMode::On, LensMode::Off],
        },
        seeds: args.seeds.0.clone(),
        users: args.users.unwrap_or(default_users),
        placement: match args.placement {
            Some(PlacementArg::OnAxis) => Placement::OnAxis,
            Some(PlacementArg::Random) => Placement::Random,
            None => default_placement,
        },
        rate_model: match args.rate_model {
            RateModelArg::Shannon => RateModel::Shannon,
            RateModelArg::Ook => RateModel::Ook,
        },
    }
}

pub fn run(args: &Args) -> anyhow::Result<Summary> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let loaded = load_scene(&text).with_context(|| format!("loading {}", args.config.display()))?;
    let spec = sweep_spec(args, loaded.scene.users.len(), loaded.placement);
    spec.validate().map_err(UsageError)?;

    let outcome = run_sweep_detailed(&loaded.scene, &spec)?;
    let info = RunInfo {
        placement: spec.placement,
        rate_model: spec.rate_model,
        users: spec.users,
    };
    let mut files = emit_outputs(&outcome.rows, &info, &args.out)?;
    if args.dump_channel || args.dump_precoder {
        let per_waist = spec.lens_modes.len() * spec.seeds.len();
        let dumps: &Path = &args.out.join("dumps");
        for (i, p) in outcome.points.iter().enumerate() {
            if args.dump_channel {
                files.push(dump_channel(p, i / per_waist, dumps)?);
            }
            if args.dump_precoder {
                files.push(dump_precoder(p, i / per_waist, dumps)?);
            }
        }
    }
    Ok(Summary {
        rows: outcome.rows.len(),
        files,
        warnings: loaded.warnings.iter().map(ToString::to_string).collect(),
    })
}
