//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 insufficient
//! data. Every command prints one JSON summary line on stdout.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::calendar::{CalendarKind, Date, TimeIndex};
use crate::clearsky::{build_climatology, ClearskyClimatology};
use crate::dataset::DailyDataset;
use crate::datastore::{import_csv, read_dataset, read_model, read_region_table, write_dataset, write_model};
use crate::diagnostics::{
    annual_percent_bias, assign_regions, average_bias_fields, fanova, monthly_stats_for_years,
    region_summary, write_monthly_csv, write_region_summary_csv, BiasField,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::pipeline::{contiguous_bounds, correct, fit, QuantileMapModel};

pub use config::{parse_probs, parse_years, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "ghiqm", version, about = "Clearsky-bounded quantile mapping for gridded daily GHI")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average yearly clearsky datasets into a day-of-year climatology.
    Climatology {
        /// Clearsky dataset directories (whole calendar years each).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit per-(pixel, month) transfer functions.
    Fit(RunArgs),
    /// Correct model data with a fitted model.
    Apply(RunArgs),
    /// Monthly mean/SD bias table and mean annual percent-bias raster.
    Stats {
        #[arg(long)]
        obs: PathBuf,
        #[arg(long = "mod")]
        model_data: PathBuf,
        /// Years to evaluate, e.g. "2006-2010"; defaults to years covered by both.
        #[arg(long)]
        years: Option<String>,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// 2x2 FANOVA of four bias rasters (rows RCM, columns GCM).
    Fanova {
        b11: PathBuf,
        b12: PathBuf,
        b21: PathBuf,
        b22: PathBuf,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Per-region summary of a bias raster.
    Regions {
        #[arg(long)]
        field: PathBuf,
        /// Region table CSV (region_id,region_name,centroid_lat,centroid_lon).
        #[arg(long)]
        regions: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Import long-format CSV into a dataset directory.
    Import(ImportArgs),
}

/// Options shared by `fit` and `apply`; flags override the config file.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub obs: Option<PathBuf>,
    #[arg(long = "mod")]
    pub model_data: Option<PathBuf>,
    #[arg(long)]
    pub climatology: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub train_years: Option<String>,
    #[arg(long)]
    pub test_years: Option<String>,
    /// "start:stop:step" or a comma list.
    #[arg(long)]
    pub probs: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub min_sample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Take the grid from an existing dataset directory.
    #[arg(long)]
    pub like: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub lat_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lat_step: Option<f64>,
    #[arg(long)]
    pub n_lat: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lon_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lon_step: Option<f64>,
    #[arg(long)]
    pub n_lon: Option<usize>,
    /// gregorian, noleap_365 or fixed_360.
    #[arg(long)]
    pub calendar: String,
    /// First day, YYYY-MM-DD.
    #[arg(long)]
    pub start: String,
    #[arg(long)]
    pub n_days: usize,
    #[arg(long, default_value = "ghi")]
    pub variable: String,
    #[arg(long, default_value = crate::dataset::GHI_UNITS)]
    pub units: String,
}

/// Runs the CLI on the process arguments and returns the exit code.
pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

/// Runs the CLI on explicit arguments (first item is the program name).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Executes a parsed command, returning its JSON summary.
pub fn execute(cli: Cli) -> Result<serde_json::Value> {
    match cli.threads {
        Some(0) => Err(Error::invalid("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(cmd: Command) -> Result<serde_json::Value> {
    match cmd {
        Command::Climatology { inputs, out } => cmd_climatology(&inputs, &out),
        Command::Fit(args) => cmd_fit(&RunConfig::resolve(&args)?),
        Command::Apply(args) => cmd_apply(&RunConfig::resolve(&args)?),
        Command::Stats {
            obs,
            model_data,
            years,
            out_prefix,
        } => cmd_stats(&obs, &model_data, years.as_deref(), &out_prefix),
        Command::Fanova {
            b11,
            b12,
            b21,
            b22,
            out_prefix,
        } => cmd_fanova([&b11, &b12, &b21, &b22], &out_prefix),
        Command::Regions { field, regions, out } => cmd_regions(&field, &regions, &out),
        Command::Import(args) => cmd_import(&args),
    }
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::invalid(format!("missing required path '{what}' (flag or config)")))
}

fn require_existing<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    let p = require(p, what)?;
    if !p.exists() {
        return Err(Error::invalid(format!("{what} path {} does not exist", p.display())));
    }
    Ok(p)
}

fn read_climatology(path: &Path) -> Result<ClearskyClimatology> {
    ClearskyClimatology::from_dataset(&read_dataset(path)?)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn min_median(v: &[usize]) -> (usize, f64) {
    let mut s = v.to_vec();
    s.sort_unstable();
    let n = s.len();
    let median = if n % 2 == 1 {
        s[n / 2] as f64
    } else {
        (s[n / 2 - 1] + s[n / 2]) as f64 / 2.0
    };
    (s[0], median)
}

fn model_summary(model: &QuantileMapModel) -> serde_json::Value {
    let (obs_min, obs_med) = min_median(model.obs_sample_sizes());
    let (mod_min, mod_med) = min_median(model.mod_sample_sizes());
    json!({
        "pixels": model.grid().n_pixels(),
        "months": 12,
        "knots": model.config().probs.len(),
        "obs_sample_min": obs_min,
        "obs_sample_median": obs_med,
        "mod_sample_min": mod_min,
        "mod_sample_median": mod_med,
    })
}

fn cmd_climatology(inputs: &[PathBuf], out: &Path) -> Result<serde_json::Value> {
    let datasets = inputs.iter().map(read_dataset).collect::<Result<Vec<_>>>()?;
    let clim = build_climatology(&datasets)?;
    write_dataset(&clim.to_dataset(), out)?;
    let counts = clim.pixel_counts();
    Ok(json!({
        "command": "climatology",
        "inputs": inputs.len(),
        "pixels": clim.grid().n_pixels(),
        "values_per_pixel_min": counts.iter().min(),
        "values_per_pixel_max": counts.iter().max(),
        "out": out.display().to_string(),
    }))
}

fn cmd_fit(cfg: &RunConfig) -> Result<serde_json::Value> {
    let obs_path = require_existing(&cfg.obs, "obs")?;
    let mod_path = require_existing(&cfg.model_data, "mod")?;
    let clim_path = require_existing(&cfg.climatology, "climatology")?;
    let model_path = require(&cfg.model, "model")?;
    let fit_cfg = cfg.fit_config()?;

    let obs = read_dataset(obs_path)?;
    let model_data = read_dataset(mod_path)?;
    let clim = read_climatology(clim_path)?;
    let mut model = fit(&obs, &model_data, &clim, &fit_cfg)?;
    model.set_climatology(clim_path.display().to_string());
    write_model(&model, model_path)?;

    let mut summary = model_summary(&model);
    summary["command"] = json!("fit");
    summary["train_years"] = json!(fit_cfg.train_years);
    summary["model"] = json!(model_path.display().to_string());
    Ok(summary)
}

fn cmd_apply(cfg: &RunConfig) -> Result<serde_json::Value> {
    let model_path = require_existing(&cfg.model, "model")?;
    let mod_path = require_existing(&cfg.model_data, "mod")?;
    let clim_path = require_existing(&cfg.climatology, "climatology")?;
    let out = require(&cfg.output, "output")?;

    let model = read_model(model_path)?;
    let mut input = read_dataset(mod_path)?;
    if let Some(years) = &cfg.test_years {
        let (first, last) = contiguous_bounds(years)?;
        input = input.slice_years(first, last)?;
    }
    let clim = read_climatology(clim_path)?;
    let corrected = correct(&model, &input, &clim)?;
    write_dataset(&corrected, out)?;

    let missing = corrected
        .values()
        .iter()
        .filter(|&&v| corrected.is_missing(v))
        .count();
    let mut summary = model_summary(&model);
    summary["command"] = json!("apply");
    summary["days"] = json!(corrected.n_days());
    summary["start"] = json!(corrected.time().start().to_string());
    summary["missing_cells"] = json!(missing);
    summary["out"] = json!(out.display().to_string());
    Ok(summary)
}

fn cmd_stats(obs_path: &Path, mod_path: &Path, years: Option<&str>, prefix: &Path) -> Result<serde_json::Value> {
    let obs = read_dataset(obs_path)?;
    let model_data = read_dataset(mod_path)?;
    let years = match years {
        Some(s) => parse_years(s)?,
        None => {
            let y: Vec<i32> = obs
                .time()
                .years()
                .into_iter()
                .filter(|&y| model_data.time().covers_year(y))
                .collect();
            if y.is_empty() {
                return Err(Error::invalid("observed and model datasets share no years"));
            }
            y
        }
    };
    let monthly = monthly_stats_for_years(&obs, &model_data, &years)?;
    let csv_path = with_suffix(prefix, "_monthly.csv");
    write_monthly_csv(&monthly, &csv_path)?;

    let per_year = years
        .iter()
        .map(|&y| annual_percent_bias(&obs, &model_data, &[y]))
        .collect::<Result<Vec<_>>>()?;
    let pbias = average_bias_fields(&per_year)?;
    let pbias_path = with_suffix(prefix, "_pbias");
    write_dataset(&pbias.to_dataset("percent_bias", "%"), &pbias_path)?;

    let present: Vec<f64> = pbias.values().iter().copied().filter(|v| !v.is_nan()).collect();
    let mean_pbias = if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    };
    let abs_bias: Vec<f64> = monthly.months.iter().flatten().map(|m| m.mean_bias.abs()).collect();
    Ok(json!({
        "command": "stats",
        "years": years,
        "months_with_data": abs_bias.len(),
        "max_abs_monthly_bias_wm2": abs_bias.iter().cloned().fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.max(v)))),
        "mean_percent_bias": mean_pbias,
        "monthly_csv": csv_path.display().to_string(),
        "percent_bias_raster": pbias_path.display().to_string(),
    }))
}

fn cmd_fanova(paths: [&PathBuf; 4], prefix: &Path) -> Result<serde_json::Value> {
    let datasets = paths.iter().map(read_dataset).collect::<Result<Vec<_>>>()?;
    let fields = datasets
        .iter()
        .map(BiasField::from_dataset)
        .collect::<Result<Vec<_>>>()?;
    let comps = fanova(&fields[0], &fields[1], &fields[2], &fields[3])?;
    let mut outputs = Vec::new();
    for (name, ds) in comps.to_datasets(fields[0].years(), datasets[0].units()) {
        let out = with_suffix(prefix, &format!("_{name}"));
        write_dataset(&ds, &out)?;
        outputs.push(out.display().to_string());
    }
    let present = comps.mu.iter().filter(|v| !v.is_nan()).count();
    Ok(json!({
        "command": "fanova",
        "pixels": comps.grid().n_pixels(),
        "pixels_present": present,
        "outputs": outputs,
    }))
}

fn cmd_regions(field_path: &Path, table_path: &Path, out: &Path) -> Result<serde_json::Value> {
    let field = BiasField::from_dataset(&read_dataset(field_path)?)?;
    let table = read_region_table(table_path)?;
    let assignment = assign_regions(field.grid(), &table);
    let rows = region_summary(&field, &assignment)?;
    write_region_summary_csv(&rows, out)?;
    Ok(json!({
        "command": "regions",
        "regions": rows.len(),
        "pixels": field.grid().n_pixels(),
        "out": out.display().to_string(),
    }))
}

fn import_grid(a: &ImportArgs) -> Result<Grid> {
    if let Some(like) = &a.like {
        return Ok(read_dataset(like)?.grid().clone());
    }
    match (a.lat_start, a.lat_step, a.n_lat, a.lon_start, a.lon_step, a.n_lon) {
        (Some(la0), Some(dla), Some(nla), Some(lo0), Some(dlo), Some(nlo)) => {
            Grid::regular(la0, dla, nla, lo0, dlo, nlo)
        }
        _ => Err(Error::invalid(
            "grid needs --like or all of --lat-start --lat-step --n-lat --lon-start --lon-step --n-lon",
        )),
    }
}

fn cmd_import(a: &ImportArgs) -> Result<serde_json::Value> {
    let calendar: CalendarKind = a.calendar.parse()?;
    let start: Date = a.start.parse()?;
    let grid = import_grid(a)?;
    let time = TimeIndex::new(calendar, start, a.n_days)?;
    let ds: DailyDataset = import_csv(&a.csv, &grid, &time, &a.variable, &a.units)?;
    write_dataset(&ds, &a.out)?;
    let missing = ds.values().iter().filter(|v| v.is_nan()).count();
    Ok(json!({
        "command": "import",
        "pixels": grid.n_pixels(),
        "days": a.n_days,
        "missing_cells": missing,
        "out": a.out.display().to_string(),
    }))
}
