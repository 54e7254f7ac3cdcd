//! Per-(pixel, month) fitting with 3x3 tile pooling, and application of the
//! full correction chain to model data.
//!
//! Fits for different pixels are independent and run on the ambient rayon
//! pool. Every cell's arithmetic is fixed by its own inputs, so results do
//! not depend on the number of worker threads.

use rayon::prelude::*;

use crate::calendar::CalendarKind;
use crate::clearsky::{
    climatology_slot, from_logit_space, logit_unchecked, to_logit_space, ClearskyClimatology,
    ClearskyIndexParams,
};
use crate::dataset::{DailyDataset, GHI_UNITS};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::qmap::{sort_finite, ProbabilitySet, TransferFunction};

/// Default lower bound on pooled sample size per (pixel, month).
pub const DEFAULT_MIN_SAMPLE: usize = 90;

pub const MONTHS: usize = 12;

/// Fitting parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub probs: ProbabilitySet<f64>,
    pub epsilon: f64,
    pub train_years: Vec<i32>,
    pub min_sample: usize,
}

impl FitConfig {
    /// Percentile knots, `epsilon = 1e-6`, minimum sample 90.
    pub fn new(train_years: Vec<i32>) -> Self {
        FitConfig {
            probs: ProbabilitySet::percentiles(),
            epsilon: 1e-6,
            train_years,
            min_sample: DEFAULT_MIN_SAMPLE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_years.is_empty() {
            return Err(Error::invalid("no training years given"));
        }
        ClearskyIndexParams::new(self.epsilon)?;
        let floor = self.probs.len().div_ceil(2);
        if self.min_sample < floor {
            return Err(Error::invalid(format!(
                "minimum sample size {} is below {floor} (half the {} knots)",
                self.min_sample,
                self.probs.len()
            )));
        }
        Ok(())
    }

    pub fn params(&self) -> ClearskyIndexParams<f64> {
        ClearskyIndexParams::new(self.epsilon).expect("validated epsilon")
    }
}

/// Fitted transfer functions for every (pixel, month).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileMapModel {
    grid: Grid,
    config: FitConfig,
    climatology: String,
    // [pixel * 12 + month - 1]
    transfers: Vec<TransferFunction<f64>>,
    obs_sample_sizes: Vec<usize>,
    mod_sample_sizes: Vec<usize>,
}

impl QuantileMapModel {
    pub fn new(
        grid: Grid,
        config: FitConfig,
        climatology: String,
        transfers: Vec<TransferFunction<f64>>,
        obs_sample_sizes: Vec<usize>,
        mod_sample_sizes: Vec<usize>,
    ) -> Result<Self> {
        let n = grid.n_pixels() * MONTHS;
        if transfers.len() != n || obs_sample_sizes.len() != n || mod_sample_sizes.len() != n {
            return Err(Error::invalid(format!(
                "model needs {n} transfer functions and sample sizes ({} pixels x 12 months)",
                grid.n_pixels()
            )));
        }
        config.validate()?;
        Ok(QuantileMapModel {
            grid,
            config,
            climatology,
            transfers,
            obs_sample_sizes,
            mod_sample_sizes,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &FitConfig {
        &self.config
    }

    /// Free-form label of the climatology used for fitting (usually a path).
    pub fn climatology(&self) -> &str {
        &self.climatology
    }

    pub fn set_climatology(&mut self, label: impl Into<String>) {
        self.climatology = label.into();
    }

    pub fn transfer(&self, pixel: usize, month: u8) -> Option<&TransferFunction<f64>> {
        if !(1..=12).contains(&month) {
            return None;
        }
        self.transfers.get(pixel * MONTHS + month as usize - 1)
    }

    pub fn transfers(&self) -> &[TransferFunction<f64>] {
        &self.transfers
    }

    /// Pooled observed sample size per `[pixel * 12 + month - 1]`.
    pub fn obs_sample_sizes(&self) -> &[usize] {
        &self.obs_sample_sizes
    }

    /// Pooled model sample size per `[pixel * 12 + month - 1]`.
    pub fn mod_sample_sizes(&self) -> &[usize] {
        &self.mod_sample_sizes
    }
}

fn ensure_years_present(ds: &DailyDataset, years: &[i32], what: &str) -> Result<()> {
    match years.iter().find(|&&y| !ds.time().covers_year(y)) {
        None => Ok(()),
        Some(y) => Err(Error::invalid(format!(
            "{what} dataset ({}..{}) does not cover year {y}",
            ds.time().start(),
            ds.time().end()
        ))),
    }
}

fn cs_for(clim: &ClearskyClimatology, cal: CalendarKind, pixel: usize, month: u8, day: u8) -> f64 {
    clim.value(pixel, climatology_slot(cal, month, day))
}

/// Logit clearsky indices pooled over the 3x3 tile of `pixel`, every day
/// labelled `month` in `years`, skipping missing cells.
pub fn pooled_sample(
    ds: &DailyDataset,
    clim: &ClearskyClimatology,
    pixel: usize,
    month: u8,
    years: &[i32],
    params: &ClearskyIndexParams<f64>,
    min_sample: usize,
) -> Result<Vec<f64>> {
    ds.grid().ensure_matches(clim.grid(), "dataset vs climatology")?;
    let tile = ds.grid().tile_neighbors(pixel)?;
    if !(1..=12).contains(&month) {
        return Err(Error::invalid(format!("month {month} outside 1..=12")));
    }
    ensure_years_present(ds, years, "input")?;
    let cal = ds.time().calendar();
    let mut out = Vec::new();
    for d in ds.time().month_mask_in_years(month, years) {
        let l = ds.time().label(d);
        for &q in &tile {
            if let Some(ghi) = ds.value(d, q) {
                let cs = cs_for(clim, cal, q, l.month, l.day);
                out.push(to_logit_space(ghi, cs, params)?);
            }
        }
    }
    if out.len() < min_sample {
        return Err(Error::InsufficientData {
            pixel,
            month,
            source_name: "pooled",
            size: out.len(),
            required: min_sample,
        });
    }
    Ok(out)
}

/// Training-period logit clearsky indices of one dataset, laid out
/// `[selected day][pixel]` with `NaN` for missing cells.
struct TrainingField {
    n_pixels: usize,
    values: Vec<f64>,
    // Positions into the selected days, per month.
    month_days: [Vec<usize>; MONTHS],
}

impl TrainingField {
    fn build(
        ds: &DailyDataset,
        clim: &ClearskyClimatology,
        years: &[i32],
        params: &ClearskyIndexParams<f64>,
    ) -> Self {
        let days = ds.time().days_in_years(years);
        let cal = ds.time().calendar();
        let n = ds.n_pixels();
        let mut month_days: [Vec<usize>; MONTHS] = Default::default();
        for (k, &d) in days.iter().enumerate() {
            month_days[ds.time().label(d).month as usize - 1].push(k);
        }
        let mut values = vec![f64::NAN; days.len() * n];
        values
            .par_chunks_mut(n)
            .zip(days.par_iter())
            .for_each(|(row, &d)| {
                let l = ds.time().label(d);
                let slot = climatology_slot(cal, l.month, l.day);
                for (p, out) in row.iter_mut().enumerate() {
                    if let Some(ghi) = ds.value(d, p) {
                        let kc = params.clamp(ghi / clim.value(p, slot));
                        *out = logit_unchecked(kc);
                    }
                }
            });
        TrainingField {
            n_pixels: n,
            values,
            month_days,
        }
    }

    fn pool(&self, grid: &Grid, pixel: usize, month: u8, out: &mut Vec<f64>) {
        out.clear();
        let days = &self.month_days[month as usize - 1];
        grid.for_each_tile_pixel(pixel, |q| {
            out.extend(
                days.iter()
                    .map(|&k| self.values[k * self.n_pixels + q])
                    .filter(|v| !v.is_nan()),
            );
        });
    }
}

struct CellFit {
    transfer: TransferFunction<f64>,
    obs_size: usize,
    mod_size: usize,
}

/// Fits one transfer function per (pixel, month) on the training years.
///
/// The observed and model datasets may use different calendars; samples
/// are pooled by month label, never paired day by day. The first failing
/// cell in (pixel, month) order aborts the fit.
pub fn fit(
    obs: &DailyDataset,
    model_data: &DailyDataset,
    clim: &ClearskyClimatology,
    config: &FitConfig,
) -> Result<QuantileMapModel> {
    config.validate()?;
    let grid = obs.grid();
    grid.ensure_matches(model_data.grid(), "observed vs model")?;
    grid.ensure_matches(clim.grid(), "observed vs climatology")?;
    obs.check_ghi()?;
    model_data.check_ghi()?;
    ensure_years_present(obs, &config.train_years, "observed")?;
    ensure_years_present(model_data, &config.train_years, "model")?;

    let params = config.params();
    let obs_field = TrainingField::build(obs, clim, &config.train_years, &params);
    let mod_field = TrainingField::build(model_data, clim, &config.train_years, &params);
    let probs = &config.probs;

    let cells: Vec<Result<CellFit>> = (0..grid.n_pixels() * MONTHS)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(obs_buf, mod_buf), cell| {
                let pixel = cell / MONTHS;
                let month = (cell % MONTHS) as u8 + 1;
                mod_field.pool(grid, pixel, month, mod_buf);
                obs_field.pool(grid, pixel, month, obs_buf);
                for (buf, name) in [(&*mod_buf, "model"), (&*obs_buf, "observed")] {
                    if buf.len() < config.min_sample {
                        return Err(Error::InsufficientData {
                            pixel,
                            month,
                            source_name: name,
                            size: buf.len(),
                            required: config.min_sample,
                        });
                    }
                }
                sort_finite(mod_buf);
                sort_finite(obs_buf);
                Ok(CellFit {
                    transfer: TransferFunction::from_sorted_samples(mod_buf, obs_buf, probs),
                    obs_size: obs_buf.len(),
                    mod_size: mod_buf.len(),
                })
            },
        )
        .collect();

    let n = cells.len();
    let mut transfers = Vec::with_capacity(n);
    let mut obs_sizes = Vec::with_capacity(n);
    let mut mod_sizes = Vec::with_capacity(n);
    for c in cells {
        let c = c?;
        transfers.push(c.transfer);
        obs_sizes.push(c.obs_size);
        mod_sizes.push(c.mod_size);
    }
    QuantileMapModel::new(
        grid.clone(),
        config.clone(),
        String::new(),
        transfers,
        obs_sizes,
        mod_sizes,
    )
}

/// Rounds a corrected value to `f32` while keeping `0 < v < cs`.
fn store_bounded(v: f64, cs: f64) -> f32 {
    let out = v as f32;
    let cs32 = cs as f32;
    if out as f64 >= cs && cs32 > 0.0 {
        // Largest f32 strictly below cs.
        let below = if (cs32 as f64) < cs {
            cs32
        } else {
            f32::from_bits(cs32.to_bits() - 1)
        };
        below.max(f32::from_bits(1))
    } else if out <= 0.0 {
        f32::from_bits(1)
    } else {
        out
    }
}

/// Applies a fitted model to model GHI.
///
/// Each present cell goes through `kc = clamp(ghi / cs)`, `t = logit(kc)`,
/// `t' = T(t)` and `ghi' = logistic(t') * cs`, with `T` chosen by pixel and
/// the day's month label. Missing cells stay missing.
pub fn correct(
    model: &QuantileMapModel,
    input: &DailyDataset,
    clim: &ClearskyClimatology,
) -> Result<DailyDataset> {
    model.grid().ensure_matches(input.grid(), "model vs input data")?;
    model.grid().ensure_matches(clim.grid(), "model vs climatology")?;
    input.check_ghi()?;
    let n = input.n_pixels();
    if model.transfers().len() != n * MONTHS {
        return Err(Error::Internal(format!(
            "model holds {} transfer functions for {n} pixels",
            model.transfers().len()
        )));
    }
    let params = model.config().params();
    let cal = input.time().calendar();
    let missing = input.missing_value();
    let mut out = vec![0f32; input.values().len()];
    out.par_chunks_mut(n).enumerate().for_each(|(d, row)| {
        let l = input.time().label(d);
        let slot = climatology_slot(cal, l.month, l.day);
        let m = l.month as usize - 1;
        for (p, o) in row.iter_mut().enumerate() {
            *o = match input.value(d, p) {
                None => missing,
                Some(ghi) => {
                    let cs = clim.value(p, slot);
                    let t = logit_unchecked(params.clamp(ghi / cs));
                    let mapped = model.transfers()[p * MONTHS + m].eval(t);
                    store_bounded(from_logit_space(mapped, cs, &params), cs)
                }
            };
        }
    });
    DailyDataset::new(
        input.grid().clone(),
        input.time().clone(),
        input.variable_name(),
        GHI_UNITS,
        missing,
        out,
    )
}

/// Checks that `years` is a contiguous run and returns its bounds.
pub fn contiguous_bounds(years: &[i32]) -> Result<(i32, i32)> {
    let mut sorted = years.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let (first, last) = match (sorted.first(), sorted.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::invalid("empty year set")),
    };
    if (last - first + 1) as usize != sorted.len() {
        return Err(Error::invalid(format!(
            "years {sorted:?} are not a contiguous range"
        )));
    }
    Ok((first, last))
}

/// Fits on `train_years` and corrects the model data of `test_years`.
///
/// Returns `(corrected, raw)` test-period slices of the model data.
pub fn cross_validate(
    obs: &DailyDataset,
    model_data: &DailyDataset,
    clim: &ClearskyClimatology,
    train_years: &[i32],
    test_years: &[i32],
    config: &FitConfig,
) -> Result<(DailyDataset, DailyDataset)> {
    if let Some(y) = train_years.iter().find(|y| test_years.contains(y)) {
        return Err(Error::invalid(format!(
            "training and test years overlap (year {y})"
        )));
    }
    let (first, last) = contiguous_bounds(test_years)?;
    ensure_years_present(obs, test_years, "observed")?;
    let cfg = FitConfig {
        train_years: train_years.to_vec(),
        ..config.clone()
    };
    let fitted = fit(obs, model_data, clim, &cfg)?;
    let raw = model_data.slice_years(first, last)?;
    let corrected = correct(&fitted, &raw, clim)?;
    Ok((corrected, raw))
}
