use std::path::Path;

use crate::dataset::DailyDataset;
use crate::datastore::csv_error;
use crate::error::{Error, Result};

use super::csv_num;

/// Bias statistics of one month's pooled (day, pixel) cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthStat {
    /// `obs_mean - mod_mean` (W/m2); negative means the model overpredicts.
    pub mean_bias: f64,
    /// `obs_sd - mod_sd` (W/m2).
    pub sd_diff: f64,
    /// `mod_sd / obs_sd`; 1 when both are zero, `NaN` when only obs is.
    pub sd_ratio: f64,
    pub obs_mean: f64,
    pub mod_mean: f64,
    pub obs_sd: f64,
    pub mod_sd: f64,
    pub obs_count: usize,
    pub mod_count: usize,
}

/// Per-month statistics; `None` where either dataset has no data.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyStats {
    pub months: [Option<MonthStat>; 12],
}

impl MonthlyStats {
    pub fn month(&self, month: u8) -> Option<&MonthStat> {
        self.months[month as usize - 1].as_ref()
    }
}

/// Count, sum, mean and population SD of present cells in `days`.
fn moments(ds: &DailyDataset, days: &[usize]) -> (usize, f64, f64, f64) {
    let n_pix = ds.n_pixels();
    let cells = || {
        days.iter()
            .flat_map(move |&d| (0..n_pix).filter_map(move |p| ds.value(d, p)))
    };
    let (count, sum) = cells().fold((0usize, 0f64), |(c, s), v| (c + 1, s + v));
    if count == 0 {
        return (0, 0.0, f64::NAN, f64::NAN);
    }
    let mean = sum / count as f64;
    let ss: f64 = cells().map(|v| (v - mean) * (v - mean)).sum();
    (count, sum, mean, (ss / count as f64).sqrt())
}

/// Monthly statistics over all days of both datasets.
pub fn monthly_stats(obs: &DailyDataset, model_data: &DailyDataset) -> Result<MonthlyStats> {
    stats_with(obs, model_data, |ds, m| ds.time().month_mask(m))
}

/// Monthly statistics restricted to `years` in each dataset.
pub fn monthly_stats_for_years(obs: &DailyDataset, model_data: &DailyDataset, years: &[i32]) -> Result<MonthlyStats> {
    stats_with(obs, model_data, |ds, m| ds.time().month_mask_in_years(m, years))
}

fn stats_with(
    obs: &DailyDataset,
    model_data: &DailyDataset,
    days: impl Fn(&DailyDataset, u8) -> Vec<usize>,
) -> Result<MonthlyStats> {
    obs.grid().ensure_matches(model_data.grid(), "observed vs model")?;
    let mut months = [None; 12];
    for (i, slot) in months.iter_mut().enumerate() {
        let m = i as u8 + 1;
        let (oc, osum, om, osd) = moments(obs, &days(obs, m));
        let (mc, msum, mm, msd) = moments(model_data, &days(model_data, m));
        if oc == 0 || mc == 0 {
            continue;
        }
        let sd_ratio = if osd > 0.0 {
            msd / osd
        } else if msd == 0.0 {
            1.0
        } else {
            f64::NAN
        };
        // Equal counts: one rounding, so a constant offset comes back exactly.
        let mean_bias = if oc == mc { (osum - msum) / oc as f64 } else { om - mm };
        *slot = Some(MonthStat {
            mean_bias,
            sd_diff: osd - msd,
            sd_ratio,
            obs_mean: om,
            mod_mean: mm,
            obs_sd: osd,
            mod_sd: msd,
            obs_count: oc,
            mod_count: mc,
        });
    }
    Ok(MonthlyStats { months })
}

/// Writes `month,mean_bias_wm2,sd_diff_wm2,sd_ratio`; missing months have empty fields.
pub fn write_monthly_csv(stats: &MonthlyStats, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["month", "mean_bias_wm2", "sd_diff_wm2", "sd_ratio"])
        .map_err(|e| csv_error(path, e))?;
    for (i, s) in stats.months.iter().enumerate() {
        let row = match s {
            Some(s) => [
                (i + 1).to_string(),
                csv_num(s.mean_bias),
                csv_num(s.sd_diff),
                csv_num(s.sd_ratio),
            ],
            None => [(i + 1).to_string(), String::new(), String::new(), String::new()],
        };
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
