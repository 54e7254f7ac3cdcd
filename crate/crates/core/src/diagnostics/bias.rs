use crate::calendar::{CalendarKind, Date, TimeIndex};
use crate::dataset::DailyDataset;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Per-pixel percent bias of average GHI, `100 (obs - mod) / obs`.
///
/// Missing pixels are `NaN`. Negative values mean the model overpredicts.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasField {
    grid: Grid,
    values: Vec<f64>,
    years: Vec<i32>,
}

impl BiasField {
    pub fn new(grid: Grid, values: Vec<f64>, years: Vec<i32>) -> Result<Self> {
        if values.len() != grid.n_pixels() {
            return Err(Error::invalid(format!(
                "bias field has {} values for {} pixels",
                values.len(),
                grid.n_pixels()
            )));
        }
        Ok(BiasField { grid, values, years })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Averaging period.
    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn get(&self, pixel: usize) -> Option<f64> {
        let v = self.values[pixel];
        (!v.is_nan()).then_some(v)
    }

    /// Single-day raster dated Jan 1 of the first year of the period.
    pub fn to_dataset(&self, variable_name: &str, units: &str) -> DailyDataset {
        let year = self.years.first().copied().unwrap_or(1);
        let time = TimeIndex::new(CalendarKind::Gregorian, Date::new(year, 1, 1), 1)
            .expect("single-day index");
        let values = self.values.iter().map(|&v| v as f32).collect();
        DailyDataset::new(self.grid.clone(), time, variable_name, units, f32::NAN, values)
            .expect("raster shape")
    }

    /// Reads a single-day raster written by [`BiasField::to_dataset`].
    pub fn from_dataset(ds: &DailyDataset) -> Result<Self> {
        if ds.n_days() != 1 {
            return Err(Error::invalid(format!(
                "field raster '{}' must have exactly 1 day, found {}",
                ds.variable_name(),
                ds.n_days()
            )));
        }
        let values = (0..ds.n_pixels())
            .map(|p| ds.value(0, p).unwrap_or(f64::NAN))
            .collect();
        BiasField::new(ds.grid().clone(), values, vec![ds.time().start().year])
    }
}

/// Percent bias of the mean over all present days in `years`, per pixel.
pub fn annual_percent_bias(obs: &DailyDataset, model_data: &DailyDataset, years: &[i32]) -> Result<BiasField> {
    obs.grid().ensure_matches(model_data.grid(), "observed vs model")?;
    if years.is_empty() {
        return Err(Error::invalid("no years requested"));
    }
    for (ds, what) in [(obs, "observed"), (model_data, "model")] {
        if let Some(y) = years.iter().find(|&&y| !ds.time().covers_year(y)) {
            return Err(Error::invalid(format!("{what} dataset does not cover year {y}")));
        }
    }
    let obs_days = obs.time().days_in_years(years);
    let mod_days = model_data.time().days_in_years(years);
    let mean = |ds: &DailyDataset, days: &[usize], p: usize| {
        let (n, s) = days
            .iter()
            .filter_map(|&d| ds.value(d, p))
            .fold((0usize, 0f64), |(n, s), v| (n + 1, s + v));
        if n == 0 {
            f64::NAN
        } else {
            s / n as f64
        }
    };
    let values = (0..obs.n_pixels())
        .map(|p| {
            let o = mean(obs, &obs_days, p);
            let m = mean(model_data, &mod_days, p);
            if o > 0.0 && !m.is_nan() {
                100.0 * (o - m) / o
            } else {
                f64::NAN
            }
        })
        .collect();
    let mut ys = years.to_vec();
    ys.sort_unstable();
    ys.dedup();
    BiasField::new(obs.grid().clone(), values, ys)
}

/// Pixel-wise arithmetic mean of several bias fields; missing anywhere is
/// missing in the result.
pub fn average_bias_fields(fields: &[BiasField]) -> Result<BiasField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::invalid("no bias fields to average"))?;
    for f in &fields[1..] {
        first.grid.ensure_matches(&f.grid, "bias fields")?;
    }
    let n = fields.len() as f64;
    let values = (0..first.values.len())
        .map(|p| fields.iter().map(|f| f.values[p]).sum::<f64>() / n)
        .collect();
    let mut years: Vec<i32> = fields.iter().flat_map(|f| f.years.iter().copied()).collect();
    years.sort_unstable();
    years.dedup();
    BiasField::new(first.grid.clone(), values, years)
}
