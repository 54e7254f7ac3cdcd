use crate::calendar::{TimeIndex};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Units label written on GHI outputs.
pub const GHI_UNITS: &str = "W/m2";

/// One variable's daily values on a grid, stored `[day][pixel]` as `f32`.
///
/// Missing cells hold the `missing_value` sentinel; `NaN` is always
/// treated as missing as well.
#[derive(Debug, Clone)]
pub struct DailyDataset {
    grid: Grid,
    time: TimeIndex,
    variable_name: String,
    units: String,
    missing_value: f32,
    values: Vec<f32>,
}

impl DailyDataset {
    pub fn new(
        grid: Grid,
        time: TimeIndex,
        variable_name: impl Into<String>,
        units: impl Into<String>,
        missing_value: f32,
        values: Vec<f32>,
    ) -> Result<Self> {
        let expected = time.n_days() * grid.n_pixels();
        if values.len() != expected {
            return Err(Error::invalid(format!(
                "dataset holds {} values, expected {} days x {} pixels = {expected}",
                values.len(),
                time.n_days(),
                grid.n_pixels()
            )));
        }
        Ok(DailyDataset {
            grid,
            time,
            variable_name: variable_name.into(),
            units: units.into(),
            missing_value,
            values,
        })
    }

    /// Dataset filled with the missing sentinel (`NaN`).
    pub fn empty_like(grid: Grid, time: TimeIndex, variable_name: &str, units: &str) -> Self {
        let n = grid.n_pixels() * time.n_days();
        DailyDataset {
            grid,
            time,
            variable_name: variable_name.to_owned(),
            units: units.to_owned(),
            missing_value: f32::NAN,
            values: vec![f32::NAN; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> &TimeIndex {
        &self.time
    }

    pub fn variable_name(&self) -> &str {
        &self.variable_name
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn missing_value(&self) -> f32 {
        self.missing_value
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn n_days(&self) -> usize {
        self.time.n_days()
    }

    pub fn n_pixels(&self) -> usize {
        self.grid.n_pixels()
    }

    /// Values of one day across all pixels.
    pub fn day(&self, day: usize) -> &[f32] {
        let n = self.n_pixels();
        &self.values[day * n..(day + 1) * n]
    }

    pub fn get(&self, day: usize, pixel: usize) -> f32 {
        self.values[day * self.n_pixels() + pixel]
    }

    pub fn set(&mut self, day: usize, pixel: usize, v: f32) {
        let n = self.n_pixels();
        self.values[day * n + pixel] = v;
    }

    pub fn is_missing(&self, v: f32) -> bool {
        v.is_nan() || v == self.missing_value
    }

    /// Cell value as `f64`, or `None` when missing.
    pub fn value(&self, day: usize, pixel: usize) -> Option<f64> {
        let v = self.get(day, pixel);
        (!self.is_missing(v)).then_some(v as f64)
    }

    /// Checks the GHI invariant: every present value is finite and >= 0.
    pub fn check_ghi(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|&v| !self.is_missing(v) && !(v.is_finite() && v >= 0.0))
        {
            None => Ok(()),
            Some(i) => {
                let n = self.n_pixels();
                Err(Error::invalid(format!(
                    "'{}' has invalid GHI value {} at day {} ({}), pixel {}",
                    self.variable_name,
                    self.values[i],
                    i / n,
                    self.time.label(i / n).date(),
                    i % n
                )))
            }
        }
    }

    /// Copy restricted to whole years `first..=last`.
    pub fn slice_years(&self, first: i32, last: i32) -> Result<DailyDataset> {
        let (offset, time) = self.time.slice_years(first, last)?;
        let n = self.n_pixels();
        let values = self.values[offset * n..(offset + time.n_days()) * n].to_vec();
        DailyDataset::new(
            self.grid.clone(),
            time,
            self.variable_name.clone(),
            self.units.clone(),
            self.missing_value,
            values,
        )
    }

    /// Same payload with new variable name and units.
    pub fn relabel(mut self, variable_name: &str, units: &str) -> Self {
        self.variable_name = variable_name.to_owned();
        self.units = units.to_owned();
        self
    }

    /// True if both datasets have identical metadata and bit-identical values.
    pub fn bit_eq(&self, other: &DailyDataset) -> bool {
        self.grid == other.grid
            && self.time == other.time
            && self.variable_name == other.variable_name
            && self.units == other.units
            && self.missing_value.to_bits() == other.missing_value.to_bits()
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
