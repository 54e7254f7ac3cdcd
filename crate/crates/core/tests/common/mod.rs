// Synthetic grids, climatologies and GHI fields shared by the integration tests.
#![allow(dead_code)]

use ghiqm::calendar::{CalendarKind, Date, TimeIndex};
use ghiqm::clearsky::{ClearskyClimatology, N_SLOTS};
use ghiqm::dataset::{DailyDataset, GHI_UNITS};
use ghiqm::grid::Grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(n_lat: usize, n_lon: usize) -> Grid {
    Grid::regular(30.0, 0.25, n_lat, -110.0, 0.25, n_lon).unwrap()
}

/// Whole calendar years starting on January 1 of `first_year`.
pub fn years_index(cal: CalendarKind, first_year: i32, n_years: i32) -> TimeIndex {
    let n: usize = (first_year..first_year + n_years).map(|y| cal.year_length(y) as usize).sum();
    TimeIndex::new(cal, Date::new(first_year, 1, 1), n).unwrap()
}

/// Seasonal clearsky climatology, strictly positive.
pub fn seasonal_climatology(g: &Grid) -> ClearskyClimatology {
    let mut v = Vec::with_capacity(g.n_pixels() * N_SLOTS);
    for p in 0..g.n_pixels() {
        let (lat, _) = g.coords(p);
        for slot in 1..=N_SLOTS {
            let phase = 2.0 * std::f64::consts::PI * (slot as f64 - 172.0) / 365.0;
            v.push(230.0 + 110.0 * phase.cos() - 2.0 * (lat - 30.0));
        }
    }
    ClearskyClimatology::from_values(g.clone(), v).unwrap()
}

pub fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Per-(pixel, month) location and scale of the observed logit clearsky index.
pub fn logit_params(pixel: usize, month: u8) -> (f64, f64) {
    let mu = 0.9 + 0.4 * ((month as f64) * 0.7).sin() + 0.02 * (pixel % 7) as f64;
    let sd = 0.8 + 0.15 * ((month as f64) * 1.3).cos();
    (mu, sd)
}

/// GHI whose logit clearsky index is `a * z + b` with `z` drawn from the
/// observed per-(pixel, month) distribution.
pub fn synthetic_ghi(
    g: &Grid,
    time: &TimeIndex,
    clim: &ClearskyClimatology,
    a: f64,
    b: f64,
    seed: u64,
) -> DailyDataset {
    let mut r = rng(seed);
    let n = g.n_pixels();
    let mut values = Vec::with_capacity(n * time.n_days());
    for label in time.labels() {
        for p in 0..n {
            let (mu, sd) = logit_params(p, label.month);
            let z = Normal::new(mu, sd).unwrap().sample(&mut r);
            let cs = clim.value_for(time.calendar(), p, label);
            values.push((logistic(a * z + b) * cs) as f32);
        }
    }
    DailyDataset::new(g.clone(), time.clone(), "ghi", GHI_UNITS, f32::NAN, values).unwrap()
}

/// GHI drawn uniformly in `[0, 1.5 * cs]`, with exact zeros, values above
/// clearsky and missing cells mixed in.
pub fn wild_ghi(g: &Grid, time: &TimeIndex, clim: &ClearskyClimatology, seed: u64) -> DailyDataset {
    let mut r = rng(seed);
    let n = g.n_pixels();
    let mut values = Vec::with_capacity(n * time.n_days());
    for label in time.labels() {
        for p in 0..n {
            let cs = clim.value_for(time.calendar(), p, label);
            let u: f64 = r.random();
            let v = match r.random_range(0..20) {
                0 => 0.0,
                1 => f32::NAN,
                2 => (cs * (1.0 + u)) as f32,
                3 => cs as f32,
                _ => (1.5 * cs * u) as f32,
            };
            values.push(v);
        }
    }
    DailyDataset::new(g.clone(), time.clone(), "ghi", GHI_UNITS, f32::NAN, values).unwrap()
}
