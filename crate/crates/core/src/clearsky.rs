//! Clearsky climatology, clearsky index and the logit/logistic pair.
//!
//! Daily GHI is divided by a per-pixel, per-day-of-year clearsky mean to get
//! the clearsky index, which is clamped into `[eps, 1 - eps]` and mapped to
//! the real line with the logit. Corrected values come back through the
//! logistic and are multiplied by the same clearsky value, so they can never
//! exceed it.

use crate::calendar::{CalendarKind, Date, DayLabel, TimeIndex, NOLEAP_MONTH_DAYS};
use crate::dataset::{DailyDataset, GHI_UNITS};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::num::Real;

/// Number of climatology slots: 365 regular days plus Feb 29 in slot 366.
pub const N_SLOTS: usize = 366;

/// Slot holding leap-day (Feb 29) values.
pub const LEAP_DAY_SLOT: usize = 366;

/// Variable name used when a climatology is stored as a dataset.
pub const CLIMATOLOGY_VARIABLE: &str = "clearsky_ghi_climatology";

/// Clamp margin for the clearsky index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearskyIndexParams<T> {
    epsilon: T,
}

impl<T: Real> ClearskyIndexParams<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon < T::lit(0.5)) {
            return Err(Error::invalid(format!(
                "epsilon must lie in (0, 0.5), got {epsilon}"
            )));
        }
        Ok(ClearskyIndexParams { epsilon })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub(crate) fn clamp(&self, kc: T) -> T {
        kc.max(self.epsilon).min(T::one() - self.epsilon)
    }
}

impl<T: Real> Default for ClearskyIndexParams<T> {
    fn default() -> Self {
        ClearskyIndexParams {
            epsilon: T::lit(1e-6),
        }
    }
}

/// `clamp(ghi / cs, eps, 1 - eps)`.
pub fn clearsky_index<T: Real>(ghi: T, cs: T, params: &ClearskyIndexParams<T>) -> Result<T> {
    if !(cs > T::zero()) || !cs.is_finite() {
        return Err(Error::invalid(format!("clearsky GHI must be positive, got {cs}")));
    }
    if !(ghi >= T::zero()) || !ghi.is_finite() {
        return Err(Error::invalid(format!("GHI must be finite and >= 0, got {ghi}")));
    }
    Ok(params.clamp(ghi / cs))
}

/// `ln(kc / (1 - kc))` for `kc` in (0, 1).
pub fn logit<T: Real>(kc: T) -> Result<T> {
    if !(kc > T::zero() && kc < T::one()) {
        return Err(Error::invalid(format!("logit needs kc in (0, 1), got {kc}")));
    }
    Ok(logit_unchecked(kc))
}

/// `1 / (1 + exp(-t))`.
pub fn logistic<T: Real>(t: T) -> Result<T> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("logistic needs a finite input, got {t}")));
    }
    Ok(logistic_unchecked(t))
}

pub(crate) fn logit_unchecked<T: Real>(kc: T) -> T {
    (kc / (T::one() - kc)).ln()
}

pub(crate) fn logistic_unchecked<T: Real>(t: T) -> T {
    T::one() / (T::one() + (-t).exp())
}

/// Logit of the clamped clearsky index; the quantity transfer functions act on.
pub(crate) fn to_logit_space(ghi: f64, cs: f64, params: &ClearskyIndexParams<f64>) -> Result<f64> {
    Ok(logit_unchecked(clearsky_index(ghi, cs, params)?))
}

/// Inverse of [`to_logit_space`]. The reconstructed index is held inside
/// `[eps, 1 - eps]` so the result stays strictly between 0 and `cs` after
/// rounding; the logistic saturates to exactly 0 or 1 for large |t|.
pub(crate) fn from_logit_space(t: f64, cs: f64, params: &ClearskyIndexParams<f64>) -> f64 {
    params.clamp(logistic_unchecked(t)) * cs
}

/// Climatology slot (1..=366) for a calendar day.
///
/// Regular days use their non-leap ordinal, Feb 29 goes to slot 366. 360-day
/// calendar days `(m, d)` use the Gregorian `(m, min(d, len(m)))` with the
/// non-leap month lengths.
pub fn climatology_slot(calendar: CalendarKind, month: u8, day: u8) -> usize {
    if calendar != CalendarKind::Fixed360 && month == 2 && day == 29 {
        return LEAP_DAY_SLOT;
    }
    let len = NOLEAP_MONTH_DAYS[month as usize - 1];
    let day = day.min(len);
    let before: usize = NOLEAP_MONTH_DAYS[..month as usize - 1]
        .iter()
        .map(|&d| d as usize)
        .sum();
    before + day as usize
}

fn slot_of(calendar: CalendarKind, l: &DayLabel) -> usize {
    climatology_slot(calendar, l.month, l.day)
}

/// Mean clearsky GHI per pixel and climatology slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearskyClimatology {
    grid: Grid,
    // [pixel][slot - 1]
    values: Vec<f64>,
    // Contributing values per [pixel][slot - 1]; zero when loaded from disk.
    counts: Vec<u32>,
}

impl ClearskyClimatology {
    /// Builds a climatology from explicit per-pixel slot values.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_pixels() * N_SLOTS {
            return Err(Error::invalid(format!(
                "climatology needs {} x {N_SLOTS} values, got {}",
                grid.n_pixels(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!(
                "climatology value {} at pixel {}, slot {} is not positive",
                values[i],
                i / N_SLOTS,
                i % N_SLOTS + 1
            )));
        }
        let counts = vec![0; values.len()];
        Ok(ClearskyClimatology { grid, values, counts })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Mean clearsky GHI at `pixel` for `slot` in 1..=366.
    pub fn value(&self, pixel: usize, slot: usize) -> f64 {
        self.values[pixel * N_SLOTS + slot - 1]
    }

    /// All 366 slot values of one pixel.
    pub fn pixel_values(&self, pixel: usize) -> &[f64] {
        &self.values[pixel * N_SLOTS..(pixel + 1) * N_SLOTS]
    }

    /// Number of input values averaged into `(pixel, slot)`.
    pub fn count(&self, pixel: usize, slot: usize) -> u32 {
        self.counts[pixel * N_SLOTS + slot - 1]
    }

    /// Total contributing values per pixel.
    pub fn pixel_counts(&self) -> Vec<u64> {
        self.counts
            .chunks(N_SLOTS)
            .map(|c| c.iter().map(|&v| v as u64).sum())
            .collect()
    }

    /// Clearsky value for day `l` of a series on `calendar`.
    pub fn value_for(&self, calendar: CalendarKind, pixel: usize, l: &DayLabel) -> f64 {
        self.value(pixel, slot_of(calendar, l))
    }

    /// Stores the climatology as a 366-day dataset in slot order.
    pub fn to_dataset(&self) -> DailyDataset {
        let n = self.grid.n_pixels();
        let mut values = vec![0f32; n * N_SLOTS];
        for p in 0..n {
            for s in 0..N_SLOTS {
                values[s * n + p] = self.values[p * N_SLOTS + s] as f32;
            }
        }
        let time = TimeIndex::new(CalendarKind::NoLeap365, Date::new(1, 1, 1), N_SLOTS)
            .expect("fixed climatology time index");
        DailyDataset::new(
            self.grid.clone(),
            time,
            CLIMATOLOGY_VARIABLE,
            GHI_UNITS,
            f32::NAN,
            values,
        )
        .expect("climatology dataset shape")
    }

    /// Reads a climatology back from its dataset form.
    pub fn from_dataset(ds: &DailyDataset) -> Result<Self> {
        if ds.variable_name() != CLIMATOLOGY_VARIABLE {
            return Err(Error::invalid(format!(
                "expected variable '{CLIMATOLOGY_VARIABLE}', found '{}'",
                ds.variable_name()
            )));
        }
        if ds.n_days() != N_SLOTS {
            return Err(Error::invalid(format!(
                "climatology dataset must have {N_SLOTS} days, found {}",
                ds.n_days()
            )));
        }
        let n = ds.n_pixels();
        let mut values = vec![0f64; n * N_SLOTS];
        for s in 0..N_SLOTS {
            for p in 0..n {
                values[p * N_SLOTS + s] = ds.value(s, p).unwrap_or(f64::NAN);
            }
        }
        Self::from_values(ds.grid().clone(), values)
    }
}

/// Averages yearly clearsky datasets into a per-slot climatology.
///
/// Each input must cover whole calendar years on a Gregorian or no-leap
/// calendar. Missing cells are skipped; slot 366 averages only leap-day
/// occurrences and falls back to the Feb 28 value when no input has one.
/// Values are summed in sorted order so the result does not depend on the
/// order of the inputs, then rounded to `f32` storage precision.
pub fn build_climatology(yearly_clearsky: &[DailyDataset]) -> Result<ClearskyClimatology> {
    let first = yearly_clearsky
        .first()
        .ok_or_else(|| Error::invalid("no clearsky datasets given"))?;
    let grid = first.grid().clone();
    for (k, ds) in yearly_clearsky.iter().enumerate() {
        grid.ensure_matches(ds.grid(), &format!("clearsky input {k}"))?;
        let time = ds.time();
        let cal = time.calendar();
        if cal == CalendarKind::Fixed360 {
            return Err(Error::invalid(format!(
                "clearsky input {k} uses the fixed_360 calendar; climatologies are built from gregorian or noleap_365 data"
            )));
        }
        let start = time.start();
        let end = time.end();
        if (start.month, start.day) != (1, 1) || (end.month, end.day) != (12, 31) {
            return Err(Error::invalid(format!(
                "clearsky input {k} spans {start}..{end}; whole calendar years required"
            )));
        }
        if let Some((i, v)) = ds
            .values()
            .iter()
            .enumerate()
            .find(|(_, &v)| !ds.is_missing(v) && !(v > 0.0 && v.is_finite()))
        {
            let n = ds.n_pixels();
            return Err(Error::invalid(format!(
                "clearsky input {k} has nonpositive value {v} on {} at pixel {}",
                time.label(i / n).date(),
                i % n
            )));
        }
    }

    // Day indices per slot for every input, shared across pixels.
    let slot_days: Vec<Vec<Vec<usize>>> = yearly_clearsky
        .iter()
        .map(|ds| {
            let mut by_slot = vec![Vec::new(); N_SLOTS];
            for (d, l) in ds.time().labels().iter().enumerate() {
                by_slot[slot_of(ds.time().calendar(), l) - 1].push(d);
            }
            by_slot
        })
        .collect();

    let n_pix = grid.n_pixels();
    let mut values = vec![0f64; n_pix * N_SLOTS];
    let mut counts = vec![0u32; n_pix * N_SLOTS];
    let mut pool: Vec<f32> = Vec::new();
    for p in 0..n_pix {
        for s in 0..N_SLOTS {
            pool.clear();
            for (ds, days) in yearly_clearsky.iter().zip(&slot_days) {
                pool.extend(
                    days[s]
                        .iter()
                        .map(|&d| ds.get(d, p))
                        .filter(|&v| !ds.is_missing(v)),
                );
            }
            pool.sort_unstable_by(f32::total_cmp);
            let sum: f64 = pool.iter().map(|&v| v as f64).sum();
            let i = p * N_SLOTS + s;
            counts[i] = pool.len() as u32;
            values[i] = if pool.is_empty() {
                f64::NAN
            } else {
                (sum / pool.len() as f64) as f32 as f64
            };
        }
        let leap = p * N_SLOTS + LEAP_DAY_SLOT - 1;
        if counts[leap] == 0 {
            values[leap] = values[p * N_SLOTS + climatology_slot(CalendarKind::NoLeap365, 2, 28) - 1];
        }
        if let Some(s) = (0..N_SLOTS).find(|&s| values[p * N_SLOTS + s].is_nan()) {
            return Err(Error::invalid(format!(
                "no clearsky data for pixel {p}, climatology slot {}",
                s + 1
            )));
        }
    }
    Ok(ClearskyClimatology { grid, values, counts })
}

/// Per-day clearsky values of `pixel` along `time`.
pub fn climatology_series(clim: &ClearskyClimatology, time: &TimeIndex, pixel: usize) -> Result<Vec<f64>> {
    clim.grid().check_pixel(pixel)?;
    let cal = time.calendar();
    Ok(time
        .labels()
        .iter()
        .map(|l| clim.value_for(cal, pixel, l))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1() -> Grid {
        Grid::regular(35.0, 0.2, 1, -100.0, 0.2, 1).unwrap()
    }

    fn year_ds(year: i32, cal: CalendarKind, f: impl Fn(usize) -> f32) -> DailyDataset {
        let n = cal.year_length(year) as usize;
        let t = TimeIndex::new(cal, Date::new(year, 1, 1), n).unwrap();
        DailyDataset::new(grid1(), t, "cs", GHI_UNITS, f32::NAN, (0..n).map(f).collect()).unwrap()
    }

    #[test]
    fn index_examples() {
        let p = ClearskyIndexParams::default();
        assert_eq!(clearsky_index(500.0, 1000.0, &p).unwrap(), 0.5);
        assert_eq!(clearsky_index(1200.0, 1000.0, &p).unwrap(), 1.0 - 1e-6);
        assert_eq!(clearsky_index(0.0, 1000.0, &p).unwrap(), 1e-6);
        assert!(clearsky_index(10.0, 0.0, &p).is_err());
        assert!(clearsky_index(10.0, -3.0, &p).is_err());
        assert!(clearsky_index(-1.0, 10.0, &p).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ClearskyIndexParams::new(0.0f64).is_err());
        assert!(ClearskyIndexParams::new(0.5f64).is_err());
        assert!(ClearskyIndexParams::new(1e-3f64).is_ok());
    }

    #[test]
    fn logit_examples() {
        assert_eq!(logit(0.5f64).unwrap(), 0.0);
        assert!((logistic(logit(0.9f64).unwrap()).unwrap() - 0.9).abs() < 1e-12);
        assert!((logit(0.75f64).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((logit(0.75f64).unwrap() - 1.0986123).abs() < 1e-7);
        assert!(logit(0.0f64).is_err());
        assert!(logit(1.0f64).is_err());
        assert!(logistic(f64::NAN).is_err());
    }

    #[test]
    fn reconstruction_is_strictly_bounded() {
        let p = ClearskyIndexParams::default();
        for t in [-1e6, -800.0, -40.0, 0.0, 40.0, 800.0, 1e6] {
            let v = from_logit_space(t, 250.0, &p);
            assert!(v > 0.0 && v < 250.0, "t={t} v={v}");
            assert!(((v as f32) as f64) < 250.0);
        }
    }

    #[test]
    fn slot_mapping() {
        use CalendarKind::*;
        assert_eq!(climatology_slot(Gregorian, 1, 1), 1);
        assert_eq!(climatology_slot(Gregorian, 2, 28), 59);
        assert_eq!(climatology_slot(Gregorian, 2, 29), 366);
        assert_eq!(climatology_slot(Gregorian, 3, 1), 60);
        assert_eq!(climatology_slot(NoLeap365, 12, 31), 365);
        assert_eq!(climatology_slot(Fixed360, 2, 30), 59);
        assert_eq!(climatology_slot(Fixed360, 4, 30), 120);
        assert_eq!(climatology_slot(Fixed360, 1, 30), 30);
    }

    #[test]
    fn two_year_mean() {
        let a = year_ds(2001, CalendarKind::Gregorian, |_| 300.0);
        let b = year_ds(2002, CalendarKind::Gregorian, |_| 320.0);
        let c = build_climatology(&[a, b]).unwrap();
        assert_eq!(c.value(0, 100), 310.0);
        assert_eq!(c.count(0, 100), 2);
    }

    #[test]
    fn single_year_is_identity() {
        let a = year_ds(2001, CalendarKind::Gregorian, |d| 100.0 + d as f32 * 0.5);
        let c = build_climatology(std::slice::from_ref(&a)).unwrap();
        for d in 0..365 {
            assert_eq!(c.value(0, d + 1), a.get(d, 0) as f64);
        }
        // No leap year: slot 366 falls back to Feb 28.
        assert_eq!(c.value(0, 366), c.value(0, 59));
        assert_eq!(c.count(0, 366), 0);
    }

    #[test]
    fn leap_slot_counts() {
        // Oracle: count occurrences of each (month, day) directly.
        let years = [2003, 2004, 2005, 2006];
        let inputs: Vec<_> = years
            .iter()
            .map(|&y| year_ds(y, CalendarKind::Gregorian, move |d| (y - 2000) as f32 * 10.0 + d as f32 * 0.0 + 1.0))
            .collect();
        let c = build_climatology(&inputs).unwrap();
        assert_eq!(c.count(0, 366), 1);
        assert_eq!(c.count(0, 365), 4);
        assert_eq!(c.count(0, 60), 4);
        // Only 2004 has Feb 29: value 41.
        assert_eq!(c.value(0, 366), 41.0);
        // Dec 31 over all four years: mean of 31, 41, 51, 61.
        assert_eq!(c.value(0, 365), 46.0);
    }

    #[test]
    fn climatology_rejections() {
        let bad = year_ds(2001, CalendarKind::Gregorian, |d| if d == 40 { 0.0 } else { 5.0 });
        assert!(build_climatology(&[bad]).is_err());
        let f360 = year_ds(2001, CalendarKind::Fixed360, |_| 5.0);
        assert!(build_climatology(&[f360]).is_err());
        assert!(build_climatology(&[]).is_err());
        let ok = year_ds(2001, CalendarKind::Gregorian, |_| 5.0);
        let other_grid = {
            let g = Grid::regular(36.0, 0.2, 1, -100.0, 0.2, 1).unwrap();
            let t = TimeIndex::new(CalendarKind::Gregorian, Date::new(2002, 1, 1), 365).unwrap();
            DailyDataset::new(g, t, "cs", GHI_UNITS, f32::NAN, vec![5.0; 365]).unwrap()
        };
        assert!(build_climatology(&[ok.clone(), other_grid]).is_err());
        let partial = {
            let t = TimeIndex::new(CalendarKind::Gregorian, Date::new(2002, 1, 1), 300).unwrap();
            DailyDataset::new(grid1(), t, "cs", GHI_UNITS, f32::NAN, vec![5.0; 300]).unwrap()
        };
        assert!(build_climatology(&[ok, partial]).is_err());
    }

    #[test]
    fn permutation_invariant() {
        let ys: Vec<_> = (0..5)
            .map(|k| year_ds(2001 + k, CalendarKind::Gregorian, move |d| 100.1 + (k as f32) * 3.3 + (d % 7) as f32 * 0.7))
            .collect();
        let a = build_climatology(&ys).unwrap();
        let mut rev = ys.clone();
        rev.reverse();
        rev.swap(1, 3);
        let b = build_climatology(&rev).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn series_mapping() {
        let a = year_ds(2004, CalendarKind::Gregorian, |d| 100.0 + d as f32);
        let c = build_climatology(&[a]).unwrap();
        // Non-leap year series skips slot 366.
        let t = TimeIndex::new(CalendarKind::Gregorian, Date::new(2005, 1, 1), 365).unwrap();
        let s = climatology_series(&c, &t, 0).unwrap();
        for (d, v) in s.iter().enumerate() {
            assert_eq!(*v, c.value(0, d + 1));
        }
        // Leap year Feb 29 -> slot 366 value (the 2004 Feb 29 value, day index 59).
        let t = TimeIndex::new(CalendarKind::Gregorian, Date::new(2008, 1, 1), 366).unwrap();
        let s = climatology_series(&c, &t, 0).unwrap();
        assert_eq!(s[59], 159.0);
        assert_eq!(s[60], c.value(0, 60));
        // 360-day calendar: enumerate every (m, d) against the mapping rule.
        let t = TimeIndex::new(CalendarKind::Fixed360, Date::new(2006, 1, 1), 360).unwrap();
        let s = climatology_series(&c, &t, 0).unwrap();
        let lens = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
        let mut k = 0;
        for m in 0..12 {
            let before: usize = lens[..m].iter().sum();
            for d in 1..=30usize {
                assert_eq!(s[k], c.value(0, before + d.min(lens[m])));
                k += 1;
            }
        }
        assert!(climatology_series(&c, &t, 1).is_err());
    }

    #[test]
    fn dataset_roundtrip() {
        let a = year_ds(2004, CalendarKind::Gregorian, |d| 100.25 + d as f32);
        let c = build_climatology(&[a]).unwrap();
        let ds = c.to_dataset();
        assert_eq!(ds.n_days(), 366);
        let back = ClearskyClimatology::from_dataset(&ds).unwrap();
        assert_eq!(back.pixel_values(0), c.pixel_values(0));
    }
}
