use crate::clearsky::ClearskyClimatology;
use crate::dataset::DailyDataset;
use crate::error::{Error, Result};

use super::Summary;

/// Clearsky values to divide by: a day-aligned dataset or a climatology.
#[derive(Debug, Clone, Copy)]
pub enum ClearskyReference<'a> {
    Dataset(&'a DailyDataset),
    Climatology(&'a ClearskyClimatology),
}

/// Distribution of unclamped clearsky indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KcSummary {
    pub count: usize,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    /// Share of values strictly above 1.
    pub exceed_fraction: f64,
}

/// Summarizes `ghi / cs` over all cells where both are present and `cs > 0`.
pub fn kc_distribution(ds: &DailyDataset, reference: ClearskyReference<'_>) -> Result<KcSummary> {
    let n = ds.n_pixels();
    let mut kc = Vec::new();
    match reference {
        ClearskyReference::Dataset(cs) => {
            ds.grid().ensure_matches(cs.grid(), "data vs clearsky reference")?;
            if cs.time() != ds.time() {
                return Err(Error::invalid(
                    "clearsky reference must cover the same days on the same calendar",
                ));
            }
            for d in 0..ds.n_days() {
                for p in 0..n {
                    if let (Some(g), Some(c)) = (ds.value(d, p), cs.value(d, p)) {
                        if c > 0.0 {
                            kc.push(g / c);
                        }
                    }
                }
            }
        }
        ClearskyReference::Climatology(clim) => {
            ds.grid().ensure_matches(clim.grid(), "data vs climatology")?;
            let cal = ds.time().calendar();
            for (d, l) in ds.time().labels().iter().enumerate() {
                for p in 0..n {
                    if let Some(g) = ds.value(d, p) {
                        kc.push(g / clim.value_for(cal, p, l));
                    }
                }
            }
        }
    }
    let exceed = kc.iter().filter(|&&v| v > 1.0).count();
    let s = Summary::of(kc);
    Ok(KcSummary {
        count: s.count,
        min: s.min,
        q25: s.q25,
        median: s.median,
        q75: s.q75,
        max: s.max,
        exceed_fraction: if s.count == 0 {
            f64::NAN
        } else {
            exceed as f64 / s.count as f64
        },
    })
}
