//! Evaluation machinery: monthly mean/SD bias, annual percent-bias fields,
//! region aggregation, clearsky-index distributions and the pixel-wise 2x2
//! functional ANOVA of bias fields.

mod bias;
mod fanova;
mod kc;
mod monthly;
mod regions;

pub use bias::{annual_percent_bias, average_bias_fields, BiasField};
pub use fanova::{fanova, FanovaCell, FanovaComponents};
pub use kc::{kc_distribution, ClearskyReference, KcSummary};
pub use monthly::{monthly_stats, monthly_stats_for_years, write_monthly_csv, MonthStat, MonthlyStats};
pub use regions::{assign_regions, region_summary, write_region_summary_csv, RegionAssignment, RegionStats};

use crate::qmap::quantile_sorted;

/// Order statistics of a finite sample (`NaN` fields when empty).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Summary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Summary {
    pub(crate) fn of(mut v: Vec<f64>) -> Summary {
        if v.is_empty() {
            return Summary {
                count: 0,
                mean: f64::NAN,
                min: f64::NAN,
                q25: f64::NAN,
                median: f64::NAN,
                q75: f64::NAN,
                max: f64::NAN,
            };
        }
        v.sort_unstable_by(f64::total_cmp);
        let n = v.len();
        Summary {
            count: n,
            mean: v.iter().sum::<f64>() / n as f64,
            min: v[0],
            q25: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q75: quantile_sorted(&v, 0.75),
            max: v[n - 1],
        }
    }
}

/// CSV cell for a possibly-missing number: empty when `NaN`.
pub(crate) fn csv_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}
