//! Clearsky-bounded quantile mapping for gridded daily global horizontal
//! irradiance (GHI), plus the diagnostics used to judge it.
//!
//! The correction chain for one cell is
//! `GHI -> kc = clamp(GHI / CS) -> logit(kc) -> T(.) -> logistic -> x CS`,
//! where `CS` is a clearsky climatology and `T` a per-(pixel, month)
//! quantile-mapping transfer function fitted on a 3x3 pixel tile.
//!
//! The numeric kernels ([`qmap`], the transforms in [`clearsky`], the cell
//! FANOVA in [`diagnostics`]) are generic over [`Real`]; the aliases below
//! fix them to `f64` or `f32`.

// `!(a > b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calendar;
pub mod clearsky;
pub mod cli;
pub mod dataset;
pub mod datastore;
pub mod diagnostics;
mod error;
pub mod grid;
mod num;
pub mod pipeline;
pub mod qmap;

pub use calendar::{build_time_index, month_mask, CalendarKind, Date, DayLabel, TimeIndex};
pub use clearsky::{build_climatology, climatology_series, clearsky_index, logistic, logit, ClearskyClimatology};
pub use dataset::{DailyDataset, GHI_UNITS};
pub use error::{Error, Result};
pub use grid::{tile_neighbors, Grid};
pub use num::Real;
pub use pipeline::{correct, cross_validate, fit, pooled_sample, FitConfig, QuantileMapModel};
pub use qmap::{apply_transfer, build_transfer, empirical_quantiles};

pub type TransferFunction64 = qmap::TransferFunction<f64>;
pub type TransferFunction32 = qmap::TransferFunction<f32>;
pub type ProbabilitySet64 = qmap::ProbabilitySet<f64>;
pub type ProbabilitySet32 = qmap::ProbabilitySet<f32>;
pub type ClearskyIndexParams64 = clearsky::ClearskyIndexParams<f64>;
pub type ClearskyIndexParams32 = clearsky::ClearskyIndexParams<f32>;
pub type FanovaCell64 = diagnostics::FanovaCell<f64>;
