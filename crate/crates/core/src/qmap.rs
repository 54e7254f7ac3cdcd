//! Empirical quantiles and the piecewise-linear quantile-mapping transfer
//! function `T(x) = F_obs^-1(F_mod(x))`.
//!
//! The transfer function is represented by paired knots `(x_k, y_k)`: the
//! model and observed sample quantiles at a shared probability set. Between
//! knots it interpolates linearly; outside the knot range it extrapolates
//! linearly using the slope of the two outermost distinct knots.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::num::Real;

/// Strictly increasing probabilities in the open interval (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySet<T> {
    probs: Vec<T>,
}

impl<T: Real> ProbabilitySet<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid(format!(
                "probability set needs at least 2 entries, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p > T::zero() && p < T::one())) {
            return Err(Error::invalid("probabilities must lie strictly inside (0, 1)"));
        }
        if probs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("probabilities must be strictly increasing"));
        }
        Ok(ProbabilitySet { probs })
    }

    /// The 99 percentiles 0.01, 0.02, ..., 0.99.
    pub fn percentiles() -> Self {
        ProbabilitySet {
            probs: (1..=99).map(|k| T::lit(k as f64 / 100.0)).collect(),
        }
    }

    /// `start, start + step, ..., stop` (inclusive, within half a step).
    ///
    /// Each entry is snapped to 12 decimals so that e.g. `0.01:0.99:0.01`
    /// reproduces [`ProbabilitySet::percentiles`] exactly.
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::invalid(format!(
                "bad probability range {start}:{stop}:{step}"
            )));
        }
        let count = ((stop - start) / step + 0.5).floor() as usize + 1;
        let probs = (0..count)
            .map(|k| {
                let p = start + step * k as f64;
                T::lit((p * 1e12).round() / 1e12)
            })
            .collect();
        Self::new(probs)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl<T: Real> Default for ProbabilitySet<T> {
    fn default() -> Self {
        Self::percentiles()
    }
}

/// Quantile of an ascending sample by linear interpolation of order
/// statistics: `h = (n - 1) p`, `q = x[floor h] + frac(h) (x[floor h + 1] - x[floor h])`.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    debug_assert!(n > 0);
    let h = T::count(n - 1) * p;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0);
    if i + 1 >= n {
        return sorted[n - 1];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

/// Quantiles of an ascending sample at every probability of `probs`.
pub fn quantiles_sorted<T: Real>(sorted: &[T], probs: &ProbabilitySet<T>) -> Vec<T> {
    probs
        .as_slice()
        .iter()
        .map(|&p| quantile_sorted(sorted, p))
        .collect()
}

/// Sorts a finite sample ascending in place.
pub(crate) fn sort_finite<T: Real>(sample: &mut [T]) {
    sample.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
}

fn check_sample<T: Real>(sample: &[T], what: &str) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::invalid(format!("{what} sample is empty")));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what} sample has non-finite values")));
    }
    Ok(())
}

/// Empirical quantiles of an unsorted, finite sample.
pub fn empirical_quantiles<T: Real>(sample: &[T], probs: &ProbabilitySet<T>) -> Result<Vec<T>> {
    check_sample(sample, "quantile")?;
    let mut sorted = sample.to_vec();
    sort_finite(&mut sorted);
    Ok(quantiles_sorted(&sorted, probs))
}

/// Monotone piecewise-linear quantile map.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction<T> {
    knots_x: Vec<T>,
    knots_y: Vec<T>,
    // Knots with tied x collapsed to one node carrying the run's mean y.
    nodes_x: Vec<T>,
    nodes_y: Vec<T>,
    slope_low: T,
    slope_high: T,
    // Only used when every x knot is equal.
    y_median: T,
}

impl<T: Real> TransferFunction<T> {
    /// Fits the map from a model sample onto an observed sample.
    pub fn build(mod_sample: &[T], obs_sample: &[T], probs: &ProbabilitySet<T>) -> Result<Self> {
        check_sample(mod_sample, "model")?;
        check_sample(obs_sample, "observed")?;
        let mut m = mod_sample.to_vec();
        let mut o = obs_sample.to_vec();
        sort_finite(&mut m);
        sort_finite(&mut o);
        Ok(Self::from_sorted_samples(&m, &o, probs))
    }

    /// Like [`TransferFunction::build`] for samples already sorted ascending
    /// and known to be finite and nonempty.
    pub(crate) fn from_sorted_samples(mod_sorted: &[T], obs_sorted: &[T], probs: &ProbabilitySet<T>) -> Self {
        let x = quantiles_sorted(mod_sorted, probs);
        let y = quantiles_sorted(obs_sorted, probs);
        Self::from_valid_knots(x, y)
    }

    /// Rebuilds a map from stored knots.
    pub fn from_knots(knots_x: Vec<T>, knots_y: Vec<T>) -> Result<Self> {
        if knots_x.len() != knots_y.len() {
            return Err(Error::invalid(format!(
                "knot arrays differ in length ({} vs {})",
                knots_x.len(),
                knots_y.len()
            )));
        }
        if knots_x.is_empty() {
            return Err(Error::invalid("transfer function needs at least one knot"));
        }
        if knots_x.iter().chain(&knots_y).any(|v| !v.is_finite()) {
            return Err(Error::invalid("knots must be finite"));
        }
        if knots_x.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("model-quantile knots must be non-decreasing"));
        }
        if knots_y.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("observed-quantile knots must be non-decreasing"));
        }
        Ok(Self::from_valid_knots(knots_x, knots_y))
    }

    fn from_valid_knots(knots_x: Vec<T>, knots_y: Vec<T>) -> Self {
        let mut nodes_x = Vec::with_capacity(knots_x.len());
        let mut nodes_y = Vec::with_capacity(knots_x.len());
        let mut start = 0;
        while start < knots_x.len() {
            let mut end = start + 1;
            while end < knots_x.len() && knots_x[end] == knots_x[start] {
                end += 1;
            }
            nodes_x.push(knots_x[start]);
            nodes_y.push(run_mean(&knots_y[start..end]));
            start = end;
        }

        let n = nodes_x.len();
        let (slope_low, slope_high) = if n >= 2 {
            (
                segment_slope(nodes_x[0], nodes_x[1], nodes_y[0], nodes_y[1]),
                segment_slope(nodes_x[n - 2], nodes_x[n - 1], nodes_y[n - 2], nodes_y[n - 1]),
            )
        } else {
            (T::one(), T::one())
        };
        let y_median = quantile_sorted(&knots_y, T::lit(0.5));

        TransferFunction {
            knots_x,
            knots_y,
            nodes_x,
            nodes_y,
            slope_low,
            slope_high,
            y_median,
        }
    }

    /// Evaluates the map; rejects non-finite input.
    pub fn apply(&self, x: T) -> Result<T> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("cannot map non-finite value {x}")));
        }
        Ok(self.eval(x))
    }

    /// Evaluates the map without input validation.
    pub fn eval(&self, x: T) -> T {
        let nx = &self.nodes_x;
        let ny = &self.nodes_y;
        let n = nx.len();
        if n == 1 {
            return self.y_median + (x - nx[0]);
        }
        if x < nx[0] {
            return ny[0] + self.slope_low * (x - nx[0]);
        }
        if x > nx[n - 1] {
            return ny[n - 1] + self.slope_high * (x - nx[n - 1]);
        }
        // nx[i] <= x < nx[i + 1], or x == nx[n - 1].
        let i = nx.partition_point(|&v| v <= x) - 1;
        if nx[i] == x {
            return ny[i];
        }
        let (x0, x1, y0, y1) = (nx[i], nx[i + 1], ny[i], ny[i + 1]);
        let t = (x - x0) / (x1 - x0);
        // Rounding could push the lerp past an endpoint and break monotonicity.
        (y0 + t * (y1 - y0)).max(y0).min(y1)
    }

    /// Model-quantile knots `x_k`.
    pub fn knots_x(&self) -> &[T] {
        &self.knots_x
    }

    /// Observed-quantile knots `y_k`.
    pub fn knots_y(&self) -> &[T] {
        &self.knots_y
    }

    pub fn n_knots(&self) -> usize {
        self.knots_x.len()
    }

    /// Distinct-x interpolation nodes after collapsing tied runs.
    pub fn nodes(&self) -> (&[T], &[T]) {
        (&self.nodes_x, &self.nodes_y)
    }

    /// Extrapolation slopes below the first and above the last node.
    pub fn boundary_slopes(&self) -> (T, T) {
        (self.slope_low, self.slope_high)
    }

    /// True when every model knot is equal and the map is a pure shift.
    pub fn is_degenerate(&self) -> bool {
        self.nodes_x.len() == 1
    }
}

/// Free-function form of [`TransferFunction::build`].
pub fn build_transfer<T: Real>(
    mod_sample: &[T],
    obs_sample: &[T],
    probs: &ProbabilitySet<T>,
) -> Result<TransferFunction<T>> {
    TransferFunction::build(mod_sample, obs_sample, probs)
}

/// Free-function form of [`TransferFunction::apply`].
pub fn apply_transfer<T: Real>(tf: &TransferFunction<T>, x: T) -> Result<T> {
    tf.apply(x)
}

fn segment_slope<T: Real>(x0: T, x1: T, y0: T, y1: T) -> T {
    let s = (y1 - y0) / (x1 - x0);
    if s > T::zero() {
        s
    } else {
        T::zero()
    }
}

/// Mean of a non-decreasing run, kept inside the run's range and exact for
/// constant runs.
fn run_mean<T: Real>(run: &[T]) -> T {
    let first = run[0];
    let last = run[run.len() - 1];
    if first == last {
        return first;
    }
    let sum = run.iter().fold(T::zero(), |acc, &v| acc + v);
    (sum / T::count(run.len())).max(first).min(last)
}
