//! Pixel-wise functional ANOVA of a 2x2 GCM x RCM design.
//!
//! Bias fields are indexed `b[rcm][gcm]`: rows are RCMs, columns GCMs.

use crate::dataset::DailyDataset;
use crate::error::Result;
use crate::grid::Grid;
use crate::num::Real;

use super::BiasField;

/// Overall mean, two main effects and the interaction for one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanovaCell<T> {
    pub mu: T,
    pub alpha_gcm: T,
    pub alpha_rcm: T,
    pub gamma: T,
}

impl<T: Real> FanovaCell<T> {
    pub fn decompose(b11: T, b12: T, b21: T, b22: T) -> Self {
        let four = T::lit(4.0);
        FanovaCell {
            mu: (b11 + b21 + b12 + b22) / four,
            alpha_gcm: (b12 - b11 + b22 - b21) / four,
            alpha_rcm: (b21 + b22 - b11 - b12) / four,
            gamma: (b11 - b12 + b22 - b21) / four,
        }
    }

    /// Rebuilds `[b11, b12, b21, b22]` from the components.
    pub fn reconstruct(&self) -> [T; 4] {
        let FanovaCell { mu, alpha_gcm: g, alpha_rcm: r, gamma } = *self;
        [
            mu - g - r + gamma,
            mu + g - r - gamma,
            mu - g + r - gamma,
            mu + g + r + gamma,
        ]
    }
}

/// FANOVA component fields on a shared grid; `NaN` where any input is missing.
#[derive(Debug, Clone, PartialEq)]
pub struct FanovaComponents {
    grid: Grid,
    pub mu: Vec<f64>,
    pub alpha_gcm: Vec<f64>,
    pub alpha_rcm: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl FanovaComponents {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cell(&self, pixel: usize) -> FanovaCell<f64> {
        FanovaCell {
            mu: self.mu[pixel],
            alpha_gcm: self.alpha_gcm[pixel],
            alpha_rcm: self.alpha_rcm[pixel],
            gamma: self.gamma[pixel],
        }
    }

    /// `(name, raster)` pairs for `mu`, `alpha_gcm`, `alpha_rcm`, `gamma`.
    pub fn to_datasets(&self, years: &[i32], units: &str) -> Vec<(&'static str, DailyDataset)> {
        [
            ("mu", &self.mu),
            ("alpha_gcm", &self.alpha_gcm),
            ("alpha_rcm", &self.alpha_rcm),
            ("gamma", &self.gamma),
        ]
        .into_iter()
        .map(|(name, v)| {
            let field = BiasField::new(self.grid.clone(), v.clone(), years.to_vec())
                .expect("component length");
            (name, field.to_dataset(&format!("fanova_{name}"), units))
        })
        .collect()
    }
}

/// Decomposes four multi-year-averaged bias fields.
pub fn fanova(b11: &BiasField, b12: &BiasField, b21: &BiasField, b22: &BiasField) -> Result<FanovaComponents> {
    let grid = b11.grid();
    grid.ensure_matches(b12.grid(), "beta_11 vs beta_12")?;
    grid.ensure_matches(b21.grid(), "beta_11 vs beta_21")?;
    grid.ensure_matches(b22.grid(), "beta_11 vs beta_22")?;
    let n = grid.n_pixels();
    let mut out = FanovaComponents {
        grid: grid.clone(),
        mu: vec![f64::NAN; n],
        alpha_gcm: vec![f64::NAN; n],
        alpha_rcm: vec![f64::NAN; n],
        gamma: vec![f64::NAN; n],
    };
    for p in 0..n {
        if let (Some(a), Some(b), Some(c), Some(d)) = (b11.get(p), b12.get(p), b21.get(p), b22.get(p)) {
            let cell = FanovaCell::decompose(a, b, c, d);
            out.mu[p] = cell.mu;
            out.alpha_gcm[p] = cell.alpha_gcm;
            out.alpha_rcm[p] = cell.alpha_rcm;
            out.gamma[p] = cell.gamma;
        }
    }
    Ok(out)
}
