//! Model directory: `meta.json` plus `knots.f64` (little-endian `f64`,
//! ordered `[pixel][month][knot][model, observed]`).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset_file::{read_json, write_json, META_FILE};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::pipeline::{FitConfig, QuantileMapModel, MONTHS};
use crate::qmap::{ProbabilitySet, TransferFunction};

pub const KNOTS_FILE: &str = "knots.f64";

const FORMAT: &str = "ghiqm-model";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelMeta {
    format: String,
    version: u32,
    n_lat: usize,
    n_lon: usize,
    lat: Vec<f64>,
    lon: Vec<f64>,
    probs: Vec<f64>,
    epsilon: f64,
    train_years: Vec<i32>,
    min_sample: usize,
    n_knots: usize,
    climatology: String,
    obs_sample_sizes: Vec<usize>,
    mod_sample_sizes: Vec<usize>,
}

pub fn write_model(model: &QuantileMapModel, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg = model.config();
    let grid = model.grid();
    let meta = ModelMeta {
        format: FORMAT.to_owned(),
        version: VERSION,
        n_lat: grid.n_lat(),
        n_lon: grid.n_lon(),
        lat: grid.lats().to_vec(),
        lon: grid.lons().to_vec(),
        probs: cfg.probs.as_slice().to_vec(),
        epsilon: cfg.epsilon,
        train_years: cfg.train_years.clone(),
        min_sample: cfg.min_sample,
        n_knots: cfg.probs.len(),
        climatology: model.climatology().to_owned(),
        obs_sample_sizes: model.obs_sample_sizes().to_vec(),
        mod_sample_sizes: model.mod_sample_sizes().to_vec(),
    };
    write_json(&dir.join(META_FILE), &meta)?;

    let path = dir.join(KNOTS_FILE);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    for tf in model.transfers() {
        for (x, y) in tf.knots_x().iter().zip(tf.knots_y()) {
            w.write_all(&x.to_le_bytes()).map_err(|e| Error::io(&path, e))?;
            w.write_all(&y.to_le_bytes()).map_err(|e| Error::io(&path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn read_model(dir: impl AsRef<Path>) -> Result<QuantileMapModel> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let meta: ModelMeta = read_json(&meta_path)?;
    if meta.format != FORMAT || meta.version != VERSION {
        return Err(Error::corrupt(
            &meta_path,
            format!("not a {FORMAT} v{VERSION} file ({} v{})", meta.format, meta.version),
        ));
    }
    if meta.lat.len() != meta.n_lat || meta.lon.len() != meta.n_lon || meta.probs.len() != meta.n_knots {
        return Err(Error::corrupt(&meta_path, "array lengths disagree with declared sizes"));
    }
    let grid = Grid::new(meta.lat, meta.lon)?;
    let config = FitConfig {
        probs: ProbabilitySet::new(meta.probs)?,
        epsilon: meta.epsilon,
        train_years: meta.train_years,
        min_sample: meta.min_sample,
    };

    let path = dir.join(KNOTS_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let k = meta.n_knots;
    let n_cells = grid.n_pixels() * MONTHS;
    let expected = n_cells * k * 2 * 8;
    if bytes.len() != expected {
        return Err(Error::corrupt(
            &path,
            format!(
                "payload is {} bytes, expected {} pixels x 12 months x {k} knots x 2 x 8 = {expected}",
                bytes.len(),
                grid.n_pixels()
            ),
        ));
    }
    let doubles: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let transfers = doubles
        .chunks_exact(2 * k)
        .enumerate()
        .map(|(cell, c)| {
            let xs = c.iter().step_by(2).copied().collect();
            let ys = c.iter().skip(1).step_by(2).copied().collect();
            TransferFunction::from_knots(xs, ys).map_err(|e| {
                Error::corrupt(
                    &path,
                    format!("pixel {}, month {}: {e}", cell / MONTHS, cell % MONTHS + 1),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    QuantileMapModel::new(
        grid,
        config,
        meta.climatology,
        transfers,
        meta.obs_sample_sizes,
        meta.mod_sample_sizes,
    )
    .map_err(|e| Error::corrupt(&meta_path, e.to_string()))
}
