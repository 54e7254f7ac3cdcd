//! Dataset directory: `meta.json` plus `data.f32` (little-endian `f32`,
//! row-major `[day][pixel]`).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calendar::{CalendarKind, Date, TimeIndex};
use crate::dataset::DailyDataset;
use crate::error::{Error, Result};
use crate::grid::Grid;

pub const META_FILE: &str = "meta.json";
pub const DATA_FILE: &str = "data.f32";

#[derive(Debug, Serialize, Deserialize)]
struct DatasetMeta {
    n_lat: usize,
    n_lon: usize,
    lat: Vec<f64>,
    lon: Vec<f64>,
    calendar: String,
    start: String,
    n_days: usize,
    variable_name: String,
    units: String,
    /// `null` encodes a NaN sentinel.
    missing_value: Option<f64>,
}

pub fn write_dataset(ds: &DailyDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let grid = ds.grid();
    let mv = ds.missing_value();
    let meta = DatasetMeta {
        n_lat: grid.n_lat(),
        n_lon: grid.n_lon(),
        lat: grid.lats().to_vec(),
        lon: grid.lons().to_vec(),
        calendar: ds.time().calendar().name().to_owned(),
        start: ds.time().start().to_string(),
        n_days: ds.n_days(),
        variable_name: ds.variable_name().to_owned(),
        units: ds.units().to_owned(),
        missing_value: (!mv.is_nan()).then_some(mv as f64),
    };
    write_json(&dir.join(META_FILE), &meta)?;
    write_f32_le(&dir.join(DATA_FILE), ds.values())
}

pub fn read_dataset(dir: impl AsRef<Path>) -> Result<DailyDataset> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let meta: DatasetMeta = read_json(&meta_path)?;
    if meta.lat.len() != meta.n_lat || meta.lon.len() != meta.n_lon {
        return Err(Error::corrupt(
            &meta_path,
            format!(
                "declared {}x{} grid but coordinate arrays have {} and {} entries",
                meta.n_lat,
                meta.n_lon,
                meta.lat.len(),
                meta.lon.len()
            ),
        ));
    }
    let calendar: CalendarKind = meta.calendar.parse()?;
    let start: Date = meta.start.parse()?;
    let grid = Grid::new(meta.lat, meta.lon)?;
    let time = TimeIndex::new(calendar, start, meta.n_days)?;

    let data_path = dir.join(DATA_FILE);
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    let expected = 4 * meta.n_days * grid.n_pixels();
    if bytes.len() != expected {
        return Err(Error::corrupt(
            &data_path,
            format!(
                "payload is {} bytes, meta declares {} days x {} pixels = {expected} bytes",
                bytes.len(),
                meta.n_days,
                grid.n_pixels()
            ),
        ));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let missing = meta.missing_value.map_or(f32::NAN, |v| v as f32);
    DailyDataset::new(grid, time, meta.variable_name, meta.units, missing, values)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::corrupt(path, e.to_string()))
}

fn write_f32_le(path: &Path, values: &[f32]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
