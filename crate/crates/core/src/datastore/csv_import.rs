use std::path::Path;

use super::csv_error;
use crate::calendar::{Date, TimeIndex};
use crate::dataset::DailyDataset;
use crate::error::{Error, Result};
use crate::grid::Grid;

enum Layout {
    PixelId { date: usize, pixel: usize, value: usize },
    LatLon { date: usize, lat: usize, lon: usize, value: usize },
}

/// Reads long-format CSV rows into a dense dataset.
///
/// Accepted headers are `date,pixel_id,value` or `date,lat,lon,value` (any
/// column order). Coordinates must match a grid coordinate within 1e-6
/// degrees. Cells without a row, and rows with an empty or `NaN` value, are
/// missing (`NaN`). Repeated rows for a cell must carry identical values.
pub fn import_csv(
    path: impl AsRef<Path>,
    grid: &Grid,
    time: &TimeIndex,
    variable_name: &str,
    units: &str,
) -> Result<DailyDataset> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let layout = match (col("date"), col("pixel_id"), col("lat"), col("lon"), col("value")) {
        (Some(date), Some(pixel), _, _, Some(value)) => Layout::PixelId { date, pixel, value },
        (Some(date), None, Some(lat), Some(lon), Some(value)) => Layout::LatLon { date, lat, lon, value },
        _ => {
            return Err(Error::invalid(format!(
                "{}: header must be date,pixel_id,value or date,lat,lon,value",
                path.display()
            )))
        }
    };

    let n_pix = grid.n_pixels();
    let mut values = vec![f32::NAN; n_pix * time.n_days()];
    let mut seen = vec![false; values.len()];
    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = row_no + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |what: &str| Error::invalid(format!("{}:{line}: {what}", path.display()));

        let (date_col, value_col, pixel) = match layout {
            Layout::PixelId { date, pixel, value } => {
                let p: usize = field(pixel).parse().map_err(|_| bad("bad pixel_id"))?;
                if p >= n_pix {
                    return Err(bad(&format!("pixel_id {p} outside {grid}")));
                }
                (date, value, p)
            }
            Layout::LatLon { date, lat, lon, value } => {
                let la: f64 = field(lat).parse().map_err(|_| bad("bad lat"))?;
                let lo: f64 = field(lon).parse().map_err(|_| bad("bad lon"))?;
                let r = grid
                    .find_row(la)
                    .ok_or_else(|| bad(&format!("lat {la} matches no grid row")))?;
                let c = grid
                    .find_col(lo)
                    .ok_or_else(|| bad(&format!("lon {lo} matches no grid column")))?;
                (date, value, grid.pixel(r, c))
            }
        };
        let date: Date = field(date_col).parse().map_err(|_| bad("bad date"))?;
        let day = time.index_of(date).ok_or_else(|| {
            bad(&format!(
                "date {date} outside time index {}..{} ({})",
                time.start(),
                time.end(),
                time.calendar()
            ))
        })?;
        let raw = field(value_col);
        let v: f32 = if raw.is_empty() {
            f32::NAN
        } else {
            raw.parse().map_err(|_| bad("bad value"))?
        };

        let i = day * n_pix + pixel;
        if seen[i] {
            let prev = values[i];
            let same = prev.to_bits() == v.to_bits() || (prev.is_nan() && v.is_nan());
            if !same {
                return Err(bad(&format!(
                    "conflicting duplicate for {date}, pixel {pixel}: {prev} vs {v}"
                )));
            }
        }
        seen[i] = true;
        values[i] = v;
    }
    DailyDataset::new(grid.clone(), time.clone(), variable_name, units, f32::NAN, values)
}
