use std::path::Path;

use serde::Serialize;

use crate::datastore::{csv_error, RegionTable};
use crate::error::{Error, Result};
use crate::grid::Grid;

use super::{csv_num, BiasField, Summary};

/// Region id of every pixel, plus the table it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionAssignment {
    grid: Grid,
    table: RegionTable,
    region_ids: Vec<i64>,
}

impl RegionAssignment {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn table(&self) -> &RegionTable {
        &self.table
    }

    pub fn region_ids(&self) -> &[i64] {
        &self.region_ids
    }

    pub fn region_of(&self, pixel: usize) -> i64 {
        self.region_ids[pixel]
    }
}

/// Nearest centroid in raw (lat, lon) degree space; ties go to the smaller id.
pub fn assign_regions(grid: &Grid, table: &RegionTable) -> RegionAssignment {
    let region_ids = (0..grid.n_pixels())
        .map(|p| {
            let (lat, lon) = grid.coords(p);
            table
                .regions()
                .iter()
                .map(|r| {
                    let dl = lat - r.centroid_lat;
                    let dn = lon - r.centroid_lon;
                    (dl * dl + dn * dn, r.region_id)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .expect("region table is nonempty")
                .1
        })
        .collect();
    RegionAssignment {
        grid: grid.clone(),
        table: table.clone(),
        region_ids,
    }
}

/// Summary of a field's present pixels within one region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionStats {
    pub region_id: i64,
    pub region_name: String,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-region statistics in region-table order. Regions without present
/// pixels get `count = 0` and `NaN` statistics.
pub fn region_summary(field: &BiasField, assignment: &RegionAssignment) -> Result<Vec<RegionStats>> {
    field.grid().ensure_matches(assignment.grid(), "field vs region assignment")?;
    Ok(assignment
        .table()
        .regions()
        .iter()
        .map(|r| {
            let vals: Vec<f64> = (0..field.values().len())
                .filter(|&p| assignment.region_of(p) == r.region_id)
                .filter_map(|p| field.get(p))
                .collect();
            let s = Summary::of(vals);
            RegionStats {
                region_id: r.region_id,
                region_name: r.region_name.clone(),
                count: s.count,
                mean: s.mean,
                median: s.median,
                q25: s.q25,
                q75: s.q75,
                min: s.min,
                max: s.max,
            }
        })
        .collect())
}

/// Writes `region_id,region_name,count,mean,median,q25,q75,min,max`.
pub fn write_region_summary_csv(rows: &[RegionStats], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["region_id", "region_name", "count", "mean", "median", "q25", "q75", "min", "max"])
        .map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.region_id.to_string(),
            r.region_name.clone(),
            r.count.to_string(),
            csv_num(r.mean),
            csv_num(r.median),
            csv_num(r.q25),
            csv_num(r.q75),
            csv_num(r.min),
            csv_num(r.max),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
