use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csv_error;
use crate::error::{Error, Result};

/// One climate region and its centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub region_id: i64,
    pub region_name: String,
    pub centroid_lat: f64,
    pub centroid_lon: f64,
}

/// Nonempty list of regions with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    regions: Vec<Region>,
}

impl RegionTable {
    pub fn new(regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::invalid("region table is empty"));
        }
        let mut ids = HashSet::new();
        for r in &regions {
            if !ids.insert(r.region_id) {
                return Err(Error::invalid(format!("duplicate region_id {}", r.region_id)));
            }
            if !r.centroid_lat.is_finite() || !r.centroid_lon.is_finite() {
                return Err(Error::invalid(format!(
                    "region {} has a non-finite centroid",
                    r.region_id
                )));
            }
        }
        Ok(RegionTable { regions })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn get(&self, region_id: i64) -> Option<&Region> {
        self.regions.iter().find(|r| r.region_id == region_id)
    }
}

/// Reads a `region_id,region_name,centroid_lat,centroid_lon` CSV.
pub fn read_region_table(path: impl AsRef<Path>) -> Result<RegionTable> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let regions = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<Region>, _>>()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    RegionTable::new(regions)
}

pub fn write_region_table(table: &RegionTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in table.regions() {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
