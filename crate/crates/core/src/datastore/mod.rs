//! On-disk formats: dataset directories, CSV import, region tables and
//! fitted model files. All binary payloads are little-endian.

mod csv_import;
mod dataset_file;
mod model_file;
mod region_table;

use std::path::Path;

use crate::error::Error;

pub use csv_import::import_csv;
pub use dataset_file::{read_dataset, write_dataset, DATA_FILE, META_FILE};
pub use model_file::{read_model, write_model, KNOTS_FILE};
pub use region_table::{read_region_table, write_region_table, Region, RegionTable};

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::io(path, io);
        }
        return Error::invalid(format!("{}: csv I/O error", path.display()));
    }
    Error::invalid(format!("{}: {e}", path.display()))
}
