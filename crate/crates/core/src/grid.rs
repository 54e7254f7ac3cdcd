//! Regular latitude/longitude raster and its pixel topology.

use std::fmt;

use crate::error::{Error, Result};

/// Coordinate tolerance (degrees) used when matching grids or points.
pub const COORD_TOLERANCE_DEG: f64 = 1e-6;

/// Rectilinear grid. Pixels are numbered row-major with latitude rows
/// outermost: `pixel = row * n_lon + col`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lat: Vec<f64>,
    lon: Vec<f64>,
}

impl Grid {
    pub fn new(lat: Vec<f64>, lon: Vec<f64>) -> Result<Self> {
        check_axis("lat", &lat)?;
        check_axis("lon", &lon)?;
        Ok(Grid { lat, lon })
    }

    /// Uniformly spaced grid from origins and steps.
    pub fn regular(lat0: f64, dlat: f64, n_lat: usize, lon0: f64, dlon: f64, n_lon: usize) -> Result<Self> {
        let lat = (0..n_lat).map(|i| lat0 + dlat * i as f64).collect();
        let lon = (0..n_lon).map(|j| lon0 + dlon * j as f64).collect();
        Grid::new(lat, lon)
    }

    pub fn n_lat(&self) -> usize {
        self.lat.len()
    }

    pub fn n_lon(&self) -> usize {
        self.lon.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.lat.len() * self.lon.len()
    }

    pub fn lats(&self) -> &[f64] {
        &self.lat
    }

    pub fn lons(&self) -> &[f64] {
        &self.lon
    }

    pub fn lat_of(&self, row: usize) -> f64 {
        self.lat[row]
    }

    pub fn lon_of(&self, col: usize) -> f64 {
        self.lon[col]
    }

    pub fn pixel(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.n_lat() && col < self.n_lon());
        row * self.n_lon() + col
    }

    pub fn row_col(&self, pixel: usize) -> (usize, usize) {
        (pixel / self.n_lon(), pixel % self.n_lon())
    }

    /// (lat, lon) of a pixel centre.
    pub fn coords(&self, pixel: usize) -> (f64, f64) {
        let (r, c) = self.row_col(pixel);
        (self.lat[r], self.lon[c])
    }

    pub fn check_pixel(&self, pixel: usize) -> Result<()> {
        if pixel >= self.n_pixels() {
            Err(Error::invalid(format!(
                "pixel {pixel} out of range for {self}"
            )))
        } else {
            Ok(())
        }
    }

    /// Row index whose latitude matches `lat` within [`COORD_TOLERANCE_DEG`].
    pub fn find_row(&self, lat: f64) -> Option<usize> {
        find_coord(&self.lat, lat)
    }

    /// Column index whose longitude matches `lon` within [`COORD_TOLERANCE_DEG`].
    pub fn find_col(&self, lon: f64) -> Option<usize> {
        find_coord(&self.lon, lon)
    }

    /// Same shape and coordinates within [`COORD_TOLERANCE_DEG`].
    pub fn matches(&self, other: &Grid) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(x, y)| (x - y).abs() <= COORD_TOLERANCE_DEG)
        };
        close(&self.lat, &other.lat) && close(&self.lon, &other.lon)
    }

    pub fn ensure_matches(&self, other: &Grid, what: &str) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "grid mismatch ({what}): {self} vs {other}"
            )))
        }
    }

    /// The pixel itself plus its on-grid Chebyshev-distance-1 neighbours,
    /// ascending by pixel index.
    pub fn tile_neighbors(&self, pixel: usize) -> Result<Vec<usize>> {
        self.check_pixel(pixel)?;
        let mut out = Vec::with_capacity(9);
        self.for_each_tile_pixel(pixel, |p| out.push(p));
        Ok(out)
    }

    /// Visits the tile of an in-range pixel in ascending order.
    pub(crate) fn for_each_tile_pixel(&self, pixel: usize, mut f: impl FnMut(usize)) {
        let (r, c) = self.row_col(pixel);
        let r0 = r.saturating_sub(1);
        let r1 = (r + 1).min(self.n_lat() - 1);
        let c0 = c.saturating_sub(1);
        let c1 = (c + 1).min(self.n_lon() - 1);
        for rr in r0..=r1 {
            for cc in c0..=c1 {
                f(self.pixel(rr, cc));
            }
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} grid (lat {}..{}, lon {}..{})",
            self.n_lat(),
            self.n_lon(),
            self.lat[0],
            self.lat[self.lat.len() - 1],
            self.lon[0],
            self.lon[self.lon.len() - 1]
        )
    }
}

/// Free-function form of [`Grid::tile_neighbors`].
pub fn tile_neighbors(grid: &Grid, pixel: usize) -> Result<Vec<usize>> {
    grid.tile_neighbors(pixel)
}

fn check_axis(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(format!("{name} axis is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{name} axis has non-finite coordinates")));
    }
    if v.len() > 1 {
        let inc = v.windows(2).all(|w| w[1] > w[0]);
        let dec = v.windows(2).all(|w| w[1] < w[0]);
        if !inc && !dec {
            return Err(Error::invalid(format!(
                "{name} coordinates must be strictly monotone"
            )));
        }
    }
    Ok(())
}

fn find_coord(axis: &[f64], x: f64) -> Option<usize> {
    axis.iter().position(|a| (a - x).abs() <= COORD_TOLERANCE_DEG)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n_lat: usize, n_lon: usize) -> Grid {
        Grid::regular(30.0, 0.2, n_lat, -100.0, 0.2, n_lon).unwrap()
    }

    // Brute-force Chebyshev enumeration over every pixel.
    fn oracle(g: &Grid, p: usize) -> Vec<usize> {
        let (r, c) = g.row_col(p);
        (0..g.n_pixels())
            .filter(|&q| {
                let (rq, cq) = g.row_col(q);
                (rq as i64 - r as i64).abs() <= 1 && (cq as i64 - c as i64).abs() <= 1
            })
            .collect()
    }

    #[test]
    fn centre_tile() {
        let g = grid(5, 5);
        assert_eq!(
            tile_neighbors(&g, 12).unwrap(),
            vec![6, 7, 8, 11, 12, 13, 16, 17, 18]
        );
    }

    #[test]
    fn corner_and_edge_tiles() {
        let g = grid(5, 5);
        assert_eq!(tile_neighbors(&g, 0).unwrap(), vec![0, 1, 5, 6]);
        assert_eq!(tile_neighbors(&g, 2).unwrap().len(), 6);
        for p in 0..25 {
            assert_eq!(tile_neighbors(&g, p).unwrap(), oracle(&g, p));
        }
    }

    #[test]
    fn single_pixel_grid() {
        let g = grid(1, 1);
        assert_eq!(tile_neighbors(&g, 0).unwrap(), vec![0]);
        assert!(tile_neighbors(&g, 1).is_err());
    }

    #[test]
    fn axis_validation() {
        assert!(Grid::new(vec![], vec![1.0]).is_err());
        assert!(Grid::new(vec![1.0, 1.0], vec![1.0]).is_err());
        assert!(Grid::new(vec![1.0, 2.0, 1.5], vec![1.0]).is_err());
        assert!(Grid::new(vec![3.0, 2.0, 1.0], vec![1.0]).is_ok());
        assert!(Grid::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn pixel_roundtrip_and_lookup() {
        let g = grid(4, 7);
        for p in 0..g.n_pixels() {
            let (r, c) = g.row_col(p);
            assert_eq!(g.pixel(r, c), p);
        }
        assert_eq!(g.find_row(30.4 + 5e-7), Some(2));
        assert_eq!(g.find_row(30.4 + 5e-6), None);
    }
}
