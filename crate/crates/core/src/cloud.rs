//! Unorganized point sets in the grid's coordinate frame.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A list of 2-D or 3-D points, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from flat coordinates (`dim` values per point).
    ///
    /// The cloud must be nonempty and finite. Containment in a particular
    /// grid is checked separately by [`PointCloud::check_in_grid`], since
    /// clouds read from files exist before any grid does.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim < 2 || dim > 3 {
            return Err(Error::invalid(format!("points must be 2-D or 3-D, got {dim}-D")));
        }
        if coords.is_empty() {
            return Err(Error::invalid("point cloud must be nonempty"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "coordinate count {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("all points must have the same dimension"));
        }
        PointCloud::new(dim, points.iter().flatten().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Every point must lie inside the grid's node bounding box
    /// `[0, dim_k − 1]` per axis.
    pub fn check_in_grid(&self, grid: &Grid) -> Result<()> {
        if self.dim != grid.ndim() {
            return Err(Error::invalid(format!(
                "cloud is {}-D but grid has {} axes",
                self.dim,
                grid.ndim()
            )));
        }
        for (i, p) in self.iter().enumerate() {
            for (k, (&x, &n)) in p.iter().zip(grid.dims()).enumerate() {
                if x < 0.0 || x > (n - 1) as f64 {
                    return Err(Error::invalid(format!(
                        "point {i} coordinate {k} = {x} outside grid extent [0, {}]",
                        n - 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Nearest squared distance from `x` to the cloud.
    pub fn nearest_sq(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut best = f64::INFINITY;
        for p in self.iter() {
            let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best {
                best = d2;
            }
        }
        best
    }
}
