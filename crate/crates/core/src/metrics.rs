//! Accuracy metrics for reconstructed zero sets.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::extract::ZeroSet;
use crate::grid::ScalarField;

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn directed_max(from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in from {
        let mut best = f64::INFINITY;
        for q in to {
            best = best.min(dist_sq(p, q));
        }
        worst = worst.max(best);
    }
    worst.sqrt()
}

/// Symmetric Hausdorff distance between two point sets, in grid cells.
pub fn hausdorff_between(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("hausdorff distance of an empty set"));
    }
    Ok(directed_max(a, b).max(directed_max(b, a)))
}

/// Hausdorff distance between the extracted zero set's vertices and the
/// cloud: the larger of the two directed nearest-neighbor maxima.
/// An empty zero set is an error (the reconstruction vanished).
pub fn hausdorff_to_cloud(zero_set: &ZeroSet, cloud: &PointCloud) -> Result<f64> {
    if zero_set.is_empty() {
        return Err(Error::numerical("zero set is empty; the reconstruction vanished"));
    }
    let verts = zero_set.vertex_rows();
    let pts: Vec<Vec<f64>> = cloud.iter().map(|p| p.to_vec()).collect();
    hausdorff_between(&verts, &pts)
}

/// Number of interior (`φ < 0`) nodes; a unit-cell proxy for the enclosed
/// area/volume used by the degeneration experiments.
pub fn interior_node_count(phi: &ScalarField) -> usize {
    phi.values().iter().filter(|&&v| v < 0.0).count()
}
