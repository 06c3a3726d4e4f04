//! Unsigned distance to a point cloud on the grid, via Lax-Friedrichs
//! fast sweeping for the Eikonal equation `|∇d| = 1, d = 0 on the data`.
//!
//! The update at a node with unit spacing is
//!
//! `d ← (1/m) · (1 − |∇d| + Σ_axes (d₊ + d₋)/2)`
//!
//! taken as a monotone min with the current value, swept Gauss-Seidel
//! style over all `2^m` axis orderings until the field stops changing.
//! Distance to a cloud is not periodic, so unlike every other kernel in
//! this crate the sweeps clamp neighbor reads at the physical boundary
//! instead of wrapping.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// Convergence threshold for a full sweep cycle.
const SWEEP_TOL: f64 = 1e-6;
/// Hard cap on full sweep cycles before giving up.
const SWEEP_CAP: usize = 500;

/// Distance field together with the cloud that generated it. Computed once
/// per reconstruction run; the solvers only ever read it.
#[derive(Debug, Clone)]
pub struct DistanceField {
    d: ScalarField,
    sources: PointCloud,
}

impl DistanceField {
    pub fn compute(cloud: &PointCloud, grid: &Grid) -> Result<Self> {
        let seed = rasterize_sources(cloud, grid)?;
        let d = fast_sweep(&seed)?;
        Ok(DistanceField {
            d,
            sources: cloud.clone(),
        })
    }

    pub fn field(&self) -> &ScalarField {
        &self.d
    }

    pub fn sources(&self) -> &PointCloud {
        &self.sources
    }
}

/// Seeds the sweep: each cloud point stamps the `2^m` corner nodes of its
/// containing cell with the exact Euclidean distance to the point; every
/// other node starts at the sentinel (the grid diameter).
pub fn rasterize_sources(cloud: &PointCloud, grid: &Grid) -> Result<ScalarField> {
    cloud.check_in_grid(grid)?;
    let m = grid.ndim();
    let dims = grid.dims().to_vec();
    let sentinel = grid.diameter();
    let mut field = ScalarField::constant(grid, sentinel);

    let mut base = vec![0usize; m];
    for p in cloud.iter() {
        for k in 0..m {
            // Containing cell, clamped so corner base+1 stays on the grid.
            base[k] = (p[k].floor() as usize).min(dims[k] - 2);
        }
        for corner in 0..(1usize << m) {
            let mut idx = vec![0usize; m];
            let mut dist2 = 0.0;
            for k in 0..m {
                idx[k] = base[k] + ((corner >> k) & 1);
                let dx = idx[k] as f64 - p[k];
                dist2 += dx * dx;
            }
            let flat = grid.index(&idx);
            let v = &mut field.values_mut()[flat];
            *v = v.min(dist2.sqrt());
        }
    }
    Ok(field)
}

/// Exact nodewise distance, `O(nodes × points)`. The oracle for the sweep.
pub fn brute_force_distance(cloud: &PointCloud, grid: &Grid) -> Result<ScalarField> {
    cloud.check_in_grid(grid)?;
    let mut pos = vec![0.0; grid.ndim()];
    Ok(ScalarField::from_fn(grid, |idx| {
        for (x, &i) in pos.iter_mut().zip(idx) {
            *x = i as f64;
        }
        cloud.nearest_sq(&pos).sqrt()
    }))
}

/// Neighbor read with linear extrapolation past the physical boundary:
/// the ghost value `2·d(edge) − d(interior)` turns the centered stencil
/// into a one-sided difference at the boundary.
#[inline]
fn ghost_read(vals: &[f64], line_base: usize, i: usize, dir: isize, n: usize, stride: usize) -> f64 {
    if dir < 0 {
        if i == 0 {
            2.0 * vals[line_base] - vals[line_base + stride]
        } else {
            vals[line_base + (i - 1) * stride]
        }
    } else if i == n - 1 {
        2.0 * vals[line_base + (n - 1) * stride] - vals[line_base + (n - 2) * stride]
    } else {
        vals[line_base + (i + 1) * stride]
    }
}

/// Runs Lax-Friedrichs fast sweeping from a seeded field.
///
/// Nodes strictly below the sentinel in the seed are treated as sources
/// and never move; everything else is repeatedly relaxed by the update
/// formula, monotonically non-increasing, until the largest nodewise
/// change over a full cycle of `2^m` sweeps drops below `1e-6`.
pub fn fast_sweep(seed: &ScalarField) -> Result<ScalarField> {
    let grid = seed.grid().clone();
    let m = grid.ndim();
    let dims = grid.dims().to_vec();
    let strides = grid.strides();
    let sentinel = grid.diameter();

    let frozen: Vec<bool> = seed
        .values()
        .iter()
        .map(|&v| v < sentinel * (1.0 - 1e-12))
        .collect();
    if !frozen.iter().any(|&f| f) {
        return Err(Error::invalid("seed has no node below the sentinel"));
    }

    let mut d = seed.clone();
    let inv_m = 1.0 / m as f64;

    // One LF relaxation of node `idx`/`flat`; returns the decrease applied.
    let relax = |vals: &mut [f64], idx: &[usize], flat: usize| -> f64 {
        let mut grad2 = 0.0;
        let mut neighbor_avg_sum = 0.0;
        for k in 0..m {
            let line_base = flat - idx[k] * strides[k];
            let up = ghost_read(vals, line_base, idx[k], 1, dims[k], strides[k]);
            let dn = ghost_read(vals, line_base, idx[k], -1, dims[k], strides[k]);
            let g = 0.5 * (up - dn);
            grad2 += g * g;
            neighbor_avg_sum += 0.5 * (up + dn);
        }
        let candidate = inv_m * (1.0 - grad2.sqrt() + neighbor_avg_sum);
        let old = vals[flat];
        if candidate < old {
            vals[flat] = candidate;
            old - candidate
        } else {
            0.0
        }
    };

    let axis_order = |k: usize, ascending: bool| -> Vec<usize> {
        if ascending {
            (0..dims[k]).collect()
        } else {
            (0..dims[k]).rev().collect()
        }
    };

    for _cycle in 0..SWEEP_CAP {
        let mut max_change = 0.0f64;
        for ordering in 0..(1usize << m) {
            let orders: Vec<Vec<usize>> = (0..m)
                .map(|k| axis_order(k, (ordering >> k) & 1 == 0))
                .collect();
            if m == 2 {
                for &i in &orders[0] {
                    for &j in &orders[1] {
                        let flat = i * strides[0] + j;
                        if !frozen[flat] {
                            let c = relax(d.values_mut(), &[i, j], flat);
                            max_change = max_change.max(c);
                        }
                    }
                }
            } else {
                for &i in &orders[0] {
                    for &j in &orders[1] {
                        for &l in &orders[2] {
                            let flat = i * strides[0] + j * strides[1] + l;
                            if !frozen[flat] {
                                let c = relax(d.values_mut(), &[i, j, l], flat);
                                max_change = max_change.max(c);
                            }
                        }
                    }
                }
            }
        }
        if max_change < SWEEP_TOL {
            return Ok(d);
        }
    }
    Err(Error::Numerical {
        reason: format!("fast sweeping did not converge within {SWEEP_CAP} cycles"),
        residual: Some(sweep_residual(&d, &frozen)),
        iteration: Some(SWEEP_CAP),
    })
}

/// Largest decrease one more cycle would apply; diagnostic for failures.
fn sweep_residual(d: &ScalarField, frozen: &[bool]) -> f64 {
    let grid = d.grid();
    let m = grid.ndim();
    let dims = grid.dims().to_vec();
    let strides = grid.strides();
    let vals = d.values();
    let mut worst = 0.0f64;
    for flat in 0..grid.len() {
        if frozen[flat] {
            continue;
        }
        let idx = grid.multi_index(flat);
        let mut grad2 = 0.0;
        let mut avg = 0.0;
        for k in 0..m {
            let line_base = flat - idx[k] * strides[k];
            let up = ghost_read(vals, line_base, idx[k], 1, dims[k], strides[k]);
            let dn = ghost_read(vals, line_base, idx[k], -1, dims[k], strides[k]);
            let g = 0.5 * (up - dn);
            grad2 += g * g;
            avg += 0.5 * (up + dn);
        }
        let candidate = (1.0 - grad2.sqrt() + avg) / m as f64;
        worst = worst.max(vals[flat] - candidate);
    }
    worst
}
