//! Constant-coefficient elliptic solves `a·φ − b·Δφ = g` on the periodic
//! grid, by diagonalizing the compact Laplacian in the discrete Fourier
//! basis.
//!
//! Both solver families in this crate reduce their implicit step to this
//! problem (`a = 1/Δt, b = β` for the semi-implicit flow, `a = η, b = r`
//! for the augmented-Lagrangian φ sub-problem), so the kernel lives here
//! once. With unit spacing the symbol of the Laplacian along an axis of
//! extent `M` is `2cos(2πk/M) − 2`, hence the denominator `a − b·σ ≥ a > 0`
//! and the solve is a pointwise division in frequency space.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// The problem `a·φ − b·Δφ = g`. `a > 0` keeps the zero mode invertible.
#[derive(Debug, Clone)]
pub struct HelmholtzProblem {
    mass: f64,
    diffusion: f64,
    rhs: ScalarField,
}

impl HelmholtzProblem {
    pub fn new(mass: f64, diffusion: f64, rhs: ScalarField) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::invalid(format!(
                "mass coefficient must be positive (zero mode is singular otherwise), got {mass}"
            )));
        }
        if !(diffusion >= 0.0) {
            return Err(Error::invalid(format!(
                "diffusion coefficient must be nonnegative, got {diffusion}"
            )));
        }
        Ok(HelmholtzProblem {
            mass,
            diffusion,
            rhs,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn rhs(&self) -> &ScalarField {
        &self.rhs
    }
}

/// Per-frequency eigenvalues of the compact periodic Laplacian:
/// `σ(k₁,…) = Σ_axes (2cos(2πk_a/M_a) − 2)`, all in `[−4·ndim, 0]`.
pub fn laplacian_symbol(grid: &Grid) -> ScalarField {
    let dims = grid.dims().to_vec();
    ScalarField::from_fn(grid, |idx| {
        idx.iter()
            .zip(&dims)
            .map(|(&k, &m)| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / m as f64).cos() - 2.0)
            .sum()
    })
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// In-place FFT of `data` along every grid axis. Unnormalized.
fn fft_all_axes(data: &mut [Complex<f64>], grid: &Grid, inverse: bool) {
    let dims = grid.dims().to_vec();
    let strides = grid.strides();
    for axis in 0..dims.len() {
        let n = dims[axis];
        let fft = plan(n, inverse);
        let stride = strides[axis];
        let outer = grid.len() / n;
        let mut line = vec![Complex::default(); n];
        for o in 0..outer {
            let mut base = 0;
            let mut rem = o;
            for k in (0..dims.len()).rev() {
                if k == axis {
                    continue;
                }
                base += (rem % dims[k]) * strides[k];
                rem /= dims[k];
            }
            for i in 0..n {
                line[i] = data[base + i * stride];
            }
            fft.process(&mut line);
            for i in 0..n {
                data[base + i * stride] = line[i];
            }
        }
    }
}

/// Solve `a·φ − b·Δφ = g` exactly (to roundoff) on the periodic grid.
pub fn solve_helmholtz(problem: &HelmholtzProblem) -> Result<ScalarField> {
    let grid = problem.rhs.grid().clone();
    let a = problem.mass;
    let b = problem.diffusion;

    let mut data: Vec<Complex<f64>> = problem
        .rhs
        .values()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    fft_all_axes(&mut data, &grid, false);

    let symbol = laplacian_symbol(&grid);
    for (c, &s) in data.iter_mut().zip(symbol.values()) {
        *c /= a - b * s;
    }

    fft_all_axes(&mut data, &grid, true);
    let scale = 1.0 / grid.len() as f64;
    let values = data.iter().map(|c| c.re * scale).collect();
    ScalarField::from_values(&grid, values)
}
