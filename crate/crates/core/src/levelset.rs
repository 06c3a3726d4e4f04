//! Level-set support machinery: the arctan-smoothed Heaviside and its
//! delta, signed-distance initialization, Hamilton-Jacobi reinitialization
//! and the windowed-mean stopping rule used by every solver.

use crate::error::{Error, Result};
use crate::grid::{gradient, Grid, ScalarField};

use std::f64::consts::PI;

/// Smoothing width of the regularized Heaviside/delta pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParam {
    epsilon: f64,
}

impl SmoothingParam {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(SmoothingParam { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The range the method is calibrated for; values outside still work
    /// but callers may want to warn.
    pub fn in_recommended_range(&self) -> bool {
        (0.5..=2.0).contains(&self.epsilon)
    }
}

/// `H_ε(x) = 1/2 + arctan(x/ε)/π`, valued in (0, 1).
pub fn smoothed_heaviside(phi: &ScalarField, eps: SmoothingParam) -> ScalarField {
    let e = eps.epsilon();
    phi.map(|x| 0.5 + (x / e).atan() / PI)
}

/// `δ_ε(x) = ε / (π(ε² + x²))`, the derivative of [`smoothed_heaviside`].
pub fn smoothed_delta(phi: &ScalarField, eps: SmoothingParam) -> ScalarField {
    let e = eps.epsilon();
    phi.map(|x| e / (PI * (e * e + x * x)))
}

#[inline]
pub(crate) fn delta_scalar(x: f64, eps: f64) -> f64 {
    eps / (PI * (eps * eps + x * x))
}

/// Signed distance to a sphere: `|x − center| − radius`, negative inside.
pub fn init_sphere(grid: &Grid, center: &[f64], radius: f64) -> Result<ScalarField> {
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    if center.len() != grid.ndim() {
        return Err(Error::invalid(format!(
            "center has {} coordinates for a {}-axis grid",
            center.len(),
            grid.ndim()
        )));
    }
    let center = center.to_vec();
    Ok(ScalarField::from_fn(grid, |idx| {
        let r2: f64 = idx
            .iter()
            .zip(&center)
            .map(|(&i, &c)| (i as f64 - c) * (i as f64 - c))
            .sum();
        r2.sqrt() - radius
    }))
}

/// Godunov upwind approximation of `|∇ψ|` for the reinitialization flow.
///
/// `s` is the (smoothed) sign at the node; information flows away from the
/// interface, so the scheme picks the one-sided differences accordingly.
fn godunov_gradient_mag(backward: &[f64], forward: &[f64], s: &[f64], out: &mut [f64]) {
    for i in 0..out.len() {
        let a = backward[i];
        let b = forward[i];
        let g2 = if s[i] > 0.0 {
            a.max(0.0).powi(2).max(b.min(0.0).powi(2))
        } else {
            a.min(0.0).powi(2).max(b.max(0.0).powi(2))
        };
        out[i] += g2;
    }
}

/// Restores the signed-distance property by `steps` pseudo-time iterations
/// of `ψ_τ = −sign(ψ)(|∇ψ| − 1)` with the smoothed sign `ψ/√(ψ² + 1)`,
/// Godunov upwinding and CFL time step 0.5. The zero level set stays put
/// up to the stencil width.
pub fn reinitialize(phi: &ScalarField, steps: usize) -> ScalarField {
    let grid = phi.grid().clone();
    let ndim = grid.ndim();
    let dt = 0.5;

    let mut psi = phi.clone();
    for _ in 0..steps {
        let sign: Vec<f64> = psi.values().iter().map(|&x| x / (x * x + 1.0).sqrt()).collect();

        let mut grad2 = vec![0.0; grid.len()];
        for axis in 0..ndim {
            let b = crate::grid::backward_diff(&psi, axis).expect("axis in range");
            let f = crate::grid::forward_diff(&psi, axis).expect("axis in range");
            godunov_gradient_mag(b.values(), f.values(), &sign, &mut grad2);
        }

        let vals = psi.values_mut();
        for i in 0..vals.len() {
            vals[i] -= dt * sign[i] * (grad2[i].sqrt() - 1.0);
        }
    }
    psi
}

/// Discrete integrand sum `Σ_nodes d^p · δ_ε(φ) · |∇φ|` with unit cell
/// volume. Shared by the energy and the semi-implicit front weight so the
/// two cannot drift apart.
pub(crate) fn weighted_area_sum(
    phi: &ScalarField,
    d: &ScalarField,
    eps: SmoothingParam,
    p: u32,
) -> f64 {
    let grad_mag = gradient(phi).magnitude();
    let e = eps.epsilon();
    let mut total = 0.0;
    for ((&x, &dv), &g) in phi
        .values()
        .iter()
        .zip(d.values())
        .zip(grad_mag.values())
    {
        total += dv.powi(p as i32) * delta_scalar(x, e) * g;
    }
    total
}

/// The weighted minimal surface energy
/// `E_p = (Σ d^p δ_ε(φ) |∇φ|)^{1/p}` for `p ∈ {1, 2}`.
pub fn energy(phi: &ScalarField, d: &ScalarField, eps: SmoothingParam, p: u32) -> Result<f64> {
    if p != 1 && p != 2 {
        return Err(Error::invalid(format!("energy exponent must be 1 or 2, got {p}")));
    }
    if phi.grid() != d.grid() {
        return Err(Error::invalid("phi and d must share a grid"));
    }
    let total = weighted_area_sum(phi, d, eps, p);
    Ok(if p == 1 { total } else { total.sqrt() })
}

/// Append-only energy trace with the windowed-mean stopping rule.
///
/// Let `ē_n` be the mean of the last `k + 1` energies ending at `n`. The
/// run has converged once `|ē_{n−1} − ē_n| / ē_n` drops below the
/// tolerance, which needs at least `k + 2` recorded values.
#[derive(Debug, Clone)]
pub struct EnergyHistory {
    values: Vec<f64>,
    window: usize,
}

impl EnergyHistory {
    pub const DEFAULT_WINDOW: usize = 10;

    pub fn new(window: usize) -> Result<Self> {
        if window < 1 {
            return Err(Error::invalid("window length must be at least 1"));
        }
        Ok(EnergyHistory {
            values: Vec::new(),
            window,
        })
    }

    pub fn push(&mut self, e: f64) {
        debug_assert!(e.is_finite() && e >= 0.0, "energy must be finite and nonnegative");
        self.values.push(e);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    fn mean_ending_at(&self, n: usize) -> f64 {
        let lo = n - self.window;
        let slice = &self.values[lo..=n];
        slice.iter().sum::<f64>() / slice.len() as f64
    }

    /// True once the relative change of the windowed mean is below `tol`.
    /// A vanished mean counts as converged (the energy ran out).
    pub fn converged(&self, tol: f64) -> bool {
        let n = match self.values.len() {
            0 => return false,
            l => l - 1,
        };
        if n < self.window + 1 {
            return false;
        }
        let prev = self.mean_ending_at(n - 1);
        let cur = self.mean_ending_at(n);
        if cur == 0.0 {
            return true;
        }
        (prev - cur).abs() / cur < tol
    }
}

/// Freestanding form of the stopping rule.
pub fn check_convergence(history: &EnergyHistory, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(history.converged(tol))
}
