//! Semi-implicit minimization of the quadratically weighted surface
//! energy.
//!
//! The gradient flow moves the level set by the weighted curvature
//! transport `∇·[d² ∇φ/|∇φ|]`, scaled by a front weight that normalizes
//! by the current energy. Treating an added diffusion `−βΔφ` implicitly
//! turns each step into a Helmholtz solve and lifts the explicit CFL
//! restriction, which is what permits time steps like 500.

use std::time::Instant;

use crate::distance::DistanceField;
use crate::error::{Error, Result};
use crate::grid::{divergence, gradient, Grid, ScalarField, VectorField};
use crate::levelset::{
    energy, reinitialize, smoothed_delta, weighted_area_sum, EnergyHistory, SmoothingParam,
};
use crate::report::RunReport;
use crate::spectral::{solve_helmholtz, HelmholtzProblem};
use crate::PointCloud;

/// Parameters of the semi-implicit flow.
#[derive(Debug, Clone)]
pub struct SimParams {
    /// Time step; the implicit treatment keeps 500 stable.
    pub dt: f64,
    /// Stabilizing diffusion added to both sides.
    pub beta: f64,
    pub eps: SmoothingParam,
    /// Floor for `|∇φ|` where the transport divides by it.
    pub grad_floor: f64,
    pub max_iters: usize,
    /// Stopping-rule window length.
    pub window: usize,
    /// Stopping-rule relative tolerance.
    pub tol: f64,
    /// Reinitialization steps applied after each iteration.
    pub reinit_steps: usize,
}

impl SimParams {
    /// Defaults for planar clouds: Δt = 500, β = 0.1.
    pub fn default_2d() -> Self {
        SimParams {
            dt: 500.0,
            beta: 0.1,
            eps: SmoothingParam::new(1.0).expect("positive"),
            grad_floor: 1e-8,
            max_iters: 2000,
            window: EnergyHistory::DEFAULT_WINDOW,
            tol: 1e-4,
            reinit_steps: 10,
        }
    }

    /// Defaults for volumetric clouds: the stabilizer drops to β = 0.01.
    pub fn default_3d() -> Self {
        SimParams {
            beta: 0.01,
            eps: SmoothingParam::new(0.5).expect("positive"),
            ..SimParams::default_2d()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(self.beta > 0.0) {
            return Err(Error::invalid("beta must be positive"));
        }
        if !(self.grad_floor > 0.0) {
            return Err(Error::invalid("grad_floor must be positive"));
        }
        Ok(())
    }
}

/// `∇·[d² ∇φ/|∇φ|]` with the gradient magnitude regularized as
/// `√(|∇φ|² + floor²)`.
pub fn curvature_transport(d: &ScalarField, phi: &ScalarField, grad_floor: f64) -> ScalarField {
    assert_eq!(d.grid(), phi.grid(), "fields must share a grid");
    let grad = gradient(phi);
    let mag = grad.magnitude();
    let mut flux_components = Vec::with_capacity(grad.components().len());
    for c in grad.components() {
        let mut flux = c.clone();
        for (f, (&dv, &m)) in flux
            .values_mut()
            .iter_mut()
            .zip(d.values().iter().zip(mag.values()))
        {
            let reg = (m * m + grad_floor * grad_floor).sqrt();
            *f = dv * dv * *f / reg;
        }
        flux_components.push(flux);
    }
    let flux = VectorField::new(flux_components).expect("components share the grid");
    divergence(&flux)
}

/// Front weight `½ δ_ε(φ) / √(Σ d² δ_ε(φ)|∇φ|)`.
///
/// Errors when the weighted area sum underflows to zero: the energy has
/// vanished and the flow has nothing left to normalize by.
pub fn f_coefficient(
    d: &ScalarField,
    phi: &ScalarField,
    eps: SmoothingParam,
) -> Result<ScalarField> {
    let s = weighted_area_sum(phi, d, eps, 2);
    if s <= 0.0 {
        return Err(Error::numerical(
            "weighted area integral vanished; energy is already zero",
        ));
    }
    let scale = 0.5 / s.sqrt();
    Ok(smoothed_delta(phi, eps).scale(scale))
}

/// The forcing `f(d, φ)·∇·[d² ∇φ/|∇φ|]`, zero when the energy vanished.
fn forcing(d: &ScalarField, phi: &ScalarField, params: &SimParams) -> ScalarField {
    match f_coefficient(d, phi, params.eps) {
        Ok(f) => {
            let transport = curvature_transport(d, phi, params.grad_floor);
            f.zip_with(&transport, |a, b| a * b)
        }
        // Vanished energy: the flow is stationary.
        Err(_) => ScalarField::zeros(phi.grid()),
    }
}

/// One semi-implicit update: solve
/// `φ/Δt − βΔφ = φⁿ/Δt − βΔφⁿ + f·∇·[d²∇φⁿ/|∇φⁿ|]`.
pub fn sim_step(phi_n: &ScalarField, d: &ScalarField, params: &SimParams) -> Result<ScalarField> {
    params.validate()?;
    let rhs = phi_n
        .scale(1.0 / params.dt)
        .sub(&crate::grid::laplacian(phi_n).scale(params.beta))
        .add(&forcing(d, phi_n, params));
    let problem = HelmholtzProblem::new(1.0 / params.dt, params.beta, rhs)?;
    let next = solve_helmholtz(&problem)?;
    if !next.is_finite() {
        return Err(Error::numerical("semi-implicit step produced non-finite values"));
    }
    Ok(next)
}

/// Per-iteration view handed to instrumentation hooks.
pub struct SimSnapshot<'a> {
    pub iteration: usize,
    pub phi: &'a ScalarField,
    pub energy: f64,
}

/// Runs the flow until the windowed stopping rule fires or the iteration
/// cap is reached (reported as `converged = false`, not an error).
pub fn run_sim(
    cloud: &PointCloud,
    grid: &Grid,
    init: &ScalarField,
    params: &SimParams,
) -> Result<RunReport> {
    let d = DistanceField::compute(cloud, grid)?;
    run_sim_with(d.field(), init, params, |_| {})
}

/// As [`run_sim`] but with a precomputed distance field and a hook called
/// once per iteration, after the step and before reinitialization.
pub fn run_sim_with(
    d: &ScalarField,
    init: &ScalarField,
    params: &SimParams,
    mut hook: impl FnMut(&SimSnapshot),
) -> Result<RunReport> {
    params.validate()?;
    if !init.is_finite() {
        return Err(Error::invalid("initial field must be finite"));
    }
    let start = Instant::now();
    let mut history = EnergyHistory::new(params.window)?;
    let mut phi = init.clone();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=params.max_iters {
        phi = sim_step(&phi, d, params)?;
        let e = energy(&phi, d, params.eps, 2)?;
        history.push(e);
        iterations = iter;
        hook(&SimSnapshot {
            iteration: iter,
            phi: &phi,
            energy: e,
        });
        if history.converged(params.tol) {
            converged = true;
            break;
        }
        phi = reinitialize(&phi, params.reinit_steps);
    }

    Ok(RunReport {
        converged,
        iterations,
        wall_seconds: start.elapsed().as_secs_f64(),
        energy_history: history.values().to_vec(),
        hausdorff_to_cloud: None,
        final_phi: phi,
        failure: None,
    })
}
