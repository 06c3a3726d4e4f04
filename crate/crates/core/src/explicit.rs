//! Forward-Euler baseline for the weighted curvature flow, for run-time
//! and stability comparisons against the implicit solvers.
//!
//! Same forcing as the semi-implicit scheme (shared code path), no
//! stabilizer, integrated explicitly. Stable only for small time steps;
//! the runner flags a blow-up (non-finite values or the field leaving
//! twice the grid diameter) as an instability failure in the report.

use std::time::Instant;

use crate::distance::DistanceField;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::levelset::{energy, reinitialize, EnergyHistory, SmoothingParam};
use crate::report::RunReport;
use crate::sim::{curvature_transport, f_coefficient};
use crate::PointCloud;

#[derive(Debug, Clone)]
pub struct ExplicitParams {
    pub dt: f64,
    pub eps: SmoothingParam,
    pub grad_floor: f64,
    pub max_iters: usize,
    pub window: usize,
    pub tol: f64,
    pub reinit_steps: usize,
}

impl ExplicitParams {
    pub fn defaults() -> Self {
        ExplicitParams {
            dt: 20.0,
            eps: SmoothingParam::new(1.0).expect("positive"),
            grad_floor: 1e-8,
            max_iters: 20000,
            window: EnergyHistory::DEFAULT_WINDOW,
            tol: 1e-4,
            reinit_steps: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(self.grad_floor > 0.0) {
            return Err(Error::invalid("grad_floor must be positive"));
        }
        Ok(())
    }
}

/// One forward-Euler update `φ + Δt·f·∇·[d²∇φ/|∇φ|]`.
///
/// Errors when the result is no longer finite (the instability signal).
pub fn explicit_step(
    phi_n: &ScalarField,
    d: &ScalarField,
    params: &ExplicitParams,
) -> Result<ScalarField> {
    params.validate()?;
    let forcing = match f_coefficient(d, phi_n, params.eps) {
        Ok(f) => {
            let t = curvature_transport(d, phi_n, params.grad_floor);
            f.zip_with(&t, |a, b| a * b)
        }
        Err(_) => ScalarField::zeros(phi_n.grid()),
    };
    let next = phi_n.add(&forcing.scale(params.dt));
    if !next.is_finite() {
        return Err(Error::Numerical {
            reason: "explicit step produced non-finite values".into(),
            residual: None,
            iteration: None,
        });
    }
    Ok(next)
}

pub fn run_explicit(
    cloud: &PointCloud,
    grid: &Grid,
    init: &ScalarField,
    params: &ExplicitParams,
) -> Result<RunReport> {
    let d = DistanceField::compute(cloud, grid)?;
    run_explicit_with(d.field(), init, params, |_| {})
}

/// Runs the baseline with the stopping rule of the implicit solvers. A
/// blow-up ends the run with `converged = false` and the failure recorded
/// in the report rather than as an error.
pub fn run_explicit_with(
    d: &ScalarField,
    init: &ScalarField,
    params: &ExplicitParams,
    mut hook: impl FnMut(&crate::sim::SimSnapshot),
) -> Result<RunReport> {
    params.validate()?;
    if !init.is_finite() {
        return Err(Error::invalid("initial field must be finite"));
    }
    let start = Instant::now();
    let blow_up = 2.0 * init.grid().diameter();
    let mut history = EnergyHistory::new(params.window)?;
    let mut phi = init.clone();
    let mut converged = false;
    let mut iterations = 0;
    let mut failure = None;

    for iter in 1..=params.max_iters {
        iterations = iter;
        match explicit_step(&phi, d, params) {
            Ok(next) if next.max_abs() <= blow_up => phi = next,
            Ok(next) => {
                failure = Some(format!(
                    "instability at iteration {iter}: |phi| reached {:.3e} (blow-up bound {:.3e})",
                    next.max_abs(),
                    blow_up
                ));
                break;
            }
            Err(e) => {
                failure = Some(format!("instability at iteration {iter}: {e}"));
                break;
            }
        }
        let e = energy(&phi, d, params.eps, 2)?;
        history.push(e);
        hook(&crate::sim::SimSnapshot {
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
        failure,
    })
}
