//! Augmented-Lagrangian (ADMM-type) minimization of the linearly weighted
//! surface energy.
//!
//! The gradient is split out as an auxiliary variable `p = ∇φ` and the
//! saddle point of the augmented Lagrangian is approached by alternating
//! three cheap sub-problems: a constant-coefficient elliptic solve for φ
//! (frozen coefficient `η` keeps it constant-coefficient), a closed-form
//! shrinkage for `p`, and a multiplier ascent for `λ`.

use std::time::Instant;

use crate::distance::DistanceField;
use crate::error::{Error, Result};
use crate::grid::{divergence, gradient, Grid, ScalarField, VectorField};
use crate::levelset::{energy, reinitialize, EnergyHistory, SmoothingParam};
use crate::report::RunReport;
use crate::spectral::{solve_helmholtz, HelmholtzProblem};
use crate::PointCloud;

use std::f64::consts::PI;

/// Below this the shrinkage direction is treated as zero.
pub(crate) const SHRINK_Q_FLOOR: f64 = 1e-12;

/// Parameters of the augmented-Lagrangian iteration.
#[derive(Debug, Clone)]
pub struct AlmParams {
    /// Penalty on the constraint `p = ∇φ`; also the diffusion coefficient
    /// of the φ sub-problem.
    pub r: f64,
    /// Frozen coefficient added to both sides of the φ sub-problem.
    pub eta: f64,
    pub eps: SmoothingParam,
    pub max_iters: usize,
    pub window: usize,
    pub tol: f64,
    pub reinit_steps: usize,
}

impl AlmParams {
    pub fn defaults() -> Self {
        AlmParams {
            r: 1.5,
            eta: 0.5,
            eps: SmoothingParam::new(1.0).expect("positive"),
            max_iters: 2000,
            window: EnergyHistory::DEFAULT_WINDOW,
            tol: 1e-4,
            reinit_steps: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(Error::invalid("penalty r must be positive"));
        }
        if !(self.eta > 0.0) {
            return Err(Error::invalid("frozen coefficient eta must be positive"));
        }
        Ok(())
    }
}

/// The iterates `(φⁿ, pⁿ, λⁿ)`.
#[derive(Debug, Clone)]
pub struct AlmState {
    pub phi: ScalarField,
    pub p: VectorField,
    pub lambda: VectorField,
    pub iteration: usize,
}

impl AlmState {
    /// Standard start: feasible `p⁰ = ∇φ⁰`, zero multiplier.
    pub fn initial(phi0: &ScalarField) -> Self {
        AlmState {
            p: gradient(phi0),
            lambda: VectorField::zeros(phi0.grid()),
            phi: phi0.clone(),
            iteration: 0,
        }
    }
}

/// φ sub-problem: solve `η·φ − r·Δφ = g₂` with
/// `g₂ = η·φⁿ + 2dε|pⁿ|φⁿ/(π(ε² + (φⁿ)²)²) − ∇·(r·pⁿ + λⁿ)`.
pub fn phi_subproblem(
    state: &AlmState,
    d: &ScalarField,
    params: &AlmParams,
) -> Result<ScalarField> {
    params.validate()?;
    let e = params.eps.epsilon();
    let p_mag = state.p.magnitude();

    let mut rhs = state.phi.scale(params.eta);
    for (((g, &phi), &dv), &pm) in rhs
        .values_mut()
        .iter_mut()
        .zip(state.phi.values())
        .zip(d.values())
        .zip(p_mag.values())
    {
        let denom = e * e + phi * phi;
        *g += 2.0 * dv * e * pm * phi / (PI * denom * denom);
    }

    let mut combo_components = Vec::with_capacity(state.p.components().len());
    for (pc, lc) in state.p.components().iter().zip(state.lambda.components()) {
        combo_components.push(pc.scale(params.r).add(lc));
    }
    let combo = VectorField::new(combo_components)?;
    let rhs = rhs.sub(&divergence(&combo));

    solve_helmholtz(&HelmholtzProblem::new(params.eta, params.r, rhs)?)
}

/// Shrinkage weight `w = d·ε/(π(ε² + φ²))` at one node.
#[inline]
pub(crate) fn shrink_weight(d: f64, phi: f64, eps: f64) -> f64 {
    d * eps / (PI * (eps * eps + phi * phi))
}

/// p sub-problem: nodewise shrinkage
/// `p = max{0, 1 − w/(r|q|)}·q` with `q = ∇φ − λ/r`.
pub fn p_subproblem(
    phi_next: &ScalarField,
    lambda_n: &VectorField,
    d: &ScalarField,
    params: &AlmParams,
) -> VectorField {
    let e = params.eps.epsilon();
    let r = params.r;
    let grad = gradient(phi_next);

    let m = grad.components().len();
    let n = phi_next.grid().len();
    let mut q = vec![0.0; m * n];
    for k in 0..m {
        let gk = grad.component(k).values();
        let lk = lambda_n.component(k).values();
        for i in 0..n {
            q[k * n + i] = gk[i] - lk[i] / r;
        }
    }

    let mut out = VectorField::zeros(phi_next.grid());
    for i in 0..n {
        let mut q_mag2 = 0.0;
        for k in 0..m {
            q_mag2 += q[k * n + i] * q[k * n + i];
        }
        let q_mag = q_mag2.sqrt();
        if q_mag < SHRINK_Q_FLOOR {
            continue;
        }
        let w = shrink_weight(d.values()[i], phi_next.values()[i], e);
        let factor = (1.0 - w / (r * q_mag)).max(0.0);
        if factor > 0.0 {
            for k in 0..m {
                out.component_mut(k).values_mut()[i] = factor * q[k * n + i];
            }
        }
    }
    out
}

/// Multiplier ascent `λ^{n+1} = λⁿ + r(p^{n+1} − ∇φ^{n+1})`.
pub fn multiplier_update(
    state: &AlmState,
    phi_next: &ScalarField,
    p_next: &VectorField,
    r: f64,
) -> VectorField {
    let grad = gradient(phi_next);
    let mut out = Vec::with_capacity(state.lambda.components().len());
    for ((l, p), g) in state
        .lambda
        .components()
        .iter()
        .zip(p_next.components())
        .zip(grad.components())
    {
        let mut c = l.clone();
        for ((cv, &pv), &gv) in c.values_mut().iter_mut().zip(p.values()).zip(g.values()) {
            *cv += r * (pv - gv);
        }
        out.push(c);
    }
    VectorField::new(out).expect("components share the grid")
}

/// Per-iteration view for instrumentation.
pub struct AlmSnapshot<'a> {
    pub iteration: usize,
    pub phi: &'a ScalarField,
    pub p: &'a VectorField,
    pub lambda: &'a VectorField,
    /// Multiplier of the previous iteration, as used by this iteration's
    /// shrinkage.
    pub lambda_prev: &'a VectorField,
    pub energy: f64,
}

pub fn run_alm(
    cloud: &PointCloud,
    grid: &Grid,
    init: &ScalarField,
    params: &AlmParams,
) -> Result<RunReport> {
    let d = DistanceField::compute(cloud, grid)?;
    run_alm_with(d.field(), init, params, |_| {})
}

/// As [`run_alm`] with a precomputed distance field and an iteration hook
/// (called after the multiplier ascent, before reinitialization).
pub fn run_alm_with(
    d: &ScalarField,
    init: &ScalarField,
    params: &AlmParams,
    mut hook: impl FnMut(&AlmSnapshot),
) -> Result<RunReport> {
    params.validate()?;
    if !init.is_finite() {
        return Err(Error::invalid("initial field must be finite"));
    }
    let start = Instant::now();
    let mut history = EnergyHistory::new(params.window)?;
    let mut state = AlmState::initial(init);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=params.max_iters {
        let phi_next = phi_subproblem(&state, d, params)?;
        let p_next = p_subproblem(&phi_next, &state.lambda, d, params);
        let lambda_next = multiplier_update(&state, &phi_next, &p_next, params.r);

        let lambda_prev = std::mem::replace(&mut state.lambda, lambda_next);
        state.phi = phi_next;
        state.p = p_next;
        state.iteration = iter;

        let e = energy(&state.phi, d, params.eps, 1)?;
        history.push(e);
        iterations = iter;
        hook(&AlmSnapshot {
            iteration: iter,
            phi: &state.phi,
            p: &state.p,
            lambda: &state.lambda,
            lambda_prev: &lambda_prev,
            energy: e,
        });
        if history.converged(params.tol) {
            converged = true;
            break;
        }
        state.phi = reinitialize(&state.phi, params.reinit_steps);
    }

    Ok(RunReport {
        converged,
        iterations,
        wall_seconds: start.elapsed().as_secs_f64(),
        energy_history: history.values().to_vec(),
        hausdorff_to_cloud: None,
        final_phi: state.phi,
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid32() -> Grid {
        Grid::new(&[32, 32]).unwrap()
    }

    fn random_field(grid: &Grid, seed: u64, lo: f64, hi: f64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_fn(grid, |_| rng.gen_range(lo..hi))
    }

    fn random_vector(grid: &Grid, seed: u64) -> VectorField {
        VectorField::new(
            (0..grid.ndim())
                .map(|k| random_field(grid, seed + k as u64, -1.0, 1.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn phi_subproblem_keeps_constants() {
        let g = grid32();
        let params = AlmParams::defaults();
        let state = AlmState {
            phi: ScalarField::constant(&g, 3.0),
            p: VectorField::zeros(&g),
            lambda: VectorField::zeros(&g),
            iteration: 0,
        };
        let d = ScalarField::zeros(&g);
        let next = phi_subproblem(&state, &d, &params).unwrap();
        for &v in next.values() {
            assert!((v - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn phi_subproblem_satisfies_equation() {
        let g = grid32();
        let params = AlmParams::defaults();
        let state = AlmState {
            phi: random_field(&g, 1, -2.0, 2.0),
            p: random_vector(&g, 10),
            lambda: random_vector(&g, 20),
            iteration: 3,
        };
        let d = random_field(&g, 2, 0.0, 5.0);

        // Recompute g2 independently of the solver path.
        let e = params.eps.epsilon();
        let p_mag = state.p.magnitude();
        let mut g2 = state.phi.scale(params.eta);
        for (((gv, &phi), &dv), &pm) in g2
            .values_mut()
            .iter_mut()
            .zip(state.phi.values())
            .zip(d.values())
            .zip(p_mag.values())
        {
            let denom = e * e + phi * phi;
            *gv += 2.0 * dv * e * pm * phi / (PI * denom * denom);
        }
        let combo = VectorField::new(
            state
                .p
                .components()
                .iter()
                .zip(state.lambda.components())
                .map(|(p, l)| p.scale(params.r).add(l))
                .collect(),
        )
        .unwrap();
        let g2 = g2.sub(&divergence(&combo));

        let next = phi_subproblem(&state, &d, &params).unwrap();
        let residual = next
            .scale(params.eta)
            .sub(&laplacian(&next).scale(params.r))
            .sub(&g2)
            .max_abs();
        assert!(residual < 1e-9, "residual {residual}");
    }

    #[test]
    fn phi_subproblem_fixture_with_cancelling_source() {
        // Constant phi, arbitrary p, lambda = r(grad(phi) - p) = -r p:
        // the divergence source cancels and phi must be reproduced.
        let g = grid32();
        let params = AlmParams::defaults();
        let p = random_vector(&g, 5);
        let lambda = VectorField::new(p.components().iter().map(|c| c.scale(-params.r)).collect())
            .unwrap();
        let state = AlmState {
            phi: ScalarField::constant(&g, 1.25),
            p,
            lambda,
            iteration: 0,
        };
        let d = ScalarField::zeros(&g);
        let next = phi_subproblem(&state, &d, &params).unwrap();
        assert!(next.sub(&state.phi).max_abs() < 1e-10);
    }

    #[test]
    fn shrinkage_without_weight_returns_q() {
        let g = grid32();
        let params = AlmParams::defaults();
        let phi = random_field(&g, 3, -2.0, 2.0);
        let lambda = random_vector(&g, 30);
        let d = ScalarField::zeros(&g);
        let p = p_subproblem(&phi, &lambda, &d, &params);

        let grad = gradient(&phi);
        for k in 0..2 {
            for ((&pv, &gv), &lv) in p
                .component(k)
                .values()
                .iter()
                .zip(grad.component(k).values())
                .zip(lambda.component(k).values())
            {
                assert!((pv - (gv - lv / params.r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shrinkage_clamps_under_threshold() {
        let g = grid32();
        let params = AlmParams::defaults();
        // phi = 0 everywhere makes the weight w = d*eps/(pi*eps^2) large
        // wherever d is large; gradients vanish, so q = -lambda/r.
        let phi = ScalarField::zeros(&g);
        let lambda = VectorField::new(vec![
            ScalarField::constant(&g, 0.3),
            ScalarField::constant(&g, 0.0),
        ])
        .unwrap();
        let d = ScalarField::constant(&g, 50.0);
        let p = p_subproblem(&phi, &lambda, &d, &params);
        assert_eq!(p.magnitude().max_abs(), 0.0);
    }

    #[test]
    fn shrinkage_matches_dense_proximal_search() {
        // Nodewise, p minimizes w|p| + (r/2)|p - q|^2. Brute-force the
        // minimizer over a 2-D grid of candidates around q.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let g = Grid::new(&[10, 10]).unwrap();
        let params = AlmParams::defaults();
        let phi = random_field(&g, 40, -2.0, 2.0);
        let lambda = random_vector(&g, 41);
        let d = random_field(&g, 42, 0.0, 4.0);
        let p = p_subproblem(&phi, &lambda, &d, &params);

        let grad = gradient(&phi);
        let e = params.eps.epsilon();
        for _ in 0..100 {
            let i = rng.gen_range(0..g.len());
            let qx = grad.component(0).values()[i] - lambda.component(0).values()[i] / params.r;
            let qy = grad.component(1).values()[i] - lambda.component(1).values()[i] / params.r;
            let q_mag = (qx * qx + qy * qy).sqrt();
            if q_mag < 1e-6 {
                continue;
            }
            let w = shrink_weight(d.values()[i], phi.values()[i], e);
            let objective = |px: f64, py: f64| {
                w * (px * px + py * py).sqrt()
                    + 0.5 * params.r * ((px - qx).powi(2) + (py - qy).powi(2))
            };
            let half = 2.0 * q_mag;
            let step = 1e-3;
            let n = (2.0 * half / step) as usize;
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for a in 0..=n {
                let px = -half + a as f64 * step;
                for b in 0..=n {
                    let py = -half + b as f64 * step;
                    let o = objective(px, py);
                    if o < best.0 {
                        best = (o, px, py);
                    }
                }
            }
            let (_, bx, by) = best;
            let px = p.component(0).values()[i];
            let py = p.component(1).values()[i];
            assert!(
                (px - bx).abs() <= 2e-3 && (py - by).abs() <= 2e-3,
                "node {i}: shrinkage ({px},{py}) vs search ({bx},{by})"
            );
        }
    }

    #[test]
    fn multiplier_update_is_exact_affine() {
        let g = grid32();
        let phi = random_field(&g, 7, -1.0, 1.0);
        let grad = gradient(&phi);

        // p = grad(phi) leaves lambda unchanged.
        let state = AlmState {
            phi: phi.clone(),
            p: grad.clone(),
            lambda: random_vector(&g, 70),
            iteration: 1,
        };
        let next = multiplier_update(&state, &phi, &grad, 2.0);
        for k in 0..2 {
            assert_eq!(next.component(k).values(), state.lambda.component(k).values());
        }

        // Zero multiplier, constant residual (1, 0), r = 2.
        let state = AlmState {
            phi: phi.clone(),
            p: VectorField::new(vec![
                grad.component(0).map(|v| v + 1.0),
                grad.component(1).clone(),
            ])
            .unwrap(),
            lambda: VectorField::zeros(&g),
            iteration: 1,
        };
        let next = multiplier_update(&state, &phi, &state.p.clone(), 2.0);
        for &v in next.component(0).values() {
            assert!((v - 2.0).abs() < 1e-14);
        }
        assert_eq!(next.component(1).max_abs(), 0.0);

        // Two equal-residual updates advance lambda by 2 r rho.
        let state2 = AlmState {
            phi: phi.clone(),
            p: state.p.clone(),
            lambda: next.clone(),
            iteration: 2,
        };
        let next2 = multiplier_update(&state2, &phi, &state.p.clone(), 2.0);
        for &v in next2.component(0).values() {
            assert!((v - 4.0).abs() < 1e-14);
        }
    }
}
