//! Diagnostics for where the data term actually drives the
//! augmented-Lagrangian evolution.
//!
//! The shrinkage step zeroes `p` exactly where the data weight
//! `w = d·ε/(π(ε² + φ²))` beats the penalty pull `r|q|`; wherever that
//! happens the distance field drops out of the next φ sub-problem. The
//! fields computed here classify the grid by that mechanism: the
//! quadratic-in-ε diagnostic `Q`, its discriminant, the penalty bounds
//! `r_L/r_U` with the projection residual `α`, the shrinkage margin, the
//! active-region mask and the thin band around the zero level set.

use std::f64::consts::PI;

use crate::alm::{shrink_weight, AlmParams, AlmState, SHRINK_Q_FLOOR};
use crate::grid::{gradient, ScalarField, VectorField};
use crate::levelset::SmoothingParam;

/// Nodewise `|r·∇φ − λ|`.
fn penalty_pull(grad_phi: &VectorField, lambda_prev: &VectorField, r: f64) -> ScalarField {
    let grid = grad_phi.grid().clone();
    let mut acc = vec![0.0; grid.len()];
    for (g, l) in grad_phi.components().iter().zip(lambda_prev.components()) {
        for ((a, &gv), &lv) in acc.iter_mut().zip(g.values()).zip(l.values()) {
            let v = r * gv - lv;
            *a += v * v;
        }
    }
    ScalarField::from_values(&grid, acc.iter().map(|a| a.sqrt()).collect()).expect("same grid")
}

/// The diagnostic quadratic in ε evaluated at the run's ε:
/// `Q = φ·π|r∇φ−λ|·ε² − d·ε + φ³·π|r∇φ−λ|`.
pub fn q_field(
    phi: &ScalarField,
    grad_phi: &VectorField,
    lambda_prev: &VectorField,
    d: &ScalarField,
    eps: f64,
    r: f64,
) -> ScalarField {
    let pull = penalty_pull(grad_phi, lambda_prev, r);
    let mut out = phi.clone();
    for ((o, &dv), &v) in out.values_mut().iter_mut().zip(d.values()).zip(pull.values()) {
        let p = *o;
        *o = p * PI * v * eps * eps - dv * eps + p * p * p * PI * v;
    }
    out
}

/// Discriminant of the diagnostic quadratic:
/// `Disc Q = d² − 4·φ⁴·π²·|r∇φ−λ|²`.
pub fn discriminant_field(
    phi: &ScalarField,
    grad_phi: &VectorField,
    lambda_prev: &VectorField,
    d: &ScalarField,
    r: f64,
) -> ScalarField {
    let pull = penalty_pull(grad_phi, lambda_prev, r);
    let mut out = phi.clone();
    for ((o, &dv), &v) in out.values_mut().iter_mut().zip(d.values()).zip(pull.values()) {
        let p = *o;
        *o = dv * dv - 4.0 * p.powi(4) * PI * PI * v * v;
    }
    out
}

/// Penalty bounds and projection residual.
///
/// Wherever defined, `Disc Q ≥ 0` exactly for `r ∈ [r_lower, r_upper]`.
/// Bounds are undefined on gradient flats, at `φ = 0` and where the
/// discriminant condition `d²/(4φ⁴π²) ≥ α` fails; `defined` masks those
/// nodes and the bound fields hold zero there (no NaN sentinels).
#[derive(Debug, Clone)]
pub struct RBounds {
    pub lower: ScalarField,
    pub upper: ScalarField,
    /// Squared residual of projecting λ onto ∇φ: `|λ|² − (λ·∇φ)²/|∇φ|²`.
    pub alpha: ScalarField,
    pub defined: Vec<bool>,
}

pub fn r_bounds(
    phi: &ScalarField,
    grad_phi: &VectorField,
    lambda_prev: &VectorField,
    d: &ScalarField,
    grad_floor: f64,
) -> RBounds {
    let grid = phi.grid().clone();
    let n = grid.len();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut alpha = vec![0.0; n];
    let mut defined = vec![false; n];

    for i in 0..n {
        let mut g2 = 0.0;
        let mut l2 = 0.0;
        let mut dot = 0.0;
        for (g, l) in grad_phi.components().iter().zip(lambda_prev.components()) {
            let gv = g.values()[i];
            let lv = l.values()[i];
            g2 += gv * gv;
            l2 += lv * lv;
            dot += gv * lv;
        }
        let g_mag = g2.sqrt();
        if g_mag <= grad_floor {
            alpha[i] = l2;
            continue;
        }
        // Signed coefficient of λ along the gradient direction; keeping
        // the sign is what makes the bounds bracket the true Disc >= 0
        // interval when λ points against ∇φ.
        let proj = dot / g_mag;
        let a = (l2 - proj * proj).max(0.0);
        alpha[i] = a;

        let p = phi.values()[i];
        let dv = d.values()[i];
        let t = dv * dv / (4.0 * PI * PI * p.powi(4));
        if !t.is_finite() || t < a {
            continue;
        }
        let s = (t - a).sqrt();
        lower[i] = (proj - s) / g_mag;
        upper[i] = (proj + s) / g_mag;
        defined[i] = true;
    }

    RBounds {
        lower: ScalarField::from_values(&grid, lower).expect("same grid"),
        upper: ScalarField::from_values(&grid, upper).expect("same grid"),
        alpha: ScalarField::from_values(&grid, alpha).expect("same grid"),
        defined,
    }
}

/// Shrinkage margin `w − r|q|` with `q = ∇φ − λ/r`: nonnegative exactly
/// where the p sub-problem returns the zero vector (ties at 0 aside).
pub fn shrink_margin(
    phi: &ScalarField,
    lambda_prev: &VectorField,
    d: &ScalarField,
    eps: SmoothingParam,
    r: f64,
) -> ScalarField {
    let grad = gradient(phi);
    let e = eps.epsilon();
    let grid = phi.grid().clone();
    let n = grid.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut q2 = 0.0;
        for (g, l) in grad.components().iter().zip(lambda_prev.components()) {
            let q = g.values()[i] - l.values()[i] / r;
            q2 += q * q;
        }
        let w = shrink_weight(d.values()[i], phi.values()[i], e);
        out[i] = w - r * q2.sqrt();
    }
    ScalarField::from_values(&grid, out).expect("same grid")
}

/// Nodes where the distance field guides the evolution: the shrinkage
/// threshold does not clamp `p` there, or the node is inside the zero
/// level set (`φ < 0`).
pub fn active_region(state: &AlmState, d: &ScalarField, params: &AlmParams) -> Vec<bool> {
    let grad = gradient(&state.phi);
    let e = params.eps.epsilon();
    let r = params.r;
    let n = state.phi.grid().len();
    let mut active = vec![false; n];
    for i in 0..n {
        if state.phi.values()[i] < 0.0 {
            active[i] = true;
            continue;
        }
        let mut q2 = 0.0;
        for (g, l) in grad.components().iter().zip(state.lambda.components()) {
            let q = g.values()[i] - l.values()[i] / r;
            q2 += q * q;
        }
        let q_mag = q2.sqrt();
        let w = shrink_weight(d.values()[i], state.phi.values()[i], e);
        // Only a positive data weight can clamp; w = 0 never deactivates.
        let clamped = w > 0.0 && (q_mag < SHRINK_Q_FLOOR || r * q_mag <= w);
        active[i] = !clamped;
    }
    active
}

/// The band `−2ε/√3 < φ < 2ε/√3` around the zero level set (strict).
pub fn thin_band(phi: &ScalarField, eps: f64) -> Vec<bool> {
    let half_width = 2.0 * eps / 3f64.sqrt();
    phi.values()
        .iter()
        .map(|&v| -half_width < v && v < half_width)
        .collect()
}

/// Everything the analysis computes for one solver snapshot.
#[derive(Debug, Clone)]
pub struct DiagnosticBundle {
    pub q: ScalarField,
    pub disc: ScalarField,
    pub alpha: ScalarField,
    pub r_lower: ScalarField,
    pub r_upper: ScalarField,
    pub bounds_defined: Vec<bool>,
    pub shrink_margin: ScalarField,
    pub active_mask: Vec<bool>,
    pub band_mask: Vec<bool>,
}

impl DiagnosticBundle {
    /// Computes all diagnostics from one ALM snapshot (`φⁿ`, `λ^{n−1}`)
    /// and the run parameters. Pure; meant to be driven from iteration
    /// hooks so solvers pay nothing when diagnostics are unused.
    pub fn compute(
        state: &AlmState,
        lambda_prev: &VectorField,
        d: &ScalarField,
        params: &AlmParams,
        grad_floor: f64,
    ) -> DiagnosticBundle {
        let eps = params.eps.epsilon();
        let grad = gradient(&state.phi);
        let bounds = r_bounds(&state.phi, &grad, lambda_prev, d, grad_floor);
        DiagnosticBundle {
            q: q_field(&state.phi, &grad, lambda_prev, d, eps, params.r),
            disc: discriminant_field(&state.phi, &grad, lambda_prev, d, params.r),
            alpha: bounds.alpha,
            r_lower: bounds.lower,
            r_upper: bounds.upper,
            bounds_defined: bounds.defined,
            shrink_margin: shrink_margin(&state.phi, lambda_prev, d, params.eps, params.r),
            active_mask: active_region(state, d, params),
            band_mask: thin_band(&state.phi, eps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alm::p_subproblem;
    use crate::grid::Grid;
    use crate::levelset::init_sphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid16() -> Grid {
        Grid::new(&[16, 16]).unwrap()
    }

    fn random_field(grid: &Grid, seed: u64, lo: f64, hi: f64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_fn(grid, |_| rng.gen_range(lo..hi))
    }

    fn random_vector(grid: &Grid, seed: u64) -> VectorField {
        VectorField::new(
            (0..grid.ndim())
                .map(|k| random_field(grid, seed * 31 + k as u64, -1.0, 1.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn q_sign_cases() {
        let g = grid16();
        let lambda = random_vector(&g, 3);

        // d = 0 with positive phi: both surviving terms are positive.
        let phi = ScalarField::constant(&g, 0.7);
        let grad = random_vector(&g, 4); // any nonzero pull
        let q = q_field(&phi, &grad, &lambda, &ScalarField::zeros(&g), 1.0, 1.5);
        assert!(q.values().iter().all(|&v| v > 0.0));

        // phi = 0: Q collapses to -d*eps.
        let phi = ScalarField::zeros(&g);
        let d = random_field(&g, 5, 0.0, 3.0);
        let q = q_field(&phi, &grad, &lambda, &d, 2.0, 1.5);
        for (qv, dv) in q.values().iter().zip(d.values()) {
            assert!((qv - (-dv * 2.0)).abs() < 1e-14);
            assert!(*qv <= 0.0);
        }
    }

    #[test]
    fn disc_sign_cases() {
        let g = grid16();
        let lambda = random_vector(&g, 6);
        let grad = random_vector(&g, 7);

        // d = 0, nonzero pull, phi != 0 means strictly negative.
        let phi = ScalarField::constant(&g, 0.5);
        let disc = discriminant_field(&phi, &grad, &lambda, &ScalarField::zeros(&g), 1.5);
        assert!(disc.values().iter().all(|&v| v < 0.0));

        // phi = 0 collapses to d^2.
        let phi = ScalarField::zeros(&g);
        let d = random_field(&g, 8, 0.0, 3.0);
        let disc = discriminant_field(&phi, &grad, &lambda, &d, 1.5);
        for (dc, dv) in disc.values().iter().zip(d.values()) {
            assert!((dc - dv * dv).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_agrees_with_dense_root_scan() {
        // Node values are drawn so the quadratic is well-posed (positive
        // phi, pull bounded away from zero) and any real roots land well
        // inside the scanned interval (0, 10].
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = Grid::new(&[4, 4]).unwrap();
        let r = 1.3;
        let mut checked = 0;
        while checked < 200 {
            let phi_v: f64 = rng.gen_range(0.1..1.0);
            let gx: f64 = rng.gen_range(-1.0..1.0);
            let gy: f64 = rng.gen_range(-1.0..1.0);
            let lx: f64 = rng.gen_range(-1.0..1.0);
            let ly: f64 = rng.gen_range(-1.0..1.0);
            let pull = ((r * gx - lx).powi(2) + (r * gy - ly).powi(2)).sqrt();
            if pull < 0.2 {
                continue;
            }
            // Straddle the Disc = 0 threshold d = 2*pi*phi^2*pull.
            let d_v = rng.gen_range(0.0..3.0 * PI * phi_v * phi_v * pull).min(2.5);

            let phi = ScalarField::constant(&g, phi_v);
            let grad = VectorField::new(vec![
                ScalarField::constant(&g, gx),
                ScalarField::constant(&g, gy),
            ])
            .unwrap();
            let lambda = VectorField::new(vec![
                ScalarField::constant(&g, lx),
                ScalarField::constant(&g, ly),
            ])
            .unwrap();
            let d = ScalarField::constant(&g, d_v);

            let disc = discriminant_field(&phi, &grad, &lambda, &d, r).values()[0];
            let q_at = |eps: f64| {
                phi_v * PI * pull * eps * eps - d_v * eps + phi_v.powi(3) * PI * pull
            };
            let mut has_root = false;
            let mut prev = q_at(1e-3);
            let mut eps = 2e-3;
            while eps <= 10.0 {
                let cur = q_at(eps);
                if prev == 0.0 || prev.signum() != cur.signum() {
                    has_root = true;
                    break;
                }
                prev = cur;
                eps += 1e-3;
            }
            if disc.abs() < 1e-9 {
                continue; // too close to a double root for the scan
            }
            assert_eq!(disc >= 0.0, has_root, "disc {disc} vs scan");
            checked += 1;
        }
    }

    #[test]
    fn alpha_projection_cases() {
        let g = grid16();
        let phi = ScalarField::constant(&g, 0.5);
        // Gradient along x with magnitude 2.
        let grad = VectorField::new(vec![
            ScalarField::constant(&g, 2.0),
            ScalarField::constant(&g, 0.0),
        ])
        .unwrap();
        let d = ScalarField::constant(&g, 1.0);

        // Lambda parallel to the gradient: zero residual.
        let lam_par = VectorField::new(vec![
            ScalarField::constant(&g, 3.0),
            ScalarField::constant(&g, 0.0),
        ])
        .unwrap();
        let b = r_bounds(&phi, &grad, &lam_par, &d, 1e-8);
        assert!(b.alpha.max_abs() < 1e-12);

        // Unit lambda orthogonal to the gradient: full residual 1.
        let lam_perp = VectorField::new(vec![
            ScalarField::constant(&g, 0.0),
            ScalarField::constant(&g, 1.0),
        ])
        .unwrap();
        let b = r_bounds(&phi, &grad, &lam_perp, &d, 1e-8);
        for &a in b.alpha.values() {
            assert!((a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_bracket_discriminant_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Grid::new(&[4, 4]).unwrap();
        let mut checked = 0;
        while checked < 100 {
            let phi_v = rng.gen_range(0.2..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let grad = VectorField::new(vec![
                ScalarField::constant(&g, rng.gen_range(-1.5..1.5)),
                ScalarField::constant(&g, rng.gen_range(-1.5..1.5)),
            ])
            .unwrap();
            let lambda = VectorField::new(vec![
                ScalarField::constant(&g, rng.gen_range(-1.0..1.0)),
                ScalarField::constant(&g, rng.gen_range(-1.0..1.0)),
            ])
            .unwrap();
            let d = ScalarField::constant(&g, rng.gen_range(0.0..4.0));
            let phi = ScalarField::constant(&g, phi_v);

            let b = r_bounds(&phi, &grad, &lambda, &d, 1e-8);
            if !b.defined[0] {
                continue;
            }
            let (lo, hi) = (b.lower.values()[0], b.upper.values()[0]);
            assert!(hi >= lo);
            assert!(b.alpha.values()[0] >= -1e-12);

            let inside = 0.5 * (lo.max(0.0) + hi);
            if inside > lo && inside < hi && inside > 0.0 {
                let disc = discriminant_field(&phi, &grad, &lambda, &d, inside).values()[0];
                assert!(disc >= -1e-9, "inside r = {inside}: disc {disc}");
            }
            let outside = hi + 0.5 + hi.abs();
            let disc = discriminant_field(&phi, &grad, &lambda, &d, outside).values()[0];
            assert!(disc < 1e-9, "outside r = {outside}: disc {disc}");
            if lo > 0.1 {
                let below = 0.5 * lo;
                let disc = discriminant_field(&phi, &grad, &lambda, &d, below).values()[0];
                assert!(disc < 1e-9, "below r = {below}: disc {disc}");
            }
            checked += 1;
        }
    }

    #[test]
    fn alpha_bounded_by_lambda_norm() {
        let g = grid16();
        let phi = random_field(&g, 50, -2.0, 2.0);
        let grad = gradient(&phi);
        let lambda = random_vector(&g, 51);
        let d = random_field(&g, 52, 0.0, 3.0);
        let b = r_bounds(&phi, &grad, &lambda, &d, 1e-8);
        let l_mag = lambda.magnitude();
        for (&a, &l) in b.alpha.values().iter().zip(l_mag.values()) {
            assert!(a <= l * l + 1e-12);
        }
    }

    #[test]
    fn margin_classifies_shrinkage_zeros() {
        // The shrinkage margin must agree with the p sub-problem about
        // which nodes clamp to zero, away from exact ties.
        let g = grid16();
        let params = AlmParams::defaults();
        let phi = random_field(&g, 60, -2.0, 2.0);
        let lambda = random_vector(&g, 61);
        let d = random_field(&g, 62, 0.0, 6.0);

        let p = p_subproblem(&phi, &lambda, &d, &params);
        let margin = shrink_margin(&phi, &lambda, &d, params.eps, params.r);
        let p_mag = p.magnitude();
        for (&m, &pm) in margin.values().iter().zip(p_mag.values()) {
            if m.abs() < 1e-9 {
                continue;
            }
            assert_eq!(m > 0.0, pm == 0.0, "margin {m} vs |p| {pm}");
        }
    }

    #[test]
    fn active_region_with_zero_weight_is_everything() {
        let g = grid16();
        let params = AlmParams::defaults();
        let state = AlmState::initial(&init_sphere(&g, &[8.0, 8.0], 4.0).unwrap());
        let active = active_region(&state, &ScalarField::zeros(&g), &params);
        assert!(active.iter().all(|&a| a));
    }

    #[test]
    fn active_region_includes_interior() {
        let g = Grid::new(&[32, 32]).unwrap();
        let params = AlmParams::defaults();
        let phi = init_sphere(&g, &[16.0, 16.0], 8.0).unwrap();
        let state = AlmState::initial(&phi);
        let d = ScalarField::constant(&g, 5.0);
        let active = active_region(&state, &d, &params);
        for i in 0..g.len() {
            if phi.values()[i] < 0.0 {
                assert!(active[i]);
            }
        }
    }

    #[test]
    fn band_membership() {
        let g = grid16();
        let eps = 0.9;
        let half = 2.0 * eps / 3f64.sqrt();
        let phi = ScalarField::zeros(&g);
        assert!(thin_band(&phi, eps).iter().all(|&b| b));
        // Exactly on the edge is excluded.
        let phi = ScalarField::constant(&g, half);
        assert!(thin_band(&phi, eps).iter().all(|&b| !b));
    }

    #[test]
    fn band_grows_with_eps() {
        let g = Grid::new(&[64, 64]).unwrap();
        let phi = init_sphere(&g, &[32.0, 32.0], 14.0).unwrap();
        let counts: Vec<usize> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&e| thin_band(&phi, e).iter().filter(|&&b| b).count())
            .collect();
        assert!(counts[0] < counts[1] && counts[1] < counts[2], "{counts:?}");
    }

    #[test]
    fn weight_kernel_extrema_at_eps_over_sqrt3() {
        // h(x) = 2*eps*x / (pi*(eps^2 + x^2)^2) peaks at +-eps/sqrt(3).
        let eps = 1.4;
        let h = |x: f64| 2.0 * eps * x / (PI * (eps * eps + x * x).powi(2));
        let mut best_max = (f64::MIN, 0.0);
        let mut best_min = (f64::MAX, 0.0);
        let mut x = -10.0 * eps;
        while x <= 10.0 * eps {
            let v = h(x);
            if v > best_max.0 {
                best_max = (v, x);
            }
            if v < best_min.0 {
                best_min = (v, x);
            }
            x += 1e-4;
        }
        let expect = eps / 3f64.sqrt();
        assert!((best_max.1 - expect).abs() < 1e-3, "argmax {}", best_max.1);
        assert!((best_min.1 + expect).abs() < 1e-3, "argmin {}", best_min.1);
    }

    #[test]
    fn bundle_invariants_on_random_snapshot() {
        let g = grid16();
        let params = AlmParams::defaults();
        let phi = random_field(&g, 80, -3.0, 3.0);
        let state = AlmState {
            p: gradient(&phi),
            lambda: random_vector(&g, 81),
            phi,
            iteration: 4,
        };
        let lambda_prev = random_vector(&g, 82);
        let d = random_field(&g, 83, 0.0, 5.0);
        let bundle = DiagnosticBundle::compute(&state, &lambda_prev, &d, &params, 1e-8);

        let grad = gradient(&state.phi);
        let pull = {
            let mut acc = vec![0.0; g.len()];
            for (gc, lc) in grad.components().iter().zip(lambda_prev.components()) {
                for ((a, &gv), &lv) in acc.iter_mut().zip(gc.values()).zip(lc.values()) {
                    let v = params.r * gv - lv;
                    *a += v * v;
                }
            }
            acc
        };
        for i in 0..g.len() {
            assert!(bundle.alpha.values()[i] >= -1e-12);
            if bundle.bounds_defined[i] {
                assert!(bundle.r_upper.values()[i] >= bundle.r_lower.values()[i]);
            }
            // Disc is recomputable from its definition.
            let p = state.phi.values()[i];
            let dv = d.values()[i];
            let expect = dv * dv - 4.0 * p.powi(4) * PI * PI * pull[i];
            assert!((bundle.disc.values()[i] - expect).abs() <= 1e-9 * expect.abs().max(1.0));
        }
    }
}
