//! Parametric point-cloud generators for the test shapes, with
//! controllable density, deterministic seeding and optional Gaussian
//! noise.
//!
//! All randomness comes from ChaCha8 seeded with the caller's `u64`, so
//! identical specs produce bitwise-identical clouds on every platform.
//! Curve generators place points on the exact parametric locus
//! (arc-length-uniform up to a dense-table inversion); surface generators
//! sample area-uniformly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::grid::Grid;

use std::f64::consts::TAU;

/// The shapes the generator knows how to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    Circle {
        center: Vec<f64>,
        radius: f64,
    },
    Ellipse {
        center: Vec<f64>,
        radii: [f64; 2],
    },
    Triangle {
        vertices: [[f64; 2]; 3],
    },
    /// Axis-aligned square outline with points removed near the corners.
    SquareMissingCorners {
        center: Vec<f64>,
        side: f64,
        corner_gap: f64,
    },
    /// `ρ(θ) = base_radius + amplitude·cos(folds·θ)`.
    KfoldCircle {
        center: Vec<f64>,
        base_radius: f64,
        amplitude: f64,
        folds: u32,
    },
    Torus {
        center: Vec<f64>,
        major: f64,
        minor: f64,
    },
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    /// Composite outline with three density regions: a large face circle,
    /// a smaller head circle and two elongated ear lobes. Point counts
    /// are per region (`n3` per ear); the spec-level `count` is ignored.
    BunnyFace {
        n1: usize,
        n2: usize,
        n3: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub count: usize,
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, count: usize, seed: u64) -> Self {
        ShapeSpec { kind, count, seed }
    }
}

/// Places `count` points on the exact locus `curve(t), t ∈ [0,1)`,
/// approximately equally spaced by arc length. A dense chord table
/// inverts the arc-length map; the returned points always evaluate the
/// exact parametric map, so on-shape residuals are at machine precision.
fn resample_closed_curve(
    curve: &dyn Fn(f64) -> [f64; 2],
    count: usize,
) -> Vec<[f64; 2]> {
    let dense = (count * 64).max(4096);
    let mut lengths = Vec::with_capacity(dense + 1);
    lengths.push(0.0);
    let mut prev = curve(0.0);
    for i in 1..=dense {
        let t = i as f64 / dense as f64;
        let p = curve(t % 1.0);
        let seg = ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
        lengths.push(lengths[i - 1] + seg);
        prev = p;
    }
    let total = *lengths.last().expect("nonempty");

    let mut out = Vec::with_capacity(count);
    let mut cursor = 0usize;
    for k in 0..count {
        let target = total * k as f64 / count as f64;
        while cursor + 1 < lengths.len() && lengths[cursor + 1] < target {
            cursor += 1;
        }
        let (lo, hi) = (lengths[cursor], lengths[cursor + 1]);
        let frac = if hi > lo { (target - lo) / (hi - lo) } else { 0.0 };
        let t = (cursor as f64 + frac) / dense as f64;
        out.push(curve(t % 1.0));
    }
    out
}

/// Arc-length-uniform placement on the kept part of a closed curve.
/// Used by the composite shapes where regions mask each other out.
fn resample_kept_arc(
    curve: &dyn Fn(f64) -> [f64; 2],
    keep: &dyn Fn(&[f64; 2]) -> bool,
    count: usize,
) -> Vec<[f64; 2]> {
    let dense = 16384;
    let pts: Vec<[f64; 2]> = (0..dense)
        .map(|i| curve(i as f64 / dense as f64))
        .collect();
    // Cumulative length over kept segments only.
    let mut cum = vec![0.0; dense + 1];
    for i in 0..dense {
        let a = &pts[i];
        let b = &pts[(i + 1) % dense];
        let seg = if keep(a) && keep(b) {
            ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
        } else {
            0.0
        };
        cum[i + 1] = cum[i] + seg;
    }
    let total = cum[dense];
    if total == 0.0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(count);
    let mut cursor = 0usize;
    for k in 0..count {
        let target = total * (k as f64 + 0.5) / count as f64;
        while cursor + 1 <= dense && cum[cursor + 1] < target {
            cursor += 1;
        }
        let t = cursor as f64 / dense as f64;
        out.push(curve(t));
    }
    out
}

fn points_to_cloud(points: Vec<[f64; 2]>, grid: &Grid) -> Result<PointCloud> {
    let cloud = PointCloud::new(2, points.into_iter().flatten().collect())?;
    cloud.check_in_grid(grid)?;
    Ok(cloud)
}

/// Samples `spec.count` points of the requested shape, deterministically
/// in `spec.seed`.
pub fn sample_shape(spec: &ShapeSpec, grid: &Grid) -> Result<PointCloud> {
    if spec.count < 3 {
        return Err(Error::invalid("shape sampling needs count >= 3"));
    }
    match &spec.kind {
        ShapeKind::Circle { center, radius } => {
            let (cx, cy, r) = (center[0], center[1], *radius);
            let curve = move |t: f64| {
                let th = TAU * t;
                [cx + r * th.cos(), cy + r * th.sin()]
            };
            points_to_cloud(resample_closed_curve(&curve, spec.count), grid)
        }
        ShapeKind::Ellipse { center, radii } => {
            let (cx, cy) = (center[0], center[1]);
            let (a, b) = (radii[0], radii[1]);
            let curve = move |t: f64| {
                let th = TAU * t;
                [cx + a * th.cos(), cy + b * th.sin()]
            };
            points_to_cloud(resample_closed_curve(&curve, spec.count), grid)
        }
        ShapeKind::Triangle { vertices } => {
            let v = *vertices;
            let curve = polyline_curve(vec![v[0], v[1], v[2]]);
            points_to_cloud(resample_closed_curve(&curve, spec.count), grid)
        }
        ShapeKind::SquareMissingCorners {
            center,
            side,
            corner_gap,
        } => {
            let h = side / 2.0;
            let (cx, cy) = (center[0], center[1]);
            let corners = [
                [cx - h, cy - h],
                [cx + h, cy - h],
                [cx + h, cy + h],
                [cx - h, cy + h],
            ];
            let curve = polyline_curve(corners.to_vec());
            let gap = *corner_gap;
            let full = resample_closed_curve(&curve, spec.count);
            let kept: Vec<[f64; 2]> = full
                .into_iter()
                .filter(|p| {
                    corners.iter().all(|c| {
                        ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() > gap
                    })
                })
                .collect();
            points_to_cloud(kept, grid)
        }
        ShapeKind::KfoldCircle {
            center,
            base_radius,
            amplitude,
            folds,
        } => {
            let (cx, cy, r0, a, k) = (center[0], center[1], *base_radius, *amplitude, *folds);
            if a.abs() >= r0 {
                return Err(Error::invalid("fold amplitude must stay below the base radius"));
            }
            let curve = move |t: f64| {
                let th = TAU * t;
                let rho = r0 + a * (k as f64 * th).cos();
                [cx + rho * th.cos(), cy + rho * th.sin()]
            };
            points_to_cloud(resample_closed_curve(&curve, spec.count), grid)
        }
        ShapeKind::Torus {
            center,
            major,
            minor,
        } => sample_torus(center, *major, *minor, spec.count, spec.seed, grid),
        ShapeKind::Sphere { center, radius } => {
            sample_sphere(center, *radius, spec.count, spec.seed, grid)
        }
        ShapeKind::BunnyFace { n1, n2, n3 } => bunny_face_cloud(*n1, *n2, *n3, spec.seed, grid),
    }
}

/// Closed polyline through `vertices`, parameterized by perimeter length.
fn polyline_curve(vertices: Vec<[f64; 2]>) -> impl Fn(f64) -> [f64; 2] {
    let n = vertices.len();
    let mut seg_len = Vec::with_capacity(n);
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        seg_len.push(((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt());
    }
    let total: f64 = seg_len.iter().sum();
    move |t: f64| {
        let mut s = t.rem_euclid(1.0) * total;
        for i in 0..n {
            if s <= seg_len[i] || i == n - 1 {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let f = if seg_len[i] > 0.0 { s / seg_len[i] } else { 0.0 };
                return [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
            }
            s -= seg_len[i];
        }
        vertices[0]
    }
}

/// Area-uniform torus sampling: the tube angle is rejection-sampled with
/// density proportional to `R + r·cos(v)`; the axial angle is uniform.
fn sample_torus(
    center: &[f64],
    major: f64,
    minor: f64,
    count: usize,
    seed: u64,
    grid: &Grid,
) -> Result<PointCloud> {
    if !(major > 0.0 && minor > 0.0 && minor < major) {
        return Err(Error::invalid("torus needs 0 < minor < major"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(3 * count);
    for _ in 0..count {
        let u = rng.gen_range(0.0..TAU);
        let v = loop {
            let cand = rng.gen_range(0.0..TAU);
            let accept = (major + minor * cand.cos()) / (major + minor);
            if rng.gen_range(0.0..1.0) < accept {
                break cand;
            }
        };
        let ring = major + minor * v.cos();
        coords.push(center[0] + ring * u.cos());
        coords.push(center[1] + ring * u.sin());
        coords.push(center[2] + minor * v.sin());
    }
    let cloud = PointCloud::new(3, coords)?;
    cloud.check_in_grid(grid)?;
    Ok(cloud)
}

/// Area-uniform sphere sampling via normalized Gaussians.
fn sample_sphere(
    center: &[f64],
    radius: f64,
    count: usize,
    seed: u64,
    grid: &Grid,
) -> Result<PointCloud> {
    if !(radius > 0.0) {
        return Err(Error::invalid("sphere radius must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(3 * count);
    for _ in 0..count {
        let (mut x, mut y, mut z): (f64, f64, f64);
        loop {
            x = rng.sample(StandardNormal);
            y = rng.sample(StandardNormal);
            z = rng.sample(StandardNormal);
            let n = (x * x + y * y + z * z).sqrt();
            if n > 1e-12 {
                x /= n;
                y /= n;
                z /= n;
                break;
            }
        }
        coords.push(center[0] + radius * x);
        coords.push(center[1] + radius * y);
        coords.push(center[2] + radius * z);
    }
    let cloud = PointCloud::new(3, coords)?;
    cloud.check_in_grid(grid)?;
    Ok(cloud)
}

/// Geometry of the bunny-face outline. The regions overlap so their union
/// boundary forms one connected silhouette; each region only contributes
/// points on the part of its own curve that lies outside the others.
struct BunnyGeometry {
    face_center: [f64; 2],
    face_radius: f64,
    head_center: [f64; 2],
    head_radius: f64,
    ear_centers: [[f64; 2]; 2],
    ear_semi: [f64; 2],
    ear_tilt: f64,
}

impl BunnyGeometry {
    fn standard() -> Self {
        BunnyGeometry {
            face_center: [50.0, 42.0],
            face_radius: 20.0,
            head_center: [50.0, 62.0],
            head_radius: 12.0,
            ear_centers: [[43.0, 78.0], [57.0, 78.0]],
            ear_semi: [4.5, 11.0],
            ear_tilt: 0.25,
        }
    }

    fn inside_face(&self, p: &[f64; 2]) -> bool {
        (p[0] - self.face_center[0]).powi(2) + (p[1] - self.face_center[1]).powi(2)
            < self.face_radius.powi(2)
    }

    fn inside_head(&self, p: &[f64; 2]) -> bool {
        (p[0] - self.head_center[0]).powi(2) + (p[1] - self.head_center[1]).powi(2)
            < self.head_radius.powi(2)
    }

    fn inside_ear(&self, which: usize, p: &[f64; 2]) -> bool {
        let c = self.ear_centers[which];
        let tilt = if which == 0 { self.ear_tilt } else { -self.ear_tilt };
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        let (ct, st) = (tilt.cos(), tilt.sin());
        let u = ct * dx + st * dy;
        let v = -st * dx + ct * dy;
        (u / self.ear_semi[0]).powi(2) + (v / self.ear_semi[1]).powi(2) < 1.0
    }

    fn ear_curve(&self, which: usize) -> impl Fn(f64) -> [f64; 2] + '_ {
        let c = self.ear_centers[which];
        let tilt = if which == 0 { self.ear_tilt } else { -self.ear_tilt };
        let semi = self.ear_semi;
        move |t: f64| {
            let th = TAU * t;
            let (u, v) = (semi[0] * th.cos(), semi[1] * th.sin());
            let (ct, st) = (tilt.cos(), tilt.sin());
            [c[0] + ct * u - st * v, c[1] + st * u + ct * v]
        }
    }
}

/// Three-region composite outline: `n1` points on the face, `n2` on the
/// head, `n3` on each ear.
pub fn bunny_face_cloud(
    n1: usize,
    n2: usize,
    n3: usize,
    _seed: u64,
    grid: &Grid,
) -> Result<PointCloud> {
    let geo = BunnyGeometry::standard();
    let mut points = Vec::with_capacity(n1 + n2 + 2 * n3);

    let face_curve = {
        let c = geo.face_center;
        let r = geo.face_radius;
        move |t: f64| {
            let th = TAU * t;
            [c[0] + r * th.cos(), c[1] + r * th.sin()]
        }
    };
    points.extend(resample_kept_arc(
        &face_curve,
        &|p| !geo.inside_head(p),
        n1,
    ));

    let head_curve = {
        let c = geo.head_center;
        let r = geo.head_radius;
        move |t: f64| {
            let th = TAU * t;
            [c[0] + r * th.cos(), c[1] + r * th.sin()]
        }
    };
    points.extend(resample_kept_arc(
        &head_curve,
        &|p| !geo.inside_face(p) && !geo.inside_ear(0, p) && !geo.inside_ear(1, p),
        n2,
    ));

    for which in 0..2 {
        let curve = geo.ear_curve(which);
        points.extend(resample_kept_arc(&curve, &|p| !geo.inside_head(p), n3));
    }

    points_to_cloud(points, grid)
}

/// Adds independent Gaussian noise to every coordinate, then clamps the
/// points back into the grid box. Deterministic in `seed`.
pub fn add_noise(cloud: &PointCloud, sigma: f64, seed: u64, grid: &Grid) -> Result<PointCloud> {
    if sigma < 0.0 {
        return Err(Error::invalid(format!("noise sigma must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = cloud.dim();
    let mut coords = Vec::with_capacity(cloud.coords().len());
    for p in cloud.iter() {
        for k in 0..dim {
            let n: f64 = rng.sample(StandardNormal);
            let hi = (grid.dims()[k] - 1) as f64;
            coords.push((p[k] + sigma * n).clamp(0.0, hi));
        }
    }
    PointCloud::new(dim, coords)
}

/// Canonical fixtures used by the experiment recipes and the test suite.
pub mod presets {
    use super::*;

    pub const GRID_2D: [usize; 2] = [100, 100];
    pub const GRID_3D: [usize; 3] = [50, 50, 50];

    pub fn circle(count: usize, seed: u64) -> ShapeSpec {
        ShapeSpec::new(
            ShapeKind::Circle {
                center: vec![50.0, 50.0],
                radius: 25.0,
            },
            count,
            seed,
        )
    }

    pub fn ellipse(count: usize, seed: u64) -> ShapeSpec {
        ShapeSpec::new(
            ShapeKind::Ellipse {
                center: vec![50.0, 50.0],
                radii: [32.0, 18.0],
            },
            count,
            seed,
        )
    }

    pub fn triangle(count: usize, seed: u64) -> ShapeSpec {
        ShapeSpec::new(
            ShapeKind::Triangle {
                vertices: [[50.0, 76.0], [24.0, 31.0], [76.0, 31.0]],
            },
            count,
            seed,
        )
    }

    pub fn square_missing_corners(count: usize, seed: u64) -> ShapeSpec {
        ShapeSpec::new(
            ShapeKind::SquareMissingCorners {
                center: vec![50.0, 50.0],
                side: 50.0,
                corner_gap: 2.5,
            },
            count,
            seed,
        )
    }

    pub fn kfold_circle(folds: u32, count: usize, seed: u64) -> ShapeSpec {
        ShapeSpec::new(
            ShapeKind::KfoldCircle {
                center: vec![50.0, 50.0],
                base_radius: 25.0,
                amplitude: 7.5,
                folds,
            },
            count,
            seed,
        )
    }

    pub fn fivefold(count: usize, seed: u64) -> ShapeSpec {
        kfold_circle(5, count, seed)
    }

    pub fn threefold(count: usize, seed: u64) -> ShapeSpec {
        kfold_circle(3, count, seed)
    }

    pub fn torus(count: usize, seed: u64) -> ShapeSpec {
        ShapeSpec::new(
            ShapeKind::Torus {
                center: vec![25.0, 25.0, 25.0],
                major: 12.0,
                minor: 5.0,
            },
            count,
            seed,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid100() -> Grid {
        Grid::new(&[100, 100]).unwrap()
    }

    #[test]
    fn circle_points_on_radius() {
        let g = grid100();
        let cloud = sample_shape(&presets::circle(200, 0), &g).unwrap();
        assert_eq!(cloud.len(), 200);
        for p in cloud.iter() {
            let r = ((p[0] - 50.0).powi(2) + (p[1] - 50.0).powi(2)).sqrt();
            assert!((r - 25.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn ellipse_implicit_residual() {
        let g = grid100();
        let cloud = sample_shape(&presets::ellipse(100, 0), &g).unwrap();
        for p in cloud.iter() {
            let v = ((p[0] - 50.0) / 32.0).powi(2) + ((p[1] - 50.0) / 18.0).powi(2);
            assert!((v - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn kfold_radial_maxima_count() {
        let g = grid100();
        let cloud = sample_shape(&presets::fivefold(200, 0), &g).unwrap();
        let radii: Vec<f64> = cloud
            .iter()
            .map(|p| ((p[0] - 50.0).powi(2) + (p[1] - 50.0).powi(2)).sqrt())
            .collect();
        let n = radii.len();
        let mut maxima = 0;
        for i in 0..n {
            let prev = radii[(i + n - 1) % n];
            let next = radii[(i + 1) % n];
            if radii[i] > prev && radii[i] > next {
                maxima += 1;
            }
        }
        assert_eq!(maxima, 5);
    }

    #[test]
    fn kfold_on_curve_residual() {
        let g = grid100();
        let cloud = sample_shape(&presets::fivefold(200, 0), &g).unwrap();
        for p in cloud.iter() {
            let th = (p[1] - 50.0).atan2(p[0] - 50.0);
            let rho = 25.0 + 7.5 * (5.0 * th).cos();
            let r = ((p[0] - 50.0).powi(2) + (p[1] - 50.0).powi(2)).sqrt();
            assert!((r - rho).abs() <= 1e-9);
        }
    }

    #[test]
    fn triangle_points_on_edges() {
        let g = grid100();
        let spec = presets::triangle(150, 0);
        let cloud = sample_shape(&spec, &g).unwrap();
        assert_eq!(cloud.len(), 150);
        let v = match &spec.kind {
            ShapeKind::Triangle { vertices } => *vertices,
            _ => unreachable!(),
        };
        for p in cloud.iter() {
            let mut min_edge_dist = f64::INFINITY;
            for i in 0..3 {
                let (a, b) = (v[i], v[(i + 1) % 3]);
                let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                let len2 = ex * ex + ey * ey;
                let t = (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2).clamp(0.0, 1.0);
                let (qx, qy) = (a[0] + t * ex, a[1] + t * ey);
                let d = ((p[0] - qx).powi(2) + (p[1] - qy).powi(2)).sqrt();
                min_edge_dist = min_edge_dist.min(d);
            }
            assert!(min_edge_dist <= 1e-9);
        }
    }

    #[test]
    fn square_corners_are_missing() {
        let g = grid100();
        let cloud = sample_shape(&presets::square_missing_corners(80, 0), &g).unwrap();
        assert!(cloud.len() >= 60, "too few survivors: {}", cloud.len());
        let corners = [[25.0, 25.0], [75.0, 25.0], [75.0, 75.0], [25.0, 75.0]];
        for p in cloud.iter() {
            for c in &corners {
                let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
                assert!(d > 2.5, "point {:?} too close to corner {:?}", p, c);
            }
        }
    }

    #[test]
    fn torus_implicit_residual() {
        let g = Grid::new(&presets::GRID_3D).unwrap();
        let cloud = sample_shape(&presets::torus(2000, 0), &g).unwrap();
        assert_eq!(cloud.len(), 2000);
        for p in cloud.iter() {
            let (x, y, z) = (p[0] - 25.0, p[1] - 25.0, p[2] - 25.0);
            let ring = (x * x + y * y).sqrt() - 12.0;
            let v = ring * ring + z * z - 25.0;
            assert!(v.abs() <= 1e-9, "residual {v}");
        }
    }

    #[test]
    fn sphere_points_on_radius() {
        let g = Grid::new(&presets::GRID_3D).unwrap();
        let spec = ShapeSpec::new(
            ShapeKind::Sphere {
                center: vec![25.0, 25.0, 25.0],
                radius: 15.0,
            },
            500,
            3,
        );
        let cloud = sample_shape(&spec, &g).unwrap();
        for p in cloud.iter() {
            let r = ((p[0] - 25.0).powi(2) + (p[1] - 25.0).powi(2) + (p[2] - 25.0).powi(2)).sqrt();
            assert!((r - 15.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn bunny_counts_are_exact() {
        let g = grid100();
        let c = bunny_face_cloud(20, 10, 20, 0, &g).unwrap();
        assert_eq!(c.len(), 70);
        let c = bunny_face_cloud(50, 10, 40, 0, &g).unwrap();
        assert_eq!(c.len(), 140);
        assert!(c.check_in_grid(&g).is_ok());
    }

    #[test]
    fn determinism_and_noise() {
        let g = grid100();
        let a = sample_shape(&presets::torus(100, 7), &Grid::new(&presets::GRID_3D).unwrap())
            .unwrap();
        let b = sample_shape(&presets::torus(100, 7), &Grid::new(&presets::GRID_3D).unwrap())
            .unwrap();
        assert_eq!(a.coords(), b.coords());

        let base = sample_shape(&presets::threefold(200, 0), &g).unwrap();
        let clean = add_noise(&base, 0.0, 5, &g).unwrap();
        assert_eq!(clean.coords(), base.coords());

        let n1 = add_noise(&base, 1.0, 5, &g).unwrap();
        let n2 = add_noise(&base, 1.0, 5, &g).unwrap();
        assert_eq!(n1.coords(), n2.coords());
        assert!(n1.check_in_grid(&g).is_ok());
        assert!(add_noise(&base, -1.0, 5, &g).is_err());
    }

    #[test]
    fn noise_radial_spread_is_plausible() {
        let g = grid100();
        let base = sample_shape(&presets::threefold(200, 0), &g).unwrap();
        let noisy = add_noise(&base, 1.0, 11, &g).unwrap();
        // Radial residuals of a circle-like shape under iid coordinate
        // noise have spread close to sigma.
        let mut sq = 0.0;
        let mut mean = 0.0;
        let resids: Vec<f64> = base
            .iter()
            .zip(noisy.iter())
            .map(|(a, b)| {
                let ra = ((a[0] - 50.0).powi(2) + (a[1] - 50.0).powi(2)).sqrt();
                let rb = ((b[0] - 50.0).powi(2) + (b[1] - 50.0).powi(2)).sqrt();
                rb - ra
            })
            .collect();
        for &r in &resids {
            mean += r;
        }
        mean /= resids.len() as f64;
        for &r in &resids {
            sq += (r - mean) * (r - mean);
        }
        let sd = (sq / (resids.len() - 1) as f64).sqrt();
        assert!((0.7..=1.3).contains(&sd), "radial spread {sd}");
    }
}
