//! End-to-end reconstruction runs: cloud in, distance field, solver,
//! zero-set extraction, metrics, file outputs. Also the canned experiment
//! recipes exposed by the CLI.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alm::{run_alm_with, AlmParams};
use crate::cloud::PointCloud;
use crate::distance::DistanceField;
use crate::error::{Error, Result};
use crate::explicit::{run_explicit_with, ExplicitParams};
use crate::extract::{extract_zero_set, ZeroSet};
use crate::grid::{Grid, ScalarField};
use crate::io::{
    read_point_cloud, write_energy_csv, write_field, write_zero_set_obj, CloudFormat,
};
use crate::levelset::init_sphere;
use crate::metrics::hausdorff_to_cloud;
use crate::report::RunReport;
use crate::sim::{run_sim_with, SimParams};
use crate::synth::{add_noise, presets, sample_shape, ShapeSpec};

/// Where the input points come from: a file on disk or a generator spec.
#[derive(Debug, Clone)]
pub enum InputSource {
    File {
        path: PathBuf,
        format: Option<CloudFormat>,
    },
    Shape(ShapeSpec),
}

/// Which minimizer to run, with its parameters.
#[derive(Debug, Clone)]
pub enum SolverConfig {
    Sim(SimParams),
    Alm(AlmParams),
    Explicit(ExplicitParams),
}

impl SolverConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SolverConfig::Sim(_) => "sim",
            SolverConfig::Alm(_) => "alm",
            SolverConfig::Explicit(_) => "explicit",
        }
    }
}

/// Everything one reconstruction needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSource,
    pub grid_dims: Vec<usize>,
    /// Center of the initial sphere; grid center when absent.
    pub init_center: Option<Vec<f64>>,
    pub init_radius: f64,
    pub solver: SolverConfig,
    /// Write the level set every this many iterations (needs `output_dir`).
    pub snapshot_every: Option<usize>,
    /// Directory for file outputs; purely in-memory when absent.
    pub output_dir: Option<PathBuf>,
    /// Gaussian noise applied to generated clouds before reconstruction.
    pub noise_sigma: Option<f64>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(input: InputSource, grid_dims: &[usize], solver: SolverConfig) -> Self {
        RunConfig {
            input,
            grid_dims: grid_dims.to_vec(),
            init_center: None,
            init_radius: 30.0,
            solver,
            snapshot_every: None,
            output_dir: None,
            noise_sigma: None,
            seed: 0,
        }
    }
}

/// Serializable run summary written as `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportSummary {
    pub method: String,
    pub grid: Vec<usize>,
    pub points: usize,
    pub converged: bool,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub final_energy: Option<f64>,
    pub hausdorff_to_cloud: Option<f64>,
    pub failure: Option<String>,
    pub outputs: BTreeMap<String, String>,
}

/// A finished reconstruction: the raw report plus derived artifacts.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub zero_set: ZeroSet,
    pub cloud: PointCloud,
    pub summary: ReportSummary,
}

/// Reads the `RECON_THREADS` cap (0 = auto). The numeric kernels run
/// sequentially for bitwise reproducibility, which satisfies any cap; the
/// variable is still validated so misconfiguration fails loudly.
pub fn thread_cap() -> Result<usize> {
    match std::env::var("RECON_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("RECON_THREADS must be an integer, got {v:?}"))),
    }
}

fn load_cloud(config: &RunConfig, grid: &Grid) -> Result<PointCloud> {
    let cloud = match &config.input {
        InputSource::File { path, format } => {
            let format = format
                .or_else(|| CloudFormat::from_extension(path))
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "cannot infer cloud format from {:?}; pass it explicitly",
                        path
                    ))
                })?;
            read_point_cloud(path, format)?
        }
        InputSource::Shape(spec) => sample_shape(spec, grid)?,
    };
    let cloud = match config.noise_sigma {
        Some(sigma) => add_noise(&cloud, sigma, config.seed, grid)?,
        None => cloud,
    };
    cloud.check_in_grid(grid)?;
    Ok(cloud)
}

fn snapshot_path(dir: &Path, iteration: usize) -> PathBuf {
    dir.join(format!("phi_{iteration:05}.vtk"))
}

/// Runs one reconstruction end to end.
///
/// Solver-level failures (blow-up, iteration cap) are recorded in the
/// summary, not raised; hard errors are reserved for bad configuration
/// and I/O.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    thread_cap()?;
    let grid = Grid::new(&config.grid_dims)?;
    let cloud = load_cloud(config, &grid)?;

    let distance = DistanceField::compute(&cloud, &grid)?;
    let center: Vec<f64> = match &config.init_center {
        Some(c) => c.clone(),
        None => grid.dims().iter().map(|&d| (d - 1) as f64 / 2.0).collect(),
    };
    let init = init_sphere(&grid, &center, config.init_radius)?;

    let out_dir = config.output_dir.as_deref();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let cadence = config.snapshot_every.filter(|&c| c > 0);
    let mut snapshot_files: Vec<PathBuf> = Vec::new();
    let mut snapshot = |iteration: usize, phi: &ScalarField| {
        if let (Some(dir), Some(every)) = (out_dir, cadence) {
            if iteration % every == 0 {
                let path = snapshot_path(dir, iteration);
                if write_field(phi, "phi", &path).is_ok() {
                    snapshot_files.push(path);
                }
            }
        }
    };

    let report = match &config.solver {
        SolverConfig::Sim(p) => run_sim_with(distance.field(), &init, p, |s| {
            snapshot(s.iteration, s.phi)
        })?,
        SolverConfig::Alm(p) => run_alm_with(distance.field(), &init, p, |s| {
            snapshot(s.iteration, s.phi)
        })?,
        SolverConfig::Explicit(p) => run_explicit_with(distance.field(), &init, p, |s| {
            snapshot(s.iteration, s.phi)
        })?,
    };

    let zero_set = extract_zero_set(&report.final_phi);
    let hausdorff = hausdorff_to_cloud(&zero_set, &cloud).ok();

    let mut outputs = BTreeMap::new();
    if let Some(dir) = out_dir {
        let phi_path = dir.join("phi.vtk");
        write_field(&report.final_phi, "phi", &phi_path)?;
        outputs.insert("field_vtk".to_string(), phi_path.display().to_string());

        let obj_path = dir.join("zero_set.obj");
        write_zero_set_obj(&zero_set, &obj_path)?;
        outputs.insert("mesh_obj".to_string(), obj_path.display().to_string());

        let csv_path = dir.join("energy.csv");
        write_energy_csv(&report.energy_history, &csv_path)?;
        outputs.insert("energy_csv".to_string(), csv_path.display().to_string());

        for p in &snapshot_files {
            outputs.insert(
                p.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                p.display().to_string(),
            );
        }
    }

    let mut report = report;
    report.hausdorff_to_cloud = hausdorff;
    let summary = ReportSummary {
        method: config.solver.name().to_string(),
        grid: grid.dims().to_vec(),
        points: cloud.len(),
        converged: report.converged,
        iterations: report.iterations,
        wall_seconds: report.wall_seconds,
        final_energy: report.final_energy(),
        hausdorff_to_cloud: hausdorff,
        failure: report.failure.clone(),
        outputs: outputs.clone(),
    };

    if let Some(dir) = out_dir {
        let json_path = dir.join("report.json");
        let text =
            serde_json::to_string_pretty(&summary).expect("summary serializes");
        std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    }

    Ok(RunOutcome {
        report,
        zero_set,
        cloud,
        summary,
    })
}

/// Canonical SIM defaults for the 2-D experiments.
pub fn sim_2d() -> SimParams {
    SimParams::default_2d()
}

/// Canonical ALM defaults for the 2-D experiments (`r = 1.5`).
pub fn alm_2d() -> AlmParams {
    AlmParams::defaults()
}

/// ALM settings used for the volumetric experiments.
pub fn alm_3d() -> AlmParams {
    let mut p = AlmParams::defaults();
    p.r = 1.3;
    p.eta = 0.6;
    p.eps = crate::levelset::SmoothingParam::new(0.5).expect("positive");
    p
}

/// The named experiment recipes behind `reproduce`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Table1,
}

impl std::str::FromStr for Recipe {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig3" => Ok(Recipe::Fig3),
            "fig4" => Ok(Recipe::Fig4),
            "fig5" => Ok(Recipe::Fig5),
            "fig6" => Ok(Recipe::Fig6),
            "fig7" => Ok(Recipe::Fig7),
            "table1" => Ok(Recipe::Table1),
            other => Err(Error::invalid(format!(
                "unknown recipe {other:?} (expected fig3..fig7 or table1)"
            ))),
        }
    }
}

fn recipe_run(
    label: &str,
    spec: ShapeSpec,
    grid_dims: &[usize],
    init_radius: f64,
    solver: SolverConfig,
    noise: Option<f64>,
    out_root: &Path,
) -> Result<ReportSummary> {
    let mut config = RunConfig::new(InputSource::Shape(spec), grid_dims, solver);
    config.init_radius = init_radius;
    config.noise_sigma = noise;
    config.output_dir = Some(out_root.join(label));
    let outcome = run(&config)?;
    Ok(outcome.summary)
}

/// Runs a canned experiment into `out_root/<label>/` per run and returns
/// the labelled summaries.
pub fn reproduce(recipe: Recipe, out_root: &Path) -> Result<Vec<(String, ReportSummary)>> {
    let mut results = Vec::new();
    let g2 = presets::GRID_2D.to_vec();
    match recipe {
        Recipe::Fig3 => {
            let shapes: Vec<(&str, ShapeSpec)> = vec![
                ("triangle", presets::triangle(150, 0)),
                ("ellipse", presets::ellipse(100, 0)),
                ("square", presets::square_missing_corners(80, 0)),
                ("fivefold", presets::fivefold(200, 0)),
            ];
            for (name, spec) in shapes {
                for (method, solver) in [
                    ("sim", SolverConfig::Sim(sim_2d())),
                    ("alm", SolverConfig::Alm(alm_2d())),
                ] {
                    let label = format!("{name}_{method}");
                    let s = recipe_run(&label, spec.clone(), &g2, 30.0, solver, None, out_root)?;
                    results.push((label, s));
                }
            }
        }
        Recipe::Fig4 => {
            let g3 = presets::GRID_3D.to_vec();
            let spec = presets::torus(2000, 0);
            let mut sim = SimParams::default_3d();
            sim.eps = crate::levelset::SmoothingParam::new(0.5).expect("positive");
            for (label, solver) in [
                ("torus_alm", SolverConfig::Alm(alm_3d())),
                ("torus_sim", SolverConfig::Sim(sim)),
            ] {
                let s = recipe_run(label, spec.clone(), &g3, 20.0, solver, None, out_root)?;
                results.push((label.to_string(), s));
            }
        }
        Recipe::Fig5 => {
            for (n1, n2, n3) in [(20, 10, 20), (50, 10, 20), (20, 10, 40), (50, 10, 40)] {
                let label = format!("bunny_{n1}_{n2}_{n3}");
                let spec = ShapeSpec::new(
                    crate::synth::ShapeKind::BunnyFace { n1, n2, n3 },
                    n1 + n2 + 2 * n3,
                    0,
                );
                let mut config =
                    RunConfig::new(InputSource::Shape(spec), &g2, SolverConfig::Alm(alm_2d()));
                config.output_dir = Some(out_root.join(&label));
                config.snapshot_every = Some(5);
                let outcome = run(&config)?;
                results.push((label, outcome.summary));
            }
        }
        Recipe::Fig6 => {
            let spec = presets::threefold(200, 0);
            for (method, solver) in [
                ("sim", SolverConfig::Sim(sim_2d())),
                ("alm", SolverConfig::Alm(alm_2d())),
            ] {
                for (tag, noise) in [("clean", None), ("noisy", Some(1.0))] {
                    let label = format!("threefold_{tag}_{method}");
                    let s = recipe_run(
                        &label,
                        spec.clone(),
                        &g2,
                        30.0,
                        solver.clone(),
                        noise,
                        out_root,
                    )?;
                    results.push((label, s));
                }
            }
        }
        Recipe::Fig7 => {
            results.extend(reproduce_diagnostics(out_root)?);
        }
        Recipe::Table1 => {
            let shapes: Vec<(&str, ShapeSpec)> = vec![
                ("triangle", presets::triangle(150, 0)),
                ("ellipse", presets::ellipse(100, 0)),
                ("square", presets::square_missing_corners(80, 0)),
                ("fivefold", presets::fivefold(200, 0)),
            ];
            for (name, spec) in shapes {
                for r in [0.5, 1.0, 1.5, 2.0] {
                    let mut p = alm_2d();
                    p.r = r;
                    let label = format!("{name}_alm_r{r}");
                    let s = recipe_run(
                        &label,
                        spec.clone(),
                        &g2,
                        30.0,
                        SolverConfig::Alm(p),
                        None,
                        out_root,
                    )?;
                    results.push((label, s));
                }
                let s = recipe_run(
                    &format!("{name}_sim"),
                    spec.clone(),
                    &g2,
                    30.0,
                    SolverConfig::Sim(sim_2d()),
                    None,
                    out_root,
                )?;
                results.push((format!("{name}_sim"), s));
                let s = recipe_run(
                    &format!("{name}_explicit"),
                    spec.clone(),
                    &g2,
                    30.0,
                    SolverConfig::Explicit(ExplicitParams::defaults()),
                    None,
                    out_root,
                )?;
                results.push((format!("{name}_explicit"), s));
            }
            // Summary table for quick reading.
            let mut table = String::from("label,converged,iterations,wall_seconds\n");
            for (label, s) in &results {
                table.push_str(&format!(
                    "{label},{},{},{}\n",
                    s.converged, s.iterations, s.wall_seconds
                ));
            }
            let path = out_root.join("table1.csv");
            std::fs::write(&path, table).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(results)
}

/// Diagnostic-field export: runs ALM on the five-fold cloud with `r = 2`,
/// captures snapshots at the requested iterations and writes every
/// diagnostic as a VTK field.
fn reproduce_diagnostics(out_root: &Path) -> Result<Vec<(String, ReportSummary)>> {
    use crate::alm::AlmState;
    use crate::analysis::DiagnosticBundle;

    let grid = Grid::new(&presets::GRID_2D)?;
    let cloud = sample_shape(&presets::fivefold(200, 0), &grid)?;
    let distance = DistanceField::compute(&cloud, &grid)?;
    let init = init_sphere(&grid, &[50.0, 50.0], 30.0)?;
    let mut params = alm_2d();
    params.r = 2.0;

    let capture_at = [2usize, 3, 4, 7, 8, 10, 11, 13];
    let dir = out_root.join("fivefold_diagnostics");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut io_error: Option<Error> = None;
    let report = run_alm_with(distance.field(), &init, &params, |snap| {
        if !capture_at.contains(&snap.iteration) || io_error.is_some() {
            return;
        }
        let state = AlmState {
            phi: snap.phi.clone(),
            p: snap.p.clone(),
            lambda: snap.lambda.clone(),
            iteration: snap.iteration,
        };
        let bundle =
            DiagnosticBundle::compute(&state, snap.lambda_prev, distance.field(), &params, 1e-8);
        let mask_field = |mask: &[bool]| {
            ScalarField::from_values(
                &grid,
                mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            )
            .expect("mask matches grid")
        };
        let fields: Vec<(&str, ScalarField)> = vec![
            ("q", bundle.q),
            ("disc", bundle.disc),
            ("alpha", bundle.alpha),
            ("r_lower", bundle.r_lower),
            ("r_upper", bundle.r_upper),
            ("bounds_defined", mask_field(&bundle.bounds_defined)),
            ("shrink_margin", bundle.shrink_margin),
            ("active", mask_field(&bundle.active_mask)),
            ("band", mask_field(&bundle.band_mask)),
        ];
        for (name, field) in fields {
            let path = dir.join(format!("{name}_{:03}.vtk", snap.iteration));
            if let Err(e) = write_field(&field, name, &path) {
                io_error = Some(e);
                return;
            }
        }
    })?;
    if let Some(e) = io_error {
        return Err(e);
    }

    let zero_set = extract_zero_set(&report.final_phi);
    let hausdorff = hausdorff_to_cloud(&zero_set, &cloud).ok();
    let summary = ReportSummary {
        method: "alm".into(),
        grid: grid.dims().to_vec(),
        points: cloud.len(),
        converged: report.converged,
        iterations: report.iterations,
        wall_seconds: report.wall_seconds,
        final_energy: report.final_energy(),
        hausdorff_to_cloud: hausdorff,
        failure: report.failure.clone(),
        outputs: BTreeMap::new(),
    };
    Ok(vec![("fivefold_diagnostics".to_string(), summary)])
}
