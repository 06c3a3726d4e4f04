//! Reconstruction of curves (2-D) and surfaces (3-D) from unorganized
//! point clouds, as the zero level set of a scalar field that minimizes
//! the distance-weighted minimal surface energy.
//!
//! The crate provides:
//!
//! * a periodic finite-difference grid core ([`grid`]),
//! * an FFT Helmholtz solver shared by the implicit steps ([`spectral`]),
//! * Eikonal fast sweeping for the cloud distance field ([`distance`]),
//! * level-set machinery: smoothed Heaviside/delta, reinitialization,
//!   energy and the windowed stopping rule ([`levelset`]),
//! * three minimizers: semi-implicit ([`sim`]), augmented-Lagrangian
//!   ([`alm`]) and an explicit baseline ([`explicit`]),
//! * shrinkage/penalty diagnostics ([`analysis`]),
//! * parametric test clouds ([`synth`]), zero-set extraction
//!   ([`extract`]), metrics ([`metrics`]), file formats ([`io`]) and the
//!   end-to-end pipeline ([`pipeline`]).

pub mod alm;
pub mod analysis;
pub mod cloud;
pub mod distance;
pub mod error;
pub mod explicit;
pub mod extract;
pub mod grid;
pub mod io;
pub mod levelset;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod sim;
pub mod spectral;
pub mod synth;

pub use cloud::PointCloud;
pub use error::{Error, Result};
pub use grid::{Grid, ScalarField, VectorField};
pub use report::RunReport;
