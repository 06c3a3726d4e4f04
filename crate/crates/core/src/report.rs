//! Outcome of a reconstruction run.

use crate::grid::ScalarField;

/// What a solver run produced: the final level-set field plus the trace
/// the stopping rule saw. `energy_history` has exactly one entry per
/// iteration performed.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub converged: bool,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub energy_history: Vec<f64>,
    /// Filled by the pipeline once the zero set has been extracted.
    pub hausdorff_to_cloud: Option<f64>,
    pub final_phi: ScalarField,
    /// Present when the run stopped for a reason other than convergence
    /// or the iteration cap (e.g. a blow-up of the explicit scheme).
    pub failure: Option<String>,
}

impl RunReport {
    pub fn final_energy(&self) -> Option<f64> {
        self.energy_history.last().copied()
    }
}
