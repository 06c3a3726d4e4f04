//! Uniform Cartesian grid and the periodic finite-difference operators.
//!
//! The computational domain is discretized with unit spacing in every
//! direction. All stencils wrap around (periodic topology), which is what
//! lets the elliptic solves diagonalize in the discrete Fourier basis.
//!
//! With `S` the unit forward shift along an axis, the operators are
//!
//! * backward difference  `∂⁻ = I − S⁻¹`
//! * forward difference   `∂⁺ = S − I`
//! * gradient component   `(∂⁻ + ∂⁺)/2`  (centered average)
//! * divergence           `Σ_axes (∂⁺vᵏ + ∂⁻vᵏ)/2`
//! * Laplacian            `Σ_axes (∂⁺ − ∂⁻)`  (compact 5/7-point stencil)
//!
//! Storage is axis-major: axis 0 varies slowest, the last axis is
//! contiguous. Every module in this crate assumes that layout.

use crate::error::{Error, Result};

/// Uniform Cartesian lattice in 2 or 3 dimensions, unit spacing, periodic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    dims: Vec<usize>,
}

impl Grid {
    /// Grid spacing is fixed; the discretization assumes Δx = Δy = Δz = 1.
    pub const SPACING: f64 = 1.0;

    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 || dims.len() > 3 {
            return Err(Error::invalid(format!(
                "grid must have 2 or 3 axes, got {}",
                dims.len()
            )));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 4) {
            return Err(Error::invalid(format!("every grid dim must be >= 4, got {d}")));
        }
        Ok(Grid { dims: dims.to_vec() })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of axes (2 or 3).
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of grid nodes.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Axis-major strides: the last axis is contiguous.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len() - 1).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// Flat index of a multi-index.
    pub fn index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.dims[k]);
            flat = flat * self.dims[k] + i;
        }
        flat
    }

    /// Multi-index of a flat index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            idx[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        idx
    }

    /// Length of the box diagonal spanned by the node extents.
    pub fn diameter(&self) -> f64 {
        self.dims
            .iter()
            .map(|&d| ((d - 1) as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// One real value per grid node, axis-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    /// Evaluate `f` at every node's multi-index.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        let mut idx = vec![0usize; grid.ndim()];
        for flat in 0..grid.len() {
            let mut rem = flat;
            for k in (0..grid.ndim()).rev() {
                idx[k] = rem % grid.dims()[k];
                rem /= grid.dims()[k];
            }
            values.push(f(&idx));
        }
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let i = self.grid.index(idx);
        self.values[i] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "fields must share a grid");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        self.map(|v| a * v)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_with(other, |a, b| a - b)
    }
}

/// One scalar component per grid axis.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("vector field needs at least one component"));
        }
        let grid = components[0].grid().clone();
        if components.len() != grid.ndim() {
            return Err(Error::invalid(format!(
                "vector field needs {} components, got {}",
                grid.ndim(),
                components.len()
            )));
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::invalid("vector components must share the same grid"));
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            components: (0..grid.ndim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut ScalarField {
        &mut self.components[axis]
    }

    /// Nodewise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let grid = self.grid().clone();
        let mut out = vec![0.0; grid.len()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        for o in out.iter_mut() {
            *o = o.sqrt();
        }
        ScalarField { grid, values: out }
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}

/// Applies `f(line)` to every 1-D line of the field along `axis`, in place.
///
/// `line` holds the values along the axis in order; strided gather/scatter
/// keeps the caller oblivious of the layout.
fn for_each_line(field: &mut ScalarField, axis: usize, mut f: impl FnMut(&mut [f64])) {
    let dims = field.grid.dims().to_vec();
    let strides = field.grid.strides();
    let n = dims[axis];
    let stride = strides[axis];
    let mut line = vec![0.0; n];

    // Enumerate line starts: all multi-indices with the axis coordinate zero.
    let outer: usize = field.grid.len() / n;
    for o in 0..outer {
        // Decompose o over the remaining axes to find the base offset.
        let mut base = 0;
        let mut rem = o;
        for k in (0..dims.len()).rev() {
            if k == axis {
                continue;
            }
            let i = rem % dims[k];
            rem /= dims[k];
            base += i * strides[k];
        }
        for i in 0..n {
            line[i] = field.values[base + i * stride];
        }
        f(&mut line);
        for i in 0..n {
            field.values[base + i * stride] = line[i];
        }
    }
}

fn check_axis(u: &ScalarField, axis: usize) -> Result<()> {
    if axis >= u.grid().ndim() {
        return Err(Error::invalid(format!(
            "axis {axis} out of range for a {}-axis grid",
            u.grid().ndim()
        )));
    }
    Ok(())
}

/// Backward difference `u_i − u_{i−1}` along `axis`, wrapping the first row
/// to the last.
pub fn backward_diff(u: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(u, axis)?;
    let mut out = u.clone();
    for_each_line(&mut out, axis, |line| {
        let first = line[0] - line[line.len() - 1];
        for i in (1..line.len()).rev() {
            line[i] -= line[i - 1];
        }
        line[0] = first;
    });
    Ok(out)
}

/// Forward difference `u_{i+1} − u_i` along `axis`, wrapping the last row
/// to the first.
pub fn forward_diff(u: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(u, axis)?;
    let mut out = u.clone();
    for_each_line(&mut out, axis, |line| {
        let last = line[0] - line[line.len() - 1];
        for i in 0..line.len() - 1 {
            line[i] = line[i + 1] - line[i];
        }
        let n = line.len();
        line[n - 1] = last;
    });
    Ok(out)
}

/// Centered-average gradient: each component is `(∂⁻u + ∂⁺u)/2`.
pub fn gradient(u: &ScalarField) -> VectorField {
    let components = (0..u.grid().ndim())
        .map(|axis| {
            let b = backward_diff(u, axis).expect("axis in range");
            let f = forward_diff(u, axis).expect("axis in range");
            b.zip_with(&f, |a, c| 0.5 * (a + c))
        })
        .collect();
    VectorField { components }
}

/// Centered-average divergence: `Σ_axes (∂⁺vᵏ + ∂⁻vᵏ)/2`.
pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid().clone();
    let mut out = ScalarField::zeros(&grid);
    for (axis, c) in v.components().iter().enumerate() {
        let b = backward_diff(c, axis).expect("axis in range");
        let f = forward_diff(c, axis).expect("axis in range");
        for ((o, db), df) in out.values_mut().iter_mut().zip(b.values()).zip(f.values()) {
            *o += 0.5 * (db + df);
        }
    }
    out
}

/// Compact periodic Laplacian: `Σ_axes (u_{+1} − 2u + u_{−1})`.
pub fn laplacian(u: &ScalarField) -> ScalarField {
    let mut acc = ScalarField::zeros(u.grid());
    for axis in 0..u.grid().ndim() {
        let mut tmp = u.clone();
        for_each_line(&mut tmp, axis, |line| {
            let n = line.len();
            let orig: Vec<f64> = line.to_vec();
            for i in 0..n {
                let prev = orig[(i + n - 1) % n];
                let next = orig[(i + 1) % n];
                line[i] = next - 2.0 * orig[i] + prev;
            }
        });
        for (a, t) in acc.values_mut().iter_mut().zip(tmp.values()) {
            *a += t;
        }
    }
    acc
}
