//! Regular 2-D grids, scalar fields sampled on them, and the level-set
//! machinery built on top (differential operators, regularized step
//! functions, signed-distance reinitialization, topology queries).

mod levelset;
mod ops;
mod topology;

pub use levelset::{
    extract_segments, make_circle_sdf, mask_to_sdf, reinitialize_sdf, LevelSetState, Segment,
};
pub use ops::{
    curvature, dirac_eps, gaussian_convolve, gaussian_kernel_1d, gradient, gradient_magnitude,
    heaviside_eps, GRADIENT_FLOOR,
};
pub use topology::{zero_level_components, Components};

use crate::error::{Error, Result};

/// Regular grid. Cell `(x, y)` sits at world position
/// `(x * spacing, y * spacing)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    width: usize,
    height: usize,
    spacing: f64,
}

impl Grid2D {
    /// Unit-spaced grid.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::with_spacing(width, height, 1.0)
    }

    pub fn with_spacing(width: usize, height: usize, spacing: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "grid must be non-empty, got {width}x{height}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!(
                "spacing must be > 0, got {spacing}"
            )));
        }
        Ok(Grid2D {
            width,
            height,
            spacing,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Whole-sample mirror of a column index: ghost `-1` maps to `1`.
    #[inline]
    pub fn mirror_x(&self, x: isize) -> usize {
        mirror(x, self.width)
    }

    #[inline]
    pub fn mirror_y(&self, y: isize) -> usize {
        mirror(y, self.height)
    }

    pub fn same_shape(&self, other: &Grid2D) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn ensure_same(&self, other: &Grid2D, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }
}

/// Reflects `i` into `0..n` about the end samples (period `2(n-1)`).
#[inline]
pub(crate) fn mirror(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let last = n as isize - 1;
    if (0..=last).contains(&i) {
        return i as usize;
    }
    let period = 2 * last;
    let r = i.rem_euclid(period);
    (if r > last { period - r } else { r }) as usize
}

/// Half-sample mirror: ghost `-1` maps to `0` (period `2n`).
#[inline]
pub(crate) fn mirror_half(i: isize, n: usize) -> usize {
    let n = n as isize;
    if (0..n).contains(&i) {
        return i as usize;
    }
    let period = 2 * n;
    let r = i.rem_euclid(period);
    (if r >= n { period - 1 - r } else { r }) as usize
}

/// Real-valued samples on a [`Grid2D`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.width,
                grid.height,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at cell ({}, {})",
                i % grid.width,
                i / grid.width
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn filled(grid: Grid2D, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::filled(grid, 0.0)
    }

    /// Builds a field from a function of the cell indices `(x, y)`.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for y in 0..grid.height {
            for x in 0..grid.width {
                values.push(f(x, y));
            }
        }
        ScalarField { grid, values }
    }

    pub(crate) fn from_vec_unchecked(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.grid.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        let w = self.grid.width;
        self.values[y * w + x] = v;
    }

    /// Value with whole-sample mirrored ghost cells outside the grid.
    #[inline]
    pub fn get_mirrored(&self, x: isize, y: isize) -> f64 {
        self.get(self.grid.mirror_x(x), self.grid.mirror_y(y))
    }

    /// Bilinear interpolation at fractional cell coordinates, clamped to the grid.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let w = self.grid.width;
        let h = self.grid.height;
        let x = x.clamp(0.0, (w - 1) as f64);
        let y = y.clamp(0.0, (h - 1) as f64);
        let x0 = (x.floor() as usize).min(w.saturating_sub(2));
        let y0 = (y.floor() as usize).min(h.saturating_sub(2));
        let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let a = self.get(x0, y0);
        let b = self.get(x1, y0);
        let c = self.get(x0, y1);
        let d = self.get(x1, y1);
        (a * (1.0 - fx) + b * fx) * (1.0 - fy) + (c * (1.0 - fx) + d * fx) * fy
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.grid.ensure_same(&other.grid, "zip_map")?;
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|v| v * s)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Left-right mirror image of the field.
    pub fn flip_x(&self) -> ScalarField {
        let w = self.grid.width;
        ScalarField::from_fn(self.grid, |x, y| self.get(w - 1 - x, y))
    }
}
