use std::sync::Arc;

use ndarray::{Array2, Zip};

use crate::error::{invalid, Error, Result};
use crate::grid::PolarGrid;

/// Grid function, values laid out `(radial, angular)`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<PolarGrid>,
    values: Array2<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Arc<PolarGrid>) -> Self {
        let values = Array2::zeros(grid.shape());
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<PolarGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn(grid.shape(), |(i, j)| f(grid.radial_nodes()[i], grid.angles()[j]));
        Self { grid, values }
    }

    /// Wrap existing values; the shape must match and every entry must be finite.
    pub fn from_values(grid: Arc<PolarGrid>, values: Array2<f64>) -> Result<Self> {
        check_values(&grid, &values, "values")?;
        Ok(Self { grid, values })
    }

    pub(crate) fn new_unchecked(grid: Arc<PolarGrid>, values: Array2<f64>) -> Self {
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new_unchecked(self.grid.clone(), &self.values * c)
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let mut out = self.values.clone();
        Zip::from(&mut out)
            .and(&other.values)
            .for_each(|o, &y| *o = a * *o + b * y);
        Ok(Self::new_unchecked(self.grid.clone(), out))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Polar-component vector field `w_r e_r + w_θ e_θ`.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<PolarGrid>,
    radial: Array2<f64>,
    angular: Array2<f64>,
}

impl VectorField {
    pub fn zeros(grid: Arc<PolarGrid>) -> Self {
        let radial = Array2::zeros(grid.shape());
        let angular = Array2::zeros(grid.shape());
        Self { grid, radial, angular }
    }

    /// Build from a function returning `(w_r, w_θ)` at `(r, θ)`.
    pub fn from_fn(grid: Arc<PolarGrid>, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let (nr, nt) = grid.shape();
        let mut radial = Array2::zeros((nr, nt));
        let mut angular = Array2::zeros((nr, nt));
        for i in 0..nr {
            for j in 0..nt {
                let (a, b) = f(grid.radial_nodes()[i], grid.angles()[j]);
                radial[(i, j)] = a;
                angular[(i, j)] = b;
            }
        }
        Self { grid, radial, angular }
    }

    pub fn from_components(grid: Arc<PolarGrid>, radial: Array2<f64>, angular: Array2<f64>) -> Result<Self> {
        check_values(&grid, &radial, "radial_component")?;
        check_values(&grid, &angular, "angular_component")?;
        Ok(Self { grid, radial, angular })
    }

    pub(crate) fn new_unchecked(grid: Arc<PolarGrid>, radial: Array2<f64>, angular: Array2<f64>) -> Self {
        Self { grid, radial, angular }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn radial(&self) -> &Array2<f64> {
        &self.radial
    }

    pub fn angular(&self) -> &Array2<f64> {
        &self.angular
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new_unchecked(self.grid.clone(), &self.radial * c, &self.angular * c)
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &VectorField, b: f64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self::new_unchecked(
            self.grid.clone(),
            &self.radial * a + &other.radial * b,
            &self.angular * a + &other.angular * b,
        ))
    }

    /// Largest pointwise speed `|w|`.
    pub fn max_speed(&self) -> f64 {
        self.radial
            .iter()
            .zip(self.angular.iter())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> f64 {
        let d =
            |x: &Array2<f64>, y: &Array2<f64>| x.iter().zip(y.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        d(&self.radial, &other.radial).max(d(&self.angular, &other.angular))
    }
}

pub(crate) fn same_grid(a: &PolarGrid, b: &PolarGrid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn check_values(grid: &PolarGrid, values: &Array2<f64>, what: &'static str) -> Result<()> {
    if values.dim() != grid.shape() {
        return Err(invalid(
            what,
            format!("shape {:?} does not match grid {:?}", values.dim(), grid.shape()),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid(what, "contains non-finite entries"));
    }
    Ok(())
}
