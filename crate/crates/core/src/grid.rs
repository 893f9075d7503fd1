//! Discrete annulus and disk geometry.
//!
//! The radial direction uses Chebyshev–Gauss–Lobatto nodes (or uniform nodes for
//! transport experiments) and the angular direction is uniform and periodic. On
//! the disk the radial line is the positive half of a Chebyshev grid on
//! `[-R, R]` with an even number of points, so there is no node at the origin;
//! radial operators are folded per Fourier mode using the parity
//! `f_k(-r) = (-1)^k f_k(r)` of a smooth field.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::spectral::{
    bary_coefficients, bary_diff_matrix, cgl_bary_weights, cgl_points, clenshaw_curtis, interpolatory_weights,
    lagrange_integer_weights, local_fd_matrices, AngularTransform,
};

/// Radial node placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RadialSpacing {
    #[default]
    Chebyshev,
    Uniform,
}

/// Parity of a modal radial profile under `r -> -r`. Only meaningful on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of mode `k` of a scalar field.
    pub fn scalar(k: usize) -> Self {
        if k.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity of mode `k` of a polar vector component (`e_r`, `e_θ` flip sign).
    pub fn vector(k: usize) -> Self {
        Self::scalar(k + 1)
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
enum RadialOps {
    Annulus {
        d1: DMatrix<f64>,
        d2: DMatrix<f64>,
    },
    Disk {
        d1: [DMatrix<f64>; 2],
        d2: [DMatrix<f64>; 2],
    },
}

/// Radial interpolation data. `line` lists the abscissae of the interpolation
/// line together with the grid node they sample and whether the sample is the
/// mirror image through the origin.
#[derive(Debug, Clone)]
enum RadialInterp {
    Barycentric {
        line: Vec<f64>,
        weights: Vec<f64>,
        source: Vec<(usize, bool)>,
    },
    LocalCubic,
}

/// Annulus `{r_inner < r < r_outer}` or disk (`r_inner == 0`) in polar coordinates.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    r_inner: f64,
    r_outer: f64,
    n_radial: usize,
    n_angular: usize,
    spacing: RadialSpacing,
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    angles: Vec<f64>,
    ops: RadialOps,
    interp: RadialInterp,
    transform: AngularTransform,
}

fn check_angular(n_angular: usize) -> Result<()> {
    if n_angular < 8 || !n_angular.is_multiple_of(2) {
        return Err(Error::InvalidGrid {
            param: "n_angular",
            reason: format!("must be even and >= 8, got {n_angular}"),
        });
    }
    Ok(())
}

fn check_radial(n_radial: usize) -> Result<()> {
    if n_radial < 8 {
        return Err(Error::InvalidGrid {
            param: "n_radial",
            reason: format!("must be >= 8, got {n_radial}"),
        });
    }
    Ok(())
}

impl PolarGrid {
    /// Annulus with Chebyshev radial nodes.
    pub fn annulus(r_inner: f64, r_outer: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        Self::annulus_with_spacing(r_inner, r_outer, n_radial, n_angular, RadialSpacing::Chebyshev)
    }

    pub fn annulus_with_spacing(
        r_inner: f64,
        r_outer: f64,
        n_radial: usize,
        n_angular: usize,
        spacing: RadialSpacing,
    ) -> Result<Self> {
        if !(r_inner > 0.0 && r_inner.is_finite()) {
            return Err(Error::InvalidGrid {
                param: "r_inner",
                reason: format!("must be positive, got {r_inner}"),
            });
        }
        if !(r_outer > r_inner && r_outer.is_finite()) {
            return Err(Error::InvalidGrid {
                param: "r_inner",
                reason: format!("r_inner ({r_inner}) must be < r_outer ({r_outer})"),
            });
        }
        check_radial(n_radial)?;
        check_angular(n_angular)?;

        let h = r_outer - r_inner;
        let (radial_nodes, radial_weights, ops, interp) = match spacing {
            RadialSpacing::Chebyshev => {
                let x = cgl_points(n_radial);
                let cc = clenshaw_curtis(n_radial);
                // x is decreasing; reverse so radii increase
                let nodes: Vec<f64> = (0..n_radial)
                    .map(|i| r_inner + 0.5 * h * (1.0 + x[n_radial - 1 - i]))
                    .collect();
                let weights: Vec<f64> = (0..n_radial)
                    .map(|i| 0.5 * h * cc[n_radial - 1 - i] * nodes[i])
                    .collect();
                let bw = cgl_bary_weights(n_radial);
                let d1 = bary_diff_matrix(&nodes, &bw);
                let d2 = &d1 * &d1;
                let interp = RadialInterp::Barycentric {
                    line: nodes.clone(),
                    weights: bw,
                    source: (0..n_radial).map(|i| (i, false)).collect(),
                };
                (nodes, weights, RadialOps::Annulus { d1, d2 }, interp)
            }
            RadialSpacing::Uniform => {
                let dr = h / (n_radial - 1) as f64;
                let nodes: Vec<f64> = (0..n_radial).map(|i| r_inner + dr * i as f64).collect();
                let weights: Vec<f64> = nodes
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| {
                        let end = i == 0 || i == n_radial - 1;
                        dr * r * if end { 0.5 } else { 1.0 }
                    })
                    .collect();
                let (d1, d2) = local_fd_matrices(&nodes, 5);
                (nodes, weights, RadialOps::Annulus { d1, d2 }, RadialInterp::LocalCubic)
            }
        };

        Ok(Self {
            r_inner,
            r_outer,
            n_radial,
            n_angular,
            spacing,
            radial_nodes,
            radial_weights,
            angles: angles(n_angular),
            ops,
            interp,
            transform: AngularTransform::new(n_angular),
        })
    }

    /// Disk of radius `r_outer` with `n_radial` nodes in `(0, r_outer]`.
    pub fn disk(r_outer: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(r_outer > 0.0 && r_outer.is_finite()) {
            return Err(Error::InvalidGrid {
                param: "r_outer",
                reason: format!("must be positive, got {r_outer}"),
            });
        }
        check_radial(n_radial)?;
        check_angular(n_angular)?;

        let n = n_radial;
        let full = cgl_points(2 * n);
        let full_w = cgl_bary_weights(2 * n);
        // half index i <-> full index n-1-i; mirror of full index j is 2n-1-j
        let full_of = |i: usize| n - 1 - i;
        let nodes: Vec<f64> = (0..n).map(|i| r_outer * full[full_of(i)]).collect();

        let s_nodes: Vec<f64> = nodes.iter().map(|r| 2.0 * (r / r_outer).powi(2) - 1.0).collect();
        let w =
            interpolatory_weights(&s_nodes).ok_or_else(|| Error::Singular("disk quadrature moment system".into()))?;
        let weights: Vec<f64> = w.iter().map(|w| 0.25 * r_outer * r_outer * w).collect();

        let line: Vec<f64> = full.iter().map(|x| r_outer * x).collect();
        let d_full = bary_diff_matrix(&line, &full_w);
        let d2_full = &d_full * &d_full;
        let fold = |m: &DMatrix<f64>, sign: f64| {
            DMatrix::from_fn(n, n, |i, l| {
                let (ji, jl) = (full_of(i), full_of(l));
                m[(ji, jl)] + sign * m[(ji, 2 * n - 1 - jl)]
            })
        };
        let ops = RadialOps::Disk {
            d1: [fold(&d_full, 1.0), fold(&d_full, -1.0)],
            d2: [fold(&d2_full, 1.0), fold(&d2_full, -1.0)],
        };
        let source = (0..2 * n)
            .map(|j| {
                if j < n {
                    (n - 1 - j, false)
                } else {
                    (n - 1 - (2 * n - 1 - j), true)
                }
            })
            .collect();

        Ok(Self {
            r_inner: 0.0,
            r_outer,
            n_radial,
            n_angular,
            spacing: RadialSpacing::Chebyshev,
            radial_nodes: nodes,
            radial_weights: weights,
            angles: angles(n_angular),
            ops,
            interp: RadialInterp::Barycentric {
                line,
                weights: full_w,
                source,
            },
            transform: AngularTransform::new(n_angular),
        })
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    pub fn n_radial(&self) -> usize {
        self.n_radial
    }

    pub fn n_angular(&self) -> usize {
        self.n_angular
    }

    pub fn spacing(&self) -> RadialSpacing {
        self.spacing
    }

    pub fn is_disk(&self) -> bool {
        self.r_inner == 0.0
    }

    /// Number of inner boundary components `N` (1 for the annulus, 0 for the disk).
    pub fn n_boundary_components(&self) -> usize {
        if self.is_disk() {
            0
        } else {
            1
        }
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_angular as f64
    }

    /// Weights `w_i` with `Σ w_i f(r_i) ≈ ∫ f(r) r dr`.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// Per-node area weights, `(radial, angular)` layout.
    pub fn quadrature_weights(&self) -> Array2<f64> {
        let dth = self.dtheta();
        Array2::from_shape_fn(self.shape(), |(i, _)| self.radial_weights[i] * dth)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_radial, self.n_angular)
    }

    pub fn area(&self) -> f64 {
        PI * (self.r_outer.powi(2) - self.r_inner.powi(2))
    }

    /// Grid nodes on the boundary: `(inner, outer)` radial indices. The disk has no inner one.
    pub fn boundary_indices(&self) -> Vec<usize> {
        if self.is_disk() {
            vec![self.n_radial - 1]
        } else {
            vec![0, self.n_radial - 1]
        }
    }

    /// Smallest distance between neighbouring nodes in either direction.
    pub fn min_spacing(&self) -> f64 {
        let dr = self
            .radial_nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let dr = if self.is_disk() {
            dr.min(2.0 * self.radial_nodes[0])
        } else {
            dr
        };
        dr.min(self.radial_nodes[0] * self.dtheta())
    }

    /// Size of the radial cell adjacent to node `i` (larger neighbour gap).
    pub fn radial_cell(&self, i: usize) -> f64 {
        let n = self.n_radial;
        let left = if i > 0 {
            self.radial_nodes[i] - self.radial_nodes[i - 1]
        } else {
            0.0
        };
        let right = if i + 1 < n {
            self.radial_nodes[i + 1] - self.radial_nodes[i]
        } else {
            0.0
        };
        left.max(right)
    }

    /// Whether two grids describe the same discretization.
    pub fn same_as(&self, other: &PolarGrid) -> bool {
        self.r_inner == other.r_inner
            && self.r_outer == other.r_outer
            && self.n_radial == other.n_radial
            && self.n_angular == other.n_angular
            && self.spacing == other.spacing
    }

    pub fn transform(&self) -> &AngularTransform {
        &self.transform
    }

    pub fn n_modes(&self) -> usize {
        self.n_angular / 2 + 1
    }

    /// Radial first-derivative matrix acting on profiles of the given parity.
    pub fn d1(&self, parity: Parity) -> &DMatrix<f64> {
        match &self.ops {
            RadialOps::Annulus { d1, .. } => d1,
            RadialOps::Disk { d1, .. } => &d1[(parity == Parity::Odd) as usize],
        }
    }

    pub fn d2(&self, parity: Parity) -> &DMatrix<f64> {
        match &self.ops {
            RadialOps::Annulus { d2, .. } => d2,
            RadialOps::Disk { d2, .. } => &d2[(parity == Parity::Odd) as usize],
        }
    }

    /// Scalar Laplacian of Fourier mode `k`: `∂_rr + (1/r)∂_r - k²/r²`.
    pub fn mode_laplacian(&self, k: usize, parity: Parity) -> DMatrix<f64> {
        let n = self.n_radial;
        let d1 = self.d1(parity);
        let mut l = self.d2(parity).clone();
        let kk = (k * k) as f64;
        for i in 0..n {
            let r = self.radial_nodes[i];
            for j in 0..n {
                l[(i, j)] += d1[(i, j)] / r;
            }
            l[(i, i)] -= kk / (r * r);
        }
        l
    }

    /// Quadrature of `∫_Ω f dA`.
    pub fn integrate(&self, f: &ScalarField) -> f64 {
        self.integrate_values(f.values())
    }

    pub(crate) fn integrate_values(&self, values: &Array2<f64>) -> f64 {
        let dth = self.dtheta();
        values
            .rows()
            .into_iter()
            .zip(&self.radial_weights)
            .map(|(row, w)| w * row.sum())
            .sum::<f64>()
            * dth
    }

    /// Counterclockwise circulation `∮ w·t ds` of `w` on a boundary circle.
    ///
    /// `component_index` 0 is the inner circle Γ₁ (annulus only) and -1 the outer circle Γ.
    pub fn circulation(&self, w: &VectorField, component_index: i32) -> Result<f64> {
        let i = match (component_index, self.is_disk()) {
            (0, false) => 0,
            (-1, _) => self.n_radial - 1,
            _ => {
                let available = if self.is_disk() {
                    "-1 (outer)".to_string()
                } else {
                    "0 (inner), -1 (outer)".to_string()
                };
                return Err(Error::ComponentOutOfRange {
                    index: component_index,
                    available,
                });
            }
        };
        let r = self.radial_nodes[i];
        Ok(r * self.dtheta() * w.angular().row(i).sum())
    }

    /// Interpolator for point evaluation with an angular Lagrange stencil of `stencil` points.
    pub fn interpolator(&self, stencil: usize) -> Interpolator<'_> {
        let stencil = stencil.clamp(2, self.n_angular);
        let radial_len = match &self.interp {
            RadialInterp::Barycentric { line, .. } => line.len(),
            RadialInterp::LocalCubic => 4,
        };
        Interpolator {
            grid: self,
            stencil,
            radial_coef: vec![0.0; radial_len],
            radial_src: vec![(0, false); radial_len],
            angular_coef: vec![0.0; stencil],
            angular_idx: vec![0; stencil],
            mirror_idx: vec![0; stencil],
        }
    }
}

fn angles(n: usize) -> Vec<f64> {
    let dth = 2.0 * PI / n as f64;
    (0..n).map(|j| j as f64 * dth).collect()
}

/// Point evaluation of grid functions: global barycentric (or local cubic on
/// uniform nodes) in `r`, periodic Lagrange in `θ`.
pub struct Interpolator<'a> {
    grid: &'a PolarGrid,
    stencil: usize,
    radial_coef: Vec<f64>,
    radial_src: Vec<(usize, bool)>,
    angular_coef: Vec<f64>,
    angular_idx: Vec<usize>,
    mirror_idx: Vec<usize>,
}

/// Prepared interpolation weights for one point; evaluate several fields with it.
pub struct PointWeights<'b> {
    radial_coef: &'b [f64],
    radial_src: &'b [(usize, bool)],
    angular_coef: &'b [f64],
    angular_idx: &'b [usize],
    mirror_idx: &'b [usize],
}

impl PointWeights<'_> {
    /// Evaluate `values` with mirror sign `parity_sign` (−1 for polar vector
    /// components; only used on the disk).
    pub fn eval(&self, values: &Array2<f64>, parity_sign: f64) -> f64 {
        let mut acc = 0.0;
        for (&c, &(i, mirrored)) in self.radial_coef.iter().zip(self.radial_src) {
            if c == 0.0 {
                continue;
            }
            let row = values.row(i);
            let row = row.as_slice().expect("standard layout");
            let idx = if mirrored { self.mirror_idx } else { self.angular_idx };
            let s: f64 = self.angular_coef.iter().zip(idx).map(|(a, &j)| a * row[j]).sum();
            acc += if mirrored { parity_sign * c * s } else { c * s };
        }
        acc
    }
}

impl Interpolator<'_> {
    /// Prepare weights at `(r, θ)`. `r` must lie in `[r_inner, r_outer]`.
    pub fn at(&mut self, r: f64, theta: f64) -> PointWeights<'_> {
        let g = self.grid;
        match &g.interp {
            RadialInterp::Barycentric { line, weights, source } => {
                bary_coefficients(r, line, weights, &mut self.radial_coef);
                self.radial_src.copy_from_slice(source);
            }
            RadialInterp::LocalCubic => {
                let n = g.n_radial;
                let dr = (g.r_outer - g.r_inner) / (n - 1) as f64;
                let pos = (r - g.r_inner) / dr;
                let start = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
                lagrange_integer_weights(pos - start as f64, &mut self.radial_coef);
                for (m, s) in self.radial_src.iter_mut().enumerate() {
                    *s = (start + m, false);
                }
            }
        }
        let dth = g.dtheta();
        let pos = theta.rem_euclid(2.0 * PI) / dth;
        let base = pos.floor();
        let start = base as isize - (self.stencil as isize / 2 - 1);
        lagrange_integer_weights(pos - start as f64, &mut self.angular_coef);
        let n = g.n_angular as isize;
        let half = n / 2;
        for (m, (a, b)) in self.angular_idx.iter_mut().zip(self.mirror_idx.iter_mut()).enumerate() {
            let j = start + m as isize;
            *a = j.rem_euclid(n) as usize;
            *b = (j + half).rem_euclid(n) as usize;
        }
        PointWeights {
            radial_coef: &self.radial_coef,
            radial_src: &self.radial_src,
            angular_coef: &self.angular_coef,
            angular_idx: &self.angular_idx,
            mirror_idx: &self.mirror_idx,
        }
    }
}
