//! One-dimensional building blocks: Chebyshev points, quadrature and
//! differentiation weights, barycentric interpolation and the angular FFT.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Chebyshev–Gauss–Lobatto points `cos(jπ/(n-1))`, `j = 0..n`, in decreasing order.
pub fn cgl_points(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|j| (j as f64 * PI / m).cos()).collect()
}

/// Barycentric weights of the Chebyshev–Gauss–Lobatto points.
pub fn cgl_bary_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Clenshaw–Curtis weights on `[-1, 1]` for the points of [`cgl_points`].
pub fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nn = n - 1;
    let nf = nn as f64;
    let theta: Vec<f64> = (0..n).map(|j| j as f64 * PI / nf).collect();
    let mut w = vec![0.0; n];
    let mut v = vec![1.0; n];
    if nn.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[nn] = w[0];
        for k in 1..nn / 2 {
            let kf = k as f64;
            for j in 1..nn {
                v[j] -= 2.0 * (2.0 * kf * theta[j]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for j in 1..nn {
            v[j] -= (nf * theta[j]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[nn] = w[0];
        for k in 1..=(nn - 1) / 2 {
            let kf = k as f64;
            for j in 1..nn {
                v[j] -= 2.0 * (2.0 * kf * theta[j]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for j in 1..nn {
        w[j] = 2.0 * v[j] / nf;
    }
    w
}

/// Collocation differentiation matrix for arbitrary nodes with known barycentric weights.
///
/// Diagonal entries use the negative-sum trick so that constants are differentiated
/// to zero exactly.
pub fn bary_diff_matrix(x: &[f64], w: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Finite-difference weights (Fornberg) for derivatives `0..=order` at `z`
/// from the stencil `x`. Returns `c[m][j]`, the weight of `x[j]` in the `m`-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Banded finite-difference first and second derivative matrices on arbitrary
/// nodes using a `width`-point stencil (centred where possible).
pub fn local_fd_matrices(x: &[f64], width: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = x.len();
    let width = width.min(n);
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        let start = i.saturating_sub(width / 2).min(n - width);
        let c = fornberg_weights(x[i], &x[start..start + width], 2);
        for j in 0..width {
            d1[(i, start + j)] = c[1][j];
            d2[(i, start + j)] = c[2][j];
        }
    }
    (d1, d2)
}

/// Chebyshev polynomials `T_0..T_{m}` evaluated at `t`.
pub fn chebyshev_values(t: f64, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    out.push(1.0);
    if m >= 1 {
        out.push(t);
    }
    for k in 2..=m {
        let next = 2.0 * t * out[k - 1] - out[k - 2];
        out.push(next);
    }
    out
}

/// Interpolatory weights for `∫ f(t) dt` over `[-1, 1]` at arbitrary distinct nodes,
/// exact for polynomials of degree `< nodes.len()`.
///
/// Solves the transposed Chebyshev–Vandermonde system, which stays well conditioned
/// for Chebyshev-like node distributions.
pub fn interpolatory_weights(nodes: &[f64]) -> Option<Vec<f64>> {
    let n = nodes.len();
    let mut vt = DMatrix::zeros(n, n);
    for (j, &t) in nodes.iter().enumerate() {
        for (m, v) in chebyshev_values(t, n - 1).into_iter().enumerate() {
            vt[(m, j)] = v;
        }
    }
    let moments = DVector::from_fn(n, |m, _| if m % 2 == 1 { 0.0 } else { 2.0 / (1.0 - (m * m) as f64) });
    vt.lu().solve(&moments).map(|w| w.iter().copied().collect())
}

/// Barycentric interpolation coefficients at `x` for nodes `nodes` with weights `w`.
/// Writes into `out` (same length as `nodes`).
pub fn bary_coefficients(x: f64, nodes: &[f64], w: &[f64], out: &mut [f64]) {
    if let Some(hit) = nodes.iter().position(|&xi| xi == x) {
        out.iter_mut().for_each(|c| *c = 0.0);
        out[hit] = 1.0;
        return;
    }
    let mut sum = 0.0;
    for ((c, &xi), &wi) in out.iter_mut().zip(nodes).zip(w) {
        *c = wi / (x - xi);
        sum += *c;
    }
    let inv = 1.0 / sum;
    out.iter_mut().for_each(|c| *c *= inv);
}

/// Lagrange weights on the integer stencil `0..len` evaluated at fractional position `s`.
pub fn lagrange_integer_weights(s: f64, out: &mut [f64]) {
    let len = out.len();
    if let Some(j) = (0..len).find(|&j| s == j as f64) {
        out.iter_mut().for_each(|c| *c = 0.0);
        out[j] = 1.0;
        return;
    }
    // ℓ_j(s) = Π_{m≠j}(s - m) / [(-1)^{len-1-j} j! (len-1-j)!]
    let full: f64 = (0..len).map(|m| s - m as f64).product();
    let mut fact = vec![1.0; len];
    for k in 1..len {
        fact[k] = fact[k - 1] * k as f64;
    }
    for (j, o) in out.iter_mut().enumerate() {
        let sign = if (len - 1 - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        *o = full / (s - j as f64) / (sign * fact[j] * fact[len - 1 - j]);
    }
}

/// Real-to-modal transform along the periodic angular direction.
///
/// Mode `k` (for `k = 0..=n/2`) of a row `f_j` is `(1/n) Σ_j f_j e^{-ikθ_j}`, so a
/// real row is recovered as `F_0 + 2 Re Σ_{0<k<n/2} F_k e^{ikθ} + F_{n/2} cos(nθ/2)`.
#[derive(Clone)]
pub struct AngularTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for AngularTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularTransform").field("n", &self.n).finish()
    }
}

impl AngularTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n / 2 + 1
    }

    /// Values `(radial, angular)` to modes `(mode, radial)`.
    pub fn forward(&self, values: &Array2<f64>) -> Array2<Complex64> {
        let (nr, nt) = values.dim();
        let mut out = Array2::zeros((self.n_modes(), nr));
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        let scale = 1.0 / nt as f64;
        for i in 0..nr {
            for (b, &v) in buf.iter_mut().zip(values.row(i)) {
                *b = Complex64::new(v, 0.0);
            }
            self.forward.process(&mut buf);
            for k in 0..self.n_modes() {
                out[(k, i)] = buf[k] * scale;
            }
        }
        out
    }

    /// Modes `(mode, radial)` back to real values `(radial, angular)`.
    pub fn inverse(&self, modes: &Array2<Complex64>) -> Array2<f64> {
        let (nm, nr) = modes.dim();
        let nt = self.n;
        let nyq = nt / 2;
        let mut out = Array2::zeros((nr, nt));
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        for i in 0..nr {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            buf[0] = Complex64::new(modes[(0, i)].re, 0.0);
            for k in 1..nm.min(nyq) {
                buf[k] = modes[(k, i)];
                buf[nt - k] = modes[(k, i)].conj();
            }
            if nm > nyq {
                buf[nyq] = Complex64::new(modes[(nyq, i)].re, 0.0);
            }
            self.inverse.process(&mut buf);
            for (o, b) in out.row_mut(i).iter_mut().zip(&buf) {
                *o = b.re;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clenshaw_curtis_integrates_polynomials() {
        for n in [9, 10, 33, 64] {
            let x = cgl_points(n);
            let w = clenshaw_curtis(n);
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-14);
            let x4: f64 = w.iter().zip(&x).map(|(w, x)| w * x.powi(4)).sum();
            assert_relative_eq!(x4, 0.4, epsilon = 1e-14);
        }
    }

    #[test]
    fn chebyshev_derivative_of_cubic_is_exact() {
        let x = cgl_points(12);
        let d = bary_diff_matrix(&x, &cgl_bary_weights(12));
        let f = DVector::from_iterator(12, x.iter().map(|x| x.powi(3) - 2.0 * x));
        let df = &d * f;
        for (xi, dfi) in x.iter().zip(df.iter()) {
            assert_relative_eq!(*dfi, 3.0 * xi * xi - 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fornberg_reproduces_centered_stencils() {
        let c = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_relative_eq!(c[1][0], -0.5);
        assert_relative_eq!(c[1][2], 0.5);
        assert_relative_eq!(c[2][0], 1.0);
        assert_relative_eq!(c[2][1], -2.0);
    }

    #[test]
    fn interpolatory_weights_match_clenshaw_curtis() {
        let x = cgl_points(17);
        let a = clenshaw_curtis(17);
        let b = interpolatory_weights(&x).unwrap();
        for (a, b) in a.iter().zip(&b) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn angular_transform_round_trip() {
        let nt = 16;
        let t = AngularTransform::new(nt);
        let vals = Array2::from_shape_fn((3, nt), |(i, j)| {
            let th = 2.0 * PI * j as f64 / nt as f64;
            1.0 + i as f64 * (3.0 * th).cos() + (8.0 * th).cos() - 0.5 * (2.0 * th).sin()
        });
        let modes = t.forward(&vals);
        assert_relative_eq!(modes[(3, 1)].re, 0.5, epsilon = 1e-14);
        assert_relative_eq!(modes[(2, 0)].im, 0.25, epsilon = 1e-14);
        let back = t.inverse(&modes);
        for (a, b) in vals.iter().zip(back.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }
}
