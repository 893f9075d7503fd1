//! Elliptic solves: Biot–Savart `S(q)`, the harmonic field `Y₁`, and the
//! velocity filter `(1 + αA)⁻¹` with Dirichlet conditions.
//!
//! Everything is done per Fourier mode in `θ` with Chebyshev collocation in `r`.
//! Velocities are always perpendicular gradients `∇^⊥φ = (-(1/r)∂_θφ, ∂_rφ)`, so
//! they are divergence free by construction and the Leray projector never has to
//! be formed.
//!
//! The filter is solved in stream-function form `(1 - αΔ)Δφ = curl f` with
//! `φ = ∂_rφ = 0` on the boundary (`φ = c` on the inner circle for mode 0). The
//! fourth-order problem is split into two Dirichlet problems
//! `(1 - αΔ)ω = curl f`, `Δφ = ω` and the unknown boundary values of `ω` (and the
//! constant `c`) are fixed by an influence matrix built from unit responses.
//! For mode 0 the extra condition is the zero circulation of `w - αΔw - f` on
//! the inner circle.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, Dyn, LU};
use ndarray::{Array2, Axis};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{same_grid, ScalarField, VectorField};
use crate::grid::{Parity, PolarGrid};

pub(crate) type Modes = Array2<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `i k` for the angular derivative; the Nyquist mode has no odd derivative.
fn ik(grid: &PolarGrid, k: usize) -> Complex64 {
    if 2 * k == grid.n_angular() {
        czero()
    } else {
        I * k as f64
    }
}

pub(crate) fn matvec(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = m.nrows();
    let mut out = vec![czero(); n];
    for (j, vj) in v.iter().enumerate() {
        let col = m.column(j);
        for i in 0..n {
            out[i] += col[i] * vj;
        }
    }
    out
}

fn row_dot(m: &DMatrix<f64>, row: usize, v: &[Complex64]) -> Complex64 {
    v.iter()
        .enumerate()
        .fold(czero(), |acc, (j, vj)| acc + m[(row, j)] * vj)
}

pub(crate) fn lu_solve(lu: &LU<f64, Dyn, Dyn>, rhs: &[Complex64]) -> Vec<Complex64> {
    let n = rhs.len();
    let b = DMatrix::from_fn(n, 2, |i, c| if c == 0 { rhs[i].re } else { rhs[i].im });
    let x = lu.solve(&b).expect("collocation matrix factorized at construction");
    (0..n).map(|i| Complex64::new(x[(i, 0)], x[(i, 1)])).collect()
}

/// Replace the given rows with identity rows.
pub(crate) fn dirichlet_rows(mut m: DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    for &r in rows {
        m.row_mut(r).fill(0.0);
        m[(r, r)] = 1.0;
    }
    m
}

pub(crate) fn factor(m: DMatrix<f64>, what: &str) -> Result<LU<f64, Dyn, Dyn>> {
    let lu = m.lu();
    if !lu.is_invertible() {
        return Err(Error::Singular(what.to_string()));
    }
    Ok(lu)
}

fn scalar_modes(f: &ScalarField) -> Modes {
    f.grid().transform().forward(f.values())
}

fn mode_row(m: &Modes, k: usize) -> Vec<Complex64> {
    m.index_axis(Axis(0), k).to_vec()
}

fn set_mode_row(m: &mut Modes, k: usize, v: &[Complex64]) {
    for (o, x) in m.index_axis_mut(Axis(0), k).iter_mut().zip(v) {
        *o = *x;
    }
}

/// Scalar curl `(1/r)[∂_r(r u_θ) - ∂_θ u_r]`.
pub fn curl(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let t = g.transform();
    let ur = t.forward(u.radial());
    let ut = t.forward(u.angular());
    let r = g.radial_nodes();
    let mut out = Modes::zeros((g.n_modes(), g.n_radial()));
    for k in 0..g.n_modes() {
        let rut: Vec<Complex64> = r.iter().zip(ut.index_axis(Axis(0), k)).map(|(r, v)| r * v).collect();
        let d = matvec(g.d1(Parity::scalar(k)), &rut);
        let ikk = ik(g, k);
        let row: Vec<Complex64> = (0..g.n_radial()).map(|i| (d[i] - ikk * ur[(k, i)]) / r[i]).collect();
        set_mode_row(&mut out, k, &row);
    }
    ScalarField::new_unchecked(g.clone(), t.inverse(&out))
}

/// Perpendicular gradient `∇^⊥φ` of a stream function given by its modes.
pub(crate) fn perp_grad_modes(grid: &Arc<PolarGrid>, phi: &Modes) -> VectorField {
    let r = grid.radial_nodes();
    let mut ur = Modes::zeros(phi.dim());
    let mut ut = Modes::zeros(phi.dim());
    for k in 0..grid.n_modes() {
        let p = mode_row(phi, k);
        let ikk = ik(grid, k);
        let a: Vec<Complex64> = (0..r.len()).map(|i| -ikk * p[i] / r[i]).collect();
        set_mode_row(&mut ur, k, &a);
        set_mode_row(&mut ut, k, &matvec(grid.d1(Parity::scalar(k)), &p));
    }
    let t = grid.transform();
    VectorField::new_unchecked(grid.clone(), t.inverse(&ur), t.inverse(&ut))
}

/// Perpendicular gradient of a scalar stream function.
pub fn perp_grad(psi: &ScalarField) -> VectorField {
    perp_grad_modes(psi.grid(), &scalar_modes(psi))
}

/// Vector Laplacian in polar components.
pub fn vector_laplacian(u: &VectorField) -> VectorField {
    let g = u.grid();
    let t = g.transform();
    let ur = t.forward(u.radial());
    let ut = t.forward(u.angular());
    let r = g.radial_nodes();
    let mut lr = Modes::zeros(ur.dim());
    let mut lt = Modes::zeros(ur.dim());
    for k in 0..g.n_modes() {
        let l = g.mode_laplacian(k, Parity::vector(k));
        let a = mode_row(&ur, k);
        let b = mode_row(&ut, k);
        let la = matvec(&l, &a);
        let lb = matvec(&l, &b);
        let ikk = ik(g, k);
        let rr: Vec<Complex64> = (0..r.len())
            .map(|i| la[i] - a[i] / (r[i] * r[i]) - 2.0 * ikk * b[i] / (r[i] * r[i]))
            .collect();
        let tt: Vec<Complex64> = (0..r.len())
            .map(|i| lb[i] - b[i] / (r[i] * r[i]) + 2.0 * ikk * a[i] / (r[i] * r[i]))
            .collect();
        set_mode_row(&mut lr, k, &rr);
        set_mode_row(&mut lt, k, &tt);
    }
    VectorField::new_unchecked(g.clone(), t.inverse(&lr), t.inverse(&lt))
}

/// Physical components of `∇u`: `[∂_r u_r, ∂_r u_θ, (∂_θ u_r - u_θ)/r, (∂_θ u_θ + u_r)/r]`.
pub fn velocity_gradient(u: &VectorField) -> [Array2<f64>; 4] {
    let g = u.grid();
    let t = g.transform();
    let ur = t.forward(u.radial());
    let ut = t.forward(u.angular());
    let r = g.radial_nodes();
    let mut comps: [Modes; 4] = std::array::from_fn(|_| Modes::zeros(ur.dim()));
    for k in 0..g.n_modes() {
        let d1 = g.d1(Parity::vector(k));
        let a = mode_row(&ur, k);
        let b = mode_row(&ut, k);
        let ikk = ik(g, k);
        set_mode_row(&mut comps[0], k, &matvec(d1, &a));
        set_mode_row(&mut comps[1], k, &matvec(d1, &b));
        let c: Vec<Complex64> = (0..r.len()).map(|i| (ikk * a[i] - b[i]) / r[i]).collect();
        let d: Vec<Complex64> = (0..r.len()).map(|i| (ikk * b[i] + a[i]) / r[i]).collect();
        set_mode_row(&mut comps[2], k, &c);
        set_mode_row(&mut comps[3], k, &d);
    }
    comps.map(|m| t.inverse(&m))
}

/// The harmonic field `Y_i`: curl free, divergence free, tangent, with unit
/// circulation on the `i`-th inner circle. On the annulus `Y₁ = e_θ/(2πr)`.
pub fn harmonic_field(grid: &Arc<PolarGrid>, i: usize) -> Result<VectorField> {
    if grid.is_disk() {
        return Err(Error::NoHarmonicFields);
    }
    if i != 1 {
        return Err(Error::ComponentOutOfRange {
            index: i as i32,
            available: "1".into(),
        });
    }
    Ok(VectorField::from_fn(grid.clone(), |r, _| (0.0, 1.0 / (2.0 * PI * r))))
}

struct FilterMode {
    helmholtz: LU<f64, Dyn, Dyn>,
    /// `(ω_j, φ_j)` responses to the unit boundary unknowns.
    responses: Vec<(Vec<Complex64>, Vec<Complex64>)>,
    influence_inv: DMatrix<f64>,
}

struct ModeSolver {
    d1: DMatrix<f64>,
    poisson: LU<f64, Dyn, Dyn>,
    /// Mode 0 on the annulus: `ψ'(R₀) = 0`, `ψ(R₁) = 0`.
    stream_neumann: Option<LU<f64, Dyn, Dyn>>,
    filter: Option<FilterMode>,
}

/// Factorized per-mode radial operators for one grid and one filter length `α`.
pub struct EllipticWorkspace {
    grid: Arc<PolarGrid>,
    alpha: f64,
    modes: Vec<ModeSolver>,
}

impl std::fmt::Debug for EllipticWorkspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticWorkspace")
            .field("grid", &self.grid.shape())
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl EllipticWorkspace {
    /// Factor the operators. `alpha = 0` builds only the Biot–Savart part.
    pub fn new(grid: Arc<PolarGrid>, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be >= 0, got {alpha}")));
        }
        let n = grid.n_radial();
        let bnd = grid.boundary_indices();
        let annulus = !grid.is_disk();
        let mut modes = Vec::with_capacity(grid.n_modes());
        for k in 0..grid.n_modes() {
            let parity = Parity::scalar(k);
            let l = grid.mode_laplacian(k, parity);
            let d1 = grid.d1(parity).clone();
            let poisson = factor(dirichlet_rows(l.clone(), &bnd), "Poisson")?;
            let stream_neumann = if annulus && k == 0 {
                let mut m = dirichlet_rows(l.clone(), &bnd);
                m.row_mut(0).copy_from(&d1.row(0));
                Some(factor(m, "mode-0 stream function")?)
            } else {
                None
            };
            let filter = if alpha > 0.0 {
                let h = DMatrix::identity(n, n) - &l * alpha;
                let helmholtz = factor(dirichlet_rows(h, &bnd), "Helmholtz")?;
                Some(build_filter_mode(&grid, k, alpha, &d1, helmholtz, &poisson)?)
            } else {
                None
            };
            modes.push(ModeSolver {
                d1,
                poisson,
                stream_neumann,
                filter,
            });
        }
        Ok(Self { grid, alpha, modes })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check_grid(&self, other: &PolarGrid) -> Result<()> {
        same_grid(&self.grid, other)
    }

    /// Stream function modes of `S(q)`.
    fn biot_savart_modes(&self, q: &Modes) -> Modes {
        let bnd = self.grid.boundary_indices();
        let mut psi = Modes::zeros(q.dim());
        for (k, m) in self.modes.iter().enumerate() {
            let mut rhs = mode_row(q, k);
            for &b in &bnd {
                rhs[b] = czero();
            }
            let lu = m.stream_neumann.as_ref().unwrap_or(&m.poisson);
            set_mode_row(&mut psi, k, &lu_solve(lu, &rhs));
        }
        psi
    }

    /// Biot–Savart law: the divergence-free, tangent field with curl `q` and zero
    /// circulation on every inner boundary circle.
    pub fn biot_savart(&self, q: &ScalarField) -> Result<VectorField> {
        self.check_grid(q.grid())?;
        let psi = self.biot_savart_modes(&scalar_modes(q));
        Ok(perp_grad_modes(&self.grid, &psi))
    }

    /// Solve the filter for a field with curl modes `g` and mean inner tangential
    /// value `ft0` (circulation over `2πR₀`). Returns stream-function modes.
    fn filter_modes(&self, g: &Modes, ft0: f64) -> Modes {
        let bnd = self.grid.boundary_indices();
        let mut phi = Modes::zeros(g.dim());
        for (k, m) in self.modes.iter().enumerate() {
            let fm = m.filter.as_ref().expect("filter factorized for alpha > 0");
            let mut rhs = mode_row(g, k);
            for &b in &bnd {
                rhs[b] = czero();
            }
            let omega_p = lu_solve(&fm.helmholtz, &rhs);
            let mut rhs2 = omega_p.clone();
            for &b in &bnd {
                rhs2[b] = czero();
            }
            let phi_p = lu_solve(&m.poisson, &rhs2);
            let mut cond = conditions(&self.grid, k, self.alpha, &m.d1, &omega_p, &phi_p);
            if k == 0 && !self.grid.is_disk() {
                cond[2] += ft0;
            }
            let nu = cond.len();
            let mut out = phi_p;
            for j in 0..nu {
                let lambda = -(0..nu).fold(czero(), |acc, c| acc + fm.influence_inv[(j, c)] * cond[c]);
                for (o, p) in out.iter_mut().zip(&fm.responses[j].1) {
                    *o += lambda * p;
                }
            }
            set_mode_row(&mut phi, k, &out);
        }
        phi
    }

    /// `w = (1 + αA)⁻¹ f` for a divergence-free field `f` tangent to the boundary.
    /// The result vanishes on the whole boundary.
    pub fn helmholtz_stokes_inverse(&self, f: &VectorField) -> Result<VectorField> {
        if self.alpha <= 0.0 {
            return Err(invalid(
                "alpha",
                "filtered inverse needs alpha > 0; use biot_savart for alpha = 0",
            ));
        }
        self.check_grid(f.grid())?;
        let g = scalar_modes(&curl(f));
        let ft0 = if self.grid.is_disk() {
            0.0
        } else {
            self.grid.circulation(f, 0)? / (2.0 * PI * self.grid.r_inner())
        };
        Ok(perp_grad_modes(&self.grid, &self.filter_modes(&g, ft0)))
    }

    /// Velocity `u = T(q) + Σ γ_i X̃_i` (α > 0) or `S(q) + Σ γ_i Y_i` (α = 0).
    pub fn velocity_from_state(&self, q: &ScalarField, gamma: &[f64]) -> Result<VectorField> {
        self.check_grid(q.grid())?;
        let nb = self.grid.n_boundary_components();
        if gamma.len() != nb {
            return Err(Error::GammaLength {
                expected: nb,
                got: gamma.len(),
            });
        }
        let gsum = gamma.first().copied().unwrap_or(0.0);
        if self.alpha > 0.0 {
            let ft0 = if nb == 0 {
                0.0
            } else {
                gsum / (2.0 * PI * self.grid.r_inner())
            };
            let phi = self.filter_modes(&scalar_modes(q), ft0);
            Ok(perp_grad_modes(&self.grid, &phi))
        } else {
            let mut u = self.biot_savart(q)?;
            if nb == 1 && gsum != 0.0 {
                u = u.lin_comb(1.0, &harmonic_field(&self.grid, 1)?, gsum)?;
            }
            Ok(u)
        }
    }

    /// `T(q) = (1 + αA)⁻¹ S(q)`.
    pub fn filtered_biot_savart(&self, q: &ScalarField) -> Result<VectorField> {
        let zeros = vec![0.0; self.grid.n_boundary_components()];
        self.velocity_from_state(q, &zeros)
    }

    /// Backward-Euler heat step `(1 - κΔ) q_new = q` with `q_new = 0` on the boundary.
    pub fn implicit_heat_step(&self, q: &ScalarField, kappa: f64) -> Result<ScalarField> {
        self.check_grid(q.grid())?;
        implicit_heat_step(q, kappa)
    }
}

/// Backward-Euler heat step on any grid; factors the mode operators on the fly.
pub fn implicit_heat_step(q: &ScalarField, kappa: f64) -> Result<ScalarField> {
    let g = q.grid();
    let n = g.n_radial();
    let bnd = g.boundary_indices();
    let qm = scalar_modes(q);
    let mut out = Modes::zeros(qm.dim());
    for k in 0..g.n_modes() {
        let l = g.mode_laplacian(k, Parity::scalar(k));
        let m = DMatrix::identity(n, n) - l * kappa;
        let lu = factor(dirichlet_rows(m, &bnd), "heat")?;
        let mut rhs = mode_row(&qm, k);
        for &b in &bnd {
            rhs[b] = czero();
        }
        set_mode_row(&mut out, k, &lu_solve(&lu, &rhs));
    }
    Ok(ScalarField::new_unchecked(g.clone(), g.transform().inverse(&out)))
}

/// Boundary conditions the influence matrix drives to zero: `∂_rφ` on each
/// boundary circle and, for mode 0 on the annulus, `α ∂_rω(R₀)` (the caller adds
/// the tangential forcing).
fn conditions(
    grid: &PolarGrid,
    k: usize,
    alpha: f64,
    d1: &DMatrix<f64>,
    omega: &[Complex64],
    phi: &[Complex64],
) -> Vec<Complex64> {
    let n = grid.n_radial();
    if grid.is_disk() {
        return vec![row_dot(d1, n - 1, phi)];
    }
    let mut c = vec![row_dot(d1, 0, phi), row_dot(d1, n - 1, phi)];
    if k == 0 {
        c.push(alpha * row_dot(d1, 0, omega));
    }
    c
}

fn build_filter_mode(
    grid: &PolarGrid,
    k: usize,
    alpha: f64,
    d1: &DMatrix<f64>,
    helmholtz: LU<f64, Dyn, Dyn>,
    poisson: &LU<f64, Dyn, Dyn>,
) -> Result<FilterMode> {
    let n = grid.n_radial();
    let bnd = grid.boundary_indices();
    let unit = |i: usize| {
        let mut v = vec![czero(); n];
        v[i] = Complex64::new(1.0, 0.0);
        v
    };
    let mut responses = Vec::new();
    for &b in &bnd {
        let omega = lu_solve(&helmholtz, &unit(b));
        let mut rhs = omega.clone();
        for &bb in &bnd {
            rhs[bb] = czero();
        }
        let phi = lu_solve(poisson, &rhs);
        responses.push((omega, phi));
    }
    if k == 0 && !grid.is_disk() {
        // constant value of φ on the inner circle
        let phi = lu_solve(poisson, &unit(0));
        responses.push((vec![czero(); n], phi));
    }
    let m = responses.len();
    let mut inf = DMatrix::zeros(m, m);
    for (j, (om, ph)) in responses.iter().enumerate() {
        let c = conditions(grid, k, alpha, d1, om, ph);
        for (row, v) in c.iter().enumerate() {
            inf[(row, j)] = v.re;
        }
    }
    let influence_inv = inf
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("influence matrix of mode {k}")))?;
    Ok(FilterMode {
        helmholtz,
        responses,
        influence_inv,
    })
}

/// Uniform check that a field vanishes on every boundary circle.
pub fn max_boundary_value(u: &VectorField) -> f64 {
    let g = u.grid();
    g.boundary_indices()
        .into_iter()
        .flat_map(|i| {
            u.radial()
                .row(i)
                .iter()
                .chain(u.angular().row(i).iter())
                .map(|v| v.abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Convenience: `v = u - αΔu`.
pub fn filtered_momentum(u: &VectorField, alpha: f64) -> VectorField {
    let lap = vector_laplacian(u);
    u.lin_comb(1.0, &lap, -alpha).expect("Laplacian shares the grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn annulus(nr: usize, nt: usize) -> Arc<PolarGrid> {
        Arc::new(PolarGrid::annulus(1.0, 2.0, nr, nt).unwrap())
    }

    fn ring(r: f64) -> f64 {
        (-((r - 1.5) / 0.15f64).powi(2)).exp()
    }

    #[test]
    fn curl_of_simple_fields() {
        let g = annulus(64, 128);
        let y = harmonic_field(&g, 1).unwrap();
        assert!(curl(&y).max_abs() < 1e-8);
        let rot = VectorField::from_fn(g.clone(), |r, _| (0.0, r / 2.0));
        let c = curl(&rot);
        assert!(c.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn curl_of_perp_grad_is_laplacian() {
        let g = annulus(64, 128);
        let h = |r: f64| (r - 1.0) * (2.0 - r);
        let dh = |r: f64| 3.0 - 2.0 * r;
        let psi = ScalarField::from_fn(g.clone(), |r, t| h(r).powi(2) * t.sin());
        let lap = ScalarField::from_fn(g.clone(), |r, t| {
            let gp = 2.0 * h(r) * dh(r);
            let gpp = 2.0 * dh(r).powi(2) - 4.0 * h(r);
            (gpp + gp / r - h(r).powi(2) / (r * r)) * t.sin()
        });
        let c = curl(&perp_grad(&psi));
        assert!(c.max_abs_diff(&lap) < 1e-6);
    }

    #[test]
    fn biot_savart_basic_cases() {
        let g = annulus(64, 128);
        let ws = EllipticWorkspace::new(g.clone(), 0.0).unwrap();
        let zero = ws.biot_savart(&ScalarField::zeros(g.clone())).unwrap();
        assert!(zero.max_speed() < 1e-12);

        let one = ws.biot_savart(&ScalarField::from_fn(g.clone(), |_, _| 1.0)).unwrap();
        let exact = VectorField::from_fn(g.clone(), |r, _| (0.0, (r * r - 1.0) / (2.0 * r)));
        assert!(one.max_abs_diff(&exact) < 1e-10);
        assert_relative_eq!(one.angular()[(63, 5)], 0.75, epsilon = 1e-12);

        let q = ScalarField::from_fn(g.clone(), |r, t| t.sin() * ring(r));
        let f = ws.biot_savart(&q).unwrap();
        let mean: f64 = f.angular().row(0).mean().unwrap();
        assert!(mean.abs() < 1e-10);
    }

    #[test]
    fn biot_savart_invariants_on_band_limited_field() {
        let g = annulus(64, 128);
        let ws = EllipticWorkspace::new(g.clone(), 0.0).unwrap();
        let q = ScalarField::from_fn(g.clone(), |r, t| {
            (3.0 * r).cos() + r * r * (2.0 * t).sin() - (5.0 * t + r).cos()
        });
        let f = ws.biot_savart(&q).unwrap();
        let diff = curl(&f).lin_comb(1.0, &q, -1.0).unwrap();
        let rel = (g.integrate_values(&diff.values().mapv(|v| v * v))
            / g.integrate_values(&q.values().mapv(|v| v * v)))
        .sqrt();
        assert!(rel < 1e-8, "relative curl error {rel}");
        assert!(g.circulation(&f, 0).unwrap().abs() < 1e-10);
        for &b in &g.boundary_indices() {
            assert!(f.radial().row(b).iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn harmonic_field_normalization_and_errors() {
        let g = annulus(64, 128);
        let y = harmonic_field(&g, 1).unwrap();
        assert_relative_eq!(g.circulation(&y, 0).unwrap(), 1.0, max_relative = 1e-12);
        assert!(matches!(harmonic_field(&g, 2), Err(Error::ComponentOutOfRange { .. })));
        let d = Arc::new(PolarGrid::disk(1.0, 24, 32).unwrap());
        let e = harmonic_field(&d, 1).unwrap_err();
        assert_eq!(e.to_string(), "no harmonic fields on simply-connected domain");
    }

    #[test]
    fn filter_vanishes_on_boundary_and_is_linear() {
        let g = annulus(64, 128);
        let ws = EllipticWorkspace::new(g.clone(), 0.05).unwrap();
        let z = ws.helmholtz_stokes_inverse(&VectorField::zeros(g.clone())).unwrap();
        assert!(z.max_speed() < 1e-12);
        let a = ScalarField::from_fn(g.clone(), |r, t| ring(r) * (1.0 + 0.3 * (3.0 * t).cos()));
        let b = ScalarField::from_fn(g.clone(), |r, t| (r * t.sin()).exp() - 1.0);
        let ta = ws.filtered_biot_savart(&a).unwrap();
        let tb = ws.filtered_biot_savart(&b).unwrap();
        assert!(max_boundary_value(&ta) < 1e-10);
        assert!(max_boundary_value(&tb) < 1e-10);
        let ab = ws.filtered_biot_savart(&a.lin_comb(2.0, &b, -0.5).unwrap()).unwrap();
        let expect = ta.lin_comb(2.0, &tb, -0.5).unwrap();
        assert!(ab.max_abs_diff(&expect) < 1e-11);
        assert!(matches!(
            EllipticWorkspace::new(g.clone(), 0.0)
                .unwrap()
                .helmholtz_stokes_inverse(&ta),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn filter_residual_matches_input() {
        // w - αΔw - f must be a gradient: zero curl and zero inner circulation.
        // Third radial derivatives near the wall carry round-off of order n⁶ε.
        let g = annulus(64, 128);
        let alpha = 0.05;
        let ws = EllipticWorkspace::new(g.clone(), alpha).unwrap();
        let bs = EllipticWorkspace::new(g.clone(), 0.0).unwrap();
        let q = ScalarField::from_fn(g.clone(), |r, t| ring(r) * (1.0 + 0.5 * (2.0 * t).sin()));
        let f = bs.biot_savart(&q).unwrap();
        let w = ws.helmholtz_stokes_inverse(&f).unwrap();
        let res = filtered_momentum(&w, alpha).lin_comb(1.0, &f, -1.0).unwrap();
        let nr = g.n_radial();
        let c = curl(&res);
        for i in 1..nr - 1 {
            let m = c.values().row(i).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(m < 1e-4, "row {i}: {m}");
        }
        let circ = g.circulation(&res, 0).unwrap();
        assert!(circ.abs() < 1e-6, "{circ}");
    }

    #[test]
    fn velocity_from_state_cases() {
        let g = annulus(64, 128);
        let zero = ScalarField::zeros(g.clone());
        let euler = EllipticWorkspace::new(g.clone(), 0.0).unwrap();
        let u = euler.velocity_from_state(&zero, &[1.0]).unwrap();
        assert_eq!(u.max_abs_diff(&harmonic_field(&g, 1).unwrap()), 0.0);

        let alpha = 0.01;
        let ws = EllipticWorkspace::new(g.clone(), alpha).unwrap();
        let x1 = ws.velocity_from_state(&zero, &[1.0]).unwrap();
        let v = filtered_momentum(&x1, alpha);
        assert_relative_eq!(g.circulation(&v, 0).unwrap(), 1.0, max_relative = 1e-6);

        let radial = ScalarField::from_fn(g.clone(), |r, _| ring(r));
        let u = ws.velocity_from_state(&radial, &[0.0]).unwrap();
        assert!(u.radial().iter().all(|v| v.abs() < 1e-10));

        assert!(matches!(
            ws.velocity_from_state(&radial, &[]),
            Err(Error::GammaLength { expected: 1, got: 0 })
        ));
    }

    #[test]
    fn direct_velocity_matches_composed_filter() {
        let g = annulus(48, 64);
        let alpha = 0.03;
        let ws = EllipticWorkspace::new(g.clone(), alpha).unwrap();
        let bs = EllipticWorkspace::new(g.clone(), 0.0).unwrap();
        let q = ScalarField::from_fn(g.clone(), |r, t| ring(r) * (1.0 + 0.2 * (3.0 * t).cos()));
        let gamma = 0.7;
        let direct = ws.velocity_from_state(&q, &[gamma]).unwrap();
        let t = ws.helmholtz_stokes_inverse(&bs.biot_savart(&q).unwrap()).unwrap();
        let x = ws.helmholtz_stokes_inverse(&harmonic_field(&g, 1).unwrap()).unwrap();
        let composed = t.lin_comb(1.0, &x, gamma).unwrap();
        assert!(direct.max_abs_diff(&composed) < 1e-9);
    }

    #[test]
    fn disk_solves() {
        let g = Arc::new(PolarGrid::disk(1.0, 32, 64).unwrap());
        let bs = EllipticWorkspace::new(g.clone(), 0.0).unwrap();
        let f = bs.biot_savart(&ScalarField::from_fn(g.clone(), |_, _| 1.0)).unwrap();
        let exact = VectorField::from_fn(g.clone(), |r, _| (0.0, r / 2.0));
        assert!(f.max_abs_diff(&exact) < 1e-11);
        let q = ScalarField::from_fn(g.clone(), |r, t| {
            let (x, y) = (r * t.cos(), r * t.sin());
            (x * 2.0 + y * y).sin()
        });
        let f = bs.biot_savart(&q).unwrap();
        assert!(curl(&f).max_abs_diff(&q) < 1e-8);
        let ws = EllipticWorkspace::new(g.clone(), 0.02).unwrap();
        let u = ws.velocity_from_state(&q, &[]).unwrap();
        assert!(max_boundary_value(&u) < 1e-10);
        assert!(matches!(
            ws.velocity_from_state(&q, &[1.0]),
            Err(Error::GammaLength { expected: 0, got: 1 })
        ));
    }
}
