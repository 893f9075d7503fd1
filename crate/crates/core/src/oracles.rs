//! One-dimensional reference solvers for angularly symmetric data.
//!
//! These use uniform nodes and finite differences on purpose: they share no
//! discretization with the spectral solvers, so agreement between the two is
//! evidence rather than tautology.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Samples of a radial function on strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(invalid("values", "length differs from nodes"));
        }
        if nodes.len() < 4 {
            return Err(invalid("nodes", "need at least 4 nodes"));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(invalid("nodes", "must be strictly increasing"));
        }
        if nodes[0] <= 0.0 {
            return Err(invalid("nodes", "inner radius must be positive"));
        }
        Ok(Self { nodes, values })
    }

    /// `n` uniform nodes on `[r0, r1]` sampling `f`.
    pub fn uniform(r0: f64, r1: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(r0 > 0.0 && r1 > r0) {
            return Err(invalid("r_inner", "need 0 < r_inner < r_outer"));
        }
        if n < 4 {
            return Err(invalid("nodes", "need at least 4 nodes"));
        }
        let h = (r1 - r0) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { r1 } else { r0 + i as f64 * h })
            .collect();
        let values = nodes.iter().map(|&r| f(r)).collect();
        Ok(Self { nodes, values })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_inner(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_outer(&self) -> f64 {
        self.nodes[self.len() - 1]
    }

    /// Uniform spacing (the oracles assume uniform nodes).
    pub fn spacing(&self) -> f64 {
        (self.r_outer() - self.r_inner()) / (self.len() - 1) as f64
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            nodes: self.nodes.clone(),
            values,
        }
    }

    /// Keep every `factor`-th node. `len - 1` must be divisible by `factor`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !(self.len() - 1).is_multiple_of(factor) {
            return Err(invalid("factor", "must divide the number of intervals"));
        }
        let pick = |v: &[f64]| v.iter().step_by(factor).copied().collect::<Vec<_>>();
        Self::new(pick(&self.nodes), pick(&self.values))
    }

    /// Six-point local Lagrange interpolation (fewer points near tiny profiles).
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.len();
        let width = n.min(6);
        let pos = self.nodes.partition_point(|&x| x <= r).saturating_sub(1);
        let start = (pos as isize - (width as isize / 2 - 1)).clamp(0, (n - width) as isize) as usize;
        let xs = &self.nodes[start..start + width];
        let mut acc = 0.0;
        for (j, &xj) in xs.iter().enumerate() {
            let mut l = 1.0;
            for (m, &xm) in xs.iter().enumerate() {
                if m != j {
                    l *= (r - xm) / (xj - xm);
                }
            }
            acc += l * self.values[start + j];
        }
        acc
    }

    /// `2π ∫ v r dr` by the trapezoid rule.
    pub fn integrate_area(&self) -> f64 {
        2.0 * PI
            * self
                .nodes
                .windows(2)
                .zip(self.values.windows(2))
                .map(|(x, v)| 0.5 * (x[1] - x[0]) * (x[0] * v[0] + x[1] * v[1]))
                .sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Thomas algorithm for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    for i in 0..n {
        if i > 0 {
            denom = diag[i] - sub[i] * c[i - 1];
        }
        if denom.abs() < 1e-300 || !denom.is_finite() {
            return Err(Error::Singular(format!("tridiagonal pivot {i}")));
        }
        c[i] = sup[i] / denom;
        d[i] = if i > 0 {
            (rhs[i] - sub[i] * d[i - 1]) / denom
        } else {
            rhs[i] / denom
        };
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Zero-circulation azimuthal velocity of radial vorticity:
/// `f_θ(r) = (1/r) ∫_{R₀}^r s q(s) ds` by fourth-order piecewise-cubic quadrature.
pub fn oracle_biot_savart_radial(q: &RadialProfile) -> RadialProfile {
    let n = q.len();
    let h = q.spacing();
    let g: Vec<f64> = q.nodes.iter().zip(&q.values).map(|(r, v)| r * v).collect();
    let mut cum = vec![0.0; n];
    for i in 0..n - 1 {
        let piece = if i == 0 {
            9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]
        } else if i == n - 2 {
            g[n - 4] - 5.0 * g[n - 3] + 19.0 * g[n - 2] + 9.0 * g[n - 1]
        } else {
            -g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]
        };
        cum[i + 1] = cum[i] + h * piece / 24.0;
    }
    let values = cum.iter().zip(&q.nodes).map(|(c, r)| c / r).collect();
    q.with_values(values)
}

/// Second-order central differences for
/// `w - α(w'' + w'/r - w/r²) = f`, `w(R₀) = w(R₁) = 0`.
pub fn oracle_filtered_inverse_radial(f: &RadialProfile, alpha: f64) -> Result<RadialProfile> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be > 0"));
    }
    let n = f.len();
    let h = f.spacing();
    let (mut sub, mut diag, mut sup, mut rhs) = (vec![0.0; n], vec![1.0; n], vec![0.0; n], f.values.clone());
    rhs[0] = 0.0;
    rhs[n - 1] = 0.0;
    for i in 1..n - 1 {
        let r = f.nodes[i];
        sub[i] = -alpha * (1.0 / (h * h) - 1.0 / (2.0 * h * r));
        diag[i] = 1.0 + alpha * (2.0 / (h * h) + 1.0 / (r * r));
        sup[i] = -alpha * (1.0 / (h * h) + 1.0 / (2.0 * h * r));
    }
    Ok(f.with_values(solve_tridiagonal(&sub, &diag, &sup, &rhs)?))
}

/// Richardson extrapolation of [`oracle_filtered_inverse_radial`] over `levels`
/// nested halvings. `f` is given on the finest grid; the result lives on the
/// coarsest one (`(len - 1) / 2^levels` intervals).
pub fn oracle_filtered_inverse_extrapolated(f: &RadialProfile, alpha: f64, levels: u32) -> Result<RadialProfile> {
    let top = 1usize << levels;
    let coarse = f.coarsen(top)?;
    // table[j][k]: level j solution after k elimination sweeps, on coarse nodes.
    let mut table: Vec<Vec<Vec<f64>>> = Vec::new();
    for j in 0..=levels as usize {
        let w = oracle_filtered_inverse_radial(&f.coarsen(top >> j)?, alpha)?;
        let mut row = vec![w.values.iter().step_by(1 << j).copied().collect::<Vec<_>>()];
        for k in 1..=j {
            let fac = 4f64.powi(k as i32) - 1.0;
            let next = row[k - 1]
                .iter()
                .zip(&table[j - 1][k - 1])
                .map(|(a, b)| a + (a - b) / fac)
                .collect();
            row.push(next);
        }
        table.push(row);
    }
    let best = table.pop().and_then(|mut r| r.pop()).expect("at least one level");
    Ok(coarse.with_values(best))
}

/// θ-scheme for `∂ₜq = ε(q'' + q'/r)` with `q = 0` at both ends.
/// `theta = 1` is backward Euler, `theta = 0.5` Crank–Nicolson.
pub fn oracle_heat_radial(
    q0: &RadialProfile,
    epsilon: f64,
    dt: f64,
    steps: usize,
    theta: f64,
) -> Result<RadialProfile> {
    if !(epsilon > 0.0 && dt > 0.0) {
        return Err(invalid("epsilon", "epsilon and dt must be > 0"));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(invalid("theta", "must lie in [0, 1]"));
    }
    let n = q0.len();
    let h = q0.spacing();
    let k = epsilon * dt;
    let stencil = |i: usize| {
        let r = q0.nodes[i];
        (
            1.0 / (h * h) - 1.0 / (2.0 * h * r),
            -2.0 / (h * h),
            1.0 / (h * h) + 1.0 / (2.0 * h * r),
        )
    };
    let (mut sub, mut diag, mut sup) = (vec![0.0; n], vec![1.0; n], vec![0.0; n]);
    for i in 1..n - 1 {
        let (a, b, c) = stencil(i);
        sub[i] = -theta * k * a;
        diag[i] = 1.0 - theta * k * b;
        sup[i] = -theta * k * c;
    }
    let mut q = q0.values.clone();
    q[0] = 0.0;
    q[n - 1] = 0.0;
    for _ in 0..steps {
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let (a, b, c) = stencil(i);
            rhs[i] = q[i] + (1.0 - theta) * k * (a * q[i - 1] + b * q[i] + c * q[i + 1]);
        }
        q = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    }
    Ok(q0.with_values(q))
}

/// Radial second-grade solution at `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondGradeRadial {
    pub q: RadialProfile,
    pub gamma: f64,
}

/// Mode-0 second-grade system `∂ₜq = (ν/α)(ω - q)` with `ω` the curl of the
/// filtered velocity, integrated by classical RK4 with `steps` steps.
/// `γ(t) = γ₀ e^{-νt/α}` enters the velocity through `γ/(2πr)`.
pub fn oracle_second_grade_radial(
    q0: &RadialProfile,
    gamma0: f64,
    alpha: f64,
    nu: f64,
    t_end: f64,
    steps: usize,
) -> Result<SecondGradeRadial> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be > 0"));
    }
    if !(nu >= 0.0) {
        return Err(invalid("nu", "must be >= 0"));
    }
    let rate = nu / alpha;
    let gamma = |t: f64| gamma0 * (-rate * t).exp();
    if nu == 0.0 || t_end == 0.0 {
        return Ok(SecondGradeRadial {
            q: q0.clone(),
            gamma: gamma(t_end),
        });
    }
    let steps = steps.max(1);
    let dt = t_end / steps as f64;
    let rhs = |q: &[f64], t: f64| -> Result<Vec<f64>> {
        let omega = radial_vorticity(&q0.with_values(q.to_vec()), gamma(t), alpha)?;
        Ok(omega.iter().zip(q).map(|(w, q)| rate * (w - q)).collect())
    };
    let axpy = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let mut q = q0.values.clone();
    for s in 0..steps {
        let t = s as f64 * dt;
        let k1 = rhs(&q, t)?;
        let k2 = rhs(&axpy(&q, &k1, 0.5 * dt), t + 0.5 * dt)?;
        let k3 = rhs(&axpy(&q, &k2, 0.5 * dt), t + 0.5 * dt)?;
        let k4 = rhs(&axpy(&q, &k3, dt), t + dt)?;
        for i in 0..q.len() {
            q[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(SecondGradeRadial {
        q: q0.with_values(q),
        gamma: gamma(t_end),
    })
}

/// `ω = (1/r)(r u_θ)'` of the filtered velocity of `(q, γ)`.
///
/// Second-order differences with one-sided ends, shifted by a constant so the
/// trapezoid integral of `ω r` vanishes exactly, as it does for any velocity
/// with no slip on both circles.
pub fn radial_vorticity(q: &RadialProfile, gamma: f64, alpha: f64) -> Result<Vec<f64>> {
    let n = q.len();
    let h = q.spacing();
    let mut v = oracle_biot_savart_radial(q);
    for (val, r) in v.values.iter_mut().zip(&q.nodes) {
        *val += gamma / (2.0 * PI * r);
    }
    let u = oracle_filtered_inverse_radial(&v, alpha)?;
    let ru: Vec<f64> = u.values.iter().zip(&q.nodes).map(|(u, r)| u * r).collect();
    let mut omega = vec![0.0; n];
    for i in 0..n {
        let d = if i == 0 {
            (-3.0 * ru[0] + 4.0 * ru[1] - ru[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * ru[n - 1] - 4.0 * ru[n - 2] + ru[n - 3]) / (2.0 * h)
        } else {
            (ru[i + 1] - ru[i - 1]) / (2.0 * h)
        };
        omega[i] = d / q.nodes[i];
    }
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            w * q.nodes[i]
        })
        .collect();
    let mean = omega.iter().zip(&weights).map(|(o, w)| o * w).sum::<f64>() / weights.iter().sum::<f64>();
    omega.iter_mut().for_each(|o| *o -= mean);
    Ok(omega)
}

/// Self-convergence order from solutions on three nested grids (each halving
/// the spacing), measured in the discrete L² norm on the coarse nodes.
pub fn observed_order(coarse: &RadialProfile, mid: &RadialProfile, fine: &RadialProfile) -> Result<f64> {
    let m = mid.coarsen(2)?;
    let f = fine.coarsen(4)?;
    let rms =
        |a: &[f64], b: &[f64]| (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt();
    let e1 = rms(&coarse.values, &m.values);
    let e2 = rms(&m.values, &f.values);
    Ok((e1 / e2).log2())
}
