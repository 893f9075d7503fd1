//! Norms, energies and convergence measurements.

use crate::elliptic::{filtered_momentum, velocity_gradient};
use crate::error::{invalid, Error, Result};
use crate::field::{same_grid, ScalarField, VectorField};

/// `(∫ |f|^p)^{1/p}` with the grid quadrature.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 <= p < inf, got {p}")));
    }
    let g = f.grid();
    let s = if p == 2.0 {
        g.integrate_values(&f.values().mapv(|v| v * v))
    } else {
        g.integrate_values(&f.values().mapv(|v| v.abs().powf(p)))
    };
    Ok(s.max(0.0).powf(1.0 / p))
}

fn l2_squared(u: &VectorField) -> f64 {
    let vals = u.radial().mapv(|v| v * v) + u.angular().mapv(|v| v * v);
    u.grid().integrate_values(&vals)
}

fn gradient_squared(u: &VectorField) -> f64 {
    let comps = velocity_gradient(u);
    let sum = comps.iter().fold(ndarray::Array2::zeros(u.grid().shape()), |acc, c| {
        acc + c.mapv(|v| v * v)
    });
    u.grid().integrate_values(&sum)
}

pub fn l2_norm(u: &VectorField) -> f64 {
    l2_squared(u).max(0.0).sqrt()
}

/// `‖∇u‖_{L²}` with the full polar gradient, metric terms included.
pub fn gradient_norm(u: &VectorField) -> f64 {
    gradient_squared(u).max(0.0).sqrt()
}

/// `(‖u‖² + α‖∇u‖²)^{1/2}`.
pub fn energy_h1_alpha(u: &VectorField, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(invalid("alpha", format!("must be >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(l2_norm(u));
    }
    Ok((l2_squared(u) + alpha * gradient_squared(u)).max(0.0).sqrt())
}

pub fn h1_norm(u: &VectorField) -> f64 {
    (l2_squared(u) + gradient_squared(u)).max(0.0).sqrt()
}

/// `‖a - b‖_{L²(Ω)}`.
pub fn l2_velocity_error(a: &VectorField, b: &VectorField) -> Result<f64> {
    Ok(l2_norm(&a.lin_comb(1.0, b, -1.0)?))
}

/// Circulations of `v = u - αΔu` on every inner boundary circle, recomputed
/// from the velocity field.
pub fn recomputed_circulations(u: &VectorField, alpha: f64) -> Result<Vec<f64>> {
    let g = u.grid();
    if g.n_boundary_components() == 0 {
        return Ok(Vec::new());
    }
    let v = if alpha > 0.0 {
        filtered_momentum(u, alpha)
    } else {
        u.clone()
    };
    Ok(vec![g.circulation(&v, 0)?])
}

/// One row of the diagnostic stream.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub time: f64,
    pub gamma: Vec<f64>,
    pub gamma_recomputed: Vec<f64>,
    pub energy_h1_alpha: f64,
    pub lp_norm_q: f64,
    pub integral_q: f64,
    pub l2_norm_u: f64,
    pub h1_norm_u: f64,
}

impl DiagnosticRecord {
    pub fn compute(time: f64, q: &ScalarField, gamma: &[f64], u: &VectorField, alpha: f64, p: f64) -> Result<Self> {
        same_grid(q.grid(), u.grid())?;
        let l2 = l2_squared(u);
        let grad = gradient_squared(u);
        Ok(Self {
            time,
            gamma: gamma.to_vec(),
            gamma_recomputed: recomputed_circulations(u, alpha)?,
            energy_h1_alpha: (l2 + alpha * grad).max(0.0).sqrt(),
            lp_norm_q: lp_norm(q, p)?,
            integral_q: q.grid().integrate(q),
            l2_norm_u: l2.max(0.0).sqrt(),
            h1_norm_u: (l2 + grad).max(0.0).sqrt(),
        })
    }
}

/// Row of an α-convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub alpha: f64,
    pub error_l2: f64,
    /// `log(e_prev/e) / log(α_prev/α)`; the log₂ ratio on a halving ladder.
    pub observed_order: Option<f64>,
}

/// L² distance of each run's velocity from the reference, sorted by decreasing α.
pub fn convergence_table(runs: &[(f64, &VectorField)], reference: &VectorField) -> Result<Vec<ConvergenceRow>> {
    if runs.len() < 2 {
        return Err(Error::TooFewRuns {
            needed: 2,
            got: runs.len(),
        });
    }
    let mut rows = runs
        .iter()
        .map(|(alpha, u)| {
            Ok(ConvergenceRow {
                alpha: *alpha,
                error_l2: l2_velocity_error(u, reference)?,
                observed_order: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        let order = (prev.error_l2 / cur.error_l2).ln() / (prev.alpha / cur.alpha).ln();
        rows[i].observed_order = order.is_finite().then_some(order);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{harmonic_field, EllipticWorkspace};
    use crate::grid::PolarGrid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn annulus() -> Arc<PolarGrid> {
        Arc::new(PolarGrid::annulus(1.0, 2.0, 32, 64).unwrap())
    }

    #[test]
    fn lp_norm_examples() {
        let g = annulus();
        let one = ScalarField::from_fn(g.clone(), |_, _| 1.0);
        assert_relative_eq!(lp_norm(&one, 2.0).unwrap(), (3.0 * PI).sqrt(), max_relative = 1e-12);
        assert_eq!(lp_norm(&ScalarField::zeros(g.clone()), 3.0).unwrap(), 0.0);
        let c = ScalarField::from_fn(g.clone(), |_, t| t.cos());
        assert_relative_eq!(lp_norm(&c, 2.0).unwrap(), (1.5 * PI).sqrt(), max_relative = 1e-12);
        assert!(lp_norm(&one, 0.5).is_err());
    }

    #[test]
    fn energy_of_rigid_rotation() {
        let g = annulus();
        let u = VectorField::from_fn(g.clone(), |r, _| (0.0, r / 2.0));
        // ∇u for (r/2)e_θ: ∂_r u_θ = 1/2, (∂_θu_r - u_θ)/r = -1/2, others 0.
        let l2 = 15.0 * PI / 8.0;
        let grad = 2.0 * PI * 0.5 * 1.5;
        assert_relative_eq!(
            energy_h1_alpha(&u, 1.0).unwrap(),
            (l2 + grad).sqrt(),
            max_relative = 1e-10
        );
        assert_eq!(energy_h1_alpha(&u, 0.0).unwrap(), l2_norm(&u));
        assert_eq!(energy_h1_alpha(&VectorField::zeros(g), 0.3).unwrap(), 0.0);
    }

    #[test]
    fn velocity_error_and_filter_trend() {
        let g = Arc::new(PolarGrid::annulus(1.0, 2.0, 64, 32).unwrap());
        let y = harmonic_field(&g, 1).unwrap();
        assert_eq!(l2_velocity_error(&y, &y).unwrap(), 0.0);
        assert_eq!(
            l2_velocity_error(&y, &VectorField::zeros(g.clone())).unwrap(),
            l2_norm(&y)
        );
        let zero = ScalarField::zeros(g.clone());
        let errs: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&a| {
                let ws = EllipticWorkspace::new(g.clone(), a).unwrap();
                let x = ws.velocity_from_state(&zero, &[1.0]).unwrap();
                l2_velocity_error(&y, &x).unwrap()
            })
            .collect();
        assert!(errs[2] > 0.0 && errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn convergence_table_rules() {
        let g = annulus();
        let r = VectorField::from_fn(g.clone(), |r, _| (0.0, r));
        assert!(matches!(
            convergence_table(&[(0.1, &r)], &r),
            Err(Error::TooFewRuns { .. })
        ));
        let rows = convergence_table(&[(0.05, &r), (0.1, &r)], &r).unwrap();
        assert_eq!(rows[0].alpha, 0.1);
        assert!(rows.iter().all(|x| x.error_l2 == 0.0));
        let a = r.scaled(1.01);
        let b = r.scaled(1.0025);
        let rows = convergence_table(&[(0.1, &a), (0.05, &b)], &r).unwrap();
        assert_relative_eq!(rows[1].observed_order.unwrap(), 2.0, epsilon = 1e-9);
        assert!(rows[0].observed_order.is_none());
    }

    fn field(g: &Arc<PolarGrid>, c: [f64; 4]) -> VectorField {
        VectorField::from_fn(g.clone(), move |r, t| {
            (c[0] * (r * t.cos()).sin(), c[1] * r + c[2] * (2.0 * t).cos() + c[3])
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lp_norm_is_homogeneous(c in -5.0f64..5.0, p in 1.0f64..6.0) {
            let g = annulus();
            let f = ScalarField::from_fn(g.clone(), |r, t| (r * t).sin() + 0.3);
            let lhs = lp_norm(&f.scaled(c), p).unwrap();
            let rhs = c.abs() * lp_norm(&f, p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn energy_monotone_in_alpha(a in 0.0f64..1.0, b in 0.0f64..1.0, c in prop::array::uniform4(-2.0f64..2.0)) {
            let g = annulus();
            let u = field(&g, c);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(energy_h1_alpha(&u, lo).unwrap() <= energy_h1_alpha(&u, hi).unwrap());
        }

        #[test]
        fn velocity_error_is_a_metric(
            a in prop::array::uniform4(-2.0f64..2.0),
            b in prop::array::uniform4(-2.0f64..2.0),
            c in prop::array::uniform4(-2.0f64..2.0),
        ) {
            let g = annulus();
            let (x, y, z) = (field(&g, a), field(&g, b), field(&g, c));
            let dxy = l2_velocity_error(&x, &y).unwrap();
            prop_assert!((dxy - l2_velocity_error(&y, &x).unwrap()).abs() <= 1e-12);
            let dxz = l2_velocity_error(&x, &z).unwrap();
            let dzy = l2_velocity_error(&z, &y).unwrap();
            prop_assert!(dxy <= dxz + dzy + 1e-12);
        }
    }
}
