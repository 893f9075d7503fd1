//! Empirical operator bounds over random band-limited vorticity fields.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{h1_norm, lp_norm};
use crate::elliptic::EllipticWorkspace;
use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::grid::PolarGrid;
use crate::spectral::chebyshev_values;

/// Angular modes `|k| ≤ max_angular`, radial Chebyshev modes `m < max_radial`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub max_angular: usize,
    pub max_radial: usize,
}

impl Band {
    /// A quarter of the angular modes and half of the radial ones.
    pub fn for_grid(grid: &PolarGrid) -> Self {
        Self {
            max_angular: grid.n_angular() / 4,
            max_radial: grid.n_radial() / 2,
        }
    }
}

/// Random smooth field `Σ (a cos kθ + b sin kθ) B_m(r)` with coefficients uniform
/// in `[-1, 1]`, normalized to unit `Lᵖ` norm. `B_m` is `T_m` in the mapped
/// radius on the annulus and `r^k T_m(2(r/R)² - 1)` on the disk.
pub fn random_band_limited(grid: &Arc<PolarGrid>, band: Band, p: f64, rng: &mut impl Rng) -> Result<ScalarField> {
    let (nr, nt) = grid.shape();
    let kmax = band.max_angular;
    let mmax = band.max_radial.max(1);
    let mut coef = vec![[0.0f64; 2]; (kmax + 1) * mmax];
    for k in 0..=kmax {
        for m in 0..mmax {
            let a = rng.random_range(-1.0..=1.0);
            let b = if k == 0 { 0.0 } else { rng.random_range(-1.0..=1.0) };
            coef[k * mmax + m] = [a, b];
        }
    }
    let (r0, r1) = (grid.r_inner(), grid.r_outer());
    // radial profile of each angular mode: (cos part, sin part)
    let mut prof = vec![[0.0f64; 2]; (kmax + 1) * nr];
    for (i, &r) in grid.radial_nodes().iter().enumerate() {
        let t = if grid.is_disk() {
            2.0 * (r / r1).powi(2) - 1.0
        } else {
            2.0 * (r - r0) / (r1 - r0) - 1.0
        };
        let cheb = chebyshev_values(t, mmax);
        for k in 0..=kmax {
            let lift = if grid.is_disk() { (r / r1).powi(k as i32) } else { 1.0 };
            let mut s = [0.0; 2];
            for m in 0..mmax {
                let c = coef[k * mmax + m];
                s[0] += c[0] * cheb[m];
                s[1] += c[1] * cheb[m];
            }
            prof[k * nr + i] = [lift * s[0], lift * s[1]];
        }
    }
    let mut values = ndarray::Array2::zeros((nr, nt));
    for (j, &th) in grid.angles().iter().enumerate() {
        for k in 0..=kmax {
            let (c, s) = ((k as f64 * th).cos(), (k as f64 * th).sin());
            for i in 0..nr {
                let pk = prof[k * nr + i];
                values[(i, j)] += pk[0] * c + pk[1] * s;
            }
        }
    }
    let q = ScalarField::new_unchecked(grid.clone(), values);
    let norm = lp_norm(&q, p)?;
    Ok(q.scaled(1.0 / norm))
}

/// Ratios `‖T(q)‖_{H¹}/‖q‖_{Lᵖ}` at one `α` (`T = S` when `α = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub alpha: f64,
    pub p: f64,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
}

fn check_probe_args(p: f64, trials: usize) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 < p < inf, got {p}")));
    }
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    Ok(())
}

/// Probe with a prepared workspace and explicit band.
pub fn probe_with_workspace(
    ws: &EllipticWorkspace,
    p: f64,
    trials: usize,
    seed: u64,
    band: Band,
) -> Result<ProbeReport> {
    check_probe_args(p, trials)?;
    let grid = ws.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = vec![0.0; grid.n_boundary_components()];
    let mut ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        let q = random_band_limited(grid, band, p, &mut rng)?;
        let u = if ws.alpha() > 0.0 {
            ws.velocity_from_state(&q, &zeros)?
        } else {
            ws.biot_savart(&q)?
        };
        ratios.push(h1_norm(&u) / lp_norm(&q, p)?);
    }
    let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ProbeReport {
        alpha: ws.alpha(),
        p,
        ratios,
        sup_ratio,
    })
}

/// Random-field probe of `‖T_α(q)‖_{H¹}/‖q‖_{Lᵖ}` with the grid's default band.
pub fn probe_operator_bound(
    grid: &Arc<PolarGrid>,
    alpha: f64,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    check_probe_args(p, trials)?;
    let ws = EllipticWorkspace::new(grid.clone(), alpha)?;
    probe_with_workspace(&ws, p, trials, seed, Band::for_grid(grid))
}

/// Ratios `‖S(q)‖_{H¹}/‖q‖_{L²}` of the Biot–Savart operator.
pub fn poincare_ratios(grid: &Arc<PolarGrid>, trials: usize, seed: u64, band: Band) -> Result<Vec<f64>> {
    let ws = EllipticWorkspace::new(grid.clone(), 0.0)?;
    Ok(probe_with_workspace(&ws, 2.0, trials, seed, band)?.ratios)
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("xs", "need at least two matching points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(invalid("xs", "log-log fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("xs", "abscissae must differ"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn annulus() -> Arc<PolarGrid> {
        Arc::new(PolarGrid::annulus(1.0, 2.0, 32, 64).unwrap())
    }

    #[test]
    fn deterministic_and_finite() {
        let g = annulus();
        let a = probe_operator_bound(&g, 0.05, 2.0, 3, 7).unwrap();
        let b = probe_operator_bound(&g, 0.05, 2.0, 3, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        assert_eq!(a.sup_ratio, a.ratios.iter().copied().fold(0.0, f64::max));
        let c = probe_operator_bound(&g, 0.05, 2.0, 3, 8).unwrap();
        assert_ne!(a.ratios, c.ratios);
    }

    #[test]
    fn argument_checks() {
        let g = annulus();
        assert!(probe_operator_bound(&g, 0.05, 2.0, 0, 1).is_err());
        assert!(probe_operator_bound(&g, 0.05, 1.0, 3, 1).is_err());
        assert!(fit_loglog_slope(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn random_fields_are_normalized_and_in_band() {
        let g = annulus();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let band = Band {
            max_angular: 4,
            max_radial: 6,
        };
        let q = random_band_limited(&g, band, 3.0, &mut rng).unwrap();
        assert_relative_eq!(lp_norm(&q, 3.0).unwrap(), 1.0, max_relative = 1e-12);
        let modes = g.transform().forward(q.values());
        for k in 5..g.n_modes() {
            assert!(modes.row(k).iter().all(|c| c.norm() < 1e-12));
        }
    }

    #[test]
    fn same_band_gives_same_field_on_finer_grid() {
        let coarse = annulus();
        let fine = Arc::new(PolarGrid::annulus(1.0, 2.0, 64, 128).unwrap());
        let band = Band::for_grid(&coarse);
        let a = poincare_ratios(&coarse, 4, 11, band).unwrap();
        let b = poincare_ratios(&fine, 4, 11, band).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, max_relative = 1e-6);
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.25)).collect();
        assert_relative_eq!(fit_loglog_slope(&xs, &ys).unwrap(), -0.25, epsilon = 1e-12);
    }

    #[test]
    fn disk_probe_runs() {
        let g = Arc::new(PolarGrid::disk(1.0, 16, 32).unwrap());
        let r = probe_operator_bound(&g, 0.02, 2.0, 2, 5).unwrap();
        assert!(r.sup_ratio.is_finite() && r.sup_ratio > 0.0);
    }
}
