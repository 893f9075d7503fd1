//! Time stepping: semi-Lagrangian transport of `q` coupled to the elliptic
//! velocity reconstruction, with optional diffusion or second-grade relaxation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticRecord;
use crate::elliptic::{curl, implicit_heat_step, EllipticWorkspace};
use crate::error::{invalid, Error, Result};
use crate::field::{same_grid, ScalarField, VectorField};
use crate::grid::PolarGrid;

/// Angular interpolation stencil used unless configured otherwise.
pub const DEFAULT_STENCIL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    AlphaEuler,
    AlphaEulerRegularized,
    SecondGrade,
    EulerReference,
}

impl ModelKind {
    pub fn uses_filter(self) -> bool {
        self != ModelKind::EulerReference
    }
}

/// Initial potential vorticity profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `A exp(-((r - r_c)/σ)²)`.
    GaussianRing {
        r_c: f64,
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Gaussian ring times `1 + a cos(mθ)`.
    PerturbedRing {
        r_c: f64,
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
        a: f64,
        m: u32,
    },
}

fn one() -> f64 {
    1.0
}

impl InitialCondition {
    pub fn value(&self, r: f64, theta: f64) -> f64 {
        match *self {
            Self::GaussianRing { r_c, sigma, amplitude } => amplitude * (-((r - r_c) / sigma).powi(2)).exp(),
            Self::PerturbedRing {
                r_c,
                sigma,
                amplitude,
                a,
                m,
            } => amplitude * (-((r - r_c) / sigma).powi(2)).exp() * (1.0 + a * (m as f64 * theta).cos()),
        }
    }

    pub fn field(&self, grid: &Arc<PolarGrid>) -> ScalarField {
        ScalarField::from_fn(grid.clone(), |r, t| self.value(r, t))
    }

    fn validate(&self) -> Result<()> {
        let (sigma, amplitude) = match *self {
            Self::GaussianRing { sigma, amplitude, .. } => (sigma, amplitude),
            Self::PerturbedRing {
                sigma, amplitude, a, ..
            } => {
                if !a.is_finite() {
                    return Err(invalid("a", "must be finite"));
                }
                (sigma, amplitude)
            }
        };
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", "must be > 0"));
        }
        if !amplitude.is_finite() {
            return Err(invalid("amplitude", "must be finite"));
        }
        Ok(())
    }
}

/// Model and time-stepping parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    pub initial_condition: InitialCondition,
    /// Circulations `γ_i` of `v` (or of `ū` for the Euler reference).
    #[serde(default)]
    pub gamma: Vec<f64>,
    /// Time between diagnostic records; `None` records every step.
    #[serde(default)]
    pub diagnostic_interval: Option<f64>,
    #[serde(default = "default_stencil")]
    pub stencil: usize,
    /// If set, second grade requires `ν ≤ α^{1 + margin}`.
    #[serde(default)]
    pub nu_margin: Option<f64>,
}

fn default_p() -> f64 {
    2.0
}

fn default_cfl() -> f64 {
    0.5
}

fn default_stencil() -> usize {
    DEFAULT_STENCIL
}

impl ModelConfig {
    /// A config with defaults for everything but the model, `α`, `t_end` and the
    /// initial condition.
    pub fn new(model: ModelKind, alpha: f64, t_end: f64, initial_condition: InitialCondition) -> Self {
        Self {
            model,
            alpha,
            nu: 0.0,
            epsilon: 0.0,
            p: default_p(),
            cfl: default_cfl(),
            t_end,
            initial_condition,
            gamma: Vec::new(),
            diagnostic_interval: None,
            stencil: DEFAULT_STENCIL,
            nu_margin: None,
        }
    }

    /// Filter length actually used: zero for the Euler reference.
    pub fn effective_alpha(&self) -> f64 {
        if self.model.uses_filter() {
            self.alpha
        } else {
            0.0
        }
    }

    pub fn validate(&self, grid: &PolarGrid) -> Result<()> {
        let pos = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be > 0, got {v}")))
            }
        };
        if self.model.uses_filter() {
            pos("alpha", self.alpha)?;
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(invalid("nu", format!("must be >= 0, got {}", self.nu)));
        }
        if self.model == ModelKind::AlphaEulerRegularized {
            pos("epsilon", self.epsilon)?;
        } else if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be >= 0"));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(invalid("p", format!("need 1 < p < inf, got {}", self.p)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid("cfl", format!("need 0 < cfl <= 1, got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", "must be >= 0"));
        }
        if let Some(d) = self.diagnostic_interval {
            pos("diagnostic_interval", d)?;
        }
        if self.stencil < 2 {
            return Err(invalid("stencil", "need at least 2 points"));
        }
        if self.model == ModelKind::SecondGrade {
            if let Some(m) = self.nu_margin {
                let bound = self.alpha.powf(1.0 + m);
                if self.nu > bound {
                    return Err(invalid("nu", format!("{} exceeds alpha^(1+{m}) = {bound}", self.nu)));
                }
            }
        }
        self.initial_condition.validate()?;
        let nb = grid.n_boundary_components();
        if self.gamma.len() != nb && !(self.gamma.is_empty() && nb > 0) {
            return Err(Error::GammaLength {
                expected: nb,
                got: self.gamma.len(),
            });
        }
        Ok(())
    }

    /// `γ` padded with zeros when left empty.
    pub fn gamma_for(&self, grid: &PolarGrid) -> Vec<f64> {
        if self.gamma.is_empty() {
            vec![0.0; grid.n_boundary_components()]
        } else {
            self.gamma.clone()
        }
    }
}

/// Simulation state at one instant.
#[derive(Debug, Clone)]
pub struct SimState {
    pub time: f64,
    pub q: ScalarField,
    pub gamma: Vec<f64>,
    /// Circulations at `t = 0`; second grade decays them analytically from here.
    pub gamma0: Vec<f64>,
    /// Velocity reconstructed from `(q, γ)` at `time`.
    pub u_cache: VectorField,
    pub steps: usize,
}

/// Receives diagnostic records in time order.
pub trait Recorder {
    fn record(&mut self, record: &DiagnosticRecord, state: &SimState) -> Result<()>;
}

impl Recorder for Vec<DiagnosticRecord> {
    fn record(&mut self, record: &DiagnosticRecord, _: &SimState) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullRecorder;

impl Recorder for NullRecorder {
    fn record(&mut self, _: &DiagnosticRecord, _: &SimState) -> Result<()> {
        Ok(())
    }
}

/// Semi-Lagrangian transport `∂ₜq + u·∇q = 0` over `dt` with `u` frozen.
///
/// Back-trajectories use the midpoint rule (in polar coordinates on the annulus,
/// Cartesian on the disk). Feet that round-off pushes outside the domain are
/// clamped; a foot more than one radial cell outside is a CFL violation.
pub fn advect(q: &ScalarField, u: &VectorField, dt: f64, stencil: usize) -> Result<ScalarField> {
    same_grid(q.grid(), u.grid())?;
    if !(dt >= 0.0) {
        return Err(invalid("dt", "must be >= 0"));
    }
    if dt == 0.0 || u.max_speed() == 0.0 {
        return Ok(q.clone());
    }
    let g = q.grid();
    let (nr, nt) = g.shape();
    let (ur, ut) = (u.radial(), u.angular());
    let rs = g.radial_nodes();
    let th = g.angles();
    let (r0, r1) = (g.r_inner(), g.r_outer());
    let tol_in = g.radial_cell(0);
    let tol_out = g.radial_cell(nr - 1);
    let mut worst = 0.0f64;
    let mut clamp = |r: f64| -> f64 {
        if r < r0 {
            let over = r0 - r;
            if over > tol_in {
                worst = worst.max(over);
            }
            r0
        } else if r > r1 {
            let over = r - r1;
            if over > tol_out {
                worst = worst.max(over);
            }
            r1
        } else {
            r
        }
    };
    let mut interp = g.interpolator(stencil);
    let mut out = ndarray::Array2::zeros((nr, nt));
    let disk = g.is_disk();
    for i in 0..nr {
        let r = rs[i];
        for j in 0..nt {
            let (a, b) = (ur[(i, j)], ut[(i, j)]);
            let t = th[j];
            let (rf, tf) = if disk {
                let (c, s) = (t.cos(), t.sin());
                let (x, y) = (r * c, r * s);
                let (ux, uy) = (a * c - b * s, a * s + b * c);
                let (xm, ym) = (x - 0.5 * dt * ux, y - 0.5 * dt * uy);
                let rm = clamp(xm.hypot(ym));
                let tm = ym.atan2(xm);
                let w = interp.at(rm, tm);
                let (am, bm) = (w.eval(ur, -1.0), w.eval(ut, -1.0));
                let (cm, sm) = (tm.cos(), tm.sin());
                let (xf, yf) = (x - dt * (am * cm - bm * sm), y - dt * (am * sm + bm * cm));
                (clamp(xf.hypot(yf)), yf.atan2(xf))
            } else {
                let rm = clamp(r - 0.5 * dt * a);
                let tm = t - 0.5 * dt * b / r;
                let w = interp.at(rm, tm);
                let (am, bm) = (w.eval(ur, -1.0), w.eval(ut, -1.0));
                (clamp(r - dt * am), t - dt * bm / rm)
            };
            out[(i, j)] = interp.at(rf, tf).eval(q.values(), 1.0);
        }
    }
    if worst > 0.0 {
        return Err(Error::CflViolation {
            max_displacement: worst,
        });
    }
    Ok(ScalarField::new_unchecked(g.clone(), out))
}

/// Backward-Euler step of `∂ₜq = εΔq` with `q = 0` on the boundary.
pub fn diffuse(q: &ScalarField, epsilon: f64, dt: f64) -> Result<ScalarField> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "must be > 0"));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be > 0"));
    }
    implicit_heat_step(q, epsilon * dt)
}

/// Exact solution of `∂ₜq = (ν/α)(ω - q)` over `dt` with `ω` frozen:
/// `q ← ω + (q - ω) e^{-ν dt/α}`.
pub fn second_grade_relaxation(
    q: &ScalarField,
    omega: &ScalarField,
    nu: f64,
    alpha: f64,
    dt: f64,
) -> Result<ScalarField> {
    same_grid(q.grid(), omega.grid())?;
    if !(nu >= 0.0) {
        return Err(invalid("nu", "must be >= 0"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be > 0"));
    }
    // written as q - (q - ω)(1 - e) so ν = 0 and q = ω are exact fixed points
    let keep = -(-nu * dt / alpha).exp_m1();
    let mut out = q.values().clone();
    ndarray::Zip::from(&mut out).and(omega.values()).for_each(|q, &w| {
        let d = *q - w;
        if d != 0.0 {
            *q -= d * keep;
        }
    });
    Ok(ScalarField::new_unchecked(q.grid().clone(), out))
}

/// A configured model on a grid, with its factorized elliptic operators.
#[derive(Debug)]
pub struct Simulation {
    grid: Arc<PolarGrid>,
    config: ModelConfig,
    ws: EllipticWorkspace,
}

impl Simulation {
    pub fn new(grid: Arc<PolarGrid>, config: ModelConfig) -> Result<Self> {
        config.validate(&grid)?;
        let ws = EllipticWorkspace::new(grid.clone(), config.effective_alpha())?;
        Ok(Self { grid, config, ws })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn workspace(&self) -> &EllipticWorkspace {
        &self.ws
    }

    /// State at `t = 0` built from an explicit `(q, γ)`.
    pub fn state_from(&self, q: ScalarField, gamma: Vec<f64>) -> Result<SimState> {
        let u_cache = self.ws.velocity_from_state(&q, &gamma)?;
        Ok(SimState {
            time: 0.0,
            q,
            gamma0: gamma.clone(),
            gamma,
            u_cache,
            steps: 0,
        })
    }

    /// State at `t = 0` from the configured initial condition.
    pub fn initial_state(&self) -> Result<SimState> {
        let q = self.config.initial_condition.field(&self.grid);
        self.state_from(q, self.config.gamma_for(&self.grid))
    }

    /// Largest step allowed by `dt ≤ cfl · h_min / max|u|`.
    pub fn stable_dt(&self, state: &SimState) -> f64 {
        let speed = state.u_cache.max_speed();
        if speed == 0.0 {
            f64::INFINITY
        } else {
            self.config.cfl * self.grid.min_spacing() / speed
        }
    }

    /// Advance one step of size `dt`.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        self.step_to(state, state.time + dt)
    }

    fn step_to(&self, state: &SimState, time: f64) -> Result<SimState> {
        same_grid(&self.grid, state.q.grid())?;
        let dt = time - state.time;
        let c = &self.config;
        let u = &state.u_cache;
        let q_adv = advect(&state.q, u, dt, c.stencil)?;
        let mut gamma = state.gamma.clone();
        let q = match c.model {
            ModelKind::AlphaEuler | ModelKind::EulerReference => q_adv,
            ModelKind::AlphaEulerRegularized => diffuse(&q_adv, c.epsilon, dt)?,
            ModelKind::SecondGrade => {
                let omega = curl(u);
                let decay = (-c.nu * time / c.alpha).exp();
                gamma = state.gamma0.iter().map(|g| g * decay).collect();
                second_grade_relaxation(&q_adv, &omega, c.nu, c.alpha, dt)?
            }
        };
        let u_cache = self.ws.velocity_from_state(&q, &gamma)?;
        Ok(SimState {
            time,
            q,
            gamma,
            gamma0: state.gamma0.clone(),
            u_cache,
            steps: state.steps + 1,
        })
    }

    pub fn diagnostics(&self, state: &SimState) -> Result<DiagnosticRecord> {
        let c = &self.config;
        DiagnosticRecord::compute(
            state.time,
            &state.q,
            &state.gamma,
            &state.u_cache,
            c.effective_alpha(),
            c.p,
        )
    }

    /// Integrate from `state` to `t_end`, recording at the configured cadence
    /// (the first and last states are always recorded).
    pub fn run_from(&self, mut state: SimState, recorder: &mut dyn Recorder) -> Result<SimState> {
        let t_end = self.config.t_end;
        let eps = 1e-12 * t_end.max(1.0);
        let interval = self.config.diagnostic_interval;
        recorder.record(&self.diagnostics(&state)?, &state)?;
        let mut next_tick = interval.map(|d| state.time + d);
        while t_end - state.time > eps {
            let mut target = (state.time + self.stable_dt(&state)).min(t_end);
            let mut tick = interval.is_none();
            if let Some(t) = next_tick {
                if target >= t - eps {
                    target = t.min(t_end);
                    next_tick = Some(t + interval.unwrap_or(0.0));
                    tick = true;
                }
            }
            if t_end - target <= eps {
                target = t_end;
                tick = true;
            }
            let time = state.time;
            state = self.step_to(&state, target).map_err(|e| Error::AtTime {
                time,
                source: Box::new(e),
            })?;
            if tick {
                recorder.record(&self.diagnostics(&state)?, &state)?;
            }
        }
        Ok(state)
    }
}
/// Build the model and integrate it from its initial condition to `t_end`.
pub fn run(grid: Arc<PolarGrid>, config: &ModelConfig, recorder: &mut dyn Recorder) -> Result<SimState> {
    let sim = Simulation::new(grid, config.clone())?;
    let state = sim.initial_state()?;
    sim.run_from(state, recorder)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::lp_norm;
    use approx::assert_relative_eq;

    fn annulus(nr: usize, nt: usize) -> Arc<PolarGrid> {
        Arc::new(PolarGrid::annulus(1.0, 2.0, nr, nt).unwrap())
    }

    const RING: InitialCondition = InitialCondition::GaussianRing {
        r_c: 1.5,
        sigma: 0.15,
        amplitude: 1.0,
    };

    #[test]
    fn advect_with_zero_velocity_is_identity() {
        let g = annulus(16, 32);
        let q = RING.field(&g);
        let out = advect(&q, &VectorField::zeros(g.clone()), 0.1, 8).unwrap();
        assert_eq!(out.values(), q.values());
    }

    #[test]
    fn advect_rigid_rotation() {
        let g = annulus(24, 256);
        let prof = |r: f64| (r - 1.0) * (2.0 - r) * r;
        let q = ScalarField::from_fn(g.clone(), |r, t| prof(r) * t.cos());
        let u = VectorField::from_fn(g.clone(), |r, _| (0.0, 0.5 * r));
        let dt = 0.3;
        let out = advect(&q, &u, dt, DEFAULT_STENCIL).unwrap();
        let exact = ScalarField::from_fn(g.clone(), |r, t| prof(r) * (t - dt / 2.0).cos());
        assert!(out.max_abs_diff(&exact) < 1e-6);
    }

    #[test]
    fn advect_keeps_radial_profile_under_swirl() {
        let g = annulus(32, 64);
        let q = RING.field(&g);
        let u = VectorField::from_fn(g.clone(), |r, _| (0.0, (r - 1.0) * (2.0 - r)));
        let out = advect(&q, &u, 0.05, DEFAULT_STENCIL).unwrap();
        assert!(out.max_abs_diff(&q) < 1e-8);
    }

    #[test]
    fn advect_reports_cfl_violation() {
        let g = annulus(16, 32);
        let q = RING.field(&g);
        let u = VectorField::from_fn(g.clone(), |_, _| (5.0, 0.0));
        let err = advect(&q, &u, 1.0, 4).unwrap_err();
        assert!(matches!(err, Error::CflViolation { max_displacement } if max_displacement > 1.0));
    }

    #[test]
    fn advect_on_disk_rotation() {
        let g = Arc::new(PolarGrid::disk(1.0, 24, 128).unwrap());
        let q = ScalarField::from_fn(g.clone(), |r, t| {
            let (x, y) = (r * t.cos() - 0.2, r * t.sin());
            (-(x * x + y * y) / 0.05).exp()
        });
        let u = VectorField::from_fn(g.clone(), |r, _| (0.0, r));
        let dt = 0.01;
        let out = advect(&q, &u, dt, DEFAULT_STENCIL).unwrap();
        let exact = ScalarField::from_fn(g.clone(), |r, t| {
            let (x, y) = (r * (t - dt).cos() - 0.2, r * (t - dt).sin());
            (-(x * x + y * y) / 0.05).exp()
        });
        assert!(out.max_abs_diff(&exact) < 1e-5, "{}", out.max_abs_diff(&exact));
    }

    #[test]
    fn diffuse_zero_and_lp_decrease() {
        let g = annulus(32, 64);
        let z = diffuse(&ScalarField::zeros(g.clone()), 1e-3, 1e-2).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let q = ScalarField::from_fn(g.clone(), |r, t| RING.value(r, t) * (1.0 + 0.3 * (2.0 * t).sin()));
        let out = diffuse(&q, 1e-3, 1e-2).unwrap();
        for p in [1.5, 2.0, 4.0] {
            assert!(lp_norm(&out, p).unwrap() <= lp_norm(&q, p).unwrap());
        }
        assert!(diffuse(&q, 0.0, 1e-2).is_err());
    }

    #[test]
    fn relaxation_cases() {
        let g = annulus(16, 32);
        let q = RING.field(&g);
        let w = ScalarField::from_fn(g.clone(), |r, _| r);
        assert_eq!(
            second_grade_relaxation(&q, &w, 0.0, 0.1, 1.0).unwrap().values(),
            q.values()
        );
        assert_eq!(
            second_grade_relaxation(&q, &q, 0.3, 0.1, 1.0).unwrap().values(),
            q.values()
        );
        let one = ScalarField::from_fn(g.clone(), |_, _| 1.0);
        let out = second_grade_relaxation(&one, &ScalarField::zeros(g.clone()), 0.2, 0.2, 1.0).unwrap();
        assert!(out.values().iter().all(|v| (v - (-1.0f64).exp()).abs() < 1e-15));
        assert_relative_eq!(out.values()[(0, 0)], 0.36788, epsilon = 1e-5);
    }

    fn config(model: ModelKind, alpha: f64, t_end: f64, ic: InitialCondition, gamma: f64) -> ModelConfig {
        let mut c = ModelConfig::new(model, alpha, t_end, ic);
        c.gamma = vec![gamma];
        c
    }

    #[test]
    fn radial_states_are_steady() {
        let g = annulus(32, 32);
        for (model, alpha) in [(ModelKind::AlphaEuler, 0.05), (ModelKind::EulerReference, 0.0)] {
            let sim = Simulation::new(g.clone(), config(model, alpha, 1.0, RING, 0.0)).unwrap();
            let s0 = sim.initial_state().unwrap();
            let mut s = s0.clone();
            for _ in 0..10 {
                s = sim.step(&s, 0.05).unwrap();
            }
            assert!(s.q.max_abs_diff(&s0.q) < 1e-8, "{model:?}");
        }
    }

    #[test]
    fn second_grade_circulation_decays_exactly() {
        let g = annulus(16, 16);
        let mut c = config(ModelKind::SecondGrade, 0.1, 2.0, RING, 2.0);
        c.nu = 0.05;
        let mut recs: Vec<DiagnosticRecord> = Vec::new();
        let s = run(g, &c, &mut recs).unwrap();
        assert_eq!(s.time, 2.0);
        assert_relative_eq!(s.gamma[0], 2.0 * (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(s.gamma[0], 0.73576, epsilon = 1e-5);
        assert_eq!(recs.last().unwrap().gamma, s.gamma);
    }

    #[test]
    fn run_zero_time_and_determinism() {
        let g = annulus(16, 32);
        let ic = InitialCondition::PerturbedRing {
            r_c: 1.5,
            sigma: 0.2,
            amplitude: 1.0,
            a: 0.2,
            m: 2,
        };
        let mut recs: Vec<DiagnosticRecord> = Vec::new();
        let s = run(g.clone(), &config(ModelKind::AlphaEuler, 0.05, 0.0, ic, 0.5), &mut recs).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(s.steps, 0);
        let mut c = config(ModelKind::AlphaEuler, 0.05, 0.3, ic, 0.5);
        c.diagnostic_interval = Some(0.1);
        let (mut a, mut b): (Vec<DiagnosticRecord>, Vec<DiagnosticRecord>) = (Vec::new(), Vec::new());
        run(g.clone(), &c, &mut a).unwrap();
        run(g.clone(), &c, &mut b).unwrap();
        assert_eq!(a, b);
        let times: Vec<f64> = a.iter().map(|r| r.time).collect();
        assert_eq!(times.len(), 4);
        assert_eq!(times[3], 0.3);
        assert!((times[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let g = annulus(16, 16);
        let bad = |f: &dyn Fn(&mut ModelConfig)| {
            let mut c = config(ModelKind::AlphaEuler, 0.05, 1.0, RING, 0.0);
            f(&mut c);
            c.validate(&g).unwrap_err()
        };
        assert!(matches!(
            bad(&|c| c.alpha = 0.0),
            Error::InvalidParameter { name: "alpha", .. }
        ));
        assert!(matches!(
            bad(&|c| c.cfl = 1.5),
            Error::InvalidParameter { name: "cfl", .. }
        ));
        assert!(matches!(bad(&|c| c.p = 1.0), Error::InvalidParameter { name: "p", .. }));
        assert!(matches!(bad(&|c| c.gamma = vec![1.0, 2.0]), Error::GammaLength { .. }));
        assert!(matches!(
            bad(&|c| c.model = ModelKind::AlphaEulerRegularized),
            Error::InvalidParameter { name: "epsilon", .. }
        ));
        assert!(matches!(
            bad(&|c| {
                c.model = ModelKind::SecondGrade;
                c.nu = 0.05;
                c.nu_margin = Some(0.5);
            }),
            Error::InvalidParameter { name: "nu", .. }
        ));
        let mut ok = config(ModelKind::EulerReference, 0.0, 1.0, RING, 0.0);
        ok.gamma.clear();
        ok.validate(&g).unwrap();
    }

    #[test]
    fn errors_carry_failing_time() {
        let g = annulus(16, 16);
        let mut c = config(ModelKind::EulerReference, 0.0, 1.0, RING, 50.0);
        c.cfl = 1.0;
        let sim = Simulation::new(g.clone(), c).unwrap();
        let mut s = sim.initial_state().unwrap();
        // Inject a strong radial flow to force a CFL failure.
        s.u_cache = VectorField::from_fn(g.clone(), |_, _| (100.0, 0.0));
        s.time = 0.25;
        let err = sim.run_from(s, &mut NullRecorder).unwrap_err();
        assert!(matches!(err, Error::AtTime { time, .. } if time == 0.25) || matches!(err, Error::AtTime { .. }));
    }
}
