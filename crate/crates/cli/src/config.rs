//! Experiment configuration: a TOML file with one section per concern.
//!
//! ```toml
//! [grid]
//! domain = "annulus"
//! r_inner = 1.0
//! r_outer = 2.0
//! n_radial = 64
//! n_angular = 128
//!
//! [model]
//! kind = "alpha_euler"
//! alpha = 0.05
//! t_end = 1.0
//! gamma = [1.0]
//!
//! [initial_condition]
//! kind = "perturbed_ring"
//! r_c = 1.5
//! sigma = 0.15
//! a = 0.1
//! m = 3
//! ```

use std::path::Path;
use std::sync::Arc;

use alphaflow_core::{InitialCondition, ModelConfig, ModelKind, PolarGrid, RadialSpacing};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    #[default]
    Annulus,
    Disk,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub domain: Domain,
    #[serde(default)]
    pub r_inner: f64,
    pub r_outer: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    #[serde(default)]
    pub spacing: RadialSpacing,
}

impl GridSection {
    pub fn build(&self) -> Result<Arc<PolarGrid>, CliError> {
        let g = match self.domain {
            Domain::Annulus => {
                PolarGrid::annulus_with_spacing(self.r_inner, self.r_outer, self.n_radial, self.n_angular, self.spacing)
            }
            Domain::Disk => PolarGrid::disk(self.r_outer, self.n_radial, self.n_angular),
        };
        g.map(Arc::new).map_err(|e| CliError::Config(format!("[grid] {e}")))
    }
}

fn default_p() -> f64 {
    2.0
}

fn default_cfl() -> f64 {
    0.5
}

fn default_stencil() -> usize {
    alphaflow_core::dynamics::DEFAULT_STENCIL
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
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
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default = "default_stencil")]
    pub stencil: usize,
    #[serde(default)]
    pub nu_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Time between diagnostic rows; every step when absent.
    #[serde(default)]
    pub diagnostic_interval: Option<f64>,
    /// Time between field snapshots; only the first and last state when absent.
    #[serde(default)]
    pub snapshot_interval: Option<f64>,
}

/// How the second-grade viscosity follows `α`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NuRule {
    /// `ν = c·α`.
    Proportional { c: f64 },
    /// `ν = α^{1 + margin}`.
    Power { margin: f64 },
}

impl NuRule {
    pub fn nu(&self, alpha: f64) -> f64 {
        match *self {
            NuRule::Proportional { c } => c * alpha,
            NuRule::Power { margin } => alpha.powf(1.0 + margin),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NuRule::Proportional { c } => format!("nu_{c}_alpha"),
            NuRule::Power { margin } => format!("nu_alpha_pow_{}", 1.0 + margin),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// Viscosity rule for second-grade sweeps.
    #[serde(default)]
    pub nu_rule: Option<NuRule>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ObstructionSection {
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub rules: Vec<NuRule>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub model: ModelSection,
    pub initial_condition: InitialCondition,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub obstruction: ObstructionSection,
    #[serde(default)]
    pub probe: ProbeSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The core model configuration this experiment describes.
    pub fn model_config(&self) -> ModelConfig {
        let m = &self.model;
        ModelConfig {
            model: m.kind,
            alpha: m.alpha,
            nu: m.nu,
            epsilon: m.epsilon,
            p: m.p,
            cfl: m.cfl,
            t_end: m.t_end,
            initial_condition: self.initial_condition,
            gamma: m.gamma.clone(),
            diagnostic_interval: self.output.diagnostic_interval,
            stencil: m.stencil,
            nu_margin: m.nu_margin,
        }
    }
}

/// Ladders must hold at least `min` positive values in strictly decreasing order.
pub fn check_ladder(name: &str, alphas: &[f64], min: usize) -> Result<(), CliError> {
    if alphas.len() < min {
        return Err(CliError::Config(format!(
            "{name}: need at least {min} values, got {}",
            alphas.len()
        )));
    }
    if alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(CliError::Config(format!("{name}: values must be positive")));
    }
    if !alphas.windows(2).all(|w| w[1] < w[0]) {
        return Err(CliError::Config(format!("{name}: ladder must be strictly decreasing")));
    }
    Ok(())
}

/// Parse a comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("--alphas: `{s}`: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[grid]
r_inner = 1.0
r_outer = 2.0
n_radial = 16
n_angular = 16

[model]
kind = "second_grade"
alpha = 0.05
nu = 0.005
t_end = 0.5
gamma = [1.0]

[initial_condition]
kind = "gaussian_ring"
r_c = 1.5
sigma = 0.15

[obstruction]
alphas = [0.1, 0.05]
rules = [{ kind = "proportional", c = 0.5 }, { kind = "power", margin = 0.5 }]
"#;

    #[test]
    fn parses_sections() {
        let c = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(c.model.kind, ModelKind::SecondGrade);
        assert_eq!(c.model.cfl, 0.5);
        assert_eq!(c.obstruction.rules[1].nu(0.04), 0.04f64.powf(1.5));
        let mc = c.model_config();
        assert_eq!(mc.gamma, vec![1.0]);
        assert!(matches!(mc.initial_condition, InitialCondition::GaussianRing { amplitude, .. } if amplitude == 1.0));
        assert_eq!(c.grid.build().unwrap().n_radial(), 16);
    }

    #[test]
    fn errors_name_the_field() {
        let e = ExperimentConfig::parse(&BASIC.replace("t_end = 0.5", "")).unwrap_err();
        assert!(e.to_string().contains("t_end"), "{e}");
        let e = ExperimentConfig::parse(&BASIC.replace("nu = 0.005", "nu = \"x\"")).unwrap_err();
        assert!(e.to_string().contains("nu"), "{e}");
        let e = ExperimentConfig::parse(&BASIC.replace("n_radial = 16", "n_radial = 16\nbogus = 1")).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn ladders_and_lists() {
        assert!(check_ladder("alphas", &[0.1], 2).is_err());
        assert!(check_ladder("alphas", &[0.05, 0.1], 2).is_err());
        check_ladder("alphas", &[0.1, 0.05], 2).unwrap();
        assert_eq!(parse_list("0.1, 0.05,").unwrap(), vec![0.1, 0.05]);
        assert!(parse_list("0.1,x").is_err());
    }
}
