//! The four experiment drivers behind the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use alphaflow_core::diagnostics::gradient_norm;
use alphaflow_core::probe::fit_loglog_slope;
use alphaflow_core::{
    convergence_table, probe_operator_bound, Band, ConvergenceRow, DiagnosticRecord, ModelConfig, ModelKind, PolarGrid,
    SimState, Simulation,
};
use serde::Serialize;

use crate::config::{check_ladder, ExperimentConfig, NuRule};
use crate::error::CliError;
use crate::output::{fmt_num, RunWriter};

/// Result of one simulation.
#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticRecord>,
    pub final_state: SimState,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a ModelConfig,
    /// `‖u₀‖_{H¹_α}`.
    initial_energy_h1_alpha: f64,
    /// `α^{1/2}‖∇u₀‖_{L²}`, the quantity the vanishing-α theory needs bounded.
    initial_sqrt_alpha_grad_norm: f64,
}

/// Run one configured model into `dir` (diagnostics.csv, snapshots/, run.json).
pub fn run_model(
    grid: Arc<PolarGrid>,
    config: ModelConfig,
    dir: &Path,
    snapshot_interval: Option<f64>,
) -> Result<RunOutcome, CliError> {
    let sim = Simulation::new(grid, config).map_err(CliError::setup)?;
    let state = sim.initial_state().map_err(CliError::runtime)?;
    let mut writer = RunWriter::create(dir, snapshot_interval, sim.config().t_end)?;
    let first = sim.diagnostics(&state).map_err(CliError::runtime)?;
    let manifest = RunManifest {
        config: sim.config(),
        initial_energy_h1_alpha: first.energy_h1_alpha,
        initial_sqrt_alpha_grad_norm: sim.config().effective_alpha().sqrt() * gradient_norm(&state.u_cache),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join("run.json"), json + "\n")?;
    let result = sim.run_from(state, &mut writer);
    let records = writer.finish()?;
    let final_state = result.map_err(CliError::runtime)?;
    Ok(RunOutcome { records, final_state })
}

fn create_out(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("creating {}: {e}", out.display())))
}

/// `simulate`: one run.
pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome, CliError> {
    create_out(out)?;
    let grid = cfg.grid.build()?;
    run_model(grid, cfg.model_config(), out, cfg.output.snapshot_interval)
}

/// Run independent jobs on scoped threads; results come back in job order.
fn run_parallel<T: Send>(jobs: Vec<Box<dyn FnOnce() -> T + Send + '_>>) -> Vec<T> {
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs.into_iter().map(|job| s.spawn(job)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<ConvergenceRow>,
    pub summary_path: PathBuf,
}

fn alpha_dir(out: &Path, alpha: f64) -> PathBuf {
    out.join(format!("alpha_{alpha}"))
}

/// `sweep-alpha`: the configured model at each α plus the α = 0 Euler reference,
/// all started from the same `(q₀, γ)`, and the L² convergence table.
pub fn sweep_alpha(cfg: &ExperimentConfig, alphas: &[f64], out: &Path) -> Result<SweepOutcome, CliError> {
    check_ladder("alphas", alphas, 2)?;
    if cfg.model.kind == ModelKind::EulerReference {
        return Err(CliError::Config("model.kind: sweep needs a filtered model".into()));
    }
    create_out(out)?;
    let grid = cfg.grid.build()?;
    let base = cfg.model_config();
    let snap = cfg.output.snapshot_interval;
    let mut configs: Vec<(PathBuf, ModelConfig)> = alphas
        .iter()
        .map(|&a| {
            let mut c = base.clone();
            c.alpha = a;
            if let (ModelKind::SecondGrade, Some(rule)) = (c.model, cfg.sweep.nu_rule) {
                c.nu = rule.nu(a);
            }
            (alpha_dir(out, a), c)
        })
        .collect();
    let mut reference = base.clone();
    reference.model = ModelKind::EulerReference;
    reference.alpha = 0.0;
    configs.push((out.join("reference"), reference));
    // Validate everything up front so config mistakes are reported as such.
    for (_, c) in &configs {
        c.validate(&grid).map_err(CliError::setup)?;
    }
    let jobs: Vec<Box<dyn FnOnce() -> Result<RunOutcome, CliError> + Send>> = configs
        .into_iter()
        .map(|(dir, c)| {
            let g = grid.clone();
            Box::new(move || run_model(g, c, &dir, snap)) as Box<dyn FnOnce() -> _ + Send>
        })
        .collect();
    let mut results = run_parallel(jobs);
    let reference = results.pop().expect("reference job");
    let mut first_err = None;
    let mut runs = Vec::new();
    for (a, r) in alphas.iter().zip(results) {
        match r {
            Ok(o) => runs.push((*a, o.final_state.u_cache)),
            Err(e) => {
                eprintln!("alpha = {a}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    let reference = reference?;
    let refs: Vec<(f64, &alphaflow_core::VectorField)> = runs.iter().map(|(a, u)| (*a, u)).collect();
    let summary_path = out.join("summary.csv");
    let rows = if refs.len() >= 2 {
        let rows = convergence_table(&refs, &reference.final_state.u_cache).map_err(CliError::runtime)?;
        let mut text = String::from("alpha,error_l2,observed_order\n");
        for r in &rows {
            let order = r.observed_order.map(fmt_num).unwrap_or_default();
            writeln!(text, "{},{},{}", fmt_num(r.alpha), fmt_num(r.error_l2), order).expect("string write");
        }
        fs::write(&summary_path, text)?;
        rows
    } else {
        Vec::new()
    };
    match first_err {
        Some(e) => Err(e),
        None => Ok(SweepOutcome { rows, summary_path }),
    }
}

/// Per-run summary of the obstruction experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionRow {
    pub rule: NuRule,
    pub alpha: f64,
    pub nu: f64,
    pub max_lr_norm_q: f64,
    pub final_lr_norm_q: f64,
    /// `∫q(t_end) · e^{ν t_end/α}`.
    pub final_compensated_integral_q: f64,
}

/// `second-grade-obstruction`: second-grade runs along each ν rule and α ladder.
pub fn second_grade_obstruction(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<ObstructionRow>, CliError> {
    let ob = &cfg.obstruction;
    check_ladder("obstruction.alphas", &ob.alphas, 2)?;
    let has_prop = ob.rules.iter().any(|r| matches!(r, NuRule::Proportional { .. }));
    let has_pow = ob.rules.iter().any(|r| matches!(r, NuRule::Power { .. }));
    if !(has_prop && has_pow) {
        return Err(CliError::Config(
            "obstruction.rules: need one `proportional` and one `power` rule".into(),
        ));
    }
    create_out(out)?;
    let grid = cfg.grid.build()?;
    let mut base = cfg.model_config();
    base.model = ModelKind::SecondGrade;
    base.nu_margin = None;
    let snap = cfg.output.snapshot_interval;
    let mut plan = Vec::new();
    for rule in &ob.rules {
        for &a in &ob.alphas {
            let mut c = base.clone();
            c.alpha = a;
            c.nu = rule.nu(a);
            c.validate(&grid).map_err(CliError::setup)?;
            plan.push((*rule, a, alpha_dir(&out.join(rule.label()), a), c));
        }
    }
    let jobs: Vec<Box<dyn FnOnce() -> Result<RunOutcome, CliError> + Send>> = plan
        .iter()
        .map(|(_, _, dir, c)| {
            let (g, c, dir) = (grid.clone(), c.clone(), dir.clone());
            Box::new(move || run_model(g, c, &dir, snap)) as Box<dyn FnOnce() -> _ + Send>
        })
        .collect();
    let results = run_parallel(jobs);
    let mut rows = Vec::new();
    let mut first_err = None;
    for ((rule, alpha, dir, c), res) in plan.into_iter().zip(results) {
        let o = match res {
            Ok(o) => o,
            Err(e) => {
                eprintln!("{} alpha = {alpha}: {e}", rule.label());
                first_err.get_or_insert(e);
                continue;
            }
        };
        let rate = c.nu / alpha;
        let mut ts = String::from("t,lr_norm_q,integral_q,compensated_integral_q,energy_h1_alpha\n");
        for r in &o.records {
            writeln!(
                ts,
                "{},{},{},{},{}",
                fmt_num(r.time),
                fmt_num(r.lp_norm_q),
                fmt_num(r.integral_q),
                fmt_num(r.integral_q * (rate * r.time).exp()),
                fmt_num(r.energy_h1_alpha)
            )
            .expect("string write");
        }
        fs::write(dir.join("timeseries.csv"), ts)?;
        let last = o.records.last().expect("at least one record");
        rows.push(ObstructionRow {
            rule,
            alpha,
            nu: c.nu,
            max_lr_norm_q: o.records.iter().map(|r| r.lp_norm_q).fold(0.0, f64::max),
            final_lr_norm_q: last.lp_norm_q,
            final_compensated_integral_q: last.integral_q * (rate * last.time).exp(),
        });
    }
    let mut text = String::from("rule,alpha,nu,max_lr_norm_q,final_lr_norm_q,final_compensated_integral_q\n");
    for r in &rows {
        writeln!(
            text,
            "{},{},{},{},{},{}",
            r.rule.label(),
            fmt_num(r.alpha),
            fmt_num(r.nu),
            fmt_num(r.max_lr_norm_q),
            fmt_num(r.final_lr_norm_q),
            fmt_num(r.final_compensated_integral_q)
        )
        .expect("string write");
    }
    fs::write(out.join("summary.csv"), text)?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

/// Output of the operator probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    pub band: Band,
    pub alphas: Vec<f64>,
    pub sup_ratios: Vec<f64>,
    pub slope: f64,
}

/// `probe-operator`: sup ratios of `‖T(q)‖_{H¹}/‖q‖_{Lᵖ}` along the ladder and their log-log slope.
pub fn probe_operator(
    cfg: &ExperimentConfig,
    alphas: &[f64],
    p: f64,
    trials: usize,
    seed: u64,
    out: &Path,
) -> Result<ProbeSummary, CliError> {
    check_ladder("alphas", alphas, 3)?;
    if trials == 0 {
        return Err(CliError::Config("trials: need at least one trial".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(CliError::Config(format!("p: need 1 < p < inf, got {p}")));
    }
    create_out(out)?;
    let grid = cfg.grid.build()?;
    let mut table = String::from("alpha,trial,ratio\n");
    let mut sups = Vec::new();
    for &a in alphas {
        let rep = probe_operator_bound(&grid, a, p, trials, seed).map_err(CliError::setup)?;
        for (i, r) in rep.ratios.iter().enumerate() {
            writeln!(table, "{},{i},{}", fmt_num(a), fmt_num(*r)).expect("string write");
        }
        sups.push(rep.sup_ratio);
    }
    let slope = fit_loglog_slope(alphas, &sups).map_err(CliError::runtime)?;
    let mut csv = String::from("alpha,sup_ratio\n");
    for (a, s) in alphas.iter().zip(&sups) {
        writeln!(csv, "{},{}", fmt_num(*a), fmt_num(*s)).expect("string write");
    }
    let summary = ProbeSummary {
        p,
        trials,
        seed,
        band: Band::for_grid(&grid),
        alphas: alphas.to_vec(),
        sup_ratios: sups,
        slope,
    };
    fs::write(out.join("ratios.csv"), table)?;
    fs::write(out.join("probe.csv"), csv)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(out.join("probe_summary.json"), json + "\n")?;
    Ok(summary)
}
