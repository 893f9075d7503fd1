use std::path::PathBuf;
use std::process::ExitCode;

use alphaflow_cli::config::parse_list;
use alphaflow_cli::experiments::{probe_operator, second_grade_obstruction, simulate, sweep_alpha};
use alphaflow_cli::{CliError, ExperimentConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "alphaflow", version, about = "α-Euler and second-grade fluid experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the model along an α ladder plus the α = 0 reference.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly decreasing α values (overrides [sweep].alphas).
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Second-grade runs contrasting the ν rules of [obstruction].
    SecondGradeObstruction {
        #[command(flatten)]
        common: Common,
    },
    /// Random-field probe of the filtered Biot–Savart operator norm.
    ProbeOperator {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alphas: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn alphas_from(flag: Option<String>, fallback: &[f64]) -> Result<Vec<f64>, CliError> {
    match flag {
        Some(s) => parse_list(&s),
        None => Ok(fallback.to_vec()),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { common } => {
            let cfg = ExperimentConfig::load(&common.config)?;
            let o = simulate(&cfg, &common.out)?;
            println!(
                "simulated to t = {} in {} steps ({} records)",
                o.final_state.time,
                o.final_state.steps,
                o.records.len()
            );
        }
        Command::SweepAlpha { common, alphas } => {
            let cfg = ExperimentConfig::load(&common.config)?;
            let alphas = alphas_from(alphas, &cfg.sweep.alphas)?;
            let o = sweep_alpha(&cfg, &alphas, &common.out)?;
            println!("alpha,error_l2,observed_order");
            for r in &o.rows {
                let order = r.observed_order.map(|v| format!("{v:.4}")).unwrap_or_default();
                println!("{},{:.6e},{order}", r.alpha, r.error_l2);
            }
        }
        Command::SecondGradeObstruction { common } => {
            let cfg = ExperimentConfig::load(&common.config)?;
            let rows = second_grade_obstruction(&cfg, &common.out)?;
            println!("rule,alpha,nu,max_lr_norm_q,final_compensated_integral_q");
            for r in &rows {
                println!(
                    "{},{},{:.6e},{:.6e},{:.6e}",
                    r.rule.label(),
                    r.alpha,
                    r.nu,
                    r.max_lr_norm_q,
                    r.final_compensated_integral_q
                );
            }
        }
        Command::ProbeOperator {
            common,
            alphas,
            p,
            trials,
            seed,
        } => {
            let cfg = ExperimentConfig::load(&common.config)?;
            let alphas = alphas_from(alphas, &cfg.probe.alphas)?;
            let p = p.or(cfg.probe.p).unwrap_or(cfg.model.p);
            let trials = trials.or(cfg.probe.trials).unwrap_or(32);
            let seed = seed.or(cfg.probe.seed).unwrap_or(0);
            let s = probe_operator(&cfg, &alphas, p, trials, seed, &common.out)?;
            for (a, r) in s.alphas.iter().zip(&s.sup_ratios) {
                println!("alpha = {a}: sup ratio {r:.6e}");
            }
            println!("fitted slope {:.4}", s.slope);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("alphaflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
