use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use noma_urllc::drl::{flops_estimate, Architecture};
use noma_urllc::harness::{
    emit_metrics, load_scenario, run_evaluation, run_training, sweep_sa, PolicySource, RunOptions, RunReport, Scenario,
};

#[derive(Parser)]
#[command(name = "noma-urllc", version, about = "NOMA uplink URLLC scheduling simulator and PPO trainer")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Run this single seed instead of the scenario's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for curve.csv, report.json, checkpoints and traces.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arch {
    NomaPpo,
    Bdq,
    IdrqnAgent,
}

#[derive(Subcommand)]
enum Command {
    /// Train the scenario's agent (baselines are evaluated directly).
    Train {
        #[arg(long)]
        traces: bool,
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate a baseline or a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        traces: bool,
    },
    /// Sweep the slotted-ALOHA access probability.
    SweepSa,
    /// Inference FLOPs of one decision.
    Flops {
        #[arg(long, value_enum)]
        arch: Arch,
        #[arg(short = 'k', long)]
        devices: u64,
        #[arg(long, default_value_t = 256)]
        hidden: u64,
        /// Per-device recurrent input size (recurrent agent only).
        #[arg(long, default_value_t = 7)]
        input: u64,
    },
    /// Parse and validate a scenario file.
    ValidateConfig,
}

fn scenario(cli: &Cli) -> Result<Scenario> {
    let Some(path) = &cli.scenario else { bail!("--scenario is required for this command") };
    let mut s = load_scenario(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        s.seeds = vec![seed];
    }
    Ok(s)
}

fn summarize(report: &RunReport) {
    for s in &report.seeds {
        let e = &s.evaluation;
        println!(
            "seed {:>4}  score {:.5}  generated {}  delivered {}  expired {}  residual {}  jain {}",
            s.seed,
            e.urllc_score,
            e.generated,
            e.delivered,
            e.expired,
            e.residual,
            e.jain_index.map_or("n/a".into(), |j| format!("{j:.4}")),
        );
    }
    println!(
        "{}: mean score {:.5} ± {:.5} over {} seeds ({:.1} s)",
        report.agent.name(),
        report.mean_score,
        report.score_std_err,
        report.seeds.len(),
        report.wall_clock_seconds
    );
    if let Some(p) = report.sa_probability {
        println!("access probability {p}");
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Train { traces, quiet } => {
            let s = scenario(&cli)?;
            let options = RunOptions { out_dir: cli.out.clone(), traces: *traces, verbose: !quiet };
            let report = run_training(&s, &options)?;
            summarize(&report);
        }
        Command::Eval { checkpoint, traces } => {
            let s = scenario(&cli)?;
            let source = match checkpoint {
                Some(p) => PolicySource::Checkpoint(p.clone()),
                None => PolicySource::Baseline,
            };
            let options = RunOptions { out_dir: cli.out.clone(), traces: *traces, verbose: false };
            let report = run_evaluation(&s, &source, &options)?;
            summarize(&report);
        }
        Command::SweepSa => {
            let s = scenario(&cli)?;
            let (best, sweep) = sweep_sa(&s)?;
            println!("probability,urllc_score");
            for p in &sweep {
                println!("{},{}", p.probability, p.urllc_score);
            }
            println!("best {best}");
            if let Some(dir) = &cli.out {
                let options = RunOptions { out_dir: None, traces: false, verbose: false };
                let mut fixed = s.clone();
                fixed.sa.probability = Some(best);
                let report = run_evaluation(&fixed, &PolicySource::Baseline, &options)?;
                emit_metrics(&report, dir)?;
            }
        }
        Command::Flops { arch, devices, hidden, input } => {
            let a = match arch {
                Arch::NomaPpo => Architecture::NomaPpo,
                Arch::Bdq => Architecture::Bdq,
                Arch::IdrqnAgent => Architecture::IdrqnAgent,
            };
            println!("{}", flops_estimate(a, *devices, *hidden, *input));
        }
        Command::ValidateConfig => {
            let s = scenario(&cli)?;
            println!("{} is valid (K = {}, agent {})", cli.scenario.as_ref().map_or(String::new(), |p| p.display().to_string()), s.num_devices()?, s.agent.name());
        }
    }
    Ok(())
}
