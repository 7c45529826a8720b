use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::output::{write_report, CurveWriter};
use super::scenario::{AgentKind, Scenario};
use super::HarnessError;
use crate::drl::{
    evaluate, ppo_decide, read_checkpoint, run_episode, train, write_checkpoint, Agent, CurvePoint, DrlError,
    Evaluation, PolicySetup, Sampling, EVAL_SEED_OFFSET,
};
use crate::env::{jain_index, write_trace, ActionVector, AgentState, EnvConfig, Environment};
use crate::sched::{edf_schedule, optimize_sa_probability, random_schedule, sa_schedule};

pub const REPORT_FORMAT: &str = "noma-urllc-report/1";

/// Evaluation aggregate of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    /// Delivered over delivered + expired.
    pub urllc_score: f64,
    pub generated: u64,
    pub delivered: u64,
    pub expired: u64,
    /// Packets still buffered when their episode ended.
    pub residual: u64,
    pub device_scores: Vec<Option<f64>>,
    pub jain_index: Option<f64>,
    pub mean_reward: f64,
    pub episodes: u64,
    pub frames: u64,
    pub overloaded_frames: u64,
}

impl EvalSummary {
    pub fn from_evaluation(eval: &Evaluation) -> Result<Self, HarnessError> {
        let device_scores = eval.device_scores();
        let known: Vec<f64> = device_scores.iter().flatten().copied().collect();
        Ok(Self {
            urllc_score: eval.score().map_err(HarnessError::Drl)?,
            generated: eval.tally.total_generated(),
            delivered: eval.tally.total_delivered(),
            expired: eval.tally.total_expired(),
            residual: eval.residual,
            jain_index: jain_index(&known).ok(),
            device_scores,
            mean_reward: eval.mean_reward(),
            episodes: eval.episodes,
            frames: eval.frames,
            overloaded_frames: eval.overloaded_frames,
        })
    }

    /// generated = delivered + expired + residual.
    pub fn is_conserved(&self) -> bool {
        self.generated == self.delivered + self.expired + self.residual
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub curve: Vec<CurvePoint>,
    pub evaluation: EvalSummary,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaSweepPoint {
    pub probability: f64,
    pub urllc_score: f64,
}

/// Outcome of a training or evaluation run over all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub agent: AgentKind,
    pub code_version: String,
    /// SHA-256 over the code version and the scenario text.
    pub config_hash: String,
    pub scenario: Scenario,
    pub sa_probability: Option<f64>,
    pub sa_sweep: Vec<SaSweepPoint>,
    pub seeds: Vec<SeedReport>,
    pub mean_score: f64,
    /// Sample standard deviation over seeds divided by √seeds (0 for one seed).
    pub score_std_err: f64,
    pub mean_jain_index: Option<f64>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn scores(&self) -> Vec<f64> {
        self.seeds.iter().map(|s| s.evaluation.urllc_score).collect()
    }
}

/// Where a run writes its files, if anywhere.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Write one traced evaluation episode per seed.
    pub traces: bool,
    /// Progress lines on stderr.
    pub verbose: bool,
}

/// Policy evaluated by [`run_evaluation`].
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySource {
    /// The scenario's baseline agent (random, EDF oracle, SA-NOMA-SIC).
    Baseline,
    /// A learned agent restored from a checkpoint.
    Checkpoint(PathBuf),
}

pub fn config_hash(scenario: &Scenario) -> Result<String, HarnessError> {
    let mut h = Sha256::new();
    h.update(concat!("noma-urllc ", env!("CARGO_PKG_VERSION"), "\n").as_bytes());
    h.update(scenario.to_toml()?.as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn eval_seed(seed: u64) -> u64 {
    seed.wrapping_add(EVAL_SEED_OFFSET)
}

type Decider<'a> = Box<dyn FnMut(&Environment, &AgentState, &mut ChaCha8Rng) -> Result<ActionVector, DrlError> + 'a>;

fn baseline_decider<'a>(kind: AgentKind, slots: usize, sa_p: f64) -> Result<Decider<'a>, HarnessError> {
    Ok(match kind {
        AgentKind::Random => Box::new(move |env, _, rng| Ok(random_schedule(env.num_devices(), slots, rng))),
        AgentKind::EdfOracle => Box::new(move |env, _, rng| Ok(edf_schedule(&env.state().buffers, slots, rng))),
        AgentKind::SaNomaSic => Box::new(move |env, _, rng| Ok(sa_schedule(&env.state().buffers, sa_p, rng))),
        other => {
            return Err(HarnessError::Validation {
                field: "agent".into(),
                why: format!("{} is a learned agent, not a baseline", other.name()),
            })
        }
    })
}

fn learned_decider<'a>(agent: &'a Agent<f64>, setup: &'a PolicySetup, greedy: bool) -> Decider<'a> {
    let sampling = if greedy { Sampling::Greedy } else { Sampling::Stochastic };
    Box::new(move |env, state, rng| Ok(ppo_decide(agent, setup, sampling, env, state, rng)?.action))
}

fn policy_setup(scenario: &Scenario, env: &EnvConfig) -> Result<PolicySetup, HarnessError> {
    let (use_prior, csi) = scenario.agent.policy_variant().ok_or_else(|| HarnessError::Validation {
        field: "agent".into(),
        why: format!("{} has no learned policy", scenario.agent.name()),
    })?;
    Ok(PolicySetup::new(env, &scenario.prior, use_prior, csi)?)
}

/// Chooses the SA access probability: the configured one, or the grid
/// optimum over `sa.episodes_per_point` episodes on the first seed.
pub fn sweep_sa(scenario: &Scenario) -> Result<(f64, Vec<SaSweepPoint>), HarnessError> {
    let env = scenario.env_config()?;
    let seed = eval_seed(scenario.seeds[0]) ^ 0x5A;
    let slots = env.phy.sic_limit;
    let mut failure = None;
    let (best, scores) = optimize_sa_probability(&scenario.sa.grid, |p| {
        let result = baseline_decider(AgentKind::SaNomaSic, slots, p).and_then(|d| {
            Ok(evaluate(&env, seed, scenario.sa.episodes_per_point, scenario.ppo.episode_length, d)?)
        });
        match result.and_then(|e| e.score().map_err(HarnessError::Drl)) {
            Ok(s) => s,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut grid = scenario.sa.grid.clone();
    grid.sort_by(f64::total_cmp);
    let sweep = grid.into_iter().zip(scores).map(|(probability, urllc_score)| SaSweepPoint { probability, urllc_score }).collect();
    Ok((best, sweep))
}

fn write_seed_trace(
    dir: &Path,
    env_cfg: &EnvConfig,
    seed: u64,
    length: u32,
    decide: &mut Decider<'_>,
) -> Result<(), HarnessError> {
    let mut env = Environment::new(env_cfg.clone(), eval_seed(seed))?;
    let mut rng = ChaCha8Rng::seed_from_u64(eval_seed(seed));
    rng.set_stream(2);
    let outcome = run_episode(&mut env, length, &mut rng, true, decide)?;
    fs::create_dir_all(dir.join("traces"))?;
    let mut w = BufWriter::new(File::create(dir.join("traces").join(format!("seed{seed}.jsonl")))?);
    write_trace(outcome.trace.as_deref().unwrap_or_default(), &mut w)?;
    w.flush()?;
    Ok(())
}

fn finish_report(
    scenario: &Scenario,
    seeds: Vec<SeedReport>,
    sa: Option<(f64, Vec<SaSweepPoint>)>,
    started: Instant,
    options: &RunOptions,
) -> Result<RunReport, HarnessError> {
    let scores: Vec<f64> = seeds.iter().map(|s| s.evaluation.urllc_score).collect();
    let (mean_score, score_std_err) = mean_and_std_err(&scores);
    let jains: Vec<f64> = seeds.iter().filter_map(|s| s.evaluation.jain_index).collect();
    let (sa_probability, sa_sweep) = match sa {
        Some((p, sweep)) => (Some(p), sweep),
        None => (None, Vec::new()),
    };
    let report = RunReport {
        format: REPORT_FORMAT.into(),
        agent: scenario.agent,
        code_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config_hash(scenario)?,
        scenario: scenario.clone(),
        sa_probability,
        sa_sweep,
        seeds,
        mean_score,
        score_std_err,
        mean_jain_index: (!jains.is_empty()).then(|| jains.iter().sum::<f64>() / jains.len() as f64),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    for s in &report.seeds {
        if !s.evaluation.is_conserved() {
            return Err(HarnessError::Conservation { seed: s.seed });
        }
    }
    if let Some(dir) = &options.out_dir {
        write_report(&report, &dir.join("report.json"))?;
    }
    Ok(report)
}

/// Trains the scenario's learned agent on every seed, or evaluates a baseline
/// when the agent does not learn.
pub fn run_training(scenario: &Scenario, options: &RunOptions) -> Result<RunReport, HarnessError> {
    scenario.validate()?;
    if !scenario.agent.is_learned() {
        return run_evaluation(scenario, &PolicySource::Baseline, options);
    }
    let started = Instant::now();
    let env_cfg = scenario.env_config()?;
    let setup = policy_setup(scenario, &env_cfg)?;
    let k = scenario.num_devices()?;
    let ppo = &scenario.ppo;
    let mut curve_writer = match &options.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(CurveWriter::create(&dir.join("curve.csv"))?)
        }
        None => None,
    };
    let mut seeds = Vec::new();
    for &seed in &scenario.seeds {
        let seed_start = Instant::now();
        let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
        init_rng.set_stream(3);
        let mut agent = Agent::<f64>::new(k, ppo.hidden, ppo, &mut init_rng);
        let ckpt_dir = options.out_dir.as_ref().map(|d| d.join("checkpoints"));
        if let Some(d) = &ckpt_dir {
            fs::create_dir_all(d)?;
        }
        let curve = train(
            &mut agent,
            &env_cfg,
            &setup,
            ppo,
            seed,
            scenario.eval_episodes,
            |point, _| {
                if let Some(w) = curve_writer.as_mut() {
                    w.append(point).map_err(|e| DrlError::Io(std::io::Error::other(e.to_string())))?;
                }
                if options.verbose {
                    eprintln!(
                        "seed {} update {} episodes {} score {:.4} reward {:.4}",
                        point.seed, point.update, point.episodes_seen, point.urllc_score, point.mean_reward
                    );
                }
                Ok(())
            },
            |agent| {
                if let (Some(d), true) = (&ckpt_dir, ppo.checkpoint_every_updates > 0) {
                    if agent.updates % ppo.checkpoint_every_updates == 0 {
                        let path = d.join(format!("seed{seed}_update{}.ckpt", agent.updates));
                        let mut w = BufWriter::new(File::create(path)?);
                        write_checkpoint(agent, &mut w)?;
                        w.flush()?;
                    }
                }
                Ok(())
            },
        )?;
        if let Some(d) = &ckpt_dir {
            let mut w = BufWriter::new(File::create(d.join(format!("seed{seed}.ckpt")))?);
            write_checkpoint(&agent, &mut w)?;
            w.flush()?;
        }
        let eval = evaluate(
            &env_cfg,
            eval_seed(seed),
            scenario.eval_episodes,
            ppo.episode_length,
            learned_decider(&agent, &setup, ppo.eval_greedy),
        )?;
        if let (Some(dir), true) = (&options.out_dir, options.traces) {
            write_seed_trace(dir, &env_cfg, seed, ppo.episode_length, &mut learned_decider(&agent, &setup, ppo.eval_greedy))?;
        }
        seeds.push(SeedReport {
            seed,
            curve,
            evaluation: EvalSummary::from_evaluation(&eval)?,
            seconds: seed_start.elapsed().as_secs_f64(),
        });
    }
    finish_report(scenario, seeds, None, started, options)
}

/// Frozen-policy evaluation over `eval_episodes` per seed.
pub fn run_evaluation(scenario: &Scenario, source: &PolicySource, options: &RunOptions) -> Result<RunReport, HarnessError> {
    scenario.validate()?;
    let started = Instant::now();
    let env_cfg = scenario.env_config()?;
    let length = scenario.ppo.episode_length;
    let slots = env_cfg.phy.sic_limit;
    let sa = if scenario.agent == AgentKind::SaNomaSic && *source == PolicySource::Baseline {
        match scenario.sa.probability {
            Some(p) => Some((p, Vec::new())),
            None => Some(sweep_sa(scenario)?),
        }
    } else {
        None
    };
    let restored = match source {
        PolicySource::Baseline => None,
        PolicySource::Checkpoint(path) => {
            let mut f = std::io::BufReader::new(File::open(path)?);
            let agent: Agent<f64> = read_checkpoint(&mut f, &scenario.ppo)?;
            if agent.num_devices() != scenario.num_devices()? {
                return Err(HarnessError::Validation {
                    field: "num_devices".into(),
                    why: format!("checkpoint holds K={}, scenario has K={}", agent.num_devices(), scenario.num_devices()?),
                });
            }
            Some((agent, policy_setup(scenario, &env_cfg)?))
        }
    };
    if let Some(dir) = &options.out_dir {
        fs::create_dir_all(dir)?;
    }
    let mut curve_writer = match &options.out_dir {
        Some(dir) => Some(CurveWriter::create(&dir.join("curve.csv"))?),
        None => None,
    };
    let mut seeds = Vec::new();
    for &seed in &scenario.seeds {
        let seed_start = Instant::now();
        let make = || -> Result<Decider<'_>, HarnessError> {
            match &restored {
                Some((agent, setup)) => Ok(learned_decider(agent, setup, scenario.ppo.eval_greedy)),
                None => baseline_decider(scenario.agent, slots, sa.as_ref().map_or(0.0, |s| s.0)),
            }
        };
        let eval = evaluate(&env_cfg, eval_seed(seed), scenario.eval_episodes, length, make()?)?;
        if let (Some(dir), true) = (&options.out_dir, options.traces) {
            write_seed_trace(dir, &env_cfg, seed, length, &mut make()?)?;
        }
        let summary = EvalSummary::from_evaluation(&eval)?;
        let point = CurvePoint {
            seed,
            update: restored.as_ref().map_or(0, |(a, _)| a.updates),
            episodes_seen: restored.as_ref().map_or(0, |(a, _)| a.episodes_seen),
            urllc_score: summary.urllc_score,
            mean_reward: summary.mean_reward,
        };
        if let Some(w) = curve_writer.as_mut() {
            w.append(&point)?;
        }
        if options.verbose {
            eprintln!("seed {seed} score {:.4}", summary.urllc_score);
        }
        seeds.push(SeedReport { seed, curve: vec![point], evaluation: summary, seconds: seed_start.elapsed().as_secs_f64() });
    }
    finish_report(scenario, seeds, sa, started, options)
}
