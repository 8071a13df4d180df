//! Episode orchestration: training runs, frozen-policy evaluation and
//! learning-rate × architecture sweeps.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::agents::{
    AgentRng, Constant, DaraAgent, DqnSettings, Ideal, MinstrelLike, Mode, RateAdapter, TabularDara,
};
use crate::config::{Algorithm, RootConfig};
use crate::error::{Error, IoContext, Result};
use crate::io::{self, EPISODES_FILE, SWEEP_SUMMARY_FILE};
use crate::rl::checkpoint::checkpoint_file_name;
use crate::rl::{Checkpoint, QTable};
use crate::sim::{EpisodeLog, LinkEnv, StepResult};

pub const EPISODES_HEADER: &str = "episode,cum_reward,mean_throughput_mbps,train_steps\n";
pub const STEPS_HEADER: &str =
    "step,time_s,action,observation,reward,fsr,throughput_mbps,raw_snr_db,distance_m\n";

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub cum_reward: f64,
    /// Delivered bits over elapsed airtime for the whole episode.
    pub mean_throughput_mbps: f64,
    /// Cumulative learning updates at the end of the episode.
    pub train_steps: u64,
}

impl EpisodeSummary {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{}\n",
            self.episode, self.cum_reward, self.mean_throughput_mbps, self.train_steps
        )
    }
}

pub fn cumulative_reward(rewards: &[f64]) -> f64 {
    rewards.iter().sum()
}

/// Environment seed for the `index`-th episode of a run.
pub fn episode_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub summary: EpisodeSummary,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub log: EpisodeLog,
    steps_csv: String,
}

impl EpisodeOutcome {
    pub fn steps_csv(&self) -> &str {
        &self.steps_csv
    }
}

/// Runs one episode from reset to done.
pub fn run_episode(
    env: &mut LinkEnv,
    adapter: &mut dyn RateAdapter,
    episode: usize,
    env_seed: u64,
    rng: &mut AgentRng,
) -> Result<EpisodeOutcome> {
    let initial = env.reset(env_seed)?;
    adapter.begin_episode(&initial);
    let mut rewards = Vec::new();
    let mut actions = Vec::new();
    let mut steps_csv = String::from(STEPS_HEADER);
    let mut delivered_bits = 0.0;
    let mut elapsed = 0.0;
    loop {
        let action = adapter.select_action(rng);
        let r: StepResult = env.step(action)?;
        adapter.observe(action, &r, rng)?;
        delivered_bits += r.info.throughput_mbps * 1e6 * r.info.window_s;
        elapsed += r.info.window_s;
        rewards.push(r.reward);
        actions.push(action);
        steps_csv.push_str(&format!(
            "{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            rewards.len(),
            r.info.sim_time_s,
            action,
            r.observation,
            r.reward,
            r.info.fsr,
            r.info.throughput_mbps,
            r.info.raw_snr_db,
            r.info.distance_m
        ));
        if r.done {
            break;
        }
    }
    Ok(EpisodeOutcome {
        summary: EpisodeSummary {
            episode,
            cum_reward: cumulative_reward(&rewards),
            mean_throughput_mbps: delivered_bits / elapsed / 1e6,
            train_steps: adapter.train_steps(),
        },
        actions,
        rewards,
        log: env.take_log(),
        steps_csv,
    })
}

pub fn dqn_settings(cfg: &RootConfig) -> DqnSettings {
    let a = &cfg.agent;
    DqnSettings {
        gamma: a.discount,
        batch_size: a.batch_size,
        train_every: a.train_every,
        warmup: a.warmup,
        target_sync_every: a.target_sync_every,
        epsilon: a.epsilon.schedule(),
        persist_replay: a.persist_replay,
    }
}

/// A trained policy handed to evaluation.
#[derive(Debug, Clone)]
pub enum Policy {
    Network(Checkpoint),
    Table(QTable),
}

impl Policy {
    /// Loads the policy file matching the configured algorithm and checks it
    /// against the configuration fingerprint.
    pub fn load(cfg: &RootConfig, path: &Path, allow_mismatch: bool) -> Result<Self> {
        match cfg.agent.algorithm {
            Algorithm::Dara => {
                let ckpt = Checkpoint::load(path)?;
                ckpt.verify_fingerprint(&cfg.fingerprint(), allow_mismatch)?;
                Ok(Policy::Network(ckpt))
            }
            Algorithm::DaraTabular => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    if e.kind() == std::io::ErrorKind::NotFound {
                        Error::CheckpointNotFound(path.to_path_buf())
                    } else {
                        Error::Io {
                            context: format!("reading {}", path.display()),
                            source: e,
                        }
                    }
                })?;
                let table = serde_json::from_str(&text).map_err(|e| Error::CorruptCheckpoint {
                    path: path.to_path_buf(),
                    reason: e.to_string(),
                })?;
                Ok(Policy::Table(table))
            }
            other => Err(Error::config(format!(
                "algorithm {} does not load a policy",
                other.name()
            ))),
        }
    }
}

pub fn qtable_file_name(episode: usize) -> String {
    format!("qtable_ep{episode:03}.json")
}

/// Builds the configured adapter. Learning adapters need a policy in
/// evaluation mode; baselines ignore it.
pub fn build_adapter(
    cfg: &RootConfig,
    mode: Mode,
    policy: Option<Policy>,
    rng: &mut AgentRng,
) -> Result<Box<dyn RateAdapter + Send>> {
    let a = &cfg.agent;
    let table = cfg.mcs_table()?;
    Ok(match (a.algorithm, mode, policy) {
        (Algorithm::Dara, Mode::Training, None) => Box::new(DaraAgent::new(
            &cfg.layer_sizes(),
            a.learning_rate,
            a.replay_capacity,
            dqn_settings(cfg),
            rng,
        )?),
        (Algorithm::Dara, mode, Some(Policy::Network(ckpt))) => Box::new(
            DaraAgent::from_checkpoint(ckpt, a.replay_capacity, dqn_settings(cfg), mode)?,
        ),
        (Algorithm::DaraTabular, Mode::Training, None) => Box::new(TabularDara::new(
            a.tabular_bins,
            a.tabular_alpha,
            a.discount,
            a.epsilon.schedule(),
        )?),
        (Algorithm::DaraTabular, mode, Some(Policy::Table(t))) => Box::new(
            TabularDara::from_table(t, a.tabular_alpha, a.discount, mode),
        ),
        (Algorithm::Dara | Algorithm::DaraTabular, Mode::Evaluation, None) => {
            return Err(Error::config(format!(
                "evaluating {} requires a checkpoint",
                a.algorithm.name()
            )))
        }
        (Algorithm::Dara | Algorithm::DaraTabular, _, Some(_)) => {
            return Err(Error::config(
                "checkpoint type does not match the algorithm",
            ))
        }
        (Algorithm::Ideal, _, _) => Box::new(Ideal::new(table, a.ideal_p_min)?),
        (Algorithm::MinstrelLike, _, _) => Box::new(MinstrelLike::new(
            table,
            a.minstrel_ewma_weight,
            a.minstrel_probe_prob,
            cfg.gym.window_frames,
        )?),
        (Algorithm::Constant, _, _) => Box::new(Constant::new(a.constant_mcs)?),
    })
}

#[derive(Debug, Clone)]
pub struct TrainingOutput {
    pub summaries: Vec<EpisodeSummary>,
    pub checkpoint: Option<Checkpoint>,
    pub qtable: Option<QTable>,
    pub logs: Vec<EpisodeLog>,
}

/// Trains the configured learning agent. With `out_dir`, writes
/// `episodes.csv` (one row appended as each episode completes), per-episode
/// step and throughput logs, and periodic checkpoints.
pub fn run_training(
    cfg: &RootConfig,
    out_dir: Option<&Path>,
    on_episode: &mut dyn FnMut(&EpisodeSummary),
) -> Result<TrainingOutput> {
    let a = &cfg.agent;
    let mut env = LinkEnv::new(cfg.link_config()?)?;
    let mut rng = crate::agent_rng(a.seed);
    let fingerprint = cfg.fingerprint();

    enum Learner {
        Dqn(DaraAgent),
        Tabular(TabularDara),
    }
    let mut learner = match a.algorithm {
        Algorithm::Dara => Learner::Dqn(DaraAgent::new(
            &cfg.layer_sizes(),
            a.learning_rate,
            a.replay_capacity,
            dqn_settings(cfg),
            &mut rng,
        )?),
        Algorithm::DaraTabular => Learner::Tabular(TabularDara::new(
            a.tabular_bins,
            a.tabular_alpha,
            a.discount,
            a.epsilon.schedule(),
        )?),
        _ => {
            return Err(Error::config(format!(
                "algorithm {} has nothing to train; use eval",
                a.algorithm.name()
            )))
        }
    };

    if let Some(dir) = out_dir {
        io::write_file(&dir.join(EPISODES_FILE), EPISODES_HEADER.as_bytes())?;
    }
    let mut summaries = Vec::with_capacity(a.episodes);
    let mut logs = Vec::with_capacity(a.episodes);
    for k in 1..=a.episodes {
        let adapter: &mut dyn RateAdapter = match &mut learner {
            Learner::Dqn(d) => d,
            Learner::Tabular(t) => t,
        };
        let outcome = run_episode(&mut env, adapter, k, episode_seed(a.seed, k - 1), &mut rng)?;
        let save_now = k % a.checkpoint_every == 0 || k == a.episodes;
        if let Some(dir) = out_dir {
            write_episode_files(dir, k, &outcome)?;
            io::append_file(&dir.join(EPISODES_FILE), &outcome.summary.csv_row())?;
            if save_now {
                match &learner {
                    Learner::Dqn(d) => d
                        .checkpoint(&fingerprint)
                        .save(&dir.join(checkpoint_file_name(k)))?,
                    Learner::Tabular(t) => {
                        let json = serde_json::to_string(t.table()).expect("Q-table serializes");
                        io::write_file(&dir.join(qtable_file_name(k)), json.as_bytes())?
                    }
                }
            }
        }
        on_episode(&outcome.summary);
        summaries.push(outcome.summary);
        logs.push(outcome.log);
    }
    let (checkpoint, qtable) = match learner {
        Learner::Dqn(d) => (Some(d.checkpoint(&fingerprint)), None),
        Learner::Tabular(t) => (None, Some(t.table().clone())),
    };
    Ok(TrainingOutput {
        summaries,
        checkpoint,
        qtable,
        logs,
    })
}

fn write_episode_files(dir: &Path, episode: usize, outcome: &EpisodeOutcome) -> Result<()> {
    io::write_file(
        &dir.join(io::throughput_file_name(episode)),
        outcome.log.to_csv().as_bytes(),
    )?;
    io::write_file(
        &dir.join(io::steps_file_name(episode)),
        outcome.steps_csv.as_bytes(),
    )
}

#[derive(Debug, Clone)]
pub struct EvaluationOutput {
    pub summary: EpisodeSummary,
    pub log: EpisodeLog,
    pub actions: Vec<usize>,
}

/// One episode with a frozen policy (or a baseline): no exploration, no
/// replay writes, no train steps. The environment uses the configured seed.
pub fn run_evaluation(
    cfg: &RootConfig,
    policy: Option<Policy>,
    out_dir: Option<&Path>,
) -> Result<EvaluationOutput> {
    let mut env = LinkEnv::new(cfg.link_config()?)?;
    let mut rng = crate::agent_rng(cfg.agent.seed);
    let mut adapter = build_adapter(cfg, Mode::Evaluation, policy, &mut rng)?;
    let outcome = run_episode(&mut env, adapter.as_mut(), 1, cfg.agent.seed, &mut rng)?;
    if let Some(dir) = out_dir {
        io::write_file(
            &dir.join(EPISODES_FILE),
            format!("{EPISODES_HEADER}{}", outcome.summary.csv_row()).as_bytes(),
        )?;
        write_episode_files(dir, 1, &outcome)?;
    }
    Ok(EvaluationOutput {
        summary: outcome.summary,
        log: outcome.log,
        actions: outcome.actions,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub learning_rate: f64,
    pub hidden_layers: Vec<usize>,
    pub seed: u64,
    /// Cumulative reward of the final episode and mean over the last three;
    /// `None` when the run failed.
    pub final_cum_reward: Option<f64>,
    pub mean_last3_cum_reward: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    /// (learning rate, hidden layers) with the highest final-episode
    /// cumulative reward, averaged over seeds.
    pub winner: Option<(f64, Vec<usize>)>,
}

pub fn architecture_label(hidden: &[usize]) -> String {
    if hidden.is_empty() {
        "none".into()
    } else {
        hidden
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("x")
    }
}

impl SweepSummary {
    pub fn csv(&self) -> String {
        let mut out = String::from(
            "learning_rate,hidden_layers,seed,final_cum_reward,mean_last3_cum_reward,status\n",
        );
        let fmt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
        for r in &self.rows {
            let status = match &r.error {
                None => "ok".to_string(),
                Some(e) => format!("error: {}", e.replace([',', '\n'], ";")),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.learning_rate,
                architecture_label(&r.hidden_layers),
                r.seed,
                fmt(r.final_cum_reward),
                fmt(r.mean_last3_cum_reward),
                status
            ));
        }
        out
    }
}

/// Picks the cell whose seeds average the highest final cumulative reward.
/// Ties go to the cell listed first.
pub fn sweep_winner(rows: &[SweepRow]) -> Option<(f64, Vec<usize>)> {
    let mut cells: Vec<(f64, Vec<usize>, f64, usize)> = Vec::new();
    for r in rows {
        let Some(v) = r.final_cum_reward else {
            continue;
        };
        match cells
            .iter_mut()
            .find(|c| c.0 == r.learning_rate && c.1 == r.hidden_layers)
        {
            Some(c) => {
                c.2 += v;
                c.3 += 1;
            }
            None => cells.push((r.learning_rate, r.hidden_layers.clone(), v, 1)),
        }
    }
    let mut best: Option<(f64, Vec<usize>, f64)> = None;
    for (lr, h, sum, n) in cells {
        let mean = sum / n as f64;
        if best.as_ref().is_none_or(|b| mean > b.2) {
            best = Some((lr, h, mean));
        }
    }
    best.map(|(lr, h, _)| (lr, h))
}

/// Trains every (learning rate, architecture, seed) combination of the
/// configured grid. Cells run in parallel; a failed cell is recorded and the
/// sweep carries on.
pub fn run_sweep(base: &RootConfig, out_dir: Option<&Path>) -> Result<SweepSummary> {
    if base.agent.algorithm != Algorithm::Dara {
        return Err(Error::config(
            "sweeps tune the dara network; set agent.algorithm to dara",
        ));
    }
    let grid = &base.agent.sweep;
    if grid.learning_rates.is_empty() || grid.hidden_layers.is_empty() || grid.seeds.is_empty() {
        return Err(Error::config("sweep grid is empty"));
    }
    let mut jobs = Vec::new();
    for &lr in &grid.learning_rates {
        for hidden in &grid.hidden_layers {
            for &seed in &grid.seeds {
                jobs.push((lr, hidden.clone(), seed));
            }
        }
    }
    let rows: Vec<SweepRow> = jobs
        .into_par_iter()
        .map(|(lr, hidden, seed)| {
            let mut cfg = base.clone();
            cfg.agent.learning_rate = lr;
            cfg.agent.hidden_layers = hidden.clone();
            cfg.agent.seed = seed;
            let result = (|| -> Result<Vec<EpisodeSummary>> {
                let cell_dir: Option<PathBuf> = match out_dir {
                    Some(dir) => {
                        let d = dir.join(format!(
                            "lr{lr}_h{}_seed{seed}",
                            architecture_label(&hidden)
                        ));
                        std::fs::create_dir_all(&d)
                            .context(|| format!("creating {}", d.display()))?;
                        io::write_file(
                            &d.join(io::RESOLVED_CONFIG_FILE),
                            cfg.to_json().as_bytes(),
                        )?;
                        Some(d)
                    }
                    None => None,
                };
                Ok(run_training(&cfg, cell_dir.as_deref(), &mut |_| {})?.summaries)
            })();
            match result {
                Ok(s) => {
                    let last3: Vec<f64> = s.iter().rev().take(3).map(|e| e.cum_reward).collect();
                    SweepRow {
                        learning_rate: lr,
                        hidden_layers: hidden,
                        seed,
                        final_cum_reward: s.last().map(|e| e.cum_reward),
                        mean_last3_cum_reward: Some(last3.iter().sum::<f64>() / last3.len() as f64),
                        error: None,
                    }
                }
                Err(e) => {
                    log::error!("sweep cell lr={lr} hidden={hidden:?} seed={seed} failed: {e}");
                    SweepRow {
                        learning_rate: lr,
                        hidden_layers: hidden,
                        seed,
                        final_cum_reward: None,
                        mean_last3_cum_reward: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let summary = SweepSummary {
        winner: sweep_winner(&rows),
        rows,
    };
    if let Some(dir) = out_dir {
        io::write_file(&dir.join(SWEEP_SUMMARY_FILE), summary.csv().as_bytes())?;
    }
    Ok(summary)
}
