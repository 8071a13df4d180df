//! Rate adapters: the DQN-driven DARA agent, a tabular Q-learning variant,
//! and the Ideal, Minstrel-like and constant-rate baselines.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::phy::{frame_success_prob, McsTable, NUM_MCS};
use crate::rl::{
    argmax, dqn_train_step, epsilon_greedy, AdamState, Checkpoint, EpsilonSchedule, MlpParams,
    QTable, ReplayBuffer, Transition,
};
use crate::sim::StepResult;

pub type AgentRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Training,
    /// Purely exploitative: no exploration and no learning.
    Evaluation,
}

/// The agent side of the environment loop.
///
/// Each decision is `select_action` followed by `observe` with the
/// resulting step. `begin_episode` receives the observation from reset.
pub trait RateAdapter {
    fn name(&self) -> &'static str;

    fn begin_episode(&mut self, initial: &StepResult);

    fn select_action(&mut self, rng: &mut AgentRng) -> usize;

    fn observe(&mut self, action: usize, result: &StepResult, rng: &mut AgentRng) -> Result<()>;

    /// Learning updates performed so far.
    fn train_steps(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DqnSettings {
    pub gamma: f64,
    pub batch_size: usize,
    pub train_every: u64,
    pub warmup: usize,
    pub target_sync_every: u64,
    pub epsilon: EpsilonSchedule,
    pub persist_replay: bool,
}

/// DARA: state is the scaled mean ACK SNR, actions are MCS 0-7, and the
/// reward is the rate-weighted frame success ratio.
#[derive(Debug, Clone)]
pub struct DaraAgent {
    online: MlpParams,
    target: MlpParams,
    optimizer: AdamState,
    buffer: ReplayBuffer,
    settings: DqnSettings,
    mode: Mode,
    train_steps: u64,
    env_steps: u64,
    last_observation: f64,
    last_loss: Option<f64>,
}

impl DaraAgent {
    pub fn new(
        layer_sizes: &[usize],
        learning_rate: f64,
        replay_capacity: usize,
        settings: DqnSettings,
        rng: &mut AgentRng,
    ) -> Result<Self> {
        let online = MlpParams::init(layer_sizes, rng)?;
        let optimizer = AdamState::for_params(&online, learning_rate);
        Self::assemble(
            online,
            optimizer,
            0,
            replay_capacity,
            settings,
            Mode::Training,
        )
    }

    pub fn from_checkpoint(
        ckpt: Checkpoint,
        replay_capacity: usize,
        settings: DqnSettings,
        mode: Mode,
    ) -> Result<Self> {
        Self::assemble(
            ckpt.params,
            ckpt.optimizer,
            ckpt.train_steps,
            replay_capacity,
            settings,
            mode,
        )
    }

    fn assemble(
        online: MlpParams,
        optimizer: AdamState,
        train_steps: u64,
        replay_capacity: usize,
        settings: DqnSettings,
        mode: Mode,
    ) -> Result<Self> {
        settings.epsilon.validate()?;
        Ok(DaraAgent {
            target: online.clone(),
            online,
            optimizer,
            buffer: ReplayBuffer::new(replay_capacity)?,
            settings,
            mode,
            train_steps,
            env_steps: 0,
            last_observation: 0.0,
            last_loss: None,
        })
    }

    pub fn params(&self) -> &MlpParams {
        &self.online
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.last_loss
    }

    pub fn epsilon(&self) -> f64 {
        match self.mode {
            Mode::Training => self.settings.epsilon.value(self.train_steps),
            Mode::Evaluation => 0.0,
        }
    }

    /// Greedy in evaluation mode, epsilon-greedy while training.
    pub fn select(&self, observation: f64, rng: &mut AgentRng) -> Result<usize> {
        let q = self.online.forward(observation)?;
        Ok(match self.mode {
            Mode::Evaluation => argmax(&q),
            Mode::Training => epsilon_greedy(&q, self.epsilon(), rng),
        })
    }

    pub fn checkpoint(&self, fingerprint: &str) -> Checkpoint {
        Checkpoint {
            params: self.online.clone(),
            optimizer: self.optimizer.clone(),
            train_steps: self.train_steps,
            fingerprint: fingerprint.to_string(),
        }
    }

    fn learn(&mut self, transition: Transition, rng: &mut AgentRng) -> Result<()> {
        self.buffer.push(transition);
        self.env_steps += 1;
        if self.buffer.len() < self.settings.warmup
            || !self.env_steps.is_multiple_of(self.settings.train_every)
        {
            return Ok(());
        }
        let batch = self.buffer.sample(self.settings.batch_size, rng)?;
        let loss = dqn_train_step(
            &mut self.online,
            &self.target,
            &mut self.optimizer,
            &batch,
            self.settings.gamma,
        )?;
        self.last_loss = Some(loss);
        self.train_steps += 1;
        if self
            .train_steps
            .is_multiple_of(self.settings.target_sync_every)
        {
            self.target = self.online.clone();
        }
        Ok(())
    }
}

impl RateAdapter for DaraAgent {
    fn name(&self) -> &'static str {
        "dara"
    }

    fn begin_episode(&mut self, initial: &StepResult) {
        self.last_observation = initial.observation;
        if !self.settings.persist_replay {
            self.buffer.clear();
        }
    }

    fn select_action(&mut self, rng: &mut AgentRng) -> usize {
        // Observations come from the simulator and are always finite.
        self.select(self.last_observation, rng)
            .expect("finite observation")
    }

    fn observe(&mut self, action: usize, result: &StepResult, rng: &mut AgentRng) -> Result<()> {
        if self.mode == Mode::Training {
            let t = Transition {
                s: self.last_observation,
                a: action,
                r: result.reward,
                s_next: result.observation,
                done: result.done,
            };
            self.learn(t, rng)?;
        }
        self.last_observation = result.observation;
        Ok(())
    }

    fn train_steps(&self) -> u64 {
        self.train_steps
    }
}

/// DARA with a discretized observation and the one-step tabular update.
#[derive(Debug, Clone)]
pub struct TabularDara {
    table: QTable,
    alpha: f64,
    gamma: f64,
    epsilon: EpsilonSchedule,
    mode: Mode,
    updates: u64,
    last_observation: f64,
}

impl TabularDara {
    pub fn new(bins: usize, alpha: f64, gamma: f64, epsilon: EpsilonSchedule) -> Result<Self> {
        epsilon.validate()?;
        Ok(TabularDara {
            table: QTable::new(bins)?,
            alpha,
            gamma,
            epsilon,
            mode: Mode::Training,
            updates: 0,
            last_observation: 0.0,
        })
    }

    pub fn from_table(table: QTable, alpha: f64, gamma: f64, mode: Mode) -> Self {
        TabularDara {
            table,
            alpha,
            gamma,
            epsilon: EpsilonSchedule::Fixed { value: 0.0 },
            mode,
            updates: 0,
            last_observation: 0.0,
        }
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }
}

impl RateAdapter for TabularDara {
    fn name(&self) -> &'static str {
        "dara_tabular"
    }

    fn begin_episode(&mut self, initial: &StepResult) {
        self.last_observation = initial.observation;
    }

    fn select_action(&mut self, rng: &mut AgentRng) -> usize {
        let s = self
            .table
            .bin_of(self.last_observation)
            .expect("observation in [0, 1]");
        let row = self.table.row(s);
        match self.mode {
            Mode::Evaluation => argmax(row),
            Mode::Training => epsilon_greedy(row, self.epsilon.value(self.updates), rng),
        }
    }

    fn observe(&mut self, action: usize, result: &StepResult, _rng: &mut AgentRng) -> Result<()> {
        if self.mode == Mode::Training {
            let s = self.table.bin_of(self.last_observation)?;
            let s_new = self.table.bin_of(result.observation)?;
            self.table.update(
                s,
                action,
                result.reward,
                s_new,
                self.alpha,
                self.gamma,
                result.done,
            )?;
            self.updates += 1;
        }
        self.last_observation = result.observation;
        Ok(())
    }

    fn train_steps(&self) -> u64 {
        self.updates
    }
}

/// Highest MCS whose success probability at `snr_db` reaches `p_min`;
/// MCS 0 when none does.
pub fn ideal_select(snr_db: f64, table: &McsTable, p_min: f64) -> usize {
    table
        .entries()
        .iter()
        .rev()
        .find(|e| frame_success_prob(snr_db, e) >= p_min)
        .map_or(0, |e| e.index)
}

/// Oracle baseline that reads the true receiver SNR from the simulator.
#[derive(Debug, Clone)]
pub struct Ideal {
    table: McsTable,
    p_min: f64,
    snr_db: f64,
}

impl Ideal {
    pub fn new(table: McsTable, p_min: f64) -> Result<Self> {
        if !(p_min > 0.0 && p_min < 1.0) {
            return Err(Error::config(format!("ideal p_min {p_min} outside (0, 1)")));
        }
        Ok(Ideal {
            table,
            p_min,
            snr_db: f64::NEG_INFINITY,
        })
    }
}

impl RateAdapter for Ideal {
    fn name(&self) -> &'static str {
        "ideal"
    }

    fn begin_episode(&mut self, initial: &StepResult) {
        self.snr_db = initial.info.raw_snr_db;
    }

    fn select_action(&mut self, _rng: &mut AgentRng) -> usize {
        ideal_select(self.snr_db, &self.table, self.p_min)
    }

    fn observe(&mut self, _action: usize, result: &StepResult, _rng: &mut AgentRng) -> Result<()> {
        self.snr_db = result.info.raw_snr_db;
        Ok(())
    }
}

/// Simplified Minstrel: per-MCS EWMA of window success, random probing,
/// otherwise the MCS with the best rate × EWMA product.
#[derive(Debug, Clone)]
pub struct MinstrelLike {
    table: McsTable,
    pub ewma: [f64; NUM_MCS],
    pub ewma_weight: f64,
    pub probe_prob: f64,
    pub attempts: [u64; NUM_MCS],
    pub successes: [u64; NUM_MCS],
    window_frames: u32,
}

impl MinstrelLike {
    pub fn new(
        table: McsTable,
        ewma_weight: f64,
        probe_prob: f64,
        window_frames: u32,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&ewma_weight) || !(0.0..=1.0).contains(&probe_prob) {
            return Err(Error::config(
                "minstrel-like EWMA weight and probe probability must be in [0, 1]",
            ));
        }
        Ok(MinstrelLike {
            table,
            // Optimistic start so every rate gets tried early.
            ewma: [1.0; NUM_MCS],
            ewma_weight,
            probe_prob,
            attempts: [0; NUM_MCS],
            successes: [0; NUM_MCS],
            window_frames,
        })
    }

    pub fn best_rate(&self) -> usize {
        let products: Vec<f64> = self
            .table
            .entries()
            .iter()
            .zip(&self.ewma)
            .map(|(e, p)| e.phy_rate_mbps * p)
            .collect();
        argmax(&products)
    }

    pub fn select(&self, rng: &mut AgentRng) -> usize {
        if self.probe_prob > 0.0 && rng.gen::<f64>() < self.probe_prob {
            rng.gen_range(0..NUM_MCS)
        } else {
            self.best_rate()
        }
    }

    pub fn update(&mut self, mcs: usize, fsr: f64) {
        let w = self.ewma_weight;
        self.ewma[mcs] = ((1.0 - w) * self.ewma[mcs] + w * fsr).clamp(0.0, 1.0);
        let frames = u64::from(self.window_frames);
        self.attempts[mcs] += frames;
        self.successes[mcs] += (fsr * frames as f64).round() as u64;
    }
}

impl RateAdapter for MinstrelLike {
    fn name(&self) -> &'static str {
        "minstrel_like"
    }

    fn begin_episode(&mut self, _initial: &StepResult) {}

    fn select_action(&mut self, rng: &mut AgentRng) -> usize {
        self.select(rng)
    }

    fn observe(&mut self, action: usize, result: &StepResult, _rng: &mut AgentRng) -> Result<()> {
        self.update(action, result.info.fsr);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Constant {
    mcs: usize,
}

impl Constant {
    pub fn new(mcs: usize) -> Result<Self> {
        if mcs >= NUM_MCS {
            return Err(Error::config(format!(
                "constant MCS {mcs} out of range 0..=7"
            )));
        }
        Ok(Constant { mcs })
    }
}

impl RateAdapter for Constant {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn begin_episode(&mut self, _initial: &StepResult) {}

    fn select_action(&mut self, _rng: &mut AgentRng) -> usize {
        self.mcs
    }

    fn observe(&mut self, _action: usize, _result: &StepResult, _rng: &mut AgentRng) -> Result<()> {
        Ok(())
    }
}
