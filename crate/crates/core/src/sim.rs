//! Saturated UDP link between a stationary transmitter and a receding
//! receiver, stepped one decision window at a time.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::phy::{self, ChannelParams, McsEntry, McsTable, MIN_DISTANCE_M, NUM_MCS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityConfig {
    pub start_distance_m: f64,
    /// Receding speed; the receiver moves away from the transmitter.
    pub speed_mps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficConfig {
    pub payload_bytes: u32,
    /// Preamble, MAC header, SIFS, ACK and DIFS lumped into one constant.
    pub overhead_s: f64,
}

impl TrafficConfig {
    pub fn payload_bits(&self) -> f64 {
        f64::from(self.payload_bytes) * 8.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeConfig {
    pub duration_s: f64,
    pub window_frames: u32,
    pub log_period_s: f64,
}

/// Everything the environment needs to run an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub channel: ChannelParams,
    pub mcs: McsTable,
    pub mobility: MobilityConfig,
    pub traffic: TrafficConfig,
    pub episode: EpisodeConfig,
    pub snr_lo_db: f64,
    pub snr_hi_db: f64,
    /// MCS used for the probe window on reset.
    pub initial_mcs: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            channel: ChannelParams::default(),
            mcs: McsTable::default(),
            mobility: MobilityConfig {
                start_distance_m: 1.0,
                speed_mps: 20.0,
            },
            traffic: TrafficConfig {
                payload_bytes: 1400,
                overhead_s: 100e-6,
            },
            episode: EpisodeConfig {
                duration_s: 60.0,
                window_frames: 50,
                log_period_s: 1.0,
            },
            snr_lo_db: 0.0,
            snr_hi_db: 40.0,
            initial_mcs: 0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Err(e) = self.channel.validate() {
            errs.push(e.to_string());
        }
        let m = &self.mobility;
        if !(m.start_distance_m.is_finite() && m.start_distance_m >= MIN_DISTANCE_M) {
            errs.push(format!(
                "start distance must be >= {MIN_DISTANCE_M} m, got {}",
                m.start_distance_m
            ));
        }
        if !(m.speed_mps.is_finite() && m.speed_mps >= 0.0) {
            errs.push(format!("speed must be >= 0, got {}", m.speed_mps));
        }
        if self.traffic.payload_bytes == 0 {
            errs.push("payload must be > 0 bytes".into());
        }
        if !(self.traffic.overhead_s.is_finite() && self.traffic.overhead_s >= 0.0) {
            errs.push(format!(
                "overhead must be >= 0 s, got {}",
                self.traffic.overhead_s
            ));
        }
        let e = &self.episode;
        if !(e.duration_s.is_finite() && e.duration_s > 0.0) {
            errs.push(format!(
                "episode duration must be > 0, got {}",
                e.duration_s
            ));
        }
        if e.window_frames == 0 {
            errs.push("window must hold at least one frame".into());
        }
        if !(e.log_period_s.is_finite() && e.log_period_s > 0.0) {
            errs.push(format!("log period must be > 0, got {}", e.log_period_s));
        }
        if !(self.snr_lo_db < self.snr_hi_db) {
            errs.push(format!(
                "SNR scaling needs lo < hi, got lo={} hi={}",
                self.snr_lo_db, self.snr_hi_db
            ));
        }
        if self.initial_mcs >= NUM_MCS {
            errs.push(format!(
                "initial MCS {} out of range 0..=7",
                self.initial_mcs
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn position_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("time must be >= 0, got {t}")));
        }
        Ok(self.mobility.start_distance_m + self.mobility.speed_mps * t)
    }

    pub fn snr_at(&self, t: f64) -> Result<f64> {
        phy::snr_db(self.position_at(t)?, &self.channel)
    }
}

/// Airtime of one frame: payload at the PHY rate plus the fixed overhead.
pub fn frame_airtime(mcs: &McsEntry, traffic: &TrafficConfig) -> f64 {
    traffic.payload_bits() / (mcs.phy_rate_mbps * 1e6) + traffic.overhead_s
}

/// FSR weighted by the MCS rate relative to the fastest MCS.
pub fn dara_reward(fsr: f64, mcs: &McsEntry, table: &McsTable) -> f64 {
    fsr * mcs.phy_rate_mbps / table.highest().phy_rate_mbps
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub fsr: f64,
    pub successes: u32,
    pub throughput_mbps: f64,
    /// True SNR at the end of the window.
    pub raw_snr_db: f64,
    pub distance_m: f64,
    pub sim_time_s: f64,
    pub window_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub observation: f64,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub sim_time_s: f64,
    pub tx_position_m: f64,
    pub rx_position_m: f64,
    pub link_throughput_mbps: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeLog {
    pub records: Vec<LogRecord>,
}

impl EpisodeLog {
    pub fn last_time(&self) -> Option<f64> {
        self.records.last().map(|r| r.sim_time_s)
    }

    /// Appends a record; timestamps must be strictly increasing.
    pub fn append_tick(&mut self, record: LogRecord) -> Result<()> {
        if let Some(last) = self.last_time() {
            if !(record.sim_time_s > last) {
                return Err(Error::invalid(format!(
                    "log record at {} s does not follow {} s",
                    record.sim_time_s, last
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    /// CSV with header `time_s,tx_pos_m,rx_pos_m,throughput_mbps`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,tx_pos_m,rx_pos_m,throughput_mbps\n");
        for r in &self.records {
            out.push_str(&format!(
                "{:.6},{:.6},{:.6},{:.6}\n",
                r.sim_time_s, r.tx_position_m, r.rx_position_m, r.link_throughput_mbps
            ));
        }
        out
    }
}

/// Periodic throughput bookkeeping for one episode.
#[derive(Debug, Clone)]
struct LogClock {
    period: f64,
    duration: f64,
    full_ticks: u64,
    emitted: u64,
    bits: f64,
    finished: bool,
}

impl LogClock {
    fn new(period: f64, duration: f64) -> Self {
        let full_ticks = (duration / period + 1e-9).floor() as u64;
        LogClock {
            period,
            duration,
            full_ticks,
            emitted: 0,
            bits: 0.0,
            finished: false,
        }
    }

    fn tick_time(&self, k: u64) -> f64 {
        let t = k as f64 * self.period;
        if k == self.full_ticks && (t - self.duration).abs() <= 1e-9 * self.duration {
            self.duration
        } else {
            t
        }
    }

    fn prev_time(&self) -> f64 {
        if self.emitted == 0 {
            0.0
        } else {
            self.tick_time(self.emitted)
        }
    }

    fn emit(&mut self, log: &mut EpisodeLog, cfg: &LinkConfig, now: f64) -> Result<()> {
        let span = now - self.prev_time();
        log.append_tick(LogRecord {
            sim_time_s: now,
            tx_position_m: 0.0,
            rx_position_m: cfg.position_at(now)?,
            link_throughput_mbps: self.bits / span / 1e6,
        })?;
        self.bits = 0.0;
        Ok(())
    }

    /// Emits every tick strictly before `t`.
    fn advance_to(&mut self, log: &mut EpisodeLog, cfg: &LinkConfig, t: f64) -> Result<()> {
        while self.emitted < self.full_ticks && self.tick_time(self.emitted + 1) < t {
            let now = self.tick_time(self.emitted + 1);
            self.emit(log, cfg, now)?;
            self.emitted += 1;
        }
        Ok(())
    }

    fn deliver(&mut self, end_time: f64, bits: f64) {
        if end_time <= self.duration {
            self.bits += bits;
        }
    }

    /// Flushes the remaining ticks, plus a partial one when the duration is
    /// not a whole number of periods.
    fn finish(&mut self, log: &mut EpisodeLog, cfg: &LinkConfig) -> Result<()> {
        if self.finished {
            return Ok(());
        }
        self.advance_to(log, cfg, f64::INFINITY)?;
        let last = self.prev_time();
        if self.duration - last > 1e-9 * self.duration {
            self.emit(log, cfg, self.duration)?;
        }
        self.finished = true;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    Running,
    Done,
}

/// Gym-style environment: `reset` then `step` until `done`.
#[derive(Debug, Clone)]
pub struct LinkEnv {
    cfg: LinkConfig,
    rng: ChaCha8Rng,
    clock: f64,
    last_observation: f64,
    phase: Phase,
    log: EpisodeLog,
    log_clock: LogClock,
}

struct WindowOutcome {
    successes: u32,
    ack_snr_sum: f64,
    window_s: f64,
}

impl LinkEnv {
    pub fn new(cfg: LinkConfig) -> Result<Self> {
        cfg.validate()?;
        let log_clock = LogClock::new(cfg.episode.log_period_s, cfg.episode.duration_s);
        Ok(LinkEnv {
            cfg,
            rng: crate::env_rng(0),
            clock: 0.0,
            last_observation: 0.0,
            phase: Phase::Idle,
            log: EpisodeLog::default(),
            log_clock,
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.cfg
    }

    pub fn mcs_table(&self) -> &McsTable {
        &self.cfg.mcs
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn log(&self) -> &EpisodeLog {
        &self.log
    }

    pub fn take_log(&mut self) -> EpisodeLog {
        std::mem::take(&mut self.log)
    }

    /// Starts a new episode. The returned observation comes from one probe
    /// window at the initial MCS; the probe does not advance the clock.
    pub fn reset(&mut self, seed: u64) -> Result<StepResult> {
        self.rng = crate::env_rng(seed);
        self.clock = 0.0;
        self.log = EpisodeLog::default();
        self.log_clock = LogClock::new(self.cfg.episode.log_period_s, self.cfg.episode.duration_s);
        self.phase = Phase::Running;

        let mcs = self.cfg.mcs.entries()[self.cfg.initial_mcs];
        let probe = self.run_window(&mcs, false)?;
        self.clock = 0.0;

        let observation = if probe.successes > 0 {
            self.scale(probe.ack_snr_sum / f64::from(probe.successes))?
        } else {
            0.0
        };
        self.last_observation = observation;
        let fsr = f64::from(probe.successes) / f64::from(self.cfg.episode.window_frames);
        Ok(StepResult {
            observation,
            reward: 0.0,
            done: false,
            info: StepInfo {
                fsr,
                successes: probe.successes,
                throughput_mbps: self.window_throughput(&probe),
                raw_snr_db: self.cfg.snr_at(0.0)?,
                distance_m: self.cfg.position_at(0.0)?,
                sim_time_s: 0.0,
                window_s: probe.window_s,
            },
        })
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        match self.phase {
            Phase::Idle => return Err(Error::NotReady("step called before reset".into())),
            Phase::Done => return Err(Error::EpisodeEnded),
            Phase::Running => {}
        }
        let mcs = *self
            .cfg
            .mcs
            .get(action)
            .ok_or(Error::InvalidAction(action))?;
        let outcome = self.run_window(&mcs, true)?;

        let window_frames = f64::from(self.cfg.episode.window_frames);
        let fsr = f64::from(outcome.successes) / window_frames;
        let observation = if outcome.successes > 0 {
            self.scale(outcome.ack_snr_sum / f64::from(outcome.successes))?
        } else {
            self.last_observation
        };
        self.last_observation = observation;

        let done = self.clock >= self.cfg.episode.duration_s;
        if done {
            self.phase = Phase::Done;
            self.log_clock.finish(&mut self.log, &self.cfg)?;
        }
        Ok(StepResult {
            observation,
            reward: dara_reward(fsr, &mcs, &self.cfg.mcs),
            done,
            info: StepInfo {
                fsr,
                successes: outcome.successes,
                throughput_mbps: self.window_throughput(&outcome),
                raw_snr_db: self.cfg.snr_at(self.clock)?,
                distance_m: self.cfg.position_at(self.clock)?,
                sim_time_s: self.clock,
                window_s: outcome.window_s,
            },
        })
    }

    fn scale(&self, snr: f64) -> Result<f64> {
        phy::scale_snr(snr, self.cfg.snr_lo_db, self.cfg.snr_hi_db)
    }

    fn window_throughput(&self, w: &WindowOutcome) -> f64 {
        f64::from(w.successes) * self.cfg.traffic.payload_bits() / w.window_s / 1e6
    }

    /// Sends one window of back-to-back frames starting at the current clock.
    /// Each frame's fate is drawn at its start position; its ACK is measured
    /// at the position where it ends.
    fn run_window(&mut self, mcs: &McsEntry, logged: bool) -> Result<WindowOutcome> {
        let airtime = frame_airtime(mcs, &self.cfg.traffic);
        let bits = self.cfg.traffic.payload_bits();
        let mut successes = 0u32;
        let mut ack_snr_sum = 0.0;
        for _ in 0..self.cfg.episode.window_frames {
            let p = phy::frame_success_prob(self.cfg.snr_at(self.clock)?, mcs);
            let ok = self.rng.gen_bool(p);
            let end = self.clock + airtime;
            if logged {
                self.log_clock.advance_to(&mut self.log, &self.cfg, end)?;
            }
            if ok {
                successes += 1;
                ack_snr_sum += self.cfg.snr_at(end)?;
                if logged {
                    self.log_clock.deliver(end, bits);
                }
            }
            self.clock = end;
        }
        Ok(WindowOutcome {
            successes,
            ack_snr_sum,
            window_s: airtime * f64::from(self.cfg.episode.window_frames),
        })
    }
}
