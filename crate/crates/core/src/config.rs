//! JSON run configuration with `agent`, `gym` and `sim` sections.
//!
//! Validation resolves every missing key to its default, range-checks every
//! value and reports all violations at once. Unknown keys are errors.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::phy::{
    ChannelParams, McsTable, DEFAULT_MIDPOINTS_DB, DEFAULT_SLOPE_PER_DB, HT20_LGI_RATES_MBPS,
    MIN_DISTANCE_M, NUM_MCS,
};
use crate::rl::EpsilonSchedule;
use crate::sim::{EpisodeConfig, LinkConfig, MobilityConfig, TrafficConfig};

/// The reference configuration shipped with the crate; every key explicit.
pub const REFERENCE_CONFIG: &str = include_str!("../configs/reference.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Dara,
    DaraTabular,
    Ideal,
    MinstrelLike,
    Constant,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Dara,
        Algorithm::DaraTabular,
        Algorithm::Ideal,
        Algorithm::MinstrelLike,
        Algorithm::Constant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dara => "dara",
            Algorithm::DaraTabular => "dara_tabular",
            Algorithm::Ideal => "ideal",
            Algorithm::MinstrelLike => "minstrel_like",
            Algorithm::Constant => "constant",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn is_learning(self) -> bool {
        matches!(self, Algorithm::Dara | Algorithm::DaraTabular)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    Fixed,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonConfig {
    pub mode: EpsilonMode,
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonConfig {
    pub fn schedule(&self) -> EpsilonSchedule {
        match self.mode {
            EpsilonMode::Fixed => EpsilonSchedule::Fixed { value: self.start },
            EpsilonMode::Linear => EpsilonSchedule::Linear {
                start: self.start,
                end: self.end,
                decay_steps: self.decay_steps,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub learning_rates: Vec<f64>,
    pub hidden_layers: Vec<Vec<usize>>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub episodes: usize,
    pub learning_rate: f64,
    pub hidden_layers: Vec<usize>,
    pub discount: f64,
    pub epsilon: EpsilonConfig,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub persist_replay: bool,
    pub train_every: u64,
    pub warmup: usize,
    pub target_sync_every: u64,
    pub checkpoint_every: usize,
    pub tabular_bins: usize,
    pub tabular_alpha: f64,
    pub ideal_p_min: f64,
    pub minstrel_probe_prob: f64,
    pub minstrel_ewma_weight: f64,
    pub constant_mcs: usize,
    pub sweep: SweepGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GymConfig {
    pub snr_lo_db: f64,
    pub snr_hi_db: f64,
    pub window_frames: u32,
    pub initial_mcs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McsRow {
    pub phy_rate_mbps: f64,
    pub midpoint_snr_db: f64,
    pub slope_per_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub frequency_mhz: f64,
    pub bandwidth_mhz: f64,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub payload_bytes: u32,
    pub overhead_s: f64,
    pub start_distance_m: f64,
    pub speed_mps: f64,
    pub duration_s: f64,
    pub log_period_s: f64,
    pub mcs_table: Vec<McsRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootConfig {
    pub agent: AgentConfig,
    pub gym: GymConfig,
    pub sim: SimConfig,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig::from_value(&serde_json::json!({"agent": {}, "gym": {}, "sim": {}}))
            .expect("built-in defaults are valid")
    }
}

/// Parses and validates configuration text.
pub fn validate_config(text: &str) -> Result<RootConfig> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::config(format!("config is not valid JSON: {e}")))?;
    RootConfig::from_value(&value)
}

impl RootConfig {
    pub fn from_value(value: &Value) -> Result<Self> {
        let mut errors = Vec::new();
        let Some(root) = value.as_object() else {
            return Err(Error::config("config must be a JSON object"));
        };
        for key in root.keys() {
            if !matches!(key.as_str(), "agent" | "gym" | "sim") {
                errors.push(format!("unknown top-level key {key:?}"));
            }
        }
        let section = |name: &str, errors: &mut Vec<String>| match root.get(name) {
            None => {
                errors.push(format!("missing section {name:?}"));
                None
            }
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                errors.push(format!("section {name:?} must be an object"));
                None
            }
        };
        let agent_map = section("agent", &mut errors);
        let gym_map = section("gym", &mut errors);
        let sim_map = section("sim", &mut errors);

        let agent = read_agent(&mut Reader::new("agent", agent_map, &mut errors));
        let gym = read_gym(&mut Reader::new("gym", gym_map, &mut errors));
        let sim = read_sim(&mut Reader::new("sim", sim_map, &mut errors));
        let cfg = RootConfig { agent, gym, sim };

        if agent_map.is_some() && gym_map.is_some() && sim_map.is_some() {
            cfg.cross_checks(&mut errors);
        }
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errors))
        }
    }

    fn cross_checks(&self, errors: &mut Vec<String>) {
        let a = &self.agent;
        if a.warmup < a.batch_size {
            errors.push(format!(
                "agent.warmup ({}) must be >= agent.batch_size ({})",
                a.warmup, a.batch_size
            ));
        }
        if !(self.gym.snr_lo_db < self.gym.snr_hi_db) {
            errors.push(format!(
                "gym.snr_lo_db ({}) must be < gym.snr_hi_db ({})",
                self.gym.snr_lo_db, self.gym.snr_hi_db
            ));
        }
        if a.epsilon.mode == EpsilonMode::Linear && a.epsilon.decay_steps == 0 {
            errors.push("agent.epsilon.decay_steps must be >= 1 for linear decay".into());
        }
        if self.sim.mcs_table.len() == NUM_MCS {
            if let Err(e) = self.mcs_table() {
                errors.push(format!("sim.mcs_table: {e}"));
            }
        }
    }

    pub fn mcs_table(&self) -> Result<McsTable> {
        let t = &self.sim.mcs_table;
        McsTable::from_columns(
            &t.iter().map(|r| r.phy_rate_mbps).collect::<Vec<_>>(),
            &t.iter().map(|r| r.midpoint_snr_db).collect::<Vec<_>>(),
            &t.iter().map(|r| r.slope_per_db).collect::<Vec<_>>(),
        )
    }

    pub fn link_config(&self) -> Result<LinkConfig> {
        let s = &self.sim;
        let cfg = LinkConfig {
            channel: ChannelParams {
                frequency_hz: s.frequency_mhz * 1e6,
                tx_power_dbm: s.tx_power_dbm,
                bandwidth_hz: s.bandwidth_mhz * 1e6,
                noise_figure_db: s.noise_figure_db,
            },
            mcs: self.mcs_table()?,
            mobility: MobilityConfig {
                start_distance_m: s.start_distance_m,
                speed_mps: s.speed_mps,
            },
            traffic: TrafficConfig {
                payload_bytes: s.payload_bytes,
                overhead_s: s.overhead_s,
            },
            episode: EpisodeConfig {
                duration_s: s.duration_s,
                window_frames: self.gym.window_frames,
                log_period_s: s.log_period_s,
            },
            snr_lo_db: self.gym.snr_lo_db,
            snr_hi_db: self.gym.snr_hi_db,
            initial_mcs: self.gym.initial_mcs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Pretty JSON of the fully resolved configuration.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Hash of the settings that give a trained policy its meaning: the
    /// algorithm, network architecture, observation pipeline and MCS table.
    /// Scenario settings (mobility, duration, seed) are free to change
    /// between training and evaluation.
    pub fn fingerprint(&self) -> String {
        let relevant = serde_json::json!({
            "algorithm": self.agent.algorithm,
            "hidden_layers": self.agent.hidden_layers,
            "gym": self.gym,
            "mcs_table": self.sim.mcs_table,
        });
        format!("{:x}", Sha256::digest(relevant.to_string().as_bytes()))
    }

    /// Network widths including the 1-wide input and 8-wide output.
    pub fn layer_sizes(&self) -> Vec<usize> {
        layer_sizes(&self.agent.hidden_layers)
    }
}

pub fn layer_sizes(hidden: &[usize]) -> Vec<usize> {
    let mut sizes = vec![1];
    sizes.extend_from_slice(hidden);
    sizes.push(NUM_MCS);
    sizes
}

fn read_agent(r: &mut Reader) -> AgentConfig {
    let algorithm = r.choice(
        "algorithm",
        "dara",
        Algorithm::from_name,
        "dara, dara_tabular, ideal, minstrel_like, constant",
    );
    let epsilon = {
        let mut e = r.child("epsilon");
        let cfg = EpsilonConfig {
            mode: e.choice(
                "mode",
                "fixed",
                |s| match s {
                    "fixed" => Some(EpsilonMode::Fixed),
                    "linear" => Some(EpsilonMode::Linear),
                    _ => None,
                },
                "fixed, linear",
            ),
            start: e.f64_in("start", 0.1, 0.0, 1.0),
            end: e.f64_in("end", 0.1, 0.0, 1.0),
            decay_steps: e.uint("decay_steps", 0, 0),
        };
        e.finish();
        cfg
    };
    let sweep = {
        let mut s = r.child("sweep");
        let grid = SweepGrid {
            learning_rates: s.f64_list("learning_rates", &[0.1, 0.01, 0.001, 0.0001], |v| {
                v > 0.0 && v.is_finite()
            }),
            hidden_layers: s.layers_list(
                "hidden_layers",
                &[
                    vec![32, 32],
                    vec![16, 16, 16],
                    vec![64],
                    vec![32],
                    vec![64, 64],
                ],
            ),
            seeds: s.u64_list("seeds", &[1]),
        };
        s.finish();
        grid
    };
    let cfg = AgentConfig {
        algorithm,
        seed: r.uint("seed", 1, 0),
        episodes: r.uint("episodes", 15, 1) as usize,
        learning_rate: r.f64_where("learning_rate", 0.01, |v| v > 0.0 && v.is_finite(), "> 0"),
        hidden_layers: r.layers("hidden_layers", &[16, 16, 16]),
        discount: r.f64_in("discount", 0.5, 0.0, 1.0),
        epsilon,
        batch_size: r.uint("batch_size", 64, 1) as usize,
        replay_capacity: r.uint("replay_capacity", 1_000_000, 1) as usize,
        persist_replay: r.bool("persist_replay", true),
        train_every: r.uint("train_every", 1, 1),
        warmup: r.uint("warmup", 64, 1) as usize,
        target_sync_every: r.uint("target_sync_every", 200, 1),
        checkpoint_every: r.uint("checkpoint_every", 5, 1) as usize,
        tabular_bins: r.uint("tabular_bins", 32, 1) as usize,
        tabular_alpha: r.f64_in("tabular_alpha", 0.1, 0.0, 1.0),
        ideal_p_min: r.f64_where("ideal_p_min", 0.9, |v| v > 0.0 && v < 1.0, "in (0, 1)"),
        minstrel_probe_prob: r.f64_in("minstrel_probe_prob", 0.1, 0.0, 1.0),
        minstrel_ewma_weight: r.f64_in("minstrel_ewma_weight", 0.25, 0.0, 1.0),
        constant_mcs: r.uint_in("constant_mcs", 0, 0, NUM_MCS as u64 - 1) as usize,
        sweep,
    };
    r.finish();
    cfg
}

fn read_gym(r: &mut Reader) -> GymConfig {
    let cfg = GymConfig {
        snr_lo_db: r.f64_where("snr_lo_db", 0.0, f64::is_finite, "finite"),
        snr_hi_db: r.f64_where("snr_hi_db", 40.0, f64::is_finite, "finite"),
        window_frames: r.uint_in("window_frames", 50, 1, u64::from(u32::MAX)) as u32,
        initial_mcs: r.uint_in("initial_mcs", 0, 0, NUM_MCS as u64 - 1) as usize,
    };
    r.finish();
    cfg
}

fn read_sim(r: &mut Reader) -> SimConfig {
    let positive = |v: f64| v > 0.0 && v.is_finite();
    let cfg = SimConfig {
        frequency_mhz: r.f64_where("frequency_mhz", 5180.0, positive, "> 0"),
        bandwidth_mhz: r.f64_where("bandwidth_mhz", 20.0, positive, "> 0"),
        tx_power_dbm: r.f64_where("tx_power_dbm", 20.0, f64::is_finite, "finite"),
        noise_figure_db: r.f64_where(
            "noise_figure_db",
            7.0,
            |v| v >= 0.0 && v.is_finite(),
            ">= 0",
        ),
        payload_bytes: r.uint_in("payload_bytes", 1400, 1, u64::from(u32::MAX)) as u32,
        overhead_s: r.f64_where("overhead_s", 100e-6, |v| v >= 0.0 && v.is_finite(), ">= 0"),
        start_distance_m: r.f64_where(
            "start_distance_m",
            1.0,
            |v| v >= MIN_DISTANCE_M && v.is_finite(),
            ">= 0.1",
        ),
        speed_mps: r.f64_where("speed_mps", 20.0, |v| v >= 0.0 && v.is_finite(), ">= 0"),
        duration_s: r.f64_where("duration_s", 60.0, positive, "> 0"),
        log_period_s: r.f64_where("log_period_s", 1.0, positive, "> 0"),
        mcs_table: r.mcs_table("mcs_table"),
    };
    r.finish();
    cfg
}

/// Walks one JSON object, resolving defaults and collecting violations.
struct Reader<'a> {
    path: String,
    map: Option<&'a Map<String, Value>>,
    errors: &'a mut Vec<String>,
    seen: BTreeSet<&'static str>,
}

impl<'a> Reader<'a> {
    fn new(path: &str, map: Option<&'a Map<String, Value>>, errors: &'a mut Vec<String>) -> Self {
        Reader {
            path: path.to_string(),
            map,
            errors,
            seen: BTreeSet::new(),
        }
    }

    fn key(&self, key: &str) -> String {
        format!("{}.{key}", self.path)
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.insert(key);
        self.map.and_then(|m| m.get(key))
    }

    fn child(&mut self, key: &'static str) -> Reader<'_> {
        let path = self.key(key);
        let map = match self.get(key) {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.errors.push(format!("{path} must be an object"));
                None
            }
        };
        Reader {
            path,
            map,
            errors: self.errors,
            seen: BTreeSet::new(),
        }
    }

    fn finish(&mut self) {
        if let Some(map) = self.map {
            for k in map.keys() {
                if !self.seen.contains(k.as_str()) {
                    self.errors.push(format!("unknown key {}", self.key(k)));
                }
            }
        }
    }

    fn f64_where(
        &mut self,
        key: &'static str,
        default: f64,
        ok: impl Fn(f64) -> bool,
        bounds: &str,
    ) -> f64 {
        match self.get(key) {
            None => default,
            Some(v) => match v.as_f64() {
                Some(x) if ok(x) => x,
                Some(x) => {
                    self.errors.push(format!(
                        "{} = {x} is out of range (must be {bounds})",
                        self.key(key)
                    ));
                    default
                }
                None => {
                    self.errors
                        .push(format!("{} must be a number", self.key(key)));
                    default
                }
            },
        }
    }

    fn f64_in(&mut self, key: &'static str, default: f64, lo: f64, hi: f64) -> f64 {
        self.f64_where(
            key,
            default,
            |v| v >= lo && v <= hi,
            &format!("in [{lo}, {hi}]"),
        )
    }

    fn uint_in(&mut self, key: &'static str, default: u64, lo: u64, hi: u64) -> u64 {
        match self.get(key) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(x) if x >= lo && x <= hi => x,
                Some(x) => {
                    self.errors.push(format!(
                        "{} = {x} is out of range (must be in [{lo}, {hi}])",
                        self.key(key)
                    ));
                    default
                }
                None => {
                    self.errors
                        .push(format!("{} must be a non-negative integer", self.key(key)));
                    default
                }
            },
        }
    }

    fn uint(&mut self, key: &'static str, default: u64, lo: u64) -> u64 {
        self.uint_in(key, default, lo, u64::MAX)
    }

    fn bool(&mut self, key: &'static str, default: bool) -> bool {
        match self.get(key) {
            None => default,
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                self.errors
                    .push(format!("{} must be true or false", self.key(key)));
                default
            }
        }
    }

    fn choice<T>(
        &mut self,
        key: &'static str,
        default: &str,
        parse: impl Fn(&str) -> Option<T>,
        allowed: &str,
    ) -> T {
        let fallback = parse(default).expect("default choice parses");
        match self.get(key) {
            None => fallback,
            Some(Value::String(s)) => match parse(s) {
                Some(v) => v,
                None => {
                    self.errors.push(format!(
                        "{} = {s:?} is not one of: {allowed}",
                        self.key(key)
                    ));
                    fallback
                }
            },
            Some(_) => {
                self.errors
                    .push(format!("{} must be a string", self.key(key)));
                fallback
            }
        }
    }

    fn array(&mut self, key: &'static str) -> Option<&'a Vec<Value>> {
        match self.get(key) {
            None => None,
            Some(Value::Array(a)) => Some(a),
            Some(_) => {
                self.errors
                    .push(format!("{} must be an array", self.key(key)));
                None
            }
        }
    }

    fn widths(&mut self, label: &str, v: &Value) -> Option<Vec<usize>> {
        let parsed: Option<Vec<usize>> = v.as_array().and_then(|a| {
            a.iter()
                .map(|w| w.as_u64().filter(|&w| w >= 1).map(|w| w as usize))
                .collect()
        });
        if parsed.is_none() {
            self.errors
                .push(format!("{label} must be an array of positive layer widths"));
        }
        parsed
    }

    fn layers(&mut self, key: &'static str, default: &[usize]) -> Vec<usize> {
        let label = self.key(key);
        match self.get(key) {
            None => default.to_vec(),
            Some(v) => self.widths(&label, v).unwrap_or_else(|| default.to_vec()),
        }
    }

    fn layers_list(&mut self, key: &'static str, default: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let label = self.key(key);
        let Some(items) = self.array(key) else {
            return default.to_vec();
        };
        if items.is_empty() {
            self.errors.push(format!("{label} must not be empty"));
            return default.to_vec();
        }
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            if let Some(w) = self.widths(&format!("{label}[{i}]"), item) {
                out.push(w);
            }
        }
        out
    }

    fn f64_list(
        &mut self,
        key: &'static str,
        default: &[f64],
        ok: impl Fn(f64) -> bool,
    ) -> Vec<f64> {
        let label = self.key(key);
        let Some(items) = self.array(key) else {
            return default.to_vec();
        };
        if items.is_empty() {
            self.errors.push(format!("{label} must not be empty"));
            return default.to_vec();
        }
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            match item.as_f64() {
                Some(x) if ok(x) => out.push(x),
                _ => self.errors.push(format!("{label}[{i}] is invalid")),
            }
        }
        out
    }

    fn u64_list(&mut self, key: &'static str, default: &[u64]) -> Vec<u64> {
        let label = self.key(key);
        let Some(items) = self.array(key) else {
            return default.to_vec();
        };
        if items.is_empty() {
            self.errors.push(format!("{label} must not be empty"));
            return default.to_vec();
        }
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            match item.as_u64() {
                Some(x) => out.push(x),
                None => self
                    .errors
                    .push(format!("{label}[{i}] must be a non-negative integer")),
            }
        }
        out
    }

    fn mcs_table(&mut self, key: &'static str) -> Vec<McsRow> {
        let default: Vec<McsRow> = (0..NUM_MCS)
            .map(|i| McsRow {
                phy_rate_mbps: HT20_LGI_RATES_MBPS[i],
                midpoint_snr_db: DEFAULT_MIDPOINTS_DB[i],
                slope_per_db: DEFAULT_SLOPE_PER_DB,
            })
            .collect();
        let label = self.key(key);
        let Some(items) = self.array(key) else {
            return default;
        };
        if items.len() != NUM_MCS {
            self.errors.push(format!(
                "{label} must have exactly {NUM_MCS} entries, got {}",
                items.len()
            ));
            return default;
        }
        let mut rows = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("{label}[{i}]");
            let map = match item {
                Value::Object(m) => m,
                _ => {
                    self.errors.push(format!("{path} must be an object"));
                    continue;
                }
            };
            let mut r = Reader {
                path,
                map: Some(map),
                errors: self.errors,
                seen: BTreeSet::new(),
            };
            let positive = |v: f64| v > 0.0 && v.is_finite();
            let row = McsRow {
                phy_rate_mbps: r.f64_where(
                    "phy_rate_mbps",
                    default[i].phy_rate_mbps,
                    positive,
                    "> 0",
                ),
                midpoint_snr_db: r.f64_where(
                    "midpoint_snr_db",
                    default[i].midpoint_snr_db,
                    f64::is_finite,
                    "finite",
                ),
                slope_per_db: r.f64_where("slope_per_db", default[i].slope_per_db, positive, "> 0"),
            };
            r.finish();
            rows.push(row);
        }
        if rows.len() != NUM_MCS {
            return default;
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_resolves() {
        let cfg = validate_config(REFERENCE_CONFIG).unwrap();
        assert_eq!(cfg, RootConfig::default());
        assert_eq!(cfg.agent.algorithm, Algorithm::Dara);
        assert_eq!(cfg.agent.hidden_layers, vec![16, 16, 16]);
        assert_eq!(cfg.agent.discount, 0.5);
        assert_eq!(cfg.agent.batch_size, 64);
        assert_eq!(cfg.agent.replay_capacity, 1_000_000);
        assert_eq!(cfg.agent.episodes, 15);
        assert_eq!(cfg.sim.frequency_mhz, 5180.0);
        assert_eq!(cfg.sim.payload_bytes, 1400);
        assert_eq!(cfg.layer_sizes(), vec![1, 16, 16, 16, 8]);
        cfg.link_config().unwrap();
    }

    #[test]
    fn discount_out_of_range_names_key_and_bounds() {
        let err =
            validate_config(r#"{"agent": {"discount": 1.5}, "gym": {}, "sim": {}}"#).unwrap_err();
        let Error::Config(v) = err else { panic!() };
        assert_eq!(v.len(), 1);
        assert!(
            v[0].contains("agent.discount") && v[0].contains("[0, 1]"),
            "{}",
            v[0]
        );
    }

    #[test]
    fn missing_section_named() {
        let Error::Config(v) = validate_config(r#"{"agent": {}, "gym": {}}"#).unwrap_err() else {
            panic!()
        };
        assert!(v.iter().any(|m| m.contains("\"sim\"")), "{v:?}");
    }

    #[test]
    fn all_violations_reported() {
        let text = r#"{
            "agent": {"discount": -1, "bogus": 3, "algorithm": "nope", "warmup": 8, "epsilon": {"start": 2}},
            "gym": {"snr_lo_db": 50, "snr_hi_db": 10},
            "sim": {"frequency_mhz": 0, "mcs_table": [1, 2]}
        }"#;
        let Error::Config(v) = validate_config(text).unwrap_err() else {
            panic!()
        };
        for needle in [
            "agent.discount",
            "agent.bogus",
            "agent.algorithm",
            "agent.warmup",
            "agent.epsilon.start",
            "gym.snr_lo_db",
            "sim.frequency_mhz",
            "sim.mcs_table",
        ] {
            assert!(v.iter().any(|m| m.contains(needle)), "no {needle} in {v:?}");
        }
    }

    #[test]
    fn non_monotone_mcs_table_rejected() {
        let mut cfg: Value = serde_json::from_str(REFERENCE_CONFIG).unwrap();
        cfg["sim"]["mcs_table"][3]["phy_rate_mbps"] = serde_json::json!(5.0);
        assert!(RootConfig::from_value(&cfg).is_err());
    }

    #[test]
    fn validation_is_idempotent() {
        let text = r#"{"agent": {"algorithm": "minstrel_like", "seed": 99, "hidden_layers": [8]},
                       "gym": {"window_frames": 10}, "sim": {"duration_s": 12.5}}"#;
        let a = validate_config(text).unwrap();
        let b = validate_config(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn fingerprint_tracks_policy_settings_only() {
        let base = RootConfig::default();
        let mut other = base.clone();
        other.agent.seed = 1234;
        other.sim.speed_mps = 5.0;
        assert_eq!(base.fingerprint(), other.fingerprint());
        other.agent.hidden_layers = vec![32, 32];
        assert_ne!(base.fingerprint(), other.fingerprint());
    }

    #[test]
    fn not_json() {
        assert!(matches!(validate_config("{nope"), Err(Error::Config(_))));
    }
}
