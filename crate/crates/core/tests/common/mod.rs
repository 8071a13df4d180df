#![allow(dead_code)]

use linkrl::config::RootConfig;
use linkrl::phy::{self, McsEntry};
use linkrl::rl::{MlpParams, QTable};
use linkrl::sim::{LinkConfig, LinkEnv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference configuration with a shortened episode.
pub fn short_config(duration_s: f64, episodes: usize) -> RootConfig {
    let mut cfg = RootConfig::default();
    cfg.sim.duration_s = duration_s;
    cfg.agent.episodes = episodes;
    cfg
}

/// Deterministic two-state, two-action MDP: `next[s][a]`, `reward[s][a]`.
pub struct TinyMdp {
    pub next: [[usize; 2]; 2],
    pub reward: [[f64; 2]; 2],
}

pub const TINY_MDP: TinyMdp = TinyMdp {
    next: [[0, 1], [0, 1]],
    reward: [[1.0, 0.0], [0.0, 2.0]],
};

/// Q* by value iteration, iterated until the sup-norm change drops below `tol`.
pub fn value_iteration(mdp: &TinyMdp, gamma: f64, tol: f64) -> [[f64; 2]; 2] {
    let mut q = [[0.0f64; 2]; 2];
    loop {
        let mut next_q = [[0.0f64; 2]; 2];
        let mut delta = 0.0f64;
        for s in 0..2 {
            for a in 0..2 {
                let s2 = mdp.next[s][a];
                let v = q[s2][0].max(q[s2][1]);
                next_q[s][a] = mdp.reward[s][a] + gamma * v;
                delta = delta.max((next_q[s][a] - q[s][a]).abs());
            }
        }
        q = next_q;
        if delta < tol {
            return q;
        }
    }
}

/// Tabular Q-learning on `mdp` with uniformly sampled (s, a) pairs. Returns
/// the number of updates after which every entry is within `tol` of
/// `q_star`, or `None` if that did not happen within `max_updates`.
pub fn q_learning_updates_to_converge(
    mdp: &TinyMdp,
    q_star: &[[f64; 2]; 2],
    alpha: f64,
    gamma: f64,
    tol: f64,
    max_updates: usize,
    seed: u64,
) -> Option<usize> {
    let mut table = QTable::with_actions(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=max_updates {
        let s = rng.gen_range(0..2);
        let a = rng.gen_range(0..2);
        table
            .update(s, a, mdp.reward[s][a], mdp.next[s][a], alpha, gamma, false)
            .unwrap();
        let err = (0..2)
            .flat_map(|s| (0..2).map(move |a| (s, a)))
            .map(|(s, a)| (table.get(s, a) - q_star[s][a]).abs())
            .fold(0.0, f64::max);
        if err < tol {
            return Some(n);
        }
    }
    None
}

/// Random network with randomized biases.
pub fn random_network(sizes: &[usize], rng: &mut ChaCha8Rng) -> MlpParams {
    let mut net = MlpParams::init(sizes, rng).unwrap();
    for layer in net.layers_mut() {
        for b in &mut layer.biases {
            *b = rng.gen_range(-0.5..0.5);
        }
    }
    net
}

/// Loss whose gradient `MlpParams::backward` returns.
fn half_squared_error(net: &MlpParams, obs: f64, action: usize, target: f64) -> f64 {
    let q = net.forward(obs).unwrap()[action];
    0.5 * (q - target) * (q - target)
}

fn param_mut(p: &mut MlpParams, layer: usize, k: usize) -> &mut f64 {
    let layer = &mut p.layers_mut()[layer];
    let n_w = layer.weights.len();
    if k < n_w {
        &mut layer.weights[k]
    } else {
        &mut layer.biases[k - n_w]
    }
}

/// Worst per-parameter relative error between backprop and central finite
/// differences with step `h`.
pub fn gradient_check(net: &MlpParams, obs: f64, action: usize, target: f64, h: f64) -> f64 {
    let analytic = net.backward(obs, action, target).unwrap().flatten();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    let mut idx = 0;
    for l in 0..net.layers().len() {
        let n_w = net.layers()[l].weights.len();
        let n_b = net.layers()[l].biases.len();
        for k in 0..n_w + n_b {
            let orig = *param_mut(&mut probe, l, k);
            *param_mut(&mut probe, l, k) = orig + h;
            let up = half_squared_error(&probe, obs, action, target);
            *param_mut(&mut probe, l, k) = orig - h;
            let down = half_squared_error(&probe, obs, action, target);
            *param_mut(&mut probe, l, k) = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[idx];
            let denom = a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((a - numeric).abs() / denom);
            idx += 1;
        }
    }
    worst
}

/// An observation whose hidden pre-activations all sit at least `margin`
/// away from the ReLU kink, so finite differences stay on one linear piece.
pub fn observation_off_kinks(net: &MlpParams, rng: &mut ChaCha8Rng, margin: f64) -> f64 {
    for _ in 0..10_000 {
        let obs = rng.gen_range(0.0..1.0);
        let clear = net
            .hidden_preactivations(obs)
            .iter()
            .flatten()
            .all(|z| z.abs() > margin);
        if clear {
            return obs;
        }
    }
    panic!("no kink-free observation found");
}

/// Static link whose SNR equals `snr_db` everywhere.
pub fn static_link_at(snr_db: f64, window_frames: u32) -> LinkConfig {
    let mut cfg = LinkConfig::default();
    let at_one_metre = phy::snr_db(1.0, &cfg.channel).unwrap();
    cfg.mobility.start_distance_m = 10f64.powf((at_one_metre - snr_db) / 20.0);
    cfg.mobility.speed_mps = 0.0;
    cfg.episode.window_frames = window_frames;
    cfg.episode.duration_s = 1e6;
    cfg
}

pub struct FsrCheck {
    pub expected_p: f64,
    pub mean_fsr: f64,
    pub sigma: f64,
    pub windows: usize,
}

impl FsrCheck {
    pub fn z(&self) -> f64 {
        (self.mean_fsr - self.expected_p).abs() / self.sigma
    }
}

/// Runs `windows` decision windows at a fixed SNR and MCS, one fresh
/// environment seed per window, and compares the mean FSR with the
/// binomial expectation.
pub fn fsr_statistics(snr_db: f64, mcs: usize, windows: usize) -> FsrCheck {
    let cfg = static_link_at(snr_db, 50);
    let w = cfg.episode.window_frames as f64;
    let entry: McsEntry = *cfg.mcs.get(mcs).unwrap();
    let p = phy::frame_success_prob(snr_db, &entry);
    let mut env = LinkEnv::new(cfg).unwrap();
    let mut total = 0.0;
    for i in 0..windows {
        env.reset(10_000 + i as u64).unwrap();
        let r = env.step(mcs).unwrap();
        assert!((r.info.raw_snr_db - snr_db).abs() < 1e-9);
        total += r.info.fsr;
    }
    let n = windows as f64;
    FsrCheck {
        expected_p: p,
        mean_fsr: total / n,
        sigma: (p * (1.0 - p) / (w * n)).sqrt(),
        windows,
    }
}

/// Architectures exercised by the gradient suite: the DARA network plus
/// random shapes, at least 20 in total.
pub fn gradient_suite_shapes(rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut shapes = vec![
        vec![1, 16, 16, 16, 8],
        vec![1, 32, 32, 8],
        vec![1, 64, 8],
        vec![1, 8],
    ];
    while shapes.len() < 24 {
        let depth = rng.gen_range(1..=3);
        let mut s = vec![1];
        for _ in 0..depth {
            s.push(rng.gen_range(2..=24));
        }
        s.push(8);
        shapes.push(s);
    }
    shapes
}

/// Worst relative error over the gradient suite, with one random
/// (observation, action, target) probe per network.
pub fn run_gradient_suite(seed: u64) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = gradient_suite_shapes(&mut rng);
    let mut worst = 0.0f64;
    for sizes in &shapes {
        let net = random_network(sizes, &mut rng);
        let obs = observation_off_kinks(&net, &mut rng, 1e-3);
        let action = rng.gen_range(0..8);
        let target = rng.gen_range(-2.0..2.0);
        worst = worst.max(gradient_check(&net, obs, action, target, 1e-5));
    }
    (shapes.len(), worst)
}
