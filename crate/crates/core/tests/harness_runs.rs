mod common;

use std::fs;

use linkrl::config::Algorithm;
use linkrl::harness::{self, Policy};
use linkrl::io::{self, EPISODES_FILE};
use linkrl::rl::checkpoint::checkpoint_file_name;
use linkrl::rl::Checkpoint;
use sha2::{Digest, Sha256};

#[test]
fn training_writes_one_row_per_episode_and_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = common::short_config(3.0, 15);
    cfg.agent.checkpoint_every = 5;
    let mut seen = Vec::new();
    let out = harness::run_training(&cfg, Some(dir.path()), &mut |s| seen.push(s.episode)).unwrap();
    assert_eq!(seen, (1..=15).collect::<Vec<_>>());
    let csv = fs::read_to_string(dir.path().join(EPISODES_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 16);
    assert_eq!(
        csv.lines().next().unwrap(),
        harness::EPISODES_HEADER.trim_end()
    );
    for ep in [5, 10, 15] {
        assert!(dir.path().join(checkpoint_file_name(ep)).exists());
    }
    let saved = Checkpoint::load(&dir.path().join(checkpoint_file_name(15))).unwrap();
    assert_eq!(Some(saved), out.checkpoint);
}

#[test]
fn warmup_larger_than_the_run_trains_nothing() {
    let mut cfg = common::short_config(0.2, 1);
    cfg.agent.warmup = 10_000;
    let out = harness::run_training(&cfg, None, &mut |_| {}).unwrap();
    assert_eq!(out.summaries[0].train_steps, 0);
    assert!(out.summaries[0].cum_reward > 0.0);
}

#[test]
fn train_step_counter_follows_the_schedule() {
    for train_every in [1, 3, 7] {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = common::short_config(2.0, 3);
        cfg.agent.train_every = train_every;
        let out = harness::run_training(&cfg, Some(dir.path()), &mut |_| {}).unwrap();
        let env_steps: usize = (1..=3)
            .map(|ep| {
                fs::read_to_string(dir.path().join(io::steps_file_name(ep)))
                    .unwrap()
                    .lines()
                    .count()
                    - 1
            })
            .sum();
        let warmup = cfg.agent.warmup;
        let expected = (env_steps - warmup) / train_every as usize;
        let got = out.summaries.last().unwrap().train_steps as usize;
        assert!(
            got.abs_diff(expected) <= 1,
            "train_every {train_every}: {got} vs {expected}"
        );
    }
}

#[test]
fn cumulative_reward_matches_the_step_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::short_config(3.0, 2);
    let out = harness::run_training(&cfg, Some(dir.path()), &mut |_| {}).unwrap();
    for (k, s) in out.summaries.iter().enumerate() {
        let steps = fs::read_to_string(dir.path().join(io::steps_file_name(k + 1))).unwrap();
        let sum: f64 = steps
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(4).unwrap().parse::<f64>().unwrap())
            .sum();
        // Step rewards are written with 6 decimals.
        let rows = steps.lines().count() as f64;
        assert!(
            (sum - s.cum_reward).abs() <= rows * 5e-7,
            "{sum} vs {}",
            s.cum_reward
        );
    }
}

#[test]
fn training_is_reproducible() {
    let cfg = common::short_config(2.0, 3);
    let a = harness::run_training(&cfg, None, &mut |_| {}).unwrap();
    let b = harness::run_training(&cfg, None, &mut |_| {}).unwrap();
    assert_eq!(a.summaries, b.summaries);
    assert_eq!(a.checkpoint, b.checkpoint);
}

#[test]
fn evaluation_is_frozen_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::short_config(3.0, 2);
    harness::run_training(&cfg, Some(dir.path()), &mut |_| {}).unwrap();
    let path = dir.path().join(checkpoint_file_name(2));
    let before = Sha256::digest(fs::read(&path).unwrap());

    let policy = Policy::load(&cfg, &path, false).unwrap();
    let first = harness::run_evaluation(&cfg, Some(policy.clone()), None).unwrap();
    let second = harness::run_evaluation(&cfg, Some(policy), None).unwrap();
    assert_eq!(first.actions, second.actions);
    assert_eq!(first.summary, second.summary);
    assert_eq!(
        first.summary.train_steps,
        Checkpoint::load(&path).unwrap().train_steps
    );
    assert_eq!(before, Sha256::digest(fs::read(&path).unwrap()));
}

#[test]
fn evaluating_a_network_without_a_checkpoint_is_refused() {
    let cfg = common::short_config(1.0, 1);
    let err = harness::run_evaluation(&cfg, None, None).unwrap_err();
    assert!(err.is_config_error());
}

#[test]
fn baselines_evaluate_without_a_checkpoint() {
    for alg in [
        Algorithm::Ideal,
        Algorithm::MinstrelLike,
        Algorithm::Constant,
    ] {
        let mut cfg = common::short_config(2.0, 1);
        cfg.agent.algorithm = alg;
        let out = harness::run_evaluation(&cfg, None, None).unwrap();
        assert!(out.summary.mean_throughput_mbps > 0.0, "{alg:?}");
        assert_eq!(out.summary.train_steps, 0);
    }
}

#[test]
fn tabular_training_round_trips_through_its_policy_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = common::short_config(3.0, 2);
    cfg.agent.algorithm = Algorithm::DaraTabular;
    let out = harness::run_training(&cfg, Some(dir.path()), &mut |_| {}).unwrap();
    let path = dir.path().join(harness::qtable_file_name(2));
    let policy = Policy::load(&cfg, &path, false).unwrap();
    match &policy {
        Policy::Table(t) => assert_eq!(Some(t), out.qtable.as_ref()),
        Policy::Network(_) => panic!("expected a table"),
    }
    let eval = harness::run_evaluation(&cfg, Some(policy), None).unwrap();
    assert!(eval.summary.cum_reward > 0.0);
}

#[test]
fn baselines_cannot_be_trained() {
    let mut cfg = common::short_config(1.0, 1);
    cfg.agent.algorithm = Algorithm::Ideal;
    assert!(harness::run_training(&cfg, None, &mut |_| {})
        .unwrap_err()
        .is_config_error());
}

#[test]
fn sweep_produces_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = common::short_config(1.0, 2);
    cfg.agent.sweep.learning_rates = vec![0.1, 0.01, 0.001, 0.0001];
    cfg.agent.sweep.hidden_layers = vec![vec![8]];
    cfg.agent.sweep.seeds = vec![1];
    let lr = harness::run_sweep(&cfg, Some(dir.path())).unwrap();
    assert_eq!(lr.rows.len(), 4);
    assert!(lr.winner.is_some());
    let csv = fs::read_to_string(dir.path().join(io::SWEEP_SUMMARY_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 5);

    cfg.agent.sweep.learning_rates = vec![0.01];
    cfg.agent.sweep.hidden_layers = vec![
        vec![32, 32],
        vec![16, 16, 16],
        vec![64],
        vec![32],
        vec![64, 64],
    ];
    let arch = harness::run_sweep(&cfg, None).unwrap();
    assert_eq!(arch.rows.len(), 5);
    assert!(arch.rows.iter().all(|r| r.error.is_none()));
}

#[test]
fn empty_sweep_grid_is_rejected() {
    let mut cfg = common::short_config(1.0, 1);
    cfg.agent.sweep.learning_rates.clear();
    assert!(harness::run_sweep(&cfg, None)
        .unwrap_err()
        .is_config_error());
}

#[test]
fn sweep_winner_averages_over_seeds() {
    use harness::SweepRow;
    let row = |lr: f64, seed: u64, v: f64| SweepRow {
        learning_rate: lr,
        hidden_layers: vec![32, 32],
        seed,
        final_cum_reward: Some(v),
        mean_last3_cum_reward: Some(v),
        error: None,
    };
    let rows = vec![
        row(0.1, 1, 10.0),
        row(0.1, 2, 0.0),
        row(0.01, 1, 6.0),
        row(0.01, 2, 6.0),
    ];
    assert_eq!(harness::sweep_winner(&rows), Some((0.01, vec![32, 32])));
}
