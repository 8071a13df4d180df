use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Uniform random action with probability `epsilon`, otherwise greedy.
pub fn epsilon_greedy<R: Rng + ?Sized>(q_values: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q_values.len())
    } else {
        argmax(q_values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EpsilonSchedule {
    Fixed {
        value: f64,
    },
    /// Linear interpolation from `start` to `end` over `decay_steps` train steps.
    Linear {
        start: f64,
        end: f64,
        decay_steps: u64,
    },
}

impl EpsilonSchedule {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        match *self {
            EpsilonSchedule::Fixed { value } if !in_unit(value) => {
                Err(Error::config(format!("epsilon {value} outside [0, 1]")))
            }
            EpsilonSchedule::Linear { start, end, .. } if !in_unit(start) || !in_unit(end) => Err(
                Error::config(format!("epsilon range {start}..{end} outside [0, 1]")),
            ),
            EpsilonSchedule::Linear { decay_steps: 0, .. } => {
                Err(Error::config("linear epsilon decay needs decay_steps >= 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, train_steps: u64) -> f64 {
        match *self {
            EpsilonSchedule::Fixed { value } => value,
            EpsilonSchedule::Linear {
                start,
                end,
                decay_steps,
            } => {
                let frac = (train_steps as f64 / decay_steps as f64).min(1.0);
                start + (end - start) * frac
            }
        }
    }
}
