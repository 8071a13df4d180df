use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rl::NUM_ACTIONS;

/// Q(s, a) over a discretized [0, 1] observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    /// Row-major, `n_states × n_actions`.
    values: Vec<f64>,
    /// Upper edges of each observation bin; the last is 1.0.
    bin_edges: Vec<f64>,
}

impl QTable {
    /// Zero table over `n_bins` equal-width observation bins and 8 actions.
    pub fn new(n_bins: usize) -> Result<Self> {
        Self::with_actions(n_bins, NUM_ACTIONS)
    }

    pub fn with_actions(n_states: usize, n_actions: usize) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::invalid(
                "Q-table needs at least one state and one action",
            ));
        }
        let bin_edges = (1..=n_states).map(|k| k as f64 / n_states as f64).collect();
        Ok(QTable {
            n_states,
            n_actions,
            values: vec![0.0; n_states * n_actions],
            bin_edges,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn bin_of(&self, observation: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&observation) {
            return Err(Error::invalid(format!(
                "observation {observation} outside [0, 1]"
            )));
        }
        Ok(((observation * self.n_states as f64) as usize).min(self.n_states - 1))
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.n_actions + a] = v;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// One temporal-difference update:
    /// `Q(s,a) ← (1−α)·Q(s,a) + α·[r + γ·max_a' Q(s',a')]`, with the max
    /// term dropped when `done`.
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        &mut self,
        s: usize,
        a: usize,
        r: f64,
        s_new: usize,
        alpha: f64,
        gamma: f64,
        done: bool,
    ) -> Result<()> {
        if s >= self.n_states || s_new >= self.n_states {
            return Err(Error::invalid(format!(
                "state index out of range ({s}, {s_new}) for {} states",
                self.n_states
            )));
        }
        if a >= self.n_actions {
            return Err(Error::invalid(format!("action {a} out of range")));
        }
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&gamma) {
            return Err(Error::invalid(format!(
                "alpha and gamma must be in [0, 1], got {alpha}, {gamma}"
            )));
        }
        let future = if done {
            0.0
        } else {
            gamma * self.max_value(s_new)
        };
        let old = self.get(s, a);
        self.set(s, a, (1.0 - alpha) * old + alpha * (r + future));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_with(s: usize, a: usize, q: f64, next_max: f64) -> QTable {
        let mut t = QTable::new(4).unwrap();
        t.set(s, a, q);
        t.set(3, 5, next_max);
        t
    }

    #[test]
    fn hand_evaluated_update() {
        let mut t = table_with(0, 2, 0.2, 0.6);
        t.update(0, 2, 0.5, 3, 0.1, 0.5, false).unwrap();
        assert!((t.get(0, 2) - 0.26).abs() < 1e-12);
    }

    #[test]
    fn alpha_extremes() {
        let mut t = table_with(0, 2, 0.2, 0.6);
        let before = t.clone();
        t.update(0, 2, 0.9, 3, 0.0, 0.7, false).unwrap();
        assert_eq!(t, before);
        t.update(0, 2, 0.5, 3, 1.0, 0.5, false).unwrap();
        assert_eq!(t.get(0, 2), 0.5 + 0.5 * 0.6);
    }

    #[test]
    fn terminal_drops_future_term() {
        let mut t = table_with(0, 2, 0.2, 0.6);
        t.update(0, 2, 0.5, 3, 1.0, 0.5, true).unwrap();
        assert_eq!(t.get(0, 2), 0.5);
    }

    #[test]
    fn only_target_entry_changes() {
        let mut t = table_with(1, 1, 0.3, 0.6);
        let before = t.clone();
        t.update(1, 1, 1.0, 3, 0.5, 0.5, false).unwrap();
        for s in 0..4 {
            for a in 0..8 {
                if (s, a) != (1, 1) {
                    assert_eq!(t.get(s, a), before.get(s, a));
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let mut t = QTable::new(4).unwrap();
        assert!(t.update(4, 0, 0.0, 0, 0.5, 0.5, false).is_err());
        assert!(t.update(0, 0, 0.0, 9, 0.5, 0.5, false).is_err());
        assert!(t.update(0, 8, 0.0, 0, 0.5, 0.5, false).is_err());
        assert!(t.update(0, 0, 0.0, 0, 1.5, 0.5, false).is_err());
        assert!(QTable::new(0).is_err());
    }

    #[test]
    fn binning() {
        let t = QTable::new(32).unwrap();
        assert_eq!(t.bin_of(0.0).unwrap(), 0);
        assert_eq!(t.bin_of(1.0).unwrap(), 31);
        assert_eq!(t.bin_of(0.5).unwrap(), 16);
        assert_eq!(t.bin_edges().len(), 32);
        assert!(t.bin_of(1.01).is_err());
    }

    proptest! {
        #[test]
        fn fixpoint_is_stable(q_next in 0.0f64..2.0, r in 0.0f64..1.0, gamma in 0.0f64..=1.0, alpha in 0.0f64..=1.0) {
            let mut t = QTable::new(2).unwrap();
            t.set(1, 0, q_next);
            let fixed = r + gamma * q_next;
            t.set(0, 3, fixed);
            t.update(0, 3, r, 1, alpha, gamma, false).unwrap();
            prop_assert!((t.get(0, 3) - fixed).abs() <= 1e-12 * fixed.abs().max(1.0));
        }
    }
}
