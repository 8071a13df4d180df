use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub s: f64,
    pub a: usize,
    pub r: f64,
    pub s_next: f64,
    pub done: bool,
}

/// Fixed-capacity FIFO of transitions; the oldest entry is evicted first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("replay capacity must be >= 1"));
        }
        // Grows on demand; a 10^6 buffer is rarely filled in a desk-scale run.
        Ok(ReplayBuffer {
            capacity,
            storage: VecDeque::with_capacity(capacity.min(1 << 16)),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn clear(&mut self) {
        self.storage.clear();
    }

    pub fn push(&mut self, t: Transition) {
        if self.storage.len() == self.capacity {
            self.storage.pop_front();
        }
        self.storage.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }

    /// Uniform sampling with replacement.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Vec<Transition>> {
        Ok(self
            .sample_indices(batch_size, rng)?
            .into_iter()
            .map(|i| self.storage[i])
            .collect())
    }

    pub fn sample_indices<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        if self.storage.is_empty() {
            return Err(Error::NotReady("replay buffer is empty".into()));
        }
        let n = self.storage.len();
        Ok((0..batch_size).map(|_| rng.gen_range(0..n)).collect())
    }
}
