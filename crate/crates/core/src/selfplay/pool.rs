use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;

use crate::nn::Mlp;

/// Frozen policy snapshot, identified by the training step it was taken at.
#[derive(Clone, Debug)]
pub struct PoolEntry {
    pub id: u64,
    pub params: Arc<Mlp<f32>>,
}

/// Bounded recency buffer of opponent snapshots.
#[derive(Clone, Debug)]
pub struct OpponentPool {
    capacity: usize,
    latest_bias: f64,
    entries: VecDeque<PoolEntry>,
}

impl OpponentPool {
    pub fn new(capacity: usize, latest_bias: f64) -> Self {
        assert!(capacity >= 1, "pool capacity must be positive");
        Self {
            capacity,
            latest_bias,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds a snapshot, evicting the oldest one when full.
    pub fn add(&mut self, id: u64, params: Mlp<f32>) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(PoolEntry {
            id,
            params: Arc::new(params),
        });
    }

    pub fn ids(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.id).collect()
    }

    pub fn latest(&self) -> Option<&PoolEntry> {
        self.entries.back()
    }

    pub fn get(&self, id: u64) -> Option<&PoolEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// The latest snapshot with probability `latest_bias`, otherwise one of
    /// the older snapshots uniformly.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u64> {
        let n = self.entries.len();
        if n == 0 {
            return None;
        }
        if n == 1 || rng.gen_bool(self.latest_bias) {
            return Some(self.entries[n - 1].id);
        }
        Some(self.entries[rng.gen_range(0..n - 1)].id)
    }
}
