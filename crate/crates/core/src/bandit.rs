//! Sliding-window UCB1 for choosing among mutation operators.
//!
//! Arm score: `Q(a) + w(g) · sqrt(2 ln t / N(a))`, where `Q(a)` is the sum of
//! the last `window` rewards of arm `a`, `N(a)` and `t` count all pulls ever
//! recorded, and the exploration weight decays with the generation counter as
//! `w(g) = g^-3`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState<A> {
    arms: Vec<A>,
    windows: Vec<VecDeque<f64>>,
    counts: Vec<u64>,
    total: u64,
    window_size: usize,
    generation: u64,
}

impl<A: Clone> BanditState<A> {
    pub fn new(arms: Vec<A>, window_size: usize) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::param("bandit needs at least one arm"));
        }
        if window_size == 0 {
            return Err(Error::param("bandit window size must be positive"));
        }
        let k = arms.len();
        Ok(BanditState {
            arms,
            windows: vec![VecDeque::with_capacity(window_size); k],
            counts: vec![0; k],
            total: 0,
            window_size,
            generation: 1,
        })
    }

    pub fn arms(&self) -> &[A] {
        &self.arms
    }

    pub fn arm(&self, index: usize) -> &A {
        &self.arms[index]
    }

    /// Sets the generation counter `g` (starting at 1).
    pub fn set_generation(&mut self, generation: u64) {
        self.generation = generation.max(1);
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// `g^-3`.
    pub fn exploration_weight(&self) -> f64 {
        (self.generation as f64).powi(-3)
    }

    /// Windowed reward sum of arm `a`.
    pub fn q(&self, a: usize) -> f64 {
        self.windows[a].iter().sum()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_pulls(&self) -> u64 {
        self.total
    }

    pub fn window(&self, a: usize) -> &VecDeque<f64> {
        &self.windows[a]
    }

    /// Arm index to pull next, using the current generation's exploration weight.
    pub fn select(&self) -> usize {
        self.select_with_weight(self.exploration_weight())
    }

    /// Arm index to pull next with an explicit exploration weight.
    ///
    /// Unpulled arms come first, in arm order. Otherwise the highest score
    /// wins; ties go to the lowest index.
    pub fn select_with_weight(&self, weight: f64) -> usize {
        if let Some(a) = self.counts.iter().position(|&n| n == 0) {
            return a;
        }
        let log_t = (self.total as f64).ln();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for a in 0..self.arms.len() {
            let bonus = (2.0 * log_t / self.counts[a] as f64).sqrt();
            let score = self.q(a) + weight * bonus;
            if score > best_score {
                best = a;
                best_score = score;
            }
        }
        best
    }

    /// Records a non-negative reward for arm `a`.
    pub fn record(&mut self, a: usize, reward: f64) -> Result<()> {
        if a >= self.arms.len() {
            return Err(Error::UnknownArm(a));
        }
        if !(reward >= 0.0) {
            return Err(Error::param(format!("reward must be non-negative, got {reward}")));
        }
        let window = &mut self.windows[a];
        if window.len() == self.window_size {
            window.pop_front();
        }
        window.push_back(reward);
        self.counts[a] += 1;
        self.total += 1;
        Ok(())
    }
}
