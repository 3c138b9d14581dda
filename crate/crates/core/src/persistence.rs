//! Persistent action selection: a fresh epsilon-greedy choice is held for a
//! fixed number of logic ticks. The state keeps changing every tick; only
//! the aim action is held.

use crate::action_grid::AimAction;
use crate::sarsa::select_action;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PasState {
    current: Option<AimAction>,
    ticks_remaining: u32,
    interval: u32,
    fresh_selections: u64,
}

impl PasState {
    /// `interval` is clamped to at least one tick.
    pub fn new(interval: u32) -> Self {
        Self { current: None, ticks_remaining: 0, interval: interval.max(1), fresh_selections: 0 }
    }

    pub fn interval(&self) -> u32 {
        self.interval
    }

    pub fn current(&self) -> Option<AimAction> {
        self.current
    }

    pub fn ticks_remaining(&self) -> u32 {
        self.ticks_remaining
    }

    /// Number of fresh (non-persisted) selections made so far.
    pub fn fresh_selections(&self) -> u64 {
        self.fresh_selections
    }

    pub fn next_action<R: Rng + ?Sized>(&mut self, q_row: &[f64], epsilon: f64, rng: &mut R) -> AimAction {
        if let (Some(a), true) = (self.current, self.ticks_remaining > 0) {
            self.ticks_remaining -= 1;
            return a;
        }
        let a = select_action(q_row, epsilon, rng);
        self.current = Some(a);
        self.ticks_remaining = self.interval - 1;
        self.fresh_selections += 1;
        a
    }

    /// Drops any held action so the next tick selects afresh.
    pub fn reset(&mut self) {
        self.current = None;
        self.ticks_remaining = 0;
    }
}
