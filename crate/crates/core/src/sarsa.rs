//! Tabular SARSA(lambda) with replacing traces, epsilon-greedy selection and
//! deferred per-period batch updates.

use crate::action_grid::{AimAction, NUM_ACTIONS};
use crate::reward_shaping::ShootingPeriodLog;
use crate::state_codec::{StateKey, NUM_STATES};
use rand::Rng;
use thiserror::Error;

pub const TABLE_LEN: usize = NUM_STATES * NUM_ACTIONS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("{rewards} rewards for a period of {steps} steps")]
    LengthMismatch { steps: usize, rewards: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub epsilon_initial: f64,
    /// Reduction applied once per hundred deaths.
    pub epsilon_step: f64,
    pub epsilon_floor: f64,
    pub hit_reward: f64,
    pub miss_penalty: f64,
    /// Ticks each fresh selection is held for; 1 disables persistence.
    pub pas_interval: u32,
    pub pcwr_enabled: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            gamma: 0.5,
            lambda: 0.9,
            epsilon_initial: 0.20,
            epsilon_step: 0.03,
            epsilon_floor: 0.05,
            hit_reward: 250.0,
            miss_penalty: -1.0,
            pas_interval: 1,
            pcwr_enabled: false,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(AgentError::InvalidConfig(format!("{name} = {v} not in [0, 1]")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("gamma", self.gamma)?;
        unit("lambda", self.lambda)?;
        unit("epsilon_initial", self.epsilon_initial)?;
        unit("epsilon_floor", self.epsilon_floor)?;
        if self.epsilon_floor > self.epsilon_initial {
            return Err(AgentError::InvalidConfig("epsilon_floor exceeds epsilon_initial".into()));
        }
        if self.epsilon_step < 0.0 {
            return Err(AgentError::InvalidConfig("epsilon_step is negative".into()));
        }
        if self.pas_interval < 1 {
            return Err(AgentError::InvalidConfig("pas_interval must be at least 1".into()));
        }
        if !(self.hit_reward > 0.0 && self.hit_reward.is_finite()) {
            return Err(AgentError::InvalidConfig("hit_reward must be positive".into()));
        }
        if !self.miss_penalty.is_finite() {
            return Err(AgentError::InvalidConfig("miss_penalty must be finite".into()));
        }
        Ok(())
    }

    /// Exploration rate after `death_count` deaths.
    ///
    /// Computed on a 1e-4 grid so that the schedule lands exactly on its
    /// decimal values (0.20, 0.17, 0.14, ...).
    pub fn epsilon_for_deaths(&self, death_count: u64) -> f64 {
        let bp = |v: f64| (v * 1e4).round() as i64;
        let steps = (death_count / 100) as i64;
        let eps = bp(self.epsilon_initial).saturating_sub(bp(self.epsilon_step).saturating_mul(steps));
        eps.max(bp(self.epsilon_floor)) as f64 / 1e4
    }

    fn trace_decay(&self) -> f64 {
        self.gamma * self.lambda
    }
}

pub fn epsilon_for_deaths(death_count: u64) -> f64 {
    AgentConfig::default().epsilon_for_deaths(death_count)
}

fn flat(s: StateKey, a: AimAction) -> usize {
    s.index() * NUM_ACTIONS + a.id()
}

/// Dense 1184 x 44 action-value table, row-major by state.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Vec<f64>,
}

impl Default for QTable {
    fn default() -> Self {
        Self::new()
    }
}

impl QTable {
    pub fn new() -> Self {
        Self { values: vec![0.0; TABLE_LEN] }
    }

    pub fn from_values(values: Vec<f64>) -> Option<Self> {
        (values.len() == TABLE_LEN).then_some(Self { values })
    }

    pub fn get(&self, s: StateKey, a: AimAction) -> f64 {
        self.values[flat(s, a)]
    }

    pub fn set(&mut self, s: StateKey, a: AimAction, v: f64) {
        self.values[flat(s, a)] = v;
    }

    pub fn row(&self, s: StateKey) -> &[f64] {
        let i = s.index() * NUM_ACTIONS;
        &self.values[i..i + NUM_ACTIONS]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Eligibility traces. Only entries touched since the last reset can be
/// non-zero, so sweeps visit just those (in ascending row-major order),
/// which yields the same result as a full-table sweep.
#[derive(Debug, Clone)]
pub struct TraceTable {
    traces: Vec<f64>,
    active: Vec<bool>,
    touched: Vec<u32>,
}

impl Default for TraceTable {
    fn default() -> Self {
        Self::new()
    }
}

impl TraceTable {
    pub fn new() -> Self {
        Self { traces: vec![0.0; TABLE_LEN], active: vec![false; TABLE_LEN], touched: Vec::new() }
    }

    pub fn get(&self, s: StateKey, a: AimAction) -> f64 {
        self.traces[flat(s, a)]
    }

    fn replace(&mut self, idx: usize) {
        self.traces[idx] = 1.0;
        if !self.active[idx] {
            self.active[idx] = true;
            let pos = self.touched.partition_point(|&t| (t as usize) < idx);
            self.touched.insert(pos, idx as u32);
        }
    }

    pub fn reset(&mut self) {
        for &i in &self.touched {
            self.traces[i as usize] = 0.0;
            self.active[i as usize] = false;
        }
        self.touched.clear();
    }

    pub fn is_zero(&self) -> bool {
        self.touched.is_empty() && self.traces.iter().all(|&t| t == 0.0)
    }

    pub fn max(&self) -> f64 {
        self.touched.iter().map(|&i| self.traces[i as usize]).fold(0.0, f64::max)
    }
}

/// What the last update of a sequence bootstraps from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Successor {
    Terminal,
    Next(StateKey, AimAction),
}

/// One SARSA(lambda) backup with a replacing trace on `(s, a)`.
pub fn sarsa_step_update(
    q: &mut QTable,
    e: &mut TraceTable,
    s: StateKey,
    a: AimAction,
    reward: f64,
    next: Successor,
    cfg: &AgentConfig,
) {
    let target = match next {
        Successor::Terminal => reward,
        Successor::Next(s2, a2) => reward + cfg.gamma * q.get(s2, a2),
    };
    let delta = target - q.get(s, a);
    e.replace(flat(s, a));
    let step = cfg.alpha * delta;
    let decay = cfg.trace_decay();
    for &i in &e.touched {
        let i = i as usize;
        q.values[i] += step * e.traces[i];
        e.traces[i] *= decay;
    }
}

/// Replays a finished period in order: traces are cleared, then every
/// logged step is backed up against its successor. The final step uses
/// `end`.
pub fn apply_period_updates(
    q: &mut QTable,
    e: &mut TraceTable,
    period: &ShootingPeriodLog,
    rewards: &[f64],
    end: Successor,
    cfg: &AgentConfig,
) -> Result<(), AgentError> {
    let steps = period.steps();
    if steps.len() != rewards.len() {
        return Err(AgentError::LengthMismatch { steps: steps.len(), rewards: rewards.len() });
    }
    e.reset();
    for (i, (step, &r)) in steps.iter().zip(rewards).enumerate() {
        let next = match steps.get(i + 1) {
            Some(n) => Successor::Next(n.state, n.action),
            None => end,
        };
        sarsa_step_update(q, e, step.state, step.action, r, next, cfg);
    }
    Ok(())
}

/// Epsilon-greedy choice over one Q row. Greedy ties are broken uniformly.
///
/// Always draws one uniform float, then one index.
pub fn select_action<R: Rng + ?Sized>(q_row: &[f64], epsilon: f64, rng: &mut R) -> AimAction {
    debug_assert_eq!(q_row.len(), NUM_ACTIONS);
    let explore = rng.random::<f64>() < epsilon;
    let id = if explore {
        rng.random_range(0..NUM_ACTIONS)
    } else {
        let best = q_row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut ties = [0usize; NUM_ACTIONS];
        let mut n = 0;
        for (i, &v) in q_row.iter().enumerate() {
            if v == best {
                ties[n] = i;
                n += 1;
            }
        }
        ties[rng.random_range(0..n.max(1))]
    };
    AimAction::new(id).expect("index drawn below NUM_ACTIONS")
}
