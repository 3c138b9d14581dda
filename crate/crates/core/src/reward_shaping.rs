//! Per-step rewards for a finished shooting period.
//!
//! Plain mode pays the full hit reward for every hit. Cluster-weighted mode
//! looks at maximal runs of consecutive hits: a lone hit earns half the hit
//! reward, the two ends of a longer run earn the full reward and every hit
//! strictly inside a run earns double. The period's start and end bound a
//! run the same way a miss does. Misses cost the miss penalty in both modes.

use crate::action_grid::AimAction;
use crate::sarsa::AgentConfig;
use crate::state_codec::StateKey;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Hit,
    Miss,
}

impl Outcome {
    pub fn symbol(self) -> char {
        match self {
            Outcome::Hit => 'H',
            Outcome::Miss => 'M',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'H' => Some(Outcome::Hit),
            'M' => Some(Outcome::Miss),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapingError {
    #[error("shooting period is empty")]
    EmptyPeriod,
    #[error("tick {got} does not follow tick {last}")]
    NonIncreasingTick { last: u64, got: u64 },
    #[error("no step recorded at tick {0}")]
    UnknownTick(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedStep {
    pub state: StateKey,
    pub action: AimAction,
    pub outcome: Outcome,
    pub tick: u64,
}

/// Everything that happened while the trigger was held, one entry per tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShootingPeriodLog {
    steps: Vec<LoggedStep>,
}

impl ShootingPeriodLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a firing tick, initially recorded as a miss.
    pub fn push(&mut self, state: StateKey, action: AimAction, tick: u64) -> Result<(), ShapingError> {
        if let Some(last) = self.steps.last() {
            if tick <= last.tick {
                return Err(ShapingError::NonIncreasingTick { last: last.tick, got: tick });
            }
        }
        self.steps.push(LoggedStep { state, action, outcome: Outcome::Miss, tick });
        Ok(())
    }

    /// Marks the most recent firing tick as a hit.
    pub fn mark_latest_hit(&mut self) -> bool {
        match self.steps.last_mut() {
            Some(s) => {
                s.outcome = Outcome::Hit;
                true
            }
            None => false,
        }
    }

    /// Marks the step fired at `tick` as a hit.
    pub fn mark_hit_at(&mut self, tick: u64) -> Result<(), ShapingError> {
        let i = self
            .steps
            .binary_search_by_key(&tick, |s| s.tick)
            .map_err(|_| ShapingError::UnknownTick(tick))?;
        self.steps[i].outcome = Outcome::Hit;
        Ok(())
    }

    pub fn steps(&self) -> &[LoggedStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.steps.iter().map(|s| s.outcome).collect()
    }

    pub fn clear(&mut self) {
        self.steps.clear();
    }
}

/// Position of a hit within its run of consecutive hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HitClass {
    Isolated,
    Endpoint,
    Interior,
}

/// Classifies every hit by run structure; misses map to `None`.
pub fn classify_hits(outcomes: &[Outcome]) -> Vec<Option<HitClass>> {
    let mut out = vec![None; outcomes.len()];
    let mut i = 0;
    while i < outcomes.len() {
        if outcomes[i] == Outcome::Miss {
            i += 1;
            continue;
        }
        let start = i;
        while i < outcomes.len() && outcomes[i] == Outcome::Hit {
            i += 1;
        }
        let end = i - 1;
        if start == end {
            out[start] = Some(HitClass::Isolated);
        } else {
            for (k, slot) in out.iter_mut().enumerate().take(end + 1).skip(start) {
                *slot = Some(if k == start || k == end { HitClass::Endpoint } else { HitClass::Interior });
            }
        }
    }
    out
}

pub fn plain_rewards_for(outcomes: &[Outcome], cfg: &AgentConfig) -> Result<Vec<f64>, ShapingError> {
    if outcomes.is_empty() {
        return Err(ShapingError::EmptyPeriod);
    }
    Ok(outcomes
        .iter()
        .map(|o| match o {
            Outcome::Hit => cfg.hit_reward,
            Outcome::Miss => cfg.miss_penalty,
        })
        .collect())
}

pub fn pcwr_rewards_for(outcomes: &[Outcome], cfg: &AgentConfig) -> Result<Vec<f64>, ShapingError> {
    if outcomes.is_empty() {
        return Err(ShapingError::EmptyPeriod);
    }
    Ok(classify_hits(outcomes)
        .into_iter()
        .map(|c| match c {
            None => cfg.miss_penalty,
            Some(HitClass::Isolated) => cfg.hit_reward * 0.5,
            Some(HitClass::Endpoint) => cfg.hit_reward,
            Some(HitClass::Interior) => cfg.hit_reward * 2.0,
        })
        .collect())
}

pub fn shape_outcomes(outcomes: &[Outcome], cfg: &AgentConfig) -> Result<Vec<f64>, ShapingError> {
    if cfg.pcwr_enabled {
        pcwr_rewards_for(outcomes, cfg)
    } else {
        plain_rewards_for(outcomes, cfg)
    }
}

pub fn plain_rewards(period: &ShootingPeriodLog, cfg: &AgentConfig) -> Result<Vec<f64>, ShapingError> {
    plain_rewards_for(&period.outcomes(), cfg)
}

pub fn pcwr_rewards(period: &ShootingPeriodLog, cfg: &AgentConfig) -> Result<Vec<f64>, ShapingError> {
    pcwr_rewards_for(&period.outcomes(), cfg)
}

pub fn shape(period: &ShootingPeriodLog, cfg: &AgentConfig) -> Result<Vec<f64>, ShapingError> {
    shape_outcomes(&period.outcomes(), cfg)
}

/// Counts of each hit class and misses in an outcome string.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunCensus {
    pub isolated: u64,
    pub endpoint: u64,
    pub interior: u64,
    pub misses: u64,
}

impl RunCensus {
    pub fn of(outcomes: &[Outcome]) -> Self {
        let mut c = RunCensus::default();
        for class in classify_hits(outcomes) {
            match class {
                None => c.misses += 1,
                Some(HitClass::Isolated) => c.isolated += 1,
                Some(HitClass::Endpoint) => c.endpoint += 1,
                Some(HitClass::Interior) => c.interior += 1,
            }
        }
        c
    }

    pub fn add(&mut self, o: RunCensus) {
        self.isolated += o.isolated;
        self.endpoint += o.endpoint;
        self.interior += o.interior;
        self.misses += o.misses;
    }

    /// Cluster-weighted total minus plain total; endpoints and misses cancel.
    pub fn pcwr_minus_plain(&self, cfg: &AgentConfig) -> f64 {
        cfg.hit_reward * self.interior as f64 - 0.5 * cfg.hit_reward * self.isolated as f64
    }
}
