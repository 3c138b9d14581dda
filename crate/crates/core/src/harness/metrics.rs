use crate::action_grid::{LATERAL_STEPS, NUM_ACTIONS, VERTICAL_STEPS};
use crate::sim::TICK_SECONDS;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("empty series")]
    EmptySeries,
    #[error("bucket size must be positive")]
    ZeroBucket,
    #[error("no selections in window")]
    EmptyWindow,
}

/// One learner life, from respawn to death.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeMetrics {
    /// 1-based.
    pub life: u64,
    pub hits: u64,
    pub misses: u64,
    pub reward_sum: f64,
    /// Logic ticks survived.
    pub ticks_alive: u64,
    pub kills: u64,
    pub epsilon: f64,
}

impl LifeMetrics {
    pub fn new(life: u64, epsilon: f64) -> Self {
        Self { life, hits: 0, misses: 0, reward_sum: 0.0, ticks_alive: 0, kills: 0, epsilon }
    }

    pub fn shots(&self) -> u64 {
        self.hits + self.misses
    }

    pub fn accuracy(&self) -> Option<f64> {
        (self.shots() > 0).then(|| self.hits as f64 / self.shots() as f64)
    }

    /// Simulated seconds.
    pub fn time_alive(&self) -> f64 {
        self.ticks_alive as f64 * TICK_SECONDS
    }
}

/// Kills per death; `inf` when there are no deaths.
pub fn kd_ratio(kills: u64, deaths: u64) -> f64 {
    if deaths == 0 {
        f64::INFINITY
    } else {
        kills as f64 / deaths as f64
    }
}

/// Means of consecutive `bucket`-sized windows of the per-life accuracy;
/// the last window may be shorter. Lives without shots are skipped, and a
/// window with no shooting lives yields `None`.
pub fn bucket_accuracy(per_life: &[Option<f64>], bucket: usize) -> Result<Vec<Option<f64>>, MetricsError> {
    if bucket == 0 {
        return Err(MetricsError::ZeroBucket);
    }
    if per_life.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    Ok(per_life
        .chunks(bucket)
        .map(|w| {
            let vals: Vec<f64> = w.iter().flatten().copied().collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect())
}

/// Mean of the defined entries.
pub fn mean_defined(xs: &[Option<f64>]) -> Option<f64> {
    let v: Vec<f64> = xs.iter().flatten().copied().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Selection percentages laid out by vertical row, then lateral column.
pub fn action_heatmap(counts: &[u64; NUM_ACTIONS]) -> Result<[[f64; LATERAL_STEPS]; VERTICAL_STEPS], MetricsError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(MetricsError::EmptyWindow);
    }
    let mut grid = [[0.0; LATERAL_STEPS]; VERTICAL_STEPS];
    for (id, &c) in counts.iter().enumerate() {
        grid[id / LATERAL_STEPS][id % LATERAL_STEPS] = 100.0 * c as f64 / total as f64;
    }
    Ok(grid)
}

/// Shannon entropy in bits of a selection histogram.
pub fn selection_entropy(counts: &[u64]) -> Result<f64, MetricsError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(MetricsError::EmptyWindow);
    }
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum())
}

/// Element-wise sum of per-life histograms.
pub fn sum_counts(per_life: &[[u64; NUM_ACTIONS]]) -> [u64; NUM_ACTIONS] {
    let mut out = [0; NUM_ACTIONS];
    for c in per_life {
        for (o, v) in out.iter_mut().zip(c) {
            *o += v;
        }
    }
    out
}

/// Per-seed totals in the layout of the averages-per-life tables.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub lives: u64,
    pub avg_hits: f64,
    pub avg_misses: f64,
    pub avg_reward: f64,
    /// Pooled hits over pooled shots.
    pub accuracy: Option<f64>,
    /// Most kills within a single life.
    pub max_kill_streak: u64,
    pub kills: u64,
    pub deaths: u64,
    pub final_kd: f64,
    /// Summed simulated lifetimes, in hours.
    pub hours_alive: f64,
}

impl RunSummary {
    /// Every life in `lives` ended in a death.
    pub fn from_lives(lives: &[LifeMetrics]) -> Result<Self, MetricsError> {
        if lives.is_empty() {
            return Err(MetricsError::EmptySeries);
        }
        let n = lives.len() as f64;
        let hits: u64 = lives.iter().map(|l| l.hits).sum();
        let misses: u64 = lives.iter().map(|l| l.misses).sum();
        let kills: u64 = lives.iter().map(|l| l.kills).sum();
        let deaths = lives.len() as u64;
        let seconds: f64 = lives.iter().map(|l| l.time_alive()).sum();
        Ok(Self {
            lives: deaths,
            avg_hits: hits as f64 / n,
            avg_misses: misses as f64 / n,
            avg_reward: lives.iter().map(|l| l.reward_sum).sum::<f64>() / n,
            accuracy: (hits + misses > 0).then(|| hits as f64 / (hits + misses) as f64),
            max_kill_streak: lives.iter().map(|l| l.kills).max().unwrap_or(0),
            kills,
            deaths,
            final_kd: kd_ratio(kills, deaths),
            hours_alive: seconds / 3600.0,
        })
    }
}

/// Mean, minimum and maximum over the finite values.
pub fn mean_min_max(xs: &[f64]) -> Option<(f64, f64, f64)> {
    let v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((mean, min, max))
}
