//! CSV layout of a run directory.
//!
//! ```text
//! DIR/report.csv                        one row per configuration
//! DIR/<config>/summary.csv              one row per seed, then a mean row
//! DIR/<config>/<seed>/lives.csv         one row per life
//! DIR/<config>/<seed>/summary.csv       per-seed totals
//! DIR/<config>/<seed>/buckets.csv       10-life accuracy buckets
//! DIR/<config>/<seed>/selections.csv    per-life action histogram
//! DIR/<config>/<seed>/heatmap_<L>.csv   selection shares over the tenth of lives ending at L
//! DIR/<config>/<seed>/periods.csv       one row per shooting period
//! DIR/<config>/<seed>/qtab_<L>.bin      table snapshots
//! DIR/<config>/<seed>/events.csv        optional tick,kind,payload log
//! ```

use super::learner::PeriodRecord;
use super::metrics::{
    action_heatmap, bucket_accuracy, mean_defined, mean_min_max, LifeMetrics, MetricsError, RunSummary,
};
use crate::action_grid::{ActionGrid, NUM_ACTIONS};
use crate::sim::TICK_SECONDS;
use std::fs;
use std::io;
use std::path::Path;
use thiserror::Error;

pub const BUCKET_LIVES: usize = 10;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.display().to_string(), source }
}

/// Writes through a temporary sibling so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(io_err(path))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| OutputError::Csv { path: path.display().to_string(), source };
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(path)(e.into_error()))?;
    write_atomic(path, &bytes)
}

fn f6(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.6}")
    }
}

fn opt6(x: Option<f64>) -> String {
    x.map(f6).unwrap_or_default()
}

pub const LIVES_HEADER: [&str; 8] =
    ["life", "hits", "misses", "reward_sum", "accuracy", "time_alive_s", "kills", "epsilon"];

pub fn write_lives(path: &Path, lives: &[LifeMetrics]) -> Result<(), OutputError> {
    let rows = lives
        .iter()
        .map(|l| {
            vec![
                l.life.to_string(),
                l.hits.to_string(),
                l.misses.to_string(),
                f6(l.reward_sum),
                opt6(l.accuracy()),
                format!("{:.2}", l.time_alive()),
                l.kills.to_string(),
                format!("{:.4}", l.epsilon),
            ]
        })
        .collect();
    write_csv(path, &LIVES_HEADER, rows)
}

pub fn read_lives(path: &Path) -> Result<Vec<LifeMetrics>, OutputError> {
    let p = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|source| OutputError::Csv { path: p.clone(), source })?;
    let headers = r.headers().map_err(|source| OutputError::Csv { path: p.clone(), source })?.clone();
    if headers.iter().ne(LIVES_HEADER) {
        return Err(OutputError::Format { path: p, msg: "unexpected header".into() });
    }
    let bad = |msg: String| OutputError::Format { path: p.clone(), msg };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|source| OutputError::Csv { path: p.clone(), source })?;
        let int = |i: usize| rec[i].parse::<u64>().map_err(|e| bad(format!("{}: {e}", LIVES_HEADER[i])));
        let float = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("{}: {e}", LIVES_HEADER[i])));
        out.push(LifeMetrics {
            life: int(0)?,
            hits: int(1)?,
            misses: int(2)?,
            reward_sum: float(3)?,
            ticks_alive: (float(5)? / TICK_SECONDS).round() as u64,
            kills: int(6)?,
            epsilon: float(7)?,
        });
    }
    Ok(out)
}

pub const SUMMARY_HEADER: [&str; 10] = [
    "lives",
    "avg_hits",
    "avg_misses",
    "avg_reward",
    "accuracy",
    "max_kill_streak",
    "kills",
    "deaths",
    "final_kd",
    "hours_alive",
];

fn summary_cells(s: &RunSummary) -> Vec<String> {
    vec![
        s.lives.to_string(),
        f6(s.avg_hits),
        f6(s.avg_misses),
        f6(s.avg_reward),
        opt6(s.accuracy),
        s.max_kill_streak.to_string(),
        s.kills.to_string(),
        s.deaths.to_string(),
        f6(s.final_kd),
        f6(s.hours_alive),
    ]
}

pub fn write_summary(path: &Path, s: &RunSummary) -> Result<(), OutputError> {
    write_csv(path, &SUMMARY_HEADER, vec![summary_cells(s)])
}

pub fn per_life_accuracy(lives: &[LifeMetrics]) -> Vec<Option<f64>> {
    lives.iter().map(LifeMetrics::accuracy).collect()
}

pub fn write_buckets(path: &Path, lives: &[LifeMetrics]) -> Result<(), OutputError> {
    let buckets = bucket_accuracy(&per_life_accuracy(lives), BUCKET_LIVES)?;
    let rows = buckets
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let first = i * BUCKET_LIVES + 1;
            let last = ((i + 1) * BUCKET_LIVES).min(lives.len());
            vec![i.to_string(), first.to_string(), last.to_string(), opt6(*b)]
        })
        .collect();
    write_csv(path, &["bucket", "first_life", "last_life", "accuracy"], rows)
}

pub fn write_selections(path: &Path, per_life: &[[u64; NUM_ACTIONS]]) -> Result<(), OutputError> {
    let mut header = vec!["life".to_string()];
    header.extend((0..NUM_ACTIONS).map(|a| format!("a{a}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = per_life
        .iter()
        .enumerate()
        .map(|(i, c)| std::iter::once((i + 1).to_string()).chain(c.iter().map(u64::to_string)).collect())
        .collect();
    write_csv(path, &header, rows)
}

/// Life indices (1-based, inclusive) closing each tenth of the run.
pub fn heatmap_checkpoints(lives: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=10).map(|k| (k * lives).div_ceil(10)).filter(|&l| l > 0).collect();
    v.dedup();
    v
}

pub fn write_heatmap(path: &Path, counts: &[u64; NUM_ACTIONS]) -> Result<(), OutputError> {
    let grid = action_heatmap(counts)?;
    let g = ActionGrid::default();
    let mut header = vec!["dz".to_string()];
    header.extend(g.lateral.iter().map(|dx| format!("{dx}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = grid
        .iter()
        .enumerate()
        .map(|(z, row)| {
            std::iter::once(format!("{}", g.vertical[z])).chain(row.iter().map(|&p| f6(p))).collect()
        })
        .collect();
    write_csv(path, &header, rows)
}

pub fn write_periods(path: &Path, periods: &[PeriodRecord]) -> Result<(), OutputError> {
    let rows = periods
        .iter()
        .map(|p| {
            vec![
                p.life.to_string(),
                p.start_tick.to_string(),
                p.outcomes.len().to_string(),
                p.outcome_string(),
                (p.terminal as u8).to_string(),
                f6(p.reward_sum),
            ]
        })
        .collect();
    write_csv(path, &["life", "start_tick", "length", "outcomes", "terminal", "reward_sum"], rows)
}

/// `(life, outcome string, logged reward sum)` per period.
pub fn read_periods(path: &Path) -> Result<Vec<(u64, String, f64)>, OutputError> {
    let p = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|source| OutputError::Csv { path: p.clone(), source })?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|source| OutputError::Csv { path: p.clone(), source })?;
        let bad = |msg: String| OutputError::Format { path: p.clone(), msg };
        let life = rec[0].parse().map_err(|e| bad(format!("life: {e}")))?;
        let reward = rec[5].parse().map_err(|e| bad(format!("reward_sum: {e}")))?;
        out.push((life, rec[3].to_string(), reward));
    }
    Ok(out)
}

pub fn write_events(path: &Path, lines: &[String]) -> Result<(), OutputError> {
    let mut s = String::from("tick,kind,payload\n");
    for l in lines {
        s.push_str(l);
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

/// Mean of the bucketed accuracy over the first and last `fraction` of buckets.
pub fn phase_accuracy(lives: &[LifeMetrics], fraction: f64) -> Result<(Option<f64>, Option<f64>), OutputError> {
    let b = bucket_accuracy(&per_life_accuracy(lives), BUCKET_LIVES)?;
    let k = ((b.len() as f64 * fraction).round() as usize).clamp(1, b.len());
    Ok((mean_defined(&b[..k]), mean_defined(&b[b.len() - k..])))
}

/// Per-seed rows of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRow {
    pub seed: u64,
    pub summary: RunSummary,
    pub first_accuracy: Option<f64>,
    pub final_accuracy: Option<f64>,
}

impl SeedRow {
    pub fn from_lives(seed: u64, lives: &[LifeMetrics]) -> Result<Self, OutputError> {
        let (first_accuracy, final_accuracy) = phase_accuracy(lives, 0.2)?;
        Ok(Self { seed, summary: RunSummary::from_lives(lives)?, first_accuracy, final_accuracy })
    }
}

pub fn write_config_summary(path: &Path, rows: &[SeedRow]) -> Result<(), OutputError> {
    let mut header = vec!["seed"];
    header.extend(SUMMARY_HEADER);
    header.extend(["first_accuracy", "final_accuracy"]);
    let mut out: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.seed.to_string()];
            v.extend(summary_cells(&r.summary));
            v.extend([opt6(r.first_accuracy), opt6(r.final_accuracy)]);
            v
        })
        .collect();
    if !rows.is_empty() {
        let agg = ConfigAggregate::of(rows);
        let mean = |f: &dyn Fn(&SeedRow) -> f64| f6(rows.iter().map(f).sum::<f64>() / rows.len() as f64);
        out.push(vec![
            "mean".into(),
            mean(&|r| r.summary.lives as f64),
            f6(agg.avg_hits),
            f6(agg.avg_misses),
            f6(agg.avg_reward),
            opt6(agg.accuracy),
            mean(&|r| r.summary.max_kill_streak as f64),
            mean(&|r| r.summary.kills as f64),
            mean(&|r| r.summary.deaths as f64),
            opt6(agg.kd.map(|k| k.0)),
            f6(agg.hours_alive),
            opt6(agg.first_accuracy),
            opt6(agg.final_accuracy),
        ]);
    }
    write_csv(path, &header, out)
}

/// Seed-averaged figures for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigAggregate {
    pub seeds: usize,
    pub avg_hits: f64,
    pub avg_misses: f64,
    pub avg_reward: f64,
    pub accuracy: Option<f64>,
    pub first_accuracy: Option<f64>,
    pub final_accuracy: Option<f64>,
    pub max_kill_streak: u64,
    pub hours_alive: f64,
    /// Mean, minimum and maximum final K:D.
    pub kd: Option<(f64, f64, f64)>,
}

impl ConfigAggregate {
    pub fn of(rows: &[SeedRow]) -> Self {
        let n = rows.len().max(1) as f64;
        let avg = |f: &dyn Fn(&SeedRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
        let kds: Vec<f64> = rows.iter().map(|r| r.summary.final_kd).collect();
        Self {
            seeds: rows.len(),
            avg_hits: avg(&|r| r.summary.avg_hits),
            avg_misses: avg(&|r| r.summary.avg_misses),
            avg_reward: avg(&|r| r.summary.avg_reward),
            accuracy: mean_defined(&rows.iter().map(|r| r.summary.accuracy).collect::<Vec<_>>()),
            first_accuracy: mean_defined(&rows.iter().map(|r| r.first_accuracy).collect::<Vec<_>>()),
            final_accuracy: mean_defined(&rows.iter().map(|r| r.final_accuracy).collect::<Vec<_>>()),
            max_kill_streak: rows.iter().map(|r| r.summary.max_kill_streak).max().unwrap_or(0),
            hours_alive: avg(&|r| r.summary.hours_alive),
            kd: mean_min_max(&kds),
        }
    }
}

pub const REPORT_HEADER: [&str; 13] = [
    "config",
    "seeds",
    "avg_hits",
    "avg_misses",
    "avg_reward",
    "accuracy",
    "first_accuracy",
    "final_accuracy",
    "max_kill_streak",
    "hours_alive",
    "kd_mean",
    "kd_min",
    "kd_max",
];

pub fn write_report(path: &Path, configs: &[(String, ConfigAggregate)]) -> Result<(), OutputError> {
    let rows = configs
        .iter()
        .map(|(name, a)| {
            vec![
                name.clone(),
                a.seeds.to_string(),
                f6(a.avg_hits),
                f6(a.avg_misses),
                f6(a.avg_reward),
                opt6(a.accuracy),
                opt6(a.first_accuracy),
                opt6(a.final_accuracy),
                a.max_kill_streak.to_string(),
                f6(a.hours_alive),
                opt6(a.kd.map(|k| k.0)),
                opt6(a.kd.map(|k| k.1)),
                opt6(a.kd.map(|k| k.2)),
            ]
        })
        .collect();
    write_csv(path, &REPORT_HEADER, rows)
}
