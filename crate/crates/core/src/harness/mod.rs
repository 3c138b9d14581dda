//! Runs the PCWR x PAS study across seeds and writes the metrics tree.

mod learner;
pub mod metrics;
pub mod output;

pub use learner::{play, LearnerError, PeriodRecord, SessionOutcome, SessionSpec, AGENT_STREAM};
pub use metrics::{
    action_heatmap, bucket_accuracy, kd_ratio, selection_entropy, sum_counts, LifeMetrics, MetricsError, RunSummary,
};

use crate::protocol::{spawn_server, InProcess, Tcp, Transport};
use crate::sarsa::AgentConfig;
use crate::sim::{opponent::valid_level, SimConfig};
use crate::snapshot;
use output::{ConfigAggregate, OutputError, SeedRow};
use rayon::prelude::*;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid run config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{config} seed {seed}: {source}")]
    Session { config: String, seed: u64, source: LearnerError },
    #[error("cannot start server: {0}")]
    Server(std::io::Error),
    #[error("{failed} of {total} runs failed; first: {first}")]
    Partial { failed: usize, total: usize, first: Box<HarnessError> },
}

/// One cell of the 2 x 2 design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub pcwr: bool,
    pub pas_interval: u32,
}

impl Variant {
    pub const GRID: [Variant; 4] = [
        Variant { pcwr: false, pas_interval: 1 },
        Variant { pcwr: true, pas_interval: 1 },
        Variant { pcwr: false, pas_interval: 3 },
        Variant { pcwr: true, pas_interval: 3 },
    ];

    pub fn agent(&self) -> AgentConfig {
        AgentConfig { pcwr_enabled: self.pcwr, pas_interval: self.pas_interval, ..AgentConfig::default() }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pcwr-{}_pas-{}", if self.pcwr { "on" } else { "off" }, self.pas_interval)
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("not a config directory name: {s}");
        let (p, a) = s.split_once('_').ok_or_else(bad)?;
        let pcwr = match p {
            "pcwr-on" => true,
            "pcwr-off" => false,
            _ => return Err(bad()),
        };
        let pas_interval = a.strip_prefix("pas-").and_then(|n| n.parse().ok()).filter(|&n| n >= 1).ok_or_else(bad)?;
        Ok(Self { pcwr, pas_interval })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variants: Vec<Variant>,
    pub lives: u64,
    pub seeds: Vec<u64>,
    pub opponent_level: u8,
    pub out: PathBuf,
    /// Snapshot cadence in kill-or-death events; 0 keeps only the final table.
    pub snapshot_every: u64,
    /// Drive the simulator over TCP through a server bound here.
    pub listen: Option<String>,
    pub ground_truth_attribution: bool,
    pub event_log: bool,
    /// Everything else about the world; seed, level and delay come per session.
    pub sim: SimConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            variants: Variant::GRID.to_vec(),
            lives: 200,
            seeds: vec![1, 2, 3],
            opponent_level: 3,
            out: PathBuf::from("runs"),
            snapshot_every: 25,
            listen: None,
            ground_truth_attribution: false,
            event_log: false,
            sim: SimConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.into()));
        if self.lives == 0 {
            return bad("lives must be at least 1");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.variants.is_empty() {
            return bad("at least one configuration is required");
        }
        if !valid_level(self.opponent_level) {
            return bad("opponent level must be 1..=5");
        }
        for v in &self.variants {
            v.agent().validate().map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        }
        let mut sim = self.sim.clone();
        sim.opponent_level = self.opponent_level;
        sim.validate().map_err(|e| HarnessError::InvalidConfig(e.to_string()))
    }

    pub fn session(&self, variant: Variant, seed: u64) -> SessionSpec {
        SessionSpec {
            seed,
            level: self.opponent_level,
            registration_delay: self.sim.weapon.registration_delay,
            lives: self.lives,
            agent: variant.agent(),
            snapshot_every: self.snapshot_every,
            ground_truth_attribution: self.ground_truth_attribution,
            record_events: self.event_log,
        }
    }

    pub fn seed_dir(&self, variant: Variant, seed: u64) -> PathBuf {
        self.out.join(variant.to_string()).join(seed.to_string())
    }
}

/// One finished session.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub variant: Variant,
    pub seed: u64,
    pub outcome: SessionOutcome,
    pub row: SeedRow,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub results: Vec<SeedResult>,
    pub configs: Vec<(Variant, ConfigAggregate)>,
}

impl RunReport {
    pub fn aggregate(&self, v: Variant) -> Option<&ConfigAggregate> {
        self.configs.iter().find(|(c, _)| *c == v).map(|(_, a)| a)
    }

    pub fn seeds_of(&self, v: Variant) -> impl Iterator<Item = &SeedResult> {
        self.results.iter().filter(move |r| r.variant == v)
    }
}

fn run_one(cfg: &RunConfig, variant: Variant, seed: u64, server: Option<&str>) -> Result<SeedResult, HarnessError> {
    let dir = cfg.seed_dir(variant, seed);
    let io = |source| OutputError::Io { path: dir.display().to_string(), source };
    fs::create_dir_all(&dir).map_err(io)?;
    let spec = cfg.session(variant, seed);
    let session_err = |source| HarnessError::Session { config: variant.to_string(), seed, source };

    let mut sim = cfg.sim.clone();
    sim.opponent_level = cfg.opponent_level;
    let mut transport: Box<dyn Transport> = match server {
        Some(addr) => Box::new(Tcp::connect(addr).map_err(|e| session_err(LearnerError::Io(e)))?),
        None => Box::new(InProcess::new(sim)),
    };
    let snap = |life: u64, q: &crate::sarsa::QTable| snapshot::save(q, &dir.join(format!("qtab_{life}.bin")));
    let outcome = play(transport.as_mut(), &spec, snap).map_err(session_err)?;
    write_seed_files(&dir, &outcome, cfg.event_log)?;
    let row = SeedRow::from_lives(seed, &outcome.lives)?;
    output::write_summary(&dir.join("summary.csv"), &row.summary)?;
    Ok(SeedResult { variant, seed, outcome, row })
}

fn write_seed_files(dir: &Path, o: &SessionOutcome, events: bool) -> Result<(), HarnessError> {
    output::write_lives(&dir.join("lives.csv"), &o.lives)?;
    output::write_buckets(&dir.join("buckets.csv"), &o.lives)?;
    output::write_selections(&dir.join("selections.csv"), &o.selections)?;
    output::write_periods(&dir.join("periods.csv"), &o.periods)?;
    write_heatmaps(dir, &o.selections)?;
    if events {
        output::write_events(&dir.join("events.csv"), &o.events)?;
    }
    Ok(())
}

/// Selection histograms over each tenth of the run, keyed by the closing life.
pub fn heatmap_windows(selections: &[[u64; crate::NUM_ACTIONS]]) -> Vec<(usize, [u64; crate::NUM_ACTIONS])> {
    let mut start = 0;
    output::heatmap_checkpoints(selections.len())
        .into_iter()
        .map(|end| {
            let c = sum_counts(&selections[start..end]);
            start = end;
            (end, c)
        })
        .collect()
}

fn write_heatmaps(dir: &Path, selections: &[[u64; crate::NUM_ACTIONS]]) -> Result<(), HarnessError> {
    for (life, counts) in heatmap_windows(selections) {
        match output::write_heatmap(&dir.join(format!("heatmap_{life}.csv")), &counts) {
            Err(OutputError::Metrics(MetricsError::EmptyWindow)) | Ok(()) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn write_aggregates(out: &Path, rows: &[(Variant, Vec<SeedRow>)]) -> Result<Vec<(Variant, ConfigAggregate)>, HarnessError> {
    let mut rows: Vec<&(Variant, Vec<SeedRow>)> = rows.iter().collect();
    rows.sort_by_key(|(v, _)| *v);
    let mut configs = Vec::new();
    for (v, seeds) in rows {
        output::write_config_summary(&out.join(v.to_string()).join("summary.csv"), seeds)?;
        configs.push((*v, ConfigAggregate::of(seeds)));
    }
    let named: Vec<(String, ConfigAggregate)> = configs.iter().map(|(v, a)| (v.to_string(), a.clone())).collect();
    output::write_report(&out.join("report.csv"), &named)?;
    Ok(configs)
}

/// Plays every (configuration, seed) pair in parallel and writes all
/// artifacts. Failed pairs leave the others' outputs untouched.
pub fn run(cfg: &RunConfig) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out).map_err(|source| OutputError::Io { path: cfg.out.display().to_string(), source })?;
    let server = match &cfg.listen {
        Some(addr) => {
            let mut sim = cfg.sim.clone();
            sim.opponent_level = cfg.opponent_level;
            let (local, _) = spawn_server(addr.as_str(), sim).map_err(HarnessError::Server)?;
            Some(local.to_string())
        }
        None => None,
    };
    let jobs: Vec<(Variant, u64)> =
        cfg.variants.iter().flat_map(|&v| cfg.seeds.iter().map(move |&s| (v, s))).collect();
    let outcomes: Vec<Result<SeedResult, HarnessError>> =
        jobs.par_iter().map(|&(v, s)| run_one(cfg, v, s, server.as_deref())).collect();

    let total = outcomes.len();
    let mut results = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(e) => errors.push(e),
        }
    }
    let rows: Vec<(Variant, Vec<SeedRow>)> = cfg
        .variants
        .iter()
        .map(|&v| (v, results.iter().filter(|r| r.variant == v).map(|r| r.row.clone()).collect::<Vec<_>>()))
        .filter(|(_, r)| !r.is_empty())
        .collect();
    let configs = write_aggregates(&cfg.out, &rows)?;
    if !errors.is_empty() {
        let failed = errors.len();
        return Err(HarnessError::Partial { failed, total, first: Box::new(errors.remove(0)) });
    }
    Ok(RunReport { results, configs })
}

/// Rebuilds every summary, bucket series and the report from the
/// `lives.csv` files under `out`.
pub fn report(out: &Path) -> Result<Vec<(Variant, ConfigAggregate)>, HarnessError> {
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| OutputError::Io { path, source }
    };
    let mut variants: Vec<(Variant, PathBuf)> = Vec::new();
    for entry in fs::read_dir(out).map_err(io(out))? {
        let entry = entry.map_err(io(out))?;
        if let Some(v) = entry.file_name().to_str().and_then(|n| n.parse::<Variant>().ok()) {
            if entry.path().is_dir() {
                variants.push((v, entry.path()));
            }
        }
    }
    variants.sort();
    let mut rows = Vec::new();
    for (v, dir) in variants {
        let mut seeds: Vec<(u64, PathBuf)> = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io(&dir))? {
            let entry = entry.map_err(io(&dir))?;
            if let Some(seed) = entry.file_name().to_str().and_then(|n| n.parse::<u64>().ok()) {
                if entry.path().join("lives.csv").is_file() {
                    seeds.push((seed, entry.path()));
                }
            }
        }
        seeds.sort();
        let mut seed_rows = Vec::new();
        for (seed, sd) in seeds {
            let lives = output::read_lives(&sd.join("lives.csv"))?;
            let row = SeedRow::from_lives(seed, &lives)?;
            output::write_summary(&sd.join("summary.csv"), &row.summary)?;
            output::write_buckets(&sd.join("buckets.csv"), &lives)?;
            seed_rows.push(row);
        }
        if !seed_rows.is_empty() {
            rows.push((v, seed_rows));
        }
    }
    if rows.is_empty() {
        return Err(HarnessError::InvalidConfig(format!("no runs found under {}", out.display())));
    }
    write_aggregates(out, &rows)
}
