use aimrl::harness::{self, RunConfig, Variant};
use aimrl::protocol::serve;
use aimrl::sim::SimConfig;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::net::TcpListener;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "aimrl", version, about = "Train and evaluate the aiming bot in the headless duel simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Play every (configuration, seed) pair and write metrics.
    Run {
        /// Cluster-weighted rewards; repeat or comma-separate for several.
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["off", "on"])]
        pcwr: Vec<Toggle>,
        /// Ticks each selected action is held for.
        #[arg(long, value_delimiter = ',', default_values = ["1", "3"])]
        pas: Vec<u32>,
        /// Deaths per seed.
        #[arg(long, default_value_t = 200)]
        lives: u64,
        #[arg(long, value_delimiter = ',', default_values = ["1", "2", "3"])]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        level: u8,
        #[arg(long, env = "AIMRL_OUT", default_value = "runs")]
        out: PathBuf,
        /// Drive the simulator over TCP through a server bound to this address.
        #[arg(long, env = "AIMRL_LISTEN")]
        listen: Option<String>,
        /// Snapshot the table after every N kills or deaths; 0 keeps only the final one.
        #[arg(long, default_value_t = 25)]
        snapshot_every: u64,
        /// Ticks between a damaging burst and its damage event.
        #[arg(long, default_value_t = 1)]
        delay: u64,
        /// 1500 lives over seeds 1..=10.
        #[arg(long)]
        full_scale: bool,
        /// Credit damage to the tick that fired it (diagnostic).
        #[arg(long)]
        ground_truth: bool,
        /// Also write events.csv per seed.
        #[arg(long)]
        event_log: bool,
    },
    /// Rebuild summaries and report.csv from the lives.csv files under DIR.
    Report {
        #[arg(env = "AIMRL_OUT")]
        dir: PathBuf,
    },
    /// Serve simulator sessions over TCP until interrupted.
    Serve {
        #[arg(long, env = "AIMRL_LISTEN", default_value = "127.0.0.1:7373")]
        listen: String,
    },
}

fn print_report(configs: &[(Variant, harness::output::ConfigAggregate)]) {
    let pct = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{:.2}%", 100.0 * v));
    println!("{:<16} {:>9} {:>9} {:>10} {:>9} {:>9} {:>9} {:>7}", "config", "hits", "misses", "reward", "acc", "first", "final", "K:D");
    for (v, a) in configs {
        println!(
            "{:<16} {:>9.2} {:>9.2} {:>10.1} {:>9} {:>9} {:>9} {:>7}",
            v.to_string(),
            a.avg_hits,
            a.avg_misses,
            a.avg_reward,
            pct(a.accuracy),
            pct(a.first_accuracy),
            pct(a.final_accuracy),
            a.kd.map_or("-".to_string(), |k| format!("{:.2}", k.0)),
        );
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            pcwr,
            pas,
            lives,
            seeds,
            level,
            out,
            listen,
            snapshot_every,
            delay,
            full_scale,
            ground_truth,
            event_log,
        } => {
            if pas.contains(&0) {
                bail!("--pas must be at least 1");
            }
            let mut variants: Vec<Variant> = pcwr
                .iter()
                .flat_map(|p| pas.iter().map(move |&n| Variant { pcwr: matches!(p, Toggle::On), pas_interval: n }))
                .collect();
            variants.sort();
            variants.dedup();
            let (lives, seeds) = if full_scale { (1500, (1..=10).collect()) } else { (lives, seeds) };
            let mut sim = SimConfig::default();
            sim.weapon.registration_delay = delay;
            let cfg = RunConfig {
                variants,
                lives,
                seeds,
                opponent_level: level,
                out,
                snapshot_every,
                listen,
                ground_truth_attribution: ground_truth,
                event_log,
                sim,
            };
            let t = Instant::now();
            let report = harness::run(&cfg).with_context(|| format!("run into {}", cfg.out.display()))?;
            print_report(&report.configs);
            eprintln!("{} sessions in {:.1?}; output in {}", report.results.len(), t.elapsed(), cfg.out.display());
        }
        Command::Report { dir } => {
            let configs = harness::report(&dir).with_context(|| format!("report for {}", dir.display()))?;
            print_report(&configs);
        }
        Command::Serve { listen } => {
            let listener = TcpListener::bind(&listen).with_context(|| format!("bind {listen}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            serve(listener, SimConfig::default())?;
        }
    }
    Ok(())
}
