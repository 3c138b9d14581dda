//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

mod common;

use aimrl::harness::{self, heatmap_windows, output, selection_entropy, RunConfig, RunReport, Variant};
use aimrl::protocol::{parse, serialize, SimSession};
use aimrl::reward_shaping::{pcwr_rewards_for, plain_rewards_for, Outcome, RunCensus};
use aimrl::sarsa::{apply_period_updates, epsilon_for_deaths, sarsa_step_update, AgentConfig, Successor};
use aimrl::sim::SimConfig;
use aimrl::{QTable, ShootingPeriodLog, TraceTable, NUM_ACTIONS};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Verdict = Result<String, String>;

fn check(cond: bool, detail: String) -> Verdict {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pcwr_oracle_equivalence() -> Verdict {
    let t = Instant::now();
    let cfg = AgentConfig::default();
    let mut n = 0;
    for len in 1..=12 {
        for s in all_outcome_strings(len) {
            if pcwr_rewards_for(&s, &cfg).map_err(|e| e.to_string())? != pcwr_oracle(&s, cfg.hit_reward, cfg.miss_penalty) {
                return Err(format!("mismatch on {s:?}"));
            }
            n += 1;
        }
    }
    use Outcome::{Hit as H, Miss as M};
    let worked = pcwr_rewards_for(&[M, H, H, H, M, H, M], &cfg).map_err(|e| e.to_string())?;
    let expected = vec![-1.0, 250.0, 500.0, 250.0, -1.0, 125.0, -1.0];
    let dt = t.elapsed();
    check(
        worked == expected && dt < Duration::from_secs(1),
        format!("{n} strings match, worked example {worked:?}, {dt:.2?}"),
    )
}

fn sarsa_reference_equivalence() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for ep in 0..1000 {
        let cfg = AgentConfig { pcwr_enabled: ep % 2 == 0, ..AgentConfig::default() };
        let (states, actions) = (rng.random_range(1..=10), rng.random_range(1..=4));
        let total = rng.random_range(1..=20);
        let mut reference = DenseReference::new(states, actions, cfg.alpha, cfg.gamma, cfg.lambda);
        let mut q = QTable::new();
        let mut e = TraceTable::new();
        let mut periods = Vec::new();
        let mut left = total;
        let mut tick = 0;
        while left > 0 {
            let len = rng.random_range(1..=left);
            left -= len;
            let mut log = ShootingPeriodLog::new();
            let mut outcomes = Vec::new();
            for _ in 0..len {
                tick += 1;
                log.push(sk(rng.random_range(0..states)), ak(rng.random_range(0..actions)), tick).unwrap();
                let o = if rng.random_bool(0.5) { Outcome::Hit } else { Outcome::Miss };
                if o == Outcome::Hit {
                    log.mark_latest_hit();
                }
                outcomes.push(o);
            }
            let rewards = aimrl::reward_shaping::shape_outcomes(&outcomes, &cfg).unwrap();
            periods.push((log, rewards));
        }
        for (i, (log, rewards)) in periods.iter().enumerate() {
            let end = periods
                .get(i + 1)
                .map_or(Successor::Terminal, |(n, _)| Successor::Next(n.steps()[0].state, n.steps()[0].action));
            apply_period_updates(&mut q, &mut e, log, rewards, end, &cfg).map_err(|e| e.to_string())?;
            reference.clear_traces();
            let steps = log.steps();
            for (j, st) in steps.iter().enumerate() {
                let next = steps.get(j + 1).map(|n| (n.state.index(), n.action.id())).or(successor_pair(end));
                reference.step(st.state.index(), st.action.id(), rewards[j], next);
            }
        }
        worst = worst.max(reference.max_abs_diff(&q));
    }
    let cfg = AgentConfig::default();
    let mut q = QTable::new();
    let mut e = TraceTable::new();
    sarsa_step_update(&mut q, &mut e, sk(3), ak(7), 250.0, Successor::Next(sk(4), ak(1)), &cfg);
    let first = q.get(sk(3), ak(7));
    sarsa_step_update(&mut q, &mut e, sk(4), ak(1), -1.0, Successor::Next(sk(5), ak(2)), &cfg);
    let second = q.get(sk(3), ak(7));
    let dt = t.elapsed();
    check(
        worst <= 1e-9 && first == 175.0 && second == 174.685 && dt < Duration::from_secs(5),
        format!("max diff {worst:.2e} over 1000 episodes, hand examples {first} / {second}, {dt:.2?}"),
    )
}

fn epsilon_schedule() -> Verdict {
    let cases = [(0, 0.20), (100, 0.17), (250, 0.14), (500, 0.05), (501, 0.05), (1500, 0.05), (u64::MAX, 0.05)];
    let got: Vec<(u64, f64)> = cases.iter().map(|&(d, _)| (d, epsilon_for_deaths(d))).collect();
    check(cases.iter().zip(&got).all(|(c, g)| c.1 == g.1), format!("{got:?}"))
}

const PAS1: [Variant; 2] = [Variant { pcwr: false, pas_interval: 1 }, Variant { pcwr: true, pas_interval: 1 }];
const PAS3: [Variant; 2] = [Variant { pcwr: false, pas_interval: 3 }, Variant { pcwr: true, pas_interval: 3 }];

fn pct(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{:.1}%", 100.0 * v))
}

fn learning_trend(rep: &RunReport) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for v in PAS3 {
        let a = rep.aggregate(v).ok_or(format!("{v} missing"))?;
        let pass = matches!((a.first_accuracy, a.final_accuracy), (Some(f), Some(l)) if l >= 1.2 * f);
        ok &= pass;
        parts.push(format!("{v} first {} final {}", pct(a.first_accuracy), pct(a.final_accuracy)));
    }
    check(ok, parts.join("; "))
}

fn pas_superiority(rep: &RunReport) -> Verdict {
    let a1 = rep.aggregate(PAS1[0]).ok_or("pas-1 missing")?;
    let a3 = rep.aggregate(PAS3[0]).ok_or("pas-3 missing")?;
    let acc = matches!((a1.final_accuracy, a3.final_accuracy), (Some(x), Some(y)) if y >= 1.15 * x);
    check(
        acc && a3.avg_hits > a1.avg_hits,
        format!(
            "pcwr off: final accuracy {} vs {}, hits/life {:.2} vs {:.2}",
            pct(a3.final_accuracy),
            pct(a1.final_accuracy),
            a3.avg_hits,
            a1.avg_hits
        ),
    )
}

fn mean_kd(rep: &RunReport, group: &[Variant]) -> f64 {
    let kds: Vec<f64> = group.iter().flat_map(|&v| rep.seeds_of(v).map(|r| r.row.summary.final_kd)).collect();
    kds.iter().sum::<f64>() / kds.len() as f64
}

fn kd_direction(rep: &RunReport) -> Verdict {
    let (k1, k3) = (mean_kd(rep, &PAS1), mean_kd(rep, &PAS3));
    check(k3.is_finite() && k3 > k1, format!("PAS-3 {k3:.3} vs PAS-1 {k1:.3}"))
}

fn reward_accounting(cfg: &RunConfig) -> Verdict {
    let agent = AgentConfig::default();
    let (mut periods, mut lives_checked, mut pcwr_total, mut plain_total) = (0, 0, 0.0, 0.0);
    let mut negatives = 0;
    for v in &cfg.variants {
        let shaping = v.agent();
        for &seed in &cfg.seeds {
            let dir = cfg.seed_dir(*v, seed);
            let logged = output::read_periods(&dir.join("periods.csv")).map_err(|e| e.to_string())?;
            let lives = output::read_lives(&dir.join("lives.csv")).map_err(|e| e.to_string())?;
            let mut per_life = vec![0.0; lives.len()];
            let mut census_by_life = vec![RunCensus::default(); lives.len()];
            let mut sums_by_life = vec![(0.0, 0.0); lives.len()];
            for (life, s, reward_sum) in &logged {
                let outcomes: Vec<Outcome> =
                    s.chars().map(|c| Outcome::from_symbol(c).ok_or(format!("bad symbol in {s}"))).collect::<Result<_, _>>()?;
                let pcwr: f64 = pcwr_rewards_for(&outcomes, &agent).map_err(|e| e.to_string())?.iter().sum();
                let plain: f64 = plain_rewards_for(&outcomes, &agent).map_err(|e| e.to_string())?.iter().sum();
                let oracle: f64 = pcwr_oracle(&outcomes, agent.hit_reward, agent.miss_penalty).iter().sum();
                if pcwr != oracle {
                    return Err(format!("{v}/{seed}: replayed PCWR {pcwr} vs oracle {oracle} on {s}"));
                }
                let census = RunCensus::of(&outcomes);
                if pcwr - plain != census.pcwr_minus_plain(&agent) || (pcwr < plain) != (census.isolated > 2 * census.interior) {
                    return Err(format!("{v}/{seed}: identity fails on {s}"));
                }
                let expected = if shaping.pcwr_enabled { pcwr } else { plain };
                if *reward_sum != expected {
                    return Err(format!("{v}/{seed}: logged reward {reward_sum} vs replayed {expected} on {s}"));
                }
                let i = (*life - 1) as usize;
                per_life[i] += reward_sum;
                census_by_life[i].add(census);
                sums_by_life[i].0 += pcwr;
                sums_by_life[i].1 += plain;
                pcwr_total += pcwr;
                plain_total += plain;
                periods += 1;
            }
            for (i, l) in lives.iter().enumerate() {
                if (l.reward_sum - per_life[i]).abs() > 1e-6 {
                    return Err(format!("{v}/{seed} life {}: lives.csv {} vs periods {}", i + 1, l.reward_sum, per_life[i]));
                }
                let c = census_by_life[i];
                let (p, q) = sums_by_life[i];
                if p - q != c.pcwr_minus_plain(&agent) || (p < q) != (c.isolated > 2 * c.interior) {
                    return Err(format!("{v}/{seed} life {}: identity fails", i + 1));
                }
                negatives += (p < q) as u32;
                lives_checked += 1;
            }
        }
    }
    check(
        periods > 0,
        format!(
            "{periods} periods and {lives_checked} lives replayed; PCWR below plain in {negatives} lives; replayed reward ratio {:.3}",
            pcwr_total / plain_total
        ),
    )
}

fn heatmap_concentration(rep: &RunReport) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for v in PAS3 {
        for r in rep.seeds_of(v) {
            let w = heatmap_windows(&r.outcome.selections);
            let entropy = |c: &[u64; NUM_ACTIONS]| selection_entropy(c).map_err(|e| format!("{v}/{}: {e}", r.seed));
            let (first, last) = (entropy(&w[0].1)?, entropy(&w[w.len() - 1].1)?);
            ok &= last < first;
            parts.push(format!("{v}/{} {first:.2}->{last:.2}", r.seed));
        }
    }
    check(ok && parts.len() == 6, format!("bits: {}", parts.join(", ")))
}

fn seed_artifacts(cfg: &RunConfig) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for v in &cfg.variants {
        for s in &cfg.seeds {
            let dir = cfg.seed_dir(*v, *s);
            let mut names: Vec<String> = fs::read_dir(&dir)
                .map(|rd| rd.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect())
                .unwrap_or_default();
            names.retain(|n| n == "lives.csv" || n == "summary.csv" || n.starts_with("qtab_"));
            names.sort();
            for n in names {
                let bytes = fs::read(dir.join(&n)).unwrap_or_default();
                out.push((format!("{v}/{s}/{n}"), bytes));
            }
        }
    }
    out
}

fn determinism(base: &RunConfig, root: &Path) -> Verdict {
    let again = RunConfig { out: root.join("again"), ..base.clone() };
    let socket = RunConfig { out: root.join("socket"), listen: Some("127.0.0.1:0".into()), ..base.clone() };
    let reference = seed_artifacts(base);
    harness::run(&again).map_err(|e| e.to_string())?;
    let rep_socket = harness::run(&socket).map_err(|e| e.to_string())?;
    let same = |other: &[(String, Vec<u8>)]| {
        reference.len() == other.len() && reference.iter().zip(other).all(|(a, b)| a == b)
    };
    let repeat_ok = same(&seed_artifacts(&again));
    let socket_ok = same(&seed_artifacts(&socket));
    let in_process = harness::run(&RunConfig { out: root.join("third"), ..base.clone() }).map_err(|e| e.to_string())?;
    let metrics_ok = in_process.results.len() == rep_socket.results.len()
        && in_process.results.iter().zip(&rep_socket.results).all(|(a, b)| a.outcome == b.outcome && a.row == b.row);
    check(
        !reference.is_empty() && repeat_ok && socket_ok && metrics_ok,
        format!(
            "{} files compared; repeat identical {repeat_ok}, socket files identical {socket_ok}, socket metrics identical {metrics_ok}",
            reference.len()
        ),
    )
}

fn protocol_robustness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for i in 0..100_000 {
        let m = random_message(&mut rng);
        let line = serialize(&m);
        match parse(&line) {
            Ok(back) if serialize(&back) == line && back == m => {}
            other => return Err(format!("message {i} {line:?} came back as {other:?}")),
        }
    }
    let mut s = SimSession::new(SimConfig::default());
    s.handle_line("CFG t=0 seed=8 level=3 delay=1\n");
    for (line, reason) in MALFORMED {
        match parse(line) {
            Err(e) if e.slug() == *reason => {}
            other => return Err(format!("{line:?}: expected {reason}, got {other:?}")),
        }
        let reply = s.handle_line(line);
        if reply != vec![format!("ERR t=0 reason={reason}\n")] {
            return Err(format!("{line:?}: session replied {reply:?}"));
        }
    }
    let alive = s.handle_line("ACT t=0 shoot=1 aid=5\n");
    check(
        alive.last().is_some_and(|l| l.starts_with("OBS t=1 ")),
        format!("100000 messages round-trip; {} malformed lines named, session still steps", MALFORMED.len()),
    )
}

fn main() -> ExitCode {
    let root = tempfile::tempdir().expect("temp dir");
    let cfg = RunConfig {
        variants: Variant::GRID.to_vec(),
        lives: 200,
        seeds: vec![1, 2, 3],
        opponent_level: 3,
        out: root.path().join("base"),
        ..Default::default()
    };
    let t = Instant::now();
    let study = harness::run(&cfg).map_err(|e| e.to_string());
    let study_time = t.elapsed();

    let from_study = |f: &dyn Fn(&RunReport) -> Verdict| match &study {
        Ok(rep) => f(rep),
        Err(e) => Err(format!("study run failed: {e}")),
    };
    let criteria: Vec<(&str, Verdict)> = vec![
        ("pcwr oracle equivalence", pcwr_oracle_equivalence()),
        ("sarsa reference equivalence", sarsa_reference_equivalence()),
        ("epsilon schedule", epsilon_schedule()),
        ("learning trend", from_study(&|r| learning_trend(r))),
        ("pas superiority", from_study(&|r| pas_superiority(r))),
        ("kill-death direction", from_study(&|r| kd_direction(r))),
        ("pcwr reward accounting", from_study(&|_| reward_accounting(&cfg))),
        ("heat-map concentration", from_study(&|r| heatmap_concentration(r))),
        ("determinism", from_study(&|_| determinism(&cfg, root.path()))),
        ("protocol robustness", protocol_robustness()),
    ];

    println!("study: 4 configs x 3 seeds x 200 lives in {study_time:.2?}");
    let mut failed = 0;
    for (i, (name, verdict)) in criteria.iter().enumerate() {
        match verdict {
            Ok(d) => println!("PASS #{} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL #{} {name}: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
