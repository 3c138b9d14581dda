//! Independent reference implementations shared by the integration tests
//! and the acceptance suite.
#![allow(dead_code)]

use aimrl::protocol::{EventKind, Message};
use aimrl::reward_shaping::Outcome;
use aimrl::sarsa::Successor;
use aimrl::{AimAction, QTable, StateKey, NUM_ACTIONS};
use rand::Rng;

/// Cluster-weighted rewards by explicit enumeration of maximal hit runs.
pub fn pcwr_oracle(outcomes: &[Outcome], hit: f64, miss: f64) -> Vec<f64> {
    let n = outcomes.len();
    let is_hit = |i: isize| i >= 0 && (i as usize) < n && outcomes[i as usize] == Outcome::Hit;
    let mut out: Vec<f64> = vec![miss; n];
    for l in 0..n as isize {
        for r in l..n as isize {
            let all_hits = (l..=r).all(is_hit);
            let maximal = !is_hit(l - 1) && !is_hit(r + 1);
            if !(all_hits && maximal) {
                continue;
            }
            if l == r {
                out[l as usize] = hit / 2.0;
            } else {
                for i in l..=r {
                    out[i as usize] = if i == l || i == r { hit } else { 2.0 * hit };
                }
            }
        }
    }
    out
}

/// Every outcome string of length `len`, in binary counting order (bit set = hit).
pub fn all_outcome_strings(len: usize) -> impl Iterator<Item = Vec<Outcome>> {
    (0u32..1 << len).map(move |bits| {
        (0..len).map(|i| if bits >> i & 1 == 1 { Outcome::Hit } else { Outcome::Miss }).collect()
    })
}

/// A plain dense SARSA(lambda) learner over a small (state, action) window.
pub struct DenseReference {
    pub states: usize,
    pub actions: usize,
    pub q: Vec<Vec<f64>>,
    e: Vec<Vec<f64>>,
    alpha: f64,
    gamma: f64,
    lambda: f64,
}

impl DenseReference {
    pub fn new(states: usize, actions: usize, alpha: f64, gamma: f64, lambda: f64) -> Self {
        Self {
            states,
            actions,
            q: vec![vec![0.0; actions]; states],
            e: vec![vec![0.0; actions]; states],
            alpha,
            gamma,
            lambda,
        }
    }

    pub fn clear_traces(&mut self) {
        for row in &mut self.e {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    /// One backup; `next` is `None` for a terminal step.
    pub fn step(&mut self, s: usize, a: usize, r: f64, next: Option<(usize, usize)>) {
        let bootstrap = next.map_or(0.0, |(s2, a2)| self.q[s2][a2]);
        let delta = r + self.gamma * bootstrap - self.q[s][a];
        self.e[s][a] = 1.0;
        for x in 0..self.states {
            for y in 0..self.actions {
                self.q[x][y] += self.alpha * delta * self.e[x][y];
                self.e[x][y] *= self.gamma * self.lambda;
            }
        }
    }

    pub fn max_abs_diff(&self, table: &QTable) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.states {
            for a in 0..self.actions {
                let got = table.get(sk(s), ak(a));
                worst = worst.max((got - self.q[s][a]).abs());
            }
        }
        worst
    }

    pub fn write_into(&self, table: &mut QTable) {
        for s in 0..self.states {
            for a in 0..self.actions {
                table.set(sk(s), ak(a), self.q[s][a]);
            }
        }
    }
}

pub fn sk(i: usize) -> StateKey {
    StateKey::from_index(i).unwrap()
}

pub fn ak(i: usize) -> AimAction {
    AimAction::new(i).unwrap()
}

pub fn successor_pair(s: Successor) -> Option<(usize, usize)> {
    match s {
        Successor::Terminal => None,
        Successor::Next(s, a) => Some((s.index(), a.id())),
    }
}

/// Simpson's rule over `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn normal_pdf(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// P(|X| <= c) for X ~ N(0, sigma^2), by quadrature.
pub fn central_mass(c: f64, sigma: f64) -> f64 {
    simpson(|x| normal_pdf(x, sigma), -c, c, 400)
}

/// Probability that a centered shot with independent normal yaw and pitch
/// spread (degrees) crosses a `2*hw` x `2*hh` view-facing rectangle at
/// horizontal range `range`.
///
/// A ray with yaw `y` and pitch `p` meets the plane at lateral offset
/// `range * tan y` and height `range * tan p / cos y`.
pub fn analytic_hit_probability(sigma_deg: f64, range: f64, hw: f64, hh: f64) -> f64 {
    let s = sigma_deg.to_radians();
    let y_max = (hw / range).atan();
    simpson(
        |y| {
            let p_max = (hh * y.cos() / range).atan();
            normal_pdf(y, s) * central_mass(p_max, s)
        },
        -y_max,
        y_max,
        400,
    )
}

fn rand_float<R: Rng>(rng: &mut R) -> f64 {
    let k: i64 = rng.random_range(-10_000_000_000..=10_000_000_000);
    k as f64 / 1e6
}

fn rand_reason<R: Rng>(rng: &mut R) -> String {
    let len = rng.random_range(1..16);
    (0..len).map(|_| b"abcdefghijklmnopqrstuvwxyz_"[rng.random_range(0..27)] as char).collect()
}

/// A random well-formed message whose floats sit on the 1e-6 wire grid.
pub fn random_message<R: Rng>(rng: &mut R) -> Message {
    let tick = rng.random_range(0..u64::MAX / 2);
    match rng.random_range(0..6) {
        0 => Message::Cfg { tick, seed: rng.random(), level: rng.random_range(1..=5), delay: rng.random_range(0..10) },
        1 => Message::Obs {
            tick,
            visible: rng.random(),
            vf: rand_float(rng),
            vl: rand_float(rng),
            rot: rand_float(rng),
            dist: rand_float(rng).abs(),
        },
        2 => Message::Act { tick, shoot: rng.random(), aid: rng.random_range(0..NUM_ACTIONS as u32) },
        3 => {
            let kill = rng.random_bool(0.3);
            Message::Evt {
                tick,
                kind: if kill { EventKind::Kill } else { EventKind::Dmg },
                victim: rng.random_range(0..2),
                fired: (!kill && rng.random()).then(|| rng.random_range(0..tick + 1)),
                bullets: (!kill && rng.random()).then(|| rng.random_range(1..5)),
            }
        }
        4 => Message::End { tick, tallies: rng.random::<bool>().then(|| (rng.random_range(0..10_000), rng.random_range(0..10_000))) },
        _ => Message::Err { tick, reason: rand_reason(rng) },
    }
}

/// Lines that must be rejected, each with the reason slug the server reports.
pub const MALFORMED: &[(&str, &str)] = &[
    ("", "empty_line"),
    ("OBS t=", "missing_tick_value"),
    ("ACT", "missing_tick"),
    ("ACT shoot=1 aid=0", "missing_tick"),
    ("ACT t=abc shoot=1 aid=0", "non_numeric_value"),
    ("ACT t=-3 shoot=1 aid=0", "non_numeric_value"),
    ("ACT t=0 shoot=yes aid=0", "non_numeric_value"),
    ("ACT t=0 shoot=1 aid=1.5", "non_numeric_value"),
    ("ACT t=0 shoot=1 aid=", "malformed_field"),
    ("ACT t=0 shoot=1 =4", "malformed_field"),
    ("ACT t=0 shoot=1 aid", "malformed_field"),
    ("ACT t=0  shoot=1 aid=0", "malformed_field"),
    ("ACT t=0 shoot=1", "missing_key"),
    ("ACT t=0 shoot=1 aid=0 aid=0", "duplicate_key"),
    ("ACT t=0 shoot=1 aid=0 extra=1", "unknown_key"),
    ("ACT t=0 shoot=7 aid=0", "invalid_value"),
    ("ACT t=0 shoot=1 aid=99999999999999999999", "invalid_value"),
    ("act t=0 shoot=1 aid=0", "unknown_kind"),
    ("JUMP t=0", "unknown_kind"),
    ("OBS t=0 vis=1 vf=inf vl=0 rot=0 dist=0", "non_numeric_value"),
    ("OBS t=0 vis=1 vf=NaN vl=0 rot=0 dist=0", "non_numeric_value"),
    ("OBS t=0 vis=1 vf=1e2 vl=0 rot=0 dist=0", "non_numeric_value"),
    ("OBS t=0 vis=1 vf=.5 vl=0 rot=0 dist=0", "non_numeric_value"),
    ("EVT t=0 kind=BANG victim=1", "invalid_value"),
    ("END t=0 kills=1", "missing_key"),
    ("CFG t=0 seed=1 level=3", "missing_key"),
    ("ACT t=0 shoot=1 aid=0 \u{e9}=1", "unknown_key"),
];
