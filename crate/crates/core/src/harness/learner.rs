//! The learning bot as a protocol client.
//!
//! The bot fires whenever the opponent is visible. A shooting period opens
//! on the first firing tick and closes when the opponent drops out of
//! sight (after waiting out the registration delay so that late damage
//! still lands in the period), or at once on any kill or death.

use super::metrics::LifeMetrics;
use crate::action_grid::{AimAction, NUM_ACTIONS};
use crate::persistence::PasState;
use crate::protocol::{EventKind, Message, Transport, TransportError};
use crate::reward_shaping::{shape, Outcome, ShootingPeriodLog};
use crate::sarsa::{apply_period_updates, AgentConfig, QTable, Successor, TraceTable};
use crate::sim::AvatarId;
use crate::state_codec::{RelativeObservation, StateEncoder};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// RNG stream for the learner's own choices.
pub const AGENT_STREAM: u64 = 2;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("server refused {request}: {reason}")]
    Refused { request: String, reason: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("server tallies {server:?} disagree with client tallies {client:?}")]
    TallyMismatch { server: (u64, u64), client: (u64, u64) },
}

/// Everything one seed's session needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionSpec {
    pub seed: u64,
    pub level: u8,
    pub registration_delay: u64,
    pub lives: u64,
    pub agent: AgentConfig,
    /// Snapshot after every this many kill-or-death events; 0 disables.
    pub snapshot_every: u64,
    /// Credit damage to the tick that actually fired it instead of the
    /// latest firing tick. Diagnostic only.
    pub ground_truth_attribution: bool,
    pub record_events: bool,
}

/// One closed shooting period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub life: u64,
    pub start_tick: u64,
    pub outcomes: Vec<Outcome>,
    pub terminal: bool,
    pub reward_sum: f64,
}

impl PeriodRecord {
    pub fn outcome_string(&self) -> String {
        self.outcomes.iter().map(|o| o.symbol()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub lives: Vec<LifeMetrics>,
    /// Per-life histogram of the actions fired with.
    pub selections: Vec<[u64; NUM_ACTIONS]>,
    pub periods: Vec<PeriodRecord>,
    /// Final tallies as reported by the server.
    pub server_tallies: (u64, u64),
    pub fresh_selections: u64,
    /// `tick,kind,payload` lines when event recording is on.
    pub events: Vec<String>,
    pub q: QTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    Firing,
    Grace(u64),
}

struct Learner<'a> {
    spec: &'a SessionSpec,
    encoder: StateEncoder,
    q: QTable,
    e: TraceTable,
    pas: PasState,
    rng: ChaCha8Rng,
    phase: Phase,
    period: ShootingPeriodLog,
    period_start: u64,
    /// Closed without a death; waits for the next period's first pair.
    pending: Option<(ShootingPeriodLog, Vec<f64>)>,
    life: LifeMetrics,
    counts: [u64; NUM_ACTIONS],
    out: SessionOutcome,
    events_seen: u64,
}

impl<'a> Learner<'a> {
    fn new(spec: &'a SessionSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(AGENT_STREAM);
        Self {
            spec,
            encoder: StateEncoder::default(),
            q: QTable::new(),
            e: TraceTable::new(),
            pas: PasState::new(spec.agent.pas_interval),
            rng,
            phase: Phase::Idle,
            period: ShootingPeriodLog::new(),
            period_start: 0,
            pending: None,
            life: LifeMetrics::new(1, spec.agent.epsilon_for_deaths(0)),
            counts: [0; NUM_ACTIONS],
            out: SessionOutcome {
                lives: Vec::new(),
                selections: Vec::new(),
                periods: Vec::new(),
                server_tallies: (0, 0),
                fresh_selections: 0,
                events: Vec::new(),
                q: QTable::new(),
            },
            events_seen: 0,
        }
    }

    fn deaths(&self) -> u64 {
        self.out.lives.len() as u64
    }

    fn log(&mut self, tick: u64, kind: &str, payload: String) {
        if self.spec.record_events {
            self.out.events.push(format!("{tick},{kind},{payload}"));
        }
    }

    /// Chooses this tick's command from the observation at its start.
    fn decide(&mut self, tick: u64, obs: &RelativeObservation, visible: bool) -> Result<(bool, AimAction), LearnerError> {
        if !visible || matches!(self.phase, Phase::Grace(_)) {
            if self.phase == Phase::Firing {
                self.phase = Phase::Grace(self.spec.registration_delay);
                if self.spec.registration_delay == 0 {
                    self.close_period(false);
                }
            }
            return Ok((false, AimAction::CENTER));
        }
        let s = self.encoder.encode(obs).map_err(|e| LearnerError::Protocol(format!("bad observation: {e}")))?;
        let eps = self.spec.agent.epsilon_for_deaths(self.deaths());
        if self.phase == Phase::Idle {
            self.pas.reset();
            self.phase = Phase::Firing;
            self.period_start = tick;
        }
        let a = self.pas.next_action(self.q.row(s), eps, &mut self.rng);
        if self.period.is_empty() {
            if let Some((log, rewards)) = self.pending.take() {
                self.apply(&log, &rewards, Successor::Next(s, a));
            }
        }
        self.period.push(s, a, tick).map_err(|e| LearnerError::Protocol(e.to_string()))?;
        self.counts[a.id()] += 1;
        self.log(tick, "FIRE", format!("aid={}", a.id()));
        Ok((true, a))
    }

    fn apply(&mut self, log: &ShootingPeriodLog, rewards: &[f64], end: Successor) {
        apply_period_updates(&mut self.q, &mut self.e, log, rewards, end, &self.spec.agent)
            .expect("rewards are shaped from the same log");
    }

    fn close_period(&mut self, terminal: bool) {
        self.phase = Phase::Idle;
        if self.period.is_empty() {
            return;
        }
        let log = std::mem::take(&mut self.period);
        let rewards = shape(&log, &self.spec.agent).expect("period is non-empty");
        let outcomes = log.outcomes();
        let hits = outcomes.iter().filter(|o| **o == Outcome::Hit).count() as u64;
        let reward_sum: f64 = rewards.iter().sum();
        self.life.hits += hits;
        self.life.misses += outcomes.len() as u64 - hits;
        self.life.reward_sum += reward_sum;
        self.out.periods.push(PeriodRecord {
            life: self.life.life,
            start_tick: self.period_start,
            outcomes,
            terminal,
            reward_sum,
        });
        if terminal {
            self.apply(&log, &rewards, Successor::Terminal);
        } else {
            self.pending = Some((log, rewards));
        }
    }

    fn end_life(&mut self) {
        self.close_period(true);
        if let Some((log, rewards)) = self.pending.take() {
            self.apply(&log, &rewards, Successor::Terminal);
        }
        self.pas.reset();
        let next = self.life.life + 1;
        let finished = std::mem::replace(&mut self.life, LifeMetrics::new(next, 0.0));
        self.out.lives.push(finished);
        self.out.selections.push(std::mem::replace(&mut self.counts, [0; NUM_ACTIONS]));
        self.life.epsilon = self.spec.agent.epsilon_for_deaths(self.deaths());
    }

    fn on_event(&mut self, tick: u64, kind: EventKind, victim: u32, fired: Option<u64>, bullets: Option<u32>) -> Result<(), LearnerError> {
        let victim = AvatarId::from_code(victim).ok_or_else(|| LearnerError::Protocol(format!("unknown victim {victim}")))?;
        match (kind, victim) {
            (EventKind::Dmg, AvatarId::Opponent) => {
                let fired = fired.ok_or_else(|| LearnerError::Protocol("damage event without fired tick".into()))?;
                self.log(tick, "DMG", format!("fired={fired} bullets={}", bullets.unwrap_or(0)));
                // Damage from a burst fired just before the learner died
                // can arrive after its period is gone; it credits nothing.
                if self.spec.ground_truth_attribution {
                    let _ = self.period.mark_hit_at(fired);
                } else {
                    self.period.mark_latest_hit();
                }
            }
            (EventKind::Dmg, AvatarId::Learner) => self.log(tick, "HURT", String::new()),
            (EventKind::Kill, AvatarId::Opponent) => {
                self.log(tick, "KILL", "victim=1".into());
                self.life.kills += 1;
                self.close_period(true);
                self.events_seen += 1;
            }
            (EventKind::Kill, AvatarId::Learner) => {
                self.log(tick, "KILL", "victim=0".into());
                self.end_life();
                self.events_seen += 1;
            }
        }
        Ok(())
    }
}

fn expect_obs(replies: &[Message], request: &Message) -> Result<(u64, bool, RelativeObservation), LearnerError> {
    match replies.last() {
        Some(Message::Obs { tick, visible, vf, vl, rot, dist }) => Ok((
            *tick,
            *visible,
            RelativeObservation { vel_forward: *vf, vel_lateral: *vl, facing_angle: *rot, distance: *dist },
        )),
        Some(Message::Err { reason, .. }) => {
            Err(LearnerError::Refused { request: request.to_line(), reason: reason.clone() })
        }
        other => Err(LearnerError::Protocol(format!("expected OBS, got {other:?}"))),
    }
}

/// Plays one seed until `spec.lives` deaths. `on_snapshot` receives the
/// 1-based life index and the table at each snapshot point.
pub fn play<T, F>(transport: &mut T, spec: &SessionSpec, mut on_snapshot: F) -> Result<SessionOutcome, LearnerError>
where
    T: Transport + ?Sized,
    F: FnMut(u64, &QTable) -> std::io::Result<()>,
{
    spec.agent.validate().map_err(|e| LearnerError::Protocol(e.to_string()))?;
    let mut me = Learner::new(spec);
    let cfg = Message::Cfg { tick: 0, seed: spec.seed, level: spec.level, delay: spec.registration_delay };
    let mut replies = transport.exchange(&cfg)?;
    let mut request = cfg;
    while me.deaths() < spec.lives {
        let (tick, visible, obs) = expect_obs(&replies, &request)?;
        let (shoot, action) = me.decide(tick, &obs, visible)?;
        request = Message::Act { tick, shoot, aid: action.id() as u32 };
        replies = transport.exchange(&request)?;
        me.life.ticks_alive += 1;
        for m in &replies[..replies.len().saturating_sub(1)] {
            match m {
                Message::Evt { tick, kind, victim, fired, bullets } => {
                    let before = me.events_seen;
                    let life = me.life.life;
                    me.on_event(*tick, *kind, *victim, *fired, *bullets)?;
                    if me.events_seen > before && spec.snapshot_every > 0 && me.events_seen.is_multiple_of(spec.snapshot_every) {
                        on_snapshot(life, &me.q)?;
                    }
                }
                other => return Err(LearnerError::Protocol(format!("unexpected {}", other.kind()))),
            }
        }
        if let Phase::Grace(n) = me.phase {
            if n <= 1 {
                me.close_period(false);
            } else {
                me.phase = Phase::Grace(n - 1);
            }
        }
    }
    let (tick, _, _) = expect_obs(&replies, &request)?;
    let end = transport.exchange(&Message::End { tick, tallies: None })?;
    let server = match end.last() {
        Some(Message::End { tallies: Some(t), .. }) => *t,
        other => return Err(LearnerError::Protocol(format!("expected END, got {other:?}"))),
    };
    let kills: u64 = me.out.lives.iter().map(|l| l.kills).sum();
    let client = (kills, me.deaths());
    if server != client {
        return Err(LearnerError::TallyMismatch { server, client });
    }
    on_snapshot(spec.lives, &me.q)?;
    me.out.server_tallies = server;
    me.out.fresh_selections = me.pas.fresh_selections();
    me.out.q = me.q;
    Ok(me.out)
}
